"""Visualization tools for training progress and finished runs."""
from .plot_manager import RunPlotManager
from .progress_tracking import TrainingProgressTracker

__all__ = ["RunPlotManager", "TrainingProgressTracker"]
