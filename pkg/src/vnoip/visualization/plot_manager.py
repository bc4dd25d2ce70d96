"""Loss curves and trend-versus-truth plots of a finished run."""
import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from ..data.sample import CascadeSample
from ..model import VNOIP
from ..utils.errors import DataError

logger = logging.getLogger(__name__)

LOSS_CURVE_CSV = "loss_curve.csv"
TRENDS_CSV = "trends.csv"
LOSS_CURVE_PNG = "loss_curve.png"
TRENDS_PNG = "trends.png"


class RunPlotManager:
    """Writes the CSV tables and figures of a run directory.

    Args:
        run_dir: Directory holding ``history.json``; outputs are written here
    """

    def __init__(self, run_dir: Path):
        self.run_dir = Path(run_dir)

    def load_history(self) -> List[Dict[str, float]]:
        path = self.run_dir / "history.json"
        if not path.exists():
            raise DataError(f"no training history at {path}; run 'train' first")
        return json.loads(path.read_text())

    def write_loss_curve(self, history: Sequence[Dict[str, float]]) -> Path:
        """Write ``loss_curve.csv`` and ``loss_curve.png``."""
        csv_path = self.run_dir / LOSS_CURVE_CSV
        with open(csv_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=["epoch", "train_loss", "val_msle"])
            writer.writeheader()
            for record in history:
                writer.writerow({key: record[key] for key in writer.fieldnames})

        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
        epochs = [r["epoch"] for r in history]
        ax1.plot(epochs, [r["train_loss"] for r in history], "b-", label="Training loss")
        ax1.set_ylabel("Loss")
        ax1.set_title("Training Loss vs. Epoch")
        ax1.grid(True)
        ax1.legend()
        ax2.plot(epochs, [r["val_msle"] for r in history], "r-", label="Validation MSLE")
        if history:
            best = min(history, key=lambda r: r["val_msle"])
            ax2.axvline(best["epoch"], color="g", linestyle="--", label=f"Best epoch {best['epoch']}")
        ax2.set_xlabel("Epoch")
        ax2.set_ylabel("MSLE")
        ax2.set_title("Validation MSLE vs. Epoch")
        ax2.grid(True)
        ax2.legend()
        self._save(fig, LOSS_CURVE_PNG)
        return csv_path

    def write_trends(self, model: VNOIP, samples: Sequence[CascadeSample], max_cascades: int = 6) -> Path:
        """Write ``trends.csv`` and ``trends.png``: prior-mean trends against the true grid popularity.

        Raises:
            DataError: If the model has no trend module
        """
        if model.variant == "no_trend":
            raise DataError("the no_trend variant generates no popularity trend")
        chosen = sorted(samples, key=lambda s: s.cascade_id)[:max_cascades]
        rows = []
        for sample in chosen:
            trend = model.predict_trend(sample)
            truth = sample.grid_popularity
            for t, predicted, actual in zip(sample.grid_times, trend, truth):
                rows.append({"cascade_id": sample.cascade_id, "time": float(t),
                             "predicted": float(predicted), "actual": float(actual)})
        csv_path = self.run_dir / TRENDS_CSV
        with open(csv_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=["cascade_id", "time", "predicted", "actual"])
            writer.writeheader()
            writer.writerows(rows)

        fig, ax = plt.subplots(figsize=(8, 5))
        for i, sample in enumerate(chosen):
            points = [r for r in rows if r["cascade_id"] == sample.cascade_id]
            color = f"C{i % 10}"
            ax.plot([r["time"] for r in points], [r["predicted"] for r in points], "-", color=color,
                    label=f"{sample.cascade_id}")
            ax.plot([r["time"] for r in points], [r["actual"] for r in points], "o", color=color)
        ax.set_xlabel("Normalized time")
        ax.set_ylabel("Popularity")
        ax.set_title("Generated trend (lines) vs. truth (points)")
        ax.grid(True)
        if chosen:
            ax.legend(fontsize="small")
        self._save(fig, TRENDS_PNG)
        logger.info(f"Wrote trends of {len(chosen)} cascades to {csv_path}")
        return csv_path

    def _save(self, fig: Figure, name: str) -> None:
        fig.tight_layout()
        fig.savefig(self.run_dir / name)
        plt.close(fig)
