"""Live terminal table of training progress."""
import time
from typing import Any, Dict, List, Optional

from rich import box
from rich.console import Console
from rich.live import Live
from rich.table import Table

from ..utils.events import Event, EventType


class TrainingProgressTracker:
    """Renders trainer events as a rich table.

    Subscribe :meth:`handle_event` to a trainer, task or queue and show the
    table through :meth:`live_display`.
    """

    def __init__(self,
                 title: str,
                 max_epochs: int,
                 display_config: Optional[Dict[str, Any]] = None,
                 console: Optional[Console] = None):
        """Initialize the progress tracker.

        Args:
            title: Title for the progress table
            max_epochs: Epoch cap of the run, shown next to the current epoch
            display_config: Optional display configuration
                {
                    "refresh_rate": float,    # Updates per second
                    "show_time": bool,        # Show elapsed time
                    "max_history": int,       # Epoch rows to show
                }
            console: Console to render on; a new one by default
        """
        self.title = title
        self.max_epochs = max_epochs
        self.display_config = display_config or {
            "refresh_rate": 2,
            "show_time": True,
            "max_history": 10,
        }
        self.start_time = time.time()
        self.epoch = 0
        self.batch_loss: Optional[float] = None
        self.best_val_msle = float("inf")
        self.best_epoch = 0
        self.status = "running"
        self.epochs: List[Dict[str, float]] = []
        self.console = console or Console()
        self._live: Optional[Live] = None

    def handle_event(self, event: Event) -> None:
        """Update from a training event and refresh the live display."""
        data = event.data
        if event.event_type == EventType.BATCH_COMPLETED:
            self.batch_loss = data.get("loss")
            self.epoch = data.get("epoch", self.epoch)
        elif event.event_type == EventType.EPOCH_COMPLETED:
            self.epoch = data["epoch"]
            self.best_val_msle = data.get("best_val_msle", self.best_val_msle)
            self.best_epoch = data.get("best_epoch", self.best_epoch)
            self.epochs.append({"epoch": data["epoch"], "train_loss": data["train_loss"],
                                "val_msle": data["val_msle"]})
            self.epochs = self.epochs[-self.display_config["max_history"]:]
        elif event.event_type == EventType.EARLY_STOPPED:
            self.status = "early stop"
        elif event.event_type == EventType.TRAINING_COMPLETED:
            self.status = "interrupted" if data.get("interrupted") else "done"
        elif event.event_type == EventType.TRAINING_ERROR:
            self.status = "diverged"
        if self._live is not None:
            self._live.update(self.create_table())

    def create_table(self) -> Table:
        """Create and return the progress table."""
        table = Table(title=self.title, box=box.ROUNDED)
        if self.display_config["show_time"]:
            table.add_column("Time", justify="right", style="cyan", width=8)
        table.add_column("Epoch", justify="right", style="cyan", width=9)
        table.add_column("Batch loss", justify="right", style="magenta", width=11)
        table.add_column("Train loss", justify="right", style="magenta", width=11)
        table.add_column("Val MSLE", justify="right", style="red", width=10)
        table.add_column("Best", justify="right", style="green", width=14)
        table.add_column("Status", style="cyan", width=11)

        row = []
        if self.display_config["show_time"]:
            row.append(f"{time.time() - self.start_time:.1f}s")
        best = f"{self.best_val_msle:.4f} @{self.best_epoch}" if self.best_epoch else "-"
        batch = f"{self.batch_loss:.4f}" if self.batch_loss is not None else "-"
        row.extend([f"{self.epoch}/{self.max_epochs}", batch, "-", "-", best, self.status])
        table.add_row(*row)

        for record in reversed(self.epochs):
            row = ["-"] if self.display_config["show_time"] else []
            row.extend([str(record["epoch"]), "-", f"{record['train_loss']:.4f}",
                        f"{record['val_msle']:.4f}", "*" if record["epoch"] == self.best_epoch else "", ""])
            table.add_row(*row)
        return table

    def live_display(self) -> Live:
        """Create a Live display context manager that follows :meth:`handle_event`."""
        self._live = Live(
            self.create_table(),
            refresh_per_second=self.display_config["refresh_rate"],
            console=self.console,
        )
        return self._live
