"""
Loss history tracking for recovery runs
"""
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Dict, List, Optional
import csv

CSV_HEADER = ("step", "photometric", "smoothness", "specular", "total")


@dataclass
class HistoryEntry:
    """Loss terms recorded before one optimisation step"""
    step: int
    photometric: float
    smoothness: float
    specular: float
    total: float

    def to_dict(self) -> Dict:
        """Convert to dictionary for JSON serialization"""
        return asdict(self)

    def to_row(self) -> List[str]:
        # repr keeps the shortest round-tripping decimal, so the CSV is reproducible
        return [str(self.step)] + [repr(float(getattr(self, key))) for key in CSV_HEADER[1:]]


class LossHistory:
    """Track loss terms across a recovery run"""

    def __init__(self, history_file: Optional[Path] = None):
        """
        Initialize history tracker

        Args:
            history_file: Optional CSV file written by save()
        """
        self.history_file = history_file
        self.entries: List[HistoryEntry] = []

    def __len__(self) -> int:
        return len(self.entries)

    def track(self, step: int, breakdown) -> HistoryEntry:
        """
        Record one LossBreakdown

        Args:
            step: Step index the losses were evaluated at
            breakdown: Any object with photometric/smoothness/specular/total
        """
        entry = HistoryEntry(
            step=step,
            photometric=breakdown.photometric,
            smoothness=breakdown.smoothness,
            specular=breakdown.specular,
            total=breakdown.total,
        )
        self.entries.append(entry)
        return entry

    @property
    def totals(self) -> List[float]:
        return [entry.total for entry in self.entries]

    def get_summary(self) -> Dict:
        """Initial, final and best totals"""
        if not self.entries:
            return {"steps": 0, "initial_total": None, "final_total": None, "best_total": None}
        best = min(self.entries, key=lambda entry: entry.total)
        return {
            "steps": len(self.entries),
            "initial_total": self.entries[0].total,
            "final_total": self.entries[-1].total,
            "best_total": best.total,
            "best_step": best.step,
        }

    def write_csv(self, path: Path) -> Path:
        """Write step,photometric,smoothness,specular,total rows"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(CSV_HEADER)
            for entry in self.entries:
                writer.writerow(entry.to_row())
        return path

    def save(self) -> Optional[Path]:
        """Write to the configured history file, if any"""
        if self.history_file:
            return self.write_csv(self.history_file)
        return None

    @classmethod
    def read_csv(cls, path: Path) -> "LossHistory":
        history = cls(history_file=Path(path))
        with open(path, 'r', newline='', encoding='utf-8') as f:
            for row in csv.DictReader(f):
                history.entries.append(HistoryEntry(
                    step=int(row["step"]),
                    photometric=float(row["photometric"]),
                    smoothness=float(row["smoothness"]),
                    specular=float(row["specular"]),
                    total=float(row["total"]),
                ))
        return history
