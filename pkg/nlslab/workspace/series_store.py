"""
Persistence of diagnostic series and reports as CSV files.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Sequence

import numpy as np
import polars as pl

from nlslab.config import FILE_CONFIG
from nlslab.logging_helpers import get_logger

logger = get_logger("series_store")


@dataclass
class TimeSeries:
    """Tagged sequence of scalar diagnostics against time."""

    name: str
    t: np.ndarray
    columns: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        for key, values in self.columns.items():
            values = np.asarray(values)
            if values.shape != self.t.shape:
                raise ValueError(f"column '{key}' has shape {values.shape}, t has {self.t.shape}")
            self.columns[key] = values

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, key: str) -> np.ndarray:
        return self.columns[key]

    def window(self, t_min: float, t_max: float) -> "TimeSeries":
        mask = (self.t >= t_min) & (self.t <= t_max)
        return TimeSeries(self.name, self.t[mask], {k: v[mask] for k, v in self.columns.items()})

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame(_split_complex({"t": self.t, **self.columns}))


def _split_complex(columns: Mapping[str, np.ndarray]) -> Dict[str, np.ndarray]:
    flat = {}
    for key, values in columns.items():
        values = np.asarray(values)
        if np.iscomplexobj(values):
            flat[f"re_{key}"] = values.real
            flat[f"im_{key}"] = values.imag
        else:
            flat[key] = values
    return flat


class SeriesStore:
    """
    Writes series to <out>/series and tables to <out>/reports.
    """

    def __init__(self, out_dir: str = FILE_CONFIG["output_dir"]):
        self.out_dir = Path(out_dir)
        self.series_dir = self.out_dir / FILE_CONFIG["series_dir"]
        self.reports_dir = self.out_dir / FILE_CONFIG["reports_dir"]
        self.written: List[Path] = []

    def _write(self, frame: pl.DataFrame, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.write_csv(
            path,
            float_precision=FILE_CONFIG["float_precision"],
            float_scientific=FILE_CONFIG["float_scientific"],
        )
        self.written.append(path)
        logger.info(f"Saved {frame.height:,} rows to {path}")
        return path

    def write_series(self, series: TimeSeries) -> Path:
        return self._write(series.to_frame(), self.series_dir / f"{series.name}.csv")

    def write_columns(self, name: str, columns: Mapping[str, np.ndarray]) -> Path:
        """Write arbitrary named columns (e.g. a spectrum) under series/."""
        return self._write(pl.DataFrame(_split_complex(columns)), self.series_dir / f"{name}.csv")

    def write_report(self, name: str, rows: Sequence[Mapping[str, object]],
                     schema: Sequence[str]) -> Path:
        """Write one table row per mapping, columns ordered as in schema."""
        frame = pl.DataFrame([{key: row[key] for key in schema} for row in rows],
                             schema=list(schema), orient="row")
        return self._write(frame, self.reports_dir / f"{name}.csv")


def read_series(path: str) -> pl.DataFrame:
    return pl.read_csv(path)
