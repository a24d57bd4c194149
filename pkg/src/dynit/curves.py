"""Column tables written as CSV with a ``#``-prefixed metadata header."""

from __future__ import annotations

import csv
import datetime as _dt
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TIMESTAMP_KEY = "generated"


@dataclass(eq=False)
class CurveTable:
    columns: dict[str, np.ndarray]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"unequal column lengths: {sorted(lengths)}")

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CurveTable):
            return NotImplemented
        strip = lambda m: {k: v for k, v in m.items() if k != TIMESTAMP_KEY}
        return (self.names == other.names
                and strip(self.metadata) == strip(other.metadata)
                and all(np.array_equal(self[n], other[n], equal_nan=True) for n in self.names))

    def to_csv(self, path=None, timestamp: bool = True) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            if key != TIMESTAMP_KEY:
                buf.write(f"# {key}: {value}\n")
        if timestamp:
            now = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
            buf.write(f"# {TIMESTAMP_KEY}: {now}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.names)
        for row in zip(*self.columns.values()):
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "CurveTable":
        return cls.parse(Path(path).read_text())

    @classmethod
    def parse(cls, text: str) -> "CurveTable":
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = value
            elif line:
                body.append(line)
        rows = list(csv.reader(body))
        names, data = rows[0], rows[1:]
        cols = {n: np.array([float(r[i]) for r in data]) for i, n in enumerate(names)}
        return cls(cols, meta)


def strip_timestamp(csv_text: str) -> str:
    return "".join(line for line in csv_text.splitlines(keepends=True)
                   if not line.startswith(f"# {TIMESTAMP_KEY}:"))
