import json
import math
from enum import Enum
from typing import Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator
from rich.console import Console
from rich.markup import escape
from rich.table import Table

Cell = Union[float, int, str, None]


def _json_cell(value):
    """Non-finite floats become null; JSON has no NaN or Infinity."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    PRETTY = "pretty"


class OutputTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    title: str = ""
    columns: list[tuple[str, str]]
    rows: list[tuple[Cell, ...]]

    @model_validator(mode="after")
    def _rectangular(self):
        width = len(self.columns)
        for k, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {k} has {len(row)} cells, expected {width}")
        return self

    @property
    def names(self):
        return [name for name, _unit in self.columns]

    def column(self, name):
        idx = self.names.index(name)
        return [row[idx] for row in self.rows]

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=self.names)

    def render(self, fmt=OutputFormat.CSV):
        fmt = OutputFormat(fmt)
        if fmt == OutputFormat.CSV:
            return self.to_frame().to_csv(index=False, float_format="%.17g", lineterminator="\n")
        if fmt == OutputFormat.JSON:
            records = [dict(zip(self.names, map(_json_cell, row))) for row in self.rows]
            return json.dumps(records, indent=2, allow_nan=False) + "\n"
        return self._pretty()

    def _pretty(self):
        table = Table(title=self.title or None)
        for name, unit in self.columns:
            table.add_column(escape(f"{name} [{unit}]") if unit else name, justify="right")
        for row in self.rows:
            table.add_row(*("" if v is None else f"{v:.10g}" if isinstance(v, float) else str(v) for v in row))
        console = Console(record=True, width=160)
        with console.capture() as capture:
            console.print(table)
        return capture.get()
