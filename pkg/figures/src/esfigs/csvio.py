"""Reader for the simulator's CSV schema: '#'-prefixed metadata lines, one
header row, float columns."""

import math


class FigureDataError(ValueError):
    """Input CSV unusable for the requested figure."""


class Table:
    def __init__(self, meta, columns, rows):
        self.meta = meta
        self.columns = columns
        self.rows = rows

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        if name not in self.columns:
            raise FigureDataError(
                f"column {name!r} missing; file has {', '.join(self.columns)}")
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def read_table(path) -> Table:
    meta, columns, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line.lstrip("# ").partition("=")
                meta[key] = val
            elif columns is None:
                columns = line.split(",")
            else:
                vals = []
                for tok in line.split(","):
                    try:
                        vals.append(float(tok))
                    except ValueError:
                        vals.append(math.nan)
                rows.append(vals)
    if columns is None or not rows:
        raise FigureDataError(f"{path}: no data rows")
    return Table(meta, columns, rows)
