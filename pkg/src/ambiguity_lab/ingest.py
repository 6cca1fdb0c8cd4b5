"""Reading expert-survey files and aggregating them to a party-year panel.

Expert tables are long: one row per expert x party x year x dimension, with
columns ``expert_id, country, party_id, year, dimension, position,
blurriness``. Files can be long (bind a ``dimension`` column) or wide, the
way CHES ships them, by binding ``position.<dim>`` / ``blurriness.<dim>``
to file columns. A binding starting with ``=`` is a constant, e.g.
``{"year": "=2019"}``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ambiguity_lab.econ.transforms import KEYS, centrism_transform, col
from ambiguity_lab.errors import ParseError, SchemaError

EXPERT_COLUMNS = ("expert_id", "country", "party_id", "year", "dimension", "position", "blurriness")

DIMENSIONS = {
    "economic": "economic left-right",
    "social": "social values (GAL-TAN)",
    "lrgen": "general left-right",
    "immigration": "immigration policy",
    "multiculturalism": "multiculturalism",
    "redistribution": "economic redistribution",
    "environment": "environmental sustainability",
    "spend_tax": "spending vs taxes",
    "deregulation": "deregulation of markets",
    "econ_intervention": "state intervention in the economy",
    "civlib_laworder": "civil liberties vs law and order",
    "social_lifestyle": "social lifestyle",
    "religious_principles": "religious principles in politics",
    "ethnic_minorities": "ethnic minority rights",
    "nationalism": "nationalism",
    "urban_rural": "urban vs rural interests",
    "protectionism": "protectionism",
    "decentralization": "decentralization",
    "anti_islam": "anti-Islam rhetoric",
    "anti_elite": "anti-elite rhetoric",
    "eu_integration": "European integration",
    "corruption_salience": "salience of reducing corruption",
}

# Wide CHES expert-file layout for the two blurriness dimensions; check the
# column names against the codebook of the release being read.
CHES_WIDE_SCHEMA = {
    "expert_id": "id",
    "country": "country",
    "party_id": "party_id",
    "position.economic": "lrecon",
    "blurriness.economic": "lrecon_blur",
    "position.social": "galtan",
    "blurriness.social": "galtan_blur",
}


@dataclass(frozen=True)
class AggregationPolicy:
    """Which expert groups survive aggregation.

    ``min_experts = 0`` keeps everything; filtering is opt-in.
    """

    min_experts: int = 0
    dimensions: tuple | None = None
    year_filter: tuple | None = None

    def __post_init__(self):
        if self.min_experts < 0:
            raise ValueError("min_experts must be >= 0")


def _bounded(text, line, column, required):
    text = text.strip()
    if text == "" or text.upper() in ("NA", "NAN"):
        if required:
            raise _Bad(line, column, "missing required value")
        return math.nan
    try:
        val = float(text)
    except ValueError:
        raise _Bad(line, column, f"not a number: {text!r}") from None
    if not math.isfinite(val) or not 0.0 <= val <= 10.0:
        raise _Bad(line, column, f"value {text} outside the 0-10 scale")
    return val


class _Bad(Exception):
    def __init__(self, line, column, reason):
        self.item = (line, column, reason)


def _resolve(schema_map, header):
    long = "dimension" in schema_map
    required = ["country", "party_id", "year"] + (["position", "dimension"] if long else [])
    absent = [f for f in required if f not in schema_map]
    if absent:
        raise SchemaError(f"schema_map lacks bindings for {absent}")
    if not long and not any(k.startswith("position.") for k in schema_map):
        raise SchemaError("wide schema_map needs at least one position.<dimension> binding")
    unknown = [v for v in schema_map.values() if not str(v).startswith("=") and v not in header]
    if unknown:
        raise SchemaError(f"file header lacks bound columns {unknown}")
    return long


def read_expert_table(path, schema_map=None, registry=DIMENSIONS):
    """Parse a comma-separated expert file into a typed expert table.

    Every malformed cell is collected and reported together in a
    :class:`ParseError` (1-based line numbers, header is line 1).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path} is empty; a header row is required") from None
        if schema_map is None:
            schema_map = {f: f for f in EXPERT_COLUMNS if f in header}
        long = _resolve(schema_map, header)
        pos = {name: i for i, name in enumerate(header)}

        def cell(row, field):
            src = schema_map[field]
            return src[1:] if src.startswith("=") else row[pos[src]]

        if long:
            measures = [(None, "position", "blurriness" if "blurriness" in schema_map else None)]
        else:
            dims = [k.split(".", 1)[1] for k in schema_map if k.startswith("position.")]
            measures = [(d, f"position.{d}", f"blurriness.{d}" if f"blurriness.{d}" in schema_map else None)
                        for d in dims]
        for dim, _, _ in measures:
            if dim is not None and dim not in registry:
                raise SchemaError(f"dimension {dim!r} is not in the registry")

        rows, problems = [], []
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                problems.append((line, "*", f"expected {len(header)} fields, found {len(row)}"))
                continue
            try:
                year_txt = cell(row, "year").strip()
                try:
                    year = int(float(year_txt))
                except ValueError:
                    raise _Bad(line, schema_map["year"], f"year is not an integer: {year_txt!r}") from None
                ident = {
                    "expert_id": cell(row, "expert_id").strip() if "expert_id" in schema_map else f"row{line}",
                    "country": cell(row, "country").strip(),
                    "party_id": cell(row, "party_id").strip(),
                    "year": year,
                }
                for f in ("country", "party_id"):
                    if not ident[f]:
                        raise _Bad(line, schema_map[f], "missing required value")
                for dim, pkey, bkey in measures:
                    if dim is None:
                        dim = cell(row, "dimension").strip()
                        if dim not in registry:
                            raise _Bad(line, schema_map["dimension"], f"unknown dimension {dim!r}")
                    position = _bounded(cell(row, pkey), line, schema_map[pkey], required=long)
                    if math.isnan(position):
                        continue
                    blur = _bounded(cell(row, bkey), line, schema_map[bkey], required=False) if bkey else math.nan
                    rows.append({**ident, "dimension": dim, "position": position, "blurriness": blur})
            except _Bad as bad:
                problems.append(bad.item)
        if problems:
            raise ParseError(problems)
    table = pd.DataFrame(rows, columns=list(EXPERT_COLUMNS))
    table["year"] = table["year"].astype("int64")
    return table


def write_expert_table(table, path):
    """Write an expert table with the canonical header; floats round-trip exactly."""
    table.loc[:, list(EXPERT_COLUMNS)].to_csv(path, index=False, float_format=None, lineterminator="\n")


def write_panel(panel, path):
    panel.to_csv(path, index=False, lineterminator="\n")


def read_panel(path):
    df = pd.read_csv(path, float_precision="round_trip", dtype={"country": str, "party_id": str})
    return df


def _shifted_mean(values, keys):
    """Group means computed as ``first + mean(x - first)``: exact when all values agree."""
    first = values.groupby(keys).transform("first")
    return first.groupby(keys).first() + (values - first).groupby(keys).mean()


def aggregate_party_year(table, policy=None):
    """Collapse expert ratings to one row per party-year.

    Per dimension: mean position, mean blurriness, sample SD of the position
    ratings (0 for a single expert), number of experts, and the midpoint
    centrism of the mean position. ``panel.attrs["aggregation"]`` holds the
    total / dropped / retained group counts.
    """
    policy = policy or AggregationPolicy()
    t = table
    if policy.dimensions is not None:
        t = t[t["dimension"].isin(list(policy.dimensions))]
    if policy.year_filter is not None:
        t = t[t["year"].isin(list(policy.year_filter))]
    keys = [*KEYS, "dimension"]
    grouped = t.groupby(keys, sort=True)
    n = grouped["position"].count()
    stats = pd.DataFrame({
        "position": _shifted_mean(t["position"], [t[k] for k in keys]),
        "blurriness": _shifted_mean(t["blurriness"], [t[k] for k in keys]),
        "position_sd": grouped["position"].std(ddof=1).where(n > 1, 0.0),
        "n_experts": n,
    })
    stats.index.names = keys
    total = len(stats)
    stats = stats[stats["n_experts"] >= policy.min_experts]
    counts = {"groups_total": total, "groups_dropped": total - len(stats), "groups_retained": len(stats)}

    wide = stats.unstack("dimension")
    wide.columns = [col(var, dim) for var, dim in wide.columns]
    wide = wide.reset_index()
    for dim in sorted(stats.index.get_level_values("dimension").unique()):
        wide[col("n_experts", dim)] = wide[col("n_experts", dim)].fillna(0).astype(int)
        wide[col("centrism", dim)] = centrism_transform(wide[col("position", dim)].to_numpy(dtype=float))
    wide.attrs["aggregation"] = counts
    return wide


def blurriness_sd_correlation(panel, dim):
    """Pearson correlation between mean blurriness and the SD of position ratings."""
    frame = panel[[col("blurriness", dim), col("position_sd", dim)]].dropna()
    return float(np.corrcoef(frame.to_numpy(dtype=float).T)[0, 1])
