"""Column transforms on party-year panels: centrism, lags, validation.

A party-year panel is a :class:`pandas.DataFrame` with one row per
``(country, party_id, year)`` and per-dimension columns named
``<variable>_<dimension>``, e.g. ``position_economic``,
``blurriness_economic``, ``position_sd_economic``.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from ambiguity_lab.errors import DomainError, SchemaError

KEYS = ("country", "party_id", "year")
SCALE_MIN, SCALE_MAX = 0.0, 10.0
MIDPOINT = 5.0
BOUNDED_PREFIXES = ("position_", "blurriness_")


def col(var, dim):
    return f"{var}_{dim}"


def check_panel(panel):
    """Validate keys and 0-10 bounds; returns the panel unchanged."""
    missing = [k for k in KEYS if k not in panel.columns]
    if missing:
        raise SchemaError(f"panel is missing key columns {missing}")
    dup = panel.duplicated(list(KEYS))
    if dup.any():
        first = panel.loc[dup, list(KEYS)].iloc[0].tolist()
        raise SchemaError(f"duplicate (country, party_id, year) key {first}")
    for name in panel.columns:
        if not name.startswith(BOUNDED_PREFIXES) or name.startswith("position_sd_"):
            continue
        if "_lag" in name:
            continue
        vals = panel[name].to_numpy(dtype=float)
        bad = np.isfinite(vals) & ((vals < SCALE_MIN) | (vals > SCALE_MAX))
        if bad.any():
            raise DomainError(f"column {name!r} has {int(bad.sum())} values outside [0, 10]")
    return panel


def dimensions(panel):
    """Dimensions present in the panel, read off ``position_<dim>`` columns."""
    return [c[len("position_"):] for c in panel.columns
            if c.startswith("position_") and not c.startswith("position_sd_") and "_lag" not in c]


def extremism(position, reference=MIDPOINT):
    return np.abs(np.asarray(reference, dtype=float) - np.asarray(position, dtype=float))


def centrism_transform(position, mode="midpoint", reference=None):
    """Centrism ``5 - |reference - position|``.

    ``mode="midpoint"`` uses the scale midpoint 5 as reference. ``mode="median"``
    needs ``reference``, the median position of the party system; the same
    scale constant 5 is kept so the two measures differ only in the reference
    point (any constant is absorbed by fixed effects anyway). Works on scalars
    and arrays; NaN propagates.
    """
    pos = np.asarray(position, dtype=float)
    finite = pos[np.isfinite(pos)]
    if finite.size and ((finite < SCALE_MIN).any() or (finite > SCALE_MAX).any()):
        raise DomainError("position must lie in [0, 10]")
    if mode == "midpoint":
        if reference is not None and reference != MIDPOINT:
            raise DomainError("midpoint mode uses reference 5")
        ref = MIDPOINT
    elif mode == "median":
        if reference is None:
            raise DomainError("median mode needs the party-system median as reference")
        ref = reference
    else:
        raise DomainError(f"unknown centrism mode {mode!r}")
    out = MIDPOINT - extremism(pos, ref)
    return float(out) if np.ndim(out) == 0 else out


def add_centrism(panel, dim, mode="midpoint", system=("country", "year"), name=None):
    """Return a copy with a centrism column for ``dim``.

    In median mode the reference is the median position within each party
    system (``country`` x ``year`` by default).
    """
    pos_col = col("position", dim)
    out = panel.copy()
    if mode == "midpoint":
        out[name or col("centrism", dim)] = centrism_transform(out[pos_col].to_numpy(float))
    else:
        med = out.groupby(list(system))[pos_col].transform("median").to_numpy(float)
        out[name or col("centrism_median", dim)] = MIDPOINT - extremism(out[pos_col].to_numpy(float), med)
    return out


def build_lags(panel, columns, order=1, waves=None):
    """Add ``<column>_lag<order>`` holding the value from ``order`` waves earlier.

    Waves are the sorted distinct years in the panel (or ``waves``). A lag is
    only filled when the same party was observed in that exact earlier wave.
    """
    if order < 1:
        raise DomainError("lag order must be a positive integer")
    waves = sorted(panel["year"].unique()) if waves is None else sorted(waves)
    later = {waves[i - order]: w for i, w in enumerate(waves) if i >= order}
    names = {c: f"{c}_lag{order}" for c in columns}
    shifted = panel[[*KEYS, *columns]].rename(columns=names)
    shifted = shifted[shifted["year"].isin(list(later))].copy()
    shifted["year"] = shifted["year"].map(later).astype(panel["year"].dtype)
    out = panel.drop(columns=[n for n in names.values() if n in panel.columns])
    out = out.merge(shifted, on=list(KEYS), how="left", validate="one_to_one")
    out.index = panel.index
    return out
