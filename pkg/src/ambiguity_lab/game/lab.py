"""Parameter sweeps over (k, l) and a Monte Carlo cross-check of contest outcomes."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ambiguity_lab.errors import DomainError
from ambiguity_lab.game.core import (
    PROFILES,
    MetaAction,
    Regime,
    as_rational,
    canonical_game,
    outcome_table,
    profile_label,
    solve,
)
from ambiguity_lab.rng import stream

PHASE_HEADER = ("k", "l", "regime", "eq_profiles", "pC_AA", "pC_AC", "pC_CA", "pC_CC")


@dataclass(frozen=True)
class SweepGrid:
    """``k_values`` paired either with explicit ``l_values`` (full product) or ``l = k + l_offset``."""

    k_values: tuple
    l_values: tuple | None = None
    l_offset: Fraction | None = None

    def __post_init__(self):
        ks = tuple(as_rational(k) for k in self.k_values)
        if not ks:
            raise DomainError("sweep grid needs at least one k value")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise DomainError("k values must be strictly increasing")
        object.__setattr__(self, "k_values", ks)
        if (self.l_values is None) == (self.l_offset is None):
            raise DomainError("give exactly one of l_values or l_offset")
        if self.l_values is not None:
            object.__setattr__(self, "l_values", tuple(as_rational(l) for l in self.l_values))
        else:
            delta = as_rational(self.l_offset)
            if delta <= 0:
                raise DomainError("l_offset must be positive")
            object.__setattr__(self, "l_offset", delta)

    def pairs(self):
        """``[((i, j), k, l), ...]`` in sweep order."""
        if self.l_offset is not None:
            return [((i, 0), k, k + self.l_offset) for i, k in enumerate(self.k_values)]
        return [((i, j), k, l) for i, k in enumerate(self.k_values) for j, l in enumerate(self.l_values)]


@dataclass(frozen=True)
class PhaseRecord:
    k: Fraction
    l: Fraction
    regime: Regime
    equilibria: tuple
    payoffs: dict  # profile -> (pC, pE)

    def row(self):
        return {
            "k": _fmt(self.k),
            "l": _fmt(self.l),
            "regime": str(self.regime),
            "eq_profiles": ";".join(profile_label(p) for p in self.equilibria),
            **{f"pC_{c.value}{e.value}": _fmt(self.payoffs[(c, e)][0]) for c, e in PROFILES},
        }


def _fmt(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _evaluate(k, l, eps_b):
    report = solve(canonical_game(k, l), eps_b=eps_b)
    return PhaseRecord(k, l, report.regime, report.pure_equilibria, dict(report.payoffs.entries))


def sweep_grid(grid, eps_b=0, workers=1):
    """Solve every (k, l) cell of ``grid``; output order is the grid order."""
    pairs = grid.pairs()
    bad = [(idx, k, l) for idx, k, l in pairs if not 1 < k < l]
    if bad:
        idx, k, l = bad[0]
        raise DomainError(f"invalid grid cell {idx}: k={k}, l={l} violates 1 < k < l ({len(bad)} invalid)")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: _evaluate(p[1], p[2], eps_b), pairs))
    return [_evaluate(k, l, eps_b) for _, k, l in pairs]


def phase_table(records):
    """Render records as comma-separated text with the fixed phase header."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=PHASE_HEADER, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def read_phase_table(text):
    """Parse :func:`phase_table` output back into plain dicts with Fractions."""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {"regime": raw["regime"], "eq_profiles": [p for p in raw["eq_profiles"].split(";") if p]}
        for key in ("k", "l", "pC_AA", "pC_AC", "pC_CA", "pC_CC"):
            row[key] = Fraction(raw[key])
        rows.append(row)
    return rows


def monte_carlo_check(game, profile, n_samples, seed):
    """Simulated centrist win frequency and its binomial standard error.

    Committing parties' deviations are drawn uniformly at random; ambiguous
    parties are scored at their lottery's expected utility, exactly as the
    enumeration does. Ties count as half a win.
    """
    n = int(n_samples)
    if n < 1:
        raise DomainError("n_samples must be >= 1")
    profile = tuple(MetaAction(p) for p in profile)
    table = np.array(outcome_table(game, profile), dtype=float)
    rng = stream(seed, "game_lab.monte_carlo")
    i = rng.integers(0, table.shape[0], size=n) if table.shape[0] > 1 else np.zeros(n, dtype=np.intp)
    j = rng.integers(0, table.shape[1], size=n) if table.shape[1] > 1 else np.zeros(n, dtype=np.intp)
    freq = float(table[i, j].mean())
    se = float(np.sqrt(freq * (1.0 - freq) / n))
    return freq, se
