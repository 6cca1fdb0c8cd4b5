"""Absorbing fixed effects by (alternating) group demeaning."""

from __future__ import annotations

import numpy as np
import pandas as pd
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ambiguity_lab.errors import ConvergenceError, DomainError

COUNTRY_YEAR = ("country", "year")
PARTY = ("party_id",)


def normalize_fe_dims(fe_dims):
    """``["party_id", ("country", "year")] -> (("party_id",), ("country", "year"))``."""
    if fe_dims is None:
        return ()
    out = []
    for dim in fe_dims:
        if isinstance(dim, str):
            dim = tuple(p.strip() for p in dim.replace("*", ":").split(":"))
        out.append(tuple(dim))
    return tuple(out)


def fe_label(dim):
    return "x".join(dim)


def group_codes(frame, dim):
    """Integer codes ``0..G-1`` for the groups of ``dim`` (a tuple of columns)."""
    if len(dim) == 1:
        return pd.factorize(frame[dim[0]], sort=True)[0]
    return frame.groupby(list(dim), sort=True, dropna=False).ngroup().to_numpy()


def _indicator(codes):
    n = codes.size
    return coo_matrix((np.ones(n), (codes, np.arange(n))), shape=(int(codes.max()) + 1, n)).tocsr()


def _demean_once(x, codes, ind, counts):
    return x - ((ind @ x) / counts[:, None])[codes]


def demean(x, code_list, tol=1e-10, max_iter=10_000):
    """Project ``x`` (n x p) off the span of the group indicators in ``code_list``.

    One grouping is handled exactly; several are swept in turn until the
    largest absolute change over a full sweep drops below ``tol``.
    Returns ``(residual, iterations)``.
    """
    x = np.array(x, dtype=float, copy=True)
    if x.ndim == 1:
        x = x[:, None]
    if not code_list:
        raise DomainError("at least one fixed-effect dimension is required")
    parts = [(c, _indicator(c), np.bincount(c).astype(float)) for c in code_list]
    if len(parts) == 1:
        return _demean_once(x, *parts[0]), 1
    for it in range(1, max_iter + 1):
        prev = x
        for part in parts:
            x = _demean_once(x, *part)
        if np.max(np.abs(x - prev), initial=0.0) < tol:
            return x, it
    raise ConvergenceError(f"alternating demeaning did not reach tolerance {tol} in {max_iter} sweeps")


def dummy_residualize(x, code_list):
    """Residuals from least squares on the full set of group dummies."""
    n = x.shape[0]
    blocks = []
    for c in code_list:
        d = np.zeros((n, c.max() + 1))
        d[np.arange(n), c] = 1.0
        blocks.append(d)
    D = np.hstack(blocks)
    coef, *_ = np.linalg.lstsq(D, x, rcond=None)
    return x - D @ coef


def absorbed_df(code_list):
    """Number of linearly independent group indicators.

    Exact for one or two dimensions (levels minus connected components of the
    bipartite group graph); for more dimensions each extra grouping is assumed
    to lose one level to the intercept.
    """
    if not code_list:
        return 0
    levels = [int(c.max()) + 1 for c in code_list]
    if len(code_list) == 1:
        return levels[0]
    if len(code_list) == 2:
        a, b = code_list
        g = coo_matrix((np.ones(a.size), (a, b + levels[0])), shape=(sum(levels), sum(levels)))
        ncomp, _ = connected_components(g, directed=False)
        return sum(levels) - ncomp
    return levels[0] + sum(lv - 1 for lv in levels[1:])


def absorb_fixed_effects(panel, columns, fe_dims, tol=1e-10, max_iter=10_000, method="alternating"):
    """Return the FE-demeaned values of ``columns`` as an ``n x len(columns)`` array.

    ``method="dummies"`` residualizes on explicit dummy columns instead; it is
    exact but only practical for small panels.
    """
    dims = normalize_fe_dims(fe_dims)
    if not dims:
        raise DomainError("fe_dims must be non-empty")
    codes = [group_codes(panel, d) for d in dims]
    x = panel[list(columns)].to_numpy(dtype=float)
    if method == "dummies":
        return dummy_residualize(x, codes)
    return demean(x, codes, tol=tol, max_iter=max_iter)[0]
