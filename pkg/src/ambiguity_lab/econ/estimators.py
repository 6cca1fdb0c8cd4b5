"""Fixed-effects OLS and 2SLS with cluster-robust (CR1) inference.

Regressor terms are strings over panel columns: ``"position"``,
``"position^2"``, ``"centrism_economic*gdp_var_lag*opposition"``.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import stats

from ambiguity_lab.econ.fixed_effects import (
    absorbed_df,
    demean,
    dummy_residualize,
    fe_label,
    group_codes,
    normalize_fe_dims,
)
from ambiguity_lab.errors import (
    ClusterError,
    DegenerateError,
    DomainError,
    RankError,
    ShapeError,
    SingularError,
    WeakInstrumentWarning,
)

CONST = "const"
WEAK_F = 10.0
RANK_TOL = 1e-10


def parse_term(term):
    """``"a*b^2" -> [("a", 1), ("b", 2)]``."""
    factors = []
    for raw in term.replace("**", "^").split("*"):
        name, _, power = raw.strip().partition("^")
        if not name:
            raise DomainError(f"malformed term {term!r}")
        factors.append((name.strip(), int(power) if power else 1))
    return factors


def term_columns(term):
    return [name for name, _ in parse_term(term)]


def evaluate_term(frame, term):
    out = np.ones(len(frame))
    for name, power in parse_term(term):
        if name not in frame.columns:
            raise DomainError(f"term {term!r} refers to missing column {name!r}")
        out = out * frame[name].to_numpy(dtype=float) ** power
    return out


@dataclass(frozen=True)
class DesignSpec:
    """One regression: outcome, ordered terms, absorbed FE, cluster variable, instruments.

    ``instruments`` maps each endogenous term to the list of its excluded
    instrument terms; the union of those lists is used for every endogenous
    term, as in standard 2SLS.
    """

    outcome: str
    regressors: tuple
    fe_dims: tuple = (("country", "year"),)
    cluster: str | None = "party_id"
    instruments: dict | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(self, "fe_dims", normalize_fe_dims(self.fe_dims))
        if not self.regressors:
            raise DomainError("a design needs at least one regressor")
        if len(set(self.regressors)) != len(self.regressors):
            raise DomainError("duplicate regressor terms")
        if self.instruments:
            inst = {k: tuple(v) for k, v in self.instruments.items()}
            unknown = [k for k in inst if k not in self.regressors]
            if unknown:
                raise DomainError(f"instrumented terms {unknown} are not regressors")
            if len(self.excluded_instruments_from(inst)) < len(inst):
                raise DomainError("order condition fails: fewer excluded instruments than endogenous terms")
            object.__setattr__(self, "instruments", inst)

    @staticmethod
    def excluded_instruments_from(inst):
        return tuple(dict.fromkeys(itertools.chain.from_iterable(inst.values())))

    @property
    def endogenous(self):
        return tuple(t for t in self.regressors if self.instruments and t in self.instruments)

    @property
    def exogenous(self):
        return tuple(t for t in self.regressors if t not in self.endogenous)

    @property
    def excluded_instruments(self):
        return self.excluded_instruments_from(self.instruments) if self.instruments else ()

    def required_columns(self):
        terms = (*self.regressors, *self.excluded_instruments)
        cols = [self.outcome, *itertools.chain.from_iterable(term_columns(t) for t in terms)]
        cols += list(itertools.chain.from_iterable(self.fe_dims))
        if self.cluster:
            cols.append(self.cluster)
        return list(dict.fromkeys(cols))


@dataclass
class FitResult:
    params: pd.Series
    vcov: pd.DataFrame
    n_obs: int
    n_clusters: int
    df_model: int
    df_resid: int
    method: str = "ols"
    first_stage_F: float | None = None
    spec: DesignSpec | None = None
    diagnostics: dict = field(default_factory=dict)
    inference: str = "t"

    @property
    def coefficients(self):
        return self.params.to_dict()

    @property
    def vcov_clustered(self):
        return self.vcov

    @property
    def std_errors(self):
        return pd.Series(np.sqrt(np.clip(np.diag(self.vcov.to_numpy()), 0, None)), index=self.params.index)

    @property
    def tstats(self):
        return self.params / self.std_errors

    @property
    def pvalues(self):
        t = np.abs(self.tstats.to_numpy())
        if self.inference == "normal":
            p = 2 * stats.norm.sf(t)
        else:
            p = 2 * stats.t.sf(t, self.df_resid)
        return pd.Series(p, index=self.params.index)

    def covers(self, term, truth, n_se=3.0):
        return abs(self.params[term] - truth) <= n_se * self.std_errors[term]

    def significant(self, term, level=0.05):
        return bool(self.pvalues[term] < level)

    def peak(self):
        try:
            return peak_location(self)
        except (ShapeError, KeyError):
            return None

    def to_report(self):
        table = [
            {"term": t, "estimate": float(self.params[t]), "std_error": float(self.std_errors[t]),
             "t": float(self.tstats[t]), "p": float(self.pvalues[t])}
            for t in self.params.index
        ]
        return {
            "label": self.spec.label if self.spec else "",
            "method": self.method,
            "outcome": self.spec.outcome if self.spec else None,
            "fixed_effects": [fe_label(d) for d in self.spec.fe_dims] if self.spec else [],
            "cluster": self.spec.cluster if self.spec else None,
            "coefficients": table,
            "n_obs": self.n_obs,
            "n_clusters": self.n_clusters,
            "first_stage_F": self.first_stage_F,
            "peak": self.peak(),
            "diagnostics": self.diagnostics,
        }

    def to_json(self, **kw):
        return json.dumps(_finite(self.to_report()), indent=2, default=_jsonable, **kw)

    def summary(self):
        lines = [f"{self.method.upper()}  {self.spec.outcome if self.spec else ''}  "
                 f"n={self.n_obs}  clusters={self.n_clusters}"]
        lines.append(f"{'term':<40}{'coef':>11}{'se':>11}{'t':>9}{'p':>9}")
        se, t, p = self.std_errors, self.tstats, self.pvalues
        for term in self.params.index:
            lines.append(f"{term:<40}{self.params[term]:>11.4f}{se[term]:>11.4f}{t[term]:>9.2f}{p[term]:>9.3f}")
        if self.first_stage_F is not None:
            lines.append(f"first-stage F: {self.first_stage_F:.2f}")
        return "\n".join(lines)


def _finite(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return str(float(obj))
    return obj


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (tuple, set)):
        return list(x)
    return str(x)


@dataclass
class _Design:
    y: np.ndarray
    X: np.ndarray
    Z: np.ndarray | None
    names: list
    clusters: np.ndarray
    n_clusters: int
    absorbed: int
    diagnostics: dict


def _prepare(panel, spec, fe_method="alternating", tol=1e-10, max_iter=10_000):
    cols = spec.required_columns()
    missing = [c for c in cols if c not in panel.columns]
    if missing:
        raise DomainError(f"panel lacks columns {missing}")
    frame = panel[cols]
    complete = frame.notna().all(axis=1).to_numpy()
    values = [evaluate_term(frame, t) for t in (*spec.regressors, *spec.excluded_instruments)]
    for v in values:
        complete &= np.isfinite(v)
    complete &= np.isfinite(frame[spec.outcome].to_numpy(dtype=float))
    frame = frame.loc[complete]
    n = len(frame)
    if n == 0:
        raise DomainError("no complete rows for this specification")
    y = frame[spec.outcome].to_numpy(dtype=float)[:, None]
    X = np.column_stack([v[complete] for v in values[: len(spec.regressors)]])
    Z = None
    if spec.instruments:
        excl = np.column_stack([v[complete] for v in values[len(spec.regressors):]])
        Z = np.column_stack([X[:, [spec.regressors.index(t) for t in spec.exogenous]], excl])
    names = list(spec.regressors)
    diag = {"dropped_missing": int((~complete).sum())}

    codes = [group_codes(frame, d) for d in spec.fe_dims]
    if codes:
        stacked = np.hstack([y, X] + ([Z] if Z is not None else []))
        if fe_method == "dummies":
            stacked = dummy_residualize(stacked, codes)
            diag["fe_iterations"] = 0
        else:
            stacked, iters = demean(stacked, codes, tol=tol, max_iter=max_iter)
            diag["fe_iterations"] = iters
        y, X = stacked[:, :1], stacked[:, 1: 1 + X.shape[1]]
        if Z is not None:
            Z = stacked[:, 1 + X.shape[1]:]
        diag["absorbed_fe"] = {fe_label(d): int(c.max()) + 1 for d, c in zip(spec.fe_dims, codes)}
        diag["singleton_fe_groups"] = {fe_label(d): int((np.bincount(c) == 1).sum()) for d, c in zip(spec.fe_dims, codes)}
    else:
        X = np.column_stack([np.ones(n), X])
        if Z is not None:
            Z = np.column_stack([np.ones(n), Z])
        names = [CONST, *names]

    if spec.cluster:
        clusters = pd.factorize(frame[spec.cluster], sort=True)[0]
    else:
        clusters = np.arange(n)
    n_clusters = int(clusters.max()) + 1
    diag["singleton_clusters"] = int((np.bincount(clusters) == 1).sum())

    # FE nested within clusters do not cost residual degrees of freedom
    counted = [c for d, c in zip(spec.fe_dims, codes) if not (spec.cluster and _nested(c, clusters))]
    absorbed = absorbed_df(counted)
    diag["absorbed_df"] = absorbed
    return _Design(y[:, 0], X, Z, names, clusters, n_clusters, absorbed, diag)


def _nested(fe_codes, cluster_codes):
    """True when every FE group sits inside a single cluster."""
    pairs = pd.DataFrame({"g": fe_codes, "c": cluster_codes}).drop_duplicates()
    return not pairs["g"].duplicated().any()


def _check_rank(X, names):
    norms = np.linalg.norm(X, axis=0)
    scale = max(1.0, float(norms.max(initial=0.0)))
    dead = [names[i] for i in np.flatnonzero(norms <= RANK_TOL * scale)]
    if dead:
        raise RankError(f"terms {dead} have no variation left after absorbing fixed effects", dead)
    _, R, piv = scipy.linalg.qr(X / norms, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int((diag > RANK_TOL * 1e2 * diag[0]).sum()) if diag.size else 0
    if rank < X.shape[1]:
        bad = [names[i] for i in piv[rank:]]
        raise RankError(f"collinear design; drop one of {bad}", bad)


def _ls(X, y):
    Q, R = np.linalg.qr(X)
    return scipy.linalg.solve_triangular(R, Q.T @ y), R


def _cluster_vcov(Xs, resid, R, clusters, n_clusters, k_total):
    """CR1 sandwich ``c * B (sum_g s_g s_g') B`` with ``B = (R'R)^-1``."""
    n = Xs.shape[0]
    if n_clusters < 2:
        raise ClusterError(f"clustered inference needs at least 2 clusters, got {n_clusters}")
    if n <= k_total:
        raise DomainError(f"{n} observations cannot identify {k_total} parameters")
    scores = np.zeros((n_clusters, Xs.shape[1]))
    np.add.at(scores, clusters, Xs * resid[:, None])
    Rinv = scipy.linalg.solve_triangular(R, np.eye(R.shape[0]))
    bread = Rinv @ Rinv.T
    meat = scores.T @ scores
    c = n_clusters / (n_clusters - 1) * (n - 1) / (n - k_total)
    V = c * bread @ meat @ bread
    return (V + V.T) / 2


def _finish(des, beta, V, method, spec, inference, first_stage_F=None):
    idx = pd.Index(des.names)
    return FitResult(
        params=pd.Series(beta, index=idx),
        vcov=pd.DataFrame(V, index=idx, columns=idx),
        n_obs=int(des.X.shape[0]),
        n_clusters=des.n_clusters,
        df_model=int(des.X.shape[1]),
        df_resid=des.n_clusters - 1,
        method=method,
        first_stage_F=first_stage_F,
        spec=spec,
        diagnostics=des.diagnostics,
        inference=inference,
    )


def fit_ols_clustered(panel, spec, fe_method="alternating", inference="t", tol=1e-10, max_iter=10_000):
    """FE-OLS by QR on the demeaned design, CR1 clustered covariance.

    Rows with a missing value in any required column are dropped. The small
    sample factor is ``M/(M-1) * (n-1)/(n-K)`` where ``K`` counts the slope
    terms plus absorbed FE levels not nested within clusters. t tests use
    ``M - 1`` degrees of freedom (``inference="normal"`` for z tests).
    """
    if spec.instruments:
        raise DomainError("spec has instruments; use fit_2sls")
    des = _prepare(panel, spec, fe_method, tol, max_iter)
    _check_rank(des.X, des.names)
    beta, R = _ls(des.X, des.y)
    resid = des.y - des.X @ beta
    V = _cluster_vcov(des.X, resid, R, des.clusters, des.n_clusters, des.X.shape[1] + des.absorbed)
    return _finish(des, beta, V, "ols", spec, inference)


def _cluster_wald(b, V):
    try:
        return float(b @ np.linalg.solve(V, b))
    except np.linalg.LinAlgError as exc:
        raise SingularError("covariance block is singular") from exc


def fit_2sls(panel, spec, fe_method="alternating", inference="t", tol=1e-10, max_iter=10_000):
    """Two-stage least squares on the FE-demeaned system.

    ``first_stage_F`` is the cluster-robust Wald statistic of the excluded
    instruments divided by their number, from each endogenous term's first
    stage; with several endogenous terms the smallest is reported (all are
    kept in ``diagnostics["first_stage_F"]``).
    """
    if not spec.instruments:
        raise DomainError("fit_2sls needs instruments")
    des = _prepare(panel, spec, fe_method, tol, max_iter)
    names = des.names
    _check_rank(des.X, names)
    z_names = ([CONST] if CONST in names else []) + list(spec.exogenous) + list(spec.excluded_instruments)
    _check_rank(des.Z, z_names)

    Qz, _ = np.linalg.qr(des.Z)
    Xhat = des.X.copy()
    n_excl = len(spec.excluded_instruments)
    fs = {}
    for term in spec.endogenous:
        j = names.index(term)
        x = des.X[:, j]
        same = [i for i in range(des.Z.shape[1]) if np.array_equal(des.Z[:, i], x)]
        if same:
            fs[term] = math.inf  # the instrument is the regressor itself
            continue
        Xhat[:, j] = Qz @ (Qz.T @ x)
        g, Rz = _ls(des.Z, x)
        Vz = _cluster_vcov(des.Z, x - des.Z @ g, Rz, des.clusters, des.n_clusters, des.Z.shape[1] + des.absorbed)
        sel = slice(des.Z.shape[1] - n_excl, des.Z.shape[1])
        fs[term] = _cluster_wald(g[sel], Vz[sel, sel]) / n_excl
    beta, R = _ls(Xhat, des.y)
    resid = des.y - des.X @ beta
    V = _cluster_vcov(Xhat, resid, R, des.clusters, des.n_clusters, des.X.shape[1] + des.absorbed)
    F = min(fs.values())
    des.diagnostics["first_stage_F"] = fs
    if F < WEAK_F:
        warnings.warn(f"weak instruments: first-stage F = {F:.2f} < {WEAK_F:g}", WeakInstrumentWarning, stacklevel=2)
    return _finish(des, beta, V, "2sls", spec, inference, first_stage_F=float(F))


def fit(panel, spec, **kw):
    """Dispatch to OLS or 2SLS depending on whether ``spec`` has instruments."""
    return (fit_2sls if spec.instruments else fit_ols_clustered)(panel, spec, **kw)


def wald_joint_test(result, terms):
    """Clustered Wald test that all ``terms`` are zero; chi-square p-value."""
    terms = list(terms)
    unknown = [t for t in terms if t not in result.params.index]
    if unknown:
        raise DomainError(f"terms {unknown} are not in the fit")
    b = result.params[terms].to_numpy()
    V = result.vcov.loc[terms, terms].to_numpy()
    w = np.linalg.eigvalsh(V)
    if w.min() <= max(abs(w.max()), 1e-300) * 1e-12:
        raise SingularError(f"covariance block of {terms} is numerically singular")
    W = _cluster_wald(b, V)
    return W, float(stats.chi2.sf(W, len(terms)))


def _find_quadratic(params):
    for term in params.index:
        factors = parse_term(term)
        if len(factors) == 1 and factors[0][1] == 2 and factors[0][0] in params.index:
            return factors[0][0], term
    raise KeyError("fit has no (x, x^2) pair of terms")


def peak_location(result, linear=None, quadratic=None):
    """Turning point ``-b1 / (2 b2)`` of the fitted quadratic; requires ``b2 < 0``."""
    if linear is None or quadratic is None:
        linear, quadratic = _find_quadratic(result.params)
    b1, b2 = float(result.params[linear]), float(result.params[quadratic])
    if b2 >= 0:
        raise ShapeError(f"quadratic coefficient {b2:.4g} >= 0: no interior maximum")
    return -b1 / (2 * b2)


def partial_correlation(panel, x, y, fe_dims=()):
    """Pearson correlation of ``x`` and ``y`` after partialling out fixed effects."""
    dims = normalize_fe_dims(fe_dims)
    cols = list(dict.fromkeys([x, y, *itertools.chain.from_iterable(dims)]))
    frame = panel[cols].dropna()
    if len(frame) < 3:
        raise DomainError("partial correlation needs at least 3 complete rows")
    data = frame[[x, y]].to_numpy(dtype=float)
    if dims:
        data = demean(data, [group_codes(frame, d) for d in dims])[0]
    data = data - data.mean(axis=0)
    ss = (data ** 2).sum(axis=0)
    if np.any(ss <= 1e-24 * len(data)):
        raise DegenerateError("a residualized variable has zero variance")
    r = float((data[:, 0] * data[:, 1]).sum() / np.sqrt(ss[0] * ss[1]))
    return min(1.0, max(-1.0, r))


def interaction_expansion(interaction_terms):
    """All lower-order products implied by each interaction, in a stable order.

    ``[("c", "v", "o")] -> ["c", "v", "o", "c*v", "c*o", "v*o", "c*v*o"]``
    """
    out = []
    for inter in interaction_terms:
        parts = [p.strip() for p in inter.split("*")] if isinstance(inter, str) else list(inter)
        for size in range(1, len(parts) + 1):
            for combo in itertools.combinations(parts, size):
                out.append("*".join(combo))
    return list(dict.fromkeys(out))


def fit_interaction(panel, base_spec, interaction_terms, **kw):
    """Fit ``base_spec`` augmented with interactions and their lower-order terms.

    Terms that the fixed effects absorb completely (e.g. a country-year
    covariate under country-year FE) are dropped and listed in
    ``diagnostics["absorbed_terms"]``.
    """
    terms = list(base_spec.regressors)
    for t in interaction_expansion(interaction_terms):
        if t not in terms and not any(_same_term(t, s) for s in terms):
            terms.append(t)
    absorbed = _absorbed_terms(panel, replace(base_spec, regressors=tuple(terms)))
    kept = tuple(t for t in terms if t not in absorbed)
    res = fit(panel, replace(base_spec, regressors=kept), **kw)
    res.diagnostics["absorbed_terms"] = absorbed
    return res


def _same_term(a, b):
    return sorted(parse_term(a)) == sorted(parse_term(b))


def _absorbed_terms(panel, spec):
    if not spec.fe_dims:
        return []
    des = _prepare(panel, replace(spec, instruments=None))
    norms = np.linalg.norm(des.X, axis=0)
    raw = np.column_stack([evaluate_term(panel, t) for t in spec.regressors])
    raw_norms = np.linalg.norm(np.nan_to_num(raw), axis=0)
    return [t for t, a, b in zip(des.names, norms, raw_norms) if a <= RANK_TOL * max(1.0, b)]
