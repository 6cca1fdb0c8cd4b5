"""Synthetic party-year panels with known coefficients.

Positions follow a scaled Beta law on [0, 10] (moments set by
``position_mean``/``position_sd``) linked across waves by a Gaussian copula
with correlation ``persistence``; lagged positions are therefore valid,
strong instruments. Blurriness is generated from the *true* position as

    quadratic:  beta0 + beta1*x + beta2*x^2 + country-year + party + noise
    centrism:   alpha0 + alpha1*(5 - |x - 5|) + country-year + party + noise

and clamped to [0, 10]. With ``feedback > 0`` the measured position is pulled
towards the centre by ``feedback * noise`` (never past it), so measured
centrism rises with the blurriness shock (simultaneity).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats

from ambiguity_lab.econ.transforms import MIDPOINT, centrism_transform, col, dimensions
from ambiguity_lab.errors import DomainError
from ambiguity_lab.rng import stream

DEFAULT_DIMENSIONS = ("economic", "social")


@dataclass(frozen=True)
class PanelSpec:
    n_countries: int = 25
    n_waves: int = 2
    parties_per_country: int = 8
    first_wave: int = 2017
    wave_gap: int = 2

    def __post_init__(self):
        for name in ("n_countries", "n_waves", "parties_per_country"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be >= 1")

    @property
    def waves(self):
        return tuple(self.first_wave + i * self.wave_gap for i in range(self.n_waves))


@dataclass(frozen=True)
class DGPParams:
    form: str = "quadratic"
    beta0: float = 1.5
    beta1: float = 1.0
    beta2: float = -0.1
    alpha0: float = 2.4
    alpha1: float = 0.4
    sd_country_year: float = 0.3
    sd_party: float = 0.3
    sd_noise: float = 0.4
    position_mean: float = 4.916
    position_sd: float = 2.167
    persistence: float = 0.9
    feedback: float = 0.0

    def __post_init__(self):
        if self.form not in ("quadratic", "centrism"):
            raise DomainError(f"unknown outcome form {self.form!r}")
        if min(self.sd_country_year, self.sd_party, self.sd_noise) < 0:
            raise DomainError("standard deviations must be >= 0")
        if not 0 <= self.persistence < 1:
            raise DomainError("persistence must lie in [0, 1)")
        self.beta_shape()

    def beta_shape(self):
        """Shape parameters of the Beta law matching the position moments."""
        m, v = self.position_mean / 10.0, (self.position_sd / 10.0) ** 2
        if not 0 < m < 1 or not 0 < v < m * (1 - m):
            raise DomainError("position_mean/position_sd are not attainable on [0, 10]")
        common = m * (1 - m) / v - 1
        return m * common, (1 - m) * common

    def expected_blurriness(self, x):
        x = np.asarray(x, dtype=float)
        if self.form == "quadratic":
            return self.beta0 + self.beta1 * x + self.beta2 * x * x
        return self.alpha0 + self.alpha1 * (MIDPOINT - np.abs(x - MIDPOINT))

    @property
    def peak(self):
        return -self.beta1 / (2 * self.beta2)


def _labels(spec):
    width = len(str(spec.n_countries))
    countries = [f"C{i + 1:0{width}d}" for i in range(spec.n_countries)]
    return countries, [[f"{c}-P{j + 1}" for j in range(spec.parties_per_country)] for c in countries]


def generate_panel(spec, params, seed, dims=DEFAULT_DIMENSIONS):
    """Draw a party x wave panel; identical output for identical arguments.

    ``panel.attrs["clamped"]`` counts clamped values per column.
    """
    if spec.n_countries * spec.parties_per_country * spec.n_waves == 0:
        raise DomainError("empty panel spec")
    countries, parties = _labels(spec)
    waves = spec.waves
    C, P, T = spec.n_countries, spec.parties_per_country, spec.n_waves
    frame = pd.DataFrame({
        "country": np.repeat(countries, P * T),
        "party_id": np.repeat(np.concatenate(parties), T),
        "year": np.tile(waves, C * P),
    })
    a, b = params.beta_shape()
    rho = params.persistence
    clamped = {}
    for d_idx, dim in enumerate(dims):
        rng = stream(seed, "synth.panel", d_idx)
        z = np.empty((C * P, T))
        z[:, 0] = rng.standard_normal(C * P)
        for t in range(1, T):
            z[:, t] = rho * z[:, t - 1] + np.sqrt(1 - rho * rho) * rng.standard_normal(C * P)
        x_true = 10.0 * stats.beta.ppf(stats.norm.cdf(z), a, b).ravel()
        cy = np.repeat(params.sd_country_year * rng.standard_normal((C, T)), P, axis=0).ravel()
        party = np.repeat(params.sd_party * rng.standard_normal(C * P), T)
        noise = params.sd_noise * rng.standard_normal(C * P * T)

        dist = np.clip(np.abs(x_true - MIDPOINT) - params.feedback * noise, 0.0, MIDPOINT)
        x_obs = MIDPOINT + np.sign(x_true - MIDPOINT) * dist
        blur = params.expected_blurriness(x_true) + cy + party + noise
        for name, values in ((col("position", dim), x_obs), (col("blurriness", dim), blur)):
            out = np.clip(values, 0.0, 10.0)
            clamped[name] = int((out != values).sum())
            frame[name] = out
        frame[col("centrism", dim)] = centrism_transform(frame[col("position", dim)].to_numpy())
    frame.attrs["clamped"] = clamped
    frame.attrs["seed"] = int(seed)
    return frame


def generate_expert_table(panel, experts_per_party, expert_sd, seed, dims=None, disagreement=0.0):
    """Expert-level ratings: party-year truth plus independent normal noise.

    Each country-wave has its own pool of ``experts_per_party`` experts who
    rate every party there. Position ratings have SD
    ``expert_sd + disagreement * blurriness`` (experts disagree more about
    blurry parties); blurriness ratings have SD ``expert_sd``. Ratings are
    clamped to [0, 10].
    """
    if experts_per_party < 1:
        raise DomainError("experts_per_party must be >= 1")
    if expert_sd < 0 or disagreement < 0:
        raise DomainError("expert_sd and disagreement must be >= 0")
    dims = list(dims or dimensions(panel))
    E = int(experts_per_party)
    rows = []
    for d_idx, dim in enumerate(dims):
        rng = stream(seed, "synth.experts", d_idx)
        base = panel.loc[:, ["country", "party_id", "year"]].loc[panel.index.repeat(E)].reset_index(drop=True)
        j = np.tile(np.arange(E), len(panel))
        base["expert_id"] = [f"{c}-{y}-E{k:02d}" for c, y, k in zip(base["country"], base["year"], j)]
        base["dimension"] = dim
        for var in ("position", "blurriness"):
            truth = np.repeat(panel[col(var, dim)].to_numpy(dtype=float), E)
            sd = expert_sd
            if var == "position" and disagreement:
                sd = expert_sd + disagreement * np.repeat(panel[col("blurriness", dim)].to_numpy(dtype=float), E)
            noisy = truth + sd * rng.standard_normal(truth.size)
            base[var] = np.where(np.isnan(truth), np.nan, np.clip(noisy, 0.0, 10.0))
        rows.append(base)
    out = pd.concat(rows, ignore_index=True)
    return out[["expert_id", "country", "party_id", "year", "dimension", "position", "blurriness"]]


@dataclass(frozen=True)
class ContextParams:
    """Country-level macro context and the uncertainty-of-extremes truth.

    ``theta`` adds ``theta * centrism * gdp_var_lag * opposition`` to the
    blurriness of ``dimension``. ``window`` is the number of years, ending the
    year before the survey, over which growth variance is computed.
    """

    theta: float = 0.0
    dimension: str = "economic"
    window: int = 3
    growth_mean: float = 2.0
    growth_sd_range: tuple = (0.3, 1.0)
    p_government: float = 0.4
    crisis_rate: float = 0.5
    crisis_effect: float = 0.0
    growth_effect: float = 0.0

    def __post_init__(self):
        if self.window < 2:
            raise DomainError("variance window needs at least 2 years")
        lo, hi = self.growth_sd_range
        if not 0 <= lo <= hi:
            raise DomainError("growth_sd_range must satisfy 0 <= lo <= hi")
        if not 0 <= self.p_government <= 1:
            raise DomainError("p_government must be a probability")


@dataclass
class ContextTable:
    """``country_year``: growth, lagged variance and derived dummies;
    ``party_year``: government status."""

    country_year: pd.DataFrame
    party_year: pd.DataFrame
    params: ContextParams = field(default_factory=ContextParams)

    def apply(self, panel):
        """Merge context onto ``panel`` and add the configured interaction truths."""
        out = panel.merge(self.country_year, on=["country", "year"], how="left")
        out = out.merge(self.party_year, on=["country", "party_id", "year"], how="left")
        out.index = panel.index
        p = self.params
        blur = col("blurriness", p.dimension)
        cen = col("centrism", p.dimension)
        shift = (p.theta * out[cen] * out["gdp_var_lag"] * out["opposition"]
                 + p.growth_effect * out[cen] * out["growth_low"]
                 + p.crisis_effect * out[cen] * out["crisis_count"])
        if np.any(shift.to_numpy() != 0):
            raw = out[blur] + shift
            out[blur] = raw.clip(0.0, 10.0)
            out.attrs["clamped_context"] = int((out[blur] != raw).sum())
        return out


def generate_context(panel, context_params=None, seed=0):
    """Simulate GDP growth histories, lagged variance, crises and government status."""
    p = context_params or ContextParams()
    rng = stream(seed, "synth.context")
    countries = sorted(panel["country"].unique())
    waves = sorted(panel["year"].unique())
    years = np.arange(min(waves) - p.window - 1, max(waves) + 1)
    sds = rng.uniform(*p.growth_sd_range, size=len(countries))
    growth = p.growth_mean + sds[:, None] * rng.standard_normal((len(countries), years.size))
    crises = rng.poisson(p.crisis_rate, size=len(countries))

    recs = []
    for ci, c in enumerate(countries):
        for w in waves:
            t = int(np.searchsorted(years, w))
            hist = growth[ci, t - p.window: t]
            recs.append({
                "country": c, "year": w,
                "gdp_growth": growth[ci, t], "gdp_growth_lag": growth[ci, t - 1],
                "gdp_var_lag": float(np.var(hist, ddof=1)), "crisis_count": int(crises[ci]),
            })
    cy = pd.DataFrame(recs)
    by_year = cy.groupby("year")
    cy["gdp_var_high"] = (cy["gdp_var_lag"] > by_year["gdp_var_lag"].transform("median")).astype(int)
    cy["growth_low"] = ((cy["gdp_growth"] < by_year["gdp_growth"].transform("median"))
                        & (cy["gdp_growth_lag"] < by_year["gdp_growth_lag"].transform("median"))).astype(int)

    py = panel[["country", "party_id", "year"]].copy().reset_index(drop=True)
    gov = rng.random(len(py)) < p.p_government
    py["in_government"] = gov
    py["opposition"] = (~gov).astype(int)
    return ContextTable(cy, py, p)
