import numpy as np
import pandas as pd
import pytest


def random_panel(rng, n_countries=3, n_waves=2, n_parties=4, drop=0.0):
    rows = []
    for c in range(n_countries):
        for p in range(n_parties):
            for w in range(n_waves):
                if rng.random() < drop:
                    continue
                rows.append({"country": f"c{c}", "party_id": f"c{c}p{p}", "year": 2017 + 2 * w})
    df = pd.DataFrame(rows)
    n = len(df)
    df["x1"] = rng.uniform(0, 10, n)
    df["x2"] = rng.normal(size=n)
    df["y"] = 0.5 * df["x1"] - 0.3 * df["x2"] + rng.normal(size=n) + df["country"].map(
        {f"c{c}": rng.normal() for c in range(n_countries)})
    return df


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def dummy_ols(df, y, terms, fe_cols, cluster=None):
    """Reference least squares on explicit dummies (numpy lstsq), independent of the engine."""
    X = [df[t].to_numpy(float) for t in terms]
    D = []
    for cols in fe_cols:
        key = df[list(cols)].astype(str).agg("|".join, axis=1)
        D.append(pd.get_dummies(key).to_numpy(float))
    M = np.column_stack(X + D)
    coef, *_ = np.linalg.lstsq(M, df[y].to_numpy(float), rcond=None)
    return coef[: len(terms)]
