"""
From expert ratings to a party-year panel
=========================================

Simulate expert-level ratings, write them as a CSV, read them back with
validation and aggregate to party-year means, with the SD of expert
positions as an alternative ambiguity measure.
"""

import tempfile
from pathlib import Path

from ambiguity_lab.ingest import (
    AggregationPolicy, aggregate_party_year, blurriness_sd_correlation, read_expert_table, write_expert_table,
)
from ambiguity_lab.synth import DGPParams, PanelSpec, generate_expert_table, generate_panel

panel = generate_panel(PanelSpec(n_countries=10), DGPParams(), seed=3)
# experts disagree more about parties that blur
experts = generate_expert_table(panel, experts_per_party=12, expert_sd=0.4, seed=3, disagreement=0.15)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "experts.csv"
    write_expert_table(experts, path)
    table = read_expert_table(path)

agg = aggregate_party_year(table, AggregationPolicy(min_experts=10))
print(agg.attrs["aggregation"])
print(agg[["country", "party_id", "year", "position_economic", "position_sd_economic", "n_experts_economic"]].head())
for dim in ("economic", "social"):
    print(dim, "corr(mean blurriness, SD of positions) =", round(blurriness_sd_correlation(agg, dim), 3))

# malformed rows are reported with their line numbers
bad = Path(tempfile.mkstemp(suffix=".csv")[1])
bad.write_text("expert_id,country,party_id,year,dimension,position,blurriness\ne1,DE,1,2019,economic,11,2\n")
try:
    read_expert_table(bad)
except Exception as exc:  # ParseError
    print(type(exc).__name__, exc)
finally:
    bad.unlink()
