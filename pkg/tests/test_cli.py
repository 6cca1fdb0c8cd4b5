import json
from pathlib import Path

import pandas as pd
import pytest

from ambiguity_lab.cli import main, parse_args, read_config


def _run_dir(root, command):
    dirs = sorted(Path(root).glob(f"*-{command}*"))
    assert dirs, f"no run directory for {command}"
    return dirs[-1]


def test_solve_writes_report(tmp_path):
    assert main(["solve", "--k", "6/5", "--l", "2", "--out", str(tmp_path)]) == 0
    run = _run_dir(tmp_path, "solve")
    report = json.loads((run / "solve.json").read_text())
    assert report["regime"] == "CentristAmbiguity" and report["equilibria"] == ["A:C"]
    assert report["payoffs_centrist_extremist"]["A:C"] == ["4/5", "1/5"]
    assert (run / "errors.csv").read_text().strip() == "label,error,message"
    manifest = (run / "manifest.txt").read_text()
    assert "k=6/5" in manifest and "numpy=" in manifest


def test_invalid_parameters_exit_2(tmp_path, capsys):
    assert main(["solve", "--k", "3", "--l", "2", "--out", str(tmp_path)]) == 2
    assert "1 < k < l" in capsys.readouterr().err
    assert not list(tmp_path.iterdir())
    assert main(["gen", "--countries", "0", "--out", str(tmp_path)]) == 2


def test_env_var_sets_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("AMBIGUITY_LAB_OUT", str(tmp_path / "env"))
    assert main(["sweep", "--k-values", "1.1,1.3", "--l-offset", "1"]) == 0
    table = (_run_dir(tmp_path / "env", "sweep") / "phase.csv").read_text().splitlines()
    assert table[0] == "k,l,regime,eq_profiles,pC_AA,pC_AC,pC_CA,pC_CC"
    assert table[1].startswith("11/10,21/10,CentristAmbiguity,A:C")
    assert table[2].startswith("13/10,23/10,FullCommitment,C:C")


def test_sweep_invalid_cell_is_indexed_error(tmp_path):
    assert main(["sweep", "--k-values", "1.1,2", "--l-values", "1.5", "--out", str(tmp_path)]) == 1
    errors = pd.read_csv(_run_dir(tmp_path, "sweep") / "errors.csv")
    assert "(1, 0)" in errors.loc[0, "message"]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# solve settings\nk = 6/5\nl=2  # extremist set\neps-b=0\n")
    assert read_config(cfg) == {"k": "6/5", "l": "2", "eps_b": "0"}
    args = parse_args(["solve", "--config", str(cfg), "--k", "13/10"])
    assert str(args.k) == "13/10" and str(args.l) == "2"
    cfg.write_text("bogus=1\n")
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_mc_check(tmp_path):
    assert main(["mc-check", "--k", "13/10", "--l", "2", "--profile", "A:C", "--samples", "20000",
                 "--seeds", "3", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(_run_dir(tmp_path, "mc-check") / "mc_check.csv")
    assert len(frame) == 3 and frame["within_3se"].all()
    assert set(frame["exact_pC"]) == {"2/5"}


def test_gen_ingest_fit_pipeline(tmp_path):
    out = str(tmp_path)
    assert main(["gen", "--countries", "6", "--experts", "3", "--expert-sd", "0", "--seed", "4", "--out", out]) == 0
    gen = _run_dir(tmp_path, "gen")
    assert main(["ingest", "--experts-file", str(gen / "experts.csv"), "--out", out]) == 0
    ing = _run_dir(tmp_path, "ingest")
    src, back = pd.read_csv(gen / "panel.csv"), pd.read_csv(ing / "panel.csv")
    merged = src.merge(back, on=["country", "party_id", "year"], suffixes=("", "_agg"))
    assert (merged["position_economic"] == merged["position_economic_agg"]).all()
    assert main(["fit", "--panel", str(gen / "panel.csv"), "--outcome", "blurriness_economic",
                 "--regressors", "position_economic,position_economic^2", "--label", "q", "--out", out]) == 0
    report = json.loads((_run_dir(tmp_path, "fit") / "q.json").read_text())
    assert [c["term"] for c in report["coefficients"]] == ["position_economic", "position_economic^2"]
    assert report["n_clusters"] == 48 and report["peak"] is not None


def test_fit_error_gives_nonzero_exit(tmp_path):
    out = str(tmp_path)
    main(["gen", "--countries", "4", "--out", out])
    panel = _run_dir(tmp_path, "gen") / "panel.csv"
    status = main(["fit", "--panel", str(panel), "--outcome", "blurriness_economic",
                   "--regressors", "position_economic,no_such_column", "--out", out])
    assert status == 1
    errors = pd.read_csv(_run_dir(tmp_path, "fit") / "errors.csv")
    assert len(errors) == 1


def test_replicate_baseline_and_manifest_reproduces(tmp_path):
    out = str(tmp_path / "a")
    assert main(["replicate-baseline", "--seed", "2", "--out", out]) == 0
    first = _run_dir(out, "replicate-baseline")
    names = {p.name for p in first.iterdir()}
    for dim in ("economic", "social"):
        for spec in ("quadratic", "centrism_midpoint", "centrism_median", "monotonic", "sd_outcome",
                     "iv_quadratic", "iv_centrism"):
            assert f"{spec}_{dim}.json" in names
    assert {"summary.csv", "binned.csv", "manifest.txt", "errors.csv"} <= names
    quad = json.loads((first / "quadratic_economic.json").read_text())
    assert quad["wald"]["p"] < 0.05 and 4.1 <= quad["peak"] <= 5.3
    # the manifest is a config file that reproduces the run bit-exactly
    out2 = str(tmp_path / "b")
    assert main(["replicate-baseline", "--config", str(first / "manifest.txt"), "--out", out2]) == 0
    second = _run_dir(out2, "replicate-baseline")
    for name in ("summary.csv", "binned.csv", "quadratic_social.json", "iv_centrism_economic.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_replicate_mechanism(tmp_path):
    assert main(["replicate-mechanism", "--seed", "5", "--out", str(tmp_path)]) == 0
    summary = pd.read_csv(_run_dir(tmp_path, "replicate-mechanism") / "summary.csv")
    assert len(summary) == 8
    row = summary[summary["spec"] == "triple_continuous_economic"].iloc[0]
    assert row["truth"] == 0.3
    assert set(summary["spec"].str.rsplit("_", n=1).str[0]) == {
        "triple_continuous", "triple_median_dummy", "growth", "crisis"}
