"""Exit codes and flag handling of the smx command line."""

import pytest

from modules.report import read_csv
from smx_cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, build_parser, main, overrides_from_args


def test_help_exits_ok(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "Examples:" in capsys.readouterr().out


def test_bounds_succeeds(tmp_path):
    out = tmp_path / "bounds.csv"
    code = main(["bounds", "--alpha", "10", "--omega", "5", "--gamma", "0.9", "--n-actions", "10",
                 "--out", str(out)])
    assert code == EXIT_OK
    records = {r.metric: r for r in read_csv(out)}
    assert records["xi_bound"].value == pytest.approx(0.340949, abs=1e-6)
    assert records["performance_bound"].value == pytest.approx(3.068547, abs=1e-6)


def test_config_file_with_flag_override(tmp_path):
    out = tmp_path / "bounds.csv"
    assert main(["bounds", "--config", "experiment_configs/bounds.cfg", "--omega", "10", "--out", str(out)]) == EXIT_OK
    assert all(r.params["omega"] == 10 for r in read_csv(out))


def test_expansion_example_fails_check(tmp_path):
    code = main(["contract", "--config", "experiment_configs/contract_counterexample.cfg", "--out", str(tmp_path / "c.csv")])
    assert code == EXIT_CHECK_FAILED


@pytest.mark.parametrize("argv", [
    ["fly"],
    ["bounds", "--alpha", "ten"],
    ["bounds", "--omega", "5", "--gamma", "1.5"],
    ["bounds", "--omega", "-1"],
    ["plan", "--mdp", "missing/none.yaml"],
    ["bounds", "--config", "missing.cfg"],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_invalid_mdp_file(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("n_states: 1\n", encoding="utf-8")
    assert main(["plan", "--mdp", str(path), "--omega", "5"]) == EXIT_USAGE


def test_unset_flags_do_not_override():
    args = build_parser().parse_args(["overest", "--n-actions", "4"])
    overrides = overrides_from_args(args)
    assert overrides[("montecarlo", "n_actions")] == 4
    assert overrides[("contract", "n_actions")] == 4
    assert overrides[("operator", "alpha")] is None
