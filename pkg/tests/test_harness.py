"""Scenario runner and CLI: reports, determinism, exit codes."""
import json

import pytest

from affell.cli import main
from affell.harness import (
    CHECKS,
    ConfigError,
    ScenarioConfig,
    emit_report,
    run_suite,
    run_theta_closure,
)

FAST_CHECKS = ["yang_baxter", "unitarity", "leading_term", "theta_closure"]


def test_full_suite_passes():
    reports = run_suite(ScenarioConfig("C2~1", seed=3))
    assert [r.name for r in reports] == list(CHECKS)
    assert all(r.status == "pass" for r in reports)


def test_run_theta_closure_report():
    r = run_theta_closure(ScenarioConfig("A1~1", level_k=2, seed=1))
    assert r.status == "pass"
    assert r.residual < 1e-7
    assert r.diagnostics["dimension"] == 3
    assert r.samples >= 3 * 3


def test_generic_mode_skips_closure():
    reports = run_suite(
        ScenarioConfig("C2~1", mode="generic", seed=1), ["theta_closure"]
    )
    assert reports[0].status == "skipped"


def test_generic_xi_breaks_weyl_invariance():
    reports = run_suite(
        ScenarioConfig("C2~1", mode="generic", seed=1), ["weyl_invariance"]
    )
    assert reports[0].status == "fail"
    assert reports[0].residual > 1e-2


def test_manual_kappa_off_breaks_closure():
    from fractions import Fraction as F

    from affell.root_system import build_root_datum, coupling_dict

    d = build_root_datum("A1~1")
    mu = {k: F(2, 5) for k in d.class_keys}
    mud = coupling_dict(d, mu)
    kappa = d.h_vee_mu(mud) * F(11, 10)
    xi = tuple(-x for x in d.rho_mu(mud))
    sc = ScenarioConfig("A1~1", mode="manual", kappa=kappa, xi=xi, mu=F(2, 5), seed=1)
    reports = run_suite(sc, ["theta_closure"])
    assert reports[0].status == "fail"
    assert reports[0].residual > 1e-2


def test_mode_override_conflicts_rejected():
    with pytest.raises(ConfigError):
        ScenarioConfig("C2~1", mode="invariant", kappa=1)
    with pytest.raises(ConfigError):
        ScenarioConfig("C2~1", mode="manual")
    with pytest.raises(ConfigError):
        ScenarioConfig("C2~1", mode="nonsense")
    with pytest.raises(ConfigError):
        ScenarioConfig("C2~1", level_k=0)
    with pytest.raises(ConfigError):
        ScenarioConfig("C2~1", tau=0.05j)


def test_unknown_check_rejected():
    with pytest.raises(ConfigError):
        run_suite(ScenarioConfig("C2~1"), ["no_such_check"])


def test_empty_check_list():
    assert run_suite(ScenarioConfig("C2~1"), []) == []


def test_json_report_schema_and_determinism():
    sc = ScenarioConfig("A2~2", seed=5)
    a = emit_report(run_suite(sc, FAST_CHECKS), "json", sc)
    payload = json.loads(a)
    assert set(payload) == {"scenario", "checks"}
    for chk in payload["checks"]:
        assert set(chk) == {
            "name",
            "status",
            "residual",
            "scale",
            "samples",
            "seconds",
            "diagnostics",
        }
    b = emit_report(run_suite(sc, FAST_CHECKS), "json", sc)
    # timing fields differ between runs; everything else is bit-identical
    strip = lambda p: [
        {k: v for k, v in c.items() if k != "seconds"} for c in json.loads(p)["checks"]
    ]
    assert strip(a) == strip(b)


def test_text_report_mentions_every_check():
    sc = ScenarioConfig("A2~2", seed=5)
    text = emit_report(run_suite(sc, FAST_CHECKS), "text", sc)
    for name in FAST_CHECKS:
        assert name in text


def test_cli_pass_and_report_file(tmp_path):
    out = tmp_path / "report.json"
    code = main(
        [
            "verify",
            "A2~2",
            "--checks",
            "unitarity,theta_closure",
            "--report",
            "json",
            "--out",
            str(out),
            "--seed",
            "2",
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert all(c["status"] == "pass" for c in payload["checks"])


def test_cli_failure_exit_code():
    code = main(
        ["verify", "C2~1", "--mode", "generic", "--checks", "weyl_invariance"]
    )
    assert code == 1


def test_cli_config_error_exit_codes(capsys):
    assert main(["verify", "Z9~9"]) == 2
    assert main(["verify", "C2~1", "--tau", "oops"]) == 2
    assert main(["verify", "C2~1", "--checks", "bogus"]) == 2
    capsys.readouterr()
