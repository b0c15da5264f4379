import json
import math

import pytest

from symplab.config import ConfigError, load_config, parse_config_text
from symplab.report import Check, Report, emit_report
from symplab.scenarios import SCENARIOS, prepare, run_scenario


class TestConfig:
    def test_parse_types(self):
        (cfg,) = parse_config_text("""
[sweep]
scenario = sphere_stationarity
alpha = 0.8, 1.0
n_t = 40
T = 6.5
system = sphere
system.margin = 0.1
tol.stationary = 1e-7
seed = 11
""")
        assert cfg.scenario == "sphere_stationarity"
        assert cfg.get("alpha") == (0.8, 1.0)
        assert cfg.get("n_t") == 40 and cfg.get("T") == 6.5
        assert cfg.system_params == {"margin": 0.1}
        assert cfg.tol("stationary", 1.0) == 1e-7
        assert cfg.seed == 11

    def test_section_name_is_default_scenario(self):
        (cfg,) = parse_config_text("[torus_periodic]\n")
        assert cfg.scenario == "torus_periodic"

    @pytest.mark.parametrize("text, match", [
        ("[torus_periodic]\nfoo = 1\n", "unknown key"),
        ("[torus_periodic]\nn_t = many\n", "bad value"),
        ("[nope]\n", "unknown scenario"),
        ("[torus_periodic]\nn_t = 1\n", "at least 2"),
        ("[torus_periodic]\ntol.closure = 0\n", "positive"),
        ("[torus_periodic]\nT = -1\n", "positive"),
        ("[sphere_stationarity]\nsystem = torus\n", "runs on"),
        ("[sphere_stationarity]\nsystem = sphere\nsystem.margin = -1\n", "margin"),
        ("[torus_periodic]\nseed = -3\n", "non-negative"),
    ])
    def test_rejections(self, text, match):
        with pytest.raises(ConfigError, match=match):
            for cfg in parse_config_text(text):
                prepare(cfg)

    def test_syntax_error(self):
        with pytest.raises(ConfigError):
            parse_config_text("no section header\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.ini")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.ini"
        path.write_text("# nothing\n")
        with pytest.raises(ConfigError, match="no scenario"):
            load_config(path)

    def test_grid_scale(self):
        (cfg,) = parse_config_text("[maupertuis_demo]\nn_t = 100\nn_eps = 7\n")
        scaled = prepare(cfg, grid_scale=2.0)
        assert scaled.get("n_t") == 200 and scaled.get("n_eps") == 14
        assert scaled.echo()["grid_scale"] == 2.0
        with pytest.raises(ConfigError):
            cfg.scaled(0.0)

    def test_seed_override_and_defaults(self):
        (cfg,) = parse_config_text("[period_group]\nseed = 4\n")
        out = prepare(cfg, seed=99)
        assert out.seed == 99
        assert out.get("wraps") == SCENARIOS["period_group"].defaults["wraps"]

    def test_shipped_configs_validate(self):
        from pathlib import Path
        root = Path(__file__).resolve().parents[1] / "configs"
        for path in sorted(root.glob("*.ini")):
            for cfg in load_config(path):
                prepare(cfg)


class TestReport:
    def test_check_relations(self):
        assert Check("a", 1.0, "<=", 2.0).passed
        assert not Check("a", 3.0, "<=", 2.0).passed
        assert Check("a", 3.0, ">=", 2.0).passed
        assert Check("a", 1.05, "==", 1.0, 0.1).passed
        assert not Check("a", 1.2, "==", 1.0, 0.1).passed
        assert not Check("a", math.nan, ">=", 0.0).passed

    def test_describe(self):
        assert Check("gap", 1e-9, "<=", 1e-6).describe().startswith("PASS gap:")
        assert Check("gap", 1.0, "<=", 1e-6).describe().startswith("FAIL gap:")

    def test_expect_rejects_relation(self):
        rep = Report("s", "s", {}, 0)
        with pytest.raises(ValueError):
            rep.expect("x", 1.0, "<", 2.0)

    def test_empty_report_does_not_pass(self):
        assert not Report("s", "s", {}, 0).passed

    def test_fail_records_error(self):
        rep = Report("s", "s", {}, 0)
        rep.expect("ok", 0.0, "<=", 1.0)
        rep.fail("solver", RuntimeError("diverged"))
        assert not rep.passed
        assert rep.errors == ["solver: RuntimeError: diverged"]
        assert rep.as_dict()["checks"][-1]["value"] == "nan"

    def test_emit(self, tmp_path):
        rep = Report("s", "demo", {"n": 3}, 5)
        rep.expect("x", 0.5, "<=", 1.0)
        rep.table("b.csv", ["k", "v"], [(1, 0.25)])
        rep.table("a.csv", ["k"], [(2,)])
        written = emit_report(rep, tmp_path)
        assert [p.name for p in written] == ["a.csv", "b.csv", "report.json"]
        data = json.loads((tmp_path / "report.json").read_text())
        assert data["passed"] and data["seed"] == 5
        assert data["checks"][0]["verdict"] == "pass"
        assert (tmp_path / "b.csv").read_text() == "k,v\n1,0.25\n"


class TestScenarios:
    @pytest.mark.parametrize("name", ["period_group", "action_equivalence", "maupertuis_demo"])
    def test_quick_scenarios_pass(self, name):
        (cfg,) = parse_config_text(f"[{name}]\n")
        rep = run_scenario(cfg)
        assert rep.passed, rep.summary_lines()
        assert rep.inputs["scenario"] == name
        assert rep.wall_time > 0

    def test_solver_failure_becomes_verdict(self):
        (cfg,) = parse_config_text("[free_particle_landscape]\nN = 10\nmesh = 3\n")
        rep = run_scenario(cfg)
        assert not rep.passed
        assert rep.errors
