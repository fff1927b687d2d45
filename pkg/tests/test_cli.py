import csv
import io
import json
import math
from fractions import Fraction as Fr
from pathlib import Path

import pytest

from conftest import cycle3, single
from kentropy.cli import run
from kentropy.entropy import skew_entropy
from kentropy.errors import ScenarioError
from kentropy.scenario import load_scenario, scenario_from_dict, scenario_to_dict

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
MINIMAL = {
    "group": {"kind": "DirectSumZ2"},
    "kappa": {"atoms": [["{1}", "1"]]},
    "base": {"kind": "HaarOdometer"},
    "cocycle": {"kind": "canonical"},
    "nu": {"family": "constant", "epsilon": "ln(2)"},
}


def write(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data, indent=2))
    return str(p)


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    lines = out.getvalue().splitlines()
    return code, (json.loads(lines[0]) if lines else None), err.getvalue(), out.getvalue()


class TestLoad:
    def test_minimal(self, tmp_path):
        s = load_scenario(write(tmp_path, MINIMAL))
        assert s.kappa.weights == (Fr(1),)
        assert skew_entropy(s).total == skew_entropy(single()).total

    def test_mass(self, tmp_path):
        bad = dict(MINIMAL, kappa={"atoms": [["{1}", "0.4"], ["{2}", "1/2"]]})
        with pytest.raises(ScenarioError, match="kappa mass ≠ 1"):
            load_scenario(write(tmp_path, bad))

    def test_cocycle_base_mismatch(self, tmp_path):
        bad = dict(MINIMAL, cocycle={"kind": "GeneratorTable", "table": ["{1}", "{2}"]})
        with pytest.raises(ScenarioError, match="cocycle/base mismatch"):
            load_scenario(write(tmp_path, bad))

    def test_group_base_mismatch(self, tmp_path):
        bad = dict(MINIMAL, base={"kind": "FiniteCycle", "m": 2})
        with pytest.raises(ScenarioError, match="group/base mismatch"):
            load_scenario(write(tmp_path, bad))

    def test_json_position(self, tmp_path):
        with pytest.raises(ScenarioError, match=r"s\.json:3:\d+"):
            load_scenario(write(tmp_path, '{\n  "group": {"kind": "DirectSumZ2"},\n  "kappa": ,\n}'))

    def test_missing_field(self, tmp_path):
        with pytest.raises(ScenarioError, match=r"nu\.epsilon: missing"):
            load_scenario(write(tmp_path, dict(MINIMAL, nu={"family": "constant"})))

    def test_bad_weight(self, tmp_path):
        bad = dict(MINIMAL, kappa={"atoms": [["{1}", "one"]]})
        with pytest.raises(ScenarioError, match=r"kappa\.atoms\[0\]\[1\]"):
            load_scenario(write(tmp_path, bad))

    def test_decimal_weights_are_exact(self, tmp_path):
        d = dict(MINIMAL, kappa={"atoms": [["{1}", "0.1"], ["{2}", "0.2"], ["{3}", "0.7"]]})
        assert load_scenario(write(tmp_path, d)).kappa.weights == (Fr(1, 10), Fr(1, 5), Fr(7, 10))

    def test_enumeration_reorders(self, tmp_path):
        d = dict(MINIMAL, kappa={"atoms": [["{1}", "1/2"], ["{2}", "1/2"]], "enumeration": ["{2}", "{1}"]})
        assert [str(g) for g in load_scenario(write(tmp_path, d)).kappa.enumeration] == ["{2}", "{1}"]

    @pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.json")), ids=lambda p: p.stem)
    def test_shipped_scenarios_round_trip(self, path):
        s = load_scenario(path)
        again = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(s))))
        assert again == s

    def test_file_is_not_modified(self, tmp_path):
        p = write(tmp_path, MINIMAL)
        before = Path(p).read_bytes()
        call("realize", p, "--target", 1.0, "--emit-curve", tmp_path / "c.csv")
        assert Path(p).read_bytes() == before


class TestRun:
    def test_entropy(self, tmp_path):
        code, rec, _, _ = call("entropy", write(tmp_path, MINIMAL))
        assert code == 0 and rec["entropy"] == pytest.approx(0.231049060186648, abs=1e-14)

    def test_realize(self, tmp_path):
        code, rec, _, _ = call("realize", write(tmp_path, MINIMAL), "--target", 1.0, "--n0", 1)
        assert code == 0
        assert rec["theta_star"] == pytest.approx(0.5281226564555958756, abs=1e-6)
        assert abs(rec["achieved_entropy"] - 1.0) <= 1e-9

    def test_unreachable(self, tmp_path):
        code, rec, err, _ = call("realize", write(tmp_path, MINIMAL), "--target", 0.1)
        assert code == 1 and rec["error"] == "Unreachable" and "Unreachable" in err

    def test_no_mass(self, tmp_path):
        code, rec, _, _ = call("realize", write(tmp_path, MINIMAL), "--target", 1.0, "--n0", 4)
        assert code == 1 and rec["error"] == "NoMass"

    def test_infeasible(self, tmp_path):
        code, rec, _, _ = call("budget", write(tmp_path, MINIMAL), "--budget", "1")
        assert code == 1 and rec["error"] == "Infeasible"

    @pytest.mark.parametrize("argv", [["entropy"], ["frobnicate", "x.json"],
                                      ["realize", "SCEN"], ["mc-entropy", "SCEN", "--samples", "ten"]])
    def test_usage_errors(self, tmp_path, argv, capsys):
        argv = [write(tmp_path, MINIMAL) if a == "SCEN" else a for a in argv]
        assert call(*argv)[0] == 2

    def test_bad_scenario_exit(self, tmp_path):
        code, rec, err, _ = call("entropy", write(tmp_path, "{"))
        assert code == 2 and rec is None and "s.json:1:2" in err
        assert call("entropy", tmp_path / "missing.json")[0] == 2

    def test_addition(self):
        code, rec, _, _ = call("addition", SCENARIOS / "cycle3.json")
        b = skew_entropy(cycle3())
        assert code == 0 and rec["total"] == b.total and rec["base_term"] == 0.0
        assert math.fsum(rec["per_coordinate"].values()) == pytest.approx(b.fiber_integral, abs=1e-12)

    def test_classify(self):
        assert call("classify", SCENARIOS / "single.json")[1]["label"] == "III_lambda(0.5)"
        assert call("classify", SCENARIOS / "power.json")[1]["label"] == "III_1"
        assert call("classify", SCENARIOS / "inverse.json")[1]["label"] == "II_1"

    def test_construct(self, tmp_path):
        out = tmp_path / "built.json"
        code, rec, _, _ = call("construct", SCENARIOS / "geometric.json", "--eps", 0.01,
                               "--type", "iiilambda", "--out", out)
        assert code == 0 and 0 < rec["entropy"] <= 0.02 and rec["norm_bounds_ok"]
        assert Fr(rec["weighted_budget_sum"]) < 2 and rec["l_prefix"][0] == 0
        assert call("entropy", out)[1]["entropy"] == rec["entropy"]

    def test_mc_entropy(self):
        code, rec, _, _ = call("mc-entropy", SCENARIOS / "cycle2.json", "--samples", 20000, "--seed", 3)
        assert code == 0 and abs(rec["mean"] - rec["exact"]) <= 4 * rec["stderr"]

    def test_stationarity(self):
        code, rec, _, _ = call("stationarity", SCENARIOS / "geometric.json", "--samples", 500)
        assert code == 0 and rec["defect"] == 0.0


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestCsv:
    def test_realize_curve(self, tmp_path):
        path = tmp_path / "curve.csv"
        call("realize", SCENARIOS / "single.json", "--target", 2.0, "--emit-curve", path,
             "--curve-points", 50)
        rows = read_csv(path)
        assert rows[0] == ["theta", "entropy"] and len(rows) == 51
        th, h = zip(*[(float(a), float(b)) for a, b in rows[1:]])
        assert th[-1] == 1.0 and h[-1] == pytest.approx(math.log(2) / 3, abs=1e-15)
        assert all(a > b for a, b in zip(h, h[1:]))

    def test_ratio_set(self, tmp_path):
        path = tmp_path / "r.csv"
        code, rec, _, _ = call("ratio-set", SCENARIOS / "single.json", "--depth", 50, "--samples", 2000,
                               "--csv", path)
        rows = read_csv(path)
        assert rows[0] == ["log_ratio", "multiplicity"] and len(rows) == rec["distinct"] + 1
        assert sum(int(m) for _, m in rows[1:]) == 2000
        assert abs(rec["lattice"] - math.log(2)) <= 1e-9

    def test_budget(self, tmp_path):
        path = tmp_path / "b.csv"
        call("budget", SCENARIOS / "geometric.json", "--csv", path)
        rows = read_csv(path)
        assert rows[0] == ["n", "kappa_n", "l_n", "partial_weighted_sum"]
        assert rows[1][:3] == ["1", "1/2", "0"]
        assert Fr(rows[-1][3]) == Fr(4095, 2048)

    @pytest.mark.parametrize("argv", [
        ["mc-entropy", "cycle3.json", "--samples", 30000, "--seed", 7],
        ["stationarity", "power.json", "--samples", 30000, "--seed", 7],
        ["ratio-set", "power.json", "--depth", 80, "--samples", 3000, "--seed", 7],
        ["realize", "cycle2.json", "--target", 3.0, "--n0", 2],
    ])
    def test_byte_identical_reruns(self, tmp_path, argv):
        argv = [SCENARIOS / a if str(a).endswith(".json") else a for a in argv]
        first, second = call(*argv)[3], call(*argv)[3]
        assert first == second and first
        if argv[0] in ("mc-entropy", "stationarity", "ratio-set"):
            assert call(*argv, "--workers", 4)[3] == first
