"""End-to-end CLI behaviour: schemas, exit codes, files, determinism."""
import json

import numpy as np
import pytest

from qubitctl import config as cfgmod
from qubitctl.cli import main
from qubitctl.dynamics import ControlGrid, HamiltonianPair, propagate
from qubitctl.landscape import random_control
from qubitctl.mat2 import SIGMA_X, SIGMA_Z

ZX_PAIR = {"H0": {"z": 1.0}, "V": {"x": 1.0}, "traceless": True}
NOT_GATE = {"type": "gate", "W": "not"}
PHASE_GATE = {"type": "gate", "W": {"name": "phase", "phi": 1.5707963267948966}}


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


# ---------------------------------------------------------------- propagate


def test_propagate_free_rotation(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "p.json",
        {
            "pair": ZX_PAIR,
            "control": {"N": 8, "T": np.pi, "constant": 0.0},
            "objective": NOT_GATE,
        },
    )
    out = tmp_path / "dump.json"
    assert main(["propagate", "--config", cfg, "--out", str(out)]) == 0
    dump = json.loads(out.read_text())
    final = cfgmod.matrix_from_json(dump["unitaries"][-1])
    assert np.abs(final + np.eye(2)).max() < 1e-12
    assert dump["objective_value"] < 1e-20


def test_propagate_round_trip(tmp_path):
    cfg = write_config(
        tmp_path,
        "p.json",
        {"pair": ZX_PAIR, "control": {"N": 12, "T": 2.0, "random_amplitude": 1.0}, "seed": 4},
    )
    out = tmp_path / "dump.json"
    assert main(["propagate", "--config", cfg, "--out", str(out)]) == 0
    dump = json.loads(out.read_text())
    restored = cfgmod.trajectory_from_json(dump)
    pair = HamiltonianPair(SIGMA_Z, SIGMA_X, traceless=True)
    control = ControlGrid(2.0, np.random.default_rng(4).uniform(-1, 1, 12))
    direct = propagate(pair, control)
    assert np.abs(restored.node_unitaries - direct.node_unitaries).max() < 1e-12


def test_malformed_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["propagate", "--config", str(bad)]) == 2
    cfg = write_config(tmp_path, "unknown.json", {"pair": ZX_PAIR, "control": {"N": 2, "T": 1.0, "constant": 0.0}, "bogus": 1})
    assert main(["propagate", "--config", cfg]) == 2
    capsys.readouterr()


def test_physical_invariants_rechecked_on_load(tmp_path):
    cfg = write_config(
        tmp_path,
        "deg.json",
        {"pair": {"H0": {"z": 1.0}, "V": {"z": 2.0}}, "control": {"N": 2, "T": 1.0, "constant": 0.0}},
    )
    assert main(["propagate", "--config", cfg]) == 2  # commuting pair rejected


# ---------------------------------------------------------------- gradcheck


def test_gradcheck_pass_and_forced_failure(tmp_path, capsys):
    cfg = write_config(tmp_path, "g.json", {"instances": 3, "n_segments": 8, "seed": 1})
    out1 = tmp_path / "r1.json"
    assert main(["gradcheck", "--config", cfg, "--out", str(out1)]) == 0
    forced = write_config(
        tmp_path, "g2.json", {"instances": 3, "n_segments": 8, "seed": 1, "threshold": 1e-16}
    )
    assert main(["gradcheck", "--config", forced]) == 1
    capsys.readouterr()


def test_gradcheck_byte_identical(tmp_path, capsys):
    cfg = write_config(tmp_path, "g.json", {"instances": 2, "n_segments": 8, "seed": 9})
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["gradcheck", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["gradcheck", "--config", cfg, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    capsys.readouterr()


# ---------------------------------------------------------------- optimize


def test_optimize_reaches_gate_maximum(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "o.json",
        {
            "pair": ZX_PAIR,
            "objective": {"type": "gate", "W": "hadamard"},
            "control": {"N": 24, "T_multiplier": 2.0, "random_amplitude": 1.0},
            "seed": 5,
        },
    )
    out = tmp_path / "run.json"
    assert main(["optimize", "--config", cfg, "--out", str(out)]) == 0
    record = json.loads(out.read_text())
    assert record["status"] in {"converged", "step_underflow"}
    assert record["final_value"] > 1 - 1e-6
    trace = record["trace"]
    assert all(b >= a for a, b in zip(trace, trace[1:]))
    capsys.readouterr()


# ---------------------------------------------------------------- sweep


def _sweep_config(workers=1, seed=3):
    return {
        "objective": {"type": "gate", "W": "hadamard"},
        "pairs": {"count": 3, "traceless": True},
        "starts_per_pair": 2,
        "control": {"N": 16, "T_multiplier": 2.0},
        "seed": seed,
        "workers": workers,
    }


def test_sweep_outputs_and_consistency(tmp_path, capsys):
    cfg = write_config(tmp_path, "s.json", _sweep_config())
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    csv_lines = (tmp_path / "sweep.csv").read_text().strip().split("\n")
    assert csv_lines[0] == cfgmod.SWEEP_CSV_HEADER
    assert len(csv_lines) == 1 + 6
    summary = json.loads((tmp_path / "sweep.json").read_text())
    assert summary["n_runs"] == 6
    # summary counts equal CSV aggregation
    kinds = {}
    for line in csv_lines[1:]:
        kind = line.split(",")[-1]
        kinds[kind] = kinds.get(kind, 0) + 1
    assert kinds == summary["kind_counts"]
    assert summary["trap_candidates"] == 0
    capsys.readouterr()


def test_sweep_worker_invariant_output(tmp_path, capsys):
    cfg1 = write_config(tmp_path, "s1.json", _sweep_config(workers=1))
    cfg2 = write_config(tmp_path, "s2.json", _sweep_config(workers=2))
    assert main(["sweep", "--config", cfg1, "--out", str(tmp_path / "a")]) == 0
    assert main(["sweep", "--config", cfg2, "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    capsys.readouterr()


def test_sweep_seed_override(tmp_path, capsys):
    cfg = write_config(tmp_path, "s.json", _sweep_config(seed=3))
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "3"]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "4"]) == 0
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "b.csv").read_bytes()
    capsys.readouterr()


# ---------------------------------------------------------------- f0


def test_f0_canonical_instance(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "f0.json",
        {"pair": ZX_PAIR, "objective": PHASE_GATE, "epsilons": [1e-2, 1e-3], "n_segments": 1024},
    )
    out = tmp_path / "f0.json.out"
    assert main(["f0", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert abs(report["f0"]) < 1e-14
    assert abs(report["i_values"][0] - np.pi / 2) < 1e-10
    assert abs(report["i_values"][1] + np.pi / 12) < 1e-10
    assert report["verdict"] == "saddle_confirmed"
    text = capsys.readouterr().out
    assert "I1" in text and "verdict: saddle_confirmed" in text


def test_f0_hypothesis_violation_exit_3(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "f0bad.json",
        {"pair": {"H0": {"z": 1.0}, "V": {"x": 1.0, "i": 0.4}}, "objective": NOT_GATE},
    )
    assert main(["f0", "--config", cfg]) == 3
    capsys.readouterr()


# ---------------------------------------------------------------- rank


def test_rank_profile_cli(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "r.json",
        {"pair": ZX_PAIR, "control": {"N": 4, "T": np.pi, "constant": "f0"}},
    )
    out = tmp_path / "rank.json"
    assert main(["rank", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["ranks"] == [3, 3, 3, 3, 3]
    capsys.readouterr()


# ---------------------------------------------------------------- slice


def test_slice_through_global_maximum(tmp_path, capsys):
    pair = HamiltonianPair(SIGMA_Z, SIGMA_X, traceless=True)
    control = random_control(2, 10, 3.0)
    target = propagate(pair, control).final
    cfg = write_config(
        tmp_path,
        "sl.json",
        {
            "pair": ZX_PAIR,
            "objective": {"type": "gate", "W": cfgmod.matrix_to_json(target)},
            "control": {"T": 3.0, "values": [float(x) for x in control.values]},
            "directions": {"mode": "random"},
            "extent": 0.05,
            "resolution": 7,
            "seed": 8,
        },
    )
    out = tmp_path / "slice.txt"
    assert main(["slice", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("# qubitctl-slice")
    grid = np.array([[float(x) for x in line.split()] for line in lines[1:]])
    assert grid.shape == (7, 7)
    origin = grid[3, 3]
    assert abs(origin - 1.0) < 1e-12
    assert np.all(grid <= origin + 1e-12)
    capsys.readouterr()


def test_slice_f0_variations_opposite_curvature(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "sl2.json",
        {
            "pair": ZX_PAIR,
            "objective": PHASE_GATE,
            "control": {"N": 64, "T": np.pi, "constant": "f0"},
            "directions": {"mode": "f0_variations"},
            "extent": 0.01,
            "resolution": 5,
        },
    )
    out = tmp_path / "slice.txt"
    assert main(["slice", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    grid = np.array([[float(x) for x in line.split()] for line in lines[1:]])
    c = 2
    origin = grid[c, c]
    # axis 1 (step variation) increases the objective, axis 2 decreases it
    assert grid[c + 2, c] > origin and grid[c - 2, c] > origin
    assert grid[c, c + 2] < origin and grid[c, c - 2] < origin
    capsys.readouterr()


def test_slice_rejects_even_resolution(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "sl3.json",
        {
            "pair": ZX_PAIR,
            "objective": PHASE_GATE,
            "control": {"N": 8, "T": np.pi, "constant": 0.0},
            "directions": {"mode": "random"},
            "extent": 0.1,
            "resolution": 6,
            "seed": 1,
        },
    )
    assert main(["slice", "--config", cfg]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------- misc


def test_help_runs():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_objective_schema_strictness(tmp_path):
    cfg = write_config(
        tmp_path,
        "p.json",
        {
            "pair": ZX_PAIR,
            "control": {"N": 2, "T": 1.0, "constant": 0.0},
            "objective": {"type": "transition", "initial": [[1, 0], [0, 0]], "W": "not"},
        },
    )
    assert main(["propagate", "--config", cfg]) == 2


def test_non_normalized_state_rejected(tmp_path):
    cfg = write_config(
        tmp_path,
        "p.json",
        {
            "pair": ZX_PAIR,
            "control": {"N": 2, "T": 1.0, "constant": 0.0},
            "objective": {
                "type": "transition",
                "initial": [[1, 0], [1, 0]],
                "final": [[0, 0], [1, 0]],
            },
        },
    )
    assert main(["propagate", "--config", cfg]) == 2
