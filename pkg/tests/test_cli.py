import json
import warnings

import numpy as np
import pytest

from fluxcouple.cli import example_config, main, parse_config, run_sweep, serialize_plan
from fluxcouple.cli.config import SolverPlan, apply_sweep_value
from fluxcouple.cli.output import columns, format_csv, format_jsonl, read_csv
from fluxcouple.cli.sweep import SweepRow, mark_phase_instability
from fluxcouple.errors import ParseError, PhaseInstability, ValidationError

MINIMAL = '{"circuit": {"qubits": [{"alpha": 0.7, "r": 50}]}, "sweep": {"path": "alpha", "grid": [0.7, 0.8]}}'


def doc(**overrides):
    base = {
        "circuit": {
            "qubits": [{"alpha": 0.7, "r": 50, "ground": 0}, {"alpha": 0.7, "r": 50, "ground": 0}],
            "couplers": [{"kind": "capacitor", "gamma": 0.0, "from": [0, 2], "to": [1, 1]}],
        },
        "sweep": {"path": "gamma", "grid": [0.0, 0.01]},
        "solver": {"cutoff": 2, "method": "dense"},
        "outputs": ["spectrum", "pauli", "harmonic", "stoquastic"],
    }
    base.update(overrides)
    return json.dumps(base)


def junction_doc(grid):
    return json.dumps(
        {
            "circuit": {
                "qubits": [{"alpha": 0.7, "r": 50, "ground": 1}, {"alpha": 0.7, "r": 50, "ground": 2}],
                "couplers": [{"kind": "junction", "gamma": 0.01, "from": [0, 2], "to": [1, 1]}],
            },
            "sweep": {"path": "gamma", "grid": grid},
            "solver": {"cutoff": 2, "method": "dense"},
            "outputs": ["pauli", "stoquastic"],
        }
    )


def test_minimal_document_defaults():
    plan = parse_config(MINIMAL)
    assert plan.solver == SolverPlan()
    assert plan.solver.cutoff == "auto" and plan.solver.method == "auto"
    assert plan.outputs == ("spectrum", "pauli", "harmonic", "stoquastic")
    assert plan.seed == 20210615
    assert plan.spec.qubits[0].f == 0.5 and plan.spec.qubits[0].ground == 0


def test_ground_endpoint_rejected_with_path():
    bad = json.loads(doc())
    bad["circuit"]["couplers"][0]["to"] = [1, 0]
    with pytest.raises(ValidationError) as info:
        parse_config(json.dumps(bad))
    assert info.value.path == "circuit.couplers[0].to"
    assert "circuit.couplers[0].to" in str(info.value)


def test_shipped_example_round_trips():
    plan = parse_config(example_config("capacitive_reference"))
    assert len(plan.spec.qubits) == 2
    assert plan.grid[0] == pytest.approx(1e-3) and plan.grid[-1] == pytest.approx(3.0)
    text = serialize_plan(plan)
    again = parse_config(text)
    assert again == plan
    assert serialize_plan(again) == text


@pytest.mark.parametrize("name", ["single_qubit_gap", "junction_reference"])
def test_other_examples_parse(name):
    plan = parse_config(example_config(name))
    assert parse_config(serialize_plan(plan)) == plan


def test_parse_error_line_number():
    with pytest.raises(ParseError) as info:
        parse_config('{\n  "circuit": {\n    "qubits": [,]\n  }\n}')
    assert info.value.line == 3
    with pytest.raises(ParseError):
        parse_config('{"seed": 1, "seed": 2}')


@pytest.mark.parametrize(
    "mutate,path",
    [
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d["circuit"]["qubits"][0].update(Alpha=1), "circuit.qubits[0].Alpha"),
        (lambda d: d["circuit"]["qubits"][0].update(alpha=-1), "circuit.qubits[0].alpha"),
        (lambda d: d["circuit"]["couplers"][0].update(kind="resistor"), "circuit.couplers[0].kind"),
        (lambda d: d["circuit"]["couplers"][0].update(gamma=-0.1), "circuit.couplers[0].gamma"),
        (lambda d: d["circuit"]["couplers"][0].update(mutual=0.1), "circuit.couplers[0].mutual"),
        (lambda d: d["sweep"].update(grid=[]), "sweep.grid"),
        (lambda d: d["sweep"].update(grid=[0.1, 0.05, 0.2]), "sweep.grid"),
        (lambda d: d["sweep"].update(grid=[0.1, 0.1]), "sweep.grid"),
        (lambda d: d["sweep"].update(path="circuit.qubits[4].alpha"), "sweep.path"),
        (lambda d: d["sweep"].update(path="M"), "sweep.path"),
        (lambda d: d["sweep"].update(path="temperature"), "sweep.path"),
        (lambda d: d["solver"].update(cutoff=0), "solver.cutoff"),
        (lambda d: d["solver"].update(method="qr"), "solver.method"),
        (lambda d: d.update(outputs=["plots"]), "outputs[0]"),
        (lambda d: d.update(seed=-3), "seed"),
    ],
)
def test_validation_paths(mutate, path):
    d = json.loads(doc())
    mutate(d)
    with pytest.raises(ValidationError) as info:
        parse_config(json.dumps(d))
    assert info.value.path == path


def test_grid_object_forms():
    d = json.loads(doc())
    d["sweep"]["grid"] = {"start": 1e-3, "stop": 1e-1, "points": 3, "scale": "log"}
    np.testing.assert_allclose(parse_config(json.dumps(d)).grid, [1e-3, 1e-2, 1e-1])
    d["sweep"]["grid"] = {"start": 1.0, "stop": 0.0, "points": 5}
    np.testing.assert_allclose(parse_config(json.dumps(d)).grid, [1, 0.75, 0.5, 0.25, 0])


def test_explicit_path_updates_single_element():
    d = json.loads(doc())
    d["sweep"] = {"path": "circuit.qubits[1].alpha", "grid": [0.8]}
    plan = parse_config(json.dumps(d))
    spec, _, _ = apply_sweep_value(plan, 0.8)
    assert spec.qubits[0].alpha == 0.7 and spec.qubits[1].alpha == 0.8


def test_uncoupled_row():
    plan = parse_config(doc())
    row = run_sweep(plan)[0]
    assert row.flags == ()
    for label, c in row.pauli.items():
        if "I" not in label:
            assert abs(c) < 1e-10
    single = parse_config(
        json.dumps(
            {
                "circuit": {"qubits": [{"alpha": 0.7, "r": 50}]},
                "solver": {"cutoff": 2, "method": "dense"},
                "outputs": ["pauli"],
            }
        )
    )
    (ref,) = run_sweep(single)
    assert row.deltas[0] == pytest.approx(ref.deltas[0], abs=1e-12)
    assert row.deltas[1] == pytest.approx(ref.deltas[0], abs=1e-12)
    assert ref.deltas[1] is None


def test_sweep_is_byte_reproducible_and_order_stable():
    plan = parse_config(doc(sweep={"path": "gamma", "grid": [0.0, 0.05, 0.1]}))
    a = format_csv(run_sweep(plan), plan)
    b = format_csv(run_sweep(plan), plan)
    c = format_csv(run_sweep(plan, jobs=2), plan)
    assert a == b == c
    meta, records = read_csv(a)
    assert meta["plan_sha256"] == plan.digest()
    assert meta["cutoff_per_row"] == "2,2,2"
    assert [float(r["sweep_value"]) for r in records] == [0.0, 0.05, 0.1]


def test_fault_isolation_and_null_markers():
    plan = parse_config(junction_doc([0.01, 0.05, 2.0]))
    rows = run_sweep(plan)
    assert rows[-1].flags == ("SubspaceMismatch",)
    assert all(r.flags == () for r in rows[:-1])
    meta, records = read_csv(format_csv(rows, plan))
    cols = columns(plan)
    for rec in records:
        assert list(rec) == cols
    bad = records[-1]
    assert all(bad[c] == "" for c in cols if c not in ("sweep_value", "flags"))
    assert all(records[0][c] != "" for c in cols if c != "flags")
    jl = [json.loads(line) for line in format_jsonl(rows, plan).splitlines()]
    assert jl[-1]["J_xx"] is None and jl[-1]["flags"] == "SubspaceMismatch"


def test_phase_instability_flag():
    def row(v, c):
        labels = {"xx": c, "yy": 1e-3, "zz": 1e-3}
        return SweepRow(v, pauli=labels)

    rows = [row(0.0, 0.5), row(0.1, 0.6), row(0.2, -0.6), row(0.3, -0.61)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = mark_phase_instability(rows)
    assert [r.flags for r in out] == [(), (), ("PhaseInstability",), ()]
    assert any(issubclass(w.category, PhaseInstability) for w in caught)
    assert out[2].pauli["xx"] == -0.6


def test_cli_validate_and_sweep(tmp_path, capsys):
    cfg = tmp_path / "plan.json"
    cfg.write_text(doc(outputs=["pauli"], sweep={"path": "gamma", "grid": [0.0]}))
    assert main(["validate", "--config", str(cfg)]) == 0
    assert "ok: 2 qubit(s)" in capsys.readouterr().out
    out = tmp_path / "rows.csv"
    assert main(["sweep", "--config", str(cfg), "--output", str(out), "--cutoff", "1"]) == 0
    meta, records = read_csv(out.read_text())
    assert meta["cutoff_per_row"] == "1" and len(records) == 1
    assert main(["sweep", "--config", str(cfg), "--format", "jsonl", "--cutoff", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert json.loads(lines[1])["cutoff"] == 1


def test_cli_solve_and_harmonic(tmp_path, capsys):
    cfg = tmp_path / "plan.json"
    cfg.write_text(doc(sweep={"path": "gamma", "grid": [0.0, 0.1]}))
    assert main(["solve", "--config", str(cfg), "--value", "0.05"]) == 0
    text = capsys.readouterr().out
    assert "J_yy" in text and "E0" in text
    assert main(["harmonic", "--alpha", "0.4", "0.7", "--r", "50"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert float(lines[1].split(",")[3]) == 30.0


def test_cli_reports_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"circuit": {"qubits": []}}')
    assert main(["validate", "--config", str(cfg)]) == 2
    assert "circuit.qubits" in capsys.readouterr().err
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 2
