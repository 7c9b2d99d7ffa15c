"""JSON experiment descriptions: parsing, validation and canonical serialization."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from ..circuit import CircuitSpec, CouplerKind, CouplerSpec, QubitParams
from ..errors import ParseError, ValidationError
from ..numerics import DEFAULT_SEED

QUBIT_KEYS = {"alpha", "r", "beta", "f", "ground"}
COUPLER_KEYS = {"kind", "gamma", "mutual", "from", "to"}
TOP_KEYS = {"circuit", "sweep", "solver", "outputs", "seed"}
CIRCUIT_KEYS = {"qubits", "couplers", "delta_f", "delta_V"}
SWEEP_KEYS = {"path", "grid"}
GRID_KEYS = {"start", "stop", "points", "scale"}
SOLVER_KEYS = {"cutoff", "method", "tol", "effective", "levels", "excited_cap"}
OUTPUT_NAMES = ("spectrum", "pauli", "harmonic", "stoquastic")
BARE_PATHS = ("alpha", "r", "beta", "f", "gamma", "M", "delta_f", "delta_V")
EFFECTIVE_METHODS = ("swt", "p1", "p2")
_EXPLICIT = re.compile(r"^circuit\.(qubits|couplers)\[(\d+)\]\.(\w+)$")


@dataclass(frozen=True)
class SolverPlan:
    cutoff: int | str = "auto"
    method: str = "auto"
    tol: float = 1e-10
    effective: str = "swt"
    levels: int = 4
    excited_cap: int | str = 512


@dataclass(frozen=True)
class ExperimentPlan:
    spec: CircuitSpec
    sweep_path: str | None
    grid: tuple
    solver: SolverPlan
    outputs: tuple
    seed: int
    delta_f: float = 0.0
    delta_V: float = 0.0

    def with_solver(self, **changes):
        return replace(self, solver=replace(self.solver, **changes))

    def digest(self):
        return hashlib.sha256(serialize_plan(self).encode()).hexdigest()


def _reject_unknown(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ValidationError(path, f"expected an object, got {type(obj).__name__}")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ValidationError(f"{path}.{extra[0]}" if path else extra[0], "unknown key")


def _number(value, path, *, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        raise ValidationError(path, f"expected a finite number, got {value!r}")
    if positive and not value > 0:
        raise ValidationError(path, f"must be > 0, got {value}")
    if nonneg and value < 0:
        raise ValidationError(path, f"must be >= 0, got {value}")
    return float(value)


def _node(value, path):
    if isinstance(value, str) and re.fullmatch(r"node[012]", value):
        return int(value[-1])
    if isinstance(value, int) and not isinstance(value, bool) and value in (0, 1, 2):
        return value
    raise ValidationError(path, f"expected a node 0, 1 or 2, got {value!r}")


def _endpoint(value, path):
    if not (isinstance(value, list) and len(value) == 2):
        raise ValidationError(path, "endpoint must be [qubit, node]")
    q, node = value
    if isinstance(q, bool) or not isinstance(q, int):
        raise ValidationError(path, f"qubit index must be an integer, got {q!r}")
    return (q, _node(node, f"{path}[1]"))


def _qubit(obj, path):
    _reject_unknown(obj, QUBIT_KEYS, path)
    kw = {}
    for key, pos in (("alpha", True), ("r", True)):
        if key in obj:
            kw[key] = _number(obj[key], f"{path}.{key}", positive=pos)
    if "beta" in obj:
        kw["beta"] = _number(obj["beta"], f"{path}.beta", nonneg=True)
    if "f" in obj:
        kw["f"] = _number(obj["f"], f"{path}.f")
    if "ground" in obj:
        kw["ground"] = _node(obj["ground"], f"{path}.ground")
    return QubitParams(**kw)


def _coupler(obj, path):
    _reject_unknown(obj, COUPLER_KEYS, path)
    if "kind" not in obj:
        raise ValidationError(f"{path}.kind", "missing")
    try:
        kind = CouplerKind(obj["kind"])
    except ValueError:
        raise ValidationError(f"{path}.kind", f"unknown coupler kind {obj['kind']!r}") from None
    if "from" not in obj:
        raise ValidationError(f"{path}.from", "missing")
    source = _endpoint(obj["from"], f"{path}.from")
    target = None if obj.get("to") is None else _endpoint(obj["to"], f"{path}.to")
    if kind is CouplerKind.mutual_inductance:
        if "gamma" in obj:
            raise ValidationError(f"{path}.gamma", "mutual_inductance couplers take 'mutual'")
        mutual = _number(obj.get("mutual", 0.0), f"{path}.mutual")
        return CouplerSpec(kind, source, target, mutual=mutual)
    if "mutual" in obj:
        raise ValidationError(f"{path}.mutual", f"{kind.value} couplers take 'gamma'")
    gamma = _number(obj.get("gamma", 0.0), f"{path}.gamma", nonneg=True)
    return CouplerSpec(kind, source, target, gamma=gamma)


def _grid(obj, path):
    if isinstance(obj, list):
        values = [_number(v, f"{path}[{i}]") for i, v in enumerate(obj)]
    elif isinstance(obj, dict):
        _reject_unknown(obj, GRID_KEYS, path)
        for key in ("start", "stop", "points"):
            if key not in obj:
                raise ValidationError(f"{path}.{key}", "missing")
        start = _number(obj["start"], f"{path}.start")
        stop = _number(obj["stop"], f"{path}.stop")
        points = obj["points"]
        if isinstance(points, bool) or not isinstance(points, int) or points < 1:
            raise ValidationError(f"{path}.points", f"expected a positive integer, got {points!r}")
        scale = obj.get("scale", "linear")
        if scale == "linear":
            values = np.linspace(start, stop, points)
        elif scale == "log":
            if start <= 0 or stop <= 0:
                raise ValidationError(path, "log grids need positive start and stop")
            values = np.geomspace(start, stop, points)
        else:
            raise ValidationError(f"{path}.scale", f"expected 'linear' or 'log', got {scale!r}")
        values = [float(v) for v in values]
    else:
        raise ValidationError(path, "grid must be a list or {start, stop, points, scale}")
    if not values:
        raise ValidationError(path, "grid is empty")
    steps = np.diff(values)
    if len(values) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValidationError(path, "grid must be strictly monotone")
    return tuple(values)


def _solver(obj, path):
    _reject_unknown(obj, SOLVER_KEYS, path)
    plan = SolverPlan()
    kw = {}
    if "cutoff" in obj:
        c = obj["cutoff"]
        if c != "auto" and (isinstance(c, bool) or not isinstance(c, int) or c < 1):
            raise ValidationError(f"{path}.cutoff", f"expected 'auto' or an integer >= 1, got {c!r}")
        kw["cutoff"] = c
    if "method" in obj:
        if obj["method"] not in ("dense", "lanczos", "auto"):
            raise ValidationError(f"{path}.method", f"expected dense|lanczos|auto, got {obj['method']!r}")
        kw["method"] = obj["method"]
    if "tol" in obj:
        kw["tol"] = _number(obj["tol"], f"{path}.tol", positive=True)
    if "effective" in obj:
        if obj["effective"] not in EFFECTIVE_METHODS:
            raise ValidationError(f"{path}.effective", f"expected one of {EFFECTIVE_METHODS}, got {obj['effective']!r}")
        kw["effective"] = obj["effective"]
    if "levels" in obj:
        k = obj["levels"]
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ValidationError(f"{path}.levels", f"expected a positive integer, got {k!r}")
        kw["levels"] = k
    if "excited_cap" in obj:
        cap = obj["excited_cap"]
        if cap != "all" and (isinstance(cap, bool) or not isinstance(cap, int) or cap < 1):
            raise ValidationError(f"{path}.excited_cap", f"expected 'all' or a positive integer, got {cap!r}")
        kw["excited_cap"] = cap
    return replace(plan, **kw)


def _outputs(obj, path):
    if not isinstance(obj, list) or not obj:
        raise ValidationError(path, "expected a non-empty list")
    seen = []
    for i, name in enumerate(obj):
        if name not in OUTPUT_NAMES:
            raise ValidationError(f"{path}[{i}]", f"unknown output {name!r}; expected one of {OUTPUT_NAMES}")
        if name not in seen:
            seen.append(name)
    return tuple(n for n in OUTPUT_NAMES if n in seen)


def _check_sweep_path(path, spec):
    if path in BARE_PATHS:
        if path == "gamma" and not any(c.kind is not CouplerKind.mutual_inductance for c in spec.couplers):
            raise ValidationError("sweep.path", "no capacitor or junction coupler to sweep 'gamma' on")
        if path == "M" and not any(c.kind is CouplerKind.mutual_inductance for c in spec.couplers):
            raise ValidationError("sweep.path", "no mutual_inductance coupler to sweep 'M' on")
        return
    m = _EXPLICIT.match(path)
    if not m:
        raise ValidationError("sweep.path", f"unrecognized parameter path {path!r}")
    group, idx, attr = m.group(1), int(m.group(2)), m.group(3)
    items = spec.qubits if group == "qubits" else spec.couplers
    if idx >= len(items):
        raise ValidationError("sweep.path", f"{group}[{idx}] does not exist")
    allowed = {"alpha", "r", "beta", "f"} if group == "qubits" else {"gamma", "mutual"}
    if attr not in allowed:
        raise ValidationError("sweep.path", f"cannot sweep {group} attribute {attr!r}")
    if group == "qubits" and attr == "r" and len(spec.qubits) > 1:
        raise ValidationError("sweep.path", "r is shared by all qubits; sweep the bare 'r' path")


def _load_json(text):
    def no_duplicates(pairs):
        out = {}
        for k, v in pairs:
            if k in out:
                raise ValueError(f"duplicate key {k!r}")
            out[k] = v
        return out

    try:
        return json.loads(text, object_pairs_hook=no_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from None
    except ValueError as exc:
        raise ParseError(0, str(exc)) from None


def parse_config(text):
    """Parse and validate an experiment document.

    Raises
    ------
    ParseError
        Malformed JSON; carries the 1-based line number.
    ValidationError
        Schema or constraint violation; carries a dotted path such as
        ``circuit.couplers[0].to``.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    doc = _load_json(text)
    _reject_unknown(doc, TOP_KEYS, "")
    if "circuit" not in doc:
        raise ValidationError("circuit", "missing")
    circ = doc["circuit"]
    _reject_unknown(circ, CIRCUIT_KEYS, "circuit")
    qubits_doc = circ.get("qubits")
    if not isinstance(qubits_doc, list) or not qubits_doc:
        raise ValidationError("circuit.qubits", "expected a non-empty list")
    qubits = [_qubit(q, f"circuit.qubits[{i}]") for i, q in enumerate(qubits_doc)]
    couplers_doc = circ.get("couplers", [])
    if not isinstance(couplers_doc, list):
        raise ValidationError("circuit.couplers", "expected a list")
    couplers = [_coupler(c, f"circuit.couplers[{j}]") for j, c in enumerate(couplers_doc)]
    spec = CircuitSpec(qubits, couplers)
    delta_f = _number(circ.get("delta_f", 0.0), "circuit.delta_f")
    delta_V = _number(circ.get("delta_V", 0.0), "circuit.delta_V")

    sweep_path, grid = None, ()
    if "sweep" in doc:
        sw = doc["sweep"]
        _reject_unknown(sw, SWEEP_KEYS, "sweep")
        for key in ("path", "grid"):
            if key not in sw:
                raise ValidationError(f"sweep.{key}", "missing")
        if not isinstance(sw["path"], str):
            raise ValidationError("sweep.path", "expected a string")
        _check_sweep_path(sw["path"], spec)
        sweep_path, grid = sw["path"], _grid(sw["grid"], "sweep.grid")

    solver = _solver(doc.get("solver", {}), "solver")
    outputs = _outputs(doc.get("outputs", list(OUTPUT_NAMES)), "outputs")
    seed = doc.get("seed", DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError("seed", f"expected a non-negative integer, got {seed!r}")
    return ExperimentPlan(spec, sweep_path, grid, solver, outputs, seed, delta_f, delta_V)


def plan_document(plan):
    """The fully materialized JSON object of a plan."""
    qubits = [
        {"alpha": q.alpha, "r": q.r, "beta": q.beta, "f": q.f, "ground": q.ground} for q in plan.spec.qubits
    ]
    couplers = []
    for c in plan.spec.couplers:
        entry = {"kind": c.kind.value}
        if c.kind is CouplerKind.mutual_inductance:
            entry["mutual"] = c.mutual
        else:
            entry["gamma"] = c.gamma
        entry["from"] = list(c.source)
        entry["to"] = None if c.target is None else list(c.target)
        couplers.append(entry)
    doc = {
        "circuit": {"qubits": qubits, "couplers": couplers, "delta_f": plan.delta_f, "delta_V": plan.delta_V},
        "solver": {
            "cutoff": plan.solver.cutoff,
            "method": plan.solver.method,
            "tol": plan.solver.tol,
            "effective": plan.solver.effective,
            "levels": plan.solver.levels,
            "excited_cap": plan.solver.excited_cap,
        },
        "outputs": list(plan.outputs),
        "seed": plan.seed,
    }
    if plan.sweep_path is not None:
        doc["sweep"] = {"path": plan.sweep_path, "grid": list(plan.grid)}
    return doc


def serialize_plan(plan):
    """Canonical JSON text; ``parse_config(serialize_plan(p)) == p``."""
    return json.dumps(plan_document(plan), indent=2, sort_keys=True) + "\n"


def example_config(name):
    """Text of a shipped example document, e.g. ``"capacitive_reference"``."""
    path = resources.files("fluxcouple.cli").joinpath("examples", f"{name}.json")
    if not path.is_file():
        raise FileNotFoundError(f"no shipped example named {name!r}")
    return path.read_text(encoding="utf-8")


def apply_sweep_value(plan, value):
    """Circuit and perturbations with the sweep parameter set to ``value``."""
    spec, delta_f, delta_V = plan.spec, plan.delta_f, plan.delta_V
    path = plan.sweep_path
    if path is None:
        return spec, delta_f, delta_V
    if path == "delta_f":
        return spec, value, delta_V
    if path == "delta_V":
        return spec, delta_f, value
    if path in ("alpha", "r", "beta", "f"):
        return spec.with_qubits(**{path: value}), delta_f, delta_V
    if path in ("gamma", "M"):
        def update(c):
            if path == "M" and c.kind is CouplerKind.mutual_inductance:
                return replace(c, mutual=value)
            if path == "gamma" and c.kind is not CouplerKind.mutual_inductance:
                return replace(c, gamma=value)
            return c

        return replace(spec, couplers=tuple(update(c) for c in spec.couplers)), delta_f, delta_V
    m = _EXPLICIT.match(path)
    group, idx, attr = m.group(1), int(m.group(2)), m.group(3)
    if group == "qubits":
        qubits = list(spec.qubits)
        qubits[idx] = replace(qubits[idx], **{attr: value})
        return replace(spec, qubits=tuple(qubits)), delta_f, delta_V
    couplers = list(spec.couplers)
    couplers[idx] = replace(couplers[idx], **{attr: value})
    return replace(spec, couplers=tuple(couplers)), delta_f, delta_V
