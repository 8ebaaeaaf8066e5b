"""Strict JSON run configurations for the command-line front end.

A run configuration looks like::

    {
      "operator": {"a20": [-1, 0], "a02": [-1, 0], "a00": [1, 0]},
      "boundary": {"side1": {"type": "dirichlet"},
                   "side2": {"type": "impedance", "b": [0.3, 0]}},
      "data": {"side1": {"family": "exponential", "k": [0.6, 0], "amplitude": [1, 0]},
               "side2": {"family": "zero"}},
      "numerics": {"rh_nodes": 800, "rh_tol": 1e-8, "inversion_R": 64,
                   "grid_L": 6, "grid_h": 0.1, "probes": [[0, 1], [1, 1]]},
      "sweep": {"omega0": 1.0, "epsilons": [0.4, 0.2, 0.1]}
    }

Complex numbers are ``[re, im]`` pairs (a bare real is accepted).  Instead of
per-side data a ``"manufactured"`` block ``{"k1", "k2", "amplitude"}`` derives
both sides' data from ``amplitude * exp(-k1 x1 - k2 x2)``; it also enables the
oracle comparisons of ``verify``.  Unknown keys are rejected with their path.
"""
import ast
import json
import operator
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError
from .green import BoundaryOperatorSpec, BoundaryProfile
from .oracle import ManufacturedSolution
from .surface import OperatorSpec

DEFAULT_PROBES = (1j, 1 + 1j, -2 + 0.5j, 0.5j, 2 + 2j)


def _check_keys(block, allowed, path, required=()):
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")
    for key in required:
        if key not in block:
            raise ConfigError(f"{path}.{key}: missing")


def _complex(value, path):
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number or [re, im]")
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise ConfigError(f"{path}: expected a number or [re, im]")


def _real(value, path, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a real number")
    if positive and not value > 0:
        raise ConfigError(f"{path}: must be positive")
    return float(value)


def _int(value, path):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{path}: expected a positive integer")
    return value


@dataclass(frozen=True)
class Numerics:
    rh_nodes: int = 800
    rh_tol: float = 1e-8
    inversion_R: float = 64.0
    grid_L: float = 6.0
    grid_h: float = 0.1
    probes: tuple = DEFAULT_PROBES


@dataclass(frozen=True)
class Sweep:
    omega0: float
    epsilons: tuple


@dataclass(frozen=True)
class RunConfig:
    op: OperatorSpec
    B1: BoundaryOperatorSpec
    B2: BoundaryOperatorSpec
    f1: BoundaryProfile
    f2: BoundaryProfile
    numerics: Numerics = field(default_factory=Numerics)
    manufactured: ManufacturedSolution = None
    sweep: Sweep = None
    tolerances: dict = field(default_factory=dict)

    def with_numerics(self, **changes):
        fields = {k: getattr(self.numerics, k) for k in Numerics.__dataclass_fields__}
        fields.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig(self.op, self.B1, self.B2, self.f1, self.f2, Numerics(**fields),
                         self.manufactured, self.sweep, self.tolerances)


def _parse_operator(block):
    names = ("a20", "a02", "a00", "a10", "a01")
    _check_keys(block, names, "operator", required=("a20", "a02", "a00"))
    vals = {k: _complex(block[k], f"operator.{k}") for k in names if k in block}
    try:
        return OperatorSpec(**vals)
    except ValueError as exc:
        raise ConfigError(f"operator: {exc}") from exc


def _parse_boundary(block, side):
    path = f"boundary.side{side}"
    _check_keys(block, ("type", "b"), path, required=("type",))
    kind = block["type"]
    if kind == "dirichlet":
        if "b" in block:
            raise ConfigError(f"{path}.b: not used by dirichlet")
        return BoundaryOperatorSpec.dirichlet(side)
    if kind == "impedance":
        if "b" not in block:
            raise ConfigError(f"{path}.b: missing")
        try:
            return BoundaryOperatorSpec.impedance(side, _complex(block["b"], f"{path}.b"))
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}.type: expected 'dirichlet' or 'impedance'")


def _parse_profile(block, path):
    _check_keys(block, ("family", "k", "amplitude"), path, required=("family",))
    fam = block["family"]
    if fam == "zero":
        if len(block) > 1:
            raise ConfigError(f"{path}: 'zero' takes no parameters")
        return BoundaryProfile.zero()
    if fam == "exponential":
        if "k" not in block:
            raise ConfigError(f"{path}.k: missing")
        k = _complex(block["k"], f"{path}.k")
        if k.real <= 0:
            raise ConfigError(f"{path}.k: needs a positive real part")
        amp = _complex(block.get("amplitude", 1.0), f"{path}.amplitude")
        return BoundaryProfile.exponential(k, amp)
    raise ConfigError(f"{path}.family: expected 'zero' or 'exponential'")


def _parse_numerics(block):
    names = Numerics.__dataclass_fields__
    _check_keys(block, names, "numerics")
    out = {}
    for key, value in block.items():
        p = f"numerics.{key}"
        if key == "rh_nodes":
            out[key] = _int(value, p)
        elif key == "probes":
            if not isinstance(value, list) or not value:
                raise ConfigError(f"{p}: expected a non-empty list")
            probes = tuple(_complex(v, f"{p}[{i}]") for i, v in enumerate(value))
            if any(z.imag <= 0 for z in probes):
                raise ConfigError(f"{p}: probes need a positive imaginary part")
            out[key] = probes
        else:
            out[key] = _real(value, p, positive=True)
    return Numerics(**out)


def parse_run_config(doc):
    """Validate a decoded JSON document and build the run configuration."""
    _check_keys(doc, ("operator", "boundary", "data", "manufactured", "numerics", "sweep",
                      "tolerances"), "config", required=("operator", "boundary"))
    op = _parse_operator(doc["operator"])
    _check_keys(doc["boundary"], ("side1", "side2"), "boundary", required=("side1", "side2"))
    B1 = _parse_boundary(doc["boundary"]["side1"], 1)
    B2 = _parse_boundary(doc["boundary"]["side2"], 2)
    man = None
    if "manufactured" in doc:
        if "data" in doc:
            raise ConfigError("config: give either 'data' or 'manufactured', not both")
        blk = doc["manufactured"]
        _check_keys(blk, ("k1", "k2", "amplitude"), "manufactured", required=("k1", "k2"))
        try:
            man = ManufacturedSolution(op, _complex(blk["k1"], "manufactured.k1"),
                                       _complex(blk["k2"], "manufactured.k2"),
                                       _complex(blk.get("amplitude", 1.0), "manufactured.amplitude"))
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"manufactured: {exc}") from exc
        if man.kernel_residual() > 1e-12:
            raise ConfigError("manufactured: exponential is not in the kernel of the operator")
        f1, f2 = man.boundary_data(B1), man.boundary_data(B2)
    elif "data" in doc:
        _check_keys(doc["data"], ("side1", "side2"), "data", required=("side1", "side2"))
        f1 = _parse_profile(doc["data"]["side1"], "data.side1")
        f2 = _parse_profile(doc["data"]["side2"], "data.side2")
    else:
        raise ConfigError("config.data: missing (or give 'manufactured')")
    numerics = _parse_numerics(doc.get("numerics", {}))
    sweep = None
    if "sweep" in doc:
        blk = doc["sweep"]
        _check_keys(blk, ("omega0", "epsilons"), "sweep", required=("omega0", "epsilons"))
        eps = blk["epsilons"]
        if not isinstance(eps, list) or not eps:
            raise ConfigError("sweep.epsilons: expected a non-empty list")
        sweep = Sweep(_real(blk["omega0"], "sweep.omega0", positive=True),
                      tuple(_real(e, f"sweep.epsilons[{i}]") for i, e in enumerate(eps)))
    tolerances = doc.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances: expected an object")
    tolerances = {k: _real(v, f"tolerances.{k}", positive=True) for k, v in tolerances.items()}
    return RunConfig(op, B1, B2, f1, f2, numerics, man, sweep, tolerances)


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_run_config(path):
    return parse_run_config(load_json(path))


# ---------------------------------------------------------------------------
# standalone jump problems

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt}
_CONSTS = {"i": 1j, "j": 1j, "pi": np.pi}


def compile_expression(text, path):
    """Safe evaluator ``f(s)`` for arithmetic expressions in ``s``.

    Supports numbers, ``s``, ``i``/``j``, ``pi``, ``+ - * / **`` and
    ``exp``/``log``/``sqrt``; anything else is a configuration error.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"{path}: cannot parse expression {text!r}") from exc

    def check(node):
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            check(node.operand)
        elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords:
            check(node.args[0])
        elif isinstance(node, ast.Name) and (node.id == "s" or node.id in _CONSTS):
            pass
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
                and not isinstance(node.value, bool):
            pass
        else:
            raise ConfigError(f"{path}: unsupported element in expression {text!r}")

    check(tree)

    def ev(node, s):
        if isinstance(node, ast.Expression):
            return ev(node.body, s)
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](ev(node.left, s), ev(node.right, s))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](ev(node.operand, s))
        if isinstance(node, ast.Call):
            return _FUNCS[node.func.id](ev(node.args[0], s))
        if isinstance(node, ast.Name):
            return s if node.id == "s" else _CONSTS[node.id]
        return node.value

    def fn(s):
        s = np.asarray(s, dtype=complex)
        return np.zeros(s.shape, complex) + ev(tree, s)

    return fn


def _table_function(block, path):
    """Interpolant in ``log s`` of a node table ``{"s", "re", "im"}``; constant outside."""
    _check_keys(block, ("s", "re", "im"), path, required=("s", "re", "im"))
    try:
        s, re, im = (np.asarray(block[k], dtype=float) for k in ("s", "re", "im"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: table entries must be numbers") from exc
    if s.ndim != 1 or s.shape != re.shape or s.shape != im.shape or s.size < 2:
        raise ConfigError(f"{path}: s, re, im must be equal-length lists (at least 2)")
    if np.any(s <= 0) or np.any(np.diff(s) <= 0):
        raise ConfigError(f"{path}.s: must be positive and increasing")
    v = re + 1j * im
    ls = np.log(s)
    spline = CubicSpline(ls, v) if s.size > 2 else None

    def fn(t):
        x = np.clip(np.log(np.abs(np.asarray(t, dtype=complex)).real), ls[0], ls[-1])
        if spline is None:
            return np.interp(x, ls, v.real) + 1j * np.interp(x, ls, v.imag)
        return spline(x)

    return fn


def _coefficient(block, path):
    if isinstance(block, str):
        return compile_expression(block, path)
    if isinstance(block, dict):
        return _table_function(block, path)
    if isinstance(block, (int, float, list)) and not isinstance(block, bool):
        c = _complex(block, path)
        return lambda s: np.full(np.shape(s), c, dtype=complex)
    raise ConfigError(f"{path}: expected an expression string, a constant or a node table")


@dataclass(frozen=True)
class JumpInput:
    q: object
    H: object
    nodes: int = 800
    tol: float = 1e-8
    samples: tuple = ()


def parse_jump_input(doc):
    """``{"q": ..., "H": ..., "nodes": N, "tol": x, "samples": [s, ...]}``.

    ``q`` and ``H`` are expressions in ``s`` (e.g. ``"(s+2)*(s+3)/((s+1)*(s+6))"``),
    constants or node tables on ``s > 0``.
    """
    _check_keys(doc, ("q", "H", "nodes", "tol", "samples"), "jump", required=("q", "H"))
    samples = doc.get("samples", list(np.logspace(-3, 3, 25)))
    if not isinstance(samples, list) or not samples:
        raise ConfigError("jump.samples: expected a non-empty list")
    samples = tuple(_real(v, f"jump.samples[{i}]", positive=True) for i, v in enumerate(samples))
    return JumpInput(_coefficient(doc["q"], "jump.q"), _coefficient(doc["H"], "jump.H"),
                    _int(doc.get("nodes", 800), "jump.nodes"),
                    _real(doc.get("tol", 1e-8), "jump.tol", positive=True), samples)


def load_jump_input(path):
    return parse_jump_input(load_json(path))
