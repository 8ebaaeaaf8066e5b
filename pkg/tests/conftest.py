import numpy as np
import pytest

from autowedge.field import reconstruct, recover_traces
from autowedge.green import BoundaryOperatorSpec, assemble_green, make_equation
from autowedge.oracle import make_manufactured
from autowedge.surface import OperatorSpec, build_chart

# direction of the manufactured decay vector (k1, k2) = (0.6, 0.8)
DIRECTION = float(np.arctan2(0.8, 0.6))


class Problem:
    """A manufactured run: operator, boundary operators, exact field and data."""

    def __init__(self, op, B1, B2):
        self.op, self.B1, self.B2 = op, B1, B2
        self.exact = make_manufactured(op, DIRECTION)
        self.f1 = self.exact.boundary_data(B1)
        self.f2 = self.exact.boundary_data(B2)
        self.gs = assemble_green(op, B1, B2)
        self.eq = make_equation(self.gs, self.f1, self.f2)
        self.chart = build_chart(op)


def _screened(kind):
    op = OperatorSpec.screened(1.0)
    if kind == "dirichlet":
        B = BoundaryOperatorSpec.dirichlet
        return Problem(op, B(1), B(2))
    return Problem(op, BoundaryOperatorSpec.impedance(1, 0.3), BoundaryOperatorSpec.impedance(2, 0.3))


@pytest.fixture(scope="session")
def dirichlet():
    return _screened("dirichlet")


@pytest.fixture(scope="session")
def impedance():
    return _screened("impedance")


@pytest.fixture(scope="session")
def dirichlet_traces(dirichlet):
    return recover_traces(dirichlet.eq)


@pytest.fixture(scope="session")
def impedance_traces(impedance):
    return recover_traces(impedance.eq)


@pytest.fixture(scope="session")
def impedance_field(impedance_traces):
    return reconstruct(impedance_traces)


@pytest.fixture(scope="session")
def dirichlet_field(dirichlet_traces):
    return reconstruct(dirichlet_traces)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def upper_probes(n, rng, radius=3.0):
    """``n`` points with ``0.1 < Im z < radius``."""
    return rng.uniform(-radius, radius, n) + 1j * rng.uniform(0.1, radius, n)


# ---------------------------------------------------------------------------
# acceptance report: one line per criterion in the terminal summary

ACCEPTANCE = {}


class Criterion:
    """Context manager recording the outcome of one acceptance criterion."""

    def __init__(self, number, title):
        self.number, self.title = number, title
        self.details = []

    def note(self, text):
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.details)
        if exc is not None:
            detail = (detail + "; " if detail else "") + f"{exc_type.__name__}: {exc}".splitlines()[0]
        ACCEPTANCE[self.number] = (status, self.title, detail)
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}  [{detail}]")
