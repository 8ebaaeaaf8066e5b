import ast
from pathlib import Path

import numpy as np
import pytest

import autowedge.oracle as oracle
from autowedge.errors import NoDecayingDirection
from autowedge.field import convergence_slope
from autowedge.green import BoundaryOperatorSpec, BoundaryProfile
from autowedge.oracle import fd_solve, make_manufactured
from autowedge.surface import OperatorSpec

from conftest import DIRECTION


def test_manufactured_screened_pair():
    m = make_manufactured(OperatorSpec.screened(1.0), DIRECTION)
    assert m.k1 == pytest.approx(0.6) and m.k2 == pytest.approx(0.8)
    assert m.kernel_residual() < 1e-15


def test_manufactured_scales_with_the_mass():
    m = make_manufactured(OperatorSpec.screened(4.0), DIRECTION)
    assert m.k1 == pytest.approx(1.2) and m.k2 == pytest.approx(1.6)


def test_manufactured_complex_frequency():
    m = make_manufactured(OperatorSpec.helmholtz(1 + 0.5j), DIRECTION)
    assert m.k1.real > 0 and m.k2.real > 0
    assert m.kernel_residual() < 1e-14


def test_manufactured_with_first_order_terms():
    op = OperatorSpec(a20=-1.0, a02=-2.0, a00=2.0, a10=0.3, a01=-0.2)
    m = make_manufactured(op, DIRECTION)
    x = np.linspace(0.1, 2, 7)
    assert np.max(np.abs(m.apply_operator(x, x))) < 1e-13


def test_manufactured_without_decay():
    # purely oscillatory real-frequency kernel has no decaying exponential
    with pytest.raises(NoDecayingDirection):
        make_manufactured(OperatorSpec.helmholtz(1.0), DIRECTION)


@pytest.mark.parametrize("B1,B2", [
    (BoundaryOperatorSpec.dirichlet(1), BoundaryOperatorSpec.dirichlet(2)),
    (BoundaryOperatorSpec.impedance(1, 0.3), BoundaryOperatorSpec.impedance(2, 0.3)),
])
def test_finite_differences_converge_at_second_order(B1, B2):
    op = OperatorSpec.screened(1.0)
    m = make_manufactured(op, DIRECTION)
    f1, f2 = m.boundary_data(B1), m.boundary_data(B2)
    hs, errs = (0.2, 0.1, 0.05), []
    for h in hs:
        sol = fd_solve(op, B1, B2, f1, f2, 6.0, h, far=m)
        X1, X2 = np.meshgrid(sol.x, sol.x, indexing="ij")
        errs.append(np.max(np.abs(sol.u - m(X1, X2))))
    assert convergence_slope(hs, errs) == pytest.approx(2.0, abs=0.2)
    assert errs[-1] < 5e-3


def test_finite_differences_with_zero_far_closure():
    op = OperatorSpec.screened(1.0)
    B1, B2 = BoundaryOperatorSpec.dirichlet(1), BoundaryOperatorSpec.dirichlet(2)
    m = make_manufactured(op, DIRECTION)
    sol = fd_solve(op, B1, B2, m.boundary_data(B1), m.boundary_data(B2), 12.0, 0.05)
    assert sol.far_closure.startswith("zero")
    x = np.arange(1, 61) * 0.05
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    assert np.max(np.abs(sol.sample(x, x) - m(X1, X2))) < 5e-3
    assert sol.residual_norm < 1e-10
    assert sol.condition_estimate < oracle.COND_LIMIT


def test_finite_differences_zero_data():
    op = OperatorSpec.screened(1.0)
    sol = fd_solve(op, BoundaryOperatorSpec.dirichlet(1), BoundaryOperatorSpec.impedance(2, 0.3),
                   BoundaryProfile.zero(), BoundaryProfile.zero(), 4.0, 0.1)
    assert np.all(sol.u == 0)


def test_grid_must_fit_the_box():
    op = OperatorSpec.screened(1.0)
    B = BoundaryOperatorSpec.dirichlet
    with pytest.raises(ValueError):
        fd_solve(op, B(1), B(2), BoundaryProfile.zero(), BoundaryProfile.zero(), 1.0, 0.3)


def test_sampling_off_the_grid_is_refused():
    op = OperatorSpec.screened(1.0)
    B = BoundaryOperatorSpec.dirichlet
    sol = fd_solve(op, B(1), B(2), BoundaryProfile.exponential(1.0), BoundaryProfile.zero(), 2.0, 0.1)
    with pytest.raises(ValueError):
        sol.sample(np.array([0.15]), np.array([0.2]))


def test_oracle_does_not_depend_on_the_pipeline():
    tree = ast.parse(Path(oracle.__file__).read_text())
    imported = {node.module for node in ast.walk(tree) if isinstance(node, ast.ImportFrom)}
    assert not imported & {"surface", "elim", "rh", "field"}
