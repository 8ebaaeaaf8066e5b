import numpy as np
import pytest

from autowedge.errors import NotStronglyElliptic, TruncationNotConverged
from autowedge.field import (FieldGrid, convergence_slope, inverse_trace, reconstruct,
                             recover_traces, residuals, sample_field, sweep_absorption)
from autowedge.green import (BoundaryOperatorSpec, BoundaryProfile, assemble_green,
                             make_equation, transform_profile)
from autowedge.surface import OperatorSpec, sample_v_plus

from conftest import Problem, upper_probes


def _exact_traces(pb, z):
    return (transform_profile(pb.exact.unknown_trace(pb.B1), z),
            transform_profile(pb.exact.unknown_trace(pb.B2), z))


@pytest.mark.parametrize("kind", ["dirichlet", "impedance"])
def test_recovered_traces_match_the_closed_form(kind, request, rng):
    pb = request.getfixturevalue(kind)
    tt = request.getfixturevalue(f"{kind}_traces")
    z = upper_probes(20, rng)
    ex1, ex2 = _exact_traces(pb, z)
    assert np.max(np.abs(tt.phi1(z) - ex1) / np.abs(ex1)) < 1e-6
    assert np.max(np.abs(tt.phi2(z) - ex2) / np.abs(ex2)) < 1e-6


def test_traces_on_the_real_axis(dirichlet, dirichlet_traces):
    x = np.linspace(-10, 10, 41).astype(complex)
    ex1, ex2 = _exact_traces(dirichlet, x)
    assert np.max(np.abs(dirichlet_traces.phi1(x) - ex1)) < 1e-6
    assert np.max(np.abs(dirichlet_traces.phi2(x) - ex2)) < 1e-6


def test_flagship_probe_value(dirichlet_traces):
    # -k1 / (k2 - i z2) at z2 = i
    assert dirichlet_traces.phi2(np.array([1j]))[0] == pytest.approx(-1 / 3, abs=1e-9)


@pytest.mark.parametrize("omega", [1 + 0.5j, 1 + 0.1j])
def test_complex_frequency_helmholtz_traces(omega, rng):
    op = OperatorSpec.helmholtz(omega)
    pb = Problem(op, BoundaryOperatorSpec.impedance(1, 0.3), BoundaryOperatorSpec.impedance(2, 0.3))
    tt = recover_traces(pb.eq)
    z = upper_probes(20, rng)
    ex1, ex2 = _exact_traces(pb, z)
    assert np.max(np.abs(tt.phi1(z) - ex1) / np.abs(ex1)) < 1e-6
    assert np.max(np.abs(tt.phi2(z) - ex2) / np.abs(ex2)) < 1e-6


@pytest.mark.parametrize("kind", ["dirichlet", "impedance"])
def test_compatibility_on_the_positive_part(kind, request, rng):
    tt = request.getfixturevalue(f"{kind}_traces")
    w = sample_v_plus(tt.chart, 50, rng)
    assert np.max(tt.compatibility(w)) < 1e-6


@pytest.mark.parametrize("kind", ["dirichlet", "impedance"])
def test_recovered_transform_is_invariant_under_the_z1_involution(kind, request):
    tt = request.getfixturevalue(f"{kind}_traces")
    s = np.linspace(-3, 3, 100) + 0.0123
    for part in tt.parts:
        assert np.max(part.automorphy_defect(s)) < 1e-7


def test_superposition_provenance(dirichlet_traces):
    prov = dirichlet_traces.provenance
    assert prov["phi1"] == ["recovered", "solved"]
    assert prov["phi2"] == ["solved", "recovered"]


def test_dirichlet_gauge_is_applied_only_with_corner_mismatch(dirichlet_traces, impedance_traces):
    assert all(p.shift != 0 for p in dirichlet_traces.parts)
    assert all(p.shift == 0 for p in impedance_traces.parts)


def test_zero_data_gives_zero_traces(dirichlet):
    eq = make_equation(dirichlet.gs, BoundaryProfile.zero(), BoundaryProfile.zero())
    tt = recover_traces(eq)
    assert tt.parts == []
    z = np.array([1j, 2 + 1j])
    assert np.all(tt.phi1(z) == 0) and np.all(tt.phi2(z) == 0)
    fg = reconstruct(tt)
    assert np.all(fg.u == 0)


@pytest.mark.parametrize("kind", ["dirichlet", "impedance"])
def test_field_matches_the_manufactured_solution(kind, request):
    pb = request.getfixturevalue(kind)
    fg = request.getfixturevalue(f"{kind}_field")
    assert fg.exact_error(pb.exact, 0.5) < 1e-3
    X1, X2 = np.meshgrid(fg.x1, fg.x2, indexing="ij")
    assert np.max(np.abs(fg.u - pb.exact(X1, X2))) < 1e-5
    assert fg.decays()


@pytest.mark.parametrize("kind", ["dirichlet", "impedance"])
def test_residuals_are_close_to_the_sampled_exact_field(kind, request):
    pb = request.getfixturevalue(kind)
    fg = request.getfixturevalue(f"{kind}_field")
    got = residuals(fg, pb.op, pb.B1, pb.B2, pb.f1, pb.f2)
    ref = residuals(sample_field(pb.exact, fg.length, fg.hx), pb.op, pb.B1, pb.B2, pb.f1, pb.f2)
    assert got.interior < 5 * ref.interior
    assert got.boundary < 5 * max(ref.boundary, 1e-12)


def test_stencil_residual_converges_at_second_order(impedance):
    pb = impedance
    hs = (0.2, 0.1, 0.05)
    errs = [residuals(sample_field(pb.exact, 6.0, h), pb.op, pb.B1, pb.B2, pb.f1, pb.f2,
                      stride=0.2).interior for h in hs]
    assert convergence_slope(hs, errs) == pytest.approx(2.0, abs=0.2)


def test_convergence_slope_of_a_power_law():
    hs = np.array([0.4, 0.2, 0.1])
    assert convergence_slope(hs, 3 * hs**2) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("k", [0.6, 1.0 + 0.5j, 2.0])
def test_inverse_trace_of_an_exponential(k):
    x = np.linspace(0, 6, 61)
    fn = lambda z: 1.0 / (k - 1j * z)
    got = inverse_trace(fn, x, radius=64.0, spacing=np.pi / 24)
    assert np.max(np.abs(got - np.exp(-k * x))) < 1e-6


def test_truncation_cap_is_reported(dirichlet_traces):
    with pytest.raises(TruncationNotConverged):
        reconstruct(dirichlet_traces, radius=8.0, max_radius=16.0, tol=1e-14)


def test_field_grid_decay_check():
    x = np.linspace(0, 1, 11)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    grow = FieldGrid(x, x, np.exp(X1 + X2).astype(complex), 0.1, 1.0, 1.0, 0.1)
    assert not grow.decays()


# ---------------------------------------------------------------------------
# limiting absorption

def _sweep_problem(op):
    gs = assemble_green(op, BoundaryOperatorSpec.dirichlet(1), BoundaryOperatorSpec.dirichlet(2))
    return make_equation(gs, BoundaryProfile.exponential(1.0), BoundaryProfile.zero())


def test_sweep_differences_shrink():
    rep = sweep_absorption(1.0, [0.4, 0.2, 0.1, 0.05, 0.025], _sweep_problem, [1j, 1 + 1j])
    assert rep.values.shape == (5, 2)
    assert np.all(np.diff(rep.differences) < 0)
    assert rep.cauchy


def test_sweep_rejects_zero_absorption():
    with pytest.raises(NotStronglyElliptic):
        sweep_absorption(1.0, [0.1, 0.0], _sweep_problem, [1j])


def test_sweep_rejects_probes_on_the_real_axis():
    with pytest.raises(ValueError):
        sweep_absorption(1.0, [0.1], _sweep_problem, [1.0 + 0j])
