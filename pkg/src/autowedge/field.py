"""Trace recovery, interior field reconstruction and residual reports."""
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .elim import eliminate, to_jump_problem
from .errors import (DivisionBySmallS1, NotStronglyElliptic, SingularJumpData,
                     TruncationNotConverged)
from .green import make_equation, transform_profile
from .rh import solve_jump
from .surface import OperatorSpec, build_chart, validate_ellipticity

log = logging.getLogger(__name__)

S1_FLOOR = 1e-10
# Imaginary heights used to read off the finite part of a logarithmically
# growing trace transform (Dirichlet data that do not vanish at the corner).
_GAUGE_HEIGHTS = (1e10, 1e12)


@dataclass
class SidePair:
    """Transforms of one subproblem in its own frame.

    ``solved`` is the jump-problem solution (function of the frame's z2) and
    ``recovered`` comes from the algebraic equation (function of z1).
    """

    se: object
    sf: object
    shift: complex = 0.0

    @property
    def chart(self):
        return self.se.chart

    @property
    def eq(self):
        return self.se.eq

    def solved(self, z2):
        """``psi2(z2)`` for ``Im z2 >= 0``; real ``z2`` gives the boundary value."""
        z2 = np.atleast_1d(np.asarray(z2, dtype=complex))
        out = np.empty(z2.shape, dtype=complex)
        on_cut = np.abs(z2.imag) <= 1e-12 * (1 + np.abs(z2))
        if on_cut.any():
            contour = self.sf.nodes.contour
            out[on_cut] = self.sf.plus(contour.y_of(z2[on_cut].real))
        if (~on_cut).any():
            w = self.chart.w_from_z2(z2[~on_cut])
            out[~on_cut] = self.sf(np.exp(2j * w))
        return out + self.shift

    def solved_at_w(self, w):
        """``psi2`` at a chart point; it depends on ``z2(w)`` only."""
        return self.solved(self.chart.z2(np.asarray(w, dtype=complex)))

    def recovered_at_w(self, w):
        """``psi1 = (G - S2 psi2) / S1`` at chart points ``w`` with ``Im z2 > 0``."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        ch, gs = self.chart, self.eq.gs
        z1, z2 = ch.z1(w), ch.z2(w)
        s1 = gs.S1(z1, z2) * np.ones_like(z1)
        small = np.abs(s1) < S1_FLOOR
        if small.any():
            raise DivisionBySmallS1(f"|S1| below {S1_FLOOR:g}", point=complex(w[small][0]))
        return (self.eq.G(z1, z2) - gs.S2(z1, z2) * self.solved_at_w(w)) / s1

    def recovered(self, z1):
        """``psi1(z1)`` for ``Im z1 >= 0`` via the preimage with larger ``Im z2``."""
        return self.recovered_at_w(self.chart.w_from_z1(z1))


    def automorphy_defect(self, s):
        """Relative mismatch of ``psi1`` at the two preimages ``w``, ``-w`` of ``z1``.

        ``w`` runs over the cut points with real ``z2 = s``; ``-w`` then
        sits over ``z2 = 2 c2 - s`` and uses an independent boundary value.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        ch, gs, eq = self.chart, self.eq.gs, self.eq
        contour = self.sf.nodes.contour
        w = contour.w_plus(contour.y_of(s))
        s_ref = (2 * ch.c2 - s).real

        def psi1(wv, psi2):
            z1, z2 = ch.z1(wv), ch.z2(wv)
            return (eq.G(z1, z2) - gs.S2(z1, z2) * psi2) / gs.S1(z1, z2)

        a = psi1(w, self.solved(s))
        b = psi1(-w, self.solved(s_ref))
        return np.abs(a - b) / np.maximum(np.abs(a), 1e-300)


def _finite_part(fn):
    """Constant term of ``fn(iY) ~ a log Y + b`` as ``Y -> inf``."""
    ya, yb = _GAUGE_HEIGHTS
    va, vb = fn(np.array([1j * ya]))[0], fn(np.array([1j * yb]))[0]
    slope = (vb - va) / np.log(yb / ya)
    return complex(va - slope * np.log(ya))


def solve_side(eq, n_nodes=800, tol=1e-8, max_nodes=25600):
    """Solve the subproblem with data on one side only (``f1`` or ``f2`` zero)."""
    se = eliminate(eq)
    jp = to_jump_problem(se, n_nodes)
    sf = solve_jump(jp, tol=tol, max_nodes=max_nodes)
    pair = SidePair(se, sf)
    phi = sf.phi
    if phi.d0 != 0 or phi.dinf != 0:
        gs = se.eq.gs
        if not (gs.B1.is_dirichlet and gs.B2.is_dirichlet):
            raise SingularJumpData("corner mismatch is only supported for Dirichlet data")
        # The constant in psi2 is not fixed by decay; pick zero finite part.
        pair.shift = -_finite_part(pair.solved)
    return pair


@dataclass
class TraceTransforms:
    """Evaluators of both trace transforms in the original frame.

    ``parts`` lists the per-side subproblems; each contributes its solved
    transform to one side and its recovered transform to the other.
    """

    eq: object
    chart: object
    parts: list = field(default_factory=list)

    def phi1(self, z1):
        z1 = np.atleast_1d(np.asarray(z1, dtype=complex))
        out = np.zeros(z1.shape, dtype=complex)
        for p in self.parts:
            out += p.solved(z1) if p.se.swapped else p.recovered(z1)
        return out

    def phi2(self, z2):
        z2 = np.atleast_1d(np.asarray(z2, dtype=complex))
        out = np.zeros(z2.shape, dtype=complex)
        for p in self.parts:
            out += p.recovered(z2) if p.se.swapped else p.solved(z2)
        return out

    @property
    def provenance(self):
        return {
            "phi1": [("solved" if p.se.swapped else "recovered") for p in self.parts],
            "phi2": [("recovered" if p.se.swapped else "solved") for p in self.parts],
        }

    def compatibility(self, w):
        """Relative residual of ``S1 phi1 + S2 phi2 = G`` at chart points ``w``."""
        ch, eq = self.chart, self.eq
        z1, z2 = ch.z1(w), ch.z2(w)
        g = eq.G(z1, z2)
        r = eq.residual(z1, z2, self.phi1(z1), self.phi2(z2))
        return np.abs(r) / np.maximum(np.abs(g), 1e-300)


def recover_traces(eq, chart=None, n_nodes=800, tol=1e-8, max_nodes=25600):
    """Solve the boundary-value problem for both trace transforms.

    Data on both sides are handled by superposition of one-sided runs.
    """
    chart = build_chart(eq.gs.op) if chart is None else chart
    tt = TraceTransforms(eq, chart)
    if not eq.f1.is_zero:
        tt.parts.append(solve_side(make_equation(eq.gs, eq.f1, eq.f2.zero()),
                                   n_nodes, tol, max_nodes))
    if not eq.f2.is_zero:
        tt.parts.append(solve_side(make_equation(eq.gs, eq.f1.zero(), eq.f2),
                                   n_nodes, tol, max_nodes))
    return tt


# ---------------------------------------------------------------------------
# interior field

TAPER_FRACTION = 0.2


@dataclass
class FieldGrid:
    """``u`` on ``[0, L] x [0, L]``; ``u[i, l]`` is the value at ``(x1[i], x2[l])``."""

    x1: np.ndarray
    x2: np.ndarray
    u: np.ndarray
    hx: float
    length: float
    radius: float
    node_spacing: float
    taper_fraction: float = TAPER_FRACTION
    change: float = 0.0

    def exact_error(self, exact, x_min=0.5):
        """Max relative error against ``exact(x1, x2)`` where both ``x >= x_min``."""
        X1, X2 = np.meshgrid(self.x1, self.x2, indexing="ij")
        mask = (X1 >= x_min - 1e-12) & (X2 >= x_min - 1e-12)
        ref = exact(X1, X2)
        return float(np.max(np.abs(self.u - ref)[mask] / np.abs(ref)[mask]))

    def decays(self):
        """Max ``|u|`` over the outer 10% band is below that over the inner band."""
        X1, X2 = np.meshgrid(self.x1, self.x2, indexing="ij")
        r = np.maximum(X1, X2)
        outer = np.max(np.abs(self.u[r >= 0.9 * self.length]))
        inner = np.max(np.abs(self.u[r <= 0.1 * self.length]))
        return bool(outer < inner)


def _taper(z, radius, frac=TAPER_FRACTION):
    a = np.abs(z) / radius
    start = 1.0 - frac
    ramp = 0.5 * (1.0 + np.cos(np.pi * (a - start) / frac))
    return np.where(a <= start, 1.0, np.where(a >= 1.0, 0.0, ramp))


def _quadratic_roots(a, b, c):
    """Roots of ``a x^2 + b x + c`` split as ``(Im < 0, Im > 0)``."""
    disc = np.sqrt(b * b - 4 * a * c + 0j)
    # cancellation-free pair
    sgn = np.where(np.real(np.conj(b) * disc) >= 0, 1.0, -1.0)
    q = -0.5 * (b + sgn * disc)
    r1 = q / a
    r2 = np.where(q == 0, 0.0, c / np.where(q == 0, 1.0, q))
    lower = np.where(r1.imag < r2.imag, r1, r2)
    upper = np.where(r1.imag < r2.imag, r2, r1)
    if np.any(lower.imag >= 0) or np.any(upper.imag <= 0):
        raise NotStronglyElliptic("symbol has a real root on the inversion contour")
    return lower, upper


def _line_nodes(radius, spacing):
    n = int(np.ceil(radius / spacing))
    z = np.linspace(-radius, radius, 2 * n + 1)
    return z, (z[1] - z[0]) * _taper(z, radius)


def _inverse_amplitudes(tt, radius, spacing):
    """Plane-wave amplitudes and wave vectors of ``-F/A`` inverted over the real plane.

    For each ``z1`` node the ``z2`` integral of the ``z1``-terms of ``F`` is
    done by the residue at the lower root of the symbol, and vice versa.
    """
    eq, gs, op = tt.eq, tt.eq.gs, tt.eq.gs.op
    z, wt = _line_nodes(radius, spacing)
    keep = wt != 0
    z, wt = z[keep], wt[keep]
    alpha, beta = -op.a20, -op.a02

    # z1 nodes: A(z1, .) = beta z2^2 - i a01 z2 + (alpha z1^2 - i a10 z1 + a00)
    lo, hi = _quadratic_roots(beta, -1j * op.a01, alpha * z * z - 1j * op.a10 * z + op.a00)
    side1 = gs.S1(z, lo) * tt.phi1(z)
    if not eq.f1.is_zero:
        side1 = side1 + gs.P1(z, lo) * eq.f1hat(z)
    amp1 = wt * (-2j * np.pi) * side1 / (beta * (lo - hi))

    # z2 nodes: roots in z1
    lo2, hi2 = _quadratic_roots(alpha, -1j * op.a10, beta * z * z - 1j * op.a01 * z + op.a00)
    side2 = gs.S2(lo2, z) * tt.phi2(z)
    if not eq.f2.is_zero:
        side2 = side2 + gs.P2(lo2, z) * eq.f2hat(z)
    amp2 = wt * (-2j * np.pi) * side2 / (alpha * (lo2 - hi2))

    amp = -np.concatenate([amp1, amp2]) / (4 * np.pi**2)
    return amp, np.concatenate([z, lo2]), np.concatenate([lo, z])


def _asymptotic_coefficients(fn, terms=3, heights=(40.0, 80.0, 160.0, 320.0, 640.0, 1280.0)):
    """``c_k`` with ``fn(z) ~ sum c_k / (1 - i z)^k`` along ``z = iY``, ``Y -> inf``."""
    Y = np.asarray(heights)
    v = fn(1j * Y)
    basis = np.stack([(1.0 + Y) ** -k for k in range(1, terms + 2)], axis=1)
    # one extra term absorbs the truncation of the expansion
    coef = np.linalg.lstsq(basis * Y[:, None], v * Y, rcond=None)[0]
    return coef[:terms]


def inverse_trace(fn, x, radius, spacing, terms=3):
    """``(1/2pi) int fn(z) exp(-i z x) dz`` for a half-line transform ``fn``.

    The leading large-``|z|`` terms ``c_k / (1 - i z)^k`` are inverted exactly
    (``c_k x^(k-1) e^(-x) / (k-1)!``) and the remainder by the tapered
    trapezoid rule, so values right at ``x = 0`` converge quickly.
    """
    x = np.asarray(x, dtype=float)
    c = _asymptotic_coefficients(fn, terms)
    z, wt = _line_nodes(radius, spacing)
    model = sum(ck / (1 - 1j * z) ** (k + 1) for k, ck in enumerate(c))
    rem = (fn(z) - model) * wt / (2 * np.pi)
    out = _accel.plane_wave_sum(rem, z, np.zeros_like(z), x, np.zeros(1))[:, 0]
    fact = 1.0
    for k, ck in enumerate(c):
        fact = fact * max(k, 1)
        out = out + ck * x**k * np.exp(-x) / fact
    return out


def _side_line(tt, side, x, radius, spacing):
    """Field values along side ``side`` from its data or its solved trace."""
    gs, eq = tt.eq.gs, tt.eq
    B, f, phi = (gs.B1, eq.f1, tt.phi1) if side == 1 else (gs.B2, eq.f2, tt.phi2)
    if B.is_dirichlet:
        return f(x) / B.b0
    return inverse_trace(phi, x, radius, spacing)


def _fill_sides(tt, u, x, radius, spacing):
    """Replace the boundary lines, where the 2-D inversion converges slowly."""
    s1 = _side_line(tt, 1, x, radius, spacing)
    s2 = _side_line(tt, 2, x, radius, spacing)
    u = u.copy()
    u[1:, 0] = s1[1:]
    u[0, 1:] = s2[1:]
    u[0, 0] = 0.5 * (s1[0] + s2[0])
    return u


def reconstruct(tt, length=6.0, hx=0.1, radius=64.0, tol=1e-3, max_radius=1024.0,
                x_min=None):
    """Interior field on ``[0, L]^2`` by windowed inverse transform.

    The truncation radius is doubled until the sup-norm change over grid
    points with both coordinates ``>= x_min`` (default ``hx``) is below
    ``tol``; on the boundary lines the integrals converge only algebraically.
    """
    n = int(round(length / hx))
    x = np.linspace(0.0, n * hx, n + 1)
    spacing = np.pi / (4 * length)
    x_min = hx if x_min is None else x_min
    inner = np.ix_(x >= x_min - 1e-12, x >= x_min - 1e-12)
    if not tt.parts:
        return FieldGrid(x, x.copy(), np.zeros((x.size, x.size), complex), hx, length,
                         radius, spacing)
    prev = None
    R = float(radius)
    while True:
        amp, k1, k2 = _inverse_amplitudes(tt, R, spacing)
        u = _fill_sides(tt, _accel.plane_wave_sum(amp, k1, k2, x, x), x, R, spacing)
        if prev is not None:
            scale = max(np.max(np.abs(u[inner])), 1e-300)
            change = float(np.max(np.abs(u - prev)[inner]) / scale)
            if change < tol:
                return FieldGrid(x, x.copy(), u, hx, length, R, spacing, change=change)
            if 2 * R > max_radius:
                raise TruncationNotConverged(
                    f"doubling R to {R:g} changed the field by {change:.3g} > {tol:g}")
        prev = u
        R *= 2


# ---------------------------------------------------------------------------
# residual report

@dataclass
class ResidualReport:
    interior: float
    boundary1: float
    boundary2: float
    hx: float

    @property
    def boundary(self):
        return max(self.boundary1, self.boundary2)


def apply_stencil(u, h, op):
    """Discrete ``A u`` on interior nodes (second-order central differences)."""
    c = u[1:-1, 1:-1]
    d11 = (u[2:, 1:-1] - 2 * c + u[:-2, 1:-1]) / h**2
    d22 = (u[1:-1, 2:] - 2 * c + u[1:-1, :-2]) / h**2
    d1 = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2 * h)
    d2 = (u[1:-1, 2:] - u[1:-1, :-2]) / (2 * h)
    return op.a20 * d11 + op.a02 * d22 + op.a10 * d1 + op.a01 * d2 + op.a00 * c


def _boundary_values(u, h, B):
    """``B u`` along its side (nodes 1..n-1) with one-sided normal differences."""
    v = u if B.side == 1 else u.T     # v[along, across]
    inward = (-3 * v[1:-1, 0] + 4 * v[1:-1, 1] - v[1:-1, 2]) / (2 * h)
    tangential = (v[2:, 0] - v[:-2, 0]) / (2 * h)
    return B.b0 * v[1:-1, 0] - B.bn * inward + B.bt * tangential


def residuals(fg, op, B1, B2, f1, f2, corner_skip=0.0, stride=None):
    """Max ``|A_h u|`` on interior nodes and max boundary-condition mismatch.

    ``stride`` restricts both reports to nodes on multiples of that spacing,
    so runs at different ``hx`` are compared at the same points.  Boundary
    nodes closer than ``corner_skip`` to the corner are left out.
    """
    u, h = fg.u, fg.hx
    x = fg.x1[1:-1]
    on = np.ones(x.shape, bool)
    if stride is not None:
        ratio = x / stride
        on = np.abs(ratio - np.rint(ratio)) < 1e-9
    if u.shape[0] > 2 and on.any():
        interior = float(np.max(np.abs(apply_stencil(u, h, op)[np.ix_(on, on)])))
    else:
        interior = 0.0
    keep = (x >= corner_skip - 1e-12) & on
    out = []
    for B, f in ((B1, f1), (B2, f2)):
        mis = np.abs(_boundary_values(u, h, B) - f(x))[keep]
        out.append(float(np.max(mis)) if mis.size else 0.0)
    return ResidualReport(interior, out[0], out[1], h)


def sample_field(fn, length, hx):
    """A ``FieldGrid`` holding ``fn(x1, x2)`` sampled on the standard grid."""
    n = int(round(length / hx))
    x = np.linspace(0.0, n * hx, n + 1)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    return FieldGrid(x, x.copy(), np.asarray(fn(X1, X2), dtype=complex), hx, length,
                     radius=np.inf, node_spacing=0.0)


def convergence_slope(hs, errors):
    """Least-squares slope of ``log error`` against ``log h``."""
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


# ---------------------------------------------------------------------------
# limiting absorption

@dataclass
class SweepReport:
    eps: np.ndarray
    probes: np.ndarray
    values: np.ndarray            # values[i, j]: probe j at eps[i]
    differences: np.ndarray       # max |change| between successive eps
    orders: np.ndarray            # empirical orders from successive ratios
    cauchy: bool


def sweep_absorption(omega0, eps_list, make_problem, probes, n_nodes=800, tol=1e-8):
    """Trace probes ``phi2(z2)`` for ``A = Delta + (omega0 + i eps)^2`` as ``eps`` shrinks.

    ``make_problem(op)`` returns the algebraic equation for one operator.
    Differences between successive ``eps`` must decrease monotonically over
    the last four entries for the sequence to count as Cauchy.
    """
    eps = np.asarray(eps_list, dtype=float)
    probes = np.asarray(probes, dtype=complex)
    if np.any(probes.imag <= 0):
        raise ValueError("probe points need Im z2 > 0")
    if np.any(eps <= 0):
        raise NotStronglyElliptic("absorption must be positive; eps <= 0 gives real symbol zeros")
    rows = []
    for e in eps:
        op = OperatorSpec.helmholtz(omega0 + 1j * e)
        validate_ellipticity(op)
        tt = recover_traces(make_problem(op), n_nodes=n_nodes, tol=tol)
        rows.append(tt.phi2(probes))
    values = np.array(rows)
    diffs = np.max(np.abs(np.diff(values, axis=0)), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = diffs[:-1] / diffs[1:]
        step = eps[:-2] / eps[1:-1]
        orders = np.log(ratio) / np.log(step)
    tail = diffs[-3:]
    cauchy = bool(tail.size >= 2 and np.all(np.diff(tail) < 0))
    return SweepReport(eps, probes, values, diffs, orders, cauchy)
