"""Scalar Riemann-Hilbert problems on a cut from 0 to infinity.

A cut ``Gamma`` is given by a parametrization ``tau(y)``, ``y`` real, running
from ``tau -> 0`` (``y -> -inf``) to ``tau -> inf``.  The ``+`` side is the
left side of that orientation.  Cauchy transforms

    C[d](t) = 1/(2 pi i) * int_Gamma d(tau) / (tau - t) dtau

have jump ``C+ - C- = d`` and are computed by the trapezoid rule in ``y``
with two subtractions:

* endpoint limits of ``d`` are removed with a closed-form logarithmic
  function (the density may tend to nonzero constants at both ends);
* near the cut a two-term pole model matching value and slope of the
  density at the closest point is removed and added back exactly.

The homogeneous problem ``T+ = q T-`` is solved by ``log T = C[log q]`` and
``R1 psi- - R2 psi+ = H`` by ``psi = T * C[-H / (R1 T-)]``.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.optimize import minimize_scalar

from . import _accel
from .errors import BranchDiscontinuity, NearEndpoint, SingularJumpData

log = logging.getLogger(__name__)

TWO_PI_I = 2j * np.pi
_FD_STEP = 1e-3
_NEAR_FACTOR = 4.0
_LIMIT_PAD = (10.0, 14.0)


# ---------------------------------------------------------------------------
# contours

class HalfLine:
    """The cut [0, inf) with ``tau = scale * exp(y)``."""

    def __init__(self, scale=1.0):
        self.scale = float(scale)

    def tau(self, y):
        return self.scale * np.exp(np.asarray(y) + 0j)

    def dtau(self, y):
        return self.tau(y)

    def log_branch(self, t):
        # arg in (0, 2 pi): continuous off [0, inf)
        return np.log(-np.asarray(t, dtype=complex)) + 1j * np.pi

    def log_plus(self, y):
        return np.log(self.scale) + np.asarray(y) + 0j

    def y_of(self, s):
        return np.log(np.asarray(s, dtype=float) / self.scale)


class SurfaceCut:
    """Image of the real ``z2`` axis under ``t = exp(2 i w)`` for a surface chart.

    The parameter is ``y = asinh((s - Re c2) / scale)`` with ``s`` the real
    value of ``z2``; the ``+`` side is the principal-arcsin preimage.
    """

    def __init__(self, chart, scale=None):
        if abs(chart.c2.imag) > 1e-14 * (1 + abs(chart.c2)):
            raise SingularJumpData("chart center c2 must be real for the strip reduction")
        self.chart = chart
        self.scale = abs(chart.r2) if scale is None else float(scale)

    def s_of(self, y):
        return self.chart.c2.real + self.scale * np.sinh(np.asarray(y) + 0j)

    def y_of(self, s):
        return np.arcsinh((np.asarray(s, dtype=float) - self.chart.c2.real) / self.scale)

    def w_plus(self, y):
        y = np.asarray(y) + 0j
        w = np.arcsin((self.s_of(y) - self.chart.c2) / self.chart.r2)
        if np.any(y.imag != 0):
            # continue from the real-parameter branch
            w_ref = np.arcsin((self.s_of(y.real) - self.chart.c2) / self.chart.r2)
            cands = [w, np.pi - w, w + 2 * np.pi, w - 2 * np.pi, np.pi - w + 2 * np.pi, np.pi - w - 2 * np.pi]
            best = cands[0]
            for cnd in cands[1:]:
                best = np.where(np.abs(cnd - w_ref) < np.abs(best - w_ref), cnd, best)
            w = best
        return w

    def tau(self, y):
        return np.exp(2j * self.w_plus(y))

    def dtau(self, y):
        w = self.w_plus(y)
        dw = self.scale * np.cosh(np.asarray(y) + 0j) / (self.chart.r2 * np.cos(w))
        return 2j * np.exp(2j * w) * dw

    def log_branch(self, t):
        return 2j * self.chart.w_from_t(t)

    def log_plus(self, y):
        return 2j * self.w_plus(y)


# ---------------------------------------------------------------------------
# nodes and the Cauchy transform

@dataclass(frozen=True)
class NodeSet:
    contour: object
    n: int = 800
    half_width: float = 36.0

    @property
    def h(self):
        return 2 * self.half_width / self.n

    @property
    def y(self):
        return -self.half_width + self.h * (np.arange(self.n) + 0.5)

    def refined(self):
        return NodeSet(self.contour, 2 * self.n, self.half_width)

    def check_interior(self, y, margin=np.log(10.0)):
        y = np.asarray(y, dtype=float)
        if np.any(y < -self.half_width + margin) or np.any(y > self.half_width - margin):
            raise NearEndpoint("evaluation point too close to the end of the sampled cut")


def _J(ell):
    return -ell / TWO_PI_I


def _far_point(contour, tau_nodes, ref):
    """Point at the scale of ``ref`` kept well away from the cut."""
    ref = np.atleast_1d(np.asarray(ref, dtype=complex))
    angles = np.array([np.pi, 0.5 * np.pi, -0.5 * np.pi, 0.75 * np.pi, -0.75 * np.pi,
                       0.25 * np.pi, -0.25 * np.pi])
    best = np.empty_like(ref)
    score = np.full(ref.shape, -np.inf)
    for th in angles:
        for rad in (1.0, 2.0):
            cand = ref * rad * np.exp(1j * th)
            dist = np.empty(ref.shape)
            for i0 in range(0, ref.size, 512):
                sl = slice(i0, i0 + 512)
                dist[sl] = np.min(np.abs(tau_nodes[None, :] - cand[sl, None]), axis=1)
            rel = dist / (np.abs(ref) * rad)
            better = rel > score
            best = np.where(better, cand, best)
            score = np.where(better, rel, score)
    return best


class CauchyTransform:
    """``const + C[d]`` for a density callable ``d(y)`` on ``nodes.contour``.

    ``d`` must accept complex ``y`` (its analytic continuation off the cut);
    near-cut targets remove the pole exactly using ``d`` at the complex
    parameter of the target.
    """

    def __init__(self, nodes, density, d0=None, dinf=None, const=0.0):
        self.nodes = nodes
        self.contour = c = nodes.contour
        self.density = density
        if d0 is None or dinf is None:
            d0, dinf = endpoint_limits(nodes, density)
        self.d0 = complex(d0)
        self.dinf = complex(dinf)
        self.const = complex(const)
        y = nodes.y
        self.tau = c.tau(y)
        self.dtau_nodes = c.dtau(y)
        self.wts = nodes.h * self.dtau_nodes
        self._pivot = complex(_far_point(c, self.tau, c.tau(0.0))[0])
        self._Jp = complex(_J(c.log_branch(self._pivot)))
        self.r = density(y) - self._g(self.tau)

    def with_const(self, const):
        out = object.__new__(CauchyTransform)
        out.__dict__.update(self.__dict__)
        out.const = complex(const)
        return out

    # endpoint model g(tau) -> d0 at 0 and dinf at infinity; its transform
    # is dinf*J(t) + o(1) at infinity, so no constant is introduced there
    def _g(self, tau):
        p = self._pivot
        return self.dinf + (self.d0 - self.dinf) * p / (p - tau)

    def _g_transform(self, t, J):
        p = self._pivot
        gap = p - t
        at_pivot = np.abs(gap) < 1e-9 * abs(p)
        safe = np.where(at_pivot, 1.0, gap)
        # p (J(t) - J(p)) / (p - t) -> -p J'(p) = 1 / (2 pi i) as t -> p
        ratio = np.where(at_pivot, 1.0 / TWO_PI_I, p * (J - self._Jp) / safe)
        return self.dinf * J + (self.d0 - self.dinf) * ratio

    def residual_density(self, y):
        return self.density(y) - self._g(self.contour.tau(y))

    def _subtracted(self, t, r_star, J_t, y_star):
        """Trapezoid sum with the pole at ``t`` removed by ``r_star*(t-a)/(tau-a)``."""
        a = _far_point(self.contour, self.tau, t)
        amp = r_star * (t - a)
        s = _accel.cauchy_sum(self.tau, self.wts, self.r, t, amp, None, a) / TWO_PI_I
        # a node sitting exactly on the target contributes its limit value
        if y_star is not None:
            j = np.rint((y_star.real + self.nodes.half_width) / self.nodes.h - 0.5).astype(int)
            j = np.clip(j, 0, self.nodes.n - 1)
            hit = (np.abs(self.nodes.y[j] - y_star) < 1e-12) & (np.abs(np.imag(y_star)) == 0)
            if hit.any():
                yy = y_star[hit].real
                hh = _FD_STEP
                f = lambda v: self.residual_density(v) - r_star[hit] * (t[hit] - a[hit]) / (self.contour.tau(v) - a[hit])
                deriv = (f(yy - 2 * hh) - 8 * f(yy - hh) + 8 * f(yy + hh) - f(yy + 2 * hh)) / (12 * hh)
                s[hit] += self.nodes.h * deriv / TWO_PI_I
        Ja = _J(self.contour.log_branch(a))
        return s + r_star * (J_t - Ja)

    def _param_of(self, t, j0):
        """Complex ``y`` with ``tau(y) = t`` by Newton from node ``j0``."""
        c = self.contour
        y = self.nodes.y[j0].astype(complex)
        for _ in range(40):
            step = (c.tau(y) - t) / c.dtau(y)
            # damped: the cut map is strongly nonlinear away from the nodes
            size = np.abs(step)
            step = np.where(size > 0.5, step * (0.5 / np.maximum(size, 1e-300)), step)
            y = y - step
            if np.all(np.abs(step) < 1e-14):
                break
        return y

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        shape = t.shape
        t = t.ravel()
        out = np.empty(t.shape, dtype=complex)
        jstar = np.empty(t.shape, dtype=int)
        for i0 in range(0, t.size, 512):
            sl = slice(i0, i0 + 512)
            jstar[sl] = np.argmin(np.abs(self.tau[None, :] - t[sl, None]), axis=1)
        near = np.abs(self.tau[jstar] - t) < _NEAR_FACTOR * np.abs(self.wts[jstar])
        far = ~near
        J_t = _J(self.contour.log_branch(t))
        if far.any():
            out[far] = _accel.cauchy_sum(self.tau, self.wts, self.r, t[far]) / TWO_PI_I
        if near.any():
            tn = t[near]
            with np.errstate(all="ignore"):
                yc = self._param_of(tn, jstar[near])
                ok = np.abs(self.contour.tau(yc) - tn) <= 1e-10 * np.abs(tn)
            ok &= np.isfinite(yc)
            if not ok.all():
                log.debug("Newton projection failed for %d targets", int((~ok).sum()))
            idx = np.flatnonzero(near)
            if ok.any():
                out[idx[ok]] = self._subtracted(tn[ok], self.residual_density(yc[ok]),
                                                J_t[idx[ok]], None)
            if (~ok).any():
                out[idx[~ok]] = _accel.cauchy_sum(self.tau, self.wts, self.r, tn[~ok]) / TWO_PI_I
        out += self._g_transform(t, J_t) + self.const
        return out.reshape(shape)

    def boundary(self, y):
        """Plemelj values ``(plus, minus)`` at ``tau(y)``, ``y`` real."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        c = self.contour
        tau_s = c.tau(y)
        r_s = self.residual_density(y)
        Jp = _J(c.log_plus(y))
        Jm = Jp - 1.0
        pv_plus = self._subtracted(tau_s, r_s, Jp, y.astype(complex))
        plus = pv_plus + self._g_transform(tau_s, Jp)
        minus = pv_plus - r_s + self._g_transform(tau_s, Jm)
        return plus + self.const, minus + self.const

    def continued_minus(self, y):
        """Analytic continuation of the ``-`` boundary value to complex ``y``."""
        y = np.asarray(y, dtype=complex)
        out = self(self.contour.tau(y))
        upper = y.imag > 0
        if upper.any():
            out = np.where(upper, out - self.density(y), out)
        exact = y.imag == 0
        if exact.any():
            out = np.where(exact, self.minus(y.real) if exact.all() else out, out)
        return out

    def plus(self, y):
        return self.boundary(y)[0]

    def minus(self, y):
        return self.boundary(y)[1]

    def at_origin(self):
        """Value at ``t = 0`` (requires a vanishing density limit there)."""
        if self.d0 != 0:
            raise SingularJumpData("transform is logarithmically singular at the origin")
        s = _accel.cauchy_sum(self.tau, self.wts, self.r, np.array([0j]))[0] / TWO_PI_I
        # with d0 = 0 the endpoint model tends to dinf * J(pivot) at t = 0
        return s + self.dinf * self._Jp + self.const


def endpoint_limits(nodes, density):
    """Limits of ``density(y)`` as ``y -> -inf`` and ``y -> +inf``."""
    out = []
    for sign in (-1.0, 1.0):
        ya, yb = (sign * (nodes.half_width + p) for p in _LIMIT_PAD)
        va, vb = density(np.array([ya, yb]))
        scale = max(abs(va), abs(vb), 1e-300)
        if abs(va - vb) > 1e-7 * scale and abs(va - vb) > 1e-14:
            raise SingularJumpData("density has no limit at an end of the cut")
        out.append(vb if abs(vb) > 1e-13 else 0.0)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# jump problems

@dataclass
class JumpProblem:
    """``R1 psi(t - i0) - R2 psi(t + i0) = H(t)`` on a cut.

    ``R1``, ``R2``, ``H`` are callables of the cut parameter ``y``.  An
    optional explicit factor ``T0`` (with ``plus``/``minus``/``__call__``)
    absorbs a rational part of ``q = R1/R2``; the remaining ``q_reg`` must
    have unit endpoint limits, no zeros and zero winding.  ``pins`` are cut
    parameters where the reduced unknown must vanish (poles of ``T0`` on the
    ``+`` side).
    """

    nodes: NodeSet
    R1: object
    R2: object
    H: object
    T0: object = None
    pins: tuple = ()
    endpoint_tol: float = 1e-8
    q0: complex = field(init=False, default=np.nan)
    qinf: complex = field(init=False, default=np.nan)
    winding: int = field(init=False, default=0)
    trivial_q: bool = field(init=False, default=False)

    @property
    def contour(self):
        return self.nodes.contour

    def q(self, y):
        return self.R1(y) / self.R2(y)

    def q_reg(self, y):
        q = self.q(y)
        if self.T0 is not None:
            q = q * self.T0.minus(y) / self.T0.plus(y)
        return q

    @property
    def y(self):
        return self.nodes.y

    def samples(self):
        y = self.y
        return y, self.q(y), self.H(y)

    def diagnose(self):
        """Check endpoint limits, zeros and winding of ``q_reg``; raise if singular."""
        y = self.y
        ext = np.array([-self.nodes.half_width - 20.0, self.nodes.half_width + 20.0])
        self.q0, self.qinf = (complex(v) for v in self.q_reg(ext))
        r1, r2 = np.abs(self.R1(y)), np.abs(self.R2(y))
        if self.T0 is not None:
            r1, r2 = r1 * np.abs(self.T0.minus(y)), r2 * np.abs(self.T0.plus(y))
        # coefficients grow along the cut, so compare with a local scale
        span = 2 * max(1, int(round(1.0 / self.nodes.h))) + 1
        for name, mag, fn in (("R1", r1, self.R1), ("R2", r2, self.R2)):
            local = maximum_filter1d(mag, span, mode="nearest")
            if not np.all(np.isfinite(mag)) or np.any(mag < 1e-8 * local):
                raise SingularJumpData(f"{name} vanishes on the cut")
            self._check_between_nodes(name, fn, mag, local, y)
        qr = self.q_reg(y)
        if np.max(np.abs(qr - 1.0)) < 1e-14:
            self.trivial_q = True
            self.winding = 0
            return self
        for name, v in (("q(0)", self.q0), ("q(inf)", self.qinf)):
            if abs(v - 1.0) > self.endpoint_tol:
                raise SingularJumpData(f"{name} = {v:.6g}, expected 1")
        self.winding = winding_number(self.q_reg, self.nodes)
        if self.winding != 0:
            raise SingularJumpData(f"q has winding number {self.winding}")
        return self

    def _check_between_nodes(self, name, fn, mag, local, y):
        """Bracket pronounced local minima of ``|R|`` and minimize in between nodes."""
        inner = np.arange(1, mag.size - 1)
        dips = inner[(mag[inner] <= mag[inner - 1]) & (mag[inner] <= mag[inner + 1])
                     & (mag[inner] < 1e-2 * local[inner])]
        f = _regularized(fn, self.T0, name)
        for j in dips:
            res = minimize_scalar(f, bounds=(y[j - 1], y[j + 1]), method="bounded",
                                  options={"xatol": 1e-12})
            if res.fun < 1e-8 * local[j]:
                raise SingularJumpData(f"{name} vanishes on the cut near y={res.x:.6g}")


def _regularized(fn, T0, which):
    if T0 is None:
        return lambda y: abs(complex(fn(np.array([y]))[0]))
    side = T0.minus if which == "R1" else T0.plus
    return lambda y: abs(complex(fn(np.array([y]))[0] * side(np.array([y]))[0]))


def half_line_problem(R1, R2, H, n_nodes=800, half_width=36.0, scale=1.0):
    """Jump problem on ``[0, inf)`` from coefficient callables of ``s > 0``."""
    contour = HalfLine(scale)

    def on_cut(fn):
        return lambda y: fn(contour.tau(y))

    jp = JumpProblem(NodeSet(contour, n_nodes, half_width), on_cut(R1), on_cut(R2), on_cut(H))
    return jp.diagnose()


def winding_number(fn, nodes, refine=4):
    """Index of ``fn`` along the cut by accumulating argument increments."""
    ends = np.array([-nodes.half_width - 20.0, nodes.half_width + 20.0])
    y = np.concatenate([[ends[0]], nodes.y, [ends[1]]])
    ph = np.angle(fn(y))
    steps = np.diff(ph)
    bad = np.abs(steps) > np.pi / 2
    if bad.any():
        fine = np.linspace(y[0], y[-1], refine * y.size * 4)
        ph = np.angle(fn(fine))
        steps = np.diff(ph)
    wrapped = (steps + np.pi) % (2 * np.pi) - np.pi
    if np.max(np.abs(wrapped)) > np.pi / 2:
        raise BranchDiscontinuity("argument increment exceeds pi/2 after refinement")
    return int(round(wrapped.sum() / (2 * np.pi)))


def continuous_log(fn, nodes):
    """Continuous branch of ``log fn(y)`` with ``log fn(-inf) = 0``."""
    start = -nodes.half_width - 20.0

    def logq(y):
        y = np.atleast_1d(np.asarray(y))
        if np.iscomplexobj(y) and np.any(y.imag != 0):
            base = logq(y.real)
            return base + np.log(fn(y) / fn(y.real + 0j))
        y = y.real.astype(float)
        grid = np.union1d(np.concatenate([[start], nodes.y]), np.maximum(y, start))
        vals = fn(grid)
        ph = np.unwrap(np.angle(vals))
        ph -= 2 * np.pi * np.round(ph[0] / (2 * np.pi))
        if grid.size > 1 and np.max(np.abs(np.diff(ph))) > np.pi:
            raise BranchDiscontinuity("argument jump exceeds pi between adjacent samples")
        lg = np.log(np.abs(vals)) + 1j * ph
        return lg[np.searchsorted(grid, np.maximum(y, start))]

    return logq


class HomogeneousFactor:
    """``T = T0 * exp(C[log q_reg])``: analytic and nonvanishing off the cut."""

    def __init__(self, jp):
        self.jp = jp
        self.T0 = jp.T0
        self.log_cauchy = None
        if not jp.trivial_q:
            logq = continuous_log(jp.q_reg, jp.nodes)
            self.log_cauchy = CauchyTransform(jp.nodes, logq, 0.0, 0.0)

    @property
    def nodes(self):
        return self.jp.nodes

    def _reg(self, t):
        if self.log_cauchy is None:
            return np.ones(np.shape(t), dtype=complex)
        return np.exp(self.log_cauchy(t))

    def __call__(self, t):
        out = self._reg(t)
        if self.T0 is not None:
            out = out * self.T0(t)
        return out

    def boundary(self, y):
        y = np.atleast_1d(np.asarray(y))
        if np.iscomplexobj(y) and np.any(y.imag != 0):
            # only the continued minus value is meaningful off the cut
            m = np.ones(y.shape, dtype=complex)
            if self.log_cauchy is not None:
                m = np.exp(self.log_cauchy.continued_minus(y))
            if self.T0 is not None:
                m = m * self.T0.minus(y)
            return np.full(y.shape, np.nan + 0j), m
        y = y.real.astype(float)
        if self.log_cauchy is None:
            p = np.ones(y.shape, dtype=complex)
            m = np.ones(y.shape, dtype=complex)
        else:
            p = np.empty(y.shape, dtype=complex)
            m = np.empty(y.shape, dtype=complex)
            lo = y < -self.jp.nodes.half_width + 1.0
            hi = y > self.jp.nodes.half_width - 1.0
            mid = ~(lo | hi)
            if mid.any():
                cp, cm = self.log_cauchy.boundary(y[mid])
                p[mid], m[mid] = np.exp(cp), np.exp(cm)
            if lo.any():
                p[lo] = m[lo] = np.exp(self.log_cauchy.at_origin())
            if hi.any():
                p[hi] = m[hi] = 1.0
        if self.T0 is not None:
            # T0 has isolated poles on the cut; callers treat those points
            with np.errstate(divide="ignore", invalid="ignore"):
                p = p * self.T0.plus(y)
                m = m * self.T0.minus(y)
        return p, m

    def plus(self, y):
        return self.boundary(y)[0]

    def minus(self, y):
        return self.boundary(y)[1]


def solve_homogeneous(jp):
    jp.diagnose()
    return HomogeneousFactor(jp)


def boundary_values(obj, y):
    """One-sided values ``(plus, minus)`` of a transform, factor or solution at ``tau(y)``.

    Raises ``NearEndpoint`` within a decade of either end of the sampled cut.
    """
    obj.nodes.check_interior(y)
    return obj.boundary(y)


_REMOVABLE_STEP = 1e-3


class SpectralFunction:
    """``psi(t) = T(t) * Phi(t)`` with ``Phi = const + C[-H / (R1 T-)]``."""

    def __init__(self, jp, T, phi):
        self.jp = jp
        self.T = T
        self.phi = phi

    @property
    def nodes(self):
        return self.jp.nodes

    def __call__(self, t):
        return self.T(t) * self.phi(t)

    def _raw_boundary(self, y):
        tp, tm = self.T.boundary(y)
        fp, fm = self.phi.boundary(y)
        return tp * fp, tm * fm

    def boundary(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            p, m = self._raw_boundary(y)
        special = np.asarray(getattr(self.jp.T0, "singular_parameters", lambda: ())(), float)
        if special.size:
            close = np.min(np.abs(y[:, None] - special[None, :]), axis=1) < _REMOVABLE_STEP
            if close.any():
                # removable 0*inf at poles of T0: symmetric Richardson average
                yc, d = y[close], _REMOVABLE_STEP
                avg = [np.add(*[np.stack(self._raw_boundary(yc + sg * k * d)) for sg in (-1, 1)]) / 2
                       for k in (1, 2)]
                est = (4 * avg[0] - avg[1]) / 3
                p, m = p.copy(), m.copy()
                p[close], m[close] = est[0], est[1]
        return p, m

    def plus(self, y):
        return self.boundary(y)[0]

    def minus(self, y):
        return self.boundary(y)[1]

    def shifted(self, c):
        """Add ``c`` to the reduced unknown ``Phi``."""
        return SpectralFunction(self.jp, self.T, self.phi.with_const(self.phi.const + c))

    def jump_residual(self, y):
        p, m = self.boundary(y)
        return self.jp.R1(y) * m - self.jp.R2(y) * p - self.jp.H(y)


def _solve_once(jp, T):
    def density(y):
        return -jp.H(y) / (jp.R1(y) * T.minus(y))

    phi = CauchyTransform(jp.nodes, density)
    sf = SpectralFunction(jp, T, phi)
    if jp.pins:
        y_pin = np.array(jp.pins, dtype=float)
        sf = sf.shifted(-complex(np.mean(phi.plus(y_pin))))
    return sf


def solve_jump(jp, tol=1e-8, max_nodes=25600, probes=None):
    """Solve the jump problem, doubling nodes until probe values settle."""
    jp.diagnose()
    if probes is None:
        probes = _default_probes(jp.contour)
    prev = None
    nodes = jp.nodes
    while True:
        cur_jp = jp if nodes is jp.nodes else _renode(jp, nodes)
        T = HomogeneousFactor(cur_jp)
        sf = _solve_once(cur_jp, T)
        vals = sf(probes)
        if prev is not None:
            change = np.max(np.abs(vals - prev)) / max(np.max(np.abs(vals)), 1e-300)
            sf.error_estimate = change
            if change < tol or nodes.n >= max_nodes:
                if change >= tol:
                    log.warning("node refinement capped at %d, change %.3g", nodes.n, change)
                return sf
        elif np.max(np.abs(vals)) == 0.0 and np.all(jp.H(jp.y) == 0):
            sf.error_estimate = 0.0
            return sf
        prev = vals
        nodes = nodes.refined()


def _renode(jp, nodes):
    out = JumpProblem(nodes, jp.R1, jp.R2, jp.H, jp.T0, jp.pins, jp.endpoint_tol)
    out.q0, out.qinf, out.winding, out.trivial_q = jp.q0, jp.qinf, jp.winding, jp.trivial_q
    return out


def _default_probes(contour):
    t0 = contour.tau(np.array([-2.0, 0.0, 2.0]))
    return np.concatenate([t0 * np.exp(0.5j), t0 * np.exp(-0.5j), -t0])
