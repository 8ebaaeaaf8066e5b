"""Operator symbols, the characteristic conic and its uniformization.

For a diagonal second-order operator the zero set of the symbol is a conic
in C^2.  Completing squares gives the global trigonometric chart

    z1 = c1 + r1 cos w,    z2 = c2 + r2 sin w,

on which the two coordinate-fixing involutions lift to ``w -> -w`` (fixes
z1) and ``w -> pi - w`` (fixes z2); their composition is ``w -> w + pi``.
"""
from dataclasses import InitVar, dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateCharacteristics, NotStronglyElliptic

PI = np.pi
_GRID_HALF_WIDTH = 50.0
_GRID_NODES = 201
_DIRECTIONS = 360
_KAPPA_FLOOR = 1e-9


@dataclass(frozen=True)
class OperatorSpec:
    """Coefficients of ``A = a20 d1^2 + a02 d2^2 + a10 d1 + a01 d2 + a00``.

    The mixed term is not supported; passing a nonzero ``a11`` raises.
    """

    a20: complex
    a02: complex
    a00: complex
    a10: complex = 0.0
    a01: complex = 0.0
    a11: InitVar[complex] = 0.0

    def __post_init__(self, a11):
        if a11 != 0:
            raise ValueError("cross-derivative coefficient a11 is not supported")
        for name in ("a20", "a02", "a00", "a10", "a01"):
            v = complex(getattr(self, name))
            if not np.isfinite(v.real) or not np.isfinite(v.imag):
                raise ValueError(f"coefficient {name} is not finite")
            object.__setattr__(self, name, v)

    @classmethod
    def helmholtz(cls, omega):
        """``Delta + omega^2``."""
        return cls(a20=1.0, a02=1.0, a00=complex(omega) ** 2)

    @classmethod
    def screened(cls, mass2=1.0):
        """``-Delta + mass2``."""
        return cls(a20=-1.0, a02=-1.0, a00=mass2)

    def symbol(self, z1, z2):
        z1 = np.asarray(z1)
        z2 = np.asarray(z2)
        return (-self.a20 * z1**2 - self.a02 * z2**2
                - 1j * self.a10 * z1 - 1j * self.a01 * z2 + self.a00)

    def principal_symbol(self, xi1, xi2):
        return -self.a20 * np.asarray(xi1) ** 2 - self.a02 * np.asarray(xi2) ** 2

    @cached_property
    def kappa(self):
        return validate_ellipticity(self)

    @property
    def scale(self):
        return max(abs(self.a20), abs(self.a02), abs(self.a00), abs(self.a10), abs(self.a01))


def validate_ellipticity(op):
    """Return the strong-ellipticity constant of ``op``.

    The constant is the minimum of ``|A(z)| / (|z|^2 + 1)`` over a uniform
    grid on [-50, 50]^2, refined by local minimization around the smallest
    grid values so zeros between nodes are not missed.
    """
    theta = np.linspace(0.0, 2 * PI, _DIRECTIONS, endpoint=False)
    ps = np.abs(op.principal_symbol(np.cos(theta), np.sin(theta)))
    if ps.min() < _KAPPA_FLOOR * max(op.scale, 1.0):
        k = int(ps.argmin())
        raise NotStronglyElliptic(
            f"principal symbol vanishes in direction theta={theta[k]:.6g}",
            z=(np.cos(theta[k]), np.sin(theta[k])),
        )

    g = np.linspace(-_GRID_HALF_WIDTH, _GRID_HALF_WIDTH, _GRID_NODES)
    x1, x2 = np.meshgrid(g, g, indexing="ij")
    ratio = np.abs(op.symbol(x1, x2)) / (x1**2 + x2**2 + 1.0)
    flat = np.argsort(ratio, axis=None)[:5]

    def objective(p):
        return float(np.abs(op.symbol(p[0], p[1])) / (p[0] ** 2 + p[1] ** 2 + 1.0))

    best_val = float(ratio.flat[flat[0]])
    best_z = (float(x1.flat[flat[0]]), float(x2.flat[flat[0]]))
    for idx in flat:
        start = np.array([x1.flat[idx], x2.flat[idx]])
        res = minimize(objective, start, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 400})
        if res.fun < best_val and np.all(np.abs(res.x) <= _GRID_HALF_WIDTH):
            best_val, best_z = float(res.fun), (float(res.x[0]), float(res.x[1]))
    if best_val < _KAPPA_FLOOR:
        raise NotStronglyElliptic(
            f"symbol has a real zero near z=({best_z[0]:.6g}, {best_z[1]:.6g})", z=best_z
        )
    return best_val


@dataclass(frozen=True)
class SurfacePoint:
    w: complex
    z1: complex
    z2: complex

    @property
    def in_v_plus(self):
        return self.z1.imag > 0 and self.z2.imag > 0


@dataclass(frozen=True)
class SurfaceChart:
    c1: complex
    c2: complex
    r1: complex
    r2: complex
    op: OperatorSpec = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.r1 == 0 or self.r2 == 0:
            raise DegenerateCharacteristics("chart radius vanishes")

    def z1(self, w):
        return self.c1 + self.r1 * np.cos(w)

    def z2(self, w):
        return self.c2 + self.r2 * np.sin(w)

    def embed(self, w):
        w = complex(w)
        return SurfacePoint(w, complex(self.z1(w)), complex(self.z2(w)))

    def residual(self, w):
        """Relative symbol residual at ``w``."""
        z1, z2 = self.z1(w), self.z2(w)
        s = self.op.scale * (1.0 + np.abs(z1) ** 2 + np.abs(z2) ** 2)
        return np.abs(self.op.symbol(z1, z2)) / s

    # -- preimages inside the fundamental region ------------------------------
    # The region D = {Im z2(w) > 0, -pi/2 < Re w <= 3pi/2} is mapped by
    # t = exp(2iw) onto the t-plane cut along the image of the real z2 axis.

    def in_region(self, w):
        w = np.asarray(w, dtype=complex)
        return (np.imag(self.z2(w)) > 0) & (w.real > -PI / 2) & (w.real <= 1.5 * PI)

    def _to_window(self, w):
        w = np.asarray(w, dtype=complex)
        k = np.floor((w.real + PI / 2) / (2 * PI))
        return w - 2 * PI * k

    def w_from_z2(self, z2):
        """Region preimage of ``z2`` on the principal arcsin side."""
        w0 = np.arcsin((np.asarray(z2, dtype=complex) - self.c2) / self.r2)
        a = self._to_window(w0)
        b = self._to_window(PI - w0)
        pick = np.imag(self.z2(a)) >= np.imag(self.z2(b))
        pick &= np.isfinite(a)
        return np.where(pick, a, b)

    def w_pair_from_z2(self, z2):
        """Both region preimages ``(w, pi - w)`` of ``z2``."""
        w = self.w_from_z2(z2)
        return w, self._to_window(PI - w)

    def w_from_z1(self, z1):
        """Preimage of ``z1`` whose companion ``z2`` has the larger imaginary part."""
        w0 = np.arccos((np.asarray(z1, dtype=complex) - self.c1) / self.r1)
        a = self._to_window(w0)
        b = self._to_window(-w0)
        return np.where(np.imag(self.z2(a)) >= np.imag(self.z2(b)), a, b)

    def w_from_t(self, t):
        """Region preimage of ``t = exp(2iw)``."""
        t = np.asarray(t, dtype=complex)
        w0 = np.log(t) / 2j
        best = np.full(t.shape, np.nan + 0j)
        score = np.full(t.shape, -np.inf)
        for k in range(-3, 4):
            cand = self._to_window(w0 + k * PI)
            im = np.imag(self.z2(cand))
            better = im > score
            best = np.where(better, cand, best)
            score = np.where(better, im, score)
        return best


def sample_v_plus(chart, n, rng, radius=3.0):
    """``n`` chart points with ``Im z1 > 0`` and ``Im z2 > 0``."""
    out = []
    while len(out) < n:
        z1 = rng.uniform(-radius, radius, 4 * n) + 1j * rng.uniform(0.05, radius, 4 * n)
        w = chart.w_from_z1(z1)
        keep = (np.imag(chart.z2(w)) > 0.05) & np.isfinite(w)
        out.extend(w[keep][: n - len(out)])
    return np.array(out)


def build_chart(op):
    """Complete squares in the symbol and return the trigonometric chart."""
    alpha = -op.a20
    beta = -op.a02
    if alpha == 0 or beta == 0:
        raise DegenerateCharacteristics("operator lacks a second derivative in one variable")
    c1 = 1j * op.a10 / (2 * alpha)
    c2 = 1j * op.a01 / (2 * beta)
    d = alpha * c1**2 + beta * c2**2 - op.a00
    if abs(d) <= 1e-14 * max(op.scale, 1.0):
        raise DegenerateCharacteristics("characteristic conic degenerates to a pair of lines")
    r1 = complex(np.sqrt(d / alpha))
    r2 = complex(np.sqrt(d / beta))
    return SurfaceChart(complex(c1), complex(c2), r1, r2, op=op)


def embed(chart, w):
    return chart.embed(w)


def lift_covering(which, w):
    """Lift of a covering involution (or their composition) to the w-plane."""
    if which == "h1":
        return -w
    if which == "h2":
        return PI - w
    if which == "h":
        return w + PI
    raise ValueError(f"unknown covering map {which!r}")
