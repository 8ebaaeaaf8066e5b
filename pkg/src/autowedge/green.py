"""Green identity in the Fourier-Laplace domain.

Integrating ``A u`` against ``exp(i z.x)`` over the quadrant leaves boundary
terms in the traces on both sides.  Writing them through the known data
``f_l = B_l u`` and the complementary unknown trace gives

    A(z) u^(z) + P1 f1^(z1) + P2 f2^(z2) + S1 phi1^(z1) + S2 phi2^(z2) = 0.
"""
from dataclasses import dataclass

import numpy as np

from .errors import OutOfAnalyticity, UnderdeterminedTraces


@dataclass(frozen=True)
class BoundaryOperatorSpec:
    """``B = b0 + bt d_tangential + bn d_outward_normal`` on side ``side``.

    Side 1 is ``{x2 = 0}`` (tangential d1, outward normal -d2); side 2 is
    ``{x1 = 0}`` (tangential d2, outward normal -d1).
    """

    side: int
    b0: complex = 1.0
    bt: complex = 0.0
    bn: complex = 0.0

    def __post_init__(self):
        if self.side not in (1, 2):
            raise ValueError("side must be 1 or 2")
        for name in ("b0", "bt", "bn"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.b0 == 0 and self.bt == 0 and self.bn == 0:
            raise ValueError("boundary operator is identically zero")

    @classmethod
    def dirichlet(cls, side):
        return cls(side, b0=1.0)

    @classmethod
    def impedance(cls, side, b):
        """``du/dn + i b u`` with the outward normal."""
        return cls(side, b0=1j * b, bn=1.0)

    @property
    def is_dirichlet(self):
        return self.bn == 0 and self.bt == 0

    @property
    def unknown(self):
        return "normal_derivative" if self.is_dirichlet else "trace"


@dataclass(frozen=True)
class BoundaryProfile:
    """Closed-form boundary data ``f(x) = amplitude * exp(-k x)`` on [0, inf)."""

    k: complex = 1.0
    amplitude: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "k", complex(self.k))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if self.amplitude != 0 and self.k.real <= 0:
            raise ValueError("exponential profile needs Re k > 0")

    @classmethod
    def exponential(cls, k, amplitude=1.0):
        return cls(k, amplitude)

    @classmethod
    def zero(cls):
        return cls(1.0, 0.0)

    @property
    def is_zero(self):
        return self.amplitude == 0

    def __call__(self, x):
        return self.amplitude * np.exp(-self.k * np.asarray(x))

    def scaled(self, c):
        return BoundaryProfile(self.k, self.amplitude * c)


def transform_profile(p, zeta):
    """One-sided transform ``int_0^inf exp(i zeta x) f(x) dx``."""
    zeta = np.asarray(zeta, dtype=complex)
    if p.is_zero:
        return np.zeros_like(zeta)
    if np.any(zeta.imag <= -p.k.real):
        raise OutOfAnalyticity(f"transform needs Im zeta > {-p.k.real:.6g}")
    return p.amplitude / (p.k - 1j * zeta)


@dataclass(frozen=True)
class Linear:
    """``c0 + c1 z1 + c2 z2``."""

    c0: complex = 0.0
    c1: complex = 0.0
    c2: complex = 0.0

    def __call__(self, z1, z2):
        return self.c0 + self.c1 * np.asarray(z1) + self.c2 * np.asarray(z2)

    def __add__(self, other):
        return Linear(self.c0 + other.c0, self.c1 + other.c1, self.c2 + other.c2)

    def scale(self, a):
        return Linear(a * self.c0, a * self.c1, a * self.c2)


def _side_terms(coef2, coef1, b, normal_var):
    """Polynomials (P, S) for one side.

    The boundary terms are ``C * trace - coef2 * normal_trace`` with
    ``C = i coef2 z_n - coef1`` (z_n the normal-direction variable).
    """
    if b.bt != 0:
        raise UnderdeterminedTraces(
            f"side {b.side}: tangential derivative terms bring in the corner value"
        )
    cz = Linear(-coef1, *((1j * coef2, 0.0) if normal_var == 1 else (0.0, 1j * coef2)))
    if b.is_dirichlet:
        return cz.scale(1.0 / b.b0), Linear(-coef2)
    # outward normal derivative is -d_n, so d_n u = (b0 u - f) / bn
    return Linear(coef2 / b.bn), cz + Linear(-coef2 * b.b0 / b.bn)


@dataclass(frozen=True)
class GreenSystem:
    op: object
    B1: BoundaryOperatorSpec
    B2: BoundaryOperatorSpec
    P1: Linear
    P2: Linear
    S1: Linear
    S2: Linear

    @property
    def unknowns(self):
        return self.B1.unknown, self.B2.unknown

    def F(self, z1, z2, f1hat, f2hat, phi1hat, phi2hat):
        return (self.P1(z1, z2) * f1hat + self.P2(z1, z2) * f2hat
                + self.S1(z1, z2) * phi1hat + self.S2(z1, z2) * phi2hat)


def assemble_green(op, B1, B2):
    """Boundary polynomials for ``op`` with boundary operators ``B1, B2``."""
    if B1.side != 1 or B2.side != 2:
        raise ValueError("B1 must act on side 1 and B2 on side 2")
    P1, S1 = _side_terms(op.a02, op.a01, B1, normal_var=2)
    P2, S2 = _side_terms(op.a20, op.a10, B2, normal_var=1)
    return GreenSystem(op, B1, B2, P1, P2, S1, S2)


@dataclass(frozen=True)
class AlgebraicEquation:
    """``S1 phi1^(z1) + S2 phi2^(z2) = G(z)`` on the positive part of the conic."""

    gs: GreenSystem
    f1: BoundaryProfile
    f2: BoundaryProfile

    def f1hat(self, z1):
        return transform_profile(self.f1, z1)

    def f2hat(self, z2):
        return transform_profile(self.f2, z2)

    def G(self, z1, z2):
        out = 0.0
        if not self.f1.is_zero:
            out = out - self.gs.P1(z1, z2) * self.f1hat(z1)
        if not self.f2.is_zero:
            out = out - self.gs.P2(z1, z2) * self.f2hat(z2)
        return np.zeros(np.broadcast(np.asarray(z1), np.asarray(z2)).shape, complex) + out

    def G_at(self, chart, w):
        return self.G(chart.z1(w), chart.z2(w))

    def residual(self, z1, z2, phi1hat, phi2hat):
        return self.gs.S1(z1, z2) * phi1hat + self.gs.S2(z1, z2) * phi2hat - self.G(z1, z2)


def make_equation(gs, f1, f2):
    return AlgebraicEquation(gs, f1, f2)
