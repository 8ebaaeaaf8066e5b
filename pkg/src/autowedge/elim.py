"""Elimination of the side-1 unknown and reduction to a jump problem.

With ``f2 = 0`` the equation ``S1 psi1 + S2 psi2 = G`` and its image under
the z1-fixing involution share ``psi1``.  Eliminating it and using the
z2-fixing involution gives, on the w-plane,

    R1(w) psi2(w + pi) - R2(w) psi2(w) = H(w),
    R1(w) = S1(w) S2(-w),  R2(w) = S1(-w) S2(w),
    H(w)  = S1(w) G(-w) - S1(-w) G(w).

On the preimage of the real z2 axis, ``t = exp(2iw)`` turns this into a jump
problem across the image cut, ``psi2(w)`` being the ``+`` boundary value and
``psi2(w + pi)`` the ``-`` one.
"""
from dataclasses import dataclass

import numpy as np

from .errors import RequiresZeroSideData, SingularJumpData
from .green import BoundaryOperatorSpec, assemble_green, make_equation
from .rh import JumpProblem, NodeSet, SurfaceCut
from .surface import OperatorSpec, build_chart


def transpose_equation(eq):
    """Same problem with the roles of x1 and x2 exchanged."""
    op = eq.gs.op
    op_t = OperatorSpec(a20=op.a02, a02=op.a20, a00=op.a00, a10=op.a01, a01=op.a10)
    B1, B2 = eq.gs.B1, eq.gs.B2
    B1_t = BoundaryOperatorSpec(1, B2.b0, B2.bt, B2.bn)
    B2_t = BoundaryOperatorSpec(2, B1.b0, B1.bt, B1.bn)
    return make_equation(assemble_green(op_t, B1_t, B2_t), eq.f2, eq.f1)


@dataclass(frozen=True)
class ShiftEquation:
    """``R1(w) psi2(w + pi) - R2(w) psi2(w) = H(w)`` on the universal covering."""

    eq: object
    chart: object
    swapped: bool = False

    def S1(self, w):
        return self.eq.gs.S1(self.chart.z1(w), self.chart.z2(w))

    def S2(self, w):
        return self.eq.gs.S2(self.chart.z1(w), self.chart.z2(w))

    def G(self, w):
        return self.eq.G_at(self.chart, w)

    def R1(self, w):
        return self.S1(w) * self.S2(-w)

    def R2(self, w):
        return self.S1(-w) * self.S2(w)

    def H(self, w):
        return self.S1(w) * self.G(-w) - self.S1(-w) * self.G(w)

    def residual(self, w, psi2):
        """Contract residual for a candidate ``psi2(w)`` callable."""
        return self.R1(w) * psi2(w + np.pi) - self.R2(w) * psi2(w) - self.H(w)


def eliminate(eq, chart=None):
    """Shift equation for ``eq``; exchanges sides when only ``f2`` is nonzero."""
    swapped = False
    if not eq.f2.is_zero:
        if not eq.f1.is_zero:
            raise RequiresZeroSideData(
                "both sides carry data; split the problem by superposition first"
            )
        eq = transpose_equation(eq)
        swapped = True
        chart = None
    if chart is None:
        chart = build_chart(eq.gs.op)
    return ShiftEquation(eq, chart, swapped)


class RationalFactor:
    """``T0(t) = 1 / S1(z2(w + pi))``: explicit solution of ``T0+ = q T0-``.

    Here ``S1`` is a polynomial in z2 only, and ``q = S1(w) / S1(-w)``.
    """

    def __init__(self, se, contour):
        self.se = se
        self.contour = contour
        self.sigma = se.eq.gs.S1
        self.c2 = se.chart.c2

    def _inv(self, z2):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / self.sigma(0.0, z2)

    def __call__(self, t):
        w = self.se.chart.w_from_t(t)
        return self._inv(2 * self.c2 - self.se.chart.z2(w))

    def plus(self, y):
        s = self.se.chart.z2(self.contour.w_plus(y))
        return self._inv(2 * self.c2 - s)

    def minus(self, y):
        s = self.se.chart.z2(self.contour.w_plus(y))
        return self._inv(s)

    def singular_parameters(self):
        """Cut parameters where ``T0+`` or ``T0-`` has a pole."""
        S1 = self.sigma
        if S1.c2 == 0:
            return ()
        root = -S1.c0 / S1.c2
        out = list(self.pole_parameters())
        if abs(root.imag) <= 1e-12 * (1 + abs(root)):
            out.append(float(self.contour.y_of(root.real)))
        return tuple(out)

    def pole_parameters(self):
        """Cut parameters of poles of ``T0`` on the ``+`` side."""
        S1 = self.sigma
        if abs(S1.c1) > 0:
            raise SingularJumpData("S1 depends on z1; elimination needs S1 = S1(z2)")
        if S1.c2 == 0:
            return ()
        root = -S1.c0 / S1.c2
        star = 2 * self.c2 - root
        if abs(star.imag) <= 1e-12 * (1 + abs(star)):
            return (float(self.contour.y_of(star.real)),)
        raise SingularJumpData(
            "S1 has a zero off the real z2 axis; only real impedance roots are supported"
        )


def to_jump_problem(se, n_nodes=800, half_width=36.0, endpoint_tol=1e-8):
    """Sample the shift equation on the cut and return a validated jump problem."""
    contour = SurfaceCut(se.chart)
    nodes = NodeSet(contour, n_nodes, half_width)
    T0 = RationalFactor(se, contour)

    def on_cut(fn):
        return lambda y: fn(contour.w_plus(y))

    jp = JumpProblem(nodes, on_cut(se.R1), on_cut(se.R2), on_cut(se.H), T0,
                     T0.pole_parameters(), endpoint_tol)
    jp.shift = se
    return jp.diagnose()
