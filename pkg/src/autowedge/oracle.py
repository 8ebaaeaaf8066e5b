"""Independent references: closed-form kernel solutions and a finite-difference solver.

Nothing here imports the automorphic pipeline; the references must stay
independent of the code paths they check.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import IllConditioned, NoDecayingDirection, SolverDiverged
from .green import BoundaryProfile

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManufacturedSolution:
    """``u(x) = amplitude * exp(-k1 x1 - k2 x2)`` in the kernel of ``op``."""

    op: object
    k1: complex
    k2: complex
    amplitude: complex = 1.0

    def __post_init__(self):
        for name in ("k1", "k2", "amplitude"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.k1.real <= 0 or self.k2.real <= 0:
            raise NoDecayingDirection(f"need Re k > 0, got k=({self.k1}, {self.k2})")

    def __call__(self, x1, x2):
        return self.amplitude * np.exp(-self.k1 * np.asarray(x1) - self.k2 * np.asarray(x2))

    def kernel_residual(self):
        op = self.op
        k1, k2 = self.k1, self.k2
        val = op.a20 * k1**2 + op.a02 * k2**2 - op.a10 * k1 - op.a01 * k2 + op.a00
        return abs(val) / max(op.scale, 1.0)

    def apply_operator(self, x1, x2):
        """``A u`` evaluated pointwise from the closed form."""
        op = self.op
        k1, k2 = self.k1, self.k2
        fac = op.a20 * k1**2 + op.a02 * k2**2 - op.a10 * k1 - op.a01 * k2 + op.a00
        return fac * self(x1, x2)

    def _side(self, side):
        # (decay along the side, decay across it)
        return (self.k1, self.k2) if side == 1 else (self.k2, self.k1)

    def boundary_data(self, B):
        along, across = self._side(B.side)
        coef = B.b0 + B.bn * across - B.bt * along
        return BoundaryProfile(along, self.amplitude * coef)

    def unknown_trace(self, B):
        along, across = self._side(B.side)
        if B.is_dirichlet:
            return BoundaryProfile(along, -across * self.amplitude)
        return BoundaryProfile(along, self.amplitude)

    def uhat(self, z1, z2):
        return self.amplitude / ((self.k1 - 1j * np.asarray(z1)) * (self.k2 - 1j * np.asarray(z2)))


def make_manufactured(op, direction, amplitude=1.0):
    """Kernel solution decaying along the ray at angle ``direction``."""
    c, s = np.cos(direction), np.sin(direction)
    qa = op.a20 * c * c + op.a02 * s * s
    qb = -(op.a10 * c + op.a01 * s)
    roots = np.roots([qa, qb, op.a00]) if qa != 0 else np.array([-op.a00 / qb])
    for lam in sorted(roots, key=lambda r: -min((r * c).real, (r * s).real)):
        k1, k2 = lam * c, lam * s
        # roundoff can leave a purely oscillatory root with a tiny real part
        floor = 1e-10 * abs(lam)
        if k1.real > floor and k2.real > floor:
            return ManufacturedSolution(op, k1, k2, amplitude)
    raise NoDecayingDirection(f"no decaying kernel exponential at direction {direction:.6g}")


# ---------------------------------------------------------------------------
# finite-difference reference

COND_LIMIT = 1e12


@dataclass
class FdSolution:
    """Grid solution on ``[0, L]^2``; ``u[i, l]`` is the value at ``(x[i], x[l])``."""

    length: float
    h: float
    x: np.ndarray
    u: np.ndarray
    residual_norm: float
    far_closure: str
    condition_estimate: float

    def sample(self, x1, x2):
        """Values at grid-aligned points ``(x1, x2)`` (1-D arrays)."""
        i = np.rint(np.asarray(x1) / self.h).astype(int)
        l = np.rint(np.asarray(x2) / self.h).astype(int)
        if (np.any(np.abs(i * self.h - x1) > 1e-9) or np.any(np.abs(l * self.h - x2) > 1e-9)
                or i.max() >= self.x.size or l.max() >= self.x.size):
            raise ValueError("sample points must lie on the finite-difference grid")
        return self.u[np.ix_(i, l)]


def fd_solve(op, B1, B2, f1, f2, length, h, far=None):
    """Second-order finite differences on the truncated quadrant ``[0, L]^2``.

    Interior rows use the 5-point Laplacian-type stencil with central first
    derivatives.  Boundary rows impose ``b0 u + bn du/dn + bt du/dtau``
    (outward normal) with second-order one-sided normal differences; the
    corner row averages both side conditions.  The far edges ``x = L`` are
    closed with ``far(x1, x2)`` when given (e.g. the manufactured values),
    otherwise with zero.
    """
    n = int(round(length / h))
    if abs(n * h - length) > 1e-9 * length:
        raise ValueError("length must be a multiple of h")
    x = np.linspace(0.0, length, n + 1)
    N = n + 1
    idx = np.arange(N * N).reshape(N, N)
    rows, cols, vals = [], [], []
    rhs = np.zeros(N * N, dtype=complex)

    def put(r, c, v):
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(np.broadcast_to(np.asarray(v, dtype=complex), r.shape).ravel())

    # interior
    I, L = np.meshgrid(np.arange(1, n), np.arange(1, n), indexing="ij")
    r = idx[I, L]
    put(r, r, -2 * op.a20 / h**2 - 2 * op.a02 / h**2 + op.a00)
    put(r, idx[I + 1, L], op.a20 / h**2 + op.a10 / (2 * h))
    put(r, idx[I - 1, L], op.a20 / h**2 - op.a10 / (2 * h))
    put(r, idx[I, L + 1], op.a02 / h**2 + op.a01 / (2 * h))
    put(r, idx[I, L - 1], op.a02 / h**2 - op.a01 / (2 * h))

    def side_row(B, along, weight):
        """Add ``weight * B u`` at nodes ``along`` of the side of ``B``."""
        def node(a, d):
            return idx[a, d] if B.side == 1 else idx[d, a]
        r = node(along, 0)
        put(r, r, weight * B.b0)
        # outward normal derivative = -(d/dacross) at the side
        for off, c in ((0, -3.0), (1, 4.0), (2, -1.0)):
            put(r, node(along, off), -weight * B.bn * c / (2 * h))
        if B.bt != 0:
            inner = (along > 0) & (along < n)
            a = along[inner]
            put(node(a, 0), node(a + 1, 0), weight * B.bt / (2 * h))
            put(node(a, 0), node(a - 1, 0), -weight * B.bt / (2 * h))
            a = along[along == 0]
            for off, c in ((0, -3.0), (1, 4.0), (2, -1.0)):
                put(node(a, 0), node(a + off, 0), weight * B.bt * c / (2 * h))
        return r

    edge = np.arange(1, n)
    r1 = side_row(B1, edge, 1.0)
    rhs[r1] = f1(x[edge])
    r2 = side_row(B2, edge, 1.0)
    rhs[r2] = f2(x[edge])
    corner = np.array([0])
    side_row(B1, corner, 0.5)
    side_row(B2, corner, 0.5)
    rhs[idx[0, 0]] = 0.5 * (f1(0.0) + f2(0.0))

    # far edges
    far_nodes = np.unique(np.concatenate([idx[n, :], idx[:n, n]]))
    put(far_nodes, far_nodes, 1.0)
    if far is not None:
        fi, fl = np.divmod(far_nodes, N)
        rhs[far_nodes] = far(x[fi], x[fl])
        closure = "manufactured values on x = L"
    else:
        closure = "zero on x = L (data decay)"

    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N * N, N * N))
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise IllConditioned(f"finite-difference matrix is singular: {exc}") from exc
    u = lu.solve(rhs)
    inv = spla.LinearOperator(A.shape, matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="H"),
                              dtype=complex)
    cond = float(spla.onenormest(A) * spla.onenormest(inv))
    if cond > COND_LIMIT:
        raise IllConditioned(f"condition estimate {cond:.3g} exceeds {COND_LIMIT:g}")
    res = float(np.linalg.norm(A @ u - rhs) / max(np.linalg.norm(rhs), 1e-300))
    if not np.isfinite(res) or res > 1e-10:
        raise SolverDiverged(f"linear residual {res:.3g} above 1e-10")
    return FdSolution(length, h, x, u.reshape(N, N), res, closure, cond)
