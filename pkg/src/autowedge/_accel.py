"""Hot summation kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import from ``AUTOWEDGE_BACKEND``
(``numba`` or ``numpy``); ``numba`` is the default when importable.
Both paths accumulate every output in the same fixed order, so results do
not depend on the thread count.
"""
import os

import numpy as np

_requested = os.environ.get("AUTOWEDGE_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"AUTOWEDGE_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
else:
    # the default layer probes for TBB first and warns when it is too old;
    # the portable layers are enough for these embarrassingly parallel loops
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "workqueue"

BACKEND = "numba" if (_requested == "numba" and numba is not None) else "numpy"


def set_threads(n):
    """Set the worker count for parallel kernels (no-op on the numpy path)."""
    if n is None:
        n = os.environ.get("AUTOWEDGE_THREADS")
    if n is None:
        return
    n = int(n)
    if n < 1:
        raise ValueError("thread count must be positive")
    if BACKEND == "numba":
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------------------
# numpy reference implementations

def _cauchy_np(tau, wts, dens, t, amp1, amp2, pole):
    out = np.empty(t.shape[0], dtype=np.complex128)
    for chunk in range(0, t.shape[0], 256):
        sl = slice(chunk, chunk + 256)
        tt = t[sl, None]
        aa = pole[sl, None]
        diff = tau[None, :] - tt
        sub = amp1[sl, None] / (tau[None, :] - aa) + amp2[sl, None] / (tau[None, :] - aa) ** 2
        num = wts[None, :] * (dens[None, :] - sub)
        hit = np.abs(diff) <= 1e-14 * (np.abs(tau[None, :]) + 1e-300)
        diff = np.where(hit, 1.0, diff)
        out[sl] = np.where(hit, 0.0, num / diff).sum(axis=1)
    return out


def _plane_wave_np(amp, k1, k2, x1, x2):
    out = np.empty((x1.shape[0], x2.shape[0]), dtype=np.complex128)
    e2 = np.exp(-1j * np.outer(k2, x2))  # (N, Q)
    for i in range(x1.shape[0]):
        row = amp * np.exp(-1j * k1 * x1[i])
        out[i] = row @ e2
    return out


# ---------------------------------------------------------------------------
# numba kernels

if numba is not None:

    @numba.njit(parallel=True, cache=True)
    def _cauchy_nb(tau, wts, dens, t, amp1, amp2, pole):
        m = t.shape[0]
        n = tau.shape[0]
        out = np.empty(m, dtype=np.complex128)
        for i in numba.prange(m):
            ti = t[i]
            a = pole[i]
            c1 = amp1[i]
            c2 = amp2[i]
            acc = 0.0 + 0.0j
            for j in range(n):
                d = tau[j] - ti
                if abs(d) <= 1e-14 * (abs(tau[j]) + 1e-300):
                    continue
                g = tau[j] - a
                acc += wts[j] * (dens[j] - c1 / g - c2 / (g * g)) / d
            out[i] = acc
        return out

    @numba.njit(parallel=True, cache=True)
    def _plane_wave_nb(amp, k1, k2, x1, x2):
        # separable: exp(-i(k1 x1 + k2 x2)) = e1 * e2, so only n (p + q) exponentials
        p = x1.shape[0]
        q = x2.shape[0]
        n = amp.shape[0]
        e2 = np.empty((q, n), dtype=np.complex128)
        for l in numba.prange(q):
            for j in range(n):
                e2[l, j] = np.exp(-1j * k2[j] * x2[l])
        out = np.empty((p, q), dtype=np.complex128)
        for i in numba.prange(p):
            row = np.empty(n, dtype=np.complex128)
            for j in range(n):
                row[j] = amp[j] * np.exp(-1j * k1[j] * x1[i])
            for l in range(q):
                acc = 0.0 + 0.0j
                for j in range(n):
                    acc += row[j] * e2[l, j]
                out[i, l] = acc
        return out


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def cauchy_sum(tau, wts, dens, t, amp1=None, amp2=None, pole=None):
    """Sum ``sum_j wts_j (dens_j - mu_i(tau_j)) / (tau_j - t_i)`` for every target.

    ``mu_i(tau) = amp1_i/(tau - pole_i) + amp2_i/(tau - pole_i)**2`` is the
    per-target subtraction; pass ``None`` for a plain sum.  Terms whose node
    coincides with the target are dropped (their limit is zero once the
    subtraction matches value and slope there).
    """
    t = _c(np.atleast_1d(t))
    zeros = np.zeros_like(t)
    amp1 = zeros if amp1 is None else _c(amp1)
    amp2 = zeros if amp2 is None else _c(amp2)
    pole = zeros + 1.0 if pole is None else _c(pole)
    args = (_c(tau), _c(wts), _c(dens), t, amp1, amp2, pole)
    if BACKEND == "numba":
        return _cauchy_nb(*args)
    return _cauchy_np(*args)


def plane_wave_sum(amp, k1, k2, x1, x2):
    """Grid sum ``u[i, l] = sum_j amp_j exp(-i (k1_j x1_i + k2_j x2_l))``."""
    args = (_c(amp), _c(k1), _c(k2), np.ascontiguousarray(x1, float), np.ascontiguousarray(x2, float))
    if not args[0].shape == args[1].shape == args[2].shape:
        raise ValueError("amp, k1 and k2 must have one entry per plane wave")
    if BACKEND == "numba":
        return _plane_wave_nb(*args)
    return _plane_wave_np(*args)
