"""Hot Monte Carlo kernels: a numba path and an index-identical numpy path.

Both paths draw the same uniforms: draw number (t*slots + slot) of batch b
comes from a splitmix64 finalizer keyed on (seed, b), so event counts are
reproducible for a fixed (seed, trials, batch_size) no matter how batches are
scheduled across workers.  The two backends consume identical bit streams and
agree up to libm-vs-SIMD rounding of log(), i.e. to within a handful of
boundary events per million trials.

The backend is chosen by the BACKSEC_BACKEND environment variable:
"numba" (require the JIT path), "numpy" (force the fallback), or unset/"auto"
(JIT when numba imports, fallback otherwise).
"""

from __future__ import annotations

import os
import warnings

import numpy as np

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_U53 = 2.0 ** -53
_MASK = (1 << 64) - 1

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    numba = None
    HAVE_NUMBA = False


def mix64(z: int) -> int:
    """splitmix64 finalizer on plain Python ints (host-side seed derivation)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def batch_seed(seed: int, batch_index: int) -> np.uint64:
    """Independent stream key for one batch, hashed from (seed, batch index)."""
    return np.uint64(mix64((seed + (batch_index + 1) * 0x9E3779B97F4A7C15) & _MASK))


def resolve_backend(env: str | None = None) -> str:
    """Map the BACKSEC_BACKEND setting to 'numba' or 'numpy'."""
    choice = (env if env is not None else os.environ.get("BACKSEC_BACKEND", "auto")).lower()
    if choice in ("", "auto"):
        if HAVE_NUMBA:
            return "numba"
        warnings.warn("numba is not available; falling back to the numpy kernel",
                      RuntimeWarning, stacklevel=2)
        return "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("BACKSEC_BACKEND=numba but numba cannot be imported")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"BACKSEC_BACKEND must be 'numba', 'numpy' or 'auto', got {choice!r}")


def _mc_batch_scalar(bseed, n_trials, n_tags, m_s, lam_s, m_d, lam_d, m_e, lam_e,
                     thr, e1g, e2g, tau, r_pos):
    """Scalar kernel body; compiled with numba for the hot path.

    Draw order per trial: source gains tag-major, then destination gains,
    then eavesdropper gains, then one uniform for the random-selection pick.
    Counts columns: (dead tag, secrecy outage while powered, intercept while
    powered); protocol rows: SOTS, METS, OTS, RTS.
    """
    counts = np.zeros((4, 3), dtype=np.int64)
    slots = 1
    for k in range(n_tags):
        slots += m_s[k] + m_d[k] + m_e[k]

    w1 = np.empty(n_tags, dtype=np.float64)
    ratio = np.empty(n_tags, dtype=np.float64)
    gd = np.empty(n_tags, dtype=np.float64)
    ge = np.empty(n_tags, dtype=np.float64)
    picks = np.empty(4, dtype=np.int64)

    for t in range(n_trials):
        c = np.uint64(t) * np.uint64(slots)
        for k in range(n_tags):
            acc = 0.0
            for _ in range(m_s[k]):
                z = bseed + (c + _ONE) * _GOLD
                z = (z ^ (z >> _S30)) * _M1
                z = (z ^ (z >> _S27)) * _M2
                z = z ^ (z >> _S31)
                acc += np.log((np.float64(z >> _S11) + 1.0) * _U53)
                c += _ONE
            g = acc / (-lam_s[k])
            v = g - thr[k]
            w1[k] = v if v > 0.0 else 0.0
        for k in range(n_tags):
            acc = 0.0
            for _ in range(m_d[k]):
                z = bseed + (c + _ONE) * _GOLD
                z = (z ^ (z >> _S30)) * _M1
                z = (z ^ (z >> _S27)) * _M2
                z = z ^ (z >> _S31)
                acc += np.log((np.float64(z >> _S11) + 1.0) * _U53)
                c += _ONE
            gd[k] = acc / (-lam_d[k])
        for k in range(n_tags):
            acc = 0.0
            for _ in range(m_e[k]):
                z = bseed + (c + _ONE) * _GOLD
                z = (z ^ (z >> _S30)) * _M1
                z = (z ^ (z >> _S27)) * _M2
                z = z ^ (z >> _S31)
                acc += np.log((np.float64(z >> _S11) + 1.0) * _U53)
                c += _ONE
            ge[k] = acc / (-lam_e[k])
        z = bseed + (c + _ONE) * _GOLD
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        z = z ^ (z >> _S31)
        u_rts = (np.float64(z >> _S11) + 1.0) * _U53

        best_d = -1.0
        best_e = np.inf
        best_r = -1.0
        for k in range(n_tags):
            gam_d = (w1[k] * gd[k]) * e1g[k]
            gam_e = (w1[k] * ge[k]) * e2g[k]
            r = (1.0 + gam_d) / (1.0 + gam_e)
            ratio[k] = r
            if gd[k] > best_d:
                best_d = gd[k]
                picks[0] = k
            if ge[k] < best_e:
                best_e = ge[k]
                picks[1] = k
            rk = r if r > 1.0 else 1.0
            if rk > best_r:
                best_r = rk
                picks[2] = k
        ridx = np.int64(u_rts * n_tags)
        if ridx >= n_tags:
            ridx = n_tags - 1
        picks[3] = ridx

        for p in range(4):
            idx = picks[p]
            if w1[idx] == 0.0:
                counts[p, 0] += 1
            else:
                r = ratio[idx]
                if r_pos and r < tau:
                    counts[p, 1] += 1
                if r < 1.0:
                    counts[p, 2] += 1
    return counts


_jit_kernel = None


def _numba_kernel():
    global _jit_kernel
    if _jit_kernel is None:
        _jit_kernel = numba.njit(cache=True, nogil=True)(_mc_batch_scalar)
    return _jit_kernel


def _mc_batch_numpy(bseed, n_trials, n_tags, m_s, lam_s, m_d, lam_d, m_e, lam_e,
                    thr, e1g, e2g, tau, r_pos):
    """Vectorized kernel consuming the same draw stream as the scalar body."""
    slots = int(m_s.sum() + m_d.sum() + m_e.sum()) + 1
    j = np.arange(n_trials * slots, dtype=np.uint64)
    z = bseed + (j + _ONE) * _GOLD
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z ^= z >> _S31
    u = ((z >> _S11).astype(np.float64) + 1.0) * _U53
    u = u.reshape(n_trials, slots)
    logs = np.log(u[:, : slots - 1])

    def family(ms, lams, col):
        g = np.empty((n_trials, n_tags))
        for k in range(n_tags):
            acc = logs[:, col].copy()
            col += 1
            for _ in range(1, ms[k]):
                acc += logs[:, col]
                col += 1
            g[:, k] = acc / (-lams[k])
        return g, col

    col = 0
    gs, col = family(m_s, lam_s, col)
    gd, col = family(m_d, lam_d, col)
    ge, col = family(m_e, lam_e, col)
    u_rts = u[:, slots - 1]

    w1 = np.maximum(gs - thr[None, :], 0.0)
    gam_d = (w1 * gd) * e1g[None, :]
    gam_e = (w1 * ge) * e2g[None, :]
    ratio = (1.0 + gam_d) / (1.0 + gam_e)

    rows = np.arange(n_trials)
    picks = (
        np.argmax(gd, axis=1),
        np.argmin(ge, axis=1),
        np.argmax(np.maximum(ratio, 1.0), axis=1),
        np.minimum((u_rts * n_tags).astype(np.int64), n_tags - 1),
    )

    counts = np.zeros((4, 3), dtype=np.int64)
    for p, idx in enumerate(picks):
        w1s = w1[rows, idx]
        rs = ratio[rows, idx]
        dead = w1s == 0.0
        counts[p, 0] = np.count_nonzero(dead)
        powered = ~dead
        if r_pos:
            counts[p, 1] = np.count_nonzero(powered & (rs < tau))
        counts[p, 2] = np.count_nonzero(powered & (rs < 1.0))
    return counts


def mc_batch(backend: str, bseed: np.uint64, n_trials: int, *args):
    if backend == "numba":
        return _numba_kernel()(bseed, n_trials, *args)
    return _mc_batch_numpy(bseed, n_trials, *args)
