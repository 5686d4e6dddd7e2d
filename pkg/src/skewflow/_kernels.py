"""Hot loops over transition tables.

Every kernel exists twice: a loop version compiled with ``numba.njit`` and a
vectorised numpy version.  The numba path is used unless numba is missing or
the environment variable ``SKEWFLOW_DISABLE_NUMBA`` is set to a truthy value.

Conventions
-----------
``phi[n, k]`` is the transition matrix from time ``n`` to time ``k`` (zero
below the diagonal).  ``Y[n, k]`` is the norm of ``phi[n, k] @ v`` for one
fixed vector ``v``.  Ratio and sum kernels return arrays indexed by
``(anchor, lag)``; entries outside the horizon are NaN.  A zero denominator
with a nonzero numerator yields ``inf``; 0/0 yields 0.
"""

import math
import os

import numpy as np

NORM_CODES = {"l1": 0, "l2": 1, "linf": 2}


def _env_disabled():
    return os.environ.get("SKEWFLOW_DISABLE_NUMBA", "").strip().lower() in (
        "1", "true", "yes", "on")


try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and not _env_disabled()


# ---------------------------------------------------------------------------
# loop versions (compiled by numba)
# ---------------------------------------------------------------------------

def _transition_products_loop(steps):
    N = steps.shape[0]
    d = steps.shape[1]
    phi = np.zeros((N + 1, N + 1, d, d))
    for n in range(N + 1):
        for i in range(d):
            phi[n, n, i, i] = 1.0
        for k in range(n + 1, N + 1):
            A = steps[k - 1]
            prev = phi[n, k - 1]
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for l in range(d):
                        acc += A[i, l] * prev[l, j]
                    phi[n, k, i, j] = acc
    return phi


def _trajectory_norms_loop(phi, vectors, code):
    N = phi.shape[0]
    d = phi.shape[2]
    nv = vectors.shape[0]
    out = np.zeros((nv, N, N))
    for j in range(nv):
        for n in range(N):
            for k in range(n, N):
                acc = 0.0
                for a in range(d):
                    w = 0.0
                    for b in range(d):
                        w += phi[n, k, a, b] * vectors[j, b]
                    if code == 0:
                        acc += abs(w)
                    elif code == 1:
                        acc += w * w
                    elif abs(w) > acc:
                        acc = abs(w)
                out[j, n, k] = math.sqrt(acc) if code == 1 else acc
    return out


def _safe_ratio(num, den):
    if den > 0.0:
        return num / den
    if num > 0.0:
        return math.inf
    return 0.0


def _forward_ratios_loop(Y, c, three):
    N = Y.shape[0]
    out = np.full((N, N), np.nan)
    arg = np.full((N, N), -1, dtype=np.int64)
    for p in range(N):
        lo = 0 if three else p
        for L in range(N - p):
            w = math.exp(c * L)
            best = -1.0
            bn = -1
            for n in range(lo, p + 1):
                den = Y[n, p]
                num = Y[n, p + L] * w
                if den > 0.0:
                    r = num / den
                elif num > 0.0:
                    r = math.inf
                else:
                    r = 0.0
                if r > best:
                    best = r
                    bn = n
            out[p, L] = best
            arg[p, L] = bn
    return out, arg


def _backward_ratios_loop(Y, c, three):
    N = Y.shape[0]
    out = np.full((N, N), np.nan)
    arg = np.full((N, N), -1, dtype=np.int64)
    for m in range(N):
        for L in range(m + 1):
            p = m - L
            lo = 0 if three else p
            w = math.exp(c * L)
            best = -1.0
            bn = -1
            for n in range(lo, p + 1):
                den = Y[n, m]
                num = Y[n, p] * w
                if den > 0.0:
                    r = num / den
                elif num > 0.0:
                    r = math.inf
                else:
                    r = 0.0
                if r > best:
                    best = r
                    bn = n
            out[m, L] = best
            arg[m, L] = bn
    return out, arg


def _forward_sums_loop(Y, c, q, three):
    # running Neumaier sums, k ascending from the anchor
    N = Y.shape[0]
    out = np.full((N, N), np.nan)
    arg = np.full((N, N), -1, dtype=np.int64)
    for p in range(N):
        lo = 0 if three else p
        for L in range(N - p):
            out[p, L] = -1.0
        for n in range(lo, p + 1):
            den = Y[n, p] ** q
            s = 0.0
            comp = 0.0
            for L in range(N - p):
                term = (math.exp(c * L) * Y[n, p + L]) ** q
                t = s + term
                if abs(s) >= abs(term):
                    comp += (s - t) + term
                else:
                    comp += (term - t) + s
                s = t
                total = s + comp
                if den > 0.0:
                    r = total / den
                elif total > 0.0:
                    r = math.inf
                else:
                    r = 0.0
                if r > out[p, L]:
                    out[p, L] = r
                    arg[p, L] = n
    return out, arg


def _backward_sums_loop(Y, c, q, three):
    N = Y.shape[0]
    out = np.full((N, N), np.nan)
    arg = np.full((N, N), -1, dtype=np.int64)
    for m in range(N):
        for L in range(m + 1):
            p = m - L
            lo = 0 if three else p
            best = -1.0
            bn = -1
            for n in range(lo, p + 1):
                s = 0.0
                comp = 0.0
                for k in range(p, m + 1):
                    term = (math.exp(c * (m - k)) * Y[n, k]) ** q
                    t = s + term
                    if abs(s) >= abs(term):
                        comp += (s - t) + term
                    else:
                        comp += (term - t) + s
                    s = t
                total = (s + comp) ** (1.0 / q)
                den = Y[n, m]
                if den > 0.0:
                    r = total / den
                elif total > 0.0:
                    r = math.inf
                else:
                    r = 0.0
                if r > best:
                    best = r
                    bn = n
            out[m, L] = best
            arg[m, L] = bn
    return out, arg


def _adjoint_sums_loop(Q, gamma, q, vnorm):
    N = Q.shape[0]
    out = np.full((N, N), np.nan)
    den = vnorm ** q
    for n in range(N):
        for L in range(N - n):
            m = n + L
            s = 0.0
            comp = 0.0
            for k in range(n, m + 1):
                term = (math.exp(gamma * (m - k)) * Q[n, k, m]) ** q
                t = s + term
                if abs(s) >= abs(term):
                    comp += (s - t) + term
                else:
                    comp += (term - t) + s
                s = t
            total = s + comp
            if den > 0.0:
                out[n, L] = total / den
            elif total > 0.0:
                out[n, L] = math.inf
            else:
                out[n, L] = 0.0
    return out


# ---------------------------------------------------------------------------
# numpy versions
# ---------------------------------------------------------------------------

def _ratio_array(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    r = np.where(den > 0, r, np.where(num > 0, np.inf, 0.0))
    return r


def _neumaier_cumsum(terms):
    """Compensated prefix sums along the last axis, index ascending."""
    terms = np.asarray(terms, dtype=float)
    out = np.empty_like(terms)
    s = np.zeros(terms.shape[:-1])
    comp = np.zeros(terms.shape[:-1])
    for i in range(terms.shape[-1]):
        term = terms[..., i]
        t = s + term
        comp += np.where(np.abs(s) >= np.abs(term), (s - t) + term, (term - t) + s)
        s = t
        out[..., i] = s + comp
    return out


def _neumaier_sum(terms):
    return _neumaier_cumsum(terms)[..., -1]


def _np_transition_products(steps):
    N, d, _ = steps.shape
    phi = np.zeros((N + 1, N + 1, d, d))
    eye = np.eye(d)
    for n in range(N + 1):
        cur = eye
        phi[n, n] = eye
        for k in range(n + 1, N + 1):
            cur = steps[k - 1] @ cur
            phi[n, k] = cur
    return phi


def _np_trajectory_norms(phi, vectors, code):
    w = np.einsum("nkab,jb->jnka", phi, vectors)
    if code == 0:
        return np.abs(w).sum(axis=-1)
    if code == 1:
        return np.sqrt((w * w).sum(axis=-1))
    return np.abs(w).max(axis=-1)


def _pick(vals, lo_index):
    """Max over the first axis, returning (max, argmax + lo_index)."""
    idx = np.argmax(vals, axis=0)
    best = np.take_along_axis(vals, idx[None], axis=0)[0]
    return best, idx + lo_index


def _np_forward_ratios(Y, c, three):
    N = Y.shape[0]
    out = np.full((N, N), np.nan)
    arg = np.full((N, N), -1, dtype=np.int64)
    for p in range(N):
        lo = 0 if three else p
        L = np.arange(N - p)
        num = Y[lo:p + 1, p:] * np.exp(c * L)
        den = Y[lo:p + 1, p][:, None]
        best, bn = _pick(_ratio_array(num, den), lo)
        out[p, :N - p] = best
        arg[p, :N - p] = bn
    return out, arg


def _np_backward_ratios(Y, c, three):
    N = Y.shape[0]
    out = np.full((N, N), np.nan)
    arg = np.full((N, N), -1, dtype=np.int64)
    for m in range(N):
        for L in range(m + 1):
            p = m - L
            lo = 0 if three else p
            num = Y[lo:p + 1, p] * math.exp(c * L)
            den = Y[lo:p + 1, m]
            best, bn = _pick(_ratio_array(num, den)[:, None], lo)
            out[m, L] = best[0]
            arg[m, L] = bn[0]
    return out, arg


def forward_sums_gauge(Y, c, R, three):
    """Forward partial sums with an arbitrary vectorised gauge ``R``.

    ``out[p, L] = max_n sum_{k=p}^{p+L} R(e^{c(k-p)} Y[n,k]) / R(Y[n,p])``.
    """
    N = Y.shape[0]
    out = np.full((N, N), np.nan)
    arg = np.full((N, N), -1, dtype=np.int64)
    for p in range(N):
        lo = 0 if three else p
        L = np.arange(N - p)
        terms = R(np.exp(c * L) * Y[lo:p + 1, p:])
        sums = _neumaier_cumsum(terms)
        den = R(Y[lo:p + 1, p])[:, None]
        best, bn = _pick(_ratio_array(sums, den), lo)
        out[p, :N - p] = best
        arg[p, :N - p] = bn
    return out, arg


def backward_sums_gauge(Y, c, R, R_inv, three):
    """Backward sums anchored at the final time.

    ``out[m, L] = max_n R_inv(sum_{k=m-L}^{m} R(e^{c(m-k)} Y[n,k])) / Y[n,m]``.
    """
    N = Y.shape[0]
    out = np.full((N, N), np.nan)
    arg = np.full((N, N), -1, dtype=np.int64)
    for m in range(N):
        for L in range(m + 1):
            p = m - L
            lo = 0 if three else p
            k = np.arange(p, m + 1)
            terms = R(np.exp(c * (m - k)) * Y[lo:p + 1, p:m + 1])
            total = R_inv(_neumaier_sum(terms))
            best, bn = _pick(_ratio_array(total, Y[lo:p + 1, m])[:, None], lo)
            out[m, L] = best[0]
            arg[m, L] = bn[0]
    return out, arg


def adjoint_sums_gauge(Q, gamma, R, vnorm):
    """``out[n, L] = sum_{k=n}^{n+L} R(e^{gamma(m-k)} Q[n,k,m]) / R(vnorm)``."""
    N = Q.shape[0]
    out = np.full((N, N), np.nan)
    den = float(R(np.asarray(vnorm, dtype=float)))
    for n in range(N):
        for L in range(N - n):
            m = n + L
            k = np.arange(n, m + 1)
            total = _neumaier_sum(R(np.exp(gamma * (m - k)) * Q[n, n:m + 1, m]))
            out[n, L] = _ratio_array(np.array(total), np.array(den))
    return out


def _power(q):
    return lambda t: np.asarray(t, dtype=float) ** q


def _power_inv(q):
    return lambda t: np.asarray(t, dtype=float) ** (1.0 / q)


def _np_forward_sums(Y, c, q, three):
    return forward_sums_gauge(Y, c, _power(q), three)


def _np_backward_sums(Y, c, q, three):
    return backward_sums_gauge(Y, c, _power(q), _power_inv(q), three)


def _np_adjoint_sums(Q, gamma, q, vnorm):
    return adjoint_sums_gauge(Q, gamma, _power(q), vnorm)


NUMPY_KERNELS = {
    "transition_products": _np_transition_products,
    "trajectory_norms": _np_trajectory_norms,
    "forward_ratios": _np_forward_ratios,
    "backward_ratios": _np_backward_ratios,
    "forward_sums": _np_forward_sums,
    "backward_sums": _np_backward_sums,
    "adjoint_sums": _np_adjoint_sums,
}

_LOOPS = {
    "transition_products": _transition_products_loop,
    "trajectory_norms": _trajectory_norms_loop,
    "forward_ratios": _forward_ratios_loop,
    "backward_ratios": _backward_ratios_loop,
    "forward_sums": _forward_sums_loop,
    "backward_sums": _backward_sums_loop,
    "adjoint_sums": _adjoint_sums_loop,
}

if numba is not None:
    NUMBA_KERNELS = {name: numba.njit(cache=True)(fn) for name, fn in _LOOPS.items()}
else:  # pragma: no cover
    NUMBA_KERNELS = {}


def get_kernels(use_numba=None):
    """Return the kernel table for the requested backend."""
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and NUMBA_KERNELS:
        return NUMBA_KERNELS
    return NUMPY_KERNELS


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def transition_products(steps, use_numba=None):
    return get_kernels(use_numba)["transition_products"](_f64(steps))


def trajectory_norms(phi, vectors, norm_kind, use_numba=None):
    return get_kernels(use_numba)["trajectory_norms"](
        _f64(phi), _f64(vectors), NORM_CODES[norm_kind])


def forward_ratios(Y, c, three=False, use_numba=None):
    return get_kernels(use_numba)["forward_ratios"](_f64(Y), float(c), bool(three))


def backward_ratios(Y, c, three=False, use_numba=None):
    return get_kernels(use_numba)["backward_ratios"](_f64(Y), float(c), bool(three))


def forward_sums(Y, c, q=1.0, three=False, use_numba=None):
    return get_kernels(use_numba)["forward_sums"](_f64(Y), float(c), float(q), bool(three))


def backward_sums(Y, c, q=1.0, three=False, use_numba=None):
    return get_kernels(use_numba)["backward_sums"](_f64(Y), float(c), float(q), bool(three))


def adjoint_sums(Q, gamma, q=1.0, vnorm=1.0, use_numba=None):
    return get_kernels(use_numba)["adjoint_sums"](_f64(Q), float(gamma), float(q), float(vnorm))


def warmup():
    """Trigger compilation of every numba kernel on a tiny input."""
    steps = np.ones((2, 1, 1)) * 0.5
    phi = transition_products(steps)
    Y = trajectory_norms(phi, np.ones((1, 1)), "l1")[0]
    forward_ratios(Y, 1.0, True)
    backward_ratios(Y, 1.0, True)
    forward_sums(Y, 1.0, 1.0, True)
    backward_sums(Y, 1.0, 1.0, True)
    adjoint_sums(np.ones((3, 3, 3)), 1.0, 1.0, 1.0)
