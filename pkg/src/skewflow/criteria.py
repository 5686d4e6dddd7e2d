"""Discrete stability/instability certificates and summation criteria.

All certificates sample the cocycle on integer times ``0..n_max``, a set of
states, and unit vectors.  For every anchor time the worst ratio of the
relevant inequality is tabulated against the lag; the fitted coefficient of
the anchor is that maximum, clipped below at 1.

A coefficient sequence only needs to be finite for each anchor, so the
verdict asks whether the worst ratio stops growing along the lag: for every
anchor whose lag window covers at least ``split * n_max`` steps, the maximum
over the late half of the window must not exceed ``trend_factor`` times the
maximum over the early half.  Growth of the coefficients *across* anchors is
allowed (nonuniform behaviour) and only reported as a diagnostic.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from . import _kernels
from .core import DUAL_NORM, projected_table, vector_norm
from .errors import InconsistencyError, InputError


# ---------------------------------------------------------------------------
# gauges
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonotoneGauge:
    """Nondecreasing ``R`` with ``R(0) = 0`` and ``R(t) > 0`` for ``t > 0``.

    ``kind`` is ``"identity"``, ``"power"`` (``R(t) = t**p``) or ``"table"``
    (piecewise linear through ``(t, R)`` pairs, first pair ``(0, 0)``,
    extended linearly past the last pair).
    """

    kind: str = "identity"
    p: float = 1.0
    points: tuple = ()

    def __post_init__(self):
        if self.kind == "identity":
            object.__setattr__(self, "p", 1.0)
        elif self.kind == "power":
            if not (self.p > 0 and math.isfinite(self.p)):
                raise InputError(f"power gauge needs p > 0, got {self.p}")
        elif self.kind == "table":
            pts = tuple((float(a), float(b)) for a, b in self.points)
            if len(pts) < 2:
                raise InputError("table gauge needs at least two points")
            ts = np.array([a for a, _ in pts])
            rs = np.array([b for _, b in pts])
            if ts[0] != 0.0 or rs[0] != 0.0:
                raise InputError("table gauge must start at (0, 0)")
            if np.any(np.diff(ts) <= 0):
                raise InputError("table gauge abscissae must be strictly increasing")
            if np.any(np.diff(rs) < 0):
                raise InputError("table gauge must be nondecreasing")
            if rs[1] <= 0:
                raise InputError("table gauge must be positive for t > 0")
            object.__setattr__(self, "points", pts)
        else:
            raise InputError(f"unknown gauge kind {self.kind!r}")

    @property
    def exponent(self):
        """Power ``q`` with ``R(t) = t**q``, or None for tables."""
        return None if self.kind == "table" else self.p

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind != "table":
            return t ** self.p
        ts = np.array([a for a, _ in self.points])
        rs = np.array([b for _, b in self.points])
        slope = (rs[-1] - rs[-2]) / (ts[-1] - ts[-2])
        inside = np.interp(t, ts, rs)
        return np.where(t > ts[-1], rs[-1] + slope * (t - ts[-1]), inside)

    def strictly_increasing(self, upto=math.inf):
        if self.kind != "table":
            return True
        ts = np.array([a for a, _ in self.points])
        rs = np.array([b for _, b in self.points])
        seg = np.diff(rs) > 0
        relevant = ts[:-1] < upto
        last_slope_ok = seg[-1] or ts[-1] >= upto
        return bool(np.all(seg[relevant]) and last_slope_ok)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind != "table":
            return y ** (1.0 / self.p)
        # monotone bisection, 1e-12 absolute
        lo = np.zeros_like(y)
        hi = np.ones_like(y)
        while np.any(self(hi) < y):
            hi = np.where(self(hi) < y, hi * 2.0, hi)
        while np.any(hi - lo > 1e-12):
            mid = 0.5 * (lo + hi)
            below = self(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-12 * np.maximum(1.0, hi)):
                break
        return hi

    def to_spec(self):
        if self.kind == "identity":
            return "identity"
        if self.kind == "power":
            return {"power": self.p}
        return {"table": [list(p) for p in self.points]}


IDENTITY = MonotoneGauge()


def gauge_from_spec(spec):
    """Build a gauge from ``"identity"``, ``{"power": p}`` or ``{"table": [...]}``."""
    if spec is None or spec == "identity":
        return IDENTITY
    if isinstance(spec, MonotoneGauge):
        return spec
    if isinstance(spec, dict) and len(spec) == 1:
        (key, val), = spec.items()
        if key == "power":
            return MonotoneGauge("power", p=float(val))
        if key == "table":
            return MonotoneGauge("table", points=tuple(tuple(r) for r in val))
    raise InputError(f"invalid gauge specification {spec!r}")


# ---------------------------------------------------------------------------
# horizon and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Horizon:
    """Sampling plan shared by all certificates."""

    n_max: int = 50
    states: tuple = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0)
    n_random_vectors: int = 8
    seed: int = 0
    trend_factor: float = 10.0
    split: float = 0.5
    vectors: tuple = None

    def __post_init__(self):
        if int(self.n_max) < 2:
            raise InputError("horizon n_max must be >= 2")
        if len(self.states) == 0:
            raise InputError("horizon needs at least one state sample")
        if not self.trend_factor >= 1.0:
            raise InputError("trend_factor must be >= 1")
        if not 0.0 < self.split < 1.0:
            raise InputError("split must lie in (0, 1)")
        object.__setattr__(self, "n_max", int(self.n_max))
        object.__setattr__(self, "states", tuple(float(s) for s in self.states))

    def states_for(self, system):
        return self.states[:1] if system.x_independent else self.states

    def vectors_for(self, dim, kind="l1"):
        """Unit vectors: explicit ones, or ``+-e_i`` plus seeded random ones."""
        if self.vectors is not None:
            V = np.array(self.vectors, dtype=float).reshape(-1, dim)
            norms = np.array([vector_norm(v, kind) for v in V])
            if np.any(norms == 0):
                raise InputError("explicit sample vectors must be nonzero")
            return V / norms[:, None]
        eye = np.eye(dim)
        rows = [eye, -eye]
        if self.n_random_vectors:
            rng = np.random.default_rng([self.seed, dim, ("l1", "l2", "linf").index(kind)])
            R = rng.standard_normal((self.n_random_vectors, dim))
            R /= np.array([vector_norm(r, kind) for r in R])[:, None]
            rows.append(R)
        return np.vstack(rows)


def norm_tables(system, horizon, projector=None, vectors=None):
    """Trajectory norms ``Y[j, n, k] = ||Phi(k, n, x) P(x) v_j||`` per state.

    Returns ``(states, vectors, tables)`` with ``tables`` shaped
    ``(n_states, n_vectors, N, N)``.
    """
    V = horizon.vectors_for(system.dim, system.norm_kind) if vectors is None else vectors
    states = horizon.states_for(system)
    out = []
    for x in states:
        if projector is None:
            phi = system.transition_table(x, horizon.n_max)
        else:
            phi = projected_table(system, x, horizon.n_max, projector)
        out.append(_kernels.trajectory_norms(phi, V, system.norm_kind))
    return states, V, np.stack(out)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class Certificate:
    """Outcome of one sampled inequality.

    ``coefficients[a]`` is the fitted constant for anchor time ``a`` and
    ``max_ratio[a]`` the unclipped worst ratio behind it.  ``anchor`` tells
    whether anchors are start times (``"start"``) or final times (``"end"``).
    """

    kind: str
    holds: bool
    exponent: float
    coefficients: np.ndarray
    max_ratio: np.ndarray
    anchor_ok: np.ndarray
    anchor: str
    witness: dict = None
    diagnostics: dict = field(default_factory=dict)
    profile: np.ndarray = None

    def rows(self):
        """CSV rows ``(n, coefficient, max_ratio, verdict_flag)``."""
        return [(n, float(self.coefficients[n]), float(self.max_ratio[n]), int(bool(self.anchor_ok[n])))
                for n in range(len(self.coefficients))]

    def to_dict(self):
        return {
            "kind": self.kind,
            "holds": bool(self.holds),
            "exponent": self.exponent,
            "anchor": self.anchor,
            "coefficients": [float(c) for c in self.coefficients],
            "max_ratio": [float(c) for c in self.max_ratio],
            "anchor_ok": [bool(b) for b in self.anchor_ok],
            "witness": self.witness,
            "diagnostics": self.diagnostics,
        }


def _windows(N, side):
    idx = np.arange(N)
    return (N - 1 - idx) if side == "start" else idx


def lag_trend(profile, side, horizon, trend_factor=None):
    """Per-anchor boundedness verdict on an ``(anchor, lag)`` profile.

    Returns ``(anchor_ok, growth)`` where ``growth[a]`` is the late-half to
    early-half ratio (NaN for anchors with a short window).  Infinite
    entries (degenerate denominators) fail their anchor regardless of window.
    """
    K = horizon.trend_factor if trend_factor is None else trend_factor
    N = profile.shape[0]
    win = _windows(N, side)
    min_window = max(2, math.ceil(horizon.split * horizon.n_max))
    ok = np.ones(N, dtype=bool)
    growth = np.full(N, np.nan)
    for a in range(N):
        W = win[a]
        row = profile[a, :W + 1]
        if np.any(np.isinf(row)):
            ok[a] = False
            growth[a] = math.inf
            continue
        if W < min_window:
            continue
        h = W // 2
        first = float(np.max(row[:h + 1]))
        late = float(np.max(row[h + 1:]))
        if first > 0:
            growth[a] = late / first
            ok[a] = late <= K * first
        else:
            growth[a] = math.inf if late > 0 else 1.0
            ok[a] = late <= 0
    return ok, growth


def uniform_trend(coefficients, K):
    """True when no coefficient in the second half exceeds ``K`` times the
    maximum of the first half of its prefix."""
    c = np.asarray(coefficients, dtype=float)
    N = len(c)
    for n in range(N // 2, N):
        if c[n] > K * np.max(c[:n // 2 + 1]):
            return False
    return True


def certificate_from_stack(kind, exponent, side, stack, args, states, vectors, horizon,
                           trend_factor=None, lag_names=("m", "p", "n")):
    """Reduce a ``(states, vectors, anchor, lag)`` stack into a Certificate."""
    S, J, N, _ = stack.shape
    flat = stack.reshape(S * J, N, N)
    filled = np.where(np.isnan(flat), -np.inf, flat)
    which = np.argmax(filled, axis=0)
    profile = np.take_along_axis(flat, which[None], axis=0)[0]
    ok, growth = lag_trend(profile, side, horizon, trend_factor)
    win = _windows(N, side)
    max_ratio = np.array([np.max(profile[a, :win[a] + 1]) for a in range(N)])
    coeff = np.maximum(1.0, max_ratio)
    # ratios that cancel analytically land a few ulp above 1
    coeff[coeff <= 1.0 + 8 * np.finfo(float).eps] = 1.0
    holds = bool(np.all(ok))
    witness = None
    if not holds:
        a = int(np.argmax(np.where(ok, -np.inf, growth)))
        W = win[a]
        h = W // 2 if W >= 2 else -1
        seg = profile[a, h + 1:W + 1]
        lag = int(h + 1 + np.argmax(seg))
        src = int(which[a, lag])
        si, vj = divmod(src, J)
        n_idx = int(args.reshape(S * J, N, N)[src, a, lag]) if args is not None else None
        if side == "start":
            times = {"start": a, "end": a + lag}
        else:
            times = {"start": a - lag, "end": a}
        if n_idx is not None and n_idx >= 0:
            times["origin"] = n_idx
        witness = {
            "anchor": a,
            "lag": lag,
            "times": times,
            "state": float(states[si]),
            "vector": [float(v) for v in vectors[vj]],
            "value": float(profile[a, lag]),
            "growth": float(growth[a]),
            "reason": "degenerate" if math.isinf(profile[a, lag]) else "divergent",
        }
    diag = {
        "uniform_in_anchor": uniform_trend(coeff, horizon.trend_factor),
        "trend_factor": horizon.trend_factor if trend_factor is None else trend_factor,
        "tested_anchors": int(np.sum(win >= max(2, math.ceil(horizon.split * horizon.n_max)))),
    }
    return Certificate(kind, holds, float(exponent), coeff, max_ratio, ok, side,
                       witness, diag, profile)


def ratio_certificate(kind, tables, c, side, three, horizon, exponent, trend_factor=None):
    """Certificate for a pointwise inequality given precomputed norm tables."""
    states, V, Y = tables
    S, J, N, _ = Y.shape
    kern = _kernels.forward_ratios if side == "start" else _kernels.backward_ratios
    stack = np.empty((S, J, N, N))
    args = np.empty((S, J, N, N), dtype=np.int64)
    for i in range(S):
        for j in range(J):
            stack[i, j], args[i, j] = kern(Y[i, j], c, three)
    return certificate_from_stack(kind, exponent, side, stack, args, states, V, horizon, trend_factor)


def sum_certificate(kind, tables, c, side, three, horizon, exponent, gauge=IDENTITY):
    """Certificate for a summation inequality (forward or backward sums)."""
    states, V, Y = tables
    S, J, N, _ = Y.shape
    stack = np.empty((S, J, N, N))
    args = np.empty((S, J, N, N), dtype=np.int64)
    q = gauge.exponent
    for i in range(S):
        for j in range(J):
            if side == "start":
                if q is not None:
                    stack[i, j], args[i, j] = _kernels.forward_sums(Y[i, j], c, q, three)
                else:
                    stack[i, j], args[i, j] = _kernels.forward_sums_gauge(Y[i, j], c, gauge, three)
            else:
                if q is not None:
                    stack[i, j], args[i, j] = _kernels.backward_sums(Y[i, j], c, q, three)
                else:
                    stack[i, j], args[i, j] = _kernels.backward_sums_gauge(
                        Y[i, j], c, gauge, gauge.inverse, three)
    return certificate_from_stack(kind, exponent, side, stack, args, states, V, horizon)


def _positive(name, value):
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise InputError(f"{name} must be > 0, got {value}")
    return value


def es_certificate(system, mu, horizon=None, trend_factor=None):
    """Fit ``a_m`` in ``||Phi(n,m,x)v|| <= a_m e^{-mu(n-m)} ||v||``."""
    mu = _positive("mu", mu)
    horizon = horizon or Horizon()
    return ratio_certificate("es", norm_tables(system, horizon), mu, "start", False,
                             horizon, mu, trend_factor)


def eis_certificate(system, mu, horizon=None, trend_factor=None):
    """Fit ``a_m`` in ``||Phi(n,n0,x)v|| <= a_m e^{-mu(m-n)} ||Phi(m,n0,x)v||``
    over ``m >= n >= n0``."""
    mu = _positive("mu", mu)
    horizon = horizon or Horizon()
    return ratio_certificate("eis", norm_tables(system, horizon), mu, "end", True,
                             horizon, mu, trend_factor)


def datko_criterion(system, gauge=IDENTITY, rho=1.0, horizon=None):
    """Fit ``alpha_n`` in ``sum_{k=n}^m R(e^{rho(k-n)}||Phi(k,n,x)v||) <= alpha_n R(||v||)``."""
    rho = _positive("rho", rho)
    gauge = gauge_from_spec(gauge)
    horizon = horizon or Horizon()
    cert = sum_certificate("datko", norm_tables(system, horizon), rho, "start", False,
                           horizon, rho, gauge)
    cert.diagnostics["gauge"] = gauge.to_spec()
    if cert.holds:
        cert.diagnostics["conclusion"] = (
            "consistent with exponential stability on the sampled horizon "
            "(given exponential growth)")
    return cert


def instability_criterion(system, gauge=IDENTITY, rho=-1.0, horizon=None):
    """Fit ``alpha_m`` in
    ``sum_{k=n}^m R(e^{-rho(m-k)}||Phi(k,n,x)v||) <= R(alpha_m ||Phi(m,n,x)v||)``, ``rho < 0``."""
    rho = float(rho)
    if not (rho < 0 and math.isfinite(rho)):
        raise InputError(f"rho must be < 0, got {rho}")
    gauge = gauge_from_spec(gauge)
    horizon = horizon or Horizon()
    tables = norm_tables(system, horizon)
    upto = float(np.nanmax(tables[2])) * math.exp(-rho * horizon.n_max) * (horizon.n_max + 1)
    if not gauge.strictly_increasing(upto):
        raise InputError("instability criterion needs a strictly increasing gauge")
    cert = sum_certificate("instability", tables, -rho, "end", False, horizon, rho, gauge)
    cert.diagnostics["gauge"] = gauge.to_spec()
    return cert


def adjoint_sum_table(system, gamma, horizon, gauge=IDENTITY, primal=False):
    """Sums ``sum_{k=n}^m R(e^{gamma(m-k)} ||Phi(m,k,phi(k,n,x))^* v*||)``.

    Returns ``(states, vectors, stack)`` with ``stack[i, j, n, m-n]``
    normalised by ``R(||v*||)``.  With ``primal=True`` the same operators act
    on ``v`` directly and are measured in the primal norm.
    """
    gauge = gauge_from_spec(gauge)
    kind = system.norm_kind if primal else DUAL_NORM[system.norm_kind]
    V = horizon.vectors_for(system.dim, kind)
    states = horizon.states_for(system)
    N = horizon.n_max + 1
    stack = np.empty((len(states), len(V), N, N))
    for i, x in enumerate(states):
        Q = _operator_norm_cube(system, x, horizon.n_max, V, kind, primal)
        for j in range(len(V)):
            vnorm = vector_norm(V[j], kind)
            if gauge.exponent is not None:
                stack[i, j] = _kernels.adjoint_sums(Q[j], gamma, gauge.exponent, vnorm)
            else:
                stack[i, j] = _kernels.adjoint_sums_gauge(Q[j], gamma, gauge, vnorm)
    return states, V, stack


def _apply_norms(mats, V, kind, primal):
    # mats[..., a, b]; returns norms[j, ...] of mats @ v (primal) or mats^T @ v
    sub = "...ab,jb->j...a" if primal else "...ba,jb->j...a"
    W = np.einsum(sub, mats, V)
    if kind == "l1":
        return np.abs(W).sum(-1)
    if kind == "l2":
        return np.sqrt((W * W).sum(-1))
    return np.abs(W).max(-1)


def _operator_norm_cube(system, x, n_max, V, kind, primal):
    """``Q[j, n, k, m]`` = norm of ``Phi(m, k, phi(k, n, x))`` applied to ``v_j``."""
    N = n_max + 1
    Q = np.zeros((len(V), N, N, N))
    if system.x_independent:
        T = system.transition_table(x, n_max)   # T[k, m] = Phi(m, k)
        q = _apply_norms(T, V, kind, primal)    # (j, k, m)
        for n in range(N):
            Q[:, n, n:, :] = q[:, n:, :]
        return Q
    eye = np.eye(system.dim)
    for n in range(N):
        for k in range(n, N):
            y = system.semiflow(k, n, x)
            row = np.zeros((N, system.dim, system.dim))
            for m in range(k, N):
                row[m] = eye if (m == k and system.unital) else system.matrix(m, k, y)
            Q[:, n, k, :] = _apply_norms(row, V, kind, primal)
    return Q


def adjoint_criterion(system, gauge=IDENTITY, gamma=1.0, horizon=None):
    """Fit ``beta_n`` in
    ``sum_{k=n}^m R(e^{gamma(m-k)}||Phi(m,k,phi(k,n,x))^* v*||) <= beta_n R(||v*||)``."""
    gamma = _positive("gamma", gamma)
    gauge = gauge_from_spec(gauge)
    horizon = horizon or Horizon()
    states, V, stack = adjoint_sum_table(system, gamma, horizon, gauge)
    cert = certificate_from_stack("adjoint", gamma, "start", stack, None, states, V, horizon)
    cert.diagnostics["gauge"] = gauge.to_spec()
    cert.diagnostics["dual_norm"] = DUAL_NORM[system.norm_kind]
    return cert


# ---------------------------------------------------------------------------
# envelopes
# ---------------------------------------------------------------------------

OMEGA_GRID = tuple(10.0 ** (k / 10.0) for k in range(-30, 21))


@dataclass
class EnvelopeBound:
    """Per-anchor ``(M, omega)`` of a growth or decay envelope."""

    direction: str
    holds: bool
    M: np.ndarray
    omega: np.ndarray
    witness: dict = None

    def rows(self):
        return [(n, float(self.M[n]), float(self.omega[n]), 1) for n in range(len(self.M))]

    def to_dict(self):
        return {"direction": self.direction, "holds": bool(self.holds),
                "M": [float(v) for v in self.M], "omega": [float(v) for v in self.omega],
                "witness": self.witness}


def _fit_envelope(system, horizon, direction, omegas, projector=None):
    horizon = horizon or Horizon()
    omegas = sorted(float(w) for w in (omegas or OMEGA_GRID))
    if not omegas or omegas[0] <= 0:
        raise InputError("envelope rates must be positive")
    tables = norm_tables(system, horizon, projector)
    side = "start" if direction == "growth" else "end"
    N = horizon.n_max + 1
    omega = np.full(N, np.nan)
    M = np.full(N, np.nan)
    # anchors with short windows have no trend test; they inherit the worst tested rate
    win = _windows(N, side)
    min_window = max(2, math.ceil(horizon.split * horizon.n_max))
    testable = win >= min_window
    last = None
    for w in omegas:
        cert = ratio_certificate(direction, tables, -w, side, True, horizon, w)
        fresh = np.isnan(omega) & cert.anchor_ok & testable
        omega[fresh] = w
        M[fresh] = cert.coefficients[fresh]
        last = cert
        if not np.any(np.isnan(omega[testable])):
            break
    if np.any(np.isnan(omega[testable])):
        return EnvelopeBound(direction, False, M, omega, last.witness)
    w_fill = float(np.max(omega[testable])) if np.any(testable) else omegas[0]
    short = np.isnan(omega)
    if np.any(short):
        cert = ratio_certificate(direction, tables, -w_fill, side, True, horizon, w_fill)
        omega[short] = w_fill
        M[short] = cert.coefficients[short]
    return EnvelopeBound(direction, True, M, omega, None)


def fit_growth(system, horizon=None, omegas=None, projector=None):
    """Smallest grid ``omega(s)`` and its ``M(s)`` with
    ``||Phi(t,t0,x)v|| <= M(s) e^{omega(s)(t-s)} ||Phi(s,t0,x)v||``."""
    return _fit_envelope(system, horizon, "growth", omegas, projector)


def fit_decay(system, horizon=None, omegas=None, projector=None):
    """Mirror of :func:`fit_growth` for
    ``||Phi(s,t0,x)v|| <= M(t) e^{omega(t)(t-s)} ||Phi(t,t0,x)v||``."""
    return _fit_envelope(system, horizon, "decay", omegas, projector)


# ---------------------------------------------------------------------------
# sharp exponents
# ---------------------------------------------------------------------------

STRICT_TREND = 1.0 + 1e-9


@dataclass
class ExponentEstimate:
    direction: str
    value: float
    status: str
    probes: list

    def to_dict(self):
        return {"direction": self.direction, "value": self.value, "status": self.status,
                "probes": [[float(a), bool(b)] for a, b in self.probes]}


def estimate_exponent(system, direction="stable", horizon=None, search=(1e-6, 20.0),
                      tol=1e-4, trend_factor=STRICT_TREND):
    """Bisect for the largest rate whose es (or eis) certificate holds.

    The default ``trend_factor`` is strict: any growth of the worst ratio
    along the lag counts as divergence, which pins the rate to the sampled
    exponential rate instead of a ``log(K)/lag`` neighbourhood.
    """
    if direction not in ("stable", "instable"):
        raise InputError(f"direction must be 'stable' or 'instable', got {direction!r}")
    lo, hi = (float(v) for v in search)
    if not (0 < lo < hi):
        raise InputError(f"search interval must satisfy 0 < lo < hi, got {search}")
    horizon = horizon or Horizon()
    tables = norm_tables(system, horizon)
    side, three = ("start", False) if direction == "stable" else ("end", True)
    probes = []

    def verdict(mu):
        ok = ratio_certificate("estimate", tables, mu, side, three, horizon, mu, trend_factor).holds
        probes.append((mu, ok))
        return ok

    if not verdict(lo):
        _check_monotone(probes)
        return ExponentEstimate(direction, None, "no positive exponent", probes)
    if verdict(hi):
        _check_monotone(probes)
        return ExponentEstimate(direction, hi, "at upper bound of search interval", probes)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if verdict(mid):
            lo = mid
        else:
            hi = mid
    _check_monotone(probes)
    return ExponentEstimate(direction, 0.5 * (lo + hi), "ok", probes)


def _check_monotone(probes):
    good = [m for m, ok in probes if ok]
    bad = [m for m, ok in probes if not ok]
    if good and bad and max(good) >= min(bad):
        raise InconsistencyError(
            f"verdict not monotone: holds at {max(good)} but fails at {min(bad)}")


def with_trend(horizon, trend_factor):
    return replace(horizon, trend_factor=trend_factor)
