"""Skew-evolution systems: cocycle evaluation, axioms, shifts and restrictions.

A system couples a driving semiflow ``phi(t, s, x)`` on a scalar state space
with a cocycle ``Phi(t, s, x)`` of ``d x d`` real matrices acting on ``R^d``.
States are plain floats: a point of ``R_+`` for the translation-driven
examples, the shift amount ``u`` of ``x = f_u`` for the function-space one.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernels
from .errors import DomainError, InputError, InvarianceError

NORM_KINDS = ("l1", "l2", "linf")
DUAL_NORM = {"l1": "linf", "l2": "l2", "linf": "l1"}

AXIOM_TOLERANCE = 1e-9


def _check_norm_kind(kind):
    if kind not in NORM_KINDS:
        raise InputError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")
    return kind


def vector_norm(v, kind="l1"):
    v = np.asarray(v, dtype=float)
    if kind == "l1":
        return float(np.abs(v).sum())
    if kind == "l2":
        return float(np.sqrt((v * v).sum()))
    if kind == "linf":
        return float(np.abs(v).max()) if v.size else 0.0
    raise InputError(f"unknown norm kind {kind!r}")


def operator_norm(A, kind="l1"):
    """Induced operator norm of a square matrix."""
    A = np.asarray(A, dtype=float)
    if kind == "l1":
        return float(np.abs(A).sum(axis=0).max())
    if kind == "linf":
        return float(np.abs(A).sum(axis=1).max())
    if kind == "l2":
        return float(np.linalg.norm(A, 2))
    raise InputError(f"unknown norm kind {kind!r}")


def norming_functional(v, kind="l1"):
    """Dual vector ``f`` with ``<v, f> = ||v||`` and dual norm 1 (0 for v = 0)."""
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        return np.zeros_like(v)
    if kind == "l1":
        return np.sign(v)
    if kind == "l2":
        return v / np.sqrt((v * v).sum())
    if kind == "linf":
        f = np.zeros_like(v)
        i = int(np.argmax(np.abs(v)))
        f[i] = np.sign(v[i])
        return f
    raise InputError(f"unknown norm kind {kind!r}")


@dataclass(frozen=True)
class LinearOperator:
    """A square real matrix together with the norm used to measure it."""

    matrix: np.ndarray
    norm_kind: str = "l1"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InputError(f"operator must be a non-empty square matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        _check_norm_kind(self.norm_kind)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def norm(self):
        return operator_norm(self.matrix, self.norm_kind)

    def apply(self, v):
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape[0] != self.dim:
            raise InputError(f"vector of length {v.shape[0]} for operator of dim {self.dim}")
        return self.matrix @ v

    def adjoint_apply(self, vstar):
        return adjoint_apply(self, vstar)


def adjoint_apply(op, vstar):
    """Apply the adjoint (transpose) of ``op`` to a dual vector.

    Returns ``(A^T v*, ||A^T v*||_dual)`` where the dual of l1 is linf,
    of l2 is l2 and of linf is l1.
    """
    w = np.asarray(vstar, dtype=float).reshape(-1)
    if w.shape[0] != op.dim:
        raise InputError(f"dual vector of length {w.shape[0]} for operator of dim {op.dim}")
    out = op.matrix.T @ w
    return out, vector_norm(out, DUAL_NORM[op.norm_kind])


def translation_semiflow(t, s, x):
    """``phi(t, s, x) = x + t - s`` on ``R_+``."""
    return x + (t - s)


def _is_integer(t):
    return float(t).is_integer()


class SkewEvolutionSystem:
    """A pair (semiflow, cocycle) over a scalar state space.

    Parameters
    ----------
    dim : int
        Dimension of the fibre ``R^d``.
    cocycle : callable
        ``(t, s, x) -> (d, d) array``; called only with ``t >= s``.
    semiflow : callable, optional
        ``(t, s, x) -> x'``; defaults to translation on ``R_+``.
    norm_kind : {"l1", "l2", "linf"}
    x_independent : bool
        Declares that the cocycle ignores the state, so one state sample
        is enough for every certificate.
    integer_times : bool
        Reject non-integer times (systems given by one-step matrices).
    table : callable, optional
        Fast path ``(x, n_max) -> (n_max+1, n_max+1, d, d)`` transition table.
    unital : bool
        Whether ``Phi(t, t, x)`` is the identity.  Restricted systems are
        not (they return the projector there).
    """

    def __init__(self, dim, cocycle, semiflow=None, norm_kind="l1", *, name="system",
                 x_independent=False, integer_times=False, table=None, unital=True,
                 state_check=None, max_time=None):
        if int(dim) < 1:
            raise InputError("dimension must be >= 1")
        self.dim = int(dim)
        self.cocycle = cocycle
        self.semiflow = semiflow or translation_semiflow
        self.norm_kind = _check_norm_kind(norm_kind)
        self.name = name
        self.x_independent = x_independent
        self.integer_times = integer_times
        self.unital = unital
        self.max_time = max_time
        self._table = table
        self._state_check = state_check
        # set by shift(); lets nested shifts collapse onto one scale factor
        self.shift_base = None
        self.shift_rate = 0.0
        self.steps = None

    def __repr__(self):
        return f"SkewEvolutionSystem(name={self.name!r}, dim={self.dim}, norm={self.norm_kind!r})"

    def with_norm(self, norm_kind):
        """Same cocycle measured in another norm."""
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.norm_kind = _check_norm_kind(norm_kind)
        return clone

    # -- validation -------------------------------------------------------
    def check_times(self, t, s):
        t = float(t)
        s = float(s)
        if not (math.isfinite(t) and math.isfinite(s)):
            raise DomainError(f"non-finite times ({t}, {s})")
        if s < 0 or t < s:
            raise DomainError(f"time pair ({t}, {s}) violates t >= s >= 0")
        if self.integer_times and not (_is_integer(t) and _is_integer(s)):
            raise DomainError(f"{self.name} is defined at integer times only, got ({t}, {s})")
        if self.max_time is not None and t > self.max_time:
            raise DomainError(f"time {t} beyond the {self.max_time} steps defined for {self.name}")
        return t, s

    def check_state(self, x):
        try:
            x = float(x)
        except (TypeError, ValueError):
            raise InputError(f"state {x!r} is not a real number") from None
        if not math.isfinite(x) or x < 0:
            raise InputError(f"state {x} is not a point of R_+")
        if self._state_check is not None:
            self._state_check(x)
        return x

    # -- evaluation -------------------------------------------------------
    def matrix(self, t, s, x):
        """Raw cocycle matrix without validation or the t == s shortcut."""
        return np.asarray(self.cocycle(t, s, x), dtype=float).reshape(self.dim, self.dim)

    def evaluate(self, t, s, x):
        return evaluate(self, t, s, x)

    def transition_table(self, x, n_max):
        """``table[n, k] = Phi(k, n, x)`` for integers ``0 <= n <= k <= n_max``."""
        x = self.check_state(x)
        if self._table is not None:
            return self._table(x, int(n_max))
        N = int(n_max) + 1
        out = np.zeros((N, N, self.dim, self.dim))
        eye = np.eye(self.dim)
        for n in range(N):
            out[n, n] = eye if self.unital else self.matrix(n, n, x)
            for k in range(n + 1, N):
                out[n, k] = self.matrix(k, n, x)
        return out


def evaluate(system, t, s, x):
    """``Phi(t, s, x)`` as a :class:`LinearOperator`; exactly ``I`` when ``t == s``."""
    t, s = system.check_times(t, s)
    x = system.check_state(x)
    if t == s and system.unital:
        return LinearOperator(np.eye(system.dim), system.norm_kind)
    return LinearOperator(system.matrix(t, s, x), system.norm_kind)


# ---------------------------------------------------------------------------
# axioms
# ---------------------------------------------------------------------------

@dataclass
class AxiomReport:
    rows: list = field(default_factory=list)   # (t, s, t0, x, cocycle_res, semiflow_res)
    identity_residual: float = 0.0
    cocycle_residual: float = 0.0
    semiflow_residual: float = 0.0
    tolerance: float = AXIOM_TOLERANCE

    @property
    def passed(self):
        return (self.identity_residual <= self.tolerance
                and self.cocycle_residual <= self.tolerance
                and self.semiflow_residual <= self.tolerance)

    def to_dict(self):
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "identity_residual": self.identity_residual,
            "cocycle_residual": self.cocycle_residual,
            "semiflow_residual": self.semiflow_residual,
            "rows": [list(r) for r in self.rows],
        }


def verify_axioms(system, time_grid, states, tolerance=AXIOM_TOLERANCE):
    """Check the identity and composition laws of semiflow and cocycle.

    For every triple ``(t, s, t0)`` and state ``x`` the relative residual
    ``||Phi(t,s,phi(s,t0,x)) Phi(s,t0,x) - Phi(t,t0,x)||`` is divided by
    ``max(1, ||Phi(t,s,.)|| ||Phi(s,t0,.)||, ||Phi(t,t0,.)||)``.  The raw
    cocycle is used at ``t == s`` so the identity law is actually tested.
    """
    report = AxiomReport(tolerance=tolerance)
    kind = system.norm_kind
    eye = np.eye(system.dim)
    for (t, s, t0) in time_grid:
        t, s = system.check_times(t, s)
        s, t0 = system.check_times(s, t0)
        for x in states:
            x = system.check_state(x)
            y = system.semiflow(s, t0, x)
            A = system.matrix(t, s, y) if t > s else system.matrix(t, t, y)
            B = system.matrix(s, t0, x) if s > t0 else system.matrix(s, s, x)
            C = system.matrix(t, t0, x) if t > t0 else system.matrix(t, t, x)
            scale = max(1.0, operator_norm(A, kind) * operator_norm(B, kind), operator_norm(C, kind))
            res_c = operator_norm(A @ B - C, kind) / scale
            res_s = max(abs(system.semiflow(t, s, y) - system.semiflow(t, t0, x)),
                        abs(system.semiflow(t, t, x) - x))
            res_i = operator_norm(system.matrix(t, t, x) - eye, kind) if system.unital else 0.0
            report.rows.append((t, s, t0, x, res_c, res_s))
            report.cocycle_residual = max(report.cocycle_residual, res_c)
            report.semiflow_residual = max(report.semiflow_residual, res_s)
            report.identity_residual = max(report.identity_residual, res_i)
    return report


def random_time_grid(count, t_max=10.0, seed=0, integer=False):
    """``count`` random triples ``t >= s >= t0 >= 0``."""
    rng = np.random.default_rng(seed)
    if integer:
        pts = rng.integers(0, int(t_max) + 1, size=(count, 3))
    else:
        pts = rng.uniform(0.0, t_max, size=(count, 3))
    pts = -np.sort(-pts, axis=1)
    return [tuple(float(v) for v in row) for row in pts]


# ---------------------------------------------------------------------------
# shift and restriction
# ---------------------------------------------------------------------------

def _lag_matrix(N):
    k = np.arange(N)
    lag = k[None, :] - k[:, None]
    return np.where(lag >= 0, lag, 0), lag >= 0


def shift(system, lam):
    """Return the system with cocycle ``exp(-lam (t - t0)) Phi(t, t0, x)``.

    Nested shifts collapse onto the unshifted base, so shifting by ``lam``
    and then ``-lam`` returns the original object.
    """
    lam = float(lam)
    base = system.shift_base or system
    total = system.shift_rate + lam
    if total == 0.0:
        return base

    def cocycle(t, s, x):
        return math.exp(-total * (t - s)) * base.matrix(t, s, x)

    def table(x, n_max):
        raw = base.transition_table(x, n_max)
        lag, mask = _lag_matrix(n_max + 1)
        scale = np.where(mask, np.exp(-total * lag), 0.0)
        return raw * scale[:, :, None, None]

    out = SkewEvolutionSystem(
        base.dim, cocycle, base.semiflow, base.norm_kind,
        name=f"{base.name}[shift {total:g}]", x_independent=base.x_independent,
        integer_times=base.integer_times, table=table, unital=base.unital,
        state_check=base._state_check, max_time=base.max_time)
    out.shift_base = base
    out.shift_rate = total
    return out


def as_projector_map(P, dim=None):
    """Wrap a constant matrix as a projector-valued map ``x -> P``."""
    if callable(P):
        return P
    M = np.array(P, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"projector must be a square matrix, got shape {M.shape}")
    if dim is not None and M.shape[0] != dim:
        raise InputError(f"projector of size {M.shape[0]} for a system of dim {dim}")
    M.setflags(write=False)

    def constant(x):
        return M

    constant.matrix = M
    return constant


def projected_table(system, x, n_max, P):
    """``table[n, k] = Phi(k, n, x) P(x)``.

    For one-step systems with a constant projector the product is formed
    from the projected factors ``A_j P``, so rounding never leaves a
    component outside the range of ``P`` to be amplified by later steps.
    """
    M = getattr(P, "matrix", None)
    if M is not None and system.steps is not None and n_max <= len(system.steps):
        phi = _kernels.transition_products(system.steps[:n_max] @ M)
        idx = np.arange(n_max + 1)
        phi[idx, idx] = M
        return phi
    return system.transition_table(x, n_max) @ np.asarray(P(x), dtype=float)


def default_invariance_grid(system, n_max=6):
    if system.max_time is not None:
        n_max = min(n_max, int(math.floor(system.max_time)))
    pairs = [(float(t), float(s)) for t in range(n_max + 1) for s in range(t + 1)]
    if not system.integer_times:
        pairs += [(t, s) for t, s in ((1.5, 0.25), (3.7, 1.2), (5.0, 4.5)) if t <= n_max]
    return pairs


def restrict(system, P, grid=None, states=(0.0, 1.0, 2.5), check=True):
    """Subsystem with cocycle ``Phi(t, t0, x) P(x)``.

    The projector must be invariant; otherwise :class:`InvarianceError` is
    raised carrying the worst grid point.
    """
    P = as_projector_map(P, system.dim)
    if check:
        from .spectra import check_invariance
        res = check_invariance(P, system, grid or default_invariance_grid(system), states)
        if not res.passed:
            raise InvarianceError(
                f"projector is not invariant (relative residual {res.residual:.3e})", res.witness)

    def cocycle(t, s, x):
        return system.matrix(t, s, x) @ P(x) if t > s else np.asarray(P(x), dtype=float)

    def table(x, n_max):
        return projected_table(system, x, n_max, P)

    out = SkewEvolutionSystem(
        system.dim, cocycle, system.semiflow, system.norm_kind,
        name=f"{system.name}[restricted]", x_independent=system.x_independent,
        integer_times=system.integer_times, table=table, unital=False,
        state_check=system._state_check, max_time=system.max_time)
    return out


# ---------------------------------------------------------------------------
# step cocycles
# ---------------------------------------------------------------------------

def step_system(steps, norm_kind="l1", name="steps"):
    """Cocycle ``Phi(m, n) = A_{m-1} ... A_n`` from one-step matrices.

    Defined at integer times ``0 <= n <= m <= len(steps)``; the state is
    ignored and moved by translation.
    """
    steps = np.array(steps, dtype=float)
    if steps.ndim != 3 or steps.shape[1] != steps.shape[2] or steps.shape[0] < 1:
        raise InputError(f"steps must be a non-empty list of square matrices, got shape {steps.shape}")
    full = _kernels.transition_products(steps)
    full.setflags(write=False)
    n_steps = steps.shape[0]

    def cocycle(t, s, x):
        return full[int(s), int(t)]

    def table(x, n_max):
        if n_max > n_steps:
            raise DomainError(f"horizon {n_max} beyond the {n_steps} steps defined for {name}")
        return full[:n_max + 1, :n_max + 1].copy()

    out = SkewEvolutionSystem(
        steps.shape[1], cocycle, translation_semiflow, norm_kind, name=name,
        x_independent=True, integer_times=True, table=table, max_time=n_steps)
    steps.setflags(write=False)
    out.steps = steps
    return out
