"""Built-in example systems and seeded random block cocycles.

Every fixture comes with a :class:`FixtureDescriptor` whose ``expected``
block states the classification and constants it is known to satisfy and
where that knowledge comes from (``"worked-example"`` or ``"generator"``).
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate

from .core import SkewEvolutionSystem, translation_semiflow
from . import _kernels
from .errors import DomainError, InputError


@dataclass
class FixtureDescriptor:
    name: str
    params: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    families: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "params": self.params, "expected": self.expected}


# ---------------------------------------------------------------------------
# scalar examples on R_+
# ---------------------------------------------------------------------------

def _dip_log_f(peak_at_integer):
    """log of the piecewise-linear ``f`` pinned at integers and at ``n + e^{-n^2}``.

    ``peak_at_integer=True``: ``f(n) = e^{2n}``, ``f(n + e^{-n^2}) = 1``.
    ``peak_at_integer=False``: ``f(n) = 1``, ``f(n + e^{-n^2}) = e^{2n}``.
    For ``n = 0`` the intermediate knot coincides with ``t = 1`` and is
    dropped when it conflicts with the value pinned there.
    """
    def value_at(n):
        return 2.0 * n if peak_at_integer else 0.0

    def mid(n):
        return 0.0 if peak_at_integer else 2.0 * n

    def log_f(t):
        t = float(t)
        n = math.floor(t)
        if t == n:
            return value_at(n)
        knot = n + math.exp(-n * n)
        a, b = math.exp(value_at(n)), math.exp(value_at(n + 1))
        if knot >= n + 1:
            # n = 0: knot collides with t = 1
            if abs(mid(n) - value_at(n + 1)) > 0:
                return math.log(a + (b - a) * (t - n))
            knot = n + 1
        c = math.exp(mid(n))
        if t <= knot:
            return math.log(a + (c - a) * (t - n) / (knot - n))
        return math.log(c + (b - c) * (t - knot) / (n + 1 - knot))

    return log_f


def ex_nues1(norm_kind="l1"):
    """``Phi(t,s) = f(s)/f(t) e^{-(t-s)}`` with ``f(n) = e^{2n}``: rate 3 at integers."""
    log_f = _dip_log_f(True)

    def cocycle(t, s, x):
        return np.array([[math.exp(log_f(s) - log_f(t) - (t - s))]])

    def table(x, n_max):
        k = np.arange(n_max + 1, dtype=float)
        lag = k[None, :] - k[:, None]
        vals = np.where(lag >= 0, np.exp(-3.0 * np.maximum(lag, 0)), 0.0)
        return vals[:, :, None, None]

    sys_ = SkewEvolutionSystem(1, cocycle, translation_semiflow, norm_kind,
                               name="ex_nues1", x_independent=True, table=table)
    desc = FixtureDescriptor(
        "ex_nues1", {},
        {"classification": "exponentially stable", "integer_rate": 3.0,
         "bound": "|Phi(t,s,x)v| <= f(s) e^{-(t-s)} |v|", "source": "worked-example"})
    return sys_, desc


def ex_nueis1(norm_kind="l1"):
    """``Phi(t,s) = f(s)/f(t) e^{t-s}`` with ``f(n) = 1``: rate 1 at integers."""
    log_f = _dip_log_f(False)

    def cocycle(t, s, x):
        return np.array([[math.exp(log_f(s) - log_f(t) + (t - s))]])

    def table(x, n_max):
        k = np.arange(n_max + 1, dtype=float)
        lag = k[None, :] - k[:, None]
        vals = np.where(lag >= 0, np.exp(np.maximum(lag, 0)), 0.0)
        return vals[:, :, None, None]

    sys_ = SkewEvolutionSystem(1, cocycle, translation_semiflow, norm_kind,
                               name="ex_nueis1", x_independent=True, table=table)
    desc = FixtureDescriptor(
        "ex_nueis1", {},
        {"classification": "exponentially instable", "integer_rate": 1.0,
         "bound": "|Phi(t,s,x)v| >= e^{t-s}/f(t) |v|", "source": "worked-example"})
    return sys_, desc


def _nued_exponents(t, s):
    e1 = t * math.sin(t) - s * math.sin(s) - 2 * t + 2 * s
    e2 = 2 * t - 2 * s - 3 * t * math.cos(t) + 3 * s * math.cos(s)
    return e1, e2


def ex_nued(norm_kind="l1"):
    """Diagonal 2x2 cocycle with oscillating stable and unstable exponents."""
    def cocycle(t, s, x):
        e1, e2 = _nued_exponents(t, s)
        return np.diag([math.exp(e1), math.exp(e2)])

    P1 = np.diag([1.0, 0.0])
    P2 = np.diag([0.0, 1.0])
    sys_ = SkewEvolutionSystem(2, cocycle, translation_semiflow, norm_kind,
                               name="ex_nued", x_independent=True)
    desc = FixtureDescriptor(
        "ex_nued", {},
        {"classification": "exponentially dichotomic", "nu": 1.0, "N": "exp(6u)",
         "source": "worked-example"},
        {"pair": (P1, P2)})
    return sys_, desc


# ---------------------------------------------------------------------------
# function-space example
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseFunction:
    """Nondecreasing positive ``f`` with limit ``l``; ``F`` is an antiderivative if known."""

    f: object
    limit: float
    F: object = None

    def integral(self, a, b):
        if self.F is not None:
            return self.F(b) - self.F(a)
        val, _ = integrate.quad(self.f, a, b, epsabs=1e-10, epsrel=1e-12, limit=200)
        return val


DEFAULT_BASE = BaseFunction(f=lambda t: 2.0 - math.exp(-t), limit=2.0,
                            F=lambda t: 2.0 * t + math.exp(-t))

CE_VARIANTS = ("paper", "shifted", "corrected")


def constant_base(value):
    return BaseFunction(f=lambda t: value, limit=value, F=lambda t: value * t)


def ex_ce(variant="corrected", base=None, norm_kind="l1"):
    """Three-dimensional cocycle over the translation flow on shifts of ``f``.

    The state ``u >= 0`` encodes ``x = f_u``, ``x(tau) = f(u + tau)``, and the
    semiflow is ``u -> u + t - s``.  With ``I = int x`` and ``c`` the rate
    coefficient the exponents are ``(-2(t-s)c + I, t-s + I, -(t-s)c + 2I)``.

    ``variant`` selects how ``I`` and ``c`` are read:

    * ``"paper"``: ``I = int_0^t x``, ``c = x(0)``.
    * ``"shifted"``: ``I = int_0^{t-s} x``, ``c = x(0)``.
    * ``"corrected"``: ``I = int_0^{t-s} x``, ``c = f(0)`` fixed.  This is
      the only reading that satisfies the composition law for a
      non-constant ``f``.
    """
    if variant not in CE_VARIANTS:
        raise InputError(f"unknown ex_ce variant {variant!r}; expected one of {CE_VARIANTS}")
    base = base or DEFAULT_BASE
    f0 = base.f(0.0)

    def exponents(t, s, u):
        L = t - s
        I = base.integral(u, u + (t if variant == "paper" else L))
        c = f0 if variant == "corrected" else base.f(u)
        return -2.0 * L * c + I, L + I, -L * c + 2.0 * I

    def cocycle(t, s, u):
        return np.diag(np.exp(exponents(t, s, u)))

    P = [np.diag(r) for r in np.eye(3)]
    sys_ = SkewEvolutionSystem(3, cocycle, translation_semiflow, norm_kind,
                               name=f"ex_ce[{variant}]")
    desc = FixtureDescriptor(
        "ex_ce", {"variant": variant, "limit": base.limit, "f0": f0},
        {"classification": "skew-evolution semiflow",
         "axioms": "pass" if variant == "corrected" else "fail",
         "source": "worked-example"},
        {"triple": tuple(P)})
    return sys_, desc


def ex_nuet(variant="corrected", base=None, norm_kind="l1", u=0.0):
    """The function-space example with its coordinate triple and stated characteristics."""
    sys_, desc = ex_ce(variant, base, norm_kind)
    b = base or DEFAULT_BASE
    x0 = b.f(u)
    l = b.limit
    desc = FixtureDescriptor(
        "ex_nuet", dict(desc.params, state=u),
        {"classification": "exponentially trichotomic",
         "nu": (-x0, -x0, x0, 1.0),
         "N": {"N1": f"exp({x0:g} u)", "N2": f"exp(-{2 * l:g} u)",
               "N3": f"exp({2 * x0:g} u)", "N4": f"exp(-{l:g} u)"},
         "N_callables": {"N1": lambda v: math.exp(v * x0), "N2": lambda v: math.exp(-2 * l * v),
                         "N3": lambda v: math.exp(2 * v * x0), "N4": lambda v: math.exp(-l * v)},
         "source": "worked-example"},
        desc.families)
    return sys_, desc


# ---------------------------------------------------------------------------
# diagonal fixtures
# ---------------------------------------------------------------------------

def diagonal_system(rates, norm_kind="l1", name="diagonal"):
    """Autonomous ``Phi(t,s) = diag(e^{r_i (t-s)})``."""
    rates = np.asarray(rates, dtype=float)

    def cocycle(t, s, x):
        return np.diag(np.exp(rates * (t - s)))

    def table(x, n_max):
        k = np.arange(n_max + 1, dtype=float)
        lag = k[None, :] - k[:, None]
        mask = lag >= 0
        vals = np.exp(np.maximum(lag, 0)[:, :, None] * rates[None, None, :]) * mask[:, :, None]
        out = np.zeros((n_max + 1, n_max + 1, len(rates), len(rates)))
        idx = np.arange(len(rates))
        out[:, :, idx, idx] = vals
        return out

    return SkewEvolutionSystem(len(rates), cocycle, translation_semiflow, norm_kind,
                               name=name, x_independent=True, table=table)


def identity_system(dim=1, norm_kind="l1"):
    """Constant identity cocycle in dimension ``dim``."""
    sys_ = diagonal_system(np.zeros(dim), norm_kind, name="identity")
    desc = FixtureDescriptor("identity", {"dim": dim},
                             {"classification": "bounded, neither stable nor instable",
                              "source": "generator"},
                             {"triple": (np.zeros((dim, dim)), np.zeros((dim, dim)), np.eye(dim))})
    return sys_, desc


def diag_fixture(norm_kind="l1"):
    """``diag(e^{-3(t-s)}, e^{t-s}, 1)`` with the coordinate triple."""
    sys_ = diagonal_system([-3.0, 1.0, 0.0], norm_kind, name="diag_fixture")
    P = tuple(np.diag(r) for r in np.eye(3))
    desc = FixtureDescriptor("diag_fixture", {},
                             {"classification": "exponentially trichotomic",
                              "nu": (-3.0, 0.0, 0.0, 1.0), "source": "generator"},
                             {"triple": P})
    return sys_, desc


def direct_sum(norm_kind="l1"):
    """Block sum of the stable and instable scalar examples."""
    s1, _ = ex_nues1()
    s2, _ = ex_nueis1()

    def cocycle(t, s, x):
        return np.diag([s1.matrix(t, s, x)[0, 0], s2.matrix(t, s, x)[0, 0]])

    def table(x, n_max):
        a = s1.transition_table(x, n_max)[:, :, 0, 0]
        b = s2.transition_table(x, n_max)[:, :, 0, 0]
        out = np.zeros((n_max + 1, n_max + 1, 2, 2))
        out[:, :, 0, 0] = a
        out[:, :, 1, 1] = b
        return out

    sys_ = SkewEvolutionSystem(2, cocycle, translation_semiflow, norm_kind,
                               name="direct_sum", x_independent=True, table=table)
    desc = FixtureDescriptor("direct_sum", {},
                             {"classification": "exponentially dichotomic",
                              "integer_rates": (-3.0, 1.0), "source": "worked-example"},
                             {"pair": (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))})
    return sys_, desc


BUILTINS = {
    "ex_ce": ex_ce,
    "ex_nues1": ex_nues1,
    "ex_nueis1": ex_nueis1,
    "ex_nued": ex_nued,
    "ex_nuet": ex_nuet,
    "diag_fixture": diag_fixture,
    "direct_sum": direct_sum,
    "identity": identity_system,
}


def builtin(name, params=None):
    """Return ``(system, descriptor)`` for a named fixture."""
    params = dict(params or {})
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise InputError(f"unknown builtin {name!r}; available: {sorted(BUILTINS)}") from None
    if "base" in params and isinstance(params["base"], dict):
        spec = params.pop("base")
        if "constant" in spec:
            params["base"] = constant_base(float(spec["constant"]))
        else:
            raise InputError(f"unsupported base function {spec!r}")
    try:
        return factory(**params)
    except TypeError as exc:
        raise InputError(f"bad parameters for builtin {name!r}: {exc}") from None


# ---------------------------------------------------------------------------
# random block cocycles
# ---------------------------------------------------------------------------

ROLE_CHECKS = {
    "stable": lambda a, b: b < 0,
    "central": lambda a, b: a <= 0 <= b,
    "unstable": lambda a, b: a > 0,
}


@dataclass(frozen=True)
class Block:
    size: int
    rates: tuple
    role: str

    def __post_init__(self):
        a, b = (float(r) for r in self.rates)
        if self.size < 1:
            raise InputError("block size must be >= 1")
        if a > b:
            raise InputError(f"rate interval {self.rates} is reversed")
        if self.role not in ROLE_CHECKS:
            raise InputError(f"unknown block role {self.role!r}")
        if not ROLE_CHECKS[self.role](a, b):
            raise InputError(f"rate interval {self.rates} does not fit role {self.role!r}")
        object.__setattr__(self, "rates", (a, b))


@dataclass(frozen=True)
class GeneratorSpec:
    """Seeded block-diagonal cocycle, optionally conjugated.

    ``conjugation`` is ``"none"``, ``"similarity"`` (random matrix with
    condition number at most ``cond_cap``) or ``"orthogonal"``.
    """

    blocks: tuple
    seed: int = 0
    conjugation: str = "none"
    cond_cap: float = 20.0
    length: int = 64

    def __post_init__(self):
        blocks = tuple(b if isinstance(b, Block) else Block(int(b[0]), tuple(b[1]), b[2])
                       for b in self.blocks)
        if not blocks:
            raise InputError("generator needs at least one block")
        if self.conjugation not in ("none", "similarity", "orthogonal"):
            raise InputError(f"unknown conjugation {self.conjugation!r}")
        if self.length < 1:
            raise InputError("generator length must be >= 1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dim(self):
        return sum(b.size for b in self.blocks)

    def to_dict(self):
        return {"blocks": [{"size": b.size, "rates": list(b.rates), "role": b.role}
                           for b in self.blocks],
                "seed": self.seed, "conjugation": self.conjugation,
                "cond_cap": self.cond_cap, "length": self.length}


@dataclass
class GroundTruth:
    conjugator: np.ndarray
    log_rates: np.ndarray          # (length, dim)
    projectors: dict               # role -> matrix
    exponents: dict                # role -> (lo, hi)


def _conjugator(spec, seq):
    d = spec.dim
    if spec.conjugation == "none":
        return np.eye(d)
    for child in seq.spawn(1000):
        rng = np.random.default_rng(child)
        A = rng.standard_normal((d, d))
        if spec.conjugation == "orthogonal":
            Q, R = np.linalg.qr(A)
            return Q * np.sign(np.diag(R))
        S = np.eye(d) + 0.5 * A
        if np.linalg.cond(S) <= spec.cond_cap:
            return S
    raise InputError("could not draw a conjugator under the condition-number cap")


def random_block_cocycle(spec):
    """Build the generated system and its planted ground truth.

    One-step operators are ``A_k = S diag(e^{r_k}) S^{-1}`` with each log-rate
    drawn uniformly from its block interval; ``Phi(m, n) = A_{m-1} ... A_n``.
    Real times interpolate the log-rates piecewise constantly, which keeps the
    composition law exact.
    """
    if not isinstance(spec, GeneratorSpec):
        raise InputError("random_block_cocycle expects a GeneratorSpec")
    seq = np.random.SeedSequence(spec.seed)
    rate_seq, conj_seq = seq.spawn(2)
    rng = np.random.default_rng(rate_seq)
    cols = []
    roles = []
    for b in spec.blocks:
        cols.append(rng.uniform(b.rates[0], b.rates[1], size=(spec.length, b.size)))
        roles += [b.role] * b.size
    log_rates = np.hstack(cols)
    S = _conjugator(spec, conj_seq)
    Sinv = np.linalg.inv(S)
    steps = np.einsum("ab,kb,bc->kac", S, np.exp(log_rates), Sinv)
    full = _kernels.transition_products(steps)
    full.setflags(write=False)
    cum = np.vstack([np.zeros((1, spec.dim)), np.cumsum(log_rates, axis=0)])

    def cumulative(t):
        n = int(math.floor(t))
        if n >= spec.length:
            return cum[spec.length]
        return cum[n] + (t - n) * log_rates[n]

    def cocycle(t, s, x):
        if float(t).is_integer() and float(s).is_integer():
            return full[int(s), int(t)]
        return (S * np.exp(cumulative(t) - cumulative(s))) @ Sinv

    def table(x, n_max):
        if n_max > spec.length:
            raise DomainError(f"horizon {n_max} beyond generated length {spec.length}")
        return full[:n_max + 1, :n_max + 1].copy()

    system = SkewEvolutionSystem(spec.dim, cocycle, translation_semiflow, "l1",
                                 name=f"generated[seed={spec.seed}]", x_independent=True,
                                 table=table, max_time=float(spec.length))
    steps.setflags(write=False)
    system.steps = steps
    projectors = {}
    exponents = {}
    roles = np.array(roles)
    for role in ("stable", "central", "unstable"):
        mask = (roles == role).astype(float)
        projectors[role] = (S * mask) @ Sinv
        intervals = [b.rates for b in spec.blocks if b.role == role]
        if intervals:
            exponents[role] = (min(a for a, _ in intervals), max(b for _, b in intervals))
    truth = GroundTruth(S, log_rates, projectors, exponents)
    return system, truth
