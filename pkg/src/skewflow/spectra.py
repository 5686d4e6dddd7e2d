"""Invariant projector families, dichotomy and trichotomy certificates.

Every split certificate is assembled from per-inequality
:class:`~skewflow.criteria.Certificate` records computed on projected
trajectories ``Phi(k, n, x) P(x) v``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .core import as_projector_map, default_invariance_grid, operator_norm, vector_norm
from .criteria import (IDENTITY, Horizon, fit_decay, fit_growth, gauge_from_spec,
                       norm_tables, ratio_certificate, sum_certificate)
from .errors import InputError, InvarianceError, PreconditionError

INVARIANCE_TOLERANCE = 1e-9
IDEMPOTENCE_TOLERANCE = 1e-10
ALGEBRA_TOLERANCE = 1e-12
NORM_IDENTITY_TOLERANCE = 1e-10
DEFAULT_STATES = (0.0, 1.0, 2.5)


# ---------------------------------------------------------------------------
# invariance
# ---------------------------------------------------------------------------

@dataclass
class InvarianceResult:
    passed: bool
    residual: float
    witness: dict = None

    def to_dict(self):
        return {"passed": bool(self.passed), "residual": float(self.residual),
                "witness": self.witness}


def check_invariance(P, system, grid=None, states=DEFAULT_STATES,
                     tolerance=INVARIANCE_TOLERANCE):
    """Largest relative residual of ``P(phi(t,s,x)) Phi(t,s,x) - Phi(t,s,x) P(x)``."""
    P = as_projector_map(P, system.dim)
    grid = grid or default_invariance_grid(system)
    states = states[:1] if system.x_independent else states
    worst, witness = 0.0, None
    for x in states:
        Px = np.asarray(P(x), dtype=float)
        if Px.shape != (system.dim, system.dim):
            raise InputError(f"projector shape {Px.shape} does not match dim {system.dim}")
        for t, s in grid:
            t, s = system.check_times(t, s)
            A = system.matrix(t, s, x) if t > s else np.eye(system.dim)
            Py = np.asarray(P(system.semiflow(t, s, x)), dtype=float)
            diff = Py @ A - A @ Px
            scale = max(1.0, operator_norm(Py, system.norm_kind) * operator_norm(A, system.norm_kind),
                        operator_norm(A, system.norm_kind) * operator_norm(Px, system.norm_kind))
            r = operator_norm(diff, system.norm_kind) / scale
            if witness is None or r > worst:
                worst = r
                witness = {"t": float(t), "s": float(s), "state": float(x), "residual": r}
    return InvarianceResult(worst <= tolerance, worst, witness)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

FAMILY_SIZES = {"single": 1, "pair": 2, "triple": 3, "quad": 4}


class ProjectorFamily:
    """One to four projector-valued maps ``x -> d x d`` with a compatibility kind."""

    def __init__(self, kind, members, labels=None):
        if kind not in FAMILY_SIZES:
            raise InputError(f"unknown family kind {kind!r}")
        members = list(members)
        if len(members) != FAMILY_SIZES[kind]:
            raise InputError(f"a {kind} needs {FAMILY_SIZES[kind]} projectors, got {len(members)}")
        self.kind = kind
        self.members = tuple(as_projector_map(m) for m in members)
        prefix = "R" if kind == "quad" else "P"
        self.labels = tuple(labels) if labels else tuple(f"{prefix}{i + 1}" for i in range(len(members)))
        self.dim = np.asarray(self.members[0](0.0)).shape[0]

    def at(self, x):
        return [np.asarray(m(x), dtype=float) for m in self.members]

    def __getitem__(self, i):
        return self.members[i]

    def __len__(self):
        return len(self.members)

    def __repr__(self):
        return f"ProjectorFamily({self.kind!r}, labels={self.labels})"


def as_family(obj, kind):
    if isinstance(obj, ProjectorFamily):
        if obj.kind != kind:
            raise InputError(f"expected a {kind} family, got {obj.kind}")
        return obj
    return ProjectorFamily(kind, obj)


def _infer_family(obj):
    if isinstance(obj, ProjectorFamily):
        return obj
    kinds = {n: k for k, n in FAMILY_SIZES.items()}
    members = list(obj)
    if len(members) not in kinds:
        raise InputError(f"cannot infer a family kind from {len(members)} projectors")
    return ProjectorFamily(kinds[len(members)], members)


def coordinate_family(kind, dim, index_sets):
    """Family of coordinate projectors; ``index_sets[i]`` lists the kept axes."""
    mats = []
    for idx in index_sets:
        d = np.zeros(dim)
        d[list(idx)] = 1.0
        mats.append(np.diag(d))
    return ProjectorFamily(kind, mats)


@dataclass
class CompatibilityReport:
    kind: str
    conditions: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c["passed"] for c in self.conditions.values() if c.get("required", True))

    def failed(self):
        return [k for k, c in self.conditions.items() if c.get("required", True) and not c["passed"]]

    def to_dict(self):
        return {"kind": self.kind, "passed": self.passed, "conditions": self.conditions}


def _rel(residual, scale):
    return float(residual) / max(1.0, float(scale))


def _record(report, name, residual, tol, required=True, **extra):
    prev = report.conditions.get(name)
    if prev is not None:
        residual = max(residual, prev["residual"])
    report.conditions[name] = dict({"passed": residual <= tol, "residual": float(residual),
                                    "tolerance": tol, "required": required}, **extra)


def _sample_vectors(dim, seed=0, count=8):
    rng = np.random.default_rng([seed, dim])
    return np.vstack([np.eye(dim), rng.standard_normal((count, dim))])


def check_algebra(family, states=DEFAULT_STATES, vectors=None, norm_kind="l2"):
    """Idempotence and the kind-specific identities, without any cocycle."""
    family = _infer_family(family)
    report = CompatibilityReport(family.kind)
    d = family.dim
    eye = np.eye(d)
    V = _sample_vectors(d) if vectors is None else np.asarray(vectors, dtype=float)
    for x in states:
        mats = family.at(x)
        for lab, M in zip(family.labels, mats):
            nrm = np.linalg.norm(M, 2)
            _record(report, f"idempotent[{lab}]", _rel(np.linalg.norm(M @ M - M, 2), nrm * nrm),
                    IDEMPOTENCE_TOLERANCE)
        if family.kind in ("pair", "triple"):
            total = sum(mats)
            _record(report, "sum_identity", np.abs(total - eye).max(), ALGEBRA_TOLERANCE)
            worst = 0.0
            for i in range(len(mats)):
                for j in range(len(mats)):
                    if i != j:
                        sc = np.abs(mats[i]).max() * np.abs(mats[j]).max()
                        worst = max(worst, _rel(np.abs(mats[i] @ mats[j]).max(), sc))
            _record(report, "products_zero", worst, ALGEBRA_TOLERANCE)
        elif family.kind == "quad":
            R1, R2, R3, R4 = mats
            _record(report, "pc1", max(np.abs(R1 + R3 - eye).max(), np.abs(R2 + R4 - eye).max()),
                    ALGEBRA_TOLERANCE)
            sc12 = np.abs(R1).max() * np.abs(R2).max()
            sc34 = np.abs(R3).max() * np.abs(R4).max()
            r = max(_rel(np.abs(R1 @ R2).max(), sc12), _rel(np.abs(R2 @ R1).max(), sc12),
                    _rel(np.abs(R3 @ R4 - R4 @ R3).max(), sc34))
            _record(report, "pc2", r, ALGEBRA_TOLERANCE)
            R34 = R3 @ R4
            pairs = {"pc3": (R1, R2), "pc4": (R1, R34), "pc5": (R2, R34)}
            for name, (A, B) in pairs.items():
                for kind, required in (("l2", True), (norm_kind, False)):
                    if not required and kind == "l2":
                        continue
                    worst = 0.0
                    for v in V:
                        lhs = vector_norm((A + B) @ v, kind) ** 2
                        rhs = vector_norm(A @ v, kind) ** 2 + vector_norm(B @ v, kind) ** 2
                        worst = max(worst, _rel(abs(lhs - rhs), max(lhs, rhs)))
                    key = name if required else f"{name}[{kind}]"
                    _record(report, key, worst, NORM_IDENTITY_TOLERANCE, required=required,
                            norm=kind)
    return report


def check_compatible(family, system, grid=None, states=DEFAULT_STATES, vectors=None):
    """Invariance of every member plus the algebra of the family kind.

    Norm identities of a quad are judged in l2; the same identities in the
    system norm are recorded as non-binding diagnostics.
    """
    if family.dim != system.dim:
        raise InputError(f"family of dim {family.dim} for a system of dim {system.dim}")
    report = check_algebra(family, states, vectors, system.norm_kind)
    for lab, P in zip(family.labels, family.members):
        res = check_invariance(P, system, grid, states)
        report.conditions[f"invariant[{lab}]"] = {
            "passed": res.passed, "residual": res.residual, "tolerance": INVARIANCE_TOLERANCE,
            "required": True, "witness": res.witness}
    return report


def _require_compatible(family, system, check):
    if not check:
        return None
    report = check_compatible(family, system)
    if not report.passed:
        bad = report.failed()
        inv = [k for k in bad if k.startswith("invariant")]
        if inv:
            raise InvarianceError(f"projector family not invariant: {', '.join(inv)}",
                                  report.conditions[inv[0]].get("witness"))
        raise InputError(f"projector {family.kind} not compatible: {', '.join(bad)}")
    return report


# ---------------------------------------------------------------------------
# split certificates
# ---------------------------------------------------------------------------

@dataclass
class SplitCertificate:
    """Several per-projector certificates sharing one coefficient sequence.

    ``coefficients`` is the elementwise maximum of the parts' sequences;
    each part keeps its own sequence for diagnostics.
    """

    kind: str
    holds: bool
    parts: dict
    exponents: dict
    coefficients: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def witness(self):
        for name, c in self.parts.items():
            if not c.holds:
                return dict(c.witness or {}, part=name)
        return None

    @property
    def max_ratio(self):
        return np.max(np.vstack([c.max_ratio for c in self.parts.values()]), axis=0)

    @property
    def anchor_ok(self):
        return np.all(np.vstack([c.anchor_ok for c in self.parts.values()]), axis=0)

    def rows(self):
        mr, ok = self.max_ratio, self.anchor_ok
        return [(n, float(self.coefficients[n]), float(mr[n]), int(bool(ok[n])))
                for n in range(len(self.coefficients))]

    def to_dict(self):
        return {
            "kind": self.kind,
            "holds": bool(self.holds),
            "exponents": {k: float(v) for k, v in self.exponents.items()},
            "coefficients": [float(c) for c in self.coefficients],
            "witness": self.witness,
            "parts": {k: c.to_dict() for k, c in self.parts.items()},
            "diagnostics": self.diagnostics,
        }


def _assemble(kind, parts, exponents, diagnostics=None):
    coeff = np.max(np.vstack([c.coefficients for c in parts.values()]), axis=0)
    holds = all(c.holds for c in parts.values())
    return SplitCertificate(kind, holds, parts, exponents, coeff, diagnostics or {})


def _tables(system, horizon, P):
    return norm_tables(system, horizon, projector=P)


def dichotomy_certificate(system, pair, nu1, nu2, horizon=None, check=True):
    """Fit ``a_n`` for the stable and unstable inequalities of a pair.

    ``||Phi(m,n,x)P1 v|| <= a_n ||P1 v|| e^{nu1(m-n)}`` and
    ``||P2 v|| <= a_m ||Phi(m,n,x)P2 v|| e^{-nu2(m-n)}``.
    """
    nu1, nu2 = float(nu1), float(nu2)
    if not (nu1 <= 0.0 <= nu2):
        raise InputError(f"dichotomy exponents need nu1 <= 0 <= nu2, got ({nu1}, {nu2})")
    pair = as_family(pair, "pair")
    horizon = horizon or Horizon()
    _require_compatible(pair, system, check)
    P1, P2 = pair.members
    parts = {
        "d1": ratio_certificate("d1", _tables(system, horizon, P1), -nu1, "start", False,
                                horizon, nu1),
        "d2": ratio_certificate("d2", _tables(system, horizon, P2), nu2, "end", False,
                                horizon, nu2),
    }
    return _assemble("dichotomy", parts, {"nu1": nu1, "nu2": nu2})


def dichotomy_sum_criterion(system, pair, rho1, rho2, gauge=IDENTITY, horizon=None, check=True):
    """Datko-type sums on the stable part and instability sums on the unstable part.

    ``rho1 > 0`` weights ``e^{rho1(k-n)}``; ``rho2 < 0`` weights ``e^{-rho2(m-k)}``.
    """
    rho1, rho2 = float(rho1), float(rho2)
    if not (rho1 > 0 > rho2):
        raise InputError(f"dichotomy sums need rho1 > 0 > rho2, got ({rho1}, {rho2})")
    pair = as_family(pair, "pair")
    gauge = gauge_from_spec(gauge)
    horizon = horizon or Horizon()
    _require_compatible(pair, system, check)
    P1, P2 = pair.members
    parts = {
        "ed1": sum_certificate("ed1", _tables(system, horizon, P1), rho1, "start", False,
                               horizon, rho1, gauge),
        "ed2": sum_certificate("ed2", _tables(system, horizon, P2), -rho2, "end", False,
                               horizon, rho2, gauge),
    }
    return _assemble("dichotomy_sum", parts, {"rho1": rho1, "rho2": rho2},
                     {"gauge": gauge.to_spec()})


def _check_trichotomy_order(nus):
    if len(nus) != 4:
        raise InputError(f"trichotomy needs four exponents, got {len(nus)}")
    n1, n2, n3, n4 = (float(v) for v in nus)
    if not (n1 <= n2 <= 0.0 <= n3 <= n4):
        raise InputError(f"trichotomy exponents need nu1 <= nu2 <= 0 <= nu3 <= nu4, got {nus}")
    return n1, n2, n3, n4


def trichotomy_certificate(system, triple, nus, horizon=None, check=True):
    """Three-index inequalities over ``n <= p <= m``.

    The stable part decays at least like ``e^{nu1}``, the unstable part
    grows at least like ``e^{nu4}`` and the central part is bounded from
    below by ``e^{nu2}`` and from above by ``e^{nu3}``.
    """
    n1, n2, n3, n4 = _check_trichotomy_order(nus)
    triple = as_family(triple, "triple")
    horizon = horizon or Horizon()
    _require_compatible(triple, system, check)
    P1, P2, P3 = triple.members
    t3 = _tables(system, horizon, P3)
    parts = {
        "t1": ratio_certificate("t1", _tables(system, horizon, P1), -n1, "start", True, horizon, n1),
        "t2": ratio_certificate("t2", _tables(system, horizon, P2), n4, "end", True, horizon, n4),
        "t3": ratio_certificate("t3", t3, n2, "end", True, horizon, n2),
        "t4": ratio_certificate("t4", t3, -n3, "start", True, horizon, n3),
    }
    return _assemble("trichotomy", parts, {"nu1": n1, "nu2": n2, "nu3": n3, "nu4": n4})


def trichotomy_sum_criterion(system, triple, rhos, horizon=None, gauge=IDENTITY, check=True):
    """Four summation inequalities, given growth on ``P1`` and decay on ``P2``.

    Raises :class:`PreconditionError` with the envelope witness when either
    standing hypothesis fails on the samples.
    """
    if len(rhos) != 4:
        raise InputError(f"trichotomy sums need four rates, got {len(rhos)}")
    r1, r2, r3, r4 = (float(r) for r in rhos)
    if not all(r > 0 and math.isfinite(r) for r in (r1, r2, r3, r4)):
        raise InputError(f"trichotomy sum rates must all be > 0, got {rhos}")
    triple = as_family(triple, "triple")
    gauge = gauge_from_spec(gauge)
    horizon = horizon or Horizon()
    _require_compatible(triple, system, check)
    P1, P2, P3 = triple.members
    growth = fit_growth(system, horizon, projector=P1)
    if not growth.holds:
        raise PreconditionError("stable part has no exponential growth envelope", growth.witness)
    decay = fit_decay(system, horizon, projector=P2)
    if not decay.holds:
        raise PreconditionError("unstable part has no exponential decay envelope", decay.witness)
    t3 = _tables(system, horizon, P3)
    parts = {
        "t1'": sum_certificate("t1'", _tables(system, horizon, P1), r1, "start", False,
                               horizon, r1, gauge),
        "t2'": sum_certificate("t2'", _tables(system, horizon, P2), r2, "end", False,
                               horizon, r2, gauge),
        "t3'": sum_certificate("t3'", t3, -r3, "start", True, horizon, r3, gauge),
        "t4'": sum_certificate("t4'", t3, -r4, "end", True, horizon, r4, gauge),
    }
    diag = {"gauge": gauge.to_spec(),
            "growth_omega_max": float(np.nanmax(growth.omega)),
            "decay_omega_max": float(np.nanmax(decay.omega))}
    return _assemble("trichotomy_sum", parts, {"rho1": r1, "rho2": r2, "rho3": r3, "rho4": r4},
                     diag)


# ---------------------------------------------------------------------------
# three <-> four projectors
# ---------------------------------------------------------------------------

def _compose(f, g):
    if hasattr(f, "matrix") and hasattr(g, "matrix"):
        return as_projector_map(f.matrix @ g.matrix)
    return lambda x: np.asarray(f(x), dtype=float) @ np.asarray(g(x), dtype=float)


def _complement(f, dim):
    eye = np.eye(dim)
    if hasattr(f, "matrix"):
        return as_projector_map(eye - f.matrix)
    return lambda x: eye - np.asarray(f(x), dtype=float)


def four_from_three(triple, states=DEFAULT_STATES):
    """``R1 = P1, R2 = P2, R3 = I - P1, R4 = I - P2``."""
    triple = as_family(triple, "triple")
    rep = check_algebra(triple, states)
    if not rep.passed:
        raise InputError(f"triple not compatible: {', '.join(rep.failed())}")
    P1, P2, _ = triple.members
    d = triple.dim
    return ProjectorFamily("quad", [P1, P2, _complement(P1, d), _complement(P2, d)])


def three_from_four(quad, states=DEFAULT_STATES):
    """``P1 = R1, P2 = R2, P3 = R3 R4``."""
    quad = as_family(quad, "quad")
    rep = check_algebra(quad, states)
    bad = [k for k in rep.failed() if k not in ("pc3", "pc4", "pc5")]
    if bad:
        raise InputError(f"quad not compatible: {', '.join(bad)}")
    R1, R2, R3, R4 = quad.members
    return ProjectorFamily("triple", [R1, R2, _compose(R3, R4)])


def four_projector_certificate(system, quad, mu, nu, horizon=None, check=True, cross_check=True):
    """Two-index inequalities in ``(m, p)`` for a compatible quad, ``mu > nu > 0``.

    With ``cross_check`` the trichotomy certificate of ``three_from_four(quad)``
    under ``(-nu, -nu, mu, mu)`` is computed too and the agreement recorded.
    """
    mu, nu = float(mu), float(nu)
    if not (mu > nu > 0):
        raise InputError(f"four-projector rates need mu > nu > 0, got mu={mu}, nu={nu}")
    quad = as_family(quad, "quad")
    horizon = horizon or Horizon()
    _require_compatible(quad, system, check)
    R1, R2, R3, R4 = quad.members
    parts = {
        "t1''": ratio_certificate("t1''", _tables(system, horizon, R1), nu, "start", False,
                                  horizon, nu),
        "t2''": ratio_certificate("t2''", _tables(system, horizon, R2), mu, "end", False,
                                  horizon, mu),
        "t3''": ratio_certificate("t3''", _tables(system, horizon, R3), -nu, "end", False,
                                  horizon, nu),
        "t4''": ratio_certificate("t4''", _tables(system, horizon, R4), -mu, "start", False,
                                  horizon, mu),
    }
    cert = _assemble("four_projector", parts, {"mu": mu, "nu": nu})
    if cross_check:
        tri = trichotomy_certificate(system, three_from_four(quad), (-nu, -nu, mu, mu),
                                     horizon, check=False)
        cert.diagnostics["trichotomy_holds"] = tri.holds
        cert.diagnostics["agrees_with_trichotomy"] = tri.holds == cert.holds
    return cert


# ---------------------------------------------------------------------------
# stated characteristics
# ---------------------------------------------------------------------------

def check_trichotomy_characteristics(system, triple, nus, N, n_max=30, states=(0.0,)):
    """Check the real-time trichotomy inequalities with given ``N1..N4``.

    ``N`` maps ``"N1".."N4"`` to callables of the time argument.  Times are
    sampled on ``0 <= t0 <= s <= t <= n_max`` integers and vectors are the
    coordinate axes.  Returns, per inequality, whether it holds and the
    worst log-slack (negative means violated) with its location.
    """
    n1, n2, n3, n4 = _check_trichotomy_order(nus)
    triple = as_family(triple, "triple")
    P1, P2, P3 = triple.members
    # (projector, coefficient name, exponent, coefficient anchored at s?, upper bound?)
    specs = {
        "stable": (P1, "N1", n1, True, True),
        "unstable": (P2, "N4", n4, False, False),
        "central_lower": (P3, "N2", n2, False, False),
        "central_upper": (P3, "N3", n3, True, True),
    }
    eye = np.eye(system.dim)
    out = {}
    for key, (P, name, nu, at_s, upper) in specs.items():
        worst, where = math.inf, None
        for x in states:
            table = system.transition_table(x, n_max) @ np.asarray(P(x), dtype=float)
            for v in eye:
                y = np.array([[vector_norm(table[a, b] @ v, system.norm_kind) if b >= a else 0.0
                               for b in range(n_max + 1)] for a in range(n_max + 1)])
                with np.errstate(divide="ignore"):
                    ly = np.log(y)
                for t0 in range(n_max + 1):
                    for s in range(t0, n_max + 1):
                        for t in range(s, n_max + 1):
                            if y[t0, s] == 0 and y[t0, t] == 0:
                                continue
                            logN = math.log(N[name](s if at_s else t))
                            if upper:
                                slack = logN + ly[t0, s] + nu * (t - s) - ly[t0, t]
                            else:
                                slack = logN + ly[t0, t] - ly[t0, s] - nu * (t - s)
                            if slack < worst:
                                worst = slack
                                where = {"t": t, "s": s, "t0": t0, "state": float(x),
                                         "vector": [float(c) for c in v]}
        out[key] = {"coefficient": name, "holds": bool(worst >= -1e-12),
                    "worst_log_slack": float(worst), "at": where}
    return out
