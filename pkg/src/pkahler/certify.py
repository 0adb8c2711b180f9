"""Existence of "closed" transverse invariant forms, or dual positive currents.

For a model, a degree p and a property kind, the closed (p,p)-forms allowed by
the kind form a rational subspace V of real invariant (p,p)-forms.  A
transverse element of V is searched by a cutting-plane LP; the dual side
looks for a convex combination T of simple strongly positive invariant
(k,k)-forms (k = n - p) that annihilates V, and then solves exactly for the
primitive exhibiting T as "exact" in the matching flavor.  All results are
statements about invariant forms ("invariant level").
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np
from scipy.optimize import linprog

from . import linalg
from .cohomology import aeppli_boundary, exactness_certificate, i_ddbar, operator_rows
from .cones import (SolverConfig, _random_simple_units, dual_matrix, form_to_hermitian, min_simple_quadratic,
                    wp_membership)
from .exterior import ComplexParam, Form, multi_indices, pair_top, phi, real_basis, real_basis_degree, sigma, wedge
from .lie import LieModel, del_, delbar, differential
from .scalar import I as IMAG, GaussianRational, format_fraction

log = logging.getLogger(__name__)

__all__ = [
    "KINDS",
    "PropertyKind",
    "ExistenceCertificate",
    "DualCertificate",
    "Undecided",
    "CertifyBudget",
    "closed_subspace",
    "certify",
    "verify_certificate",
    "equivalence_report",
    "check_balanced_exactness",
    "rational_generators",
]

KINDS = ("pK", "pWK", "pS", "pPL")


@dataclass(frozen=True)
class PropertyKind:
    tag: str
    closedness: str
    dual_flavor: str

    @classmethod
    def of(cls, tag: str) -> "PropertyKind":
        table = {
            "pK": ("d Omega = 0", "T = del conj(S) + delbar S"),
            "pWK": ("del Omega = del delbar alpha", "T = del conj(S) + delbar S with del delbar S = 0"),
            "pS": ("Omega = Psi^(p,p) with d Psi = 0", "T = d S"),
            "pPL": ("del delbar Omega = 0", "T = i del delbar A"),
        }
        key = {k.lower(): k for k in table}.get(tag.lower())
        if key is None:
            raise ValueError(f"unknown property kind {tag!r}; expected one of {', '.join(KINDS)}")
        return cls(key, *table[key])


@dataclass(frozen=True)
class CertifyBudget:
    rounds: int = 200
    max_generators: int = 10_000


# closed subspaces -----------------------------------------------------------------


def _merge_columns(blocks: list[tuple[list[dict], int]]) -> tuple[list[dict], int]:
    """Horizontally concatenate sparse row blocks with the given column counts."""
    nrows = len(blocks[0][0])
    out = [dict() for _ in range(nrows)]
    offset = 0
    for rows, ncols in blocks:
        for r, row in enumerate(rows):
            for c, v in row.items():
                out[r][offset + c] = v
        offset += ncols
    return out, offset


def _negate(rows: list[dict]) -> list[dict]:
    return [{c: -v for c, v in r.items()} for r in rows]


def closed_subspace(model: LieModel, p: int, kind: str) -> list[Form]:
    """Exact basis of the real invariant (p,p)-forms satisfying the closedness schema."""
    kind = PropertyKind.of(kind).tag
    key = ("closed", p, kind)
    hit = model._cache.get(key)
    if hit is None:
        hit = _closed_subspace(model, p, kind)
        model._cache[key] = hit
    return hit


def _closed_subspace(model: LieModel, p: int, kind: str) -> list[Form]:
    n = model.n
    src = real_basis(n, p)
    if kind == "pK":
        rows = operator_rows(lambda a: differential(model, a), src, real_basis_degree(n, 2 * p + 1))
        vecs = linalg.nullspace(rows, src.dim)
    elif kind == "pPL":
        rows = operator_rows(lambda a: i_ddbar(model, a), src, real_basis(n, p + 1))
        vecs = linalg.nullspace(rows, src.dim)
    elif kind == "pWK":
        tgt = ComplexParam(n, [(p + 1, p)])
        aux = ComplexParam(n, [(p, p - 1)])
        r1 = operator_rows(lambda a: del_(model, a), src, tgt)
        r2 = operator_rows(lambda a: del_(model, delbar(model, a)), aux, tgt)
        rows, total = _merge_columns([(r1, src.dim), (_negate(r2), aux.dim)])
        vecs = [v[:src.dim] for v in linalg.nullspace(rows, total)]
    elif kind == "pS":
        big = real_basis_degree(n, 2 * p)
        rows = operator_rows(lambda a: differential(model, a), big, real_basis_degree(n, 2 * p + 1))
        vecs = [src.coords(big.form(v).bidegree_component(p, p)) for v in linalg.nullspace(rows, big.dim)]
    else:
        raise ValueError(kind)
    R, _ = linalg.span_basis(vecs, src.dim)
    return [src.form([r.get(c, Fraction(0)) for c in range(src.dim)]) for r in R]


# generators ------------------------------------------------------------------------


def _eta_form(n: int, factors: list[Form]) -> Form:
    out = Form.scalar(n, 1)
    for f in factors:
        out = wedge(out, f)
    return out


def rational_generators(n: int, k: int) -> list[Form]:
    """Simple (k,0)-forms with Gaussian-rational coefficients.

    Coordinate products ``phi_K`` plus single-slot perturbations
    ``(phi_a + c phi_b) ^ phi_(K - a)`` with ``c`` in {1, -1, i, -i}.
    """
    out: list[Form] = []
    seen = set()
    units = [GaussianRational(1), GaussianRational(-1), IMAG, -IMAG]
    for K in multi_indices(n, k):
        cand = [_eta_form(n, [phi(n, j) for j in K])]
        for t, a in enumerate(K):
            for b in range(1, n + 1):
                if b in K:
                    continue
                for c in units:
                    fs = [phi(n, j) for j in K]
                    fs[t] = phi(n, a) + phi(n, b) * c
                    cand.append(_eta_form(n, fs))
        for e in cand:
            if e.is_zero():
                continue
            key = tuple(sorted(e.items()))
            if key not in seen:
                seen.add(key)
                out.append(e)
    return out


def _eta_vector(eta: Form, n: int, k: int) -> np.ndarray:
    return np.array([complex(eta[(K, ())]) for K in multi_indices(n, k)], dtype=complex)


def _generator_form(eta: Form, k: int) -> Form:
    return wedge(eta, eta.conjugate()) * sigma(k)


# results ---------------------------------------------------------------------------


@dataclass
class ExistenceCertificate:
    model: str
    p: int
    kind: str
    form: Form
    auxiliary: Form | None
    margin: float
    rounds: int
    level: str = "invariant"

    status = "existence"

    def to_json(self) -> dict:
        return {
            "status": self.status, "model": self.model, "p": self.p, "kind": self.kind, "level": self.level,
            "form": self.form.to_json(), "auxiliary": self.auxiliary.to_json() if self.auxiliary is not None else None,
            "margin": self.margin, "closedness_residual": "0", "rounds": self.rounds,
        }


@dataclass
class DualCertificate:
    model: str
    p: int
    kind: str
    weights: list[Fraction]
    generators: list[Form]  # simple (k,0)-forms eta_s
    current: Form  # T = sum w_s sigma_k eta_s ^ conj(eta_s)
    primitive: Form
    level: str = "invariant"

    status = "nonexistence"

    def to_json(self) -> dict:
        return {
            "status": self.status, "model": self.model, "p": self.p, "kind": self.kind, "level": self.level,
            "weights": [format_fraction(w) for w in self.weights],
            "generators": [g.to_json() for g in self.generators],
            "current": self.current.to_json(), "primitive": self.primitive.to_json(),
            "membership_residual": "0",
        }


@dataclass
class Undecided:
    model: str
    p: int
    kind: str
    diagnostics: dict = field(default_factory=dict)
    level: str = "invariant"

    status = "undecided"

    def to_json(self) -> dict:
        return {"status": self.status, "model": self.model, "p": self.p, "kind": self.kind, "level": self.level,
                "diagnostics": self.diagnostics}


CertifyResult = Union[ExistenceCertificate, DualCertificate, Undecided]


# dual side -------------------------------------------------------------------------


def _dual_primitive(model: LieModel, kind: str, T: Form, k: int) -> Form | None:
    """Primitive exhibiting T as exact in the flavor of the kind, or None."""
    n = model.n
    if kind == "pK":
        res = exactness_certificate(model, T, "aeppli")
        return res.primitive if res.exact else None
    if kind == "pS":
        res = exactness_certificate(model, T, "d")
        return res.primitive if res.exact else None
    if kind == "pPL":
        res = exactness_certificate(model, T, "ddbar")
        return res.primitive if res.exact else None
    # pWK: T = del conj(S) + delbar S with del delbar S = 0
    src = ComplexParam(n, [(k, k - 1)])
    t1 = real_basis(n, k)
    t2 = ComplexParam(n, [(k + 1, k)])
    r1 = operator_rows(lambda s: aeppli_boundary(model, s), src, t1)
    r2 = operator_rows(lambda s: del_(model, delbar(model, s)), src, t2)
    x = linalg.solve(r1 + r2, list(t1.coords(T)) + [0] * t2.dim, src.dim)
    if x is None:
        return None
    S = src.form(x)
    if aeppli_boundary(model, S) != T or not del_(model, delbar(model, S)).is_zero():
        raise AssertionError("pWK primitive failed exact re-derivation")
    return S


def _try_dual(model: LieModel, p: int, kind: str, basis: list[Form], etas: list[Form]) -> DualCertificate | None:
    n, k = model.n, model.n - p
    gens = [_generator_form(e, k) for e in etas]
    m = len(basis)
    # exact pairings; every entry is real for real forms
    a = [[pair_top(B, g) for B in basis] for g in gens]
    A_eq = np.array([[float(complex(v).real) for v in row] for row in a]).T.reshape(m, len(gens))
    A_eq = np.vstack([A_eq, np.ones((1, len(gens)))])
    b_eq = np.zeros(m + 1)
    b_eq[-1] = 1.0
    lp = linprog(np.zeros(len(gens)), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * len(gens), method="highs")
    if lp.status != 0:
        return None
    support = [s for s in range(len(gens)) if lp.x[s] > 1e-12]
    rows = [[a[s][i] for s in support] for i in range(m)] + [[1] * len(support)]
    rows = [[Fraction(v.re) if isinstance(v, GaussianRational) else Fraction(v) for v in r] for r in rows]
    lam = linalg.solve(rows, [0] * m + [1], len(support))
    if lam is None or any(x < 0 for x in lam):
        log.debug("dual LP support did not yield a nonnegative exact solution")
        return None
    keep = [(s, w) for s, w in zip(support, lam) if w]
    T = Form.zero(n)
    for s, w in keep:
        T = T + gens[s] * w
    if any(pair_top(B, T) != 0 for B in basis):
        raise AssertionError("dual combination does not annihilate the closed subspace")
    prim = _dual_primitive(model, kind, T, k)
    if prim is None:
        log.debug("annihilating current is not exact in the %s flavor", kind)
        return None
    return DualCertificate(model.name, p, kind, [w for _, w in keep], [etas[s] for s, _ in keep], T, prim)


# primal side -----------------------------------------------------------------------


def _auxiliary(model: LieModel, p: int, kind: str, omega: Form) -> Form | None:
    n = model.n
    if kind == "pWK":
        aux = ComplexParam(n, [(p, p - 1)])
        tgt = ComplexParam(n, [(p + 1, p)])
        rows = operator_rows(lambda a: del_(model, delbar(model, a)), aux, tgt)
        x = linalg.solve(rows, tgt.coords(del_(model, omega)), aux.dim)
        return None if x is None else aux.form(x)
    if kind == "pS":
        # Psi = Omega + R with R real, free of (p,p) terms, d R = -d Omega
        bds = [(a, 2 * p - a) for a in range(max(0, 2 * p - n), min(2 * p, n) + 1) if a != p]
        if not bds:
            return omega if differential(model, omega).is_zero() else None
        src = _real_basis_bidegrees(n, bds)
        tgt = real_basis_degree(n, 2 * p + 1)
        rows = operator_rows(lambda a: differential(model, a), src, tgt)
        x = linalg.solve(rows, tgt.coords(-differential(model, omega)), src.dim)
        return None if x is None else omega + src.form(x)
    return None


def _real_basis_bidegrees(n: int, bds):
    from .exterior import RealBasis

    return RealBasis(n, bds)


def _check_closed(model: LieModel, p: int, kind: str, omega: Form, aux: Form | None) -> bool:
    if kind == "pK":
        return differential(model, omega).is_zero()
    if kind == "pPL":
        return i_ddbar(model, omega).is_zero()
    if kind == "pWK":
        return aux is not None and del_(model, omega) == del_(model, delbar(model, aux))
    if kind == "pS":
        return (aux is not None and differential(model, aux).is_zero()
                and aux.bidegree_component(p, p) == omega and aux.is_real())
    return False


def _rationalize(c: np.ndarray, denominators=(10, 100, 1000, 10**4, 10**6, 10**8)):
    for D in denominators:
        yield [Fraction(float(x)).limit_denominator(D) for x in c]


def certify(model: LieModel, p: int, kind: str, config: SolverConfig = SolverConfig(),
            budget: CertifyBudget = CertifyBudget()) -> CertifyResult:
    """Closed transverse invariant form, dual current certificate, or Undecided."""
    n = model.n
    if not 1 <= p <= n - 1:
        raise ValueError(f"need 1 <= p <= n-1, got p={p}, n={n}")
    kind = PropertyKind.of(kind).tag
    k = n - p
    basis = closed_subspace(model, p, kind)
    m = len(basis)
    diag: dict = {"closed_subspace_dim": m}

    # dual first: ties go to the dual certificate
    etas_q = rational_generators(n, k)
    dual = _try_dual(model, p, kind, basis, etas_q)
    diag["rational_generators"] = len(etas_q)
    if dual is not None:
        return dual
    if m == 0:
        diag["reason"] = "closed subspace is zero and no exact dual current was found"
        return Undecided(model.name, p, kind, diag)

    A = np.stack([dual_matrix(form_to_hermitian(B.to_float(), p), n, p) for B in basis])
    pool = np.concatenate([np.stack([_eta_vector(e, n, k) for e in etas_q]),
                           _random_simple_units(n, k, config.samples, np.random.default_rng([config.seed, 101]))])
    pool /= np.linalg.norm(pool, axis=1, keepdims=True)
    rounds_used = 0
    for rnd in range(budget.rounds):
        rounds_used = rnd + 1
        a = np.real(np.einsum("sk,ikl,sl->si", pool.conj(), A, pool))
        c_obj = np.zeros(m + 1)
        c_obj[-1] = -1.0
        A_ub = np.hstack([-a, np.ones((len(pool), 1))])
        lp = linprog(c_obj, A_ub=A_ub, b_ub=np.zeros(len(pool)), bounds=[(-1, 1)] * m + [(None, None)],
                     method="highs")
        if lp.status != 0:
            diag["reason"] = f"primal LP status {lp.status}"
            break
        t = -lp.fun
        if t <= config.tol:
            diag["reason"] = "no transverse element of the closed subspace on the generator pool"
            diag["lp_margin"] = t
            break
        c = lp.x[:m]
        Ac = np.tensordot(c, A, axes=1)
        res = min_simple_quadratic(Ac, n, k, config.restarts, np.random.default_rng([config.seed, 200 + rnd]),
                                   config.max_iter)
        log.debug("round %d: lp margin %.3g, descent min %.3g", rnd, t, res.value)
        if res.value >= config.eps:
            cert = _finalize_primal(model, p, kind, basis, A, c, config, rounds_used)
            if cert is not None:
                return cert
        new = [res.eta] if res.etas is None else [e for e, v in zip(res.etas, res.values) if v < t / 2]
        new = np.array(new or [res.eta])
        new /= np.linalg.norm(new, axis=1, keepdims=True)
        if len(pool) + len(new) > budget.max_generators:
            diag["reason"] = "generator budget exhausted"
            break
        pool = np.concatenate([pool, new])
    else:
        diag["reason"] = "round budget exhausted"
    diag["rounds"] = rounds_used
    diag["pool_size"] = int(len(pool))
    return Undecided(model.name, p, kind, diag)


def _finalize_primal(model, p, kind, basis, A, c, config: SolverConfig, rounds) -> ExistenceCertificate | None:
    n, k = model.n, model.n - p
    for cq in _rationalize(c):
        Acq = np.tensordot(np.array([float(x) for x in cq]), A, axes=1)
        quick = min_simple_quadratic(Acq, n, k, config.restarts, np.random.default_rng([config.seed, 300]),
                                     config.max_iter)
        if quick.value < config.eps:
            continue
        omega = Form.zero(n)
        for x, B in zip(cq, basis):
            if x:
                omega = omega + B * x
        aux = _auxiliary(model, p, kind, omega)
        if not _check_closed(model, p, kind, omega, aux):
            raise AssertionError("rationalized candidate failed exact closedness")
        rep = wp_membership(omega, config)
        if rep.verdict != "strict-member":
            continue
        return ExistenceCertificate(model.name, p, kind, omega, aux, rep.margin, rounds)
    return None


def verify_certificate(model: LieModel, cert: CertifyResult, config: SolverConfig = SolverConfig()) -> bool:
    """Independent re-check of an emitted certificate."""
    if isinstance(cert, ExistenceCertificate):
        if not _check_closed(model, cert.p, cert.kind, cert.form, cert.auxiliary):
            return False
        if not cert.form.is_real():
            return False
        check = SolverConfig(eps=config.eps, tol=config.tol, samples=config.samples,
                             restarts=2 * config.restarts, seed=config.seed + 7919, max_iter=config.max_iter)
        return wp_membership(cert.form, check).verdict == "strict-member"
    if isinstance(cert, DualCertificate):
        k = model.n - cert.p
        if any(w < 0 for w in cert.weights) or sum(cert.weights) != 1:
            return False
        T = Form.zero(model.n)
        for w, e in zip(cert.weights, cert.generators):
            if e.bidegrees() != {(k, 0)}:
                return False
            T = T + _generator_form(e, k) * w
        if T != cert.current or T.is_zero():
            return False
        prim = cert.primitive
        if cert.kind in ("pK", "pWK"):
            ok = aeppli_boundary(model, prim) == T
            if cert.kind == "pWK":
                ok = ok and del_(model, delbar(model, prim)).is_zero()
            return ok
        if cert.kind == "pS":
            return differential(model, prim) == T
        return i_ddbar(model, prim) == T
    return False


# reports ---------------------------------------------------------------------------


def equivalence_report(model: LieModel, p: int, config: SolverConfig = SolverConfig(),
                       budget: CertifyBudget = CertifyBudget()) -> dict:
    if not model.holomorphically_parallelizable:
        raise ValueError(f"model {model.name} is not holomorphically parallelizable")
    results = {kind: certify(model, p, kind, config, budget) for kind in KINDS}
    verdicts = {kind: r.status for kind, r in results.items()}
    inconclusive = any(v == "undecided" for v in verdicts.values())
    agree = len(set(verdicts.values())) == 1 and not inconclusive
    return {
        "model": model.name, "p": p, "level": "invariant", "verdicts": verdicts,
        "agree": agree, "inconclusive": inconclusive,
        "certificates": {kind: r.to_json() for kind, r in results.items()},
        "_results": results,
    }


def check_balanced_exactness(model: LieModel, primitive: Form | None = None) -> dict:
    """Closedness and exactness of ``omega^(n-1)`` for the parallelization metric."""
    n = model.n
    omega = model.metric_form()
    top = omega.power(n - 1)
    d_top = differential(model, top)
    out = {
        "model": model.name,
        "level": "invariant",
        "omega_closed": differential(model, omega).is_zero(),
        "power": n - 1,
        "power_closed": d_top.is_zero(),
        "power_differential": d_top.to_json(),
    }
    if d_top.is_zero():
        d_ex = exactness_certificate(model, top, "d")
        a_ex = exactness_certificate(model, top, "aeppli")
        out["d_exact"] = d_ex.to_json()
        out["aeppli_trivial"] = a_ex.to_json()
    if primitive is not None:
        residual = top - differential(model, primitive)
        out["supplied_primitive_residual"] = residual.to_json()
        out["supplied_primitive_ok"] = residual.is_zero()
    return out
