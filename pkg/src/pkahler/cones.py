"""Membership tests for the cones SP^p, P^p and WP^p of real (p,p)-forms.

A real (p,p)-form ``Omega = sum_IJ w_IJ sigma_p phi_I ^ conj(phi_J)`` is
identified with the Hermitian matrix ``W = (w_IJ)``.  In these coordinates

* a simple generator ``sigma_p eta ^ conj(eta)`` is the rank-one ``eta eta^H``;
* the top pairing of ``Omega`` with ``sigma_k eta ^ conj(eta)`` (k = n - p) is
  ``eta^H A eta`` where ``A`` is ``W`` transported to (k,0)-vectors by the
  complementary-index sign table (:func:`dual_matrix`).

WP and P minimize that quadratic form over simple / arbitrary unit
(k,0)-vectors; SP combines a nonnegative least-squares fit by simple
generators with a cutting-plane LP for a separating functional.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np
from scipy.optimize import linprog, nnls

from .exterior import Form, complement, merge_sign, multi_indices, pair_top, sigma, wedge

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "SimpleGenerator",
    "ConeReport",
    "SimpleMin",
    "sample_generators",
    "wp_membership",
    "p_membership",
    "sp_membership",
    "duality_probe",
    "form_to_hermitian",
    "hermitian_to_form",
    "dual_matrix",
    "plucker",
    "min_simple_quadratic",
    "min_quadratic_descent",
    "herm_to_vec",
    "vec_to_herm",
    "example_form",
    "inclusion_probe",
]


@dataclass(frozen=True)
class SolverConfig:
    eps: float = 1e-6  # strictness margin
    tol: float = 1e-9  # absolute tolerance
    samples: int = 256  # sampled generators per pool
    restarts: int = 64  # descent restarts
    seed: int = 0
    max_iter: int = 300  # descent sweeps
    rounds: int = 30  # cutting-plane / column-generation rounds
    box: float = 10.0  # coefficient box for LPs

    def __post_init__(self):
        if not (self.eps > self.tol > 0):
            raise ValueError("need eps > tol > 0")
        if self.samples < 1 or self.restarts < 1:
            raise ValueError("samples and restarts must be positive")

    def to_json(self) -> dict:
        return asdict(self)


def _rng(config_seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(config_seed), int(stream)])


# coordinates ----------------------------------------------------------------


def form_to_hermitian(omega: Form, p: int | None = None) -> np.ndarray:
    """Hermitian matrix W of a (p,p)-form on the lexicographic p-index basis."""
    n = omega.n
    if p is None:
        p = omega.bidegree[0] if not omega.is_zero() else 0
    if not omega.is_zero() and omega.bidegrees() != {(p, p)}:
        raise ValueError(f"expected a ({p},{p})-form, got bidegrees {sorted(omega.bidegrees())}")
    idx = {I: a for a, I in enumerate(multi_indices(n, p))}
    d = len(idx)
    W = np.zeros((d, d), dtype=complex)
    s = complex(sigma(p))
    for (I, J), c in omega.items():
        W[idx[I], idx[J]] = complex(c) / s
    return W


def hermitian_to_form(W: np.ndarray, n: int, p: int) -> Form:
    s = complex(sigma(p))
    idx = multi_indices(n, p)
    terms = {}
    for a, I in enumerate(idx):
        for b, J in enumerate(idx):
            if W[a, b] != 0:
                terms[(I, J)] = complex(W[a, b]) * s
    return Form(n, terms)


@lru_cache(maxsize=None)
def _dual_table(n: int, p: int):
    """perm[K] = index of K^c; S[L, K] = pair of the basis elements at (K^c, L^c) and (K, L)."""
    k = n - p
    pidx = {I: a for a, I in enumerate(multi_indices(n, p))}
    ks = multi_indices(n, k)
    perm = np.array([pidx[complement(n, K)] for K in ks], dtype=int)
    S = np.zeros((len(ks), len(ks)), dtype=complex)
    for a, K in enumerate(ks):
        for b, L in enumerate(ks):
            x = Form(n, {(complement(n, K), complement(n, L)): sigma(p)})
            y = Form(n, {(K, L): sigma(k)})
            S[b, a] = complex(pair_top(x, y))
    return perm, S


def dual_matrix(W: np.ndarray, n: int, p: int) -> np.ndarray:
    """Matrix A with ``pair_top(Omega, sigma_k eta ^ conj(eta)) = eta^H A eta``."""
    perm, S = _dual_table(n, p)
    Wt = W[..., perm[:, None], perm[None, :]]  # Wt[K, L] = W[Kc, Lc]
    return np.swapaxes(Wt, -1, -2) * S


@lru_cache(maxsize=None)
def _upper(d: int):
    return np.triu_indices(d, 1)


def herm_to_vec(W: np.ndarray) -> np.ndarray:
    """Isometric real coordinates: diag, sqrt2*Re(upper), sqrt2*Im(upper)."""
    d = W.shape[-1]
    iu = _upper(d)
    diag = np.real(np.diagonal(W, axis1=-2, axis2=-1))
    up = W[..., iu[0], iu[1]]
    return np.concatenate([diag, np.sqrt(2) * up.real, np.sqrt(2) * up.imag], axis=-1)


def vec_to_herm(v: np.ndarray, d: int) -> np.ndarray:
    iu = _upper(d)
    m = len(iu[0])
    W = np.zeros(v.shape[:-1] + (d, d), dtype=complex)
    idx = np.arange(d)
    W[..., idx, idx] = v[..., :d]
    up = (v[..., d:d + m] + 1j * v[..., d + m:]) / np.sqrt(2)
    W[..., iu[0], iu[1]] = up
    W[..., iu[1], iu[0]] = np.conj(up)
    return W


# simple vectors ---------------------------------------------------------------


def plucker(Psi: np.ndarray) -> np.ndarray:
    """Coordinates of psi_1 ^ ... ^ psi_k on the lexicographic k-index basis."""
    k, n = Psi.shape[-2], Psi.shape[-1]
    if k == 0:
        return np.ones(Psi.shape[:-2] + (1,), dtype=complex)
    cols = np.array(list(combinations(range(n), k)))
    sub = Psi[..., :, cols]  # (..., k, C, k)
    sub = np.moveaxis(sub, -2, -3)  # (..., C, k, k)
    return np.linalg.det(sub)


@lru_cache(maxsize=None)
def _wedge_table(n: int, k: int):
    """(K index, j, L index, sign) with (psi ^ rho)_K = sum sign * psi_j * rho_L."""
    lidx = {L: a for a, L in enumerate(multi_indices(n, k - 1))}
    Ks, js, Ls, sg = [], [], [], []
    for a, K in enumerate(multi_indices(n, k)):
        for j in K:
            L = tuple(x for x in K if x != j)
            s, _ = merge_sign((j,), L)
            Ks.append(a)
            js.append(j - 1)
            Ls.append(lidx[L])
            sg.append(s)
    return np.array(Ks), np.array(js), np.array(Ls), np.array(sg, dtype=float)


@dataclass
class SimpleMin:
    value: float
    eta: np.ndarray  # unit simple vector (Plücker coordinates)
    factors: np.ndarray | None  # orthonormal factors, shape (k, n)
    method: str
    restarts: int
    spread: float = 0.0  # max - min of restart optima
    values: np.ndarray | None = field(default=None, repr=False)
    etas: np.ndarray | None = field(default=None, repr=False)


def _orthonormal_rows(Psi: np.ndarray) -> np.ndarray:
    Q, _ = np.linalg.qr(np.swapaxes(Psi, -1, -2).conj())
    return np.swapaxes(Q, -1, -2).conj()


def min_simple_quadratic(A: np.ndarray, n: int, k: int, restarts: int = 64,
                         rng: np.random.Generator | None = None, max_iter: int = 300,
                         tol: float = 1e-13, extra_starts: np.ndarray | None = None) -> SimpleMin:
    """Minimize ``eta^H A eta`` over unit simple k-vectors in C^n.

    Exact eigen-solution when every k-vector is simple (k <= 1 or k >= n-1);
    otherwise block-coordinate descent on orthonormal factor frames: each
    factor in turn is replaced by the exact minimizer of the (quadratic)
    restricted problem on the orthogonal complement of the others.
    """
    A = 0.5 * (A + A.conj().T)
    if k == 0 or k == n:
        return SimpleMin(float(A[0, 0].real), np.ones(1, dtype=complex), None, "trivial", 1)
    if k == 1 or k == n - 1:
        w, V = np.linalg.eigh(A)
        eta = V[:, 0]
        factors = None
        if k == 1:
            factors = eta[None, :]
        return SimpleMin(float(w[0]), eta, factors, "eigen", 1)
    rng = rng if rng is not None else np.random.default_rng(0)
    Psi = rng.standard_normal((restarts, k, n)) + 1j * rng.standard_normal((restarts, k, n))
    if extra_starts is not None and len(extra_starts):
        Psi = np.concatenate([np.asarray(extra_starts, dtype=complex).reshape(-1, k, n), Psi])
    Psi = _orthonormal_rows(Psi)
    values = _block_descent(A, Psi, n, k, max_iter, tol)
    eta_all = plucker(Psi)
    best = int(np.argmin(values))
    return SimpleMin(float(values[best]), eta_all[best], Psi[best], "block-descent", len(values),
                     float(values.max() - values.min()), values, eta_all)


def _block_descent(A, Psi, n, k, max_iter, tol):
    """In-place descent on Psi (B, k, n); returns objective per restart."""
    B = Psi.shape[0]
    Ks, js, Ls, sg = _wedge_table(n, k)
    dK = comb(n, k)
    eye = np.eye(n)
    scale = np.linalg.norm(A) + 1.0
    prev = np.full(B, np.inf)
    vals = prev
    for it in range(max_iter):
        for t in range(k):
            others = np.delete(Psi, t, axis=1)  # (B, k-1, n)
            rho = plucker(others)  # (B, C(n,k-1))
            M = np.zeros((B, dK, n), dtype=complex)
            M[:, Ks, js] = sg * rho[:, Ls]
            Q = np.einsum("bki,kl,blj->bij", M.conj(), A, M)
            P = eye - np.einsum("bai,baj->bij", others, others.conj())
            H = P @ Q @ P + 2 * scale * (eye - P)
            H = 0.5 * (H + np.conj(np.swapaxes(H, -1, -2)))
            w, V = np.linalg.eigh(H)
            Psi[:, t, :] = V[:, :, 0]
            vals = w[:, 0]
        Psi[:] = _orthonormal_rows(Psi)
        if np.all(np.abs(prev - vals) <= tol * (1 + np.abs(vals))):
            break
        prev = vals
    eta = plucker(Psi)
    return np.real(np.einsum("bi,ij,bj->b", eta.conj(), A, eta))


def min_quadratic_descent(A: np.ndarray, restarts: int, rng: np.random.Generator,
                          max_iter: int = 2000, tol: float = 1e-15) -> tuple[float, np.ndarray, np.ndarray]:
    """Projected gradient descent of the Rayleigh quotient on the unit sphere.

    Returns (best value, best vector, all restart values).
    """
    A = 0.5 * (A + A.conj().T)
    d = A.shape[0]
    X = rng.standard_normal((restarts, d)) + 1j * rng.standard_normal((restarts, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    L = 2 * np.linalg.norm(A, 2) + 1e-300
    prev = np.full(restarts, np.inf)
    for _ in range(max_iter):
        AX = X @ A.T
        rho = np.real(np.einsum("bi,bi->b", X.conj(), AX))
        G = AX - rho[:, None] * X
        X = X - G / L
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        if np.all(np.abs(prev - rho) <= tol * (1 + np.abs(rho))):
            break
        prev = rho
    vals = np.real(np.einsum("bi,ij,bj->b", X.conj(), A, X))
    best = int(np.argmin(vals))
    return float(vals[best]), X[best], vals


# generators ---------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleGenerator:
    """``sigma_p eta ^ conj(eta)`` with ``eta = psi_1 ^ ... ^ psi_p``."""

    factors: np.ndarray  # (p, n) complex, unit rows

    @property
    def p(self) -> int:
        return self.factors.shape[0]

    @property
    def n(self) -> int:
        return self.factors.shape[1]

    @property
    def eta(self) -> np.ndarray:
        return plucker(self.factors)

    @property
    def unit_eta(self) -> np.ndarray:
        e = self.eta
        nrm = np.linalg.norm(e)
        return e / nrm if nrm > 0 else e

    def eta_form(self) -> Form:
        out = Form.scalar(self.n, 1.0 + 0j)
        for row in self.factors:
            out = wedge(out, Form(self.n, {((j + 1,), ()): complex(c) for j, c in enumerate(row)}))
        return out

    def to_form(self) -> Form:
        e = self.eta_form()
        return wedge(e, e.conjugate()) * complex(sigma(self.p))

    def hermitian(self) -> np.ndarray:
        e = self.unit_eta
        return np.outer(e, e.conj())

    def to_json(self) -> dict:
        return {"factors": _cjson(self.factors)}


def _cjson(a: np.ndarray):
    a = np.asarray(a)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_cjson(x) for x in a]


def _unit_gaussian(rng, shape):
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def sample_generators(n: int, p: int, count: int, seed: int) -> list[SimpleGenerator]:
    """Rotation-invariant random simple generators; deterministic per seed."""
    if not 1 <= p <= n - 1:
        raise ValueError(f"need 1 <= p <= n-1, got p={p}, n={n}")
    rng = np.random.default_rng([int(seed), 1])
    F = _unit_gaussian(rng, (count, p, n))
    return [SimpleGenerator(F[i]) for i in range(count)]


def _random_simple_units(n: int, p: int, count: int, rng) -> np.ndarray:
    F = _unit_gaussian(rng, (count, p, n))
    E = plucker(F)
    return E / np.linalg.norm(E, axis=1, keepdims=True)


def _coordinate_units(n: int, p: int) -> np.ndarray:
    return np.eye(comb(n, p), dtype=complex)


# reports ------------------------------------------------------------------------


@dataclass
class ConeReport:
    cone: str
    verdict: str  # strict-member | member | non-member | undecided
    margin: float
    certificate: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def is_member(self) -> bool:
        return self.verdict in ("member", "strict-member")

    def to_json(self) -> dict:
        return {"cone": self.cone, "verdict": self.verdict, "margin": self.margin,
                "certificate": self.certificate, "stats": self.stats}


def _check_input(omega: Form | np.ndarray, n: int | None, p: int | None, tol: float):
    if isinstance(omega, Form):
        if omega.is_zero():
            if p is None:
                raise ValueError("p is required for the zero form")
            return np.zeros((comb(omega.n, p),) * 2, dtype=complex), omega.n, p
        bd = omega.bidegrees()
        if len(bd) != 1 or next(iter(bd))[0] != next(iter(bd))[1]:
            raise ValueError(f"expected a (p,p)-form, got {sorted(bd)}")
        p0 = next(iter(bd))[0]
        if not omega.is_real(tol if not omega.is_exact() else None):
            raise ValueError("form is not real")
        W = form_to_hermitian(omega, p0)
        return W, omega.n, p0
    W = np.asarray(omega, dtype=complex)
    if n is None or p is None:
        raise ValueError("n and p are required for matrix input")
    if W.shape != (comb(n, p),) * 2:
        raise ValueError("matrix shape does not match C(n,p)")
    if np.abs(W - W.conj().T).max() > tol * max(1.0, np.abs(W).max()):
        raise ValueError("matrix is not Hermitian")
    return 0.5 * (W + W.conj().T), n, p


def _verdict(m: float, config: SolverConfig) -> str:
    if m >= config.eps:
        return "strict-member"
    if m >= -config.tol:
        return "member"
    return "non-member"


def wp_membership(omega, config: SolverConfig = SolverConfig(), *, n: int | None = None,
                  p: int | None = None) -> ConeReport:
    """Weak positivity: minimum pairing with unit simple ``sigma_k eta ^ conj(eta)``."""
    W, n, p = _check_input(omega, n, p, config.tol)
    if not 1 <= p <= n - 1:
        raise ValueError("need 1 <= p <= n-1")
    k = n - p
    A = dual_matrix(W, n, p)
    res = min_simple_quadratic(A, n, k, config.restarts, _rng(config.seed, 11), config.max_iter)
    verdict = _verdict(res.value, config)
    cert = {}
    if verdict == "non-member":
        cert = {"generator_eta": _cjson(res.eta), "pairing": res.value}
        if res.factors is not None:
            cert["generator_factors"] = _cjson(res.factors)
    return ConeReport("WP", verdict, res.value, cert,
                      {"method": res.method, "restarts": res.restarts, "spread": res.spread})


def p_membership(omega, config: SolverConfig = SolverConfig(), *, n: int | None = None,
                 p: int | None = None, restarts: int | None = None) -> ConeReport:
    """Positivity: minimum pairing with ``sigma_k eta ^ conj(eta)`` over all unit (k,0)-vectors."""
    W, n, p = _check_input(omega, n, p, config.tol)
    if not 1 <= p <= n - 1:
        raise ValueError("need 1 <= p <= n-1")
    A = dual_matrix(W, n, p)
    R = restarts if restarts is not None else config.restarts
    m, x, vals = min_quadratic_descent(A, R, _rng(config.seed, 12))
    eig_min = float(np.linalg.eigvalsh(0.5 * (A + A.conj().T))[0])
    verdict = _verdict(m, config)
    cert = {}
    if verdict == "non-member":
        cert = {"eta": _cjson(x), "pairing": m}
    return ConeReport("P", verdict, m, cert,
                      {"method": "sphere-descent", "restarts": R, "eigen_min": eig_min,
                       "spread": float(vals.max() - vals.min())})


# strong positivity -------------------------------------------------------------------


def _min_over_simple(Z: np.ndarray, n: int, p: int, config: SolverConfig, stream: int,
                     restarts: int | None = None) -> SimpleMin:
    """Certified minimum of ``eta^H Z eta`` over unit simple p-vectors."""
    R = restarts if restarts is not None else config.restarts
    return min_simple_quadratic(Z, n, p, R, _rng(config.seed, stream), config.max_iter)


def sp_membership(omega, config: SolverConfig = SolverConfig(), *, n: int | None = None,
                  p: int | None = None) -> ConeReport:
    """Strong positivity via an inner decomposition or an outer separating functional."""
    W, n, p = _check_input(omega, n, p, config.tol)
    if not 1 <= p <= n - 1:
        raise ValueError("need 1 <= p <= n-1")
    d = W.shape[0]
    stats: dict = {}
    if np.linalg.norm(W) <= config.tol:
        return ConeReport("SP", "member", 0.0, {"kind": "decomposition", "weights": [], "etas": [], "residual": 0.0},
                          {"method": "zero"})
    lam, V = np.linalg.eigh(W)
    stats["eigen_min"] = float(lam[0])
    if p == 1 or p == n - 1:
        # every (p,0)-vector is simple: SP coincides with the PSD cone
        if lam[0] >= -config.tol:
            gens = [(float(l), V[:, i]) for i, l in enumerate(lam) if l > config.tol]
            resid = float(np.linalg.norm(W - sum((l * np.outer(v, v.conj()) for l, v in gens), np.zeros_like(W))))
            return ConeReport("SP", "member", float(lam[0]),
                              {"kind": "decomposition", "weights": [g[0] for g in gens],
                               "etas": [_cjson(g[1]) for g in gens], "residual": resid},
                              {**stats, "method": "eigen"})
        return _psd_separation(W, V[:, 0], lam[0], n, p, config, stats)
    if lam[0] < -config.tol:
        return _psd_separation(W, V[:, 0], lam[0], n, p, config, stats)

    rng = _rng(config.seed, 21)
    pool = np.concatenate([_coordinate_units(n, p), _random_simple_units(n, p, config.samples, rng)])
    in_range = _range_simple(lam, V, n, p, config)
    if in_range is not None:
        # generators of any decomposition lie in range(W)
        stats["range_candidates"] = len(in_range)
        inner = _sp_inner(W, in_range, n, p, config, stats, rounds=min(10, config.rounds)) if len(in_range) else None
    else:
        inner = _sp_inner(W, pool, n, p, config, stats)
    if inner is not None:
        return inner
    outer = _sp_outer(W, pool, n, p, config, stats)
    if outer is not None and outer.verdict == "non-member":
        return outer
    pool = np.concatenate([pool, np.asarray(stats.pop("_cuts", np.zeros((0, d))), dtype=complex).reshape(-1, d)])
    inner = _sp_inner(W, pool, n, p, config, stats)
    if inner is not None:
        return inner
    return ConeReport("SP", "undecided", float(lam[0]), {}, stats)


def _range_simple(lam, V, n, p, config: SolverConfig) -> np.ndarray | None:
    """Simple unit vectors lying in the range of a rank-deficient PSD matrix.

    Every generator of a decomposition ``W = sum l_i eta_i eta_i^H`` lies in
    range(W), so these are the only candidates when the rank is small.
    """
    d = len(lam)
    keep = lam > config.tol * max(1.0, abs(lam[-1]))
    if keep.all():
        return None
    Q = V[:, keep]
    res = min_simple_quadratic(-(Q @ Q.conj().T), n, p, 4 * config.restarts, _rng(config.seed, 22),
                               config.max_iter)
    if res.etas is None:
        return res.eta[None, :] if res.value <= -1 + 1e-8 else np.zeros((0, d), dtype=complex)
    hits = res.etas[res.values <= -1 + 1e-8]
    out: list[np.ndarray] = []
    for e in hits:
        e = e / np.linalg.norm(e)
        if all(abs(np.vdot(f, e)) < 1 - 1e-8 for f in out):
            out.append(e)
    return np.array(out, dtype=complex).reshape(-1, d)


def _psd_separation(W, v, lam0, n, p, config, stats) -> ConeReport:
    # Z = v v^H is nonnegative on every generator; only the descent value is reported
    Z = np.outer(v, v.conj()) / abs(lam0)
    cm = _min_over_simple(Z, n, p, config, 31)
    return ConeReport("SP", "non-member", float(lam0),
                      {"kind": "separating-functional", "functional": _cjson(Z),
                       "value_on_form": float(np.real(np.trace(Z @ W))), "certified_min": cm.value,
                       "certified_restarts": cm.restarts},
                      {**stats, "method": "psd-test"})


def _sp_outer(W, pool, n, p, config: SolverConfig, stats) -> ConeReport | None:
    """Cutting-plane LP for Z with <Z, g> >= 0 on generators and <Z, W> = -1."""
    d = W.shape[0]
    w = herm_to_vec(W)
    dim = d * d
    cuts = []
    gens = pool
    for rnd in range(config.rounds):
        G = herm_to_vec(np.einsum("bi,bj->bij", gens, gens.conj()))
        # variables [z (dim), t]; maximize t
        c = np.zeros(dim + 1)
        c[-1] = -1.0
        A_ub = np.hstack([-G, np.ones((G.shape[0], 1))])
        b_ub = np.zeros(G.shape[0])
        A_eq = np.hstack([w, [0.0]])[None, :]
        bounds = [(-config.box, config.box)] * dim + [(None, None)]
        lp = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[-1.0], bounds=bounds, method="highs")
        if lp.status != 0:
            stats["outer"] = {"rounds": rnd + 1, "status": f"lp-status-{lp.status}"}
            break
        t = -lp.fun
        if t <= config.tol:
            stats["outer"] = {"rounds": rnd + 1, "status": "sampled-generators-do-not-separate", "t": t}
            break
        Z = vec_to_herm(lp.x[:dim], d)
        cm = _min_over_simple(Z, n, p, config, 40 + rnd)
        log.debug("outer round %d: t=%.3g certified min=%.3g", rnd, t, cm.value)
        rep = _polish(Z, W, cm.value, n, p, config, 1000 + rnd)
        if rep is not None:
            stats["outer"] = {"rounds": rnd + 1, "status": "separated"}
            rep.stats = {**stats, "method": "lp-cutting-plane"}
            return rep
        new = _violators(cm, t)
        cuts.extend(new)
        gens = np.concatenate([gens, np.array(new)])
    else:
        stats["outer"] = {"rounds": config.rounds, "status": "budget-exhausted"}
    stats["_cuts"] = np.array(cuts, dtype=complex).reshape(-1, pool.shape[1])
    return None


def _polish(Z, W, zmin: float, n, p, config: SolverConfig, stream: int) -> ConeReport | None:
    """Shift Z by the identity (1 on every unit generator), rescale to value -1, re-certify."""
    d = W.shape[0]
    shift = max(0.0, -zmin) + config.tol
    value = float(np.real(np.trace(Z @ W))) + shift * float(np.real(np.trace(W)))
    if value >= 0:
        return None
    # normalize slightly past -1 so rounding cannot leave the value above -1
    Zs = (Z + shift * np.eye(d)) * ((1 + 1e-12) / abs(value))
    check = _min_over_simple(Zs, n, p, config, stream, restarts=4 * config.restarts)
    if check.value < -config.tol:
        return None
    return ConeReport("SP", "non-member", check.value,
                      {"kind": "separating-functional", "functional": _cjson(Zs),
                       "value_on_form": float(np.real(np.trace(Zs @ W))),
                       "certified_min": check.value, "certified_restarts": check.restarts,
                       "certified_spread": check.spread})


def _violators(cm: SimpleMin, t: float) -> list[np.ndarray]:
    """Distinct descent endpoints whose value falls below the LP margin."""
    if cm.etas is None:
        return [cm.eta]
    out: list[np.ndarray] = []
    for v, e in sorted(zip(cm.values, cm.etas), key=lambda x: x[0]):
        if v >= t:
            break
        e = e / np.linalg.norm(e)
        if all(abs(np.vdot(f, e)) < 1 - 1e-6 for f in out):
            out.append(e)
    return out or [cm.eta]


def _sp_inner(W, pool, n, p, config: SolverConfig, stats, rounds: int | None = None) -> ConeReport | None:
    """Nonnegative least squares on simple generators with column generation."""
    w = herm_to_vec(W)
    gens = pool
    resid = np.inf
    lam = None
    trW = float(np.real(np.trace(W)))
    rounds = config.rounds if rounds is None else rounds
    for rnd in range(rounds + 1):
        G = herm_to_vec(np.einsum("bi,bj->bij", gens, gens.conj()))
        lam, resid = nnls(G.T, w, maxiter=50 * G.shape[0])
        if resid <= config.tol:
            keep = lam > 0
            stats["inner"] = {"rounds": rnd + 1, "residual": float(resid), "generators": int(keep.sum())}
            return ConeReport("SP", "member", float(resid),
                              {"kind": "decomposition", "weights": [float(x) for x in lam[keep]],
                               "etas": _cjson(gens[keep]), "residual": float(resid)},
                              {**stats, "method": "nnls-column-generation"})
        keep = lam > 0
        # Gauss-Newton polishing pays off near low-rank members; skip it on most later rounds
        refined = _refine(W, gens[keep], lam[keep], n, p) if rnd < 3 or rnd % 4 == 0 else None
        if refined is not None and refined[2] <= config.tol:
            etas, weights, r2 = refined
            stats["inner"] = {"rounds": rnd + 1, "residual": r2, "generators": len(weights), "refined": True}
            return ConeReport("SP", "member", r2,
                              {"kind": "decomposition", "weights": weights, "etas": _cjson(etas), "residual": r2},
                              {**stats, "method": "nnls-column-generation"})
        R = W - vec_to_herm(G.T @ lam, W.shape[0])
        best = _min_over_simple(-R, n, p, config, 60 + rnd)
        # -R separates once its violation is absorbed by an identity shift (projection theorem)
        shifted = float(np.real(np.trace(-R @ W))) + (max(0.0, -best.value) + config.tol) * trW
        if shifted < 0:
            rep = _polish(-R, W, best.value, n, p, config, 2000 + rnd)
            if rep is not None:
                stats["inner"] = {"rounds": rnd + 1, "residual": float(resid), "status": "projection-separated"}
                rep.stats = {**stats, "method": "projection-residual"}
                return rep
        if -best.value <= config.tol:
            break
        gens = np.concatenate([gens, np.array(_violators(best, -config.tol))])
    else:
        stats["inner"] = {"rounds": rnd + 1, "residual": float(resid)}
    return None


def simple_factors(eta: np.ndarray, n: int, p: int) -> tuple[np.ndarray, complex]:
    """Orthonormal (p, n) frame Psi and scale c with ``eta ~ c * plucker(Psi)``."""
    if p == n:
        return np.eye(n, dtype=complex), complex(eta[0])
    Ks, js, Ls, sg = _wedge_table(n, p + 1)
    M = np.zeros((comb(n, p + 1), n), dtype=complex)
    M[Ks, js] = sg * eta[Ls]
    _, _, Vh = np.linalg.svd(M)
    Psi = Vh[-p:].conj()
    return Psi, complex(np.vdot(plucker(Psi), eta))


def _plucker_jacobian(Psi: np.ndarray) -> np.ndarray:
    """dY/dPsi for Y = plucker(Psi); shape (B, C(n,k), k, n), holomorphic."""
    B, k, n = Psi.shape
    Ks, js, Ls, sg = _wedge_table(n, k)
    out = np.zeros((B, comb(n, k), k, n), dtype=complex)
    for t in range(k):
        rho = plucker(np.delete(Psi, t, axis=1))
        # psi_1 ^ ... ^ psi_k = (-1)^t psi_t ^ (others in order)
        out[:, Ks, t, js] = (-1) ** t * sg * rho[:, Ls]
    return out


def _refine(W, etas, weights, n, p, iters: int = 100):
    """Gauss-Newton polish of ``W ~ sum w_i eta_i eta_i^H`` over factor frames."""
    if len(weights) == 0:
        return None
    frames = []
    for e, w in zip(etas, weights):
        Psi, c = simple_factors(e, n, p)
        Psi[0] *= c * np.sqrt(w)
        frames.append(Psi)
    Psi = np.stack(frames)
    B = Psi.shape[0]
    target = herm_to_vec(W)

    def residual(Psi):
        Y = plucker(Psi)
        return herm_to_vec(np.einsum("bi,bj->ij", Y, Y.conj())) - target, Y

    r, Y = residual(Psi)
    cur = np.linalg.norm(r)
    best = (cur, Psi)
    goal = 1e-14 * max(1.0, np.linalg.norm(target))
    for _ in range(iters):
        if cur <= goal:
            break
        B = Psi.shape[0]
        D = _plucker_jacobian(Psi).reshape(B, -1, p * n)  # (B, dK, p*n)
        G = np.einsum("bkm,bl->bmkl", D, Y.conj())  # D_m Y^H
        Gh = np.conj(np.swapaxes(G, -1, -2))
        J = np.concatenate([herm_to_vec(G + Gh).reshape(-1, len(target)),
                            herm_to_vec(1j * (G - Gh)).reshape(-1, len(target))]).T
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        h = step.size // 2
        dPsi = (step[:h] + 1j * step[h:]).reshape(Psi.shape)
        prev = cur
        lam = 1.0
        while lam > 1e-6:
            r2, Y2 = residual(Psi + lam * dPsi)
            if np.linalg.norm(r2) < cur:
                Psi, r, Y, cur = Psi + lam * dPsi, r2, Y2, np.linalg.norm(r2)
                break
            lam /= 2
        if cur < best[0]:
            best = (cur, Psi)
        if cur > 0.5 * prev and B > 1:
            # slow progress: some weight is heading to zero, drop the smallest generator
            keep = np.argsort(np.linalg.norm(Y, axis=1))[1:]
            Psi = Psi[np.sort(keep)]
            r, Y = residual(Psi)
            cur = np.linalg.norm(r)
    Psi = best[1]
    Y = plucker(Psi)
    wts = np.linalg.norm(Y, axis=1) ** 2
    ok = wts > 0
    Y, wts = Y[ok], wts[ok]
    U = Y / np.sqrt(wts)[:, None]
    err = float(np.linalg.norm(np.einsum("b,bi,bj->ij", wts, U, U.conj()) - W))
    return U, [float(v) for v in wts], err


# duality probe ------------------------------------------------------------------


def _float_pair(omega_form: Form, gen: SimpleGenerator) -> float:
    return complex(pair_top(omega_form, gen.to_form())).real


def duality_probe(p: int, n: int, trials: int, seed: int, config: SolverConfig | None = None,
                  generators_per_trial: int = 4) -> dict:
    """Random check of ``Omega in WP^p  <=>  Omega ^ Psi >= 0 for all Psi in SP^k``.

    WP members are paired with random SP^k generators; WP non-members must come
    with a generator pairing negatively.  Pairings are recomputed through the
    exterior product of float forms, independently of the minimization.
    """
    if not 1 <= p <= n - 1:
        raise ValueError("need 1 <= p <= n-1")
    k = n - p
    config = config or SolverConfig(seed=seed, restarts=16)
    rng = np.random.default_rng([int(seed), 7])
    d = comb(n, p)
    violations = []
    members = nonmembers = 0
    for trial in range(trials):
        H = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        H = 0.5 * (H + H.conj().T) / np.sqrt(d)
        shift = rng.uniform(-1.0, 3.0)
        W = H + shift * np.eye(d)
        omega = hermitian_to_form(W, n, p)
        rep = wp_membership(W, config, n=n, p=p)
        if rep.is_member:
            members += 1
            F = _unit_gaussian(rng, (generators_per_trial, k, n))
            for f in F:
                val = _float_pair(omega, SimpleGenerator(f))
                if val < -config.tol * max(1.0, float(np.abs(W).max())):
                    violations.append({"trial": trial, "kind": "member-pairs-negatively", "value": val})
        else:
            nonmembers += 1
            eta = np.array([complex(a, b) for a, b in rep.certificate["generator_eta"]])
            val = _eta_pair(omega, eta, n, k)
            if not val < 0:
                violations.append({"trial": trial, "kind": "certificate-not-negative", "value": val})
    zero = Form.zero(n)
    g = SimpleGenerator(_unit_gaussian(rng, (k, n)))
    zero_pair = complex(pair_top(zero, g.to_form()))
    return {"p": p, "n": n, "trials": trials, "seed": seed, "wp_members": members,
            "wp_nonmembers": nonmembers, "violations": violations, "zero_form_pairing": abs(zero_pair)}


def _eta_pair(omega: Form, eta: np.ndarray, n: int, k: int) -> float:
    e = Form(n, {(K, ()): complex(c) for K, c in zip(multi_indices(n, k), eta)})
    g = wedge(e, e.conjugate()) * complex(sigma(k))
    return complex(pair_top(omega, g)).real


def example_form(name: str, n: int, p: int) -> Form:
    """Named test forms: ``omega`` (p-th power of the standard form), ``coordinate``
    (``sigma_p phi_1..p ^ conj``) and ``gamma`` (n=4, p=2: the square of
    ``phi_1^phi_2 + phi_3^phi_4``, positive but not strongly positive)."""
    from .exterior import phi

    if name == "omega":
        om = Form.zero(n)
        for i in range(1, n + 1):
            om = om + wedge(phi(n, i), phi(n, i).conjugate()) * sigma(1)
        return om.power(p)
    if name == "coordinate":
        eta = Form.scalar(n, 1)
        for i in range(1, p + 1):
            eta = wedge(eta, phi(n, i))
        return wedge(eta, eta.conjugate()) * sigma(p)
    if name == "gamma":
        if (n, p) != (4, 2):
            raise ValueError("gamma is defined for n=4, p=2")
        g = wedge(phi(4, 1), phi(4, 2)) + wedge(phi(4, 3), phi(4, 4))
        return wedge(g, g.conjugate()) * sigma(2)
    raise ValueError(f"unknown example form {name!r}")


def inclusion_probe(p: int, n: int, trials: int, seed: int, config: SolverConfig | None = None) -> dict:
    """Random check of ``SP^p <= P^p <= WP^p``.

    Trials cycle through random Hermitian matrices with a random shift, sums of
    ``d + 2`` random simple generators (members of SP by construction) and
    full-rank positive semidefinite matrices.  A violation is a member verdict
    of a smaller cone paired with a non-member verdict of a larger one, or a
    constructed SP member rejected by any cone.
    """
    if not 1 <= p <= n - 1:
        raise ValueError("need 1 <= p <= n-1")
    config = config or SolverConfig(seed=seed, restarts=16)
    rng = np.random.default_rng([int(seed), 8])
    d = comb(n, p)
    order = {"non-member": 0, "undecided": None, "member": 1, "strict-member": 1}
    tally: dict = {}
    violations = []
    for trial in range(trials):
        family = ("hermitian", "simple-sum", "psd")[trial % 3]
        if family == "hermitian":
            H = _unit_gaussian(rng, (d, d)) * np.sqrt(d)
            W = 0.5 * (H + H.conj().T) / np.sqrt(d) + rng.uniform(-1.0, 3.0) * np.eye(d)
        elif family == "simple-sum":
            etas = _random_simple_units(n, p, d + 2, rng)
            W = np.einsum("b,bi,bj->ij", rng.uniform(0.1, 1.0, d + 2), etas, etas.conj())
        else:
            B = _unit_gaussian(rng, (d, d))
            W = B @ B.conj().T
        verdicts = {name: fn(W, config, n=n, p=p).verdict
                    for name, fn in (("SP", sp_membership), ("P", p_membership), ("WP", wp_membership))}
        key = (family,) + tuple(verdicts.values())
        tally[key] = tally.get(key, 0) + 1
        chain = [order[verdicts[c]] for c in ("SP", "P", "WP")]
        bad = any(a == 1 and b == 0 for i, a in enumerate(chain) for b in chain[i + 1:])
        if family == "simple-sum" and 0 in chain:
            bad = True
        if bad:
            violations.append({"trial": trial, "family": family, "verdicts": verdicts})
    return {"p": p, "n": n, "trials": trials, "seed": seed, "violations": violations,
            "tally": {"/".join(k): v for k, v in sorted(tally.items())}}
