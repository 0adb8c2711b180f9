"""Local model of the blow-up of C^n at the origin.

Chart j has coordinates u with ``z_i = u_i u_j`` (i != j) and ``z_j = u_j``;
the exceptional set E is ``{u_j = 0}``.  Real (1,1)- and (p,p)-forms are
represented by Hermitian matrices in the sigma-normalized basis of
:mod:`pkahler.cones` (``beta = sigma_1 sum W_ab du_a ^ conj(du_b)``).

``theta`` is ``i del delbar (chi(s) log s)`` with ``s = |z(u)|^2``: on
``s <= eps^2`` it is the Fubini-Study pullback ``i del delbar log(1 + |w|^2)``
(w the non-j coordinates); on the annulus it is the full Leibniz expansion.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import combinations
from math import comb, factorial

import numpy as np

from .cones import form_to_hermitian, hermitian_to_form, min_simple_quadratic, plucker
from .exterior import Form, wedge

__all__ = [
    "BlowupChart",
    "BlowupForms",
    "BlowupConfig",
    "CEstimate",
    "eval_forms",
    "pairing",
    "compound",
    "sample_points",
    "verify_claims",
    "estimate_c",
    "c_stability",
    "stokes_check",
    "chart_consistency",
]


@dataclass(frozen=True)
class BlowupChart:
    n: int
    j: int  # 1-based chart index

    def __post_init__(self):
        if self.n < 2 or not 1 <= self.j <= self.n:
            raise ValueError(f"invalid chart j={self.j} for n={self.n}")

    @property
    def _k(self) -> int:
        return self.j - 1

    def embed(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        z = u * u[self._k]
        z[self._k] = u[self._k]
        return z

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        """``J[i, a] = dz_i / du_a``."""
        u = np.asarray(u, dtype=complex)
        k = self._k
        J = np.diag(np.full(self.n, u[k], dtype=complex))
        J[:, k] = u
        J[k, k] = 1.0
        return J

    def on_exceptional(self, u: np.ndarray, tol: float = 0.0) -> bool:
        return abs(u[self._k]) <= tol

    def from_z(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        k = self._k
        if z[k] == 0:
            raise ValueError("point is not in the image of this chart off E")
        u = z / z[k]
        u[k] = z[k]
        return u

    def transition(self, other: int, u: np.ndarray) -> np.ndarray:
        """Coordinates in chart ``other`` of the point u (also valid on E)."""
        u = np.asarray(u, dtype=complex)
        k, l = self._k, other - 1
        if k == l:
            return u.copy()
        d = u.copy()
        d[k] = 1.0  # direction of the line, d_k = 1
        if d[l] == 0:
            raise ValueError("point is not in the target chart")
        t = u[k] * d[l]
        out = d / d[l]
        out[l] = t
        return out

    def transition_jacobian(self, other: int, u: np.ndarray) -> np.ndarray:
        """``K[i, a] = du'_i / du_a`` for the map to chart ``other``."""
        u = np.asarray(u, dtype=complex)
        k, l = self._k, other - 1
        n = self.n
        if k == l:
            return np.eye(n, dtype=complex)
        K = np.zeros((n, n), dtype=complex)
        ul = u[l]
        K[l, k] = ul
        K[l, l] = u[k]
        K[k, l] = -1.0 / ul**2
        for i in range(n):
            if i in (k, l):
                continue
            K[i, i] = 1.0 / ul
            K[i, l] = -u[i] / ul**2
        return K


def _smootherstep(x: float) -> tuple[float, float, float]:
    """S, S', S'' for ``S = 6x^5 - 15x^4 + 10x^3``."""
    return (x**3 * (10 - 15 * x + 6 * x**2), 30 * x**2 * (x - 1) ** 2, 60 * x * (2 * x - 1) * (x - 1))


@dataclass(frozen=True)
class BlowupForms:
    eps: float = 1.0

    def chi(self, s: float) -> tuple[float, float, float]:
        """chi, d chi/ds, d^2 chi/ds^2 with chi = 1 - S(r - 1), r = sqrt(s)/eps."""
        e = self.eps
        r = np.sqrt(s) / e
        if r <= 1:
            return 1.0, 0.0, 0.0
        if r >= 2:
            return 0.0, 0.0, 0.0
        S, S1, S2 = _smootherstep(r - 1)
        r_s = 1 / (2 * e * np.sqrt(s))
        r_ss = -1 / (4 * e * s**1.5)
        return 1 - S, -S1 * r_s, -S2 * r_s**2 - S1 * r_ss

    def region(self, chart: BlowupChart, u) -> str:
        s = float(np.sum(np.abs(chart.embed(u)) ** 2))
        if s <= self.eps**2:
            return "inner"
        if s < 4 * self.eps**2:
            return "annulus"
        return "outside"

    def fubini_study(self, chart: BlowupChart, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        k = chart._k
        w = u.copy()
        w[k] = 0.0
        q = 1 + np.sum(np.abs(w) ** 2)
        H = (np.eye(chart.n) * q - np.outer(np.conj(w), w)) / q**2
        H[k, :] = 0.0
        H[:, k] = 0.0
        return 2 * H  # i = 2 sigma_1

    def theta(self, chart: BlowupChart, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        z = chart.embed(u)
        s = float(np.sum(np.abs(z) ** 2))
        if s >= 4 * self.eps**2:
            return np.zeros((chart.n, chart.n), dtype=complex)
        if s <= self.eps**2:
            return self.fubini_study(chart, u)
        J = chart.jacobian(u)
        sa = J.T @ np.conj(z)  # ds/du_a
        Sab = J.T @ np.conj(J)  # d^2 s / du_a du_b-bar
        P = np.outer(sa, np.conj(sa))
        c, c1, c2 = self.chi(s)
        L = np.log(s)
        H = c * (Sab / s - P / s**2) + 2 * c1 * P / s + L * (c2 * P + c1 * Sab)
        return 2 * H

    def pullback_omega(self, chart: BlowupChart, u) -> np.ndarray:
        """``pi^* omega`` for ``omega = (i/2) sum dz_i ^ conj(dz_i)``."""
        J = chart.jacobian(u)
        return J.T @ np.conj(J)

    def pullback_constant(self, chart: BlowupChart, u, W: np.ndarray, p: int) -> np.ndarray:
        """Pullback of a constant (p,p)-form with matrix W in the z coordinates."""
        C = compound(chart.jacobian(u), p)
        return C.T @ W @ np.conj(C)


def compound(M: np.ndarray, p: int) -> np.ndarray:
    """p-th compound matrix: minors ``det M[I, A]`` on lexicographic p-subsets."""
    n = M.shape[0]
    idx = list(combinations(range(n), p))
    out = np.empty((len(idx), len(idx)), dtype=complex)
    for a, I in enumerate(idx):
        rows = M[list(I)]
        for b, A in enumerate(idx):
            out[a, b] = np.linalg.det(rows[:, list(A)]) if p else 1.0
    return out


def _wedge_11(mats: list[np.ndarray], n: int) -> np.ndarray:
    """Matrix of the wedge product of (1,1)-forms, via exterior-core."""
    p = len(mats)
    out = Form.scalar(n, 1.0 + 0j)
    for W in mats:
        out = wedge(out, hermitian_to_form(W, n, 1))
    if out.is_zero():
        return np.zeros((comb(n, p), comb(n, p)), dtype=complex)
    return form_to_hermitian(out, p)


def eval_forms(chart: BlowupChart, point, p: int, forms: BlowupForms = BlowupForms()) -> dict:
    """theta, pi^* omega and Theta = pi^* omega ^ theta^(p-1) + theta^p at a chart point."""
    n = chart.n
    if not 1 <= p <= n - 1:
        raise ValueError("need 1 <= p <= n-1")
    u = np.asarray(point, dtype=complex)
    th = forms.theta(chart, u)
    om = forms.pullback_omega(chart, u)
    if not th.any():
        Theta = np.zeros((comb(n, p), comb(n, p)), dtype=complex)
    else:
        Theta = _wedge_11([om] + [th] * (p - 1), n) + _wedge_11([th] * p, n)
    return {"theta": th, "pullback_omega": om, "Theta": Theta,
            "s": float(np.sum(np.abs(chart.embed(u)) ** 2)), "region": forms.region(chart, u)}


def pairing(W: np.ndarray, x: np.ndarray) -> float:
    """Value of the (p,p)-form on ``X ^ conj(X)`` for Plücker coordinates x of X."""
    return float(np.real(x @ W @ np.conj(x)))


# sampling --------------------------------------------------------------------------


@dataclass(frozen=True)
class BlowupConfig:
    eps: float = 1.0
    samples: int = 800
    seed: int = 0
    tol: float = 1e-9
    margin: float = 1e-6  # required strict margin on E
    c_margin: float = 1e-3  # strictness required of pi^* Omega + c Theta
    c_max: float = 1e6
    restarts: int = 16

    def to_json(self) -> dict:
        return asdict(self)


def sample_points(n: int, region: str, count: int, rng: np.random.Generator, eps: float = 1.0):
    """(chart, u) pairs; w in the unit polydisc, which covers E over all charts."""
    lo_hi = {"E": (0.0, 0.0), "inner": (0.0, 1.0), "annulus": (1.0, 2.0), "outside": (2.0 + 1e-9, 3.0)}
    if region not in lo_hi:
        raise ValueError(f"unknown region {region!r}")
    lo, hi = lo_hi[region]
    out = []
    for _ in range(count):
        j = int(rng.integers(1, n + 1))
        w = np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
        w[j - 1] = 0
        q = 1 + np.sum(np.abs(w) ** 2)
        rho = rng.uniform(lo, hi)
        uj = eps * rho / np.sqrt(q) * np.exp(2j * np.pi * rng.uniform())
        u = w.copy()
        u[j - 1] = uj
        out.append((BlowupChart(n, j), u))
    return out


def _min_simple(W: np.ndarray, n: int, p: int, rng, restarts: int) -> float:
    return min_simple_quadratic(W, n, p, restarts, rng).value


def _unit_simple(rng, n, p, fixed: np.ndarray | None = None) -> np.ndarray:
    V = rng.standard_normal((p, n)) + 1j * rng.standard_normal((p, n))
    if fixed is not None:
        V[: len(fixed)] = fixed
    x = plucker(V)
    return x / np.linalg.norm(x)


def verify_claims(n: int, p: int, config: BlowupConfig = BlowupConfig()) -> dict:
    """Sampled check that Theta >= 0 near E, Theta > 0 on E, and pi^* omega^p > 0 on the annulus."""
    if n < 2 or not 1 <= p <= n - 1:
        raise ValueError("need n >= 2 and 1 <= p <= n-1")
    forms = BlowupForms(config.eps)
    rng = np.random.default_rng([config.seed, 3])
    ident = np.eye(comb(n, p)) * factorial(p)  # omega^p in z coordinates
    report: dict = {"n": n, "p": p, "config": config.to_json(), "evidence": "sampled, not a proof"}

    def region_min(region, count, key):
        vals, rand_vals = [], []
        for chart, u in sample_points(n, region, count, rng, config.eps):
            ev = eval_forms(chart, u, p, forms)
            W = ev["Theta"] if key == "Theta" else forms.pullback_constant(chart, u, ident, p)
            vals.append(_min_simple(W, n, p, rng, config.restarts))
            rand_vals.append(pairing(W, _unit_simple(rng, n, p)))
        return float(min(vals)), float(min(rand_vals))

    m_inner, r_inner = region_min("inner", config.samples, "Theta")
    m_E, r_E = region_min("E", config.samples, "Theta")
    m_ann, _ = region_min("annulus", config.samples, "omega_p")
    th_ann, _ = region_min("annulus", max(1, config.samples // 4), "Theta")

    outside_max = 0.0
    for chart, u in sample_points(n, "outside", max(1, config.samples // 4), rng, config.eps):
        ev = eval_forms(chart, u, p, forms)
        outside_max = max(outside_max, float(np.abs(ev["Theta"]).max()), float(np.abs(ev["theta"]).max()))

    # directions at points of E
    normal_theta, tangent_theta_min, normal_omega_min = 0.0, np.inf, np.inf
    mixed_theta_p, mixed_Theta_min = 0.0, np.inf
    for chart, u in sample_points(n, "E", max(1, config.samples // 4), rng, config.eps):
        k = chart.j - 1
        th = forms.theta(chart, u)
        om = forms.pullback_omega(chart, u)
        normal_theta = max(normal_theta, abs(float(np.real(th[k, k]))))
        normal_omega_min = min(normal_omega_min, float(np.real(om[k, k])))
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v[k] = 0
        v /= np.linalg.norm(v)
        tangent_theta_min = min(tangent_theta_min, pairing(th, v))
        if p >= 2:
            ev = eval_forms(chart, u, p, forms)
            e_n = np.zeros(n, dtype=complex)
            e_n[k] = 1.0
            V = rng.standard_normal((p, n)) + 1j * rng.standard_normal((p, n))
            V[:, k] = 0
            V[0] = e_n
            x = plucker(V)
            x /= np.linalg.norm(x)
            mixed_theta_p = max(mixed_theta_p, abs(pairing(_wedge_11([th] * p, n), x)))
            mixed_Theta_min = min(mixed_Theta_min, pairing(ev["Theta"], x))

    report["regions"] = {
        "U_eps": {"min_Theta": m_inner, "sampled_vector_min": r_inner, "samples": config.samples},
        "E": {"min_Theta": m_E, "sampled_vector_min": r_E, "samples": config.samples},
        "annulus": {"min_pullback_omega_p": m_ann, "min_Theta": th_ann, "samples": config.samples},
        "outside": {"max_abs_coefficient": outside_max},
    }
    report["directions_on_E"] = {
        "theta_normal_max_abs": normal_theta,
        "theta_tangent_min": float(tangent_theta_min),
        "pullback_omega_normal_min": float(normal_omega_min),
    }
    if p >= 2:
        report["directions_on_E"]["mixed_theta_p_max_abs"] = mixed_theta_p
        report["directions_on_E"]["mixed_Theta_min"] = float(mixed_Theta_min)
    report["passed"] = bool(m_inner >= -config.tol and m_E >= config.margin and m_ann > 0 and outside_max == 0.0)
    return report


# constant c ------------------------------------------------------------------------


@dataclass
class CEstimate:
    c: float | None
    feasible: bool
    samples: int
    c_zero_min: float  # min pairing at c = 0 (negative when Theta is needed)
    witness: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _stack(n, p, Omega, config: BlowupConfig, samples: int, seed: int):
    forms = BlowupForms(config.eps)
    rng = np.random.default_rng([seed, 5])
    pts = []
    for region, frac in (("E", 0.25), ("inner", 0.5), ("annulus", 0.25)):
        pts += [(region, ch, u) for ch, u in sample_points(n, region, max(1, int(samples * frac)), rng, config.eps)]
    A, B = [], []
    for _, ch, u in pts:
        A.append(forms.pullback_constant(ch, u, Omega, p))
        B.append(eval_forms(ch, u, p, forms)["Theta"])
    return pts, np.array(A), np.array(B)


def _min_all(M: np.ndarray, n: int, p: int, restarts: int, seed: int) -> np.ndarray:
    if p in (1, n - 1):
        return np.linalg.eigvalsh(0.5 * (M + np.conj(np.swapaxes(M, -1, -2))))[:, 0]
    rng = np.random.default_rng([seed, 9])
    return np.array([min_simple_quadratic(m, n, p, restarts, rng).value for m in M])


def estimate_c(n: int, p: int, Omega: np.ndarray | Form | None = None, config: BlowupConfig = BlowupConfig(),
               samples: int | None = None, seed: int | None = None) -> CEstimate:
    """Smallest sampled c with ``pi^* Omega + c Theta >= c_margin`` on simple unit vectors (bisection)."""
    if Omega is None:
        Omega = np.eye(comb(n, p)) * factorial(p)
    elif isinstance(Omega, Form):
        Omega = form_to_hermitian(Omega.to_float(), p)
    samples = samples or config.samples
    seed = config.seed if seed is None else seed
    pts, A, B = _stack(n, p, np.asarray(Omega, dtype=complex), config, samples, seed)

    def f(c):
        return _min_all(A + c * B, n, p, config.restarts, seed)

    base = f(0.0)
    worst = int(np.argmin(base))
    witness = {"region": pts[worst][0], "chart": pts[worst][1].j,
               "u": [[float(x.real), float(x.imag)] for x in pts[worst][2]], "value": float(base[worst])}
    if base.min() >= config.c_margin:
        return CEstimate(0.0, True, len(pts), float(base.min()), witness)
    hi = 1e-6
    while hi <= config.c_max and f(hi).min() < config.c_margin:
        hi *= 2
    if hi > config.c_max:
        return CEstimate(None, False, len(pts), float(base.min()), witness)
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if f(mid).min() >= config.c_margin:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-6 * hi:
            break
    return CEstimate(hi, True, len(pts), float(base.min()), witness)


def c_stability(n: int, p: int, Omega=None, config: BlowupConfig = BlowupConfig()) -> dict:
    """Compare c at the configured sample count with c at double the count."""
    a = estimate_c(n, p, Omega, config)
    b = estimate_c(n, p, Omega, config, samples=2 * config.samples, seed=config.seed + 1)
    rel = abs(a.c - b.c) / max(abs(a.c), 1e-300) if a.feasible and b.feasible else None
    return {"c": a.c, "c_doubled": b.c, "relative_change": rel, "feasible": a.feasible and b.feasible,
            "samples": a.samples, "samples_doubled": b.samples}


# closedness and chart checks -------------------------------------------------------


def _two_form(W: np.ndarray, X: np.ndarray, Y: np.ndarray) -> float:
    """``beta(X, Y)`` for ``beta = sigma_1 sum W_ab du_a ^ conj(du_b)`` on real tangent vectors."""
    val = 0.5j * (X @ W @ np.conj(Y) - Y @ W @ np.conj(X))
    return float(np.real(val))


_GL = np.polynomial.legendre.leggauss(10)


def _triangle_integral(f, P0, P1, P2) -> float:
    """Integral of a 2-form over the oriented affine triangle (Duffy-collapsed Gauss-Legendre)."""
    x, w = _GL
    x = 0.5 * (x + 1)
    w = 0.5 * w
    e1, e2 = P1 - P0, P2 - P0
    total = 0.0
    for xi, wi in zip(x, w):
        for eta, wj in zip(x, w):
            s, t = xi, eta * (1 - xi)
            total += wi * wj * (1 - xi) * f(P0 + s * e1 + t * e2, e1, e2)
    return total


def stokes_check(n: int, region: str = "inner", count: int = 20, size: float = 0.05,
                 forms: BlowupForms = BlowupForms(), seed: int = 0) -> dict:
    """Integral of theta over boundaries of small random tetrahedra in a chart."""
    rng = np.random.default_rng([seed, 11])
    worst, scale = 0.0, 0.0
    done = 0
    while done < count:
        chart, u = sample_points(n, region, 1, rng, forms.eps)[0]
        steps = size * forms.eps * (rng.standard_normal((3, n)) + 1j * rng.standard_normal((3, n)))
        verts = [u] + [u + s for s in steps]
        if any(forms.region(chart, v) != region for v in verts):
            continue

        def f(pt, a, b):
            return _two_form(forms.theta(chart, pt), a, b)

        v0, v1, v2, v3 = verts
        faces = [(v1, v2, v3, 1), (v0, v2, v3, -1), (v0, v1, v3, 1), (v0, v1, v2, -1)]
        vals = [sgn * _triangle_integral(f, *tri) for *tri, sgn in faces]
        worst = max(worst, abs(sum(vals)))
        scale = max(scale, max(abs(v) for v in vals))
        done += 1
    return {"region": region, "tetrahedra": count, "max_abs_boundary_integral": worst, "max_abs_face_integral": scale}


def chart_consistency(n: int, count: int = 100, forms: BlowupForms = BlowupForms(), seed: int = 0) -> dict:
    """Round-trip of transition maps and transport of theta between overlapping charts."""
    rng = np.random.default_rng([seed, 13])
    rt, th = 0.0, 0.0
    tested = 0
    for region in ("E", "inner", "annulus"):
        for chart, u in sample_points(n, region, count, rng, forms.eps):
            others = [l for l in range(1, n + 1) if l != chart.j and abs(u[l - 1]) > 0.2]
            if not others:
                continue
            l = others[0]
            v = chart.transition(l, u)
            back = BlowupChart(n, l).transition(chart.j, v)
            rt = max(rt, float(np.abs(back - u).max()))
            K = chart.transition_jacobian(l, u)
            W_here = forms.theta(chart, u)
            W_there = forms.theta(BlowupChart(n, l), v)
            th = max(th, float(np.abs(K.T @ W_there @ np.conj(K) - W_here).max()))
            tested += 1
    return {"points": tested, "round_trip_max": rt, "theta_transport_max": th}
