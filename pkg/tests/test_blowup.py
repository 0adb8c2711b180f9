from itertools import combinations, permutations

import numpy as np
import pytest

from pkahler.blowup import (
    BlowupChart, BlowupConfig, BlowupForms, chart_consistency, compound, estimate_c, eval_forms, pairing,
    sample_points, stokes_check, verify_claims,
)

FORMS = BlowupForms(1.0)


def potential(chart, u, forms=FORMS):
    s = float(np.sum(np.abs(chart.embed(u)) ** 2))
    return forms.chi(s)[0] * np.log(s)


def fd_theta(chart, u, h=2e-4):
    """2 * d^2 f / du_a du_b-bar from a central-difference real Hessian (Richardson)."""
    return (4 * _fd_theta(chart, u, h / 2) - _fd_theta(chart, u, h)) / 3


def _fd_theta(chart, u, h):
    n = chart.n
    x0 = np.concatenate([u.real, u.imag])

    def f(x):
        return potential(chart, x[:n] + 1j * x[n:])

    m = 2 * n
    Hr = np.zeros((m, m))
    E = np.eye(m) * h
    for i in range(m):
        for j in range(m):
            Hr[i, j] = (f(x0 + E[i] + E[j]) - f(x0 + E[i] - E[j]) - f(x0 - E[i] + E[j]) + f(x0 - E[i] - E[j])) / (4 * h * h)
    xx, yy, xy, yx = Hr[:n, :n], Hr[n:, n:], Hr[:n, n:], Hr[n:, :n]
    return 2 * 0.25 * ((xx + yy) + 1j * (xy - yx))


@pytest.mark.parametrize("region", ["inner", "annulus"])
@pytest.mark.parametrize("n", [2, 3])
def test_theta_matches_finite_differences(region, n):
    rng = np.random.default_rng(n)
    for chart, u in sample_points(n, region, 6, rng):
        if FORMS.region(chart, u) != region or abs(u[chart.j - 1]) < 0.05:
            continue
        W = FORMS.theta(chart, u)
        assert np.abs(W - fd_theta(chart, u)).max() < 1e-6 * max(1.0, np.abs(W).max())


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(0)
    chart = BlowupChart(3, 2)
    u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    J = chart.jacobian(u)
    h = 1e-7
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        num = (chart.embed(u + e) - chart.embed(u - e)) / (2 * h)
        assert np.allclose(J[:, a], num, atol=1e-7)


def test_fubini_study_region_uses_closed_form():
    rng = np.random.default_rng(1)
    for chart, u in sample_points(3, "inner", 20, rng):
        assert np.allclose(FORMS.theta(chart, u), FORMS.fubini_study(chart, u))


def test_cutoff():
    assert FORMS.chi(0.5) == (1.0, 0.0, 0.0)
    assert FORMS.chi(4.5) == (0.0, 0.0, 0.0)
    for edge, val in ((1.0, 1.0), (4.0, 0.0)):
        for s in (edge * (1 + 1e-9), edge * (1 - 1e-9)):
            c, c1, c2 = FORMS.chi(s)
            assert c == pytest.approx(val, abs=1e-6)
            assert abs(c1) < 1e-6 and abs(c2) < 1e-5
    vals = [FORMS.chi(s)[0] for s in np.linspace(1, 4, 50)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_transition_maps():
    rep = chart_consistency(3, count=60)
    assert rep["points"] > 50
    assert rep["round_trip_max"] < 1e-12
    assert rep["theta_transport_max"] < 1e-9


def test_exceptional_directions():
    chart = BlowupChart(3, 1)
    u = np.array([0.0, 0.3 + 0.2j, -0.5j])
    ev = eval_forms(chart, u, 1)
    th, om = ev["theta"], ev["pullback_omega"]
    normal = np.array([1.0, 0, 0])
    assert pairing(th, normal) == 0.0
    for t in (np.array([0, 1.0, 0]), np.array([0, 0.6, 0.8j])):
        assert pairing(th, t) > 0
    assert pairing(om, normal) > 0
    assert pairing(om, np.array([0, 1.0, 0])) == 0.0


def test_outside_support():
    chart = BlowupChart(2, 2)
    ev = eval_forms(chart, np.array([0.1, 3.0]), 1)
    assert ev["region"] == "outside"
    assert not ev["theta"].any() and not ev["Theta"].any()


def mixed_wedge(mats, n):
    """Oracle for the wedge of (1,1)-forms: signed sum over index assignments."""
    p = len(mats)
    idx = list(combinations(range(n), p))
    out = np.zeros((len(idx), len(idx)), dtype=complex)

    def sgn(perm):
        s = 1
        for i in range(len(perm)):
            for j in range(i + 1, len(perm)):
                if perm[i] > perm[j]:
                    s = -s
        return s

    for a, A in enumerate(idx):
        for b, B in enumerate(idx):
            tot = 0
            for pa in permutations(range(p)):
                for pb in permutations(range(p)):
                    term = sgn(pa) * sgn(pb)
                    for t in range(p):
                        term = term * mats[t][A[pa[t]], B[pb[t]]]
                    tot += term
            out[a, b] = tot / np.prod(range(1, p + 1))
    return out * np.prod(range(1, p + 1))


@pytest.mark.parametrize("n,p", [(3, 2), (4, 2), (4, 3)])
def test_big_theta_matches_oracle(n, p):
    rng = np.random.default_rng(n + p)
    for chart, u in sample_points(n, "annulus", 2, rng) + sample_points(n, "E", 1, rng):
        ev = eval_forms(chart, u, p)
        th, om = ev["theta"], ev["pullback_omega"]
        expect = mixed_wedge([om] + [th] * (p - 1), n) + mixed_wedge([th] * p, n)
        assert np.allclose(ev["Theta"], expect, atol=1e-10)


def test_compound_pullback_of_power():
    rng = np.random.default_rng(3)
    chart, u = sample_points(3, "annulus", 1, rng)[0]
    om = FORMS.pullback_omega(chart, u)
    W = FORMS.pullback_constant(chart, u, 2 * np.eye(3), 2)
    assert np.allclose(W, mixed_wedge([om, om], 3))
    M = rng.standard_normal((3, 3))
    assert np.allclose(compound(M, 2) @ compound(M.T, 2), compound(M @ M.T, 2))


@pytest.mark.parametrize("region", ["inner", "annulus"])
def test_stokes_closedness(region):
    rep = stokes_check(3, region, count=6)
    assert rep["max_abs_face_integral"] > 1e-6
    assert rep["max_abs_boundary_integral"] < 1e-9 * max(1.0, rep["max_abs_face_integral"]) + 1e-13


class _NotClosed(BlowupForms):
    def theta(self, chart, u):
        W = np.zeros((chart.n, chart.n), dtype=complex)
        W[0, 0] = 1 + abs(u[1]) ** 2 + u[1].real
        return W


def test_stokes_detects_nonclosed_form():
    rep = stokes_check(2, "inner", count=6, size=0.2, forms=_NotClosed(1.0))
    assert rep["max_abs_boundary_integral"] > 1e-6


def test_theta_nonnegative_on_tangent_vectors():
    rng = np.random.default_rng(11)
    worst = np.inf
    for chart, u in sample_points(3, "E", 10_000, rng):
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v[chart.j - 1] = 0
        worst = min(worst, pairing(FORMS.theta(chart, u), v))
    assert worst >= 0


def test_verify_claims_small():
    rep = verify_claims(3, 2, BlowupConfig(samples=60))
    assert rep["passed"]
    d = rep["directions_on_E"]
    assert d["mixed_theta_p_max_abs"] < 1e-12 and d["mixed_Theta_min"] > 0
    assert rep["regions"]["outside"]["max_abs_coefficient"] == 0.0
    with pytest.raises(ValueError):
        verify_claims(3, 3)


def test_c_needed_for_p2():
    est = estimate_c(3, 2, config=BlowupConfig(samples=80))
    assert est.feasible and est.c > 0
    assert est.c_zero_min < BlowupConfig().c_margin
    assert est.witness["region"] == "E"


def test_c_for_curves():
    est = estimate_c(2, 1, config=BlowupConfig(samples=80))
    assert est.feasible and 0 < est.c < 1
