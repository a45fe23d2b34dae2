import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from chemohapto.grid import Grid
from chemohapto.threshold import (
    ThresholdInputs,
    gamma_star,
    kappa,
    m_bar,
    m_critical,
    mu_star,
    sup_lambda_term,
)


@pytest.mark.parametrize("lam, expected", [(1.0, 1.0), (4.0, 2.0), (0.25, 1.0)])
def test_sup_lambda_term(lam, expected):
    assert sup_lambda_term(lam) == expected


def test_sup_lambda_term_matches_brute_force():
    s = np.linspace(1, 2000, 200001)
    for lam in (0.1, 0.5, 1.0, 3.0, 9.0):
        brute = np.max(lam ** (1 / (s + 1)))
        assert sup_lambda_term(lam) == pytest.approx(brute, rel=2e-3)
        assert sup_lambda_term(lam) >= brute - 1e-15


@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_sup_lambda_term_rejects_nonpositive(lam):
    with pytest.raises(ValueError):
        sup_lambda_term(lam)


def test_mu_star_examples():
    base = dict(N=2, chi=1.0, xi=1.0, w0_sup=1.0)
    assert mu_star(ThresholdInputs(mu=0.5, **base)) == pytest.approx(4 / 3, rel=1e-15)
    assert mu_star(ThresholdInputs(mu=2.0, **base)) == math.inf
    assert mu_star(ThresholdInputs(mu=0.0, **base)) == 1.0


def test_gamma_star_examples():
    assert gamma_star(4 / 3, 2) == pytest.approx(49 / 18, rel=1e-14)
    for N in (1, 3, 7):
        assert gamma_star(1.0, N) == pytest.approx(2.0)
    assert gamma_star(math.inf, 3) == math.inf
    with pytest.raises(ValueError):
        gamma_star(0.9, 2)


def test_m_critical_chain():
    r = m_critical(ThresholdInputs(2, 1.0, 1.0, 0.5, 1.0), m=0.9)
    assert r.m_crit == pytest.approx(72 / 85, rel=1e-12)
    assert r.admissible is True
    assert r.m_bar == 1.0


def test_degenerate_threshold():
    r = m_critical(ThresholdInputs(3, 1.0, 1.0, 5.0, 1.0), m=1e-6)
    assert r.mu_star == math.inf and r.gamma_star == math.inf
    assert r.m_crit == 0.0 and r.admissible
    d = json.loads(r.to_json())
    assert d["mu_star"] == "inf" and d["gamma_star"] == "inf"


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_zero_logistic_rate_recovers_pure_chemotaxis_exponent(N):
    r = m_critical(ThresholdInputs(N, 2.0, 0.5, 0.0, 3.0))
    assert r.m_crit == pytest.approx(2 * N / (N + 2))


def test_m_bar_values():
    assert m_bar(2) == 1.0
    assert m_bar(8) == 1.625
    assert m_bar(9) == pytest.approx((191 - math.sqrt(720)) / 261, rel=1e-14)
    assert m_bar(9) == pytest.approx(0.62899, abs=1e-5)
    with pytest.raises(ValueError):
        m_bar(0)


@pytest.mark.parametrize("kw", [dict(N=0), dict(chi=0.0), dict(xi=-1.0), dict(mu=-0.1),
                                dict(lambda0=0.0), dict(w0_sup=math.nan)])
def test_invalid_inputs(kw):
    args = dict(N=2, chi=1.0, xi=1.0, mu=0.5, w0_sup=1.0)
    args.update(kw)
    with pytest.raises(ValueError):
        ThresholdInputs(**args)


def test_lambda0_forms_noted_when_they_disagree():
    # lambda0 = 4: sup term is 2, max{1, lambda0} is 4
    inp = ThresholdInputs(2, 1.0, 1.0, 1.0, 1.0, lambda0=4.0)
    r = m_critical(inp)
    assert r.M == pytest.approx(4.0)
    assert r.m_crit_alt > r.m_crit
    m = 0.5 * (r.m_crit + r.m_crit_alt)
    r = m_critical(inp, m=m)
    assert r.admissible and not r.admissible_alt and r.note
    assert not m_critical(ThresholdInputs(2, 1.0, 1.0, 0.5, 1.0), m=0.9).note


pos = st.floats(0.01, 10.0)


@given(st.integers(1, 10), pos, pos, st.floats(0.0, 10.0), st.floats(0.0, 5.0), st.floats(0.05, 20.0))
def test_monotone_in_mu_and_sensitivities(N, chi, xi, mu, w0, lam):
    base = ThresholdInputs(N, chi, xi, mu, w0, lam)
    mc = m_critical(base).m_crit
    assert 0.0 <= mc < 2.0
    assert m_critical(ThresholdInputs(N, chi, xi, mu * 1.1 + 0.01, w0, lam)).m_crit <= mc
    assert m_critical(ThresholdInputs(N, chi * 1.1, xi, mu, w0, lam)).m_crit >= mc
    assert m_critical(ThresholdInputs(N, chi, xi * 1.1, mu, w0, lam)).m_crit >= mc
    assert m_critical(ThresholdInputs(N, chi, xi, mu, w0 * 1.1 + 0.01, lam)).m_crit >= mc


@given(st.integers(1, 10), pos, pos, st.floats(0.0, 5.0))
def test_mu_star_exceeds_one(N, chi, xi, w0):
    inp = ThresholdInputs(N, chi, xi, 0.0, w0)
    A = chi + xi * w0
    for frac in (0.1, 0.5, 0.9):
        ms = mu_star(ThresholdInputs(N, chi, xi, frac * A, w0))
        assert ms > 1
    assert mu_star(inp) == 1.0


def test_m_crit_tends_to_zero_as_mu_approaches_A():
    A = 2.0
    vals = [m_critical(ThresholdInputs(2, 1.0, 1.0, A * (1 - 10.0 ** -k), 1.0)).m_crit
            for k in range(1, 8)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-6


@given(st.integers(2, 8), pos, pos, st.floats(0.0, 5.0), st.floats(0.001, 0.999))
def test_m_crit_below_m_bar_for_moderate_dimensions(N, chi, xi, w0, frac):
    # for 2 <= N <= 8 the comparison exponent dominates 2N/(N+2)
    A = chi + xi * w0
    assume(A > 0)
    r = m_critical(ThresholdInputs(N, chi, xi, frac * A, w0))
    assert r.m_crit < r.m_bar


def test_kappa_constants():
    g = Grid((10,), (1.0,))
    assert kappa(g, g.full(1.0)) == pytest.approx(1 / math.e)
    assert kappa(g, g.full(3.5)) == pytest.approx(3.5 / math.e)
    with pytest.raises(ValueError):
        kappa(g, g.zeros())


def test_kappa_converges_to_analytic_value():
    L = 4.0
    # w0 = 1 + 0.5 cos(k x): |w0''| max is 0.5k^2 at x = 0;
    # (sqrt w0)' = -0.5 k sin / (2 sqrt w0) has its max where it is largest
    k = math.pi / L
    xs = np.linspace(0, L, 200001)
    w = 1 + 0.5 * np.cos(k * xs)
    grad_sq = (0.25 * k * np.sin(k * xs)) ** 2 / w
    exact = 0.5 * k * k + 4 * grad_sq.max() + 1.5 / math.e
    errs = []
    for n in (32, 64, 128, 256):
        g = Grid((n,), (L,))
        errs.append(abs(kappa(g, 1 + 0.5 * np.cos(k * g.axis_centers(0))) - exact))
    assert errs[-1] < 1e-3
    assert errs[-1] < errs[0] / 8
