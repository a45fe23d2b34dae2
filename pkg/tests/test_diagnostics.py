import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chemohapto.diagnostics import (
    DiagnosticsContext,
    TestFunction,
    check_invariants,
    lp_norm,
    ode_oracle,
    ode_oracle_at,
    weak_residual,
)
from chemohapto.grid import Grid
from chemohapto.physics import DiffusivitySpec, Sensitivities
from chemohapto.solver import SolverConfig, State, run


def test_lp_norm_examples():
    g = Grid((10,), (1.0,))
    assert lp_norm(g, g.full(2.0), 3) == pytest.approx(2.0)
    g3 = Grid((3,), (3.0,))
    assert lp_norm(g3, np.array([1.0, -3.0, 2.0]), math.inf) == 3.0
    assert lp_norm(g3, np.array([1.0, -3.0, 2.0]), "inf") == 3.0
    with pytest.raises(ValueError):
        lp_norm(g, g.full(1.0), 0.5)


def test_lp_norm_sine_converges():
    errs = []
    for n in (16, 32, 64):
        g = Grid((n,), (1.0,))
        errs.append(abs(lp_norm(g, np.sin(np.pi * g.axis_centers(0)), 2) - 1 / math.sqrt(2)))
    # the midpoint rule integrates sin^2 exactly on a full period
    assert max(errs) < 1e-12


def test_lp_norm_no_overflow_for_large_exponents():
    g = Grid((4,), (1.0,))
    f = np.array([1e200, 1.0, 0.0, 2.0])
    assert math.isfinite(lp_norm(g, f, 64))


small = arrays(np.float64, 12, elements=st.floats(-100, 100))


@given(small, st.floats(1.0, 20.0))
def test_lp_norm_monotone(f, p):
    g = Grid((12,), (1.0,))
    bigger = np.abs(f) + 0.5
    assert lp_norm(g, f, p) <= lp_norm(g, bigger, p) * (1 + 1e-12)


@given(arrays(np.float64, 64, elements=st.floats(0.9, 1.0)))
def test_lp_norm_high_exponent_approaches_max(f):
    # holds when the near-max set fills the unit domain; it fails for isolated spikes
    g = Grid((64,), (1.0,))
    f = f.copy()
    f[: 48] = np.max(f)
    assert lp_norm(g, f, 64) == pytest.approx(np.max(f), rel=1e-2)


def make_ctx(g, u, v, w, mu=0.5):
    s = State.initial(u, v, w)
    return s, DiagnosticsContext.from_initial(g, s, Sensitivities(1, 1, mu))


def test_equilibrium_record():
    g = Grid((6,), (1.0,))
    s, ctx = make_ctx(g, g.full(1.0), g.full(1.0), g.zeros())
    rec = check_invariants(s, ctx)
    assert rec.mass_residual == 0.0
    assert rec.kappa_violation == 0.0
    assert not rec.hard_violation
    assert rec.flags == []


def test_injected_w_violation_is_hard():
    g = Grid((6,), (1.0,))
    s, ctx = make_ctx(g, g.full(1.0), g.zeros(), g.full(1.0))
    s.w[2] = 1.5
    rec = check_invariants(s, ctx)
    assert "w_above_sup" in rec.flags and rec.hard_violation


def test_injected_negative_density_is_hard():
    g = Grid((6,), (1.0,))
    s, ctx = make_ctx(g, g.full(1.0), g.zeros(), g.full(1.0))
    s.u[0] = -1e-3
    assert "neg_u" in check_invariants(s, ctx).flags


def test_l1_bound_along_decay_run():
    g = Grid((32,), (4.0,))
    x = g.axis_centers(0)
    s = State.initial(3 + np.cos(np.pi * x / 4), g.zeros(), g.full(0.5))
    sens = Sensitivities(1, 1, 2.0)
    res = run(s, g, DiffusivitySpec(), sens, SolverConfig(t_end=3.0, output_every=0.1))
    bound = max(g.integrate(s.u), g.measure)
    assert all(r.l1_u <= bound * (1 + 1e-6) for r in res.records)
    assert not any("l1_exceeded" in r.flags for r in res.records)


def test_oracle_equilibrium():
    _, y = ode_oracle(1.0, (1.0, 1.0, 0.0), 5.0, 0.01)
    assert np.allclose(y, [1.0, 1.0, 0.0], atol=1e-14)


def test_oracle_without_cells():
    v0, w0 = 0.7, 2.0
    t, y = ode_oracle(1.0, (0.0, v0, w0), 4.0, 0.01)
    assert np.all(y[:, 0] == 0)
    assert np.allclose(y[:, 1], v0 * np.exp(-t), rtol=1e-9)
    assert np.allclose(y[:, 2], w0 * np.exp(-v0 * (1 - np.exp(-t))), rtol=1e-9)


def test_oracle_logistic():
    t, y = ode_oracle(1.0, (0.1, 0.0, 0.0), 6.0, 0.01)
    assert np.allclose(y[:, 0], 0.1 / (0.1 + 0.9 * np.exp(-t)), rtol=1e-9)
    assert np.all(y[:, 2] == 0)


def test_oracle_ends_exactly_at_T_and_rejects_bad_input():
    t, _ = ode_oracle(1.0, (0.5, 0.2, 1.0), 1.0, 0.3)
    assert t[-1] == 1.0
    with pytest.raises(ValueError):
        ode_oracle(1.0, (-0.1, 0, 0), 1.0, 0.1)
    at = ode_oracle_at(1.0, (0.5, 0.2, 1.0), [0.0, 0.5, 1.0], 0.01)
    assert np.allclose(at[-1], ode_oracle(1.0, (0.5, 0.2, 1.0), 1.0, 0.01)[1][-1])


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 3), st.floats(0, 5))
def test_oracle_nonnegative(u, v, w, mu):
    _, y = ode_oracle(mu, (u, v, w), 2.0, 0.01)
    assert np.all(y >= -1e-12)


def test_test_function_profiles():
    tf = TestFunction((1,), T=2.0)
    assert tf.psi(0.0) == 1.0 and tf.psi(2.0) == 0.0
    t = np.linspace(0.1, 1.9, 7)
    h = 1e-6
    assert np.allclose(tf.dpsi(t), (tf.psi(t + h) - tf.psi(t - h)) / (2 * h), rtol=1e-5)
    assert np.all(TestFunction(time_profile="constant").dpsi(t) == 0)


def _run_snaps(g, s, sens, T, spec=DiffusivitySpec(), every=0.05):
    res = run(s, g, spec, sens, SolverConfig(t_end=T, output_every=every, dt_max=1e-3))
    return res.snapshots


def test_weak_residual_for_empty_density():
    g = Grid((16,), (2.0,))
    s = State.initial(g.zeros(), 1 + np.cos(np.pi * g.axis_centers(0) / 2), g.full(1.0))
    snaps = _run_snaps(g, s, Sensitivities(1, 1, 1), 1.0)
    r = weak_residual(g, snaps, DiffusivitySpec(), Sensitivities(1, 1, 1), TestFunction((1,), 1.0))
    assert r.residual_u == 0.0
    assert r.residual_w < 1e-3


def test_weak_residual_time_independent_w_identity():
    g = Grid((16,), (2.0,))
    x = g.axis_centers(0)
    w0 = 1 + 0.3 * np.cos(np.pi * x / 2)
    s = State.initial(1 + 0.5 * np.cos(np.pi * x / 2), g.full(0.5), w0)
    sens = Sensitivities(1, 1, 0.5)
    snaps = _run_snaps(g, s, sens, 1.0, every=0.01)
    tf = TestFunction((1,), 1.0, "constant")
    r = weak_residual(g, snaps, DiffusivitySpec(), sens, tf)
    c, _, _ = tf.spatial(g)
    wT = snaps[-1][1].w
    direct = np.sum((w0 - wT) * c) * g.cell_volume
    # lhs of the w identity is int (w(T) - w0) phi
    assert r.lhs[2] == pytest.approx(-direct, rel=1e-12)
    assert r.residual_w < 1e-3


def test_weak_residual_needs_three_snapshots():
    g = Grid((4,), (1.0,))
    s = State.initial(g.full(1.0), g.zeros(), g.full(1.0))
    with pytest.raises(ValueError):
        weak_residual(g, [s, s], DiffusivitySpec(), Sensitivities(), TestFunction())
