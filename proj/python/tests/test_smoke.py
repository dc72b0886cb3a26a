import math

import numpy as np
import pytest

import dissipwave as dw

L = math.pi


def test_neumann_spectrum_is_integer_lattice():
    t = dw.solve_spectrum(16, dw.RobinPair(0.0, 0.0), L)
    assert len(t) == 17
    np.testing.assert_allclose(np.array(t.lams), np.arange(17), atol=1e-12)


def test_damped_roots_and_gap():
    rb = dw.RobinPair(1.0, 1.0)
    t = dw.solve_spectrum(32, rb, L)
    for m in t.modes:
        assert dw.characteristic_residual(m.lam, rb, L) < 1e-10
        assert m.mu.imag < 0
    g = dw.spectral_gap(t)
    assert g.gap > 0 and g.depth_ok
    assert g.gap == pytest.approx(min(-m.mu.imag for m in t.modes) if g.attaining_index is not None else 4 / L)


def test_gram_and_duals():
    t = dw.solve_spectrum(64, dw.RobinPair(1.0, 1.0), L)
    rep = dw.gram_report(t, 32)
    assert 1.0 <= rep.riesz_condition < 10.0
    g = dw.gram_matrix(t, 8)
    assert np.allclose(g, g.conj().T)
    assert dw.biorthogonality_residual(t, 32) < 1e-8


def test_distance_vanishes_on_spectrum():
    t = dw.solve_spectrum(20, dw.RobinPair(1.0, 1.0), L)
    d = dw.spectrum_distance(t, [t.mus[3], t.mus[3] + 0.5, complex(0.0, 5.0)])
    assert d[0] < 1e-12 and d[1] < 1e-12 and d[2] > 4.0


def test_overdamping_crossings():
    rep = dw.overdamping_scan(dw.RobinPair(1.0, -0.5), L, n_max=2, s_max=4.0, steps=81)
    s = [c.s_star for c in rep.crossings]
    np.testing.assert_allclose(s, [math.sqrt(2) * (n + 0.5) for n in range(3)], atol=1e-9)


def test_figure_data_shape():
    rep = dw.figure_data(n_max=5, steps=11)
    assert len(rep.branches) == 6
    assert all(len(b) == 11 for b in rep.branches)


def test_modal_decay_and_roundtrip():
    t = dw.solve_spectrum(16, dw.RobinPair(1.0, 1.0), L)
    plan = dw.EvolutionPlan(t, x_box=20.0, n_x=128, n_modes=6)
    u0 = plan.mode_state(2, width=1.5)
    u1 = plan.propagate(u0, 3.0)
    assert plan.norm(u1) / plan.norm(u0) == pytest.approx(math.exp(3.0 * t.mus[2].imag), rel=1e-10)
    state, defect = plan.decompose(plan.synthesize(u0))
    assert defect < 1e-8
    np.testing.assert_allclose(state.coeffs, u0.coeffs, atol=1e-8)


def test_errors_carry_kind():
    with pytest.raises(dw.SolverError) as info:
        dw.overdamping_scan(dw.RobinPair(1.0, 1.0), L)
    assert info.value.kind == "PreconditionViolated"
