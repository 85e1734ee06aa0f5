import numpy as np
import pytest

from ddattack.errors import EmptySeries, TooFewSamples, WindowBelowObservabilityIndex
from ddattack.features import (
    FeatureBasis,
    FeatureDynamics,
    assemble_shifted_pair,
    data_feature_basis,
    feature_sequence,
    fit_feature_dynamics,
    learn_from_outputs,
    model_feature_basis,
    model_feature_dynamics,
)
from ddattack.hankel import build_hankel
from ddattack.indices import excitability_index, observability_index
from ddattack.linsys import LtiSystem, observability_matrix, simulate, stack_window
from ddattack.numerics import kernel_basis, projection_residual

from conftest import planted_system, shift_system


def test_model_basis_examples():
    b = model_feature_basis(shift_system(), 2)
    assert b.q == 2 and np.allclose(b.basis.T @ b.basis, np.eye(2))
    blind = LtiSystem(np.eye(2), np.zeros((2, 1)), np.zeros((1, 2)))
    assert model_feature_basis(blind, 3).q == 0
    ident = LtiSystem(np.eye(2), np.zeros((2, 1)), [[1.0, 0.0]])
    b = model_feature_basis(ident, 3)
    assert b.q == 1 and np.allclose(b.basis[:, 0], np.ones(3) / np.sqrt(3))


def test_data_basis_examples():
    assert data_feature_basis(build_hankel(np.zeros(5), 2)).q == 0
    b = data_feature_basis(build_hankel([0.0, 1.0, 0.0], 2))
    assert b.q == 2
    b = data_feature_basis(build_hankel([1.0, 0.5, 0.25], 1))
    assert b.q == 1 and b.basis.tolist() == [[1.0]]


def test_feature_sequence_examples(rng):
    y = rng.standard_normal((6, 2))
    w = feature_sequence(FeatureBasis(2, np.eye(4), "data-driven"), y)
    assert np.array_equal(w, np.array([stack_window(y, k, 2) for k in range(5)]))
    assert not feature_sequence(FeatureBasis(2, np.eye(4), "data-driven"), np.zeros((5, 2))).any()
    geo = 0.5 ** np.arange(6)
    w = feature_sequence(FeatureBasis(1, np.array([[1.0]]), "data-driven"), geo)
    assert np.array_equal(w[:, 0], geo)


def test_assemble_shifted_pair_examples():
    W, Wf = assemble_shifted_pair([[1.0], [2.0], [3.0]])
    assert W.tolist() == [[1, 2]] and Wf.tolist() == [[2, 3]]
    v = [0.3, -1.0]
    W, Wf = assemble_shifted_pair([v] * 4)
    assert np.array_equal(W, Wf)
    geo = (0.5 ** np.arange(5)).reshape(-1, 1)
    W, Wf = assemble_shifted_pair(geo)
    assert np.array_equal(Wf, 0.5 * W)
    with pytest.raises(TooFewSamples):
        assemble_shifted_pair([[1.0]])


def test_fit_examples():
    W, Wf = assemble_shifted_pair((0.5 ** np.arange(6)).reshape(-1, 1))
    d = fit_feature_dynamics(W, Wf)
    assert np.allclose(d.M, [[0.5]]) and d.fit_residual <= 1e-15
    d = fit_feature_dynamics(np.zeros((2, 3)), np.zeros((2, 3)))
    assert not d.M.any() and d.fit_residual == 0.0


def test_model_dynamics_examples():
    sys = shift_system()
    b = model_feature_basis(sys, 2)
    M = model_feature_dynamics(sys, b).M
    assert np.allclose(M @ M, 0, atol=1e-15) and np.linalg.norm(M) > 0.5
    ident = LtiSystem(np.eye(3), np.zeros((3, 1)), np.eye(3)[:2])
    b = model_feature_basis(ident, 2)
    assert np.allclose(model_feature_dynamics(ident, b).M, np.eye(b.q))
    scalar = LtiSystem([[0.5]], [[0.0]], [[1.0]])
    assert np.allclose(model_feature_dynamics(scalar, model_feature_basis(scalar, 1)).M, [[0.5]])


def test_model_dynamics_rejects_short_windows():
    sys = shift_system()
    with pytest.raises(WindowBelowObservabilityIndex):
        model_feature_dynamics(sys, model_feature_basis(sys, 1))


def test_empty_hankel_rejected():
    from ddattack.hankel import HankelMatrix

    with pytest.raises(EmptySeries):
        data_feature_basis(HankelMatrix(1, 0, 1, np.zeros((1, 0))))


def planted(seed, count, n_max=8):
    g = np.random.default_rng(seed)
    for _ in range(count):
        n = int(g.integers(1, n_max + 1))
        yield g, planted_system(g, n, 1, int(g.integers(1, 4)), repeat=bool(g.integers(2)), hidden=int(g.integers(2)))


def test_model_feature_recursion():
    for g, pl in planted(21, 15):
        sys = pl.sys
        nu = observability_index(sys)
        basis = model_feature_basis(sys, nu)
        M = model_feature_dynamics(sys, basis).M
        for _ in range(20):
            y, _ = simulate(sys, g.standard_normal(sys.n), None, nu + 2 * sys.n + 1)
            w = feature_sequence(basis, y)
            for k in range(2 * sys.n):
                assert np.linalg.norm(w[k + 1] - M @ w[k]) <= 1e-8 * np.linalg.norm(w[k]) + 1e-14


def test_kernel_equality_for_model_basis():
    for _, pl in planted(22, 25):
        sys = pl.sys
        nu = observability_index(sys)
        for N in (nu, nu + 2):
            O = observability_matrix(sys, N)
            S = model_feature_basis(sys, N).basis
            K1, K2 = kernel_basis(S.T @ O), kernel_basis(O)
            assert K1.shape == K2.shape
            assert np.linalg.norm(projection_residual(K1, K2)) <= 1e-8
            assert np.linalg.norm(projection_residual(K2, K1)) <= 1e-8


def test_data_fit_is_exact_and_predicts_held_out():
    for g, pl in planted(23, 20):
        sys = pl.sys
        nu, mu = observability_index(sys), excitability_index(sys)
        N = nu + int(g.integers(0, 2))
        T = N + mu - 1 + int(g.integers(0, 3))
        y, _ = simulate(sys, g.standard_normal(sys.n), None, T + 21)
        basis, dyn = learn_from_outputs(y, N, T)
        W, Wf = assemble_shifted_pair(feature_sequence(basis, y[:T + 1]))
        assert W.shape[1] == T - N + 1
        assert dyn.fit_residual <= 1e-8 * max(np.linalg.norm(Wf), 1e-300)
        w = feature_sequence(basis, y)
        scale = np.max(np.linalg.norm(w, axis=1))
        for k in range(T - N + 1, len(w) - 1):
            assert np.linalg.norm(w[k + 1] - dyn.M @ w[k]) <= 1e-7 * scale


def test_data_spectrum_matches_system_spectrum():
    g = np.random.default_rng(24)
    checked = 0
    for _ in range(20):
        n = int(g.integers(1, 5))
        pl = planted_system(g, n, 1, int(g.integers(1, 3)))
        sys = pl.sys
        nu, mu = observability_index(sys), excitability_index(sys)
        if pl.observable_dim != n or mu != n:
            continue
        y, _ = simulate(sys, g.standard_normal(n), None, nu + mu)
        _, dyn = learn_from_outputs(y, nu, nu + mu - 1)
        got = np.sort_complex(np.linalg.eigvals(dyn.M))
        want = np.sort_complex(np.linalg.eigvals(sys.A))
        assert got.shape == want.shape
        assert np.max(np.abs(got - want)) <= 1e-6
        checked += 1
    assert checked >= 10


def test_feature_dynamics_json_round_trip(rng):
    d = FeatureDynamics(rng.standard_normal((3, 3)), 1.5e-12)
    back = FeatureDynamics.from_json(d.to_json())
    assert np.array_equal(back.M, d.M) and back.fit_residual == d.fit_residual
