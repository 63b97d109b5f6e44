import numpy as np
import pytest

from dlm_filter import (Evolution, ModelParams, ObservationModel, assemble_observation, filter_pass, forecast,
                        forward_filter, predict, update)
from od_errors import FilterError
from route_choice import choice_probabilities, route_choice_matrix, route_flow_covariance_blocks, utility_series

# T = 3 days, two OD pairs, three observed links, fixed F and V
M0 = np.array([40.0, 60.0])
C0 = np.array([[30.0, 5.0], [5.0, 20.0]])
W = np.array([[4.0, 1.0], [1.0, 3.0]])
F = np.array([[0.7, 0.0], [0.3, 0.6], [0.0, 0.4]])
V = np.array([[2.0, 0.3, 0.0], [0.3, 1.5, 0.2], [0.0, 0.2, 1.0]])
Z = np.array([[30.0, 48.0, 25.0], [33.0, 45.0, 22.0], [29.0, 50.0, 27.0]])


def joint_moments(T=3, Ws=None):
    """
    Mean and covariance of (theta_1..theta_T, z_1..z_T) under the random walk
    model with evolution covariances Ws[0..T-1] (default W every day).
    """
    n = F.shape[1]
    Ws = [W]*T if Ws is None else Ws
    drift = np.cumsum([np.zeros_like(C0)] + list(Ws[:T]), axis=0)
    cov_theta = np.block([[C0 + drift[min(s, t)] for t in range(1, T + 1)] for s in range(1, T + 1)])
    Fb = np.kron(np.eye(T), F)
    Vb = np.kron(np.eye(T), V)
    cov = np.block([[cov_theta, cov_theta @ Fb.T], [Fb @ cov_theta, Fb @ cov_theta @ Fb.T + Vb]])
    mean = np.concatenate([np.tile(M0, T), Fb @ np.tile(M0, T)])
    return mean, cov, n*T


def condition(mean, cov, k, observed, values):
    """Moments of the first k coordinates given the coordinates `observed`."""
    S12 = cov[:k][:, observed]
    S22 = cov[np.ix_(observed, observed)]
    gain = np.linalg.solve(S22, S12.T).T
    return mean[:k] + gain @ (values - mean[observed]), cov[:k, :k] - gain @ S12.T


def fixed_model(t, level):
    return F, V


def test_filter_matches_joint_gaussian_conditioning():
    state = forward_filter(Z, fixed_model, M0, C0, Evolution(W=W))
    mean, cov, k = joint_moments()
    for t in range(1, 4):
        observed = list(range(k, k + 3*t))
        m, C = condition(mean, cov, k, observed, Z[:t].ravel())
        sl = slice(2*(t - 1), 2*t)
        np.testing.assert_allclose(state.m[t - 1], m[sl], atol=1e-8)
        np.testing.assert_allclose(state.C[t - 1], C[sl, sl], atol=1e-8)



def test_discount_filter_matches_joint_gaussian_conditioning():
    delta = 0.8
    state = forward_filter(Z, fixed_model, M0, C0, Evolution(discount=delta))
    Ws, C_prev = [], C0
    for t in range(1, 4):
        # W_t = (1 - delta)/delta C_{t-1} with C_{t-1} from exact conditioning
        Ws.append((1.0 - delta)/delta*C_prev)
        mean, cov, k = joint_moments(t, Ws)
        m, C = condition(mean, cov, k, list(range(k, k + 3*t)), Z[:t].ravel())
        sl = slice(2*(t - 1), 2*t)
        np.testing.assert_allclose(state.m[t - 1], m[sl], atol=1e-8)
        np.testing.assert_allclose(state.C[t - 1], C[sl, sl], atol=1e-8)
        C_prev = C[sl, sl]


def test_discount_and_recursive_explicit_w_coincide():
    delta = 0.9
    discounted = forward_filter(Z, fixed_model, M0, C0, Evolution(discount=delta))
    m, C = M0, C0
    for t in range(3):
        m_bar, C_bar = predict(m, C, Evolution(W=(1.0 - delta)/delta*C))
        m, C = update(m_bar, C_bar, F, V, Z[t], t=t + 1)
        np.testing.assert_allclose(m, discounted.m[t], atol=1e-10)
        np.testing.assert_allclose(C, discounted.C[t], atol=1e-10)


@pytest.mark.parametrize("evolution", [Evolution(W=W), Evolution(discount=0.7)])
def test_update_never_increases_the_covariance(evolution):
    state = forward_filter(Z, fixed_model, M0, C0, evolution)
    for C, C_bar in zip(state.C, state.C_bar):
        assert np.linalg.eigvalsh(C_bar - C)[0] >= -1e-8*np.trace(C_bar)


def test_forecast_moments_and_likelihood():
    state = forward_filter(Z, fixed_model, M0, C0, Evolution(W=W))
    mean, cov, k = joint_moments()
    z_mean = mean[k:]
    z_cov = cov[k:, k:]
    expected = -0.5*(9*np.log(2*np.pi) + np.linalg.slogdet(z_cov)[1]
                     + (Z.ravel() - z_mean) @ np.linalg.solve(z_cov, Z.ravel() - z_mean))
    assert state.log_likelihood(Z) == pytest.approx(expected, rel=1e-10)
    np.testing.assert_allclose(state.f[0], F @ M0)
    np.testing.assert_allclose(state.Q[0], F @ (C0 + W) @ F.T + V)


def test_discount_evolution():
    C = np.array([[2.0, 0.5], [0.5, 1.0]])
    m_bar, C_bar = predict(M0, C, Evolution(discount=0.8))
    np.testing.assert_array_equal(m_bar, M0)
    np.testing.assert_allclose(C_bar, C/0.8)
    # same prior as an explicit W = (1 - delta)/delta C
    _, C_bar_w = predict(M0, C, Evolution(W=0.25*C))
    np.testing.assert_allclose(C_bar, C_bar_w)
    # delta = 1 is the static model
    np.testing.assert_allclose(predict(M0, C, Evolution(discount=1.0))[1], C)


def test_evolution_validation():
    with pytest.raises(ValueError):
        Evolution()
    with pytest.raises(ValueError):
        Evolution(W=W, discount=0.9)
    with pytest.raises(ValueError):
        Evolution(discount=0.0)
    with pytest.raises(ValueError):
        Evolution(discount=1.2)
    assert str(Evolution(discount=0.9)) == "discount 0.9"


def test_update_is_a_kalman_step():
    C_bar = C0 + W
    m, C = update(M0, C_bar, F, V, Z[0], t=1)
    Q = F @ C_bar @ F.T + V
    A = C_bar @ F.T @ np.linalg.inv(Q)
    np.testing.assert_allclose(m, M0 + A @ (Z[0] - F @ M0))
    np.testing.assert_allclose(C, C_bar - A @ Q @ A.T, atol=1e-10)
    np.testing.assert_allclose(C, C.T)
    f, Q2 = forecast(M0, C_bar, F, V)
    np.testing.assert_allclose(Q2, Q)


def test_zero_forecast_covariance_is_reported():
    zero = np.zeros((3, 2))
    with pytest.raises(FilterError) as info:
        forward_filter(Z, lambda t, level: (zero, np.zeros((3, 3))), M0, np.zeros((2, 2)), Evolution(W=np.zeros((2, 2))))
    assert info.value.t == 1


def test_assemble_observation():
    P = np.array([[0.6, 0.0], [0.39, 0.0], [0.0, 0.99]])
    delta = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    sigma_x = np.diag([2.0, 3.0])
    sigma_y = np.diag([0.5, 0.4, 0.3])
    sigma_z = np.eye(2)
    F_t, V_t = assemble_observation(P, delta, sigma_x, sigma_y, sigma_z)
    np.testing.assert_allclose(F_t, delta @ P)
    np.testing.assert_allclose(V_t, F_t @ sigma_x @ F_t.T + delta @ sigma_y @ delta.T + sigma_z)
    with pytest.raises(ValueError):
        assemble_observation(P, np.ones((2, 4)), sigma_x, sigma_y, sigma_z)


def test_observation_model_on_simulated_data(small_problem):
    dataset, problem = small_problem
    params, route_set = problem.params, problem.route_set
    phi = np.array([0.5, 0.3])
    model = ObservationModel(phi, problem.history, params, route_set, problem.incidence, problem.T)
    p = choice_probabilities(utility_series(phi, problem.history, problem.T), route_set, params.pi)
    level = np.array([0.2, 40.0, 60.0, 80.0])
    F_t, V_t = model(3, level)
    P = route_choice_matrix(p[2], route_set)
    np.testing.assert_allclose(F_t, problem.delta @ P)
    sigma_y = route_flow_covariance_blocks(np.maximum(level, 1.0), p[2], route_set)
    np.testing.assert_allclose(V_t, F_t @ params.sigma_x @ F_t.T + problem.delta @ sigma_y @ problem.delta.T
                               + params.sigma_z, atol=1e-10)

    state = filter_pass(problem.observations, problem.history, phi, params, route_set, problem.incidence)
    assert state.T == dataset.T
    assert all(np.all(np.linalg.eigvalsh(C) > 0.0) for C in state.C)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(sigma_x=np.eye(2), sigma_z=np.eye(2), evolution=Evolution(W=np.eye(2)),
                    m0=np.zeros(2), C0=np.eye(2), observed_links=(1,))
    with pytest.raises(ValueError):
        ModelParams(sigma_x=np.eye(2), sigma_z=np.eye(1), evolution=Evolution(W=np.eye(2)),
                    m0=np.zeros(2), C0=np.eye(2), pi=0.0, observed_links=(1,))
    with pytest.raises(ValueError):
        filter_pass(np.zeros((3, 2)), None, [0.5, 0.3],
                    ModelParams(sigma_x=np.eye(2), sigma_z=np.eye(1), evolution=Evolution(W=np.eye(2)),
                                m0=np.zeros(2), C0=np.eye(2), observed_links=(1,)), None, None)
