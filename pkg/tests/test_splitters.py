import numpy as np
import pytest

import monosplit as ms
from monosplit.operators import ForwardOp, MonotoneOp, Problem
from monosplit.splitters import (ParameterError, SolverConfig, default_c,
                                 fast_rfb_init, gamma_cap, iterate, run_solver,
                                 validate_params)
from tests.conftest import CountingForward


# --- independent scalar-style reference implementations (test oracles) ----

def ref_prox_l1(y, g):
    out = np.zeros_like(y)
    for i, t in enumerate(y):
        if t > g:
            out[i] = t - g
        elif t < -g:
            out[i] = t + g
    return out


def ref_fast_rfb(a, gamma, alpha, c, steps, z0, y0, w0):
    """Three-line extrapolation recursion, transcribed independently.

    Returns ([z_0, z_1, ..., z_{steps+1}], [y_1, ..., y_steps]).
    """
    def F(z):
        return z - a
    z_prev = z0.copy()
    z = ref_prox_l1(y0 - gamma * F(w0), gamma)
    y_prev = y0.copy()
    zs = [z0.copy(), z.copy()]
    ys = []
    for k in range(1, steps + 1):
        y = z + (1 - alpha / (k + alpha)) * (z - z_prev) \
            + (1 - c / (k + alpha)) * (y_prev - z)
        w = z + (y - y_prev)
        z_next = ref_prox_l1(y - gamma * F(w), gamma)
        ys.append(y.copy())
        zs.append(z_next.copy())
        z_prev, z, y_prev = z, z_next, y
    return zs, ys


def shift_problem(a):
    return ms.build_known_solution_problem(np.asarray(a, dtype=float))


# --- parameter validation ---------------------------------------------------

def test_validate_params_fast_rfb_examples():
    L = 1.0
    ok = validate_params(SolverConfig(method="fast_rfb", alpha=5.0, c=2.65), L)
    assert ok.c == 2.65 and ok.gamma == pytest.approx(0.99 * 0.5)
    with pytest.raises(ParameterError, match="c"):
        validate_params(SolverConfig(method="fast_rfb", alpha=3.0, c=1.4), L)
    with pytest.raises(ParameterError, match="alpha"):
        validate_params(SolverConfig(method="fast_rfb", alpha=2.0, c=1.2), L)
    with pytest.raises(ParameterError, match="c < alpha - 1"):
        validate_params(SolverConfig(method="fast_rfb", alpha=5.0, c=4.0), L)


def test_default_c_matches_benchmark_rule():
    assert default_c(5.0) == pytest.approx(2.65)
    assert default_c(10.0) == pytest.approx(5.4)


@pytest.mark.parametrize("method,cap", [
    ("fast_rfb", 0.5), ("eg", 1.0), ("ogda", 0.5), ("fbf", 1.0), ("pfbf", 0.5),
    ("frb", 0.5), ("rfb", np.sqrt(2) - 1), ("arg", 1 / (2 * np.sqrt(6))),
    ("aeg", 1.0), ("apeg", 3 / (2 * np.sqrt(29))),
])
def test_gamma_caps(method, cap):
    L = 2.0
    assert gamma_cap(method, L) == pytest.approx(cap / L)
    with pytest.raises(ParameterError):
        validate_params(SolverConfig(method=method, gamma=cap / L * 1.0001), L)
    # arg and apeg admit gamma equal to the cap, the others do not
    cfg_at_cap = SolverConfig(method=method, gamma=cap / L)
    if method in ("arg", "apeg"):
        validate_params(cfg_at_cap, L)
    else:
        with pytest.raises(ParameterError):
            validate_params(cfg_at_cap, L)


def test_unknown_method_rejected():
    with pytest.raises(ParameterError):
        gamma_cap("peag", 1.0)


# --- fast_rfb initialization and stepping ------------------------------------

def test_fast_rfb_init_zero_problem():
    problem = Problem(monotone=MonotoneOp.zero(), forward=ForwardOp.zero(2),
                      dim=2, lipschitz=1.0)
    params = validate_params(SolverConfig(method="fast_rfb", gamma=0.25), 1.0)
    state = fast_rfb_init(problem, params, np.zeros(2), np.zeros(2), np.zeros(2))
    assert np.array_equal(state.z, np.zeros(2))
    assert np.array_equal(state.xi, np.zeros(2))
    assert state.k == 1


def test_fast_rfb_init_at_solution():
    problem = shift_problem([2.0, -0.5])
    z_star = problem.solution
    params = validate_params(SolverConfig(method="fast_rfb"), 1.0)
    state = fast_rfb_init(problem, params, z_star, z_star, z_star)
    assert np.allclose(state.z, z_star, atol=1e-15)
    assert np.allclose(state.xi, -(z_star - np.array([2.0, -0.5])), atol=1e-15)


def test_fast_rfb_init_hand_oracle():
    a = np.array([2.0, -0.5])
    problem = shift_problem(a)
    gamma = 0.4
    params = validate_params(SolverConfig(method="fast_rfb", gamma=gamma), 1.0)
    z0 = np.zeros(2)
    state = fast_rfb_init(problem, params, z0, z0, z0)
    zs, _ = ref_fast_rfb(a, gamma, params.alpha, params.c, 0, z0, z0, z0)
    assert np.array_equal(state.z, zs[1])
    # z_1 = prox(0 - 0.4*(0 - a), 0.4) = prox(0.4*a, 0.4) = (0.4, 0)
    assert np.array_equal(state.z, [0.4, 0.0])


@pytest.mark.parametrize("form", ["primal", "certificate"])
def test_fast_rfb_matches_reference_run(form):
    a = np.array([2.0, -0.5])
    problem = shift_problem(a)
    gamma, alpha, c = 0.4, 5.0, 2.65
    z0 = np.array([0.7, -1.1])
    y0 = np.array([-0.2, 0.3])
    w0 = np.array([1.0, 0.0])
    zs, ys = ref_fast_rfb(a, gamma, alpha, c, 5, z0, y0, w0)
    cfg = SolverConfig(method="fast_rfb", alpha=alpha, c=c, gamma=gamma, form=form)
    got = [state.z.copy() for state in iterate(problem, cfg, z0, y0, w0, max_iter=6)]
    for k, (ref, here) in enumerate(zip(zs[1:], got), start=1):
        assert np.allclose(here, ref, rtol=0, atol=1e-14), f"k={k}"


def test_momentum_only_recursion_hand_values():
    # M = 0, F = 0: the resolvent is the identity, so z_{k+1} = y_k and the
    # run is driven purely by the momentum and correction terms
    problem = Problem(monotone=MonotoneOp.zero(), forward=ForwardOp.zero(1),
                      dim=1, lipschitz=1.0)
    alpha, c, gamma = 5.0, 2.65, 0.25
    z0 = np.array([1.0])
    y0 = np.array([2.0])
    w0 = np.array([0.0])
    cfg = SolverConfig(method="fast_rfb", alpha=alpha, c=c, gamma=gamma, form="primal")
    got = [(s.z[0], s.y_prev[0]) for s in iterate(problem, cfg, z0, y0, w0, max_iter=6)]
    # hand recursion with plain floats
    z_prev, z, y_prev = 1.0, 2.0, 2.0   # z1 = J(y0) = y0
    assert got[0][0] == z
    for k in range(1, 6):
        y = z + (1 - alpha / (k + alpha)) * (z - z_prev) + (1 - c / (k + alpha)) * (y_prev - z)
        z_prev, z, y_prev = z, y, y     # z_{k+1} = J(y_k) = y_k
        assert got[k][0] == pytest.approx(z, abs=1e-15)
        assert got[k][1] == pytest.approx(y, abs=1e-15)


def test_fast_rfb_forms_agree_on_chain(chain_eq_20):
    problem = ms.as_inclusion(chain_eq_20)
    cfg = SolverConfig(method="fast_rfb", alpha=5.0, form="both", max_iter=1000)
    worst = 0.0
    for state in iterate(problem, cfg):
        worst = max(worst, state.form_dev)
    assert worst <= 1e-10


# --- baseline methods: one or two steps against hand transcriptions ---------

def _hand_step_setup():
    a = np.array([2.0, -0.5])
    problem = shift_problem(a)
    z0 = np.array([0.3, -1.2])
    return a, problem, z0


def test_eg_step_hand_oracle():
    a, problem, z0 = _hand_step_setup()
    gamma = 0.9
    cfg = SolverConfig(method="eg", gamma=gamma)
    it = iterate(problem, cfg, z0)
    s1 = next(it)
    w = ref_prox_l1(z0 - gamma * (z0 - a), gamma)
    z1 = ref_prox_l1(z0 - gamma * (w - a), gamma)
    assert np.allclose(s1.z, z1, atol=1e-15)
    s2 = next(it)
    w2 = ref_prox_l1(z1 - gamma * (z1 - a), gamma)
    z2 = ref_prox_l1(z1 - gamma * (w2 - a), gamma)
    assert np.allclose(s2.z, z2, atol=1e-15)


def test_ogda_step_hand_oracle():
    a, problem, z0 = _hand_step_setup()
    gamma = 0.45
    cfg = SolverConfig(method="ogda", gamma=gamma)
    it = iterate(problem, cfg, z0)
    # w_0 = z_0, so the first step uses F(z_0)
    w1 = ref_prox_l1(z0 - gamma * (z0 - a), gamma)
    z1 = ref_prox_l1(z0 - gamma * (w1 - a), gamma)
    assert np.allclose(next(it).z, z1, atol=1e-15)
    w2 = ref_prox_l1(z1 - gamma * (w1 - a), gamma)
    z2 = ref_prox_l1(z1 - gamma * (w2 - a), gamma)
    assert np.allclose(next(it).z, z2, atol=1e-15)


def test_fbf_step_hand_oracle():
    a, problem, z0 = _hand_step_setup()
    gamma = 0.9
    cfg = SolverConfig(method="fbf", gamma=gamma)
    s1 = next(iterate(problem, cfg, z0))
    w = ref_prox_l1(z0 - gamma * (z0 - a), gamma)
    z1 = w - gamma * (w - a) + gamma * (z0 - a)
    assert np.allclose(s1.z, z1, atol=1e-15)
    assert np.allclose(s1.cert, w, atol=1e-15)


def test_pfbf_step_hand_oracle():
    a, problem, z0 = _hand_step_setup()
    gamma = 0.45
    cfg = SolverConfig(method="pfbf", gamma=gamma)
    it = iterate(problem, cfg, z0)
    w1 = ref_prox_l1(z0 - gamma * (z0 - a), gamma)
    z1 = w1 - gamma * (w1 - a) + gamma * (z0 - a)
    assert np.allclose(next(it).z, z1, atol=1e-15)
    w2 = ref_prox_l1(z1 - gamma * (w1 - a), gamma)
    z2 = w2 - gamma * (w2 - a) + gamma * (w1 - a)
    assert np.allclose(next(it).z, z2, atol=1e-15)


def test_frb_step_hand_oracle():
    a, problem, z0 = _hand_step_setup()
    gamma = 0.45
    cfg = SolverConfig(method="frb", gamma=gamma)
    it = iterate(problem, cfg, z0)
    # z_1 = z_0, so the first update sees F(z_1) = F(z_0)
    z2 = ref_prox_l1(z0 - 2 * gamma * (z0 - a) + gamma * (z0 - a), gamma)
    assert np.allclose(next(it).z, z2, atol=1e-15)
    z3 = ref_prox_l1(z2 - 2 * gamma * (z2 - a) + gamma * (z0 - a), gamma)
    assert np.allclose(next(it).z, z3, atol=1e-15)


def test_rfb_step_hand_oracle():
    a, problem, z0 = _hand_step_setup()
    gamma = 0.4
    cfg = SolverConfig(method="rfb", gamma=gamma)
    it = iterate(problem, cfg, z0)
    z2 = ref_prox_l1(z0 - gamma * (z0 - a), gamma)       # w = 2 z0 - z0
    assert np.allclose(next(it).z, z2, atol=1e-15)
    w = 2 * z2 - z0
    z3 = ref_prox_l1(z2 - gamma * (w - a), gamma)
    assert np.allclose(next(it).z, z3, atol=1e-15)


def test_arg_step_hand_oracle():
    a, problem, z0 = _hand_step_setup()
    gamma = 0.2
    cfg = SolverConfig(method="arg", gamma=gamma)
    it = iterate(problem, cfg, z0)
    # z_0 = z_1; the first update reduces to a forward-backward step
    z2 = ref_prox_l1(z0 - gamma * (z0 - a), gamma)
    assert np.allclose(next(it).z, z2, atol=1e-15)
    x2 = 2 * z2 - z0 + (z0 - z2) / 3.0 - (z0 - z0) / 2.0
    z3 = ref_prox_l1(z2 - gamma * (x2 - a) + (z0 - z2) / 3.0, gamma)
    assert np.allclose(next(it).z, z3, atol=1e-15)


def test_aeg_step_hand_oracle():
    a, problem, z0 = _hand_step_setup()
    gamma = 0.9
    cfg = SolverConfig(method="aeg", gamma=gamma)
    it = iterate(problem, cfg, z0)
    # x_0 = z_1 = z_0, w_0 = 0
    x1 = ref_prox_l1(z0 - gamma * (z0 - a), gamma)
    w1 = (z0 - x1) / gamma + (x1 - a) - (z0 - a)
    z2 = x1 + (2.0 / 4.0) * (x1 - z0) - (3.0 / 4.0) * gamma * ((x1 - a) - (z0 - a))
    s1 = next(it)
    assert np.allclose(s1.z, z2, atol=1e-15)
    assert np.allclose(s1.cert, x1, atol=1e-15)
    x2 = ref_prox_l1(z2 - gamma * (z2 - a) + (3.0 / 4.0) * gamma * w1, gamma)
    assert np.allclose(next(it).cert, x2, atol=1e-15)


def test_apeg_step_hand_oracle():
    a, problem, z0 = _hand_step_setup()
    gamma = 0.25
    cfg = SolverConfig(method="apeg", gamma=gamma)
    it = iterate(problem, cfg, z0)
    x1 = ref_prox_l1(z0 - gamma * (z0 - a), gamma)
    w1 = (z0 - x1) / gamma
    z2 = x1 + (2.0 / 4.0) * (x1 - z0) + (5 * 3 / (6 * 4)) * gamma * w1
    assert np.allclose(next(it).z, z2, atol=1e-15)
    x2 = ref_prox_l1(z2 - gamma * (z2 - a) + (3.0 / 4.0) * gamma * w1, gamma)
    w2 = (z2 - x2 + (3.0 / 4.0) * gamma * w1) / gamma
    z3 = x2 + (3.0 / 5.0) * (x2 - x1) + (5 * 4 / (6 * 5)) * gamma * w2 \
        - (5 * 3 / (6 * 5)) * gamma * w1
    assert np.allclose(next(it).z, z3, atol=1e-15)


# --- shared method properties -------------------------------------------------

@pytest.mark.parametrize("method", ms.METHODS)
def test_stationarity_at_solution(method):
    problem = shift_problem([2.0, -0.5])
    z_star = problem.solution
    cfg = SolverConfig(method=method)
    dev = 0.0
    for state in iterate(problem, cfg, z_star, z_star, z_star, max_iter=50):
        dev = max(dev, float(np.max(np.abs(state.z - z_star))))
    assert dev <= 1e-12


@pytest.mark.parametrize("method", ms.METHODS)
def test_zero_problem_is_fixed(method):
    problem = Problem(monotone=MonotoneOp.zero(), forward=ForwardOp.zero(3),
                      dim=3, lipschitz=1.0)
    z0 = np.array([0.5, -2.0, 1.0])
    cfg = SolverConfig(method=method, gamma=0.1)
    for state in iterate(problem, cfg, z0, max_iter=20):
        assert np.array_equal(state.z, z0)


_EVALS_PER_STEP = {"fast_rfb": 1, "eg": 2, "ogda": 1, "fbf": 2, "pfbf": 1,
                   "frb": 1, "rfb": 1, "arg": 1, "aeg": 2, "apeg": 1}


@pytest.mark.parametrize("method", ms.METHODS)
def test_forward_evaluation_counts(method):
    problem = shift_problem([2.0, -0.5])
    cfg = SolverConfig(method=method)
    steps = 25
    with CountingForward(problem) as counter:
        it = iterate(problem, cfg, np.array([0.4, 0.1]), max_iter=steps + 1)
        next(it)                   # init (plus first update for most methods)
        after_first = counter.calls
        for _ in range(steps):
            next(it)
        total = counter.calls
    assert total - after_first == steps * _EVALS_PER_STEP[method]


# --- driver behavior ----------------------------------------------------------

def test_run_solver_known_solution_convergence(known_n2):
    cfg = SolverConfig(method="fast_rfb", alpha=5.0, max_iter=10000)
    trace = run_solver(known_n2, cfg, record_every=0)
    assert np.linalg.norm(trace.final_z - known_n2.solution) <= 1e-6


def test_run_solver_bookkeeping(known_n2):
    cfg = SolverConfig(method="eg", max_iter=10)
    trace = run_solver(known_n2, cfg, stop=ms.StoppingRule("kkt_norm", 1e-30))
    assert trace.iterations == 10
    assert not trace.success
    assert trace.hit_k is None
    assert list(trace.k) == list(range(1, 11))
    assert np.all(np.isfinite(trace.velocity))
    assert np.all(np.isfinite(trace.resid_upper))
    assert np.all(np.diff(trace.time_s) >= 0)


def test_run_solver_stop_fires(known_n2):
    cfg = SolverConfig(method="fast_rfb", max_iter=10000)
    trace = run_solver(known_n2, cfg, stop=ms.StoppingRule("kkt_norm", 1e-6))
    assert trace.success
    assert trace.hit_k == trace.iterations < 10000
    assert trace.resid_upper[-1] <= 1e-6


def test_run_solver_record_every(known_n2):
    cfg = SolverConfig(method="fast_rfb", max_iter=100)
    trace = run_solver(known_n2, cfg, record_every=10)
    assert list(trace.k) == [1] + list(range(10, 101, 10))


def test_residual_ordering_and_velocity(known_n50):
    cfg = SolverConfig(method="fast_rfb", alpha=5.0, max_iter=500)
    trace = run_solver(known_n50, cfg, record_every=1, fix_residual=True)
    assert np.all(trace.fix_residual <= trace.resid_upper + 1e-12)


@pytest.mark.parametrize("alpha", [5.0, 10.0])
def test_velocity_decay_on_chain(chain_ineq_200, alpha):
    # the inequality variant reaches its asymptotic regime within 1e4
    # iterations; the equality variant is still in transit there (its own
    # comparison-table counts put arrival near 2e4)
    problem = ms.as_inclusion(chain_ineq_200)
    cfg = SolverConfig(method="fast_rfb", alpha=alpha, max_iter=10000)
    trace = run_solver(problem, cfg, record_every=1)
    kv = trace.k * trace.velocity
    early = kv[(trace.k >= 100) & (trace.k <= 200)].max()
    late = kv[(trace.k >= 5000) & (trace.k <= 10000)].max()
    assert late < early


def test_initial_point_dimension_checked(known_n2):
    cfg = SolverConfig(method="eg")
    with pytest.raises(ParameterError):
        next(iterate(known_n2, cfg, np.zeros(5)))
