import numpy as np
import pytest

import monosplit as ms
from monosplit.numkit import SparseMatrix
from monosplit.operators import ConeKind, MonotoneOp
from monosplit.primal_dual import (PDCertificates, SaddleProblem, as_inclusion,
                                   compute_reference, composite_step, cone_step,
                                   lagrangian, objective_value, pack,
                                   pd_certificates, pd_diagnostics, pd_init,
                                   run_pd, saddle_step, unpack)
from monosplit.splitters import (ParameterError, SolverConfig, iterate,
                                 validate_params)


def test_pack_unpack_roundtrip():
    x = np.arange(3.0)
    lam = np.array([5.0, -1.0])
    z = pack(x, lam)
    x2, lam2 = unpack(z, 3)
    assert np.array_equal(x2, x) and np.array_equal(lam2, lam)


def test_as_inclusion_shape(chain_eq_20):
    problem = as_inclusion(chain_eq_20)
    assert problem.dim == 40
    assert problem.monotone.blocks == (20, 20)
    assert problem.lipschitz == chain_eq_20.lipschitz


@pytest.mark.parametrize("variant,cone", [
    ("cone", ConeKind.NONNEG_ORTHANT),
    ("cone", ConeKind.ZERO_CONE),
    ("composite", ConeKind.ZERO_CONE),
    ("composite", ConeKind.NONNEG_ORTHANT),
    ("saddle", ConeKind.NONNEG_ORTHANT),
])
def test_wrapper_matches_generic(variant, cone):
    sp = ms.build_qp_problem(30, cone)
    problem = as_inclusion(sp)
    cfg = SolverConfig(method="fast_rfb", alpha=5.0, max_iter=1000)
    params = validate_params(cfg, sp.lipschitz)
    steppers = {"cone": cone_step, "composite": composite_step, "saddle": saddle_step}
    step = steppers[variant]
    state = pd_init(sp, params, np.zeros(sp.nx), np.zeros(sp.ny), variant=variant)
    worst = 0.0
    for gen in iterate(problem, cfg):
        z_wrap = pack(state.x, state.lam)
        dev = np.linalg.norm(gen.z - z_wrap) / (1.0 + np.linalg.norm(gen.z))
        worst = max(worst, dev)
        # certificates of the packed run are the (u, v) pair blockwise
        u, v = unpack(gen.xi, sp.nx)
        offset = sp.b if variant == "composite" else 0.0
        assert np.allclose(state.u, u, atol=1e-10)
        assert np.allclose(state.v - offset, v, atol=1e-10)
        if gen.k < 1000:
            step(state, params, sp)
    assert worst <= 1e-12


def test_stationary_start_stays(chain_eq_20):
    sp = chain_eq_20
    x_star, lam_star = ms.reference_solution(sp)
    cfg = SolverConfig(method="fast_rfb", alpha=5.0, max_iter=30)
    params = validate_params(cfg, sp.lipschitz)
    state = pd_init(sp, params, x_star, lam_star, variant="cone")
    for _ in range(30):
        cone_step(state, params, sp)
        assert np.linalg.norm(state.x - x_star) <= 1e-10
        assert np.linalg.norm(state.lam - lam_star) <= 1e-10


def test_stationary_certificate_value(chain_eq_20):
    # at a stationary start the first certificate is -grad_h(x*) - A^T lam*
    sp = chain_eq_20
    x_star, lam_star = ms.reference_solution(sp)
    cfg = SolverConfig(method="fast_rfb", alpha=5.0)
    params = validate_params(cfg, sp.lipschitz)
    state = pd_init(sp, params, x_star, lam_star, variant="cone")
    expected = -(sp.grad_h(x_star) + sp.A.rmatvec(lam_star))
    assert np.allclose(state.u, expected, atol=1e-10)
    certs = pd_certificates(state)
    assert np.array_equal(certs.u, state.u) and np.array_equal(certs.v, state.v)
    certs.u[0] += 1.0   # certificates are frozen copies, not views
    assert certs.u[0] != state.u[0]


def test_zero_coupling_reduces_to_momentum():
    # f = g = 0 and no coupling: the packed run and the wrapper both reduce
    # to the pure momentum recursion
    nx = ny = 2
    sp = SaddleProblem(f=MonotoneOp.zero(), H=None, h=None,
                       A=SparseMatrix(ny, nx, []), b=np.zeros(ny),
                       cone=ConeKind.ZERO_CONE, lipschitz=1.0)
    problem = as_inclusion(sp)
    cfg = SolverConfig(method="fast_rfb", alpha=5.0, gamma=0.25, max_iter=50)
    params = validate_params(cfg, 1.0)
    x0 = np.array([1.0, -1.0])
    lam0 = np.array([0.5, 2.0])
    state = pd_init(sp, params, x0, lam0, variant="saddle")
    for gen in iterate(problem, cfg, z0=pack(x0, lam0)):
        assert np.allclose(pack(state.x, state.lam), gen.z, atol=1e-14)
        if gen.k < 50:
            saddle_step(state, params, sp)


def test_cone_zero_equals_composite_shift(chain_eq_20):
    sp = chain_eq_20
    cfg = SolverConfig(method="fast_rfb", alpha=5.0, max_iter=300)
    params = validate_params(cfg, sp.lipschitz)
    s1 = pd_init(sp, params, np.zeros(sp.nx), np.zeros(sp.ny), variant="cone")
    s2 = pd_init(sp, params, np.zeros(sp.nx), np.zeros(sp.ny), variant="composite")
    for _ in range(300):
        cone_step(s1, params, sp)
        composite_step(s2, params, sp)
        scale = 1.0 + np.linalg.norm(s1.x)
        assert np.linalg.norm(s1.x - s2.x) <= 1e-11 * scale
        assert np.linalg.norm(s1.lam - s2.lam) <= 1e-11 * scale


def test_certificate_membership_along_run(chain_ineq_200):
    sp = chain_ineq_200
    cfg = SolverConfig(method="fast_rfb", alpha=5.0, max_iter=500)
    params = validate_params(cfg, sp.lipschitz)
    state = pd_init(sp, params, np.zeros(sp.nx), np.zeros(sp.ny), variant="cone")
    for _ in range(500):
        cone_step(state, params, sp)
        u = state.u
        assert np.all(np.abs(u) <= 1.0 + 1e-8)
        live = state.x != 0.0
        assert np.allclose(u[live], np.sign(state.x[live]), atol=1e-8)
        # dual certificate: v in -K exactly, lam in K*, complementarity
        assert np.all(state.v <= 0.0)
        assert np.all(state.lam >= 0.0)
        assert abs(np.dot(state.lam, state.v)) <= 1e-8


def test_complementarity_bound_each_iteration(chain_ineq_200):
    sp = chain_ineq_200
    cfg = SolverConfig(method="fast_rfb", alpha=5.0, max_iter=300)
    params = validate_params(cfg, sp.lipschitz)
    state = pd_init(sp, params, np.zeros(sp.nx), np.zeros(sp.ny), variant="cone")
    for _ in range(300):
        cone_step(state, params, sp)
        ax_b = sp.A.matvec(state.x) - sp.b
        lhs = abs(np.dot(state.lam, ax_b))
        rhs = np.linalg.norm(state.lam) * np.linalg.norm(ax_b - state.v)
        assert lhs <= rhs + 1e-12


def test_diagnostics_zero_at_solution(chain_eq_20):
    sp = chain_eq_20
    ref = ms.reference_solution(sp)
    x_star, lam_star = ref
    u_star = -(sp.grad_h(x_star) + sp.A.rmatvec(lam_star))
    v_star = sp.A.matvec(x_star) - sp.b
    rec = pd_diagnostics((x_star, lam_star), PDCertificates(u_star, v_star), sp, ref)
    for key in ("tangent", "feasibility", "complementarity",
                "lagrangian_gap", "obj_gap"):
        assert abs(rec[key]) <= 1e-9, key


def test_objective_gap_against_grid_oracle():
    # two-stage exhaustive grid on the n=2 inequality-constrained instance
    sp = ms.build_qp_problem(2, ConeKind.NONNEG_ORTHANT)

    def objective(x1, x2):
        x = np.array([x1, x2])
        return objective_value(sp, x)

    def feasible(x1, x2):
        x = np.array([x1, x2])
        return np.all(sp.A.matvec(x) - sp.b <= 1e-12)

    def grid_min(lo1, hi1, lo2, hi2, steps):
        best = (np.inf, None)
        for x1 in np.linspace(lo1, hi1, steps):
            for x2 in np.linspace(lo2, hi2, steps):
                if feasible(x1, x2):
                    val = objective(x1, x2)
                    if val < best[0]:
                        best = (val, (x1, x2))
        return best

    coarse, (c1, c2) = grid_min(-10.0, 2.0, -10.0, 2.0, 121)
    fine, _ = grid_min(c1 - 0.2, c1 + 0.2, c2 - 0.2, c2 + 0.2, 201)
    cfg = SolverConfig(method="fast_rfb", alpha=10.0, max_iter=20000)
    final = run_pd(sp, cfg, variant="cone")
    assert objective_value(sp, final.x) == pytest.approx(fine, abs=5e-3)


@pytest.mark.parametrize("cone,horizon", [
    (ConeKind.NONNEG_ORTHANT, 10_000),
    (ConeKind.ZERO_CONE, 200_000),
])
def test_scaled_quantities_trend_to_zero(cone, horizon, chain_ineq_200, chain_eq_200):
    # k times each diagnostic decays; the equality variant needs the longer
    # horizon because its iterates only arrive near k ~ 2e4 (its own
    # comparison-table counts), while the orthant variant settles within 1e4
    sp = chain_ineq_200 if cone is ConeKind.NONNEG_ORTHANT else chain_eq_200
    reference = ms.reference_solution(sp)
    problem = as_inclusion(sp)
    cfg = SolverConfig(method="fast_rfb", alpha=10.0, max_iter=horizon)
    marks = {}
    prev = {}

    def observe(state):
        if state.k in (99, horizon - 1):
            x, lam = unpack(state.z, sp.nx)
            prev["x"], prev["lam"] = x.copy(), lam.copy()
        if state.k in (100, horizon):
            x, lam = unpack(state.z, sp.nx)
            u, v = unpack(state.xi, sp.nx)
            rec = pd_diagnostics((x, lam), PDCertificates(u, v), sp, reference)
            rec["vel_x"] = float(np.linalg.norm(x - prev["x"]))
            rec["vel_lam"] = float(np.linalg.norm(lam - prev["lam"]))
            marks[state.k] = rec

    from monosplit.splitters import run_solver
    run_solver(problem, cfg, record_every=0, observer=observe)
    early, late = marks[100], marks[horizon]
    for key in ("vel_x", "vel_lam", "tangent", "feasibility",
                "complementarity", "lagrangian_gap", "obj_gap"):
        assert late[key] * horizon < 0.1 * max(early[key] * 100, 1e-30), key


def test_lagrangian_and_objective_values(chain_eq_20):
    sp = chain_eq_20
    x = np.ones(sp.nx)
    lam = np.full(sp.ny, 2.0)
    manual = (np.sum(np.abs(x)) + 0.5 * x @ sp.H.matvec(x) - sp.h @ x
              + lam @ (sp.A.matvec(x) - sp.b))
    assert lagrangian(sp, x, lam) == pytest.approx(manual, rel=1e-14)


def test_run_pd_rejects_bad_variant(chain_eq_20):
    with pytest.raises(ParameterError):
        run_pd(chain_eq_20, SolverConfig(method="fast_rfb"), variant="nope")
    with pytest.raises(ParameterError):
        run_pd(chain_eq_20, SolverConfig(method="eg"), variant="cone")


def test_compute_reference_matches_analytic(chain_eq_20):
    x_run, lam_run = compute_reference(chain_eq_20, alpha=10.0, tol=1e-8,
                                       max_iter=200000)
    assert np.linalg.norm(x_run - ms.chain_eq_solution(20)) <= 1e-6
