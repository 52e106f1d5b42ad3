from fractions import Fraction

import numpy as np
import pytest

from anchored.errors import InputError
from anchored.operators import (
    OperatorSpec,
    affine_kind,
    counted,
    identity_operator,
    l1_kind,
    least_squares_operator,
    resolvent_apply,
)
from anchored.residuals import SplittingSpec, fb_residual
from anchored.rng import SplitMix64
from anchored.schemes import (
    STEPS,
    comono_eag_step,
    eag_step,
    halpern_step,
    init_state,
    make_solver,
    nag_eag_step,
    nag_peag_step,
    peag_step,
    run,
    solver_for,
)
from anchored.schedules import ScheduleParams, schedule_stream

ZERO_OP = OperatorSpec(dim=2, eval=lambda y: np.zeros_like(y), lipschitz=1.0,
                       cocoercivity_modulus=1.0, monotone=True)


def unit_columns(m):
    return m / np.linalg.norm(m, axis=0)


def small_saddle_operator(seed=7, m=8, n=6):
    """Monotone Lipschitz fixture without co-coercivity."""
    from anchored.operators import huber_saddle_operator, spectral_norm
    k = unit_columns(SplitMix64(seed).normal_matrix(m, n))
    s = spectral_norm(k)
    return huber_saddle_operator(k, s, s, 0.05, k_norm=s)


def max_rel_dev(seq_a, seq_b):
    worst = 0.0
    for a, b in zip(seq_a, seq_b):
        worst = max(worst, np.linalg.norm(a - b) / (1.0 + np.linalg.norm(a)))
    return worst


class TestStateInit:
    def test_all_slots_start_at_anchor(self):
        y0 = np.array([1.0, -2.0])
        s = init_state(y0)
        for name in ("x", "x_prev", "xhat", "xhat_prev", "y", "y_prev",
                     "z", "z_prev", "z_prev2", "w"):
            assert np.array_equal(getattr(s, name), y0)
        assert s.k == 0


class TestHalpern:
    def test_hand_iteration_scalar_identity(self):
        solver = solver_for(identity_operator(), "halpern", "halpern_fast")
        trace = run(solver, np.array([1.0]), 2)
        assert trace.norm_g_y.tolist() == pytest.approx([1.0, 0.0, 1.0 / 3.0],
                                                        abs=1e-16)

    def test_first_step_formula(self):
        L = 2.0
        op = OperatorSpec(dim=1, eval=lambda y: L * y, lipschitz=L,
                          cocoercivity_modulus=1.0 / L, monotone=True)
        state = init_state(np.array([1.0]))
        halpern_step(state, op, ScheduleParams(k=0, beta=0.5, eta=1.0 / (2 * L)))
        # y1 = y0 - (1/(2L)) G(y0)
        assert state.y[0] == pytest.approx(1.0 - (1.0 / (2 * L)) * L * 1.0)

    def test_anchor_is_fixed_point_of_zero_operator(self):
        state = init_state(np.array([2.0, -1.0]))
        for k in range(5):
            halpern_step(state, ZERO_OP, ScheduleParams(k=k, beta=1 / (k + 2),
                                                        eta=0.5))
        assert np.array_equal(state.y, state.y0)


class TestNesterovEquivalence:
    @pytest.mark.parametrize("variant", ["fast", "slow"])
    def test_scalar_identity_matches_halpern(self, variant):
        op = identity_operator()
        y0 = np.array([1.0])
        h = run(solver_for(op, "halpern", f"halpern_{variant}"), y0, 100)
        n = run(solver_for(op, "nesterov", f"nesterov_{variant}"), y0, 100)
        ys_h = h.snapshot_series("y")
        ys_n = n.snapshot_series("y")
        assert max_rel_dev(ys_h, ys_n) <= 1e-15

    def test_random_schedule_identity_on_catalog_operators(self):
        # the y-sequences agree for any admissible (beta, eta, gamma)
        rng = SplitMix64(99)
        p_mat = unit_columns(SplitMix64(21).normal_matrix(10, 5))
        ops = [identity_operator(3), least_squares_operator(p_mat, np.zeros(10)),
               small_saddle_operator()]
        for op in ops:
            L = op.lipschitz
            beta = 0.01 + 0.98 * rng.uniform(200)
            eta = (0.1 + 1.9 * rng.uniform(200)) / L
            gamma = (0.2 + 1.8 * rng.uniform(200)) / L
            y0 = rng.normal(op.dim)

            def halpern_factory():
                return (ScheduleParams(k=k, beta=beta[k], eta=eta[k])
                        for k in range(200))

            def nesterov_factory():
                def gen():
                    for k in range(200):
                        b, e, g = beta[k], eta[k], gamma[k]
                        if k == 0:
                            yield ScheduleParams(k=0, gamma=g, theta=0.0,
                                                 nu=1.0 - e / g, kappa=0.0)
                            continue
                        bp, ep, gp = beta[k - 1], eta[k - 1], gamma[k - 1]
                        yield ScheduleParams(
                            k=k, gamma=g,
                            theta=b * (1 - bp) / bp,
                            nu=b / bp + 1 - b - e / g,
                            kappa=(b / bp) * (ep / gp - 1 + bp))
                return gen()

            from anchored.schemes import Solver
            h = run(Solver("halpern", op, halpern_factory), y0, 200)
            n = run(Solver("nesterov", op, nesterov_factory), y0, 200)
            assert max_rel_dev(h.snapshot_series("y"),
                               n.snapshot_series("y")) <= 1e-8

    def test_wrong_nu_diverges_from_halpern(self):
        op = identity_operator()
        y0 = np.array([1.0])
        h = run(solver_for(op, "halpern", "halpern_fast"), y0, 10)

        def bad_factory():
            def gen():
                good = schedule_stream("nesterov_fast", 1.0)
                for p in good:
                    yield ScheduleParams(k=p.k, gamma=p.gamma, theta=p.theta,
                                         nu=p.nu + 0.1, kappa=p.kappa)
            return gen()

        from anchored.schemes import Solver
        n = run(Solver("nesterov", op, bad_factory), y0, 10)
        dev = max_rel_dev(h.snapshot_series("y")[:6], n.snapshot_series("y")[:6])
        assert dev > 1e-3


class TestEag:
    def test_hand_iteration_two_stepsize_form(self):
        # scalar identity, eta_0 = 1/2, eta_hat_0 = 1
        op = identity_operator()
        state = init_state(np.array([1.0]))
        eag_step(state, op, ScheduleParams(k=0, beta=0.5, eta=0.5, eta_hat=1.0))
        assert state.z[0] == pytest.approx(0.5)
        assert state.y[0] == pytest.approx(0.5)

    def test_constant_mode_first_step(self):
        op = identity_operator()
        state = init_state(np.array([1.0]))
        eag_step(state, op, ScheduleParams(k=0, beta=0.5, eta=0.125,
                                           eta_hat=0.125))
        # anchor equals y0 at k = 0, so z1 = y0 - eta*G(y0)
        assert state.z[0] == pytest.approx(1.0 - 0.125)

    def test_matches_nag_form_scalar_first_step(self):
        op = identity_operator()
        state = init_state(np.array([1.0]))
        nag_eag_step(state, op, ScheduleParams(k=0, gamma=1.0, theta=0.0,
                                               nu=0.5, eta=0.5, eta_hat=1.0))
        assert state.x[0] == pytest.approx(0.0)
        assert state.z[0] == pytest.approx(0.5)
        assert state.y[0] == pytest.approx(0.5)

    def test_nag_form_tracks_eag_on_saddle_instance(self):
        op = small_saddle_operator()
        y0 = SplitMix64(3).normal(op.dim)
        a = run(solver_for(op, "eag", "nag_eag"), y0, 300)
        b = run(solver_for(op, "nag_eag", "nag_eag"), y0, 300)
        assert max_rel_dev(a.snapshot_series("y"), b.snapshot_series("y")) <= 1e-8
        assert max_rel_dev(a.snapshot_series("z"), b.snapshot_series("z")) <= 1e-8


class TestComono:
    def _manual_eag_like_stream(self, L):
        # the rho = 0 reduction folds the (1 - beta) factor into the
        # probe stepsize: eta_eag = (1 - beta)/L with the correction 1/L
        def gen():
            k = 0
            while True:
                beta = 1.0 / (k + 1)
                yield ScheduleParams(k=k, beta=beta, eta=(1.0 - beta) / L,
                                     eta_hat=1.0 / L)
                k += 1
        return gen

    def test_zero_rho_step_coincides_with_eag(self):
        op = small_saddle_operator()
        y0 = SplitMix64(5).normal(op.dim)
        from anchored.schemes import Solver
        a = run(Solver("comono_eag", op,
                       lambda: schedule_stream("comono_eag", op.lipschitz,
                                               rho=0.0)), y0, 100)
        b = run(Solver("eag", op, self._manual_eag_like_stream(op.lipschitz)),
                y0, 100)
        assert max_rel_dev(a.snapshot_series("y"), b.snapshot_series("y")) <= 1e-12

    def test_hand_iteration_fraction_oracle(self):
        # scalar identity, rho = -1/4, eta = 1, beta_k = 1/(k+1)
        y0, rho, eta = Fraction(1), Fraction(-1, 4), Fraction(1)
        y, anchor = y0, y0
        vals = []
        for k in range(2):
            beta = Fraction(1, k + 1)
            z = beta * anchor + (1 - beta) * y - (1 - beta) * (2 * rho + eta) * y
            y = beta * anchor + (1 - beta) * y - 2 * rho * (1 - beta) * y - eta * z
            vals.append((z, y))
        op = identity_operator()
        state = init_state(np.array([1.0]))
        for k in range(2):
            comono_eag_step(state, op, ScheduleParams(k=k, beta=1.0 / (k + 1),
                                                      eta=1.0, rho=-0.25, L=1.0))
            assert state.z[0] == pytest.approx(float(vals[k][0]), abs=1e-15)
            assert state.y[0] == pytest.approx(float(vals[k][1]), abs=1e-15)

    def test_nag_form_tracks_comono(self):
        op = small_saddle_operator(seed=11)
        rho = -1.0 / (4.0 * op.lipschitz)
        y0 = SplitMix64(17).normal(op.dim)
        a = run(solver_for(op, "comono_eag", "comono_eag", rho=rho), y0, 300)
        b = run(solver_for(op, "nag_comono", "nag_comono", rho=rho), y0, 300)
        assert max_rel_dev(a.snapshot_series("y"), b.snapshot_series("y")) <= 1e-8
        assert max_rel_dev(a.snapshot_series("z"), b.snapshot_series("z")) <= 1e-8

    def test_rejects_out_of_range_rho(self):
        op = identity_operator()
        state = init_state(np.array([1.0]))
        with pytest.raises(InputError):
            comono_eag_step(state, op, ScheduleParams(k=0, beta=1.0, eta=1.0,
                                                      rho=-0.6, L=1.0))


class TestPeag:
    def test_hand_iteration(self):
        # sigma = 1, L = 1: eta_hat = 1/2, eta_0 = 1/4
        op = identity_operator()
        state = init_state(np.array([1.0]))
        peag_step(state, op, ScheduleParams(k=0, beta=0.5, eta=0.25,
                                            eta_hat=0.5))
        assert state.z[0] == pytest.approx(0.75)
        assert state.y[0] == pytest.approx(0.625)

    def test_one_evaluation_per_step_after_warmup(self):
        op, counter = counted(identity_operator())
        state = init_state(np.array([1.0]))
        stream = schedule_stream("peag", 1.0)
        peag_step(state, op, next(stream))
        assert counter.count == 2  # warm-up at z_0 plus the probe
        for _ in range(5):
            before = counter.count
            peag_step(state, op, next(stream))
            assert counter.count - before == 1

    def test_nag_form_tracks_peag_z_sequence_scalar(self):
        op = identity_operator()
        y0 = np.array([1.0])
        a = run(solver_for(op, "peag", "peag"), y0, 50)
        b = run(solver_for(op, "nag_peag", "nag_peag"), y0, 50)
        assert max_rel_dev(a.snapshot_series("z"), b.snapshot_series("z")) <= 1e-13

    def test_hand_values_of_nag_form(self):
        # must reproduce the past-extra z sequence 3/4, 1/2, 7/16 exactly
        op = identity_operator()
        state = init_state(np.array([1.0]))
        stream = schedule_stream("nag_peag", 1.0)
        expect = [0.75, 0.5, 7.0 / 16.0]
        for i in range(3):
            nag_peag_step(state, op, next(stream))
            assert state.z[0] == pytest.approx(expect[i], abs=1e-15)

    def test_nag_form_tracks_peag_on_saddle_instance(self):
        op = small_saddle_operator(seed=23)
        y0 = SplitMix64(29).normal(op.dim)
        a = run(solver_for(op, "peag", "peag"), y0, 300)
        b = run(solver_for(op, "nag_peag", "nag_peag"), y0, 300)
        assert max_rel_dev(a.snapshot_series("z"), b.snapshot_series("z")) <= 1e-8

    def test_legacy_stepsizes_drive_residual_down(self):
        op = small_saddle_operator(seed=23)
        y0 = SplitMix64(29).normal(op.dim)
        trace = run(solver_for(op, "peag", "peag_legacy",
                               eta0=0.4 / op.lipschitz), y0, 400)
        assert trace.error is None
        assert trace.norm_g_z[-1] < 0.05 * trace.norm_g_z[0]


class TestZeroOperatorInvariance:
    @pytest.mark.parametrize("scheme", sorted(STEPS))
    def test_constant_trajectory(self, scheme):
        kind = {"halpern": "halpern_fast", "nesterov": "nesterov_omega",
                "eag": "eag_constant", "nag_eag": "nag_eag",
                "comono_eag": "comono_eag", "nag_comono": "nag_comono",
                "peag": "peag", "nag_peag": "nag_peag"}[scheme]
        kw = {"rho": -0.1} if "comono" in kind else {}
        solver = solver_for(ZERO_OP, scheme, kind, L=1.0, **kw)
        trace = run(solver, np.array([0.7, -0.4]), 20)
        for name in ("y", "z", "x"):
            for v in trace.snapshot_series(name):
                # anchor mixing beta*y0 + (1-beta)*y0 rounds within an ulp
                assert np.allclose(v, [0.7, -0.4], rtol=1e-14, atol=0.0)


class TestLinearityEquivariance:
    @pytest.mark.parametrize("c", [2.0, -1.0])
    @pytest.mark.parametrize("scheme,kind", [
        ("halpern", "halpern_fast"), ("nesterov", "nesterov_omega"),
        ("eag", "eag_constant"), ("nag_eag", "nag_eag"),
        ("peag", "peag"), ("nag_peag", "nag_peag"),
    ])
    def test_iterates_scale_exactly(self, c, scheme, kind):
        p_mat = unit_columns(SplitMix64(41).normal_matrix(8, 4))
        op = least_squares_operator(p_mat, np.zeros(8))
        y0 = SplitMix64(43).normal(4)
        a = run(solver_for(op, scheme, kind), y0, 40)
        b = run(solver_for(op, scheme, kind), c * y0, 40)
        for u, v in zip(a.snapshot_series("y"), b.snapshot_series("y")):
            assert np.allclose(c * u, v, rtol=1e-12, atol=1e-12)
        for u, v in zip(a.snapshot_series("z"), b.snapshot_series("z")):
            assert np.allclose(c * u, v, rtol=1e-12, atol=1e-12)


class TestEvaluationCounts:
    def test_driver_totals(self):
        expect = {"halpern": ("halpern_fast", 11), "nesterov": ("nesterov_slow", 11),
                  "eag": ("eag_constant", 21), "nag_eag": ("nag_eag", 21),
                  "comono_eag": ("comono_eag", 21), "nag_comono": ("nag_comono", 21),
                  "peag": ("peag", 11), "nag_peag": ("nag_peag", 11)}
        for scheme, (kind, total) in expect.items():
            op, counter = counted(identity_operator(2))
            kw = {"rho": -0.1} if "comono" in kind else {}
            solver = solver_for(op, scheme, kind, L=1.0, **kw)
            run(solver, np.array([1.0, 2.0]), 10)
            assert counter.count == total, scheme

    def test_per_step_increments(self):
        one_eval = {"halpern": "halpern_fast", "nesterov": "nesterov_slow",
                    "nag_peag": "nag_peag"}
        two_eval = {"eag": "eag_constant", "nag_eag": "nag_eag",
                    "comono_eag": "comono_eag", "nag_comono": "nag_comono"}
        for schemes, per in ((one_eval, 1), (two_eval, 2)):
            for scheme, kind in schemes.items():
                op, counter = counted(identity_operator(2))
                kw = {"rho": -0.1} if "comono" in kind else {}
                stream = schedule_stream(kind, 1.0, **kw)
                state = init_state(np.array([1.0, 0.5]))
                for _ in range(6):
                    before = counter.count
                    STEPS[scheme](state, op, next(stream))
                    assert counter.count - before == per, scheme


class TestRunDriver:
    def test_zero_iterations_gives_initial_record(self):
        solver = solver_for(identity_operator(), "halpern", "halpern_fast")
        trace = run(solver, np.array([1.0]), 0)
        assert len(trace) == 1
        assert trace.norm_g_y[0] == 1.0

    def test_bit_identical_reruns(self):
        op = small_saddle_operator()
        y0 = SplitMix64(2).normal(op.dim)
        a = run(solver_for(op, "eag", "eag_constant"), y0, 50)
        b = run(solver_for(op, "eag", "eag_constant"), y0, 50)
        assert np.array_equal(a.norm_g_y, b.norm_g_y, equal_nan=True)
        assert np.array_equal(a.norm_dy, b.norm_dy, equal_nan=True)

    def test_divergence_truncates_trace(self):
        exploding = OperatorSpec(dim=1, eval=lambda y: -1e3 * y, lipschitz=1.0,
                                 cocoercivity_modulus=1.0, monotone=False)
        solver = solver_for(exploding, "halpern", "halpern_fast", L=1.0)
        trace = run(solver, np.array([1.0]), 200)
        assert trace.error is not None
        assert len(trace) < 201

    def test_rejects_negative_budget(self):
        solver = solver_for(identity_operator(), "halpern", "halpern_fast")
        with pytest.raises(InputError):
            run(solver, np.array([1.0]), -1)


class TestMakeSolver:
    def test_reflected_resolvent_form(self):
        # resolvent-only case driven by the fast anchored rule equals
        # y_{k+1} = beta*y0 + (1-beta)*(2 J - I) y_k
        lam = 0.7
        a = l1_kind(1.0)
        solver = make_solver("inclusion_a", (a, lam), "halpern",
                             lambda: schedule_stream("halpern_fast", 1.0 / lam))
        y0 = np.array([3.0, -2.0, 0.2])
        trace = run(solver, y0, 30)
        res = a.with_lambda(lam)
        y = y0.copy()
        for k in range(30):
            beta = 1.0 / (k + 2)
            y = beta * y0 + (1 - beta) * (2.0 * resolvent_apply(res, y) - y)
        assert np.allclose(trace.snapshots[-1].y, y, rtol=1e-12, atol=1e-14)

    def test_fbs_midpoint_lambda_form(self):
        # lam = 2/L turns the fast anchored rule into
        # y_{k+1} = beta*y0 + (1-beta) * J(y_k - lam*B y_k)
        p_mat = unit_columns(SplitMix64(51).normal_matrix(9, 4))
        b_op = least_squares_operator(p_mat, np.zeros(9))
        lam = 2.0 / b_op.lipschitz
        spec = SplittingSpec(a=l1_kind(0.3), b=b_op, lam=lam,
                             l_of_b_or_c=b_op.lipschitz)
        g = fb_residual(spec)
        solver = make_solver("inclusion_ab", spec, "halpern",
                             lambda: schedule_stream("halpern_fast",
                                                     1.0 / g.cocoercivity_modulus))
        y0 = SplitMix64(53).normal(4)
        trace = run(solver, y0, 25)
        res = l1_kind(0.3).with_lambda(lam)
        y = y0.copy()
        for k in range(25):
            beta = 1.0 / (k + 2)
            y = beta * y0 + (1 - beta) * resolvent_apply(res, y - lam * b_op(y))
        assert np.allclose(trace.snapshots[-1].y, y, rtol=1e-10, atol=1e-12)

    def test_three_operator_matches_fb_through_change_of_variable(self):
        rng = SplitMix64(57)
        m = rng.normal_matrix(4, 4)
        m = 0.5 * (m @ m.T) + 0.5 * np.eye(4)
        l_b = np.linalg.norm(m, 2)
        b_single = OperatorSpec(dim=4, eval=lambda y: m @ y, lipschitz=l_b,
                                cocoercivity_modulus=1.0 / l_b, monotone=True)
        lam = 2.0 / l_b
        ab = SplittingSpec(a=l1_kind(0.2), b=b_single, lam=lam, l_of_b_or_c=l_b)
        abc = SplittingSpec(a=l1_kind(0.2), b=affine_kind(m), lam=lam)
        fb_solver = make_solver("inclusion_ab", ab, "halpern",
                                lambda: schedule_stream("halpern_fast", l_b))
        tos_op = make_solver("inclusion_abc", abc, "halpern",
                             lambda: schedule_stream("halpern_fast", l_b)).operator
        y0 = rng.normal(4)
        trace = run(fb_solver, y0, 100)
        for point in trace.snapshots[:-1]:
            u = point.y + lam * b_single(point.y)
            dev = np.linalg.norm(tos_op(u) - point.g_y)
            assert dev <= 1e-8 * (1.0 + np.linalg.norm(point.g_y))

    def test_set_valued_b_with_equation_case_rejected(self):
        with pytest.raises(InputError):
            make_solver("inclusion_ab",
                        SplittingSpec(a=zero_kind_safe(), b=l1_kind(1.0), lam=1.0),
                        "halpern", lambda: schedule_stream("halpern_fast", 1.0))


def zero_kind_safe():
    from anchored.operators import zero_kind
    return zero_kind()
