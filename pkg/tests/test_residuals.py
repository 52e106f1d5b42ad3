import numpy as np
import pytest

from anchored.errors import InputError
from anchored.operators import (
    OperatorSpec,
    affine_kind,
    box_kind,
    identity_operator,
    l1_kind,
    least_squares_operator,
    resolvent_apply,
    zero_kind,
)
from anchored.residuals import (
    SplittingSpec,
    cocoercivity_report,
    default_lambda,
    fb_residual,
    tos_residual,
    yosida,
)
from anchored.rng import SplitMix64


def unit_columns(m):
    return m / np.linalg.norm(m, axis=0)


def desk_ls_operator(seed=3, n=12, p=6):
    p_mat = unit_columns(SplitMix64(seed).normal_matrix(n, p))
    return least_squares_operator(p_mat, np.zeros(n))


class TestYosida:
    def test_zero_operator(self):
        g = yosida(zero_kind(), 0.5, dim=3)
        assert np.all(g(np.array([1.0, -2.0, 4.0])) == 0.0)

    def test_soft_threshold_value(self):
        g = yosida(l1_kind(1.0), 1.0, dim=1)
        assert g(np.array([3.0]))[0] == pytest.approx(1.0)

    def test_affine_solve(self):
        g = yosida(affine_kind(np.eye(2)), 1.0)
        # J solves 2x = y, so (y - y/2)/1 = y/2
        assert np.allclose(g(np.array([2.0, 2.0])), [1.0, 1.0])

    def test_is_lambda_cocoercive(self):
        g = yosida(l1_kind(0.5), 1.7, dim=4)
        report = cocoercivity_report(g, 1.7, 500, seed=2, dim=4)
        assert report["violations"] == 0


class TestForwardBackwardResidual:
    def test_zero_a_reduces_to_b(self):
        b = desk_ls_operator()
        spec = SplittingSpec(a=zero_kind(), b=b, lam=1.0,
                             l_of_b_or_c=b.lipschitz)
        g = fb_residual(spec)
        y = SplitMix64(5).normal(b.dim)
        assert np.allclose(g(y), b(y), rtol=1e-13, atol=1e-14)

    def test_zero_b_reduces_to_yosida(self):
        zero_b = OperatorSpec(dim=2, eval=lambda y: np.zeros_like(y), monotone=True)
        spec = SplittingSpec(a=l1_kind(1.0), b=zero_b, lam=0.8)
        g = fb_residual(spec)
        yos = yosida(l1_kind(1.0), 0.8, dim=2)
        y = np.array([2.0, -0.3])
        assert np.allclose(g(y), yos(y))

    def test_scalar_box_hand_value(self):
        b = OperatorSpec(dim=1, eval=lambda y: y - 0.5, lipschitz=1.0,
                         cocoercivity_modulus=1.0, monotone=True)
        spec = SplittingSpec(a=box_kind(0.0, 1.0), b=b, lam=1.0, l_of_b_or_c=1.0)
        g = fb_residual(spec)
        assert g(np.array([2.0]))[0] == pytest.approx(1.5)

    def test_refuses_set_valued_b(self):
        with pytest.raises(InputError):
            fb_residual(SplittingSpec(a=zero_kind(), b=l1_kind(1.0), lam=1.0))

    def test_out_of_window_lambda_flags(self):
        b = desk_ls_operator()
        spec = SplittingSpec(a=zero_kind(), b=b, lam=8.0 / b.lipschitz,
                             l_of_b_or_c=b.lipschitz)
        with pytest.warns(UserWarning):
            g = fb_residual(spec)
        assert g.cocoercivity_modulus is None

    def test_transported_cocoercivity_inequality_sampled(self):
        # <Gx-Gy, x-y+lam(Bx-By)> >= lam|Gx-Gy|^2 + <Bx-By, x-y>
        b = desk_ls_operator()
        lam = default_lambda(b.lipschitz)
        spec = SplittingSpec(a=l1_kind(0.1), b=b, lam=lam, l_of_b_or_c=b.lipschitz)
        g = fb_residual(spec)
        rng = SplitMix64(17)
        for _ in range(1000):
            x = rng.uniform_symmetric(b.dim)
            y = rng.uniform_symmetric(b.dim)
            dg = g(x) - g(y)
            db = b(x) - b(y)
            lhs = float(dg @ (x - y + lam * db))
            rhs = lam * float(dg @ dg) + float(db @ (x - y))
            assert lhs >= rhs - 1e-10

    def test_modulus_sampled(self):
        b = desk_ls_operator()
        lam = default_lambda(b.lipschitz)
        spec = SplittingSpec(a=l1_kind(0.1), b=b, lam=lam, l_of_b_or_c=b.lipschitz)
        g = fb_residual(spec)
        report = cocoercivity_report(g, g.cocoercivity_modulus, 1000, seed=23, dim=b.dim)
        assert report["violations"] == 0

    def test_zero_at_solution(self):
        # solve 0 in A y + B y with A = l1 weight w, B y = y - t:
        # y* = t - w for t > w (subgradient is +1 there)
        b = OperatorSpec(dim=1, eval=lambda y: y - 3.0, lipschitz=1.0,
                         cocoercivity_modulus=1.0, monotone=True)
        spec = SplittingSpec(a=l1_kind(1.0), b=b, lam=1.0, l_of_b_or_c=1.0)
        g = fb_residual(spec)
        assert abs(g(np.array([2.0]))[0]) <= 1e-8


class TestThreeOperatorResidual:
    def test_zero_b_reduces_to_yosida(self):
        spec = SplittingSpec(a=l1_kind(1.0), b=zero_kind(), lam=1.0)
        g = tos_residual(spec)
        yos = yosida(l1_kind(1.0), 1.0, dim=2)
        u = np.array([3.0, -0.2])
        assert np.allclose(g(u), yos(u))

    def test_change_of_variable_matches_fb(self):
        # with C absent and single-valued affine B, E(y + lam*By) = G(y)
        rng = SplitMix64(31)
        m = rng.normal_matrix(4, 4)
        m = 0.5 * (m @ m.T) + 0.5 * np.eye(4)
        b_single = OperatorSpec(dim=4, eval=lambda y: m @ y,
                                lipschitz=np.linalg.norm(m, 2),
                                cocoercivity_modulus=1.0 / np.linalg.norm(m, 2),
                                monotone=True)
        lam = 0.4
        fb = fb_residual(SplittingSpec(a=l1_kind(0.2), b=b_single, lam=lam,
                                       l_of_b_or_c=b_single.lipschitz))
        tos = tos_residual(SplittingSpec(a=l1_kind(0.2), b=affine_kind(m), lam=lam))
        for _ in range(100):
            y = rng.uniform_symmetric(4, 2.0)
            u = y + lam * (m @ y)
            dev = np.linalg.norm(tos(u) - fb(y))
            assert dev <= 1e-10 * (1.0 + np.linalg.norm(fb(y)))

    def test_composition_matches_step_by_step_oracle(self):
        c_op = OperatorSpec(dim=3, eval=lambda z: 0.1 * z, lipschitz=0.1,
                            cocoercivity_modulus=10.0, monotone=True)
        spec = SplittingSpec(a=l1_kind(1.0), b=affine_kind(np.eye(3)),
                             lam=1.0, c=c_op, l_of_b_or_c=0.1)
        g = tos_residual(spec)
        u = np.array([1.5, -2.5, 0.25])
        # oracle: apply the three maps independently
        z = resolvent_apply(affine_kind(np.eye(3)).with_lambda(1.0), u)
        w = resolvent_apply(l1_kind(1.0).with_lambda(1.0), 2.0 * z - u - 0.1 * z)
        assert np.allclose(g(u), z - w)
        gu, zu, wu = g.parts(u)
        assert np.allclose(zu, z) and np.allclose(wu, w)

    def test_modulus_sampled_with_c(self):
        c_op = desk_ls_operator(seed=41)
        lam = default_lambda(c_op.lipschitz)
        spec = SplittingSpec(a=l1_kind(0.1), b=box_kind(-1.0, 1.0), lam=lam,
                             c=c_op, l_of_b_or_c=c_op.lipschitz)
        g = tos_residual(spec)
        report = cocoercivity_report(g, g.cocoercivity_modulus, 1000, seed=3,
                                     dim=c_op.dim)
        assert report["violations"] == 0

    def test_zero_at_shifted_solution(self):
        # B y = y - 3 single valued, A = l1(1): y* = 2, anchor u* = y* + lam*B y*
        m = np.eye(1)
        shift = np.array([-3.0])
        lam = 1.0
        tos = tos_residual(SplittingSpec(a=l1_kind(1.0),
                                         b=affine_kind(m, shift), lam=lam))
        u_star = np.array([2.0 + lam * (2.0 - 3.0)])
        assert abs(tos(u_star)[0]) <= 1e-8


class TestCocoercivityReport:
    def test_identity_with_true_modulus(self):
        report = cocoercivity_report(identity_operator(2), 1.0, 100, seed=0)
        assert report["violations"] == 0

    def test_identity_with_inflated_modulus(self):
        report = cocoercivity_report(identity_operator(2), 2.0, 100, seed=0)
        assert report["violations"] > 0
        assert report["worst_margin"] < 0.0

    def test_requires_pairs(self):
        with pytest.raises(InputError):
            cocoercivity_report(identity_operator(1), 1.0, 0)
