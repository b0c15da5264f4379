import numpy as np
import pytest

from symplab.systems import (
    BUILTIN_NAMES,
    Chart,
    ChartError,
    SingularFormError,
    SymplecticSystem,
    SystemValidationError,
    antisymmetry_defect,
    builtin_system,
    check_closedness,
    check_nondegeneracy,
    flow_field,
    hamiltonian_vector_field,
    inverse_defect,
    inverse_polar_transform,
    poisson_bracket,
    polar_canonical_transform,
    sample_chart_points,
    sphere_to_xy,
    sphere_to_xy_jacobian,
    validate_system,
)


class TestBuiltinCatalogue:
    def test_sphere_omega_at_origin(self):
        sys_ = builtin_system("sphere")
        np.testing.assert_array_equal(sys_.omega([0.0, 0.0]), [[0, 1], [-1, 0]])

    def test_canonical_structure(self):
        # omega = dp ^ dq, so the Poisson matrix is the standard [[0, 1], [-1, 0]]
        sys_ = builtin_system("canonical", n=1)
        for x in ([0.0, 0.0], [3.0, -2.0]):
            np.testing.assert_array_equal(sys_.poisson(x), [[0, 1], [-1, 0]])
            np.testing.assert_array_equal(sys_.omega(x), [[0, -1], [1, 0]])

    def test_nonclosed_detected(self):
        sys_ = builtin_system("nonclosed_demo")
        assert check_closedness(sys_, [1.0, 0.0, 0.0, 0.0]) > 0.5
        assert check_closedness(sys_, [0.0, 0.0, 1.0, 0.0]) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_every_name_builds(self, name):
        sys_ = builtin_system(name)
        assert sys_.dim % 2 == 0
        assert sys_.name == name

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown system"):
            builtin_system("klein_bottle")

    @pytest.mark.parametrize("margin", [0.0, -0.1])
    def test_nonpositive_margin(self, margin):
        with pytest.raises(ValueError, match="margin"):
            builtin_system("sphere", margin=margin)

    def test_odd_dimension(self):
        with pytest.raises(ValueError, match="even"):
            builtin_system("canonical", dim=3)

    def test_unknown_param(self):
        with pytest.raises(ValueError, match="invalid parameters"):
            builtin_system("torus", radius=2.0)

    def test_sphere_chart_margin(self):
        sys_ = builtin_system("sphere", margin=0.1)
        assert sys_.in_chart([np.pi / 2 - 0.11, 1.0])
        assert not sys_.in_chart([np.pi / 2 - 0.09, 1.0])

    def test_product_hamiltonian(self):
        sys_ = builtin_system("sphere_times_plane")
        x = np.array([0.3, 1.0, 0.5, 0.2])
        assert sys_.hamiltonian(x) == pytest.approx(np.sin(0.3) + 0.02)


class TestVectorField:
    def test_free_particle(self):
        sys_ = builtin_system("canonical", n=1, hamiltonian="free_particle")
        np.testing.assert_allclose(hamiltonian_vector_field(sys_, [0.0, 2.0]), [2.0, 0.0])

    def test_sphere(self):
        sys_ = builtin_system("sphere")
        np.testing.assert_allclose(hamiltonian_vector_field(sys_, [0.3, 1.0]), [0, 1], atol=1e-15)

    def test_torus(self):
        sys_ = builtin_system("torus")
        np.testing.assert_allclose(hamiltonian_vector_field(sys_, [np.pi / 3, 0.0]), [0, 0.5],
                                   atol=1e-15)

    def test_outside_chart(self):
        with pytest.raises(ChartError):
            hamiltonian_vector_field(builtin_system("sphere"), [1.6, 0.0])

    def test_singular_form(self):
        sing = SymplecticSystem.custom("flat", 2, lambda x: np.zeros((2, 2)),
                                       lambda x: x[0])
        with pytest.raises(SingularFormError) as info:
            hamiltonian_vector_field(sing, [0.0, 0.0])
        assert not np.isfinite(info.value.condition) or info.value.condition > 1e12

    def test_canonical_polynomial_matches_hamilton(self):
        def H(x):
            q, p = x[..., 0], x[..., 1]
            return q ** 3 * p + p ** 4 / 4

        def dH(x):
            q, p = x[..., 0], x[..., 1]
            return np.stack([3 * q ** 2 * p, q ** 3 + p ** 3], -1)
        sys_ = builtin_system("canonical", n=1, hamiltonian=H, grad=dH)
        x = np.array([0.7, -1.3])
        g = dH(x)
        np.testing.assert_allclose(hamiltonian_vector_field(sys_, x), [g[1], -g[0]], rtol=1e-15)

    def test_both_sphere_charts_agree(self):
        tp = builtin_system("sphere")
        xy = builtin_system("sphere_xy_chart")
        rng = np.random.default_rng(1)
        pts = np.column_stack([rng.uniform(0.2, 1.3, 50), rng.uniform(0, 2 * np.pi, 50)])
        pushed = np.einsum("kij,kj->ki", sphere_to_xy_jacobian(pts), flow_field(tp, pts))
        np.testing.assert_allclose(pushed, flow_field(xy, sphere_to_xy(pts)), atol=1e-8)


class TestClosedness:
    def test_canonical_zero(self):
        assert check_closedness(builtin_system("canonical", n=2), [0.1, 0.2, 0.3, 0.4]) == 0.0

    def test_product_small(self):
        sys_ = builtin_system("sphere_times_plane")
        assert check_closedness(sys_, [0.3, 1.0, 0.5, 0.2], h=1e-4) <= 1e-6

    def test_needs_margin(self):
        sys_ = builtin_system("sphere", margin=0.05)
        with pytest.raises(ChartError):
            check_closedness(sys_, [np.pi / 2 - 0.05 - 1e-5, 0.0], h=1e-4)

    def test_custom_nonclosed_converges_to_constant(self):
        # omega_{01} = x2 in 4d: cyclic sum is 1 exactly for every h
        sys_ = builtin_system("nonclosed_demo")
        vals = [check_closedness(sys_, [0.2, -0.1, 0.4, 0.3], h) for h in (1e-2, 1e-3, 1e-4)]
        np.testing.assert_allclose(vals, 1.0, atol=1e-10)

    def test_closedness_order_h2(self):
        # omega = d gamma + dp ^ dq with gamma = sin(x1 x2) dx0 + x0^2 x3 dx1: closed, not constant
        def omega(x):
            c = np.cos(x[1] * x[2])
            w = np.zeros((4, 4))
            w[0, 1] = 2 * x[0] * x[3] - x[2] * c
            w[0, 2] = -x[1] * c - 1.0
            w[1, 3] = -x[0] ** 2 - 1.0
            return w - w.T
        sys_ = SymplecticSystem.custom("exact_custom", 4, omega, lambda x: 0.5 * x @ x)
        x = [0.3, 0.7, 0.2, -0.4]
        vals = np.array([check_closedness(sys_, x, h) for h in (4e-2, 2e-2, 1e-2)])
        assert vals[-1] < 1e-3
        np.testing.assert_allclose(vals[:-1] / vals[1:], 4.0, rtol=0.05)


class TestNondegeneracy:
    def test_canonical(self):
        assert check_nondegeneracy(builtin_system("canonical"), [1.0, 2.0]).condition == \
            pytest.approx(1.0)

    def test_sphere_equator(self):
        assert check_nondegeneracy(builtin_system("sphere"), [0.0, 0.0]).condition == \
            pytest.approx(1.0)

    def test_sphere_near_pole(self):
        res = check_nondegeneracy(builtin_system("sphere"), [1.47, 0.0])
        assert res.condition == pytest.approx(1.0)
        assert res.determinant == pytest.approx(np.cos(1.47) ** 2, rel=1e-12)
        assert res.determinant == pytest.approx(0.0101, abs=5e-5)

    def test_singular_reports_infinity(self):
        sing = SymplecticSystem.custom("flat", 2, lambda x: np.zeros((2, 2)), lambda x: x[0])
        assert check_nondegeneracy(sing, [0.0, 0.0]).condition == np.inf


class TestPolar:
    @pytest.mark.parametrize("qp, expected", [
        ((0.0, 1.0), (0.0, 0.5)),
        ((1.0, 0.0), (np.pi / 2, 0.5)),
        ((1.0, 1.0), (np.pi / 4, 1.0)),
    ])
    def test_examples(self, qp, expected):
        phi, P = polar_canonical_transform(*qp)
        assert phi == pytest.approx(expected[0])
        assert P == pytest.approx(expected[1])

    def test_origin(self):
        with pytest.raises(ValueError):
            polar_canonical_transform(0.0, 0.0)

    def test_quadrants(self):
        phi, _ = polar_canonical_transform(np.array([1.0, 1.0, -1.0, -1.0]),
                                           np.array([1.0, -1.0, -1.0, 1.0]))
        np.testing.assert_allclose(phi, [np.pi / 4, 3 * np.pi / 4, -3 * np.pi / 4, -np.pi / 4])

    def test_inverse(self):
        q, p = np.array([0.3, -1.2, 2.0]), np.array([-0.7, 0.4, 0.1])
        np.testing.assert_allclose(inverse_polar_transform(*polar_canonical_transform(q, p)),
                                   (q, p), atol=1e-14)

    def test_bracket(self):
        sys_ = builtin_system("canonical", n=1)

        def phi(x):
            return polar_canonical_transform(x[..., 0], x[..., 1])[0]

        def P(x):
            return polar_canonical_transform(x[..., 0], x[..., 1])[1]
        assert poisson_bracket(sys_, phi, P, np.array([0.4, -0.9])) == pytest.approx(1.0, abs=1e-8)


class TestValidation:
    @pytest.mark.parametrize("name", [n for n in BUILTIN_NAMES if n != "nonclosed_demo"])
    def test_builtins_pass(self, name):
        rep = validate_system(builtin_system(name))
        assert rep["antisymmetry"] == 0.0
        assert rep["inverse"] <= 1e-10
        assert rep["closedness"] <= 1e-6

    def test_nonclosed_rejected_unless_forced(self):
        sys_ = builtin_system("nonclosed_demo")
        with pytest.raises(SystemValidationError, match="not closed"):
            validate_system(sys_)
        assert validate_system(sys_, force=True)["closedness"] == pytest.approx(1.0)

    def test_user_antisymmetry_tolerance(self):
        def omega(x):
            return np.array([[0.0, 1.0], [-1.0 + 1e-13, 0.0]])
        ok = SymplecticSystem.custom("nearly", 2, omega, lambda x: x[0])
        validate_system(ok)
        bad = SymplecticSystem.custom("skewed", 2, lambda x: np.array([[0.0, 1.0], [-0.9, 0.0]]),
                                      lambda x: x[0])
        with pytest.raises(SystemValidationError, match="antisymmetric"):
            validate_system(bad)

    def test_defect_helpers(self):
        sys_ = builtin_system("sphere_times_plane")
        pts = sample_chart_points(sys_, 200, np.random.default_rng(0))
        assert antisymmetry_defect(sys_, pts) == 0.0
        assert inverse_defect(sys_, pts) <= 1e-10


class TestChart:
    def test_wrap_roundtrip(self):
        chart = Chart((0.0, -1.0), (2 * np.pi, 1.0), (True, False))
        u = np.array([[7.0, 0.5], [-0.1, 0.2], [2 * np.pi, 0.0]])
        stored, w = chart.wrap(u)
        np.testing.assert_allclose(stored + chart.periods * w, u, atol=1e-15)
        assert np.all((stored[:, 0] >= 0) & (stored[:, 0] < 2 * np.pi))
        np.testing.assert_array_equal(w[:, 0], [1, -1, 1])

    def test_custom_fd_gradient(self):
        sys_ = SymplecticSystem.custom("c", 2, lambda x: np.array([[0.0, -1.0], [1.0, 0.0]]),
                                       lambda x: np.sin(x[0]) * x[1])
        np.testing.assert_allclose(sys_.grad_h(np.array([0.3, 2.0])),
                                   [2 * np.cos(0.3), np.sin(0.3)], rtol=1e-8)
