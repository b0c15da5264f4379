import numpy as np
import pytest

from symplab.flow import integrate
from symplab.surfaces import (
    Surface,
    VariationField,
    fundamental_cycle,
    random_variation,
    sphere_band_surface,
    sphere_disk,
    torus_stripe,
)
from symplab.systems import ChartError, builtin_system


@pytest.fixture
def sphere():
    return builtin_system("sphere")


class TestSurface:
    def test_rows_are_trajectories(self, sphere):
        surf = sphere_band_surface(sphere, 0.5, 0.0, 2 * np.pi, 10, 50)
        top = surf.row(-1)
        np.testing.assert_allclose(top.points[:, 0], 0.5)
        assert top.windings[-1, 1] == 1
        assert surf.shape == (11, 51)
        assert surf.E == 0.5

    def test_from_rows(self, sphere):
        rows = [integrate(sphere, [th, 0.0], 0.0, 1.0, 20) for th in (0.1, 0.2, 0.3)]
        surf = Surface.from_rows(sphere, [0.0, 0.1, 0.2], rows)
        np.testing.assert_allclose(surf.points[:, :, 0], [[0.1] * 21, [0.2] * 21, [0.3] * 21])

    def test_from_rows_rejects_mismatched_times(self, sphere):
        a = integrate(sphere, [0.1, 0.0], 0.0, 1.0, 20)
        b = integrate(sphere, [0.2, 0.0], 0.0, 1.0, 30)
        with pytest.raises(ValueError, match="time grid"):
            Surface.from_rows(sphere, [0.0, 0.1], [a, b])

    @pytest.mark.parametrize("eps", [[0.1, 0.2], [0.0, 0.0, 0.1]])
    def test_bad_eps(self, sphere, eps):
        with pytest.raises(ValueError):
            Surface.from_unwrapped(sphere, eps, [0.0, 1.0], np.zeros((len(eps), 2, 2)))

    def test_degenerate_time(self, sphere):
        with pytest.raises(ValueError, match="degenerate"):
            Surface.from_unwrapped(sphere, [0.0, 0.1], [0.0, 0.0], np.zeros((2, 2, 2)))

    def test_outside_chart(self, sphere):
        with pytest.raises(ChartError):
            sphere_band_surface(sphere, 1.56, 0.0, 1.0, 4, 4)

    def test_discontinuous_rejected(self, sphere):
        coords = np.zeros((3, 3, 2))
        coords[1, 1, 1] = 5.0
        with pytest.raises(ValueError):
            Surface.from_unwrapped(sphere, [0.0, 0.1, 0.2], [0.0, 1.0, 2.0], coords)

    def test_displaced_rewraps(self, sphere):
        surf = sphere_band_surface(sphere, 0.2, 0.0, 2 * np.pi, 4, 8)
        delta = np.zeros(surf.points.shape)
        delta[:, 1:-1, 1] = 0.5
        moved = surf.displaced(VariationField(delta), 1.0)
        np.testing.assert_allclose(moved.unwrapped, surf.unwrapped + delta, atol=1e-12)
        assert np.all(moved.points[..., 1] < 2 * np.pi)

    def test_transversality(self, sphere):
        assert sphere_band_surface(sphere, 0.5, 0.0, 1.0, 10, 10).transversal
        # eps moves along the flow: not transverse
        along = Surface.from_function(sphere, lambda e, t: np.stack([0.3 + 0 * e, e + t], -1),
                                      0.5, 0.0, 1.0, 10, 10)
        assert not along.transversal
        assert not Surface.from_function(sphere, lambda e, t: np.stack([0 * e, t], -1),
                                         0.0, 0.0, 1.0, 1, 10).transversal


class TestVariationField:
    def test_fixed_ends_enforced(self):
        delta = np.zeros((3, 4, 2))
        delta[1, 0, 0] = 1.0
        with pytest.raises(ValueError, match="vanish"):
            VariationField(delta)

    def test_shape(self):
        with pytest.raises(ValueError):
            VariationField(np.zeros((3, 4)))

    def test_algebra(self, sphere):
        surf = sphere_band_surface(sphere, 0.5, 0.0, 1.0, 3, 5)
        v = VariationField.on_rows(surf, [-1], lambda t: np.sin(np.pi * t), [1.0, 0.0])
        assert np.all(v.delta[:-1] == 0)
        np.testing.assert_allclose((v + v.scaled(2.0)).delta, 3 * v.delta)
        assert np.all(VariationField.zeros(surf).delta == 0)

    @pytest.mark.parametrize("support", ["all", "boundary", "interior"])
    def test_random_supports(self, sphere, support):
        surf = sphere_band_surface(sphere, 0.5, 0.0, 1.0, 6, 12)
        d = random_variation(surf, np.random.default_rng(3), support).delta
        assert np.all(d[:, 0] == 0) and np.all(d[:, -1] == 0)
        if support == "boundary":
            assert np.all(d[1:-1] == 0) and np.any(d[0] != 0)
        if support == "interior":
            assert np.all(d[0] == 0) and np.all(d[-1] == 0) and np.any(d[1:-1] != 0)

    def test_random_is_seeded(self, sphere):
        surf = sphere_band_surface(sphere, 0.5, 0.0, 1.0, 6, 12)
        a = random_variation(surf, np.random.default_rng(9)).delta
        b = random_variation(surf, np.random.default_rng(9)).delta
        np.testing.assert_array_equal(a, b)


class TestBuilders:
    def test_disk_collapses(self, sphere):
        disk = sphere_disk(sphere, 0.0, 32, wraps=1)
        inner = disk.points[-1]
        assert np.ptp(inner[:, 0]) == 0.0
        np.testing.assert_allclose(disk.points[0, :, 0], 0.0)

    def test_disk_period(self, sphere):
        with pytest.raises(ValueError, match="period"):
            sphere_disk(sphere, 0.0, 16, t2=3.0)

    def test_torus_stripe_rows(self):
        torus = builtin_system("torus")
        s = torus_stripe(torus, 0.5, 1.0, 1, 2.0, 4, 8, wraps=2)
        np.testing.assert_allclose(s.points[-1, :, 0], 1.0, atol=1e-12)
        np.testing.assert_array_equal(s.windings[-1, :, 0], 2)

    def test_fundamental_cycle(self):
        cyc = fundamental_cycle(builtin_system("torus"), 4, 4)
        np.testing.assert_allclose(cyc.unwrapped[-1, :, 0], 2 * np.pi)
        with pytest.raises(ValueError, match="compact"):
            fundamental_cycle(builtin_system("canonical"), 4, 4)
