import numpy as np
import pytest

from symplab.flow import (
    ChartExitError,
    Trajectory,
    energy_drift,
    hamilton_defect,
    integrate,
    stationarity_residual,
)
from symplab.systems import ChartError, builtin_system


@pytest.fixture
def sphere():
    return builtin_system("sphere")


@pytest.fixture
def oscillator():
    return builtin_system("canonical", n=1, hamiltonian="harmonic")


class TestIntegrate:
    def test_sphere_loop(self, sphere):
        traj = integrate(sphere, [0.3, 0.0], 0.0, 2 * np.pi, 200)
        np.testing.assert_allclose(traj.end, [0.3, 0.0], atol=1e-10)
        assert traj.windings[-1, 1] == 1
        assert np.max(np.abs(traj.points[:, 0] - 0.3)) <= 1e-10

    def test_free_particle_exact(self):
        sys_ = builtin_system("canonical", n=1, hamiltonian="free_particle")
        traj = integrate(sys_, [0.0, 1.0], 0.0, 1.0, 100)
        np.testing.assert_allclose(traj.end, [1.0, 1.0], atol=1e-14)

    def test_torus_unwrapped_phase(self):
        torus = builtin_system("torus")
        traj = integrate(torus, [np.pi / 3, 0.0], 0.0, 4 * np.pi, 400)
        assert traj.unwrapped[-1, 1] == pytest.approx(2 * np.pi, abs=1e-12)
        assert traj.end[0] == pytest.approx(np.pi / 3, abs=1e-14)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_winding_count(self, sphere, k):
        traj = integrate(sphere, [0.1, 0.5], 0.0, 2 * np.pi * k, 100 * k)
        assert traj.windings[-1, 1] == k

    def test_rk4_fourth_order(self, oscillator):
        errs = []
        steps = [40, 80, 160, 320]
        for n in steps:
            end = integrate(oscillator, [1.0, 0.0], 0.0, 2 * np.pi, n).end
            errs.append(np.max(np.abs(end - [1.0, 0.0])))
        orders = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(orders > 3.8)

    def test_midpoint_conserves_quadratic_energy(self, oscillator):
        traj = integrate(oscillator, [1.0, 0.5], 0.0, 100.0, 10_000, method="implicit_midpoint")
        assert energy_drift(traj) <= 1e-10

    def test_midpoint_nonlinear_newton(self, sphere):
        traj = integrate(sphere, [0.4, 0.0], 0.0, 3.0, 30, method="implicit_midpoint")
        np.testing.assert_allclose(traj.points[:, 0], 0.4, atol=1e-12)

    def test_chart_exit(self):
        xy = builtin_system("sphere_xy_chart", margin=0.05)
        with pytest.raises(ChartError):
            integrate(xy, [0.99, 0.0], 0.0, 1.0, 10)

    def test_chart_exit_reports_time(self):
        sphere = builtin_system("sphere", margin=0.05)
        from symplab.systems import SymplecticSystem
        tilted = SymplecticSystem(
            name="tilted", dim=2, omega_fn=sphere.omega_fn,
            hamiltonian_fn=lambda x: -x[..., 1],
            grad_fn=lambda x: np.stack([np.zeros(x.shape[:-1]), -np.ones(x.shape[:-1])], -1),
            chart=sphere.chart)
        # xdot = omega^{-1} grad H = (1/cos theta, 0): theta increases until the chart edge
        with pytest.raises(ChartExitError) as info:
            integrate(tilted, [0.0, 0.0], 0.0, 5.0, 500)
        assert 0.0 < info.value.time < 5.0
        assert tilted.in_chart(info.value.point)

    def test_bad_inputs(self, sphere):
        with pytest.raises(ValueError):
            integrate(sphere, [0.1, 0.0], 0.0, 1.0, 1)
        with pytest.raises(ValueError):
            integrate(sphere, [0.1, 0.0], 0.0, 1.0, 10, method="euler")
        with pytest.raises(ValueError):
            integrate(sphere, [0.1, 0.0, 0.0], 0.0, 1.0, 10)


class TestTrajectory:
    def test_rejects_jumps(self, sphere):
        t = np.linspace(0, 1, 3)
        with pytest.raises(ValueError, match="jumps"):
            Trajectory.from_unwrapped(sphere, t, [[0.1, 0.0], [0.1, 4.0], [0.1, 4.1]])

    def test_rejects_nonincreasing(self, sphere):
        with pytest.raises(ValueError):
            Trajectory.from_unwrapped(sphere, [0.0, 0.0, 1.0], np.zeros((3, 2)))

    def test_rejects_out_of_chart(self, sphere):
        with pytest.raises(ChartError):
            Trajectory.from_unwrapped(sphere, [0.0, 1.0], [[1.56, 0.0], [0.0, 0.0]])


class TestDiagnostics:
    def test_drift_physical_sphere(self, sphere):
        traj = integrate(sphere, [0.3, 0.0], 0.0, 2 * np.pi, 100)
        assert energy_drift(traj) <= 1e-15

    def test_drift_oscillator_rk4(self, oscillator):
        traj = integrate(oscillator, [1.0, 0.0], 0.0, 2 * np.pi, 1000)
        assert energy_drift(traj) <= 1e-9

    def test_drift_negative_control(self, sphere):
        T = 2.0
        t = np.linspace(0, T, 101)
        traj = Trajectory.from_unwrapped(sphere, t, np.column_stack([0.3 + 0.1 * t, t]))
        assert energy_drift(traj) == pytest.approx(np.sin(0.3 + 0.1 * T) - np.sin(0.3), rel=1e-12)

    def test_residual_physical_sphere(self, sphere):
        t = np.linspace(0, 2 * np.pi, 101)
        traj = Trajectory.from_unwrapped(sphere, t, np.column_stack([0.3 + 0 * t, t]))
        assert stationarity_residual(traj) <= 1e-12

    def test_residual_order_two(self, oscillator):
        vals = []
        for n in (100, 200, 400):
            t = np.linspace(0, 2 * np.pi, n + 1)
            traj = Trajectory.from_unwrapped(oscillator, t, np.column_stack([np.cos(t), -np.sin(t)]))
            vals.append(stationarity_residual(traj))
        assert vals[-1] <= 1e-3
        np.testing.assert_allclose(np.array(vals[:-1]) / vals[1:], 4.0, rtol=0.05)

    def test_residual_constant_phase_defect(self, sphere):
        T = 3.0
        t = np.linspace(0, T, 301)
        traj = Trajectory.from_unwrapped(sphere, t, np.column_stack([0.3 + 0 * t, 1.1 * t]))
        assert stationarity_residual(traj) == pytest.approx(0.1 * np.cos(0.3) * np.sqrt(T),
                                                            rel=1e-12)

    def test_residual_constant_path(self, oscillator):
        t = np.linspace(0, 2.0, 11)
        traj = Trajectory.from_unwrapped(oscillator, t, np.tile([0.6, 0.8], (11, 1)))
        assert stationarity_residual(traj) == pytest.approx(1.0 * np.sqrt(2.0))

    def test_defect_sign(self, oscillator):
        # q = cos t, p = -sin t: omega xdot = (-pdot, qdot) = grad H
        t = np.linspace(0, 1, 2001)
        traj = Trajectory.from_unwrapped(oscillator, t, np.column_stack([np.cos(t), -np.sin(t)]))
        assert np.max(np.abs(hamilton_defect(traj)[1:-1])) < 1e-6

    def test_velocities_need_three_nodes(self, oscillator):
        traj = Trajectory.from_unwrapped(oscillator, [0.0, 1.0], [[0, 0], [1, 1]])
        with pytest.raises(ValueError):
            stationarity_residual(traj)


@pytest.mark.parametrize("name, x0", [
    ("canonical", [0.4, -0.2]),
    ("sphere", [0.5, 0.1]),
    ("sphere_xy_chart", [0.3, 0.2]),
    ("torus", [1.0, 0.0]),
    ("sphere_times_plane", [0.2, 0.0, 0.1, 0.3]),
    ("nonclosed_demo", [0.3, 0.1, -0.2, 0.4]),
])
def test_residual_vanishes_under_refinement(name, x0):
    system = builtin_system(name)
    vals = [stationarity_residual(integrate(system, x0, 0.0, 2.0, n)) for n in (50, 100, 200)]
    assert vals[-1] < 1e-3
    if vals[0] > 1e-12:
        # above round-off the decay is second order
        assert vals[0] / vals[1] > 3.5 and vals[1] / vals[2] > 3.5
