import numpy as np
import pytest

from spinsqueeze import dicke, ramsey
from spinsqueeze.errors import ZeroSensitivityError


def conjugated_signal(state, phi):
    """Independent route: rotate Jz through the full pulse unitary."""
    u = ramsey.ramsey_unitary(state.n_atoms, phi)
    ops = dicke.build_spin_operators(state.n_atoms)
    jz_rot = u.conj().T @ ops.jz @ u
    psi = state.amplitudes
    return np.real(np.vdot(psi, jz_rot @ psi))


def conjugated_std(state, phi):
    u = ramsey.ramsey_unitary(state.n_atoms, phi)
    ops = dicke.build_spin_operators(state.n_atoms)
    jz_rot = u.conj().T @ ops.jz @ u
    psi = state.amplitudes
    mean = np.real(np.vdot(psi, jz_rot @ psi))
    sq = np.real(np.vdot(psi, jz_rot @ (jz_rot @ psi)))
    return np.sqrt(max(sq - mean**2, 0.0))


class TestUnitary:
    def test_identity_at_zero(self):
        u = ramsey.ramsey_unitary(6, 0.0)
        assert np.max(np.abs(u - np.eye(7))) < 1e-10

    @pytest.mark.parametrize("n,phi", [(2, 0.3), (10, 1.7), (5, -2.0)])
    def test_unitarity(self, n, phi):
        u = ramsey.ramsey_unitary(n, phi)
        assert np.max(np.abs(u.conj().T @ u - np.eye(n + 1))) < 1e-10

    def test_half_pi_conjugation(self):
        # U(pi/2)^dag Jz U(pi/2) = -Jx
        n = 8
        u = ramsey.ramsey_unitary(n, np.pi / 2)
        ops = dicke.build_spin_operators(n)
        assert np.max(np.abs(u.conj().T @ ops.jz @ u + ops.jx)) < 1e-10

    def test_pi_conjugation_n2(self):
        u = ramsey.ramsey_unitary(2, np.pi)
        ops = dicke.build_spin_operators(2)
        assert np.max(np.abs(u.conj().T @ ops.jz @ u + ops.jz)) < 1e-10

    def test_nonfinite_phi(self):
        with pytest.raises(ValueError):
            ramsey.ramsey_unitary(4, np.inf)


class TestSignalAndVariance:
    def test_bloch_signal(self):
        b = dicke.bloch_ground_state(100)
        assert ramsey.ramsey_signal(b, 0.0) == pytest.approx(-50.0, abs=1e-10)
        assert ramsey.ramsey_signal(b, np.pi / 2) == pytest.approx(0.0, abs=1e-10)

    def test_psi_a_signal(self):
        s = dicke.psi_a_state(100, -1.0)
        assert ramsey.ramsey_signal(s, np.pi) == pytest.approx(np.sqrt(1275), rel=1e-10)

    def test_bloch_variance(self):
        b = dicke.bloch_ground_state(100)
        assert ramsey.ramsey_variance(b, np.pi / 2) == pytest.approx(5.0, abs=1e-10)
        # Delta Jz(phi) = sqrt(J/2) sin(phi)
        for phi in (0.3, 1.0, 2.5):
            assert ramsey.ramsey_variance(b, phi) == pytest.approx(
                5.0 * abs(np.sin(phi)), abs=1e-10)

    def test_psi_a_variance_at_half_pi(self):
        s = dicke.psi_a_state(100, -1.0)
        assert ramsey.ramsey_variance(s, np.pi / 2) == pytest.approx(
            1 / np.sqrt(2), rel=1e-10)

    def test_variance_at_zero_is_input_std(self):
        s = dicke.psi_a_state(20, 0.5)
        m = dicke.moments(s, dicke.build_spin_operators(20))
        assert ramsey.ramsey_variance(s, 0.0) == pytest.approx(np.sqrt(m.var_z),
                                                               rel=1e-12)

    def test_closed_form_vs_conjugation_random_states(self):
        rng = np.random.default_rng(11)
        n = 10
        for _ in range(5):
            amps = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
            amps /= np.linalg.norm(amps)
            s = dicke.DickeState(J=n / 2, amplitudes=amps)
            for phi in rng.uniform(-np.pi, np.pi, 3):
                assert ramsey.ramsey_signal(s, phi) == pytest.approx(
                    conjugated_signal(s, phi), abs=1e-10)
                assert ramsey.ramsey_variance(s, phi) == pytest.approx(
                    conjugated_std(s, phi), abs=1e-10)


class TestPhaseAccuracy:
    def test_sql(self):
        b = dicke.bloch_ground_state(100)
        assert ramsey.phase_accuracy(b, np.pi / 2) == pytest.approx(0.1, abs=1e-12)
        assert ramsey.phase_accuracy(b, -np.pi / 2) == pytest.approx(0.1, abs=1e-12)

    def test_psi_a_at_half_pi(self):
        s = dicke.psi_a_state(100, -1.0)
        assert ramsey.phase_accuracy(s, np.pi / 2) == pytest.approx(
            1 / np.sqrt(2550), rel=1e-10)

    def test_small_a_optimum(self):
        # delta_phi(pi/2) -> 1/sqrt(2 J(J+1)) as a -> 0+, i.e. sqrt(2)/N up
        # to the J(J+1)-vs-J^2 finite-size correction (~1% at N=100)
        s = dicke.psi_a_state(100, 1e-4)
        got = ramsey.phase_accuracy(s, np.pi / 2)
        assert got == pytest.approx(1 / np.sqrt(2 * 2550), rel=1e-6)
        assert got == pytest.approx(np.sqrt(2) / 100, rel=2e-2)

    def test_general_a_half_pi_value(self):
        # delta_phi(pi/2) = sqrt((1+a^2)/2) / sqrt(J(J+1))
        for a in (-2.0, -1.1, 0.5):
            s = dicke.psi_a_state(40, a)
            expect = np.sqrt((1 + a * a) / 2) / np.sqrt(20 * 21)
            assert ramsey.phase_accuracy(s, np.pi / 2) == pytest.approx(expect,
                                                                        rel=1e-10)

    def test_zero_sensitivity_raises(self):
        b = dicke.bloch_ground_state(10)
        with pytest.raises(ZeroSensitivityError):
            ramsey.phase_accuracy(b, 0.0)

    def test_heisenberg_bound(self):
        rng = np.random.default_rng(3)
        for n in (4, 10, 20):
            for a in (-1.0, 0.5):
                s = dicke.psi_a_state(n, a)
                for phi in rng.uniform(0.2, np.pi - 0.2, 5):
                    assert ramsey.phase_accuracy(s, phi) >= 1 / n - 1e-10

    def test_phi_dependence_of_squeezed_family(self):
        # The phase accuracy of |psi(a=+-1)> is NOT flat in phi: the input
        # z-variance J(J+1)/8 - 1/4 feeds in through the cos^2 term and the
        # accuracy diverges toward the signal extrema.  The optimum sits at
        # phi = +-pi/2 where it reaches 1/sqrt(J(J+1)).
        s = dicke.psi_a_state(100, -1.0)
        best = ramsey.phase_accuracy(s, np.pi / 2)
        assert best == pytest.approx(1 / np.sqrt(2550), rel=1e-10)
        m = dicke.moments(s, dicke.build_spin_operators(100))
        assert m.var_z == pytest.approx(2550 / 8 - 0.25, rel=1e-10)
        for phi in (0.2, 1.0, 2.0):
            expected = np.sqrt(
                m.var_z * np.cos(phi) ** 2 + m.var_x * np.sin(phi) ** 2
            ) / (abs(m.mean_z) * abs(np.sin(phi)))
            got = ramsey.phase_accuracy(s, phi)
            assert got == pytest.approx(expected, rel=1e-10)
            assert got >= best


class TestSweep:
    def test_bloch_fraction_shape(self):
        b = dicke.bloch_ground_state(100)
        grid = np.linspace(0, 2 * np.pi, 101)
        sweep = ramsey.ramsey_sweep(b, grid)
        assert np.allclose(sweep.excited_fraction, (1 - np.cos(grid)) / 2, atol=1e-12)
        assert np.all((sweep.excited_fraction >= -1e-12)
                      & (sweep.excited_fraction <= 1 + 1e-12))

    def test_sensitivity_zero_rows_flagged(self):
        b = dicke.bloch_ground_state(10)
        sweep = ramsey.ramsey_sweep(b, np.array([0.0, np.pi / 2, np.pi]))
        assert sweep.sensitivity_zero.tolist() == [True, False, True]
        assert np.isnan(sweep.delta_phi[0]) and np.isnan(sweep.delta_phi[2])

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            ramsey.ramsey_sweep(dicke.bloch_ground_state(4), [])
