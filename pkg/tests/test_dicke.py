import numpy as np
import pytest

from spinsqueeze import dicke


def closed_form_moments(n, a):
    """Independent closed forms for the squeezed-family moments.

    mean_z and var_x follow the standard published expressions; var_y and
    var_z are derived from the ladder algebra about the x axis: with
    K+- = Jy +- i Jz,  <K+ K- + K- K+> = 2J(J+1) - 2a^2/(1+a^2) and
    <K+^2> = -a^2 J(J+1)/(2(1+a^2)) in the adopted phase convention,
    giving
      <Jy^2> = J(J+1)(2+a^2)/(4(1+a^2)) - a^2/(2(1+a^2))
      <Jz^2> = J(J+1)(2+3a^2)/(4(1+a^2)) - a^2/(2(1+a^2)).
    These satisfy the exact sum rule <Jx^2+Jy^2+Jz^2> = J(J+1).
    """
    j = n / 2
    jj = j * (j + 1)
    denom = 1 + a * a
    mean_z = 2 * a / denom * np.sqrt(jj / 2)
    var_x = a * a / denom
    var_y = jj * (2 + a * a) / (4 * denom) - a * a / (2 * denom)
    var_z = jj * (2 + 3 * a * a) / (4 * denom) - a * a / (2 * denom) - mean_z**2
    return mean_z, var_x, var_y, var_z


class TestSpinOperators:
    def test_jz_diagonal_n2(self):
        ops = dicke.build_spin_operators(2)
        assert np.allclose(ops.jz, np.diag([-1, 0, 1]))

    def test_pauli_half(self):
        ops = dicke.build_spin_operators(1)
        assert np.allclose(ops.jx, np.array([[0, 0.5], [0.5, 0]]))

    @pytest.mark.parametrize("n", [1, 2, 7, 40])
    def test_commutator(self, n):
        ops = dicke.build_spin_operators(n)
        comm = ops.jx @ ops.jy - ops.jy @ ops.jx
        assert np.max(np.abs(comm - 1j * ops.jz)) < 1e-12

    @pytest.mark.parametrize("n", [2, 11, 40])
    def test_hermiticity_and_ladder(self, n):
        ops = dicke.build_spin_operators(n)
        for op in (ops.jx, ops.jy, ops.jz):
            assert np.max(np.abs(op - op.conj().T)) < 1e-14
        assert np.max(np.abs(ops.jplus - (ops.jx + 1j * ops.jy))) == 0.0

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            dicke.build_spin_operators(0)
        with pytest.raises(ValueError):
            dicke.build_spin_operators(-3)


class TestBlochState:
    def test_moments_n100(self):
        s = dicke.bloch_ground_state(100)
        m = dicke.moments(s, dicke.build_spin_operators(100))
        assert m.mean_z == pytest.approx(-50.0, abs=1e-12)
        assert m.var_x == pytest.approx(25.0, abs=1e-10)
        assert m.var_y == pytest.approx(25.0, abs=1e-10)

    def test_jz_eigenstate(self):
        m = dicke.moments(dicke.bloch_ground_state(2), dicke.build_spin_operators(2))
        assert m.var_z == 0.0

    def test_minimum_uncertainty_n10(self):
        m = dicke.moments(dicke.bloch_ground_state(10), dicke.build_spin_operators(10))
        assert m.var_x * m.var_y == pytest.approx(0.25 * m.mean_z**2, abs=1e-10)
        assert m.var_x * m.var_y == pytest.approx(6.25, abs=1e-10)

    def test_symmetry_means(self):
        m = dicke.moments(dicke.bloch_ground_state(16), dicke.build_spin_operators(16))
        assert abs(m.mean_x) < 1e-12 and abs(m.mean_y) < 1e-12


class TestPsiAState:
    @pytest.mark.parametrize("n,a", [(100, -1.0), (100, 0.0), (40, -1.0),
                                     (20, 0.5), (4, -2.0), (10, 1.0),
                                     (100, -1.1), (10, -0.5)])
    def test_closed_form_moments(self, n, a):
        s = dicke.psi_a_state(n, a)
        m = dicke.moments(s, dicke.build_spin_operators(n))
        mz, vx, vy, vz = closed_form_moments(n, a)
        scale = max(abs(mz), 1.0)
        assert m.mean_z == pytest.approx(mz, abs=1e-8 * scale)
        assert m.var_x == pytest.approx(vx, abs=1e-8)
        assert m.var_y == pytest.approx(vy, rel=1e-8, abs=1e-8)
        assert m.var_z == pytest.approx(vz, rel=1e-8, abs=1e-8)
        assert abs(m.mean_x) < 1e-10 and abs(m.mean_y) < 1e-10

    def test_specific_values_n100(self):
        s = dicke.psi_a_state(100, -1.0)
        m = dicke.moments(s, dicke.build_spin_operators(100))
        assert m.mean_z == pytest.approx(-np.sqrt(1275), rel=1e-10)
        assert np.sqrt(m.var_x) == pytest.approx(1 / np.sqrt(2), rel=1e-10)

    def test_a_zero(self):
        s = dicke.psi_a_state(100, 0.0)
        m = dicke.moments(s, dicke.build_spin_operators(100))
        assert abs(m.mean_z) < 1e-10
        assert m.var_x < 1e-10

    def test_odd_n_rejected(self):
        with pytest.raises(ValueError):
            dicke.psi_a_state(7, -1.0)

    @pytest.mark.parametrize("n,a", [(4, -2.0), (10, 0.5), (40, -1.0), (100, 1.0)])
    def test_norm(self, n, a):
        assert dicke.psi_a_state(n, a).norm_deviation() < 1e-12

    def test_uncertainty_relation_holds(self):
        # Heisenberg: var_x var_y >= <Jz>^2/4 for every constructed state
        for n, a in [(4, -2.0), (10, -1.0), (40, 0.5), (100, -1.1), (100, 1.0)]:
            m = dicke.moments(dicke.psi_a_state(n, a), dicke.build_spin_operators(n))
            assert m.uncertainty_slack() >= -1e-10


class TestProjections:
    def test_x_support(self):
        p = dicke.projections(dicke.psi_a_state(40, -1.0), "x")
        j = 20
        outside = np.delete(p, [j - 1, j, j + 1])
        assert np.max(outside) < 1e-16
        assert p.sum() == pytest.approx(1.0, abs=1e-12)

    def test_z_odd_m_vanish(self):
        s = dicke.psi_a_state(40, -1.0)
        p = dicke.projections(s, "z")
        m = s.m_values
        assert np.max(p[np.abs(np.mod(m, 2)) == 1]) < 1e-16

    def test_bloch_z(self):
        p = dicke.projections(dicke.bloch_ground_state(10), "z")
        assert p[0] == pytest.approx(1.0, abs=1e-14)

    def test_matches_independent_diagonalization(self):
        rng = np.random.default_rng(7)
        n = 12
        amps = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
        amps /= np.linalg.norm(amps)
        s = dicke.DickeState(J=n / 2, amplitudes=amps)
        ops = dicke.build_spin_operators(n)
        for axis, op in (("x", ops.jx), ("y", ops.jy)):
            evals, evecs = np.linalg.eigh(op)
            expected = np.abs(evecs[:, np.argsort(evals)].conj().T @ amps) ** 2
            assert np.allclose(dicke.projections(s, axis), expected, atol=1e-12)

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            dicke.projections(dicke.bloch_ground_state(4), "w")


class TestDickeStateValidation:
    def test_wrong_length(self):
        with pytest.raises(ValueError):
            dicke.DickeState(J=2.0, amplitudes=np.ones(4) / 2)

    def test_unnormalized(self):
        with pytest.raises(ValueError):
            dicke.DickeState(J=1.0, amplitudes=np.array([1.0, 1.0, 0.0]))
