"""Tests for the dissipative twist maps, generating functions, hypotheses and candidate graphs."""

from __future__ import annotations

import json

import numpy as np
import pytest

from graphbreak.errors import HypothesisFailed, ModeIncompatible, NotClosed, OutOfRange, WrongDimension
from graphbreak.jsonio import dumps
from graphbreak.maps import (CandidateGraph, MapParams1D, MapParamsDD, generating_function_check,
                             generating_function_value, generating_gradients, hypothesis_check, jacobian_fd,
                             lifted_potential, lipschitz_bound, mode_eigenvalues, orbit, pullback_check, step_1d,
                             step_dd, write_orbit_csv)
from graphbreak.trigpoly import TrigPoly

TWO_PI_SQ = 4 * np.pi ** 2


def random_states(rng, count, d):
    return np.concatenate([rng.random((count, d)), rng.uniform(-2, 2, (count, d))], axis=1)


# ---------------------------------------------------------------------- 1D family
class TestStep1D:

    def test_invariant_line(self):
        p = MapParams1D(0.5, 0.3, 1.0)
        assert step_1d(p, None, [0.0, 2.0]) == pytest.approx([1.3, 2.0], abs=1e-15)
        assert p.invariant_level == 2.0

    def test_geometric_sum(self):
        p = MapParams1D(0.5, 0.0, 1.0)
        traj = orbit(lambda z: step_1d(p, None, z), [0.0, 0.0], 20)
        assert traj.shape == (21, 2)
        assert abs(traj[20, 1] - 2) < 2e-6
        assert traj[20, 1] == pytest.approx(sum(0.5 ** j for j in range(20)), abs=1e-15)

    def test_unperturbed_contraction_exact(self):
        p = MapParams1D(0.7, 0.1, 0.4)
        z = np.array([0.2, 5.0])
        level = p.invariant_level
        for k in range(1, 30):
            z = step_1d(p, None, z)
            assert abs(z[1] - level) == pytest.approx(0.7 ** k * abs(5.0 - level), rel=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        p = MapParams1D(0.6, 0.2, 0.3)
        phi = TrigPoly.cosine(1, 0.3) + TrigPoly.sine(3, 0.05)
        z = random_states(rng, 100, 1)
        back = step_1d(p, phi, step_1d(p, phi, z), "inverse")
        assert np.abs(back - z).max() < 1e-12
        fwd = step_1d(p, phi, step_1d(p, phi, z, "inverse"))
        assert np.abs(fwd - z).max() < 1e-12

    def test_lift_equivariance(self):
        p = MapParams1D(0.6, 0.2, 0.3)
        phi = TrigPoly.cosine(2, 0.2)
        z = np.array([0.37, -0.4])
        shifted = step_1d(p, phi, z + [3.0, 0.0])
        assert shifted - step_1d(p, phi, z) == pytest.approx([3.0, 0.0], abs=1e-12)

    def test_determinant(self):
        p = MapParams1D(0.45, 0.1, 0.2)
        phi = TrigPoly.cosine(1, 0.5)
        rep = pullback_check(lambda z: step_1d(p, phi, z), 0.45, 1)
        assert rep.max_det_rel_error < 1e-6
        assert rep.max_form_error < 1e-6

    def test_callable_perturbation(self):
        p = MapParams1D(0.5)
        z = step_1d(p, lambda x: 0.1 * np.sin(2 * np.pi * x), [0.25, 0.0])
        assert z == pytest.approx([0.35, 0.1])

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            step_1d(MapParams1D(0.5), None, [0, 0], "sideways")

    @pytest.mark.parametrize("lam", [0.0, 1.0, 1.2])
    def test_lambda_range(self, lam):
        with pytest.raises(OutOfRange):
            MapParams1D(lam)


# ---------------------------------------------------------------------- d-dim family
class TestStepDD:

    def test_translation_on_zero_section(self):
        p = MapParamsDD(0.5, [0.1, 0.2])
        assert step_dd(p, None, np.zeros(4)) == pytest.approx([0.05, 0.1, 0.0, 0.0], abs=1e-15)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_round_trip(self, d):
        rng = np.random.default_rng(d)
        p = MapParamsDD(0.7, rng.random(d))
        Phi = TrigPoly.cosine(tuple([1] + [0] * (d - 1)), 0.02) + TrigPoly.sine(tuple([1] * d), 0.01)
        z = random_states(rng, 100, d)
        assert np.abs(step_dd(p, Phi, step_dd(p, Phi, z), "inverse") - z).max() < 1e-12

    def test_round_trip_matrix_variant(self):
        rng = np.random.default_rng(5)
        p = MapParamsDD(0.6, [0.1, -0.2], np.diag([2.0, 3.0]))
        Phi = TrigPoly.cosine((1, 0), 0.01) + TrigPoly.sine((0, 2), 0.02)
        z = random_states(rng, 100, 2)
        assert np.abs(step_dd(p, Phi, step_dd(p, Phi, z), "inverse") - z).max() < 1e-12

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_determinant(self, d):
        p = MapParamsDD(0.8, np.full(d, 0.1))
        Phi = TrigPoly.cosine(tuple([1] * d), 0.03)
        rep = pullback_check(lambda z: step_dd(p, Phi, z), 0.8, d, samples=50)
        assert rep.expected_det == pytest.approx(0.8 ** d)
        assert rep.max_det_rel_error < 1e-6
        assert rep.max_form_error < 1e-6

    def test_unperturbed_y_contracts(self):
        p = MapParamsDD(0.3, [0.5, 0.5])
        z = np.array([0.1, 0.2, 1.0, -2.0])
        for k in range(1, 10):
            z = step_dd(p, None, z)
            assert np.linalg.norm(z[2:]) == pytest.approx(0.3 ** k * np.sqrt(5), rel=1e-12)

    def test_twist(self):
        p = MapParamsDD(0.4, [0.0, 0.0], np.diag([2.0, 5.0]))
        J = jacobian_fd(lambda z: step_dd(p, None, z), np.array([0.3, 0.1, 0.2, 0.5]))
        assert J[:2, 2:] == pytest.approx(0.4 * np.diag([0.5, 0.2]), abs=1e-8)

    def test_lift_equivariance(self):
        p = MapParamsDD(0.5, [0.1, 0.2])
        Phi = TrigPoly.cosine((1, 1), 0.1)
        z = np.array([0.1, 0.7, 0.3, -0.2])
        diff = step_dd(p, Phi, z + [2.0, -1.0, 0, 0]) - step_dd(p, Phi, z)
        assert diff == pytest.approx([2.0, -1.0, 0.0, 0.0], abs=1e-12)

    def test_state_dimension(self):
        with pytest.raises(WrongDimension):
            step_dd(MapParamsDD(0.5, [0.0, 0.0]), None, np.zeros(3))

    def test_matrix_validation(self):
        with pytest.raises(OutOfRange):
            MapParamsDD(0.5, [0, 0], [[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(OutOfRange):
            MapParamsDD(0.5, [0, 0], [[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(WrongDimension):
            MapParamsDD(0.5, [0, 0], np.eye(3))


class TestModes:

    def test_axis_modes_with_diagonal(self):
        Phi = TrigPoly.cosine((1, 0)) + TrigPoly.cosine((0, 3))
        mu = mode_eigenvalues(np.diag([2.0, 3.0]), Phi)
        nonzero = np.abs(Phi.modes).sum(axis=1) > 0
        assert sorted(set(np.round(mu[nonzero], 12))) == [2.0, 3.0]
        assert np.all(mu[~nonzero] == 0)

    def test_lifted_gradient(self):
        A = np.diag([2.0, 3.0])
        Phi = TrigPoly.cosine((1, 0), 0.1) + TrigPoly.sine((0, 2), 0.2)
        W = lifted_potential(MapParamsDD(0.5, [0, 0], A), Phi)
        x = np.random.default_rng(0).random((10, 2))
        assert np.abs(W.gradient(x) - Phi.gradient(x) @ A.T).max() < 1e-13

    def test_scalar_multiple_accepts_any_mode(self):
        mode_eigenvalues(2.5 * np.eye(2), TrigPoly.cosine((1, 1)))

    def test_incompatible(self):
        p = MapParamsDD(0.5, [0, 0], np.diag([2.0, 3.0]))
        with pytest.raises(ModeIncompatible):
            step_dd(p, TrigPoly.cosine((1, 1)), np.zeros(4))


# ---------------------------------------------------------------------- generating function
class TestGeneratingFunction:

    def test_unperturbed(self):
        for lam, beta in [(0.3, [0.0, 0.0]), (0.9, [0.4, -1.0]), (0.5, [0.2])]:
            assert generating_function_check(MapParamsDD(lam, beta)) < 1e-12

    def test_cos_perturbation(self):
        Phi = TrigPoly.cosine((1, 0), 0.01)
        assert generating_function_check(MapParamsDD(0.7, [0.1, 0.3]), Phi) < 1e-10

    def test_matrix_variant(self):
        Phi = TrigPoly.cosine((1, 0), 0.01) + TrigPoly.sine((0, 2), 0.03)
        assert generating_function_check(MapParamsDD(0.6, [0.2, 0.1], np.diag([2.0, 3.0])), Phi) < 1e-10

    def test_gradients_match_finite_differences(self):
        p = MapParamsDD(0.6, [0.2, 0.1], np.diag([2.0, 3.0]))
        Phi = TrigPoly.cosine((1, 0), 0.05)
        rng = np.random.default_rng(1)
        x, X = rng.random((1, 2)), rng.random((1, 2))
        gx, gX = generating_gradients(p, Phi, x, X)
        h = 1e-6
        for i in range(2):
            e = np.zeros((1, 2))
            e[0, i] = h
            fdx = (generating_function_value(p, Phi, x + e, X) - generating_function_value(p, Phi, x - e, X)) / (2 * h)
            fdX = (generating_function_value(p, Phi, x, X + e) - generating_function_value(p, Phi, x, X - e)) / (2 * h)
            assert fdx[0] == pytest.approx(gx[0, i], abs=1e-8)
            assert fdX[0] == pytest.approx(gX[0, i], abs=1e-8)


# ---------------------------------------------------------------------- hypotheses
class TestHypotheses:

    def test_zero_perturbation(self):
        rep = hypothesis_check(MapParamsDD(0.5, [0, 0]), None)
        assert rep.margin == 1.0 and rep.h1_pass

    def test_margin_lower_bound(self):
        Phi = TrigPoly.cosine((1, 0), 0.5 / TWO_PI_SQ)
        rep = hypothesis_check(MapParamsDD(0.9, [0, 0]), Phi)
        assert rep.margin >= 0.55 - 1e-12
        assert rep.margin == pytest.approx(0.55, abs=1e-12)

    def test_h1_fails(self):
        Phi = TrigPoly.cosine((1, 0), 1.2 / TWO_PI_SQ)
        rep = hypothesis_check(MapParamsDD(0.9, [0, 0]), Phi)
        assert not rep.h1_pass and rep.margin < 0
        with pytest.raises(HypothesisFailed):
            lipschitz_bound(MapParamsDD(0.9, [0, 0]), Phi)

    @pytest.mark.parametrize("lam, expected", [(0.5, 2.0), (0.9, 1 / 0.9)])
    def test_lipschitz_unperturbed(self, lam, expected):
        assert lipschitz_bound(MapParamsDD(lam, [0, 0]), None) == pytest.approx(expected, abs=1e-15)

    def test_lipschitz_perturbed(self):
        Phi = TrigPoly.cosine((1, 0), 0.2 / TWO_PI_SQ)
        assert lipschitz_bound(MapParamsDD(0.5, [0, 0]), Phi) == pytest.approx(2.2, abs=1e-12)

    def test_lipschitz_matrix_variant_rejected(self):
        with pytest.raises(ModeIncompatible):
            lipschitz_bound(MapParamsDD(0.5, [0, 0], np.diag([2.0, 3.0])), None)


# ---------------------------------------------------------------------- candidate graphs
class TestCandidateGraph:

    def test_witness_accepted(self):
        eta = TrigPoly.cosine((1, 2), 0.1) + TrigPoly.sine((0, 1), 0.3)
        g = CandidateGraph.from_witness([0.5, -0.2], eta, 32)
        assert g.d == 2 and g.resolution == 32
        assert g.curl() < 1e-12 and g.witness_residual() < 1e-12

    def test_non_closed_rejected(self):
        rot = CandidateGraph.from_function(
            lambda p: np.stack([np.sin(2 * np.pi * p[:, 1]), np.zeros(len(p))], axis=1), 32, 2)
        assert rot.curl() == pytest.approx(2 * np.pi, rel=1e-9)
        eta = np.zeros((32, 32))
        with pytest.raises(NotClosed):
            CandidateGraph(rot.values, eta, [0.0, 0.0])

    def test_shape_validation(self):
        with pytest.raises(WrongDimension):
            CandidateGraph(np.zeros((4, 5, 2)))

    def test_json_round_trip(self):
        g = CandidateGraph.from_witness([0.5], TrigPoly.cosine(2, 0.1), 64)
        doc = json.loads(dumps(g.to_json()))
        h = CandidateGraph.from_json(doc)
        assert np.array_equal(h.values, g.values) and np.array_equal(h.eta, g.eta)

    def test_orbit_csv(self, tmp_path):
        p = MapParams1D(0.5, 0.1, 0.2)
        traj = orbit(lambda z: step_1d(p, None, z), [0.0, 0.0], 5)
        path = tmp_path / "orbit.csv"
        write_orbit_csv(path, traj)
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data.shape[0] == 6 and np.allclose(data[:, -2:], traj)
