"""Tests for Fejér means, de la Vallée Poussin operators and Jackson approximation."""

from __future__ import annotations

import json

import numpy as np
import pytest
from scipy.special import i0

from graphbreak.approx import ApproxReport, fejer_mean, jackson_approximate, jackson_bound, vallee_poussin
from graphbreak.errors import ResolutionTooLow, WrongDimension
from graphbreak.trigpoly import GridFn, TrigPoly


def random_poly(rng, degree, dim=1):
    shape = (2 * degree + 1,) * dim
    return TrigPoly.from_dense(rng.normal(size=shape) + 1j * rng.normal(size=shape))


def fejer_quadrature(p: TrigPoly, m: int, x: np.ndarray, axis: int = 0, points: int = 10_000) -> np.ndarray:
    """Fejér mean by direct quadrature of the kernel integral over t in [-1/4, 1/4].

    The kernel (sin 2 pi m t / sin 2 pi t)^2 integrates to m/2 over that window,
    so the normalising prefactor is 2/m. The integrand is periodic over the
    window, so the midpoint rule converges spectrally.
    """
    t = -0.25 + (np.arange(points) + 0.5) / (2 * points)
    kernel = (np.sin(2 * np.pi * m * t) / np.sin(2 * np.pi * t)) ** 2
    w = kernel * (0.5 / points) * 2.0 / m
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 1 and p.dim > 1:
        x = x.reshape(-1, p.dim)
    if p.dim == 1:
        x = x.reshape(-1, 1)
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        pts = np.repeat(xi[None, :], points, axis=0)
        pts[:, axis] += 2 * t
        out[i] = p(pts if p.dim > 1 else pts[:, 0]) @ w
    return out


# ---------------------------------------------------------------------- Fejér
class TestFejer:
    """Multiplier implementation against the integral form."""

    def test_kernel_has_unit_mass(self):
        for m in (1, 2, 5, 11):
            assert fejer_quadrature(TrigPoly.constant(1.0), m, [0.3])[0] == pytest.approx(1.0, abs=1e-12)

    def test_constant_preserved(self):
        assert fejer_mean(TrigPoly.constant(2.5), 4).allclose(TrigPoly.constant(2.5), 1e-15)

    def test_cos_m2_halves(self):
        assert fejer_mean(TrigPoly.cosine(1), 2).allclose(TrigPoly.cosine(1, 0.5), 1e-15)
        x = np.linspace(0, 1, 9)
        assert np.abs(fejer_quadrature(TrigPoly.cosine(1), 2, x) - 0.5 * np.cos(2 * np.pi * x)).max() < 1e-8

    def test_cos_m1_vanishes(self):
        assert fejer_mean(TrigPoly.cosine(1), 1).allclose(TrigPoly.zero(), 1e-15)
        assert np.abs(fejer_quadrature(TrigPoly.cosine(1), 1, np.linspace(0, 1, 5))).max() < 1e-8

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_quadrature_random(self, seed):
        rng = np.random.default_rng(seed)
        p = random_poly(rng, 10)
        x = rng.random(6)
        for m in (1, 3, 7, 12):
            diff = fejer_mean(p, m)(x) - fejer_quadrature(p, m, x)
            assert np.abs(diff).max() < 1e-8, f"m={m}: {np.abs(diff).max()}"

    def test_matches_quadrature_2d_axis(self):
        rng = np.random.default_rng(11)
        p = random_poly(rng, 4, dim=2)
        x = rng.random((4, 2))
        for axis in (0, 1):
            diff = fejer_mean(p, 3, axis)(x) - fejer_quadrature(p, 3, x, axis)
            assert np.abs(diff).max() < 1e-8

    def test_degree_drops_below_m(self):
        p = random_poly(np.random.default_rng(2), 10)
        assert fejer_mean(p, 4).degree <= 3

    def test_contraction(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p = random_poly(rng, 10)
            sup = np.abs(p.sample(1024).values).max()
            assert np.abs(fejer_mean(p, 5).sample(1024).values).max() <= sup * (1 + 1e-12)

    def test_grid_resolution_guard(self):
        with pytest.raises(ResolutionTooLow):
            fejer_mean(GridFn(np.zeros(8)), 2)

    def test_bad_axis(self):
        with pytest.raises(WrongDimension):
            fejer_mean(TrigPoly.cosine(1), 2, axis=1)

    def test_grid_input(self):
        x = np.arange(64) / 64
        out = fejer_mean(GridFn(np.cos(2 * np.pi * x)), 2)
        assert out.allclose(TrigPoly.cosine(1, 0.5), 1e-14)


# ---------------------------------------------------------------------- de la Vallée Poussin
class TestValleePoussin:

    def test_reproduces_low_degree(self):
        rng = np.random.default_rng(4)
        for m in (1, 3, 6):
            p = random_poly(rng, m, dim=2)
            assert vallee_poussin(p, m).allclose(p, 1e-12)

    def test_cos3_m2(self):
        assert vallee_poussin(TrigPoly.cosine(3), 2).allclose(TrigPoly.cosine(3, 0.5), 1e-15)
        x = np.linspace(0, 1, 7)
        p = TrigPoly.cosine(3)
        oracle = 2 * fejer_quadrature(p, 4, x) - fejer_quadrature(p, 2, x)
        assert np.abs(oracle - 0.5 * p(x)).max() < 1e-8

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_quadrature_composition(self, seed):
        rng = np.random.default_rng(100 + seed)
        p = random_poly(rng, 10)
        x = rng.random(5)
        for m in (2, 5):
            oracle = 2 * fejer_quadrature(p, 2 * m, x) - fejer_quadrature(p, m, x)
            assert np.abs(vallee_poussin(p, m)(x) - oracle).max() < 1e-8

    def test_degree_bound(self):
        p = random_poly(np.random.default_rng(5), 12)
        assert vallee_poussin(p, 3).degree <= 5

    def test_norm_at_most_three(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            p = random_poly(rng, int(rng.integers(1, 16)))
            m = int(rng.integers(1, 8))
            sup = np.abs(p.sample(2048).values).max()
            assert np.abs(vallee_poussin(p, m).sample(2048).values).max() <= 3 * sup

    def test_linearity(self):
        rng = np.random.default_rng(7)
        p, q = random_poly(rng, 9, 2), random_poly(rng, 9, 2)
        lhs = vallee_poussin(p * 1.7 + q * -0.4, 3)
        rhs = vallee_poussin(p, 3) * 1.7 + vallee_poussin(q, 3) * -0.4
        assert lhs.allclose(rhs, 1e-13)

    def test_axis_commutation(self):
        p = random_poly(np.random.default_rng(8), 8, 2)
        a = vallee_poussin(vallee_poussin(p, 2, [1]), 3, [0])
        b = vallee_poussin(vallee_poussin(p, 3, [0]), 2, [1])
        assert a.allclose(b, 1e-13)

    def test_single_axis_leaves_other_alone(self):
        p = TrigPoly.cosine((0, 7))
        assert vallee_poussin(p, 2, [0]).allclose(p, 1e-15)
        assert vallee_poussin(p, 2, [1]).allclose(TrigPoly.zero(2), 1e-15)


# ---------------------------------------------------------------------- Jackson
def expcos_grid(resolution=1024):
    x = np.arange(resolution) / resolution
    return GridFn(np.exp(np.cos(2 * np.pi * x)) - i0(1.0))


class TestJackson:

    def test_reproduces_cos(self):
        x = np.arange(64) / 64
        p, rep = jackson_approximate(GridFn(np.cos(2 * np.pi * x)), 3)
        assert p.allclose(TrigPoly.cosine(1), 1e-13)
        assert rep.achieved_error <= 1e-12
        assert rep.m_per_axis == (2,)

    def test_degree_at_most_N(self):
        for N in (1, 2, 5, 8, 9):
            p, _ = jackson_approximate(expcos_grid(), N)
            assert p.degree <= N

    def test_expcos_rate(self):
        Ns = np.array([8, 16, 32, 64])
        errors = np.array([jackson_approximate(expcos_grid(), int(N))[1].achieved_error for N in Ns])
        floor = 1e-15
        slope = np.polyfit(np.log(Ns), np.log(np.maximum(errors, floor)), 1)[0]
        assert slope < -4, f"slope {slope}, errors {errors}"
        assert np.all(np.diff(errors[errors > 1e-13]) < 0)

    def test_expcos_against_partial_sum_reference(self):
        # high-resolution reference: the grid function is the analytic one to roundoff
        f = expcos_grid(4096)
        x = np.arange(4096) / 4096
        p, rep = jackson_approximate(f, 16)
        assert np.abs(p(x) - f.values).max() == pytest.approx(rep.achieved_error, rel=1e-6, abs=1e-15)

    def test_zero_mean_preserved(self):
        rng = np.random.default_rng(9)
        values = rng.normal(size=(64, 64))
        values -= values.mean()
        p, _ = jackson_approximate(GridFn(values), 12)
        assert abs(p.mean) < 1e-14
        p, _ = jackson_approximate(expcos_grid(), 8)
        assert abs(p.mean) < 1e-14

    def test_finite_smoothness_constant_stable(self):
        # |sin|^3 shifted to zero mean has three continuous derivatives in the Zygmund sense
        R = 8192
        x = np.arange(R) / R
        g = np.abs(np.sin(2 * np.pi * x)) ** 3
        f = GridFn(g - g.mean())
        Ns = [16, 32, 64, 128]
        consts = [jackson_approximate(f, N)[1].achieved_error * N ** 3 for N in Ns]
        assert max(consts) / min(consts) < 2.0, consts

    def test_resolution_guard(self):
        with pytest.raises(ResolutionTooLow):
            jackson_approximate(GridFn(np.zeros(16)), 16)

    def test_bound_reported_with_norms(self):
        _, rep = jackson_approximate(expcos_grid(), 16, {2: 10.0, 4: 100.0})
        k, bound = jackson_bound(16, {2: 10.0, 4: 100.0})
        assert (rep.k, rep.bound) == (k, bound) == (4, pytest.approx(2 ** 4 * 16 ** -4 * 100))

    def test_report_json(self):
        _, rep = jackson_approximate(expcos_grid(), 8, {3: 5.0})
        doc = json.loads(json.dumps(rep.to_json()))
        assert set(doc) == {"N", "m_per_axis", "achieved_error", "k", "bound"}
        assert ApproxReport.from_json(doc) == rep
        assert rep.achieved_error >= 0
