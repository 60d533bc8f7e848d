"""Fejér means, de la Vallée Poussin operators and tensorized Jackson approximation.

All operators act on Fourier coefficients through their multipliers:

* Fejér mean ``F_m`` along axis ``j`` scales mode ``k`` by ``(1 - |k_j|/m)_+``;
* de la Vallée Poussin ``P_m = 2 F_{2m} - F_m`` scales it by 1 for
  ``|k_j| <= m``, by ``2 - |k_j|/m`` for ``m <= |k_j| <= 2m`` and by 0 beyond.

Sampled inputs (:class:`GridFn`) are converted to coefficients by the DFT.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from scipy import fft as sfft

from .errors import ResolutionTooLow, WrongDimension
from .trigpoly import GridFn, TrigPoly, centered_block


def fejer_multiplier(k: np.ndarray, m: int) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(k) / m)


def vallee_poussin_multiplier(k: np.ndarray, m: int) -> np.ndarray:
    return 2.0 * fejer_multiplier(k, 2 * m) - fejer_multiplier(k, m)


def _as_poly(f: TrigPoly | GridFn, m: int, axes: Iterable[int]) -> TrigPoly:
    if isinstance(f, TrigPoly):
        return f
    if f.resolution < 4 * m + 1:
        raise ResolutionTooLow(f"grid resolution {f.resolution} < 4m+1 = {4 * m + 1}")
    return TrigPoly.from_grid(f)


def _check_axes(dim: int, axes: Iterable[int]) -> list[int]:
    axes = list(axes)
    if any(not 0 <= a < dim for a in axes) or len(set(axes)) != len(axes):
        raise WrongDimension(f"axes {axes} invalid for dim={dim}")
    return axes


def fejer_mean(f: TrigPoly | GridFn, m: int, axis: int = 0) -> TrigPoly:
    """``F_m`` along one axis (0-based)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    p = _as_poly(f, m, [axis])
    (axis,) = _check_axes(p.dim, [axis])
    return p.scale_modes(fejer_multiplier(p.modes[:, axis], m))


def vallee_poussin(f: TrigPoly | GridFn, m: int, axes: Iterable[int] | None = None) -> TrigPoly:
    """``P_m`` applied successively along ``axes`` (default: all axes)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    p = _as_poly(f, m, axes or [])
    axes = _check_axes(p.dim, range(p.dim) if axes is None else axes)
    mult = np.ones(len(p.coeffs))
    for a in axes:
        mult = mult * vallee_poussin_multiplier(p.modes[:, a], m)
    return p.scale_modes(mult)


@dataclass(frozen=True)
class ApproxReport:
    N: int
    m_per_axis: tuple[int, ...]
    achieved_error: float
    k: int | None = None
    bound: float | None = None

    def to_json(self) -> dict:
        return {"N": self.N, "m_per_axis": list(self.m_per_axis), "achieved_error": self.achieved_error,
                "k": self.k, "bound": self.bound}

    @classmethod
    def from_json(cls, doc: dict) -> "ApproxReport":
        return cls(int(doc["N"]), tuple(doc["m_per_axis"]), float(doc["achieved_error"]), doc.get("k"),
                   doc.get("bound"))


def jackson_bound(N: int, norms: Mapping[int, float]) -> tuple[int, float]:
    """Smallest ``2^k N^-k ||f||_{C^k}`` over the supplied norm table.

    The dimension-dependent constant in front is not known explicitly and is
    left out; only the ``N^-k`` scaling is reported.
    """
    k, bound = min(((int(k), float(2.0 ** k * N ** (-float(k)) * v)) for k, v in norms.items()),
                   key=lambda kv: kv[1])
    return k, bound


class JacksonApproximator:
    """Caches the spectrum of one grid function for repeated degree requests."""

    def __init__(self, f: GridFn):
        self.grid = f
        self.spectrum = sfft.fftn(f.values) / f.values.size
        self._freqs = np.rint(sfft.fftfreq(f.resolution, 1.0 / f.resolution)).astype(int)

    def __call__(self, N: int, norms: Mapping[int, float] | None = None) -> tuple[TrigPoly, ApproxReport]:
        if N < 1:
            raise ValueError("N must be >= 1")
        f = self.grid
        m = (N + 1) // 2
        top = 2 * m - 1
        if f.resolution < 2 * top + 1:
            raise ResolutionTooLow(f"resolution {f.resolution} not alias-free for degree {top}")
        mult1 = vallee_poussin_multiplier(self._freqs, m)
        spec = self.spectrum
        for ax in range(f.dim):
            shape = [1] * f.dim
            shape[ax] = -1
            spec = spec * mult1.reshape(shape)
        approx = sfft.ifftn(spec).real * f.values.size
        error = float(np.abs(approx - f.values).max())
        poly = TrigPoly.from_dense(centered_block(spec, top))
        k = bound = None
        if norms:
            k, bound = jackson_bound(N, norms)
        return poly, ApproxReport(int(N), (m,) * f.dim, error, k, bound)


def jackson_approximate(f: GridFn, N: int, norms: Mapping[int, float] | None = None) -> tuple[TrigPoly, ApproxReport]:
    """``p_N = P_{m,...,m}(f)`` with ``m = (N + 1) // 2``, so ``deg p_N <= N``.

    ``achieved_error`` is the largest deviation from ``f`` at its samples.
    """
    return JacksonApproximator(f)(N, norms)
