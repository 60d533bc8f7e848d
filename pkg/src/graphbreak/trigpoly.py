"""Real trigonometric polynomials on the d-torus [0, 1)^d.

A :class:`TrigPoly` stores complex Fourier amplitudes ``c_k`` for integer
frequency vectors ``k`` and represents

    p(x) = sum_k c_k exp(2 pi i <k, x>),

with ``c_{-k} = conj(c_k)`` enforced so that ``p`` is real valued.  All the
calculus (derivatives, antiderivative, inverse Laplacian) is exact on the
coefficients; sampling and analysis on uniform grids go through the FFT.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.interpolate import CubicHermiteSpline

from .errors import NonZeroMean, ResolutionTooLow, WrongDimension

PRUNE_REL = 1e-15
MEAN_TOL = 1e-12
STATIONARITY_TOL = 1e-10

# bound on points*modes per evaluation chunk
_CHUNK = 1 << 21


def _as_points(x, dim: int) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1, dim)


def _multi_index(order, dim: int) -> tuple[int, ...]:
    if np.isscalar(order):
        if dim != 1:
            raise WrongDimension(f"scalar derivative order given for dim={dim}")
        order = (int(order),)
    order = tuple(int(a) for a in order)
    if len(order) != dim:
        raise WrongDimension(f"multi-index {order} does not match dim={dim}")
    if any(a < 0 for a in order):
        raise ValueError(f"negative derivative order {order}")
    return order


def multi_indices(order: int, dim: int) -> list[tuple[int, ...]]:
    """All multi-indices ``a`` with ``|a| == order``."""
    return [a for a in itertools.product(range(order + 1), repeat=dim) if sum(a) == order]


class TrigPoly:
    """Real trigonometric polynomial with sparse complex coefficients.

    Parameters
    ----------
    modes : array_like of int, shape (K, d) or (K,) when d == 1
        Frequency vectors.  Repeated vectors are summed.
    coeffs : array_like of complex, shape (K,)
        Amplitudes.  The stored polynomial is the real part of the given
        series, i.e. ``c_k`` and ``conj(c_{-k})`` are averaged.
    dim : int, optional
        Needed only when ``modes`` is empty.
    prune : float
        Amplitudes below ``prune * max|c|`` are dropped (``c_0`` is kept).
    """

    __slots__ = ("modes", "coeffs", "dim", "_block", "_degree")

    def __init__(self, modes, coeffs, dim: int | None = None, prune: float = PRUNE_REL):
        modes = np.asarray(modes, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=complex).ravel()
        if modes.ndim == 1:
            modes = modes.reshape(-1, 1) if dim in (None, 1) else modes.reshape(-1, dim)
        if dim is None:
            dim = modes.shape[1]
        if modes.shape != (coeffs.size, dim):
            raise WrongDimension(f"modes shape {modes.shape} incompatible with {coeffs.size} coefficients, dim={dim}")
        allm = np.concatenate([modes, -modes, np.zeros((1, dim), dtype=np.int64)])
        allc = np.concatenate([coeffs, np.conj(coeffs), [0.0]]) / 2
        uniq, inv = np.unique(allm, axis=0, return_inverse=True)
        c = np.zeros(len(uniq), dtype=complex)
        np.add.at(c, inv.ravel(), allc)
        self._set(uniq, c, dim, prune)

    def _set(self, modes: np.ndarray, coeffs: np.ndarray, dim: int, prune: float) -> None:
        zero = ~modes.any(axis=1)
        coeffs = np.where(zero, coeffs.real + 0j, coeffs)
        if coeffs.size:
            thresh = prune * np.abs(coeffs).max()
            keep = zero | (np.abs(coeffs) >= thresh) & (np.abs(coeffs) > 0)
            modes, coeffs = modes[keep], coeffs[keep]
        self.modes = modes
        self.coeffs = coeffs
        self.dim = dim
        self._block = None
        self._degree = int(np.abs(modes).max()) if modes.size else 0
        self.modes.setflags(write=False)
        self.coeffs.setflags(write=False)

    @classmethod
    def _trusted(cls, modes, coeffs, dim, prune=PRUNE_REL) -> "TrigPoly":
        # caller guarantees unique modes, conjugate symmetry and a k=0 entry
        obj = cls.__new__(cls)
        obj._set(np.asarray(modes, dtype=np.int64), np.asarray(coeffs, dtype=complex), dim, prune)
        return obj

    # ------------------------------------------------------------------ constructors
    @classmethod
    def constant(cls, value: float, dim: int = 1) -> "TrigPoly":
        return cls._trusted(np.zeros((1, dim)), [complex(value)], dim)

    @classmethod
    def zero(cls, dim: int = 1) -> "TrigPoly":
        return cls.constant(0.0, dim)

    @classmethod
    def cosine(cls, k: Sequence[int] | int, amplitude: float = 1.0) -> "TrigPoly":
        """``amplitude * cos(2 pi <k, x>)``."""
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        return cls(np.array([k, -k]), [amplitude / 2, amplitude / 2])

    @classmethod
    def sine(cls, k: Sequence[int] | int, amplitude: float = 1.0) -> "TrigPoly":
        """``amplitude * sin(2 pi <k, x>)``."""
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        return cls(np.array([k, -k]), [-0.5j * amplitude, 0.5j * amplitude])

    @classmethod
    def from_dense(cls, block: np.ndarray, prune: float = PRUNE_REL) -> "TrigPoly":
        """Build from a centered coefficient block of shape ``(2N+1,)*d``."""
        block = np.asarray(block, dtype=complex)
        dim = block.ndim
        n = (block.shape[0] - 1) // 2
        if any(s != 2 * n + 1 for s in block.shape):
            raise WrongDimension(f"centered block must have odd equal sides, got {block.shape}")
        sym = 0.5 * (block + np.conj(block[(slice(None, None, -1),) * dim]))
        grids = np.meshgrid(*([np.arange(-n, n + 1)] * dim), indexing="ij")
        modes = np.stack([g.ravel() for g in grids], axis=1)
        coeffs = sym.ravel()
        keep = (coeffs != 0) | ~modes.any(axis=1)
        return cls._trusted(modes[keep], coeffs[keep], dim, prune)

    @classmethod
    def from_grid(cls, grid: "GridFn | np.ndarray", degree: int | None = None) -> "TrigPoly":
        """Trigonometric interpolant (discrete Fourier analysis) of uniform samples.

        Modes up to ``(R - 1) // 2`` per axis are kept, so for even ``R`` the
        Nyquist mode is dropped.
        """
        values = grid.values if isinstance(grid, GridFn) else np.asarray(grid, dtype=float)
        r = values.shape[0]
        top = (r - 1) // 2
        if degree is None:
            degree = top
        elif degree > top:
            raise ResolutionTooLow(f"resolution {r} cannot resolve degree {degree}")
        spec = sfft.fftn(values) / values.size
        return cls.from_dense(centered_block(spec, degree))

    @classmethod
    def from_json(cls, doc: dict) -> "TrigPoly":
        dim = int(doc["dim"])
        if not doc["coeffs"]:
            return cls.zero(dim)
        modes = np.array([k for k, _ in doc["coeffs"]], dtype=np.int64).reshape(-1, dim)
        coeffs = np.array([complex(re, im) for _, (re, im) in doc["coeffs"]])
        return cls._trusted(modes, coeffs, dim, prune=0.0)

    # ------------------------------------------------------------------ properties
    @property
    def degree(self) -> int:
        return self._degree

    @property
    def mean(self) -> float:
        zero = ~self.modes.any(axis=1)
        return float(self.coeffs[zero].real.sum())

    def coefficient(self, k) -> complex:
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        hit = np.all(self.modes == k, axis=1)
        return complex(self.coeffs[hit].sum())

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "degree": self.degree,
            "coeffs": [[[int(v) for v in k], [float(c.real), float(c.imag)]] for k, c in zip(self.modes, self.coeffs)],
        }

    def to_dense(self, degree: int | None = None) -> np.ndarray:
        n = self.degree if degree is None else degree
        if n < self.degree:
            raise ResolutionTooLow(f"block degree {n} below polynomial degree {self.degree}")
        block = np.zeros((2 * n + 1,) * self.dim, dtype=complex)
        block[tuple((self.modes + n).T)] = self.coeffs
        return block

    def __repr__(self) -> str:
        return f"TrigPoly(dim={self.dim}, degree={self.degree}, modes={len(self.coeffs)})"

    # ------------------------------------------------------------------ arithmetic
    def __add__(self, other):
        if np.isscalar(other):
            other = TrigPoly.constant(float(other), self.dim)
        if other.dim != self.dim:
            raise WrongDimension("dimension mismatch")
        return TrigPoly(np.concatenate([self.modes, other.modes]),
                        np.concatenate([self.coeffs, other.coeffs]), self.dim)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly._trusted(self.modes, -self.coeffs, self.dim)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return TrigPoly._trusted(self.modes, self.coeffs * float(scalar), self.dim)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def allclose(self, other: "TrigPoly", atol: float) -> bool:
        """Coefficient-wise comparison."""
        diff = self - other
        return bool(np.all(np.abs(diff.coeffs) <= atol)) if diff.coeffs.size else True

    # ------------------------------------------------------------------ calculus
    def _factor(self, order: tuple[int, ...]) -> np.ndarray:
        f = np.ones(len(self.coeffs), dtype=complex)
        for j, a in enumerate(order):
            if a:
                f = f * (2j * np.pi * self.modes[:, j]) ** a
        return f

    def derivative(self, order) -> "TrigPoly":
        order = _multi_index(order, self.dim)
        return TrigPoly._trusted(self.modes, self.coeffs * self._factor(order), self.dim)

    def scale_modes(self, multiplier: np.ndarray) -> "TrigPoly":
        """Multiply each amplitude by a real, even (in k) multiplier."""
        return TrigPoly._trusted(self.modes, self.coeffs * multiplier, self.dim)

    # ------------------------------------------------------------------ evaluation
    def __call__(self, x) -> np.ndarray | float:
        """Values at points: scalar (d = 1) or ``(d,)`` gives a float, else an array."""
        arr = np.asarray(x, dtype=float)
        vals = self._eval(_as_points(arr, self.dim), [self.coeffs])[0]
        if arr.ndim == (0 if self.dim == 1 else 1):
            return float(vals[0])
        return vals.reshape(arr.shape if self.dim == 1 else arr.shape[:-1])

    def _eval(self, pts: np.ndarray, weights: list[np.ndarray]) -> list[np.ndarray]:
        out = [np.empty(len(pts)) for _ in weights]
        step = max(1, _CHUNK // max(1, len(self.coeffs)))
        w = np.stack(weights, axis=1)
        for s in range(0, len(pts), step):
            phase = (2 * np.pi) * (pts[s:s + step] @ self.modes.T)
            vals = (np.exp(1j * phase) @ w).real
            for i in range(len(weights)):
                out[i][s:s + step] = vals[:, i]
        return out

    def gradient(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        orders = [tuple(int(i == j) for i in range(self.dim)) for j in range(self.dim)]
        cols = self._eval(pts, [self.coeffs * self._factor(o) for o in orders])
        return np.stack(cols, axis=1)

    def hessian(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        d = self.dim
        pairs = [(i, j) for i in range(d) for j in range(i, d)]
        weights = []
        for i, j in pairs:
            o = [0] * d
            o[i] += 1
            o[j] += 1
            weights.append(self.coeffs * self._factor(tuple(o)))
        cols = self._eval(pts, weights)
        hess = np.empty((len(pts), d, d))
        for (i, j), col in zip(pairs, cols):
            hess[:, i, j] = col
            hess[:, j, i] = col
        return hess

    def _local_jet(self, x: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Value, gradient and Hessian at one point."""
        n = self.degree
        if self.dim > 1 and len(self.coeffs) > 0.2 * (2 * n + 1) ** self.dim:
            return self._dense_jet(x)
        k = (2 * np.pi) * self.modes
        e = np.exp(1j * (k @ x)) * self.coeffs
        val = float(e.sum().real)
        grad = -(e @ k).imag
        hess = -((k.T * e) @ k).real
        return val, grad, hess

    def _dense_jet(self, x: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        # separable contraction of the dense coefficient block, one axis at a time
        if self._block is None:
            self._block = self.to_dense()
        d = self.dim
        k = 2j * np.pi * np.arange(-self.degree, self.degree + 1)
        factors = []
        for j in range(d):
            e = np.exp(k * x[j])
            factors.append([e, k * e, k * k * e])

        def contract(orders):
            t = self._block
            for j in reversed(range(d)):
                t = t @ factors[j][orders[j]]
            return float(t.real)

        grad = np.empty(d)
        hess = np.empty((d, d))
        for i in range(d):
            grad[i] = contract([int(j == i) for j in range(d)])
            for j in range(i, d):
                o = [0] * d
                o[i] += 1
                o[j] += 1
                hess[i, j] = hess[j, i] = contract(o)
        return contract([0] * d), grad, hess

    def curvature_bound(self) -> float:
        """Upper bound for the spectral norm of the Hessian anywhere."""
        return float((np.abs(self.coeffs) * (2 * np.pi) ** 2 * (self.modes.astype(float) ** 2).sum(axis=1)).sum())

    # ------------------------------------------------------------------ grids
    def sample(self, resolution: int) -> "GridFn":
        """Exact values on the uniform grid with ``resolution`` points per axis."""
        if resolution < 2 * self.degree + 1:
            raise ResolutionTooLow(f"resolution {resolution} < 2*degree+1 = {2 * self.degree + 1}")
        spec = np.zeros((resolution,) * self.dim, dtype=complex)
        np.add.at(spec, tuple((self.modes % resolution).T), self.coeffs)
        values = sfft.ifftn(spec).real * resolution ** self.dim
        return GridFn(values)

    def tabulate(self, resolution: int | None = None) -> "PeriodicTable":
        """Fast 1D evaluator: cubic Hermite table built from exact values and slopes."""
        if self.dim != 1:
            raise WrongDimension("tabulation is implemented for d = 1 only")
        if resolution is None:
            resolution = sfft.next_fast_len(max(4096, 64 * (self.degree + 1)))
        return PeriodicTable(self.sample(resolution).values, self.derivative(1).sample(resolution).values)


def centered_block(spec: np.ndarray, degree: int) -> np.ndarray:
    """Extract modes ``|k_j| <= degree`` from an FFT-ordered array."""
    r = spec.shape[0]
    idx = np.arange(-degree, degree + 1) % r
    return spec[np.ix_(*([idx] * spec.ndim))]


class PeriodicTable:
    """Cubic Hermite interpolant of a 1-periodic function from values and slopes."""

    def __init__(self, values: np.ndarray, slopes: np.ndarray):
        m = len(values)
        knots = np.arange(m + 1) / m
        self._spline = CubicHermiteSpline(knots, np.append(values, values[0]), np.append(slopes, slopes[0]))

    def __call__(self, x):
        return self._spline(np.mod(x, 1.0))

    def derivative(self, x):
        return self._spline(np.mod(x, 1.0), 1)


@dataclass(frozen=True)
class GridFn:
    """Real samples on the uniform grid ``{i / R}`` over ``[0, 1)^d``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim < 1 or len(set(v.shape)) != 1:
            raise WrongDimension(f"grid must have equal sides, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_function(cls, func, resolution: int, dim: int = 1) -> "GridFn":
        """Sample ``func(x_1, ..., x_d)`` (vectorized) on the grid."""
        return cls(func(*grid_axes(resolution, dim)))

    def mean(self) -> float:
        return float(self.values.mean())


def grid_axes(resolution: int, dim: int) -> list[np.ndarray]:
    axis = np.arange(resolution) / resolution
    return np.meshgrid(*([axis] * dim), indexing="ij")


def grid_points(resolution: int, dim: int) -> np.ndarray:
    """Grid points as an array of shape ``(R**d, d)`` in C order."""
    return np.stack([g.ravel() for g in grid_axes(resolution, dim)], axis=1)


# ---------------------------------------------------------------------- operations
def eval_and_derive(p: TrigPoly, point, multi_index=0) -> float:
    """Partial derivative ``d^a p`` at a single point."""
    q = p.derivative(multi_index)
    return float(q._eval(_as_points(point, p.dim), [q.coeffs])[0][0])


def _require_zero_mean(p: TrigPoly) -> None:
    if abs(p.mean) > MEAN_TOL:
        raise NonZeroMean(f"mean {p.mean:.3e} exceeds {MEAN_TOL:g}")


def antiderivative_1d(p: TrigPoly) -> TrigPoly:
    """Zero-mean ``q`` with ``q' = p``."""
    if p.dim != 1:
        raise WrongDimension("antiderivative_1d needs d = 1")
    _require_zero_mean(p)
    k = p.modes[:, 0]
    safe = np.where(k == 0, 1, k)
    coeffs = np.where(k == 0, 0.0, p.coeffs / (2j * np.pi * safe))
    return TrigPoly._trusted(p.modes, coeffs, 1)


def laplacian(p: TrigPoly) -> TrigPoly:
    k2 = (p.modes ** 2).sum(axis=1)
    return p.scale_modes(-4 * np.pi ** 2 * k2)


def inverse_laplacian(p: TrigPoly) -> TrigPoly:
    """Zero-mean ``u`` with ``laplacian(u) = p``."""
    _require_zero_mean(p)
    k2 = (p.modes ** 2).sum(axis=1)
    safe = np.where(k2 == 0, 1, k2)
    return p.scale_modes(np.where(k2 == 0, 0.0, -1.0 / (4 * np.pi ** 2 * safe)))


def calculus(p: TrigPoly, kind: str):
    if kind == "mean":
        return p.mean
    if kind == "antiderivative_1d":
        return antiderivative_1d(p)
    if kind == "inverse_laplacian":
        return inverse_laplacian(p)
    raise ValueError(f"unknown calculus kind {kind!r}")


# ---------------------------------------------------------------------- extrema
@dataclass(frozen=True)
class Extrema:
    min: float
    argmin: np.ndarray
    max: float
    argmax: np.ndarray


def default_resolution(p: TrigPoly) -> int:
    floor = {1: 1024, 2: 1024}.get(p.dim, 64)
    return max(4 * p.degree + 1, floor)


def _grid_candidates(values: np.ndarray, count: int) -> np.ndarray:
    """Flat indices of the ``count`` largest grid local maxima."""
    is_peak = np.ones(values.shape, dtype=bool)
    for ax in range(values.ndim):
        is_peak &= values >= np.roll(values, 1, axis=ax)
        is_peak &= values >= np.roll(values, -1, axis=ax)
    flat = np.flatnonzero(is_peak)
    if flat.size == 0:
        flat = np.array([int(np.argmax(values))])
    vals = values.ravel()[flat]
    if flat.size > count:
        top = np.argpartition(-vals, count)[:count]
        flat = flat[top]
    return flat


def _polish(p: TrigPoly, x: np.ndarray, sign: float, spacing: float) -> tuple[np.ndarray, float]:
    val, grad, hess = p._local_jet(x)
    val, grad, hess = sign * val, sign * grad, sign * hess
    for _ in range(60):
        if np.linalg.norm(grad) <= STATIONARITY_TOL:
            break
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad.copy()
        if grad @ step <= 0:
            step = grad * (spacing / (np.linalg.norm(grad) + 1e-300))
        norm = np.linalg.norm(step)
        if norm > spacing:
            step *= spacing / norm
        t = 1.0
        while t > 1e-8:
            cand = x + t * step
            cval = sign * p._local_jet(cand)[0]
            if cval >= val:
                break
            t *= 0.5
        else:
            break
        x = cand
        val, grad, hess = p._local_jet(x)
        val, grad, hess = sign * val, sign * grad, sign * hess
        if t * norm < 1e-15:
            break
    return np.mod(x, 1.0), sign * val


def extrema(p: TrigPoly, resolution: int | None = None, candidates: int = 8) -> Extrema:
    """Global min/max: grid scan followed by damped Newton polishing."""
    if resolution is None:
        resolution = default_resolution(p)
    if resolution < 4 * p.degree + 1:
        raise ResolutionTooLow(f"resolution {resolution} < 4*degree+1 = {4 * p.degree + 1}")
    values = p.sample(resolution).values
    spacing = 1.0 / resolution
    # a grid point lies within spacing*sqrt(d)/2 of the true extremum
    slack = 0.5 * p.curvature_bound() * (0.5 * spacing) ** 2 * p.dim
    results = []
    for sign in (-1.0, 1.0):
        best_x, best_v = None, -np.inf
        flats = _grid_candidates(sign * values, candidates)
        flats = flats[np.argsort(-(sign * values.ravel()[flats]))]
        for flat in flats:
            if sign * values.ravel()[flat] + slack < best_v:
                break
            x0 = np.array(np.unravel_index(flat, values.shape), dtype=float) / resolution
            x, v = _polish(p, x0, sign, spacing)
            if sign * v > best_v:
                best_x, best_v = x, sign * v
        results.append((sign * best_v, best_x))
    (mn, amin), (mx, amax) = results
    return Extrema(mn, amin, mx, amax)


def sup_norm(p: TrigPoly, resolution: int | None = None) -> float:
    ext = extrema(p, resolution)
    return max(abs(ext.min), abs(ext.max))


# ---------------------------------------------------------------------- Hölder norms
@dataclass(frozen=True)
class HolderNorm:
    """Estimated ``C^s`` norm with ``s = r + sigma``.

    ``sup_norms[j]`` is the largest sup-norm among derivatives of order ``j``;
    ``seminorm`` is the sigma-Hölder quotient of the order-``r`` derivatives.
    With ``convention="sum"`` the value is ``sum(sup_norms) + seminorm``; with
    ``"max"`` it is ``max(*sup_norms, seminorm)``.
    """

    order: float
    r: int
    sigma: float
    value: float
    sup_norms: tuple[float, ...]
    seminorm: float
    convention: str
    resolution: int
    pairs: int

    def to_json(self) -> dict:
        return {
            "order": self.order, "r": self.r, "sigma": self.sigma, "value": self.value,
            "sup_norms": list(self.sup_norms), "seminorm": self.seminorm,
            "convention": self.convention, "resolution": self.resolution, "pairs": self.pairs,
        }


def _lattice_offsets(dim: int, radius_pts: float, dense: int = 6) -> np.ndarray:
    """Half-space lattice offsets: all within ``dense`` steps, dyadic beyond."""
    rng = range(-dense, dense + 1)
    small = [v for v in itertools.product(rng, repeat=dim) if 0 < np.linalg.norm(v) <= min(dense, radius_pts)]
    dirs = [np.eye(dim, dtype=int)[j] for j in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            dirs += [dirs[i] + dirs[j], dirs[i] - dirs[j]]
    big = []
    length = dense + 1
    while length <= radius_pts:
        for u in dirs:
            step = int(length / np.linalg.norm(u))
            if step > 0:
                big.append(tuple(step * u))
        length *= 1.5
    offsets = set()
    for v in small + big:
        v = tuple(int(a) for a in v)
        neg = tuple(-a for a in v)
        if neg not in offsets:
            offsets.add(v)
    return np.array(sorted(offsets), dtype=int)


def holder_seminorm(values: np.ndarray, sigma: float, radius: float = 0.1, random_pairs: int = 10_000,
                    seed: int = 0) -> tuple[float, int]:
    """Largest ``|f(x)-f(y)| / |x-y|^sigma`` over grid pairs.

    Pairs: every offset within ``radius`` (1D; lattice offsets for d > 1,
    dense near the origin and dyadic farther out) plus ``random_pairs`` random
    grid pairs with torus distance.
    """
    r = values.shape[0]
    dim = values.ndim
    best = 0.0
    count = 0
    if dim == 1:
        offsets = np.arange(1, max(1, int(radius * r)) + 1).reshape(-1, 1)
    else:
        offsets = _lattice_offsets(dim, radius * r)
    for off in offsets:
        shifted = np.roll(values, tuple(-int(o) for o in off), axis=tuple(range(dim)))
        dist = np.linalg.norm(off) / r
        best = max(best, float(np.abs(shifted - values).max()) / dist ** sigma)
        count += values.size
    if random_pairs:
        rng = np.random.default_rng(seed)
        a = rng.integers(0, r, size=(random_pairs, dim))
        b = rng.integers(0, r, size=(random_pairs, dim))
        delta = (a - b) / r
        delta -= np.round(delta)
        dist = np.linalg.norm(delta, axis=1)
        ok = dist > 0
        fa = values[tuple(a.T)]
        fb = values[tuple(b.T)]
        if ok.any():
            best = max(best, float((np.abs(fa - fb)[ok] / dist[ok] ** sigma).max()))
        count += int(ok.sum())
    return best, count


def holder_norm(p: TrigPoly, order: float, resolution: int | None = None, *, convention: str = "sum",
                radius: float = 0.1, random_pairs: int = 10_000, seed: int = 0) -> HolderNorm:
    if order < 0:
        raise ValueError("Hölder order must be nonnegative")
    if convention not in ("sum", "max"):
        raise ValueError(f"unknown convention {convention!r}")
    if resolution is None:
        resolution = default_resolution(p)
    if resolution < 4 * p.degree + 1:
        raise ResolutionTooLow(f"resolution {resolution} < 4*degree+1 = {4 * p.degree + 1}")
    r = int(math.floor(order + 1e-12))
    sigma = max(0.0, order - r)
    sups = []
    for j in range(r + 1):
        sups.append(max(sup_norm(p.derivative(a), resolution) for a in multi_indices(j, p.dim)))
    semi, pairs = 0.0, 0
    if sigma > 0:
        for a in multi_indices(r, p.dim):
            values = p.derivative(a).sample(resolution).values
            q, pairs = holder_seminorm(values, sigma, radius, random_pairs, seed)
            semi = max(semi, q)
    value = sum(sups) + semi if convention == "sum" else max(max(sups), semi)
    return HolderNorm(float(order), r, float(sigma), float(value), tuple(float(s) for s in sups),
                      float(semi), convention, int(resolution), int(pairs))


def extrema_and_norms(p: TrigPoly, order: float = 0.0, resolution: int | None = None, **kw):
    """``(min, argmin, max, argmax, HolderNorm)`` at the given grid resolution."""
    ext = extrema(p, resolution)
    return ext.min, ext.argmin, ext.max, ext.argmax, holder_norm(p, order, resolution, **kw)
