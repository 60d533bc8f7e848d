"""Construction of the destroying perturbation.

Pipeline for smallness index ``n`` and depth ``delta``:

1. :func:`build_model_bump` samples a smooth periodic function with a wide
   positive bump of height ``3/(4n)`` centred at ``(1/4, ..., 1/4)`` and a
   narrow negative bump of depth ``delta + 1/(4n)`` centred at
   ``(3/4, ..., 3/4)``, with integral zero.
2. :func:`build_derivative_polynomial` Jackson-approximates it to within
   ``1/(4n)`` and rescales so that ``-min = delta`` exactly.
3. :func:`assemble_perturbation` integrates once (d = 1) or inverts
   ``(1/d) Laplacian`` (d > 1) to get the potential that enters the map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .approx import ApproxReport, JacksonApproximator
from .errors import ApproximationFailed, InfeasibleGeometry, NonZeroMean, OutOfRange, ResolutionTooLow, WrongDimension
from .trigpoly import (MEAN_TOL, GridFn, TrigPoly, antiderivative_1d, extrema, holder_norm, holder_seminorm,
                       inverse_laplacian, multi_indices)

PLATEAU = 0.5
MAX_DOUBLINGS = 10


def delta_of_lambda(lam: float) -> float:
    """Depth schedule: 1 on (0, 1/2], ``(4/3)(1 - lam^2)`` on (1/2, 1)."""
    if not 0.0 < lam < 1.0:
        raise OutOfRange(f"lambda={lam} outside (0, 1)")
    return 1.0 if lam <= 0.5 else 4.0 / 3.0 * (1.0 - lam * lam)


@dataclass(frozen=True)
class BumpSpec:
    n: int
    d: int = 1
    delta: float = 1.0
    eps: float = 0.1

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise OutOfRange("n and d must be positive")
        if self.delta <= 0:
            raise OutOfRange("delta must be positive")
        if not 0.0 < self.eps < 1.0:
            raise OutOfRange(f"eps={self.eps} outside (0, 1)")

    @property
    def depth(self) -> float:
        """Depth of the negative bump, ``delta + 1/(4n)``."""
        return self.delta + 1.0 / (4 * self.n)

    @property
    def height(self) -> float:
        return 3.0 / (4 * self.n)

    @property
    def b(self) -> float:
        """Half-width of the negative bump: equal-volume condition with the positive one."""
        return 0.25 * self.depth ** (-1.0 / self.d) * self.height ** (1.0 / self.d)

    @property
    def n_theoretical(self) -> int:
        return max(1, math.floor(self.n ** (1.0 / self.d + self.eps)))

    @property
    def smoothness_order(self) -> int:
        """``k`` with ``(1 + d) / (d k) <= eps / 2``."""
        return math.ceil(2 * (1 + self.d) / (self.d * self.eps))

    def check(self) -> None:
        if 2 * self.b >= 0.5:
            raise InfeasibleGeometry(f"negative bump half-width {self.b:.4g} does not fit in (1/2, 1)")


def smoothstep(u: np.ndarray) -> np.ndarray:
    """C-infinity step from 0 (u <= 0) to 1 (u >= 1) built from exp(-1/t)."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def plateau_profile(t: np.ndarray, plateau: float = PLATEAU) -> np.ndarray:
    """Even bump on [-1, 1], equal to 1 on ``|t| <= plateau``."""
    return smoothstep((1.0 - np.abs(t)) / (1.0 - plateau))


def default_bump_resolution(spec: BumpSpec) -> int:
    transition = (1.0 - PLATEAU) * spec.b
    want = max(4096 if spec.d == 1 else 512, 48.0 / transition)
    cap = {1: 1 << 17, 2: 2048}.get(spec.d, 128)
    return int(min(cap, 1 << math.ceil(math.log2(want))))


def build_model_bump(spec: BumpSpec, resolution: int | None = None) -> GridFn:
    """Sample the two-bump model function.

    The positive bump amplitude is recalibrated on the grid so the discrete
    mean is zero (analytically the two integrals already balance).
    """
    spec.check()
    if resolution is None:
        resolution = default_bump_resolution(spec)
    x = np.arange(resolution) / resolution
    pos1 = plateau_profile((x - 0.25) / 0.25)
    neg1 = plateau_profile((x - 0.75) / spec.b)
    pos, neg = pos1, neg1
    for _ in range(spec.d - 1):
        pos = np.multiply.outer(pos, pos1)
        neg = np.multiply.outer(neg, neg1)
    if neg.sum() == 0:
        raise ResolutionTooLow(f"resolution {resolution} does not resolve bump of half-width {spec.b:.3g}")
    amp = spec.depth * neg.sum() / pos.sum()
    return GridFn(amp * pos - spec.depth * neg)


def ck_norm_estimate(f: GridFn, k: int) -> float:
    """``sum_{j <= k} max_{|a| = j} sup |d^a f|`` by spectral differentiation."""
    if k < 0:
        raise ValueError("k must be >= 0")
    r = f.resolution
    if r < max(8, 2 * k + 2):
        raise ResolutionTooLow(f"resolution {r} too low for order {k}")
    spec = sfft.fftn(f.values)
    freqs = sfft.fftfreq(r, 1.0 / r)
    nyq = (r % 2 == 0)
    total = 0.0
    for j in range(k + 1):
        best = 0.0
        for a in multi_indices(j, f.dim):
            s = spec
            for ax, order in enumerate(a):
                if not order:
                    continue
                mult = (2j * np.pi * freqs) ** order
                if nyq and order % 2:
                    mult[r // 2] = 0.0
                shape = [1] * f.dim
                shape[ax] = -1
                s = s * mult.reshape(shape)
            best = max(best, float(np.abs(sfft.ifftn(s).real).max()))
        total += best
    return total


@dataclass(frozen=True)
class DerivativeFit:
    """Result of the Jackson step followed by the depth rescale."""

    poly: TrigPoly
    report: ApproxReport
    n_theoretical: int
    n_achieved: int
    doublings: int
    pre_rescale_min: float
    pre_rescale_max: float
    scale: float
    resolution: int


def build_derivative_polynomial(spec: BumpSpec, resolution: int | None = None,
                                max_doublings: int = MAX_DOUBLINGS) -> DerivativeFit:
    """Trigonometric polynomial with mean 0, ``-min = delta`` and ``max <= 1/n``."""
    bump = build_model_bump(spec, resolution)
    approx = JacksonApproximator(bump)
    target = 1.0 / (4 * spec.n)
    N = spec.n_theoretical
    for doubling in range(max_doublings + 1):
        m = (N + 1) // 2
        if bump.resolution < 2 * (2 * m - 1) + 1:
            raise ApproximationFailed(f"degree {N} exceeds what the {bump.resolution}-point bump grid resolves")
        poly, report = approx(N)
        if report.achieved_error <= target:
            break
        N *= 2
    else:
        raise ApproximationFailed(f"C0 error {report.achieved_error:.3e} > {target:.3e} after {max_doublings} doublings")
    ext = extrema(poly)
    scale = -spec.delta / ext.min
    report = ApproxReport(report.N, report.m_per_axis, report.achieved_error, spec.smoothness_order, None)
    return DerivativeFit(poly * scale, report, spec.n_theoretical, N, doubling, ext.min, ext.max, scale,
                         bump.resolution)


@dataclass(frozen=True)
class PerturbationBundle:
    """Derivative polynomial, potential and the measurements that go with them."""

    derivative_poly: TrigPoly
    potential: TrigPoly
    lam: float
    d: int
    n: int | None = None
    eps: float | None = None
    delta: float | None = None
    N_theoretical: int | None = None
    N_achieved: int | None = None
    extrema: dict = field(default_factory=dict)
    norms: dict = field(default_factory=dict)
    approx: ApproxReport | None = None

    def to_json(self) -> dict:
        return {
            "kind": "perturbation_bundle",
            "n": self.n, "d": self.d, "lambda": self.lam, "epsilon": self.eps, "delta": self.delta,
            "N_theoretical": self.N_theoretical, "N_achieved": self.N_achieved,
            "extrema": self.extrema, "norms": self.norms,
            "approx": self.approx.to_json() if self.approx else None,
            "potential": self.potential.to_json(), "derivative": self.derivative_poly.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PerturbationBundle":
        return cls(
            TrigPoly.from_json(doc["derivative"]), TrigPoly.from_json(doc["potential"]),
            float(doc["lambda"]), int(doc["d"]), doc.get("n"), doc.get("epsilon"), doc.get("delta"),
            doc.get("N_theoretical"), doc.get("N_achieved"), dict(doc.get("extrema") or {}),
            dict(doc.get("norms") or {}),
            ApproxReport.from_json(doc["approx"]) if doc.get("approx") else None,
        )


def potential_norms(potential: TrigPoly, eps: float) -> dict:
    """Sup norm, ``C^r`` and ``C^{r - eps}`` norms (max convention) with ``r = 1`` for d = 1, else 2."""
    top = 1 if potential.dim == 1 else 2
    cr = holder_norm(potential, top, convention="max")
    semi = 0.0
    for a in multi_indices(top - 1, potential.dim):
        values = potential.derivative(a).sample(cr.resolution).values
        semi = max(semi, holder_seminorm(values, 1.0 - eps)[0])
    return {
        "convention": "max",
        "C0": cr.sup_norms[0],
        f"C{top}": cr.value,
        "holder_order": top - eps,
        f"C{top}-eps": max(max(cr.sup_norms[:top]), semi),
        "holder_seminorm": semi,
        "sup_norms": list(cr.sup_norms),
    }


def assemble_perturbation(lam: float, poly: TrigPoly, d: int, *, eps: float = 0.1, n: int | None = None,
                          delta: float | None = None, fit: DerivativeFit | None = None) -> PerturbationBundle:
    """Potential from the derivative polynomial.

    d = 1: zero-mean antiderivative. d > 1: ``Phi`` with ``(1/d) Laplacian Phi = poly``.
    """
    if poly.dim != d:
        raise WrongDimension(f"polynomial has dim {poly.dim}, expected {d}")
    if abs(poly.mean) > MEAN_TOL:
        raise NonZeroMean(f"derivative polynomial mean {poly.mean:.3e}")
    potential = antiderivative_1d(poly) if d == 1 else inverse_laplacian(poly * d)
    ext = extrema(poly)
    return PerturbationBundle(
        derivative_poly=poly, potential=potential, lam=lam, d=d, n=n, eps=eps, delta=delta,
        N_theoretical=fit.n_theoretical if fit else None, N_achieved=fit.n_achieved if fit else None,
        extrema={"min": ext.min, "max": ext.max, "mean": poly.mean},
        norms=potential_norms(potential, eps),
        approx=fit.report if fit else None,
    )


def construct_bundle(lam: float, n: int, eps: float = 0.1, d: int = 1, resolution: int | None = None) -> PerturbationBundle:
    """Full pipeline with the depth ``delta_of_lambda(lam)``."""
    delta = delta_of_lambda(lam)
    spec = BumpSpec(n=n, d=d, delta=delta, eps=eps)
    fit = build_derivative_polynomial(spec, resolution)
    return assemble_perturbation(lam, fit.poly, d, eps=eps, n=n, delta=delta, fit=fit)
