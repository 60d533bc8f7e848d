"""Invariance residuals, derivative extrema and the destruction criterion.

For an invariant graph of the 1D map, ``g(x) = x + alpha1 + lam*psi(x) + phi(x)``
satisfies::

    g/(1+lam) + lam/(1+lam) * g^{-1} = x + ((1-lam)*alpha1 + lam*alpha2 + phi) / (1+lam)

and in d dimensions, with ``g(x) = x + lam*(beta + Psi(x) + DPhi(x))``::

    g/(1+lam) + lam/(1+lam) * g^{-1} = x + lam/(1+lam) * ((1-lam)*beta + DPhi)

Differentiating and bounding ``Dg`` or ``D(g^{-1})`` by its supremum gives two
quadratic inequalities. A perturbation whose derivative (1D) or normalized
Laplacian (d-dim) has minimum ``m`` and maximum ``M`` violating both cannot
admit any invariant Lagrangian graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .errors import NonInvertibleG, NonMonotoneG, NumericalError, OutOfRange, WrongDimension
from .maps import CandidateGraph, MapParams1D, MapParamsDD
from .trigpoly import TrigPoly, extrema, laplacian

INVERT_TOL = 1e-12
VERDICT_MARGIN = 1e-12

CERTIFIED = "DestructionCertified"
NO_CONCLUSION = "NoConclusion"


# ---------------------------------------------------------------------- inversion of g
def invert_monotone(g, dg, targets: np.ndarray, knots: np.ndarray, g_knots: np.ndarray,
                    tol: float = INVERT_TOL, max_iter: int = 100) -> np.ndarray:
    """Solve ``g(s) = t`` for an increasing lift ``g`` (``g(s + 1) = g(s) + 1``).

    ``g_knots`` are the values at the sorted ``knots`` in ``[0, 1)``. The root
    is bracketed between consecutive knots, then refined by Newton steps that
    fall back to bisection whenever they leave the bracket.
    """
    xs = np.concatenate([knots - 1, knots, knots + 1, [knots[0] + 2]])
    gs = np.concatenate([g_knots - 1, g_knots, g_knots + 1, [g_knots[0] + 2]])
    t = np.asarray(targets, dtype=float)
    shift = np.floor(t - g_knots[0])
    t0 = t - shift
    idx = np.clip(np.searchsorted(gs, t0, side="right") - 1, 0, len(xs) - 2)
    lo, hi = xs[idx].copy(), xs[idx + 1].copy()
    glo, ghi = gs[idx], gs[idx + 1]
    s = lo + (t0 - glo) * (hi - lo) / np.where(ghi > glo, ghi - glo, 1.0)
    for _ in range(max_iter):
        f = g(s) - t0
        lo = np.where(f < 0, s, lo)
        hi = np.where(f >= 0, s, hi)
        if np.abs(f).max() <= tol * 1e-2 or (hi - lo).max() <= tol:
            break
        slope = dg(s)
        newton = s - f / np.where(slope > 0, slope, 1.0)
        ok = (slope > 0) & (newton > lo) & (newton < hi)
        s = np.where(ok, newton, 0.5 * (lo + hi))
    return s + shift


class GraphInverter1D:
    """Exact evaluation of ``psi``, ``phi`` and ``g`` for one candidate graph."""

    def __init__(self, p: MapParams1D, phi: TrigPoly | None, graph: CandidateGraph):
        if graph.d != 1:
            raise WrongDimension("expected a 1D graph")
        self.p = p
        self.psi = graph.interpolants()[0]
        self.phi = TrigPoly.zero(1) if phi is None else phi
        self.dpsi = self.psi.derivative(1)
        self.dphi = self.phi.derivative(1)
        self.x = np.arange(graph.resolution) / graph.resolution

    def g(self, x):
        return x + self.p.alpha1 + self.p.lam * self.psi(x) + self.phi(x)

    def dg(self, x):
        return 1.0 + self.p.lam * self.dpsi(x) + self.dphi(x)

    def inverse(self, targets):
        gk = self.g(self.x)
        if np.any(np.diff(np.append(gk, gk[0] + 1.0)) <= 0):
            raise NonMonotoneG("g is not increasing on the grid")
        return invert_monotone(self.g, self.dg, targets, self.x, gk)


class HermanResiduals(NamedTuple):
    formula: float
    invariance: float

    def to_json(self) -> dict:
        return {"formula": self.formula, "invariance": self.invariance}


def herman_residual_1d(p: MapParams1D, phi: TrigPoly | None, graph: CandidateGraph) -> HermanResiduals:
    """Sup-norm residuals of the averaged identity and of ``psi o g = alpha2 + lam psi + phi``."""
    G = GraphInverter1D(p, phi, graph)
    x = G.x
    lam = p.lam
    ginv = G.inverse(x)
    lhs = G.g(x) / (1 + lam) + lam / (1 + lam) * ginv
    rhs = x + ((1 - lam) * p.alpha1 + lam * p.alpha2 + G.phi(x)) / (1 + lam)
    inv = G.psi(G.g(x)) - p.alpha2 - lam * G.psi(x) - G.phi(x)
    return HermanResiduals(float(np.abs(lhs - rhs).max()), float(np.abs(inv).max()))


def derivative_identity_residual(p: MapParams1D, phi: TrigPoly | None, graph: CandidateGraph,
                                 h: float = 1e-6) -> float:
    """Residual of ``Dg(x)/(1+lam) + lam/((1+lam) Dg(g^{-1}(x))) = 1 + Dphi(x)/(1+lam)``.

    ``Dg`` is taken by central differences of the exact ``g``.
    """
    G = GraphInverter1D(p, phi, graph)
    x = G.x
    lam = p.lam

    def dg_fd(s):
        return (G.g(s + h) - G.g(s - h)) / (2 * h)

    ginv = G.inverse(x)
    lhs = dg_fd(x) / (1 + lam) + lam / (1 + lam) / dg_fd(ginv)
    rhs = 1.0 + G.dphi(x) / (1 + lam)
    return float(np.abs(lhs - rhs).max())


class GraphInverterDD:
    def __init__(self, p: MapParamsDD, Phi: TrigPoly | None, graph: CandidateGraph):
        if p.A is not None:
            raise WrongDimension("residuals are implemented for A = identity")
        if graph.d != p.d:
            raise WrongDimension(f"graph has d={graph.d}, map has d={p.d}")
        self.p = p
        self.Phi = TrigPoly.zero(p.d) if Phi is None else Phi
        self.psi = graph.interpolants()
        R = graph.resolution
        axis = np.arange(R) / R
        self.x = np.stack([a.ravel() for a in np.meshgrid(*([axis] * p.d), indexing="ij")], axis=1)

    def psi_at(self, x):
        return np.stack([c(x) for c in self.psi], axis=-1)

    def g(self, x):
        return x + self.p.lam * (self.p.beta + self.psi_at(x) + self.Phi.gradient(x))

    def dg(self, x):
        jac = np.stack([c.gradient(x) for c in self.psi], axis=1) + self.Phi.hessian(x)
        return np.eye(self.p.d)[None] + self.p.lam * jac

    def inverse(self, targets, tol: float = INVERT_TOL, max_iter: int = 60):
        """Damped Newton from the unperturbed inverse, with continuation as fallback."""
        t = np.asarray(targets, dtype=float)
        s = t - self.p.lam * self.p.beta
        s, ok = self._newton(t, s, 1.0, tol, max_iter)
        if not ok.all():
            bad = ~ok
            sb = t[bad] - self.p.lam * self.p.beta
            for theta in np.linspace(0.1, 1.0, 10):
                sb, okb = self._newton(t[bad], sb, theta, tol, max_iter)
            if not okb.all():
                raise NonInvertibleG(f"Newton inversion of g failed at {int((~okb).sum())} points")
            s[bad] = sb
        det = np.linalg.det(self.dg(s))
        if det.min() <= 0:
            raise NonInvertibleG("Jacobian of g is not positive on the grid")
        return s

    def _newton(self, t, s, theta, tol, max_iter):
        lam, beta = self.p.lam, self.p.beta

        def F(z):
            return z + lam * beta + theta * (self.g(z) - z - lam * beta) - t

        f = F(s)
        for _ in range(max_iter):
            err = np.abs(f).max(axis=1)
            if err.max() <= tol:
                break
            J = np.eye(self.p.d)[None] + theta * (self.dg(s) - np.eye(self.p.d)[None])
            step = np.linalg.solve(J, f[..., None])[..., 0]
            damp = np.ones(len(s))
            new = s - step
            fn = F(new)
            for _ in range(30):
                worse = np.abs(fn).max(axis=1) > err
                if not worse.any():
                    break
                damp = np.where(worse, damp * 0.5, damp)
                new = s - damp[:, None] * step
                fn = F(new)
            s, f = new, fn
        return s, np.abs(f).max(axis=1) <= tol


def herman_residual_dd(p: MapParamsDD, Phi: TrigPoly | None, graph: CandidateGraph) -> HermanResiduals:
    """d-dimensional analogue of :func:`herman_residual_1d` (Euclidean norm at each grid point)."""
    G = GraphInverterDD(p, Phi, graph)
    x = G.x
    lam = p.lam
    gx = G.g(x)
    ginv = G.inverse(x)
    dphi = G.Phi.gradient(x)
    lhs = gx / (1 + lam) + lam / (1 + lam) * ginv
    rhs = x + lam / (1 + lam) * ((1 - lam) * p.beta + dphi)
    inv = G.psi_at(gx) - lam * (G.psi_at(x) + dphi)
    return HermanResiduals(float(np.linalg.norm(lhs - rhs, axis=1).max()), float(np.linalg.norm(inv, axis=1).max()))


# ---------------------------------------------------------------------- extrema
class DerivativeExtrema(NamedTuple):
    m: float
    M: float
    argmin: np.ndarray
    argmax: np.ndarray


def normalized_laplacian(Phi: TrigPoly) -> TrigPoly:
    """``T = trace(D^2 Phi) / d``."""
    return laplacian(Phi) / Phi.dim


def derivative_extrema(perturbation: TrigPoly, resolution: int | None = None) -> DerivativeExtrema:
    """``(min, max)`` of ``phi'`` (d = 1) or of ``T`` (d > 1), clamped to ``m <= 0 <= M``."""
    q = perturbation.derivative(1) if perturbation.dim == 1 else normalized_laplacian(perturbation)
    ext = extrema(q, resolution)
    return DerivativeExtrema(min(ext.min, 0.0), max(ext.max, 0.0), ext.argmin, ext.argmax)


# ---------------------------------------------------------------------- criterion
def quadratic_root(lam: float, M: float) -> float:
    """Larger root of ``G^2 - (1 + lam + M) G + lam = 0``: the Case-1 bound on ``sup Dg``."""
    b = 1.0 + lam + M
    return 0.5 * (b + math.sqrt(b * b - 4.0 * lam))


@dataclass(frozen=True)
class CriterionReport:
    lam: float
    m: float
    M: float
    c_lambda: float
    lhs: float | None
    case1_rhs: float
    case2_rhs: float
    guard: bool
    verdict: str
    mode: str
    margin: float = VERDICT_MARGIN
    exact_threshold: float | None = None
    asymptotic_threshold: float | None = None
    other_verdicts: dict = field(default_factory=dict)
    disagreement: bool = False
    sign_convention: str = "m = min, M = max"

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["lambda"] = out.pop("lam")
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "CriterionReport":
        doc = dict(doc)
        doc["lam"] = doc.pop("lambda")
        return cls(**doc)


def _check_inputs(lam: float, m: float, M: float) -> None:
    if not 0.0 < lam <= 1.0:
        raise OutOfRange(f"lambda={lam} outside (0, 1]")
    if m > 0 or M < 0:
        raise OutOfRange(f"need m <= 0 <= M, got m={m}, M={M}")


def _exact(lam: float, m: float, M: float, c: float, M_eff: float, margin: float):
    denom = 1.0 + c * m
    case1 = quadratic_root(lam, M_eff)
    case2 = case1 / lam
    guard = denom <= 0
    lhs = None if guard else 1.0 / denom
    certified = guard or (lhs > case1 + margin and lhs > case2 + margin)
    # -m at which lhs meets the larger bound
    threshold = (1.0 - 1.0 / max(case1, case2)) / c
    return lhs, case1, case2, guard, certified, threshold


def destruction_verdict_1d(lam: float, m: float, M: float, margin: float = VERDICT_MARGIN) -> CriterionReport:
    """Exact two-case criterion for the 1D family (``c_lambda = 1/(1+lam)``)."""
    _check_inputs(lam, m, M)
    c = 1.0 / (1.0 + lam)
    lhs, case1, case2, guard, cert, thr = _exact(lam, m, M, c, M, margin)
    return CriterionReport(lam, m, M, c, lhs, case1, case2, guard, CERTIFIED if cert else NO_CONCLUSION,
                           "Exact1D", margin, exact_threshold=thr)


def asymptotic_threshold_dd(lam: float, M: float) -> float:
    """``1 - lam^2 + lam (1+lam) M / (1-lam)``: the small-M bound on ``-m`` stated for d > 1."""
    if lam >= 1.0:
        return math.inf
    return 1.0 - lam * lam + lam * (1.0 + lam) / (1.0 - lam) * M


def destruction_verdict_dd(lam: float, m: float, M: float, mode: str = "ExactDD",
                           margin: float = VERDICT_MARGIN) -> CriterionReport:
    """d-dimensional criterion with ``m = min T``, ``M = max T``.

    ``ExactDD`` uses the exact inequalities with ``c_lambda = lam/(1+lam)``
    and ``M`` replaced by ``lam*M``. ``PaperAsymptoticDD`` certifies when
    ``-m`` exceeds :func:`asymptotic_threshold_dd`. Both verdicts are
    always reported and ``disagreement`` flags when they differ.
    """
    if mode not in ("ExactDD", "PaperAsymptoticDD"):
        raise OutOfRange(f"unknown mode {mode!r}")
    _check_inputs(lam, m, M)
    c = lam / (1.0 + lam)
    lhs, case1, case2, guard, cert, thr = _exact(lam, m, M, c, lam * M, margin)
    asym_thr = asymptotic_threshold_dd(lam, M)
    asym_cert = -m > asym_thr + margin
    verdicts = {"ExactDD": CERTIFIED if cert else NO_CONCLUSION,
                "PaperAsymptoticDD": CERTIFIED if asym_cert else NO_CONCLUSION}
    return CriterionReport(lam, m, M, c, lhs, case1, case2, guard, verdicts[mode], mode, margin,
                           exact_threshold=thr, asymptotic_threshold=asym_thr, other_verdicts=verdicts,
                           disagreement=cert != asym_cert, sign_convention="m = min T, M = max T")


def case2_boundary(lam: float, M: float, d: int = 1) -> float:
    """Smallest ``-m`` certified by the exact criterion for a given ``M``."""
    if d == 1:
        return (1.0 + lam) * (1.0 - 1.0 / (quadratic_root(lam, M) / lam))
    return (1.0 + lam) / lam * (1.0 - 1.0 / (quadratic_root(lam, lam * M) / lam))


# ---------------------------------------------------------------------- standard map threshold
@dataclass(frozen=True)
class ThresholdReport:
    lam: float
    k0: float
    closed_form: float
    lhs: float
    rhs: float

    def to_json(self) -> dict:
        return {"lambda": self.lam, "k0": self.k0, "closed_form": self.closed_form, "lhs": self.lhs,
                "rhs": self.rhs}


def threshold_closed_form(lam: float) -> float:
    return 2.0 * (1.0 + lam) / (2.0 + lam)


def standard_map_threshold(lam: float, xtol: float = 1e-10) -> ThresholdReport:
    """Critical ``k`` for ``phi = k sin(2 pi x) / (2 pi)``: root of ``lhs(-k) = case2(k)``."""
    if not 0.0 < lam <= 1.0:
        raise OutOfRange(f"lambda={lam} outside (0, 1]")

    def lhs(k):
        return 1.0 / (1.0 - k / (1.0 + lam))

    def gap(k):
        return lhs(k) - quadratic_root(lam, k) / lam

    k = optimize.bisect(gap, 1e-9, (1.0 + lam) * (1.0 - 1e-9), xtol=xtol, rtol=4 * np.finfo(float).eps)
    closed = threshold_closed_form(lam)
    if abs(k - closed) > 1e-8:
        raise NumericalError(f"bisection root {k!r} disagrees with closed form {closed!r}")
    return ThresholdReport(lam, float(k), closed, lhs(k), quadratic_root(lam, k) / lam)
