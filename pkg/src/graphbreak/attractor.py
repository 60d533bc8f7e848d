"""Orbit clouds, a binned graph test and the graph transform.

The attracting set of a dissipative map is approximated by the tail of many
orbits. Each fibre bin over the torus is tested for vertical spread, after
removing the best linear fit within the bin so that the slope of a smooth
graph across the bin width is not mistaken for spread. Verdicts here are
empirical evidence only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCloud, MaxIterExceeded, OutOfRange, Overflow, WrongDimension
from .herman import GraphInverterDD, invert_monotone
from .maps import CandidateGraph, MapParams1D, MapParamsDD, step_1d, step_dd
from .trigpoly import TrigPoly

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
OVERFLOW_Y = 1e8
TABLE_MIN_DEGREE = 16

GRAPH_LIKE = "GraphLike"
NON_GRAPH = "NonGraph"
INCONCLUSIVE = "Inconclusive"
CONVERGED = "Converged"
FOLD = "FoldDetected"


@dataclass(frozen=True)
class MapSpec:
    """A map of either family together with its perturbation."""

    params: MapParams1D | MapParamsDD
    perturbation: TrigPoly | None = None
    label: str = "custom"

    @property
    def d(self) -> int:
        return 1 if isinstance(self.params, MapParams1D) else self.params.d

    @property
    def invariant_level(self) -> np.ndarray:
        """Height of the invariant graph of the unperturbed map."""
        if self.d == 1:
            return np.array([self.params.invariant_level])
        return np.zeros(self.d)

    def evaluator(self):
        """Fast stand-in for ``phi`` (1D): a Hermite table once the degree is large."""
        phi = self.perturbation
        if phi is None or self.d > 1 or phi.degree < TABLE_MIN_DEGREE:
            return phi
        return phi.tabulate()

    def stepper(self):
        phi = self.evaluator()
        if self.d == 1:
            return lambda z: step_1d(self.params, phi, z)
        return lambda z: step_dd(self.params, phi, z)

    def to_json(self) -> dict:
        phi = self.perturbation
        return {"label": self.label, "d": self.d, "params": self.params.to_json(),
                "perturbation_degree": None if phi is None else phi.degree}


def standard_map(lam: float, k: float, alpha: tuple[float, float] | None = None) -> MapSpec:
    """``phi(x) = k sin(2 pi x) / (2 pi)``, so that ``phi' = k cos(2 pi x)``.

    The default ``alpha1 = alpha2 = (1 - lam) * 0.618...`` puts the unperturbed
    circle at height 0.618... with golden-mean rotation, away from low-order
    resonances.
    """
    if alpha is None:
        alpha = ((1.0 - lam) * GOLDEN, (1.0 - lam) * GOLDEN)
    phi = TrigPoly.sine(1, k / (2 * np.pi)) if k else None
    return MapSpec(MapParams1D(lam, *alpha), phi, f"standard(k={k})")


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


def default_beta(lam: float, d: int) -> np.ndarray:
    """Drift whose unperturbed rotation vector ``lam * beta`` is non-resonant.

    The components are the fractional parts of square roots of distinct
    primes, which together with 1 are rationally independent. With
    ``beta = 0`` every point of the zero section is fixed and the perturbed
    invariant graph is generally not smooth.
    """
    if d > len(_PRIMES):
        raise OutOfRange(f"default drift is tabulated up to d={len(_PRIMES)}")
    omega = np.mod(np.sqrt(np.array(_PRIMES[:d], dtype=float)), 1.0)
    return omega / lam


# ---------------------------------------------------------------------- clouds
@dataclass(frozen=True)
class Cloud:
    """Recorded states, ``x`` reduced mod 1; ``points`` has shape ``(P, 2d)``."""

    points: np.ndarray
    d: int
    transient: int
    keep: int
    starts: int

    @property
    def x(self) -> np.ndarray:
        return self.points[:, :self.d]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, self.d:]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i + 1}" for i in range(self.d)] + [f"y{i + 1}" for i in range(self.d)])
            for row in self.points:
                w.writerow([format(float(v), ".17g") for v in row])


def default_starts(spec: MapSpec, per_axis: int = 64, seed: int = 0) -> np.ndarray:
    """1D: ``per_axis`` x ``per_axis`` grid over ``[0, 1) x [y* - 2, y* + 2]``.

    d > 1: a 16^d grid in ``x`` with seeded uniform ``y`` in ``[-2, 2]^d``.
    """
    if spec.d == 1:
        ystar = spec.invariant_level[0]
        xs, ys = np.meshgrid(np.arange(per_axis) / per_axis, np.linspace(ystar - 2, ystar + 2, per_axis),
                             indexing="ij")
        return np.stack([xs.ravel(), ys.ravel()], axis=1)
    axis = np.arange(16) / 16
    x = np.stack([g.ravel() for g in np.meshgrid(*([axis] * spec.d), indexing="ij")], axis=1)
    y = np.random.default_rng(seed).uniform(-2, 2, x.shape)
    return np.concatenate([x, y], axis=1)


def iterate_cloud(spec: MapSpec, init: np.ndarray | None = None, transient: int = 500, keep: int = 200,
                  seed: int = 0) -> Cloud:
    """Iterate every start ``transient`` times, then record ``keep`` further states."""
    if transient < 1 or keep < 1:
        raise OutOfRange("transient and keep must be >= 1")
    z = default_starts(spec, seed=seed) if init is None else np.array(init, dtype=float, copy=True)
    d = spec.d
    if z.ndim != 2 or z.shape[1] != 2 * d:
        raise WrongDimension(f"initial states must have shape (P, {2 * d})")
    step = spec.stepper()
    out = np.empty((keep,) + z.shape)
    for k in range(transient + keep):
        z = step(z)
        z[:, :d] = np.mod(z[:, :d], 1.0)
        if not np.all(np.abs(z[:, d:]) <= OVERFLOW_Y):
            raise Overflow(f"|y| exceeded {OVERFLOW_Y:g} at step {k + 1}")
        if k >= transient:
            out[k - transient] = z
    return Cloud(out.reshape(-1, 2 * d), d, transient, keep, len(z))


# ---------------------------------------------------------------------- graph test
@dataclass(frozen=True)
class AttractorReport:
    params: dict
    transient: int
    keep: int
    n_points: int
    bins: int
    extents: np.ndarray
    raw_extents: np.ndarray
    max_extent: float
    max_raw_extent: float
    empty_fraction: float
    tol_graph: float
    verdict: str
    fold_detected: bool
    evidence: str = "empirical"

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["extents"] = np.where(np.isnan(self.extents), None, self.extents).tolist()
        out["raw_extents"] = np.where(np.isnan(self.raw_extents), None, self.raw_extents).tolist()
        return out


def _bin_extents(x: np.ndarray, y: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-bin spread of ``y`` about the within-bin linear fit, raw spread and counts."""
    P, d = x.shape
    cell = np.minimum((x * bins).astype(np.int64), bins - 1)
    flat = np.ravel_multi_index(tuple(cell.T), (bins,) * d)
    nb = bins ** d
    u = x * bins - cell - 0.5
    counts = np.bincount(flat, minlength=nb)
    design = np.concatenate([np.ones((P, 1)), u], axis=1)
    q = d + 1
    normal = np.empty((nb, q, q))
    for i in range(q):
        for j in range(i, q):
            normal[:, i, j] = normal[:, j, i] = np.bincount(flat, design[:, i] * design[:, j], minlength=nb)
    pinv = np.linalg.pinv(normal, rcond=1e-10)
    order = np.argsort(flat, kind="stable")
    starts = np.searchsorted(flat[order], np.arange(nb))
    occupied = counts > 0
    extents = np.full(nb, np.nan)
    raw = np.full(nb, np.nan)
    for comp in range(y.shape[1]):
        yc = y[:, comp]
        rhs = np.stack([np.bincount(flat, design[:, i] * yc, minlength=nb) for i in range(q)], axis=1)
        coef = np.einsum("bij,bj->bi", pinv, rhs)
        fit = np.where(counts[flat] > q, (design * coef[flat]).sum(axis=1), 0.0)
        res = (yc - fit)[order]
        yo = yc[order]
        s = starts[occupied]
        e_res = np.maximum.reduceat(res, s) - np.minimum.reduceat(res, s)
        e_raw = np.maximum.reduceat(yo, s) - np.minimum.reduceat(yo, s)
        extents[occupied] = np.fmax(extents[occupied], e_res)
        raw[occupied] = np.fmax(raw[occupied], e_raw)
    return extents, raw, counts


def graph_test(cloud: Cloud, bins: int = 512, tol_graph: float = 1e-4, fold_detected: bool = False,
               params: dict | None = None) -> AttractorReport:
    """Classify a cloud as ``GraphLike``, ``NonGraph`` or ``Inconclusive``.

    ``GraphLike`` needs every occupied bin's detrended spread below
    ``tol_graph``, no fold and at most 5% empty bins. ``NonGraph`` needs a
    spread above ``10 * tol_graph`` or a fold.
    """
    if cloud.points.size == 0:
        raise EmptyCloud("cloud has no points")
    if bins < 16:
        raise OutOfRange("need at least 16 bins per axis")
    if tol_graph <= 0:
        raise OutOfRange("tol_graph must be positive")
    extents, raw, counts = _bin_extents(cloud.x, cloud.y, bins)
    max_ext = float(np.nanmax(extents))
    max_raw = float(np.nanmax(raw))
    empty = float((counts == 0).mean())
    if max_ext > 10 * tol_graph or fold_detected:
        verdict = NON_GRAPH
    elif max_ext < tol_graph and empty <= 0.05:
        verdict = GRAPH_LIKE
    else:
        verdict = INCONCLUSIVE
    return AttractorReport(params or {}, cloud.transient, cloud.keep, len(cloud.points), bins, extents, raw,
                           max_ext, max_raw, empty, tol_graph, verdict, bool(fold_detected))


# ---------------------------------------------------------------------- graph transform
@dataclass(frozen=True)
class GraphTransformResult:
    status: str
    graph: CandidateGraph
    iterations: int
    contraction: float | None
    changes: list = field(default_factory=list)
    min_dg: float | None = None

    @property
    def fold_detected(self) -> bool:
        return self.status == FOLD

    def to_json(self) -> dict:
        return {"status": self.status, "iterations": self.iterations, "contraction": self.contraction,
                "changes": self.changes, "min_dg": self.min_dg, "graph": self.graph.to_json()}


def _contraction(changes: list[float]) -> float | None:
    ratios = [b / a for a, b in zip(changes[:-1], changes[1:]) if a > 0 and b > 0]
    if not ratios:
        return None
    return float(np.median(ratios[-5:]))


def default_transform_resolution(spec: MapSpec) -> int:
    if spec.d > 1:
        return 16
    deg = 0 if spec.perturbation is None else spec.perturbation.degree
    return int(max(1024, 1 << int(np.ceil(np.log2(8 * deg + 1)))))


def graph_transform(spec: MapSpec, psi0: CandidateGraph | None = None, max_iter: int = 200, tol: float = 1e-12,
                    resolution: int | None = None) -> GraphTransformResult:
    """Iterate the pushforward of a graph until it is fixed or folds.

    ``psi0`` defaults to the unperturbed invariant graph.
    """
    if resolution is None:
        resolution = psi0.resolution if psi0 is not None else default_transform_resolution(spec)
    if psi0 is None:
        psi0 = CandidateGraph.constant(spec.invariant_level if spec.d > 1 else spec.invariant_level[0],
                                       resolution, spec.d)
    if psi0.d != spec.d:
        raise WrongDimension(f"graph has d={psi0.d}, map has d={spec.d}")
    if spec.d == 1:
        return _transform_1d(spec, psi0, max_iter, tol)
    return _transform_dd(spec, psi0, max_iter, tol)


def _transform_1d(spec: MapSpec, psi0: CandidateGraph, max_iter: int, tol: float) -> GraphTransformResult:
    p = spec.params
    R = psi0.resolution
    x = np.arange(R) / R
    phi = spec.perturbation
    if phi is None:
        phi_f = dphi_f = lambda s: np.zeros_like(s)
    elif phi.degree < TABLE_MIN_DEGREE:
        dphi = phi.derivative(1)
        phi_f, dphi_f = phi, dphi
    else:
        table = phi.tabulate()
        phi_f, dphi_f = table, table.derivative
    psi = psi0.values.copy()
    changes: list[float] = []
    min_dg = None
    for it in range(1, max_iter + 1):
        gk = x + p.alpha1 + p.lam * psi + phi_f(x)
        dg_grid = np.diff(np.append(gk, gk[0] + 1.0)) * R
        min_dg = float(dg_grid.min())
        if min_dg <= 0:
            return GraphTransformResult(FOLD, CandidateGraph(psi), it - 1, _contraction(changes), changes, min_dg)
        table = TrigPoly.from_grid(psi).tabulate()

        def g(s):
            return s + p.alpha1 + p.lam * table(s) + phi_f(s)

        def dg(s):
            return 1.0 + p.lam * table.derivative(s) + dphi_f(s)

        pre = invert_monotone(g, dg, x, x, gk)
        new = p.alpha2 + p.lam * table(pre) + phi_f(pre)
        change = float(np.abs(new - psi).max())
        changes.append(change)
        psi = new
        if change < tol:
            return GraphTransformResult(CONVERGED, CandidateGraph(psi), it, _contraction(changes), changes, min_dg)
    raise MaxIterExceeded(f"graph transform did not converge in {max_iter} iterations (last change {changes[-1]:.3e})")


def _fd_jacobian_det(gvals: np.ndarray, R: int, d: int) -> np.ndarray:
    """Determinant of the central-difference Jacobian of a lift ``g`` sampled on the grid."""
    J = np.empty(gvals.shape[:-1] + (d, d))
    for j in range(d):
        fwd = np.roll(gvals, -1, axis=j)
        bwd = np.roll(gvals, 1, axis=j)
        diff = fwd - bwd
        # undo the wrap of the identity part of the lift
        idx = [slice(None)] * d
        idx[j] = R - 1
        diff[tuple(idx) + (j,)] += 1.0
        idx[j] = 0
        diff[tuple(idx) + (j,)] += 1.0
        J[..., :, j] = diff * (R / 2.0)
    return np.linalg.det(J)


def _transform_dd(spec: MapSpec, psi0: CandidateGraph, max_iter: int, tol: float) -> GraphTransformResult:
    p = spec.params
    d = p.d
    R = psi0.resolution
    Phi = spec.perturbation
    psi = psi0.values.copy()
    shape = psi.shape
    changes: list[float] = []
    min_dg = None
    for it in range(1, max_iter + 1):
        G = GraphInverterDD(p, Phi, CandidateGraph(psi))
        x = G.x
        dphi = G.Phi.gradient(x)
        gvals = (x + p.lam * (p.beta + psi.reshape(-1, d) + dphi)).reshape(shape)
        min_dg = float(_fd_jacobian_det(gvals, R, d).min())
        if min_dg <= 0:
            return GraphTransformResult(FOLD, CandidateGraph(psi), it - 1, _contraction(changes), changes, min_dg)
        pre = G.inverse(x)
        new = (p.lam * (G.psi_at(pre) + G.Phi.gradient(pre))).reshape(shape)
        change = float(np.abs(new - psi).max())
        changes.append(change)
        psi = new
        if change < tol:
            return GraphTransformResult(CONVERGED, CandidateGraph(psi), it, _contraction(changes), changes, min_dg)
    raise MaxIterExceeded(f"graph transform did not converge in {max_iter} iterations (last change {changes[-1]:.3e})")
