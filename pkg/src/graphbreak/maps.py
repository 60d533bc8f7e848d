"""Conformally symplectic twist maps on the cylinder and on T^d x R^d.

1D family, for parameters ``(lam, alpha1, alpha2)`` and a periodic ``phi``::

    X = x + alpha1 + lam*y + phi(x),   Y = alpha2 + lam*y + phi(x)

d-dimensional family, for ``(lam, beta)`` and a periodic potential ``Phi``::

    X = x + lam*(beta + y + DPhi(x)),  Y = lam*(y + DPhi(x))

generated by ``S(x, X) = |X - x|^2 / 2 - lam <beta, X - x> + lam Phi(x)`` via
``lam*y = -dS/dx`` and ``Y = dS/dX``. With an SPD matrix ``A`` the quadratic
part becomes ``<X - x, A (X - x)> / 2`` and ``Phi`` is replaced by ``W`` with
``DW = A DPhi``, which exists as a periodic function exactly when every active
Fourier mode is an eigenvector of ``A``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import HypothesisFailed, ModeIncompatible, NotClosed, OutOfRange, ResolutionTooLow, WrongDimension
from .trigpoly import TrigPoly, default_resolution

FD_STEP = 1e-6
FD_STEP_RICHARDSON = 1e-4
CLOSED_TOL = 1e-6
MODE_TOL = 1e-12


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise OutOfRange(f"lambda={lam} outside (0, 1)")
    return lam


@dataclass(frozen=True)
class MapParams1D:
    lam: float
    alpha1: float = 0.0
    alpha2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_lambda(self.lam))

    @property
    def invariant_level(self) -> float:
        """Height ``alpha2 / (1 - lam)`` of the invariant circle of the unperturbed map."""
        return self.alpha2 / (1.0 - self.lam)

    def to_json(self) -> dict:
        return {"lambda": self.lam, "alpha1": self.alpha1, "alpha2": self.alpha2}

    @classmethod
    def from_config(cls, cfg: dict) -> "MapParams1D":
        return cls(float(cfg["lambda"]), float(cfg.get("alpha1", 0.0)), float(cfg.get("alpha2", 0.0)))


@dataclass(frozen=True)
class MapParamsDD:
    lam: float
    beta: np.ndarray
    A: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_lambda(self.lam))
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if beta.ndim != 1:
            raise WrongDimension("beta must be a vector")
        object.__setattr__(self, "beta", beta)
        if self.A is not None:
            A = np.asarray(self.A, dtype=float)
            if A.shape != (beta.size, beta.size):
                raise WrongDimension(f"A has shape {A.shape}, expected {(beta.size, beta.size)}")
            if not np.allclose(A, A.T, rtol=0, atol=1e-14 * np.abs(A).max()):
                raise OutOfRange("A must be symmetric")
            if np.linalg.eigvalsh(A).min() <= 0:
                raise OutOfRange("A must be positive definite")
            object.__setattr__(self, "A", A)

    @property
    def d(self) -> int:
        return self.beta.size

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(self.d) if self.A is None else self.A

    def to_json(self) -> dict:
        return {"lambda": self.lam, "beta": self.beta, "A": self.A}

    @classmethod
    def from_config(cls, cfg: dict) -> "MapParamsDD":
        beta = cfg.get("beta", [0.0] * int(cfg.get("dim", 2)))
        if isinstance(beta, str):
            beta = [float(v) for v in beta.split(",")]
        return cls(float(cfg["lambda"]), np.asarray(beta, dtype=float), cfg.get("A"))


# ---------------------------------------------------------------------- perturbation access
def _values(phi, x: np.ndarray) -> np.ndarray:
    if phi is None:
        return np.zeros_like(x)
    return np.asarray(phi(x), dtype=float).reshape(x.shape)


def _gradient(Phi, x: np.ndarray) -> np.ndarray:
    """``DPhi`` at points ``x`` of shape ``(P, d)``."""
    if Phi is None:
        return np.zeros_like(x)
    return Phi.gradient(x)


def mode_eigenvalues(A: np.ndarray, Phi: TrigPoly) -> np.ndarray:
    """``mu_k`` with ``A k = mu_k k`` for every stored mode (0 for ``k = 0``).

    Raises ``ModeIncompatible`` if some active mode is not an eigenvector.
    """
    k = Phi.modes.astype(float)
    Ak = k @ A.T
    kk = (k * k).sum(axis=1)
    safe = np.where(kk == 0, 1.0, kk)
    mu = np.where(kk == 0, 0.0, (Ak * k).sum(axis=1) / safe)
    off = np.linalg.norm(Ak - mu[:, None] * k, axis=1)
    bad = off > MODE_TOL * np.abs(A).max() * np.sqrt(kk)
    if bad.any():
        raise ModeIncompatible(f"mode {Phi.modes[np.argmax(bad)].tolist()} is not an eigenvector of A")
    return mu


def lifted_potential(p: MapParamsDD, Phi: TrigPoly | None) -> TrigPoly | None:
    """``W`` with ``DW = A DPhi`` (``Phi`` itself when ``A`` is absent)."""
    if Phi is None or p.A is None:
        return Phi
    return Phi.scale_modes(mode_eigenvalues(p.A, Phi))


# ---------------------------------------------------------------------- steps
def step_1d(p: MapParams1D, phi, state, direction: str = "forward") -> np.ndarray:
    """One step of the 1D map on states ``(..., 2)``; ``phi`` may be a TrigPoly, any callable or None."""
    s = np.asarray(state, dtype=float)
    x, y = s[..., 0], s[..., 1]
    if direction == "forward":
        f = _values(phi, x)
        Y = p.alpha2 + p.lam * y + f
        return np.stack([x + p.alpha1 + p.lam * y + f, Y], axis=-1)
    if direction == "inverse":
        xp = x - y + p.alpha2 - p.alpha1
        yp = (y - p.alpha2 - _values(phi, xp)) / p.lam
        return np.stack([xp, yp], axis=-1)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def step_dd(p: MapParamsDD, Phi, state, direction: str = "forward") -> np.ndarray:
    """One step of the d-dimensional map on states ``(..., 2d)``."""
    d = p.d
    s = np.asarray(state, dtype=float)
    if s.shape[-1] != 2 * d:
        raise WrongDimension(f"state has {s.shape[-1]} components, expected {2 * d}")
    if Phi is not None and getattr(Phi, "dim", d) != d:
        raise WrongDimension(f"potential has dim {Phi.dim}, map has d={d}")
    flat = s.reshape(-1, 2 * d)
    x, y = flat[:, :d], flat[:, d:]
    lam = p.lam
    if p.A is not None and Phi is not None:
        mode_eigenvalues(p.A, Phi)
    if direction == "forward":
        g = _gradient(Phi, x)
        if p.A is None:
            X = x + lam * (p.beta + y + g)
            Y = lam * (y + g)
        else:
            X = x + lam * (p.beta + g + np.linalg.solve(p.A, y.T).T)
            Y = lam * (y + g @ p.A.T)
    elif direction == "inverse":
        if p.A is None:
            xp = x - lam * p.beta - y
            yp = y / lam - _gradient(Phi, xp)
        else:
            xp = x - lam * p.beta - np.linalg.solve(p.A, y.T).T
            yp = y / lam - _gradient(Phi, xp) @ p.A.T
        X, Y = xp, yp
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return np.concatenate([X, Y], axis=1).reshape(s.shape)


def orbit(step: Callable[[np.ndarray], np.ndarray], state, steps: int) -> np.ndarray:
    """States ``z_0, ..., z_steps`` of one orbit, shape ``(steps + 1, 2d)``."""
    z = np.asarray(state, dtype=float)
    out = np.empty((steps + 1,) + z.shape)
    out[0] = z
    for k in range(steps):
        z = step(z)
        out[k + 1] = z
    return out


def write_orbit_csv(path: str | Path, states: np.ndarray) -> None:
    """Rows ``k, x_1..x_d, y_1..y_d``."""
    states = np.asarray(states)
    d = states.shape[1] // 2
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)])
        for k, row in enumerate(states):
            w.writerow([k] + [format(float(v), ".17g") for v in row])


# ---------------------------------------------------------------------- finite-difference checks
def _central(step, z: np.ndarray, h: float) -> np.ndarray:
    n = z.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (step(z + e) - step(z - e)) / (2 * h)
    return J


def jacobian_fd(step: Callable[[np.ndarray], np.ndarray], state, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of ``step`` at one state.

    When the estimates at ``h`` and ``2h`` disagree by more than ``1e-6``
    (relative) the result is replaced by a Richardson extrapolation built on
    the larger step ``1e-4``.
    """
    z = np.asarray(state, dtype=float).ravel()
    J = _central(step, z, h)
    J2 = _central(step, z, 2 * h)
    if np.abs(J - J2).max() > 1e-6 * max(1.0, np.abs(J).max()):
        H = FD_STEP_RICHARDSON
        J = (4 * _central(step, z, H / 2) - _central(step, z, H)) / 3
    return J


@dataclass(frozen=True)
class PullbackReport:
    expected_det: float
    max_det_rel_error: float
    max_form_error: float
    samples: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def pullback_check(step: Callable[[np.ndarray], np.ndarray], lam: float, d: int, samples: int = 50,
                   seed: int = 0) -> PullbackReport:
    """Check ``J^T Omega J = lam Omega`` and ``det J = lam^d`` at random states."""
    rng = np.random.default_rng(seed)
    omega = np.block([[np.zeros((d, d)), np.eye(d)], [-np.eye(d), np.zeros((d, d))]])
    det_err = form_err = 0.0
    for _ in range(samples):
        z = np.concatenate([rng.random(d), rng.uniform(-1, 1, d)])
        J = jacobian_fd(step, z)
        det_err = max(det_err, abs(np.linalg.det(J) - lam ** d) / lam ** d)
        form_err = max(form_err, float(np.abs(J.T @ omega @ J - lam * omega).max()))
    return PullbackReport(lam ** d, det_err, form_err, samples)


# ---------------------------------------------------------------------- generating function
def generating_gradients(p: MapParamsDD, Phi: TrigPoly | None, x: np.ndarray, X: np.ndarray):
    """``(dS/dx, dS/dX)`` at pairs of points ``(P, d)``."""
    A = p.matrix
    W = lifted_potential(p, Phi)
    dW = _gradient(W, x)
    dX = (X - x) @ A.T
    b = A @ p.beta
    return -dX + p.lam * b + p.lam * dW, dX - p.lam * b


def generating_function_value(p: MapParamsDD, Phi: TrigPoly | None, x: np.ndarray, X: np.ndarray) -> np.ndarray:
    A = p.matrix
    x = np.atleast_2d(x)
    X = np.atleast_2d(X)
    dx = X - x
    W = lifted_potential(p, Phi)
    w = np.zeros(len(x)) if W is None else np.atleast_1d(W(x))
    return 0.5 * np.einsum("pi,ij,pj->p", dx, A, dx) - p.lam * dx @ (A @ p.beta) + p.lam * w


def generating_function_check(p: MapParamsDD, Phi: TrigPoly | None = None, samples: int = 100,
                              seed: int = 0) -> float:
    """Largest of ``|lam*y + dS/dx|`` and ``|Y - dS/dX|`` over random states."""
    rng = np.random.default_rng(seed)
    d = p.d
    z = np.concatenate([rng.random((samples, d)), rng.uniform(-1, 1, (samples, d))], axis=1)
    Z = step_dd(p, Phi, z)
    x, y, X, Y = z[:, :d], z[:, d:], Z[:, :d], Z[:, d:]
    gx, gX = generating_gradients(p, Phi, x, X)
    return float(max(np.abs(p.lam * y + gx).max(), np.abs(Y - gX).max()))


# ---------------------------------------------------------------------- hypotheses and a-priori bound
def _hessian_grid(Phi: TrigPoly, resolution: int) -> np.ndarray:
    """``D^2 Phi`` on the grid, shape ``(R^d, d, d)``, by FFT sampling."""
    d = Phi.dim
    out = np.empty((resolution ** d, d, d))
    for i in range(d):
        for j in range(i, d):
            o = [0] * d
            o[i] += 1
            o[j] += 1
            vals = Phi.derivative(tuple(o)).sample(resolution).values.ravel()
            out[:, i, j] = out[:, j, i] = vals
    return out


def _grid_resolution(Phi: TrigPoly | None, resolution: int | None) -> int:
    if Phi is None:
        return resolution or 1
    if resolution is None:
        return default_resolution(Phi) if Phi.dim <= 2 else max(2 * Phi.degree + 1, 16)
    if resolution < 2 * Phi.degree + 1:
        raise ResolutionTooLow(f"resolution {resolution} < 2*degree+1 = {2 * Phi.degree + 1}")
    return resolution


@dataclass(frozen=True)
class HypothesisReport:
    """Convexity hypotheses on the generating function, checked on a grid.

    ``margin`` is the smallest eigenvalue of ``d^2 S / dx^2`` over the grid.
    """

    margin: float
    argmin: list
    h1_pass: bool
    dXX_min_eig: float
    dxX_max_eig: float
    h2_superlinear: bool
    resolution: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def hypothesis_check(p: MapParamsDD, Phi: TrigPoly | None, resolution: int | None = None) -> HypothesisReport:
    A = p.matrix
    R = _grid_resolution(Phi, resolution)
    W = lifted_potential(p, Phi)
    if W is None:
        sxx = A[None]
    else:
        sxx = A[None] + p.lam * _hessian_grid(W, R)
    eig = np.linalg.eigvalsh(sxx)[:, 0]
    i = int(np.argmin(eig))
    pos = np.array(np.unravel_index(i, (R,) * p.d)) / R if W is not None else np.zeros(p.d)
    a_eig = np.linalg.eigvalsh(A)
    return HypothesisReport(float(eig[i]), pos.tolist(), bool(eig[i] > 0), float(a_eig.min()),
                            float(-a_eig.min()), True, int(R))


def lipschitz_bound(p: MapParamsDD, Phi: TrigPoly | None, resolution: int | None = None) -> float:
    """``sup max{ ||I + lam D^2 Phi||_inf / lam, 1 }`` over the grid (row-sum norm)."""
    if p.A is not None:
        raise ModeIncompatible("the Lipschitz bound is implemented for A = identity only")
    hyp = hypothesis_check(p, Phi, resolution)
    if not hyp.h1_pass:
        raise HypothesisFailed(f"I + lam D^2 Phi not positive definite (min eigenvalue {hyp.margin:.3e})")
    d = p.d
    if Phi is None:
        return max(1.0 / p.lam, 1.0)
    M = np.eye(d)[None] + p.lam * _hessian_grid(Phi, hyp.resolution)
    row = np.abs(M).sum(axis=2).max(axis=1)
    return float(max((row / p.lam).max(), 1.0))


# ---------------------------------------------------------------------- candidate graphs
@dataclass(frozen=True)
class CandidateGraph:
    """Graph ``x -> psi(x)`` sampled on the uniform grid of the torus.

    ``values`` has shape ``(R,)`` for d = 1 and ``(R, ..., R, d)`` otherwise.
    A Lagrangian witness ``Psi = c + D eta`` may be attached through ``eta``
    (samples of ``eta``) and ``c``; it is checked on construction.
    """

    values: np.ndarray
    eta: np.ndarray | None = None
    c: np.ndarray | None = None
    d: int = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            d = 1
        else:
            d = v.shape[-1]
            if v.ndim != d + 1 or len(set(v.shape[:-1])) != 1:
                raise WrongDimension(f"graph samples of shape {v.shape} are not (R,)*d + (d,)")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "d", d)
        if self.eta is not None:
            eta = np.asarray(self.eta, dtype=float)
            object.__setattr__(self, "eta", eta)
            object.__setattr__(self, "c", np.zeros(d) if self.c is None else np.atleast_1d(np.asarray(self.c, float)))
            if self.witness_residual() > CLOSED_TOL:
                raise NotClosed(f"samples differ from c + D eta by {self.witness_residual():.3e}")
            if d > 1 and self.curl() > CLOSED_TOL:
                raise NotClosed(f"curl {self.curl():.3e} exceeds {CLOSED_TOL}")

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    @property
    def components(self) -> list[np.ndarray]:
        return [self.values] if self.d == 1 else [self.values[..., j] for j in range(self.d)]

    @classmethod
    def constant(cls, value, resolution: int, d: int = 1) -> "CandidateGraph":
        if d == 1:
            return cls(np.full(resolution, float(value)))
        val = np.broadcast_to(np.asarray(value, dtype=float), (d,))
        return cls(np.broadcast_to(val, (resolution,) * d + (d,)).copy())

    @classmethod
    def from_function(cls, func, resolution: int, d: int = 1) -> "CandidateGraph":
        """``func`` maps points ``(P, d)`` (or ``(P,)`` for d = 1) to values."""
        axis = np.arange(resolution) / resolution
        if d == 1:
            return cls(np.asarray(func(axis), dtype=float))
        pts = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)
        return cls(np.asarray(func(pts), dtype=float).reshape((resolution,) * d + (d,)))

    @classmethod
    def from_witness(cls, c, eta: TrigPoly, resolution: int) -> "CandidateGraph":
        """``Psi = c + D eta`` sampled exactly from a trigonometric potential."""
        d = eta.dim
        c = np.atleast_1d(np.asarray(c, dtype=float))
        grads = [eta.derivative(tuple(int(i == j) for i in range(d))).sample(resolution).values for j in range(d)]
        vals = grads[0] + c[0] if d == 1 else np.stack([g + c[j] for j, g in enumerate(grads)], axis=-1)
        return cls(vals, eta.sample(resolution).values, c)

    def interpolants(self) -> list[TrigPoly]:
        """Trigonometric interpolants of the components (Nyquist mode dropped)."""
        return [TrigPoly.from_grid(comp) for comp in self.components]

    def curl(self) -> float:
        """Largest spectral ``|d_i Psi_j - d_j Psi_i|`` on the grid."""
        if self.d == 1:
            return 0.0
        polys = self.interpolants()
        R = self.resolution
        worst = 0.0
        for i in range(self.d):
            for j in range(i + 1, self.d):
                ei = tuple(int(a == i) for a in range(self.d))
                ej = tuple(int(a == j) for a in range(self.d))
                diff = polys[j].derivative(ei) - polys[i].derivative(ej)
                worst = max(worst, float(np.abs(diff.sample(R).values).max()))
        return worst

    def witness_residual(self) -> float:
        if self.eta is None:
            return 0.0
        eta = TrigPoly.from_grid(self.eta)
        R = self.resolution
        worst = 0.0
        for j, comp in enumerate(self.components):
            grad = eta.derivative(tuple(int(i == j) for i in range(self.d))).sample(R).values
            worst = max(worst, float(np.abs(comp - self.c[j] - grad).max()))
        return worst

    def to_json(self) -> dict:
        return {"kind": "candidate_graph", "d": self.d, "resolution": self.resolution,
                "values": self.values, "eta": self.eta, "c": self.c}

    @classmethod
    def from_json(cls, doc: dict) -> "CandidateGraph":
        eta = doc.get("eta")
        return cls(np.asarray(doc["values"], dtype=float), None if eta is None else np.asarray(eta, float),
                   doc.get("c"))

