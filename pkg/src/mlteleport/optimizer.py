"""
Parameter search over the 27-real protocol vector.

The primary optimizer is a perturb-and-accept hill climber: Gaussian
proposals with a multiplicatively decaying scale, acceptance on strict
improvement, and a fixed small probability of accepting a worse proposal.
A central-difference gradient ascent is included as a baseline. Every
proposal is mapped back onto the feasible set (normalized pair state,
trace-preserving post-processing) by :func:`project_feasible`.

Randomness comes from ``numpy.random.Generator`` with the PCG64 bit
generator, seeded from :attr:`OptimizerConfig.seed`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .protocol import BELL_CHANNEL, IDENTITY_POST, ProtocolParams, Variant

PARAM_NAMES: tuple[str, ...] = (
    ("phi", "theta", "lambda")
    + tuple(f"{c}_{part}" for c in "abcd" for part in ("Re", "Im"))
    + tuple(
        f"J{j}_{r}{c}_{part}" for j in (0, 1) for r in (0, 1) for c in (0, 1) for part in ("Re", "Im")
    )
)
N_PARAMS = len(PARAM_NAMES)
ANGLES = slice(0, 3)
CHANNEL = slice(3, 11)
POST = slice(11, 27)

Objective = Callable[[ProtocolParams], float]


class ProjectionError(ValueError):
    """The raw vector has no well-defined feasible projection."""


class SearchError(RuntimeError):
    """The optimizer could not produce a feasible proposal."""


def variant_mask(variant: Variant | str) -> np.ndarray:
    """Coordinates a protocol variant is allowed to change."""
    variant = Variant.parse(variant)
    mask = np.zeros(N_PARAMS, dtype=bool)
    if variant is Variant.ROTATED:
        mask[ANGLES] = True
    elif variant is Variant.FULL:
        mask[:] = True
    return mask


def flatten(params: ProtocolParams) -> np.ndarray:
    """ProtocolParams -> 27 reals in table order."""
    out = np.empty(N_PARAMS)
    out[ANGLES] = params.meas
    out[CHANNEL] = params.channel.view(float)
    out[POST] = params.post.reshape(-1).view(float)
    return out


def project_feasible(raw, variant: Variant | str = Variant.FULL) -> ProtocolParams:
    """
    Map a raw 27-vector onto valid protocol parameters.

    The pair amplitudes are divided by their Euclidean norm and the Kraus
    pair is right-multiplied by ``S^{-1/2}``, ``S = J0^dagger J0 + J1^dagger J1``,
    which makes it exactly trace preserving. Angles pass through unchanged.
    Variants other than FULL keep the Bell channel and identity
    post-processing verbatim, and BELL also zeroes the angles.

    Raises
    ------
    ProjectionError
        If the amplitude vector is (nearly) zero or ``S`` is (nearly) singular.
    """
    variant = Variant.parse(variant)
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (N_PARAMS,):
        raise ValueError(f"expected {N_PARAMS} parameters, got shape {raw.shape}")
    if variant is Variant.BELL:
        return ProtocolParams.baseline(Variant.BELL)
    meas = raw[ANGLES].copy()
    if variant is Variant.ROTATED:
        return ProtocolParams(BELL_CHANNEL.copy(), meas, IDENTITY_POST.copy(), variant)

    channel = raw[CHANNEL].copy().view(complex)
    norm = np.linalg.norm(channel)
    if not norm > 1e-9:
        raise ProjectionError(f"pair amplitudes have norm {norm:.3e}")
    channel = channel / norm

    post = raw[POST].copy().view(complex).reshape(2, 2, 2)
    s = np.einsum("jki,jkl->il", post.conj(), post)
    lam, vecs = np.linalg.eigh(s)
    if not lam[0] > 1e-9:
        raise ProjectionError(f"post-processing pair is singular (min eigenvalue {lam[0]:.3e})")
    inv_sqrt = (vecs / np.sqrt(lam)) @ vecs.conj().T
    return ProtocolParams(channel, meas, post @ inv_sqrt, variant)


def perturb(x: np.ndarray, sigma: float, rng: np.random.Generator, mask: np.ndarray | None = None) -> np.ndarray:
    """``x + eps`` with ``eps ~ N(0, sigma^2)`` per coordinate, zero where ``mask`` is False."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    eps = sigma * rng.standard_normal(np.shape(x))
    if mask is not None:
        eps = np.where(mask, eps, 0.0)
    return x + eps


@dataclass
class OptimizerConfig:
    iterations: int = 3000
    sigma0: float = 0.1
    decay: float = 0.999
    explore_prob: float = 0.01
    seed: int = 0
    active_mask: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if int(self.iterations) < 0:
            raise ValueError("iterations must be non-negative")
        self.iterations = int(self.iterations)
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must lie in (0, 1]")
        if not 0 <= self.explore_prob < 1:
            raise ValueError("explore_prob must lie in [0, 1)")
        if self.active_mask is not None:
            mask = np.asarray(self.active_mask, dtype=bool)
            if mask.shape != (N_PARAMS,):
                raise ValueError(f"active_mask must have {N_PARAMS} entries")
            self.active_mask = mask

    def sigma_at(self, t: int) -> float:
        return self.sigma0 * self.decay**t

    def mask_for(self, variant: Variant) -> np.ndarray:
        base = variant_mask(variant)
        return base if self.active_mask is None else base & self.active_mask


@dataclass
class OptTrace:
    """Per-iteration record of a search run."""

    iteration: np.ndarray
    proposal: np.ndarray
    accepted: np.ndarray
    best: np.ndarray
    sigma: np.ndarray
    initial: float
    final_sigma: float
    projection_failures: int = 0

    @classmethod
    def empty(cls, n: int, initial: float) -> "OptTrace":
        return cls(
            iteration=np.arange(n),
            proposal=np.full(n, np.nan),
            accepted=np.zeros(n, dtype=bool),
            best=np.full(n, np.nan),
            sigma=np.full(n, np.nan),
            initial=initial,
            final_sigma=np.nan,
        )

    def __len__(self) -> int:
        return self.iteration.size


def _propose(x, sigma, rng, mask, variant, trace) -> ProtocolParams:
    failures = 0
    while True:
        try:
            return project_feasible(perturb(x, sigma, rng, mask), variant)
        except ProjectionError as exc:
            failures += 1
            trace.projection_failures += 1
            if failures > 100:
                raise SearchError(f"{failures} consecutive infeasible proposals") from exc


def hill_climb(objective: Objective, init: ProtocolParams, cfg: OptimizerConfig) -> tuple[ProtocolParams, OptTrace]:
    """
    Maximize ``objective`` by stochastic perturb-and-accept search.

    Each iteration proposes ``project_feasible(x + eps)`` with
    ``eps ~ N(0, sigma_t^2)`` on the active coordinates, accepts it when the
    objective strictly improves and otherwise with probability
    ``cfg.explore_prob``, then sets ``sigma_{t+1} = sigma_t * decay``.

    Returns the best parameters seen, which may differ from the final
    current point after an exploratory downgrade.
    """
    variant = init.variant
    mask = cfg.mask_for(variant)
    rng = np.random.default_rng(cfg.seed)

    current = init
    x = flatten(current)
    f_current = float(objective(current))
    best, f_best = current, f_current
    trace = OptTrace.empty(cfg.iterations, f_current)

    for t in range(cfg.iterations):
        sigma = cfg.sigma_at(t)
        candidate = _propose(x, sigma, rng, mask, variant, trace)
        f_new = float(objective(candidate))
        accept = f_new > f_current
        if not accept and cfg.explore_prob > 0:
            accept = bool(rng.random() < cfg.explore_prob)
        if accept:
            current, f_current = candidate, f_new
            x = flatten(current)
            if f_new > f_best:
                best, f_best = candidate, f_new
        trace.proposal[t] = f_new
        trace.accepted[t] = accept
        trace.best[t] = f_best
        trace.sigma[t] = sigma
    trace.final_sigma = cfg.sigma_at(cfg.iterations)
    return best, trace


def central_difference_gradient(f: Callable[[np.ndarray], float], x: np.ndarray,
                                mask: np.ndarray | None = None, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of ``f`` at ``x``; inactive coordinates get 0."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    idx = range(x.size) if mask is None else np.flatnonzero(mask)
    for i in idx:
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2 * h)
    return grad


def finite_diff_gradient_ascent(objective: Objective, init: ProtocolParams,
                                cfg: OptimizerConfig, h: float = 1e-5) -> tuple[ProtocolParams, OptTrace]:
    """
    Projected gradient ascent with learning rate ``cfg.sigma0`` for
    ``cfg.iterations`` steps. Each step costs ``2 * n_active`` objective
    evaluations. Returns the best parameters seen.
    """
    variant = init.variant
    mask = cfg.mask_for(variant)
    eta = cfg.sigma0

    def raw_objective(v):
        try:
            return float(objective(project_feasible(v, variant)))
        except ProjectionError as exc:
            raise SearchError("gradient probe left the feasible domain") from exc

    current = init
    x = flatten(current)
    f_current = float(objective(current))
    best, f_best = current, f_current
    trace = OptTrace.empty(cfg.iterations, f_current)

    for t in range(cfg.iterations):
        grad = central_difference_gradient(raw_objective, x, mask, h)
        try:
            current = project_feasible(x + eta * grad, variant)
        except ProjectionError as exc:
            raise SearchError(f"ascent step {t} left the feasible domain") from exc
        x = flatten(current)
        f_current = float(objective(current))
        if f_current > f_best:
            best, f_best = current, f_current
        trace.proposal[t] = f_current
        trace.accepted[t] = True
        trace.best[t] = f_best
        trace.sigma[t] = eta
    trace.final_sigma = eta
    return best, trace


class CubicFit(NamedTuple):
    coeffs: np.ndarray
    """Coefficients of ``p^3, p^2, p, 1``."""
    residual: float
    """Largest absolute deviation of the fit at the sample points."""


def fit_cubic(ps, ys) -> CubicFit:
    """Least-squares cubic through ``(ps, ys)`` via QR of the Vandermonde matrix."""
    ps = np.asarray(ps, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if ps.shape != ys.shape:
        raise ValueError("ps and ys must have the same length")
    if np.unique(ps).size < 4:
        raise ValueError("a cubic fit needs at least 4 distinct abscissae")
    v = np.vander(ps, 4)
    q, r = np.linalg.qr(v)
    coeffs = np.linalg.solve(r, q.T @ ys)
    residual = float(np.max(np.abs(v @ coeffs - ys)))
    return CubicFit(coeffs, residual)


def eval_cubic(coeffs, p):
    """``c3 p^3 + c2 p^2 + c1 p + c0`` by Horner's rule."""
    c3, c2, c1, c0 = coeffs
    return ((c3 * p + c2) * p + c1) * p + c0
