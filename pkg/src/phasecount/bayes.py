"""Grid-based Bayesian phase estimation from a measurement record.

The posterior over phi lives on a uniform grid spanning [0, pi] (the
identifiable half-interval: every likelihood here depends on phi only
through cos(phi)) with a flat prior and trapezoid integration.  Likelihoods
are accumulated in the log domain with max-subtraction, since products over
~1e6 pulses underflow any direct evaluation.  Additive constants in the
log-likelihood are dropped; they cancel in the normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fisher import Scheme
from .photonics import (
    DetectorKind,
    LikelihoodModel,
    fringe_mean,
    mixture_component_means,
    mixture_weights,
    require_matched_amplitudes,
)
from .sampling import ExperimentConfig, OutcomeRecord

DEFAULT_GRID_SIZE = 4097
MIN_GRID_SIZE = 65


class PosteriorUnderflowError(RuntimeError):
    """Every grid node has zero posterior mass: the record is impossible
    under the configured likelihood model."""


@dataclass(frozen=True, eq=False)
class PosteriorGrid:
    """Discretized posterior density over phi on [0, pi], trapezoid rule."""

    nodes: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.nodes.shape != self.density.shape:
            raise ValueError("nodes and density must have matching shapes")
        if np.any(self.density < 0.0):
            raise ValueError("posterior density must be nonnegative")

    def normalization(self) -> float:
        return float(np.trapezoid(self.density, self.nodes))


def _phase_grid(grid_size: int) -> np.ndarray:
    if grid_size < MIN_GRID_SIZE:
        raise ValueError(f"grid_size must be >= {MIN_GRID_SIZE}, got {grid_size!r}")
    return np.linspace(0.0, math.pi, grid_size)


# ---------------------------------------------------------------------------
# log-likelihood accumulation per outcome type
# ---------------------------------------------------------------------------

def _log_count_pmf(n: int, config: ExperimentConfig, grid: np.ndarray) -> np.ndarray:
    """log p(n | phi) over the grid, up to the common -lgamma(n+1) constant."""
    if config.model is LikelihoodModel.POISSON_FRINGE:
        lam = fringe_mean(grid, config.probe, config.det)
        with np.errstate(divide="ignore", invalid="ignore"):
            logpmf = np.where(n == 0, -lam, n * np.log(lam) - lam)
        logpmf[np.isnan(logpmf)] = -np.inf  # n > 0 where lam == 0
        return logpmf
    require_matched_amplitudes(config.probe)
    w1, w2 = mixture_weights(config.det)
    lam1, lam2 = mixture_component_means(grid, config.probe, config.det)
    with np.errstate(divide="ignore", invalid="ignore"):
        l1 = np.where(n == 0, -lam1, n * np.log(lam1) - lam1)
        l1[np.isnan(l1)] = -np.inf
        l2 = np.where(n == 0, -lam2, n * np.log(lam2) - lam2)
        logw1 = math.log(w1) if w1 > 0.0 else -np.inf
        logw2 = math.log(w2) if w2 > 0.0 else -np.inf
    return np.logaddexp(logw1 + l1, logw2 + l2)


def _loglik_counts(pairs, config: ExperimentConfig, grid: np.ndarray) -> np.ndarray:
    total = np.zeros_like(grid)
    for n, multiplicity in pairs:
        total += multiplicity * (_log_count_pmf(int(n), config, grid)
                                 - math.lgamma(int(n) + 1))
    return total


def _loglik_clicks(n_silent: int, n_click: int, config: ExperimentConfig,
                   grid: np.ndarray) -> np.ndarray:
    if config.model is LikelihoodModel.POISSON_FRINGE:
        lam = fringe_mean(grid, config.probe, config.det)
        log_p0 = -lam
        with np.errstate(divide="ignore"):
            log_p1 = np.log(-np.expm1(-lam))
    else:
        require_matched_amplitudes(config.probe)
        w1, w2 = mixture_weights(config.det)
        lam1, lam2 = mixture_component_means(grid, config.probe, config.det)
        p0 = w1 * np.exp(-lam1) + w2 * np.exp(-lam2)
        with np.errstate(divide="ignore"):
            log_p0 = np.log(p0)
            log_p1 = np.log1p(-p0)
    total = np.zeros_like(grid)
    if n_silent:
        total += n_silent * log_p0
    if n_click:
        total += n_click * log_p1
    return total


def _loglik_homodyne(k: int, s1: float, s2: float, config: ExperimentConfig,
                     grid: np.ndarray) -> np.ndarray:
    # density exp(-(x - mean)^2)/sqrt(pi): the phi-dependent part of the
    # summed log-likelihood is -(s2 - 2*mean*s1 + k*mean^2)
    mean = math.sqrt(2.0) * config.probe.alpha * np.sin(grid)
    return -(s2 - 2.0 * mean * s1 + k * mean * mean)


def _loglik_heterodyne(k: int, s1: complex, s2: float, config: ExperimentConfig,
                       grid: np.ndarray) -> np.ndarray:
    mx = config.probe.alpha * np.cos(grid)
    my = config.probe.alpha * np.sin(grid)
    return -(s2 - 2.0 * (mx * s1.real + my * s1.imag) + k * (mx * mx + my * my))


def _count_pairs(values: np.ndarray):
    histogram = np.bincount(values)
    return [(n, int(c)) for n, c in enumerate(histogram) if c]


def _loglik_grid(record: OutcomeRecord, grid: np.ndarray, upto: int | None = None) -> np.ndarray:
    config = record.config
    values = record.values if upto is None else record.values[:upto]
    if len(values) == 0:
        return np.zeros_like(grid)
    if config.scheme is Scheme.DISPLACED_COUNTING:
        if config.det.kind is DetectorKind.ON_OFF:
            n_click = int(np.count_nonzero(values))
            return _loglik_clicks(len(values) - n_click, n_click, config, grid)
        return _loglik_counts(_count_pairs(values), config, grid)
    if config.scheme is Scheme.HOMODYNE:
        return _loglik_homodyne(len(values), float(np.sum(values)),
                                float(np.sum(values * values)), config, grid)
    if config.scheme is Scheme.HETERODYNE:
        return _loglik_heterodyne(len(values), complex(np.sum(values)),
                                  float(np.sum(values.real**2 + values.imag**2)),
                                  config, grid)
    raise ValueError(f"unknown scheme {config.scheme!r}")


def _normalize(loglik: np.ndarray, grid: np.ndarray) -> np.ndarray:
    peak = float(np.max(loglik))
    if not np.isfinite(peak):
        raise PosteriorUnderflowError(
            "posterior vanished at every grid node; the record is impossible "
            "under the configured likelihood model"
        )
    density = np.exp(loglik - peak)  # flat prior: constant factor cancels
    norm = float(np.trapezoid(density, grid))
    if norm <= 0.0 or not math.isfinite(norm):
        raise PosteriorUnderflowError("posterior normalization underflowed")
    return density / norm


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def posterior(record: OutcomeRecord, grid_size: int = DEFAULT_GRID_SIZE) -> PosteriorGrid:
    """Posterior over phi given the record, on a uniform [0, pi] grid.

    An empty record returns the flat prior 1/pi.
    """
    grid = _phase_grid(grid_size)
    return PosteriorGrid(nodes=grid, density=_normalize(_loglik_grid(record, grid), grid))


def estimate(post: PosteriorGrid) -> tuple[float, float]:
    """Posterior mean and posterior variance under the grid's trapezoid rule."""
    phi_hat = float(np.trapezoid(post.nodes * post.density, post.nodes))
    variance = float(np.trapezoid((phi_hat - post.nodes) ** 2 * post.density, post.nodes))
    return phi_hat, variance


def sequential_estimates(
    record: OutcomeRecord,
    grid_size: int = DEFAULT_GRID_SIZE,
    checkpoints=(),
) -> list[tuple[int, float, float]]:
    """Running (k, phi_hat, variance) at each checkpoint k.

    Count and click records accumulate sufficient statistics in one pass;
    the realized estimate at k equals the one-shot posterior of the first k
    outcomes exactly.
    """
    ks = [int(k) for k in checkpoints]
    if not ks:
        raise ValueError("checkpoints must be a nonempty increasing sequence")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    if ks[0] < 1 or ks[-1] > record.config.pulses:
        raise ValueError("checkpoints must lie within [1, pulses]")

    grid = _phase_grid(grid_size)
    config = record.config
    results = []

    if (config.scheme is Scheme.DISPLACED_COUNTING
            and config.det.kind is DetectorKind.NUMBER_RESOLVING):
        # cumulative histogram; rebuilding the log-likelihood from the sorted
        # (n, count) pairs keeps the float path identical to posterior()
        histogram = np.zeros(int(record.values.max()) + 1, dtype=np.int64)
        prev = 0
        for k in ks:
            histogram += np.bincount(record.values[prev:k], minlength=len(histogram))
            prev = k
            pairs = [(n, int(c)) for n, c in enumerate(histogram) if c]
            density = _normalize(_loglik_counts(pairs, config, grid), grid)
            results.append((k, *estimate(PosteriorGrid(nodes=grid, density=density))))
        return results

    if (config.scheme is Scheme.DISPLACED_COUNTING
            and config.det.kind is DetectorKind.ON_OFF):
        clicks_so_far = np.cumsum(record.values.astype(np.int64))
        for k in ks:
            n_click = int(clicks_so_far[k - 1])
            density = _normalize(_loglik_clicks(k - n_click, n_click, config, grid), grid)
            results.append((k, *estimate(PosteriorGrid(nodes=grid, density=density))))
        return results

    for k in ks:
        density = _normalize(_loglik_grid(record, grid, upto=k), grid)
        results.append((k, *estimate(PosteriorGrid(nodes=grid, density=density))))
    return results
