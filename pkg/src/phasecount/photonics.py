"""Physical models for a displaced-photon-counting phase sensor.

The probe is a weak coherent pulse of amplitude ``alpha`` that picks up an
unknown phase shift ``phi``.  The receiver displaces the field by ``-beta``
(nominally ``beta == alpha``, which nulls the signal at ``phi = 0``) and
counts the residual photons.  This module evaluates the detector POVM and
the outcome likelihoods of that receiver, plus the quadrature densities of
the homodyne and heterodyne references.

Quadrature convention: vacuum variance 1/2, i.e. x = (a + a^dag)/sqrt(2).

Everything here is a pure function of immutable inputs; all operations are
safe to call concurrently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

# Relative amplitude mismatch tolerated by the matched-amplitude mixture model.
AMPLITUDE_MATCH_RTOL = 1e-6

# Maximum probability mass allowed beyond the Fock cutoff when building states.
STATE_TAIL_GUARD = 1e-12


class ModelMismatchError(ValueError):
    """A likelihood model was asked to operate outside its validity range."""


class FockTruncationError(RuntimeError):
    """The configured Fock cutoff leaves too much probability mass uncaptured."""


class DetectorKind(Enum):
    NUMBER_RESOLVING = "pnrd"
    ON_OFF = "onoff"


class LikelihoodModel(Enum):
    """Count-statistics model for the displaced-counting receiver.

    VISIBILITY_MIXTURE
        Visibility-weighted mixture of the nulled-mode Poisson statistics
        and a phase-insensitive Poisson background, renormalized to unit
        mass.  Only valid for matched amplitudes (``beta == alpha``).
    POISSON_FRINGE
        Single Poisson distribution whose mean follows the interference
        fringe ``eta*(alpha^2 + beta^2 - 2*xi*alpha*beta*cos(phi)) + nu``.
        Handles amplitude mismatch and reduces to the nulled-mode model
        for matched, ideal parameters.
    """

    VISIBILITY_MIXTURE = "visibility-mixture"
    POISSON_FRINGE = "poisson-fringe"


@dataclass(frozen=True)
class ProbeConfig:
    """Coherent amplitudes of the signal (``alpha``) and the displacement (``beta``).

    Both are real and nonnegative; ``alpha**2`` is the mean photon number
    per pulse of the signal.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")

    @classmethod
    def from_intensities(cls, signal: float, displacement: float | None = None) -> "ProbeConfig":
        """Build from mean photon numbers |alpha|^2 and |beta|^2."""
        if signal < 0.0:
            raise ValueError("signal intensity must be >= 0")
        if displacement is None:
            displacement = signal
        if displacement < 0.0:
            raise ValueError("displacement intensity must be >= 0")
        return cls(alpha=math.sqrt(signal), beta=math.sqrt(displacement))

    def mean_photon_number(self) -> float:
        return self.alpha**2


@dataclass(frozen=True)
class DetectorModel:
    """Detector imperfections and the Fock-space truncation used for state numerics.

    eta  -- detection efficiency in [0, 1]
    nu   -- dark counts per pulse, >= 0
    xi   -- interference visibility in [0, 1]
    kind -- photon-number resolving or click/no-click
    fock_cutoff -- explicit truncation; ``None`` selects an automatic cutoff
                   of ``max(30, ceil(mu + 10*sqrt(mu)))`` for a state of mean
                   photon number ``mu``
    """

    eta: float = 1.0
    nu: float = 0.0
    xi: float = 1.0
    kind: DetectorKind = DetectorKind.NUMBER_RESOLVING
    fock_cutoff: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if not (math.isfinite(self.nu) and self.nu >= 0.0):
            raise ValueError(f"nu must be finite and >= 0, got {self.nu!r}")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must lie in [0, 1], got {self.xi!r}")
        if self.fock_cutoff is not None and self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be >= 1, got {self.fock_cutoff!r}")

    def cutoff_for(self, mean_photons: float) -> int:
        if self.fock_cutoff is not None:
            return self.fock_cutoff
        return max(30, math.ceil(mean_photons + 10.0 * math.sqrt(mean_photons)))


# ---------------------------------------------------------------------------
# helpers shared by the likelihood models
# ---------------------------------------------------------------------------

def displaced_mean_photons(phi, probe: ProbeConfig):
    """Mean photon number of the displaced signal |alpha e^{i phi} - beta|^2.

    Uses the cancellation-free form (alpha-beta)^2 + 4*alpha*beta*sin^2(phi/2).
    """
    a, b = probe.alpha, probe.beta
    s = np.sin(np.asarray(phi, dtype=float) / 2.0)
    return (a - b) ** 2 + 4.0 * a * b * s * s


def fringe_mean(phi, probe: ProbeConfig, det: DetectorModel):
    """Mean detected count of the single-Poisson interference-fringe model.

    eta*((alpha-beta)^2 + 2*alpha*beta*(1-xi) + 4*xi*alpha*beta*sin^2(phi/2)) + nu,
    which equals eta*(alpha^2 + beta^2 - 2*xi*alpha*beta*cos(phi)) + nu.
    """
    a, b = probe.alpha, probe.beta
    s = np.sin(np.asarray(phi, dtype=float) / 2.0)
    mismatch = (a - b) ** 2 + 2.0 * a * b * (1.0 - det.xi)
    return det.eta * (mismatch + 4.0 * det.xi * a * b * s * s) + det.nu


def fringe_mean_derivative(phi, probe: ProbeConfig, det: DetectorModel):
    """d/dphi of :func:`fringe_mean`."""
    return 2.0 * det.eta * det.xi * probe.alpha * probe.beta * np.sin(np.asarray(phi, dtype=float))


def mixture_weights(det: DetectorModel) -> tuple[float, float]:
    """Normalized weights of the interfering and background mixture components."""
    w_interfering = det.xi / (2.0 - det.xi)
    w_background = 2.0 * (1.0 - det.xi) / (2.0 - det.xi)
    return w_interfering, w_background


def mixture_component_means(phi, probe: ProbeConfig, det: DetectorModel):
    """Poisson means (interfering, background) of the matched-amplitude mixture."""
    a = probe.alpha
    s = np.sin(np.asarray(phi, dtype=float) / 2.0)
    lam_interfering = 4.0 * det.eta * a * a * s * s + det.nu
    lam_background = det.eta * a * a + det.nu
    return lam_interfering, lam_background


def mixture_interfering_mean_derivative(phi, probe: ProbeConfig, det: DetectorModel):
    return 2.0 * det.eta * probe.alpha**2 * np.sin(np.asarray(phi, dtype=float))


def require_matched_amplitudes(probe: ProbeConfig) -> None:
    """Raise unless beta matches alpha to within AMPLITUDE_MATCH_RTOL."""
    scale = max(probe.alpha, probe.beta)
    if scale > 0.0 and abs(probe.alpha - probe.beta) > AMPLITUDE_MATCH_RTOL * scale:
        raise ModelMismatchError(
            "the visibility-mixture model assumes matched amplitudes; "
            f"got alpha={probe.alpha!r}, beta={probe.beta!r} "
            f"(relative mismatch {abs(probe.alpha - probe.beta) / scale:.3g})"
        )


def _poisson_pmf(n: int, lam: float) -> float:
    if lam < 0.0:
        raise ValueError(f"Poisson mean must be >= 0, got {lam!r}")
    if lam == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(lam) - lam - math.lgamma(n + 1))


# ---------------------------------------------------------------------------
# detector POVM
# ---------------------------------------------------------------------------

def povm_element(n: int, det: DetectorModel, cutoff: int | None = None) -> np.ndarray:
    """Diagonal coefficients of the lossy, dark-count-afflicted counter POVM.

    Element ``n`` of a number-resolving detector with efficiency ``eta`` and
    dark-count rate ``nu`` acts diagonally in the Fock basis.  The returned
    vector holds the coefficient of |k><k| for k = 0..cutoff:

        c_k = e^{-nu} * sum_{l=0}^{n} (nu^l / l!) * C(k, n-l)
              * eta^{n-l} * (1-eta)^{k-(n-l)}

    i.e. binomial photon loss followed by Poisson dark-count convolution.
    """
    if n < 0:
        raise ValueError(f"photon-count outcome must be >= 0, got {n!r}")
    if det.kind is not DetectorKind.NUMBER_RESOLVING:
        raise ValueError("povm_element is defined for number-resolving detectors")
    if cutoff is None:
        cutoff = det.cutoff_for(0.0)
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff!r}")

    coeffs = np.zeros(cutoff + 1)
    dark = math.exp(-det.nu)  # Poisson(nu) mass at l = 0
    for l in range(n + 1):
        detected = n - l
        if detected <= cutoff:
            # binomial factor C(k, detected) eta^detected (1-eta)^(k-detected),
            # built by recurrence in k to avoid factorial overflow
            b = det.eta**detected
            for k in range(detected, cutoff + 1):
                coeffs[k] += dark * b
                b *= (k + 1) / (k + 1 - detected) * (1.0 - det.eta)
                if b == 0.0:
                    break
        dark *= det.nu / (l + 1)
    return coeffs


# ---------------------------------------------------------------------------
# outcome likelihoods
# ---------------------------------------------------------------------------

def pnrd_likelihood(
    n: int,
    phi: float,
    probe: ProbeConfig,
    det: DetectorModel,
    model: LikelihoodModel = LikelihoodModel.POISSON_FRINGE,
) -> float:
    """Probability of counting ``n`` photons at phase shift ``phi``."""
    if n < 0:
        raise ValueError(f"photon-count outcome must be >= 0, got {n!r}")
    if det.kind is not DetectorKind.NUMBER_RESOLVING:
        raise ValueError("pnrd_likelihood needs a number-resolving detector")
    if model is LikelihoodModel.POISSON_FRINGE:
        return _poisson_pmf(n, float(fringe_mean(phi, probe, det)))
    require_matched_amplitudes(probe)
    w1, w2 = mixture_weights(det)
    lam1, lam2 = mixture_component_means(phi, probe, det)
    return w1 * _poisson_pmf(n, float(lam1)) + w2 * _poisson_pmf(n, float(lam2))


def mixture_likelihood_raw(n: int, phi: float, probe: ProbeConfig, det: DetectorModel) -> float:
    """Unnormalized mixture value (total mass 2 - xi); diagnostic only.

    xi * Pois(n; lam_interfering) + 2*(1 - xi) * Pois(n; lam_background)
    """
    if n < 0:
        raise ValueError(f"photon-count outcome must be >= 0, got {n!r}")
    require_matched_amplitudes(probe)
    lam1, lam2 = mixture_component_means(phi, probe, det)
    return det.xi * _poisson_pmf(n, float(lam1)) + 2.0 * (1.0 - det.xi) * _poisson_pmf(n, float(lam2))


def onoff_likelihood(
    click: bool,
    phi: float,
    probe: ProbeConfig,
    det: DetectorModel,
    model: LikelihoodModel = LikelihoodModel.POISSON_FRINGE,
) -> float:
    """Probability of a click (or of silence) for a threshold detector."""
    if model is LikelihoodModel.POISSON_FRINGE:
        lam = float(fringe_mean(phi, probe, det))
        return float(-np.expm1(-lam)) if click else math.exp(-lam)
    require_matched_amplitudes(probe)
    w1, w2 = mixture_weights(det)
    lam1, lam2 = mixture_component_means(phi, probe, det)
    p_silent = w1 * math.exp(-float(lam1)) + w2 * math.exp(-float(lam2))
    return 1.0 - p_silent if click else p_silent


def homodyne_mean(phi, probe: ProbeConfig):
    """Mean of the measured quadrature, sqrt(2)*alpha*sin(phi)."""
    return math.sqrt(2.0) * probe.alpha * np.sin(np.asarray(phi, dtype=float))


def homodyne_density(x: float, phi: float, probe: ProbeConfig) -> float:
    """Gaussian quadrature density: mean sqrt(2)*alpha*sin(phi), variance 1/2."""
    dx = x - float(homodyne_mean(phi, probe))
    return math.exp(-dx * dx) / math.sqrt(math.pi)


def heterodyne_density(re: float, im: float, phi: float, probe: ProbeConfig) -> float:
    """Husimi density of the phase-shifted signal, (1/pi) e^{-|z - alpha e^{i phi}|^2}."""
    dre = re - probe.alpha * math.cos(phi)
    dim = im - probe.alpha * math.sin(phi)
    return math.exp(-(dre * dre + dim * dim)) / math.pi


# ---------------------------------------------------------------------------
# brute-force Fock-space oracle
# ---------------------------------------------------------------------------

def coherent_number_amplitudes(gamma: complex, cutoff: int) -> np.ndarray:
    """Fock-basis amplitudes of a coherent state, c_k = e^{-|g|^2/2} g^k / sqrt(k!)."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff!r}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0] = math.exp(-abs(gamma) ** 2 / 2.0)
    for k in range(cutoff):
        amps[k + 1] = amps[k] * gamma / math.sqrt(k + 1)
    return amps


def born_probability_oracle(n: int, phi: float, probe: ProbeConfig, det: DetectorModel) -> float:
    """Outcome probability Tr[Pi_n rho] computed in the truncated Fock basis.

    Builds the photon-number distribution of the displaced signal
    |alpha e^{i phi} - beta> and contracts it with :func:`povm_element`.
    Deliberately independent of the closed-form likelihoods so it can serve
    as their cross-check; models no mode mismatch, hence requires xi = 1.
    """
    if n < 0:
        raise ValueError(f"photon-count outcome must be >= 0, got {n!r}")
    if det.kind is not DetectorKind.NUMBER_RESOLVING:
        raise ValueError("the Fock-space oracle needs a number-resolving detector")
    if det.xi != 1.0:
        raise ValueError("the Fock-space oracle models no mode mismatch; set xi = 1")

    gamma = probe.alpha * cmath.exp(1j * phi) - probe.beta
    cutoff = det.cutoff_for(abs(gamma) ** 2)
    number_pmf = np.abs(coherent_number_amplitudes(gamma, cutoff)) ** 2
    tail = 1.0 - float(number_pmf.sum())
    if tail > STATE_TAIL_GUARD:
        raise FockTruncationError(
            f"state tail mass {tail:.3e} beyond cutoff {cutoff} exceeds "
            f"{STATE_TAIL_GUARD:g}; raise fock_cutoff"
        )
    return float(np.dot(povm_element(n, det, cutoff=cutoff), number_pmf))
