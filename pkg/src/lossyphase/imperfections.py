"""Parametric experimental non-idealities: fibre admixture, partial photon
distinguishability, reduced fringe visibility, multimode-coupler thinning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detection import LABELS, DetectionConfig, OutcomeModel
from .fock import FockState


@dataclass(frozen=True)
class ImperfectionParams:
    """Imperfection knobs; the defaults are ideal values."""

    epsilon: float = 0.0  # weight of the symmetric |20>+|02> fibre admixture
    delta: float = 0.0  # fibre phase of the admixture, radians
    lambda_hom: float = 1.0  # two-photon indistinguishability (HOM dip depth)
    v_classical: float = 1.0  # single-photon fringe visibility
    coupler_factor: float = 0.5  # per-event retention of the 50:50 output couplers

    def __post_init__(self):
        for name in ("epsilon", "lambda_hom", "v_classical"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if not 0.0 < self.coupler_factor <= 1.0:
            raise ValueError("coupler_factor must be in (0, 1]")

    @property
    def ideal(self) -> bool:
        return self.epsilon == 0.0 and self.lambda_hom == 1.0 and self.v_classical == 1.0


IDEAL = ImperfectionParams()


def fibre_input(epsilon: float, delta: float = 0.0) -> FockState:
    """Two-photon state delivered by the fibre: mostly |11> plus a symmetric
    |20>+|02> admixture of weight epsilon and phase delta."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    rot = np.exp(1j * delta) * math.sqrt(epsilon / 2.0)
    amps = {(1, 1): complex(math.sqrt(1.0 - epsilon)), (2, 0): rot, (0, 2): rot}
    return FockState(2, amps)


def classical_distribution(probe: FockState, eta: float, config: DetectionConfig) -> dict[str, float]:
    """Coincidence probabilities when the two photons traverse the network as
    independent classical particles.

    Each photon follows the intensity splitting ratios only, so nothing here
    depends on the phase: the distinguishable part of a mixture carries flat
    fringes.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    theta = config.theta_d
    sensing = {"A": eta * theta, "B": eta * (1.0 - theta), "C": 1.0 - eta}
    reference = {"A": 1.0 - theta, "B": theta, "C": 0.0}
    out = {label: 0.0 for label in LABELS}
    for pattern, amp in probe.amplitudes.items():
        weight = abs(amp) ** 2
        routes = [sensing] * pattern[0] + [reference] * pattern[1]
        for d1 in "ABC":
            for d2 in "ABC":
                label = "".join(sorted(d1 + d2))
                out[label] += weight * routes[0][d1] * routes[1][d2]
    return out


def degrade_distribution(ideal: dict[str, float], distinguishable: dict[str, float], lambda_hom: float) -> dict[str, float]:
    """Convex mixture of the interfering and classically-routed distributions."""
    if not 0.0 <= lambda_hom <= 1.0:
        raise ValueError(f"lambda_hom must be in [0, 1], got {lambda_hom}")
    for name, dist in (("ideal", ideal), ("distinguishable", distinguishable)):
        total = sum(dist.get(label, 0.0) for label in LABELS)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"{name} distribution is not normalized (sum {total})")
    return {
        label: lambda_hom * ideal.get(label, 0.0) + (1.0 - lambda_hom) * distinguishable.get(label, 0.0)
        for label in LABELS
    }


@dataclass(frozen=True)
class MixedOutcomeModel:
    """Outcome model degraded by partial distinguishability: a convex mixture
    of the quantum model with the phase-independent classical routing."""

    quantum: OutcomeModel
    classical: np.ndarray
    lambda_hom: float

    def probabilities(self, phi) -> np.ndarray:
        q = self.quantum.probabilities(phi)
        return self.lambda_hom * q + (1.0 - self.lambda_hom) * self.classical


def build_model(probe: FockState, eta: float, config: DetectionConfig, params: ImperfectionParams):
    """Outcome model for one setting including distinguishability and visibility."""
    quantum = OutcomeModel(probe, eta, config, single_photon_visibility=params.v_classical)
    if params.lambda_hom >= 1.0:
        return quantum
    classical = classical_distribution(probe, eta, config)
    vec = np.array([classical[label] for label in LABELS], dtype=float)
    return MixedOutcomeModel(quantum, vec, params.lambda_hom)


def apply_coupler_thinning(counts: dict[str, int], rng: np.random.Generator, retain: float = 0.5) -> dict[str, int]:
    """Thin same-counter events (coupler inefficiency), then thin cross-counter
    events equally (the compensating postprocessing). Net effect: every label
    is binomially thinned with the same retention, leaving relative
    frequencies unbiased."""
    out = dict(counts)
    for label in ("AA", "BB", "CC"):
        out[label] = int(rng.binomial(int(out.get(label, 0)), retain))
    for label in ("AB", "AC", "BC"):
        out[label] = int(rng.binomial(int(out.get(label, 0)), retain))
    return out
