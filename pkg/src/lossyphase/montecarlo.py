"""Deterministic, seedable Monte Carlo generation of coincidence-count datasets."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .bounds import NOON_WEIGHTS, ProbeWeights, optimize_weights
from .detection import LABELS, DetectionConfig, Setting, optimize_theta_d
from .fock import FockState
from .imperfections import ImperfectionParams, apply_coupler_thinning, build_model, fibre_input
from .prep import prepare, solve_prep

#: Stream index reserved for the per-series event-count draw; streams 0 and 1
#: feed the quarter and half settings.
_SERIES_STREAM = 2

_SETTING_STREAM = {Setting.QUARTER: 0, Setting.HALF: 1}


class ProbeKind(Enum):
    OPTIMAL = "optimal"
    NOON = "noon"


def default_phase_list() -> tuple[float, ...]:
    """Fifteen phases centered on zero with 0.02 rad increments."""
    return tuple(round(0.02 * (i - 7), 10) for i in range(15))


@dataclass(frozen=True)
class ExperimentConfig:
    eta_list: tuple[float, ...] = (0.2, 0.361, 0.4, 0.547)
    probe_kind: ProbeKind = ProbeKind.OPTIMAL
    phase_list: tuple[float, ...] = field(default_factory=default_phase_list)
    series_count: int = 300
    events_per_series: int = 2000
    master_seed: int = 0
    imperfections: ImperfectionParams = field(default_factory=ImperfectionParams)
    poissonize_m: bool = True

    def __post_init__(self):
        object.__setattr__(self, "eta_list", tuple(float(e) for e in self.eta_list))
        object.__setattr__(self, "phase_list", tuple(float(p) for p in self.phase_list))
        if not self.eta_list or any(not 0.0 < e <= 1.0 for e in self.eta_list):
            raise ValueError("eta_list must be non-empty with every value in (0, 1]")
        if not self.phase_list:
            raise ValueError("phase_list must be non-empty")
        if self.series_count < 1:
            raise ValueError("series_count must be at least 1")
        if self.events_per_series < 1:
            raise ValueError("events_per_series must be at least 1")
        if int(self.master_seed) < 0:
            raise ValueError("master_seed must be a non-negative integer")


@dataclass(frozen=True)
class EventRecord:
    eta: float
    probe: ProbeKind
    phi_true: float
    setting: Setting
    series_id: int
    counts: dict[str, int]
    seed_used: int


@dataclass(frozen=True)
class EventDataset:
    config: ExperimentConfig
    records: tuple[EventRecord, ...]


def record_rng(
    master_seed: int, eta_index: int, phase_index: int, series_id: int, stream: int
) -> tuple[np.random.Generator, int]:
    """Counter-style substream: the generator is a pure function of its key, so
    any record is reproducible in isolation and in parallel."""
    ss = np.random.SeedSequence(
        entropy=(int(master_seed), int(eta_index), int(phase_index), int(series_id), int(stream))
    )
    seed_used = int(ss.generate_state(1, np.uint64)[0])
    return np.random.default_rng(ss), seed_used


def sample_counts(distribution: dict[str, float], m: int, rng: np.random.Generator) -> dict[str, int]:
    """Multinomial draw of m coincidence events over the labels."""
    if m < 0:
        raise ValueError("event count must be non-negative")
    probs = np.array([float(distribution.get(label, 0.0)) for label in LABELS])
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"distribution is not normalized (sum {total})")
    if m == 0:
        return {label: 0 for label in LABELS}
    draw = rng.multinomial(m, probs / total)
    return {label: int(n) for label, n in zip(LABELS, draw)}


def build_probe(kind: ProbeKind, eta: float, params: ImperfectionParams) -> FockState:
    """Probe state actually delivered to the interferometer: the splitter
    settings target the ideal weights, the fibre state feeds the network."""
    weights = probe_weights(kind, eta)
    cfg = solve_prep(weights)
    state, _ = prepare(
        cfg.theta1, cfg.theta2, cfg.attenuated_arm, input_state=fibre_input(params.epsilon, params.delta)
    )
    return state.normalize()


def probe_weights(kind: ProbeKind, eta: float) -> ProbeWeights:
    if kind is ProbeKind.NOON:
        return NOON_WEIGHTS
    weights, _ = optimize_weights(eta)
    return weights


def setting_models(kind: ProbeKind, eta: float, params: ImperfectionParams) -> dict[Setting, object]:
    """Outcome models for both settings of one (probe, transmission) choice."""
    probe = build_probe(kind, eta, params)
    quarter = optimize_theta_d(probe, eta)
    half = DetectionConfig(Setting.HALF, 0.5)
    return {
        Setting.QUARTER: build_model(probe, eta, quarter, params),
        Setting.HALF: build_model(probe, eta, half, params),
    }


def run_campaign(config: ExperimentConfig) -> EventDataset:
    """Simulate the full measurement campaign described by ``config``.

    Every record is generated from its own substream, so the dataset is a pure
    function of the configuration and any subset can be regenerated alone.
    """
    records: list[EventRecord] = []
    for eta_index, eta in enumerate(config.eta_list):
        models = setting_models(config.probe_kind, eta, config.imperfections)
        for phase_index, phi in enumerate(config.phase_list):
            dists = {
                setting: {
                    label: float(p)
                    for label, p in zip(LABELS, np.asarray(model.probabilities(phi), dtype=float))
                }
                for setting, model in models.items()
            }
            for series_id in range(config.series_count):
                rng_m, _ = record_rng(config.master_seed, eta_index, phase_index, series_id, _SERIES_STREAM)
                if config.poissonize_m:
                    m_total = int(rng_m.poisson(config.events_per_series))
                else:
                    m_total = config.events_per_series
                split = {Setting.QUARTER: m_total // 2, Setting.HALF: m_total - m_total // 2}
                for setting in (Setting.QUARTER, Setting.HALF):
                    rng, seed_used = record_rng(
                        config.master_seed, eta_index, phase_index, series_id, _SETTING_STREAM[setting]
                    )
                    counts = sample_counts(dists[setting], split[setting], rng)
                    counts = apply_coupler_thinning(counts, rng, config.imperfections.coupler_factor)
                    records.append(
                        EventRecord(
                            eta=eta,
                            probe=config.probe_kind,
                            phi_true=phi,
                            setting=setting,
                            series_id=series_id,
                            counts=counts,
                            seed_used=seed_used,
                        )
                    )
    return EventDataset(config=config, records=tuple(records))
