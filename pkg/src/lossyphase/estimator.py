"""Maximum-likelihood phase estimation and uncertainty analysis against the
Cramér-Rao bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import qfi_lossy
from .detection import Setting
from .montecarlo import EventDataset, EventRecord, ProbeKind, probe_weights, setting_models

SEARCH_INTERVAL = (-math.pi / 2.0, math.pi / 2.0)
GRID_STEP = 1e-3

#: Refined log-likelihood values closer than this are treated as ties and
#: resolved toward the smaller |phi|. The likelihood of a probe without
#: single-photon fringes is exactly mirror-symmetric inside the search
#: interval, so the mirrored lobe must lose deterministically.
TIE_TOL = 1e-4

_NEG = -1e30  # stand-in for log(0) that keeps 0 * log(0) = 0 in matrix products


class DegenerateLikelihoodError(ValueError):
    """Likelihood carries no phase information (e.g. no counts at all)."""


@dataclass(frozen=True)
class Estimate:
    phi_hat: float
    log_likelihood_max: float
    n_coincidences: int
    series_key: tuple


@dataclass(frozen=True)
class UncertaintyRow:
    eta: float
    probe: ProbeKind
    phi_true: float
    mean: float
    sigma: float
    m_bar: float
    sigma_scaled: float
    crb: float


def _kept_labels(setting: Setting, include_cc: bool) -> tuple[str, ...]:
    labels = setting.kept_labels
    if setting is Setting.HALF and not include_cc:
        labels = tuple(l for l in labels if l != "CC")
    return labels


def log_likelihood(counts_by_setting, phi: float, models, include_cc: bool = True) -> float:
    """Sum over settings of count times log renormalized label probability.

    Each setting is scored only on its postselected labels, renormalized
    within that set; a zero-probability label with counts gives -inf.
    """
    from .detection import LABELS

    total = 0.0
    for setting, model in models.items():
        counts = counts_by_setting.get(setting, {})
        labels = _kept_labels(setting, include_cc)
        probs = np.asarray(model.probabilities(phi), dtype=float)
        kept = {label: probs[LABELS.index(label)] for label in labels}
        norm = sum(kept.values())
        for label in labels:
            n = counts.get(label, 0)
            if n == 0:
                continue
            p = kept[label] / norm if norm > 0 else 0.0
            if p <= 0.0:
                return -math.inf
            total += n * math.log(p)
    return total


@dataclass(frozen=True)
class LikelihoodGrid:
    """Log-probabilities precomputed on the search grid, shared across series."""

    phis: np.ndarray
    labels: dict[Setting, tuple[str, ...]]
    log_probs: dict[Setting, np.ndarray]  # (n_phi, n_kept) per setting

    @property
    def step(self) -> float:
        return float(self.phis[1] - self.phis[0])


def likelihood_grid(
    models,
    include_cc: bool = True,
    interval: tuple[float, float] = SEARCH_INTERVAL,
    step: float = GRID_STEP,
) -> LikelihoodGrid:
    from .detection import LABELS

    lo, hi = interval
    phis = np.arange(lo, hi, step)
    labels = {}
    logs = {}
    for setting, model in models.items():
        kept = _kept_labels(setting, include_cc)
        idx = [LABELS.index(label) for label in kept]
        probs = np.asarray(model.probabilities(phis), dtype=float)[:, idx]
        norms = probs.sum(axis=1, keepdims=True)
        cond = np.divide(probs, norms, out=np.zeros_like(probs), where=norms > 0)
        logp = np.where(cond > 0, np.log(np.where(cond > 0, cond, 1.0)), _NEG)
        labels[setting] = kept
        logs[setting] = logp
    return LikelihoodGrid(phis=phis, labels=labels, log_probs=logs)


def _loglik_rows(grid: LikelihoodGrid, counts_rows: dict[Setting, np.ndarray]) -> np.ndarray:
    total = None
    for setting, counts in counts_rows.items():
        rows = counts @ grid.log_probs[setting].T
        total = rows if total is None else total + rows
    return total


def _best_phi(phis: np.ndarray, row: np.ndarray, step: float) -> tuple[float, float]:
    """Global maximizer of one likelihood row: local maxima are refined with a
    parabola through the best grid point and its neighbors; near-ties are
    broken toward the smallest |phi|."""
    span = float(np.max(row) - np.min(row))
    if not np.isfinite(span) and np.max(row) <= _NEG:
        raise DegenerateLikelihoodError("likelihood is -inf everywhere")
    if span < 1e-12:
        raise DegenerateLikelihoodError("likelihood is flat over the search interval")
    inner = row[1:-1]
    is_max = (inner >= row[:-2]) & (inner >= row[2:])
    candidates: list[tuple[float, float]] = []
    for i in np.nonzero(is_max)[0] + 1:
        lm, l0, lp = row[i - 1], row[i], row[i + 1]
        denom = lm - 2.0 * l0 + lp
        if denom < 0.0:
            shift = 0.5 * (lm - lp) / denom
            value = l0 - (lm - lp) ** 2 / (8.0 * denom)
        else:
            shift, value = 0.0, l0
        candidates.append((float(phis[i] + shift * step), float(value)))
    if row[0] >= row[1]:
        candidates.append((float(phis[0]), float(row[0])))
    if row[-1] >= row[-2]:
        candidates.append((float(phis[-1]), float(row[-1])))
    best_value = max(v for _, v in candidates)
    tied = [(phi, v) for phi, v in candidates if v >= best_value - TIE_TOL]
    tied.sort(key=lambda c: (abs(c[0]), c[0]))
    return tied[0]


def ml_estimate(
    counts_by_setting,
    models,
    include_cc: bool = True,
    interval: tuple[float, float] = SEARCH_INTERVAL,
    grid: LikelihoodGrid | None = None,
    series_key: tuple = (),
) -> Estimate:
    """Maximum-likelihood phase estimate from one series of counts."""
    if grid is None:
        grid = likelihood_grid(models, include_cc=include_cc, interval=interval)
    counts_rows = {}
    n_coinc = 0
    for setting, kept in grid.labels.items():
        counts = counts_by_setting.get(setting, {})
        vec = np.array([float(counts.get(label, 0)) for label in kept])
        counts_rows[setting] = vec[None, :]
        n_coinc += int(vec.sum())
    if n_coinc == 0:
        raise DegenerateLikelihoodError("no registered coincidences")
    row = _loglik_rows(grid, counts_rows)[0]
    phi_hat, lmax = _best_phi(grid.phis, row, grid.step)
    return Estimate(
        phi_hat=phi_hat, log_likelihood_max=lmax, n_coincidences=n_coinc, series_key=tuple(series_key)
    )


def _series_groups(records) -> dict[tuple, dict[Setting, EventRecord]]:
    groups: dict[tuple, dict[Setting, EventRecord]] = {}
    for rec in records:
        key = (rec.eta, rec.probe, rec.phi_true, rec.series_id)
        groups.setdefault(key, {})[rec.setting] = rec
    return groups


def estimate_dataset(dataset: EventDataset, include_cc: bool = True) -> list[Estimate]:
    """Maximum-likelihood estimates for every series of a simulated campaign.

    Rebuilds the outcome models from the dataset's configuration and shares
    one likelihood grid per (eta, probe) combination.
    """
    params = dataset.config.imperfections
    grids: dict[tuple, LikelihoodGrid] = {}
    estimates: list[Estimate] = []
    groups = _series_groups(dataset.records)
    for key in groups:
        eta, probe = key[0], key[1]
        model_key = (eta, probe)
        if model_key not in grids:
            models = setting_models(probe, eta, params)
            grids[model_key] = likelihood_grid(models, include_cc=include_cc)
        grid = grids[model_key]
        counts_rows = {}
        n_coinc = 0
        for setting, kept in grid.labels.items():
            rec = groups[key].get(setting)
            counts = rec.counts if rec is not None else {}
            vec = np.array([float(counts.get(label, 0)) for label in kept])
            counts_rows[setting] = vec[None, :]
            n_coinc += int(vec.sum())
        if n_coinc == 0:
            raise DegenerateLikelihoodError(f"series {key} has no registered coincidences")
        row = _loglik_rows(grid, counts_rows)[0]
        phi_hat, lmax = _best_phi(grid.phis, row, grid.step)
        estimates.append(
            Estimate(phi_hat=phi_hat, log_likelihood_max=lmax, n_coincidences=n_coinc, series_key=key)
        )
    return estimates


def analyze(dataset: EventDataset, estimates, include_cc: bool = True) -> list[UncertaintyRow]:
    """Per-(eta, probe, phase) uncertainty report.

    The sample standard deviation is rescaled by the square root of the mean
    number of registered coincidences per series, giving the effective
    uncertainty per photon pair, and compared with 1/sqrt(F).
    """
    del include_cc  # registered counts were fixed when the estimates were made
    by_group: dict[tuple, list[Estimate]] = {}
    for est in estimates:
        eta, probe, phi_true, _ = est.series_key
        by_group.setdefault((eta, probe, phi_true), []).append(est)
    crb_cache: dict[tuple, float] = {}
    rows = []
    for (eta, probe, phi_true), group in by_group.items():
        if len(group) < 2:
            raise ValueError(f"group (eta={eta}, probe={probe}, phi={phi_true}) has fewer than 2 estimates")
        values = np.array([e.phi_hat for e in group])
        counts = np.array([e.n_coincidences for e in group], dtype=float)
        sigma = float(np.std(values, ddof=1))
        m_bar = float(counts.mean())
        if (eta, probe) not in crb_cache:
            crb_cache[(eta, probe)] = 1.0 / math.sqrt(qfi_lossy(probe_weights(probe, eta), eta))
        rows.append(
            UncertaintyRow(
                eta=eta,
                probe=probe,
                phi_true=phi_true,
                mean=float(values.mean()),
                sigma=sigma,
                m_bar=m_bar,
                sigma_scaled=sigma * math.sqrt(m_bar),
                crb=crb_cache[(eta, probe)],
            )
        )
    return rows


def histogram(estimates, bin_width: float, bounds: tuple[float, float] | None = None):
    """Fixed-width binning of phase estimates, left-closed right-open bins.

    Bin edges are anchored at integer multiples of the width, so boundaries do
    not depend on sample order. Returns (edges, counts).
    """
    if bin_width <= 0.0:
        raise ValueError("bin width must be positive")
    values = np.array(
        [e.phi_hat if isinstance(e, Estimate) else float(e) for e in estimates], dtype=float
    )
    if values.size == 0:
        raise ValueError("cannot histogram an empty set of estimates")
    if bounds is None:
        lo = math.floor(values.min() / bin_width) * bin_width
        hi = math.ceil(values.max() / bin_width + 1e-9) * bin_width
        if hi <= lo:
            hi = lo + bin_width
    else:
        lo, hi = bounds
    n_bins = max(int(round((hi - lo) / bin_width)), 1)
    edges = lo + bin_width * np.arange(n_bins + 1)
    idx = np.floor((values - lo) / bin_width).astype(int)
    keep = (idx >= 0) & (idx < n_bins)
    counts = np.bincount(idx[keep], minlength=n_bins)
    return edges, counts
