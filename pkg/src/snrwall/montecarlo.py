"""Seeded Monte Carlo engine for MME statistics under H0 and H1.

Every instance draws from its own generator, seeded by
:func:`instance_seed` from ``(master seed, hypothesis, N, snr index,
instance index)`` through :class:`numpy.random.SeedSequence`. Results are
therefore independent of execution order and of the number of workers.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .detector import Hypothesis, mme_from_block
from .model import SampleBlock, SignalModelParams, generate_bpsk_signal
from .noise import NoiseModel

__all__ = [
    "TABLE_LENGTHS",
    "ScenarioConfig",
    "StatisticSample",
    "HistogramSummary",
    "WallSearchResult",
    "instance_seed",
    "run_scenario",
    "group_cells",
    "summarize",
    "empirical_wall_search",
    "write_samples_csv",
    "write_summaries",
    "fig2_config",
    "fig3_config",
    "desk_lengths",
]

TABLE_LENGTHS = (999, 9999, 999999)
_HYP_CODE = {Hypothesis.H0: 0, Hypothesis.H1: 1}


@dataclass(frozen=True)
class ScenarioConfig:
    receivers: int
    smoothing: int
    oversampling: int
    lengths: tuple[int, ...]
    snr_db: tuple[float, ...]
    h0_noise: NoiseModel
    h1_noise: NoiseModel = field(default_factory=NoiseModel.white)
    instances: int = 2000
    bins: int = 12
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(int(n) for n in self.lengths))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        SignalModelParams(self.oversampling, 1.0, self.receivers, self.smoothing)
        if self.instances < 1:
            raise ValueError("instances must be at least 1")
        if self.bins < 2:
            raise ValueError("need at least 2 histogram bins")
        if not self.lengths:
            raise ValueError("need at least one sample count N")
        for n in self.lengths:
            if n <= self.smoothing:
                raise ValueError(f"every N must exceed Q={self.smoothing}, got {n}")
        if self.seed < 0:
            raise ValueError("master seed must be nonnegative")
        if not math.isclose(self.h0_noise.variance, self.h1_noise.variance, rel_tol=1e-12):
            raise ValueError("H0 and H1 noise must have the same variance")
        for model in (self.h0_noise, self.h1_noise):
            if model.kind == "receiver_correlated" and model.target.shape[0] != self.receivers:
                raise ValueError("coloring target dimension must equal the number of receivers")

    @property
    def noise_variance(self) -> float:
        return self.h1_noise.variance


@dataclass(frozen=True)
class StatisticSample:
    hypothesis: Hypothesis
    snr_db: float | None
    length: int
    instance: int
    statistic: float
    seed: int


@dataclass(frozen=True)
class HistogramSummary:
    edges: np.ndarray
    counts: np.ndarray
    median: float
    mean: float
    count: int
    sentinels: int
    quartiles: tuple[float, float]

    @property
    def iqr(self) -> float:
        return self.quartiles[1] - self.quartiles[0]

    def to_dict(self) -> dict:
        return {
            "median": self.median,
            "mean": self.mean,
            "count": self.count,
            "sentinels": self.sentinels,
            "q1": self.quartiles[0],
            "q3": self.quartiles[1],
        }


@dataclass(frozen=True)
class WallSearchResult:
    """Medians at the largest N and the bracketing dB pair, if any."""

    length: int
    median_h0: float
    medians_h1: dict[float, float]
    interval: tuple[float, float] | None

    def to_dict(self) -> dict:
        return {
            "N": self.length,
            "median_h0": self.median_h0,
            "medians_h1": [{"snr_db": s, "median": m} for s, m in self.medians_h1.items()],
            "crossing": None if self.interval is None else {"hi_db": self.interval[0], "lo_db": self.interval[1]},
        }


def instance_seed(master: int, hypothesis: Hypothesis, length: int, snr_index: int, instance: int) -> int:
    """64-bit seed for one Monte Carlo instance; H0 uses snr index 0."""
    ss = np.random.SeedSequence(master, spawn_key=(_HYP_CODE[Hypothesis(hypothesis)], length, snr_index, instance))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)


def _one_statistic(config: ScenarioConfig, hypothesis: Hypothesis, length: int, snr_db, seed: int) -> float:
    rng = np.random.default_rng(seed)
    p = config.receivers
    if hypothesis is Hypothesis.H0:
        x = config.h0_noise.generate(p, length, seed=rng)
    else:
        power = 10.0 ** (snr_db / 10.0) * config.noise_variance
        params = SignalModelParams(config.oversampling, power)
        symbols = -(-length // config.oversampling) + 1
        s = generate_bpsk_signal(symbols, params, seed=rng)[:length]
        x = config.h1_noise.generate(p, length, seed=rng) + s[np.newaxis, :]
    return mme_from_block(SampleBlock(x), config.smoothing)


def _run_batch(config, jobs):
    return [_one_statistic(config, h, n, s, seed) for h, n, s, seed in jobs]


def _cells(config: ScenarioConfig):
    for n in config.lengths:
        yield Hypothesis.H0, n, None, 0
        for k, s in enumerate(config.snr_db):
            yield Hypothesis.H1, n, s, k


def run_scenario(config: ScenarioConfig, workers: int = 1) -> list[StatisticSample]:
    """Sample the statistic ``instances`` times per (N, hypothesis, SNR) cell.

    H0 instances use ``h0_noise`` only; H1 instances add BPSK at the cell's
    SNR to ``h1_noise``. With ``workers > 1`` instances are spread over
    processes; the output is identical either way.
    """
    meta = []
    for hyp, n, s, k in _cells(config):
        for i in range(config.instances):
            meta.append((hyp, n, s, i, instance_seed(config.seed, hyp, n, k, i)))
    jobs = [(h, n, s, seed) for h, n, s, _, seed in meta]
    try:
        if workers > 1 and len(jobs) > 1:
            chunk = max(1, len(jobs) // (4 * workers))
            batches = [jobs[i : i + chunk] for i in range(0, len(jobs), chunk)]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                values = [v for part in pool.map(_run_batch, [config] * len(batches), batches) for v in part]
        else:
            values = _run_batch(config, jobs)
    except ValueError as exc:
        raise ValueError(
            f"scenario p={config.receivers}, Q={config.smoothing}, h0={config.h0_noise.kind}: {exc}"
        ) from exc
    return [StatisticSample(h, s, n, i, float(v), seed) for (h, n, s, i, seed), v in zip(meta, values)]


def group_cells(samples) -> dict[tuple[Hypothesis, int, float | None], np.ndarray]:
    """Statistic values keyed by (hypothesis, N, snr_db), instances in order."""
    cells: dict = {}
    for smp in sorted(samples, key=lambda x: x.instance):
        cells.setdefault((smp.hypothesis, smp.length, smp.snr_db), []).append(smp.statistic)
    return {k: np.asarray(v) for k, v in cells.items()}


def summarize(samples, bins: int = 12) -> HistogramSummary:
    """Equal-width histogram over the finite values plus median and mean.

    Sentinel (infinite) statistics are counted separately and left out of the
    bins and the mean, but take part in the median as +inf. A single-valued
    sample gets edges widened by 1e-9 relative.
    """
    values = np.asarray([s.statistic if isinstance(s, StatisticSample) else s for s in samples], dtype=float)
    if values.size == 0:
        raise ValueError("cannot summarize an empty cell")
    if bins < 2:
        raise ValueError("need at least 2 bins")
    finite = values[np.isfinite(values)]
    sentinels = int(values.size - finite.size)
    median = float(np.median(values))
    if finite.size == 0:
        nan = float("nan")
        return HistogramSummary(np.array([]), np.zeros(0, dtype=int), median, nan, int(values.size), sentinels, (nan, nan))
    lo, hi = float(finite.min()), float(finite.max())
    if lo == hi:
        pad = 1e-9 * max(abs(lo), 1.0)
        lo, hi = lo - pad, hi + pad
    counts, edges = np.histogram(finite, bins=bins, range=(lo, hi))
    q1, q3 = np.percentile(finite, [25, 75])
    return HistogramSummary(edges, counts, median, float(finite.mean()), int(values.size), sentinels, (float(q1), float(q3)))


def empirical_wall_search(config: ScenarioConfig, grid, workers: int = 1) -> WallSearchResult:
    """Locate where the median H1 statistic drops below the median H0 statistic.

    Only the largest N of ``config`` is simulated, with ``grid`` (dB,
    descending) as the H1 SNRs. The result brackets the first consecutive
    pair (hi, lo) with ``median_H1(hi) >= median_H0 > median_H1(lo)``.
    """
    grid = [float(g) for g in grid]
    if len(grid) < 2:
        raise ValueError("SNR grid needs at least two points")
    if any(a <= b for a, b in zip(grid, grid[1:])):
        raise ValueError("SNR grid must be strictly descending")
    n = max(config.lengths)
    run = replace(config, lengths=(n,), snr_db=tuple(grid))
    cells = group_cells(run_scenario(run, workers=workers))
    med0 = float(np.median(cells[(Hypothesis.H0, n, None)]))
    med1 = {s: float(np.median(cells[(Hypothesis.H1, n, s)])) for s in grid}
    interval = None
    for hi, lo in zip(grid, grid[1:]):
        if med1[hi] >= med0 and med1[lo] < med0:
            interval = (hi, lo)
            break
    return WallSearchResult(n, med0, med1, interval)


def _fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def write_samples_csv(path, samples) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hypothesis", "snr_db", "N", "instance", "statistic"])
        for s in samples:
            w.writerow([s.hypothesis.value, _fmt(s.snr_db), s.length, s.instance, _fmt(s.statistic)])


def _cell_name(hyp, n, snr):
    name = f"hist_{hyp.value}_N{n}"
    return name if snr is None else f"{name}_snr{snr:g}dB"


def write_summaries(outdir, samples, bins: int) -> dict:
    """One histogram CSV per cell plus ``summary.json``; returns the JSON record."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    records = []
    for (hyp, n, snr), values in group_cells(samples).items():
        summ = summarize(values, bins)
        name = _cell_name(hyp, n, snr)
        with open(outdir / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "count"])
            for left, right, c in zip(summ.edges[:-1], summ.edges[1:], summ.counts):
                w.writerow([_fmt(left), _fmt(right), int(c)])
        records.append({"hypothesis": hyp.value, "snr_db": snr, "N": n, "histogram": f"{name}.csv", **summ.to_dict()})
    doc = {"cells": records}
    with open(outdir / "summary.json", "w") as fh:
        json.dump(doc, fh, indent=2, allow_nan=True)
    return doc


def desk_lengths(n_max: int | None) -> tuple[int, ...]:
    """Table sample counts, with any count above ``n_max`` replaced by the
    largest ``10**k - 1`` not exceeding it (99999 for ``n_max = 10**5``)."""
    if n_max is None:
        return TABLE_LENGTHS
    cap = 10 ** int(math.floor(math.log10(n_max + 1))) - 1
    return tuple(sorted({n if n <= n_max else cap for n in TABLE_LENGTHS}))


def fig2_config(n_max: int | None = 100_000, instances: int = 2000, seed: int = 0) -> ScenarioConfig:
    """Two receivers, Q=0, noise correlation 0.05 under H0; SNR -10 ... -15 dB."""
    return ScenarioConfig(
        receivers=2,
        smoothing=0,
        oversampling=4,
        lengths=desk_lengths(n_max),
        snr_db=tuple(range(-10, -16, -1)),
        h0_noise=NoiseModel.two_receiver(0.05),
        instances=instances,
        bins=12,
        seed=seed,
    )


def fig3_config(n_max: int | None = 100_000, instances: int = 2000, seed: int = 0) -> ScenarioConfig:
    """One receiver, Q=4, AR(1) noise with a=0.1 under H0; SNR -6 ... -10 dB."""
    return ScenarioConfig(
        receivers=1,
        smoothing=4,
        oversampling=4,
        lengths=desk_lengths(n_max),
        snr_db=tuple(range(-6, -11, -1)),
        h0_noise=NoiseModel.ar1(0.1),
        instances=instances,
        bins=12,
        seed=seed,
    )


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))
