"""Monte Carlo ensembles over a shared field, reproducible by construction.

Path k draws its Wiener increments from ``wiener_path(derive_seed(master, k))``,
so the ensemble is a pure function of the spec.  Paths are processed in fixed
chunks of ``CHUNK_SIZE`` (worker threads only decide how many chunks run
concurrently), statistics are accumulated per chunk and combined in chunk
order, and all per-path arithmetic is elementwise: results are bit-identical
for any worker count, and identical to integrating each path by itself.

Statistics stream through constant-memory accumulators by default; full
trajectory retention is opt-in and meant for small ensembles.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Dict, Optional

import numpy as np

from .sde import StratonovichField, Trajectory, derive_seed, heun_step, integrate, wiener_path

CHUNK_SIZE = 8192


class EmptyEnsemble(ValueError):
    """No successful paths to reduce."""


@dataclass(frozen=True)
class EnsembleSpec:
    """Everything an ensemble run depends on.

    ``functionals`` maps names to batched state functionals
    (states (..., dim) -> (...)).  ``sample_every`` controls the statistics
    grid (must divide n_steps); deviations (max_t |f(t) - f(0)|) are tracked
    at every sampled time.  ``policy`` is 'record-and-continue' (failed paths
    are excluded and counted) or 'abort'.
    """

    field: StratonovichField
    x0: np.ndarray   # shared (dim,) or per-path (n_paths, dim)
    n_paths: int
    n_steps: int
    dt: float
    master_seed: int = 0
    functionals: Dict[str, Callable] = dataclass_field(default_factory=dict)
    sample_every: int = 1
    collect: bool = False
    record_final: bool = True
    policy: str = "record-and-continue"

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.n_steps % self.sample_every != 0:
            raise ValueError("sample_every must divide n_steps")
        if self.policy not in ("record-and-continue", "abort"):
            raise ValueError("policy must be record-and-continue or abort")
        x0 = np.asarray(self.x0, dtype=float)
        if x0.ndim == 2 and x0.shape[0] != self.n_paths:
            raise ValueError("per-path x0 must have n_paths rows")

    def initial_states(self, start: int, stop: int):
        x0 = np.asarray(self.x0, dtype=float)
        if x0.ndim == 1:
            return np.tile(x0, (stop - start, 1))
        return x0[start:stop].copy()


@dataclass
class FunctionalSeries:
    """Per-time mean/variance/min/max of one functional across paths."""

    name: str
    times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    min: np.ndarray
    max: np.ndarray


@dataclass
class EnsembleResult:
    series: Dict[str, FunctionalSeries]
    final_states: Optional[np.ndarray]
    n_paths: int
    n_failed: int
    failed_indices: list
    trajectories: Optional[list]
    max_deviation: Dict[str, float]


class _ChunkStats:
    """Streaming accumulator for one chunk of paths."""

    def __init__(self, names, n_times):
        self.count = 0
        self.sums = {k: np.zeros(n_times) for k in names}
        self.sumsq = {k: np.zeros(n_times) for k in names}
        self.mins = {k: np.full(n_times, np.inf) for k in names}
        self.maxs = {k: np.full(n_times, -np.inf) for k in names}
        self.max_dev = {k: 0.0 for k in names}


def _chunk_indices(n_paths):
    for start in range(0, n_paths, CHUNK_SIZE):
        yield start, min(start + CHUNK_SIZE, n_paths)


def _draw_increments(spec, start, stop):
    b = stop - start
    out = np.empty((spec.n_steps, b, spec.field.channels))
    for i in range(b):
        path = wiener_path(derive_seed(spec.master_seed, start + i),
                           spec.n_steps, spec.dt, spec.field.channels)
        out[:, i, :] = path.increments
    return out


def _sample_into(stats, names, fns, states, t_index):
    for name in names:
        vals = np.asarray(fns[name](states), dtype=float)
        stats.sums[name][t_index] += vals.sum()
        stats.sumsq[name][t_index] += (vals * vals).sum()
        stats.mins[name][t_index] = min(stats.mins[name][t_index], vals.min())
        stats.maxs[name][t_index] = max(stats.maxs[name][t_index], vals.max())


def _run_chunk(spec: EnsembleSpec, start: int, stop: int):
    """Integrate one chunk batched; fall back to per-path on failure."""
    names = list(spec.functionals)
    n_times = spec.n_steps // spec.sample_every + 1
    stats = _ChunkStats(names, n_times)
    inc = _draw_increments(spec, start, stop)
    b = stop - start
    x = spec.initial_states(start, stop)
    scalar = spec.field.channels == 1
    trajectories = [] if spec.collect else None
    collected = np.empty((n_times, b, spec.field.dim)) if spec.collect else None

    f0 = {name: np.asarray(spec.functionals[name](x), dtype=float) for name in names}
    dev = {name: np.zeros(b) for name in names}
    failed = []
    try:
        _sample_into(stats, names, spec.functionals, x, 0)
        if spec.collect:
            collected[0] = x
        t_index = 1
        for k in range(spec.n_steps):
            dw = inc[k, :, 0] if scalar else inc[k]
            x = heun_step(spec.field, x, spec.dt, dw)
            if (k + 1) % spec.sample_every == 0:
                _sample_into(stats, names, spec.functionals, x, t_index)
                for name in names:
                    vals = np.asarray(spec.functionals[name](x), dtype=float)
                    dev[name] = np.maximum(dev[name], np.abs(vals - f0[name]))
                if spec.collect:
                    collected[t_index] = x
                t_index += 1
        stats.count = b
        for name in names:
            stats.max_dev[name] = float(dev[name].max()) if b else 0.0
        finals = x
    except Exception:
        if spec.policy == "abort":
            raise
        return _run_chunk_pathwise(spec, start, stop)

    if spec.collect:
        times = spec.dt * spec.sample_every * np.arange(n_times)
        for i in range(b):
            trajectories.append(Trajectory(
                times=times.copy(), states=collected[:, i, :].copy(),
                meta={"seed": derive_seed(spec.master_seed, start + i),
                      "dt": spec.dt, "stride": spec.sample_every,
                      "system": spec.field.tag},
            ))
    return stats, finals, failed, trajectories


def _run_chunk_pathwise(spec: EnsembleSpec, start: int, stop: int):
    """Per-path retry used when a batched chunk hits a numerical failure."""
    names = list(spec.functionals)
    n_times = spec.n_steps // spec.sample_every + 1
    stats = _ChunkStats(names, n_times)
    finals, failed = [], []
    trajectories = [] if spec.collect else None
    for idx in range(start, stop):
        path = wiener_path(derive_seed(spec.master_seed, idx),
                           spec.n_steps, spec.dt, spec.field.channels)
        x0 = spec.initial_states(idx, idx + 1)[0]
        try:
            traj = integrate(spec.field, x0, path, stride=spec.sample_every)
        except Exception:
            failed.append(idx)
            continue
        stats.count += 1
        for name in names:
            vals = np.asarray(spec.functionals[name](traj.states), dtype=float)
            stats.sums[name] += vals
            stats.sumsq[name] += vals * vals
            stats.mins[name] = np.minimum(stats.mins[name], vals)
            stats.maxs[name] = np.maximum(stats.maxs[name], vals)
            stats.max_dev[name] = max(stats.max_dev[name],
                                      float(np.abs(vals - vals[0]).max()))
        finals.append(traj.states[-1])
        if spec.collect:
            trajectories.append(traj)
    finals = np.array(finals) if finals else np.empty((0, spec.field.dim))
    return stats, finals, failed, trajectories


def run_ensemble(spec: EnsembleSpec, workers: int = 1) -> EnsembleResult:
    """Run all paths and reduce statistics; deterministic for any ``workers``."""
    chunks = list(_chunk_indices(spec.n_paths))
    results = [None] * len(chunks)

    def work(i):
        results[i] = _run_chunk(spec, *chunks[i])

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(len(chunks))))
    else:
        for i in range(len(chunks)):
            work(i)

    names = list(spec.functionals)
    n_times = spec.n_steps // spec.sample_every + 1
    total = _ChunkStats(names, n_times)
    all_finals, all_failed, all_traj = [], [], ([] if spec.collect else None)
    for stats, finals, failed, trajectories in results:
        total.count += stats.count
        for name in names:
            total.sums[name] += stats.sums[name]
            total.sumsq[name] += stats.sumsq[name]
            total.mins[name] = np.minimum(total.mins[name], stats.mins[name])
            total.maxs[name] = np.maximum(total.maxs[name], stats.maxs[name])
            total.max_dev[name] = max(total.max_dev[name], stats.max_dev[name])
        if len(finals):
            all_finals.append(finals)
        all_failed.extend(failed)
        if spec.collect:
            all_traj.extend(trajectories)

    if total.count == 0:
        raise EmptyEnsemble("all %d paths failed" % spec.n_paths)

    times = spec.dt * spec.sample_every * np.arange(n_times)
    series = {}
    for name in names:
        mean = total.sums[name] / total.count
        variance = np.maximum(total.sumsq[name] / total.count - mean * mean, 0.0)
        series[name] = FunctionalSeries(name=name, times=times, mean=mean,
                                        variance=variance, min=total.mins[name],
                                        max=total.maxs[name])
    final_states = np.concatenate(all_finals) if (spec.record_final and all_finals) else None
    return EnsembleResult(series=series, final_states=final_states,
                          n_paths=spec.n_paths, n_failed=len(all_failed),
                          failed_indices=sorted(all_failed),
                          trajectories=all_traj,
                          max_deviation=dict(total.max_dev))


def functional_stats(trajectories, functional: Callable, name: str = "functional") -> FunctionalSeries:
    """Exact sample moments of a functional over retained trajectories.

    All trajectories must share one time grid.  Moments are population
    moments (ddof = 0).
    """
    if not trajectories:
        raise EmptyEnsemble("no trajectories supplied")
    times = trajectories[0].times
    for traj in trajectories[1:]:
        if traj.states.shape != trajectories[0].states.shape or \
                not np.array_equal(traj.times, times):
            raise ValueError("trajectories do not share a time grid")
    vals = np.stack([np.asarray(functional(traj.states), dtype=float)
                     for traj in trajectories])
    return FunctionalSeries(
        name=name, times=times.copy(), mean=vals.mean(axis=0),
        variance=vals.var(axis=0), min=vals.min(axis=0), max=vals.max(axis=0),
    )


def histogram(final_states, coordinates, grid):
    """Normalized density of selected state coordinates on an FPGrid.

    ``coordinates`` are the state-vector indices to bin (length = grid.dims).
    """
    from .fokker_planck import histogram_density

    final_states = np.asarray(final_states, dtype=float)
    if final_states.size == 0:
        raise EmptyEnsemble("no final states to bin")
    pts = final_states[:, list(coordinates)]
    return histogram_density(pts, grid)


def ou_variance(theta: float, sigma0: float, t):
    """Stationary-approach variance of the OU process, sigma0^2 (1 - e^{-2 theta t}) / (2 theta)."""
    return sigma0 ** 2 / (2.0 * theta) * (1.0 - np.exp(-2.0 * theta * np.asarray(t, dtype=float)))
