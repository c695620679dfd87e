"""Trajectory integration, Lyapunov descent checks, Euler-Maruyama
ensembles, and the small-noise stationary-distribution potential."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .fields import VectorField, eval_field, fd_step

BURN_IN_FRACTION = 0.2


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)
    dt: float
    completed: bool = True  # False when a non-finite state cut it short

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")


@dataclass(frozen=True)
class TrajectoryEnsemble:
    trajectories: list
    seeds: list
    noise_eps: float


@dataclass(frozen=True)
class DensityGrid:
    edges: list  # per-axis bin edges
    counts: np.ndarray
    total: int  # in-range samples; counts.sum() == total
    n_clipped: int = 0

    def centers(self, axis: int) -> np.ndarray:
        e = self.edges[axis]
        return 0.5 * (e[:-1] + e[1:])


@dataclass(frozen=True)
class LyapunovReport:
    max_increase: float
    monotone: bool


def integrate_rk4(field: VectorField, x0, dt: float, steps: int) -> Trajectory:
    """Classical fourth-order Runge-Kutta for xdot = g(x)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    x = np.asarray(x0, dtype=float).copy()
    states = [x.copy()]
    completed = True
    for _ in range(steps):
        try:
            k1 = eval_field(field, x)
            k2 = eval_field(field, x + 0.5 * dt * k1)
            k3 = eval_field(field, x + 0.5 * dt * k2)
            k4 = eval_field(field, x + dt * k3)
        except Exception:
            completed = False
            break
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            completed = False
            break
        states.append(x.copy())
    states = np.array(states)
    times = dt * np.arange(len(states))
    return Trajectory(times=times, states=states, dt=dt, completed=completed)


def lyapunov_check(V: Callable[[np.ndarray], float], traj: Trajectory,
                   tol_scale: float = 10.0) -> LyapunovReport:
    """Largest per-step increase of V along the trajectory; monotone when
    it stays below tol_scale * dt**2 (integrator-error allowance)."""
    vals = np.array([V(x) for x in traj.states])
    if len(vals) < 2:
        return LyapunovReport(max_increase=0.0, monotone=True)
    max_inc = float(np.max(np.diff(vals)))
    scale = 1.0 + float(np.max(np.abs(vals)))
    return LyapunovReport(max_increase=max_inc,
                          monotone=max_inc <= tol_scale * traj.dt ** 2 * scale)


def orthogonality_residual(field: VectorField, V, S, x) -> float:
    """(f + S grad V)^T grad V with a finite-difference gradient of V."""
    x = np.asarray(x, dtype=float)
    S = np.asarray(S, dtype=float)
    f = eval_field(field, x)
    h = fd_step(x)
    grad = np.empty(field.dim)
    for i in range(field.dim):
        e = np.zeros(field.dim)
        e[i] = h[i]
        grad[i] = (V(x + e) - V(x - e)) / (2.0 * h[i])
    return float((f + S @ grad) @ grad)


def _trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    # counter-based Philox streams: index in the high counter word gives
    # disjoint 2^128-draw blocks per trajectory
    return np.random.Generator(
        np.random.Philox(key=master_seed, counter=[0, 0, index, 0]))


def euler_maruyama(field: VectorField, eps: float, x0, dt: float,
                   steps: int, seed: int = 0,
                   rng: Optional[np.random.Generator] = None) -> Trajectory:
    """x_{k+1} = x_k + dt g(x_k) + sqrt(2 eps dt) N(0, I).

    The noise convention matches <z z'> = 2 eps delta(t - t'); eps = 0
    reduces exactly to forward Euler.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if rng is None:
        rng = _trajectory_rng(seed, 0)
    x = np.asarray(x0, dtype=float).copy()
    n = x.size
    sigma = np.sqrt(2.0 * eps * dt)
    noise = rng.standard_normal((steps, n)) if eps > 0 else None
    states = np.empty((steps + 1, n))
    states[0] = x
    completed = True
    count = 1
    for k in range(steps):
        try:
            drift = eval_field(field, x)
        except Exception:
            completed = False
            break
        x = x + dt * drift
        if noise is not None:
            x = x + sigma * noise[k]
        if not np.all(np.isfinite(x)):
            completed = False
            break
        states[count] = x
        count += 1
    states = states[:count]
    times = dt * np.arange(count)
    return Trajectory(times=times, states=states, dt=dt, completed=completed)


def euler_maruyama_ensemble(field: VectorField, eps: float, x0s, dt: float,
                            steps: int, master_seed: int = 0
                            ) -> TrajectoryEnsemble:
    """Independent trajectories with per-index counter-based RNG streams."""
    x0s = np.atleast_2d(np.asarray(x0s, dtype=float))
    trajectories = []
    seeds = []
    for idx, x0 in enumerate(x0s):
        rng = _trajectory_rng(master_seed, idx)
        trajectories.append(
            euler_maruyama(field, eps, x0, dt, steps, rng=rng))
        seeds.append((master_seed, idx))
    return TrajectoryEnsemble(trajectories=trajectories, seeds=seeds,
                              noise_eps=eps)


def stationary_density(ens: TrajectoryEnsemble, bins, ranges,
                       burn_in: Optional[int] = None) -> DensityGrid:
    """Histogram of post-burn-in states (default burn-in: first 20%)."""
    chunks = []
    n_raw = 0
    for traj in ens.trajectories:
        cut = burn_in if burn_in is not None \
            else int(BURN_IN_FRACTION * len(traj.states))
        if cut >= len(traj.states):
            continue
        chunks.append(traj.states[cut:])
        n_raw += len(traj.states) - cut
    if not chunks:
        raise ValueError("no post-burn-in samples")
    data = np.vstack(chunks)
    counts, edges = np.histogramdd(data, bins=bins, range=ranges)
    counts = counts.astype(np.int64)
    total = int(counts.sum())
    if total == 0:
        raise ValueError("all samples fall outside the grid ranges")
    return DensityGrid(edges=[np.asarray(e) for e in edges], counts=counts,
                       total=total, n_clipped=n_raw - total)


def graham_estimate(density: DensityGrid, eps: float) -> np.ndarray:
    """-eps * log of the normalized cell frequency, min-shifted to 0.

    Empty cells are masked with NaN rather than infinite potential.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    counts = density.counts
    if density.total == 0 or np.all(counts == 0):
        raise ValueError("density grid is empty")
    with np.errstate(divide="ignore"):
        V = -eps * np.log(counts / density.total)
    V[counts == 0] = np.nan
    return V - np.nanmin(V)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Columns t, x_1..x_N, one row per stored state."""
    path = Path(path)
    dim = traj.states.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x_{i + 1}" for i in range(dim)])
        for t, x in zip(traj.times, traj.states):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in x])
