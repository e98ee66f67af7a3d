"""Toy latent-diffusion numerics: schedules, steps, sampling, inversion.

Latents are float64 numpy arrays of shape (C, H, W).  Noise predictors
are plain callables ``predictor(x, t, condition) -> eps``; closed-form
predictors for simple data distributions stand in for a trained net,
which keeps every downstream behavior exactly testable.  Every step
checks its output for NaN/Inf so numerical garbage never propagates
silently.

Timestep convention: ``t`` runs from 0 (clean data) to ``timesteps``
(pure noise); ``alpha_bar(0) == 1`` by definition, so predictors are
never evaluated at t=0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import BoundingBox

__all__ = [
    "NoiseSchedule",
    "make_schedule",
    "forward_diffuse",
    "ddpm_loss",
    "ddpm_step",
    "ddim_step",
    "sampling_grid",
    "Trajectory",
    "ddim_sample",
    "ddim_invert",
    "make_analytic_predictor",
    "make_gaussian_predictor",
    "ObjectTerm",
    "Condition",
    "save_trajectory",
    "load_trajectory",
    "save_latent",
    "load_latent",
]

DEFAULT_TIMESTEPS = 1000
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 0.02


def _check_finite(array: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{what} contains non-finite values")
    return array


def _as_latent(value) -> np.ndarray:
    array = np.asarray(value, dtype=np.float64)
    return _check_finite(array, "latent")


@dataclass(frozen=True)
class NoiseSchedule:
    """Variance schedule: per-step betas and their running products."""

    timesteps: int
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray

    def alpha_bar(self, t: int) -> float:
        """Cumulative signal fraction at step t, with alpha_bar(0) = 1."""
        if not 0 <= t <= self.timesteps:
            raise ValueError(f"t must be in [0, {self.timesteps}], got {t}")
        if t == 0:
            return 1.0
        return float(self.alpha_bars[t - 1])


def make_schedule(
    timesteps: int = DEFAULT_TIMESTEPS,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
) -> NoiseSchedule:
    """Linear beta schedule over ``timesteps`` steps."""
    if timesteps < 1:
        raise ValueError(f"timesteps must be >= 1, got {timesteps}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ValueError(f"need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}")
    betas = np.linspace(beta_start, beta_end, timesteps)
    alphas = 1.0 - betas
    alpha_bars = np.cumprod(alphas)
    for array in (betas, alphas, alpha_bars):
        array.setflags(write=False)
    return NoiseSchedule(timesteps, betas, alphas, alpha_bars)


def forward_diffuse(x0, t: int, schedule: NoiseSchedule, noise) -> np.ndarray:
    """Jump straight to noise level t: sqrt(ab)*x0 + sqrt(1-ab)*noise."""
    x0 = _as_latent(x0)
    noise = _as_latent(noise)
    if x0.shape != noise.shape:
        raise ValueError(f"shape mismatch: {x0.shape} vs {noise.shape}")
    if not 1 <= t <= schedule.timesteps:
        raise ValueError(f"t must be in [1, {schedule.timesteps}], got {t}")
    ab = schedule.alpha_bar(t)
    return _check_finite(math.sqrt(ab) * x0 + math.sqrt(1.0 - ab) * noise, "diffused latent")


def ddpm_loss(noise, predicted) -> float:
    """Squared L2 between injected and predicted noise."""
    noise = np.asarray(noise, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if noise.shape != predicted.shape:
        raise ValueError(f"shape mismatch: {noise.shape} vs {predicted.shape}")
    return float(np.sum((noise - predicted) ** 2))


def ddpm_step(x_t, t: int, schedule: NoiseSchedule, predictor, condition, z) -> np.ndarray:
    """One stochastic denoising step from t to t-1.

    ``z`` is the fresh Gaussian draw; by convention the caller passes
    zeros at t=1 so the final step is deterministic.
    """
    x_t = _as_latent(x_t)
    z = _as_latent(z)
    if not 1 <= t <= schedule.timesteps:
        raise ValueError(f"t must be in [1, {schedule.timesteps}], got {t}")
    if x_t.shape != z.shape:
        raise ValueError(f"shape mismatch: {x_t.shape} vs {z.shape}")
    beta = float(schedule.betas[t - 1])
    alpha = float(schedule.alphas[t - 1])
    ab = schedule.alpha_bar(t)
    eps = _as_latent(predictor(x_t, t, condition))
    mean = (x_t - (beta / math.sqrt(1.0 - ab)) * eps) / math.sqrt(alpha)
    return _check_finite(mean + math.sqrt(beta) * z, "denoised latent")


def _ddim_jump(x, eps, ab_from: float, ab_to: float) -> np.ndarray:
    """Deterministic update between two noise levels given eps at x."""
    x0_pred = (x - math.sqrt(1.0 - ab_from) * eps) / math.sqrt(ab_from)
    return math.sqrt(ab_to) * x0_pred + math.sqrt(1.0 - ab_to) * eps


def ddim_step(x_t, t_from: int, t_to: int, schedule: NoiseSchedule, predictor, condition) -> np.ndarray:
    """One deterministic denoising jump from t_from down to t_to."""
    x_t = _as_latent(x_t)
    if not 0 <= t_to < t_from <= schedule.timesteps:
        raise ValueError(
            f"need timesteps >= t_from > t_to >= 0, got t_from={t_from}, t_to={t_to}"
        )
    eps = _as_latent(predictor(x_t, t_from, condition))
    out = _ddim_jump(x_t, eps, schedule.alpha_bar(t_from), schedule.alpha_bar(t_to))
    return _check_finite(out, "denoised latent")


def sampling_grid(timesteps: int, n_steps: int) -> tuple[int, ...]:
    """Evenly spaced integer grid from ``timesteps`` down to 0."""
    if not 1 <= n_steps <= timesteps:
        raise ValueError(f"n_steps must be in [1, {timesteps}], got {n_steps}")
    grid = np.linspace(timesteps, 0, n_steps + 1).round().astype(int)
    return tuple(int(t) for t in grid)


@dataclass(frozen=True)
class Trajectory:
    """Latents visited along a sampling or inversion path.

    ``steps`` ascends from 0, and ``latents[i]`` is the latent at noise
    level ``steps[i]``; index 0 is always the clean end of the path.
    """

    steps: tuple[int, ...]
    latents: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.steps) != len(self.latents):
            raise ValueError("steps and latents must have equal length")
        if list(self.steps) != sorted(set(self.steps)):
            raise ValueError("steps must be strictly ascending")

    def __len__(self) -> int:
        return len(self.steps)

    def latent_at(self, t: int) -> np.ndarray:
        try:
            return self.latents[self.steps.index(t)]
        except ValueError:
            raise KeyError(f"trajectory has no latent at step {t}") from None


def _freeze(arrays) -> tuple[np.ndarray, ...]:
    out = []
    for a in arrays:
        a = np.array(a, dtype=np.float64, copy=True)
        a.setflags(write=False)
        out.append(a)
    return tuple(out)


def ddim_sample(x_T, schedule: NoiseSchedule, predictor, condition, n_steps: int) -> Trajectory:
    """Deterministically denoise from pure noise, recording every visit."""
    x = _as_latent(x_T)
    grid = sampling_grid(schedule.timesteps, n_steps)
    visited = [x]
    for t_from, t_to in zip(grid[:-1], grid[1:]):
        x = ddim_step(x, t_from, t_to, schedule, predictor, condition)
        visited.append(x)
    return Trajectory(tuple(reversed(grid)), _freeze(reversed(visited)))


def ddim_invert(x0, schedule: NoiseSchedule, predictor, condition, n_steps: int) -> Trajectory:
    """Run the deterministic updates with increasing t to re-noise x0.

    Walks the same grid as :func:`ddim_sample` in reverse, evaluating
    the predictor at the current latent.  The first transition leaves
    t=0, where predictors are undefined (alpha_bar is 1), so that one
    evaluation uses the destination timestep instead.
    """
    x = _as_latent(x0)
    if n_steps == 0:
        return Trajectory((0,), _freeze([x]))
    grid = tuple(reversed(sampling_grid(schedule.timesteps, n_steps)))
    visited = [x]
    for t_lo, t_hi in zip(grid[:-1], grid[1:]):
        t_eval = t_hi if t_lo == 0 else t_lo
        eps = _as_latent(predictor(x, t_eval, condition))
        x = _ddim_jump(x, eps, schedule.alpha_bar(t_lo), schedule.alpha_bar(t_hi))
        _check_finite(x, "inverted latent")
        visited.append(x)
    return Trajectory(grid, _freeze(visited))


def make_analytic_predictor(schedule: NoiseSchedule, target):
    """Exact noise predictor when the data distribution is one image.

    Given x_t on any forward trajectory of ``target``, returns the
    injected noise exactly: eps = (x_t - sqrt(ab)*target)/sqrt(1-ab).
    """
    target = _as_latent(target)

    def predict(x, t, condition=None):
        ab = schedule.alpha_bar(t)
        if not ab < 1.0:
            raise ValueError(f"predictor undefined at t={t} (alpha_bar is 1)")
        return (x - math.sqrt(ab) * target) / math.sqrt(1.0 - ab)

    return predict


def make_gaussian_predictor(schedule: NoiseSchedule, mean, variance):
    """Exact noise predictor for Gaussian data N(mean, variance).

    ``variance`` is a scalar or per-pixel array.  Unlike the
    single-image predictor, the posterior mean here genuinely varies
    with t, so step-count convergence is observable: coarser grids
    give larger sample/inversion error.
    """
    mean = _as_latent(mean)
    variance = np.asarray(variance, dtype=np.float64)
    if np.any(variance <= 0):
        raise ValueError("variance must be positive")

    def predict(x, t, condition=None):
        ab = schedule.alpha_bar(t)
        if not ab < 1.0:
            raise ValueError(f"predictor undefined at t={t} (alpha_bar is 1)")
        root_ab = math.sqrt(ab)
        gain = root_ab * variance / (ab * variance + (1.0 - ab))
        x0_post = mean + gain * (x - root_ab * mean)
        return (x - root_ab * x0_post) / math.sqrt(1.0 - ab)

    return predict


@dataclass(frozen=True)
class ObjectTerm:
    """One boxed object's pull on the composite condition.

    ``attenuation`` is an (H, W) weight grid: 1 inside the box, the
    attenuation factor outside, scaling the object's contribution to
    the blended noise prediction.
    """

    target: np.ndarray
    box: BoundingBox
    attenuation: np.ndarray


@dataclass(frozen=True)
class Condition:
    """A background target image plus any number of boxed object terms."""

    background_target: np.ndarray
    object_terms: tuple[ObjectTerm, ...] = ()


# --- debug dumps ----------------------------------------------------------
#
# Flat binary of little-endian float32 values preceded by a single-line
# JSON header.  Lossy (float64 -> float32) by design; these are
# inspection artifacts, not checkpoints.


def save_trajectory(path, trajectory: Trajectory, seed: int | None = None) -> None:
    shape = trajectory.latents[0].shape
    header = {
        "shape": list(shape),
        "T": int(trajectory.steps[-1]),
        "steps": [int(t) for t in trajectory.steps],
        "seed": seed,
    }
    stacked = np.stack(trajectory.latents).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(stacked.tobytes())


def load_trajectory(path) -> Trajectory:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        data = np.frombuffer(fh.read(), dtype="<f4")
    steps = tuple(int(t) for t in header["steps"])
    shape = tuple(header["shape"])
    latents = data.reshape((len(steps), *shape)).astype(np.float64)
    return Trajectory(steps, _freeze(latents))


def save_latent(path, latent) -> None:
    latent = _as_latent(latent)
    header = {"shape": list(latent.shape)}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(latent.astype("<f4").tobytes())


def load_latent(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        data = np.frombuffer(fh.read(), dtype="<f4")
    return data.reshape(tuple(header["shape"])).astype(np.float64)
