"""Forward/reverse denoising diffusion machinery in signal-prediction form.

The reverse chain consumes clean-signal estimates: a sampler predicts the
denoised signal at each step and the Gaussian posterior produces the next
latent. Guided sampling linearly extrapolates between conditional and
unconditional predictions. All arrays are float64 and all randomness flows
through explicit numpy Generators, so every sampler is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadScheduleError
from .motion import Motion

MAX_BETA = 0.999


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step noise tables, 1-indexed by step (index 0 is a sentinel).

    betas[t] in (0, 1); alpha_bars[t] strictly decreasing with
    alpha_bars[0] = 1; posterior_vars[t] is the fixed reverse-step variance
    (1 - abar_{t-1}) / (1 - abar_t) * beta_t.
    """

    kind: str
    T: int
    betas: np.ndarray
    alpha_bars: np.ndarray
    posterior_vars: np.ndarray

    def __post_init__(self):
        for arr in (self.betas, self.alpha_bars, self.posterior_vars):
            arr.setflags(write=False)


def build_schedule(kind: str = "cosine", T: int = 100) -> NoiseSchedule:
    if T < 2:
        raise BadScheduleError(f"T must be >= 2, got {T}")
    if kind == "linear":
        # scale the classic 1e-4..2e-2 endpoints so the total noise budget is
        # preserved when T deviates from 1000
        scale = 1000.0 / T
        betas = np.linspace(1e-4 * scale, 2e-2 * scale, T)
        betas = np.clip(betas, 0.0, MAX_BETA)
    elif kind == "cosine":
        s = 0.008
        steps = np.arange(T + 1, dtype=np.float64)
        f = np.cos((steps / T + s) / (1.0 + s) * np.pi / 2.0) ** 2
        abar = f / f[0]
        betas = 1.0 - abar[1:] / abar[:-1]
        betas = np.clip(betas, 0.0, MAX_BETA)
    else:
        raise BadScheduleError(f"unknown schedule kind {kind!r}")

    betas = np.concatenate([[0.0], betas])  # 1-indexed
    alpha_bars = np.cumprod(1.0 - betas)
    if not ((betas[1:] > 0).all() and (betas[1:] < 1).all()):
        raise BadScheduleError("betas must lie strictly inside (0, 1)")
    if not (np.diff(alpha_bars) < 0).all():
        raise BadScheduleError("alpha_bar must be strictly decreasing")
    if alpha_bars[-1] >= 0.01:
        raise BadScheduleError(f"terminal alpha_bar {alpha_bars[-1]:.4f} >= 0.01; increase T")
    posterior_vars = np.zeros(T + 1)
    posterior_vars[1:] = (1.0 - alpha_bars[:-1]) / (1.0 - alpha_bars[1:]) * betas[1:]
    return NoiseSchedule(kind=kind, T=T, betas=betas, alpha_bars=alpha_bars, posterior_vars=posterior_vars)


def forward_noise_frames(
    x0: np.ndarray, t: int, schedule: NoiseSchedule, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form forward marginal: x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps."""
    if not 1 <= t <= schedule.T:
        raise ValueError(f"t must be in [1, {schedule.T}], got {t}")
    abar = schedule.alpha_bars[t]
    eps = rng.standard_normal(x0.shape)
    x_t = np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * eps
    return x_t, eps


def forward_noise(x0: Motion, t: int, schedule: NoiseSchedule, seed: int = 0) -> tuple[Motion, np.ndarray]:
    x_t, eps = forward_noise_frames(x0.frames, t, schedule, np.random.default_rng(seed))
    return Motion(frames=x_t, fps=x0.fps, meta=x0.meta), eps


def posterior_step_frames(
    x_t: np.ndarray,
    x0_hat: np.ndarray,
    t: int,
    schedule: NoiseSchedule,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """One reverse-chain step: Gaussian posterior mean around the predicted
    clean signal, plus fixed-variance noise for every step except the last."""
    if not 1 <= t <= schedule.T:
        raise ValueError(f"t must be in [1, {schedule.T}], got {t}")
    abar_t = schedule.alpha_bars[t]
    abar_prev = schedule.alpha_bars[t - 1]
    beta_t = schedule.betas[t]
    coef_x0 = np.sqrt(abar_prev) * beta_t / (1.0 - abar_t)
    coef_xt = np.sqrt(1.0 - beta_t) * (1.0 - abar_prev) / (1.0 - abar_t)
    mean = coef_x0 * x0_hat + coef_xt * x_t
    if t > 1 and rng is not None:
        mean = mean + np.sqrt(schedule.posterior_vars[t]) * rng.standard_normal(x_t.shape)
    return mean


def posterior_step(
    x_t: Motion, x0_hat: Motion, t: int, schedule: NoiseSchedule, seed: int | None = None
) -> Motion:
    rng = None if seed is None else np.random.default_rng(seed)
    frames = posterior_step_frames(x_t.frames, x0_hat.frames, t, schedule, rng)
    return Motion(frames=frames, fps=x_t.fps, meta=x_t.meta)


# type of a clean-signal predictor: (x_t, t, condition_key) -> x0_hat, where
# condition_key None means unconditional
PredictFn = Callable[[np.ndarray, int, object], np.ndarray]


def guided_prediction(
    predict: PredictFn, x_t: np.ndarray, t: int, condition, guidance_w: float
) -> np.ndarray:
    """Classifier-free guidance in signal space:
    (1 + w) * pred(x_t, c) - w * pred(x_t, null)."""
    cond = predict(x_t, t, condition)
    if guidance_w == 0.0:
        return cond
    uncond = predict(x_t, t, None)
    return (1.0 + guidance_w) * cond - guidance_w * uncond


def reverse_chain(
    predict_x0: Callable[[np.ndarray, int], np.ndarray],
    shape: tuple[int, int],
    schedule: NoiseSchedule,
    seed: int,
    step_hook: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Run the full reverse chain from Gaussian noise.

    predict_x0(x_t, t) supplies the clean-signal estimate at every step;
    step_hook(t, x_t, x0_hat), if given, observes each step before the
    posterior noise is applied.
    """
    rng = np.random.default_rng(seed)
    x_t = rng.standard_normal(shape)
    for t in range(schedule.T, 0, -1):
        x0_hat = predict_x0(x_t, t)
        if step_hook is not None:
            step_hook(t, x_t, x0_hat)
        x_t = posterior_step_frames(x_t, x0_hat, t, schedule, rng)
    return x_t
