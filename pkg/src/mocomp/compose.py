"""Spatio-temporal composition sampler.

At every denoising step one unconditional base prediction is made on the full
latent, plus one conditional prediction per sub-movement on the latent cropped
to that sub-movement's frame range. The merged clean-signal estimate is

    merged = base + w * sum_i (cond_i - base[range_i])   over each range_i,

computed per frame as (1 - w * coverage) * base + w * placed_sum, which is the
same sum rearranged so that untouched frames stay bit-identical to the base
prediction and a single full-span sub-movement at w = 1 reduces bit-exactly to
plain conditional sampling. Overlapping ranges accumulate additively (an AND
over simultaneous conditions); temporal structure comes from where the ranges
sit on the shared timeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .decompose import Violation, validate_decomposition
from .denoiser import Condition, Denoiser
from .diffusion import NoiseSchedule, guided_prediction, reverse_chain
from .errors import EmptyRangeError
from .motion import Decomposition, Motion, SubMovement, TimeInterval, interval_to_frames


@dataclass(frozen=True)
class CompositionRequest:
    """One composed-generation job: timed sub-movements over a total duration,
    merged with strength w. decomposition None means no sub-movements (pure
    unconditional generation)."""

    decomposition: Decomposition | None
    total_duration_s: float
    w: float = 5.0
    seed: int = 0
    normalize_overlap: bool = False
    inner_guidance_w: float = 0.0
    prediction_space: str = "x0"  # or "eps"

    def __post_init__(self):
        if self.total_duration_s <= 0:
            raise ValueError(f"total duration must be positive, got {self.total_duration_s}")
        if self.w < 0:
            raise ValueError(f"composition strength w must be >= 0, got {self.w}")
        if self.prediction_space not in ("x0", "eps"):
            raise ValueError(f"prediction_space must be 'x0' or 'eps', got {self.prediction_space!r}")


@dataclass(frozen=True)
class StepTrace:
    """Per-step diagnostics of one composition step."""

    t: int
    base_norm: float
    delta_norms: tuple[float, ...]
    merged_norm: float


def _ordered_items(decomposition: Decomposition | None) -> list[SubMovement]:
    if decomposition is None:
        return []
    # canonical reduction order: reordering the request must not change a bit
    return sorted(decomposition.items, key=lambda sm: (sm.interval.start_s, sm.interval.end_s, sm.text))


def compose_step(
    x_t: np.ndarray,
    t: int,
    model: Denoiser,
    request: CompositionRequest,
    schedule: NoiseSchedule | None = None,
    trace: list[StepTrace] | None = None,
) -> np.ndarray:
    """Merged clean-signal estimate for one denoising step.

    x_t is the full-length normalized latent; the returned array has the same
    shape. The n + 1 predictions are independent of each other, so they could
    run in parallel; the merge itself is a fixed-order reduction.
    """
    schedule = schedule or model.schedule
    n_frames = x_t.shape[0]

    def predict(x, cond):
        pred = guided_prediction(model.predict, x, t, cond, request.inner_guidance_w)
        if request.prediction_space == "eps":
            return pred  # conversion handled jointly below
        return pred

    base = predict(x_t, None)
    items = _ordered_items(request.decomposition)

    if request.prediction_space == "eps":
        # merge noise estimates instead of signal estimates; the per-frame
        # affine relation eps = (x_t - sqrt(abar) x0) / sqrt(1 - abar) makes
        # this algebraically equivalent, kept for side-by-side comparison
        abar = schedule.alpha_bars[t]
        to_eps = lambda x, x0: (x - np.sqrt(abar) * x0) / np.sqrt(1.0 - abar)
        to_x0 = lambda x, e: (x - np.sqrt(1.0 - abar) * e) / np.sqrt(abar)
        base_space = to_eps(x_t, base)
    else:
        base_space = base

    coverage = np.zeros((n_frames, 1))
    placed = np.zeros_like(x_t)
    delta_norms = []
    for sm in items:
        a, b = interval_to_frames(sm.interval, model.fps, n_frames)
        pred = predict(x_t[a:b], Condition.of(sm.text))
        if request.prediction_space == "eps":
            pred = to_eps(x_t[a:b], pred)
        placed[a:b] += pred
        coverage[a:b] += 1.0
        if trace is not None:
            delta_norms.append(float(np.linalg.norm(pred - base_space[a:b])))

    if request.normalize_overlap:
        scale = request.w / np.maximum(coverage, 1.0)
    else:
        scale = request.w
    merged = base_space * (1.0 - scale * coverage) + scale * placed

    if request.prediction_space == "eps":
        merged = to_x0(x_t, merged)

    if trace is not None:
        trace.append(
            StepTrace(
                t=t,
                base_norm=float(np.linalg.norm(base)),
                delta_norms=tuple(delta_norms),
                merged_norm=float(np.linalg.norm(merged)),
            )
        )
    return merged


def sample_composed(
    model: Denoiser,
    request: CompositionRequest,
    schedule: NoiseSchedule | None = None,
    step_hook=None,
    trace: list[StepTrace] | None = None,
) -> Motion:
    """Full composed generation: a single shared latent is initialized from
    the Gaussian prior and refined T times, applying compose_step then the
    posterior step. Bit-deterministic for a fixed request."""
    schedule = schedule or model.schedule
    n_frames = int(round(request.total_duration_s * model.fps))
    if n_frames < 1:
        raise ValueError(f"duration {request.total_duration_s}s maps to zero frames")

    def predict(x_t, t):
        return compose_step(x_t, t, model, request, schedule, trace)

    x0 = reverse_chain(predict, (n_frames, model.n_features), schedule, request.seed, step_hook)
    return Motion(frames=model.denormalize(x0), fps=model.fps)


# ---------------------------------------------------------------------------
# Request wire format and validation
# ---------------------------------------------------------------------------


def request_to_dict(request: CompositionRequest) -> dict:
    items = [] if request.decomposition is None else [
        {"text": sm.text, "start": sm.interval.start_s, "end": sm.interval.end_s}
        for sm in request.decomposition.items
    ]
    return {
        "decomposition": items,
        "duration": request.total_duration_s,
        "w": request.w,
        "seed": request.seed,
    }


def request_from_dict(data: dict, **overrides) -> CompositionRequest:
    items = tuple(
        SubMovement(text=e["text"], interval=TimeInterval(float(e["start"]), float(e["end"])))
        for e in data.get("decomposition", [])
    )
    decomposition = Decomposition(items=items, total_duration_s=float(data["duration"])) if items else None
    kwargs = {
        "decomposition": decomposition,
        "total_duration_s": float(data["duration"]),
        "w": float(data.get("w", 5.0)),
        "seed": int(data.get("seed", 0)),
    }
    kwargs.update(overrides)
    return CompositionRequest(**kwargs)


def validate_request(data: dict | CompositionRequest, fps: int, min_duration_s: float = 2.0) -> list[Violation]:
    """All violations of a composition request (never just the first).

    Accepts either a typed request or the raw wire dict, so malformed inputs
    can be reported before any typed object is constructed.
    """
    raw = request_to_dict(data) if isinstance(data, CompositionRequest) else dict(data)
    violations: list[Violation] = []
    duration = raw.get("duration")
    if not isinstance(duration, (int, float)) or not np.isfinite(duration) or duration <= 0:
        violations.append(Violation("bad-duration", f"total duration must be positive, got {duration!r}", "error"))
        return violations

    violations.extend(
        validate_decomposition({"decomposition": raw.get("decomposition", [])}, float(duration), min_duration_s)
    )

    w = raw.get("w", 5.0)
    if not isinstance(w, (int, float)) or not np.isfinite(w) or w < 0:
        violations.append(Violation("bad-strength", f"w must be a real >= 0, got {w!r}", "error"))

    n_frames = int(round(float(duration) * fps))
    if n_frames < 1:
        violations.append(Violation("empty-range", f"duration {duration}s maps to zero frames at {fps} fps", "error"))
        return violations
    for i, entry in enumerate(raw.get("decomposition", [])):
        try:
            interval = TimeInterval(float(entry["start"]), float(entry["end"]))
        except (ValueError, KeyError, TypeError):
            continue  # already reported by validate_decomposition
        try:
            interval_to_frames(interval, fps, n_frames)
        except EmptyRangeError:
            violations.append(
                Violation("empty-range", f"item {i} [{entry['start']}, {entry['end']}]s maps to zero frames", "error")
            )
    return violations
