"""Core motion representation: fixed-rate skeletal frame sequences plus the
time/interval arithmetic and geometric utilities everything else builds on.

Conventions: features are flat per-frame vectors of 3*J joint coordinates in
centimeters, ordered (x, y, z) per joint; x is the lateral axis (negated by
mirroring), y is up. Frame ranges are half-open so adjacent intervals tile
without double-counting.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyRangeError, OutOfBoundsError, SkeletonMismatchError


@dataclass(frozen=True)
class Skeleton:
    """Joint layout with an explicit left/right pairing used by mirroring."""

    joint_names: tuple[str, ...]
    mirror_pairs: tuple[tuple[str, str], ...]

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    @property
    def n_features(self) -> int:
        return 3 * self.n_joints

    def joint_index(self, name: str) -> int:
        return self.joint_names.index(name)

    def mirror_permutation(self) -> np.ndarray:
        """Joint index permutation that swaps each left/right pair."""
        perm = np.arange(self.n_joints)
        for left, right in self.mirror_pairs:
            li, ri = self.joint_index(left), self.joint_index(right)
            perm[li], perm[ri] = ri, li
        return perm


DEFAULT_SKELETON = Skeleton(
    joint_names=(
        "root",
        "head",
        "left_shoulder",
        "right_shoulder",
        "left_wrist",
        "right_wrist",
        "left_ankle",
        "right_ankle",
    ),
    mirror_pairs=(
        ("left_shoulder", "right_shoulder"),
        ("left_wrist", "right_wrist"),
        ("left_ankle", "right_ankle"),
    ),
)

# Laterally symmetric rest pose (cm), used as the origin of every kinematic
# template. Must stay a fixed point of mirror().
NEUTRAL_POSE = {
    "root": (0.0, 100.0, 0.0),
    "head": (0.0, 170.0, 0.0),
    "left_shoulder": (20.0, 150.0, 0.0),
    "right_shoulder": (-20.0, 150.0, 0.0),
    "left_wrist": (25.0, 105.0, 0.0),
    "right_wrist": (-25.0, 105.0, 0.0),
    "left_ankle": (12.0, 10.0, 0.0),
    "right_ankle": (-12.0, 10.0, 0.0),
}


def neutral_frame(skeleton: Skeleton = DEFAULT_SKELETON) -> np.ndarray:
    return np.array([NEUTRAL_POSE[j] for j in skeleton.joint_names], dtype=np.float64).reshape(-1)


@dataclass(frozen=True)
class Motion:
    """A fixed-rate sequence of skeletal feature frames.

    frames: (F, D) float array, D = 3 * n_joints, finite everywhere, F >= 1.
    """

    frames: np.ndarray
    fps: int
    meta: str | None = None

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise ValueError(f"frames must be a nonempty (F, D) array, got shape {frames.shape}")
        if not np.isfinite(frames).all():
            raise ValueError("frames contain non-finite values")
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_features(self) -> int:
        return self.frames.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_frames / self.fps

    def joints(self) -> np.ndarray:
        """View of frames as (F, J, 3) joint coordinates."""
        return self.frames.reshape(self.n_frames, -1, 3)


@dataclass(frozen=True)
class TimeInterval:
    """Half-open-in-frame-space time window [start_s, end_s), seconds."""

    start_s: float
    end_s: float

    def __post_init__(self):
        if self.start_s < 0:
            raise ValueError(f"start_s must be >= 0, got {self.start_s}")
        if not self.start_s < self.end_s:
            raise ValueError(f"start_s must be strictly less than end_s, got [{self.start_s}, {self.end_s}]")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class SubMovement:
    """One text annotation bound to a time interval."""

    text: str
    interval: TimeInterval

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("sub-movement text must be non-empty")


@dataclass(frozen=True)
class Decomposition:
    """An ordered set of sub-movements covering a total duration."""

    items: tuple[SubMovement, ...]
    total_duration_s: float

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValueError("decomposition must contain at least one sub-movement")
        for sm in self.items:
            if sm.interval.end_s > self.total_duration_s + 1e-9:
                raise ValueError(
                    f"interval [{sm.interval.start_s}, {sm.interval.end_s}] exceeds "
                    f"total duration {self.total_duration_s}"
                )
        if min(sm.interval.start_s for sm in self.items) > 0:
            raise ValueError("at least one sub-movement must start at second 0")


def interval_to_frames(interval: TimeInterval, fps: int, total_frames: int) -> tuple[int, int]:
    """Map a time interval to the half-open frame range [a, b).

    Rounds endpoints to the nearest frame (banker's rounding, so results are
    platform-stable) and clamps into [0, total_frames].
    """
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    a = int(np.rint(interval.start_s * fps))
    b = int(np.rint(interval.end_s * fps))
    a = max(0, min(a, total_frames))
    b = max(0, min(b, total_frames))
    if a >= b:
        raise EmptyRangeError(
            f"interval [{interval.start_s}, {interval.end_s}]s at {fps} fps collapses to "
            f"empty frame range [{a}, {b}) within {total_frames} frames"
        )
    return a, b


def crop(motion: Motion, frame_range: tuple[int, int]) -> Motion:
    """Frames [a, b) of the motion; fps preserved."""
    a, b = frame_range
    if not (0 <= a < b <= motion.n_frames):
        raise OutOfBoundsError(f"range [{a}, {b}) out of bounds for {motion.n_frames} frames")
    return Motion(frames=motion.frames[a:b].copy(), fps=motion.fps, meta=motion.meta)


def mirror(motion: Motion, skeleton: Skeleton = DEFAULT_SKELETON) -> Motion:
    """Lateral mirror: negate x coordinates and swap left/right joint channels.

    Exact involution: mirror(mirror(m)) == m bit for bit.
    """
    if motion.n_features != skeleton.n_features:
        raise SkeletonMismatchError(
            f"motion has {motion.n_features} features, skeleton expects {skeleton.n_features}"
        )
    joints = motion.joints().copy()
    joints[:, :, 0] = -joints[:, :, 0]
    joints = joints[:, skeleton.mirror_permutation(), :]
    return Motion(frames=joints.reshape(motion.n_frames, -1), fps=motion.fps, meta=motion.meta)


_LATERAL_TOKENS = {"left": "right", "right": "left"}
_LATERAL_RE = re.compile(r"\b(left|right)\b", re.IGNORECASE)


def _swap_token(match: re.Match) -> str:
    word = match.group(0)
    swapped = _LATERAL_TOKENS[word.lower()]
    if word.isupper():
        return swapped.upper()
    if word[0].isupper():
        return swapped.capitalize()
    return swapped


def mirror_text(text: str) -> str:
    """Whole-word, case-preserving left<->right swap. Involution."""
    return _LATERAL_RE.sub(_swap_token, text)


def motion_to_dict(motion: Motion, skeleton: Skeleton = DEFAULT_SKELETON) -> dict:
    return {
        "fps": int(motion.fps),
        "joints": list(skeleton.joint_names),
        "frames": motion.frames.tolist(),
    }


def motion_from_dict(data: dict, skeleton: Skeleton = DEFAULT_SKELETON) -> Motion:
    joints = data.get("joints")
    if joints is not None and tuple(joints) != skeleton.joint_names:
        raise SkeletonMismatchError(f"joint list {joints} does not match configured skeleton")
    frames = np.asarray(data["frames"], dtype=np.float64)
    if frames.ndim != 2 or not np.isfinite(frames).all():
        raise ValueError("motion file contains malformed or non-finite frames")
    return Motion(frames=frames, fps=int(data["fps"]))


def save_motion(motion: Motion, path: str | Path, skeleton: Skeleton = DEFAULT_SKELETON) -> None:
    Path(path).write_text(json.dumps(motion_to_dict(motion, skeleton)))


def load_motion(path: str | Path, skeleton: Skeleton = DEFAULT_SKELETON) -> Motion:
    return motion_from_dict(json.loads(Path(path).read_text()), skeleton)
