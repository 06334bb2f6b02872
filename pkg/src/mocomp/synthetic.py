"""Procedural corpus of labeled stick-figure motions.

Basic actions come from closed-form kinematic templates (smooth displacement
fields over a relative phase variable, added to the neutral pose). Complex
actions are built analytically by summing component displacements over their
time intervals, which makes them an exact ground truth for AND-style
composition. A keyword classifier splits annotations into basic (trainable)
and complex (held out).
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, UnknownTemplateError
from .motion import (
    DEFAULT_SKELETON,
    Decomposition,
    Motion,
    Skeleton,
    SubMovement,
    TimeInterval,
    interval_to_frames,
    mirror,
    mirror_text,
    motion_from_dict,
    motion_to_dict,
    neutral_frame,
)

# ---------------------------------------------------------------------------
# Annotation classification: complex = sport / martial art / dance / instrument
# ---------------------------------------------------------------------------

# Keyword seed lists for the four complex categories.
COMPLEX_KEYWORDS: dict[str, tuple[str, ...]] = {
    "ball sports": ("baseball", "tennis", "golf"),
    "martial arts": ("kickbox", "karate", "boxe"),
    "dances": ("salsa", "cha cha", "walzer"),
    "musical instrument": ("drums", "guitar", "piano"),
}

# Extensions beyond the seed lists, kept separate so the provenance of each
# keyword is clear. The "exercise drills" category exists for composite
# classes that are not sports in the narrow sense.
COMPLEX_KEYWORD_EXTENSIONS: dict[str, tuple[str, ...]] = {
    "ball sports": ("basketball", "football", "volleyball"),
    "martial arts": ("judo", "taekwondo"),
    "dances": ("tango", "ballet"),
    "musical instrument": ("violin", "trumpet"),
    "exercise drills": ("jumping jack", "burpee", "push up"),
}


def default_keyword_lists() -> dict[str, tuple[str, ...]]:
    merged: dict[str, tuple[str, ...]] = {}
    for cat, words in COMPLEX_KEYWORDS.items():
        merged[cat] = tuple(words)
    for cat, words in COMPLEX_KEYWORD_EXTENSIONS.items():
        merged[cat] = merged.get(cat, ()) + tuple(words)
    return merged


_WORD_RE = re.compile(r"[a-z]+")
_VOWELS = set("aeiou")


def stem(word: str) -> str:
    """Light suffix-stripping stem so derived forms match their keyword."""
    w = word.lower()
    for suffix in ("ings", "ing", "es", "ed", "s", "e"):
        if w.endswith(suffix) and len(w) - len(suffix) >= 3:
            w = w[: -len(suffix)]
            break
    # collapse doubled trailing consonant left by -ing/-ed stripping
    if len(w) >= 4 and w[-1] == w[-2] and w[-1] not in _VOWELS:
        w = w[:-1]
    return w


def tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def stemmed_tokens(text: str) -> list[str]:
    return [stem(t) for t in tokenize(text)]


def classify_complex(text: str, keyword_lists: dict[str, tuple[str, ...]] | None = None) -> bool:
    """True iff the annotation contains a complex keyword (or a stemmed
    derivative of one) as a whole word or consecutive phrase."""
    if keyword_lists is None:
        keyword_lists = default_keyword_lists()
    toks = stemmed_tokens(text)
    for words in keyword_lists.values():
        for kw in words:
            kw_toks = [stem(t) for t in tokenize(kw)]
            n = len(kw_toks)
            if n == 0:
                continue
            for i in range(len(toks) - n + 1):
                if toks[i : i + n] == kw_toks:
                    return True
    return False


# ---------------------------------------------------------------------------
# Kinematic templates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionSpec:
    """A basic trainable action: label, paraphrases, and a kinematic template."""

    canonical_label: str
    paraphrases: tuple[str, ...]
    generator_id: str
    default_duration_s: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.paraphrases) < 2:
            raise ConfigError(f"{self.canonical_label!r} needs >= 2 paraphrases")

    @property
    def annotations(self) -> tuple[str, ...]:
        return (self.canonical_label,) + self.paraphrases


@dataclass(frozen=True)
class CompositeSpec:
    """A complex held-out action defined as timed basic components.

    components: (basic canonical label, start fraction, end fraction) triples;
    fractions are relative to the composite's duration.
    """

    label: str
    paraphrases: tuple[str, ...]
    components: tuple[tuple[str, float, float], ...]
    default_duration_s: float

    @property
    def annotations(self) -> tuple[str, ...]:
        return (self.label,) + self.paraphrases


def _phase(n_frames: int) -> np.ndarray:
    if n_frames == 1:
        return np.zeros(1)
    return np.linspace(0.0, 1.0, n_frames)


def _bump(u: np.ndarray) -> np.ndarray:
    """Smooth 0 -> 1 -> 0 arc over the window."""
    return np.sin(np.pi * u) ** 2


def _ramp(u: np.ndarray, frac: float = 0.35) -> np.ndarray:
    """Smoothstep rise over the first `frac` of the window, then hold."""
    x = np.clip(u / frac, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _joint(skel: Skeleton, name: str) -> int:
    return skel.joint_index(name)


def _template_still(u, params, skel):
    return np.zeros((u.size, skel.n_joints, 3))


def _template_walk(u, params, skel):
    d = np.zeros((u.size, skel.n_joints, 3))
    stride = params.get("stride", 90.0)
    step = params.get("step", 12.0)
    bob = params.get("bob", 3.0)
    cycles = params.get("cycles", 2.0)
    d[:, :, 0] += (stride * u)[:, None]
    osc = np.sin(2.0 * np.pi * cycles * u)
    d[:, _joint(skel, "left_ankle"), 0] += step * osc
    d[:, _joint(skel, "right_ankle"), 0] -= step * osc
    d[:, _joint(skel, "root"), 1] += bob * 0.5 * (1.0 - np.cos(4.0 * np.pi * cycles * u))
    return d


def _template_jump(u, params, skel):
    d = np.zeros((u.size, skel.n_joints, 3))
    d[:, :, 1] += (params.get("amp", 32.0) * _bump(u))[:, None]
    return d


def _template_crouch(u, params, skel):
    d = np.zeros((u.size, skel.n_joints, 3))
    dip = params.get("amp", 26.0) * _bump(u)
    for name in ("root", "head", "left_shoulder", "right_shoulder", "left_wrist", "right_wrist"):
        d[:, _joint(skel, name), 1] -= dip
    return d


def _template_raise_arm(u, params, skel):
    d = np.zeros((u.size, skel.n_joints, 3))
    side = params.get("side", "left")
    d[:, _joint(skel, f"{side}_wrist"), 1] += params.get("amp", 48.0) * _bump(u)
    return d


def _template_raise_both(u, params, skel):
    d = np.zeros((u.size, skel.n_joints, 3))
    lift = params.get("amp", 48.0) * _bump(u)
    d[:, _joint(skel, "left_wrist"), 1] += lift
    d[:, _joint(skel, "right_wrist"), 1] += lift
    return d


def _template_throw_up(u, params, skel):
    d = np.zeros((u.size, skel.n_joints, 3))
    side = params.get("side", "right")
    snap = _bump(u) ** 2
    d[:, _joint(skel, f"{side}_wrist"), 1] += params.get("amp", 55.0) * snap
    d[:, _joint(skel, "root"), 1] += 0.1 * params.get("amp", 55.0) * snap
    return d


def _template_kick(u, params, skel):
    d = np.zeros((u.size, skel.n_joints, 3))
    side = params.get("side", "left")
    sign = 1.0 if side == "left" else -1.0
    swing = _bump(u)
    d[:, _joint(skel, f"{side}_ankle"), 0] += sign * params.get("amp", 42.0) * swing
    d[:, _joint(skel, f"{side}_ankle"), 1] += params.get("lift", 18.0) * swing
    return d


def _template_wave(u, params, skel):
    d = np.zeros((u.size, skel.n_joints, 3))
    side = params.get("side", "left")
    sign = 1.0 if side == "left" else -1.0
    hold = _ramp(u)
    d[:, _joint(skel, f"{side}_wrist"), 1] += params.get("amp", 40.0) * hold
    d[:, _joint(skel, f"{side}_wrist"), 0] += (
        sign * params.get("wag", 9.0) * np.sin(2.0 * np.pi * params.get("cycles", 3.0) * u) * hold
    )
    return d


TEMPLATES = {
    "still": _template_still,
    "walk": _template_walk,
    "jump": _template_jump,
    "crouch": _template_crouch,
    "raise_arm": _template_raise_arm,
    "raise_both": _template_raise_both,
    "throw_up": _template_throw_up,
    "kick": _template_kick,
    "wave": _template_wave,
}


def _mirrored_action(spec: ActionSpec) -> ActionSpec:
    """Right-side twin of a left-side spec (texts and template side flipped)."""
    params = dict(spec.params)
    params["side"] = "right" if params.get("side", "left") == "left" else "left"
    return replace(
        spec,
        canonical_label=mirror_text(spec.canonical_label),
        paraphrases=tuple(mirror_text(p) for p in spec.paraphrases),
        params=params,
    )


_RAISE_LEFT = ActionSpec(
    "a person raises the left arm",
    ("someone lifts the left arm overhead", "a man raises his left arm"),
    "raise_arm",
    3.0,
    {"amp": 48.0, "side": "left"},
)
_KICK_LEFT = ActionSpec(
    "a person kicks with the left leg",
    ("someone kicks the left leg forward", "a man does a left leg kick"),
    "kick",
    3.0,
    {"amp": 42.0, "lift": 18.0, "side": "left"},
)
_WAVE_LEFT = ActionSpec(
    "a person waves the left hand",
    ("someone waves with the left hand", "a woman waves her left hand"),
    "wave",
    4.0,
    {"amp": 40.0, "wag": 9.0, "cycles": 3.0, "side": "left"},
)

DEFAULT_ACTIONS: tuple[ActionSpec, ...] = (
    ActionSpec(
        "a person stands still",
        ("someone stands in place without moving", "a man stands still"),
        "still",
        3.0,
    ),
    ActionSpec(
        "a person walks forward",
        ("someone walks ahead at a steady pace", "a man walks forward"),
        "walk",
        5.0,
        {"stride": 90.0, "step": 12.0, "bob": 3.0, "cycles": 2.0},
    ),
    ActionSpec(
        "a person jumps",
        ("someone jumps straight up and lands", "a woman jumps up in place"),
        "jump",
        3.0,
        {"amp": 32.0},
    ),
    ActionSpec(
        "a person bends the knees",
        ("someone crouches down and stands back up", "a man bends his knees low"),
        "crouch",
        3.0,
        {"amp": 26.0},
    ),
    _RAISE_LEFT,
    _mirrored_action(_RAISE_LEFT),
    ActionSpec(
        "a person raises both arms",
        ("someone lifts both arms overhead", "a woman raises both arms up"),
        "raise_both",
        3.0,
        {"amp": 48.0},
    ),
    ActionSpec(
        "a person throws an object upwards with the right hand",
        (
            "someone tosses an object up with the right hand",
            "a man throws something upwards using his right arm",
        ),
        "throw_up",
        3.0,
        {"amp": 55.0, "side": "right"},
    ),
    _KICK_LEFT,
    _mirrored_action(_KICK_LEFT),
    _WAVE_LEFT,
    _mirrored_action(_WAVE_LEFT),
)

DEFAULT_COMPOSITES: tuple[CompositeSpec, ...] = (
    CompositeSpec(
        "a person does a jumping jack",
        (
            "a person performs jumping jacks jumping and raising both arms",
            "someone does a jumping jack lifting both arms while jumping",
            "a man does jumping jacks",
        ),
        (("a person jumps", 0.0, 1.0), ("a person raises both arms", 0.0, 1.0)),
        4.0,
    ),
    CompositeSpec(
        "a person shoots a basketball",
        (
            "a basketball player bends the knees jumps and throws the ball upwards with the right hand",
            "someone plays basketball taking a jump shot",
            "a man shoots a basketball jumping and tossing the ball up",
        ),
        (
            ("a person bends the knees", 0.0, 0.4),
            ("a person jumps", 0.3, 0.7),
            ("a person throws an object upwards with the right hand", 0.3, 0.7),
        ),
        10.0,
    ),
    CompositeSpec(
        "a person performs a karate kick",
        (
            "a karate fighter bends the knees and kicks with the left leg",
            "someone does a karate move crouching then kicking the left leg",
            "a man performs a karate strike with the left leg",
        ),
        (
            ("a person bends the knees", 0.0, 0.5),
            ("a person kicks with the left leg", 0.35, 0.9),
        ),
        6.0,
    ),
    CompositeSpec(
        "a person plays tennis",
        (
            "a tennis player raises the left arm and swings the right arm upwards",
            "someone plays tennis serving the ball",
            "a woman plays a tennis serve tossing the ball up with the right hand",
        ),
        (
            ("a person raises the left arm", 0.0, 0.55),
            ("a person throws an object upwards with the right hand", 0.4, 0.95),
        ),
        6.0,
    ),
    CompositeSpec(
        "a person plays the drums",
        (
            "a person plays drums waving the left hand and the right hand",
            "someone plays the drums waving both hands",
            "a man is drumming with both hands",
        ),
        (
            ("a person waves the left hand", 0.0, 1.0),
            ("a person waves the right hand", 0.0, 1.0),
        ),
        5.0,
    ),
    CompositeSpec(
        "a person dances the salsa",
        (
            "a salsa dancer raises the left arm then the right arm while bending the knees",
            "someone dances salsa moving the arms and crouching",
            "a woman dances the salsa",
        ),
        (
            ("a person raises the left arm", 0.0, 0.55),
            ("a person raises the right arm", 0.45, 1.0),
            ("a person bends the knees", 0.0, 1.0),
        ),
        6.0,
    ),
)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _scaled_params(params: dict, amp_scale: float) -> dict:
    out = dict(params)
    for key in ("amp", "stride", "step", "bob", "lift", "wag"):
        if key in out:
            out[key] = out[key] * amp_scale
    return out


def generate_basic(
    spec: ActionSpec,
    duration_s: float | None = None,
    fps: int = 20,
    noise_scale: float = 0.0,
    seed: int = 0,
    amp_scale: float = 1.0,
    skeleton: Skeleton = DEFAULT_SKELETON,
) -> Motion:
    """Render one basic-action motion from its kinematic template.

    Deterministic for fixed (spec, duration, fps, noise_scale, seed).
    """
    if spec.generator_id not in TEMPLATES:
        raise UnknownTemplateError(f"no kinematic template {spec.generator_id!r}")
    duration_s = spec.default_duration_s if duration_s is None else duration_s
    n_frames = int(round(duration_s * fps))
    if n_frames < 2:
        raise ConfigError(f"duration {duration_s}s at {fps} fps gives < 2 frames")
    u = _phase(n_frames)
    disp = TEMPLATES[spec.generator_id](u, _scaled_params(spec.params, amp_scale), skeleton)
    frames = neutral_frame(skeleton)[None, :] + disp.reshape(n_frames, -1)
    if noise_scale > 0:
        rng = np.random.default_rng(seed)
        frames = frames + rng.normal(0.0, noise_scale, size=frames.shape)
    return Motion(frames=frames, fps=fps, meta=spec.canonical_label)


def generate_composite(
    spec: CompositeSpec,
    fps: int = 20,
    seed: int = 0,
    actions: dict[str, ActionSpec] | None = None,
    duration_s: float | None = None,
    noise_scale: float = 0.0,
    amp_scale: float = 1.0,
    skeleton: Skeleton = DEFAULT_SKELETON,
) -> tuple[Motion, Decomposition]:
    """Analytic ground truth for a complex action: component joint
    displacements summed over their frame ranges on top of the neutral pose
    (simultaneous components combine additively)."""
    if actions is None:
        actions = {a.canonical_label: a for a in DEFAULT_ACTIONS}
    total_s = spec.default_duration_s if duration_s is None else duration_s
    n_frames = int(round(total_s * fps))
    if n_frames < 2:
        raise ConfigError(f"duration {total_s}s at {fps} fps gives < 2 frames")
    disp = np.zeros((n_frames, skeleton.n_joints, 3))
    items = []
    for label, f0, f1 in spec.components:
        if label not in actions:
            raise ConfigError(f"composite {spec.label!r} references unknown action {label!r}")
        comp = actions[label]
        if comp.generator_id not in TEMPLATES:
            raise UnknownTemplateError(f"no kinematic template {comp.generator_id!r}")
        interval = TimeInterval(f0 * total_s, f1 * total_s)
        a, b = interval_to_frames(interval, fps, n_frames)
        u = _phase(b - a)
        disp[a:b] += TEMPLATES[comp.generator_id](u, _scaled_params(comp.params, amp_scale), skeleton)
        items.append(SubMovement(text=label, interval=interval))
    frames = neutral_frame(skeleton)[None, :] + disp.reshape(n_frames, -1)
    if noise_scale > 0:
        rng = np.random.default_rng(seed)
        frames = frames + rng.normal(0.0, noise_scale, size=frames.shape)
    motion = Motion(frames=frames, fps=fps, meta=spec.label)
    return motion, Decomposition(items=tuple(items), total_duration_s=total_s)


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusItem:
    motion: Motion
    annotations: tuple[str, ...]
    label: str


@dataclass(frozen=True)
class ComplexItem:
    motion: Motion
    annotations: tuple[str, ...]
    label: str
    oracle: Decomposition


@dataclass(frozen=True)
class Corpus:
    train: tuple[CorpusItem, ...]
    val: tuple[CorpusItem, ...]
    test_complex: tuple[ComplexItem, ...]
    fps: int

    def train_annotations(self) -> list[str]:
        seen, out = set(), []
        for item in self.train:
            for a in item.annotations:
                if a not in seen:
                    seen.add(a)
                    out.append(a)
        return out


@dataclass(frozen=True)
class CorpusConfig:
    fps: int = 20
    train_per_action: int = 100
    val_per_action: int = 5
    test_per_composite: int = 10
    durations_s: tuple[float, ...] = (3.0, 4.0, 5.0)
    noise_scale: float = 0.6
    amp_jitter: tuple[float, float] = (0.8, 1.05)
    mirror_augment: bool = True
    actions: tuple[ActionSpec, ...] = DEFAULT_ACTIONS
    composites: tuple[CompositeSpec, ...] = DEFAULT_COMPOSITES

    def keyword_lists(self) -> dict[str, tuple[str, ...]]:
        return default_keyword_lists()


def _make_basic_items(
    spec: ActionSpec, count: int, config: CorpusConfig, rng: np.random.Generator
) -> list[CorpusItem]:
    items = []
    for _ in range(count):
        duration = float(rng.choice(config.durations_s))
        amp = float(rng.uniform(*config.amp_jitter))
        seed = int(rng.integers(0, 2**31 - 1))
        motion = generate_basic(
            spec, duration_s=duration, fps=config.fps, noise_scale=config.noise_scale,
            seed=seed, amp_scale=amp,
        )
        items.append(CorpusItem(motion=motion, annotations=spec.annotations, label=spec.canonical_label))
    return items


def build_corpus(config: CorpusConfig, seed: int = 0) -> Corpus:
    """Generate train/val basic motions (with mirror augmentation) and the
    analytic complex test set with oracle decompositions."""
    if len(config.actions) < 8:
        raise ConfigError(f"need >= 8 basic actions, got {len(config.actions)}")
    if len(config.composites) < 4:
        raise ConfigError(f"need >= 4 composite actions, got {len(config.composites)}")
    keywords = config.keyword_lists()
    for spec in config.actions:
        for text in spec.annotations:
            if classify_complex(text, keywords):
                raise ConfigError(f"basic annotation {text!r} classifies as complex")
    for comp in config.composites:
        for text in comp.annotations:
            if not classify_complex(text, keywords):
                raise ConfigError(f"composite annotation {text!r} classifies as basic")

    root = np.random.SeedSequence(seed)
    action_seeds = root.spawn(len(config.actions))
    train: list[CorpusItem] = []
    val: list[CorpusItem] = []
    for spec, ss in zip(config.actions, action_seeds):
        rng = np.random.default_rng(ss)
        base = _make_basic_items(spec, config.train_per_action + config.val_per_action, config, rng)
        train.extend(base[: config.train_per_action])
        val.extend(base[config.train_per_action :])

    if config.mirror_augment:
        for item in list(train):
            mirrored = mirror(item.motion)
            if np.array_equal(mirrored.frames, item.motion.frames):
                continue
            train.append(
                CorpusItem(
                    motion=mirrored,
                    annotations=tuple(mirror_text(a) for a in item.annotations),
                    label=mirror_text(item.label),
                )
            )

    actions_by_label = {a.canonical_label: a for a in config.actions}
    test: list[ComplexItem] = []
    comp_seeds = root.spawn(len(config.composites))
    for comp, ss in zip(config.composites, comp_seeds):
        rng = np.random.default_rng(ss)
        for _ in range(config.test_per_composite):
            amp = float(rng.uniform(*config.amp_jitter))
            gseed = int(rng.integers(0, 2**31 - 1))
            motion, oracle = generate_composite(
                comp, fps=config.fps, seed=gseed, actions=actions_by_label,
                noise_scale=config.noise_scale, amp_scale=amp,
            )
            test.append(
                ComplexItem(motion=motion, annotations=comp.annotations, label=comp.label, oracle=oracle)
            )

    corpus = Corpus(train=tuple(train), val=tuple(val), test_complex=tuple(test), fps=config.fps)
    for item in corpus.train:
        for text in item.annotations:
            if classify_complex(text, keywords):
                raise ConfigError(f"split purity violated: train annotation {text!r} is complex")
    return corpus


def corpus_hash(corpus: Corpus) -> str:
    """Content hash over frames, annotations, and split assignment."""
    h = hashlib.sha256()
    h.update(str(corpus.fps).encode())
    for split_name, split in (("train", corpus.train), ("val", corpus.val)):
        for item in split:
            h.update(split_name.encode())
            h.update(item.label.encode())
            h.update("\x00".join(item.annotations).encode())
            h.update(item.motion.frames.tobytes())
    for item in corpus.test_complex:
        h.update(b"test")
        h.update(item.label.encode())
        h.update("\x00".join(item.annotations).encode())
        h.update(item.motion.frames.tobytes())
        h.update(json.dumps(_decomposition_to_dict(item.oracle), sort_keys=True).encode())
    return h.hexdigest()


def _decomposition_to_dict(d: Decomposition) -> dict:
    return {
        "duration": d.total_duration_s,
        "decomposition": [
            {"text": sm.text, "start": sm.interval.start_s, "end": sm.interval.end_s} for sm in d.items
        ],
    }


def _decomposition_from_dict(data: dict) -> Decomposition:
    items = tuple(
        SubMovement(text=e["text"], interval=TimeInterval(float(e["start"]), float(e["end"])))
        for e in data["decomposition"]
    )
    return Decomposition(items=items, total_duration_s=float(data["duration"]))


def save_corpus(corpus: Corpus, directory: str | Path) -> None:
    """Persist as a directory of motion JSON files plus an index manifest."""
    directory = Path(directory)
    (directory / "motions").mkdir(parents=True, exist_ok=True)
    entries = []
    counter = 0
    for split_name, split in (("train", corpus.train), ("val", corpus.val)):
        for item in split:
            fname = f"{counter:06d}.json"
            (directory / "motions" / fname).write_text(json.dumps(motion_to_dict(item.motion)))
            entries.append(
                {"id": counter, "split": split_name, "label": item.label,
                 "annotations": list(item.annotations), "file": f"motions/{fname}"}
            )
            counter += 1
    for item in corpus.test_complex:
        fname = f"{counter:06d}.json"
        (directory / "motions" / fname).write_text(json.dumps(motion_to_dict(item.motion)))
        entries.append(
            {"id": counter, "split": "test_complex", "label": item.label,
             "annotations": list(item.annotations), "file": f"motions/{fname}",
             "oracle": _decomposition_to_dict(item.oracle)}
        )
        counter += 1
    manifest = {"fps": corpus.fps, "hash": corpus_hash(corpus), "items": entries}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=1))


def load_corpus(directory: str | Path) -> Corpus:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    train, val, test = [], [], []
    for entry in manifest["items"]:
        motion = motion_from_dict(json.loads((directory / entry["file"]).read_text()))
        annotations = tuple(entry["annotations"])
        if entry["split"] == "train":
            train.append(CorpusItem(motion, annotations, entry["label"]))
        elif entry["split"] == "val":
            val.append(CorpusItem(motion, annotations, entry["label"]))
        else:
            test.append(
                ComplexItem(motion, annotations, entry["label"], _decomposition_from_dict(entry["oracle"]))
            )
    return Corpus(train=tuple(train), val=tuple(val), test_complex=tuple(test), fps=manifest["fps"])
