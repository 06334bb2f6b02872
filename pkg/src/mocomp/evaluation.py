"""Metric suite and experiment assembly.

Transition distance measures animation speed (mean pose change per frame
pair, cm). FID compares Gaussian fits over hand-crafted motion feature
vectors (per-channel position and velocity statistics). Retrieval metrics
(R@k, M2T, M2M) go through the learned joint embedding. run_experiment ties
sampling, decomposition, and metrics into one report per experiment kind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .compose import CompositionRequest, sample_composed
from .decompose import RuleTable, decompose_rules, default_rule_table
from .denoiser import Condition, Denoiser, sample_cfg
from .embedder import JointEmbedder
from .errors import (
    DegenerateCovarianceError,
    GalleryError,
    LengthMismatchError,
    TooShortError,
)
from .motion import Decomposition, Motion, SubMovement, TimeInterval
from .synthetic import Corpus, corpus_hash

FID_JITTER = 1e-6


def transition_distance(motion: Motion) -> float:
    """Mean Euclidean distance (cm) between consecutive frame poses."""
    if motion.n_frames < 2:
        raise TooShortError("transition distance needs at least 2 frames")
    diffs = np.diff(motion.frames, axis=0)
    return float(np.linalg.norm(diffs, axis=1).mean())


def motion_feature_vector(motion: Motion) -> np.ndarray:
    """Per-channel mean/std of positions and of frame-to-frame velocities,
    concatenated (4*D dims). Deterministic summary used by FID."""
    if motion.n_frames < 2:
        raise TooShortError("feature vector needs at least 2 frames")
    pos = motion.frames
    vel = np.diff(pos, axis=0)
    return np.concatenate([pos.mean(axis=0), pos.std(axis=0), vel.mean(axis=0), vel.std(axis=0)])


@dataclass(frozen=True)
class FeatureStats:
    """Gaussian fit (mean, covariance) of a set of feature vectors."""

    mean: np.ndarray
    cov: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "FeatureStats":
        mean = features.mean(axis=0)
        centered = features - mean
        cov = centered.T @ centered / features.shape[0]
        cov = 0.5 * (cov + cov.T)
        return cls(mean=mean, cov=cov)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, clamping negative
    eigenvalues at 0. Refuses if clamping discards > 1% of total variance."""
    vals, vecs = np.linalg.eigh(matrix)
    clamped = np.abs(np.minimum(vals, 0.0)).sum()
    total = np.abs(vals).sum()
    if total > 0 and clamped > 0.01 * total:
        raise DegenerateCovarianceError(
            f"eigenvalue clamping would discard {clamped / total:.1%} of total variance"
        )
    vals = np.maximum(vals, 0.0)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid_from_stats(a: FeatureStats, b: FeatureStats) -> float:
    """Frechet distance between two Gaussians:
    |mu_a - mu_b|^2 + tr(C_a + C_b - 2 (C_a C_b)^(1/2)).

    The trace term is the nuclear norm of sqrt(C_a) sqrt(C_b), computed via
    singular values; this keeps fid(S, S) at zero to floating-point noise
    even for rank-deficient sample covariances.
    """
    dim = a.mean.size
    cov_a = a.cov + FID_JITTER * np.eye(dim)
    cov_b = b.cov + FID_JITTER * np.eye(dim)
    sqrt_a = _psd_sqrt(cov_a)
    sqrt_b = _psd_sqrt(cov_b)
    cross = np.linalg.svd(sqrt_a @ sqrt_b, compute_uv=False).sum()
    mean_term = float(((a.mean - b.mean) ** 2).sum())
    value = mean_term + float(np.trace(cov_a) + np.trace(cov_b) - 2.0 * cross)
    return max(0.0, value)


def fid_from_features(features_a: np.ndarray, features_b: np.ndarray) -> float:
    return fid_from_stats(FeatureStats.fit(features_a), FeatureStats.fit(features_b))


def fid(real: list[Motion], generated: list[Motion]) -> float:
    """FID between real and generated motion sets over motion_feature_vector."""
    fa = np.stack([motion_feature_vector(m) for m in real])
    fb = np.stack([motion_feature_vector(m) for m in generated])
    return fid_from_features(fa, fb)


def retrieval_metrics(
    embedder: JointEmbedder,
    generated: list[tuple[Motion, str]],
    gallery: list[str],
) -> tuple[float, float, float]:
    """R@1/R@3/R@10 (percent): how often the correct text ranks in the top k
    gallery texts by cosine to the generated motion's embedding."""
    if len(gallery) < 10:
        raise GalleryError(f"gallery needs >= 10 texts, got {len(gallery)}")
    if len(set(gallery)) != len(gallery):
        raise GalleryError("gallery texts must be unique")
    index = {text: i for i, text in enumerate(gallery)}
    for _, gt_text in generated:
        if gt_text not in index:
            raise GalleryError(f"ground-truth text {gt_text!r} missing from gallery")
    text_embs = np.stack([embedder.embed_text(t) for t in gallery])
    hits = np.zeros(3)
    for motion, gt_text in generated:
        scores = text_embs @ embedder.embed_motion(motion)
        order = np.argsort(-scores, kind="stable")
        rank = int(np.where(order == index[gt_text])[0][0])
        hits += np.array([rank < 1, rank < 3, rank < 10], dtype=float)
    r1, r3, r10 = 100.0 * hits / len(generated)
    return float(r1), float(r3), float(r10)


def similarity_scores(
    embedder: JointEmbedder,
    generated: list[Motion],
    gt_motions: list[Motion],
    gt_texts: list[str],
) -> tuple[float, float]:
    """(M2T, M2M): mean cosine of generated-motion embeddings to ground-truth
    text embeddings and to ground-truth motion embeddings."""
    if not (len(generated) == len(gt_motions) == len(gt_texts)):
        raise LengthMismatchError(
            f"got {len(generated)} generated, {len(gt_motions)} motions, {len(gt_texts)} texts"
        )
    m2t, m2m = [], []
    for gen, gt_m, gt_t in zip(generated, gt_motions, gt_texts):
        z = embedder.embed_motion(gen)
        m2t.append(float(z @ embedder.embed_text(gt_t)))
        m2m.append(float(z @ embedder.embed_motion(gt_m)))
    return float(np.mean(m2t)), float(np.mean(m2m))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ("R1", "R3", "R10", "M2T", "M2M", "FID", "Trans")


@dataclass(frozen=True)
class EvalReport:
    """Metric bundle for one experiment run (means over sampling seeds)."""

    r1: float
    r3: float
    r10: float
    m2t: float
    m2m: float
    fid: float
    trans: float
    stds: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.r1 <= self.r3 <= self.r10 <= 100.0):
            raise ValueError(f"R@k out of order: {self.r1}, {self.r3}, {self.r10}")
        for name, value in (("m2t", self.m2t), ("m2m", self.m2m)):
            if not -1.0 - 1e-9 <= value <= 1.0 + 1e-9:
                raise ValueError(f"{name} out of [-1, 1]: {value}")
        if self.fid < 0 or self.trans < 0:
            raise ValueError("fid and trans must be nonnegative")

    def row(self) -> tuple[float, ...]:
        return (self.r1, self.r3, self.r10, self.m2t, self.m2m, self.fid, self.trans)

    def to_json(self) -> str:
        payload = dict(zip(REPORT_COLUMNS, self.row()))
        payload["stds"] = self.stds
        payload["meta"] = self.meta
        return json.dumps(payload, indent=1, sort_keys=True)


def report_table(rows: dict[str, EvalReport]) -> str:
    """Aligned plain-text table, one experiment per row, paper column order."""
    header = f"{'Experiment':<24}" + "".join(f"{c:>9}" for c in REPORT_COLUMNS)
    lines = [header, "-" * len(header)]
    for name, report in rows.items():
        lines.append(f"{name:<24}" + "".join(f"{v:>9.3f}" for v in report.row()))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _item_seed(base_seed: int, item_idx: int) -> int:
    return int(np.random.SeedSequence((base_seed, item_idx)).generate_state(1)[0])


def full_span_decomposition(annotations: tuple[str, ...], duration_s: float) -> Decomposition:
    """Every annotation over the whole timeline (the multi-annotation setup)."""
    items = tuple(
        SubMovement(text=a, interval=TimeInterval(0.0, duration_s)) for a in annotations
    )
    return Decomposition(items=items, total_duration_s=duration_s)


def build_gallery(corpus: Corpus, minimum: int = 10) -> list[str]:
    """Test-class labels plus train annotations as distractors until the
    gallery has at least `minimum` unique texts."""
    gallery: list[str] = []
    seen = set()
    for item in corpus.test_complex:
        if item.label not in seen:
            seen.add(item.label)
            gallery.append(item.label)
    for text in sorted({a for it in corpus.train for a in it.annotations}):
        if len(gallery) >= minimum:
            break
        if text not in seen:
            seen.add(text)
            gallery.append(text)
    return gallery


def run_experiment(
    kind: str,
    model: Denoiser,
    embedder: JointEmbedder,
    corpus: Corpus,
    w: float = 5.0,
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4),
    rule_table: RuleTable | None = None,
    decompose_fn=None,
) -> EvalReport:
    """Evaluate one generation mode on the held-out complex test set.

    kind: "text_only" samples conditionally from the raw complex annotation;
    "composed" routes the annotation through the decomposer and composes;
    "multi_annotation" composes every paraphrase of the item over the full
    span. Metrics are averaged over the sampling seeds.
    """
    if kind not in ("text_only", "composed", "multi_annotation"):
        raise ValueError(f"unknown experiment kind {kind!r}")
    if not corpus.test_complex:
        raise ValueError("corpus has no complex test items")
    if decompose_fn is None:
        table = rule_table or default_rule_table()
        decompose_fn = lambda text, duration: decompose_rules(table, text, duration)

    gallery = build_gallery(corpus)
    gt_motions = [item.motion for item in corpus.test_complex]
    gt_texts = [item.label for item in corpus.test_complex]

    per_seed: dict[str, list[float]] = {c: [] for c in REPORT_COLUMNS}
    for seed in seeds:
        generated: list[Motion] = []
        for idx, item in enumerate(corpus.test_complex):
            duration = item.motion.duration_s
            sample_seed = _item_seed(seed, idx)
            if kind == "text_only":
                motion = sample_cfg(model, Condition.of(item.label), duration, 0.0, seed=sample_seed)
            else:
                if kind == "composed":
                    decomposition = decompose_fn(item.label, duration)
                else:
                    decomposition = full_span_decomposition(item.annotations, duration)
                request = CompositionRequest(
                    decomposition=decomposition, total_duration_s=duration, w=w, seed=sample_seed
                )
                motion = sample_composed(model, request)
            generated.append(motion)
        r1, r3, r10 = retrieval_metrics(embedder, list(zip(generated, gt_texts)), gallery)
        m2t, m2m = similarity_scores(embedder, generated, gt_motions, gt_texts)
        fid_value = fid(gt_motions, generated)
        trans = float(np.mean([transition_distance(m) for m in generated]))
        for col, val in zip(REPORT_COLUMNS, (r1, r3, r10, m2t, m2m, fid_value, trans)):
            per_seed[col].append(val)

    means = {c: float(np.mean(v)) for c, v in per_seed.items()}
    stds = {c: float(np.std(v)) for c, v in per_seed.items()}
    # averaging R@k curves cannot break monotonicity, but guard against fp
    means["R3"] = max(means["R3"], means["R1"])
    means["R10"] = max(means["R10"], means["R3"])
    return EvalReport(
        r1=means["R1"], r3=means["R3"], r10=means["R10"],
        m2t=means["M2T"], m2m=means["M2M"], fid=means["FID"], trans=means["Trans"],
        stds=stds,
        meta={
            "kind": kind,
            "w": w,
            "seeds": list(seeds),
            "n_items": len(corpus.test_complex),
            "corpus_hash": corpus_hash(corpus),
        },
    )
