"""Joint text-motion embedding space for retrieval-style evaluation.

A small motion encoder (per-frame features + frame-difference features,
temporally mean-pooled, projected) and a token-average text encoder share a
unit-sphere embedding space, trained with a symmetric in-batch contrastive
objective. Deliberately tiny: it trains in seconds and only needs to rank
matching annotations above mismatched ones.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import nn
from .errors import CheckpointError, DivergedError
from .motion import Motion
from .synthetic import CorpusItem, stemmed_tokens

EMBEDDER_MAGIC = b"MOCE"
EMBEDDER_VERSION = 1


@dataclass(frozen=True)
class EmbedderConfig:
    dim: int = 32
    hidden: int = 64
    temperature: float = 0.07
    epochs: int = 40
    batch_size: int = 32
    lr: float = 3e-3
    seed: int = 0


def _hashed_unit_vector(text: str, dim: int) -> np.ndarray:
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


class JointEmbedder:
    """Motion and text encoders emitting L2-normalized vectors of equal dim."""

    def __init__(
        self,
        config: EmbedderConfig,
        params: dict[str, np.ndarray],
        token_vocab: tuple[str, ...],
        norm_mean: np.ndarray,
        norm_std: np.ndarray,
        report: dict | None = None,
    ):
        self.config = config
        self.params = params
        self.token_vocab = tuple(token_vocab)
        self.token_index = {t: i for i, t in enumerate(self.token_vocab)}
        self.norm_mean = np.asarray(norm_mean, dtype=np.float64)
        self.norm_std = np.asarray(norm_std, dtype=np.float64)
        self.report = dict(report or {})

    @classmethod
    def initialize(
        cls,
        config: EmbedderConfig,
        n_features: int,
        token_vocab: Sequence[str],
        norm_mean: np.ndarray,
        norm_std: np.ndarray,
    ) -> "JointEmbedder":
        rng = np.random.default_rng(config.seed)
        h, e, d = config.hidden, config.dim, n_features
        params = {
            "W1": nn.glorot(rng, (d, h)),
            "b1": np.zeros(h),
            "Wv": nn.glorot(rng, (d, h)),
            "bv": np.zeros(h),
            "W2": nn.glorot(rng, (2 * h, e)),
            "b2": np.zeros(e),
            "token_emb": rng.normal(0.0, 0.3, (len(token_vocab), e)),
            "Wt": nn.glorot(rng, (e, e)) + np.eye(e),
            "bt": np.zeros(e),
        }
        return cls(config, params, tuple(token_vocab), norm_mean, norm_std)

    # -- encoders ------------------------------------------------------------

    def _motion_forward(self, frames: np.ndarray):
        p = self.params
        xn = (frames - self.norm_mean) / self.norm_std
        f = xn.shape[0]
        hp, c_hp = nn.tanh_fwd(xn @ p["W1"] + p["b1"])
        pm = hp.mean(axis=0)
        if f > 1:
            vel = np.diff(xn, axis=0)
            hv, c_hv = nn.tanh_fwd(vel @ p["Wv"] + p["bv"])
            qm = hv.mean(axis=0)
        else:
            vel, c_hv, qm = None, None, np.zeros(self.config.hidden)
        cat = np.concatenate([pm, qm])
        raw = cat @ p["W2"] + p["b2"]
        z, c_norm = nn.l2_normalize_fwd(raw)
        cache = (xn, c_hp, vel, c_hv, cat, c_norm, f)
        return z, cache

    def _motion_backward(self, dz: np.ndarray, cache, grads: dict[str, np.ndarray]) -> None:
        p = self.params
        xn, c_hp, vel, c_hv, cat, c_norm, f = cache
        draw = nn.l2_normalize_bwd(dz, c_norm)
        grads["W2"] += np.outer(cat, draw)
        grads["b2"] += draw
        dcat = p["W2"] @ draw
        h = self.config.hidden
        dpm, dqm = dcat[:h], dcat[h:]
        dhp = np.tile(dpm / f, (f, 1))
        dzp = nn.tanh_bwd(dhp, c_hp)
        grads["W1"] += xn.T @ dzp
        grads["b1"] += dzp.sum(axis=0)
        if vel is not None:
            dhv = np.tile(dqm / (f - 1), (f - 1, 1))
            dzv = nn.tanh_bwd(dhv, c_hv)
            grads["Wv"] += vel.T @ dzv
            grads["bv"] += dzv.sum(axis=0)

    def _text_forward(self, text: str):
        p = self.params
        idxs = [self.token_index[t] for t in stemmed_tokens(text) if t in self.token_index]
        if not idxs:
            return _hashed_unit_vector(text, self.config.dim), None
        base = p["token_emb"][idxs].mean(axis=0)
        raw = base @ p["Wt"] + p["bt"]
        z, c_norm = nn.l2_normalize_fwd(raw)
        return z, (idxs, base, c_norm)

    def _text_backward(self, dz: np.ndarray, cache, grads: dict[str, np.ndarray]) -> None:
        if cache is None:
            return
        idxs, base, c_norm = cache
        draw = nn.l2_normalize_bwd(dz, c_norm)
        grads["Wt"] += np.outer(base, draw)
        grads["bt"] += draw
        dbase = self.params["Wt"] @ draw
        grads["token_emb"][idxs] += dbase / len(idxs)

    def embed_motion(self, motion: Motion) -> np.ndarray:
        z, _ = self._motion_forward(motion.frames)
        return z

    def embed_text(self, text: str) -> np.ndarray:
        z, _ = self._text_forward(text)
        return z


def train_embedder(items: Sequence[CorpusItem], config: EmbedderConfig = EmbedderConfig()) -> JointEmbedder:
    """Symmetric contrastive training over in-batch (motion, annotation)
    pairs; batches draw distinct annotations so in-batch negatives are true
    negatives. Deterministic for fixed (items, config)."""
    if not items:
        raise ValueError("training set is empty")
    token_seen, token_vocab = set(), []
    ann_to_items: dict[str, list[int]] = {}
    for i, item in enumerate(items):
        for text in item.annotations:
            ann_to_items.setdefault(text, []).append(i)
            for tok in stemmed_tokens(text):
                if tok not in token_seen:
                    token_seen.add(tok)
                    token_vocab.append(tok)
    stacked = np.concatenate([item.motion.frames for item in items], axis=0)
    mean, std = stacked.mean(axis=0), stacked.std(axis=0)
    std = np.where(std < 1e-6, 1.0, std)

    model = JointEmbedder.initialize(config, items[0].motion.n_features, tuple(token_vocab), mean, std)
    annotations = sorted(ann_to_items)
    rng = np.random.default_rng(config.seed + 1)
    adam = nn.Adam(model.params, lr=config.lr)
    batch = min(config.batch_size, len(annotations))
    steps_per_epoch = max(1, len(items) // batch)
    tau = config.temperature

    last_loss = None
    for _ in range(config.epochs):
        for _ in range(steps_per_epoch):
            chosen = rng.choice(len(annotations), size=batch, replace=False)
            zm_list, zt_list, m_caches, t_caches = [], [], [], []
            for ci in chosen:
                text = annotations[ci]
                item = items[ann_to_items[text][rng.integers(len(ann_to_items[text]))]]
                zm, mc = model._motion_forward(item.motion.frames)
                zt, tc = model._text_forward(text)
                zm_list.append(zm)
                zt_list.append(zt)
                m_caches.append(mc)
                t_caches.append(tc)
            Zm = np.stack(zm_list)
            Zt = np.stack(zt_list)
            S = Zm @ Zt.T / tau
            S_shift = S - S.max(axis=1, keepdims=True)
            P_rows = np.exp(S_shift)
            P_rows /= P_rows.sum(axis=1, keepdims=True)
            St = S.T
            St_shift = St - St.max(axis=1, keepdims=True)
            P_cols = np.exp(St_shift)
            P_cols /= P_cols.sum(axis=1, keepdims=True)
            eye = np.eye(batch)
            loss = -0.5 * (
                np.log(np.clip(P_rows.diagonal(), 1e-12, None)).mean()
                + np.log(np.clip(P_cols.diagonal(), 1e-12, None)).mean()
            )
            if not np.isfinite(loss):
                raise DivergedError("contrastive loss became non-finite")
            last_loss = float(loss)
            dS = 0.5 * ((P_rows - eye) / batch + ((P_cols - eye) / batch).T)
            dZm = dS @ Zt / tau
            dZt = dS.T @ Zm / tau
            grads = nn.zero_grads_like(model.params)
            for i in range(batch):
                model._motion_backward(dZm[i], m_caches[i], grads)
                model._text_backward(dZt[i], t_caches[i], grads)
            adam.step(grads)

    r1 = _train_r1(model, items, annotations, rng)
    model.report = {
        "final_loss": last_loss,
        "train_r1": r1,
        "chance_r1": 1.0 / len(annotations),
        "n_annotations": len(annotations),
    }
    return model


def _train_r1(model: JointEmbedder, items, annotations: list[str], rng: np.random.Generator) -> float:
    gallery = np.stack([model.embed_text(a) for a in annotations])
    idxs = rng.choice(len(items), size=min(200, len(items)), replace=False)
    hits = 0
    for i in idxs:
        item = items[i]
        z = model.embed_motion(item.motion)
        best = int(np.argmax(gallery @ z))
        hits += annotations[best] in item.annotations
    return hits / len(idxs)


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_embedder(model: JointEmbedder, path: str | Path) -> None:
    names = sorted(model.params)
    arrays, blob_parts, offset = [], [], 0
    for name in names:
        arr = np.ascontiguousarray(model.params[name], dtype="<f8")
        arrays.append({"name": name, "shape": list(arr.shape), "offset": offset})
        raw = arr.tobytes()
        blob_parts.append(raw)
        offset += len(raw)
    header = {
        "version": EMBEDDER_VERSION,
        "config": {
            "dim": model.config.dim,
            "hidden": model.config.hidden,
            "temperature": model.config.temperature,
            "epochs": model.config.epochs,
            "batch_size": model.config.batch_size,
            "lr": model.config.lr,
            "seed": model.config.seed,
        },
        "token_vocab": list(model.token_vocab),
        "norm_mean": model.norm_mean.tolist(),
        "norm_std": model.norm_std.tolist(),
        "report": model.report,
        "arrays": arrays,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(EMBEDDER_MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for raw in blob_parts:
            fh.write(raw)


def load_embedder(path: str | Path) -> JointEmbedder:
    data = Path(path).read_bytes()
    if data[:4] != EMBEDDER_MAGIC:
        raise CheckpointError(f"{path}: not an embedder checkpoint")
    header_len = struct.unpack("<Q", data[4:12])[0]
    header = json.loads(data[12 : 12 + header_len].decode())
    if header["version"] != EMBEDDER_VERSION:
        raise CheckpointError(f"unsupported embedder checkpoint version {header['version']}")
    blob = data[12 + header_len :]
    params = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        params[entry["name"]] = (
            np.frombuffer(blob, dtype="<f8", count=count, offset=entry["offset"]).reshape(shape).copy()
        )
    return JointEmbedder(
        config=EmbedderConfig(**header["config"]),
        params=params,
        token_vocab=tuple(header["token_vocab"]),
        norm_mean=np.array(header["norm_mean"]),
        norm_std=np.array(header["norm_std"]),
        report=header.get("report"),
    )


def embedder_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
