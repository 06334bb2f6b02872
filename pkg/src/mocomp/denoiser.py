"""Clean-signal denoiser: a small temporal network predicting the denoised
motion from a noisy latent, a diffusion step, and an optional text condition.

The network is length-agnostic: per-frame encoder/decoder plus temporal
convolution blocks, with a sinusoidal encoding of relative frame position
(position / length) so the same weights serve any sequence length. Condition
texts resolve to a learned per-annotation embedding when the string was seen
in training, otherwise to the mean of learned token embeddings (stemmed), and
to a learned null vector when unconditioned. Training minimizes MSE between
the prediction and the clean signal, dropping the condition with probability
p_uncond so the same network serves guided and unconditional sampling.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from . import nn
from .diffusion import NoiseSchedule, build_schedule, forward_noise_frames, guided_prediction, reverse_chain
from .errors import CheckpointError, DivergedError
from .motion import DEFAULT_SKELETON, Motion, Skeleton
from .synthetic import CorpusItem, stemmed_tokens

CHECKPOINT_MAGIC = b"MOCN"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class Condition:
    """Text condition for the denoiser; null means unconditioned."""

    text: str | None = None
    null: bool = False

    @staticmethod
    def none() -> "Condition":
        return Condition(text=None, null=True)

    @staticmethod
    def of(text: str) -> "Condition":
        return Condition(text=text, null=False)


@dataclass(frozen=True)
class DenoiserArch:
    hidden: int = 64
    blocks: int = 2
    kernel: int = 5
    n_pos: int = 16
    n_time: int = 16


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 60
    batch_size: int = 16
    lr: float = 2e-3
    p_uncond: float = 0.1
    p_token: float = 0.5
    schedule_kind: str = "cosine"
    T: int = 100
    seed: int = 0
    arch: DenoiserArch = field(default_factory=DenoiserArch)


class Denoiser:
    """Trainable clean-signal predictor plus its normalization statistics,
    condition vocabulary, and the schedule it was trained against."""

    def __init__(
        self,
        arch: DenoiserArch,
        params: dict[str, np.ndarray],
        label_vocab: tuple[str, ...],
        token_vocab: tuple[str, ...],
        norm_mean: np.ndarray,
        norm_std: np.ndarray,
        fps: int,
        schedule: NoiseSchedule,
        joint_names: tuple[str, ...] = DEFAULT_SKELETON.joint_names,
        train_report: dict | None = None,
    ):
        self.arch = arch
        self.params = params
        self.label_vocab = tuple(label_vocab)
        self.token_vocab = tuple(token_vocab)
        self.label_index = {s: i for i, s in enumerate(self.label_vocab)}
        self.token_index = {s: i for i, s in enumerate(self.token_vocab)}
        self.norm_mean = np.asarray(norm_mean, dtype=np.float64)
        self.norm_std = np.asarray(norm_std, dtype=np.float64)
        self.fps = int(fps)
        self.schedule = schedule
        self.joint_names = tuple(joint_names)
        self.train_report = dict(train_report or {})

    # -- construction -------------------------------------------------------

    @classmethod
    def initialize(
        cls,
        arch: DenoiserArch,
        n_features: int,
        label_vocab: Sequence[str],
        token_vocab: Sequence[str],
        norm_mean: np.ndarray,
        norm_std: np.ndarray,
        fps: int,
        schedule: NoiseSchedule,
        seed: int = 0,
    ) -> "Denoiser":
        rng = np.random.default_rng(seed)
        h, d = arch.hidden, n_features
        params: dict[str, np.ndarray] = {
            "W_in": nn.glorot(rng, (d, h)),
            "W_pos": nn.glorot(rng, (arch.n_pos, h)),
            "b0": np.zeros(h),
            "Wt1": nn.glorot(rng, (arch.n_time, h)),
            "bt1": np.zeros(h),
            "Wt2": nn.glorot(rng, (h, h)),
            "bt2": np.zeros(h),
            "W_out": nn.glorot(rng, (h, d)),
            "b_out": np.zeros(d),
            # zero-initialized so an untrained condition behaves exactly like
            # the null condition; rows differentiate through their gradients
            "label_emb": np.zeros((len(label_vocab), h)),
            "token_emb": np.zeros((len(token_vocab), h)),
            "null_emb": np.zeros(h),
        }
        for l in range(arch.blocks):
            params[f"K{l}"] = nn.glorot(rng, (arch.kernel, h, h))
            params[f"bk{l}"] = np.zeros(h)
            params[f"Wm{l}"] = nn.glorot(rng, (h, h)) * 0.5
            params[f"bm{l}"] = np.zeros(h)
        return cls(arch, params, tuple(label_vocab), tuple(token_vocab),
                   norm_mean, norm_std, fps, schedule)

    @property
    def n_features(self) -> int:
        return self.params["W_in"].shape[0]

    # -- normalization ------------------------------------------------------

    def normalize(self, frames: np.ndarray) -> np.ndarray:
        return (frames - self.norm_mean) / self.norm_std

    def denormalize(self, frames: np.ndarray) -> np.ndarray:
        return frames * self.norm_std + self.norm_mean

    # -- condition handling -------------------------------------------------

    def resolve_condition(self, condition) -> tuple[np.ndarray, str, list[int]]:
        """Map a condition to its embedding vector.

        Returns (vector, path, indices) where path is one of "null", "label",
        "token" and indices are the embedding rows involved (for training).
        """
        if condition is None or (isinstance(condition, Condition) and condition.null):
            return self.params["null_emb"], "null", []
        text = condition.text if isinstance(condition, Condition) else str(condition)
        if text in self.label_index:
            idx = self.label_index[text]
            return self.params["label_emb"][idx], "label", [idx]
        idxs = [self.token_index[t] for t in stemmed_tokens(text) if t in self.token_index]
        if not idxs:
            return self.params["null_emb"], "null", []
        return self.params["token_emb"][idxs].mean(axis=0), "token", idxs

    def _token_mean_vector(self, idxs: list[int]) -> np.ndarray:
        return self.params["token_emb"][idxs].mean(axis=0)

    # -- network ------------------------------------------------------------

    def forward(self, x: np.ndarray, t: int, cond_vec: np.ndarray):
        """x: (F, D) normalized latent; returns (prediction (F, D), cache)."""
        p = self.params
        F = x.shape[0]
        u = np.zeros(1) if F == 1 else np.linspace(0.0, 1.0, F)
        pos = nn.sincos_features(u, self.arch.n_pos)
        tfeat = nn.sincos_features(np.array([t / self.schedule.T]), self.arch.n_time)[0]
        tv1, c_tv1 = nn.tanh_fwd(tfeat @ p["Wt1"] + p["bt1"])
        tv = tv1 @ p["Wt2"] + p["bt2"]
        z0 = x @ p["W_in"] + pos @ p["W_pos"] + tv + cond_vec + p["b0"]
        h, c_h0 = nn.tanh_fwd(z0)
        block_caches = []
        for l in range(self.arch.blocks):
            ul, c_conv = nn.conv1d_fwd(h, p[f"K{l}"], p[f"bk{l}"])
            al, c_al = nn.tanh_fwd(ul)
            h_next = h + al @ p[f"Wm{l}"] + p[f"bm{l}"]
            block_caches.append((c_conv, c_al, al))
            h = h_next
        y = h @ p["W_out"] + p["b_out"]
        cache = (x, pos, tfeat, c_tv1, tv1, c_h0, block_caches, h)
        return y, cache

    def backward(self, dy: np.ndarray, cache) -> tuple[dict[str, np.ndarray], np.ndarray]:
        """Gradients of a scalar loss wrt parameters given d(loss)/d(output).

        Returns (grads, d_cond_vec). Embedding-table rows are not filled in
        here; the training loop scatters d_cond_vec itself.
        """
        p = self.params
        x, pos, tfeat, c_tv1, tv1, c_h0, block_caches, h_final = cache
        grads: dict[str, np.ndarray] = {}
        grads["W_out"] = h_final.T @ dy
        grads["b_out"] = dy.sum(axis=0)
        dh = dy @ p["W_out"].T
        for l in reversed(range(self.arch.blocks)):
            c_conv, c_al, al = block_caches[l]
            grads[f"Wm{l}"] = al.T @ dh
            grads[f"bm{l}"] = dh.sum(axis=0)
            da = dh @ p[f"Wm{l}"].T
            du = nn.tanh_bwd(da, c_al)
            dh_conv, dK, dbk = nn.conv1d_bwd(du, c_conv)
            grads[f"K{l}"] = dK
            grads[f"bk{l}"] = dbk
            dh = dh + dh_conv
        dz0 = nn.tanh_bwd(dh, c_h0)
        grads["W_in"] = x.T @ dz0
        grads["W_pos"] = pos.T @ dz0
        grads["b0"] = dz0.sum(axis=0)
        dvec = dz0.sum(axis=0)  # shared by time and condition pathways
        grads["bt2"] = dvec.copy()
        grads["Wt2"] = np.outer(tv1, dvec)
        dtv1 = nn.tanh_bwd(dvec @ p["Wt2"].T, c_tv1)
        grads["Wt1"] = np.outer(tfeat, dtv1)
        grads["bt1"] = dtv1.copy()
        return grads, dvec

    def predict(self, x_t: np.ndarray, t: int, condition) -> np.ndarray:
        """Clean-signal estimate for a normalized latent. Pure and
        deterministic; safe to call from parallel samplers."""
        cond_vec, _, _ = self.resolve_condition(condition)
        y, _ = self.forward(x_t, t, cond_vec)
        return y


def fit_normalization(items: Sequence[CorpusItem]) -> tuple[np.ndarray, np.ndarray]:
    stacked = np.concatenate([item.motion.frames for item in items], axis=0)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    std = np.where(std < 1e-6, 1.0, std)
    return mean, std


def build_vocabularies(items: Sequence[CorpusItem]) -> tuple[tuple[str, ...], tuple[str, ...]]:
    labels: list[str] = []
    seen = set()
    tokens: list[str] = []
    token_seen = set()
    for item in items:
        for text in item.annotations:
            if text not in seen:
                seen.add(text)
                labels.append(text)
            for tok in stemmed_tokens(text):
                if tok not in token_seen:
                    token_seen.add(tok)
                    tokens.append(tok)
    return tuple(labels), tuple(tokens)


def train_denoiser(items: Sequence[CorpusItem], config: TrainConfig) -> Denoiser:
    """MSE training of the clean-signal predictor with classifier-free
    condition dropout. Deterministic for a fixed (items, config)."""
    if not items:
        raise ValueError("training set is empty")
    schedule = build_schedule(config.schedule_kind, config.T)
    label_vocab, token_vocab = build_vocabularies(items)
    norm_mean, norm_std = fit_normalization(items)
    model = Denoiser.initialize(
        config.arch, items[0].motion.n_features, label_vocab, token_vocab,
        norm_mean, norm_std, items[0].motion.fps, schedule, seed=config.seed,
    )
    normalized = [model.normalize(item.motion.frames) for item in items]

    rng = np.random.default_rng(config.seed + 1)
    adam = nn.Adam(model.params, lr=config.lr)
    epoch_losses: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(items))
        grads = nn.zero_grads_like(model.params)
        in_batch = 0
        losses = []
        for idx in order:
            item = items[idx]
            x0 = normalized[idx]
            text = item.annotations[rng.integers(len(item.annotations))]
            t = int(rng.integers(1, config.T + 1))
            x_t, _ = forward_noise_frames(x0, t, schedule, rng)
            draw = rng.random()
            if draw < config.p_uncond:
                path, idxs = "null", []
                cond_vec = model.params["null_emb"]
            elif draw < config.p_uncond + config.p_token:
                idxs = [model.token_index[tok] for tok in stemmed_tokens(text)]
                path, cond_vec = "token", model._token_mean_vector(idxs)
            else:
                idxs = [model.label_index[text]]
                path, cond_vec = "label", model.params["label_emb"][idxs[0]]

            y, cache = model.forward(x_t, t, cond_vec)
            diff = y - x0
            losses.append(float((diff * diff).mean()))
            dy = 2.0 * diff / diff.size
            g, dcv = model.backward(dy, cache)
            for name, val in g.items():
                grads[name] += val
            if path == "null":
                grads["null_emb"] += dcv
            elif path == "label":
                grads["label_emb"][idxs[0]] += dcv
            else:
                grads["token_emb"][idxs] += dcv / len(idxs)
            in_batch += 1
            if in_batch == config.batch_size:
                for name in grads:
                    grads[name] /= in_batch
                adam.step(grads)
                grads = nn.zero_grads_like(model.params)
                in_batch = 0
        if in_batch:
            for name in grads:
                grads[name] /= in_batch
            adam.step(grads)
        epoch_loss = float(np.mean(losses))
        if not np.isfinite(epoch_loss):
            raise DivergedError(f"training loss became non-finite at epoch {epoch}")
        epoch_losses.append(epoch_loss)

    model.train_report = {
        "initial_loss": epoch_losses[0],
        "final_loss": epoch_losses[-1],
        "epoch_losses": epoch_losses,
        "n_items": len(items),
    }
    return model


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_cfg(
    model: Denoiser,
    condition: Condition | str | None,
    duration_s: float,
    guidance_w: float = 0.0,
    schedule: NoiseSchedule | None = None,
    seed: int = 0,
    step_hook=None,
) -> Motion:
    """Guided sampling: run the reverse chain with the guidance-extrapolated
    clean-signal estimate at every step. guidance_w = 0 is plain conditional
    sampling; guidance_w = -1 is unconditional."""
    schedule = schedule or model.schedule
    n_frames = int(round(duration_s * model.fps))
    if n_frames < 1:
        raise ValueError(f"duration {duration_s}s maps to zero frames at {model.fps} fps")

    def predict(x_t, t):
        return guided_prediction(model.predict, x_t, t, condition, guidance_w)

    x0 = reverse_chain(predict, (n_frames, model.n_features), schedule, seed, step_hook)
    return Motion(frames=model.denormalize(x0), fps=model.fps)


# ---------------------------------------------------------------------------
# Checkpoints: versioned header JSON + raw little-endian array blob.
# Deterministic bytes for fixed contents, so content hashes are stable.
# ---------------------------------------------------------------------------


def save_checkpoint(model: Denoiser, path: str | Path) -> None:
    names = sorted(model.params)
    arrays = []
    offset = 0
    blob_parts = []
    for name in names:
        arr = np.ascontiguousarray(model.params[name], dtype="<f8")
        arrays.append({"name": name, "shape": list(arr.shape), "offset": offset})
        raw = arr.tobytes()
        blob_parts.append(raw)
        offset += len(raw)
    header = {
        "version": CHECKPOINT_VERSION,
        "arch": asdict(model.arch),
        "schedule": {"kind": model.schedule.kind, "T": model.schedule.T},
        "fps": model.fps,
        "joints": list(model.joint_names),
        "n_features": model.n_features,
        "norm_mean": model.norm_mean.tolist(),
        "norm_std": model.norm_std.tolist(),
        "label_vocab": list(model.label_vocab),
        "token_vocab": list(model.token_vocab),
        "train_report": model.train_report,
        "arrays": arrays,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for raw in blob_parts:
            fh.write(raw)


def load_checkpoint(path: str | Path, skeleton: Skeleton = DEFAULT_SKELETON) -> Denoiser:
    data = Path(path).read_bytes()
    if data[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a denoiser checkpoint")
    header_len = struct.unpack("<Q", data[4:12])[0]
    header = json.loads(data[12 : 12 + header_len].decode())
    if header["version"] != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header['version']}")
    if tuple(header["joints"]) != skeleton.joint_names:
        raise CheckpointError(
            f"checkpoint skeleton {header['joints']} does not match configured skeleton"
        )
    if header["n_features"] != skeleton.n_features:
        raise CheckpointError(
            f"checkpoint feature width {header['n_features']} != skeleton {skeleton.n_features}"
        )
    blob = data[12 + header_len :]
    params = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=start).reshape(shape)
        params[entry["name"]] = arr.copy()
    schedule = build_schedule(header["schedule"]["kind"], header["schedule"]["T"])
    return Denoiser(
        arch=DenoiserArch(**header["arch"]),
        params=params,
        label_vocab=tuple(header["label_vocab"]),
        token_vocab=tuple(header["token_vocab"]),
        norm_mean=np.array(header["norm_mean"]),
        norm_std=np.array(header["norm_std"]),
        fps=header["fps"],
        schedule=schedule,
        joint_names=tuple(header["joints"]),
        train_report=header.get("train_report"),
    )


def checkpoint_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
