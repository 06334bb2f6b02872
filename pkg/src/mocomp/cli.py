"""Command-line surface tying the pipeline together.

Subcommands: gen-data, train, generate, decompose, evaluate, ablate-w.
Options come from an optional JSON config file with flag overrides (flags
win). Exit codes: 0 success, 2 validation failure, 3 transport failure,
4 numeric divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .compose import CompositionRequest, request_to_dict, sample_composed, validate_request
from .decompose import (
    LlmConfig,
    RuleTable,
    decompose_llm,
    decompose_rules,
    default_prompt_bundle,
    default_rule_table,
    errors_only,
)
from .denoiser import Condition, TrainConfig, load_checkpoint, sample_cfg, save_checkpoint, train_denoiser
from .embedder import EmbedderConfig, load_embedder, save_embedder, train_embedder
from .errors import DivergedError, MocompError, TransportError, UnknownActionError, ValidationExhaustedError
from .evaluation import EvalReport, report_table, run_experiment
from .motion import save_motion
from .svg import line_plot_svg, trajectory_svg
from .synthetic import CorpusConfig, build_corpus, corpus_hash, load_corpus, save_corpus

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_TRANSPORT = 3
EXIT_DIVERGED = 4


@dataclass(frozen=True)
class RunConfig:
    corpus_dir: str = "corpus"
    checkpoint: str = "denoiser.ckpt"
    embedder_checkpoint: str = "embedder.ckpt"
    report_dir: str = "reports"
    w: float = 5.0
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    backend: str = "rules"
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    embed: EmbedderConfig = field(default_factory=EmbedderConfig)
    llm: LlmConfig | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        data = json.loads(Path(path).read_text())
        kwargs = {}
        for key in ("corpus_dir", "checkpoint", "embedder_checkpoint", "report_dir", "w", "backend"):
            if key in data:
                kwargs[key] = data[key]
        if "seeds" in data:
            kwargs["seeds"] = tuple(data["seeds"])
        if "corpus" in data:
            kwargs["corpus"] = CorpusConfig(**data["corpus"])
        if "train" in data:
            kwargs["train"] = TrainConfig(**data["train"])
        if "embed" in data:
            kwargs["embed"] = EmbedderConfig(**data["embed"])
        if "llm" in data:
            kwargs["llm"] = LlmConfig(**data["llm"])
        return cls(**kwargs)


def _load_run_config(args) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {}
    for key in ("corpus_dir", "checkpoint", "embedder_checkpoint", "report_dir", "backend"):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "w", None) is not None:
        overrides["w"] = args.w
    if getattr(args, "seeds", None):
        overrides["seeds"] = tuple(args.seeds)
    return replace(config, **overrides) if overrides else config


def _decomposer(config: RunConfig, known_actions: tuple[str, ...]):
    if config.backend == "rules":
        table = default_rule_table(config.corpus.composites, known_actions)
        return lambda text, duration: decompose_rules(table, text, duration)
    if config.backend == "llm":
        if config.llm is None:
            raise MocompError("backend 'llm' needs an 'llm' section in the config file")
        bundle = default_prompt_bundle(known_actions)
        return lambda text, duration: decompose_llm(config.llm, bundle, text, duration)
    raise MocompError(f"unknown decomposer backend {config.backend!r}")


def cmd_gen_data(args) -> int:
    config = _load_run_config(args)
    corpus = build_corpus(config.corpus, seed=args.seed)
    save_corpus(corpus, config.corpus_dir)
    print(f"corpus written to {config.corpus_dir}")
    print(f"  train: {len(corpus.train)}  val: {len(corpus.val)}  test_complex: {len(corpus.test_complex)}")
    print(f"  hash: {corpus_hash(corpus)}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = _load_run_config(args)
    corpus = load_corpus(config.corpus_dir)
    chash = corpus_hash(corpus)
    model = train_denoiser(corpus.train, config.train)
    model.train_report["corpus_hash"] = chash
    save_checkpoint(model, config.checkpoint)
    print(
        f"denoiser: loss {model.train_report['initial_loss']:.4f} -> "
        f"{model.train_report['final_loss']:.4f}, saved to {config.checkpoint}"
    )
    embedder = train_embedder(corpus.train, config.embed)
    embedder.report["corpus_hash"] = chash
    save_embedder(embedder, config.embedder_checkpoint)
    print(
        f"embedder: train R@1 {embedder.report['train_r1']:.3f} "
        f"(chance {embedder.report['chance_r1']:.3f}), saved to {config.embedder_checkpoint}"
    )
    return EXIT_OK


def cmd_generate(args) -> int:
    config = _load_run_config(args)
    model = load_checkpoint(config.checkpoint)
    out_dir = Path(config.report_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.mode == "text_only":
        motion = sample_cfg(model, Condition.of(args.text), args.duration, args.guidance, seed=args.seed)
        print(f"text-only generation for {args.text!r}")
    else:
        known = tuple(model.label_vocab)
        decomposition = _decomposer(config, known)(args.text, args.duration)
        request = CompositionRequest(
            decomposition=decomposition, total_duration_s=args.duration, w=config.w, seed=args.seed
        )
        violations = validate_request(request, model.fps)
        if errors_only(violations):
            for v in violations:
                print(str(v), file=sys.stderr)
            return EXIT_VALIDATION
        print(json.dumps(request_to_dict(request), indent=1))
        motion = sample_composed(model, request)
    motion_path = out_dir / "generated.json"
    svg_path = out_dir / "generated.svg"
    save_motion(motion, motion_path)
    trajectory_svg(motion, svg_path)
    print(f"wrote {motion_path} and {svg_path}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    config = _load_run_config(args)
    if config.backend == "rules":
        known: tuple[str, ...] = tuple(a for spec in config.corpus.actions for a in spec.annotations)
    else:
        known = tuple(load_corpus(config.corpus_dir).train_annotations())
    decomposition = _decomposer(config, known)(args.text, args.duration)
    payload = {
        "decomposition": [
            {"text": sm.text, "start": sm.interval.start_s, "end": sm.interval.end_s}
            for sm in decomposition.items
        ]
    }
    print(json.dumps(payload, indent=1))
    return EXIT_OK


def _evaluate(config: RunConfig, kinds: list[str], w: float):
    corpus = load_corpus(config.corpus_dir)
    model = load_checkpoint(config.checkpoint)
    embedder = load_embedder(config.embedder_checkpoint)
    table = default_rule_table(config.corpus.composites, tuple(model.label_vocab))
    reports = {}
    for kind in kinds:
        reports[kind] = run_experiment(
            kind, model, embedder, corpus, w=w, seeds=config.seeds, rule_table=table
        )
    return reports


def cmd_evaluate(args) -> int:
    config = _load_run_config(args)
    kinds = ["text_only", "composed", "multi_annotation"] if args.mode == "all" else [args.mode]
    reports = _evaluate(config, kinds, config.w)
    out_dir = Path(config.report_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for kind, report in reports.items():
        (out_dir / f"report_{kind}.json").write_text(report.to_json())
    table = report_table(reports)
    (out_dir / "report_table.txt").write_text(table + "\n")
    print(table)
    return EXIT_OK


def cmd_ablate_w(args) -> int:
    config = _load_run_config(args)
    w_list = [float(w) for w in args.w_list]
    out_dir = Path(config.report_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = {}
    for w in w_list:
        report = _evaluate(config, ["composed"], w)["composed"]
        reports[f"w={w:g}"] = report
        (out_dir / f"report_w{w:g}.json").write_text(report.to_json())
    table = report_table(reports)
    (out_dir / "ablation_table.txt").write_text(table + "\n")
    print(table)
    ws = np.array(w_list)
    series = {
        "Trans": (ws, np.array([r.trans for r in reports.values()])),
        "FID": (ws, np.array([r.fid for r in reports.values()])),
        "R@1": (ws, np.array([r.r1 for r in reports.values()])),
    }
    line_plot_svg(series, out_dir / "ablation.svg", title="composition strength sweep",
                  x_label="w", y_label="metric value")
    print(f"wrote {out_dir / 'ablation.svg'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mocomp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run config file")
        p.add_argument("--corpus-dir", dest="corpus_dir")
        p.add_argument("--checkpoint")
        p.add_argument("--embedder-checkpoint", dest="embedder_checkpoint")
        p.add_argument("--report-dir", dest="report_dir")
        p.add_argument("--backend", choices=["rules", "llm"])
        p.add_argument("--w", type=float)
        p.add_argument("--seeds", type=int, nargs="+")

    p = sub.add_parser("gen-data", help="generate the synthetic corpus")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train denoiser and embedder on the corpus")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="generate one motion from an annotation")
    common(p)
    p.add_argument("--text", required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--mode", choices=["text_only", "composed"], default="composed")
    p.add_argument("--guidance", type=float, default=0.0, help="CFG weight for text_only mode")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("decompose", help="decompose an annotation into timed sub-movements")
    common(p)
    p.add_argument("--text", required=True)
    p.add_argument("--duration", type=float, required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("evaluate", help="run the metric suite for one generation mode")
    common(p)
    p.add_argument("--mode", choices=["text_only", "composed", "multi_annotation", "all"], default="all")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate-w", help="sweep the composition strength")
    common(p)
    p.add_argument("--w-list", nargs="+", default=["1", "5", "15"])
    p.set_defaults(func=cmd_ablate_w)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationExhaustedError, UnknownActionError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except DivergedError as exc:
        print(f"numeric divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except MocompError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
