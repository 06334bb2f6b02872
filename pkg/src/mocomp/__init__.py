"""Spatio-temporal composition of motion diffusion models.

Decompose a complex action annotation into timed sub-movements, then merge
per-step denoiser predictions over those time windows to generate motion
classes never seen in training. Ships a synthetic stick-figure corpus, a tiny
numpy diffusion model, the composition sampler, decomposition backends (LLM
protocol + offline rules), and the evaluation metric suite.
"""

from .compose import CompositionRequest, StepTrace, compose_step, sample_composed, validate_request
from .decompose import (
    LlmConfig,
    PromptBundle,
    RuleTable,
    Violation,
    build_prompt,
    decompose_llm,
    decompose_rules,
    default_prompt_bundle,
    default_rule_table,
    validate_decomposition,
)
from .denoiser import (
    Condition,
    Denoiser,
    DenoiserArch,
    TrainConfig,
    load_checkpoint,
    sample_cfg,
    save_checkpoint,
    train_denoiser,
)
from .diffusion import NoiseSchedule, build_schedule, forward_noise, posterior_step
from .embedder import EmbedderConfig, JointEmbedder, load_embedder, save_embedder, train_embedder
from .evaluation import (
    EvalReport,
    FeatureStats,
    fid,
    fid_from_features,
    motion_feature_vector,
    report_table,
    retrieval_metrics,
    run_experiment,
    similarity_scores,
    transition_distance,
)
from .motion import (
    DEFAULT_SKELETON,
    Decomposition,
    Motion,
    Skeleton,
    SubMovement,
    TimeInterval,
    crop,
    interval_to_frames,
    load_motion,
    mirror,
    mirror_text,
    save_motion,
)
from .synthetic import (
    ActionSpec,
    CompositeSpec,
    Corpus,
    CorpusConfig,
    DEFAULT_ACTIONS,
    DEFAULT_COMPOSITES,
    build_corpus,
    classify_complex,
    corpus_hash,
    generate_basic,
    generate_composite,
    load_corpus,
    save_corpus,
)

__version__ = "0.1.0"
