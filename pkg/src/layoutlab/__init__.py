"""Caption -> bounding-box layout -> toy diffusion image, end to end.

The text stage prompts a chat LLM (or an offline mock) with in-context
examples and parses the returned box list; the image stage renders each
box with a toy latent-diffusion engine that pins inverted foreground
latents in place for the first part of denoising.  A benchmark harness,
an HTTP service, and a CLI sit on top.
"""

from .geometry import (
    BoundingBox,
    Layout,
    ObjectSpec,
    ValidationReport,
    layout_from_json,
    layout_to_json,
    scale_layout,
    validate_layout,
)
from .dsl import parse_layout, parse_layout_full, serialize_layout, extract_layout_block
from .llm import (
    DEFAULT_TEMPLATE,
    HttpLlm,
    LlmConfig,
    MockLlm,
    PromptTemplate,
    build_prompt,
    default_mock,
    dialog_turn,
    start_session,
    template_for_language,
)
from .bench import TaskKind, generate_tasks, mock_for_tasks, run_benchmark
from .diffusion import (
    NoiseSchedule,
    Trajectory,
    ddim_invert,
    ddim_sample,
    make_analytic_predictor,
    make_gaussian_predictor,
    make_schedule,
)
from .generator import (
    GenerationConfig,
    ImageStageError,
    LayoutStageError,
    build_foreground_asset,
    compose_and_generate,
    generate_image,
    run_pipeline,
)
from .store import AppConfig, RunRecord, RunStatus, RunStore

__version__ = "0.1.0"
