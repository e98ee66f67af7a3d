"""Command-line front door: layout, generate, pipeline, benchmark, render, serve.

Exit codes: 0 success, 1 stage failure (LLM, parsing, generation, I/O),
2 usage errors (argparse's convention).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .dsl import serialize_layout
from .generator import (
    GenerationConfig,
    ImageStageError,
    LayoutStageError,
    generate_image,
    layout_from_caption,
    run_pipeline,
)
from .geometry import Layout, layout_from_json, layout_to_json
from .llm import DEFAULT_TEMPLATE, HttpLlm, LlmError, default_mock, template_for_language
from .render import render_layout_svg
from .store import AppConfig, new_run_id

__all__ = ["main", "run", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layoutlab",
        description="Caption-to-layout-to-image toy pipeline.",
    )
    parser.add_argument("--mock", action="store_true", help="use the offline mock LLM")
    parser.add_argument("--data-dir", default=None, help="artifact root (default: env or ./data)")
    parser.add_argument("--config", default=None, help="JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p_layout = sub.add_parser("layout", help="caption -> bounding-box layout")
    p_layout.add_argument("caption")
    p_layout.add_argument("--language", default=None, help="hint for non-English captions")
    p_layout.add_argument("--json", action="store_true", help="print JSON instead of text")

    p_generate = sub.add_parser("generate", help="layout JSON file -> image")
    p_generate.add_argument("--layout", required=True, help="path to layout JSON")
    _add_gen_flags(p_generate)

    p_pipeline = sub.add_parser("pipeline", help="caption -> image, end to end")
    p_pipeline.add_argument("caption")
    p_pipeline.add_argument("--language", default=None)
    _add_gen_flags(p_pipeline)

    p_bench = sub.add_parser("benchmark", help="run layout benchmarks")
    p_bench.add_argument(
        "--kind",
        default="all",
        choices=["all"] + [k.value for k in bench.TaskKind],
    )
    p_bench.add_argument("--n", type=int, default=20)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--json", action="store_true")

    p_render = sub.add_parser("render", help="layout JSON file -> SVG")
    p_render.add_argument("--layout", required=True)
    p_render.add_argument("--out", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--host", default=None)
    p_serve.add_argument("--port", type=int, default=None)
    return parser


def _add_gen_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--steps", type=int, default=None, help="denoising step count")
    parser.add_argument("--r", type=float, default=None, help="free-phase fraction in [0, 1]")
    parser.add_argument("--out", default=None, help="run directory (default: <data>/runs/<id>)")


def _app_config(args) -> AppConfig:
    overrides = {}
    if args.data_dir:
        overrides["data_dir"] = args.data_dir
    if args.mock:
        overrides["use_mock_llm"] = True
    return AppConfig.load(args.config, **overrides)


def _gen_config(base: GenerationConfig, args) -> GenerationConfig:
    import dataclasses

    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.steps is not None:
        changes["n_steps"] = args.steps
    if args.r is not None:
        changes["r"] = args.r
    return dataclasses.replace(base, **changes) if changes else base


def _load_layout_file(path: str) -> Layout:
    return layout_from_json(json.loads(Path(path).read_text()))


def _run_dir(config: AppConfig, args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(config.data_dir) / "runs" / new_run_id()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _app_config(args)
    backend = default_mock() if config.use_mock_llm else None
    try:
        return _dispatch(args, config, backend)
    except (LayoutStageError, ImageStageError, LlmError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args, config: AppConfig, backend) -> int:
    if args.command == "layout":
        layout = _caption_to_layout(args, config, backend)
        if args.json:
            print(json.dumps(layout_to_json(layout), indent=2))
        else:
            print(serialize_layout(layout))
        return 0

    if args.command == "generate":
        layout = _load_layout_file(args.layout)
        run_dir = _run_dir(config, args)
        result = generate_image(layout, _gen_config(config.generation, args), out_dir=run_dir)
        print(f"run directory: {result.run_dir}")
        return 0

    if args.command == "pipeline":
        run_dir = _run_dir(config, args)
        result = run_pipeline(
            args.caption,
            config.llm,
            _gen_config(config.generation, args),
            backend=backend,
            template=template_for_language(args.language),
            out_dir=run_dir,
        )
        print(serialize_layout(result.layout))
        print(f"run directory: {result.run_dir}")
        return 0

    if args.command == "benchmark":
        kinds = list(bench.TaskKind) if args.kind == "all" else [bench.TaskKind(args.kind)]
        if config.use_mock_llm:
            tasks = [t for kind in kinds for t in bench.generate_tasks(kind, args.n, args.seed)]
            backend = bench.mock_for_tasks(tasks)
        elif backend is None:
            backend = HttpLlm(config.llm)
        report = bench.run_benchmark(
            backend, DEFAULT_TEMPLATE, kinds, args.n, args.seed, parallelism=config.parallelism
        )
        print(json.dumps(bench.report_to_json(report), indent=2) if args.json
              else bench.format_report_table(report))
        return 0

    if args.command == "render":
        layout = _load_layout_file(args.layout)
        Path(args.out).write_text(render_layout_svg(layout))
        print(f"wrote {args.out}")
        return 0

    if args.command == "serve":
        import dataclasses

        from .service import serve

        changes = {}
        if args.host:
            changes["host"] = args.host
        if args.port:
            changes["port"] = args.port
        serve(dataclasses.replace(config, **changes) if changes else config)
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


def _caption_to_layout(args, config: AppConfig, backend) -> Layout:
    return layout_from_caption(
        args.caption, config.llm, backend=backend, template=template_for_language(args.language)
    )


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
