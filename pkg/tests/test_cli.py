"""Command-line behavior: exit codes, printed output, and the offline guarantee."""

import json
import socket

import pytest

from layoutlab.cli import main
from layoutlab.dsl import serialize_layout
from layoutlab.geometry import BoundingBox, Layout, ObjectSpec, layout_from_json, layout_to_json

PANDA_LAYOUT = Layout(
    (
        ObjectSpec("a panda eating bambooo", BoundingBox(30, 133, 212, 226)),
        ObjectSpec("a panda eating bambooo", BoundingBox(262, 137, 222, 221)),
    ),
    "A watercolor painting of a forest",
)

SCENE_LAYOUT = Layout(
    (
        ObjectSpec("a red circle", BoundingBox(64, 160, 160, 160)),
        ObjectSpec("a blue square", BoundingBox(288, 160, 160, 160)),
    ),
    "a white background",
)

# generate_image / run_pipeline without a store: everything except record.json
EXPECTED_ARTIFACTS = [
    "box_00.mask.pbm",
    "box_00.traj",
    "box_01.mask.pbm",
    "box_01.traj",
    "image.f32",
    "image.png",
    "layout.json",
    "run.json",
]


@pytest.fixture(autouse=True)
def _clean_environment(monkeypatch):
    for name in ("LMD_DATA_DIR", "LMD_API_BASE", "LMD_MODEL", "LMD_API_KEY"):
        monkeypatch.delenv(name, raising=False)


def write_config(tmp_path, **extra):
    """A config file with a small, fast generation setup."""
    payload = {
        "data_dir": str(tmp_path / "data"),
        "generation": {"n_steps": 10, "latent_shape": [3, 32, 32], "timesteps": 100},
    }
    payload.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return str(path)


def write_layout(tmp_path, layout, name="layout.json"):
    path = tmp_path / name
    path.write_text(json.dumps(layout_to_json(layout)))
    return str(path)


class TestParser:
    def test_no_arguments_is_a_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2

    def test_layout_requires_a_caption(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["layout"])
        assert excinfo.value.code == 2

    def test_unknown_command_is_rejected(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2

    def test_global_flags_go_before_the_subcommand(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["layout", "a cat", "--mock"])
        assert excinfo.value.code == 2

    def test_benchmark_kind_choices_are_enforced(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["benchmark", "--kind", "pandas"])
        assert excinfo.value.code == 2

    def test_generate_requires_a_layout_file(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["generate"])
        assert excinfo.value.code == 2


class TestLayoutCommand:
    def test_mock_prints_the_text_form(self, capsys):
        assert main(["--mock", "layout", "two pandas in a forest"]) == 0
        assert capsys.readouterr().out == serialize_layout(PANDA_LAYOUT) + "\n"

    def test_json_output_round_trips(self, capsys):
        assert main(["--mock", "layout", "two pandas in a forest", "--json"]) == 0
        parsed = layout_from_json(json.loads(capsys.readouterr().out))
        assert parsed == PANDA_LAYOUT

    def test_unknown_captions_fall_back_to_an_echo_layout(self, capsys):
        assert main(["--mock", "layout", "a quokka on a rock"]) == 0
        out = capsys.readouterr().out
        assert "'a quokka on a rock'" in out
        assert "Background prompt: a plain background" in out

    def test_language_hint_is_accepted(self, capsys):
        assert main(["--mock", "layout", "两只熊猫", "--language", "zh"]) == 0
        assert capsys.readouterr().out.strip()


class TestGenerateCommand:
    def test_writes_artifacts_into_the_out_directory(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        layout_file = write_layout(tmp_path, SCENE_LAYOUT)
        out = tmp_path / "run"
        rc = main(
            ["--config", cfg, "generate", "--layout", layout_file, "--out", str(out), "--seed", "3"]
        )
        assert rc == 0
        assert capsys.readouterr().out == f"run directory: {out}\n"
        assert sorted(p.name for p in out.iterdir()) == EXPECTED_ARTIFACTS

    def test_default_run_dir_lands_under_data_runs(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        layout_file = write_layout(tmp_path, SCENE_LAYOUT)
        data = tmp_path / "elsewhere"  # the flag must beat the config file's data_dir
        rc = main(["--config", cfg, "--data-dir", str(data), "generate", "--layout", layout_file])
        assert rc == 0
        line = capsys.readouterr().out.strip()
        run_dir = tmp_path / line.removeprefix("run directory: ")
        assert run_dir.parent == data / "runs"
        assert (run_dir / "image.png").exists()

    def test_gen_flags_land_in_the_run_record(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        layout_file = write_layout(tmp_path, SCENE_LAYOUT)
        out = tmp_path / "run"
        rc = main(
            ["--config", cfg, "generate", "--layout", layout_file, "--out", str(out),
             "--seed", "9", "--steps", "8", "--r", "0.5"]
        )
        assert rc == 0
        recorded = json.loads((out / "run.json").read_text())["config"]
        assert recorded["seed"] == 9
        assert recorded["n_steps"] == 8
        assert recorded["r"] == 0.5

    def test_missing_layout_file_fails_cleanly(self, tmp_path, capsys):
        rc = main(["generate", "--layout", str(tmp_path / "nope.json")])
        assert rc == 1
        captured = capsys.readouterr()
        assert captured.err.startswith("error:")
        assert captured.out == ""

    def test_unparseable_layout_file_fails_cleanly(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("not json at all")
        rc = main(["generate", "--layout", str(path)])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_out_of_bounds_layout_fails_before_any_work(self, tmp_path, capsys):
        bad = Layout(
            (ObjectSpec("a runaway box", BoundingBox(400, 400, 200, 200)),), "a gray background"
        )
        cfg = write_config(tmp_path)
        out = tmp_path / "run"
        rc = main(
            ["--config", cfg, "generate", "--layout", write_layout(tmp_path, bad), "--out", str(out)]
        )
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:")
        assert not out.exists()

    def test_bad_r_value_fails_cleanly(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        layout_file = write_layout(tmp_path, SCENE_LAYOUT)
        rc = main(["--config", cfg, "generate", "--layout", layout_file, "--r", "2.0"])
        assert rc == 1
        assert "r must be in [0, 1]" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore::UserWarning")  # panda text has no shape/color words
class TestPipelineCommand:
    def test_mock_pipeline_end_to_end(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "run"
        rc = main(
            ["--mock", "--config", cfg, "pipeline", "two pandas in a forest",
             "--seed", "7", "--out", str(out)]
        )
        assert rc == 0
        printed = capsys.readouterr().out
        assert printed == serialize_layout(PANDA_LAYOUT) + "\n" + f"run directory: {out}\n"
        assert sorted(p.name for p in out.iterdir()) == EXPECTED_ARTIFACTS
        assert (out / "image.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_repeat_runs_are_bitwise_identical(self, tmp_path):
        cfg = write_config(tmp_path)
        dirs = []
        for name in ("first", "second"):
            out = tmp_path / name
            rc = main(
                ["--mock", "--config", cfg, "pipeline", "two pandas in a forest",
                 "--seed", "7", "--out", str(out)]
            )
            assert rc == 0
            dirs.append(out)
        first, second = dirs
        assert (first / "image.f32").read_bytes() == (second / "image.f32").read_bytes()
        assert (first / "image.png").read_bytes() == (second / "image.png").read_bytes()

    def test_run_record_keeps_the_caption(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "run"
        rc = main(
            ["--mock", "--config", cfg, "pipeline", "two pandas in a forest", "--out", str(out)]
        )
        assert rc == 0
        record = json.loads((out / "run.json").read_text())
        assert record["caption"] == "two pandas in a forest"
        assert record["stages"] == {"layout": "done", "image": "done"}


class TestBenchmarkCommand:
    def test_mock_negation_prints_a_perfect_table(self, capsys):
        assert main(["--mock", "benchmark", "--kind", "negation", "--n", "5"]) == 0
        out = capsys.readouterr().out
        assert "Benchmark" in out and "Accuracy (%)" in out
        row = next(line for line in out.splitlines() if line.startswith("Negation"))
        assert row.rstrip().endswith("100.0")

    def test_mock_json_report(self, capsys):
        assert main(["--mock", "benchmark", "--kind", "numeracy", "--n", "4", "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["n"] == 4
        assert report["accuracy"] == {"Generative Numeracy": 1.0}
        assert len(report["tasks"]) == 4
        assert all(task["passed"] for task in report["tasks"])

    def test_default_kind_covers_all_four_benchmarks(self, capsys):
        assert main(["--mock", "benchmark", "--n", "3"]) == 0
        out = capsys.readouterr().out
        for name in ("Negation", "Generative Numeracy", "Attribute Assignment",
                      "Spatial Relationships"):
            assert name in out

    def test_unreachable_live_backend_fails_cleanly(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            llm={
                "endpoint_url": "http://127.0.0.1:9/v1/chat/completions",
                "max_retries": 0,
                "timeout": 1.0,
            },
        )
        rc = main(["--config", cfg, "benchmark", "--kind", "negation", "--n", "2"])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:")


class TestRenderCommand:
    def test_writes_an_svg_file(self, tmp_path, capsys):
        layout_file = write_layout(tmp_path, SCENE_LAYOUT)
        out = tmp_path / "scene.svg"
        assert main(["render", "--layout", layout_file, "--out", str(out)]) == 0
        assert capsys.readouterr().out == f"wrote {out}\n"
        svg = out.read_text()
        assert svg.startswith("<svg")
        assert svg.count("<rect ") == 2
        assert "a red circle" in svg and "a blue square" in svg

    def test_missing_layout_file_fails_cleanly(self, tmp_path, capsys):
        rc = main(["render", "--layout", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x")])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:")


class TestServeCommand:
    def test_host_and_port_flags_reach_the_server(self, monkeypatch):
        captured = {}
        monkeypatch.setattr("layoutlab.service.serve", lambda config: captured.update(cfg=config))
        assert main(["serve", "--host", "0.0.0.0", "--port", "9321"]) == 0
        assert captured["cfg"].host == "0.0.0.0"
        assert captured["cfg"].port == 9321

    def test_mock_flag_reaches_the_server_config(self, monkeypatch):
        captured = {}
        monkeypatch.setattr("layoutlab.service.serve", lambda config: captured.update(cfg=config))
        assert main(["--mock", "serve"]) == 0
        assert captured["cfg"].use_mock_llm is True


@pytest.mark.filterwarnings("ignore::UserWarning")
class TestOfflineGuarantee:
    """--mock must complete with zero network access."""

    @pytest.fixture(autouse=True)
    def _block_sockets(self, monkeypatch):
        def refuse(*args, **kwargs):
            raise AssertionError("network access attempted")

        monkeypatch.setattr(socket, "socket", refuse)
        monkeypatch.setattr(socket, "create_connection", refuse)
        monkeypatch.setattr(socket, "getaddrinfo", refuse)

    def test_the_guard_itself_trips(self):
        with pytest.raises(AssertionError, match="network access attempted"):
            socket.create_connection(("127.0.0.1", 9))

    def test_mock_pipeline_never_touches_the_network(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "run"
        rc = main(
            ["--mock", "--config", cfg, "pipeline", "two pandas in a forest",
             "--seed", "7", "--out", str(out)]
        )
        assert rc == 0
        assert (out / "image.png").exists()

    def test_mock_benchmark_never_touches_the_network(self, capsys):
        assert main(["--mock", "benchmark", "--kind", "spatial", "--n", "3"]) == 0
        assert "100.0" in capsys.readouterr().out

    def test_live_calls_do_trip_the_guard(self, tmp_path):
        cfg = write_config(
            tmp_path,
            llm={"endpoint_url": "http://127.0.0.1:9/v1/chat/completions", "max_retries": 0},
        )
        with pytest.raises(AssertionError, match="network access attempted"):
            main(["--config", cfg, "benchmark", "--kind", "negation", "--n", "1"])
