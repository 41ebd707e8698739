import io
import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from pointint.cli import (JobSpec, main, parse_complex, parse_config, run)
from pointint.greenfn import PointInteractionConfig


class TestParsers:
    def test_complex_forms(self):
        assert parse_complex("1") == 1.0
        assert parse_complex("1+0.3i") == 1 + 0.3j
        assert parse_complex("2-0.5i") == 2 - 0.5j
        assert parse_complex("0.3i") == 0.3j
        with pytest.raises(ValueError):
            parse_complex("one")

    def test_inline_config(self):
        cfg = parse_config("0:2,0.5:1.5", None)
        assert cfg.positions == (0.0, 0.5)
        assert cfg.strengths == (2.0, 1.5)

    def test_inline_config_sorted(self):
        cfg = parse_config("1:1,0:2", None)
        assert cfg.positions == (0.0, 1.0)
        assert cfg.strengths == (2.0, 1.0)

    def test_file_config(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps([{"a": 0.0, "V": 2.0}, {"a": 1.0, "V": 1.0}]))
        cfg = parse_config(None, str(path))
        assert cfg.positions == (0.0, 1.0)

    def test_both_sources_rejected(self):
        with pytest.raises(ValueError):
            parse_config("0:1", "file.json")

    def test_bad_entry_rejected(self):
        with pytest.raises(ValueError):
            parse_config("0;1", None)


class TestJobSpec:
    def test_unknown_command(self):
        with pytest.raises(ValueError):
            JobSpec(command="explode")

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            JobSpec(command="green", m=1.0, grid=(0.0, 1.0, 0))
        with pytest.raises(ValueError):
            JobSpec(command="green", m=1.0, grid=(2.0, 1.0, 5))


def run_job(job):
    out, err = io.StringIO(), io.StringIO()
    code = run(job, out, err)
    return code, out.getvalue(), err.getvalue()


class TestRun:
    def test_green_at_point_example(self):
        job = JobSpec(command="green", m=1.0,
                      config=PointInteractionConfig((0.0,), (2.0,)),
                      at=(0.0, 0.0))
        code, out, err = run_job(job)
        assert code == 0 and err == ""
        assert json.loads(out) == {"value_re": 0.25, "value_im": 0.0}

    def test_tau_example(self):
        job = JobSpec(command="tau", m=1.0,
                      config=PointInteractionConfig((0.0, float(np.log(2))),
                                                    (2.0, 2.0)))
        code, out, _ = run_job(job)
        assert code == 0
        assert json.loads(out) == {"value_re": 0.9375, "value_im": 0.0}

    def test_corr(self):
        job = JobSpec(command="corr", m=1.0,
                      config=PointInteractionConfig((0.0,), (2.0,)))
        code, out, _ = run_job(job)
        assert code == 0
        assert json.loads(out)["value_re"] == pytest.approx(2 ** -0.5)

    def test_formfactor(self):
        job = JobSpec(command="formfactor",
                      extra={"k": 1, "l": 1, "lam": 0.3, "mu": -0.2, "nu": 0.5,
                             "element": False})
        code, out, _ = run_job(job)
        assert code == 0
        assert json.loads(out)["value_re"] == pytest.approx(0.8)

    def test_numerical_failure_exit_code(self):
        job = JobSpec(command="corr", m=1.0,
                      config=PointInteractionConfig((0.0,), (-2.0,)))
        code, out, err = run_job(job)
        assert code == 3 and out == ""
        payload = json.loads(err)
        assert payload["kind"] == "numerical"
        assert payload["type"] == "SingularExtension"

    def test_validation_failure_exit_code(self):
        job = JobSpec(command="green", m=1.0,
                      config=PointInteractionConfig((), ()))  # no at/grid
        code, out, err = run_job(job)
        assert code == 2
        assert json.loads(err)["kind"] == "validation"

    def test_grid_csv_format(self):
        job = JobSpec(command="green", m=1.0,
                      config=PointInteractionConfig((0.0,), (2.0,)),
                      grid=(-1.0, 1.0, 3), output="csv")
        code, out, _ = run_job(job)
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "x,y,re,im"
        assert len(lines) == 1 + 9  # row-major 3x3
        first = lines[1].split(",")
        assert first[0] == "-1" and first[1] == "-1"
        assert float(first[2]) > 0

    def test_grid_row_major_order(self):
        job = JobSpec(command="green", m=1.0,
                      config=PointInteractionConfig((), ()),
                      grid=(0.0, 1.0, 2), output="csv")
        _, out, _ = run_job(job)
        rows = [line.split(",")[:2] for line in out.strip().split("\n")[1:]]
        assert rows == [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]

    def test_byte_identical_reruns(self):
        job = JobSpec(command="green", m=parse_complex("1+0.3i"),
                      config=PointInteractionConfig((0.0, 1.0), (2.0, 1.0)),
                      grid=(-2.0, 2.0, 5), output="csv")
        _, first, _ = run_job(job)
        _, second, _ = run_job(job)
        assert first == second

    def test_thread_count_does_not_change_bytes(self):
        job = JobSpec(command="green", m=1.0,
                      config=PointInteractionConfig((0.0,), (2.0,)),
                      grid=(-1.0, 1.0, 4), output="csv")
        old = os.environ.get("POINTINT_THREADS")
        try:
            os.environ["POINTINT_THREADS"] = "1"
            _, serial, _ = run_job(job)
            os.environ["POINTINT_THREADS"] = "4"
            _, threaded, _ = run_job(job)
        finally:
            if old is None:
                os.environ.pop("POINTINT_THREADS", None)
            else:
                os.environ["POINTINT_THREADS"] = old
        assert serial == threaded

    def test_crosscheck_passes(self):
        job = JobSpec(command="crosscheck", seed=7, extra={"n": 3, "tol": 1e-9})
        code, out, err = run_job(job)
        assert code == 0, err
        report = json.loads(out)
        assert report["max_rel_dev"] < 1e-9
        assert report["passed"] is True
        assert len(report["config"]) == 3

    def test_crosscheck_seed_reproducible(self):
        job = JobSpec(command="crosscheck", seed=21, extra={"n": 2, "tol": 1e-9})
        _, first, _ = run_job(job)
        _, second, _ = run_job(job)
        assert first == second

    def test_gaussian_check_small(self):
        job = JobSpec(command="gaussian-check", seed=123,
                      extra={"kind": "real", "samples": 60_000,
                             "m_dim": 2, "n_dim": 2})
        code, out, _ = run_job(job)
        assert code == 0
        report = json.loads(out)
        assert report["passed"] is True
        assert report["seed"] == 123


class TestClickInterface:
    def test_green_command_line(self):
        runner = CliRunner()
        result = runner.invoke(main, ["green", "--m", "1", "--points", "0:2",
                                      "--at", "0,0"])
        assert result.exit_code == 0
        assert json.loads(result.output) == {"value_re": 0.25, "value_im": 0.0}

    def test_tau_command_line(self):
        runner = CliRunner()
        result = runner.invoke(main, ["tau", "--m", "1", "--points",
                                      "0:2,0.6931471805599453:2"])
        assert result.exit_code == 0
        assert json.loads(result.output)["value_re"] == 0.9375

    def test_invalid_m_exits_two(self):
        runner = CliRunner()
        result = runner.invoke(main, ["green", "--m", "bogus", "--at", "0,0"])
        assert result.exit_code == 2

    def test_nonpositive_m_exits_two(self):
        runner = CliRunner()
        result = runner.invoke(main, ["green", "--m", "-1", "--at", "0,0"])
        assert result.exit_code == 2

    def test_singular_extension_exits_three(self):
        runner = CliRunner()
        result = runner.invoke(main, ["corr", "--m", "1", "--points", "0:-2"])
        assert result.exit_code == 3

    def test_formfactor_element_flag(self):
        runner = CliRunner()
        result = runner.invoke(main, ["formfactor", "--k", "2", "--l", "0",
                                      "--lam", "0.4", "--mu", "0", "--nu", "0",
                                      "--element"])
        assert result.exit_code == 0
        assert json.loads(result.output)["value_re"] == pytest.approx(
            0.4 / np.sqrt(2.0))

    def test_config_file_roundtrip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps([{"a": 0.0, "V": 2.0}]))
        runner = CliRunner()
        result = runner.invoke(main, ["green", "--m", "1", "--config", str(path),
                                      "--at", "0,0"])
        assert result.exit_code == 0
        assert json.loads(result.output)["value_re"] == 0.25
