import json
import os

import numpy as np
import pytest

from modular_ppt.cli import RunConfig, config_from_args, build_parser, main, run_command
from modular_ppt.io import (
    MatrixFileError,
    load_matrix,
    matrix_from_payload,
    matrix_to_payload,
    report_body_text,
    save_matrix,
    save_report,
)
from modular_ppt.linalg import BipartiteShape
from modular_ppt.rand import complex_gaussian


class TestMatrixFiles:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        m = complex_gaussian(rng, 3, 3)
        path = str(tmp_path / "m.json")
        save_matrix(m, path, kind="generic")
        loaded, meta = load_matrix(path)
        assert np.array_equal(loaded, m)
        assert meta["kind"] == "generic"

    def test_density_kind_validated(self, tmp_path):
        path = str(tmp_path / "bad.json")
        save_matrix(0.9 * np.eye(2) / 2, path, kind="generic")
        payload = json.load(open(path))
        payload["kind"] = "density"
        with pytest.raises(MatrixFileError) as err:
            matrix_from_payload(payload)
        assert "trace" in str(err.value)

    def test_hermitian_kind_validated(self):
        payload = matrix_to_payload(np.array([[0, 1], [0, 0]], dtype=complex), kind="generic")
        payload["kind"] = "hermitian"
        with pytest.raises(MatrixFileError):
            matrix_from_payload(payload)

    def test_missing_field_named(self):
        with pytest.raises(MatrixFileError) as err:
            matrix_from_payload({"schema_version": "1", "rows": 2, "cols": 2, "re": [[0, 0], [0, 0]]})
        assert err.value.field == "im"

    def test_malformed_json_diagnostic(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(MatrixFileError):
            load_matrix(str(path))

    def test_atomic_report_write(self, tmp_path):
        path = str(tmp_path / "report.json")
        save_report({"body": {"x": 1}}, path)
        assert json.load(open(path))["body"]["x"] == 1
        assert not [p for p in os.listdir(tmp_path) if p.endswith(".tmp")]


class TestMatrixFileDensityRejection:
    def test_eye4_fails_density_contract(self, tmp_path):
        # trace 4 violates the declared density kind on load
        path = str(tmp_path / "i4.json")
        save_matrix(np.eye(4), path, kind="density", shape=BipartiteShape(2, 2))
        with pytest.raises(MatrixFileError) as err:
            load_matrix(path)
        assert "trace" in str(err.value)


class TestRunCommand:
    def test_determinism_byte_identical_bodies(self):
        cfg = RunConfig(command="gns-verify", seed=11, dims=3, samples=25)
        _, report1 = run_command(cfg)
        _, report2 = run_command(cfg)
        assert report_body_text(report1["body"]) == report_body_text(report2["body"])

    def test_ppt_check_singlet(self, tmp_path, singlet):
        path = str(tmp_path / "singlet.json")
        save_matrix(singlet, path, kind="density", shape=BipartiteShape(2, 2))
        cfg = RunConfig(command="ppt-check", dims=(2, 2), in_path=path)
        code, report = run_command(cfg)
        assert code == 0
        results = report["body"]["results"]
        assert results["ppt"] is False
        assert results["min_eig_gamma"] == pytest.approx(-0.5, abs=1e-10)

    def test_report_file_written(self, tmp_path):
        out = str(tmp_path / "report.json")
        cfg = RunConfig(command="choi", dims=(2, 2), seed=1, out_path=out)
        code, _ = run_command(cfg)
        assert code == 0
        saved = json.load(open(out))
        assert saved["body"]["command"] == "choi"
        assert "timing" in saved

    def test_shape_read_from_file(self, tmp_path, singlet):
        path = str(tmp_path / "singlet.json")
        save_matrix(singlet, path, kind="density", shape=BipartiteShape(2, 2))
        cfg = RunConfig(command="ppt-check", in_path=path)
        code, report = run_command(cfg)
        assert code == 0 and report["body"]["results"]["ppt"] is False


class TestCliMain:
    def test_exit_zero_on_pass(self, capsys):
        assert main(["choi", "--dims", "2x2", "--seed", "3"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["passed"] is True

    def test_exit_two_on_bad_input(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["ppt-check", "--in", str(path), "--dims", "2x2"]) == 2
        diagnostic = json.loads(capsys.readouterr().out)
        assert diagnostic["kind"] == "MatrixFileError"

    def test_exit_two_on_missing_dims(self, capsys):
        assert main(["hierarchy"]) == 2

    def test_exit_one_names_failing_residual(self, capsys, monkeypatch):
        from modular_ppt import cli as cli_mod

        def failing_runner(cfg):
            return {"duality": [{"passed": True}, {"passed": False}], "passed": False}, False

        monkeypatch.setitem(cli_mod.RUNNERS, "cone-check", failing_runner)
        assert main(["cone-check", "--dims", "2"]) == 1
        body = json.loads(capsys.readouterr().out)
        assert body["failure"] == "duality[1]"

    def test_tol_override_parsing(self):
        parser = build_parser()
        args = parser.parse_args(["minimize", "--in", "x.json", "--dims", "2x2",
                                  "--tol", "feas=1e-9", "--tol", "psd=1e-11"])
        cfg = config_from_args(args)
        assert cfg.tol == {"feas": 1e-9, "psd": 1e-11}

    def test_minimize_swap_value(self, tmp_path, swap22, capsys):
        path = str(tmp_path / "swap.json")
        save_matrix(swap22, path, kind="hermitian", shape=BipartiteShape(2, 2))
        code = main(["minimize", "--in", path, "--dims", "2x2", "--iters", "600", "--seed", "2"])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert abs(body["results"]["value"]) <= 1e-4
