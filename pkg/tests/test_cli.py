# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import json

import numpy as np
import pandas as pd
import pytest

from core.cli.commands import main
from core.exceptions import ConditioningError, EXIT_INVALID_FLAGS, EXIT_NUMERICAL_FAILURE, EXIT_OK, EXIT_PARSE_ERROR
from core.managers.bench_manager import gen_instance
from core.managers.eb_manager import EBSolver
from core.models.experiment import ExperimentSpec
from core.services.storage_service import StorageService


def _report(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return dict(line.split("=", 1) for line in lines)


@pytest.fixture
def triples(tmp_path, small_data):
    path = tmp_path / "observed.csv"
    StorageService().write_triples(path, small_data)
    return path


class TestFitCommand:
    def test_scalar_input_reports_monotone_trace(self, tmp_path):
        source = tmp_path / "one.csv"
        source.write_text("row,col,value\n1,1,2.0\n", encoding="utf-8")
        out = tmp_path / "completed.csv"

        assert main(["fit", str(source), "--sigma0", "1", "--out", str(out)]) == EXIT_OK
        report = _report(tmp_path / "completed.report.txt")
        trace = [float(v) for v in report["loglik_trace"].split(";")]
        assert len(trace) == int(report["iterations"]) + 1
        assert all(b >= a - 1e-8 for a, b in zip(trace, trace[1:]))
        assert float(report["loglik_final"]) == trace[-1]
        assert {"stop_reason", "sigma_sq_hat", "sigma_eig_min", "sigma_eig_max"} <= set(report)
        assert pd.read_csv(out, header=None).shape == (1, 1)

    def test_reruns_are_byte_identical(self, tmp_path, triples):
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.csv"
            assert main(["fit", str(triples), "--out", str(out), "--seed", "3"]) == EXIT_OK
            outputs.append((out.read_bytes(), (tmp_path / f"{name}.report.txt").read_bytes()))
        assert outputs[0] == outputs[1]

    def test_dense_output_shape_and_explicit_report(self, tmp_path, triples, small_data):
        out, report = tmp_path / "m.csv", tmp_path / "fit.txt"
        assert main(["fit", str(triples), "--out", str(out), "--report", str(report)]) == EXIT_OK
        assert pd.read_csv(out, header=None).shape == small_data.shape
        assert _report(report)["n_observed"] == str(small_data.size)

    def test_predict_writes_requested_cells(self, tmp_path, triples):
        cells = tmp_path / "cells.csv"
        cells.write_text("row,col\n2,1\n1,5\n", encoding="utf-8")
        out = tmp_path / "pred.csv"
        assert main(["fit", str(triples), "--out", str(out), "--predict", str(cells)]) == EXIT_OK
        frame = pd.read_csv(out)
        assert frame[["row", "col"]].values.tolist() == [[2, 1], [1, 5]]
        assert np.all(np.isfinite(frame["value"]))

    def test_soft_impute_report_has_lambda(self, tmp_path, triples):
        out = tmp_path / "si.csv"
        assert main(["fit", str(triples), "--algorithm", "soft_impute", "--out", str(out)]) == EXIT_OK
        assert float(_report(tmp_path / "si.report.txt")["lambda"]) > 0

    def test_config_file_sets_defaults(self, tmp_path, triples):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"em": {"max_iters": 1}}), encoding="utf-8")
        out = tmp_path / "c.csv"
        assert main(["fit", str(triples), "--out", str(out), "--config", str(config)]) == EXIT_OK
        assert _report(tmp_path / "c.report.txt")["iterations"] == "1"

    def test_empty_file_is_a_parse_error(self, tmp_path):
        source = tmp_path / "empty.csv"
        source.write_text("", encoding="utf-8")
        out = tmp_path / "out.csv"
        assert main(["fit", str(source), "--out", str(out)]) == EXIT_PARSE_ERROR
        assert not out.exists()

    @pytest.mark.parametrize(
        "flags",
        [
            ["--eps1", "-1"],
            ["--sigma0", "zero"],
            ["--max-iters", "0"],
            ["--algorithm", "svt"],
            ["--bogus"],
        ],
    )
    def test_invalid_flags(self, tmp_path, triples, flags):
        assert main(["fit", str(triples), "--out", str(tmp_path / "x.csv"), *flags]) == EXIT_INVALID_FLAGS

    def test_broken_config_file(self, tmp_path, triples):
        config = tmp_path / "config.json"
        config.write_text("{not json", encoding="utf-8")
        assert main(["fit", str(triples), "--out", str(tmp_path / "x.csv"), "--config", str(config)]) == EXIT_INVALID_FLAGS

    def test_numerical_failure(self, tmp_path, triples, monkeypatch):
        def fail(self, data):
            raise ConditioningError("factorization failed", iteration=4)

        monkeypatch.setattr(EBSolver, "fit", fail)
        out = tmp_path / "x.csv"
        assert main(["fit", str(triples), "--out", str(out)]) == EXIT_NUMERICAL_FAILURE
        assert not out.exists()


class TestHoldoutCommand:
    def test_synthetic_holdout_reports_error(self, tmp_path):
        M, data = gen_instance(ExperimentSpec(p=40, q=6, r=2, sigma_sq=0.0, fill=1.0, seed=9))
        source = tmp_path / "full.csv"
        StorageService().write_triples(source, data)
        out = tmp_path / "holdout.txt"

        assert main(["holdout", str(source), "--sample-size", "150", "--seed", "3",
                     "--sigma0", "1", "--max-iters", "5", "--out", str(out)]) == EXIT_OK
        report = _report(out)
        assert report["n_train"] == "150"
        assert report["n_holdout"] == "90"
        assert 0.0 <= float(report["error"]) < 1.0

    def test_single_heldout_entry(self, tmp_path, triples, small_data):
        out = tmp_path / "holdout.txt"
        assert main(["holdout", str(triples), "--sample-size", str(small_data.size - 1), "--out", str(out)]) == EXIT_OK
        assert np.isfinite(float(_report(out)["error"]))

    def test_sample_as_large_as_data(self, tmp_path, triples, small_data):
        code = main(["holdout", str(triples), "--sample-size", str(small_data.size), "--out", str(tmp_path / "h.txt")])
        assert code == EXIT_INVALID_FLAGS


class TestBenchCommand:
    def test_sweep_csv_and_cell_lines(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = main(["bench", "--axis", "fill", "--grid", "0.3,0.6", "--p", "30", "--q", "6", "--r", "2",
                     "--replicates", "1", "--out", str(out)])
        assert code == EXIT_OK
        frame = pd.read_csv(out)
        assert frame["axis_value"].tolist() == [0.3, 0.6]
        assert frame["algorithm"].tolist() == ["eb", "eb"]
        printed = capsys.readouterr().out.splitlines()
        assert printed[0].startswith("fill=0.3 eb: error1=")
        assert printed[-1].startswith("Saved 2 cells")

    def test_single_value_grid(self, tmp_path):
        out = tmp_path / "one.csv"
        assert main(["bench", "--axis", "rank", "--grid", "1", "--p", "20", "--q", "4", "--r", "2",
                     "--replicates", "1", "--out", str(out)]) == EXIT_OK
        assert len(pd.read_csv(out)) == 1

    @pytest.mark.parametrize(
        "flags",
        [
            ["--axis", "width", "--grid", "1"],
            ["--axis", "fill", "--grid", ""],
            ["--axis", "fill", "--grid", "1.5"],
            ["--axis", "rank", "--grid", "0"],
        ],
    )
    def test_invalid_sweep(self, tmp_path, flags):
        out = tmp_path / "s.csv"
        code = main(["bench", *flags, "--p", "20", "--q", "4", "--r", "2", "--replicates", "1", "--out", str(out)])
        assert code == EXIT_INVALID_FLAGS
        assert not out.exists()
