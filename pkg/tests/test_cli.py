import subprocess
import sys

import numpy as np
import pytest

from adte.cli import main
from adte.io import read_report_csv, read_stream_jsonl


def synth(tmp_path, name="s.jsonl", **kw):
    flags = {"classes": 20, "count": 40, "views": 8, "seed": 7}
    flags.update(kw)
    path = tmp_path / name
    argv = ["synth", "--out", str(path)]
    for key, value in flags.items():
        argv += [f"--{key.replace('_', '-')}", str(value)]
    assert main(argv) == 0
    return path


class TestSynth:
    def test_writes_deterministic_stream(self, tmp_path, capsys):
        a = synth(tmp_path, "a.jsonl")
        out = capsys.readouterr().out
        assert "prior: head mass=" in out and "offset: max=" in out
        b = synth(tmp_path, "b.jsonl")
        assert a.read_bytes() == b.read_bytes()
        header, records = read_stream_jsonl(a)
        assert header.num_classes == 20
        assert sum(1 for _ in records) == 40

    def test_binary_format(self, tmp_path):
        path = synth(tmp_path, "s.bin", format="bin")
        assert path.read_bytes()[:4] == b"ADTE"

    def test_corrupt_prob_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["synth", "--corrupt-prob", "1.5",
                  "--out", str(tmp_path / "x.jsonl")])
        assert err.value.code == 2

    def test_margin_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["synth", "--margin", "0",
                  "--out", str(tmp_path / "x.jsonl")])
        assert err.value.code == 2


class TestRun:
    def test_baseline_arm_and_report(self, tmp_path, capsys):
        stream = synth(tmp_path)
        report = tmp_path / "r.csv"
        code = main(["run", "--in", str(stream), "--measure", "shannon",
                     "--no-la", "--report-out", str(report)])
        assert code == 0
        line = capsys.readouterr().out.splitlines()[-1]
        assert line.startswith("instances=40, accuracy=")
        assert line.endswith("measure=shannon")
        summary, classes, buckets = read_report_csv(report)
        assert summary["instances"] == "40"
        assert summary["config.use_logit_adjustment"] == "false"
        assert len(classes) == 20 and len(buckets) == 10

    def test_tsallis_arm(self, tmp_path, capsys):
        stream = synth(tmp_path)
        assert main(["run", "--in", str(stream), "--measure", "tsallis",
                     "--q", "0.5"]) == 0
        assert "measure=tsallis" in capsys.readouterr().out

    def test_jsonl_and_binary_agree(self, tmp_path, capsys):
        j = synth(tmp_path, "s.jsonl")
        b = synth(tmp_path, "s.bin", format="bin")
        assert main(["run", "--in", str(j)]) == 0
        assert main(["run", "--in", str(b)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[-1] == lines[-2]  # f32 quantization in both encodings

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        stream = synth(tmp_path)
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"measure": "shannon", "bank_capacity": 5}')
        report = tmp_path / "r.csv"
        assert main(["run", "--in", str(stream), "--config", str(cfg),
                     "--measure", "adaptive",
                     "--report-out", str(report)]) == 0
        summary, _, _ = read_report_csv(report)
        assert summary["config.measure"] == "adaptive"  # flag wins
        assert summary["config.bank_capacity"] == "5"   # file survives

    def test_unlabeled_stream_runs_without_accuracy(self, tmp_path, capsys):
        stream = tmp_path / "u.jsonl"
        stream.write_text(
            '{"format":"adte-logits","version":1,"num_classes":2}\n'
            '{"id":"a","label":null,"logits":[[1,0],[0,2]]}\n')
        assert main(["run", "--in", str(stream), "--buckets", "1"]) == 0
        assert "accuracy=n/a" in capsys.readouterr().out

    def test_estimated_bucket_rank(self, tmp_path):
        stream = synth(tmp_path)
        assert main(["run", "--in", str(stream), "--bucket-rank",
                     "estimated", "--report-out",
                     str(tmp_path / "r.csv")]) == 0

    def test_missing_file_exits_one(self, tmp_path, capsys):
        assert main(["run", "--in", str(tmp_path / "nope.jsonl")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_malformed_stream_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text(
            '{"format":"adte-logits","version":1,"num_classes":2}\n'
            'garbage\n')
        assert main(["run", "--in", str(bad)]) == 1
        assert "line 2" in capsys.readouterr().err

    def test_bad_config_override_exits_one(self, tmp_path, capsys):
        stream = synth(tmp_path)
        assert main(["run", "--in", str(stream), "--filter-ratio", "2"]) == 1
        assert "filter_ratio" in capsys.readouterr().err


class TestSweepQ:
    def test_row_per_q_plus_baseline(self, tmp_path, capsys):
        stream = synth(tmp_path)
        out = tmp_path / "sweep.csv"
        assert main(["sweep-q", "--in", str(stream),
                     "--q-list", "0.1,0.5,2.0", "--k-list", "1,3,5",
                     "--report-out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "q,accuracy,mean_tcr_1,mean_tcr_3,mean_tcr_5"
        assert len(lines) == 5
        assert lines[-1].startswith("se,")

    def test_single_q_gives_two_rows(self, tmp_path):
        stream = synth(tmp_path)
        out = tmp_path / "sweep.csv"
        assert main(["sweep-q", "--in", str(stream), "--q-list", "0.5",
                     "--k-list", "3", "--report-out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 3

    def test_trend_flag_matches_column_scan(self, tmp_path, capsys):
        stream = synth(tmp_path, count=80)
        out = tmp_path / "sweep.csv"
        assert main(["sweep-q", "--in", str(stream),
                     "--q-list", "0.01,0.1,0.5,0.9,1.1,1.5,2.0",
                     "--k-list", "1,3,5,10", "--report-out", str(out)]) == 0
        flag = [ln for ln in capsys.readouterr().out.splitlines()
                if ln.startswith("tcr_nonincreasing_for_k_gt_1=")][0]
        lines = out.read_text().splitlines()
        rows = [ln.split(",") for ln in lines[1:] if not ln.startswith("se,")]
        rows.sort(key=lambda r: float(r[0]))
        ks = [int(name.rsplit("_", 1)[1]) for name in lines[0].split(",")[2:]]
        scan = all(
            float(a[2 + i]) >= float(b[2 + i])
            for a, b in zip(rows, rows[1:])
            for i, k in enumerate(ks) if k > 1)
        assert flag.endswith("true") == scan

    def test_q_of_one_is_usage_error(self, tmp_path):
        stream = synth(tmp_path)
        with pytest.raises(SystemExit) as err:
            main(["sweep-q", "--in", str(stream), "--q-list", "0.5,1.0",
                  "--k-list", "3", "--report-out", str(tmp_path / "s.csv")])
        assert err.value.code == 2

    def test_duplicate_q_is_usage_error(self, tmp_path):
        stream = synth(tmp_path)
        with pytest.raises(SystemExit) as err:
            main(["sweep-q", "--in", str(stream), "--q-list", "0.5,0.5",
                  "--k-list", "3", "--report-out", str(tmp_path / "s.csv")])
        assert err.value.code == 2


class TestAnalyzeF:
    def test_default_grid_all_pass(self, capsys):
        assert main(["analyze-f"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "p,q,f,regime,verdict"
        assert len(lines) == 1 + 20 * 38
        assert all(ln.endswith(",pass") for ln in lines[1:])

    def test_signs_by_regime(self, capsys):
        assert main(["analyze-f", "--p-grid", "0.01",
                     "--q-grid", "0.5,2.0"]) == 0
        rows = [ln.split(",") for ln in
                capsys.readouterr().out.splitlines()[1:]]
        by_regime = {r[3]: float(r[2]) for r in rows}
        assert by_regime["sub-critical"] > 0
        assert by_regime["super-unity"] < 0

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "f.csv"
        assert main(["analyze-f", "--p-grid", "0.001,0.01",
                     "--q-grid", "0.2,0.6", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 5
        assert "grid points" in capsys.readouterr().out

    def test_q_one_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["analyze-f", "--q-grid", "0.5,1.0"])
        assert err.value.code == 2

    def test_p_out_of_domain_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["analyze-f", "--p-grid", "0,0.5"])
        assert err.value.code == 2


class TestReport:
    def make_reports(self, tmp_path):
        stream = synth(tmp_path)
        a, b = tmp_path / "se.csv", tmp_path / "adte.csv"
        assert main(["run", "--in", str(stream), "--measure", "shannon",
                     "--no-la", "--report-out", str(a)]) == 0
        assert main(["run", "--in", str(stream),
                     "--report-out", str(b)]) == 0
        return a, b

    def test_single_report_pretty_print(self, tmp_path, capsys):
        a, _ = self.make_reports(tmp_path)
        capsys.readouterr()
        assert main(["report", "--in", str(a)]) == 0
        out = capsys.readouterr().out
        assert "accuracy" in out and "bucket0" in out
        assert "delta" not in out

    def test_two_reports_delta_recomputed(self, tmp_path, capsys):
        a, b = self.make_reports(tmp_path)
        capsys.readouterr()
        assert main(["report", "--in", str(a), str(b)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split()[-1] == "delta"
        acc_row = [ln for ln in lines if ln.startswith("accuracy")][0].split()
        sa, _, _ = read_report_csv(a)
        sb, _, _ = read_report_csv(b)
        want = float(sb["accuracy"]) - float(sa["accuracy"])
        assert abs(float(acc_row[-1]) - want) < 1e-6

    def test_mismatched_class_counts_exit_one(self, tmp_path, capsys):
        a, _ = self.make_reports(tmp_path)
        other = synth(tmp_path, "tiny.jsonl", classes=5, count=10)
        c = tmp_path / "c.csv"
        assert main(["run", "--in", str(other), "--buckets", "5",
                     "--report-out", str(c)]) == 0
        capsys.readouterr()
        assert main(["report", "--in", str(a), str(c)]) == 1
        assert "class count" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "adte", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "synth" in proc.stdout
