"""CLI behavior: subcommands, exit statuses, determinism of emitted bytes."""

import json
import math

import numpy as np
import pytest

from tensorlsh import angle_between, read_tensor
from tensorlsh.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGen:
    def test_dense_batch(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "gen", "dense", "--order", "3", "--dim", "4",
            "--count", "3", "--seed", "1", "--out", str(tmp_path),
        )
        assert code == EXIT_OK
        paths = out.strip().splitlines()
        assert len(paths) == 3
        for p in paths:
            t = read_tensor(p)
            assert t.shape == (4, 4, 4)

    def test_cp_and_tt(self, tmp_path, capsys):
        for what in ("cp", "tt"):
            code, out, _ = run(
                capsys, "gen", what, "--modes", "3,4,2", "--rank", "2",
                "--seed", "2", "--out", str(tmp_path), "--prefix", what,
            )
            assert code == EXIT_OK
            t = read_tensor(out.strip().splitlines()[0])
            assert t.shape == (3, 4, 2) and t.rank == 2

    def test_pair_angle_measured(self, tmp_path, capsys):
        requested = 0.5236
        code, out, _ = run(
            capsys, "gen", "pair", "--modes", "6,6,6", "--angle", str(requested),
            "--seed", "3", "--out", str(tmp_path),
        )
        assert code == EXIT_OK
        pa, pb = out.strip().splitlines()
        measured = angle_between(read_tensor(pa), read_tensor(pb))
        assert measured == pytest.approx(requested, abs=1e-9)

    def test_pair_needs_exactly_one_target(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "gen", "pair", "--modes", "4,4", "--out", str(tmp_path)
        )
        assert code == EXIT_USAGE and "error" in err
        code, _, err = run(
            capsys, "gen", "pair", "--modes", "4,4", "--angle", "0.5",
            "--distance", "1.0", "--out", str(tmp_path),
        )
        assert code == EXIT_USAGE

    def test_deterministic_bytes(self, tmp_path, capsys):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            run(capsys, "gen", "dense", "--modes", "3,3", "--seed", "5",
                "--out", str(out))
        fa, fb = out_a / "tensor_0000.tlsh", out_b / "tensor_0000.tlsh"
        assert fa.read_bytes() == fb.read_bytes()

    def test_bad_modes_usage_error(self, tmp_path, capsys):
        code, _, _ = run(capsys, "gen", "dense", "--modes", "3,x", "--out", str(tmp_path))
        assert code == EXIT_USAGE
        code, _, _ = run(capsys, "gen", "dense", "--out", str(tmp_path))
        assert code == EXIT_USAGE


class TestHash:
    @pytest.fixture()
    def tensor_files(self, tmp_path, capsys):
        run(capsys, "gen", "dense", "--modes", "4,4,4", "--count", "3",
            "--seed", "7", "--out", str(tmp_path))
        return sorted(str(p) for p in tmp_path.glob("*.tlsh"))

    def test_listing_shape(self, tensor_files, capsys):
        code, out, _ = run(
            capsys, "hash", *tensor_files, "--family", "cp-e2lsh",
            "--rank", "2", "--codes", "5", "--width", "1.0", "--seed", "11",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert len(lines) == 3
        for line in lines:
            item_id, codes = line.split("\t")
            assert len(codes.split()) == 5
        assert [l.split("\t")[0] for l in lines] == sorted(l.split("\t")[0] for l in lines)

    def test_byte_identical_runs(self, tensor_files, capsys):
        args = ("hash", *tensor_files, "--family", "tt-srp", "--rank", "3",
                "--codes", "8", "--seed", "13")
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        assert out1 == out2

    def test_out_file(self, tensor_files, tmp_path, capsys):
        listing = tmp_path / "codes.txt"
        code, out, _ = run(
            capsys, "hash", *tensor_files, "--out", str(listing), "--seed", "17"
        )
        assert code == EXIT_OK and out == ""
        assert listing.read_text().count("\n") == 3

    def test_missing_input_io_error(self, capsys):
        code, _, err = run(capsys, "hash", "/nonexistent/file.tlsh")
        assert code == EXIT_IO and "error" in err

    def test_corrupt_input_io_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.tlsh"
        bad.write_bytes(b"garbage bytes here")
        code, _, _ = run(capsys, "hash", str(bad))
        assert code == EXIT_IO

    def test_zero_codes_usage_error(self, tensor_files, capsys):
        code, _, _ = run(capsys, "hash", *tensor_files, "--codes", "0")
        assert code == EXIT_USAGE


class TestValidate:
    def test_small_suite_passes_and_writes(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "validate", "--seed", "42", "--trials", "400",
            "--out", str(tmp_path),
        )
        assert (tmp_path / "validation_report.txt").exists()
        assert (tmp_path / "validation_report.csv").exists()
        assert code in (0, 1)  # tiny trials: statistical, usually 0
        assert out.startswith(("PASS", "FAIL", "INFO"))

    def test_byte_identical_reports(self, tmp_path, capsys):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            run(capsys, "validate", "--seed", "9", "--trials", "200", "--out", str(out))
        assert (out_a / "validation_report.txt").read_bytes() == (
            out_b / "validation_report.txt"
        ).read_bytes()
        assert (out_a / "validation_report.csv").read_bytes() == (
            out_b / "validation_report.csv"
        ).read_bytes()

    def test_bad_trials_usage(self, tmp_path, capsys):
        code, _, _ = run(capsys, "validate", "--trials", "0", "--out", str(tmp_path))
        assert code == EXIT_USAGE


class TestBench:
    def test_csv_output(self, capsys):
        code, out, _ = run(
            capsys, "bench", "--dims", "8,16", "--order", "3", "--rank", "2",
            "--reps", "3",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "kind,N,d,R,R_hat,K,median_ns"
        assert len(lines) == 1 + 4  # 2 kinds x 2 dims
        for line in lines[1:]:
            parts = line.split(",")
            assert len(parts) == 7
            assert float(parts[-1]) > 0

    def test_bad_dims_usage(self, capsys):
        code, _, _ = run(capsys, "bench", "--dims", "8,oops")
        assert code == EXIT_USAGE


class TestIndexCommands:
    def test_build_and_query_round_trip(self, tmp_path, capsys):
        run(capsys, "gen", "dense", "--modes", "4,4", "--count", "5",
            "--seed", "19", "--out", str(tmp_path))
        files = sorted(str(p) for p in tmp_path.glob("tensor_*.tlsh"))
        manifest = tmp_path / "index.json"
        code, out, _ = run(
            capsys, "index-build", *files, "--family", "cp-e2lsh", "--rank", "2",
            "--codes", "3", "--bands", "8", "--seed", "23",
            "--manifest", str(manifest),
        )
        assert code == EXIT_OK and "indexed 5 items" in out
        code, out, _ = run(capsys, "index-query", files[2], "--manifest", str(manifest))
        assert code == EXIT_OK
        ids = [int(line) for line in out.strip().splitlines()]
        assert 2 in ids and ids[0] == 2  # exact self-match ranks first

    def test_query_missing_manifest(self, tmp_path, capsys):
        code, _, _ = run(
            capsys, "index-query", "nothing.tlsh", "--manifest", str(tmp_path / "no.json")
        )
        assert code == EXIT_IO

    def test_mixed_shapes_rejected(self, tmp_path, capsys):
        run(capsys, "gen", "dense", "--modes", "4,4", "--seed", "1",
            "--out", str(tmp_path), "--prefix", "a")
        run(capsys, "gen", "dense", "--modes", "5,5", "--seed", "1",
            "--out", str(tmp_path), "--prefix", "b")
        code, _, _ = run(
            capsys, "index-build", str(tmp_path / "a_0000.tlsh"),
            str(tmp_path / "b_0000.tlsh"), "--manifest", str(tmp_path / "m.json"),
        )
        assert code == EXIT_USAGE


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, tmp_path, capsys):
        cfg = tmp_path / "conf.json"
        cfg.write_text(json.dumps({"modes": "3,3", "seed": 5, "count": 2}))
        code, out, _ = run(
            capsys, "--config", str(cfg), "gen", "dense", "--out", str(tmp_path / "x"),
        )
        assert code == EXIT_OK
        assert len(out.strip().splitlines()) == 2  # count from config
        code, out, _ = run(
            capsys, "--config", str(cfg), "gen", "dense", "--count", "1",
            "--out", str(tmp_path / "y"),
        )
        assert len(out.strip().splitlines()) == 1  # explicit flag wins

    def test_config_not_json(self, tmp_path, capsys):
        cfg = tmp_path / "conf.json"
        cfg.write_text("not json at all")
        code, _, _ = run(capsys, "--config", str(cfg), "gen", "dense", "--modes", "3,3")
        assert code == EXIT_USAGE

    def test_config_missing_file(self, capsys):
        code, _, _ = run(capsys, "--config", "/no/such.json", "gen", "dense", "--modes", "3,3")
        assert code == EXIT_IO
