"""CLI subcommands: exit codes, printed values, and byte determinism."""

import textwrap

import numpy as np
import pytest

from fdopt.cli import cli_dispatch
from fdopt.config import load_config
from fdopt.formats import (
    parse_report_csv,
    read_features,
    read_metrics_log,
    read_stats,
    write_features,
    write_metrics_log,
    write_report_csv,
    write_stats,
)
from fdopt.frechet import fd, make_reference, stats_from_features
from fdopt.metrics import build_report
from fdopt.representations import featurize
from fdopt.trainer import sample_target

CONFIG_TEXT = textwrap.dedent(
    """\
    [trainer]
    seed = 0
    batch_size = 32
    total_steps = 25
    warmup_steps = 3
    peak_lr = 0.001
    z_dim = 4
    hidden = 16, 16
    out_dim = 2
    pretrain_steps = 20

    [estimator]
    kind = ema
    beta = 0.9

    [ensemble]
    rep.0.kind = identity
    rep.1.kind = tanh_rf
    rep.1.seed = 1
    rep.1.out_dim = 6

    [target]
    sample_seed = 5
    comp.0.weight = 0.4
    comp.0.mean = -2.0, 0.0
    comp.0.cov = 0.3, 0.0, 0.0, 0.2
    comp.1.weight = 0.6
    comp.1.mean = 2.5, 1.0
    comp.1.cov = 0.4, 0.1, 0.1, 0.3

    [source]
    sample_seed = 9
    comp.0.weight = 1.0
    comp.0.mean = 0.0, -1.0
    comp.0.cov = 0.5, 0.0, 0.0, 0.5
    """
)


@pytest.fixture()
def workspace(tmp_path):
    """Config plus target train/val sample files, all under one directory."""
    config = tmp_path / "run.cfg"
    config.write_text(CONFIG_TEXT, encoding="utf-8")
    target = load_config(str(config)).train.target
    write_features(str(tmp_path / "train.bin"), sample_target(target, 1024, "split-a"))
    write_features(str(tmp_path / "val.bin"), sample_target(target, 512, "split-b"))
    return tmp_path


def path(workspace, name):
    return str(workspace / name)


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        assert cli_dispatch(["frobnicate"]) == 1
        assert "error" in capsys.readouterr().err

    def test_no_arguments(self):
        assert cli_dispatch([]) == 1

    def test_missing_required_flag(self):
        assert cli_dispatch(["compute-stats", "--features", "x.bin"]) == 1

    def test_help_exits_zero(self, capsys):
        assert cli_dispatch(["--help"]) == 0
        assert "subcommand" not in capsys.readouterr().err

    def test_sample_rejects_nonpositive_n(self, workspace):
        code = cli_dispatch(
            ["sample", "--ckpt", "x", "--n", "0", "--out", path(workspace, "g.bin")]
        )
        assert code == 1


class TestDataErrors:
    def test_missing_file_is_exit_2(self, workspace):
        code = cli_dispatch(
            [
                "compute-stats",
                "--features",
                path(workspace, "absent.bin"),
                "--out",
                path(workspace, "s.bin"),
            ]
        )
        assert code == 2

    def test_bad_magic_is_exit_2(self, workspace, capsys):
        junk = workspace / "junk.bin"
        junk.write_bytes(b"JUNKJUNKJUNK")
        code = cli_dispatch(
            [
                "compute-stats",
                "--features",
                str(junk),
                "--out",
                path(workspace, "s.bin"),
            ]
        )
        assert code == 2
        assert "magic" in capsys.readouterr().err

    def test_config_typo_is_exit_2(self, workspace, capsys):
        bad = workspace / "bad.cfg"
        bad.write_text("[estimator]\nbta = 0.9\n", encoding="utf-8")
        code = cli_dispatch(
            [
                "train",
                "--config",
                str(bad),
                "--out",
                path(workspace, "m.ckpt"),
            ]
        )
        assert code == 2
        assert "unknown key" in capsys.readouterr().err

    def test_pretrain_without_source_is_exit_2(self, workspace, capsys):
        text = CONFIG_TEXT.split("[source]")[0]
        cfg = workspace / "nosource.cfg"
        cfg.write_text(text, encoding="utf-8")
        code = cli_dispatch(
            ["pretrain", "--config", str(cfg), "--out", path(workspace, "m.ckpt")]
        )
        assert code == 2
        assert "[source]" in capsys.readouterr().err


class TestComputeStatsAndFd:
    def test_compute_stats_matches_library(self, workspace):
        out = path(workspace, "train.stats")
        assert cli_dispatch(
            ["compute-stats", "--features", path(workspace, "train.bin"), "--out", out]
        ) == 0
        rows = read_features(path(workspace, "train.bin"))
        want = stats_from_features(rows)
        got = read_stats(out)
        assert np.array_equal(got.mu, want.mu)
        assert np.array_equal(got.sigma, want.sigma)

    def test_fd_self_prints_zero(self, workspace, capsys):
        out = path(workspace, "train.stats")
        cli_dispatch(
            ["compute-stats", "--features", path(workspace, "train.bin"), "--out", out]
        )
        assert cli_dispatch(["fd", "--ref", out, "--gen", out]) == 0
        assert capsys.readouterr().out.strip() == "0.000000"

    def test_fd_on_features_matches_library(self, workspace, capsys):
        stats_path = path(workspace, "train.stats")
        cli_dispatch(
            [
                "compute-stats",
                "--features",
                path(workspace, "train.bin"),
                "--out",
                stats_path,
            ]
        )
        assert (
            cli_dispatch(
                ["fd", "--ref", stats_path, "--gen", path(workspace, "val.bin")]
            )
            == 0
        )
        printed = capsys.readouterr().out.strip()
        ref = make_reference(read_stats(stats_path))
        want = fd(ref, stats_from_features(read_features(path(workspace, "val.bin"))))
        assert printed == f"{want:.6f}"

    def test_fd_rep_featurizes_raw_samples(self, workspace, capsys):
        single = workspace / "single.cfg"
        single.write_text(
            "[ensemble]\nrep.0.kind = tanh_rf\nrep.0.seed = 1\nrep.0.out_dim = 6\n",
            encoding="utf-8",
        )
        spec = load_config(str(single)).ensemble.specs[0]
        train_feat = featurize(spec, read_features(path(workspace, "train.bin")))
        stats_path = path(workspace, "rep.stats")
        write_stats(stats_path, stats_from_features(train_feat))
        assert (
            cli_dispatch(
                [
                    "fd",
                    "--ref",
                    stats_path,
                    "--gen",
                    path(workspace, "val.bin"),
                    "--rep",
                    str(single),
                ]
            )
            == 0
        )
        printed = capsys.readouterr().out.strip()
        val_feat = featurize(spec, read_features(path(workspace, "val.bin")))
        want = fd(make_reference(read_stats(stats_path)), stats_from_features(val_feat))
        assert printed == f"{want:.6f}"

    def test_fd_rep_rejects_multi_rep_config(self, workspace, capsys):
        stats_path = path(workspace, "train.stats")
        cli_dispatch(
            [
                "compute-stats",
                "--features",
                path(workspace, "train.bin"),
                "--out",
                stats_path,
            ]
        )
        code = cli_dispatch(
            [
                "fd",
                "--ref",
                stats_path,
                "--gen",
                path(workspace, "val.bin"),
                "--rep",
                path(workspace, "run.cfg"),
            ]
        )
        assert code == 2
        assert "exactly one representation" in capsys.readouterr().err


def run_pipeline(workspace, out_dir, seed_args=()):
    """pretrain -> train --init -> sample -> fdr, returning output paths."""
    out_dir.mkdir(exist_ok=True)
    cfg = path(workspace, "run.cfg")
    pre = str(out_dir / "pre.ckpt")
    post = str(out_dir / "post.ckpt")
    log = str(out_dir / "log.csv")
    gen = str(out_dir / "gen.bin")
    report = str(out_dir / "report.csv")
    assert cli_dispatch(["pretrain", "--config", cfg, "--out", pre]) == 0
    assert (
        cli_dispatch(
            ["train", "--config", cfg, "--out", post, "--log", log, "--init", pre]
        )
        == 0
    )
    assert (
        cli_dispatch(
            ["sample", "--ckpt", post, "--n", "512", "--seed", "3", "--out", gen]
        )
        == 0
    )
    assert (
        cli_dispatch(
            [
                "fdr",
                "--train",
                path(workspace, "train.bin"),
                "--val",
                path(workspace, "val.bin"),
                "--gen",
                gen,
                "--config",
                cfg,
                "--out",
                report,
            ]
        )
        == 0
    )
    return {"pre": pre, "post": post, "log": log, "gen": gen, "report": report}


class TestPipeline:
    def test_full_pipeline_deterministic_bytes(self, workspace):
        first = run_pipeline(workspace, workspace / "a")
        second = run_pipeline(workspace, workspace / "b")
        for key in first:
            with open(first[key], "rb") as fa, open(second[key], "rb") as fb:
                assert fa.read() == fb.read(), f"{key} differs between runs"

    def test_report_csv_matches_library_recomputation(self, workspace, tmp_path):
        outputs = run_pipeline(workspace, workspace / "a")
        ensemble = load_config(path(workspace, "run.cfg")).ensemble
        train_rows = read_features(path(workspace, "train.bin"))
        stats = [
            stats_from_features(featurize(spec, train_rows))
            for spec in ensemble.specs
        ]
        want = build_report(
            ensemble,
            stats,
            read_features(path(workspace, "val.bin")),
            read_features(outputs["gen"]),
        )
        recomputed = tmp_path / "recomputed.csv"
        write_report_csv(want, str(recomputed))
        with open(outputs["report"], "rb") as got, open(recomputed, "rb") as exp:
            assert got.read() == exp.read()
        with open(outputs["report"], "r", encoding="ascii") as handle:
            _, fdr_k = parse_report_csv(handle.read())
        assert fdr_k == pytest.approx(want.fdr_k, rel=1e-9)

    def test_fdr_accepts_per_rep_stats_files(self, workspace):
        outputs = run_pipeline(workspace, workspace / "a")
        ensemble = load_config(path(workspace, "run.cfg")).ensemble
        train_rows = read_features(path(workspace, "train.bin"))
        stats_paths = []
        for i, spec in enumerate(ensemble.specs):
            stats_path = path(workspace, f"rep{i}.stats")
            write_stats(stats_path, stats_from_features(featurize(spec, train_rows)))
            stats_paths.append(stats_path)
        report2 = path(workspace, "report2.csv")
        assert (
            cli_dispatch(
                [
                    "fdr",
                    "--train",
                    *stats_paths,
                    "--val",
                    path(workspace, "val.bin"),
                    "--gen",
                    outputs["gen"],
                    "--config",
                    path(workspace, "run.cfg"),
                    "--out",
                    report2,
                ]
            )
            == 0
        )
        with open(outputs["report"], "rb") as fa, open(report2, "rb") as fb:
            assert fa.read() == fb.read()

    def test_train_init_dim_mismatch_is_exit_2(self, workspace, capsys):
        wrong = path(workspace, "wrong.ckpt")
        from fdopt.formats import write_checkpoint

        write_checkpoint(wrong, [np.ones((3, 5))], [np.zeros(3)])
        code = cli_dispatch(
            [
                "train",
                "--config",
                path(workspace, "run.cfg"),
                "--out",
                path(workspace, "m.ckpt"),
                "--init",
                wrong,
            ]
        )
        assert code == 2
        assert "do not match" in capsys.readouterr().err

    def test_train_log_has_expected_shape(self, workspace):
        outputs = run_pipeline(workspace, workspace / "a")
        labels, rows = read_metrics_log(outputs["log"])
        assert labels == ["rep0_identity", "rep1_tanh_rf"]
        assert rows[0][0] == "warm_start" and rows[-1][0] == "final"
        assert sum(1 for r in rows if r[0] == "train") == 25

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergent_training_is_exit_3(self, workspace, capsys):
        hot = workspace / "hot.cfg"
        hot.write_text(
            CONFIG_TEXT.replace("peak_lr = 0.001", "peak_lr = 1e200"),
            encoding="utf-8",
        )
        code = cli_dispatch(
            ["train", "--config", str(hot), "--out", path(workspace, "m.ckpt")]
        )
        assert code == 3
        assert "numerical failure" in capsys.readouterr().err


class TestReport:
    def test_summary_lines(self, tmp_path, capsys):
        log = str(tmp_path / "log.csv")
        rows = [
            ("warm_start", 0, 0.0, 2.0, 4.0, 1.0),
            ("train", 1, 1e-3, 1.0, 2.5, 0.6),
            ("train", 2, 1e-3, 0.8, 3.0, 0.2),
            ("final", 3, 0.0, 0.5, 2.75, 0.3),
        ]
        write_metrics_log(log, ["rep0_identity", "rep1_affine"], rows)
        assert cli_dispatch(["report", "--log", log]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "rep0_identity first=4 last=2.75 best=2.5 step=1"
        assert lines[1] == "rep1_affine first=1 last=0.3 best=0.2 step=2"
