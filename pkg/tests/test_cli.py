import json
from dataclasses import asdict

import pytest

from logds.cli import build_config, main, parse_config_file
from logds.solver import SolverConfig


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


class TestSolveVerb:
    def test_toy_circle_json_report(self, capsys):
        code, out, _ = run_cli(["solve", "--problem", "TOY-CIRCLE"], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["problem"] == "TOY-CIRCLE"
        assert report["best_c"] <= 1e-4
        assert report["stop_reason"] in ("alpha_min", "budget")
        assert report["config"]["max_evals"] == 2000

    def test_unknown_problem_exits_two(self, capsys):
        code, _, err = run_cli(["solve", "--problem", "NOPE"], capsys)
        assert code == 2
        assert "NOPE" in err

    def test_budget_one_returns_start(self, capsys):
        code, out, _ = run_cli(
            ["solve", "--problem", "TOY-EQ", "--max-evals", "1"], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["best_x"] == [1.0, 1.0]
        assert report["evals"] == 1
        assert report["stop_reason"] == "budget"

    def test_problem_file(self, tmp_path, capsys):
        path = tmp_path / "mini.problem"
        path.write_text("name mini\nn 1\nlower -1\nupper 1\nx0 0\nf x1^2\n")
        code, out, _ = run_cli(
            ["solve", "--problem-file", str(path), "--max-evals", "50"], capsys)
        assert code == 0
        assert abs(json.loads(out)["best_f"]) <= 1e-6

    def test_problem_and_file_together_rejected(self, tmp_path, capsys):
        path = tmp_path / "mini.problem"
        path.write_text("name mini\nn 1\nx0 0\nf x1^2\n")
        code, _, err = run_cli(
            ["solve", "--problem", "TOY-EQ", "--problem-file", str(path)],
            capsys)
        assert code == 2

    def test_seedless_rejected(self, capsys):
        code, _, err = run_cli(
            ["solve", "--problem", "TOY-EQ", "--seedless"], capsys)
        assert code == 2
        assert "deterministic" in err

    def test_no_search_lands_in_config(self, capsys):
        code, out, _ = run_cli(
            ["solve", "--problem", "TOY-EQ", "--max-evals", "30",
             "--no-search"], capsys)
        assert code == 0
        assert json.loads(out)["config"]["search_enabled"] is False

    def test_unknown_flag_rejected(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "--problem", "TOY-EQ", "--bogus", "1"])
        assert exc.value.code == 2


class TestConfigHandling:
    def test_flags_round_trip(self, tmp_path):
        argv = ["solve", "--problem", "TOY-EQ", "--max-evals", "123",
                "--alpha0", "0.5", "--theta-alpha", "0.25", "--phi", "2",
                "--gamma", "1e-8", "--nu", "1.5", "--beta", "1.5",
                "--zeta", "0.1", "--rho0-log", "0.2", "--eps-active", "1e-4",
                "--alpha-min", "1e-6", "--linear-mode", "conforming"]
        from logds.cli import _build_parser
        args = _build_parser().parse_args(argv)
        cfg = build_config(args)
        # serialize to the config-file format and parse it back
        path = tmp_path / "run.cfg"
        lines = []
        for key, value in asdict(cfg).items():
            if key == "search_enabled":
                value = "true" if value else "false"
            lines.append(f"{key}={value}")
        path.write_text("\n".join(lines) + "\n")
        again = SolverConfig(**parse_config_file(path))
        assert again == cfg

    def test_config_file_then_flag_precedence(self, tmp_path):
        path = tmp_path / "base.cfg"
        path.write_text("alpha0=2.0\nmax_evals=77\n")
        from logds.cli import _build_parser
        args = _build_parser().parse_args(
            ["solve", "--problem", "TOY-EQ", "--config", str(path),
             "--alpha0", "3.0"])
        cfg = build_config(args)
        assert cfg.alpha0 == 3.0  # flag wins
        assert cfg.max_evals == 77  # file fills the rest

    def test_bad_config_line_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("alpha_zero=1\n")
        with pytest.raises(ValueError):
            parse_config_file(path)


class TestBenchVerb:
    def test_emits_twelve_files(self, tmp_path, capsys):
        with pytest.warns(UserWarning):
            code, out, _ = run_cli(
                ["bench", "--suite", "toy",
                 "--solvers", "logds-penalty,extreme-barrier",
                 "--max-evals", "150", "--out", str(tmp_path / "b")], capsys)
        assert code == 0
        emitted = [line for line in out.splitlines() if line]
        assert len(emitted) == 12  # 2 kinds x 3 accuracies x (csv + svg)
        for line in emitted:
            assert (tmp_path / "b").as_posix() in line
        runs = list((tmp_path / "b" / "runs").glob("*.jsonl"))
        assert len(runs) == 4

    def test_single_solver_profile_is_solved_fraction(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["bench", "--suite", "toy", "--solvers", "logds-penalty",
             "--max-evals", "200", "--out", str(tmp_path / "one")], capsys)
        assert code == 0
        from logds.bench import read_profile_csv
        prof = read_profile_csv(tmp_path / "one" / "perf_tau1e-1.csv")
        pts = prof["logds-penalty"]
        assert pts[0] == (1.0, 1.0)  # sole solver solves both toys

    def test_unknown_solver_label(self, tmp_path, capsys):
        code, _, err = run_cli(
            ["bench", "--suite", "toy", "--solvers", "wat",
             "--out", str(tmp_path)], capsys)
        assert code == 2
        assert "wat" in err

    def test_unknown_suite_rejected_by_parser(self):
        with pytest.raises(SystemExit) as exc:
            main(["bench", "--suite", "galaxy", "--solvers", "logds-penalty"])
        assert exc.value.code == 2


class TestCompareVerb:
    def test_barrier_study_runs(self, tmp_path, capsys):
        with pytest.warns(UserWarning):
            code, out, _ = run_cli(
                ["compare", "--study", "barrier", "--suite", "toy",
                 "--max-evals", "120", "--out", str(tmp_path / "c")], capsys)
        assert code == 0
        assert len([l for l in out.splitlines() if l]) == 12


class TestListVerb:
    def test_lists_registry(self, capsys):
        code, out, _ = run_cli(["list-problems"], capsys)
        assert code == 0
        assert "TOY-CIRCLE" in out
        assert "HS23" in out
