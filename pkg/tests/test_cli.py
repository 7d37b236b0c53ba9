import json
from pathlib import Path

import pytest

from cnoma_eh import analysis, optimizer, validation
from cnoma_eh.cli import (
    ExperimentConfig,
    _parse_float_list,
    _parse_snr_values,
    main,
    run_fig1,
    run_fig2,
    run_fig3,
)
from cnoma_eh.errors import ConfigError
from cnoma_eh.model import DesignPoint, SystemParams, db_to_linear

jsonschema = pytest.importorskip("jsonschema")

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "src" / "cnoma_eh" / "schemas"


def read_csv(path: Path):
    comments, header, rows = [], None, []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            comments.append(line)
        elif header is None:
            header = line.split(",")
        else:
            rows.append([float(tok) for tok in line.split(",")])
    return comments, header, rows


def strip_timestamp(path: Path):
    return [l for l in path.read_text().splitlines() if not l.startswith("# timestamp=")]


class TestParsers:
    def test_snr_sweep(self):
        assert _parse_snr_values("0:40:5") == (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
        assert _parse_snr_values("10") == (10.0,)
        assert _parse_snr_values("0:1:0.5") == (0.0, 0.5, 1.0)

    @pytest.mark.parametrize("bad", ["5:0:1", "0:10:-1", "a:b:c", "1:2:3:4", ""])
    def test_snr_sweep_rejects(self, bad):
        with pytest.raises(ConfigError):
            _parse_snr_values(bad)

    def test_float_list(self):
        assert _parse_float_list("2, 5") == (2.0, 5.0)
        with pytest.raises(ConfigError):
            _parse_float_list("2,x")


@pytest.fixture(scope="module")
def fig1_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1") / "fig1.csv"
    cfg = ExperimentConfig(kind="fig1", seed=41, samples=2000, out=str(out))
    run_fig1(cfg)
    return cfg, out


@pytest.fixture(scope="module")
def fig2_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig2") / "fig2.csv"
    cfg = ExperimentConfig(kind="fig2", seed=43, samples=1500,
                           snr_db_values=(0.0, 10.0, 20.0), out=str(out))
    run_fig2(cfg)
    return cfg, out


class TestFig1:
    @pytest.fixture
    def result(self, fig1_result):
        return fig1_result

    def test_default_sweep_has_nine_rows(self, result):
        _, header, rows = read_csv(result[1])
        assert len(rows) == 9
        assert header == [
            "snr_db", "c1_mc", "c1_se", "c2_mc", "c2_se", "csum_mc", "csum_se",
            "c1_analytic", "c2_analytic", "csum_analytic", "c1_highsnr", "c2_highsnr",
        ]

    def test_analytic_column_is_pipeline_identity(self, result):
        cfg, out = result
        _, header, rows = read_csv(out)
        col = header.index("c1_analytic")
        d = DesignPoint(alpha=cfg.alpha, rho=cfg.rho)
        for row in rows:
            p = SystemParams(avg_snr=db_to_linear(row[0]), mu=cfg.mu,
                             w1=cfg.w1, w2=cfg.w2)
            assert row[col] == analysis.ergodic_rate_u1(p, d)

    def test_high_snr_column_converges(self, result):
        _, header, rows = read_csv(result[1])
        last = rows[-1]  # 40 dB
        c2_an = last[header.index("c2_analytic")]
        c2_hs = last[header.index("c2_highsnr")]
        assert abs(c2_an - c2_hs) < 0.03

    def test_provenance_embedded(self, result):
        comments, _, _ = read_csv(result[1])
        joined = "\n".join(comments)
        assert "# config.seed=41" in joined
        assert "# config.samples=2000" in joined
        assert any(line.startswith("# timestamp=") for line in comments)


class TestFig2:
    @pytest.fixture
    def result(self, fig2_result):
        return fig2_result

    def test_row_grid(self, result):
        _, header, rows = read_csv(result[1])
        assert len(rows) == 6  # 2 weight ratios x 3 SNR points
        assert header[:2] == ["snr_db", "wtilde2"]

    def test_gain_nonnegative_everywhere(self, result):
        _, header, rows = read_csv(result[1])
        gain = header.index("gain_percent")
        for row in rows:
            assert row[gain] >= 0.0

    def test_rerun_reproduces_file(self, result, tmp_path):
        cfg, out = result
        out2 = tmp_path / "again.csv"
        cfg2 = ExperimentConfig(kind="fig2", seed=43, samples=1500,
                                snr_db_values=(0.0, 10.0, 20.0), out=str(out2))
        run_fig2(cfg2)
        a = [l for l in strip_timestamp(out) if not l.startswith("# config.out=")]
        b = [l for l in strip_timestamp(out2) if not l.startswith("# config.out=")]
        assert a == b

    def test_requires_weight_ratio_above_one(self, tmp_path):
        cfg = ExperimentConfig(kind="fig2", wtilde2_values=(0.5, 2.0),
                               out=str(tmp_path / "x.csv"))
        with pytest.raises(ConfigError):
            run_fig2(cfg)

    def test_json_format_validates_against_schema(self, tmp_path):
        out = tmp_path / "fig2.json"
        cfg = ExperimentConfig(kind="fig2", seed=43, samples=500,
                               snr_db_values=(10.0,), wtilde2_values=(2.0,),
                               out=str(out), fmt="json")
        run_fig2(cfg)
        doc = json.loads(out.read_text())
        schema = json.loads((SCHEMA_DIR / "sweep.schema.json").read_text())
        jsonschema.validate(doc, schema)
        assert doc["experiment"] == "fig2"
        assert len(doc["rows"]) == 1


class TestFig3:
    def test_output_domains(self, tmp_path):
        out = tmp_path / "fig3.csv"
        cfg = ExperimentConfig(kind="fig3", seed=47, samples=1500,
                               wtilde2_values=(1.5, 3.0), out=str(out))
        run_fig3(cfg)
        _, header, rows = read_csv(out)
        assert header == ["wtilde2", "mean_alpha_star", "mean_alpha_star_se",
                          "mean_rho_star", "mean_rho_star_se"]
        assert len(rows) == 2
        for row in rows:
            assert 0.0 < row[1] < 1.0
            assert 0.0 <= row[3] < 1.0


class TestSolve:
    def test_prints_outcome(self, capsys):
        rc = main(["solve", "--snr-db", "10", "--g1", "1.5", "--g2", "0.5",
                   "--g3", "0.8"])
        assert rc == 0
        out = capsys.readouterr().out
        for key in ("alpha_star", "rho_star", "objective_f", "weighted_sum",
                    "branch", "evaluations"):
            assert key in out

    def test_missing_gain_is_config_error(self, capsys):
        rc = main(["solve", "--snr-db", "10", "--g1", "1.5", "--g2", "0.5"])
        assert rc == 1

    def test_json_output_validates(self, tmp_path, capsys):
        out = tmp_path / "solve.json"
        rc = main(["solve", "--snr-db", "10", "--g1", "1.5", "--g2", "0.5",
                   "--g3", "0.8", "--out", str(out), "--format", "json"])
        assert rc == 0
        doc = json.loads(out.read_text())
        schema = json.loads((SCHEMA_DIR / "sweep.schema.json").read_text())
        jsonschema.validate(doc, schema)


class TestConfigFile:
    def test_file_plus_cli_override(self, tmp_path, capsys):
        ini = tmp_path / "exp.ini"
        ini.write_text(
            "[system]\nmu = 0.5\n\n[sampler]\nseed = 1234\nsamples = 800\n"
            "[sweep]\nsnr_db = 0:10:10\nwtilde2 = 2\n"
            f"[output]\nout = {tmp_path / 'from_file.csv'}\n"
        )
        rc = main(["fig2", "--config", str(ini), "--seed", "999"])
        assert rc == 0
        comments, _, rows = read_csv(tmp_path / "from_file.csv")
        joined = "\n".join(comments)
        assert "# config.seed=999" in joined       # CLI wins over file
        assert "# config.mu=0.5" in joined         # file wins over default
        assert len(rows) == 2

    def test_unknown_key_rejected_with_location(self, tmp_path, capsys):
        ini = tmp_path / "bad.ini"
        ini.write_text("[system]\nbogus = 1\n")
        rc = main(["fig1", "--config", str(ini)])
        assert rc == 1
        err = capsys.readouterr().err
        assert "bogus" in err and "[system]" in err

    def test_bad_value_rejected_with_location(self, tmp_path, capsys):
        ini = tmp_path / "bad.ini"
        ini.write_text("[sampler]\nseed = not_an_int\n")
        rc = main(["fig1", "--config", str(ini)])
        assert rc == 1
        assert "seed" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        rc = main(["fig1", "--config", "/nonexistent/x.ini"])
        assert rc == 1


class TestValidateCommand:
    def test_report_schema_and_exit_codes(self, tmp_path, monkeypatch, capsys):
        canned = [validation.CheckResult("demo", 0.0, 1.0, True, "ok")]
        monkeypatch.setattr(validation, "run_all", lambda **kw: canned)
        out = tmp_path / "report.json"
        rc = main(["validate", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        schema = json.loads((SCHEMA_DIR / "report.schema.json").read_text())
        jsonschema.validate(doc, schema)
        assert doc["passed"] is True

        failing = [validation.CheckResult("demo", 9.0, 1.0, False, "broken")]
        monkeypatch.setattr(validation, "run_all", lambda **kw: failing)
        rc = main(["validate", "--out", str(tmp_path / "r2.json")])
        assert rc == 2

    def test_mutation_in_solver_is_caught(self, monkeypatch):
        # corrupting the denominator of the interior stationary point must
        # trip the solver-vs-oracle check
        clean = validation.check_solver_optimality(seed=1001, n_instances=60)
        assert clean.passed

        original = optimizer.rho_bar

        def corrupted(ic, wtilde2):
            lead = ic.q * wtilde2 * ic.e
            if lead == 0.0:
                return original(ic, wtilde2)
            theta, beta = optimizer.theta_beta(ic, wtilde2)
            return (beta - max(theta, 0.0) ** 0.5) / (2.0 * lead)

        monkeypatch.setattr(optimizer, "rho_bar", corrupted)
        mutated = validation.check_solver_optimality(seed=1001, n_instances=60)
        assert not mutated.passed


class TestMainEntry:
    def test_unknown_subcommand_exits_one(self, capsys):
        assert main(["nope"]) == 1

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0

    def test_unknown_format_is_config_error(self, tmp_path):
        cfg = ExperimentConfig(kind="fig3", samples=100, wtilde2_values=(2.0,),
                               out=str(tmp_path / "x.bin"), fmt="xml")
        with pytest.raises(ConfigError):
            run_fig3(cfg)
