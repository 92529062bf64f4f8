import json

import pytest
from click.testing import CliRunner

import decobell.cli as cli


@pytest.fixture()
def runner():
    return CliRunner()


class TestMeasures:
    def test_text_output(self, runner):
        result = runner.invoke(cli.main, ["measures", "--j1", "1.2", "--t", "0.01"])
        assert result.exit_code == 0
        assert "region" in result.output
        assert "= I" in result.output

    def test_json_output(self, runner):
        result = runner.invoke(cli.main, ["measures", "--j1", "1.9", "--t", "0.05",
                                          "--format", "json"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["data"]["region"] == "III"
        assert doc["data"]["c"] == 0.0
        assert doc["metadata"]["version"]

    def test_decoupled_point(self, runner):
        result = runner.invoke(cli.main, ["measures", "--j1", "0", "--t", "1",
                                          "--format", "json"])
        doc = json.loads(result.output)
        assert doc["data"]["q_mumu"] == 0.0
        assert doc["data"]["m_z"] == 0.0

    def test_config_error_exit_code(self, runner):
        result = runner.invoke(cli.main, ["measures", "--j1", "1.0", "--t", "-2"])
        assert result.exit_code == 2

    def test_missing_temperature(self, runner):
        result = runner.invoke(cli.main, ["measures", "--j1", "1.0"])
        assert result.exit_code == 2

    def test_json_error_object(self, runner):
        result = runner.invoke(cli.main, ["measures", "--j1", "1.0", "--t", "-2",
                                          "--format", "json"])
        assert result.exit_code == 2
        doc = json.loads(result.output)
        assert doc["error"]["exit_code"] == 2


class TestScan:
    def test_csv_schema(self, runner):
        args = ["scan", "--axis", "t", "--j1", "1.2", "--from", "0.05",
                "--to", "0.06", "--step", "0.002"]
        result = runner.invoke(cli.main, args)
        assert result.exit_code == 0
        lines = [l for l in result.output.splitlines() if not l.startswith("#")]
        assert lines[0] == "T,B,N1,N2,C,q_xx,q_zz,q_mumu,m_z,ds_z"
        assert len(lines) == 1 + 6

    def test_byte_identical_reruns(self, runner):
        args = ["scan", "--axis", "j1", "--t", "0.05", "--from", "1.0",
                "--to", "1.1", "--step", "0.02"]
        out1 = runner.invoke(cli.main, args).output
        out2 = runner.invoke(cli.main, args).output
        assert out1 == out2

    def test_derivative_columns(self, runner):
        args = ["scan", "--axis", "t", "--j1", "1.2", "--from", "0.05",
                "--to", "0.06", "--step", "0.002", "--derivative"]
        result = runner.invoke(cli.main, args)
        header = [l for l in result.output.splitlines() if not l.startswith("#")][0]
        assert header.endswith("dB,dC")

    def test_twelve_significant_digits(self, runner):
        args = ["scan", "--axis", "t", "--j1", "1.2", "--from", "0.05",
                "--to", "0.052", "--step", "0.001"]
        result = runner.invoke(cli.main, args)
        row = [l for l in result.output.splitlines() if not l.startswith("#")][1]
        b_field = row.split(",")[1]
        assert len(b_field.replace(".", "").replace("-", "").lstrip("0")) >= 11

    def test_output_file(self, runner, tmp_path):
        out = tmp_path / "series.csv"
        args = ["scan", "--axis", "t", "--j1", "1.2", "--from", "0.05",
                "--to", "0.052", "--step", "0.001", "--out", str(out)]
        assert runner.invoke(cli.main, args).exit_code == 0
        assert out.read_text().startswith("#")

    def test_outdir_env(self, runner, tmp_path, monkeypatch):
        monkeypatch.setenv("DECOBELL_OUTDIR", str(tmp_path))
        args = ["scan", "--axis", "t", "--j1", "1.2", "--from", "0.05",
                "--to", "0.052", "--step", "0.001", "--out", "rel.csv"]
        assert runner.invoke(cli.main, args).exit_code == 0
        assert (tmp_path / "rel.csv").exists()

    def test_config_file(self, runner, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("axis = t\nj1 = 1.2\nfrom = 0.05\nto = 0.052\nstep = 0.001\n")
        result = runner.invoke(cli.main, ["scan", "--config", str(cfg)])
        assert result.exit_code == 0
        # flags take precedence over the config file
        result2 = runner.invoke(cli.main, ["scan", "--config", str(cfg),
                                           "--from", "0.06", "--to", "0.062"])
        assert result2.exit_code == 0
        assert result.output != result2.output


class TestCritical:
    def test_critical_and_kink_labels(self, runner):
        result = runner.invoke(cli.main, ["critical", "--j1", "1.802",
                                          "--t-max", "0.5"])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        crit = [l for l in lines if l.startswith("CRITICAL")]
        kink = [l for l in lines if l.startswith("KINK")]
        assert len(crit) == 1 and len(kink) == 1
        assert abs(float(crit[0].split("=")[1].split()[0]) - 0.063) < 0.002
        assert abs(float(kink[0].split("=")[1].split()[0]) - 0.107) < 0.002

    def test_qpt_jump_mode(self, runner):
        result = runner.invoke(cli.main, ["critical", "--axis", "j1", "--t", "0.0015",
                                          "--from", "1.45", "--to", "1.55",
                                          "--step", "0.001"])
        assert result.exit_code == 0
        jumps = [l for l in result.output.splitlines() if l.startswith("QPT-JUMP")]
        assert len(jumps) == 1
        assert abs(float(jumps[0].split("=")[1].split()[0]) - 1.5) < 0.002

    def test_requires_j1(self, runner):
        assert runner.invoke(cli.main, ["critical"]).exit_code == 2


class TestClassify:
    def test_point_mode(self, runner):
        result = runner.invoke(cli.main, ["classify", "--t", "0.01", "--j1", "1.2"])
        assert result.exit_code == 0
        assert result.output.strip() == "I"

    def test_boundary_mode(self, runner):
        result = runner.invoke(cli.main, ["classify", "--t", "0.01:0.15:0.01",
                                          "--j1", "0.9:1.7:0.05"])
        assert result.exit_code == 0
        lines = [l for l in result.output.splitlines() if not l.startswith("#")]
        assert lines[0] == "boundary,t1,j1_1,t2,j1_2"
        kinds = {l.split(",")[0] for l in lines[1:]}
        assert "B=2" in kinds and "C=0" in kinds


class TestContour:
    def test_grid_output(self, runner):
        result = runner.invoke(cli.main, ["contour", "--t", "0.05:0.1:0.025",
                                          "--j1", "1.0:1.2:0.1"])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert any(l.startswith("# t_range") for l in lines)
        data = [l for l in lines if not l.startswith("#")]
        assert data[0].startswith("T,J1,B")
        assert len(data) == 1 + 3 * 3

    def test_bad_range(self, runner):
        result = runner.invoke(cli.main, ["contour", "--t", "0.1:0.05:0.01"])
        assert result.exit_code == 2


class TestCheck:
    def test_passes(self, runner):
        result = runner.invoke(cli.main, ["check", "--n-states", "40", "--seed", "3"])
        assert result.exit_code == 0, result.output
        assert "all checks passed" in result.output

    def test_failure_exits_4(self, runner, monkeypatch):
        import decobell.cli as cli_module

        def broken(q_zz, q_xx):
            from decobell.corrkit import BellResult
            return BellResult(b=0.0, n1=0.0, n2=0.0, violated=False)

        monkeypatch.setattr(cli_module, "bell_closed_form", broken)
        result = runner.invoke(cli.main, ["check", "--n-states", "10"])
        assert result.exit_code == 4
