import json
import subprocess
import sys

import pytest

from nomabackcom.cli import (EXIT_CHECK_FAILED, EXIT_ENGINE, EXIT_IO, EXIT_OK, EXIT_PARSE,
                             EXIT_USAGE, EXIT_VALIDATION, main)
from nomabackcom.config import parse_config
from nomabackcom.errors import ConfigParseError, ConfigValidationError

TS = "2026-01-01T00:00:00+00:00"


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestParse:
    def test_minimal_defaults(self):
        cfg = parse_config("[run]\nexperiment = ber-curve\n")
        b1, b2 = cfg.cluster.bsn1, cfg.cluster.bsn2
        assert (b1.fading.m, b1.fading.omega, b2.fading.m, b2.fading.omega) == (4, 1, 1, 0.5)
        assert cfg.effective_seed == 42 and cfg.format == "both"
        assert cfg.sweep["snr_db"] == (0, 5, 10, 15, 20, 25, 30)

    def test_empty_document_with_subcommand(self):
        assert parse_config("", "contour").engine == "analytic"

    def test_gamma_bound(self):
        with pytest.raises(ConfigValidationError, match=r"gamma2.*\(0, 1\]"):
            parse_config("[run]\nexperiment = ber-curve\n[cluster]\ngamma2 = 1.3\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigValidationError, match="gamma3"):
            parse_config("[run]\nexperiment = ber-curve\n[cluster]\ngamma3 = 0.2\n")

    def test_unknown_section(self):
        with pytest.raises(ConfigValidationError, match="extra"):
            parse_config("[extra]\na = 1\n", "ber-curve")

    @pytest.mark.parametrize("text", ["[run\nexperiment = x\n", "no section\n",
                                      "[cluster]\ngamma1 = abc\n", "[sweep]\nsnr_db = 1:2\n"])
    def test_parse_errors(self, text):
        with pytest.raises(ConfigParseError):
            parse_config(text, "ber-curve")

    @pytest.mark.parametrize("text,key", [
        ("[cluster]\nm1 = 0.3\n", "m1"),
        ("[sweep]\nsnr_db = \n", "snr_db"),
        ("[sweep]\nsnr_db = 10, 5\n", "snr_db"),
        ("[run]\ntrials = 10\n", "trials"),
        ("[run]\nengine = exact\n", "engine"),
        ("[run]\nseed = -1\n", "seed"),
        ("[run]\nexperiment = contour\n", "experiment"),
        ("[sweep]\ngamma1 = 0.5\n", "sweep"),
    ])
    def test_validation_errors(self, text, key):
        with pytest.raises(ConfigValidationError, match=key):
            parse_config(text, "ber-curve")

    def test_ranges_and_lists(self):
        cfg = parse_config("[sweep]\nsnr_db = 0:10:2.5\n", "ber-curve")
        assert cfg.sweep["snr_db"] == (0, 2.5, 5, 7.5, 10)
        cfg = parse_config("[sweep]\nm2 = 1, 2, 3.5\n", "m-sweep")
        assert cfg.axes == ("m2",) and cfg.sweep["m2"] == (1, 2, 3.5)

    def test_snr_override(self):
        cfg = parse_config("[cluster]\nsnr_db = 12\n", "m-sweep")
        assert cfg.cluster.bsn1.snr_db == cfg.cluster.bsn2.snr_db == 12
        cfg = parse_config("", "m-sweep")
        assert (cfg.cluster.bsn1.snr_db, cfg.cluster.bsn2.snr_db) == (20, 15)

    def test_analytic_only(self):
        with pytest.raises(ConfigValidationError, match="engine"):
            parse_config("[run]\nengine = montecarlo\n", "gamma2-opt")


class TestCli:
    def run(self, argv, capsys):
        code = main(argv)
        out, err = capsys.readouterr()
        return code, out, err

    def test_ks_validate_seed7(self, tmp_path, capsys):
        code, out, err = self.run(["ks-validate", "--seed", "7", "--out", str(tmp_path / "ks"),
                                   "--timestamp", TS], capsys)
        lines = [l for l in out.splitlines() if " D=" in l]
        assert code == EXIT_OK and len(lines) == 6 and all("accept" in l for l in lines)
        doc = json.loads((tmp_path / "ks.json").read_text())
        assert all(s < 0.0192 for s in [r[6] for r in doc["rows"]])

    def test_ks_dump(self, tmp_path, capsys):
        code, _, _ = self.run(["ks-validate", "--seed", "7", "--out", str(tmp_path / "ks"),
                               "--dump-samples", str(tmp_path / "d")], capsys)
        assert code == EXIT_OK and len(list((tmp_path / "d").glob("*.csv"))) == 6

    def test_single_point_ber_curve(self, tmp_path, capsys):
        cfg = write(tmp_path, "[sweep]\nsnr_db = 10\n[run]\nengine = analytic\n")
        code, out, _ = self.run(["ber-curve", "--config", cfg, "--out", str(tmp_path / "b"),
                                 "--format", "csv"], capsys)
        assert code == EXIT_OK
        lines = (tmp_path / "b.csv").read_text().splitlines()
        assert len(lines) == 2 and lines[0].startswith("snr_db,ber1_analytic")
        assert not (tmp_path / "b.json").exists()

    def test_xcheck_default(self, tmp_path, capsys):
        code, out, _ = self.run(["xcheck", "--trials", "2000000", "--seed", "1",
                                 "--out", str(tmp_path / "x")], capsys)
        assert code == EXIT_OK and "PASS" in out

    def test_xcheck_fail_exit(self, tmp_path, capsys):
        code, out, _ = self.run(["xcheck", "--trials", "20000", "--tolerance", "1e-9",
                                 "--out", str(tmp_path / "x")], capsys)
        assert code == EXIT_CHECK_FAILED and "FAIL" in out

    def test_gamma2_opt_report(self, tmp_path, capsys):
        cfg = write(tmp_path, "[sweep]\nsnr_db = 20\ngamma2 = 0.1:0.3:0.01\n")
        code, out, _ = self.run(["gamma2-opt", "--config", cfg, "--out", str(tmp_path / "g")],
                                capsys)
        assert code == EXIT_OK and "gamma2* =" in out

    @pytest.mark.parametrize("exp", ["contour", "m-sweep", "oma-compare"])
    def test_other_experiments(self, exp, tmp_path, capsys):
        code, _, _ = self.run([exp, "--out", str(tmp_path / exp), "--format", "json"], capsys)
        assert code == EXIT_OK and (tmp_path / f"{exp}.json").exists()

    def test_byte_identical(self, tmp_path, capsys):
        cfg = write(tmp_path, "[sweep]\nsnr_db = 0, 10\n[run]\ntrials = 20000\n")
        for d in ("a", "b"):
            assert self.run(["ber-curve", "--config", cfg, "--seed", "5", "--timestamp", TS,
                             "--out", str(tmp_path / d / "t")], capsys)[0] == EXIT_OK
        for ext in ("csv", "json"):
            assert (tmp_path / "a" / f"t.{ext}").read_bytes() == (tmp_path / "b" / f"t.{ext}").read_bytes()

    def test_seed_precedence(self, tmp_path, capsys):
        cfg = write(tmp_path, "[sweep]\nsnr_db = 10\n[run]\ntrials = 20000\nseed = 3\n")
        self.run(["ber-curve", "--config", cfg, "--out", str(tmp_path / "f")], capsys)
        self.run(["ber-curve", "--config", cfg, "--seed", "4", "--out", str(tmp_path / "c")], capsys)
        self.run(["ber-curve", "--out", str(tmp_path / "d"), "--trials", "20000"], capsys)
        seeds = [json.loads((tmp_path / f"{s}.json").read_text())["metadata"]["seed"]
                 for s in ("f", "c", "d")]
        assert seeds == [3, 4, 42]

    @pytest.mark.parametrize("argv,code", [
        (["nonsense"], EXIT_USAGE),
        ([], EXIT_USAGE),
        (["ber-curve", "--format", "xml"], EXIT_USAGE),
        (["ber-curve", "--trials", "10"], EXIT_VALIDATION),
        (["ber-curve", "--seed", "-3"], EXIT_VALIDATION),
        (["contour", "--engine", "montecarlo"], EXIT_VALIDATION),
        (["ber-curve", "--config", "/nonexistent/run.ini"], EXIT_IO),
    ])
    def test_error_codes(self, argv, code, capsys):
        got, out, err = self.run(argv, capsys)
        assert got == code
        assert len(err.strip().splitlines()) == 1 and err.startswith("nomabackcom: error:")

    def test_parse_and_validation_codes(self, tmp_path, capsys):
        bad = write(tmp_path, "[run\n", "bad.ini")
        assert self.run(["ber-curve", "--config", bad], capsys)[0] == EXIT_PARSE
        inv = write(tmp_path, "[cluster]\ngamma2 = 1.3\n", "inv.ini")
        code, _, err = self.run(["ber-curve", "--config", inv], capsys)
        assert code == EXIT_VALIDATION and "gamma2" in err and len(err.splitlines()) == 1

    def test_engine_error_code(self, tmp_path, capsys):
        cfg = write(tmp_path, "[sweep]\ngamma1 = 0.2\ngamma2 = 0.5\n")
        code, _, err = self.run(["contour", "--config", cfg, "--out", str(tmp_path / "c")], capsys)
        assert code == EXIT_ENGINE and len(err.splitlines()) == 1

    def test_output_not_writable(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code, _, err = self.run(["ks-validate", "--seed", "7", "--out", str(blocker / "x")], capsys)
        assert code == EXIT_IO and len(err.splitlines()) == 1

    def test_help_lists_columns(self, capsys):
        with pytest.raises(SystemExit):
            main(["--help"])
        assert "ber1_analytic" in capsys.readouterr().out

    def test_module_entry(self, tmp_path):
        r = subprocess.run([sys.executable, "-m", "nomabackcom", "ks-validate", "--seed", "7",
                            "--out", str(tmp_path / "k")], capture_output=True, text=True)
        assert r.returncode == 0 and r.stderr == ""
