import json
import os
from hashlib import sha256

import pytest

from gicreg.cli import main
from gicreg.frontier import read_csv

FIG1 = ["--p1", "6", "--p2", "1", "--a12", "3", "--a21", "0.1"]
ZIC = ["--p1", "6", "--p2", "1", "--a12", "2", "--a21", "0"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def sason_csv(tmp_path, capsys):
    out = tmp_path / "sason"
    code, _, _ = run(capsys, "region", *FIG1, "--scheme", "sason", "--step", "0.05", "--out", out)
    assert code == 0
    return out


class TestRegion:
    def test_outputs_and_manifest(self, sason_csv):
        csv = sason_csv.with_suffix(".csv")
        js = sason_csv.with_suffix(".json")
        man = json.loads(sason_csv.with_suffix(".manifest.json").read_text())
        assert csv.read_text().startswith("r1,r2\n")
        for path in (csv, js):
            assert man["outputs"][path.name] == sha256(path.read_bytes()).hexdigest()
        assert man["scheme"] == "sason" and man["command"] == "region"
        assert man["channel"] == {"p1": 6.0, "p2": 1.0, "a12": 3.0, "a21": 0.1}
        assert man["grid"]["points"] == 21**3
        prov = json.loads(js.read_text())
        assert len(prov) == len(read_csv(csv)) and prov[0]["scheme"] == "sason"

    def test_zero_filter_matches_white(self, sason_csv, tmp_path, capsys):
        out = tmp_path / "arma"
        code, _, _ = run(
            capsys, "region", *FIG1, "--scheme", "arma", "--step", "0.05", "--fix", "rho=0", "--fix", "kappa=0", "--out", out
        )
        assert code == 0
        assert out.with_suffix(".csv").read_bytes() == sason_csv.with_suffix(".csv").read_bytes()

    def test_self_compare(self, sason_csv, capsys):
        f = sason_csv.with_suffix(".csv")
        code, out, _ = run(capsys, "compare", "--base", f, "--other", f, "--slack", "0")
        assert code == 0 and "dominates: yes" in out

    def test_baseline_runs(self, tmp_path, capsys):
        out = tmp_path / "hk"
        argv = ["region", "--p1", "1", "--p2", "6", "--a12", "0.1", "--a21", "0.5", "--scheme", "hk-baseline"]
        code, _, _ = run(capsys, *argv, "--step", "0.1", "--out", out)
        assert code == 0 and len(read_csv(out.with_suffix(".csv"))) > 0

    def test_byte_identical_across_threads(self, tmp_path, capsys):
        outs = []
        for t in (1, 2):
            out = tmp_path / f"r{t}"
            argv = ["region", *ZIC, "--scheme", "hk-sim", "--budget", "4000", "--seed", "3", "--threads", t, "--out", out]
            assert run(capsys, *argv)[0] == 0
            outs.append(out)
        for ext in (".csv", ".json"):
            assert outs[0].with_suffix(ext).read_bytes() == outs[1].with_suffix(ext).read_bytes()

    def test_config_file_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("p1 = 6\np2 = 1\na12 = 3\na21 = 0.1\nscheme = sason\nstep = 0.5\n")
        out = tmp_path / "c"
        assert run(capsys, "region", "--config", cfg, "--p2", "2", "--out", out)[0] == 0
        man = json.loads(out.with_suffix(".manifest.json").read_text())
        assert man["channel"]["p2"] == 2.0 and man["grid"]["points"] == 27

    @pytest.mark.parametrize(
        "extra",
        [
            ["--scheme", "nope"],
            ["--scheme", "sason", "--p1", "-1"],
            ["--scheme", "sason", "--fix", "rho=0.2"],
            ["--scheme", "arma", "--max-grid", "1000"],
            ["--scheme", "sason", "--threads", "0"],
            ["--scheme", "sason", "--bogus-flag"],
        ],
    )
    def test_usage_errors(self, extra, tmp_path, capsys):
        out = tmp_path / "bad"
        argv = ["region", *FIG1, "--out", out, *extra]
        # the last --p1 wins, so the negative power case overrides FIG1
        code, _, err = run(capsys, *argv)
        assert code == 2 and err
        assert not list(tmp_path.iterdir())

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("p1 = 6\nwhat = 1\n")
        assert run(capsys, "region", "--config", cfg, "--scheme", "sason", "--out", tmp_path / "x")[0] == 2

    def test_failed_write_leaves_nothing(self, tmp_path, capsys, monkeypatch):
        import gicreg.cli as cli

        real = os.replace
        calls = []

        def flaky(src, dst):
            calls.append(dst)
            if len(calls) == 2:
                raise OSError("disk full")
            return real(src, dst)

        monkeypatch.setattr(cli.os, "replace", flaky)
        out = tmp_path / "p"
        with pytest.raises(OSError):
            main(["region", *FIG1, "--scheme", "sason", "--step", "0.5", "--out", str(out)])
        assert not list(tmp_path.iterdir())


class TestCompareCorner:
    def test_strict_inclusion(self, tmp_path, capsys):
        small = tmp_path / "small.csv"
        big = tmp_path / "big.csv"
        small.write_text("r1,r2\n1,1\n")
        big.write_text("r1,r2\n1,1.5\n2,0.5\n")
        assert run(capsys, "compare", "--base", small, "--other", big)[0] == 0
        code, out, _ = run(capsys, "compare", "--base", big, "--other", small)
        assert code == 1 and "dominates: no" in out and "max violation: 1\n" in out

    def test_corner(self, tmp_path, capsys):
        f = tmp_path / "rect.csv"
        f.write_text("r1,r2\n1,1\n")
        code, out, _ = run(capsys, "corner", "--in", f, "--r2-min", "0.5")
        assert code == 0 and float(out) == 1.0
        code, out, _ = run(capsys, "corner", "--in", f, "--r2-min", "1.5")
        assert code == 0 and float(out) == 0.0

    def test_corner_hull(self, tmp_path, capsys):
        f = tmp_path / "two.csv"
        f.write_text("r1,r2\n1,1\n2,0\n")
        assert float(run(capsys, "corner", "--in", f, "--r2-min", "0.5", "--hull")[1]) == pytest.approx(1.5)

    @pytest.mark.parametrize("text", ["", "x,y\n1,2\n", "r1,r2\n1,a\n"])
    def test_malformed(self, tmp_path, capsys, text):
        f = tmp_path / "bad.csv"
        f.write_text(text)
        assert run(capsys, "corner", "--in", f, "--r2-min", "0")[0] == 2
        assert run(capsys, "compare", "--base", f, "--other", f)[0] == 2

    def test_missing_file(self, tmp_path, capsys):
        assert run(capsys, "corner", "--in", tmp_path / "none.csv", "--r2-min", "0")[0] == 2


class TestOracle:
    def test_white(self, capsys, tmp_path):
        js = tmp_path / "o.json"
        code, out, _ = run(capsys, "oracle", *FIG1, "--n-list", "4", "16", "--json", js)
        assert code == 0
        reps = json.loads(js.read_text())
        assert all(t["abs_error"] < 1e-12 for r in reps for t in r["terms"])

    def test_ar(self, capsys):
        code, out, _ = run(capsys, "oracle", *FIG1, "--ar1", "0.9", "--term", "direct", "--n-list", "128", "512", "2048")
        assert code == 0
        errs = [float(line.split()[-1]) for line in out.splitlines() if "direct" in line]
        assert errs[0] > errs[1] > errs[2]

    def test_unstable(self, capsys):
        assert run(capsys, "oracle", *FIG1, "--ar1", "1.2")[0] == 2

    def test_bad_n_list(self, capsys):
        assert run(capsys, "oracle", *FIG1, "--n-list", "64", "8")[0] == 2


def test_freq_response(tmp_path, capsys):
    out = tmp_path / "h.csv"
    assert run(capsys, "freq-response", "--ar", "0.5", "--ma", "0.2", "--points", "8", "--out", out)[0] == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 9


def test_version(capsys):
    assert run(capsys, "--version")[0] == 0
