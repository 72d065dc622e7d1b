import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from multiview import cli
from multiview.deletion import rho_n_exact
from multiview.multiview_dmc import InvariantViolationError, format_channel, multi_view_report, random_dmc
from multiview.special_channels import figure1_sweep


def run(*argv):
    out = io.StringIO()
    status = cli.run(list(argv), stdout=out)
    return status, out.getvalue()


def rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


class TestExamples:
    def test_chernoff_bsc(self):
        status, text = run("chernoff", "--channel", "bsc:0.1")
        assert status == 0
        assert float(rows(text)[0]["rho_nats"]) == pytest.approx(-math.log(2 * math.sqrt(0.09)), abs=1e-11)

    def test_chernoff_bits(self):
        _, nats = run("chernoff", "--channel", "bsc:0.1")
        _, bits = run("chernoff", "--channel", "bsc:0.1", "--unit", "bits")
        b = float(rows(bits)[0]["rho_bits"])
        assert b == pytest.approx(float(rows(nats)[0]["rho_nats"]) / math.log(2), rel=1e-11)
        assert b == pytest.approx(0.7370, abs=5e-5)

    def test_del_rho_single_bit(self):
        status, text = run("del-rho", "--n", "1", "--delta", "0.5")
        assert status == 0
        assert float(rows(text)[0]["rho_exact_nats"]) == pytest.approx(math.log(2), abs=1e-9)

    def test_poi_sandwich_matches_sweep(self):
        status, text = run("poi-sandwich", "--d", "3,6,12,24", "--p-grid", "0:1:0.01", "--workers", "2")
        assert status == 0
        got = rows(text)
        ref = figure1_sweep([3, 6, 12, 24], [round(0.01 * i, 12) for i in range(101)])
        assert len(got) == len(ref) == 404
        for g, r in zip(got, ref):
            assert (int(g["d"]), float(g["p"])) == (r.d, r.p)
            assert float(g["c_bin_nats"]) == pytest.approx(r.c_bin, rel=1e-11, abs=1e-15)
            assert float(g["c_poi_nats"]) == pytest.approx(r.c_poi, rel=1e-11, abs=1e-15)

    def test_mvinfo_columns(self):
        status, text = run("mvinfo", "--channel", "bec:0.3", "--d", "1,2,3")
        assert status == 0
        got = rows(text)
        assert [int(r["d"]) for r in got] == [1, 2, 3]
        for r in got:
            assert float(r["cond_entropy_nats"]) == pytest.approx(0.3 ** int(r["d"]) * math.log(2), rel=1e-11)

    def test_fbl_table(self):
        status, text = run("fbl", "--channel", "bsc:0.1", "--n", "100,1000", "--eps", "0.001", "--d", "2", "--format", "json")
        assert status == 0
        obj = json.loads(text)
        assert obj["label"] == "normal approximation"
        assert len(obj["rows"]) == 2

    def test_sanov(self):
        status, text = run("sanov", "--channel", "bsc:0.1", "--v=-1,0", "--grid", "400")
        assert status == 0
        got = rows(text)
        assert float(got[1]["E_dual_nats"]) == pytest.approx(-math.log(0.6), abs=1e-9)
        assert all(float(r["gap_nats"]) < 1e-6 for r in got)

    def test_del_bounds(self):
        status, text = run("del-bounds", "--n", "2,5,30", "--delta", "0.8")
        assert status == 0
        got = rows(text)
        assert got[2]["bound_alternating_nats"] == ""
        assert float(got[0]["bound_alternating_nats"]) == pytest.approx(-math.log(2 * 0.8 - 0.64), abs=1e-9)


class TestSerialization:
    def test_json_round_trip(self):
        _, text = run("mvinfo", "--channel", "bsc:0.2", "--d", "1,4", "--format", "json")
        obj = json.loads(text)
        assert obj["schema_version"] == cli.SCHEMA_VERSION
        assert obj["command"] == "mvinfo" and obj["unit"] == "nats"
        rep = multi_view_report(cli.bsc(0.2), [0.5, 0.5], 4)
        assert obj["rows"][1]["mutual_info_nats"] == rep.mutual_info
        assert json.loads(json.dumps(obj)) == obj

    def test_squared_columns_scale_twice(self):
        _, nats = run("mvinfo", "--channel", "bsc:0.2", "--d", "3", "--format", "json")
        _, bits = run("mvinfo", "--channel", "bsc:0.2", "--d", "3", "--format", "json", "--unit", "bits")
        a, b = json.loads(nats)["rows"][0], json.loads(bits)["rows"][0]
        assert b["mutual_info_bits"] == pytest.approx(a["mutual_info_nats"] / math.log(2), rel=1e-15)
        assert b["dispersion_bits2"] == pytest.approx(a["dispersion_nats2"] / math.log(2) ** 2, rel=1e-15)

    def test_byte_identical(self):
        argv = ("mvinfo", "--channel", "random:3x4", "--seed", "7", "--d", "1,2,5")
        assert run(*argv)[1] == run(*argv)[1]

    def test_seed_header(self):
        _, text = run("chernoff", "--channel", "random:3x3", "--seed", "11")
        assert text.splitlines()[0] == "# seed=11"
        _, text = run("chernoff", "--channel", "bsc:0.1")
        assert not text.startswith("#")

    def test_csv_precision(self):
        _, text = run("chernoff", "--channel", "bsc:0.1")
        assert rows(text)[0]["rho_nats"] == f"{-math.log(0.6):.12g}"

    def test_file_channel(self, tmp_path):
        ch = random_dmc(np.random.default_rng(5), 3, 2)
        path = tmp_path / "w.txt"
        path.write_text(format_channel(ch))
        _, from_file = run("mvinfo", "--channel", f"file:{path}", "--d", "2")
        _, from_seed = run("mvinfo", "--channel", "random:3x2", "--seed", "5", "--d", "2")
        assert rows(from_file) == rows(from_seed)

    def test_output_file(self, tmp_path):
        path = tmp_path / "out.csv"
        status, text = run("chernoff", "--channel", "bec:0.25", "-o", str(path))
        assert status == 0 and text == ""
        assert float(rows(path.read_text())[0]["rho_nats"]) == pytest.approx(-math.log(0.25))

    def test_trace_file(self, tmp_path):
        path = tmp_path / "trace.csv"
        status, _ = run("del-rho", "--n", "3", "--delta", "0.4", "--trace", str(path))
        assert status == 0
        got = rows(path.read_text())
        assert len(got) == rho_n_exact(3, 0.4).pairs_searched
        assert set(got[0]) == {"x", "x_tilde", "rho_pair_nats"}


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ("chernoff", "--channel", "bsc:2"),
            ("chernoff", "--channel", "foo:1"),
            ("chernoff", "--channel", "bsc:0.1", "--input", "0.2,0.2,0.6"),
            ("del-rho", "--n", "3", "--delta", "1.5"),
            ("mvinfo", "--channel", "bsc:0.1", "--d", "x"),
            ("rate-fit", "--channel", "bec:0.3", "--d-min", "500", "--d-max", "700"),
        ],
    )
    def test_invalid_input(self, argv):
        assert run(*argv)[0] == cli.EXIT_INPUT

    def test_argparse_errors_use_input_status(self):
        with pytest.raises(SystemExit) as info:
            cli.run(["chernoff"])
        assert info.value.code == cli.EXIT_INPUT

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 2\n0.5 0.5\n0.5\n")
        assert run("chernoff", "--channel", f"file:{path}")[0] == cli.EXIT_INPUT

    def test_budget(self):
        assert run("mvinfo", "--channel", "bec:0.3", "--d", "100000")[0] == cli.EXIT_BUDGET
        assert run("del-rho", "--n", "12", "--delta", "0.5")[0] == cli.EXIT_BUDGET

    def test_invariant_from_exception(self, monkeypatch):
        def broken(*a, **k):
            raise InvariantViolationError("routes differ")

        monkeypatch.setattr(cli, "multi_view_report", broken)
        assert run("mvinfo", "--channel", "bsc:0.1", "--d", "2")[0] == cli.EXIT_INVARIANT

    def test_invariant_from_report(self, monkeypatch):
        monkeypatch.setattr(cli.deletion.RhoBoundReport, "chain_holds", lambda self, slack=1e-9: False)
        status, text = run("del-rho", "--n", "2", "--delta", "0.5")
        assert status == cli.EXIT_INVARIANT
        assert rows(text)

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "multiview", "chernoff", "--channel", "bec:0.5", "--format", "json"],
            capture_output=True,
            text=True,
            check=False,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["rows"][0]["rho_nats"] == pytest.approx(math.log(2))


class TestParsing:
    def test_range(self):
        assert cli.parse_list("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert len(cli.parse_list("0:1:0.01")) == 101

    def test_bad_range(self):
        with pytest.raises(cli.UsageError):
            cli.parse_list("1:0:0.1")
