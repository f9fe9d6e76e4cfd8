import json
import subprocess
import sys

from luroth.cli import main


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


class TestExpand:
    def test_periodic_example(self, capsys):
        code, out, _ = run_cli(["expand", "27/71", "--depth", "4"], capsys)
        assert code == 0
        assert "# digitseq=[3,4,3,4;3,4]" in out
        assert "# periodic=true" in out
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        assert lines[0] == "n,d_n,P_n,Q_n,error,cylinder_length"
        assert lines[1].startswith("1,3,1,3,10/213,1/6")

    def test_all_twos(self, capsys):
        code, out, _ = run_cli(["expand", "1", "--depth", "3"], capsys)
        assert code == 0
        assert "[2,2,2;2]" in out

    def test_domain_error_exit_3(self, capsys):
        code, _, err = run_cli(["expand", "5/3"], capsys)
        assert code == 3
        assert "error" in err

    def test_parse_error_exit_3(self, capsys):
        code, _, _ = run_cli(["expand", "banana"], capsys)
        assert code == 3


class TestEval:
    def test_period_value(self, capsys):
        code, out, _ = run_cli(["eval", "[;3,4]"], capsys)
        assert code == 0
        assert "27/71" in out

    def test_missing_period_exit_3(self, capsys):
        code, _, _ = run_cli(["eval", "[3,4]"], capsys)
        assert code == 3


class TestEnumS:
    def test_qmax_6(self, capsys):
        code, out, _ = run_cli(["enum-s", "--qmax", "6"], capsys)
        assert code == 0
        rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
        assert len(rows) == 7
        assert rows[0] == "1,2,2,1,2"

    def test_depth_restricted(self, capsys):
        code, out, _ = run_cli(["enum-s", "--qmax", "12", "--k", "2"], capsys)
        assert code == 0
        rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
        assert len(rows) == 6

    def test_k_too_deep_exit_3(self, capsys):
        code, _, _ = run_cli(["enum-s", "--qmax", "7", "--k", "3"], capsys)
        assert code == 3


class TestDim:
    def test_pressure(self, capsys):
        code, out, _ = run_cli(["dim", "--tau", "1", "--method", "pressure"], capsys)
        assert code == 0
        row = [l for l in out.splitlines() if not l.startswith("#")][1]
        fields = dict(zip(["tau", "s_star", "theory"], row.split(",")[:3]))
        assert abs(float(fields["s_star"]) - 0.5) < 1e-9

    def test_cover_two_adic(self, capsys):
        code, out, _ = run_cli(
            ["dim", "--psi", "two-adic:tau=1", "--method", "cover", "--j", "0,1,2"], capsys
        )
        assert code == 0
        rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
        assert len(rows) == 3

    def test_box(self, capsys):
        code, out, _ = run_cli(
            ["dim", "--tau", "0", "--method", "box", "--depth", "1",
             "--grid", "4:8", "--qmax", "500"],
            capsys,
        )
        assert code == 0
        assert "# slope=" in out

    def test_missing_tau_exit_3(self, capsys):
        code, _, _ = run_cli(["dim", "--psi", "const:c=1/2", "--method", "pressure"], capsys)
        assert code == 3

    def test_divergent_cover_exit_3(self, capsys):
        code, _, _ = run_cli(
            ["dim", "--tau", "1", "--method", "cover", "--margin=-1/20"], capsys
        )
        assert code == 3


class TestMeasure:
    def test_basic(self, capsys):
        code, out, _ = run_cli(
            ["measure", "--psi", "const:c=0.5", "--windows", "1:3",
             "--samples", "100", "--seed", "7", "--checkpoints", "10,100,1000,10000"],
            capsys,
        )
        assert code == 0
        assert "# khintchine_verdict=diverging-trend" in out
        assert "windows,1:3" in out

    def test_malformed_window_exit_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "luroth.cli", "measure", "--psi", "const:c=0.5",
             "--windows", "5:1"],
            capture_output=True,
        )
        assert proc.returncode == 2


class TestMtp:
    def test_critical_certified(self, capsys):
        code, out, _ = run_cli(
            ["mtp", "--tau", "1", "--s", "0.5", "--depth", "3", "--qmax", "500"], capsys
        )
        assert code == 0
        row = [l for l in out.splitlines() if not l.startswith("#")][1]
        assert row.split(",")[4] == "1"
        assert "true" in row

    def test_supercritical_below_one(self, capsys):
        code, out, _ = run_cli(
            ["mtp", "--tau", "1", "--s", "1", "--depth", "3", "--qmax", "500"], capsys
        )
        assert code == 0
        row = [l for l in out.splitlines() if not l.startswith("#")][1]
        coverage = row.split(",")[4]
        num, den = coverage.split("/")
        assert int(num) / int(den) < 1
        assert 0 < float(row.split(",")[3]) < 1


class TestOrders:
    def test_power(self, capsys):
        code, out, _ = run_cli(["orders", "--psi", "power:tau=2", "--qmax", "200"], capsys)
        assert code == 0
        row = [l for l in out.splitlines() if not l.startswith("#")][1]
        assert row.startswith("2,2,")

    def test_restricted(self, capsys):
        code, out, _ = run_cli(
            ["orders", "--psi", "two-adic:tau=1", "--k", "3", "--qmax", "300"], capsys
        )
        assert code == 0


class TestDeterminismAndFormats:
    def test_byte_identical_runs(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["measure", "--psi", "power:tau=1", "--windows", "1:4",
                "--samples", "200", "--seed", "42", "--checkpoints", "10,100"]
        assert main(argv + ["--out", str(out1)]) == 0
        assert main(argv + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_threads_do_not_change_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        base = ["measure", "--psi", "power:tau=1", "--windows", "1:4",
                "--samples", "300", "--seed", "9", "--checkpoints", "10,100"]
        assert main(base + ["--threads", "1", "--out", str(a)]) == 0
        assert main(base + ["--threads", "2", "--out", str(b)]) == 0
        ta = [l for l in a.read_text().splitlines() if not l.startswith("# threads")]
        tb = [l for l in b.read_text().splitlines() if not l.startswith("# threads")]
        assert ta == tb

    def test_json_schema(self, capsys):
        code, out, _ = run_cli(["expand", "1/2", "--format", "json"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["schema_version"] == 1
        assert doc["command"] == "expand"
        assert doc["parameters"]["x"] == "1/2"
        assert doc["rows"][0]["d_n"] == "3"

    def test_unknown_flag_exit_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "luroth.cli", "expand", "1/2", "--bogus"],
            capture_output=True,
        )
        assert proc.returncode == 2


class TestReport:
    def test_battery_writes_figures_and_tables(self, tmp_path):
        outdir = tmp_path / "rep"
        code = main(["report", "--psi", "power:tau=1", "--out", str(outdir),
                     "--qmax", "2000", "--depth", "4"])
        assert code == 0
        names = {p.name for p in outdir.iterdir()}
        for expected in ("expansion.csv", "pressure.csv", "pressure.png",
                         "series.csv", "series.png", "coverage.csv",
                         "decay.csv", "decay.png", "box.csv", "box.png",
                         "orders.csv", "summary.json"):
            assert expected in names, expected
        assert (outdir / "pressure.png").stat().st_size > 1000
        doc = json.loads((outdir / "summary.json").read_text())
        assert doc["command"] == "report"
