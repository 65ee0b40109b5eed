import io
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from nilgeom.cli import (ConfigError, RunConfig, build_parser, emit_records,
                         main, parse_config, run)
from conftest import CONFIG_DIR

F = Fraction


def run_capture(argv):
    import contextlib
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        status = main(argv)
    return status, buf.getvalue()


class TestParseConfig:
    def test_example_n2(self):
        cfg = parse_config(str(CONFIG_DIR / "example_n2.toml"))
        assert len(cfg.families) == 2
        assert cfg.depth == (1, 2)
        assert cfg.points["origin"] == (0, 0)
        assert "Dc" in cfg.operators

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            parse_config("/nonexistent.toml")

    def test_empty_config(self, tmp_path):
        p = tmp_path / "empty.toml"
        p.write_text("")
        with pytest.raises(ConfigError):
            parse_config(str(p))

    def test_bad_weight_length_names_family(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("""
[structure]
variables = ["x", "y"]
depth = [1, 2]
[[structure.family]]
weight = [1]
fields = ["d/dx"]
""")
        with pytest.raises(ConfigError) as err:
            parse_config(str(p))
        assert "family #1" in str(err.value)

    def test_unresolved_reference(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("""
[structure]
variables = ["x"]
depth = [1]
[[structure.family]]
weight = [1]
fields = ["d/dx"]
[covectors]
foo = { point = "nowhere", coords = ["1"] }
""")
        with pytest.raises(ConfigError):
            parse_config(str(p))


class TestEmit:
    def test_jsonl_round_trip(self):
        records = [{"a": F(3, 7), "b": 0.123456789012345, "c": [F(1), 2],
                    "d": {"x": F(5)}}]
        buf = io.StringIO()
        emit_records(records, "jsonl", buf)
        line = buf.getvalue().strip()
        back = json.loads(line)
        assert back["a"] == "3/7"
        assert back["c"] == ["1", 2]
        assert abs(back["b"] - 0.123456789012) < 1e-12
        assert json.dumps(back, sort_keys=True) == line

    def test_csv_header_only_when_empty(self):
        buf = io.StringIO()
        emit_records([], "csv", buf)
        assert buf.getvalue() == ""

    def test_jsonl_empty(self):
        buf = io.StringIO()
        emit_records([], "jsonl", buf)
        assert buf.getvalue() == ""


class TestCommands:
    def test_validate_all_configs(self):
        for name in ("example_n2.toml", "example_n3.toml", "heisenberg.toml",
                     "depth1.toml"):
            status, out = run_capture(
                ["validate", "--config", str(CONFIG_DIR / name)])
            assert status == 0, (name, out)

    def test_filtration_jsonl(self):
        status, out = run_capture(
            ["filtration", "--config", str(CONFIG_DIR / "example_n2.toml"),
             "--format", "jsonl"])
        assert status == 0
        rows = [json.loads(line) for line in out.splitlines()]
        assert {"field": "d/dy", "weight": [0, 2]} in rows

    def test_osculate_dump(self):
        status, out = run_capture(
            ["osculate", "--config", str(CONFIG_DIR / "example_n2.toml"),
             "--point", "origin", "--format", "jsonl"])
        assert status == 0
        rows = [json.loads(line) for line in out.splitlines()]
        algebra = [r for r in rows if r.get("kind") == "algebra"]
        assert algebra and algebra[0]["dim"] == 5
        from nilgeom.nilpotent import NilpotentAlgebra
        back = NilpotentAlgebra.load(algebra[0]["dump"])
        assert back.dim == 5

    def test_osculate_adhoc_point(self):
        status, out = run_capture(
            ["osculate", "--config", str(CONFIG_DIR / "example_n2.toml"),
             "--point", "1/2,0", "--format", "jsonl"])
        assert status == 0
        rows = [json.loads(line) for line in out.splitlines()]
        assert [r for r in rows if r.get("kind") == "algebra"][0]["dim"] == 4

    def test_rep_named_covector(self):
        status, out = run_capture(
            ["rep", "--config", str(CONFIG_DIR / "example_n2.toml"),
             "--xi", "pi3", "--format", "jsonl"])
        assert status == 0
        rows = [json.loads(line) for line in out.splitlines()]
        table = {r["element"]: r["dpi"] for r in rows if "dpi" in r}
        assert table["[d/dx]@0,1"] == "d/dt1"
        assert table["[x*d/dy]@0,1"] == "i*t1"

    def test_symbol_command(self):
        status, out = run_capture(
            ["symbol", "--config", str(CONFIG_DIR / "example_n2.toml"),
             "--op", "Dc", "--xi", "pi3", "--format", "jsonl"])
        assert status == 0
        row = json.loads(out.splitlines()[0])
        assert row["k"] == 1
        assert "d^4" in row["symbol"]

    def test_spectrum_command(self):
        status, out = run_capture(
            ["spectrum", "--config", str(CONFIG_DIR / "example_n2.toml"),
             "--op", "Dc", "--xi", "pi3", "--format", "jsonl"])
        assert status == 0
        rows = [json.loads(line) for line in out.splitlines()]
        # sigma at c=0 under pi3 with eta=b=1 is -(d^2-t^2)^2: spectrum -(2n+1)^2
        assert abs(rows[0]["value"] + 1) < 1e-8
        assert abs(rows[1]["value"] + 9) < 1e-8

    def test_missing_required_flag(self):
        status, _ = run_capture(
            ["osculate", "--config", str(CONFIG_DIR / "example_n2.toml")])
        assert status == 2

    def test_verdict_example_n2_obstructions(self):
        import time
        start = time.perf_counter()
        status, out = run_capture(
            ["verdict", "--config", str(CONFIG_DIR / "example_n2.toml"),
             "--format", "jsonl", "--strict"])
        elapsed = time.perf_counter() - start
        assert status == 0
        rows = [json.loads(line) for line in out.splitlines()]
        summary = [r for r in rows if r.get("rep") == "scan"][0]
        assert summary["obstructions"] == ["1", "9", "25"]
        assert summary["inconclusive"] == []
        # the scalar families never obstruct
        for r in rows:
            if r.get("rep") in ("pi1", "pi2"):
                assert r["verdict"] == "INJECTIVE"
        assert elapsed < 60.0

    def test_verdict_heisenberg_sublaplacian(self):
        status, out = run_capture(
            ["verdict", "--config", str(CONFIG_DIR / "heisenberg.toml"),
             "--format", "jsonl", "--strict"])
        assert status == 0
        rows = [json.loads(line) for line in out.splitlines()]
        summary = [r for r in rows if r.get("rep") == "scan"][0]
        assert summary["verdict"] == "MAXIMALLY_HYPOELLIPTIC_ON_GRID"
        # the sublaplacian symbol is the harmonic oscillator: sigma_min = 1
        sub = [r for r in rows if r.get("rep") == "center"][0]
        assert abs(sub["sigma_min"] - 1.0) < 1e-8

    def test_cones_with_catalog_match(self):
        status, out = run_capture(
            ["cones", "--config", str(CONFIG_DIR / "example_n2.toml"),
             "--point", "right", "--format", "jsonl"])
        assert status == 0
        rows = [json.loads(line) for line in out.splitlines()]
        cone_rows = [r for r in rows if r.get("codim") == 2]
        assert cone_rows
        for r in cone_rows:
            assert r["catalog_match"]["distance"] < 1e-6

    def test_hn_nonsingular(self):
        status, out = run_capture(
            ["hn", "--config", str(CONFIG_DIR / "example_n2.toml"),
             "--point", "right", "--nonsingular", "--format", "jsonl"])
        assert status == 0
        rows = [json.loads(line) for line in out.splitlines()]
        assert rows
        for r in rows:
            coords = r["coords"]
            assert max(abs(c) for c in coords[:2]) > 1e-10
            assert max(abs(c) for c in coords[2:]) > 1e-10


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["filtration", "--config", str(CONFIG_DIR / "example_n2.toml")],
        ["osculate", "--config", str(CONFIG_DIR / "example_n2.toml"),
         "--point", "origin"],
        ["cones", "--config", str(CONFIG_DIR / "example_n2.toml"),
         "--point", "origin", "--seed", "3"],
        ["hn", "--config", str(CONFIG_DIR / "heisenberg.toml"),
         "--point", "origin", "--seed", "1"],
    ])
    def test_repeat_runs_byte_identical(self, argv):
        argv = argv + ["--format", "jsonl"]
        s1, out1 = run_capture(argv)
        s2, out2 = run_capture(argv)
        assert s1 == s2 == 0
        assert out1 == out2

    def test_console_script_runs(self):
        out = subprocess.run(
            [sys.executable, "-m", "nilgeom.cli", "filtration", "--config",
             str(CONFIG_DIR / "depth1.toml"), "--format", "jsonl"],
            capture_output=True, text=True)
        assert out.returncode == 0
        assert json.loads(out.stdout.splitlines()[0])["weight"] == [1]
