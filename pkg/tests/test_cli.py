import csv
import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from rdgap import __version__
from rdgap._manifest import (
    canonical_json,
    manifest_digest,
    sha256_hex,
    split_manifest_comment,
)

HELP_DIR = Path(__file__).parent / "fixtures" / "help"
TWO_LEVEL_LITERAL = "1.8:0.5,0.2:0.5"


def run_cli(*args, env_extra=None):
    env = dict(os.environ)
    env["COLUMNS"] = "80"
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "rdgap.cli", *args],
        capture_output=True,
        text=True,
        env=env,
    )


def read_emitted(out_path: Path):
    """Return (digest, payload, manifest) for a CSV written with --out."""
    digest, payload = split_manifest_comment(out_path.read_text())
    manifest = json.loads(Path(f"{out_path}.manifest.json").read_text())
    return digest, payload, manifest


class TestHelpSnapshots:
    @pytest.mark.parametrize(
        "name,args",
        [
            ("main", ["--help"]),
            ("wf", ["wf", "--help"]),
            ("rdrc", ["rdrc", "--help"]),
            ("gap-sweep", ["gap-sweep", "--help"]),
            ("simulate", ["simulate", "--help"]),
            ("version", ["version", "--help"]),
        ],
    )
    def test_snapshot(self, name, args):
        proc = run_cli(*args)
        assert proc.returncode == 0
        assert proc.stdout == (HELP_DIR / f"{name}.txt").read_text()


class TestVersion:
    def test_prints_version(self):
        proc = run_cli("version")
        assert proc.returncode == 0
        assert proc.stdout == f"rdgap {__version__}\n"


class TestWf:
    def test_default_grid_flat(self):
        proc = run_cli("wf")
        assert proc.returncode == 0
        lines = proc.stdout.splitlines()
        assert lines[0] == "d_star,t,rate_bits"
        assert len(lines) == 1 + 19  # 0.05..0.95 step 0.05
        assert "0.25,0.25,1.0" in lines

    def test_semi_flat_single_point(self):
        proc = run_cli("wf", "--spectrum", "semiflat:0.5", "--distortion-grid", "0.5:0.5:1")
        assert proc.returncode == 0
        assert proc.stdout == "d_star,t,rate_bits\n0.5,1.0,0.25\n"

    def test_grid_bounds_rejected(self):
        proc = run_cli("wf", "--distortion-grid", "0:1:0.25")
        assert proc.returncode == 2
        assert "distortion grid" in proc.stderr

    @pytest.mark.parametrize(
        "grid", ["nonsense", "0.1:0.9", "0.1:0.9:-0.1", "0.9:0.1:0.1"]
    )
    def test_malformed_grid_rejected(self, grid):
        assert run_cli("wf", "--distortion-grid", grid).returncode == 2

    def test_bad_spectrum_rejected(self):
        proc = run_cli("wf", "--spectrum", "2:0.5,zebra:0.5")
        assert proc.returncode == 2
        assert "bad spectrum" in proc.stderr

    def test_spectrum_from_file(self, tmp_path):
        f = tmp_path / "s.csv"
        f.write_text("# value,weight\n1.8,0.5\n0.2,0.5\n")
        direct = run_cli("wf", "--spectrum", TWO_LEVEL_LITERAL, "--distortion-grid", "0.2:0.4:0.1")
        via_file = run_cli("wf", "--spectrum", f"@{f}", "--distortion-grid", "0.2:0.4:0.1")
        assert via_file.returncode == 0
        assert via_file.stdout == direct.stdout

    def test_svg_written_and_well_formed(self, tmp_path):
        svg = tmp_path / "plot.svg"
        proc = run_cli("wf", "--compare", "--svg", str(svg))
        assert proc.returncode == 0
        root = ET.fromstring(svg.read_text())
        assert root.tag.endswith("svg")
        body = svg.read_text()
        assert body.count("<polyline") >= 2  # oracle curve + overlay
        assert "rate_wf" in body and "rate_rc" in body


class TestRdrc:
    def test_flat_single_point(self):
        proc = run_cli("rdrc", "--rate-grid", "1:1:1")
        assert proc.returncode == 0
        assert proc.stdout == "rate_bits,T,d_rc\n1.0,3.0,0.25\n"

    def test_default_grid_row_count(self):
        proc = run_cli("rdrc")
        lines = proc.stdout.splitlines()
        assert lines[0] == "rate_bits,T,d_rc"
        assert len(lines) == 1 + 16  # 0.25..4 step 0.25

    def test_unreachable_rate_exits_one(self):
        proc = run_cli("rdrc", "--rate-grid", "200:200:1")
        assert proc.returncode == 1
        assert "error:" in proc.stderr
        assert proc.stdout == ""

    def test_nonpositive_rate_rejected(self):
        assert run_cli("rdrc", "--rate-grid", "0:1:0.5").returncode == 2


class TestManifest:
    def test_emitted_files_are_internally_consistent(self, tmp_path):
        out = tmp_path / "wf.csv"
        proc = run_cli("wf", "--out", str(out))
        assert proc.returncode == 0
        digest, payload, manifest = read_emitted(out)
        assert out.read_text().startswith(f"# manifest: {digest}\n")
        assert manifest["subcommand"] == "wf"
        assert manifest["version"] == __version__
        assert manifest["parameters"]["spectrum"] == "1.0:1.0"  # canonical literal
        assert manifest["outputs"]["csv"] == sha256_hex(payload.encode())
        assert manifest_digest(manifest) == digest
        assert Path(f"{out}.manifest.json").read_text() == canonical_json(manifest) + "\n"

    def test_svg_digest_recorded(self, tmp_path):
        out = tmp_path / "wf.csv"
        svg = tmp_path / "wf-plot.svg"
        assert run_cli("wf", "--svg", str(svg), "--out", str(out)).returncode == 0
        _, _, manifest = read_emitted(out)
        assert manifest["outputs"]["svg"] == sha256_hex(svg.read_bytes())

    def test_stdout_mode_omits_comment(self):
        proc = run_cli("wf", "--distortion-grid", "0.5:0.5:1")
        assert not proc.stdout.startswith("#")


class TestDeterminism:
    def test_wf_rerun_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli("wf", "--spectrum", TWO_LEVEL_LITERAL, "--out", str(a))
        run_cli("wf", "--spectrum", TWO_LEVEL_LITERAL, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert Path(f"{a}.manifest.json").read_bytes() == Path(f"{b}.manifest.json").read_bytes()

    def test_simulate_rerun_identical_across_thread_counts(self, tmp_path):
        args = ["simulate", "--mode", "scheme", "--n", "8", "--trials", "64", "--seed", "5"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(*args, "--out", str(a))
        run_cli(*args, "--out", str(b), env_extra={"RDGAP_THREADS": "2"})
        assert a.read_bytes() == b.read_bytes()

    def test_gap_sweep_rerun_identical_across_thread_counts(self, tmp_path):
        args = ["gap-sweep", "--dstar-grid", "0.2:0.4:0.1", "--kmax", "1"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        pa = run_cli(*args, "--out", str(a))
        pb = run_cli(*args, "--out", str(b), env_extra={"RDGAP_THREADS": "2"})
        assert pa.returncode == pb.returncode == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"spectrum": "semiflat:0.5", "distortion-grid": "0.25:0.75:0.25"}))
        proc = run_cli("wf", "--config", str(cfg))
        lines = proc.stdout.splitlines()
        assert len(lines) == 1 + 3
        assert "0.5,1.0,0.25" in lines

    def test_explicit_flag_wins(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"spectrum": "semiflat:0.5", "distortion-grid": "0.5:0.5:1"}))
        proc = run_cli("wf", "--spectrum", "flat", "--config", str(cfg))
        assert proc.stdout == "d_star,t,rate_bits\n0.5,0.5,0.5\n"

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"spectrums": "flat"}))
        proc = run_cli("wf", "--config", str(cfg))
        assert proc.returncode == 2
        assert "unknown config key" in proc.stderr

    def test_unreadable_config_rejected(self, tmp_path):
        proc = run_cli("wf", "--config", str(tmp_path / "missing.json"))
        assert proc.returncode == 2


class TestGapSweepCommand:
    def test_kmax_one_stdout(self):
        proc = run_cli("gap-sweep", "--dstar-grid", "0.25:0.35:0.05", "--kmax", "1")
        assert proc.returncode == 0
        lines = proc.stdout.splitlines()
        assert lines[0] == "d_star,rate_rc_bits,rate_wf_bits,gap_bits,levels,weights"
        data = lines[1:-1]
        assert len(data) == 3
        assert all(row.split(",")[3] == "0.000000" for row in data)
        assert lines[-1].startswith("global max gap_bits = 0.000000 at d_star = ")

    def test_positive_gap_reported(self, tmp_path):
        out = tmp_path / "g.csv"
        proc = run_cli("gap-sweep", "--dstar-grid", "0.3:0.3:1", "--kmax", "2", "--out", str(out))
        assert proc.returncode == 0
        assert proc.stdout == "global max gap_bits = 0.093964 at d_star = 0.3\n"
        digest, payload, manifest = read_emitted(out)
        assert manifest["parameters"] == {"dstar_grid": "0.3:0.3:1", "kmax": 2, "seed": 0}
        assert payload.splitlines()[1].split(",")[3] == "0.093964"

    def test_grid_outside_bounds_rejected(self):
        assert run_cli("gap-sweep", "--dstar-grid", "0.001:0.5:0.1").returncode == 2
        assert run_cli("gap-sweep", "--kmax", "0").returncode == 2


class TestSimulateCommand:
    def _row(self, proc):
        lines = proc.stdout.splitlines()
        header = lines[0].split(",")
        row = next(csv.reader([lines[1]]))
        return dict(zip(header, row))

    def test_scheme_row_masks_unrelated_fields(self):
        proc = run_cli(
            "simulate", "--mode", "scheme", "--n", "8", "--trials", "32",
            "--spectrum", TWO_LEVEL_LITERAL,
        )
        assert proc.returncode == 0
        row = self._row(proc)
        assert row["mode"] == "scheme"
        assert row["rate_bits"] == "1.0"
        assert row["spectrum"] == TWO_LEVEL_LITERAL  # quoted comma survives csv round-trip
        assert row["t"] == row["T"] == row["eta"] == row["w_batches"] == ""
        assert row["p_hat"] == row["exponent"] == ""
        assert float(row["mean"]) > float(row["analytic"])

    def test_success_row_reports_interval_and_exponent(self):
        proc = run_cli(
            "simulate", "--mode", "success", "--n", "10", "--rate", "0.5",
            "--trials", "64", "--eta", "0.05", "--w-batches", "16",
        )
        row = self._row(proc)
        assert row["mode"] == "success"
        assert row["eta"] == "0.05" and row["w_batches"] == "16"
        assert row["exponent_is_lower_bound"] == "false"
        assert 0.0 < float(row["wilson_low"]) < float(row["p_hat"]) < float(row["wilson_high"])
        assert float(row["exponent"]) > 0.0

    def test_coupling_requires_t(self):
        proc = run_cli("simulate", "--mode", "coupling")
        assert proc.returncode == 2
        assert "--t is required" in proc.stderr

    def test_filter_requires_T(self):
        proc = run_cli("simulate", "--mode", "filter")
        assert proc.returncode == 2
        assert "--T is required" in proc.stderr

    def test_coupling_row(self):
        proc = run_cli("simulate", "--mode", "coupling", "--t", "0.25", "--n", "16", "--trials", "64")
        row = self._row(proc)
        assert row["t"] == "0.25"
        assert row["rate_bits"] == row["T"] == row["rotation"] == ""
        assert row["analytic"] == "0.25"

    def test_mode_required(self):
        assert run_cli("simulate").returncode == 2

    def test_invalid_run_config_exits_two(self):
        proc = run_cli("simulate", "--mode", "scheme", "--rate", "0", "--n", "8")
        assert proc.returncode == 2
