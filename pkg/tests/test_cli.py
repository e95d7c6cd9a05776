import json
from pathlib import Path

import numpy as np
import pytest

from facgas import cli
from facgas.core import read_snapshot, write_snapshot, ExclusionConfig, Torus


SIM_INI = """\
[run]
process = fep
mode = symmetric
n = 256
t = 0.01
obs_times = 0.005, 0.01
seed = 1
replicas = 3

[profile]
profile = step
left = 0.8
right = 0.3
split = 0.5
"""

SOLVE_INI = """\
[solve]
equation = parabolic
flux = H
grid = 128
t = 0.004
obs_times = 0.004

[profile]
profile = constant
value = 0.8
"""


def run_cli(args):
    return cli.main(args)


class TestSimulate:
    def test_deterministic_outputs(self, tmp_path):
        cfg = tmp_path / "sim.ini"
        cfg.write_text(SIM_INI)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli(["--config", str(cfg), "--out", str(out1), "simulate"]) == 0
        assert run_cli(["--config", str(cfg), "--out", str(out2), "simulate"]) == 0
        for name in ("block_density.csv", "tagged.csv", "events.csv", "metadata.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_replicas_have_distinct_streams(self, tmp_path):
        cfg = tmp_path / "sim.ini"
        cfg.write_text(SIM_INI)
        out = tmp_path / "o"
        assert run_cli(["--config", str(cfg), "--out", str(out), "simulate"]) == 0
        rows = (out / "block_density.csv").read_text().strip().splitlines()[1:]
        by_replica = {}
        for row in rows:
            rep, t, site, value = row.split(",")
            by_replica.setdefault(rep, []).append(value)
        vals = list(by_replica.values())
        assert len(vals) == 3
        assert vals[0] != vals[1] and vals[1] != vals[2]

    def test_frozen_profile_records_zero_events(self, tmp_path):
        cfg = tmp_path / "sim.ini"
        cfg.write_text(SIM_INI.replace("left = 0.8", "left = 0.0")
                              .replace("right = 0.3", "right = 0.0"))
        out = tmp_path / "o"
        assert run_cli(["--config", str(cfg), "--out", str(out), "simulate"]) == 0
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["total_events"] == 0

    def test_config_copied_verbatim(self, tmp_path):
        cfg = tmp_path / "sim.ini"
        cfg.write_text(SIM_INI)
        out = tmp_path / "o"
        run_cli(["--config", str(cfg), "--out", str(out), "simulate"])
        assert (out / "run.ini").read_text() == SIM_INI

    def test_overfull_profile_rejected(self, tmp_path):
        cfg = tmp_path / "sim.ini"
        cfg.write_text(SIM_INI.replace("left = 0.8", "left = 1.0"))
        out = tmp_path / "o"
        assert run_cli(["--config", str(cfg), "--out", str(out), "simulate"]) == 2


class TestSolve:
    def test_constant_profile_is_stationary(self, tmp_path):
        cfg = tmp_path / "solve.ini"
        cfg.write_text(SOLVE_INI)
        out = tmp_path / "o"
        assert run_cli(["--config", str(cfg), "--out", str(out), "solve"]) == 0
        first = (out / "field_t0.000000.txt").read_text().splitlines()[1:]
        last = (out / "field_t0.004000.txt").read_text().splitlines()[1:]
        assert first == last

    def test_cfl_violation_rejected(self, tmp_path):
        cfg = tmp_path / "solve.ini"
        cfg.write_text(SOLVE_INI.replace("[solve]", "[solve]\ncfl = 0.5"))
        out = tmp_path / "o"
        assert run_cli(["--config", str(cfg), "--out", str(out), "solve"]) == 2
        assert not (out / "field_t0.004000.txt").exists()

    def test_solve_deterministic(self, tmp_path):
        cfg = tmp_path / "solve.ini"
        cfg.write_text(SOLVE_INI.replace("constant", "step")
                       .replace("value = 0.8", "left = 0.8\nright = 0.3\nsplit = 0.5"))
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_cli(["--config", str(cfg), "--out", str(a), "solve"]) == 0
        assert run_cli(["--config", str(cfg), "--out", str(b), "solve"]) == 0
        fa = (a / "field_t0.004000.txt").read_bytes()
        fb = (b / "field_t0.004000.txt").read_bytes()
        assert fa == fb


class TestMap:
    def test_snapshot_mapping_roundtrip(self, tmp_path):
        occ = np.isin(np.arange(8), [0, 2, 3, 6, 7]).astype(np.uint8)
        snap = tmp_path / "eta.txt"
        write_snapshot(ExclusionConfig(Torus(8), occ), str(snap), time=0.0)
        out = tmp_path / "o"
        assert run_cli(["--out", str(out), "map", str(snap)]) == 0
        omega, _ = read_snapshot(str(out / "mapped_zerorange.txt"))
        assert np.array_equal(omega.heights, [2, 0, 3])
        meta = json.loads((out / "mapping_meta.jsonl").read_text().splitlines()[0])
        assert meta["x1"] == 1 and meta["m_holes"] == 3

        out2 = tmp_path / "o2"
        assert run_cli(["--out", str(out2), "map", str(out / "mapped_zerorange.txt"),
                        "--n", "8", "--x1", "1"]) == 0
        eta, _ = read_snapshot(str(out2 / "mapped_exclusion.txt"))
        assert np.array_equal(eta.occupancy, occ)


class TestRiemann:
    def test_csv_values(self, tmp_path):
        out = tmp_path / "o"
        assert run_cli(["--out", str(out), "riemann", "--alpha-l", "1.5",
                        "--alpha-r", "3.0", "--p", "1.0", "--t", "0.5",
                        "--lo", "0.0", "--hi", "0.2", "--grid", "3"]) == 0
        rows = (out / "riemann.csv").read_text().strip().splitlines()[1:]
        vals = [float(r.split(",")[1]) for r in rows]
        # shock at v = t*2/9 = 1/9: 0.0 and 0.1 are left of it, 0.2 right
        assert vals == [1.5, 1.5, 3.0]


class TestVerify:
    def test_flux_relation_scenario_passes(self, tmp_path):
        out = tmp_path / "o"
        assert run_cli(["--out", str(out), "verify", "--scenario",
                        "flux-relation"]) == 0
        report = (out / "report.csv").read_text()
        assert "pass" in report and "FAIL" not in report

    def test_roundtrip_scenario_passes(self, tmp_path):
        out = tmp_path / "o"
        assert run_cli(["--out", str(out), "verify", "--scenario",
                        "roundtrip-micro"]) == 0

    def test_mapping_commutation_scenario_passes(self, tmp_path):
        out = tmp_path / "o"
        assert run_cli(["--out", str(out), "verify", "--scenario",
                        "mapping-commutation"]) == 0


class TestSweep:
    def test_sweep_over_sizes(self, tmp_path):
        ini = SIM_INI + "\n[sweep]\nkey = n\nvalues = 64, 128\n"
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(ini)
        out = tmp_path / "o"
        assert run_cli(["--config", str(cfg), "--out", str(out), "sweep"]) == 0
        summary = (out / "sweep_summary.csv").read_text().strip().splitlines()
        assert len(summary) == 3
        assert (out / "n_64" / "block_density.csv").exists()
        assert (out / "n_128" / "block_density.csv").exists()
