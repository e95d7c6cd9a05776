import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facgas.core import (ExclusionConfig, LineWindow, Phase, Torus,
                         ZeroRangeConfig, classify_exclusion,
                         classify_zero_range, hole_count, particle_count,
                         read_snapshot, total_mass, write_snapshot)


def eta_from_sites(n, sites):
    occ = np.zeros(n, dtype=np.uint8)
    occ[list(sites)] = 1
    return ExclusionConfig(Torus(n), occ)


class TestClassifyExclusion:
    def test_ergodic_example(self):
        assert classify_exclusion(eta_from_sites(8, [0, 1, 3, 5, 6])) is Phase.ERGODIC

    def test_frozen_example(self):
        assert classify_exclusion(eta_from_sites(8, [2, 4, 7])) is Phase.FROZEN

    def test_transient_example(self):
        # sites 2,3 adjacent occupied and sites 0,1 adjacent empty
        assert classify_exclusion(eta_from_sites(8, [2, 3, 4])) is Phase.TRANSIENT

    def test_exhaustive_phase_is_exclusive_and_count_bounded(self):
        for n in range(2, 13):
            for code in range(2 ** n):
                occ = np.array([(code >> i) & 1 for i in range(n)], dtype=np.uint8)
                phase = classify_exclusion(ExclusionConfig(Torus(n), occ))
                k = int(occ.sum())
                if phase is Phase.ERGODIC:
                    assert k >= -(-n // 2)  # ceil(n/2)
                elif phase is Phase.FROZEN:
                    assert k <= n // 2

    def test_line_window_ignores_padding(self):
        geom = LineWindow(0, 4, padding=3)
        occ = np.zeros(geom.n_sim, dtype=np.uint8)
        occ[geom.window_slice()] = [1, 0, 0, 1]
        # two adjacent particles in the padding must not flip the phase
        occ[0] = occ[1] = 1
        assert classify_exclusion(ExclusionConfig(geom, occ)) is Phase.FROZEN

    def test_boundary_convention_is_frozen(self):
        # the alternating ring satisfies both inequalities; no move has
        # positive rate, so it is classified frozen
        occ = np.tile([1, 0], 4).astype(np.uint8)
        assert classify_exclusion(ExclusionConfig(Torus(8), occ)) is Phase.FROZEN
        ones = ZeroRangeConfig(Torus(4), np.ones(4, dtype=np.int64))
        assert classify_zero_range(ones) is Phase.FROZEN


class TestClassifyZeroRange:
    def test_examples(self):
        geom = Torus(4)
        assert classify_zero_range(ZeroRangeConfig(geom, np.array([2, 1, 3, 1]))) is Phase.ERGODIC
        assert classify_zero_range(ZeroRangeConfig(geom, np.array([0, 1, 1, 0]))) is Phase.FROZEN
        assert classify_zero_range(ZeroRangeConfig(geom, np.array([0, 0, 2, 1]))) is Phase.TRANSIENT

    @given(st.lists(st.integers(min_value=0, max_value=5), min_size=2, max_size=16))
    @settings(max_examples=200, deadline=None)
    def test_exactly_one_phase(self, heights):
        h = np.asarray(heights, dtype=np.int64)
        phase = classify_zero_range(ZeroRangeConfig(Torus(h.size), h))
        has_hole = (h == 0).any()
        has_pile = (h >= 2).any()
        if has_hole and has_pile:
            assert phase is Phase.TRANSIENT
        elif has_pile:
            assert phase is Phase.ERGODIC
        else:
            assert phase is Phase.FROZEN


class TestCounts:
    def test_empty_torus(self):
        eta = ExclusionConfig(Torus(8), np.zeros(8, dtype=np.uint8))
        assert particle_count(eta) == 0
        assert hole_count(eta) == 8

    def test_figure_configuration(self):
        assert hole_count(eta_from_sites(8, [0, 2, 3, 6, 7])) == 3

    def test_total_mass(self):
        assert total_mass(ZeroRangeConfig(Torus(3), np.array([2, 0, 3]))) == 5


class TestValidation:
    def test_occupancy_must_be_binary(self):
        with pytest.raises(ValueError):
            ExclusionConfig(Torus(4), np.array([0, 1, 2, 0]))

    def test_heights_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            ZeroRangeConfig(Torus(3), np.array([1, -1, 0]))

    def test_geometry_bounds(self):
        with pytest.raises(ValueError):
            LineWindow(3, 3)
        with pytest.raises(ValueError):
            LineWindow(0, 4, padding=-1)


class TestSnapshotIO:
    @pytest.mark.parametrize("geom", [Torus(6), LineWindow(-2, 3, 2)])
    def test_exclusion_roundtrip(self, geom, tmp_path):
        rng = np.random.default_rng(0)
        occ = (rng.random(geom.n_sim) < 0.5).astype(np.uint8)
        eta = ExclusionConfig(geom, occ)
        path = tmp_path / "snap.txt"
        write_snapshot(eta, str(path), time=0.25)
        back, t = read_snapshot(str(path))
        assert t == 0.25
        assert back.geometry == geom
        assert np.array_equal(back.occupancy, occ)

    def test_zero_range_roundtrip_in_memory(self):
        omega = ZeroRangeConfig(Torus(5), np.array([0, 3, 1, 2, 0]))
        buf = io.StringIO()
        write_snapshot(omega, buf, time=1.5)
        buf.seek(0)
        back, t = read_snapshot(buf)
        assert t == 1.5
        assert np.array_equal(back.heights, omega.heights)
