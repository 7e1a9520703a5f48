"""Vector map primitives: regions, lanes, point lookups."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vantage import (
    Lane,
    Region,
    RegionKind,
    ValidationError,
    VectorMap,
    heading_between,
    normalize_heading,
)


def rect(x0, y0, x1, y1):
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], float)


def tiny_map(regions, lanes=()):
    return VectorMap(name="m", center=(0.0, 0.0), regions=list(regions),
                     lanes=list(lanes))


class TestRegionKind:
    def test_from_name_case_insensitive(self):
        assert RegionKind.from_name("crosswalk") is RegionKind.CROSSWALK
        assert RegionKind.from_name("  Junction ") is RegionKind.JUNCTION

    def test_unknown_name(self):
        with pytest.raises(ValidationError, match="unknown region kind"):
            RegionKind.from_name("runway")

    def test_rank_order(self):
        # lookup priority grows with pedestrian exposure
        assert (RegionKind.SHOULDER < RegionKind.SIDEWALK
                < RegionKind.DRIVEWAY < RegionKind.JUNCTION
                < RegionKind.CROSSWALK)


class TestRegion:
    def test_priority_defaults_to_kind(self):
        r = Region("a", RegionKind.SIDEWALK, rect(0, 0, 1, 1))
        assert r.priority == int(RegionKind.SIDEWALK)
        r2 = Region("b", RegionKind.SIDEWALK, rect(0, 0, 1, 1), priority=9)
        assert r2.priority == 9

    def test_too_few_vertices(self):
        with pytest.raises(ValidationError, match="3 vertices"):
            Region("a", RegionKind.JUNCTION, np.array([[0, 0], [1, 0]]))

    def test_self_intersecting(self):
        bowtie = np.array([[0, 0], [1, 1], [1, 0], [0, 1]], float)
        with pytest.raises(ValidationError, match="not simple"):
            Region("a", RegionKind.JUNCTION, bowtie)

    def test_zero_area(self):
        sliver = np.array([[0, 0], [1, 0], [2, 0]], float)
        with pytest.raises(ValidationError):
            Region("a", RegionKind.JUNCTION, sliver)


class TestLane:
    def test_needs_two_waypoints(self):
        with pytest.raises(ValidationError, match="2 waypoints"):
            Lane("l", np.array([[0.0, 0.0, 0.0]]))

    def test_coincident_waypoints(self):
        wps = np.array([[0, 0, 0], [0, 0, 0], [1, 0, 0]], float)
        with pytest.raises(ValidationError, match="coincide"):
            Lane("l", wps)

    def test_segment_heading_straight(self):
        lane = Lane("l", np.array([[0, 0, 0], [4, 0, 0], [8, 4, 0]], float))
        assert lane.segment_heading(0) == 0.0
        assert lane.segment_heading(1) == pytest.approx(math.pi / 4)

    def test_heading_falls_back_over_vertical_segment(self):
        # middle segment is purely vertical in xy; heading borrows the
        # next segment first, the previous one at the tail
        wps = np.array([[0, 0, 0], [4, 0, 0], [4, 0, 3], [4, 4, 3]], float)
        lane = Lane("l", wps)
        assert lane.segment_heading(1) == pytest.approx(math.pi / 2)
        wps2 = np.array([[0, 0, 0], [4, 0, 0], [4, 0, 3]], float)
        assert Lane("l2", wps2).segment_heading(1) == 0.0

    def test_all_degenerate_raises(self):
        wps = np.array([[0, 0, 0], [0, 0, 2], [0, 0, 4]], float)
        lane = Lane("l", wps)
        with pytest.raises(ValidationError, match="degenerate"):
            lane.segment_heading(0)

    def test_bad_spacing(self):
        with pytest.raises(ValidationError, match="nominal_spacing"):
            Lane("l", np.array([[0, 0, 0], [1, 0, 0]], float),
                 nominal_spacing=0.0)


class TestHeadings:
    def test_heading_ignores_z(self):
        assert heading_between((0, 0, 0), (1, 1, 7)) == pytest.approx(
            math.pi / 4)

    def test_degenerate_pair_raises(self):
        with pytest.raises(ValidationError, match="degenerate"):
            heading_between((1, 1, 0), (1, 1, 5))

    def test_normalize_edge_cases(self):
        assert normalize_heading(-math.pi) == math.pi
        assert normalize_heading(math.pi) == math.pi
        assert normalize_heading(3 * math.pi) == pytest.approx(math.pi)
        assert normalize_heading(0.0) == 0.0

    @given(st.floats(-100.0, 100.0))
    def test_normalize_range_and_congruence(self, theta):
        out = normalize_heading(theta)
        assert -math.pi < out <= math.pi
        assert math.isclose(math.sin(out), math.sin(theta), abs_tol=1e-9)
        assert math.isclose(math.cos(out), math.cos(theta), abs_tol=1e-9)


class TestVectorMap:
    def overlapping(self):
        return tiny_map([
            Region("road", RegionKind.DRIVEWAY, rect(-10, -2, 10, 2)),
            Region("zebra", RegionKind.CROSSWALK, rect(-1, -2, 1, 2)),
            Region("walk", RegionKind.SIDEWALK, rect(-10, 2, 10, 4)),
        ])

    def test_priority_resolution(self):
        m = self.overlapping()
        assert m.region_at(0.0, 0.0) is RegionKind.CROSSWALK
        assert m.region_at(5.0, 0.0) is RegionKind.DRIVEWAY
        assert m.region_at(5.0, 3.0) is RegionKind.SIDEWALK
        assert m.region_at(50.0, 50.0) is None

    def test_boundary_points_count_as_inside(self):
        m = self.overlapping()
        assert m.region_at(10.0, 2.0) is not None  # shared corner
        assert m.region_at(-1.0, 0.0) is RegionKind.CROSSWALK  # edge

    def test_explicit_priority_beats_kind(self):
        m = tiny_map([
            Region("a", RegionKind.CROSSWALK, rect(0, 0, 2, 2)),
            Region("b", RegionKind.SHOULDER, rect(0, 0, 2, 2), priority=99),
        ])
        assert m.region_at(1.0, 1.0) is RegionKind.SHOULDER

    def test_kinds_at_matches_pointwise(self):
        m = self.overlapping()
        rng = np.random.default_rng(7)
        xs = rng.uniform(-12, 12, 200)
        ys = rng.uniform(-5, 6, 200)
        kinds = m.kinds_at(xs, ys)
        assert kinds.dtype == np.int8
        for x, y, k in zip(xs, ys, kinds):
            want = m.region_at(float(x), float(y))
            assert k == (0 if want is None else int(want))

    def test_duplicate_names_rejected(self):
        r = Region("a", RegionKind.JUNCTION, rect(0, 0, 1, 1))
        with pytest.raises(ValidationError, match="duplicate region"):
            tiny_map([r, Region("a", RegionKind.SIDEWALK, rect(2, 2, 3, 3))])
        lane = Lane("l", np.array([[0, 0, 0], [1, 0, 0]], float))
        with pytest.raises(ValidationError, match="duplicate lane"):
            tiny_map([r], [lane, Lane("l", np.array([[0, 1, 0], [1, 1, 0]],
                                                    float))])

    def test_needs_a_region(self):
        with pytest.raises(ValidationError, match="at least one region"):
            tiny_map([])
