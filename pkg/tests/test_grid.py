"""ROI discretization, ray traversal wrapper, visibility flags."""

import math

import numpy as np
import pytest

from vantage import (
    Ray,
    Region,
    RegionKind,
    ResourceLimitError,
    RoiSpec,
    ValidationError,
    VectorMap,
    VisibilityField,
    build_roi,
    mark_visible,
    traverse_ray,
)


def rect(x0, y0, x1, y1):
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], float)


def flat_map(half=120.0, kind=RegionKind.JUNCTION):
    return VectorMap(name="flat", center=(0.0, 0.0),
                     regions=[Region("all", kind,
                                     rect(-half, -half, half, half))],
                     lanes=[])


class TestRoiSpec:
    def test_core_must_fit(self):
        with pytest.raises(ValidationError, match="core_radius"):
            RoiSpec(center=(0, 0), radius=20.0)
        RoiSpec(center=(0, 0), radius=20.0, core_radius=20.0)

    def test_positive_fields(self):
        for kw in ({"radius": -1.0}, {"radius": 50.0, "voxel_edge": 0.0},
                   {"radius": 50.0, "height": -2.0}):
            with pytest.raises(ValidationError):
                RoiSpec(center=(0, 0), **kw)


class TestDims:
    def test_default_fifty_meter_roi(self):
        g = build_roi(flat_map(), RoiSpec(center=(0, 0), radius=50.0))
        assert g.dims == (200, 200, 8)
        assert g.origin == (-50.0, -50.0, 0.0)

    def test_degenerate_small_roi(self):
        g = build_roi(flat_map(), RoiSpec(center=(0, 0), radius=0.4,
                                          core_radius=0.4))
        assert g.dims == (1, 1, 8)
        assert bool(g.active.any())

    def test_exact_multiple_edge(self):
        # 2R/e lands exactly on an integer: no extra column
        g = build_roi(flat_map(), RoiSpec(center=(0, 0), radius=1.25,
                                          core_radius=1.0))
        assert g.dims[0] == 5

    def test_thin_slab(self):
        g = build_roi(flat_map(), RoiSpec(center=(0, 0), radius=2.0,
                                          core_radius=2.0, height=0.2))
        assert g.dims[2] == 1

    def test_voxel_cap(self):
        with pytest.raises(ResourceLimitError):
            build_roi(flat_map(), RoiSpec(center=(0, 0), radius=50.0),
                      max_voxels=1000)


class TestMembership:
    def test_matches_bruteforce_centers(self):
        vmap = flat_map()
        spec = RoiSpec(center=(3.0, -2.0), radius=7.3, core_radius=5.0,
                       ground=1.0, height=3.0, voxel_edge=0.7)
        g = build_roi(vmap, spec)
        nx, ny, nz = g.dims
        want = np.zeros((nx, ny, nz), dtype=bool)
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    x = g.origin[0] + (i + 0.5) * g.edge
                    y = g.origin[1] + (j + 0.5) * g.edge
                    z = g.origin[2] + (k + 0.5) * g.edge
                    want[i, j, k] = (
                        math.hypot(x - 3.0, y + 2.0) <= 7.3
                        and 1.0 <= z <= 4.0)
        assert np.array_equal(g.active.reshape(nx, ny, nz), want)

    def test_boundary_center_is_active(self):
        # top-layer centers sit exactly on the upper z bound: inclusive
        # membership keeps the whole layer
        g = build_roi(flat_map(), RoiSpec(center=(0, 0), radius=2.0,
                                          core_radius=2.0, height=3.75))
        nx, ny, nz = g.dims
        assert nz == 8
        act = g.active.reshape(nx, ny, nz)
        assert act[:, :, 7].any()
        assert np.array_equal(act[:, :, 7], act[:, :, 3])

    def test_region_kind_and_weight(self):
        vmap = VectorMap(
            name="two", center=(0.0, 0.0),
            regions=[Region("road", RegionKind.DRIVEWAY, rect(-5, -5, 5, 0)),
                     Region("walk", RegionKind.SIDEWALK, rect(-5, 0, 5, 5))],
            lanes=[])
        g = build_roi(vmap, RoiSpec(center=(0, 0), radius=4.0,
                                    core_radius=4.0))
        nx, ny, nz = g.dims
        kinds = g.region_kind.reshape(nx, ny, nz)
        weights = g.weight.reshape(nx, ny, nz)
        cols = g.column_centers().reshape(nx, ny, 2)
        for i in range(nx):
            for j in range(ny):
                if not g.active.reshape(nx, ny, nz)[i, j, 0]:
                    assert kinds[i, j, 0] == 0
                    continue
                want = vmap.region_at(*cols[i, j])
                assert kinds[i, j, 0] == (0 if want is None else int(want))
                if want is RegionKind.DRIVEWAY:
                    assert weights[i, j, 0] == pytest.approx(0.22)
                elif want is RegionKind.SIDEWALK:
                    assert weights[i, j, 0] == pytest.approx(0.17)

    def test_unlabeled_voxels_carry_zero_weight(self):
        vmap = VectorMap(
            name="spot", center=(0.0, 0.0),
            regions=[Region("pad", RegionKind.JUNCTION, rect(-1, -1, 1, 1))],
            lanes=[])
        g = build_roi(vmap, RoiSpec(center=(0, 0), radius=5.0,
                                    core_radius=5.0))
        unlabeled = g.active & (g.region_kind == 0)
        assert unlabeled.any()
        assert np.all(g.weight[unlabeled] == 0.0)


class TestRay:
    def test_direction_must_be_unit(self):
        with pytest.raises(ValidationError, match="unit"):
            Ray((0, 0, 0), (1.0, 1.0, 0.0), 5.0)

    def test_t_max_positive_finite(self):
        for t in (0.0, -1.0, math.inf):
            with pytest.raises(ValidationError):
                Ray((0, 0, 0), (1.0, 0.0, 0.0), t)


class TestTraverseRay:
    def grid(self):
        return build_roi(flat_map(), RoiSpec(center=(4.0, 4.0), radius=4.0,
                                             core_radius=4.0))

    def test_axis_aligned_run(self):
        # 5-column grid; the 2.45 m run would clip voxel 5 but the grid
        # ends at x=2.5, so exactly columns 0..4 come back
        g = build_roi(flat_map(), RoiSpec(center=(1.25, 1.25), radius=1.25,
                                          core_radius=1.0))
        assert g.dims[:2] == (5, 5)
        o = (0.25, 0.25, 0.25)
        out = traverse_ray(g, Ray(o, (1.0, 0.0, 0.0), 4.9 * g.edge))
        assert out == [(i, 0, 0) for i in range(5)]

    def test_miss_is_empty(self):
        g = self.grid()
        out = traverse_ray(g, Ray((4.0, 4.0, 10.0), (0.0, 0.0, 1.0), 9.0))
        assert out == []

    def test_endpoint_voxels_present(self):
        g = self.grid()
        rng = np.random.default_rng(9)
        for _ in range(50):
            o = rng.uniform(0.5, 7.5, 3)
            o[2] = rng.uniform(0.2, 3.8)
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            t = float(rng.uniform(0.3, 3.0))
            end = o + t * d
            out = traverse_ray(g, Ray(tuple(o), tuple(d), t))
            cells = set(out)
            start_cell = tuple(int(math.floor((o[a] - g.origin[a]) / g.edge))
                               for a in range(3))
            assert start_cell in cells
            if all(g.origin[a] <= end[a] <= g.origin[a] + g.dims[a] * g.edge
                   for a in range(3)):
                end_cell = tuple(
                    int(math.floor((end[a] - g.origin[a]) / g.edge))
                    for a in range(3))
                # a supercover may report a co-touched neighbour instead
                # only when the endpoint sits exactly on a boundary plane
                assert any(
                    all(abs(c[a] - end_cell[a]) <= 1 for a in range(3))
                    for c in cells)
                assert end_cell in cells or any(
                    (end[a] - g.origin[a]) / g.edge
                    == math.floor((end[a] - g.origin[a]) / g.edge)
                    for a in range(3))


class TestVisibility:
    def grid(self):
        return build_roi(flat_map(), RoiSpec(center=(0, 0), radius=3.0,
                                             core_radius=3.0))

    def test_empty_update_is_noop(self):
        g = self.grid()
        vis = VisibilityField(g)
        before = vis.f.copy()
        mark_visible(vis, [])
        assert np.array_equal(vis.f, before)

    def test_idempotent_and_commutative(self):
        g = self.grid()
        coords = g.coords(np.flatnonzero(g.active)[:40])
        a = np.stack(coords, axis=1)[:20]
        b = np.stack(coords, axis=1)[20:40]

        v1 = VisibilityField(g)
        mark_visible(v1, a)
        mark_visible(v1, a)
        mark_visible(v1, b)

        v2 = VisibilityField(g)
        mark_visible(v2, b)
        mark_visible(v2, a)
        assert np.array_equal(v1.f, v2.f)
        assert v1.n_visible == 40

    def test_inactive_voxels_never_flagged(self):
        g = self.grid()
        vis = VisibilityField(g)
        mark_visible(vis, np.flatnonzero(~g.active)[:10])
        assert vis.n_visible == 0
