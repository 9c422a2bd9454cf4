import math

import numpy as np
import pytest

from striplab.errors import MeshResolutionError, StripLabError
from striplab.geometry import (Constant, CylinderGeometry, Disk, Oscillatory,
                               Polygon, RandomBounded, build_pattern,
                               pattern_subset)
from striplab.mesh import (BoundaryTag, Grading, LateralCondition, audit,
                           build_extruded_mesh, build_limit_mesh,
                           build_meridian_mesh, graded_ticks, load_mesh,
                           refine_nested, retag_lateral, retag_lateral_uniform,
                           save_mesh)


def lateral_tags(mesh):
    return mesh.facet_tags[np.isin(mesh.facet_tags,
                                   (BoundaryTag.LATERAL_DIRICHLET,
                                    BoundaryTag.LATERAL_NEUMANN,
                                    BoundaryTag.LATERAL_ROBIN))]


class TestMeridianMesh:
    def test_dirichlet_facets_tile_strip(self, quarter_pattern):
        mesh = build_meridian_mesh(quarter_pattern, 0, 0.2)
        audit(mesh, quarter_pattern)
        facets = mesh.boundary_facets[mesh.facet_tags == BoundaryTag.LATERAL_DIRICHLET]
        zs = mesh.nodes[facets.ravel()][:, 1]
        assert zs.min() == pytest.approx(math.pi / 4, abs=1e-14)
        assert zs.max() == pytest.approx(3 * math.pi / 4, abs=1e-14)
        measure = mesh.boundary_measure(BoundaryTag.LATERAL_DIRICHLET)
        assert measure == pytest.approx(math.pi / 2, abs=1e-12)

    def test_strip_endpoints_are_nodes(self, disk_pi):
        p = build_pattern(disk_pi, 3, [Constant(0.25)] * 3, [Constant(0.35)] * 3)
        mesh = build_meridian_mesh(p, 0, 0.15)
        z_nodes = np.unique(mesh.nodes[:, 1])
        eps = p.eps
        for j in range(3):
            c = eps * math.pi * (j + 0.5)
            for z in (c - eps * 0.25, c + eps * 0.35):
                assert np.min(np.abs(z_nodes - z)) < 1e-13

    def test_grading_facet_length_scan(self, quarter_pattern):
        g = Grading(levels=4, ratio=0.5)
        mesh = build_meridian_mesh(quarter_pattern, 0, 0.2, g)
        lat = np.isin(mesh.facet_tags, (BoundaryTag.LATERAL_DIRICHLET,
                                        BoundaryTag.LATERAL_NEUMANN))
        lengths = mesh.facet_measures()[lat]
        assert lengths.min() == pytest.approx(0.2 * 0.5**4, rel=1e-10)

    def test_resolution_refusal(self, disk_pi):
        p = build_pattern(disk_pi, 4, [Constant(0.05)] * 4, [Constant(0.05)] * 4)
        with pytest.raises(MeshResolutionError, match="minimum admissible h"):
            build_meridian_mesh(p, 0, 0.5)

    def test_mode_index_recorded(self, quarter_pattern):
        mesh = build_meridian_mesh(quarter_pattern, 2, 0.2)
        assert mesh.mode_index == 2


class TestLimitMesh:
    @pytest.mark.parametrize("lateral,tag", [
        (LateralCondition.DIRICHLET, BoundaryTag.LATERAL_DIRICHLET),
        (LateralCondition.ROBIN, BoundaryTag.LATERAL_ROBIN),
        (LateralCondition.NEUMANN, BoundaryTag.LATERAL_NEUMANN),
    ])
    def test_uniform_lateral_tagging(self, disk_pi, lateral, tag):
        mesh = build_limit_mesh(disk_pi, lateral, 0, 0.2)
        audit(mesh)
        lat = lateral_tags(mesh)
        assert len(lat) > 0 and np.all(lat == tag)


class TestExtrudedMesh:
    def test_strip_area_vs_analytic(self, disk_pi):
        p = build_pattern(disk_pi, 2, [Constant(0.3)] * 2, [Constant(0.3)] * 2)
        mesh = build_extruded_mesh(p, 0.22, layers_per_half_period=4)
        audit(mesh, p)
        area = mesh.boundary_measure(BoundaryTag.LATERAL_DIRICHLET)
        # layers align with strip endpoints, so the only deviation from
        # 2 pi R * sum(eps (a+b)) is the inscribed-polygon perimeter error
        analytic = 2 * math.pi * 1.0 * sum(
            p.eps * (p.lower_profiles[j].value + p.upper_profiles[j].value)
            for j in range(2))
        assert area == pytest.approx(analytic, rel=0.02)
        assert area < analytic  # inscribed polygon is shorter

    def test_oscillation_tag_transitions(self, disk_pi):
        L = disk_pi.boundary_length
        shape = np.array([0.4, 1.0])        # oscillates between 0.4 and 1.0
        profs = [Oscillatory(shape, 0.6, L / 8)]
        p = build_pattern(disk_pi, 1, profs, profs, grid_samples=512)
        mesh = build_extruded_mesh(p, 0.1, layers_per_half_period=8)
        audit(mesh, p)
        # pick the lateral facet band whose centroid height crosses the
        # oscillating strip edge, and count Dirichlet/Neumann transitions in s
        from striplab.mesh import lateral_arclength
        lat = np.isin(mesh.facet_tags, (BoundaryTag.LATERAL_DIRICHLET,
                                        BoundaryTag.LATERAL_NEUMANN))
        cents = mesh.nodes[mesh.boundary_facets[lat]].mean(axis=1)
        tags = mesh.facet_tags[lat]
        z_c = p.eps * math.pi * 0.5 + p.eps * 0.6 * 0.7   # inside the oscillation range
        band = np.abs(cents[:, 2] - z_c) < 1e-9
        # use the band with centroid z nearest to the target
        z_values = np.unique(np.round(cents[:, 2], 12))
        z_band = z_values[np.argmin(np.abs(z_values - z_c))]
        band = np.isclose(cents[:, 2], z_band)
        s = lateral_arclength(disk_pi.cross_section, cents[band][:, :2])
        order = np.argsort(s)
        is_d = (tags[band][order] == BoundaryTag.LATERAL_DIRICHLET)
        transitions = int(np.sum(is_d != np.roll(is_d, 1)))
        assert transitions == 16   # 8 oscillation periods, 2 transitions each

    def test_nesting_preserved_on_shared_mesh(self, disk_pi):
        small = build_pattern(disk_pi, 2, [Constant(0.2)] * 2, [Constant(0.2)] * 2)
        big = build_pattern(disk_pi, 2, [Constant(0.5)] * 2, [Constant(0.5)] * 2)
        assert pattern_subset(small, big)
        mesh = build_extruded_mesh(big, 0.3, layers_per_half_period=4)
        m_small = retag_lateral(mesh, small)
        m_big = retag_lateral(mesh, big)
        d_small = set(map(tuple, m_small.boundary_facets[
            m_small.facet_tags == BoundaryTag.LATERAL_DIRICHLET].tolist()))
        d_big = set(map(tuple, m_big.boundary_facets[
            m_big.facet_tags == BoundaryTag.LATERAL_DIRICHLET].tolist()))
        assert d_small <= d_big

    def test_too_few_layers_refused(self, disk_pi):
        lower = [RandomBounded(0.05, 0.08, seed=1)]
        p = build_pattern(disk_pi, 1, lower, lower)
        with pytest.raises(MeshResolutionError, match="layers"):
            build_extruded_mesh(p, 0.3, layers_per_half_period=2)

    def test_polygon_extrusion(self):
        poly = Polygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
        geo = CylinderGeometry(poly, 1.0)
        p = build_pattern(geo, 1, [Constant(0.5)], [Constant(0.5)])
        mesh = build_extruded_mesh(p, 0.26, layers_per_half_period=3)
        audit(mesh, p)
        vol = mesh.element_measures().sum()
        assert vol == pytest.approx(1.0, rel=1e-10)   # unit square extruded to H=1

    def test_tag_measure_converges(self, disk_pi):
        lower = [RandomBounded(0.3, 0.9, seed=5) for _ in range(2)]
        upper = [RandomBounded(0.3, 0.9, seed=6) for _ in range(2)]
        p = build_pattern(disk_pi, 2, lower, upper)
        errs = []
        for h, lphp in ((0.3, 5), (0.15, 10)):
            mesh = build_extruded_mesh(p, h, layers_per_half_period=lphp)
            area = mesh.boundary_measure(BoundaryTag.LATERAL_DIRICHLET)
            errs.append(abs(area - p.measure()))
        assert errs[1] <= 0.6 * errs[0]


class TestRetag:
    def test_uniform_retag(self, quarter_pattern):
        mesh = build_meridian_mesh(quarter_pattern, 0, 0.2)
        m_d = retag_lateral_uniform(mesh, LateralCondition.DIRICHLET)
        assert np.all(lateral_tags(m_d) == BoundaryTag.LATERAL_DIRICHLET)
        m_r = retag_lateral_uniform(mesh, LateralCondition.ROBIN)
        assert np.all(lateral_tags(m_r) == BoundaryTag.LATERAL_ROBIN)
        # nodes and elements shared
        assert m_d.nodes is mesh.nodes or np.array_equal(m_d.nodes, mesh.nodes)

    def test_meridian_retag_nesting(self, disk_pi):
        small = build_pattern(disk_pi, 2, [Constant(0.2)] * 2, [Constant(0.2)] * 2)
        big = build_pattern(disk_pi, 2, [Constant(0.4)] * 2, [Constant(0.4)] * 2)
        mesh = build_meridian_mesh(big, 0, 0.1)
        m_small = retag_lateral(mesh, small)
        d_small = set(map(tuple, m_small.boundary_facets[
            m_small.facet_tags == BoundaryTag.LATERAL_DIRICHLET].tolist()))
        d_big = set(map(tuple, mesh.boundary_facets[
            mesh.facet_tags == BoundaryTag.LATERAL_DIRICHLET].tolist()))
        assert d_small <= d_big


class TestRefineNested:
    def test_triangle_counts(self, quarter_pattern):
        mesh = build_meridian_mesh(quarter_pattern, 0, 0.3)
        fine = refine_nested(mesh)
        assert len(fine.elements) == 4 * len(mesh.elements)
        assert len(fine.boundary_facets) == 2 * len(mesh.boundary_facets)
        audit(fine)

    def test_area_preserved_exactly(self, quarter_pattern):
        mesh = build_meridian_mesh(quarter_pattern, 0, 0.3)
        fine = refine_nested(mesh)
        assert fine.element_measures().sum() == pytest.approx(
            mesh.element_measures().sum(), abs=1e-14)

    def test_nodes_prefix_and_tags(self, quarter_pattern):
        mesh = build_meridian_mesh(quarter_pattern, 0, 0.3)
        fine = refine_nested(mesh)
        assert np.array_equal(fine.nodes[:mesh.n_nodes], mesh.nodes)
        for tag in BoundaryTag:
            assert fine.boundary_measure(tag) == pytest.approx(
                mesh.boundary_measure(tag), abs=1e-13)

    def test_tet_refinement(self, disk_pi):
        p = build_pattern(disk_pi, 1, [Constant(0.5)], [Constant(0.5)])
        mesh = build_extruded_mesh(p, 0.5, layers_per_half_period=2)
        fine = refine_nested(mesh)
        assert len(fine.elements) == 8 * len(mesh.elements)
        assert len(fine.boundary_facets) == 4 * len(mesh.boundary_facets)
        assert fine.element_measures().sum() == pytest.approx(
            mesh.element_measures().sum(), rel=1e-12)
        audit(fine)


class TestMeshIO:
    def test_roundtrip_exact(self, quarter_pattern, tmp_path):
        mesh = build_meridian_mesh(quarter_pattern, 1, 0.25)
        path = tmp_path / "mesh.txt"
        save_mesh(mesh, path)
        loaded = load_mesh(path)
        assert np.array_equal(loaded.nodes, mesh.nodes)
        assert np.array_equal(loaded.elements, mesh.elements)
        assert np.array_equal(loaded.boundary_facets, mesh.boundary_facets)
        assert np.array_equal(loaded.facet_tags, mesh.facet_tags)
        assert loaded.mode_index == 1
        assert loaded.provenance == mesh.provenance

    def test_malformed_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("not a mesh\n")
        from striplab.errors import MeshFormatError
        with pytest.raises(MeshFormatError):
            load_mesh(path)


class TestGradedTicks:
    def test_endpoint_exact(self):
        t = graded_ticks(1.7, 0.2, Grading(3, 0.5), True, True)
        assert t[0] == 0.0 and t[-1] == 1.7
        assert np.all(np.diff(t) > 0)
        assert np.diff(t)[0] == pytest.approx(0.2 * 0.5**3, rel=1e-12)
        assert np.diff(t)[-1] == pytest.approx(0.2 * 0.5**3, rel=1e-12)

    def test_short_segment(self):
        t = graded_ticks(0.01, 0.2, Grading(4, 0.5), True, True)
        assert t[0] == 0.0 and t[-1] == pytest.approx(0.01)
        assert np.all(np.diff(t) > 0)
