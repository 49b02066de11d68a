"""Tests for spherical codes, facets, normals and the hyperplane rotation."""

import math

import numpy as np
import pytest

from irl_core.exceptions import DegenerateFacet, UnsupportedCode
from irl_core.geometry import (
    Facet,
    SphericalCode,
    centroid_dot,
    code_to_json,
    cones_containing,
    facet_centroid,
    facet_normals,
    facets_of_code,
    icosahedron_code,
    make_code,
    min_angle,
    rotation_to_hyperplane,
    simplex_code,
    with_normals,
)

TOL = 1e-10


class TestRotation:

    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_orthogonal_with_unit_determinant(self, n):
        Pi = rotation_to_hyperplane(n).matrix
        assert np.allclose(Pi @ Pi.T, np.eye(n), atol=TOL)
        assert np.linalg.det(Pi) == pytest.approx(1.0, abs=TOL)

    @pytest.mark.parametrize("n", [3, 6])
    def test_sends_ones_direction_to_last_axis(self, n):
        rotation = rotation_to_hyperplane(n)
        e_n = np.zeros(n)
        e_n[-1] = 1.0
        assert np.allclose(rotation.apply(np.full(n, 1 / math.sqrt(n))), e_n, atol=TOL)

    def test_plane_round_trip_is_zero_sum(self, rng):
        rotation = rotation_to_hyperplane(5)
        y = rng.normal(size=4)
        x = rotation.from_plane(y)
        assert abs(x.sum()) < TOL
        assert np.allclose(rotation.to_plane(x), y, atol=TOL)

    def test_needs_two_dimensions(self):
        with pytest.raises(ValueError):
            rotation_to_hyperplane(1)


class TestCodes:

    @pytest.mark.parametrize("d", [2, 3, 6])
    def test_simplex_gram(self, d):
        code = simplex_code(d)
        gram = code.gram()
        off = gram[~np.eye(d + 1, dtype=bool)]
        assert code.size == d + 1
        assert np.allclose(np.diag(gram), 1.0, atol=TOL)
        assert np.allclose(off, -1.0 / d, atol=TOL)
        assert min_angle(code) == pytest.approx(math.acos(-1.0 / d), abs=1e-9)

    def test_icosahedron(self):
        code = icosahedron_code()
        assert code.size == 12
        assert min_angle(code) == pytest.approx(math.acos(1 / math.sqrt(5)), abs=1e-9)
        assert len(facets_of_code(code)) == 20

    def test_points_must_be_unit(self):
        with pytest.raises(ValueError):
            SphericalCode(dim=2, points=[[1.0, 1.0]], cos_theta=0.0)

    def test_points_read_only(self):
        code = simplex_code(3)
        with pytest.raises(ValueError):
            code.points[0, 0] = 0.0

    def test_make_code(self):
        assert make_code("simplex", 5).dim == 4
        assert make_code("icosahedron", 4).kind == "icosahedron"
        with pytest.raises(UnsupportedCode):
            make_code("icosahedron", 5)
        with pytest.raises(UnsupportedCode):
            make_code("e8", 9)

    def test_code_to_json(self):
        record = code_to_json(simplex_code(2))
        assert record["kind"] == "simplex"
        assert record["dim"] == 2
        assert len(record["points"]) == 3


class TestFacets:

    def test_simplex_leave_one_out(self):
        code = simplex_code(4)
        facets = facets_of_code(code)
        assert [f.vertex_indices for f in facets] == [
            tuple(k for k in range(5) if k != i) for i in range(5)
        ]

    def test_simplex_unit_centroid_is_opposite_vertex(self):
        code = simplex_code(4)
        for i, facet in enumerate(facets_of_code(code)):
            assert np.allclose(facet.unit_centroid, -code.points[i], atol=TOL)

    def test_icosahedron_facets_are_triangles_of_nearest_neighbours(self):
        code = icosahedron_code()
        cos_theta = 1 / math.sqrt(5)
        for facet in facets_of_code(code):
            assert len(facet.vertex_indices) == 3
            vertices = code.points[list(facet.vertex_indices)]
            gram = vertices @ vertices.T
            assert np.allclose(gram[~np.eye(3, dtype=bool)], cos_theta, atol=1e-9)

    def test_facet_centroid_needs_dim_vertices(self):
        code = simplex_code(3)
        with pytest.raises(ValueError):
            facet_centroid(code, (0, 1))

    def test_unsupported_kind(self):
        code = SphericalCode(dim=2, points=[[1.0, 0.0], [0.0, 1.0]], cos_theta=0.0)
        with pytest.raises(UnsupportedCode):
            facets_of_code(code)


class TestNormals:

    @pytest.mark.parametrize("code", [simplex_code(3), simplex_code(5), icosahedron_code()],
                             ids=["simplex3", "simplex5", "icosahedron"])
    def test_leave_one_out_structure(self, code):
        eps = 0.05
        for facet in facets_of_code(code):
            normals = facet_normals(code, facet, eps)
            vertices = code.points[list(facet.vertex_indices)]
            dots = normals @ vertices.T
            d = code.dim
            for j in range(d):
                others = [l for l in range(d) if l != j]
                assert np.allclose(dots[j, others], 0.0, atol=TOL)
                assert dots[j, j] != pytest.approx(0.0, abs=1e-6)
            assert np.allclose(np.linalg.norm(normals, axis=1), eps, atol=TOL)
            assert np.all(normals @ facet.centroid > 0)

    def test_simplex_centroid_dot(self):
        n = 6
        code = simplex_code(n - 1)
        expected = math.sqrt(n / (2 * (n - 1)))
        for facet in facets_of_code(code):
            assert centroid_dot(code, facet) == pytest.approx(expected, abs=1e-9)

    def test_icosahedron_centroid_dot(self):
        g = 1 / math.sqrt(5)
        expected = math.sqrt(1 - 3 * g ** 2 + 2 * g ** 3) / (math.sqrt(1 - g ** 2) * math.sqrt(3 + 6 * g))
        code = icosahedron_code()
        values = [centroid_dot(code, facet) for facet in facets_of_code(code)]
        assert min(values) == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(0.35683, abs=1e-4)

    def test_degenerate_facet(self):
        code = SphericalCode(dim=3, points=[[1, 0, 0], [1, 0, 0], [0, 1, 0]], cos_theta=1.0)
        centroid = code.points.mean(axis=0)
        facet = Facet(vertex_indices=(0, 1, 2), centroid=centroid,
                      unit_centroid=centroid / np.linalg.norm(centroid))
        with pytest.raises(DegenerateFacet) as info:
            facet_normals(code, facet, 0.1)
        assert info.value.vertex == 2

    def test_eps_must_be_positive(self):
        code = simplex_code(3)
        with pytest.raises(ValueError):
            facet_normals(code, facets_of_code(code)[0], 0.0)

    def test_with_normals_caches(self):
        code = simplex_code(3)
        facet = with_normals(code, facets_of_code(code)[0], 0.2)
        assert facet.eps == 0.2
        assert np.allclose(np.linalg.norm(facet.normals, axis=1), 0.2)


class TestCones:

    @pytest.mark.parametrize("code", [simplex_code(4), icosahedron_code()],
                             ids=["simplex", "icosahedron"])
    def test_centroid_lies_in_own_cone(self, code):
        facets = facets_of_code(code)
        for i, facet in enumerate(facets):
            assert i in cones_containing(code, facets, facet.unit_centroid)

    def test_simplex_cones_are_disjoint_at_centroids(self):
        code = simplex_code(4)
        facets = facets_of_code(code)
        for i, facet in enumerate(facets):
            assert cones_containing(code, facets, facet.unit_centroid) == [i]
