"""Scenario builders and the scenario file format."""

import numpy as np
import pytest

from cmmsim.roadmap import cross_road
from cmmsim.scenario import (
    FOUR_VEHICLE_CONNECTION,
    Scenario,
    four_vehicle,
    grid_city,
    load_scenario,
    single_vehicle,
)


class TestFourVehicle:
    def test_geometry(self):
        scn = four_vehicle()
        assert scn.n == 4
        np.testing.assert_array_equal(
            scn.positions, [[30.0, 0.0], [0.0, 30.0], [-30.0, 0.0], [0.0, -30.0]]
        )
        np.testing.assert_allclose(scn.angles, [0.0, np.pi / 2, 0.0, np.pi / 2])

    def test_everyone_on_road(self):
        scn = four_vehicle()
        assert scn.roadmap.points_on_road(scn.positions).all()

    def test_listen_ring(self):
        scn = four_vehicle()
        np.testing.assert_array_equal(scn.connection, FOUR_VEHICLE_CONNECTION)
        for i in range(4):
            sources = np.nonzero(scn.connection[i])[0]
            np.testing.assert_array_equal(sorted(sources), sorted([i, (i + 1) % 4]))

    def test_undirected_view_is_full_ring(self):
        net = four_vehicle().net
        np.testing.assert_array_equal(net.degrees(), [2, 2, 2, 2])
        assert net.is_connected()
        assert net.diameter() == 2


class TestSingleVehicle:
    def test_lone_node(self):
        scn = single_vehicle()
        assert scn.n == 1
        np.testing.assert_array_equal(scn.connection, [[True]])
        assert scn.roadmap.points_on_road(scn.positions).all()


class TestGridCity:
    def test_full_network(self):
        scn = grid_city()
        assert scn.name == "grid_city"
        assert scn.n == 50
        assert scn.net.is_connected()
        assert scn.roadmap.points_on_road(scn.positions).all()

    def test_frozen_trim_sizes(self):
        # The sampling seed is frozen so the two trims land exactly on
        # these operating points with every network still connected.
        mid = grid_city(20)
        sparse = grid_city(14)
        assert mid.name == "grid_city_trim20"
        assert (mid.n, sparse.n) == (38, 24)
        assert mid.net.is_connected() and sparse.net.is_connected()

    def test_trims_thin_the_graph(self):
        full = grid_city()
        sparse = grid_city(14)
        assert sparse.net.degrees().mean() < full.net.degrees().mean()

    def test_reproducible(self):
        np.testing.assert_array_equal(grid_city().positions, grid_city().positions)


class TestScenarioValidation:
    def test_connection_shape_checked(self):
        rm = cross_road()
        with pytest.raises(ValueError):
            Scenario("bad", rm, np.zeros((2, 2)), np.zeros(2), np.ones((3, 3), dtype=bool))

    def test_self_loop_required(self):
        rm = cross_road()
        conn = np.array([[True, True], [True, False]])
        with pytest.raises(ValueError):
            Scenario("bad", rm, np.zeros((2, 2)), np.zeros(2), conn)


class TestScenarioFiles:
    def write(self, tmp_path, text):
        path = tmp_path / "case.scn"
        path.write_text(text)
        return str(path)

    def test_builtin_names_resolve_without_map(self):
        assert load_scenario("four_vehicle").n == 4
        assert load_scenario("single_vehicle").n == 1

    def test_poses_with_connection_matrix(self, tmp_path):
        path = self.write(
            tmp_path,
            "# comment line\n"
            "poses:\n30 0 0\n0 30 1.5707963267948966\n"
            "connection_matrix:\n1 1\n1 1\n",
        )
        scn = load_scenario(path, cross_road())
        assert scn.n == 2
        assert scn.name == "case"
        assert scn.connection.all()

    def test_diagonal_implied(self, tmp_path):
        path = self.write(
            tmp_path, "poses:\n30 0 0\n0 30 1.5707963267948966\nconnection_matrix:\n0 1\n1 0\n"
        )
        scn = load_scenario(path, cross_road())
        assert scn.connection.diagonal().all()

    def test_sample_with_radius(self, tmp_path):
        path = self.write(tmp_path, "sample: 6 3 1.0\nradius: 500\n")
        scn = load_scenario(path, cross_road())
        assert scn.n == 6
        assert scn.roadmap.points_on_road(scn.positions).all()

    def test_trim_degree_with_radius(self, tmp_path):
        base = load_scenario(self.write(tmp_path, "sample: 8 3 1.0\nradius: 500\n"), cross_road())
        bound = int(base.net.degrees().max()) - 1
        trimmed = load_scenario(
            self.write(tmp_path, f"sample: 8 3 1.0\nradius: 500\ntrim_degree: {bound}\n"),
            cross_road(),
        )
        assert trimmed.n < base.n

    def test_file_requires_map(self, tmp_path):
        path = self.write(tmp_path, "poses:\n30 0 0\nconnection_matrix:\n1\n")
        with pytest.raises(ValueError, match="road map"):
            load_scenario(path, None)

    def test_rejects_missing_poses(self, tmp_path):
        path = self.write(tmp_path, "radius: 500\n")
        with pytest.raises(ValueError, match="poses"):
            load_scenario(path, cross_road())

    def test_rejects_missing_structure(self, tmp_path):
        path = self.write(tmp_path, "poses:\n30 0 0\n")
        with pytest.raises(ValueError, match="connection_matrix|radius"):
            load_scenario(path, cross_road())

    def test_rejects_bad_pose_width(self, tmp_path):
        path = self.write(tmp_path, "poses:\n30 0\nconnection_matrix:\n1\n")
        with pytest.raises(ValueError, match="x y angle"):
            load_scenario(path, cross_road())

    def test_rejects_connection_size_mismatch(self, tmp_path):
        path = self.write(tmp_path, "poses:\n30 0 0\nconnection_matrix:\n1 1\n1 1\n")
        with pytest.raises(ValueError, match="match"):
            load_scenario(path, cross_road())

    def test_rejects_trim_with_explicit_matrix(self, tmp_path):
        path = self.write(
            tmp_path, "trim_degree: 3\nposes:\n30 0 0\nconnection_matrix:\n1\n"
        )
        with pytest.raises(ValueError, match="trim_degree"):
            load_scenario(path, cross_road())

    def test_rejects_section_header_with_value(self, tmp_path):
        path = self.write(tmp_path, "poses: 30 0 0\nconnection_matrix:\n1\n")
        with pytest.raises(ValueError, match="section header"):
            load_scenario(path, cross_road())

    def test_rejects_stray_data_row(self, tmp_path):
        path = self.write(tmp_path, "30 0 0\n")
        with pytest.raises(ValueError, match="outside a section"):
            load_scenario(path, cross_road())
