import numpy as np
import pytest

from agnav.errors import InvalidInputError, SchemaError
from agnav.grid import (
    DANGEROUS,
    FREE,
    OCCUPIED,
    OccupancyGrid,
    Workspace,
    empty_grid,
    layer_of,
    rasterize,
)
from agnav.mapping import FRAME_ROBOT_LOCAL, SemanticMap, SemanticObject

from oracles import brute_force_rasterize


def map_with(objects):
    m = SemanticMap()
    for label, position, dims in objects:
        m.merge_observation(
            SemanticObject(label=label, position=position, dimensions=dims), merge_radius=0.0
        )
    return m


WS = Workspace((0.0, 0.0, 0.0), (2.5, 2.5, 1.5))  # 5 x 5 x 3 cells at 0.5 m


class TestRasterize:
    def test_empty_map_all_free(self):
        grid = rasterize(SemanticMap(), WS, 0.5)
        assert grid.dims == (5, 5, 3)
        assert np.all(grid.states == FREE)

    def test_single_interior_object(self):
        # sits strictly inside cell (2, 2, 0): 1 occupied, 26 dangerous
        m = map_with([("box", (1.25, 1.25, 0.15), (0.3, 0.3, 0.3))])
        grid = rasterize(m, WS, 0.5)
        assert grid.state((2, 2, 0)) == OCCUPIED
        assert int(np.sum(grid.states == OCCUPIED)) == 1
        # grounded objects sit in the z=0 layer, so only 17 of the
        # 26 neighbors exist inside the grid
        neighbor_count = int(np.sum(grid.states == DANGEROUS))
        assert neighbor_count == 17

    def test_interior_object_with_26_neighbors(self):
        ws = Workspace((0.0, 0.0, 0.0), (2.5, 2.5, 2.5))
        m = map_with([("drone", (1.25, 1.25, 1.25), (0.3, 0.3, 0.3))])
        grid = rasterize(m, ws, 0.5)
        assert grid.state((2, 2, 2)) == OCCUPIED
        assert int(np.sum(grid.states == OCCUPIED)) == 1
        assert int(np.sum(grid.states == DANGEROUS)) == 26

    def test_object_straddling_two_cells(self):
        m = map_with([("box", (1.0, 1.25, 0.15), (0.3, 0.4, 0.3))])
        grid = rasterize(m, WS, 0.5)
        occupied = np.argwhere(grid.states == OCCUPIED)
        assert {tuple(c) for c in occupied} == {(1, 2, 0), (2, 2, 0)}
        states, _ = brute_force_rasterize(
            [((1.0, 1.25, 0.15), (0.3, 0.4, 0.3))], WS.origin, WS.size, 0.5
        )
        expected_danger = {c for c, s in states.items() if s == 1}
        got_danger = {tuple(c) for c in np.argwhere(grid.states == DANGEROUS)}
        assert got_danger == expected_danger

    def test_matches_brute_force_on_random_scenes(self):
        rng = np.random.default_rng(14)
        for _ in range(40):
            objects = []
            for i in range(rng.integers(1, 5)):
                position = (rng.uniform(0, 2.5), rng.uniform(0, 2.5), rng.uniform(0, 1.0))
                dims = tuple(rng.uniform(0.1, 0.9, 3))
                objects.append((f"o{i}", position, dims))
            grid = rasterize(map_with(objects), WS, 0.5)
            oracle, dims = brute_force_rasterize(
                [(pos, d) for _, pos, d in objects], WS.origin, WS.size, 0.5
            )
            assert grid.dims == dims
            for cell, state in oracle.items():
                assert grid.state(cell) == state, f"cell {cell}"

    def test_grounding_clamps_to_floor(self):
        # center below h/2: box clamps to the floor instead of poking underground
        m = map_with([("box", (1.25, 1.25, 0.1), (0.6, 0.3, 0.3))])
        grid = rasterize(m, WS, 0.5)
        assert grid.state((2, 2, 0)) == OCCUPIED
        assert grid.state((2, 2, 1)) == OCCUPIED  # z spans [0, 0.6]

    def test_robot_local_map_rejected(self):
        with pytest.raises(InvalidInputError):
            rasterize(SemanticMap(FRAME_ROBOT_LOCAL), WS, 0.5)

    def test_bad_workspace_rejected(self):
        with pytest.raises(InvalidInputError):
            Workspace((0.0, 0.0, 0.0), (0.0, 1.0, 1.0))
        with pytest.raises(InvalidInputError):
            rasterize(SemanticMap(), Workspace((0, 0, 0), (1.0, 1.0, 0.5)), 0.5)


class TestGridBasics:
    def test_layer_classes(self):
        assert layer_of(0) == "ground"
        assert layer_of(1) == "transition"
        assert layer_of(2) == "cruise"
        assert layer_of(5) == "cruise"

    def test_cell_center_and_cell_of_invert(self):
        grid = empty_grid(Workspace((1.0, -2.0, 0.0), (5.0, 8.0, 3.0)), 0.5)
        for cell in [(0, 0, 0), (3, 7, 2), (9, 15, 5)]:
            assert grid.cell_of(grid.cell_center(cell)) == cell

    def test_requires_two_layers(self):
        with pytest.raises(InvalidInputError):
            OccupancyGrid((0, 0, 0), 0.5, np.zeros((2, 2, 1), dtype=np.uint8))

    def test_states_read_only(self):
        grid = empty_grid(WS, 0.5)
        with pytest.raises(ValueError):
            grid.states[0, 0, 0] = OCCUPIED

    def test_rle_document_round_trip(self):
        m = map_with([("box", (1.0, 1.25, 0.15), (0.3, 0.4, 0.3))])
        grid = rasterize(m, WS, 0.5)
        doc = grid.to_document()
        assert doc["dims"] == [5, 5, 3]
        assert doc["layers"] == ["ground", "transition", "cruise"]
        restored = OccupancyGrid.from_document(doc)
        assert np.array_equal(restored.states, grid.states)
        assert restored.origin == grid.origin
        assert restored.cell_size == grid.cell_size

    def test_rle_is_compact_for_empty_grid(self):
        doc = empty_grid(WS, 0.5).to_document()
        assert doc["cells_rle"] == [[75, 0]]

    def test_bad_rle_document(self):
        doc = empty_grid(WS, 0.5).to_document()
        doc["cells_rle"] = [[10, 0]]
        with pytest.raises(SchemaError):
            OccupancyGrid.from_document(doc)
