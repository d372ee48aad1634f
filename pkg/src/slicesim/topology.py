"""Static geometry: location grid, base-station layout, coverage, channel gains.

The service area is a rectangular grid of square cells; every cell is one
"location" with uniform propagation conditions. Each location is covered by
exactly one base station (nearest BS, lowest index on ties), and two BSs are
neighbours iff their distance equals the minimum inter-BS distance. Average
channel gains follow a clamped power-law path-loss model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SimConfig


@dataclass(frozen=True)
class Grid:
    """Rectangular grid of square cells; locations are indexed row-major."""

    width_cells: int
    height_cells: int
    cell_m: float

    def __post_init__(self):
        if self.width_cells < 1 or self.height_cells < 1:
            raise ValueError("grid must have at least one cell per axis")
        if self.cell_m <= 0:
            raise ValueError("cell size must be positive")

    @property
    def num_locations(self) -> int:
        return self.width_cells * self.height_cells

    def loc_to_cell(self, loc: int) -> tuple[int, int]:
        """(column, row) of a location index."""
        return loc % self.width_cells, loc // self.width_cells

    def cell_to_loc(self, col: int, row: int) -> int:
        return row * self.width_cells + col

    def cell_center(self, loc: int) -> tuple[float, float]:
        col, row = self.loc_to_cell(loc)
        return (col + 0.5) * self.cell_m, (row + 0.5) * self.cell_m

    def centers(self) -> np.ndarray:
        """(L, 2) array of all cell centers, in metres."""
        cols = np.arange(self.num_locations) % self.width_cells
        rows = np.arange(self.num_locations) // self.width_cells
        return np.stack([(cols + 0.5) * self.cell_m, (rows + 0.5) * self.cell_m], axis=1)

    def neighbors4(self, loc: int) -> list[int]:
        """In-grid 4-neighbourhood of a location."""
        col, row = self.loc_to_cell(loc)
        out = []
        if col > 0:
            out.append(self.cell_to_loc(col - 1, row))
        if col < self.width_cells - 1:
            out.append(self.cell_to_loc(col + 1, row))
        if row > 0:
            out.append(self.cell_to_loc(col, row - 1))
        if row < self.height_cells - 1:
            out.append(self.cell_to_loc(col, row + 1))
        return out


@dataclass(frozen=True)
class GainModel:
    """Average channel gain h0 * (ref/d)^exponent, clamped at the reference distance."""

    h0: float                 # linear power ratio at the reference distance
    ref_dist_m: float
    exponent: float = 4.0

    def __post_init__(self):
        if self.h0 <= 0 or self.ref_dist_m <= 0:
            raise ValueError("h0 and ref_dist_m must be positive")

    @classmethod
    def from_config(cls, config: SimConfig) -> "GainModel":
        return cls(h0=config.h0, ref_dist_m=config.ref_dist_m, exponent=config.pathloss_exp)


class TopologyGraph:
    """BS positions, the coverage partition, and the BS neighbourhood graph."""

    def __init__(self, grid: Grid, bs_xy: np.ndarray, coverage: np.ndarray,
                 adjacency: np.ndarray):
        self.grid = grid
        self.bs_xy = bs_xy
        self.coverage = coverage          # location -> BS index
        self.adjacency = adjacency        # symmetric bool matrix, false diagonal
        self._validate()

    def _validate(self) -> None:
        B = len(self.bs_xy)
        if self.coverage.shape != (self.grid.num_locations,):
            raise ValueError("coverage must map every location")
        if self.coverage.min() < 0 or self.coverage.max() >= B:
            raise ValueError("coverage refers to an unknown BS")
        if self.adjacency.shape != (B, B):
            raise ValueError("adjacency must be BxB")
        if self.adjacency.diagonal().any() or not np.array_equal(self.adjacency, self.adjacency.T):
            raise ValueError("adjacency must be symmetric with a false diagonal")

    @property
    def num_bs(self) -> int:
        return len(self.bs_xy)

    def serving_bs(self, loc: int) -> int:
        return int(self.coverage[loc])

    def area_locations(self, bs: int) -> np.ndarray:
        return np.flatnonzero(self.coverage == bs)

    def edges(self) -> list[tuple[int, int]]:
        return [(b, b2) for b in range(self.num_bs) for b2 in range(b + 1, self.num_bs)
                if self.adjacency[b, b2]]

    def to_text(self, model: GainModel | None = None) -> str:
        """Human-readable key-value dump of the static geometry."""
        g = self.grid
        lines = [
            f"grid_width = {g.width_cells}",
            f"grid_height = {g.height_cells}",
            f"cell_m = {g.cell_m!r}",
        ]
        if model is not None:
            lines.append(f"h0_db = {10.0 * math.log10(model.h0)!r}")
            lines.append(f"ref_dist_m = {model.ref_dist_m!r}")
            lines.append(f"pathloss_exp = {model.exponent!r}")
        for b, (x, y) in enumerate(self.bs_xy):
            lines.append(f"bs_{b} = {float(x)!r},{float(y)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> tuple["TopologyGraph", GainModel | None]:
        kv: dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
        grid = Grid(int(kv["grid_width"]), int(kv["grid_height"]), float(kv["cell_m"]))
        bs = []
        while f"bs_{len(bs)}" in kv:
            x, y = kv[f"bs_{len(bs)}"].split(",")
            bs.append((float(x), float(y)))
        model = None
        if "h0_db" in kv:
            model = GainModel(10.0 ** (float(kv["h0_db"]) / 10.0),
                              float(kv["ref_dist_m"]),
                              float(kv.get("pathloss_exp", 4.0)))
        return build_topology(grid, np.asarray(bs, dtype=float)), model


def build_topology(grid: Grid, bs_xy: np.ndarray) -> TopologyGraph:
    """Nearest-BS coverage plus the minimum-distance neighbourhood graph."""
    bs_xy = np.atleast_2d(np.asarray(bs_xy, dtype=float))
    B = len(bs_xy)
    if B == 0:
        raise ValueError("need at least one BS")
    if B > grid.num_locations:
        raise ValueError("more BSs than locations")
    centers = grid.centers()
    d2 = ((centers[:, None, :] - bs_xy[None, :, :]) ** 2).sum(axis=2)
    coverage = np.argmin(d2, axis=1).astype(np.int64)   # lowest index wins ties

    adjacency = np.zeros((B, B), dtype=bool)
    if B > 1:
        bs_d = np.sqrt(((bs_xy[:, None, :] - bs_xy[None, :, :]) ** 2).sum(axis=2))
        off = bs_d[~np.eye(B, dtype=bool)]
        dmin = off.min()
        adjacency = np.isclose(bs_d, dmin, rtol=1e-9, atol=0.0)
        np.fill_diagonal(adjacency, False)
    return TopologyGraph(grid, bs_xy, coverage, adjacency)


def build_default_topology(config: SimConfig) -> TopologyGraph:
    """Standard layout: BSs at quadrant centres (4 BSs) or the area centre (1 BS)."""
    grid = Grid(config.grid_width, config.grid_height, config.cell_m)
    w_m = grid.width_cells * grid.cell_m
    h_m = grid.height_cells * grid.cell_m
    if config.num_bs == 4:
        bs = [(0.25 * w_m, 0.25 * h_m), (0.25 * w_m, 0.75 * h_m),
              (0.75 * w_m, 0.25 * h_m), (0.75 * w_m, 0.75 * h_m)]
    elif config.num_bs == 1:
        bs = [(0.5 * w_m, 0.5 * h_m)]
    else:
        raise ValueError("default layout supports 1 or 4 BSs; use build_topology")
    if config.num_bs > grid.num_locations:
        raise ValueError("more BSs than locations")
    return build_topology(grid, np.asarray(bs))


def channel_gain(loc: int, point: tuple[float, float], grid: Grid, model: GainModel) -> float:
    """Average gain between a location's cell centre and an arbitrary point.

    The distance is clamped below at the reference distance, which removes the
    singularity when transmitter and receiver share a cell.
    """
    cx, cy = grid.cell_center(loc)
    d = math.hypot(cx - point[0], cy - point[1])
    d = max(d, model.ref_dist_m)
    return model.h0 * (model.ref_dist_m / d) ** model.exponent


class GainTables:
    """Precomputed gain lookups: location -> serving BS, and location pair -> gain."""

    def __init__(self, topology: TopologyGraph, model: GainModel):
        grid = topology.grid
        centers = grid.centers()
        bs_of = topology.coverage
        d_bs = np.sqrt(((centers - topology.bs_xy[bs_of]) ** 2).sum(axis=1))
        d_bs = np.maximum(d_bs, model.ref_dist_m)
        self.to_bs = model.h0 * (model.ref_dist_m / d_bs) ** model.exponent

        d_pair = np.sqrt(((centers[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2))
        d_pair = np.maximum(d_pair, model.ref_dist_m)
        self.between = model.h0 * (model.ref_dist_m / d_pair) ** model.exponent

    def uplink(self, loc: int) -> float:
        """Gain from a user at loc to its serving BS."""
        return float(self.to_bs[loc])

    def eavesdrop(self, loc: int, eve_loc: int) -> float:
        """Gain from a user at loc to an eavesdropper at eve_loc."""
        return float(self.between[loc, eve_loc])
