"""Periodic box, minimum-image metric, particle configurations and cell lists."""
import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import CutoffExceeded, StaleCellList


def ball_volume(dim: int, radius: float) -> float:
    """Lebesgue volume of a d-ball (2r in one dimension)."""
    return math.pi ** (dim / 2.0) / float(gamma_fn(dim / 2.0 + 1.0)) * radius ** dim


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^d: 2, 2*pi, 4*pi."""
    return 2.0 * math.pi ** (dim / 2.0) / float(gamma_fn(dim / 2.0))


@dataclass(frozen=True)
class TorusBox:
    """Flat periodic box [0, side)^dim."""
    dim: int
    side: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not self.side > 0:
            raise ValueError(f"side must be positive, got {self.side}")

    @property
    def volume(self) -> float:
        return float(self.side) ** self.dim

    def wrap(self, p) -> np.ndarray:
        """Map a point (or an array of points) into [0, side)^dim."""
        w = np.mod(np.asarray(p, dtype=float), self.side)
        # np.mod returns `side` for tiny negative inputs
        return np.where(w >= self.side, 0.0, w)

    def minimum_image(self, delta) -> np.ndarray:
        """Shortest periodic representative of a displacement vector."""
        delta = np.asarray(delta, dtype=float)
        return delta - self.side * np.round(delta / self.side)

    def displacement(self, x, y) -> np.ndarray:
        """Minimum-image vector x - y."""
        return self.minimum_image(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))

    def dist(self, x, y):
        """Minimum-image distance; broadcasts over leading axes."""
        d = self.displacement(x, y)
        out = np.sqrt(np.sum(d * d, axis=-1))
        if np.ndim(out) == 0:
            return float(out)
        return out

    def uniform(self, rng: np.random.Generator, n: Optional[int] = None) -> np.ndarray:
        """Uniform point(s) in the box."""
        if n is None:
            return rng.random(self.dim) * self.side
        return rng.random((n, self.dim)) * self.side


class Configuration:
    """A finite point set in a TorusBox.

    Points live in a preallocated array; removal swaps the last point into the
    freed slot, so indices are stable only between mutations. Every mutation
    bumps `generation`; an attached CellList follows each mutation
    incrementally.
    """

    def __init__(self, box: TorusBox, points=None):
        self.box = box
        if points is None:
            pts = np.zeros((0, box.dim))
        else:
            pts = np.asarray(points, dtype=float).reshape(-1, box.dim)
        self._n = len(pts)
        self._data = np.zeros((max(16, 2 * self._n), box.dim))
        self._data[:self._n] = box.wrap(pts)
        self.generation = 0
        self._cells: Optional["CellList"] = None

    def __len__(self) -> int:
        return self._n

    def __repr__(self) -> str:
        return f"Configuration(dim={self.box.dim}, side={self.box.side}, n={self._n})"

    @property
    def points(self) -> np.ndarray:
        """Read-only view of the current points, shape (N, dim)."""
        view = self._data[:self._n]
        view.flags.writeable = False
        return view

    @property
    def cells(self) -> Optional["CellList"]:
        return self._cells

    def point(self, index: int) -> np.ndarray:
        if not 0 <= index < self._n:
            raise IndexError(f"point index {index} out of range for {self._n} points")
        return self._data[index].copy()

    def copy(self) -> "Configuration":
        """Copy of the points; cell lists are not carried over."""
        return Configuration(self.box, self._data[:self._n].copy())

    def attach(self, cutoff: float) -> "CellList":
        """Build a cell list with the given cutoff and keep it in sync."""
        self._cells = CellList(self.box, cutoff)
        self._cells.build(self)
        return self._cells

    def detach(self):
        self._cells = None

    def add(self, p) -> int:
        """Append a point; returns its index."""
        if self._n == len(self._data):
            grown = np.zeros((2 * len(self._data), self.box.dim))
            grown[:self._n] = self._data[:self._n]
            self._data = grown
        index = self._n
        self._data[index] = self.box.wrap(p)
        self._n += 1
        self.generation += 1
        if self._cells is not None:
            self._cells._insert(index, self._data[index])
            self._cells.generation = self.generation
        return index

    def remove(self, index: int) -> np.ndarray:
        """Remove a point; the last point takes over its index."""
        removed = self.point(index)
        last = self._n - 1
        if self._cells is not None:
            self._cells._discard(index)
            if index != last:
                self._cells._discard(last)
                self._cells._insert(index, self._data[last])
        if index != last:
            self._data[index] = self._data[last]
        self._n -= 1
        self.generation += 1
        if self._cells is not None:
            self._cells.generation = self.generation
        return removed

    def move(self, index: int, p):
        if not 0 <= index < self._n:
            raise IndexError(f"point index {index} out of range for {self._n} points")
        if self._cells is not None:
            self._cells._discard(index)
        self._data[index] = self.box.wrap(p)
        self.generation += 1
        if self._cells is not None:
            self._cells._insert(index, self._data[index])
            self._cells.generation = self.generation

    def set_points(self, points):
        """Replace all positions at once (same N), rebuilding attached cells."""
        pts = self.box.wrap(np.asarray(points, dtype=float).reshape(-1, self.box.dim))
        if len(pts) > len(self._data):
            self._data = np.zeros((2 * len(pts), self.box.dim))
        self._data[:len(pts)] = pts
        self._n = len(pts)
        self.generation += 1
        if self._cells is not None:
            self._cells.build(self)


class CellList:
    """Bucket grid of point indices for finite-range neighbor queries.

    Cells have side >= cutoff, so a query of radius r <= cutoff only needs the
    3^d cells around the query point.
    """

    def __init__(self, box: TorusBox, cutoff: float):
        if not cutoff > 0:
            raise ValueError(f"cutoff must be positive, got {cutoff}")
        self.box = box
        self.cutoff = float(cutoff)
        self.ncell = max(1, int(math.floor(box.side / cutoff)))
        self.cell_size = box.side / self.ncell
        self.generation = -1
        self._buckets: Dict[Tuple[int, ...], Set[int]] = {}
        self._cell_of: Dict[int, Tuple[int, ...]] = {}
        self._offsets = list(itertools.product((-1, 0, 1), repeat=box.dim))

    def cell_index(self, p) -> Tuple[int, ...]:
        idx = np.floor(np.asarray(p, dtype=float) / self.cell_size).astype(int)
        return tuple(int(i) % self.ncell for i in idx)

    def build(self, config: Configuration):
        self._buckets = {}
        self._cell_of = {}
        for i, p in enumerate(config.points):
            self._insert(i, p)
        self.generation = config.generation

    def _insert(self, index: int, p):
        key = self.cell_index(p)
        self._buckets.setdefault(key, set()).add(index)
        self._cell_of[index] = key

    def _discard(self, index: int):
        key = self._cell_of.pop(index)
        bucket = self._buckets[key]
        bucket.discard(index)
        if not bucket:
            del self._buckets[key]

    def _adjacent(self, key: Tuple[int, ...]) -> Set[Tuple[int, ...]]:
        # with fewer than 3 cells per axis the 3^d stencil wraps onto itself
        return {
            tuple((k + o) % self.ncell for k, o in zip(key, off))
            for off in self._offsets
        }

    def candidates(self, x) -> List[int]:
        """Indices of all points in the cells adjacent to x."""
        out: List[int] = []
        for key in self._adjacent(self.cell_index(self.box.wrap(x))):
            out.extend(self._buckets.get(key, ()))
        return out

    def neighbors(self, x, r: float, config: Configuration) -> List[Tuple[int, np.ndarray, float]]:
        """Points of `config` strictly within distance r of x.

        Raises:
            StaleCellList: config changed since the last build or update
            CutoffExceeded: r > cutoff
        """
        if self.generation != config.generation:
            raise StaleCellList(
                f"cell list generation {self.generation} != configuration generation {config.generation}"
            )
        if r > self.cutoff:
            raise CutoffExceeded(f"radius {r} exceeds cell-list cutoff {self.cutoff}")
        idx = np.array(sorted(self.candidates(x)), dtype=int)
        if len(idx) == 0:
            return []
        pts = config.points[idx]
        d = self.box.dist(x, pts)
        d = np.atleast_1d(d)
        keep = d < r
        return [(int(i), pts[k].copy(), float(d[k])) for k, i in enumerate(idx) if keep[k]]


def uniform_in_ball(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    """Uniform point of the centered ball of the given radius."""
    while True:
        direction = rng.standard_normal(dim)
        norm = float(np.sqrt(direction @ direction))
        if norm > 0:
            return direction / norm * (radius * rng.random() ** (1.0 / dim))


def neighbors(x, r: float, config: Configuration, cells: CellList) -> List[Tuple[int, np.ndarray, float]]:
    return cells.neighbors(x, r, config)


def brute_force_neighbors(x, r: float, config: Configuration) -> List[Tuple[int, np.ndarray, float]]:
    """O(N) scan used as the reference for cell-list queries."""
    if len(config) == 0:
        return []
    d = np.atleast_1d(config.box.dist(x, config.points))
    return [(int(i), config.points[i].copy(), float(d[i])) for i in np.flatnonzero(d < r)]


def random_configuration(box: TorusBox, n: int, rng: np.random.Generator,
                         hard_core: float = 0.0, max_tries: int = 10000) -> Configuration:
    """Random sequential placement of n points keeping pair distances >= hard_core."""
    config = Configuration(box)
    tries = 0
    while len(config) < n:
        tries += 1
        if tries > max_tries:
            raise ValueError(f"could not place {n} points with hard core {hard_core} in {box}")
        p = box.uniform(rng)
        if hard_core > 0 and len(config) and np.min(box.dist(p, config.points)) < hard_core:
            continue
        config.add(p)
    return config
