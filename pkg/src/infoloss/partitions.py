"""Finite partitions of the observation space and their quantizers.

Every partition maps a batch of points ``(n, d)`` to integer cell ids via
``quantize``. Cells can be listed with their geometry (boxes or slabs) for
audits, diameters and JSON provenance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .finite_info import DomainError, ValidationError

INF = math.inf


# ---------------------------------------------------------------- geometry

def _interval_mask(t, lo, hi, lo_closed, hi_closed):
    left = (t >= lo) if lo_closed else (t > lo)
    right = (t <= hi) if hi_closed else (t < hi)
    return left & right


def _num(v: float):
    # JSON has no infinities; keep them readable
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple
    lo_closed: tuple
    hi_closed: tuple

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.lo_closed) == len(self.hi_closed)):
            raise ValidationError("box bounds must have equal lengths")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValidationError(f"empty box interval: {self.lo} > {self.hi}")

    def contains(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        mask = np.ones(X.shape[0], dtype=bool)
        for a in range(len(self.lo)):
            mask &= _interval_mask(X[:, a], self.lo[a], self.hi[a],
                                   self.lo_closed[a], self.hi_closed[a])
        return mask

    def diameter(self) -> float:
        span = np.subtract(self.hi, self.lo)
        return float(np.sqrt((span ** 2).sum())) if np.all(np.isfinite(span)) else INF

    def to_dict(self):
        return {"type": "box", "lo": [_num(v) for v in self.lo], "hi": [_num(v) for v in self.hi],
                "lo_closed": [bool(v) for v in self.lo_closed],
                "hi_closed": [bool(v) for v in self.hi_closed]}


@dataclass(frozen=True)
class Slab:
    """Points whose projection (or radius, when ``direction`` is None) lies in an interval."""

    direction: tuple | None
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def __post_init__(self):
        if self.direction is not None and abs(math.hypot(*self.direction) - 1.0) > 1e-12:
            raise ValidationError("slab direction must have unit norm")
        if self.lo > self.hi:
            raise ValidationError("empty slab interval")

    def project(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.direction is None:
            return np.linalg.norm(X, axis=1)
        return X @ np.asarray(self.direction)

    def contains(self, X) -> np.ndarray:
        return _interval_mask(self.project(X), self.lo, self.hi, self.lo_closed, self.hi_closed)

    def diameter(self) -> float:
        if self.direction is None:
            return 2.0 * self.hi if math.isfinite(self.hi) else INF
        if len(self.direction) == 1 and math.isfinite(self.lo) and math.isfinite(self.hi):
            return float(self.hi - self.lo)
        return INF

    def to_dict(self):
        return {"type": "slab", "direction": None if self.direction is None else list(self.direction),
                "lo": _num(self.lo), "hi": _num(self.hi),
                "lo_closed": bool(self.lo_closed), "hi_closed": bool(self.hi_closed)}


@dataclass(frozen=True)
class Outside:
    """Complement of a box."""

    box: Box

    def contains(self, X) -> np.ndarray:
        return ~self.box.contains(X)

    def diameter(self) -> float:
        return INF

    def to_dict(self):
        return {"type": "outside", "box": self.box.to_dict()}


@dataclass(frozen=True)
class Restricted:
    """Part of a parent cell on which a decision rule outputs ``label``."""

    parent: object
    label: int

    def diameter(self) -> float:
        # upper bound; the rule region inside the parent is not tracked
        return self.parent.diameter()

    def to_dict(self):
        return {"type": "restricted", "label": self.label, "parent": self.parent.to_dict()}


@dataclass(frozen=True)
class Cell:
    id: int
    geometry: object

    def diameter(self) -> float:
        return self.geometry.diameter()


# ---------------------------------------------------------------- base class

class Partition:
    kind = "partition"

    def __init__(self, d: int):
        if d < 1:
            raise ValidationError("dimension must be >= 1")
        self.d = int(d)
        self._diam = None

    # subclasses implement _ids on a validated (n, d) float array
    def _ids(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def cells(self) -> list[Cell]:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    @property
    def size(self) -> int:
        return len(self.cells())

    def _as_batch(self, x):
        X = np.asarray(x, dtype=float)
        single = X.ndim == 0 or (X.ndim == 1 and self.d > 1)
        if X.ndim == 0:
            X = X.reshape(1, 1)
        elif X.ndim == 1:
            X = X.reshape(1, -1) if self.d > 1 else X[:, None]
        if X.shape[1] != self.d:
            raise ValidationError(f"points must have dimension {self.d}, got {X.shape[1]}")
        return X, single

    def quantize(self, x):
        X, single = self._as_batch(x)
        ids = np.asarray(self._ids(X), dtype=np.int64)
        return int(ids[0]) if single else ids

    def cell_ids(self) -> np.ndarray:
        return np.array([c.id for c in self.cells()], dtype=np.int64)

    def diameters(self, ids) -> np.ndarray:
        if self._diam is None:
            self._diam = {c.id: c.diameter() for c in self.cells()}
        ids = np.asarray(ids, dtype=np.int64)
        uniq, inv = np.unique(ids, return_inverse=True)
        return np.array([self._diam[int(u)] for u in uniq])[inv]

    def to_dict(self, include_cells: bool = True) -> dict:
        out = {"kind": self.kind, "d": self.d, "size": self.size, "params": self.params()}
        if include_cells:
            out["cells"] = [{"id": c.id, **c.geometry.to_dict()} for c in self.cells()]
        return out


def quantize(p: Partition, x):
    return p.quantize(x)


# ---------------------------------------------------------------- simple partitions

class ConstantPartition(Partition):
    kind = "constant"

    def _ids(self, X):
        return np.zeros(X.shape[0], dtype=np.int64)

    def cells(self):
        return [Cell(0, Box((-INF,) * self.d, (INF,) * self.d, (False,) * self.d, (False,) * self.d))]

    @property
    def size(self):
        return 1


class QuadrantPartition(Partition):
    """Quadrants 1..4 with the half-open boundaries of the MPE-rule cells.

    1: [0,inf) x [0,inf)    2: (-inf,0) x [0,inf)
    3: (-inf,0] x (-inf,0)  4: (0,inf) x (-inf,0)
    """

    kind = "quadrant"
    # per quadrant: (sign of x1, x1 = 0 included, sign of x2, x2 = 0 included)
    AXES = {1: (1, True, 1, True), 2: (-1, False, 1, True),
            3: (-1, True, -1, False), 4: (1, False, -1, False)}

    def __init__(self):
        super().__init__(2)

    @staticmethod
    def label(X) -> np.ndarray:
        x1, x2 = X[:, 0], X[:, 1]
        upper = x2 >= 0
        return np.where(upper, np.where(x1 >= 0, 1, 2), np.where(x1 <= 0, 3, 4)).astype(np.int64)

    def _ids(self, X):
        return self.label(X)

    @property
    def size(self):
        return 4

    def cells(self):
        return [Cell(q, _signed_box(self.AXES[q], ((0.0, INF, True, False),) * 2)) for q in (1, 2, 3, 4)]


def _signed_interval(sign, zero_in, lo, hi, lo_closed, hi_closed):
    """Map an interval of |x| back to x on one side of the axis."""
    if sign > 0:
        a, b, ac, bc = lo, hi, lo_closed, hi_closed
    else:
        a, b, ac, bc = -hi, -lo, hi_closed, lo_closed
    if lo == 0.0 and not zero_in:
        if sign > 0:
            ac = False
        else:
            bc = False
    return a, b, ac, bc


def _signed_box(axes, abs_intervals) -> Box:
    s1, z1, s2, z2 = axes
    i1 = _signed_interval(s1, z1, *abs_intervals[0])
    i2 = _signed_interval(s2, z2, *abs_intervals[1])
    return Box((i1[0], i2[0]), (i1[1], i2[1]), (i1[2], i2[2]), (i1[3], i2[3]))


def single_cell(d: int) -> ConstantPartition:
    return ConstantPartition(d)


# ---------------------------------------------------------------- grids

class GridPartition(Partition):
    """Regular grid of half-open boxes over [lo, lo + counts*width) plus one outer cell.

    The outer cell has id 0; box with per-axis index j gets id 1 + ravel(j).
    """

    kind = "grid"

    def __init__(self, lo, width, counts, kind: str = "grid", params: dict | None = None):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        super().__init__(lo.size)
        self.lo = lo
        self.width = np.broadcast_to(np.asarray(width, dtype=float), lo.shape).copy()
        self.counts = np.broadcast_to(np.asarray(counts, dtype=np.int64), lo.shape).copy()
        if np.any(self.width <= 0) or np.any(self.counts < 1):
            raise ValidationError("grid widths must be > 0 and counts >= 1")
        n_boxes = 1
        for c in self.counts:
            n_boxes *= int(c)
        if n_boxes + 1 > 2 ** 62:
            raise DomainError(f"grid with {n_boxes} boxes overflows the cell index range")
        self.n_boxes = n_boxes
        self.hi = self.lo + self.counts * self.width
        self.kind = kind
        self._params = params or {"lo": lo.tolist(), "width": self.width.tolist(),
                                  "counts": self.counts.tolist()}

    def params(self):
        return dict(self._params)

    @property
    def size(self):
        return self.n_boxes + 1

    def box_index(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis box index and an inside mask."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        j = np.empty(X.shape, dtype=np.int64)
        inside = np.ones(X.shape[0], dtype=bool)
        for a in range(self.d):
            # same edge values as the listed boxes, so lookup and geometry agree exactly
            edges = self._edges(a)
            pos = np.searchsorted(edges, X[:, a], side="right") - 1
            inside &= (pos >= 0) & (pos < self.counts[a])
            j[:, a] = np.clip(pos, 0, self.counts[a] - 1)
        return j, inside

    def _edges(self, a: int) -> np.ndarray:
        return self.lo[a] + np.arange(self.counts[a] + 1) * self.width[a]

    def _ids(self, X):
        j, inside = self.box_index(X)
        flat = np.ravel_multi_index(tuple(j.T), tuple(self.counts))
        return np.where(inside, flat + 1, 0)

    def cells(self):
        if self.n_boxes > 10 ** 6:
            raise DomainError("too many cells to enumerate")
        out = [Cell(0, Outside(self._bounding_box()))]
        for flat in range(self.n_boxes):
            j = np.unravel_index(flat, tuple(self.counts))
            lo = np.array([self._edges(a)[j[a]] for a in range(self.d)])
            hi = np.array([self._edges(a)[j[a] + 1] for a in range(self.d)])
            out.append(Cell(flat + 1, Box(tuple(lo), tuple(hi), (True,) * self.d, (False,) * self.d)))
        return out

    def _bounding_box(self):
        hi = tuple(self._edges(a)[-1] for a in range(self.d))
        return Box(tuple(self.lo), hi, (True,) * self.d, (False,) * self.d)

    def diameters(self, ids):
        ids = np.asarray(ids)
        diag = float(np.sqrt((self.width ** 2).sum()))
        return np.where(ids == 0, INF, diag)


def product_partition(m: int, d: int) -> GridPartition:
    """Universal dyadic partition: boxes of side 2^-m covering [-m, m)^d plus the outside."""
    if m < 1 or d < 1:
        raise ValidationError("product partition needs m >= 1 and d >= 1")
    per_axis = 2 * m * 2 ** m
    if per_axis ** d + 1 > 2 ** 62:
        raise DomainError(f"m={m}, d={d} overflows the cell index range")
    p = GridPartition(np.full(d, -float(m)), 2.0 ** -m, per_axis, kind="product",
                      params={"m": m, "d": d})
    return p


def dyadic_index(p: GridPartition, X) -> np.ndarray:
    """Signed dyadic index floor(x * 2^m) of each coordinate in a product partition."""
    m = p.params()["m"]
    j, _ = p.box_index(X)
    return j - m * 2 ** m


def uniform_grid(bound: float, per_axis: int, d: int) -> GridPartition:
    """per_axis^d equal boxes over [-bound, bound)^d plus the outside."""
    if bound <= 0 or per_axis < 1:
        raise ValidationError("uniform grid needs bound > 0 and per_axis >= 1")
    return GridPartition(np.full(d, -float(bound)), 2.0 * bound / per_axis, per_axis,
                         kind="uniform-grid", params={"bound": bound, "per_axis": per_axis, "d": d})


# ---------------------------------------------------------------- Gessaman

class GessamanPartition(Partition):
    """Statistically equivalent blocks: T slabs per axis, nested in axis order."""

    kind = "gessaman"

    def __init__(self, thresholds, T: int, d: int, counts, l_n: int, n: int):
        super().__init__(d)
        self.T = T
        self.thresholds = thresholds  # axis a: array of shape (T,)*a + (T-1,)
        self.counts = counts  # construction points per cell, shape (T,)*d
        self.l_n = l_n
        self.n = n

    @property
    def size(self):
        return self.T ** self.d

    def params(self):
        return {"T": self.T, "l_n": self.l_n, "n": self.n}

    def _ids(self, X):
        T = self.T
        prefix = np.zeros(X.shape[0], dtype=np.int64)
        for a in range(self.d):
            th = self.thresholds[a].reshape(-1, T - 1)[prefix]
            # points equal to a threshold stay in the left (closed) slab
            i_a = (th < X[:, a, None]).sum(axis=1)
            prefix = prefix * T + i_a
        return prefix

    def cells(self):
        T = self.T
        out = []
        for flat in range(T ** self.d):
            idx = np.unravel_index(flat, (T,) * self.d)
            lo, hi, lc, hc = [], [], [], []
            prefix = 0
            for a in range(self.d):
                th = self.thresholds[a].reshape(-1, T - 1)[prefix]
                i = idx[a]
                lo.append(float(th[i - 1]) if i > 0 else -INF)
                hi.append(float(th[i]) if i < T - 1 else INF)
                lc.append(False)
                hc.append(i < T - 1)
                prefix = prefix * T + i
            out.append(Cell(flat, Box(tuple(lo), tuple(hi), tuple(lc), tuple(hc))))
        return out

    def cell_counts(self) -> np.ndarray:
        return self.counts.ravel()


def _as_points(data) -> np.ndarray:
    X = np.asarray(getattr(data, "points", data), dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValidationError("construction data must be a non-empty (n, d) array")
    if not np.all(np.isfinite(X)):
        raise ValidationError("construction data must be finite")
    return X


def gessaman_cells_per_axis(n: int, l_n: int, d: int) -> int:
    """Largest T with T^d * l_n <= n."""
    T = int(math.floor((n / l_n) ** (1.0 / d)))
    while (T + 1) ** d * l_n <= n:
        T += 1
    while T > 0 and T ** d * l_n > n:
        T -= 1
    return T


def gessaman(data, l_n: int) -> GessamanPartition:
    X = _as_points(data)
    n, d = X.shape
    if l_n < 1:
        raise ValidationError("l_n must be >= 1")
    if n < l_n:
        raise ValidationError(f"need n >= l_n, got n={n}, l_n={l_n}")
    T = gessaman_cells_per_axis(n, l_n, d)
    if T < 1:
        raise ValidationError("T_n < 1")
    groups = [np.arange(n)]
    thresholds = []
    for a in range(d):
        th = np.empty((len(groups), T - 1))
        new_groups = []
        for g, idx in enumerate(groups):
            # an empty group borrows the global order statistics of this axis
            v = np.sort(X[idx, a] if idx.size else X[:, a])
            s = max(1, v.size // T)
            th[g] = v[np.minimum(np.arange(1, T) * s - 1, v.size - 1)]
            slot = (th[g][None, :] < X[idx, a, None]).sum(axis=1)
            new_groups.extend(idx[slot == c] for c in range(T))
        thresholds.append(th.reshape((T,) * a + (T - 1,)))
        groups = new_groups
    counts = np.array([g.size for g in groups]).reshape((T,) * d)
    return GessamanPartition(thresholds, T, d, counts, l_n, n)


# ---------------------------------------------------------------- tree-structured

class TreePartition(Partition):
    """Binary tree of axis-aligned median splits; leaves are the cells."""

    kind = "tsp"

    def __init__(self, d, axis, thr, left, right, leaf_id, boxes, counts, splits, l_n, n):
        super().__init__(d)
        self.axis = axis
        self.thr = thr
        self.left = left
        self.right = right
        self.leaf_id = leaf_id
        self.boxes = boxes
        self.counts = counts
        self.splits = splits  # (points in node, points sent to the closed side)
        self.l_n = l_n
        self.n = n

    @property
    def size(self):
        return len(self.boxes)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.axis.size, dtype=int)
        for node in range(self.axis.size):
            if self.leaf_id[node] < 0:
                depth[self.left[node]] = depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def params(self):
        return {"l_n": self.l_n, "n": self.n}

    def _ids(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            j = np.flatnonzero(self.leaf_id[node] < 0)
            if j.size == 0:
                break
            nd = node[j]
            go_left = X[j, self.axis[nd]] <= self.thr[nd]
            node[j] = np.where(go_left, self.left[nd], self.right[nd])
        return self.leaf_id[node]

    def cells(self):
        return [Cell(i, b) for i, b in enumerate(self.boxes)]

    def cell_counts(self) -> np.ndarray:
        return np.asarray(self.counts)


def tsp(data, l_n: int) -> TreePartition:
    """Balanced median-split tree; a split happens only if both children keep >= l_n points."""
    X = _as_points(data)
    n, d = X.shape
    if l_n < 1:
        raise ValidationError("l_n must be >= 1")
    axis, thr, left, right, leaf_id = [], [], [], [], []
    boxes, counts, splits = [], [], []

    def new_node():
        axis.append(-1)
        thr.append(math.nan)
        left.append(-1)
        right.append(-1)
        leaf_id.append(-1)
        return len(axis) - 1

    def grow(node, idx, depth, lo, hi, hc):
        a = depth % d
        v = X[idx, a]
        if idx.size >= 2:
            r = -(-idx.size // 2)
            med = float(np.partition(v, r - 1)[r - 1])
            go_left = v <= med
            n_left = int(go_left.sum())
            if n_left >= l_n and idx.size - n_left >= l_n:
                axis[node], thr[node] = a, med
                splits.append((int(idx.size), n_left))
                lnode, rnode = new_node(), new_node()
                left[node], right[node] = lnode, rnode
                hi_l, hc_l = list(hi), list(hc)
                hi_l[a], hc_l[a] = med, True
                lo_r = list(lo)
                lo_r[a] = med
                grow(lnode, idx[go_left], depth + 1, lo, hi_l, hc_l)
                grow(rnode, idx[~go_left], depth + 1, lo_r, hi, hc)
                return
        leaf_id[node] = len(boxes)
        boxes.append(Box(tuple(lo), tuple(hi), (False,) * d, tuple(hc)))
        counts.append(int(idx.size))

    root = new_node()
    grow(root, np.arange(n), 0, [-INF] * d, [INF] * d, [False] * d)
    return TreePartition(d, np.array(axis), np.array(thr), np.array(left), np.array(right),
                         np.array(leaf_id), boxes, counts, splits, l_n, n)


# ---------------------------------------------------------------- informed schemes

class AsymmetricPartition(Partition):
    """Per-quadrant uniform dyadic grid on [0, r)^2 (in |x|) plus three coarse outer cells.

    Each quadrant holds 4^depth fine squares of side r / 2^depth next to the
    origin and three unbounded cells beyond the radius, so no cell crosses an
    axis and the size is 4 * (4^depth + 3).
    """

    kind = "asymmetric"

    def __init__(self, depth: int, radius: float):
        super().__init__(2)
        if depth < 1:
            raise ValidationError("depth must be >= 1")
        if radius <= 0:
            raise ValidationError("radius must be > 0")
        self.depth = int(depth)
        self.radius = float(radius)
        self.side = 2 ** self.depth
        self.per_quadrant = self.side ** 2 + 3

    @property
    def size(self):
        return 4 * self.per_quadrant

    def params(self):
        return {"depth": self.depth, "radius": self.radius}

    def _ids(self, X):
        q = QuadrantPartition.label(X)
        A = np.abs(X)
        r, h = self.radius, self.radius / self.side
        in1, in2 = A[:, 0] < r, A[:, 1] < r
        i = np.clip(np.floor(A[:, 0] / h).astype(np.int64), 0, self.side - 1)
        j = np.clip(np.floor(A[:, 1] / h).astype(np.int64), 0, self.side - 1)
        fine = i * self.side + j
        sq = self.side ** 2
        local = np.where(in1 & in2, fine,
                         np.where(in2, sq, np.where(in1, sq + 1, sq + 2)))
        return (q - 1) * self.per_quadrant + local

    def cells(self):
        r, h = self.radius, self.radius / self.side
        out = []
        for q in (1, 2, 3, 4):
            axes = QuadrantPartition.AXES[q]
            base = (q - 1) * self.per_quadrant
            for i in range(self.side):
                for j in range(self.side):
                    iv = ((i * h, (i + 1) * h, True, False), (j * h, (j + 1) * h, True, False))
                    out.append(Cell(base + i * self.side + j, _signed_box(axes, iv)))
            near, far = (0.0, r, True, False), (r, INF, True, False)
            sq = self.side ** 2
            out.append(Cell(base + sq, _signed_box(axes, (far, near))))
            out.append(Cell(base + sq + 1, _signed_box(axes, (near, far))))
            out.append(Cell(base + sq + 2, _signed_box(axes, (far, far))))
        return out


def asymmetric_dyadic(depth: int, radius: float = 0.5) -> AsymmetricPartition:
    return AsymmetricPartition(depth, radius)


def asymmetric_size(depth: int) -> int:
    return 4 * (4 ** depth + 3)


class IntervalPartition(Partition):
    """Cells are intervals of a scalar statistic: a linear projection or the radius.

    ``edges`` are sorted cut points; ``to_right[j]`` says whether a point equal
    to ``edges[j]`` belongs to the interval on its right.
    """

    kind = "interval"

    def __init__(self, d: int, direction, edges, to_right, kind: str = "interval",
                 params: dict | None = None):
        super().__init__(d)
        if direction is not None:
            u = np.asarray(direction, dtype=float).ravel()
            norm = float(np.linalg.norm(u))
            if u.size != d or norm == 0.0 or not math.isfinite(norm):
                raise ValidationError("direction must be a non-zero finite vector of dimension d")
            direction = u / norm
        self.direction = direction
        self.edges = np.asarray(edges, dtype=float)
        self.to_right = np.broadcast_to(np.asarray(to_right, dtype=bool), self.edges.shape).copy()
        if np.any(np.diff(self.edges) <= 0):
            raise ValidationError("interval edges must be strictly increasing")
        self.kind = kind
        self._params = params or {}

    @property
    def size(self):
        return self.edges.size + 1

    def params(self):
        return dict(self._params)

    def statistic(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.direction is None:
            return np.linalg.norm(X, axis=1)
        return X @ self.direction

    def _ids(self, X):
        t = self.statistic(X)
        below = np.searchsorted(self.edges, t, side="left")
        at = np.searchsorted(self.edges, t, side="right") > below
        ids = below.astype(np.int64)
        ids[at] += self.to_right[below[at]]
        return ids

    def cells(self):
        e = np.concatenate([[-INF if self.direction is not None else 0.0], self.edges, [INF]])
        out = []
        direction = None if self.direction is None else tuple(float(v) for v in self.direction)
        for i in range(self.size):
            lo_closed = (bool(self.to_right[i - 1]) if i > 0 else self.direction is None)
            hi_closed = (not self.to_right[i]) if i < self.edges.size else False
            out.append(Cell(i, Slab(direction, float(e[i]), float(e[i + 1]), lo_closed, hi_closed)))
        return out


def projected_uniform(direction, range_, k: int, radial: bool = False) -> IntervalPartition:
    """Uniform cells of a scalar projection.

    Linear mode: two unbounded end slabs plus k-2 equal slabs over ``range_``.
    Radial mode (``direction`` gives the dimension only): k-1 equal rings over
    ``range_`` with the first ring reaching down to 0, plus the outside.
    """
    if k < 2:
        raise ValidationError("projected_uniform needs k >= 2")
    lo, hi = float(range_[0]), float(range_[1])
    if not lo < hi:
        raise ValidationError("range must satisfy lo < hi")
    u = np.asarray(direction, dtype=float).ravel()
    if not np.any(u != 0):
        raise ValidationError("direction must be non-zero")
    params = {"range": [lo, hi], "k": k, "radial": radial}
    if radial:
        if lo < 0:
            raise ValidationError("radial range must start at >= 0")
        edges = lo + (hi - lo) * np.arange(1, k) / (k - 1)
        return IntervalPartition(u.size, None, edges, True, kind="projected-radial", params=params)
    edges = np.linspace(lo, hi, k - 1)
    params["direction"] = (u / np.linalg.norm(u)).tolist()
    return IntervalPartition(u.size, u, edges, True, kind="projected", params=params)


def three_cell_partition(i: int) -> IntervalPartition:
    """(-inf, -2^-i), [-2^-i, 2^-i], (2^-i, inf) on the real line."""
    h = 2.0 ** -i
    return IntervalPartition(1, [1.0], [-h, h], [True, False], kind="three-cell", params={"i": i})


# ---------------------------------------------------------------- refinement and diagnostics

class RefinedPartition(Partition):
    """Intersections of a partition with the level sets of a labeling rule."""

    kind = "refined"

    def __init__(self, base: Partition, rule, M: int, probe=None):
        super().__init__(base.d)
        self.base = base
        self.rule = rule
        self.M = int(M)
        self._probe_size = None
        if probe is not None:
            self._probe_size = int(np.unique(self.quantize(_as_points(probe))).size)

    def split_ids(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        return ids // self.M, ids % self.M + 1

    def _ids(self, X):
        labels = np.asarray(self.rule(X), dtype=np.int64)
        return self.base.quantize(X) * self.M + (labels - 1)

    @property
    def size(self):
        return self._probe_size if self._probe_size is not None else self.base.size * self.M

    def params(self):
        return {"M": self.M, "base": self.base.to_dict(include_cells=False)}

    def cells(self):
        return [Cell(c.id * self.M + y - 1, Restricted(c.geometry, y))
                for c in self.base.cells() for y in range(1, self.M + 1)]

    def diameters(self, ids):
        return self.base.diameters(np.asarray(ids, dtype=np.int64) // self.M)


def refine_with_rule(p: Partition, rule, M: int, probe=None) -> RefinedPartition:
    return RefinedPartition(p, rule, M, probe)


def shrink_diagnostic(p: Partition, probe, delta: float) -> float:
    """Fraction of probe points whose cell is wider than ``delta``."""
    if delta <= 0:
        raise ValidationError("delta must be > 0")
    X = _as_points(probe)
    return float((p.diameters(p.quantize(X)) > delta).mean())
