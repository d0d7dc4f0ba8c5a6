"""Explicit metric spaces with the oracle access model used by the algorithms.

Every space is represented by a finite truncation with an explicit resolution.
Oracles are pure functions of their inputs; "arbitrary choice" points in the
oracle contracts resolve to the least point under the space's canonical order
so that runs are reproducible without seeding the oracles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import (
    ResolutionError,
    StructuralError,
    UnsupportedCapabilityError,
    ValidationError,
)

_EPS = 1e-12


# ---------------------------------------------------------------------------
# balls and ball trees


@dataclass(frozen=True)
class Ball:
    center: object
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValidationError("ball radius must be positive")


@dataclass
class BallNode:
    center: object
    radius: float
    path: str = ""
    children: list = field(default_factory=list)


@dataclass
class BallTree:
    root: BallNode
    depth_cap: int

    def nodes(self):
        """Preorder (node, depth) pairs."""
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            for child in reversed(node.children):
                stack.append((child, depth + 1))

    def level(self, depth):
        return [n for n, d in self.nodes() if d == depth]

    def node_count(self):
        return sum(1 for _ in self.nodes())


# ---------------------------------------------------------------------------
# depth structures (descending chains of closed sets)


class DepthLevel:
    """One closed set in a descending chain, with a finite scan set.

    kind 'all': the whole space.  kind 'points': an explicit finite set.
    kind 'interval': a closed subrange [a, b] of an interval space.
    kind 'prefix': the closure of one subtree of a tree space.
    """

    def __init__(self, kind, points=None, bounds=None, prefix=None):
        if kind not in ("all", "points", "interval", "prefix"):
            raise ValidationError(f"unknown depth-level kind {kind!r}")
        self.kind = kind
        self.points = list(points) if points is not None else None
        self.bounds = tuple(bounds) if bounds is not None else None
        self.prefix = tuple(prefix) if prefix is not None else None

    def contains(self, space, p):
        if self.kind == "all":
            return True
        if self.kind == "points":
            return any(space.distance(p, q) <= _EPS for q in self.points)
        if self.kind == "interval":
            a, b = self.bounds
            return a - _EPS <= p <= b + _EPS
        return tuple(p[: len(self.prefix)]) == self.prefix

    def scan(self, space):
        if self.kind == "all":
            return space.scan_points()
        if self.kind == "points":
            return list(self.points)
        if self.kind == "interval":
            a, b = self.bounds
            pts = [p for p in space.scan_points() if a - _EPS <= p <= b + _EPS]
            return pts or [a]
        return [p for p in space.scan_points() if self.contains(space, p)]

    def descriptor(self):
        d = {"kind": self.kind}
        if self.points is not None:
            d["points"] = list(self.points)
        if self.bounds is not None:
            d["bounds"] = list(self.bounds)
        if self.prefix is not None:
            d["prefix"] = list(self.prefix)
        return d

    @staticmethod
    def from_descriptor(d):
        return DepthLevel(
            d["kind"],
            points=d.get("points"),
            bounds=d.get("bounds"),
            prefix=d.get("prefix"),
        )


@dataclass
class DepthStructure:
    """Finite chain S_0 >= S_1 >= ... of closed sets; the empty set is implicit."""

    levels: list
    dimension: float = 1.0

    def __post_init__(self):
        if not self.levels or self.levels[0].kind != "all":
            raise ValidationError("depth chain must start with the whole space")

    def depth_of(self, space, p):
        depth = 0
        for i, level in enumerate(self.levels):
            if level.contains(space, p):
                depth = i
            else:
                break
        return depth

    def descriptor(self):
        return {
            "levels": [lv.descriptor() for lv in self.levels],
            "dimension": self.dimension,
        }

    @staticmethod
    def from_descriptor(d):
        return DepthStructure(
            [DepthLevel.from_descriptor(lv) for lv in d["levels"]],
            dimension=d.get("dimension", 1.0),
        )


# ---------------------------------------------------------------------------
# spaces


class MetricSpace:
    kind = "abstract"
    well_ordered = False
    cb_ranked = False
    has_perfect_subspace = False
    diameter = 1.0
    depth_structure: DepthStructure | None = None

    # -- points ----------------------------------------------------------
    def validate_point(self, p):
        raise NotImplementedError

    def distance(self, p, q):
        raise NotImplementedError

    def scan_points(self):
        """Finite point set used for oracle scans (the truncation itself,
        or a grid for continuous spaces)."""
        raise NotImplementedError

    def canonical_key(self, p):
        """Total order used for deterministic tie-breaks."""
        return p

    def canonical_least(self):
        return min(self.scan_points(), key=self.canonical_key)

    # -- optional capabilities ------------------------------------------
    def order_key(self, p):
        raise UnsupportedCapabilityError(f"{self.kind} space is not well-ordered")

    def rank_classes(self):
        raise UnsupportedCapabilityError(f"{self.kind} space has no CB structure")

    def perfect_neighbor(self, center, radius):
        raise UnsupportedCapabilityError(
            f"{self.kind} space has no perfect-subspace sampler"
        )

    # -- covering --------------------------------------------------------
    def covering(self, k):
        raise NotImplementedError

    def covering_number_exact(self, delta):
        """Exact minimal covering number, or None when only the greedy
        bound is available."""
        return None

    def descriptor(self):
        raise NotImplementedError


def _attach_depth(space, depth_chain, dimension):
    if depth_chain is not None:
        space.depth_structure = DepthStructure(
            [DepthLevel.from_descriptor(d) if isinstance(d, dict) else d for d in depth_chain],
            dimension=dimension,
        )
    return space


class IntervalSpace(MetricSpace):
    """The unit interval [0,1] with |x - y|, scanned on a dyadic grid."""

    kind = "interval"
    has_perfect_subspace = True

    def __init__(self, resolution=2.0 ** -20, scan_resolution=2.0 ** -10,
                 well_order=None, depth_chain=None, depth_dimension=1.0):
        self.resolution = float(resolution)
        self.scan_resolution = float(scan_resolution)
        self.well_order = well_order
        if well_order not in (None, "coordinate"):
            raise ValidationError("interval well_order must be 'coordinate'")
        self.well_ordered = well_order is not None
        self._scan = None
        _attach_depth(self, depth_chain, depth_dimension)

    def validate_point(self, p):
        if not isinstance(p, (int, float)) or not 0.0 <= p <= 1.0:
            raise StructuralError(f"{p!r} is not a point of [0,1]")

    def distance(self, p, q):
        return abs(p - q)

    def scan_points(self):
        if self._scan is None:
            n = int(round(1.0 / self.scan_resolution))
            self._scan = [i / n for i in range(n + 1)]
        return self._scan

    def canonical_least(self):
        return 0.0

    def order_key(self, p):
        if not self.well_ordered:
            return super().order_key(p)
        return p

    def perfect_neighbor(self, center, radius):
        step = radius / 8.0
        if step < self.resolution:
            raise ResolutionError("radius below interval resolution")
        return center + step if center + step <= 1.0 else center - step

    def covering(self, k):
        delta = 1.0 / (2 * k)
        return delta, [(2 * i + 1) / (2.0 * k) for i in range(k)]

    def covering_number_exact(self, delta):
        if delta >= 1.0:
            return 1
        return math.ceil(1.0 / delta - 1e-9)

    def descriptor(self):
        d = {
            "kind": "interval",
            "resolution": self.resolution,
            "scan_resolution": self.scan_resolution,
        }
        if self.well_order:
            d["well_order"] = self.well_order
        if self.depth_structure is not None:
            d["depth_chain"] = [lv.descriptor() for lv in self.depth_structure.levels]
            d["depth_dimension"] = self.depth_structure.dimension
        return d


def _greedy_cover(points, k, dist):
    """Farthest-point traversal; returns (delta, centers) with delta computed
    by exhaustive scan, so coverage is certified on the truncation."""
    centers = [points[0]]
    while len(centers) < k:
        far = max(points, key=lambda p: min(dist(p, c) for c in centers))
        if min(dist(far, c) for c in centers) <= 0:
            break
        centers.append(far)
    delta = max(min(dist(p, c) for c in centers) for p in points)
    return delta, centers


def _line_cover_count(values, delta):
    """Minimal number of diameter-<=delta sets covering a finite subset of
    the line (greedy sweep, exact)."""
    vals = sorted(values)
    count = 0
    i = 0
    while i < len(vals):
        count += 1
        hi = vals[i] + delta + _EPS
        while i < len(vals) and vals[i] <= hi:
            i += 1
    return count


class FiniteSpace(MetricSpace):
    """A finite set of points on the line; listed order is the well-order."""

    kind = "finite"
    well_ordered = True
    cb_ranked = True

    def __init__(self, coords, depth_chain=None, depth_dimension=0.0):
        if len(coords) == 0:
            raise ValidationError("finite space needs at least one point")
        if len(set(coords)) != len(coords):
            raise ValidationError("finite space points must be distinct")
        self.coords = [float(c) for c in coords]
        self.diameter = max(self.coords) - min(self.coords) or 1.0
        self._order = {c: i for i, c in enumerate(self.coords)}
        _attach_depth(self, depth_chain, depth_dimension)

    def validate_point(self, p):
        if p not in self._order:
            raise StructuralError(f"{p!r} is not a point of this finite space")

    def distance(self, p, q):
        return abs(p - q)

    def scan_points(self):
        return list(self.coords)

    def order_key(self, p):
        return self._order[p]

    def rank_classes(self):
        return [list(self.coords)]

    def covering(self, k):
        if len(self.coords) <= k:
            return 0.0, list(self.coords)
        return _greedy_cover(self.coords, k, lambda a, b: abs(a - b))

    def covering_number_exact(self, delta):
        return _line_cover_count(self.coords, delta)

    def descriptor(self):
        return {"kind": "finite", "coords": list(self.coords)}


class ConvergentSpace(MetricSpace):
    """Truncated convergent sequence {0} u {1/n : n <= N}.

    Well-order: 1 < 1/2 < ... < 1/N < 0 (isolated points first, limit last).
    """

    kind = "convergent"
    well_ordered = True
    cb_ranked = True

    def __init__(self, n_max=100):
        if n_max < 1:
            raise ValidationError("need n_max >= 1")
        self.n_max = int(n_max)
        self._points = [1.0 / n for n in range(1, self.n_max + 1)] + [0.0]
        self._pointset = set(self._points)

    def validate_point(self, p):
        if p not in self._pointset:
            raise StructuralError(f"{p!r} is not in the truncated sequence")

    def distance(self, p, q):
        return abs(p - q)

    def scan_points(self):
        return list(self._points)

    def order_key(self, p):
        if p == 0.0:
            return math.inf
        return round(1.0 / p)

    def rank_classes(self):
        return [self._points[:-1], [0.0]]

    def covering(self, k):
        if k >= self.n_max + 1:
            return 0.0, list(self._points)
        centers = [0.0] + [1.0 / n for n in range(1, k)]
        delta = max(
            min(abs(p - c) for c in centers) for p in self._points
        )
        return delta, centers

    def covering_number_exact(self, delta):
        return _line_cover_count(self._points, delta)

    def descriptor(self):
        return {"kind": "convergent", "n_max": self.n_max}


class ConvergentUnionSpace(MetricSpace):
    """Finite union of convergent sequences: for each branch (limit, sign, N)
    the points limit + sign/n, n <= N, plus the limit itself."""

    kind = "convergent_union"
    cb_ranked = True

    def __init__(self, branches):
        self.branches = [(float(l), int(s), int(n)) for l, s, n in branches]
        iso = []
        for limit, sign, n_max in self.branches:
            if sign not in (-1, 1):
                raise ValidationError("branch sign must be +-1")
            iso.extend(limit + sign / n for n in range(1, n_max + 1))
        self.limits = [b[0] for b in self.branches]
        self._points = sorted(set(iso) | set(self.limits))
        if len(self._points) != len(iso) + len(set(self.limits)):
            raise ValidationError("branch points collide")
        self._pointset = set(self._points)
        self._iso = sorted(set(iso))
        self.diameter = max(self._points) - min(self._points)

    def validate_point(self, p):
        if p not in self._pointset:
            raise StructuralError(f"{p!r} is not in this union space")

    def distance(self, p, q):
        return abs(p - q)

    def scan_points(self):
        return list(self._points)

    def rank_classes(self):
        return [self._iso, sorted(set(self.limits))]

    def covering(self, k):
        if len(self._points) <= k:
            return 0.0, list(self._points)
        return _greedy_cover(self._points, k, lambda a, b: abs(a - b))

    def covering_number_exact(self, delta):
        return _line_cover_count(self._points, delta)

    def descriptor(self):
        return {"kind": "convergent_union",
                "branches": [list(b) for b in self.branches]}


class NestedConvergentSpace(MetricSpace):
    """Two-level accumulation: 0, the points 1/m (m <= M), and for each m the
    sequence 1/m + 1/(m(m+1)n), n <= N, converging to 1/m from above."""

    kind = "nested_convergent"
    cb_ranked = True

    def __init__(self, m_max=10, n_max=10):
        self.m_max, self.n_max = int(m_max), int(n_max)
        self._mid = [1.0 / m for m in range(1, self.m_max + 1)]
        self._iso = [
            1.0 / m + 1.0 / (m * (m + 1) * n)
            for m in range(1, self.m_max + 1)
            for n in range(1, self.n_max + 1)
        ]
        self._points = sorted(set(self._iso) | set(self._mid) | {0.0})
        self._pointset = set(self._points)

    def validate_point(self, p):
        if p not in self._pointset:
            raise StructuralError(f"{p!r} is not in this space")

    def distance(self, p, q):
        return abs(p - q)

    def scan_points(self):
        return list(self._points)

    def rank_classes(self):
        return [sorted(self._iso), sorted(self._mid), [0.0]]

    def covering(self, k):
        if len(self._points) <= k:
            return 0.0, list(self._points)
        return _greedy_cover(self._points, k, lambda a, b: abs(a - b))

    def covering_number_exact(self, delta):
        return _line_cover_count(self._points, delta)

    def descriptor(self):
        return {"kind": "nested_convergent",
                "m_max": self.m_max, "n_max": self.n_max}


_BRANCH_CAP_DEFAULT = 10 ** 12
_LEAF_ENUM_CAP = 4096


def uniform_tree_branching(eps, b, depth, cap=_BRANCH_CAP_DEFAULT):
    """Branching schedule exp(eps^{-i b} (2^b - 1)) for split levels i=1..depth,
    rounded up and capped.  Returns (factors, capped_flag)."""
    factors = []
    capped = False
    for i in range(1, depth + 1):
        exponent = eps ** (-i * b) * (2.0 ** b - 1.0)
        if exponent > 700:
            raise ResolutionError("branching factor overflows at this depth")
        f = math.ceil(math.exp(exponent))
        if f > cap:
            f = cap
            capped = True
        factors.append(max(2, f))
    return factors, capped


class TreeSpace(MetricSpace):
    """Leaves of a rooted tree truncated at a fixed depth; two leaves whose
    paths first diverge after a common prefix of length i are at distance
    eps^i.  Uniform branching by default; a growth exponent b gives the
    schedule exp(eps^{-i b}(2^b - 1)) with log-covering dimension b."""

    kind = "tree"
    has_perfect_subspace = True

    def __init__(self, eps=0.5, depth=8, branching=None, b=None,
                 branch_cap=_BRANCH_CAP_DEFAULT):
        if not 0 < eps < 1:
            raise ValidationError("eps must be in (0,1)")
        self.eps = float(eps)
        self.depth = int(depth)
        self.b = b
        self.branch_cap = branch_cap
        self.branch_capped = False
        if branching is not None:
            self.branching = [int(x) for x in branching]
        elif b is not None:
            self.branching, self.branch_capped = uniform_tree_branching(
                eps, b, self.depth, branch_cap)
        else:
            self.branching = [2] * self.depth
        if len(self.branching) != self.depth or any(f < 2 for f in self.branching):
            raise ValidationError("branching schedule must list >=2 per level")

    def validate_point(self, p):
        if len(p) != self.depth:
            raise StructuralError("leaf path has wrong length")
        for sym, width in zip(p, self.branching):
            if not 0 <= sym < width:
                raise StructuralError("leaf path symbol out of range")

    def distance(self, p, q):
        for i, (a, b_) in enumerate(zip(p, q)):
            if a != b_:
                return self.eps ** i
        return 0.0

    def node_count(self, level):
        count = 1
        for f in self.branching[:level]:
            count *= f
        return count

    def _node_paths(self, level):
        return itertools.product(*(range(f) for f in self.branching[:level]))

    def _leftmost_leaf(self, prefix):
        return tuple(prefix) + (0,) * (self.depth - len(prefix))

    def scan_points(self):
        if self.node_count(self.depth) > _LEAF_ENUM_CAP:
            # representative leaves at the deepest enumerable level
            level = self.depth
            while self.node_count(level) > _LEAF_ENUM_CAP:
                level -= 1
            return [self._leftmost_leaf(p) for p in self._node_paths(level)]
        return [tuple(p) for p in self._node_paths(self.depth)]

    def canonical_least(self):
        return (0,) * self.depth

    def perfect_neighbor(self, center, radius):
        # smallest split level with eps^level < radius/4 gives a leaf close
        # enough for the ball-tree child rule
        level = 0
        while self.eps ** level >= radius / 4.0:
            level += 1
            if level > self.depth - 1:
                raise ResolutionError("tree truncation too shallow for this radius")
        sym = (center[level] + 1) % self.branching[level]
        return tuple(center[:level]) + (sym,) + (0,) * (self.depth - level - 1)

    def covering(self, k):
        level = 0
        for j in range(self.depth + 1):
            if self.node_count(j) <= k:
                level = j
            else:
                break
        delta = self.eps ** level if level < self.depth else 0.0
        points = [self._leftmost_leaf(p) for p in self._node_paths(level)]
        return delta, points

    def covering_number_exact(self, delta):
        if delta >= 1.0:
            return 1
        for j in range(1, self.depth + 1):
            if self.eps ** j <= delta + _EPS:
                return self.node_count(j)
        raise ResolutionError("delta below tree truncation resolution")

    def descriptor(self):
        d = {"kind": "tree", "eps": self.eps, "depth": self.depth}
        if self.b is not None:
            d["b"] = self.b
            d["branch_cap"] = self.branch_cap
            d["branch_capped"] = self.branch_capped
        else:
            d["branching"] = list(self.branching)
        return d


# ---------------------------------------------------------------------------
# oracle front-ends


def distance(space, p, q):
    space.validate_point(p)
    space.validate_point(q)
    return space.distance(p, q)


def covering_oracle(space, k):
    if k < 1:
        raise ValidationError("covering budget must be >= 1")
    delta, points = space.covering(k)
    return delta, points


def _in_closure(space, p, balls):
    return any(space.distance(p, b.center) <= b.radius + _EPS for b in balls)


def ordering_oracle(space, balls):
    if not balls:
        raise ValidationError("ordering oracle needs at least one ball")
    space.order_key(space.canonical_least())  # capability probe
    covered = [p for p in space.scan_points() if _in_closure(space, p, balls)]
    if not covered:
        return min(space.scan_points(), key=space.order_key)
    return max(covered, key=space.order_key)


def rank_covering_oracle(space, rank, k):
    classes = space.rank_classes()
    if not 0 <= rank < len(classes):
        raise ValidationError(f"rank {rank} out of range for CB rank {len(classes) - 1}")
    pts = classes[rank]
    if len(pts) <= k:
        return 0.0, list(pts)
    return _greedy_cover(pts, k, space.distance)


def _require_depth(space):
    if space.depth_structure is None:
        raise UnsupportedCapabilityError(f"{space.kind} space has no depth structure")
    return space.depth_structure


def depth_oracle(space, balls):
    ds = _require_depth(space)
    if not balls:
        raise ValidationError("depth oracle needs at least one ball")
    for level in reversed(ds.levels):
        hits = [p for p in level.scan(space) if _in_closure(space, p, balls)]
        if hits:
            return min(hits, key=space.canonical_key)
    raise ResolutionError("no scan point of any chain set lies in the ball union")


@dataclass(frozen=True)
class CoverResult:
    covered: bool
    witness: object = None


def cover_oracle(space, anchor, balls):
    ds = _require_depth(space)
    lam = 0 if anchor is None else ds.depth_of(space, anchor)
    level = ds.levels[lam]
    for p in sorted(level.scan(space), key=space.canonical_key):
        inside = any(
            space.distance(p, b.center) < b.radius - _EPS for b in balls
        )
        if not inside:
            return CoverResult(False, p)
    return CoverResult(True)


@dataclass(frozen=True)
class CoveringCount:
    count: int
    exact: bool


def covering_number(space, delta):
    if delta <= 0:
        raise ValidationError("delta must be positive")
    exact = space.covering_number_exact(delta)
    if exact is not None:
        return CoveringCount(exact, True)
    k = 1
    while True:
        d, points = space.covering(k)
        if d <= delta + _EPS:
            return CoveringCount(len(points), False)
        k *= 2
        if k > 2 ** 24:
            raise ResolutionError("covering number unavailable at this delta")


@dataclass
class DimensionEstimate:
    estimate: float
    table: list


def estimate_dimension(space, mode, delta_grid):
    """Slope of log N_delta (mode 'cov') or log log N_delta (mode 'lcd')
    against log(1/delta), taken as the max slope over the tail of the grid."""
    if mode not in ("cov", "lcd"):
        raise ValidationError("mode must be 'cov' or 'lcd'")
    grid = list(delta_grid)
    if len(grid) < 3 or any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("need >= 3 strictly decreasing delta values")
    table = []
    ys = []
    for d in grid:
        cc = covering_number(space, d)
        log_n = math.log(cc.count) if cc.count >= 1 else 0.0
        if mode == "lcd":
            if cc.count < 2:
                raise ValidationError("lcd mode needs N_delta >= 2 on the grid")
            y = math.log(log_n)
        else:
            y = log_n
        ys.append(y)
        table.append({
            "delta": d, "count": cc.count, "exact": cc.exact,
            "statistic": y / math.log(1.0 / d) if d < 1 else float("nan"),
        })
    slopes = [
        (ys[i + 1] - ys[i]) / (math.log(1.0 / grid[i + 1]) - math.log(1.0 / grid[i]))
        for i in range(len(grid) - 1)
    ]
    tail = slopes[-max(1, len(slopes) // 3):]
    return DimensionEstimate(max(tail), table)


def cb_rank(space):
    return len(space.rank_classes()) - 1


@dataclass
class LimitSet:
    points: list
    _contains: Callable

    def contains(self, p):
        return self._contains(p)


def limit_set(space, i):
    classes = space.rank_classes()
    if i > len(classes):
        return LimitSet([], lambda p: False)
    pts = [p for cls in classes[i:] for p in cls]
    ptset = set(pts)
    return LimitSet(sorted(ptset), lambda p: p in ptset)


# ---------------------------------------------------------------------------
# ball-tree construction

_CHILD_SHRINK = 0.49  # slightly under d/2 so the sibling inequality is strict


def build_ball_tree(space, depth_cap):
    """Root (y, 1); each node (y, r) gets children (y, r') and (y', r') where
    y' is a designated point of B(y, r/4) and r' = 0.49 d(y, y')."""
    if not space.has_perfect_subspace:
        raise UnsupportedCapabilityError(
            f"{space.kind} space has no perfect-subspace sampler")
    root_center = space.canonical_least() if space.kind == "tree" else 0.5
    root = BallNode(root_center, 1.0, path="")

    def grow(node, depth):
        if depth >= depth_cap:
            return
        sibling = space.perfect_neighbor(node.center, node.radius)
        d = space.distance(node.center, sibling)
        if d <= 0:
            raise ResolutionError("perfect-subspace sampler returned the center")
        r_child = _CHILD_SHRINK * d
        node.children = [
            BallNode(node.center, r_child, path=node.path + "0"),
            BallNode(sibling, r_child, path=node.path + "1"),
        ]
        for child in node.children:
            grow(child, depth + 1)

    grow(root, 0)
    return BallTree(root, depth_cap)


def ball_tree_violations(tree, space):
    """Worst slack of the two defining inequalities over all nodes; both must
    be strictly positive for a valid tree."""
    parent_slack = math.inf
    sibling_slack = math.inf
    for node, _ in tree.nodes():
        for child in node.children:
            gap = node.radius / 2.0 - (
                space.distance(node.center, child.center) + child.radius)
            parent_slack = min(parent_slack, gap)
        if len(node.children) == 2:
            a, b = node.children
            gap = space.distance(a.center, b.center) - (a.radius + b.radius)
            sibling_slack = min(sibling_slack, gap)
    return parent_slack, sibling_slack


# ---------------------------------------------------------------------------
# descriptors

_SPACE_KINDS = {}


def space_from_descriptor(d):
    kind = d.get("kind")
    if kind == "interval":
        return IntervalSpace(
            resolution=d.get("resolution", 2.0 ** -20),
            scan_resolution=d.get("scan_resolution", 2.0 ** -10),
            well_order=d.get("well_order"),
            depth_chain=d.get("depth_chain"),
            depth_dimension=d.get("depth_dimension", 1.0),
        )
    if kind == "finite":
        return FiniteSpace(d["coords"])
    if kind == "convergent":
        return ConvergentSpace(d.get("n_max", 100))
    if kind == "convergent_union":
        return ConvergentUnionSpace(d["branches"])
    if kind == "nested_convergent":
        return NestedConvergentSpace(d.get("m_max", 10), d.get("n_max", 10))
    if kind == "tree":
        return TreeSpace(
            eps=d.get("eps", 0.5),
            depth=d.get("depth", 8),
            branching=d.get("branching"),
            b=d.get("b"),
            branch_cap=d.get("branch_cap", _BRANCH_CAP_DEFAULT),
        )
    raise ValidationError(f"unknown space kind {kind!r}")
