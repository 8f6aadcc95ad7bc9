"""Points, finite point clouds and the metrics between them.

Two ambient spaces are supported:

``plane``
    Points are pairs of finite floats, stored as ``(n, 2)`` float arrays.
    Distance is Euclidean.
``sphere``
    The Riemann sphere.  Points are complex numbers with a single canonical
    point at infinity, :data:`INF`.  Distance is the chordal metric
    ``2|z - w| / sqrt((1 + |z|^2)(1 + |w|^2))``, evaluated as the Euclidean
    distance between the images of ``z`` and ``w`` on the unit sphere in R^3
    (diameter 2).

All cloud-level distances go through one pairwise kernel per space, so the
brute-force and tree-accelerated Hausdorff routines agree bit for bit.
"""

import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInput

INF = complex(math.inf, 0.0)
SPACES = ("plane", "sphere")

# n*m above which hausdorff() switches to the tree path
_BRUTE_LIMIT = 4_000_000
_CHUNK = 2048


def _workers():
    try:
        return max(1, int(os.environ.get("CHAOSGAME_THREADS", "1")))
    except ValueError:
        return 1


def is_inf(z):
    return math.isinf(z.real) or math.isinf(z.imag)


def sphere_point(z):
    """Coerce ``z`` to a point of the Riemann sphere (complex, canonical INF)."""
    if isinstance(z, str):
        if z.strip().lower() in ("inf", "infinity", "oo"):
            return INF
        raise InvalidInput(f"not a sphere point: {z!r}")
    if np.ndim(z) != 0:
        raise InvalidInput(f"sphere point must be a scalar, got shape {np.shape(z)}")
    z = complex(z)
    if math.isnan(z.real) or math.isnan(z.imag):
        raise InvalidInput("sphere point is NaN")
    if is_inf(z):
        return INF
    return z


def plane_point(p):
    """Coerce ``p`` to a finite planar point ``(x, y)``."""
    if np.ndim(p) != 1 or np.shape(p)[0] != 2 or np.iscomplexobj(p):
        raise InvalidInput(f"plane point must be a real pair, got {p!r}")
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InvalidInput(f"plane point must be finite, got {p!r}")
    return (x, y)


def space_of(p):
    """Infer the space a single point belongs to."""
    return "sphere" if np.ndim(p) == 0 or isinstance(p, str) else "plane"


def as_point(p, space):
    if space == "plane":
        if space_of(p) != "plane":
            raise InvalidInput(f"expected a plane point, got {p!r}")
        return plane_point(p)
    if space == "sphere":
        if space_of(p) != "sphere":
            raise InvalidInput(f"expected a sphere point, got {p!r}")
        return sphere_point(p)
    raise InvalidInput(f"unknown space {space!r}")


def embed(z):
    """Inverse stereographic image of complex ``z`` on the unit sphere, shape ``(n, 3)``.

    ``INF`` goes to the north pole.  Points with ``|z| > 1`` are computed
    through ``1/z`` so large moduli never overflow.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty((z.size, 3))
    inf = np.isinf(z.real) | np.isinf(z.imag)
    big = ~inf & (np.abs(z) > 1.0)
    small = ~inf & ~big

    zs = z[small]
    s = zs.real * zs.real + zs.imag * zs.imag
    out[small, 0] = 2.0 * zs.real / (1.0 + s)
    out[small, 1] = 2.0 * zs.imag / (1.0 + s)
    out[small, 2] = (s - 1.0) / (s + 1.0)

    w = 1.0 / z[big]
    s = w.real * w.real + w.imag * w.imag
    out[big, 0] = 2.0 * w.real / (1.0 + s)
    out[big, 1] = -2.0 * w.imag / (1.0 + s)
    out[big, 2] = (1.0 - s) / (1.0 + s)

    out[inf] = (0.0, 0.0, 1.0)
    return out


def _canonical_sphere_array(z):
    z = np.asarray(z, dtype=complex).reshape(-1)
    if np.isnan(z.real).any() or np.isnan(z.imag).any():
        raise InvalidInput("sphere cloud contains NaN")
    inf = np.isinf(z.real) | np.isinf(z.imag)
    if inf.any():
        z = z.copy()
        z[inf] = INF
    return z


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite nonempty point set, optionally tagged with the grid size it was pruned at."""

    points: np.ndarray
    space: str
    resolution: float | None = None

    def __post_init__(self):
        if self.space not in SPACES:
            raise InvalidInput(f"unknown space {self.space!r}")
        if self.space == "plane":
            pts = np.asarray(self.points, dtype=float)
            if np.iscomplexobj(self.points):
                raise InvalidInput("plane cloud given complex points")
            pts = pts.reshape(-1, 2)
            if not np.isfinite(pts).all():
                raise InvalidInput("plane cloud contains non-finite coordinates")
        else:
            pts = _canonical_sphere_array(self.points)
        if len(pts) == 0:
            raise InvalidInput("point cloud must be nonempty")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, points, space=None, resolution=None):
        points = list(points)
        if space is None:
            if not points:
                raise InvalidInput("point cloud must be nonempty")
            space = space_of(points[0])
        pts = [as_point(p, space) for p in points]
        return cls(np.array(pts, dtype=complex if space == "sphere" else float), space, resolution)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        if self.space == "plane":
            return (tuple(p) for p in self.points.tolist())
        return iter(self.points.tolist())

    @cached_property
    def coords(self):
        """Real coordinates the metric is Euclidean in: the plane itself, or R^3 for the sphere."""
        if self.space == "plane":
            return self.points
        c = embed(self.points)
        c.setflags(write=False)
        return c

    def with_resolution(self, resolution):
        return PointCloud(self.points, self.space, resolution)


def _check_same(a, b):
    if a.space != b.space:
        raise InvalidInput(f"space mismatch: {a.space} vs {b.space}")


def _pair_dists(x, Y):
    """Distances from one coordinate row ``x`` to every row of ``Y``."""
    d = Y - x
    acc = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
    if Y.shape[1] == 3:
        acc = acc + d[:, 2] * d[:, 2]
    return np.sqrt(acc)


def _min_dists_brute(X, Y):
    """For every row of X the minimum distance to Y, O(nm) by chunks."""
    out = np.empty(len(X))
    for start in range(0, len(X), _CHUNK):
        blk = X[start:start + _CHUNK]
        d0 = blk[:, None, 0] - Y[None, :, 0]
        d1 = blk[:, None, 1] - Y[None, :, 1]
        acc = d0 * d0 + d1 * d1
        if X.shape[1] == 3:
            d2 = blk[:, None, 2] - Y[None, :, 2]
            acc = acc + d2 * d2
        out[start:start + _CHUNK] = np.sqrt(acc.min(axis=1))
    return out


def _coords_of_point(p, space):
    p = as_point(p, space)
    if space == "plane":
        return np.array([p], dtype=float)
    return embed([p])


def point_distance(p, q):
    """Euclidean distance in the plane, chordal distance on the sphere."""
    sp, sq = space_of(p), space_of(q)
    if sp != sq:
        raise InvalidInput(f"space mismatch: {sp} vs {sq}")
    a = _coords_of_point(p, sp)
    b = _coords_of_point(q, sq)
    return float(_pair_dists(a[0], b)[0])


def chordal(z, w):
    """Closed-form chordal distance; independent of the embedding used elsewhere."""
    z, w = sphere_point(z), sphere_point(w)
    if z == INF and w == INF:
        return 0.0
    if z == INF:
        return 2.0 / math.sqrt(1.0 + abs(w) ** 2)
    if w == INF:
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


def dist_point_cloud(b, c):
    """``d(b, C) = min over c in C of d(b, c)``."""
    x = _coords_of_point(b, c.space)
    return float(_pair_dists(x[0], c.coords).min())


def in_epsilon_neighborhood(p, b, eps):
    """Strict membership ``d(p, B) < eps``."""
    if not eps > 0:
        raise InvalidInput(f"epsilon must be positive, got {eps}")
    return dist_point_cloud(p, b) < eps


def _min_dists_tree(X, Y, tree=None):
    """Same values as :func:`_min_dists_brute`, located with a k-d tree.

    The tree only proposes candidates; every returned distance is recomputed
    with :func:`_pair_dists`.  The candidate ball is inflated by a relative
    1e-9 so rounding in the tree cannot drop the true minimiser.
    """
    if tree is None:
        tree = cKDTree(Y)
    approx, _ = tree.query(X, k=1, workers=_workers())
    radii = approx * (1.0 + 1e-9) + 1e-300
    out = np.empty(len(X))
    cands = tree.query_ball_point(X, radii, workers=_workers())
    for i, idx in enumerate(cands):
        out[i] = _pair_dists(X[i], Y[idx]).min()
    return out


def directed_hausdorff(b, c, method="auto"):
    """``sup_{x in b} d(x, c)`` and the index in ``b`` where it is attained."""
    _check_same(b, c)
    X, Y = b.coords, c.coords
    if method == "auto":
        method = "brute" if len(X) * len(Y) <= _BRUTE_LIMIT else "tree"
    if method == "brute":
        d = _min_dists_brute(X, Y)
        i = int(np.argmax(d))
        return float(d[i]), i
    if method != "tree":
        raise InvalidInput(f"unknown method {method!r}")
    tree = cKDTree(Y)
    approx, _ = tree.query(X, k=1, workers=_workers())
    # only rows that could hold the maximum need an exact recomputation
    top = approx.max()
    rows = np.flatnonzero(approx >= top * (1.0 - 1e-9) - 1e-300)
    exact = _min_dists_tree(X[rows], Y, tree)
    j = int(np.argmax(exact))
    return float(exact[j]), int(rows[j])


def hausdorff(b, c, method="auto"):
    """Hausdorff distance between two finite clouds of the same space."""
    return max(directed_hausdorff(b, c, method)[0], directed_hausdorff(c, b, method)[0])


def min_distance(b, c):
    """``min`` over all pairs; the distance between the closest points of two clouds."""
    _check_same(b, c)
    X, Y = b.coords, c.coords
    if len(X) * len(Y) <= _BRUTE_LIMIT:
        return float(_min_dists_brute(X, Y).min())
    return float(_min_dists_tree(X, Y).min())


def diameter(c):
    """Largest pairwise distance in the cloud."""
    X = c.coords
    best = 0.0
    for start in range(0, len(X), _CHUNK):
        blk = X[start:start + _CHUNK]
        d0 = blk[:, None, 0] - X[None, :, 0]
        d1 = blk[:, None, 1] - X[None, :, 1]
        acc = d0 * d0 + d1 * d1
        if X.shape[1] == 3:
            d2 = blk[:, None, 2] - X[None, :, 2]
            acc = acc + d2 * d2
        best = max(best, float(np.sqrt(acc.max())))
    return best


def prune_slack(space, delta):
    """Hausdorff bound between a cloud and its pruned version."""
    return delta * math.sqrt(2.0) if space == "plane" else delta


def prune(b, delta):
    """Keep the first point seen in each grid cell.

    Plane cells are ``delta`` squares (diameter ``delta*sqrt(2)``).  Sphere
    cells are cubes of side ``delta/sqrt(3)`` in the unit-sphere embedding, so
    their chordal diameter is ``delta``.  The result is ordered by cell index.
    """
    if not delta > 0:
        raise InvalidInput(f"delta must be positive, got {delta}")
    if b.space == "plane":
        keys = np.floor(b.points / delta)
    else:
        keys = np.floor(b.coords / (delta / math.sqrt(3.0)))
    keys = keys.astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return PointCloud(b.points[first], b.space, delta)
