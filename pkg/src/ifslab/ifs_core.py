"""Maps, iterated function systems and the Hutchinson operator.

Symbols are 1-based: symbol ``s`` selects ``ifs.maps[s - 1]``.  A word
``w = (s1, ..., sk)`` acts as ``f_w = f_s1 o ... o f_sk``, so the leftmost
symbol is applied last.  Orbit code that wants ``x_k`` from a symbol history
has to pass the history reversed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, InvalidInput
from .hyperspace import INF, PointCloud, as_point, is_inf, prune

DET_TOL = 1e-12
DEFAULT_POINT_BUDGET = 5_000_000


@dataclass(frozen=True)
class Affine2D:
    """``p -> M p + t`` with ``M = [[a, b], [c, d]]`` and ``t = (e, f)``.

    Invertibility is only checked when an inverse is requested.
    """

    matrix: tuple
    translation: tuple = (0.0, 0.0)
    kind = "affine2d"
    space = "plane"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(-1)
        t = np.asarray(self.translation, dtype=float).reshape(-1)
        if m.size != 4 or t.size != 2:
            raise InvalidInput("affine2d needs a 2x2 matrix and a 2-vector translation")
        if not (np.isfinite(m).all() and np.isfinite(t).all()):
            raise InvalidInput("affine2d coefficients must be finite")
        object.__setattr__(self, "matrix", tuple(float(v) for v in m))
        object.__setattr__(self, "translation", tuple(float(v) for v in t))

    @property
    def det(self):
        a, b, c, d = self.matrix
        return a * d - b * c

    def __call__(self, p):
        a, b, c, d = self.matrix
        e, f = self.translation
        x, y = p
        return (a * x + b * y + e, c * x + d * y + f)

    def apply_many(self, pts):
        a, b, c, d = self.matrix
        e, f = self.translation
        x, y = pts[:, 0], pts[:, 1]
        return np.column_stack((a * x + b * y + e, c * x + d * y + f))

    def inverse(self):
        det = self.det
        if abs(det) <= DET_TOL:
            raise InvalidInput(f"affine map is not invertible (|det| = {abs(det):.3g})")
        a, b, c, d = self.matrix
        e, f = self.translation
        ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
        return Affine2D((ia, ib, ic, id_), (-(ia * e + ib * f), -(ic * e + id_ * f)))

    def lipschitz(self):
        """Operator 2-norm of the linear part."""
        return float(np.linalg.norm(np.reshape(self.matrix, (2, 2)), 2))


def _mobius_scalar(a, b, c, d, z):
    if is_inf(z):
        return INF if c == 0 else _finite_or_inf(a / c)
    if abs(z) > 1.0:
        w = 1.0 / z
        num, den = a + b * w, c + d * w
    else:
        num, den = a * z + b, c * z + d
    if den == 0:
        return INF
    try:
        return _finite_or_inf(num / den)
    except OverflowError:
        return INF


def _finite_or_inf(z):
    if is_inf(z) or math.isnan(z.real) or math.isnan(z.imag):
        return INF
    return z


@dataclass(frozen=True)
class Mobius:
    """``z -> (a z + b) / (c z + d)`` on the Riemann sphere.

    Poles go to ``INF``; ``INF`` goes to ``a/c``, or stays at ``INF`` when
    ``c == 0``.  For ``|z| > 1`` the map is evaluated as
    ``(a + b/z) / (c + d/z)`` to keep large moduli finite.
    """

    matrix: tuple
    kind = "mobius"
    space = "sphere"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex).reshape(-1)
        if m.size != 4 or not np.isfinite(m).all():
            raise InvalidInput("mobius needs four finite complex coefficients")
        m = tuple(complex(v) for v in m)
        object.__setattr__(self, "matrix", m)
        if abs(self.det) <= DET_TOL:
            raise InvalidInput(f"mobius matrix is singular (|det| = {abs(self.det):.3g})")

    @property
    def det(self):
        a, b, c, d = self.matrix
        return a * d - b * c

    def __call__(self, z):
        return _mobius_scalar(*self.matrix, z)

    def apply_many(self, z):
        a, b, c, d = self.matrix
        z = np.asarray(z, dtype=complex)
        out = np.empty_like(z)
        inf = np.isinf(z.real) | np.isinf(z.imag)
        big = ~inf & (np.abs(z) > 1.0)
        small = ~inf & ~big
        num = np.empty_like(z)
        den = np.empty_like(z)
        with np.errstate(all="ignore"):
            w = 1.0 / z[big]
            num[big], den[big] = a + b * w, c + d * w
            num[small], den[small] = a * z[small] + b, c * z[small] + d
            fin = ~inf
            zero = fin & (den == 0)
            ok = fin & ~zero
            out[ok] = num[ok] / den[ok]
        out[zero] = INF
        out[inf] = INF if c == 0 else _finite_or_inf(a / c)
        bad = np.isinf(out.real) | np.isinf(out.imag) | np.isnan(out.real) | np.isnan(out.imag)
        out[bad] = INF
        return out

    def inverse(self):
        a, b, c, d = self.matrix
        return Mobius((d, -b, -c, a))

    def derivative(self, z):
        """Ordinary complex derivative ``det / (c z + d)^2`` at a finite ``z``."""
        a, b, c, d = self.matrix
        return self.det / (c * z + d) ** 2

    def fixed_points(self):
        """Fixed points in the extended plane (``INF`` included when ``c == 0``)."""
        a, b, c, d = self.matrix
        if c == 0:
            if a == d:
                return [INF]
            return [-b / (a - d), INF]
        disc = np.sqrt(complex((a - d) ** 2 + 4 * b * c))
        return [((a - d) + disc) / (2 * c), ((a - d) - disc) / (2 * c)]


def make_map(kind, matrix, translation=None):
    if kind == "affine2d":
        return Affine2D(matrix, (0.0, 0.0) if translation is None else translation)
    if kind == "mobius":
        return Mobius(matrix)
    raise InvalidInput(f"unknown map kind {kind!r}")


@dataclass(frozen=True)
class Ifs:
    """Finite ordered list of maps over one space; symbols ``1..N`` index ``maps``."""

    space: str
    maps: tuple

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise InvalidInput("an IFS needs at least one map")
        for i, m in enumerate(maps, 1):
            if m.space != self.space:
                raise InvalidInput(f"map {i} is {m.kind}, which does not act on the {self.space}")
        object.__setattr__(self, "maps", maps)

    @property
    def n(self):
        return len(self.maps)

    def __len__(self):
        return len(self.maps)

    def map(self, symbol):
        if not (isinstance(symbol, (int, np.integer)) and 1 <= symbol <= self.n):
            raise InvalidInput(f"symbol {symbol!r} outside 1..{self.n}")
        return self.maps[int(symbol) - 1]


def apply_map(m, p):
    """Evaluate one map at one point; the point must be of the map's kind."""
    return m(as_point(p, m.space))


def check_word(w, n):
    w = tuple(int(s) for s in w)
    for i, s in enumerate(w, 1):
        if not 1 <= s <= n:
            raise InvalidInput(f"symbol {s} at position {i} outside 1..{n}")
    return w


def apply_word(f, w, p):
    """``f_w(p)`` with ``w[0]`` outermost."""
    w = check_word(w, f.n)
    p = as_point(p, f.space)
    for s in reversed(w):
        p = f.maps[s - 1](p)
    return p


def apply_word_cloud(f, w, cloud):
    """``f_w`` applied to every point of a cloud (no pruning)."""
    w = check_word(w, f.n)
    pts = cloud.points
    for s in reversed(w):
        pts = f.maps[s - 1].apply_many(pts)
    return PointCloud(pts, cloud.space)


def dual_ifs(f):
    """The IFS of inverse maps, same symbol order."""
    return Ifs(f.space, tuple(m.inverse() for m in f.maps))


def hutchinson(f, b):
    """``F(B)``: every map applied to every point, map-major order, unpruned."""
    if b.space != f.space:
        raise InvalidInput(f"cloud lives on the {b.space}, IFS on the {f.space}")
    parts = [m.apply_many(b.points) for m in f.maps]
    return PointCloud(np.concatenate(parts), f.space)


def iterate_hutchinson(f, seed, k, delta, budget=DEFAULT_POINT_BUDGET):
    """``k`` Hutchinson steps from ``seed``, pruning to the ``delta`` grid after each.

    Each pruning moves the cloud by at most :func:`~ifslab.hyperspace.prune_slack`;
    for an IFS with contraction factor ``L < 1`` the accumulated deviation from
    the exact ``F^k(seed)`` is bounded by ``slack / (1 - L)``.
    """
    if k < 1:
        raise InvalidInput("k must be at least 1")
    if not delta > 0:
        raise InvalidInput("delta must be positive")
    cloud = seed
    for step in range(k):
        size = f.n * len(cloud)
        if size > budget:
            raise BudgetExceeded(
                f"Hutchinson step {step + 1} would create {size} points, over the point budget {budget}",
                budget,
            )
        cloud = prune(hutchinson(f, cloud), delta)
    return cloud


# Built-in systems


SQRT3_2 = math.sqrt(3.0) / 2.0
SIERPINSKI_VERTICES = ((0.0, 0.0), (1.0, 0.0), (0.5, SQRT3_2))


def midpoint_ifs(vertices):
    """Maps ``x -> (x + v)/2`` for each vertex ``v``."""
    return Ifs("plane", tuple(Affine2D((0.5, 0.0, 0.0, 0.5), (0.5 * vx, 0.5 * vy)) for vx, vy in vertices))


def sierpinski():
    return midpoint_ifs(SIERPINSKI_VERTICES)


def mobius_pair():
    """``{z/2, (3z+1)/(z+3)}``: attractor [0, 1], dual repeller the real ray through INF down to -1."""
    return Ifs("sphere", (Mobius((1, 0, 0, 2)), Mobius((3, 1, 1, 3))))


def halving_pair():
    """``{z/2, (z+1)/2}`` on the sphere; both maps fix INF."""
    return Ifs("sphere", (Mobius((1, 0, 0, 2)), Mobius((1, 1, 0, 2))))
