"""Chaos game orbits and the diagnostics built on them.

An orbit is ``x_k = f_{s_k}(x_{k-1})``, so ``x_k = f_{s_k} o ... o f_{s_1}(x_0)``.
The tail ``{x_K, ..., x_Kmax}`` stands in for the closure of the infinite
tail; the limit set is approximated by taking ``K`` large.  Both truncations
are exposed so callers control the error.

Fibres are estimated as ``f_{r_1} o ... o f_{r_K}(A_ref)`` for a trusted
attractor approximation ``A_ref``.  Small fibre diameters at a fixed depth
are evidence that the attractor is point-fibred, not a proof.
"""

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, OrbitEscape
from .hyperspace import (
    INF,
    PointCloud,
    as_point,
    diameter,
    directed_hausdorff,
    dist_point_cloud,
    hausdorff,
    min_distance,
    point_distance,
    prune,
)
from .ifs_core import (
    apply_word,
    apply_word_cloud,
    check_word,
    dual_ifs,
    hutchinson,
    iterate_hutchinson,
)

ESCAPE_RADIUS = 1e9


@dataclass(frozen=True, eq=False)
class Orbit:
    ifs: object
    x0: object
    symbols: np.ndarray
    points: np.ndarray

    def __len__(self):
        return len(self.points)

    @property
    def space(self):
        return self.ifs.space

    @property
    def kmax(self):
        return len(self.symbols)

    def point(self, k):
        p = self.points[k]
        return (float(p[0]), float(p[1])) if self.space == "plane" else complex(p)


def run_orbit(f, x0, stream, kmax, escape_radius=ESCAPE_RADIUS):
    """Run ``kmax`` steps of the chaos game, recording the consumed symbols.

    Planar orbits that leave the disc of radius ``escape_radius`` raise
    :class:`OrbitEscape` carrying the first offending index.
    """
    if kmax < 1:
        raise InvalidInput("kmax must be >= 1")
    if stream.alphabet_size > f.n:
        raise InvalidInput(f"stream alphabet 1..{stream.alphabet_size} exceeds the {f.n} maps")
    x = as_point(x0, f.space)
    syms = stream.take(kmax)
    maps = f.maps
    if f.space == "plane":
        pts = np.empty((kmax + 1, 2))
        pts[0] = x
        r2 = escape_radius * escape_radius
        coeffs = [(m.matrix, m.translation) for m in maps]
        px, py = x
        for k, s in enumerate(syms.tolist(), 1):
            (a, b, c, d), (e, g) = coeffs[s - 1]
            px, py = a * px + b * py + e, c * px + d * py + g
            if not px * px + py * py <= r2:
                raise OrbitEscape(k, (px, py), escape_radius)
            pts[k, 0] = px
            pts[k, 1] = py
    else:
        out = [x]
        z = x
        for s in syms.tolist():
            z = maps[s - 1](z)
            out.append(z)
        pts = np.array(out, dtype=complex)
    return Orbit(f, x, syms, pts)


def verify_orbit(o):
    """Re-derive every point from its predecessor; exact comparison."""
    for k in range(1, len(o.points)):
        prev = o.point(k - 1)
        nxt = o.ifs.map(int(o.symbols[k - 1]))(prev)
        if nxt != o.point(k):
            return False
    return True


@dataclass(frozen=True, eq=False)
class TailEstimate:
    K: int
    Kmax: int
    cloud: PointCloud


def tail_points(o, K):
    if not 0 <= K < len(o.points):
        raise InvalidInput(f"K={K} outside 0..{len(o.points) - 1}")
    return PointCloud(o.points[K:], o.space)


def tail_estimate(o, K, delta):
    """Pruned ``{x_K, ..., x_Kmax}``."""
    return TailEstimate(K, o.kmax, prune(tail_points(o, K), delta))


def convergence_profile(o, a_ref, Ks, delta):
    """``[(K, h(tail_K, a_ref)) for K in Ks]``."""
    return [(K, hausdorff(tail_estimate(o, K, delta).cloud, a_ref)) for K in Ks]


@dataclass(frozen=True, eq=False)
class FibreEstimate:
    address_prefix: tuple
    cloud: PointCloud
    diameter: float


def fibre_estimate(f, a_ref, rho_prefix, delta):
    """``f_{rho_1} o ... o f_{rho_K}(a_ref)`` pruned at ``delta``, with its diameter."""
    rho = check_word(rho_prefix, f.n)
    if not rho:
        raise InvalidInput("address prefix must be nonempty")
    cloud = prune(apply_word_cloud(f, rho, a_ref), delta)
    return FibreEstimate(rho, cloud, diameter(cloud))


def max_fibre_diameter(f, a_ref, depth, delta, samples=20, seed=0):
    """Largest fibre diameter over random addresses of a fixed depth.

    Point-fibred evidence only: small values are consistent with singleton
    fibres but do not prove the attractor strongly-fibred.
    """
    rng = np.random.default_rng(seed)
    return max(
        fibre_estimate(f, a_ref, tuple(rng.integers(1, f.n + 1, size=depth).tolist()), delta).diameter
        for _ in range(samples)
    )


@dataclass(frozen=True)
class IntersectionResult:
    meets: bool
    min_distance: float

    def __bool__(self):
        return self.meets


def fibre_intersection_check(tail, fib, eps):
    """Whether some tail point is within ``eps`` of some fibre point."""
    d = min_distance(tail.cloud, fib.cloud)
    return IntersectionResult(d <= eps, d)


def forward_invariance_check(tail, f, eps):
    """Every tail point lies within ``eps`` of ``F(tail)``."""
    d, _ = directed_hausdorff(tail.cloud, hutchinson(f, tail.cloud))
    return d <= eps


def wandering_search(f, x0, y, eps, max_depth, beam=256):
    """Look for a symbol history whose orbit from ``x0`` lands within ``eps`` of ``y``.

    Returns ``(s_1, ..., s_m)`` with ``x_m = f_{s_m} o ... o f_{s_1}(x0)`` and
    ``d(x_m, y) < eps``, or ``None``.  Level-by-level beam search keeping the
    ``beam`` endpoints closest to ``y``; exhaustive while ``N**depth <= beam``.
    ``None`` is inconclusive.
    """
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    x0 = as_point(x0, f.space)
    y = as_point(y, f.space)
    frontier = [((), x0)]
    for _ in range(max_depth):
        scored = []
        for hist, x in frontier:
            for s in range(1, f.n + 1):
                z = f.maps[s - 1](x)
                scored.append((point_distance(z, y), hist + (s,), z))
        hit = [c for c in scored if c[0] < eps]
        if hit:
            return min(hit, key=lambda c: (c[0], len(c[1]), c[1]))[1]
        best = heapq.nsmallest(beam, scored, key=lambda c: (c[0], c[1]))
        frontier = [(h, z) for _, h, z in best]
    return None


def address_point(f, address, base):
    """``f_{a_1} o ... o f_{a_d}(base)``: estimate of the point with this address."""
    return apply_word(f, address, base)


def shift_commutation_check(f, address, depth, tol, base=None, dual=False):
    """Check ``pi(S a) = f_{a_1}^{-1}(pi(a))`` (or its dual form) at finite depth.

    ``pi`` is estimated by composing ``depth`` maps of the address applied to
    ``base``.  With ``dual=True`` the addresses are read in the dual IFS and
    the identity checked is ``pi*(S a) = f_{a_1}(pi*(a))``.
    """
    address = check_word(address, f.n)
    if len(address) < depth + 1:
        raise InvalidInput(f"address must have length >= depth + 1 = {depth + 1}")
    if base is None:
        # must lie in the basin: off the repeller for F, off the attractor for F*
        base = (0.0, 0.0) if f.space == "plane" else (1j if dual else 0j)
    g = dual_ifs(f) if dual else f
    head = address[0]
    lhs = address_point(g, address[1:depth + 1], base)
    rhs_inner = address_point(g, address[:depth], base)
    back = f.map(head) if dual else f.map(head).inverse()
    rhs = back(rhs_inner)
    return point_distance(lhs, rhs) <= tol


def is_common_fixed_point(f, x, tol=1e-12):
    x = as_point(x, f.space)
    return all(point_distance(m(x), x) <= tol for m in f.maps)


def attractor_repeller_pair(f, k, delta, seed_a, seed_dual):
    """``(A, A*)`` approximated by Hutchinson iteration of ``f`` and of its dual."""
    a = iterate_hutchinson(f, PointCloud.of([seed_a], f.space), k, delta)
    a_star = iterate_hutchinson(dual_ifs(f), PointCloud.of([seed_dual], f.space), k, delta)
    return a, a_star


@dataclass
class RapunzelReport:
    escape_index: int | None
    final_h_primal: float
    final_h_dual: float
    exceptional: bool
    profile_primal: list = field(default_factory=list)
    profile_dual: list = field(default_factory=list)

    def passed(self, threshold):
        return self.exceptional or (self.final_h_primal <= threshold and self.final_h_dual <= threshold)

    def to_text(self):
        def num(v):
            return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.9g}"

        lines = [
            f"escape_index: {'none' if self.escape_index is None else self.escape_index}",
            f"final_h_primal: {num(self.final_h_primal)}",
            f"final_h_dual: {num(self.final_h_dual)}",
            f"exceptional: {'true' if self.exceptional else 'false'}",
        ]
        lines += [f"profile_primal: {K},{num(h)}" for K, h in self.profile_primal]
        lines += [f"profile_dual: {K},{num(h)}" for K, h in self.profile_dual]
        return "\n".join(lines) + "\n"


def rapunzel_experiment(f, x0, stream_factory, kmax, Ks, delta, a_ref, a_star_ref,
                        dual_x0=None, escape_threshold=0.05):
    """Run the chaos game of ``f`` and of its dual on the same symbol sequence.

    ``stream_factory()`` must return a fresh stream each call so both runs
    see identical symbols.  The escape index is the first ``k`` with
    ``d(x_k, A*) > escape_threshold``.  A starting point fixed by every map
    is flagged exceptional and no orbit is run from it.
    """
    dual_x0 = x0 if dual_x0 is None else dual_x0
    g = dual_ifs(f)
    if is_common_fixed_point(f, x0):
        return RapunzelReport(None, math.nan, math.nan, True)

    primal = run_orbit(f, x0, stream_factory(), kmax)
    escape = None
    for k in range(len(primal.points)):
        if dist_point_cloud(primal.point(k), a_star_ref) > escape_threshold:
            escape = k
            break
    prof_p = convergence_profile(primal, a_ref, Ks, delta)

    if is_common_fixed_point(g, dual_x0):
        return RapunzelReport(escape, prof_p[-1][1], math.nan, True, prof_p)
    dual = run_orbit(g, dual_x0, stream_factory(), kmax)
    prof_d = convergence_profile(dual, a_star_ref, Ks, delta)
    return RapunzelReport(escape, prof_p[-1][1], prof_d[-1][1], False, prof_p, prof_d)


# Gap oracle for non-disjunctive streams on midpoint IFSs


def forbidden_gap(f, vertex_symbol, vertices, depth, forbidden=(2, 2)):
    """Lower bound on ``d(v, x)`` over points ``x`` in ``f_w(T)``, ``w`` of length ``depth`` avoiding ``forbidden``.

    ``T`` is the convex hull of ``vertices`` and ``v = vertices[vertex_symbol - 1]``.
    Enumerates every admissible word, evaluates ``f_w`` at the hull
    vertices, and subtracts the diameter of ``f_w(T)`` (``2**-depth`` times
    the hull diameter for midpoint maps).  Brute force, independent of the
    orbit code.  Returns ``(gap, number_of_words)``.
    """
    first, second = forbidden
    v = np.asarray(vertices[vertex_symbol - 1], dtype=float)
    hull = np.asarray(vertices, dtype=float)
    hull_diam = max(math.dist(p, q) for p, q in itertools.combinations(hull.tolist(), 2))
    # words grow by prepending: f_{(s, *w)} = f_s o f_w; only the leading symbol matters
    lead = np.arange(1, f.n + 1)
    pts = np.stack([f.maps[s - 1].apply_many(hull) for s in lead.tolist()])
    for _ in range(depth - 1):
        new_lead, new_pts = [], []
        for s in range(1, f.n + 1):
            keep = ~((s == first) & (lead == second))
            block = pts[keep]
            moved = f.maps[s - 1].apply_many(block.reshape(-1, 2)).reshape(block.shape)
            new_pts.append(moved)
            new_lead.append(np.full(len(block), s))
        lead = np.concatenate(new_lead)
        pts = np.concatenate(new_pts)
    d = np.sqrt(((pts - v) ** 2).sum(axis=-1)).min()
    return float(d) - hull_diam * 2.0**-depth, len(lead)
