import itertools
import math

import numpy as np
import pytest

from ifslab.chaosgame import (
    address_point,
    convergence_profile,
    fibre_estimate,
    fibre_intersection_check,
    forbidden_gap,
    forward_invariance_check,
    is_common_fixed_point,
    max_fibre_diameter,
    rapunzel_experiment,
    run_orbit,
    shift_commutation_check,
    tail_estimate,
    tail_points,
    verify_orbit,
    wandering_search,
)
from ifslab.errors import InvalidInput, OrbitEscape
from ifslab.hyperspace import INF, PointCloud, point_distance
from ifslab.ifs_core import (
    SIERPINSKI_VERTICES,
    Affine2D,
    Ifs,
    halving_pair,
    iterate_hutchinson,
    mobius_pair,
    sierpinski,
)
from ifslab.symbols import champernowne_stream, periodic_stream


@pytest.fixture(scope="module")
def sier_ref():
    return iterate_hutchinson(sierpinski(), PointCloud.of([(0.0, 0.0)], "plane"), 10, 0.005)


def test_orbit_recurrence_exact():
    o = run_orbit(sierpinski(), (0.3, 0.2), champernowne_stream(3), 500)
    assert len(o) == 501 and o.kmax == 500
    assert verify_orbit(o)
    s = mobius_pair()
    assert verify_orbit(run_orbit(s, -1 + 0j, champernowne_stream(2), 300))


def test_orbit_uses_history_order():
    f = sierpinski()
    o = run_orbit(f, (0.0, 0.0), periodic_stream([2, 3]), 2)
    assert o.point(2) == f.maps[2](f.maps[1]((0.0, 0.0)))


def test_orbit_escape():
    f = Ifs("plane", (Affine2D((2, 0, 0, 2), (1, 0)),))
    with pytest.raises(OrbitEscape) as exc:
        run_orbit(f, (1.0, 0.0), periodic_stream([1]), 100, escape_radius=1e3)
    assert exc.value.index == 9


def test_stream_alphabet_checked():
    with pytest.raises(InvalidInput):
        run_orbit(mobius_pair(), 0j, champernowne_stream(3), 10)


def test_tails_and_profile(sier_ref):
    o = run_orbit(sierpinski(), (0.0, 0.0), champernowne_stream(3), 20000)
    assert len(tail_points(o, 19990)) == 11
    t = tail_estimate(o, 100, 0.005)
    assert t.K == 100 and t.Kmax == 20000
    prof = convergence_profile(o, sier_ref, [100, 1000], 0.005)
    assert [K for K, _ in prof] == [100, 1000]
    assert all(h < 0.03 for _, h in prof)
    assert forward_invariance_check(t, sierpinski(), 0.02)
    with pytest.raises(InvalidInput):
        tail_points(o, 20001)


def test_fibres_shrink(sier_ref):
    f = sierpinski()
    wide = fibre_estimate(f, sier_ref, (1,), 0.005)
    assert 0.45 < wide.diameter <= 0.5 + 1e-9
    assert max_fibre_diameter(f, sier_ref, 8, 0.001) <= 2.0**-8 + 0.003


def test_fibre_intersection(sier_ref):
    f = sierpinski()
    o = run_orbit(f, (0.0, 0.0), champernowne_stream(3), 20000)
    t = tail_estimate(o, 1000, 0.005)
    res = fibre_intersection_check(t, fibre_estimate(f, sier_ref, (3, 1, 2, 2), 0.005), 0.02)
    assert res and res.min_distance <= 0.02
    # a periodic tail stuck near vertex 1 misses a fibre at vertex 3
    stuck = tail_estimate(run_orbit(f, (0.0, 0.0), periodic_stream([1]), 100), 50, 0.005)
    res = fibre_intersection_check(stuck, fibre_estimate(f, sier_ref, (3,) * 6, 0.005), 0.02)
    assert not res


def test_wandering_search():
    f = sierpinski()
    hist = wandering_search(f, (0.0, 0.0), (1.0, 0.0), 0.01, 10)
    assert hist is not None
    x = (0.0, 0.0)
    for s in hist:
        x = f.maps[s - 1](x)
    assert point_distance(x, (1.0, 0.0)) < 0.01
    assert wandering_search(f, (0.0, 0.0), (5.0, 5.0), 0.01, 4) is None


def test_shift_commutation():
    rng = np.random.default_rng(0)
    a = tuple(rng.integers(1, 4, 41).tolist())
    assert shift_commutation_check(sierpinski(), a, 40, 1e-6)
    b = tuple(rng.integers(1, 3, 41).tolist())
    assert shift_commutation_check(mobius_pair(), b, 40, 1e-6)
    assert shift_commutation_check(mobius_pair(), b, 40, 1e-5, dual=True)
    # the address point of a constant word is the map's fixed point
    assert point_distance(address_point(sierpinski(), (2,) * 50, (0.0, 0.0)), (1.0, 0.0)) < 1e-12


def test_common_fixed_point():
    assert is_common_fixed_point(halving_pair(), INF)
    assert not is_common_fixed_point(mobius_pair(), INF)


def test_rapunzel_exceptional_start():
    f = halving_pair()
    ref = PointCloud.of([0j], "sphere")
    r = rapunzel_experiment(f, INF, lambda: champernowne_stream(2), 100, [10], 0.01, ref, ref)
    assert r.exceptional and r.passed(0.05)
    assert "exceptional: true" in r.to_text()


def brute_gap(vertex, depth, forbidden=(2, 2)):
    # independent oracle: recursion on Python tuples, cells as explicit triangles
    verts = [complex(*v) for v in SIERPINSKI_VERTICES]
    v = verts[vertex - 1]
    best = math.inf
    for w in itertools.product((1, 2, 3), repeat=depth):
        if any(w[i:i + 2] == forbidden for i in range(depth - 1)):
            continue
        corners = []
        for c in verts:
            z = c
            for s in reversed(w):
                z = (z + verts[s - 1]) / 2
            corners.append(z)
        best = min(best, min(abs(z - v) for z in corners))
    return best - 2.0**-depth


def test_forbidden_gap_matches_brute():
    for depth in (3, 5, 7):
        gap, count = forbidden_gap(sierpinski(), 2, SIERPINSKI_VERTICES, depth)
        assert abs(gap - brute_gap(2, depth)) < 1e-12
    # words of length d over 3 symbols avoiding "22": a(d) = 2 a(d-1) + 2 a(d-2)
    a = [1, 3]
    for _ in range(6):
        a.append(2 * a[-1] + 2 * a[-2])
    assert forbidden_gap(sierpinski(), 2, SIERPINSKI_VERTICES, 7)[1] == a[7]
