import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from obscon import (
    HRep,
    UnboundedPolytopeError,
    VRep,
    h_to_v,
    simplex_product_extreme_points,
    v_to_h,
)

from oracles import facet_witness_beyond, in_hull


def rational_points(rng, n, dim, denom=12, spread=6):
    return [
        tuple(Fraction(rng.randint(-spread * denom, spread * denom), denom) for _ in range(dim))
        for _ in range(n)
    ]


def random_vrep(rng, max_dim=6, max_points=30):
    dim = rng.randint(1, max_dim)
    cap = {1: max_points, 2: max_points, 3: max_points, 4: 18, 5: 12, 6: 10}[dim]
    n = rng.randint(1, min(cap, max_points))
    return VRep.make(rational_points(rng, n, dim))


def extreme_points_oracle(points):
    """A point is extreme iff it is outside the hull of the others."""
    out = []
    unique = sorted(set(points))
    for i, p in enumerate(unique):
        others = [q for j, q in enumerate(unique) if j != i]
        if not others or not in_hull(p, others):
            out.append(p)
    return sorted(out)


def satisfies(h, point, strict_rows=()):
    for coeffs, rhs in h.eq:
        if sum(c * x for c, x in zip(coeffs, point)) != rhs:
            return False
    for coeffs, rhs in h.ineq:
        if sum(c * x for c, x in zip(coeffs, point)) > rhs:
            return False
    return True


def test_unit_segment():
    h = v_to_h(VRep.make([(0,), (1,)]))
    assert h.eq == ()
    assert set(h.ineq) == {((-1,), 0), ((1,), 1)}


def test_single_point():
    h = v_to_h(VRep.make([(Fraction(1, 2), Fraction(-3))]))
    assert h.ineq == ()
    assert set(h.eq) == {((-2,), -1), ((0, -1), 3)} or len(h.eq) == 2
    v = h_to_v(h)
    assert v.points == ((Fraction(1, 2), Fraction(-3)),)


def test_cube_h_to_v():
    ineq = []
    for i in range(3):
        row = [0, 0, 0]
        row[i] = 1
        ineq.append((tuple(row), 1))
        row = [0, 0, 0]
        row[i] = -1
        ineq.append((tuple(row), 0))
    h = HRep.from_rows(ineq, [])
    v = h_to_v(h)
    assert len(v.points) == 8
    assert all(all(x in (0, 1) for x in p) for p in v.points)


def test_simplex_h_to_v():
    ineq = [(tuple(-1 if j == i else 0 for j in range(4)), 0) for i in range(4)]
    eq = [((1, 1, 1, 1), 1)]
    v = h_to_v(HRep.from_rows(ineq, eq))
    assert sorted(v.points) == sorted(
        tuple(Fraction(1 if j == i else 0) for j in range(4)) for i in range(4)
    )


def test_h_to_v_unbounded_detected():
    h = HRep.from_rows([((-1, 0), 0), ((0, -1), 0)], [])
    with pytest.raises(UnboundedPolytopeError):
        h_to_v(h)


def test_h_to_v_line_detected():
    h = HRep.from_rows([((1, 0), 1), ((-1, 0), 0)], [])
    with pytest.raises(UnboundedPolytopeError):
        h_to_v(h)


def test_h_to_v_empty_detected():
    h = HRep.from_rows([((1,), 0), ((-1,), -1)], [])
    with pytest.raises(ValueError):
        h_to_v(h)


def test_simplex_product_4_4():
    points = simplex_product_extreme_points([4, 4])
    assert len(points) == 16
    expected_first_rows = [
        (1, 0, 0, 0, 1, 0, 0, 0),
        (0, 1, 0, 0, 1, 0, 0, 0),
        (0, 0, 1, 0, 1, 0, 0, 0),
        (0, 0, 0, 1, 1, 0, 0, 0),
        (1, 0, 0, 0, 0, 1, 0, 0),
    ]
    for got, want in zip(points, expected_first_rows):
        assert got == tuple(Fraction(v) for v in want)


def test_simplex_product_single_block():
    assert simplex_product_extreme_points([2]) == [
        (Fraction(1), Fraction(0)),
        (Fraction(0), Fraction(1)),
    ]


def test_simplex_product_counts():
    points = simplex_product_extreme_points([2, 3])
    assert len(points) == 6
    for p in points:
        assert sum(1 for x in p if x == 1) == 2
        assert sum(p) == 2


def test_v_to_h_every_input_point_feasible():
    rng = random.Random(101)
    for _ in range(25):
        v = random_vrep(rng, max_dim=4, max_points=12)
        h = v_to_h(v)
        for p in v.points:
            assert satisfies(h, p)


def test_v_to_h_rejects_outside_points():
    rng = random.Random(55)
    for _ in range(10):
        v = random_vrep(rng, max_dim=3, max_points=8)
        h = v_to_h(v)
        for _ in range(10):
            candidate = tuple(
                Fraction(rng.randint(-100, 100), 7) for _ in range(v.dim)
            )
            inside_h = satisfies(h, candidate)
            inside_hull = in_hull(candidate, list(v.points))
            assert inside_h == inside_hull


def test_round_trip_small():
    rng = random.Random(2)
    for _ in range(40):
        v = random_vrep(rng, max_dim=4, max_points=14)
        h = v_to_h(v)
        back = sorted(h_to_v(h).points)
        assert back == extreme_points_oracle(v.points)


def test_irredundancy_small():
    rng = random.Random(momentum := 13)
    for _ in range(15):
        v = random_vrep(rng, max_dim=3, max_points=10)
        h = v_to_h(v)
        vertices = h_to_v(h).points
        for index in range(len(h.ineq)):
            witness = facet_witness_beyond(h, index, vertices)
            assert witness is not None
            coeffs, rhs = h.ineq[index]
            assert sum(c * x for c, x in zip(coeffs, witness)) > rhs
            others = HRep(
                ineq=tuple(r for j, r in enumerate(h.ineq) if j != index),
                eq=h.eq,
            )
            assert satisfies(others, witness)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=30, deadline=None)
def test_canonicalization_permutation_insensitive(seed):
    rng = random.Random(seed)
    v = random_vrep(rng, max_dim=3, max_points=8)
    h1 = v_to_h(v)
    shuffled = list(v.points)
    rng.shuffle(shuffled)
    h2 = v_to_h(VRep(tuple(shuffled)))
    assert h1 == h2


def test_duplicate_points_ignored():
    v1 = VRep.make([(0, 0), (1, 0), (0, 1)])
    v2 = VRep.make([(0, 0), (1, 0), (0, 1), (1, 0), (0, 0)])
    assert v_to_h(v1) == v_to_h(v2)


def test_interior_points_ignored():
    square = [(0, 0), (2, 0), (0, 2), (2, 2)]
    with_interior = square + [(1, 1), (Fraction(1, 2), Fraction(1, 2))]
    assert v_to_h(VRep.make(square)) == v_to_h(VRep.make(with_interior))


def test_iv_round_trip(graphs):
    from obscon import build_functional_system

    dag = graphs["iv"]
    fs = build_functional_system(dag, dag.districts()[1])
    points = tuple(fs.columns_as_points())
    v = h_to_v(v_to_h(VRep(points)))
    assert sorted(v.points) == sorted(set(points))


def test_cdd_format_smoke():
    h = v_to_h(VRep.make([(0,), (1,)]))
    text = h.to_cdd()
    assert "H-representation" in text and "begin" in text and "end" in text
