import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from obscon import d_separated, enumerate_ci, parse_graph

from oracles import path_d_separated, random_dag


def all_subsets(pool, cap=None):
    cap = len(pool) if cap is None else cap
    for size in range(cap + 1):
        yield from combinations(pool, size)


def test_d_separated_iv_open_path(graphs):
    assert not d_separated(graphs["iv"], {"Z"}, {"Y"}, set())


def test_d_separated_sequential(graphs):
    assert d_separated(graphs["iv_sequential"], {"V1", "V2"}, {"V4", "V5"}, {"V3"})
    assert not d_separated(graphs["iv_sequential"], {"V1"}, {"V4"}, set())


def test_d_separated_nested_pair(graphs):
    for side in ("nested_pair_left", "nested_pair_right"):
        assert d_separated(graphs[side], {"V1"}, {"V3"}, {"V2"})


def test_d_separated_collider_conditioning(graphs):
    # conditioning on the mediator opens the confounded path in the IV model
    assert not d_separated(graphs["iv"], {"Z"}, {"Y"}, {"X"})


def test_d_separated_rejects_overlap(graphs):
    with pytest.raises(ValueError):
        d_separated(graphs["iv"], {"Z"}, {"Z"}, set())
    with pytest.raises(ValueError):
        d_separated(graphs["iv"], {"Z"}, {"Y"}, {"U"})


@given(st.integers(min_value=0, max_value=100_000))
@settings(max_examples=60, deadline=None)
def test_d_separated_symmetry(seed):
    rng = random.Random(seed)
    dag = random_dag(rng)
    observed = list(dag.observed_names())
    if len(observed) < 2:
        return
    rng.shuffle(observed)
    a, b = observed[0], observed[1]
    rest = observed[2:]
    z = {w for w in rest if rng.random() < 0.4}
    assert d_separated(dag, {a}, {b}, z) == d_separated(dag, {b}, {a}, z)


def test_d_separated_matches_path_oracle_small():
    rng = random.Random(2024)
    checked = 0
    for _ in range(60):
        dag = random_dag(rng)
        observed = dag.observed_names()
        for a, b in combinations(observed, 2):
            rest = [w for w in observed if w not in (a, b)]
            for z in all_subsets(rest):
                got = d_separated(dag, {a}, {b}, set(z))
                want = path_d_separated(dag, {a}, {b}, set(z))
                assert got == want, (dag.to_text(), a, b, z)
                checked += 1
    assert checked > 500


def test_enumerate_ci_bell(graphs):
    statements = enumerate_ci(graphs["bell_tripartite"])
    rendered = {s.render() for s in statements}
    # grouped per variable: the setting X is independent of everything on the
    # other two wings, and symmetrically for Y and Z (canonical orientation
    # puts the side with the smallest variable index on the left)
    assert rendered == {
        "X _||_ Y,Z,V2,V3",
        "X,Z,V1,V3 _||_ Y",
        "X,Y,V1,V2 _||_ Z",
    }


def test_enumerate_ci_complete_dag_empty():
    dag = parse_graph(
        "var A 2\nvar B 2\nvar C 2\nedge A B\nedge A C\nedge B C\n"
    )
    assert enumerate_ci(dag) == []


def test_enumerate_ci_frontdoor_empty(graphs):
    # exhaustive cross-check: no pair is separated by any conditioning set
    dag = graphs["frontdoor"]
    observed = dag.observed_names()
    for a, b in combinations(observed, 2):
        rest = [w for w in observed if w not in (a, b)]
        for z in all_subsets(rest):
            assert not d_separated(dag, {a}, {b}, set(z))
    assert enumerate_ci(dag) == []


def test_enumerate_ci_sequential_merged(graphs):
    statements = enumerate_ci(graphs["iv_sequential"])
    assert [s.render() for s in statements] == ["V1,V2 _||_ V4,V5 | V3"]


def test_enumerate_ci_nested_pair(graphs):
    for side in ("nested_pair_left", "nested_pair_right"):
        statements = enumerate_ci(graphs[side])
        assert [s.render() for s in statements] == ["V1 _||_ V3 | V2"]


def test_enumerate_ci_statements_verify():
    rng = random.Random(77)
    for _ in range(25):
        dag = random_dag(rng)
        for stmt in enumerate_ci(dag):
            assert d_separated(dag, set(stmt.lhs), set(stmt.rhs), set(stmt.given))


def test_enumerate_ci_condition_size_cap(graphs):
    # with no conditioning allowed, the sequential statement disappears
    capped = enumerate_ci(graphs["iv_sequential"], max_condition_size=0)
    assert all(not s.given for s in capped)


def test_ci_canonical_form(graphs):
    for stmt in enumerate_ci(graphs["bell_tripartite"]):
        dag = graphs["bell_tripartite"]
        assert dag.index(stmt.lhs[0]) <= dag.index(stmt.rhs[0])
        assert list(stmt.lhs) == list(dag.sort_observed(stmt.lhs))
