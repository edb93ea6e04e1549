import random

import pytest

from obscon import (
    DeriveOptions,
    derive_all,
    evaluate,
    parse_graph,
    validate_conditions,
)
from obscon.tables import JointTable
from obscon.transform import (
    RewriteError,
    absorb_nested_latents,
    exogenize,
    hlp_add_edge,
    merge_district_latents,
    normalize,
    replace_latent_with_edges,
    replay,
    strong_face_split,
)

from oracles import random_dag, structural_model_table

EXOGENIZE_EXAMPLE = """\
var Z 2
var X 2
var Y 2
latent U1
latent U2
edge Z U2
edge U2 U1
edge U1 X
edge U1 Y
edge Z X
"""


def edge_set(dag):
    return set(dag.edges)


def latent_children(dag):
    return {u: frozenset(dag.observed_children(u)) for u in dag.latent_names()}


def test_exogenize_latent_chain_example():
    dag = parse_graph(EXOGENIZE_EXAMPLE)
    out, log = exogenize(dag)
    assert all(not out.parents(u) for u in out.latent_names())
    assert ("Z", "Y") in out.edges  # rerouted influence
    assert ("Z", "X") in out.edges
    assert log.steps
    # absorbing afterwards leaves a single latent over {X, Y}
    final, _ = absorb_nested_latents(out)
    assert latent_children(final) == {"U1": frozenset({"X", "Y"})}
    assert edge_set(final) == {("Z", "X"), ("Z", "Y"), ("U1", "X"), ("U1", "Y")}


def test_exogenize_fixpoint_on_clean_graph(graphs):
    out, log = exogenize(graphs["iv"])
    assert out == graphs["iv"]
    assert not log.steps


def test_exogenize_pure_latent_chain():
    dag = parse_graph(
        "var V 2\nvar W 2\nlatent U1\nlatent U2\n"
        "edge V U1\nedge U1 U2\nedge U2 W\n"
    )
    out, _ = exogenize(dag)
    assert ("V", "W") in out.edges
    assert all(not out.parents(u) for u in out.latent_names())


def test_absorb_nested_example():
    dag = parse_graph(
        "var Z 2\nvar X 2\nvar Y 2\nlatent U1\nlatent U2\n"
        "edge U1 Z\nedge U1 X\nedge U1 Y\nedge U2 Z\nedge U2 X\n"
    )
    out, log = absorb_nested_latents(dag)
    assert out.latent_names() == ("U1",)
    assert latent_children(out)["U1"] == frozenset({"Z", "X", "Y"})
    assert any(step.rule == "absorb" for step in log.steps)


def test_absorb_fixpoint(graphs):
    out, log = absorb_nested_latents(graphs["iv"])
    assert out == graphs["iv"] and not log.steps


def test_absorb_drops_single_child_latent():
    dag = parse_graph("var A 2\nvar B 2\nlatent U\nedge U A\nedge A B\n")
    out, _ = absorb_nested_latents(dag)
    assert out.latent_names() == ()


def test_normalize_idempotent():
    rng = random.Random(5)
    for _ in range(30):
        dag = random_dag(rng)
        once, _ = normalize(dag)
        twice, log = normalize(once)
        assert twice == once
        assert not log.steps
        assert validate_conditions(once).ok


def test_replay_reproduces_rewrites():
    rng = random.Random(9)
    for _ in range(20):
        dag = random_dag(rng)
        out, log = normalize(dag)
        assert replay(dag, log) == out
    dag = parse_graph(EXOGENIZE_EXAMPLE)
    out, log = normalize(dag)
    assert replay(dag, log) == out


def test_merge_district_latents_two_district(graphs):
    out, log = merge_district_latents(graphs["mixed_cdegree"])
    assert out.graph_c_degree() == 1
    assert validate_conditions(out).ok
    children = latent_children(out)
    assert children.pop("U2") == frozenset({"V1", "V3", "V6"})
    (merged,) = children.values()
    assert merged == frozenset({"V2", "V4", "V5"})
    assert any(step.rule == "merge" for step in log.steps)
    assert replay(graphs["mixed_cdegree"], log) == out


def test_merge_district_latents_triangle(graphs):
    out, _ = merge_district_latents(graphs["triangle"])
    assert latent_children(out) == {"merge_1": frozenset({"V1", "V2", "V3"})}


def test_merge_no_op_on_c_degree_one(graphs):
    out, log = merge_district_latents(graphs["iv"])
    assert out == graphs["iv"] and not log.steps


def test_merge_soundness_on_unmerged_model(graphs):
    # distributions from the two-latent model satisfy the merged constraints
    dag = graphs["mixed_cdegree"]
    result = derive_all(dag, DeriveOptions(merge=True))
    rng = random.Random(31)
    for _ in range(5):
        table = JointTable.from_dict(dag, structural_model_table(dag, rng))
        report = evaluate(result, dag, table)
        assert not report.falsified
        assert all(s.status == "satisfied" for s in report.constraint_statuses)


def test_replace_latent_with_edges_iv_family(graphs):
    left = graphs["iv_family_left"]
    out = replace_latent_with_edges(left, "U1", {"Z"}, {"X"})
    assert out.latent_names() == ("U2",)
    assert edge_set(out) == {("Z", "X"), ("X", "Y"), ("U2", "X"), ("U2", "Y")}


def test_replace_latent_precondition_error(graphs):
    # V1 is a parent of V2 but of neither V4 nor V5, so V2 cannot sit in c_set
    dag = graphs["mixed_cdegree"]
    with pytest.raises(RewriteError, match="bullet 3"):
        replace_latent_with_edges(dag, "U1", {"V2"}, {"V4"})


def test_replace_latent_vacuous_parents():
    dag = parse_graph("var A 2\nvar B 2\nlatent U\nedge U A\nedge U B\n")
    out = replace_latent_with_edges(dag, "U", {"A"}, {"B"})
    assert edge_set(out) == {("A", "B")}
    assert out.latent_names() == ()


def test_replace_latent_partition_checked(graphs):
    with pytest.raises(RewriteError, match="bullet 1"):
        replace_latent_with_edges(graphs["iv_family_left"], "U1", {"Z"}, {"Y"})


def test_hlp_add_edge_iv_family(graphs):
    out = hlp_add_edge(graphs["iv_family_left"], "Z", "X")
    assert out == graphs["iv_family_center"]


def test_hlp_add_edge_rejects_unshared_latent(graphs):
    # U2 points at Y but not at Z
    with pytest.raises(RewriteError):
        hlp_add_edge(graphs["iv_family_center"], "Y", "Z")


def test_hlp_add_edge_vacuous():
    dag = parse_graph(
        "var A 2\nvar B 2\nvar C 2\nlatent U\n"
        "edge U B\nedge U C\nedge A B\nedge A C\n"
    )
    out = hlp_add_edge(dag, "B", "C")
    assert ("B", "C") in out.edges


def test_strong_face_split_iv_family(graphs):
    out = strong_face_split(graphs["iv_family_center"], ["U1", "U2"])
    assert latent_children(out) == {"U2": frozenset({"X", "Y"})}
    assert edge_set(out) == {("Z", "X"), ("X", "Y"), ("U2", "X"), ("U2", "Y")}


def test_strong_face_split_shared_pair(graphs):
    out = strong_face_split(graphs["face_split_example"], ["U1", "U2"])
    children = sorted(latent_children(out).values(), key=sorted)
    assert children == [
        frozenset({"V1", "V2"}),
        frozenset({"V3", "V4"}),
        frozenset({"V4", "V5"}),
    ]
    observed_edges = {(p, c) for p, c in out.edges if not p.startswith("split")}
    assert observed_edges == {
        ("V3", "V1"), ("V4", "V1"), ("V5", "V1"),
        ("V3", "V2"), ("V4", "V2"), ("V5", "V2"),
    }


def test_strong_face_split_rename_only(graphs):
    out = strong_face_split(graphs["iv"], ["U"])
    assert latent_children(out) == {"split_1": frozenset({"X", "Y"})}
    observed_edges = {(p, c) for p, c in out.edges if p != "split_1"}
    assert observed_edges == {("Z", "X"), ("X", "Y")}


def test_iv_family_rewrites_share_constraint_set(graphs):
    # replace on the left graph and hlp+split on the left graph both land on
    # the plain IV model; derived constraints agree after canonicalization
    left = graphs["iv_family_left"]
    via_replace = replace_latent_with_edges(left, "U1", {"Z"}, {"X"})
    via_split = strong_face_split(hlp_add_edge(left, "Z", "X"), ["U1", "U2"])

    def canonical(dag):
        result = derive_all(dag)
        rows = set()
        for record in result.districts:
            if record.hrep is None:
                continue
            rows.add((record.members, record.hrep.ineq, record.hrep.eq))
        return rows, set(result.ci_statements)

    reference = canonical(graphs["iv"])
    assert canonical(via_replace) == reference
    assert canonical(via_split) == reference
