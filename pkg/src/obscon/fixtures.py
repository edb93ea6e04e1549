"""Bundled example graphs and distributions.

These are the worked examples the acceptance suite runs on; ``obscon
--emit-examples DIR`` writes them out so no inputs need hand-authoring.
"""

from __future__ import annotations

import os

FIXTURE_GRAPHS: dict[str, str] = {
    # classic binary instrumental-variable model
    "iv": """\
var Z 2
var X 2
var Y 2
latent U
edge Z X
edge X Y
edge U X
edge U Y
""",
    # chain of two IV-like districts sharing the middle variable
    "iv_sequential": """\
var V1 2
var V2 2
var V3 2
var V4 2
var V5 2
latent U2
latent U3
edge V1 V2
edge V2 V3
edge V3 V4
edge V4 V5
edge U2 V2
edge U2 V3
edge U3 V4
edge U3 V5
""",
    # four-variable pair with the same equality model but different
    # inequality constraints: bypass edge from V1 (left) vs from V2 (right)
    "nested_pair_left": """\
var V1 2
var V2 2
var V3 2
var V4 2
latent U
edge V1 V2
edge V2 V3
edge V3 V4
edge V1 V4
edge U V2
edge U V4
""",
    "nested_pair_right": """\
var V1 2
var V2 2
var V3 2
var V4 2
latent U
edge V1 V2
edge V2 V3
edge V3 V4
edge V2 V4
edge U V2
edge U V4
""",
    # mediation model whose flagged rows are all trivial after substitution
    "frontdoor": """\
var A 2
var M 2
var Y 2
latent U
edge A M
edge M Y
edge U A
edge U Y
""",
    # six variables, two districts, one of c-degree 2 (merge before deriving)
    "mixed_cdegree": """\
var V1 2
var V2 2
var V3 2
var V4 2
var V5 2
var V6 2
latent U1
latent U2
latent U3
edge V1 V2
edge V2 V3
edge V6 V3
edge V3 V4
edge V4 V5
edge V1 V6
edge U1 V2
edge U1 V4
edge U2 V1
edge U2 V6
edge U2 V3
edge U3 V4
edge U3 V5
""",
    # three pairwise-confounded outcomes, c-degree 3 (merge before deriving)
    "triangle": """\
var V1 2
var V2 2
var V3 2
latent U1
latent U2
latent U3
edge U1 V1
edge U1 V3
edge U2 V1
edge U2 V2
edge U3 V2
edge U3 V3
""",
    # three parties with independent binary settings and a shared source
    "bell_tripartite": """\
var X 2
var Y 2
var Z 2
var V1 2
var V2 2
var V3 2
latent U
edge X V1
edge Y V2
edge Z V3
edge U V1
edge U V2
edge U V3
""",
}

FIXTURE_TABLES: dict[str, tuple[str, str]] = {
    # perfectly anticorrelated triple: incompatible with the triangle model,
    # yet the merged derivation cannot witness it
    "triangle_wolfe": (
        "triangle",
        """\
V1,V2,V3,prob
0,0,0,1/2
1,1,1,1/2
""",
    ),
    # constructed violator of one instrumental inequality
    "iv_violator": (
        "iv",
        """\
Z,X,Y,prob
0,0,1,1/2
1,0,0,1/2
""",
    ),
    # a distribution generated by the IV structural model (uniform responses)
    "iv_model": (
        "iv",
        """\
Z,X,Y,prob
0,0,0,1/8
0,0,1,1/8
0,1,0,1/8
0,1,1,1/8
1,0,0,1/8
1,0,1,1/8
1,1,0,1/8
1,1,1,1/8
""",
    ),
}


def write_examples(directory: str) -> list[str]:
    """Write every bundled fixture into ``directory``; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, text in FIXTURE_GRAPHS.items():
        path = os.path.join(directory, f"{name}.graph")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)
    for name, (_graph, text) in FIXTURE_TABLES.items():
        path = os.path.join(directory, f"{name}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)
    return written
