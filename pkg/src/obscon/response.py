"""Response-function enumeration and the per-district linear system p = B r.

Conventions (all enumeration is deterministic and derives from the canonical
variable order):

* Configurations of an ordered variable list enumerate with the FIRST
  variable moving fastest (odometer with the leftmost wheel spinning).
* A response level for W with parents (P1..Pk) encodes the function table as
  a base-|W| numeral read most-significant-digit first, digit j being the
  output on the j-th parent configuration, where parent configurations are
  ranked lexicographically with the LAST parent fastest.
* Rows of B are (w1, w2) pairs, grouped by w2 configuration (w2 outermost).
* Columns of B are joint response assignments, grouped by the row of the
  first w2 block they are compatible with (in row order) and ordered within a
  group by joint response level with the first member's level fastest.

The column convention reproduces the ordering used in published derivations
for the binary instrumental-variable system.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .graph import District, HiddenDag, validate_conditions
from .tables import JointTable


class ColumnLimitError(RuntimeError):
    """The joint response space is larger than the configured column limit."""

    def __init__(self, estimate: int, limit: int):
        self.estimate = estimate
        self.limit = limit
        super().__init__(
            f"district needs {estimate} response columns, over the limit of {limit}"
        )


@dataclass(frozen=True)
class Configuration:
    """An assignment of values to an ordered tuple of observed variables."""

    items: tuple[tuple[str, int], ...]

    @classmethod
    def make(cls, names: Sequence[str], values: Sequence[int]) -> "Configuration":
        return cls(tuple(zip(names, values)))

    def __getitem__(self, name: str) -> int:
        for n, v in self.items:
            if n == name:
                return v
        raise KeyError(name)

    def as_dict(self) -> dict[str, int]:
        return dict(self.items)

    def values(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.items)

    def render(self) -> str:
        return ",".join(f"{n}={v}" for n, v in self.items)


def enumerate_configs(names: Sequence[str], cards: Sequence[int]) -> list[Configuration]:
    """All configurations, first variable fastest. One empty config for no names."""
    total = 1
    for c in cards:
        total *= c
    out = []
    for index in range(total):
        values = []
        rem = index
        for card in cards:
            values.append(rem % card)
            rem //= card
        out.append(Configuration.make(names, values))
    return out


@dataclass(frozen=True)
class ResponseSpec:
    """Shape of the response variable for one observed variable."""

    variable: str
    cardinality: int
    parent_order: tuple[str, ...]
    parent_cards: tuple[int, ...]

    @property
    def parent_domain_size(self) -> int:
        size = 1
        for c in self.parent_cards:
            size *= c
        return size

    @property
    def level_count(self) -> int:
        return self.cardinality ** self.parent_domain_size

    def config_index(self, parent_config: Mapping[str, int] | Configuration) -> int:
        """Rank of a parent configuration, last parent fastest."""
        index = 0
        for name, card in zip(self.parent_order, self.parent_cards):
            value = parent_config[name]
            if not 0 <= value < card:
                raise ValueError(f"value {value} for {name} out of range")
            index = index * card + value
        return index


def response_levels(dag: HiddenDag, w: str) -> ResponseSpec:
    """Response variable shape for ``w``: |W| ** (product of parent cardinalities)."""
    parents = dag.sort_observed(dag.observed_parents([w]))
    return ResponseSpec(
        variable=w,
        cardinality=dag.cardinality(w),
        parent_order=parents,
        parent_cards=tuple(dag.cardinality(p) for p in parents),
    )


def eval_response(spec: ResponseSpec, level: int,
                  parent_config: Mapping[str, int] | Configuration) -> int:
    """Output of response function ``level`` on ``parent_config``.

    Decodes ``level`` as a base-|W| numeral, most significant digit first;
    digit j is the output on the j-th parent configuration.
    """
    if not 0 <= level < spec.level_count:
        raise ValueError(f"level {level} out of range for {spec.variable}")
    j = spec.config_index(parent_config)
    power = spec.cardinality ** (spec.parent_domain_size - 1 - j)
    return (level // power) % spec.cardinality


def encode_response(spec: ResponseSpec, outputs: Sequence[int]) -> int:
    """Inverse of ``eval_response``: outputs listed per parent-config rank."""
    if len(outputs) != spec.parent_domain_size:
        raise ValueError("need one output per parent configuration")
    level = 0
    for value in outputs:
        if not 0 <= value < spec.cardinality:
            raise ValueError(f"output {value} out of range for {spec.variable}")
        level = level * spec.cardinality + value
    return level


@dataclass(frozen=True)
class FunctionalSystem:
    """The labeled 0/1 system p = B r for one district."""

    district: District
    w1_order: tuple[str, ...]
    w2_order: tuple[str, ...]
    row_labels: tuple[tuple[Configuration, Configuration], ...]
    col_labels: tuple[tuple[int, ...], ...]  # one response level per member
    matrix: tuple[tuple[int, ...], ...]
    row_blocks: tuple[tuple[int, ...], ...]  # row indices grouped by w2 config

    @property
    def n_rows(self) -> int:
        return len(self.row_labels)

    @property
    def n_cols(self) -> int:
        return len(self.col_labels)

    def columns_as_points(self) -> list[tuple[Fraction, ...]]:
        """Columns of B as rational vectors; the V-representation generators."""
        return [
            tuple(Fraction(self.matrix[r][c]) for r in range(self.n_rows))
            for c in range(self.n_cols)
        ]

    def multiply(self, r: Sequence[Fraction]) -> list[Fraction]:
        if len(r) != self.n_cols:
            raise ValueError("response vector has wrong length")
        return [
            sum((value * coeff for value, coeff in zip(row, r)), Fraction(0))
            for row in self.matrix
        ]

    def to_json(self) -> dict:
        return {
            "members": list(self.w1_order),
            "external_parents": list(self.w2_order),
            "row_labels": [
                {"w1": a.as_dict(), "w2": b.as_dict()} for a, b in self.row_labels
            ],
            "col_labels": [list(levels) for levels in self.col_labels],
            "matrix": [list(row) for row in self.matrix],
        }


def external_parents(dag: HiddenDag, district: District) -> tuple[str, ...]:
    members = set(district.members)
    return dag.sort_observed(dag.observed_parents(members) - members)


def _member_specs(dag: HiddenDag, district: District) -> dict[str, ResponseSpec]:
    return {w: response_levels(dag, w) for w in district.members}


def _outcome_index(dag, district, specs, levels, w2_config, w1_configs_index):
    """w1-row realized by the joint response ``levels`` under ``w2_config``."""
    values: dict[str, int] = dict(w2_config.items)
    order = [w for w in dag.topological_order() if w in set(district.members)]
    for member in order:
        spec = specs[member]
        level = levels[district.members.index(member)]
        values[member] = eval_response(spec, level, values)
    key = tuple(values[m] for m in district.members)
    return w1_configs_index[key]


def _column_order(dag: HiddenDag, district: District):
    """Canonical column labels plus each column's outcome per w2 block."""
    specs = _member_specs(dag, district)
    w2 = external_parents(dag, district)
    w1_configs = enumerate_configs(
        district.members, [dag.cardinality(m) for m in district.members]
    )
    w2_configs = enumerate_configs(w2, [dag.cardinality(p) for p in w2])
    w1_index = {cfg.values(): i for i, cfg in enumerate(w1_configs)}

    level_counts = [specs[m].level_count for m in district.members]
    n_cols = 1
    for c in level_counts:
        n_cols *= c
    raw = []
    for rank in range(n_cols):
        rem = rank
        levels = []
        for count in level_counts:  # first member fastest
            levels.append(rem % count)
            rem //= count
        levels = tuple(levels)
        outcomes = tuple(
            _outcome_index(dag, district, specs, levels, w2c, w1_index)
            for w2c in w2_configs
        )
        raw.append((outcomes[0], rank, levels, outcomes))
    raw.sort(key=lambda item: (item[0], item[1]))
    return (
        [levels for _, _, levels, _ in raw],
        [outcomes for _, _, _, outcomes in raw],
        w1_configs,
        w2_configs,
    )


def compatible_responses(dag: HiddenDag, district: District,
                         w1: Configuration, w2: Configuration) -> set[int]:
    """Canonical column indices whose joint response realizes (w1, w2)."""
    col_labels, col_outcomes, w1_configs, w2_configs = _column_order(dag, district)
    w1_index = {cfg.values(): i for i, cfg in enumerate(w1_configs)}
    w2_index = {cfg.values(): i for i, cfg in enumerate(w2_configs)}
    try:
        target_row = w1_index[tuple(w1[m] for m in district.members)]
        block = w2_index[tuple(w2[p] for p in external_parents(dag, district))]
    except KeyError as exc:
        raise ValueError(f"configuration misses variable {exc.args[0]!r}") from exc
    return {c for c, outcomes in enumerate(col_outcomes) if outcomes[block] == target_row}


def build_functional_system(dag: HiddenDag, district: District,
                            column_limit: int | None = 10_000_000) -> FunctionalSystem:
    """Construct the labeled system p = B r for a c-degree-1 district."""
    report = validate_conditions(dag)
    if not report.ok:
        raise ValueError("graph violates the structural conditions; normalize it first")
    if district.c_degree > 1:
        raise ValueError(
            f"district {{{', '.join(district.members)}}} has c-degree "
            f"{district.c_degree}; merge its latents first"
        )
    specs = _member_specs(dag, district)
    estimate = 1
    for m in district.members:
        estimate *= specs[m].level_count
        if column_limit is not None and estimate > column_limit:
            raise ColumnLimitError(estimate, column_limit)

    col_labels, col_outcomes, w1_configs, w2_configs = _column_order(dag, district)
    n1 = len(w1_configs)
    row_labels = tuple(
        (w1c, w2c) for w2c in w2_configs for w1c in w1_configs
    )
    matrix = [[0] * len(col_labels) for _ in row_labels]
    for c, outcomes in enumerate(col_outcomes):
        for block, outcome in enumerate(outcomes):
            matrix[block * n1 + outcome][c] = 1
    row_blocks = tuple(
        tuple(range(b * n1, (b + 1) * n1)) for b in range(len(w2_configs))
    )
    return FunctionalSystem(
        district=district,
        w1_order=district.members,
        w2_order=external_parents(dag, district),
        row_labels=row_labels,
        col_labels=tuple(col_labels),
        matrix=tuple(tuple(row) for row in matrix),
        row_blocks=row_blocks,
    )


def star_factors(dag: HiddenDag, district: District) -> list[tuple[str, tuple[str, ...]]]:
    """Per-member (variable, conditioning set) pairs of the identifying product.

    The factor for member W conditions on every variable that is a parent of
    the district or a co-member, is an observed ancestor of W, and is not W
    itself.
    """
    members = set(district.members)
    pool = dag.observed_parents(members) | members
    factors = []
    for m in district.members:
        cond = (pool & dag.observed_ancestors([m])) - {m}
        factors.append((m, dag.sort_observed(cond)))
    return factors


def star_probability(table: JointTable, dag: HiddenDag, district: District,
                     w1: Configuration, w2: Configuration) -> Fraction | None:
    """Interventional probability of (w1 | w2) from an empirical table.

    Returns the product of identifying conditionals, or ``None`` when some
    conditioning event has probability zero (not evaluable).
    """
    values = dict(w1.items)
    values.update(w2.items)
    result = Fraction(1)
    for member, cond in star_factors(dag, district):
        target = {member: values[member]}
        given = {name: values[name] for name in cond}
        factor = table.conditional(target, given)
        if factor is None:
            return None
        result *= factor
    return result
