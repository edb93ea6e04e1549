"""Assemble, flag, render and evaluate the observable constraints of a graph.

``derive_all`` runs the full pipeline: conditional independencies, districts,
per-district linear system, vertex-to-halfspace conversion, and the
extreme-point nontriviality flag. ``evaluate`` checks a derivation against an
empirical joint distribution.

A flagged constraint is only *potentially* nontrivial: substituting the
identifying functionals can reduce a flagged row to a tautology, so flagged
rows deserve manual inspection before being read as genuine restrictions.
Testing them anyway is sound, since trivial rows restrict nothing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._version import __version__ as _version
from .graph import HiddenDag, parse_graph, validate_conditions
from .independence import CIStatement, enumerate_ci
from .polyhedra import HRep, VRep, v_to_h
from .response import (
    ColumnLimitError,
    Configuration,
    FunctionalSystem,
    build_functional_system,
    star_factors,
    star_probability,
)
from .tables import JointTable
from .transform import merge_district_latents

FLAG_CAVEAT = (
    "flagged constraints are potentially nontrivial; after substituting the "
    "identifying conditionals some may reduce to tautologies, so inspect "
    "flagged rows before reading them as genuine model restrictions"
)


class ConditionsError(ValueError):
    """The graph is not in derivable form (conditions or c-degree)."""


@dataclass(frozen=True)
class Constraint:
    """One linear (in)equality over a district's interventional terms.

    ``terms`` maps row indices of the district's FunctionalSystem to integer
    coefficients; ``relation`` is "<=" or "=".
    """

    district_index: int
    terms: tuple[tuple[int, int], ...]
    relation: str
    rhs: int
    flagged: bool
    witness: int | None

    def coeff_vector(self, n_rows: int) -> list[int]:
        vec = [0] * n_rows
        for row, coeff in self.terms:
            vec[row] = coeff
        return vec


@dataclass(frozen=True)
class DistrictResult:
    members: tuple[str, ...]
    c_degree: int
    merged: bool
    skipped: bool
    system: FunctionalSystem | None
    hrep: HRep | None
    block_sizes: tuple[int, ...]
    constraints: tuple[Constraint, ...]


@dataclass(frozen=True)
class DerivationResult:
    fingerprint: str
    graph_text: str
    derived_graph_text: str
    merged: bool
    ci_statements: tuple[CIStatement, ...]
    districts: tuple[DistrictResult, ...]
    meta: dict = field(default_factory=dict)

    @property
    def constraints_total(self) -> int:
        return sum(len(d.constraints) for d in self.districts)

    @property
    def inequality_count(self) -> int:
        return sum(
            1 for d in self.districts for c in d.constraints if c.relation == "<="
        )

    @property
    def equality_count(self) -> int:
        return sum(
            1 for d in self.districts for c in d.constraints if c.relation == "="
        )

    @property
    def flagged_count(self) -> int:
        return sum(1 for d in self.districts for c in d.constraints if c.flagged)

    def summary(self) -> str:
        return (
            f"{self.constraints_total} constraints, "
            f"{self.inequality_count} inequalities, "
            f"{self.equality_count} equalities, "
            f"{self.flagged_count} flagged"
        )


@dataclass(frozen=True)
class DeriveOptions:
    merge: bool = False
    max_ci_size: int | None = None
    column_limit: int | None = 10_000_000
    jobs: int = 1
    timings: bool = False
    seed: int | None = None  # recorded in metadata; derivation is deterministic


def flag_nontrivial(h: HRep, block_sizes: Sequence[int]):
    """Per-row nontriviality flags with violating extreme-point witnesses.

    A row is flagged iff some vertex of the product of probability simplices
    violates it. The check is analytic: over the product's vertices a linear
    form attains exactly the sums of per-block maxima (or minima), so no
    enumeration is needed. Returns (ineq_flags, eq_flags) lists of
    (flagged, witness_index_or_None).
    """
    dim = sum(block_sizes)
    if h.dim != dim:
        raise ValueError(f"H-representation has dim {h.dim}, blocks sum to {dim}")
    offsets = []
    start = 0
    for size in block_sizes:
        offsets.append((start, start + size))
        start += size

    def block_extremes(coeffs):
        max_sum, min_sum = 0, 0
        argmax, argmin = [], []
        for lo, hi in offsets:
            seg = coeffs[lo:hi]
            mx = max(seg)
            mn = min(seg)
            max_sum += mx
            min_sum += mn
            argmax.append(seg.index(mx))
            argmin.append(seg.index(mn))
        return max_sum, argmax, min_sum, argmin

    def point_index(choices):
        index = 0
        stride = 1
        for choice, size in zip(choices, block_sizes):
            index += choice * stride
            stride *= size
        return index

    ineq_flags = []
    for coeffs, rhs in h.ineq:
        max_sum, argmax, _, _ = block_extremes(coeffs)
        if max_sum > rhs:
            ineq_flags.append((True, point_index(argmax)))
        else:
            ineq_flags.append((False, None))
    eq_flags = []
    for coeffs, rhs in h.eq:
        max_sum, argmax, min_sum, argmin = block_extremes(coeffs)
        if max_sum != rhs:
            eq_flags.append((True, point_index(argmax)))
        elif min_sum != rhs:
            eq_flags.append((True, point_index(argmin)))
        else:
            eq_flags.append((False, None))
    return ineq_flags, eq_flags


def _district_is_trivial(dag: HiddenDag, district) -> bool:
    # a lone variable without observed parents can only produce simplex facets
    return (
        len(district.members) == 1
        and not dag.observed_parents(district.members)
    )


def _derive_district(dag: HiddenDag, district, column_limit):
    system = build_functional_system(dag, district, column_limit)
    points = VRep(tuple(system.columns_as_points()))
    hrep = v_to_h(points)
    n1 = len(system.row_blocks[0])
    block_sizes = tuple([n1] * len(system.row_blocks))
    ineq_flags, eq_flags = flag_nontrivial(hrep, block_sizes)
    return system, hrep, block_sizes, ineq_flags, eq_flags


def _assemble(district_index, system, hrep, block_sizes, ineq_flags, eq_flags,
              merged):
    constraints = []
    for (coeffs, rhs), (flagged, witness) in zip(hrep.ineq, ineq_flags):
        terms = tuple(
            (row, coeff) for row, coeff in enumerate(coeffs) if coeff != 0
        )
        constraints.append(Constraint(district_index, terms, "<=", rhs, flagged, witness))
    for (coeffs, rhs), (flagged, witness) in zip(hrep.eq, eq_flags):
        terms = tuple(
            (row, coeff) for row, coeff in enumerate(coeffs) if coeff != 0
        )
        constraints.append(Constraint(district_index, terms, "=", rhs, flagged, witness))
    return DistrictResult(
        members=system.district.members,
        c_degree=system.district.c_degree,
        merged=merged,
        skipped=False,
        system=system,
        hrep=hrep,
        block_sizes=block_sizes,
        constraints=tuple(constraints),
    )


def _derive_district_task(args):
    dag, district, column_limit = args
    return _derive_district(dag, district, column_limit)


def derive_all(dag: HiddenDag, options: DeriveOptions | None = None) -> DerivationResult:
    """Run the full derivation pipeline on a hidden-variable DAG."""
    import time

    options = options or DeriveOptions()
    t0 = time.monotonic()
    report = validate_conditions(dag)
    if not report.ok:
        raise ConditionsError(
            "graph violates the structural conditions "
            f"({'; '.join(line for line in report.lines())}); run normalize first"
        )
    working = dag
    merged = False
    if any(d.c_degree > 1 for d in dag.districts()):
        if not options.merge:
            raise ConditionsError(
                "some district has c-degree > 1; rerun with merge enabled "
                "(results are then valid but possibly incomplete)"
            )
        working, _ = merge_district_latents(dag)
        merged = True

    ci = tuple(enumerate_ci(working, options.max_ci_size))
    districts = working.districts()

    tasks = []
    records: list[DistrictResult | None] = []
    for district in districts:
        if _district_is_trivial(working, district):
            records.append(DistrictResult(
                members=district.members,
                c_degree=district.c_degree,
                merged=merged,
                skipped=True,
                system=None,
                hrep=None,
                block_sizes=(),
                constraints=(),
            ))
        else:
            records.append(None)
            tasks.append((len(records) - 1, district))

    if options.jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=options.jobs) as pool:
            outputs = list(pool.map(
                _derive_district_task,
                [(working, district, options.column_limit) for _, district in tasks],
            ))
    else:
        outputs = [
            _derive_district_task((working, district, options.column_limit))
            for _, district in tasks
        ]
    for (index, _district), output in zip(tasks, outputs):
        records[index] = _assemble(index, *output, merged)

    meta = {
        "tool": "obscon",
        "version": _version,
        "options": {
            "merge": options.merge,
            "max_ci_size": options.max_ci_size,
            "column_limit": options.column_limit,
        },
        "seed": options.seed,
        "ci_policy": "minimal-Z, merged, greedy-cover",
        "complete": not merged,
        "caveat": FLAG_CAVEAT,
    }
    if options.timings:
        meta["timings"] = {"derive_seconds": time.monotonic() - t0}
    return DerivationResult(
        fingerprint=hashlib.sha256(dag.to_text().encode()).hexdigest(),
        graph_text=dag.to_text(),
        derived_graph_text=working.to_text(),
        merged=merged,
        ci_statements=ci,
        districts=tuple(r for r in records if r is not None),
        meta=meta,
    )


# -- rendering -------------------------------------------------------------


def _term_label(system: FunctionalSystem, row: int) -> str:
    w1, w2 = system.row_labels[row]
    if system.w2_order:
        return f"P*({w1.render()}|{w2.render()})"
    return f"P*({w1.render()})"


def _observable_label(dag: HiddenDag, system: FunctionalSystem, row: int) -> str:
    w1, w2 = system.row_labels[row]
    values = dict(w1.items)
    values.update(w2.items)
    factors = []
    for member, cond in star_factors(dag, system.district):
        head = f"{member}={values[member]}"
        if cond:
            tail = ",".join(f"{name}={values[name]}" for name in cond)
            factors.append(f"P({head}|{tail})")
        else:
            factors.append(f"P({head})")
    return "*".join(factors)


def render(constraint: Constraint, system: FunctionalSystem,
           dag: HiddenDag | None = None, mode: str = "star") -> str:
    """Pretty-print a constraint over star or observable probability terms."""
    if mode not in ("star", "observable"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "observable" and dag is None:
        raise ValueError("observable mode needs the graph")
    parts = []
    for row, coeff in constraint.terms:
        label = (
            _term_label(system, row)
            if mode == "star"
            else _observable_label(dag, system, row)
        )
        if not parts:
            if coeff == 1:
                parts.append(label)
            elif coeff == -1:
                parts.append(f"-{label}")
            else:
                parts.append(f"{coeff} {label}")
        else:
            sign = "+" if coeff > 0 else "-"
            mag = abs(coeff)
            parts.append(f"{sign} {label}" if mag == 1 else f"{sign} {mag} {label}")
    lhs = " ".join(parts) if parts else "0"
    return f"{lhs} {constraint.relation} {constraint.rhs}"


# -- evaluation ------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintStatus:
    district_index: int
    constraint: Constraint
    text: str
    status: str  # satisfied | violated | not_evaluable
    margin: Fraction | None


@dataclass(frozen=True)
class CIStatus:
    statement: CIStatement
    status: str
    margin: Fraction


@dataclass(frozen=True)
class ViolationReport:
    constraint_statuses: tuple[ConstraintStatus, ...]
    ci_statuses: tuple[CIStatus, ...]
    tolerance: Fraction

    @property
    def falsified(self) -> bool:
        return any(s.status == "violated" for s in self.constraint_statuses) or any(
            s.status == "violated" for s in self.ci_statuses
        )

    def lines(self) -> list[str]:
        out = []
        for s in self.ci_statuses:
            out.append(f"[{s.status}] CI {s.statement.render()} (margin {s.margin})")
        for s in self.constraint_statuses:
            margin = "" if s.margin is None else f" (margin {s.margin})"
            out.append(f"[{s.status}] {s.text}{margin}")
        verdict = "falsified" if self.falsified else "consistent"
        out.append(f"model {verdict}")
        return out


def _star_vector(table, dag, system):
    return [
        star_probability(table, dag, system.district, w1, w2)
        for w1, w2 in system.row_labels
    ]


def evaluate(result: DerivationResult, dag: HiddenDag, table: JointTable,
             tolerance: Fraction | None = None) -> ViolationReport:
    """Check every derived constraint and CI statement against a joint table."""
    if table.variables != dag.observed_names():
        raise ValueError("table variables do not match the graph")
    if tolerance is None:
        tolerance = Fraction(1, 10 ** 9) if table.decimal_source else Fraction(0)
    working = (
        dag if result.derived_graph_text == dag.to_text()
        else parse_graph(result.derived_graph_text)
    )

    statuses = []
    for record in result.districts:
        if record.skipped or record.system is None:
            continue
        stars = _star_vector(table, working, record.system)
        for constraint in record.constraints:
            text = render(constraint, record.system, working, "star")
            if any(stars[row] is None for row, _ in constraint.terms):
                statuses.append(ConstraintStatus(
                    constraint.district_index, constraint, text, "not_evaluable", None
                ))
                continue
            value = sum(
                (Fraction(coeff) * stars[row] for row, coeff in constraint.terms),
                Fraction(0),
            )
            if constraint.relation == "<=":
                margin = value - constraint.rhs
                status = "violated" if margin > tolerance else "satisfied"
                margin = max(margin, Fraction(0))
            else:
                margin = abs(value - constraint.rhs)
                status = "violated" if margin > tolerance else "satisfied"
            statuses.append(ConstraintStatus(
                constraint.district_index, constraint, text, status, margin
            ))

    ci_statuses = []
    from .response import enumerate_configs

    for stmt in result.ci_statements:
        names = list(stmt.lhs) + list(stmt.rhs) + list(stmt.given)
        margin = Fraction(0)
        for config in enumerate_configs(names, [dag.cardinality(n) for n in names]):
            values = config.as_dict()
            lhs = {n: values[n] for n in stmt.lhs}
            rhs = {n: values[n] for n in stmt.rhs}
            given = {n: values[n] for n in stmt.given}
            p_all = table.prob({**lhs, **rhs, **given})
            p_g = table.prob(given)
            p_lg = table.prob({**lhs, **given})
            p_rg = table.prob({**rhs, **given})
            margin = max(margin, abs(p_all * p_g - p_lg * p_rg))
        status = "violated" if margin > tolerance else "satisfied"
        ci_statuses.append(CIStatus(stmt, status, margin))

    return ViolationReport(tuple(statuses), tuple(ci_statuses), tolerance)


# -- serialization ----------------------------------------------------------


def _frac_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def constraint_to_json(constraint: Constraint, system: FunctionalSystem,
                       dag: HiddenDag) -> dict:
    terms = []
    for row, coeff in constraint.terms:
        w1, w2 = system.row_labels[row]
        terms.append({"w1": w1.as_dict(), "w2": w2.as_dict(), "coeff": coeff})
    return {
        "terms": terms,
        "relation": constraint.relation,
        "rhs": constraint.rhs,
        "flagged": constraint.flagged,
        "witness": constraint.witness,
        "text_star": render(constraint, system, dag, "star"),
        "text_observable": render(constraint, system, dag, "observable"),
    }


def result_to_json(result: DerivationResult, dag: HiddenDag) -> dict:
    working = (
        dag if result.derived_graph_text == dag.to_text()
        else parse_graph(result.derived_graph_text)
    )
    report = validate_conditions(dag)
    districts_json = []
    for record in result.districts:
        entry = {
            "members": list(record.members),
            "c_degree": record.c_degree,
            "merged": record.merged,
            "skipped": record.skipped,
        }
        if record.system is not None and record.hrep is not None:
            entry["system"] = record.system.to_json()
            entry["hrep"] = record.hrep.to_json()
            entry["block_sizes"] = list(record.block_sizes)
            entry["constraints"] = [
                constraint_to_json(c, record.system, working)
                for c in record.constraints
            ]
        else:
            entry["system"] = None
            entry["hrep"] = None
            entry["block_sizes"] = []
            entry["constraints"] = []
        districts_json.append(entry)
    return {
        "graph": result.graph_text,
        "derived_graph": result.derived_graph_text,
        "fingerprint": result.fingerprint,
        "conditions_report": report.lines(),
        "ci": [stmt.to_json() | {"text": stmt.render()} for stmt in result.ci_statements],
        "districts": districts_json,
        "summary": {
            "total": result.constraints_total,
            "inequalities": result.inequality_count,
            "equalities": result.equality_count,
            "flagged": result.flagged_count,
        },
        "meta": result.meta,
    }


def report_to_json(report: ViolationReport) -> dict:
    return {
        "tolerance": _frac_str(report.tolerance),
        "falsified": report.falsified,
        "ci": [
            {
                "statement": s.statement.render(),
                "status": s.status,
                "margin": _frac_str(s.margin),
            }
            for s in report.ci_statuses
        ],
        "constraints": [
            {
                "district": s.district_index,
                "text": s.text,
                "status": s.status,
                "margin": None if s.margin is None else _frac_str(s.margin),
            }
            for s in report.constraint_statuses
        ],
    }
