"""Empirical joint probability tables over the observed variables.

Probabilities are exact rationals. The CSV format has one column per observed
variable in canonical order plus a final ``prob`` column holding ``a/b`` or a
decimal literal; omitted rows mean probability zero.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .graph import HiddenDag


class TableError(ValueError):
    """Malformed or inconsistent distribution input."""


@dataclass(frozen=True)
class JointTable:
    variables: tuple[str, ...]
    cardinalities: tuple[int, ...]
    probs: Mapping[tuple[int, ...], Fraction]
    decimal_source: bool = False

    def __post_init__(self):
        total = Fraction(0)
        for config, p in self.probs.items():
            if len(config) != len(self.variables):
                raise TableError("configuration arity mismatch")
            for value, card in zip(config, self.cardinalities):
                if not 0 <= value < card:
                    raise TableError(f"value {value} out of range in {config}")
            if p < 0:
                raise TableError(f"negative probability for {config}")
            total += p
        if total != 1:
            raise TableError(f"probabilities sum to {total}, expected 1")

    @classmethod
    def from_dict(cls, dag: HiddenDag, probs: Mapping[tuple[int, ...], Fraction],
                  decimal_source: bool = False) -> "JointTable":
        names = dag.observed_names()
        cards = tuple(dag.cardinality(n) for n in names)
        cleaned = {tuple(k): Fraction(v) for k, v in probs.items() if v != 0}
        return cls(names, cards, cleaned, decimal_source)

    def prob(self, assignment: Mapping[str, int]) -> Fraction:
        """Marginal probability of a partial assignment."""
        idx = {name: i for i, name in enumerate(self.variables)}
        for name in assignment:
            if name not in idx:
                raise TableError(f"unknown variable {name!r}")
        total = Fraction(0)
        for config, p in self.probs.items():
            if all(config[idx[name]] == value for name, value in assignment.items()):
                total += p
        return total

    def conditional(self, target: Mapping[str, int], given: Mapping[str, int]):
        """P(target | given), or None when the conditioning event has mass 0."""
        denom = self.prob(given)
        if denom == 0:
            return None
        joint = dict(given)
        joint.update(target)
        return self.prob(joint) / denom

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(list(self.variables) + ["prob"])
        for config in sorted(self.probs):
            p = self.probs[config]
            writer.writerow(list(config) + [f"{p.numerator}/{p.denominator}"])
        return out.getvalue()


def _parse_prob(text: str) -> tuple[Fraction, bool]:
    text = text.strip()
    try:
        if "/" in text:
            return Fraction(text), False
        value = Fraction(text)  # exact for decimal literals
        return value, ("." in text or "e" in text.lower())
    except (ValueError, ZeroDivisionError) as exc:
        raise TableError(f"cannot parse probability {text!r}") from exc


def parse_table(text: str, dag: HiddenDag) -> JointTable:
    names = dag.observed_names()
    cards = tuple(dag.cardinality(n) for n in names)
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise TableError("empty distribution file")
    header = [h.strip() for h in rows[0]]
    if header != list(names) + ["prob"]:
        raise TableError(
            f"header must be {', '.join(names)}, prob (canonical order); got {', '.join(header)}"
        )
    probs: dict[tuple[int, ...], Fraction] = {}
    decimal_source = False
    for row in rows[1:]:
        if len(row) != len(names) + 1:
            raise TableError(f"row {row!r} has {len(row)} fields, expected {len(names) + 1}")
        try:
            config = tuple(int(cell) for cell in row[:-1])
        except ValueError as exc:
            raise TableError(f"non-integer value in row {row!r}") from exc
        if config in probs:
            raise TableError(f"duplicate configuration {config}")
        p, was_decimal = _parse_prob(row[-1])
        decimal_source = decimal_source or was_decimal
        if p != 0:
            probs[config] = p
    return JointTable(names, cards, probs, decimal_source)


def load_table(path, dag: HiddenDag) -> JointTable:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_table(fh.read(), dag)
