"""Term and rule structures for the non-recursive Datalog dialect.

The dialect covers exactly what the configuration rules need: positive body
atoms, arithmetic over 64-bit floats, comparisons, variable bindings
(``x = expr``), external calls (``@name(args)``) and the three aggregates
#max / #min / #avg in term-list or comprehension form, with nesting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

AGGREGATE_KINDS = ("max", "min", "avg")

COMPARISON_OPS = ("<", "<=", ">", ">=", "==", "!=")

_BARE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Const:
    value: Union[float, str]


@dataclass(frozen=True)
class Var:
    name: str

    @property
    def is_anonymous(self) -> bool:
        return self.name.startswith("_")


@dataclass(frozen=True)
class Arith:
    op: str  # one of + - * /
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class ExternalCall:
    name: str  # without the leading '@'
    args: tuple


@dataclass(frozen=True)
class Aggregate:
    kind: str  # max | min | avg
    elements: tuple = ()  # term-list form: #max{a, b}
    expr: "Term" = None  # comprehension form: #avg{expr : cond}
    condition: tuple = ()  # condition atoms of the comprehension

    @property
    def is_comprehension(self) -> bool:
        return self.expr is not None


Term = Union[Const, Var, Arith, ExternalCall, Aggregate]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self):
        return (self.predicate, self.arity)


@dataclass(frozen=True)
class Comparison:
    op: str
    left: Term
    right: Term


@dataclass(frozen=True)
class Binding:
    var: Var
    expr: Term


BodyElement = Union[Atom, Comparison, Binding]


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple


@dataclass(frozen=True)
class Program:
    rules: tuple
    externals: tuple = field(default=())  # declared external names, no '@'


def term_variables(term: Term):
    """All variables occurring in a term, comprehension-bound ones included."""
    if isinstance(term, Var):
        yield term
    elif isinstance(term, Arith):
        yield from term_variables(term.left)
        yield from term_variables(term.right)
    elif isinstance(term, ExternalCall):
        for a in term.args:
            yield from term_variables(a)
    elif isinstance(term, Aggregate):
        for e in term.elements:
            yield from term_variables(e)
        if term.expr is not None:
            yield from term_variables(term.expr)
        for atom in term.condition:
            for a in atom.args:
                yield from term_variables(a)


def term_externals(term: Term):
    if isinstance(term, Arith):
        yield from term_externals(term.left)
        yield from term_externals(term.right)
    elif isinstance(term, ExternalCall):
        yield term
        for a in term.args:
            yield from term_externals(a)
    elif isinstance(term, Aggregate):
        for e in term.elements:
            yield from term_externals(e)
        if term.expr is not None:
            yield from term_externals(term.expr)


def rule_externals(rule: Rule):
    """Every external call appearing anywhere in a rule."""
    for el in rule.body:
        if isinstance(el, Comparison):
            yield from term_externals(el.left)
            yield from term_externals(el.right)
        elif isinstance(el, Binding):
            yield from term_externals(el.expr)


def format_value(value) -> str:
    """Canonical text form of a ground value (used by fact files and heads)."""
    if isinstance(value, str):
        return value if _BARE.match(value) else '"%s"' % value.replace('"', '\\"')
    if isinstance(value, float) and value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def format_term(term: Term) -> str:
    if isinstance(term, Const):
        return format_value(term.value)
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Arith):
        return f"({format_term(term.left)} {term.op} {format_term(term.right)})"
    if isinstance(term, ExternalCall):
        return "@%s(%s)" % (term.name, ",".join(format_term(a) for a in term.args))
    if isinstance(term, Aggregate):
        if term.is_comprehension:
            cond = ",".join(format_atom(a) for a in term.condition)
            return "#%s{%s : %s}" % (term.kind, format_term(term.expr), cond)
        return "#%s{%s}" % (term.kind, ",".join(format_term(e) for e in term.elements))
    raise TypeError(f"not a term: {term!r}")


def format_atom(atom: Atom) -> str:
    if not atom.args:
        return atom.predicate
    return "%s(%s)" % (atom.predicate, ",".join(format_term(a) for a in atom.args))


def format_body_element(el: BodyElement) -> str:
    if isinstance(el, Atom):
        return format_atom(el)
    if isinstance(el, Comparison):
        return f"{format_term(el.left)} {el.op} {format_term(el.right)}"
    if isinstance(el, Binding):
        return f"{el.var.name} = {format_term(el.expr)}"
    raise TypeError(f"not a body element: {el!r}")


def format_rule(rule: Rule) -> str:
    body = ", ".join(format_body_element(el) for el in rule.body)
    return f"{format_atom(rule.head)} <- {body}."


def format_program(program: Program) -> str:
    return "\n".join(format_rule(r) for r in program.rules) + "\n"
