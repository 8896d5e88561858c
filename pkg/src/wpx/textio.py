"""Text formats: the ``.lha`` model grammar, the ``.prob`` problem grammar,
model serialization, and the JSON explanation report.

The model grammar is line-oriented and sectioned::

    vars b t

    location loc1 {
      inv: b >= 0; b <= 10;
      rate b in [-2, -2];
      rate t in [1, 1];
    }

    trans loc1 -> loc2 {
      label: move;
      guard: t >= 1;
      reset t in [0, 0];
    }

    init loc1 { b = 10; t = 0; }

Constraints are conjunctions of closed linear comparisons
(``expr <= expr``, ``expr >= expr``, ``expr = expr``); strict comparisons
are rejected with a dedicated message.  Rational literals may be integers,
exact decimals (``1.25``) or fractions (``7/2``).  ``#`` starts a comment.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .model import (
    GoalSpec,
    HybridAutomaton,
    LinearConstraint,
    LinearExpression,
    Location,
    PlanningProblem,
    Polyhedron,
    Rational,
    RateInterval,
    RateSpec,
    Relation,
    Reset,
    ResetAction,
    ResetKind,
    Transition,
    validate_model,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__("line %d, column %d: %s" % (line, column, message))
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class ModelDocument:
    automaton: HybridAutomaton
    source: str


@dataclass(frozen=True)
class ProblemDocument:
    model_ref: Optional[str]
    problem: PlanningProblem


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r]+)
    | (?P<comment>\#[^\n]*)
    | (?P<newline>\n)
    | (?P<number>\d+(?:\.\d+)?(?:/\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<arrow>->)
    | (?P<strict_ne>!=|<(?!=)|>(?!=))
    | (?P<op><=|>=|=|\{|\}|\[|\]|\(|\)|,|;|:|\+|-|\*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("unexpected character %r" % text[pos], line, col)
        kind = m.lastgroup or ""
        value = m.group()
        if kind == "newline":
            line += 1
            col = 1
        else:
            if kind == "strict_ne":
                raise ParseError(
                    "strict comparison %r is not supported; only closed constraints "
                    "(<=, >=, =) are accepted" % value,
                    line,
                    col,
                )
            if kind not in ("ws", "comment"):
                tokens.append(_Token(kind if kind != "op" else value, value, line, col))
            col += len(value)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def next(self) -> _Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def fail(self, message: str) -> "ParseError":
        tok = self.peek()
        return ParseError(message, tok.line, tok.column)

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.fail("expected %r, found %r" % (kind, tok.text or "end of input"))
        return self.next()

    def accept(self, kind: str) -> Optional[_Token]:
        if self.peek().kind == kind:
            return self.next()
        return None

    # --- rationals and linear expressions -------------------------------

    def parse_rational(self) -> Rational:
        sign = 1
        while True:
            if self.accept("-"):
                sign = -sign
            elif self.accept("+"):
                pass
            else:
                break
        tok = self.expect("number")
        return sign * Fraction(tok.text)

    def parse_linear_expression(self) -> LinearExpression:
        coeffs: Dict[str, Rational] = {}
        constant = Fraction(0)
        first = True
        while True:
            tok = self.peek()
            if first:
                sign = Fraction(1)
                if tok.kind in ("+", "-"):
                    sign = Fraction(-1) if tok.kind == "-" else Fraction(1)
                    self.next()
            else:
                if tok.kind not in ("+", "-"):
                    break
                sign = Fraction(-1) if tok.kind == "-" else Fraction(1)
                self.next()
            first = False
            tok = self.peek()
            if tok.kind == "number":
                value = Fraction(self.next().text)
                if self.accept("*"):
                    var = self.expect("name").text
                    coeffs[var] = coeffs.get(var, Fraction(0)) + sign * value
                else:
                    constant += sign * value
            elif tok.kind == "name":
                var = self.next().text
                coeffs[var] = coeffs.get(var, Fraction(0)) + sign
            else:
                raise self.fail("expected a number or variable")
        return LinearExpression.build(coeffs, constant)

    def parse_constraint(self) -> LinearConstraint:
        left = self.parse_linear_expression()
        tok = self.peek()
        if tok.kind == "<=":
            relation = Relation.LE
        elif tok.kind == ">=":
            relation = Relation.GE
        elif tok.kind == "=":
            relation = Relation.EQ
        else:
            raise self.fail("expected a relation (<=, >=, =)")
        self.next()
        right = self.parse_linear_expression()
        coeffs = dict(left.coefficients)
        for var, coeff in right.coefficients:
            coeffs[var] = coeffs.get(var, Fraction(0)) - coeff
        expr = LinearExpression.build(coeffs, left.constant - right.constant)
        return LinearConstraint(expr, relation)

    def parse_constraint_list(self) -> List[LinearConstraint]:
        """Semicolon-separated constraints, stopping before '}' or a keyword."""
        out: List[LinearConstraint] = []
        while True:
            out.append(self.parse_constraint())
            if not self.accept(";"):
                break
            if self.peek().kind in ("}", "eof"):
                break
            if self.peek().kind == "name" and self.peek().text in ("rate", "inv", "label", "guard", "reset"):
                break
        return out

    def parse_interval(self) -> Tuple[Rational, Rational]:
        self.expect("[")
        lo = self.parse_rational()
        self.expect(",")
        hi = self.parse_rational()
        self.expect("]")
        return lo, hi


def _keyword(parser: _Parser) -> Optional[str]:
    tok = parser.peek()
    if tok.kind == "name":
        return tok.text
    return None


def parse_model(text: str, source: str = "<string>") -> ModelDocument:
    """Parse an ``.lha`` document into a validated automaton."""
    p = _Parser(text)
    variables: List[str] = []
    locations: List[Location] = []
    loc_ids: Dict[str, int] = {}
    transitions: List[Transition] = []
    labels: List[str] = []
    initial: Optional[Tuple[int, Polyhedron]] = None
    pending_transitions: List[Tuple[str, str, str, Polyhedron, Reset, int, int]] = []

    while p.peek().kind != "eof":
        word = _keyword(p)
        if word == "vars":
            p.next()
            while p.peek().kind == "name" and p.peek().text not in (
                "vars", "location", "trans", "init"
            ):
                variables.append(p.next().text)
        elif word == "location":
            p.next()
            name_tok = p.expect("name")
            if name_tok.text in loc_ids:
                raise ParseError("duplicate location %r" % name_tok.text, name_tok.line, name_tok.column)
            p.expect("{")
            inv_constraints: List[LinearConstraint] = []
            rates: Dict[str, Tuple[Rational, Rational]] = {}
            while not p.accept("}"):
                inner = _keyword(p)
                if inner == "inv":
                    p.next()
                    p.expect(":")
                    inv_constraints.extend(p.parse_constraint_list())
                elif inner == "rate":
                    p.next()
                    var = p.expect("name").text
                    in_tok = p.expect("name")
                    if in_tok.text != "in":
                        raise ParseError("expected 'in'", in_tok.line, in_tok.column)
                    rates[var] = p.parse_interval()
                    p.accept(";")
                else:
                    raise p.fail("expected 'inv', 'rate' or '}'")
            loc_ids[name_tok.text] = len(locations)
            locations.append(
                Location(
                    id=len(locations),
                    name=name_tok.text,
                    invariant=Polyhedron(tuple(inv_constraints)),
                    rates=RateSpec.build(rates),
                )
            )
        elif word == "trans":
            p.next()
            src_tok = p.expect("name")
            p.expect("arrow")
            dst_tok = p.expect("name")
            p.expect("{")
            label = "act"
            guard_constraints: List[LinearConstraint] = []
            resets: Dict[str, Tuple[Rational, Rational]] = {}
            while not p.accept("}"):
                inner = _keyword(p)
                if inner == "label":
                    p.next()
                    p.expect(":")
                    label = p.expect("name").text
                    p.accept(";")
                elif inner == "guard":
                    p.next()
                    p.expect(":")
                    guard_constraints.extend(p.parse_constraint_list())
                elif inner == "reset":
                    p.next()
                    var = p.expect("name").text
                    in_tok = p.expect("name")
                    if in_tok.text != "in":
                        raise ParseError("expected 'in'", in_tok.line, in_tok.column)
                    resets[var] = p.parse_interval()
                    p.accept(";")
                else:
                    raise p.fail("expected 'label', 'guard', 'reset' or '}'")
            pending_transitions.append(
                (src_tok.text, dst_tok.text, label,
                 Polyhedron(tuple(guard_constraints)), Reset.build(resets),
                 src_tok.line, src_tok.column)
            )
            if label not in labels:
                labels.append(label)
        elif word == "init":
            p.next()
            name_tok = p.expect("name")
            init_constraints: List[LinearConstraint] = []
            p.expect("{")
            if p.peek().kind != "}":
                init_constraints.extend(p.parse_constraint_list())
            p.expect("}")
            if name_tok.text not in loc_ids:
                raise ParseError("unknown initial location %r" % name_tok.text, name_tok.line, name_tok.column)
            initial = (loc_ids[name_tok.text], Polyhedron(tuple(init_constraints)))
        else:
            raise p.fail("expected 'vars', 'location', 'trans' or 'init'")

    if initial is None:
        raise ParseError("missing 'init' section", p.peek().line, p.peek().column)

    for src, dst, label, guard, reset, line, col in pending_transitions:
        if src not in loc_ids:
            raise ParseError("unknown location %r in transition" % src, line, col)
        if dst not in loc_ids:
            raise ParseError("unknown location %r in transition" % dst, line, col)
        transitions.append(
            Transition(
                id=len(transitions),
                source=loc_ids[src],
                target=loc_ids[dst],
                label=label,
                guard=guard,
                reset=reset,
            )
        )

    automaton = HybridAutomaton(
        locations=tuple(locations),
        variables=tuple(variables),
        transitions=tuple(transitions),
        labels=tuple(labels),
        initial=initial,
    )
    violations = validate_model(automaton)
    if violations:
        raise ParseError("; ".join(violations), 1, 1)
    return ModelDocument(automaton=automaton, source=source)


def parse_problem(text: str, model: ModelDocument, source: str = "<string>") -> ProblemDocument:
    """Parse a ``.prob`` document against an already-parsed model.

    Sections: optional ``model <path>``, optional ``init <loc> { ... }``
    override, mandatory ``goal <loc> [{ ... }]`` and ``depth <n>``.
    """
    model_ref: Optional[str] = None
    lines = text.split("\n")
    for i, raw in enumerate(lines):
        stripped = raw.strip()
        if stripped.startswith("model ") or stripped == "model":
            model_ref = stripped[len("model"):].strip() or None
            lines[i] = ""
    text = "\n".join(lines)

    p = _Parser(text)
    automaton = model.automaton
    init = automaton.initial
    goal: Optional[GoalSpec] = None
    depth: Optional[int] = None

    def resolve(name_tok: _Token) -> int:
        loc = automaton.location_by_name(name_tok.text)
        if loc is None:
            raise ParseError("unknown location %r" % name_tok.text, name_tok.line, name_tok.column)
        return loc.id

    while p.peek().kind != "eof":
        word = _keyword(p)
        if word == "init":
            p.next()
            name_tok = p.expect("name")
            constraints: List[LinearConstraint] = []
            p.expect("{")
            if p.peek().kind != "}":
                constraints.extend(p.parse_constraint_list())
            p.expect("}")
            init = (resolve(name_tok), Polyhedron(tuple(constraints)))
        elif word == "goal":
            p.next()
            name_tok = p.expect("name")
            constraints = []
            if p.accept("{"):
                if p.peek().kind != "}":
                    constraints.extend(p.parse_constraint_list())
                p.expect("}")
            goal = GoalSpec(location=resolve(name_tok), region=Polyhedron(tuple(constraints)))
        elif word == "depth":
            p.next()
            tok = p.expect("number")
            try:
                depth = int(tok.text)
            except ValueError:
                raise ParseError("depth must be a non-negative integer", tok.line, tok.column)
        else:
            raise p.fail("expected 'model', 'init', 'goal' or 'depth'")

    if goal is None:
        raise ParseError("missing 'goal' section", p.peek().line, p.peek().column)
    if depth is None:
        raise ParseError("missing 'depth' section", p.peek().line, p.peek().column)
    problem = PlanningProblem(domain=automaton, init=init, goal=goal, depth=depth)
    return ProblemDocument(model_ref=model_ref, problem=problem)


# --- serialization -------------------------------------------------------


def format_rational(value: Rational) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return "%d/%d" % (value.numerator, value.denominator)


def _format_expression(expr: LinearExpression) -> str:
    parts: List[str] = []
    for var, coeff in expr.coefficients:
        if coeff == 1:
            term = var
        elif coeff == -1:
            term = "-" + var
        else:
            term = "%s*%s" % (format_rational(coeff), var)
        if parts and not term.startswith("-"):
            parts.append("+ " + term)
        elif parts:
            parts.append("- " + term.lstrip("-"))
        else:
            parts.append(term)
    if expr.constant != 0 or not parts:
        c = expr.constant
        if parts:
            parts.append(("+ " if c >= 0 else "- ") + format_rational(abs(c)))
        else:
            parts.append(format_rational(c))
    return " ".join(parts)


def _format_constraint(c: LinearConstraint) -> str:
    return "%s %s 0" % (_format_expression(c.expression), c.relation.value)


def serialize_model(automaton: HybridAutomaton) -> str:
    """Render an automaton back to the ``.lha`` grammar (round-trip stable)."""
    lines: List[str] = []
    lines.append("vars " + " ".join(automaton.variables))
    lines.append("")
    for loc in automaton.locations:
        lines.append("location %s {" % loc.name)
        for c in loc.invariant.constraints:
            lines.append("  inv: %s;" % _format_constraint(c))
        for var, iv in loc.rates.intervals:
            lines.append(
                "  rate %s in [%s, %s];" % (var, format_rational(iv.lower), format_rational(iv.upper))
            )
        lines.append("}")
    lines.append("")
    for t in automaton.transitions:
        src = automaton.location(t.source).name
        dst = automaton.location(t.target).name
        lines.append("trans %s -> %s {" % (src, dst))
        lines.append("  label: %s;" % t.label)
        for c in t.guard.constraints:
            lines.append("  guard: %s;" % _format_constraint(c))
        for var, act in t.reset.actions:
            if act.kind is ResetKind.ASSIGN_INTERVAL:
                lines.append(
                    "  reset %s in [%s, %s];"
                    % (var, format_rational(act.lower), format_rational(act.upper))
                )
        lines.append("}")
    lines.append("")
    init_loc, init_region = automaton.initial
    body = " ".join("%s;" % _format_constraint(c) for c in init_region.constraints)
    lines.append("init %s { %s }" % (automaton.location(init_loc).name, body))
    lines.append("")
    return "\n".join(lines)


def _json_number(value: Rational):
    if value.denominator == 1:
        return value.numerator
    return format_rational(value)


def serialize_report(report) -> str:
    """Serialize an ExplanationReport to deterministic JSON.

    Non-integral rationals are emitted as exact ``p/q`` strings.
    """
    doc = {
        "problem": report.problem_summary,
        "path_count": report.path_count,
        "chain": list(report.chain_locations),
        "verdicts": [
            {
                "location": v.location_name,
                "status": "unreachable" if v.status == "UNSAT" else "reachable",
                "paths_checked": v.paths_checked,
            }
            for v in report.verdicts
        ],
        "explanation": report.explanation_json(),
        "timings_ms": {
            "path_enumeration": report.timings_ms["path_enumeration"],
            "lcs": report.timings_ms["lcs"],
            "reachability": report.timings_ms["reachability"],
        },
    }
    if report.annotations:
        doc["annotations"] = list(report.annotations)
    if report.witness_plan is not None:
        doc["witness_plan"] = {
            "steps": [
                [_json_number(t), label] for t, label in report.witness_plan.steps
            ],
            "makespan": _json_number(report.witness_plan.makespan),
        }
    return json.dumps(doc, indent=2, sort_keys=False)
