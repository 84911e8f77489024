"""Propositional epistemic logic: formulas, a recursive-descent parser, and
finite Kripke-model evaluation.

Grammar (precedence high to low, with `->` right-associative):

    formula  := implies
    implies  := or ('->' implies)?
    or       := and ('|' and)*
    and      := unary ('&' unary)*
    unary    := '!' unary | 'K{' agent '}' unary | atom | '(' formula ')'
    atom     := identifier

K{i} phi holds at a point iff phi holds at every point the agent i considers
possible from there.  The semantics is all this module ships; it makes no
claim about what the semantics does or does not ground philosophically.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from itertools import product


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownAgent(KeyError):
    pass


class UnknownPoint(KeyError):
    pass


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Knows(Formula):
    agent: str
    operand: Formula


_TOKEN_RE = re.compile(r"\s*(K\{[^}]*\}|->|[!&|()]|[A-Za-z_][A-Za-z0-9_]*)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise FormulaSyntaxError(f"unexpected character {stripped[0]!r}",
                                     len(text) - len(stripped))
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self):
        return self.tokens[self.index][0] if self.index < len(self.tokens) else None

    def advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def position(self) -> int:
        if self.index < len(self.tokens):
            return self.tokens[self.index][1]
        return len(self.text)

    def parse(self) -> Formula:
        f = self.implies()
        if self.peek() is not None:
            raise FormulaSyntaxError(f"unexpected token {self.peek()!r}", self.position())
        return f

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.advance()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek() == "|":
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek() == "&":
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        token = self.peek()
        if token is None:
            raise FormulaSyntaxError("unexpected end of input", self.position())
        if token == "!":
            self.advance()
            return Not(self.unary())
        if token.startswith("K{"):
            self.advance()
            agent = token[2:-1].strip()
            if not agent:
                raise FormulaSyntaxError("empty agent name", self.position())
            return Knows(agent, self.unary())
        if token == "(":
            self.advance()
            inner = self.implies()
            if self.peek() != ")":
                raise FormulaSyntaxError("expected ')'", self.position())
            self.advance()
            return inner
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", token):
            self.advance()
            return Atom(token)
        raise FormulaSyntaxError(f"unexpected token {token!r}", self.position())


def parse(text: str) -> Formula:
    return _Parser(text).parse()


_PRECEDENCE = {Implies: 1, Or: 2, And: 3, Not: 4, Knows: 4, Atom: 5}


def pretty(f: Formula) -> str:
    """Minimal-parenthesis rendering; parse(pretty(f)) == f."""
    def render(node: Formula, parent_level: int, right_of_implies: bool = False) -> str:
        level = _PRECEDENCE[type(node)]
        if isinstance(node, Atom):
            text = node.name
        elif isinstance(node, Not):
            text = "!" + render(node.operand, level)
        elif isinstance(node, Knows):
            text = f"K{{{node.agent}}} " + render(node.operand, level)
        elif isinstance(node, And):
            text = render(node.left, level) + " & " + render(node.right, level + 1)
        elif isinstance(node, Or):
            text = render(node.left, level) + " | " + render(node.right, level + 1)
        else:
            text = render(node.left, level + 1) + " -> " + render(node.right, level, True)
        if level < parent_level or (level == parent_level and not right_of_implies
                                    and isinstance(node, Implies)):
            return "(" + text + ")"
        return text

    return render(f, 0)


@dataclass(frozen=True)
class KripkeModel:
    """Finite pointed structures: valuation plus per-agent accessibility.

    With require_s5 (the default) each agent's relation must be an
    equivalence relation over the points.
    """

    points: tuple
    valuation: dict  # point -> frozenset of true atom names
    accessibility: dict  # agent -> frozenset of (point, point) pairs
    require_s5: bool = True

    def __post_init__(self):
        point_set = set(self.points)
        for point in self.valuation:
            if point not in point_set:
                raise UnknownPoint(point)
        for agent, relation in self.accessibility.items():
            for a, b in relation:
                if a not in point_set or b not in point_set:
                    raise UnknownPoint((a, b))
            if self.require_s5:
                self._check_equivalence(agent, relation, point_set)

    @staticmethod
    def _check_equivalence(agent, relation, points):
        rel = set(relation)
        for p in points:
            if (p, p) not in rel:
                raise ValueError(f"agent {agent!r}: relation not reflexive at {p!r}")
        for a, b in rel:
            if (b, a) not in rel:
                raise ValueError(f"agent {agent!r}: relation not symmetric at {(a, b)!r}")
        for a, b in rel:
            for c, d in rel:
                if b == c and (a, d) not in rel:
                    raise ValueError(f"agent {agent!r}: relation not transitive at {(a, d)!r}")

    def agents(self):
        return set(self.accessibility)

    def successors(self, agent, point):
        if agent not in self.accessibility:
            raise UnknownAgent(agent)
        return [b for a, b in self.accessibility[agent] if a == point]

    @classmethod
    def from_json(cls, text: str, require_s5: bool | None = None) -> "KripkeModel":
        """Load from {"points": [...], "valuation": {point: [atoms]},
        "accessibility": {agent: [[a, b], ...]}, "s5": bool}."""
        data = json.loads(text)
        s5 = data.get("s5", True) if require_s5 is None else require_s5
        return cls(
            points=tuple(data["points"]),
            valuation={p: frozenset(v) for p, v in data.get("valuation", {}).items()},
            accessibility={
                agent: frozenset((a, b) for a, b in pairs)
                for agent, pairs in data.get("accessibility", {}).items()
            },
            require_s5=s5,
        )


def evaluate(model: KripkeModel, point, f: Formula) -> bool:
    if point not in model.points:
        raise UnknownPoint(point)
    if isinstance(f, Atom):
        return f.name in model.valuation.get(point, frozenset())
    if isinstance(f, Not):
        return not evaluate(model, point, f.operand)
    if isinstance(f, And):
        return evaluate(model, point, f.left) and evaluate(model, point, f.right)
    if isinstance(f, Or):
        return evaluate(model, point, f.left) or evaluate(model, point, f.right)
    if isinstance(f, Implies):
        return (not evaluate(model, point, f.left)) or evaluate(model, point, f.right)
    if isinstance(f, Knows):
        return all(evaluate(model, q, f.operand) for q in model.successors(f.agent, point))
    raise TypeError(f"not a formula: {f!r}")


def duality_check(model: KripkeModel, point, agent, f: Formula) -> bool:
    """!K{i}!phi must agree with the existence of an accessible phi-point.

    A False return is a bug sentinel, not a meaningful model property.
    """
    lhs = evaluate(model, point, Not(Knows(agent, Not(f))))
    rhs = any(evaluate(model, q, f) for q in model.successors(agent, point))
    return lhs == rhs


def random_s5_model(rng_ints, n_points: int, atoms: list[str], agents: list[str]) -> KripkeModel:
    """Random S5 model: each agent's relation is induced by a random
    partition of the points.  rng_ints is a callable (bound) -> int in
    [0, bound)."""
    points = tuple(f"p{i}" for i in range(n_points))
    valuation = {
        p: frozenset(a for a in atoms if rng_ints(2) == 1) for p in points
    }
    accessibility = {}
    for agent in agents:
        labels = [rng_ints(n_points) for _ in points]
        relation = frozenset(
            (a, b)
            for (a, la), (b, lb) in product(zip(points, labels), repeat=2)
            if la == lb
        )
        accessibility[agent] = relation
    return KripkeModel(points, valuation, accessibility)
