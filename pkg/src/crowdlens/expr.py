"""Derived-metric expression language: parser, printer, evaluator, ordering.

Grammar (four binary operators, parentheses, unary minus)::

    expression := term (("+" | "-") term)*
    term       := factor (("*" | "/") factor)*
    factor     := "-" factor | primary
    primary    := NUMBER | IDENT | "(" expression ")"

Identifiers match ``[A-Za-z_][A-Za-z0-9_]*``. ``capacity`` is a reserved
builtin identifier bound per-place at evaluation time, so a density metric is
simply ``some_metric / capacity``.

Evaluation is total over real-or-missing values: any missing operand,
division by zero, or overflow yields missing (``None``). The evaluator never
returns NaN or infinities.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

CAPACITY_BUILTIN = "capacity"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
# decimal literal with optional fraction and exponent, so float repr round-trips
_NUMBER_RE = re.compile(r"\d+(\.\d+)?([eE][+-]?\d+)?")


class ExprError(ValueError):
    """Base class for expression-language errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class UnboundIdentifierError(ExprError):
    """An identifier had no binding at all (distinct from a missing value)."""


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class MetricRef:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


Expr = Union[Number, MetricRef, Neg, BinOp]


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | lparen | rparen | end
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch.isdigit():
            m = _NUMBER_RE.match(text, i)
            tokens.append(_Token("num", m.group(), i))
            i = m.end()
            continue
        if ch.isalpha() or ch == "_":
            m = _IDENT_RE.match(text, i)
            tokens.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        if ch in "+-*/":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expression(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            nxt = self.peek()
            # fold the sign into number literals so printing round-trips
            if nxt.kind == "num":
                self.advance()
                return Number(-float(nxt.text))
            return Neg(self.factor())
        return self.primary()

    def primary(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            return Number(float(tok.text))
        if tok.kind == "ident":
            return MetricRef(tok.text)
        if tok.kind == "lparen":
            node = self.expression()
            closing = self.advance()
            if closing.kind != "rparen":
                raise ExprSyntaxError("expected ')'", closing.offset)
            return node
        if tok.kind == "end":
            raise ExprSyntaxError("unexpected end of expression", tok.offset)
        raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)


def parse_expression(text: str) -> Expr:
    """Parse expression text to an AST; syntax errors carry the byte offset."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(_tokenize(text))
    node = parser.expression()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ExprSyntaxError(f"unexpected {trailing.text!r}", trailing.offset)
    return node


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PRECEDENCE[node.op]
    if isinstance(node, Neg):
        return 3
    return 4


def to_text(node: Expr) -> str:
    """Canonical text form; ``parse_expression(to_text(e))`` equals ``e``."""
    if isinstance(node, Number):
        return repr(node.value)
    if isinstance(node, MetricRef):
        return node.name
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        # parens keep "-(3.0)" distinct from the literal -3.0 and bind BinOps
        if isinstance(node.operand, (BinOp, Number)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        my = _PRECEDENCE[node.op]
        left = to_text(node.left)
        if _prec(node.left) < my:
            left = f"({left})"
        right = to_text(node.right)
        if _prec(node.right) <= my and isinstance(node.right, BinOp):
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


def references(node: Expr) -> set[str]:
    """All identifiers referenced by the expression, including builtins."""
    out: set[str] = set()
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, MetricRef):
            out.add(cur.name)
        elif isinstance(cur, Neg):
            stack.append(cur.operand)
        elif isinstance(cur, BinOp):
            stack.append(cur.left)
            stack.append(cur.right)
    return out


def evaluate(node: Expr, bindings: dict[str, Optional[float]]) -> Optional[float]:
    """Evaluate with real-or-missing semantics.

    Missing operands absorb; division by zero and non-finite results map to
    missing. Referencing an identifier absent from ``bindings`` raises
    UnboundIdentifierError: that is a programming error, not missing data.

    Implemented as an explicit-stack post-order walk, so recursion depth does
    not bound expression depth.
    """
    todo: list[tuple[Expr, bool]] = [(node, False)]
    values: list[Optional[float]] = []
    while todo:
        cur, expanded = todo.pop()
        if isinstance(cur, Number):
            values.append(cur.value)
        elif isinstance(cur, MetricRef):
            if cur.name not in bindings:
                raise UnboundIdentifierError(f"unbound identifier {cur.name!r}")
            values.append(bindings[cur.name])
        elif isinstance(cur, Neg):
            if not expanded:
                todo.append((cur, True))
                todo.append((cur.operand, False))
            else:
                v = values.pop()
                values.append(None if v is None else -v)
        elif isinstance(cur, BinOp):
            if not expanded:
                todo.append((cur, True))
                todo.append((cur.right, False))
                todo.append((cur.left, False))
            else:
                right = values.pop()
                left = values.pop()
                values.append(_apply(cur.op, left, right))
        else:
            raise TypeError(f"not an expression node: {cur!r}")
    return values[0]


def _apply(op: str, left: Optional[float], right: Optional[float]) -> Optional[float]:
    if left is None or right is None:
        return None
    if op == "+":
        result = left + right
    elif op == "-":
        result = left - right
    elif op == "*":
        result = left * right
    else:
        if right == 0.0:
            return None
        result = left / right
    return result if math.isfinite(result) else None


class MetricGraphError(ValueError):
    """Base class for metric dependency-graph errors."""


class UnknownMetricError(MetricGraphError):
    def __init__(self, metric_id: str, referenced_by: str):
        self.metric_id = metric_id
        super().__init__(f"metric {referenced_by!r} references unknown metric {metric_id!r}")


class MetricCycleError(MetricGraphError):
    def __init__(self, cycle_ids: list[str]):
        self.cycle_ids = cycle_ids
        super().__init__(f"cyclic metric dependencies: {{{', '.join(cycle_ids)}}}")


def resolve_metric_graph(defs: list) -> list[str]:
    """Topological evaluation order over MetricDefs.

    Base metrics come first, in input order; every derived metric follows its
    dependencies, input order breaking ties. ``capacity`` is a builtin, not a
    dependency.
    """
    ids = [d.id for d in defs]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise MetricGraphError(f"duplicate metric ids: {', '.join(dupes)}")
    known = set(ids)
    deps: dict[str, set[str]] = {}
    for d in defs:
        if d.expression is None:
            deps[d.id] = set()
            continue
        refs = references(parse_expression(d.expression)) - {CAPACITY_BUILTIN}
        for ref in sorted(refs):
            if ref not in known:
                raise UnknownMetricError(ref, d.id)
        deps[d.id] = refs
    order = [d.id for d in defs if d.expression is None]
    emitted = set(order)
    pending = [d.id for d in defs if d.expression is not None]
    while pending:
        ready = [mid for mid in pending if deps[mid] <= emitted]
        if not ready:
            raise MetricCycleError(sorted(pending))
        for mid in ready:
            order.append(mid)
            emitted.add(mid)
        pending = [mid for mid in pending if mid not in emitted]
    return order


def dependency_closure(defs_by_id: dict, metric_id: str) -> set[str]:
    """Transitive base-metric dependencies of a metric (itself, when base)."""
    target = defs_by_id[metric_id]
    if target.expression is None:
        return {metric_id}
    out: set[str] = set()
    stack = [metric_id]
    seen: set[str] = set()
    while stack:
        mid = stack.pop()
        if mid in seen:
            continue
        seen.add(mid)
        mdef = defs_by_id[mid]
        if mdef.expression is None:
            out.add(mid)
            continue
        for ref in references(parse_expression(mdef.expression)):
            if ref != CAPACITY_BUILTIN and ref in defs_by_id:
                stack.append(ref)
    return out
