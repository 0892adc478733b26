"""Arithmetic expressions over a single ``{#Name}`` placeholder.

Grammar::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "×" | "/" | "÷") unary)*
    unary   := "-" unary | atom
    atom    := NUMBER | "{#" NAME "}" | "(" expr ")"

Numbers accept either "." or "," as decimal separator. Evaluation is exact
(``Fraction``); rounding happens once, when a value is rendered.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Union

from ..errors import DivisionByZeroError, ExpressionSyntaxError, ValueParseError

DEFAULT_PLACES = 6


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


Node = Union[Num, Var, Neg, Bin]

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>\d+(?:[.,]\d+)?|[.,]\d+)
      | (?P<var>\{\#(?P<name>[^{}\s]+)\})
      | (?P<op>[-+*/()×÷−])
    )""",
    re.VERBOSE,
)
_OP_ALIASES = {"×": "*", "÷": "/", "−": "-"}
_NUMBER = re.compile(r"[+\-−]?(\d+(?:[.,]\d+)?|[.,]\d+)")


def parse_number(text: str) -> Fraction:
    """Exact value of a decimal literal; "," and "." both act as decimal separator."""
    s = text.strip()
    if not _NUMBER.fullmatch(s):
        raise ValueParseError(f"not a decimal number: {text!r}")
    return Fraction(s.replace(",", ".").replace("−", "-"))


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos:].lstrip()[0]!r} at offset {pos}")
        if m.group("num"):
            tokens.append(("num", m.group("num")))
        elif m.group("var"):
            tokens.append(("var", m.group("name")))
        else:
            op = m.group("op")
            tokens.append(("op", _OP_ALIASES.get(op, op)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ExpressionSyntaxError(f"unexpected end of expression in {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> Node:
        node = self.expr()
        if self.peek() is not None:
            raise ExpressionSyntaxError(f"unexpected token {self.peek()[1]!r} in {self.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek() == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Node:
        kind, text = self.take()
        if kind == "num":
            return Num(Fraction(text.replace(",", ".")))
        if kind == "var":
            return Var(text)
        if text == "(":
            node = self.expr()
            if self.take() != ("op", ")"):
                raise ExpressionSyntaxError(f"expected ')' in {self.text!r}")
            return node
        raise ExpressionSyntaxError(f"unexpected token {text!r} in {self.text!r}")


def _variables(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return _variables(node.operand)
    if isinstance(node, Bin):
        return _variables(node.left) | _variables(node.right)
    return set()


@dataclass(frozen=True)
class Expression:
    source: str
    root: Node
    variable: str

    def evaluate_exact(self, value: Fraction | int | str) -> Fraction:
        if isinstance(value, str):
            value = parse_number(value)
        return _eval(self.root, Fraction(value))

    def linear_form(self) -> tuple[Fraction, Fraction] | None:
        """(a, b) with expression == a*x + b, or None when not linear."""
        return _linear(self.root)

    def render(self, variable: Callable[[str], str] = lambda n: "{#" + n + "}",
               div: str = "/") -> str:
        return _render(self.root, variable, div, 0)

    def __str__(self) -> str:
        return self.source


def parse_expression(text: str) -> Expression:
    root = _Parser(text).parse()
    names = _variables(root)
    if len(names) != 1:
        raise ExpressionSyntaxError(
            f"expression must reference exactly one placeholder, found {sorted(names) or 'none'}")
    return Expression(text, root, names.pop())


def _eval(node: Node, x: Fraction) -> Fraction:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    left, right = _eval(node.left, x), _eval(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right == 0:
        raise DivisionByZeroError("division by zero")
    return left / right


def _linear(node: Node) -> tuple[Fraction, Fraction] | None:
    if isinstance(node, Num):
        return Fraction(0), node.value
    if isinstance(node, Var):
        return Fraction(1), Fraction(0)
    if isinstance(node, Neg):
        inner = _linear(node.operand)
        return None if inner is None else (-inner[0], -inner[1])
    left, right = _linear(node.left), _linear(node.right)
    if left is None or right is None:
        return None
    (a1, b1), (a2, b2) = left, right
    if node.op == "+":
        return a1 + a2, b1 + b2
    if node.op == "-":
        return a1 - a2, b1 - b2
    if node.op == "*":
        if a1 and a2:
            return None
        return a1 * b2 + a2 * b1, b1 * b2
    if a2 or b2 == 0:
        return None
    return a1 / b2, b1 / b2


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _render(node: Node, variable: Callable[[str], str], div: str, parent: int) -> str:
    if isinstance(node, Num):
        return format_fraction_literal(node.value).replace(" / ", f" {div} ")
    if isinstance(node, Var):
        return variable(node.name)
    if isinstance(node, Neg):
        return "-" + _render(node.operand, variable, div, 3)
    prec = _PREC[node.op]
    left = _render(node.left, variable, div, prec)
    # right operand of - and / needs parentheses at equal precedence
    right = _render(node.right, variable, div, prec + (node.op in "-/"))
    op = div if node.op == "/" else node.op
    text = f"{left} {op} {right}"
    return f"({text})" if prec < parent else text


def format_fraction_literal(value: Fraction) -> str:
    """Decimal literal when the fraction terminates, else ``(p / q)``."""
    d = value.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        text = format(Decimal(value.numerator) / Decimal(value.denominator), "f")
        if "." in text:
            text = text.rstrip("0").rstrip(".")
        return text
    return f"({value.numerator} / {value.denominator})"


def inverse_linear(expr: Expression, variable: str | None = None) -> Expression | None:
    """Algebraic inverse ``(y - b) / a`` of a linear expression, or None."""
    form = expr.linear_form()
    if form is None or form[0] == 0:
        return None
    a, b = form
    var = variable or expr.variable
    root: Node = Var(var)
    if b:
        root = Bin("-", root, Num(b)) if b > 0 else Bin("+", root, Num(-b))
    if a != 1:
        root = Bin("/", root, Num(a)) if _terminates(a) else Bin("*", root, Num(1 / a))
    return Expression(_render(root, lambda n: "{#" + n + "}", "/", 0), root, var)


def _terminates(value: Fraction) -> bool:
    return not format_fraction_literal(value).startswith("(")


def round_half_up(value: Fraction, places: int = DEFAULT_PLACES) -> Decimal:
    scaled = abs(value) * 10 ** places
    n = int(scaled + Fraction(1, 2))  # floor for non-negative values
    if value < 0:
        n = -n
    return Decimal(n).scaleb(-places)


def format_decimal(value: Fraction, places: int = DEFAULT_PLACES) -> str:
    """Round half-up to ``places`` fractional digits, drop trailing zeros."""
    d = round_half_up(value, places)
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    if text in ("-0", ""):
        text = "0"
    return text


def evaluate(expr: Expression, value: Fraction | int | str, places: int = DEFAULT_PLACES) -> Decimal:
    """Evaluate and round half-up to ``places`` fractional digits."""
    return Decimal(format_decimal(expr.evaluate_exact(value), places))
