"""A tiny arithmetic-expression language for user-supplied welfare functions.

One variable (``x``), rational and decimal literals, the binary operators
``+ - * / ^``, and the unary functions ``ln``, ``exp``, ``sqrt``, ``neg``.
Grammar, loosest binding first::

    expr   := term  (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ['^' unary]          right-associative
    atom   := NUMBER | 'x' | NAME '(' expr ')' | '(' expr ')'

Literals are kept as exact ``Fraction``s in the tree; evaluation is IEEE
floating point with ``ln(0) = -inf``.  A NaN or ``+inf`` result is an error.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ExpressionEvalError, ExpressionSyntaxError


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    """The single free variable, x."""


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class Call:
    name: str  # "ln" | "exp" | "sqrt"
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" | "-" | "*" | "/" | "^"
    left: "Expression"
    right: "Expression"


Expression = Union[Num, Var, Neg, Call, BinOp]

_FUNCTIONS = ("ln", "exp", "sqrt", "neg")

_TOKEN_RE = re.compile(
    r"(?P<num>\d+\.\d+|\d+|\.\d+)|(?P<name>[A-Za-z_]+)|(?P<op>[-+*/^()])"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        tokens.append((kind, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect_op(self, text):
        kind, value, pos = self.peek()
        if kind != "op" or value != text:
            raise ExpressionSyntaxError(
                f"expected {text!r}, found {value!r}" if kind != "end" else f"expected {text!r}",
                pos,
            )
        self.advance()

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.unary())
            else:
                return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return BinOp("^", node, self.unary())
        return node

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(Fraction(value))
        if kind == "name":
            if value == "x":
                return Var()
            if value in _FUNCTIONS:
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return Neg(inner) if value == "neg" else Call(value, inner)
            raise ExpressionSyntaxError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        found = "end of input" if kind == "end" else repr(value)
        raise ExpressionSyntaxError(
            f"expected a number, 'x', a function call, or '(', found {found}", pos
        )


def parse_expression(text: str) -> Expression:
    """Parse expression text into its unique AST under the grammar above."""
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    kind, value, pos = parser.peek()
    if kind != "end":
        raise ExpressionSyntaxError(f"unexpected {value!r} after the expression", pos)
    return node


# Precedence levels used by the canonical printer.
_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _decimal_literal(value: Fraction) -> str | None:
    """Exact decimal text for fractions with a 2^a * 5^b denominator."""
    if value < 0:
        return None
    remainder = value.denominator
    twos = fives = 0
    while remainder % 2 == 0:
        remainder //= 2
        twos += 1
    while remainder % 5 == 0:
        remainder //= 5
        fives += 1
    if remainder != 1:
        return None
    if twos == fives == 0:
        return str(value.numerator)
    places = max(twos, fives)
    digits = value.numerator * 10**places // value.denominator
    text = str(digits).rjust(places + 1, "0")
    return f"{text[:-places]}.{text[-places:]}"


def _prec(node):
    if isinstance(node, (Var, Call)):
        return _ATOM
    if isinstance(node, Num):
        if node.value < 0:
            return _ADD  # forces parens; negative literals are not parseable
        return _ATOM if _decimal_literal(node.value) is not None else _MUL
    if isinstance(node, Neg):
        return _NEG
    return {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}[node.op]


def _wrap(text, needs_parens):
    return f"({text})" if needs_parens else text


def format_expression(node: Expression) -> str:
    """Canonical text form; ``parse_expression`` inverts it node for node.

    The one exception is a hand-built ``Num`` whose value no numeric literal
    can spell (for example 1/3): it prints as a division, which reparses to
    an equal value and a stable string, but a different node.
    """
    if isinstance(node, Num):
        literal = _decimal_literal(node.value)
        return str(node.value) if literal is None else literal
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Call):
        return f"{node.name}({format_expression(node.operand)})"
    if isinstance(node, Neg):
        inner = format_expression(node.operand)
        return "-" + _wrap(inner, _prec(node.operand) < _NEG)
    left, right = format_expression(node.left), format_expression(node.right)
    if node.op == "^":
        # the grammar allows only an atom on the left and a unary on the right
        return _wrap(left, _prec(node.left) < _ATOM) + "^" + _wrap(
            right, _prec(node.right) < _NEG
        )
    mine = _prec(node)
    left = _wrap(left, _prec(node.left) < mine)
    right = _wrap(right, _prec(node.right) <= mine)  # all four are left-associative
    return f"{left}{node.op}{right}"


def _eval(node, x):
    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    if isinstance(node, Call):
        value = _eval(node.operand, x)
        if node.name == "ln":
            if value == 0:
                return -math.inf
            if value < 0:
                raise ExpressionEvalError(f"ln of a negative value ({value!r})")
            return math.log(value)
        if node.name == "exp":
            try:
                return math.exp(value)
            except OverflowError:
                raise ExpressionEvalError(f"exp overflow at argument {value!r}") from None
        if node.name == "sqrt":
            if value < 0:
                raise ExpressionEvalError(f"sqrt of a negative value ({value!r})")
            return math.sqrt(value)
        raise ExpressionEvalError(f"unknown function {node.name!r}")
    left = _eval(node.left, x)
    right = _eval(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        try:
            return left / right
        except ZeroDivisionError:
            raise ExpressionEvalError("division by zero") from None
    try:
        return math.pow(left, right)
    except ValueError:
        raise ExpressionEvalError(
            f"invalid power: base {left!r}, exponent {right!r}"
        ) from None
    except OverflowError:
        raise ExpressionEvalError(
            f"power overflow: base {left!r}, exponent {right!r}"
        ) from None


def evaluate_expression(expr: Expression, x) -> float:
    """Evaluate at ``x >= 0``.  Returns a float, possibly ``-inf``.

    IEEE semantics inside the tree; a final result of NaN or ``+inf`` raises
    :class:`ExpressionEvalError`.
    """
    x = float(x)
    if x < 0:
        raise ExpressionEvalError(f"expressions are evaluated on x >= 0, got {x!r}")
    result = _eval(expr, x)
    if math.isnan(result):
        raise ExpressionEvalError("expression evaluated to NaN")
    if result == math.inf:
        raise ExpressionEvalError("expression evaluated to +inf")
    return result


@dataclass(frozen=True)
class MonotonicityReport:
    """Outcome of a strict-increase check along a grid.

    ``failure`` is the first adjacent pair ``(x1, x2)`` with
    ``f(x1) >= f(x2)``, present iff ``increasing`` is false.
    """

    increasing: bool
    failure: tuple[float, float] | None = None


def check_increasing(expr: Expression, grid) -> MonotonicityReport:
    """Check strict increase of the expression along an ascending positive grid.

    Comparison is strict float comparison with no tolerance.  Evaluation
    errors propagate.
    """
    points = [float(g) for g in grid]
    if not points:
        raise ValueError("the grid must not be empty")
    if any(p <= 0 for p in points):
        raise ValueError("the grid must contain only positive values")
    if any(b <= a for a, b in zip(points, points[1:])):
        raise ValueError("the grid must be strictly ascending")
    previous = evaluate_expression(expr, points[0])
    for a, b in zip(points, points[1:]):
        current = evaluate_expression(expr, b)
        if not previous < current:
            return MonotonicityReport(False, (a, b))
        previous = current
    return MonotonicityReport(True, None)
