from __future__ import annotations

import random
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from medcomp.datarecon.expr import (
    evaluate, format_decimal, inverse_linear, parse_expression, parse_number, round_half_up,
)
from medcomp.errors import DivisionByZeroError, ExpressionSyntaxError, ValueParseError
from oracles import fraction_eval


def test_celsius_to_fahrenheit():
    e = parse_expression("({#Celsius} × 1,8) + 32")
    assert e.variable == "Celsius"
    assert evaluate(e, "100") == Decimal("212")
    assert evaluate(e, "-40") == Decimal("-40")
    assert evaluate(e, "36.6") == Decimal("97.88")


def test_precedence_and_unary():
    e = parse_expression("-{#x} + 2 * 3 - 8 / 4 / 2")
    assert e.evaluate_exact(1) == Fraction(4)
    assert parse_expression("2 - -{#x}").evaluate_exact(3) == 5


def test_comma_and_dot_are_the_same_separator():
    assert parse_expression("{#x} * 1,8").evaluate_exact(10) == parse_expression("{#x} * 1.8").evaluate_exact(10)
    assert parse_number("0,5") == parse_number("0.5") == Fraction(1, 2)


@pytest.mark.parametrize("text", ["", "{#x} +", "({#x} * 2", "{#x} 2", "2 + 3", "{#x} + {#y}", "{#x} ^ 2",
                                  "{#x} + 1.2.3"])
def test_syntax_errors(text):
    with pytest.raises(ExpressionSyntaxError):
        parse_expression(text)


def test_division_by_zero():
    with pytest.raises(DivisionByZeroError):
        parse_expression("10 / ({#x} - 1)").evaluate_exact(1)


@pytest.mark.parametrize("text", ["abc", "1e5", "", "1,2,3"])
def test_bad_numbers(text):
    with pytest.raises(ValueParseError):
        parse_number(text)


def test_rounding_is_half_up_away_from_zero():
    assert format_decimal(Fraction(5, 10), 0) == "1"
    assert format_decimal(Fraction(-5, 10), 0) == "-1"
    assert format_decimal(Fraction(1, 3)) == "0.333333"
    assert format_decimal(Fraction(2, 3)) == "0.666667"
    assert format_decimal(Fraction(-1, 10**9)) == "0"
    assert round_half_up(Fraction(125, 1000), 2) == Decimal("0.13")


def test_linear_inverse_examples():
    inv = inverse_linear(parse_expression("({#C} × 1,8) + 32"))
    assert inv.evaluate_exact(212) == 100
    assert inverse_linear(parse_expression("{#x} * {#x}")) is None
    assert inverse_linear(parse_expression("0 * {#x} + 1")) is None
    third = inverse_linear(parse_expression("{#x} * 3"))
    assert third.evaluate_exact(1) == Fraction(1, 3)


def _random_expr(rng: random.Random, depth: int) -> str:
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.4:
            return "{#x}"
        whole, frac = rng.randint(0, 99), rng.randint(0, 99)
        return f"{whole}{rng.choice('.,')}{frac:02d}" if rng.random() < 0.5 else str(whole)
    if rng.random() < 0.1:
        return f"-({_random_expr(rng, depth - 1)})"
    op = rng.choice(["+", "-", "*", "/", "×", "÷"])
    return f"({_random_expr(rng, depth - 1)} {op} {_random_expr(rng, depth - 1)})"


def test_random_expressions_match_fraction_oracle():
    rng = random.Random(11)
    checked = 0
    while checked < 1000:
        text = _random_expr(rng, 4)
        if "{#x}" not in text:
            continue
        x = Fraction(rng.randint(-500, 500), rng.choice([1, 2, 10, 100]))
        try:
            want = fraction_eval(text.replace(",", "."), x)
        except ZeroDivisionError:
            with pytest.raises(DivisionByZeroError):
                parse_expression(text).evaluate_exact(x)
        else:
            assert parse_expression(text).evaluate_exact(x) == want, text
        checked += 1


def test_render_round_trips():
    rng = random.Random(5)
    for _ in range(300):
        text = _random_expr(rng, 3)
        if "{#x}" not in text:
            continue
        e = parse_expression(text)
        again = parse_expression(e.render())
        for x in (Fraction(3), Fraction(-7, 2)):
            try:
                assert again.evaluate_exact(x) == e.evaluate_exact(x)
            except DivisionByZeroError:
                pass


@given(st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**4),
       st.fractions(min_value=-100, max_value=100, max_denominator=100).filter(lambda a: a != 0),
       st.fractions(min_value=-100, max_value=100, max_denominator=100))
def test_linear_inverse_is_exact(x, a, b):
    e = parse_expression(f"{{#x}} * ({a.numerator} / {a.denominator}) + ({b.numerator} / {b.denominator})")
    assert inverse_linear(e).evaluate_exact(e.evaluate_exact(x)) == x
