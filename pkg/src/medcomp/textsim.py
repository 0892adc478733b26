"""Token-bag string similarity: Cosine, Extended Jaccard, Jensen-Shannon."""

from __future__ import annotations

import enum
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ConfigError


class Metric(str, enum.Enum):
    COSINE = "cosine"
    EXTENDED_JACCARD = "extended_jaccard"
    JENSEN_SHANNON = "jensen_shannon"

    @classmethod
    def parse(cls, name: str | "Metric") -> "Metric":
        try:
            return cls(name)
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown metric {name!r} (choose from {choices})") from None


@dataclass(frozen=True)
class TokenBag:
    counts: Mapping[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __bool__(self) -> bool:
        return bool(self.counts)

    def __hash__(self) -> int:
        return hash(frozenset(self.counts.items()))


_NON_ALNUM = re.compile(r"[\W_]+")


def _camel_split(fragment: str) -> Iterable[str]:
    start = 0
    for i in range(1, len(fragment)):
        if fragment[i - 1].islower() and fragment[i].isupper():
            yield fragment[start:i]
            start = i
    yield fragment[start:]


def tokenize(label: str) -> TokenBag:
    tokens = Counter()
    for fragment in _NON_ALNUM.split(label):
        for piece in _camel_split(fragment):
            if piece:
                tokens[piece.lower()] += 1
    return TokenBag(dict(tokens))


def _dot(a: TokenBag, b: TokenBag) -> int:
    return sum(a.counts[t] * b.counts[t] for t in sorted(a.counts.keys() & b.counts.keys()))


def _sq_norm(a: TokenBag) -> int:
    return sum(c * c for c in a.counts.values())


def _jensen_shannon(a: TokenBag, b: TokenBag) -> float:
    ta, tb = a.total, b.total
    acc = 0.0
    for token in sorted(a.counts.keys() | b.counts.keys()):
        p = a.counts.get(token, 0) / ta
        q = b.counts.get(token, 0) / tb
        s = p + q
        lo, hi = sorted((p, q))
        # add in a fixed order so swapping the bags gives bit-identical sums
        term = hi * math.log(2 * hi / s)
        if lo:
            term += lo * math.log(2 * lo / s)
        acc += term
    jsd = 0.5 * acc
    return 1.0 - jsd / math.log(2)


def similarity(a: TokenBag, b: TokenBag, metric: Metric | str = Metric.COSINE) -> float:
    metric = Metric.parse(metric)
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    if metric is Metric.COSINE:
        score = _dot(a, b) / math.sqrt(_sq_norm(a) * _sq_norm(b))
    elif metric is Metric.EXTENDED_JACCARD:
        dot = _dot(a, b)
        score = dot / (_sq_norm(a) + _sq_norm(b) - dot)
    else:
        score = _jensen_shannon(a, b)
    return min(1.0, max(0.0, score))


def annotation_similarity(a: Iterable[str], b: Iterable[str],
                          metric: Metric | str = Metric.COSINE) -> float:
    """Best similarity over all label pairs; 0 when either side has no labels."""
    bags_a = [tokenize(x) for x in a]
    bags_b = [tokenize(y) for y in b]
    if not bags_a or not bags_b:
        return 0.0
    return max(similarity(x, y, metric) for x in bags_a for y in bags_b)
