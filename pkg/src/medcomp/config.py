"""Tunable parameters of matchmaking and transformation generation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any

from ._json import expect_object, read_document
from .errors import ConfigError
from .ontology import DegreeValues
from .textsim import Metric


@dataclass(frozen=True)
class MatchConfig:
    metric: Metric = Metric.COSINE
    alpha: float = 0.7   # weight of the logic side in the combined score
    sigma: float = 0.8   # syntactic threshold used when logic fails everywhere
    tau: float = 0.5     # acceptance threshold on the combined score
    k: int = 3           # max activity-group size
    m: int = 3           # max composition length
    degrees: DegreeValues = field(default_factory=DegreeValues)
    places: int = 6      # fractional digits kept by unit conversions

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", Metric.parse(self.metric))
        for name in ("alpha", "sigma", "tau"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0 <= value <= 1:
                raise ConfigError(f"{name} must be a number in [0, 1], got {value!r}")
        for name in ("k", "m"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {value!r}")
        if isinstance(self.places, bool) or not isinstance(self.places, int) or self.places < 0:
            raise ConfigError(f"places must be a non-negative integer, got {self.places!r}")

    def with_overrides(self, **overrides: Any) -> "MatchConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["metric"] = self.metric.value
        out["degree_values"] = out.pop("degrees")
        del out["degree_values"]["fail"]
        return out


_KEYS = {"metric", "alpha", "sigma", "tau", "k", "m", "degree_values", "places"}


def load_config(document: Any) -> MatchConfig:
    data = expect_object(read_document(document, "config"), "config", allowed=_KEYS)
    kwargs = {k: v for k, v in data.items() if k != "degree_values"}
    if "degree_values" in data:
        dv = expect_object(data["degree_values"], "config.degree_values",
                           allowed={"exact", "plugin", "subsumes"})
        kwargs["degrees"] = DegreeValues(**dv)
    try:
        return MatchConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
