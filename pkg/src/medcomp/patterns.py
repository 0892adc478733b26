"""Pattern database: previously successful group -> composition matches, reused as a cache."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

from .errors import PersistenceError
from .procmodel import ActivityGroup, ProcessModel, external_io


@dataclass(frozen=True)
class MatchScore:
    logic: float
    syntactic: float
    combined: float
    io_integrity: float

    def to_dict(self) -> dict[str, float]:
        return {"logic": self.logic, "syntactic": self.syntactic,
                "combined": self.combined, "io_integrity": self.io_integrity}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "MatchScore":
        return cls(float(raw["logic"]), float(raw["syntactic"]), float(raw["combined"]),
                   float(raw["io_integrity"]))


def group_signature(p: ProcessModel, g: ActivityGroup) -> str:
    """Digest of the group's structure; independent of activity ids."""
    required, produced = external_io(p, g)
    payload = {
        "operations": [p.annotation(a).operation_concept for a in g.activity_ids],
        "shape": g.shape,
        "inputs": sorted(t.concept for t in required),
        "outputs": sorted(t.concept for t in produced),
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class PatternRecord:
    signature: str
    composition: tuple[tuple[str, str], ...]
    score: MatchScore
    created_at: str
    use_count: int = 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "signature": self.signature,
            "composition": [{"service": s, "operation": o} for s, o in self.composition],
            "score": self.score.to_dict(),
            "created_at": self.created_at,
            "use_count": self.use_count,
        }

    @classmethod
    def from_dict(cls, raw: Any) -> "PatternRecord":
        try:
            return cls(
                signature=str(raw["signature"]),
                composition=tuple((str(c["service"]), str(c["operation"])) for c in raw["composition"]),
                score=MatchScore.from_dict(raw["score"]),
                created_at=str(raw["created_at"]),
                use_count=int(raw["use_count"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise PersistenceError(f"malformed pattern record: {exc!r}") from None


def _utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


class PatternDatabase:
    """In-memory pattern store with atomic JSON persistence; writes are serialised."""

    def __init__(self, records: Sequence[PatternRecord] = (), clock: Callable[[], str] = _utc_now):
        self._records: dict[str, PatternRecord] = {r.signature: r for r in records}
        self._lock = threading.Lock()
        self._clock = clock

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> list[PatternRecord]:
        return [self._records[k] for k in sorted(self._records)]

    def lookup(self, signature: str) -> PatternRecord | None:
        return self._records.get(signature)

    def record_hit(self, signature: str) -> None:
        with self._lock:
            self._records[signature].use_count += 1

    def store(self, signature: str, composition: Sequence[tuple[str, str]], score: MatchScore) -> PatternRecord:
        with self._lock:
            existing = self._records.get(signature)
            if existing is not None:
                return existing
            record = PatternRecord(signature, tuple(composition), score, self._clock())
            self._records[signature] = record
            return record

    def to_list(self, canonical: bool = False) -> list[dict[str, Any]]:
        out = [r.to_dict() for r in self.records()]
        if canonical:
            for d in out:
                del d["created_at"], d["use_count"]
        return out

    @classmethod
    def load(cls, path: str | Path, clock: Callable[[], str] = _utc_now) -> "PatternDatabase":
        path = Path(path)
        if not path.exists():
            return cls(clock=clock)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise PersistenceError(f"cannot read pattern database {path}: {exc}") from None
        if not isinstance(raw, list):
            raise PersistenceError(f"pattern database {path} must hold a JSON list")
        return cls([PatternRecord.from_dict(r) for r in raw], clock=clock)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        text = json.dumps(self.to_list(), indent=2, sort_keys=True) + "\n"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(prefix=path.name, suffix=".tmp", dir=path.parent)
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except OSError as exc:
            raise PersistenceError(f"cannot write pattern database {path}: {exc}") from None


def store_pattern(db: PatternDatabase, p: ProcessModel, g: ActivityGroup,
                  composition: Sequence[tuple[str, str]], score: MatchScore, tau: float) -> PatternRecord:
    """Persist a successful match; only scores at or above ``tau`` qualify."""
    if score.combined < tau:
        raise ValueError(f"combined score {score.combined} is below the acceptance threshold {tau}")
    return db.store(group_signature(p, g), composition, score)


def lookup_pattern(db: PatternDatabase, signature: str) -> PatternRecord | None:
    return db.lookup(signature)
