"""Punctuation-led sentiment analysis and sentiment-to-prosody mapping.

The mapping coefficients live in ``data/prosody_rules.json``::

    {category: {"rate_coeff": float, "pitch_coeff": float, "emphasis": str}}

A segment with no sentiment cue of its own inherits the sentiment of the
whole utterance, so neutral fragments on either side of a language switch
keep the same expressive settings.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Sequence

if TYPE_CHECKING:
    from .planner import VoicePlanEntry

PROSODY_LIMIT = 50

_QUESTION_MARKS = frozenset("?？؟")
_BANGS = frozenset("!！")
# closing quotes/brackets are skipped when looking for the terminal mark
_TRAILING_CLOSERS = "\"'”’»)]}」』）"
_WORD_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)?", re.UNICODE)


class Category(str, Enum):
    EXCLAMATORY = "exclamatory"
    INTERROGATIVE = "interrogative"
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


class Emphasis(str, Enum):
    NONE = "none"
    MODERATE = "moderate"
    STRONG = "strong"


@dataclass(frozen=True)
class Sentiment:
    category: Category
    intensity: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "category", Category(self.category))
        if not 0.0 <= self.intensity <= 1.0:
            raise ValueError("intensity must lie in [0, 1]")
        if self.category is Category.NEUTRAL:
            object.__setattr__(self, "intensity", 0.0)


NEUTRAL = Sentiment(Category.NEUTRAL, 0.0)


@dataclass(frozen=True)
class Prosody:
    rate_pct: int = 0
    pitch_pct: int = 0
    emphasis: Emphasis = Emphasis.NONE

    def __post_init__(self) -> None:
        object.__setattr__(self, "emphasis", Emphasis(self.emphasis))
        for name in ("rate_pct", "pitch_pct"):
            value = getattr(self, name)
            if not isinstance(value, int) or not -PROSODY_LIMIT <= value <= PROSODY_LIMIT:
                raise ValueError(f"{name} must be an integer in [-{PROSODY_LIMIT}, {PROSODY_LIMIT}]")

    @property
    def is_zero(self) -> bool:
        return self.rate_pct == 0 and self.pitch_pct == 0 and self.emphasis is Emphasis.NONE

    def to_dict(self) -> dict:
        return {"rate_pct": self.rate_pct, "pitch_pct": self.pitch_pct, "emphasis": self.emphasis.value}

    @classmethod
    def from_dict(cls, d: Mapping) -> Prosody:
        return cls(int(d.get("rate_pct", 0)), int(d.get("pitch_pct", 0)), Emphasis(d.get("emphasis", "none")))


ZERO_PROSODY = Prosody()


@dataclass(frozen=True)
class Rule:
    rate_coeff: float
    pitch_coeff: float
    emphasis: Emphasis


class RuleTable:
    def __init__(self, rules: Mapping[str, Mapping]) -> None:
        self.rules = {
            Category(cat): Rule(float(r["rate_coeff"]), float(r["pitch_coeff"]), Emphasis(r["emphasis"]))
            for cat, r in rules.items()
        }
        missing = set(Category) - set(self.rules)
        if missing:
            raise ValueError(f"rule table lacks categories: {sorted(c.value for c in missing)}")
        neutral = self.rules[Category.NEUTRAL]
        if (neutral.rate_coeff, neutral.pitch_coeff, neutral.emphasis) != (0.0, 0.0, Emphasis.NONE):
            raise ValueError("the neutral rule must map to zero prosody")

    def __getitem__(self, category: Category) -> Rule:
        return self.rules[category]

    @classmethod
    def from_json(cls, path: str | Path) -> RuleTable:
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))


def _data(name: str):
    return json.loads(resources.files("codeswitch").joinpath(f"data/{name}").read_text("utf-8"))


@lru_cache(maxsize=1)
def default_rules() -> RuleTable:
    return RuleTable(_data("prosody_rules.json"))


@lru_cache(maxsize=1)
def _polarity_words() -> tuple[frozenset[str], frozenset[str]]:
    raw = _data("polarity.json")
    return frozenset(raw["positive"]), frozenset(raw["negative"])


def _terminal(text: str) -> str:
    return text.rstrip().rstrip(_TRAILING_CLOSERS).rstrip()


def analyze_sentiment(text: str) -> Sentiment:
    """Terminal punctuation first, then English polarity words, else neutral.

    ``!`` gives exclamatory with intensity ``min(1, 0.5 + 0.25 * extra_bangs)``;
    ``?`` (also the fullwidth and Arabic forms) gives interrogative at 0.5.
    Polarity intensity is the share of word tokens hitting the winning list.
    """
    tail = _terminal(text)
    if tail and tail[-1] in _BANGS:
        run = len(tail) - len(tail.rstrip("".join(_BANGS)))
        return Sentiment(Category.EXCLAMATORY, min(1.0, 0.5 + 0.25 * (run - 1)))
    if tail and tail[-1] in _QUESTION_MARKS:
        return Sentiment(Category.INTERROGATIVE, 0.5)

    words = [w.lower().replace("’", "'") for w in _WORD_RE.findall(text.replace("’", "'"))]
    if not words:
        return NEUTRAL
    positive, negative = _polarity_words()
    pos = sum(w in positive for w in words)
    neg = sum(w in negative for w in words)
    if pos > neg:
        return Sentiment(Category.POSITIVE, pos / len(words))
    if neg > pos:
        return Sentiment(Category.NEGATIVE, neg / len(words))
    return NEUTRAL


def round_half_away(x: float) -> int:
    return int(Decimal(repr(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def _clamp(v: int) -> int:
    return max(-PROSODY_LIMIT, min(PROSODY_LIMIT, v))


def adjust_prosody(seg: Sentiment, overall: Sentiment, rules: RuleTable | None = None) -> Prosody:
    effective = seg if seg.category is not Category.NEUTRAL else overall
    rule = (rules or default_rules())[effective.category]
    return Prosody(
        _clamp(round_half_away(rule.rate_coeff * effective.intensity)),
        _clamp(round_half_away(rule.pitch_coeff * effective.intensity)),
        rule.emphasis,
    )


def attach_prosody(
    plan: Sequence[VoicePlanEntry], input_text: str, rules: RuleTable | None = None
) -> list[VoicePlanEntry]:
    overall = analyze_sentiment(input_text)
    return [replace(e, prosody=adjust_prosody(analyze_sentiment(e.text), overall, rules)) for e in plan]
