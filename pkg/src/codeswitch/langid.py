"""Language identification for script segments.

Non-Latin scripts map straight to a canonical ISO 639-1 code. Latin text is
scored with a stopword vote: every whitespace token votes for each language
whose lexicon contains it. Same-script alternation (e.g. English then
Spanish inside one Latin run) is found by iterative masking: take the
dominant language, mask the tokens it explains, and look for another
language that wins a window of at least ``min_span`` consecutive words.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

from .errors import DegenerateSplit, UnknownScript
from .scripts import RawSegment, ScriptClass

DEFAULT_MIN_SPAN = 3
DEFAULT_MAX_ITERATIONS = 4

_TOKEN_RE = re.compile(r"\S+")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'"})


def _data(name: str):
    return json.loads(resources.files("codeswitch").joinpath(f"data/{name}").read_text("utf-8"))


@lru_cache(maxsize=1)
def iso639_1_codes() -> frozenset[str]:
    return frozenset(_data("iso639_1.json"))


def is_lang_code(code: object) -> bool:
    return isinstance(code, str) and code in iso639_1_codes()


def validate_lang(code: str) -> str:
    if not is_lang_code(code):
        raise ValueError(f"{code!r} is not a registered ISO 639-1 code")
    return code


@lru_cache(maxsize=1)
def default_script_languages() -> dict[ScriptClass, str]:
    return {ScriptClass(k): validate_lang(v) for k, v in _data("script_languages.json").items()}


class Method(str, Enum):
    SCRIPT_DIRECT = "script_direct"
    LEXICON = "lexicon"
    HINT = "hint"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class Detection:
    lang: str
    confidence: float
    method: Method

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")
        if self.method in (Method.SCRIPT_DIRECT, Method.HINT) and self.confidence != 1.0:
            raise ValueError(f"{self.method.value} detections carry confidence 1.0")


class Lexicons:
    """Per-language stopword sets. Words may belong to several languages."""

    def __init__(self, words: Mapping[str, Iterable[str]]) -> None:
        self._words: dict[str, frozenset[str]] = {}
        index: dict[str, set[str]] = {}
        for lang, entries in words.items():
            validate_lang(lang)
            keys = frozenset(normalize_token(w) for w in entries if normalize_token(w))
            self._words[lang] = keys
            for w in keys:
                index.setdefault(w, set()).add(lang)
        self._index = {w: frozenset(langs) for w, langs in index.items()}

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(self._words)

    def words(self, lang: str) -> frozenset[str]:
        return self._words.get(lang, frozenset())

    def langs_for(self, key: str) -> frozenset[str]:
        return self._index.get(key, frozenset())

    def merged(self, other: Mapping[str, Iterable[str]]) -> Lexicons:
        """User entries are unioned over these; new languages are appended."""
        combined = {lang: set(ws) for lang, ws in self._words.items()}
        for lang, ws in other.items():
            combined.setdefault(lang, set()).update(ws)
        return Lexicons(combined)

    def to_dict(self) -> dict[str, list[str]]:
        return {lang: sorted(ws) for lang, ws in self._words.items()}

    @classmethod
    def from_json(cls, path: str | Path) -> Lexicons:
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    @classmethod
    def default(cls) -> Lexicons:
        return _default_lexicons()


@lru_cache(maxsize=1)
def _default_lexicons() -> Lexicons:
    return Lexicons(_data("lexicons.json"))


def load_lexicons(paths: Sequence[str | Path] = ()) -> Lexicons:
    lex = Lexicons.default()
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            lex = lex.merged(json.load(fh))
    return lex


def normalize_token(word: str) -> str:
    """Lookup key: lowercase, curly apostrophes folded, edge punctuation stripped."""
    word = word.translate(_APOSTROPHES).lower()
    start, end = 0, len(word)
    while start < end and not word[start].isalnum():
        start += 1
    while end > start and not word[end - 1].isalnum():
        end -= 1
    return word[start:end]


@dataclass(frozen=True)
class Token:
    text: str
    key: str
    start: int
    end: int


def tokenize(text: str) -> list[Token]:
    return [Token(m.group(), normalize_token(m.group()), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def _votes(tokens: Sequence[Token], lexicons: Lexicons, pins: Mapping[str, str] | None) -> list[frozenset[str]]:
    out = []
    for tok in tokens:
        pinned = pins.get(tok.key) if pins else None
        out.append(frozenset({pinned}) if pinned else lexicons.langs_for(tok.key))
    return out


def _counts(votes: Iterable[frozenset[str]]) -> Counter:
    c: Counter = Counter()
    for v in votes:
        c.update(v)
    return c


def _ordered(langs: Iterable[str], lexicons: Lexicons) -> list[str]:
    order = {lang: i for i, lang in enumerate(lexicons.languages)}
    return sorted(langs, key=lambda lang: (order.get(lang, len(order)), lang))


def _dominant(counts: Counter, lexicons: Lexicons, default_lang: str) -> str:
    if not counts:
        return default_lang
    top = max(counts.values())
    tied = [lang for lang, n in counts.items() if n == top]
    if default_lang in tied:
        return default_lang
    return _ordered(tied, lexicons)[0]


def vote_confidence(counts: Counter) -> float:
    """0.5 + 0.5 * (top - runner_up) / total_hits; increases with the vote margin."""
    ranked = sorted(counts.values(), reverse=True)
    total = sum(ranked)
    if not total:
        return 0.0
    runner_up = ranked[1] if len(ranked) > 1 else 0
    return 0.5 + 0.5 * (ranked[0] - runner_up) / total


def detect_language(
    segment: RawSegment,
    hint: str | None = None,
    lexicons: Lexicons | None = None,
    *,
    default_lang: str = "en",
    pins: Mapping[str, str] | None = None,
    script_languages: Mapping[ScriptClass, str] | None = None,
) -> Detection:
    """Assign a language to one script segment."""
    script_languages = default_script_languages() if script_languages is None else script_languages
    if segment.script is not ScriptClass.LATIN:
        lang = script_languages.get(segment.script)
        if lang is not None:
            return Detection(lang, 1.0, Method.SCRIPT_DIRECT)
        if hint:
            return Detection(validate_lang(hint), 1.0, Method.HINT)
        raise UnknownScript(f"no canonical language for script {segment.script.value}")

    if hint:
        return Detection(validate_lang(hint), 1.0, Method.HINT)
    lexicons = lexicons or Lexicons.default()
    counts = _counts(_votes(tokenize(segment.text), lexicons, pins))
    if counts:
        top = max(counts.values())
        leaders = [lang for lang, n in counts.items() if n == top]
        if len(leaders) == 1:
            return Detection(leaders[0], vote_confidence(counts), Method.LEXICON)
    return Detection(default_lang, 0.0, Method.FALLBACK)


def _wins_window(votes: Sequence[frozenset[str]], lang: str, rivals: Iterable[str], min_span: int) -> bool:
    """True if some window of >= min_span tokens has more ``lang`` votes than each rival."""
    min_span = max(min_span, 1)
    for rival in rivals:
        # max over j - i >= min_span of P[j] - P[i] > 0, P = prefix sum of (lang - rival)
        prefix = [0]
        for v in votes:
            prefix.append(prefix[-1] + (lang in v) - (rival in v))
        best_min = None
        found = False
        for j in range(min_span, len(prefix)):
            p_i = prefix[j - min_span]
            best_min = p_i if best_min is None else min(best_min, p_i)
            if prefix[j] - best_min > 0:
                found = True
                break
        if not found:
            return False
    return True


def contains_multiple_languages(
    segment: RawSegment,
    lexicons: Lexicons | None = None,
    min_span: int = DEFAULT_MIN_SPAN,
    *,
    default_lang: str = "en",
    pins: Mapping[str, str] | None = None,
) -> bool:
    if segment.script is not ScriptClass.LATIN:
        return False
    lexicons = lexicons or Lexicons.default()
    tokens = tokenize(segment.text)
    if len(tokens) < max(min_span, 1):
        return False
    votes = _votes(tokens, lexicons, pins)
    counts = _counts(votes)
    dominant = _dominant(counts, lexicons, default_lang)
    return any(
        _wins_window(votes, lang, [dominant], min_span) for lang in counts if lang != dominant
    )


def split_by_language_boundary(
    segment: RawSegment,
    lexicons: Lexicons | None = None,
    *,
    min_span: int = DEFAULT_MIN_SPAN,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    default_lang: str = "en",
    pins: Mapping[str, str] | None = None,
) -> list[tuple[RawSegment, str]]:
    """Cut a Latin segment at word boundaries where the language changes.

    Raises DegenerateSplit when masking finds no second language or the
    resulting pieces all re-detect to the same language.
    """
    lexicons = lexicons or Lexicons.default()
    tokens = tokenize(segment.text)
    votes = _votes(tokens, lexicons, pins)
    labels: list[str | None] = [None] * len(tokens)
    accepted: list[str] = []

    for _ in range(max_iterations):
        residue = [i for i, lab in enumerate(labels) if lab is None]
        counts = _counts(votes[i] for i in residue)
        for lang in accepted:
            counts.pop(lang, None)
        if not counts:
            break
        if not accepted:
            lang = _dominant(counts, lexicons, default_lang)
        else:
            candidates = [
                c for c in counts if _wins_window(votes, c, accepted, min_span)
            ]
            if not candidates:
                break
            best = max(counts[c] for c in candidates)
            lang = _ordered([c for c in candidates if counts[c] == best], lexicons)[0]
        accepted.append(lang)
        for i in residue:
            if lang in votes[i]:
                labels[i] = lang

    if len(accepted) < 2:
        raise DegenerateSplit("no secondary language reaches the minimum span")

    # unlabeled tokens join the preceding labeled token; leading ones join forward
    first = next(lab for lab in labels if lab is not None)
    filled: list[str] = []
    for lab in labels:
        filled.append(lab if lab is not None else (filled[-1] if filled else first))

    cuts = [0] + [tokens[i].start for i in range(1, len(tokens)) if filled[i] != filled[i - 1]]
    pieces = _pieces(segment, cuts)

    def detect(piece: RawSegment) -> str:
        return detect_language(piece, None, lexicons, default_lang=default_lang, pins=pins).lang

    tagged = [(p, detect(p)) for p in pieces]
    while True:
        merged: list[tuple[RawSegment, str]] = []
        for piece, lang in tagged:
            if merged and merged[-1][1] == lang:
                prev = merged[-1][0]
                merged[-1] = (_join(prev, piece), lang)
            else:
                merged.append((piece, lang))
        if len(merged) == len(tagged):
            break
        tagged = [(p, detect(p)) for p, _ in merged]

    if len(tagged) < 2:
        raise DegenerateSplit("all pieces re-detect to one language")
    return tagged


def _pieces(segment: RawSegment, cuts: list[int]) -> list[RawSegment]:
    bounds = cuts + [len(segment.text)]
    return [
        RawSegment(segment.text[a:b], segment.script, segment.start + a, segment.start + b)
        for a, b in zip(bounds, bounds[1:])
        if b > a
    ]


def _join(a: RawSegment, b: RawSegment) -> RawSegment:
    return RawSegment(a.text + b.text, a.script, a.start, b.end)


class LanguageDetector(Protocol):
    def detect(self, segment: RawSegment, hint: str | None = None) -> Detection: ...

    def contains_multiple(self, segment: RawSegment) -> bool: ...

    def split(self, segment: RawSegment) -> list[tuple[RawSegment, str]]: ...


@dataclass(frozen=True)
class LexiconDetector:
    """Stopword-vote detector with its configuration bound in."""

    lexicons: Lexicons
    default_lang: str = "en"
    min_span: int = DEFAULT_MIN_SPAN
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    pins: Mapping[str, str] | None = None

    def detect(self, segment: RawSegment, hint: str | None = None) -> Detection:
        return detect_language(segment, hint, self.lexicons, default_lang=self.default_lang, pins=self.pins)

    def contains_multiple(self, segment: RawSegment) -> bool:
        return contains_multiple_languages(
            segment, self.lexicons, self.min_span, default_lang=self.default_lang, pins=self.pins
        )

    def split(self, segment: RawSegment) -> list[tuple[RawSegment, str]]:
        return split_by_language_boundary(
            segment,
            self.lexicons,
            min_span=self.min_span,
            max_iterations=self.max_iterations,
            default_lang=self.default_lang,
            pins=self.pins,
        )
