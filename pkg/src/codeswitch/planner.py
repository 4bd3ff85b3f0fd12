"""Locale resolution, voice selection and voice-plan construction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import NoLocaleRule, NoVoiceForLanguage
from .langid import normalize_token, validate_lang
from .prosody import ZERO_PROSODY, Prosody
from .scripts import RawSegment, ScriptClass, default_table

# scripts written without inter-word spaces: each character counts as one word
_UNSPACED = frozenset({ScriptClass.HAN, ScriptClass.HIRAGANA, ScriptClass.KATAKANA, ScriptClass.THAI})


@dataclass(frozen=True)
class Locale:
    language: str
    region: str | None = None

    def __post_init__(self) -> None:
        validate_lang(self.language)
        if self.region is not None and not (
            (len(self.region) == 2 and self.region.isalpha() and self.region.isupper())
            or (len(self.region) == 3 and self.region.isdigit())
        ):
            raise ValueError(f"bad region subtag {self.region!r}")

    @classmethod
    def parse(cls, tag: str | Locale) -> Locale:
        if isinstance(tag, Locale):
            return tag
        parts = tag.replace("_", "-").split("-")
        if len(parts) > 2:
            raise ValueError(f"expected language-REGION, got {tag!r}")
        region = parts[1].upper() if len(parts) == 2 else None
        return cls(parts[0].lower(), region)

    @property
    def tag(self) -> str:
        return f"{self.language}-{self.region}" if self.region else self.language

    def __str__(self) -> str:
        return self.tag


class Gender(str, Enum):
    FEMALE = "female"
    MALE = "male"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class Voice:
    id: str
    locale: Locale
    gender: Gender = Gender.NEUTRAL
    family: str = ""
    engine: str = "default"

    def __post_init__(self) -> None:
        object.__setattr__(self, "locale", Locale.parse(self.locale))
        object.__setattr__(self, "gender", Gender(self.gender))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "locale": self.locale.tag,
            "gender": self.gender.value,
            "family": self.family,
            "engine": self.engine,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> Voice:
        return cls(d["id"], Locale.parse(d["locale"]), Gender(d.get("gender", "neutral")),
                   d.get("family", ""), d.get("engine", "default"))


class VoiceCatalog:
    def __init__(self, voices: Iterable[Voice]) -> None:
        self.voices: tuple[Voice, ...] = tuple(voices)
        seen: set[str] = set()
        for v in self.voices:
            if v.id in seen:
                raise ValueError(f"duplicate voice id {v.id!r}")
            seen.add(v.id)
        self._by_id = {v.id: v for v in self.voices}

    def __len__(self) -> int:
        return len(self.voices)

    def __iter__(self):
        return iter(self.voices)

    def get(self, voice_id: str) -> Voice:
        return self._by_id[voice_id]

    def for_locale(self, locale: Locale) -> list[Voice]:
        return [v for v in self.voices if v.locale == locale]

    def for_language(self, language: str) -> list[Voice]:
        return [v for v in self.voices if v.locale.language == language]

    def to_list(self) -> list[dict]:
        return [v.to_dict() for v in self.voices]

    @classmethod
    def from_list(cls, rows: Sequence[Mapping]) -> VoiceCatalog:
        return cls(Voice.from_dict(r) for r in rows)

    @classmethod
    def from_json(cls, path: str | Path) -> VoiceCatalog:
        with open(path, encoding="utf-8") as fh:
            return cls.from_list(json.load(fh))

    @classmethod
    def default(cls) -> VoiceCatalog:
        return _default_catalog()


def _data(name: str):
    return json.loads(resources.files("codeswitch").joinpath(f"data/{name}").read_text("utf-8"))


@lru_cache(maxsize=1)
def _default_catalog() -> VoiceCatalog:
    return VoiceCatalog.from_list(_data("catalog.json"))


@lru_cache(maxsize=1)
def default_regions() -> dict[str, str]:
    return dict(_data("regions.json"))


class Mode(str, Enum):
    SINGLE_VOICE = "single_voice"
    MULTI_VOICE = "multi_voice"


@dataclass(frozen=True)
class UserPrefs:
    latin_lang_hint: str | None = None
    mode: Mode = Mode.MULTI_VOICE
    default_lang: str = "en"
    primary_locale: Locale = field(default_factory=lambda: Locale("en", "US"))
    switch_threshold_words: int = 3
    region_overrides: Mapping[str, str] = field(default_factory=dict)
    loanwords: Mapping[str, str] = field(default_factory=dict)
    boundary_pause_ms: int = 50
    max_voices: int | None = 2  # soft cap in multi_voice mode; None disables

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "primary_locale", Locale.parse(self.primary_locale))
        if self.latin_lang_hint is not None:
            validate_lang(self.latin_lang_hint)
        validate_lang(self.default_lang)
        if self.switch_threshold_words < 0:
            raise ValueError("switch_threshold_words must be >= 0")
        if self.boundary_pause_ms < 0:
            raise ValueError("boundary_pause_ms must be >= 0")
        if self.max_voices is not None and self.max_voices < 1:
            raise ValueError("max_voices must be >= 1 or None")
        for lang in (*self.region_overrides, *self.loanwords.values()):
            validate_lang(lang)
        object.__setattr__(
            self, "loanwords", {normalize_token(k): v for k, v in self.loanwords.items()}
        )

    @classmethod
    def from_dict(cls, d: Mapping) -> UserPrefs:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown preference fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> UserPrefs:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "latin_lang_hint": self.latin_lang_hint,
            "mode": self.mode.value,
            "default_lang": self.default_lang,
            "primary_locale": self.primary_locale.tag,
            "switch_threshold_words": self.switch_threshold_words,
            "region_overrides": dict(self.region_overrides),
            "loanwords": dict(self.loanwords),
            "boundary_pause_ms": self.boundary_pause_ms,
            "max_voices": self.max_voices,
        }


@dataclass(frozen=True)
class VoicePlanEntry:
    segment: RawSegment
    lang: str
    locale: Locale
    voice: Voice
    lang_span: bool = False
    pause_before_ms: int = 0
    prosody: Prosody = ZERO_PROSODY

    @property
    def text(self) -> str:
        return self.segment.text

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "lang": self.lang,
            "locale": self.locale.tag,
            "voice_id": self.voice.id,
            "lang_span": self.lang_span,
            "pause_before_ms": self.pause_before_ms,
            "prosody": self.prosody.to_dict(),
        }


VoicePlan = list[VoicePlanEntry]


def count_words(text: str) -> int:
    """Whitespace word count; characters of unspaced scripts (Han, Kana, Thai) count one each."""
    table = default_table()
    total = 0
    for token in text.split():
        rest = []
        for ch in token:
            if table.lookup(ord(ch)) in _UNSPACED:
                total += 1
                rest.append(" ")
            else:
                rest.append(ch)
        total += sum(any(c.isalnum() for c in piece) for piece in "".join(rest).split())
    return total


def loanword_check(token: str, prefs: UserPrefs) -> str | None:
    return prefs.loanwords.get(normalize_token(token))


def determine_locale(
    lang: str,
    context: str = "",
    prefs: UserPrefs | None = None,
    region_map: Mapping[str, str] | None = None,
) -> Locale:
    """Override beats primary locale beats the canonical region map.

    ``context`` (the full input) is accepted for rule sets that look at it;
    the bundled rules do not.
    """
    prefs = prefs or UserPrefs()
    if lang in prefs.region_overrides:
        return Locale(lang, prefs.region_overrides[lang].upper())
    if prefs.primary_locale.language == lang:
        return prefs.primary_locale
    regions = default_regions() if region_map is None else region_map
    if lang not in regions:
        raise NoLocaleRule(f"no region rule for language {lang!r}")
    return Locale(lang, regions[lang])


def select_voice(locale: Locale, catalog: VoiceCatalog, anchor: Voice | None = None) -> Voice:
    candidates = catalog.for_locale(locale) or catalog.for_language(locale.language)
    if not candidates:
        raise NoVoiceForLanguage(f"no voice in the catalog speaks {locale.language!r}")
    if anchor is None:
        return candidates[0]
    # stable sort keeps catalog order as the final tie-break
    return sorted(
        candidates,
        key=lambda v: (v.gender is not anchor.gender, v.family != anchor.family),
    )[0]


def anchor_language(items: Iterable[tuple[str, str]]) -> str:
    """Language covering the most characters; earliest wins ties. ``items`` are (text, lang)."""
    totals: dict[str, int] = {}
    for text, lang in items:
        totals[lang] = totals.get(lang, 0) + len(text)
    best = max(totals.values())
    return next(lang for lang, n in totals.items() if n == best)


def _anchor_voice(plan: Sequence[VoicePlanEntry], lang: str) -> Voice:
    return next(e.voice for e in plan if e.lang == lang)


def assign_pauses(plan: Sequence[VoicePlanEntry], pause_ms: int) -> VoicePlan:
    out = []
    for i, entry in enumerate(plan):
        boundary = i > 0 and (entry.lang != plan[i - 1].lang or entry.voice.id != plan[i - 1].voice.id)
        out.append(replace(entry, pause_before_ms=pause_ms if boundary else 0))
    return out


def apply_switch_threshold(plan: Sequence[VoicePlanEntry], prefs: UserPrefs) -> VoicePlan:
    """Short foreign spans are voiced by the anchor voice inside a language span."""
    if not plan:
        return []
    anchor_lang = anchor_language((e.text, e.lang) for e in plan)
    anchor = _anchor_voice(plan, anchor_lang)
    out = []
    for entry in plan:
        if entry.lang != anchor_lang and count_words(entry.text) <= prefs.switch_threshold_words:
            entry = replace(entry, voice=anchor, lang_span=True)
        out.append(entry)
    return assign_pauses(out, prefs.boundary_pause_ms)


def apply_voice_cap(plan: Sequence[VoicePlanEntry], max_voices: int | None, pause_ms: int) -> VoicePlan:
    """Languages beyond the first ``max_voices - 1`` foreign voices fall back to the anchor voice."""
    if not plan or max_voices is None:
        return list(plan)
    anchor_lang = anchor_language((e.text, e.lang) for e in plan)
    anchor = _anchor_voice(plan, anchor_lang)
    kept = {anchor.id}
    out = []
    for entry in plan:
        if entry.voice.id not in kept:
            if len(kept) < max_voices:
                kept.add(entry.voice.id)
            else:
                entry = replace(entry, voice=anchor, lang_span=True)
        out.append(entry)
    return assign_pauses(out, pause_ms)


def build_voice_plan(
    segments: Sequence[tuple[RawSegment, str]],
    catalog: VoiceCatalog,
    prefs: UserPrefs,
    context: str = "",
    region_map: Mapping[str, str] | None = None,
) -> VoicePlan:
    if not segments:
        raise ValueError("cannot plan an empty segment list")
    anchor_lang = anchor_language((s.text, lang) for s, lang in segments)
    anchor_locale = determine_locale(anchor_lang, context, prefs, region_map)
    anchor = select_voice(anchor_locale, catalog)

    plan: VoicePlan = []
    for seg, lang in segments:
        locale = determine_locale(lang, context, prefs, region_map)
        if lang == anchor_lang:
            plan.append(VoicePlanEntry(seg, lang, locale, anchor))
        elif prefs.mode is Mode.SINGLE_VOICE:
            plan.append(VoicePlanEntry(seg, lang, locale, anchor, lang_span=True))
        else:
            plan.append(VoicePlanEntry(seg, lang, locale, select_voice(locale, catalog, anchor)))

    if prefs.mode is Mode.MULTI_VOICE:
        plan = apply_switch_threshold(plan, prefs)
        plan = apply_voice_cap(plan, prefs.max_voices, prefs.boundary_pause_ms)
    return assign_pauses(plan, prefs.boundary_pause_ms)
