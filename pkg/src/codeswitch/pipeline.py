"""End-to-end orchestration: segment, identify, plan, add prosody, render SSML, synthesize."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator

from .audio import AudioClip
from .cache import AudioCache
from .engines import Engine
from .errors import CodeSwitchError, DegenerateSplit, EmptyInput, SizeLimitExceeded
from .langid import Detection, LanguageDetector, LexiconDetector, Lexicons, Method
from .planner import UserPrefs, VoiceCatalog, VoicePlan, build_voice_plan
from .prosody import RuleTable, attach_prosody
from .scripts import RawSegment, ScriptClass, ScriptTable, split_by_script
from .ssml import SsmlDialect, SsmlDocument, build_ssml
from .synth import can_use_single_request, synthesize_plan


@dataclass(frozen=True)
class TaggedSegment:
    segment: RawSegment
    detection: Detection

    @property
    def text(self) -> str:
        return self.segment.text

    @property
    def lang(self) -> str:
        return self.detection.lang

    def to_dict(self) -> dict:
        return {
            "text": self.segment.text,
            "script": self.segment.script.value,
            "span": [self.segment.start, self.segment.end],
            "lang": self.detection.lang,
            "method": self.detection.method.value,
            "confidence": round(self.detection.confidence, 4),
        }


@dataclass
class PipelineResult:
    segments: list[TaggedSegment]
    plan: VoicePlan
    ssml: SsmlDocument | None
    audio: AudioClip | None
    timings: dict[str, float] = field(default_factory=dict)


@contextmanager
def _stage(name: str, timings: dict[str, float]) -> Iterator[None]:
    t0 = time.perf_counter()
    try:
        yield
    except CodeSwitchError as err:
        if err.stage is None:
            err.stage = name
        raise
    finally:
        timings[name] = time.perf_counter() - t0


def identify_languages(
    segments: list[RawSegment],
    detector: LanguageDetector,
    prefs: UserPrefs,
) -> list[TaggedSegment]:
    """Tag each script segment, splitting Latin runs that alternate languages.

    A ``latin_lang_hint`` settles every Latin run outright, so no splitting
    is attempted. An all-neutral input (digits, punctuation) takes the
    default language.
    """
    out: list[TaggedSegment] = []
    for seg in segments:
        if seg.script.is_neutral:
            out.append(TaggedSegment(seg, Detection(prefs.default_lang, 0.0, Method.FALLBACK)))
            continue
        hint = prefs.latin_lang_hint if seg.script is ScriptClass.LATIN else None
        detection = detector.detect(seg, hint)
        if hint is None and seg.script is ScriptClass.LATIN and detector.contains_multiple(seg):
            try:
                subs = detector.split(seg)
            except DegenerateSplit:
                subs = None
            if subs:
                out.extend(TaggedSegment(sub, detector.detect(sub)) for sub, _ in subs)
                continue
        out.append(TaggedSegment(seg, detection))
    return out


def make_detector(prefs: UserPrefs, lexicons: Lexicons | None = None) -> LexiconDetector:
    return LexiconDetector(
        lexicons or Lexicons.default(),
        default_lang=prefs.default_lang,
        pins=dict(prefs.loanwords) or None,
    )


def plan_text(
    text: str,
    prefs: UserPrefs,
    catalog: VoiceCatalog,
    *,
    detector: LanguageDetector | None = None,
    lexicons: Lexicons | None = None,
    script_table: ScriptTable | None = None,
    prosody_rules: RuleTable | None = None,
    timings: dict[str, float] | None = None,
) -> tuple[list[TaggedSegment], VoicePlan]:
    """Run the text stages only (no SSML, no audio)."""
    if not text or not text.strip():
        raise EmptyInput("input text is empty", stage="input")
    timings = {} if timings is None else timings
    detector = detector or make_detector(prefs, lexicons)
    with _stage("segment", timings):
        raw = split_by_script(text, script_table)
    with _stage("identify", timings):
        tagged = identify_languages(raw, detector, prefs)
    with _stage("plan", timings):
        plan = build_voice_plan([(t.segment, t.lang) for t in tagged], catalog, prefs, context=text)
    with _stage("prosody", timings):
        plan = attach_prosody(plan, text, prosody_rules)
    return tagged, plan


def run(
    text: str,
    prefs: UserPrefs,
    catalog: VoiceCatalog,
    dialect: SsmlDialect,
    engine: Engine | None,
    *,
    cache: AudioCache | None = None,
    single_request: bool = False,
    detector: LanguageDetector | None = None,
    lexicons: Lexicons | None = None,
    script_table: ScriptTable | None = None,
    prosody_rules: RuleTable | None = None,
    max_workers: int = 4,
    retry_base_delay_s: float = 0.1,
) -> PipelineResult:
    """Text in, plan + SSML + normalized audio out. ``engine=None`` stops after SSML."""
    timings: dict[str, float] = {}
    tagged, plan = plan_text(
        text, prefs, catalog,
        detector=detector, lexicons=lexicons, script_table=script_table,
        prosody_rules=prosody_rules, timings=timings,
    )

    unified = single_request and can_use_single_request(plan, dialect)
    ssml: SsmlDocument | None
    with _stage("ssml", timings):
        try:
            ssml = build_ssml(plan, dialect)
        except SizeLimitExceeded:
            # only the unified request needs the whole document under the cap
            if unified:
                raise
            ssml = None

    audio = None
    if engine is not None:
        with _stage("synthesize", timings):
            audio = synthesize_plan(
                plan, engine, cache, dialect, unified,
                max_workers=max_workers, base_delay_s=retry_base_delay_s,
            )
    return PipelineResult(tagged, plan, ssml, audio, timings)
