"""Dispatch a voice plan to an engine and assemble the utterance audio."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from .audio import AudioClip, concat_with_pauses, normalize_audio, resample_to_canonical
from .cache import AudioCache, cache_key
from .engines import Engine, EngineRequest
from .errors import EngineFailure
from .planner import VoicePlanEntry, anchor_language
from .prosody import ZERO_PROSODY
from .ssml import SsmlDialect, build_ssml

MAX_RETRIES = 2


def render_with_retry(
    engine: Engine,
    req: EngineRequest,
    retries: int = MAX_RETRIES,
    base_delay_s: float = 0.1,
) -> AudioClip:
    """Retry retryable failures up to ``retries`` times, doubling the delay each time."""
    delay = base_delay_s
    for attempt in range(retries + 1):
        try:
            return engine.render(req)
        except EngineFailure as err:
            if not err.retryable or attempt == retries:
                raise
            if delay > 0:
                time.sleep(delay)
            delay *= 2
    raise AssertionError("unreachable")


def _cached_render(
    engine: Engine,
    cache: AudioCache | None,
    req: EngineRequest,
    key: str,
    base_delay_s: float,
) -> AudioClip:
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    clip = resample_to_canonical(render_with_retry(engine, req, base_delay_s=base_delay_s))
    if cache is not None:
        cache.put(key, clip)
    return clip


def can_use_single_request(plan: Sequence[VoicePlanEntry], dialect: SsmlDialect) -> bool:
    engines = {e.voice.engine for e in plan}
    voices = {e.voice.id for e in plan}
    return len(engines) == 1 and (len(voices) == 1 or dialect.supports_voice_tag)


def synthesize_plan(
    plan: Sequence[VoicePlanEntry],
    engine: Engine,
    cache: AudioCache | None,
    dialect: SsmlDialect,
    single_request: bool = False,
    *,
    max_workers: int = 4,
    base_delay_s: float = 0.1,
) -> AudioClip:
    """Render ``plan`` and return normalized canonical audio.

    With ``single_request`` (and a plan one engine can voice) the whole plan
    goes out as one SSML document and pauses travel as break tags. Otherwise
    each entry is requested separately, possibly concurrently, and the clips
    are joined with PCM silence in plan order.
    """
    if not plan:
        raise ValueError("cannot synthesize an empty plan")

    if single_request and can_use_single_request(plan, dialect):
        doc = build_ssml(plan, dialect)
        anchor_lang = anchor_language((e.text, e.lang) for e in plan)
        voice = next(e.voice for e in plan if e.lang == anchor_lang)
        req = EngineRequest(voice=voice, ssml=doc.body, prosody=ZERO_PROSODY, dialect=dialect)
        key = cache_key(doc.body, voice.id, ZERO_PROSODY, dialect.name)
        try:
            clip = _cached_render(engine, cache, req, key, base_delay_s)
        except EngineFailure as err:
            err.index = 0
            raise
        return normalize_audio(clip)

    def render_entry(i: int) -> AudioClip:
        entry = plan[i]
        req = EngineRequest(voice=entry.voice, text=entry.text, prosody=entry.prosody, dialect=dialect)
        key = cache_key(entry.text, entry.voice.id, entry.prosody, dialect.name)
        try:
            return _cached_render(engine, cache, req, key, base_delay_s)
        except EngineFailure as err:
            err.index = i
            raise

    workers = max(1, min(max_workers, len(plan)))
    if workers == 1:
        clips = [render_entry(i) for i in range(len(plan))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map() yields in submission order, so assembly follows the plan
            clips = list(pool.map(render_entry, range(len(plan))))
    joined = concat_with_pauses(clips, [e.pause_before_ms for e in plan])
    return normalize_audio(joined)
