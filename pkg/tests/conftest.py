from __future__ import annotations

import pytest

from codeswitch.engines import MockEngine
from codeswitch.planner import Locale, UserPrefs, Voice, VoiceCatalog, VoicePlanEntry
from codeswitch.prosody import ZERO_PROSODY, Prosody
from codeswitch.scripts import RawSegment, ScriptClass
from codeswitch.ssml import get_dialect

CASE_1 = "I'm from the United States. Soy de los Estados Unidos."
CASE_2 = "I'm from the United States. 我来自美国。"
CASE_3 = "Je viens des États-Unis. أنا من الولايات المتحدة."

# nine languages, one utterance; Mandarin sits before German so the Han run
# is not adjacent to the Japanese kana (which would coalesce them)
NINE_LANGUAGE_DEMO = (
    "Hello, how are you today? "
    "नमस्ते, आप कैसे हैं? "
    "ನಮಸ್ಕಾರ, ನೀವು ಹೇಗಿದ್ದೀರಿ? "
    "నమస్కారం, మీరు ఎలా ఉన్నారు? "
    "নমস্কার, আপনি কেমন আছেন? "
    "નમસ્તે, તમે કેમ છો? "
    "你好，你今天好吗？ "
    "Guten Tag, wie geht es dir? "
    "こんにちは、お元気ですか？"
)


@pytest.fixture
def catalog() -> VoiceCatalog:
    return VoiceCatalog.default()


@pytest.fixture
def prefs() -> UserPrefs:
    return UserPrefs()


@pytest.fixture
def engine() -> MockEngine:
    return MockEngine()


@pytest.fixture
def generic():
    return get_dialect("generic")


def seg(text: str, script: ScriptClass = ScriptClass.LATIN, start: int = 0) -> RawSegment:
    return RawSegment(text, script, start, start + len(text))


def entry(
    text: str,
    lang: str,
    voice: Voice,
    *,
    locale: str | None = None,
    lang_span: bool = False,
    pause: int = 0,
    prosody: Prosody = ZERO_PROSODY,
    start: int = 0,
) -> VoicePlanEntry:
    return VoicePlanEntry(
        seg(text, start=start),
        lang,
        Locale.parse(locale) if locale else voice.locale,
        voice,
        lang_span=lang_span,
        pause_before_ms=pause,
        prosody=prosody,
    )


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
