"""SSML rendering of a voice plan for several engine dialects."""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence
from xml.parsers import expat

from .errors import SizeLimitExceeded
from .planner import VoicePlanEntry, anchor_language
from .prosody import Emphasis

_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&apos;"}
_ESCAPE_RE = re.compile("[&<>\"']")
_BREAK_TIME_RE = re.compile(r"^\s*(-?\d+(?:\.\d+)?)\s*(ms|s)\s*$")
_SPAN_TAGS = frozenset({"voice", "lang"})


@dataclass(frozen=True)
class SsmlDialect:
    name: str
    max_bytes: int
    supports_voice_tag: bool = True
    supports_lang_tag: bool = True
    supports_emphasis: bool = True
    break_tag_form: str = '<break time="{ms}ms"/>'
    root_attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.max_bytes <= 0:
            raise ValueError("max_bytes must be positive")
        if "{ms}" not in self.break_tag_form:
            raise ValueError("break_tag_form needs a {ms} placeholder")

    @classmethod
    def from_dict(cls, name: str, d: Mapping) -> SsmlDialect:
        return cls(name=name, **d)


@lru_cache(maxsize=1)
def _bundled() -> dict[str, SsmlDialect]:
    raw = json.loads(resources.files("codeswitch").joinpath("data/dialects.json").read_text("utf-8"))
    return {name: SsmlDialect.from_dict(name, d) for name, d in raw.items()}


def load_dialects(path: str | Path) -> dict[str, SsmlDialect]:
    with open(path, encoding="utf-8") as fh:
        return {name: SsmlDialect.from_dict(name, d) for name, d in json.load(fh).items()}


def get_dialect(name: str) -> SsmlDialect:
    try:
        return _bundled()[name]
    except KeyError:
        raise ValueError(f"unknown SSML dialect {name!r}; known: {sorted(_bundled())}") from None


def dialect_names() -> list[str]:
    return sorted(_bundled())


@dataclass(frozen=True)
class SsmlDocument:
    dialect: SsmlDialect
    body: str
    byte_len: int = -1

    def __post_init__(self) -> None:
        object.__setattr__(self, "byte_len", len(self.body.encode("utf-8")))


@dataclass(frozen=True)
class Finding:
    code: str
    message: str


def escape_text(text: str) -> str:
    return _ESCAPE_RE.sub(lambda m: _ESCAPES[m.group()], text)


def _signed(pct: int) -> str:
    return f"{pct:+d}%"


def _render_entry(entry: VoicePlanEntry, dialect: SsmlDialect, force_lang: bool) -> str:
    inner = escape_text(entry.text)
    p = entry.prosody
    if p.emphasis is not Emphasis.NONE and dialect.supports_emphasis:
        inner = f'<emphasis level="{p.emphasis.value}">{inner}</emphasis>'
    attrs = []
    if p.rate_pct:
        attrs.append(f'rate="{_signed(p.rate_pct)}"')
    if p.pitch_pct:
        attrs.append(f'pitch="{_signed(p.pitch_pct)}"')
    if attrs:
        inner = f"<prosody {' '.join(attrs)}>{inner}</prosody>"
    if (entry.lang_span or force_lang) and dialect.supports_lang_tag:
        inner = f'<lang xml:lang="{escape_text(entry.locale.tag)}">{inner}</lang>'
    return inner


def render_ssml(plan: Sequence[VoicePlanEntry], dialect: SsmlDialect) -> str:
    if not plan:
        raise ValueError("cannot render an empty plan")
    anchor_lang = anchor_language((e.text, e.lang) for e in plan)
    root_locale = next(e.locale for e in plan if e.lang == anchor_lang)
    attrs = "".join(f' {k}="{escape_text(v)}"' for k, v in dialect.root_attributes.items())
    parts = [f'<speak{attrs} xml:lang="{escape_text(root_locale.tag)}">']

    def brk(ms: int) -> str:
        return dialect.break_tag_form.format(ms=ms)

    if dialect.supports_voice_tag:
        open_voice: str | None = None
        for entry in plan:
            if entry.voice.id != open_voice:
                if open_voice is not None:
                    parts.append("</voice>")
                if entry.pause_before_ms > 0:
                    parts.append(brk(entry.pause_before_ms))
                parts.append(f'<voice name="{escape_text(entry.voice.id)}">')
                open_voice = entry.voice.id
            elif entry.pause_before_ms > 0:
                parts.append(brk(entry.pause_before_ms))
            parts.append(_render_entry(entry, dialect, force_lang=False))
        parts.append("</voice>")
    else:
        for entry in plan:
            if entry.pause_before_ms > 0:
                parts.append(brk(entry.pause_before_ms))
            parts.append(_render_entry(entry, dialect, force_lang=True))
    parts.append("</speak>")
    return "".join(parts)


def build_ssml(plan: Sequence[VoicePlanEntry], dialect: SsmlDialect) -> SsmlDocument:
    doc = SsmlDocument(dialect, render_ssml(plan, dialect))
    if doc.byte_len > dialect.max_bytes:
        raise SizeLimitExceeded(doc.byte_len, dialect.max_bytes)
    return doc


def chunk_plan(plan: Sequence[VoicePlanEntry], dialect: SsmlDialect) -> list[list[VoicePlanEntry]]:
    """Greedy split into consecutive sub-plans whose SSML fits the dialect cap."""
    chunks: list[list[VoicePlanEntry]] = []
    current: list[VoicePlanEntry] = []
    for entry in plan:
        trial = current + [entry]
        if current and len(render_ssml(trial, dialect).encode("utf-8")) > dialect.max_bytes:
            chunks.append(current)
            current = [entry]
        else:
            current = trial
    if current:
        chunks.append(current)
    for chunk in chunks:
        size = len(render_ssml(chunk, dialect).encode("utf-8"))
        if size > dialect.max_bytes:
            raise SizeLimitExceeded(size, dialect.max_bytes)
    return chunks


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


_PARSE_CODES = {
    expat.errors.codes[expat.errors.XML_ERROR_NO_ELEMENTS]: "UnclosedElement",
    expat.errors.codes[expat.errors.XML_ERROR_UNCLOSED_TOKEN]: "UnclosedElement",
    expat.errors.codes[expat.errors.XML_ERROR_TAG_MISMATCH]: "MismatchedTag",
}


def validate(doc: SsmlDocument | str, dialect: SsmlDialect | None = None) -> list[Finding]:
    """Return machine-readable findings; an empty list means the document is clean."""
    if isinstance(doc, str):
        doc = SsmlDocument(dialect or get_dialect("generic"), doc)
    findings: list[Finding] = []
    if doc.byte_len > doc.dialect.max_bytes:
        findings.append(Finding("SizeLimitExceeded", f"{doc.byte_len} bytes > cap {doc.dialect.max_bytes}"))
    try:
        root = ET.fromstring(doc.body)
    except ET.ParseError as err:
        findings.insert(0, Finding(_PARSE_CODES.get(err.code, "MalformedXml"), str(err)))
        return findings

    if _local(root.tag) != "speak":
        findings.append(Finding("RootNotSpeak", f"root element is <{_local(root.tag)}>"))

    def walk(el: ET.Element, in_span: bool) -> None:
        name = _local(el.tag)
        inside = in_span or name in _SPAN_TAGS
        if name == "break":
            m = _BREAK_TIME_RE.match(el.get("time", ""))
            if m is None:
                findings.append(Finding("InvalidBreakTime", f"unparseable break time {el.get('time')!r}"))
            elif float(m.group(1)) < 0:
                findings.append(Finding("NegativeBreak", f"negative break time {el.get('time')!r}"))
        if el.text and el.text.strip() and not inside:
            findings.append(Finding("TextOutsideSpan", f"text {el.text.strip()[:30]!r} outside voice/lang"))
        for child in el:
            walk(child, inside)
            if child.tail and child.tail.strip() and not inside:
                findings.append(Finding("TextOutsideSpan", f"text {child.tail.strip()[:30]!r} outside voice/lang"))

    walk(root, False)
    return findings


def ssml_text(body: str) -> str:
    """Text content of an SSML body with tags stripped and entities resolved."""
    return "".join(ET.fromstring(body).itertext())
