"""Unicode script classification and same-script run segmentation.

Characters are classified with a block-range table (``data/scripts.json``).
Script-neutral characters (whitespace, punctuation, digits, symbols,
combining marks, ZWJ/ZWNJ) are folded into the preceding run, or into the
following run when they lead the text, so that every segment carries a
real script.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence


class ScriptClass(str, Enum):
    LATIN = "Latin"
    DEVANAGARI = "Devanagari"
    KANNADA = "Kannada"
    TELUGU = "Telugu"
    BENGALI = "Bengali"
    GUJARATI = "Gujarati"
    HAN = "Han"
    HIRAGANA = "Hiragana"
    KATAKANA = "Katakana"
    ARABIC = "Arabic"
    CYRILLIC = "Cyrillic"
    GREEK = "Greek"
    HANGUL = "Hangul"
    THAI = "Thai"
    HEBREW = "Hebrew"
    COMMON = "Common"
    UNKNOWN = "Unknown"

    @property
    def is_neutral(self) -> bool:
        return self in (ScriptClass.COMMON, ScriptClass.UNKNOWN)


KANA = frozenset({ScriptClass.HIRAGANA, ScriptClass.KATAKANA})


@dataclass(frozen=True)
class RawSegment:
    text: str
    script: ScriptClass
    start: int
    end: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("segment text must be non-empty")
        if self.end - self.start != len(self.text):
            raise ValueError("span length does not match text length")


def _parse_codepoint(value: int | str) -> int:
    if isinstance(value, int):
        return value
    value = value.strip()
    if value.upper().startswith("U+"):
        return int(value[2:], 16)
    return int(value, 0)


class ScriptTable:
    """Sorted, non-overlapping inclusive code-point ranges mapped to scripts."""

    def __init__(self, ranges: Iterable[tuple[int, int, ScriptClass]]) -> None:
        rows = sorted(ranges)
        prev_end = -1
        for start, end, _ in rows:
            if end < start:
                raise ValueError(f"range U+{start:04X}..U+{end:04X} is inverted")
            if start <= prev_end:
                raise ValueError(f"range starting at U+{start:04X} overlaps its predecessor")
            prev_end = end
        self.ranges: tuple[tuple[int, int, ScriptClass], ...] = tuple(rows)
        self._starts = [r[0] for r in rows]

    @classmethod
    def from_records(cls, records: Sequence[dict]) -> ScriptTable:
        return cls(
            (
                _parse_codepoint(r["start_codepoint"]),
                _parse_codepoint(r["end_codepoint"]),
                ScriptClass(r["script_name"]),
            )
            for r in records
        )

    @classmethod
    def from_json(cls, path: str | Path) -> ScriptTable:
        with open(path, encoding="utf-8") as fh:
            return cls.from_records(json.load(fh))

    def to_records(self) -> list[dict]:
        return [
            {"start_codepoint": f"U+{s:04X}", "end_codepoint": f"U+{e:04X}", "script_name": c.value}
            for s, e, c in self.ranges
        ]

    def lookup(self, codepoint: int) -> ScriptClass:
        i = bisect.bisect_right(self._starts, codepoint) - 1
        if i >= 0:
            start, end, script = self.ranges[i]
            if start <= codepoint <= end:
                return script
        return ScriptClass.UNKNOWN


@lru_cache(maxsize=1)
def default_table() -> ScriptTable:
    raw = resources.files("codeswitch").joinpath("data/scripts.json").read_text("utf-8")
    return ScriptTable.from_records(json.loads(raw))


def classify_char(ch: str, table: ScriptTable | None = None) -> ScriptClass:
    """Return the script class of a single character (total over all code points)."""
    if len(ch) != 1:
        raise ValueError("classify_char expects exactly one character")
    return (table or default_table()).lookup(ord(ch))


def _coalesce_japanese(runs: list[list]) -> list[list]:
    # runs: [script, start, end]; merge Han runs touching a Kana run into one Japanese run
    out: list[list] = []
    i = 0
    while i < len(runs):
        j = i
        while j < len(runs) and (runs[j][0] in KANA or runs[j][0] is ScriptClass.HAN):
            j += 1
        group = runs[i:j]
        if len(group) > 1 and any(r[0] in KANA for r in group):
            scripts = {r[0] for r in group}
            script = ScriptClass.HIRAGANA if ScriptClass.HIRAGANA in scripts else ScriptClass.KATAKANA
            out.append([script, group[0][1], group[-1][2]])
            i = j
        elif group:
            out.extend(group)
            i = j
        else:
            out.append(runs[i])
            i += 1
    return out


def split_by_script(
    text: str,
    table: ScriptTable | None = None,
    *,
    coalesce_japanese: bool = True,
) -> list[RawSegment]:
    """Split ``text`` into maximal same-script runs.

    Joining the returned segment texts reproduces ``text`` exactly.
    With ``coalesce_japanese`` a Kana run absorbs adjacent Han runs so that
    mixed Kanji/Kana text stays one segment; the merged run is tagged
    Hiragana when any Hiragana is present, otherwise Katakana.
    """
    if not text:
        return []
    table = table or default_table()

    runs: list[list] = []  # [script, start, end]
    for i, ch in enumerate(text):
        script = table.lookup(ord(ch))
        if script.is_neutral:
            if runs:
                runs[-1][2] = i + 1
            continue
        if runs and runs[-1][0] is script:
            runs[-1][2] = i + 1
        else:
            runs.append([script, i, i + 1])

    if not runs:
        return [RawSegment(text, ScriptClass.COMMON, 0, len(text))]
    runs[0][1] = 0  # leading neutrals attach forward

    if coalesce_japanese:
        runs = _coalesce_japanese(runs)

    return [RawSegment(text[s:e], script, s, e) for script, s, e in runs]
