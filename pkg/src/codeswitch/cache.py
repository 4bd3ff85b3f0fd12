"""Content-addressed audio cache for synthesized segments and utterances."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from pathlib import Path

from .audio import AudioClip, from_wav_bytes, to_wav_bytes
from .prosody import Prosody


def cache_key(text: str, voice_id: str, prosody: Prosody, dialect_name: str) -> str:
    """SHA-256 over a canonical JSON encoding of every field that shapes the audio."""
    payload = {
        "text": text,
        "voice_id": voice_id,
        "prosody": prosody.to_dict(),
        "dialect": dialect_name,
    }
    serial = json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(serial.encode("utf-8")).hexdigest()


class AudioCache:
    """Thread-safe in-memory cache, optionally mirrored to a directory of WAV files.

    Writes are last-writer-wins; concurrent writers of one key store identical
    audio, so the race is benign.
    """

    def __init__(self, directory: str | Path | None = None) -> None:
        self._mem: dict[str, AudioClip] = {}
        self._lock = threading.Lock()
        self.directory = Path(directory) if directory is not None else None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> Path:
        assert self.directory is not None
        return self.directory / key[:2] / f"{key}.wav"

    def get(self, key: str) -> AudioClip | None:
        with self._lock:
            clip = self._mem.get(key)
        if clip is None and self.directory is not None:
            path = self._path(key)
            if path.exists():
                clip = from_wav_bytes(path.read_bytes())
                with self._lock:
                    self._mem[key] = clip
        with self._lock:
            if clip is None:
                self.misses += 1
            else:
                self.hits += 1
        return clip

    def put(self, key: str, clip: AudioClip) -> None:
        with self._lock:
            self._mem[key] = clip
        if self.directory is not None:
            path = self._path(key)
            path.parent.mkdir(parents=True, exist_ok=True)
            # atomic rename so readers never see a partial file
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            with os.fdopen(fd, "wb") as fh:
                fh.write(to_wav_bytes(clip))
            os.replace(tmp, path)

    def __len__(self) -> int:
        with self._lock:
            return len(self._mem)

    def __contains__(self, key: str) -> bool:
        with self._lock:
            if key in self._mem:
                return True
        return self.directory is not None and self._path(key).exists()
