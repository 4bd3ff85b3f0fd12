"""PCM clip type, WAV I/O and the audio math used by the synthesizer.

Canonical audio is 16 kHz, mono, signed 16-bit. Sample values are kept as
``int16`` numpy arrays of shape ``(frames,)`` for mono or
``(frames, channels)`` otherwise.
"""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass

import numpy as np

from .errors import InvalidAudio, NonCanonicalInput, SilentWindow

CANONICAL_RATE = 16000
FULL_SCALE = 32767
TARGET_PEAK = 0.891  # -1 dBFS


@dataclass(frozen=True, eq=False)
class AudioClip:
    sample_rate: int
    channels: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples)
        if samples.dtype != np.int16:
            raise InvalidAudio(f"samples must be int16, got {samples.dtype}")
        if self.channels == 1 and samples.ndim == 2 and samples.shape[1] == 1:
            samples = samples[:, 0]
        expected_ndim = 1 if self.channels == 1 else 2
        if samples.ndim != expected_ndim or (self.channels > 1 and samples.shape[1] != self.channels):
            raise InvalidAudio(f"sample array shape {samples.shape} does not match {self.channels} channel(s)")
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def frames(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return self.frames / self.sample_rate

    @property
    def is_canonical(self) -> bool:
        return self.sample_rate == CANONICAL_RATE and self.channels == 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AudioClip):
            return NotImplemented
        return (
            self.sample_rate == other.sample_rate
            and self.channels == other.channels
            and np.array_equal(self.samples, other.samples)
        )

    def __hash__(self) -> int:
        return hash((self.sample_rate, self.channels, self.samples.tobytes()))

    @classmethod
    def silence(cls, n_samples: int, sample_rate: int = CANONICAL_RATE) -> AudioClip:
        return cls(sample_rate, 1, np.zeros(n_samples, dtype=np.int16))

    @classmethod
    def from_float(cls, x: np.ndarray, sample_rate: int = CANONICAL_RATE) -> AudioClip:
        """Build a clip from floats in [-1, 1] (scaled by 32767, rounded, clipped)."""
        x = np.asarray(x, dtype=np.float64)
        pcm = np.clip(np.rint(x * FULL_SCALE), -32768, 32767).astype(np.int16)
        return cls(sample_rate, 1 if pcm.ndim == 1 else pcm.shape[1], pcm)


def tone(freq_hz: float, duration_s: float, amplitude: float = 0.5,
         sample_rate: int = CANONICAL_RATE, phase: float = 0.0) -> AudioClip:
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    return AudioClip.from_float(amplitude * np.sin(2 * np.pi * freq_hz * t + phase), sample_rate)


def to_wav_bytes(clip: AudioClip) -> bytes:
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(clip.channels)
        wf.setsampwidth(2)
        wf.setframerate(clip.sample_rate)
        wf.writeframes(clip.samples.astype("<i2").tobytes())
    return buf.getvalue()


def from_wav_bytes(data: bytes) -> AudioClip:
    try:
        with wave.open(io.BytesIO(data), "rb") as wf:
            if wf.getsampwidth() != 2:
                raise InvalidAudio(f"only 16-bit PCM is supported, got {8 * wf.getsampwidth()}-bit")
            channels, rate = wf.getnchannels(), wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except (wave.Error, EOFError) as err:
        raise InvalidAudio(f"not a PCM WAV stream: {err}") from err
    pcm = np.frombuffer(raw, dtype="<i2").astype(np.int16)
    if channels > 1:
        pcm = pcm.reshape(-1, channels)
    return AudioClip(rate, channels, pcm)


def write_wav(path, clip: AudioClip) -> None:
    with open(path, "wb") as fh:
        fh.write(to_wav_bytes(clip))


def read_wav(path) -> AudioClip:
    with open(path, "rb") as fh:
        return from_wav_bytes(fh.read())


def resample_to_canonical(clip: AudioClip) -> AudioClip:
    """Average channels to mono and linearly interpolate to 16 kHz."""
    if clip.frames == 0 or clip.sample_rate <= 0:
        raise InvalidAudio("cannot resample an empty clip or a non-positive sample rate")
    if clip.is_canonical:
        return clip
    x = clip.samples.astype(np.float64)
    if x.ndim == 2:
        x = x.mean(axis=1)
    if clip.sample_rate != CANONICAL_RATE:
        n_out = max(1, int(round(clip.frames * CANONICAL_RATE / clip.sample_rate)))
        positions = np.arange(n_out) * (clip.sample_rate / CANONICAL_RATE)
        x = np.interp(positions, np.arange(clip.frames), x)
    pcm = np.clip(np.rint(x), -32768, 32767).astype(np.int16)
    return AudioClip(CANONICAL_RATE, 1, pcm)


def ms_to_samples(ms: float, sample_rate: int = CANONICAL_RATE) -> int:
    return int(round(ms * sample_rate / 1000))


def concat_with_pauses(clips: list[AudioClip], pauses_ms: list[int]) -> AudioClip:
    """Join canonical clips; ``pauses_ms[i]`` of silence precedes ``clips[i]``."""
    if len(clips) != len(pauses_ms):
        raise ValueError("need exactly one pause value per clip")
    if not clips:
        raise InvalidAudio("nothing to concatenate")
    for i, c in enumerate(clips):
        if not c.is_canonical:
            raise NonCanonicalInput(f"clip {i} is {c.sample_rate} Hz / {c.channels} ch")
    parts = []
    for clip, pause in zip(clips, pauses_ms):
        if pause < 0:
            raise ValueError("pauses must be non-negative")
        if pause:
            parts.append(np.zeros(ms_to_samples(pause), dtype=np.int16))
        parts.append(clip.samples)
    return AudioClip(CANONICAL_RATE, 1, np.concatenate(parts))


def normalize_audio(clip: AudioClip, target_peak: float = TARGET_PEAK) -> AudioClip:
    """Linear peak normalization so that max |sample| == target_peak * full scale."""
    if clip.frames == 0:
        return clip
    peak = int(np.max(np.abs(clip.samples.astype(np.int32))))
    if peak == 0:
        return clip
    gain = target_peak * FULL_SCALE / peak
    scaled = np.clip(np.rint(clip.samples.astype(np.float64) * gain), -32768, 32767)
    return AudioClip(clip.sample_rate, clip.channels, scaled.astype(np.int16))


def _window(clip: AudioClip, window: tuple[float, float] | None) -> np.ndarray:
    x = clip.samples if clip.channels == 1 else clip.samples.mean(axis=1)
    if window is None:
        return np.asarray(x, dtype=np.float64)
    start_s, end_s = window
    if not 0 <= start_s < end_s <= clip.duration_s + 1e-12:
        raise ValueError(f"window {window} lies outside the {clip.duration_s:.3f} s clip")
    a = int(round(start_s * clip.sample_rate))
    b = int(round(end_s * clip.sample_rate))
    return np.asarray(x[a:b], dtype=np.float64)


def zero_crossings(x: np.ndarray) -> int:
    positive = x >= 0
    return int(np.count_nonzero(positive[1:] != positive[:-1]))


def estimate_f0(
    clip: AudioClip,
    window: tuple[float, float] | None = None,
    amplitude_epsilon: float = 0.001,
) -> float:
    """Zero-crossing-rate pitch estimate: crossings / (2 * window seconds).

    Accurate to about 1 / (2 * window_s) Hz on pure tones (0.5 Hz for a 1 s window).
    """
    x = _window(clip, window)
    if x.size < 2 or np.max(np.abs(x)) < amplitude_epsilon * FULL_SCALE:
        raise SilentWindow("window holds no signal above the amplitude floor")
    return zero_crossings(x) / (2 * (x.size / clip.sample_rate))


def measure_pauses(
    clip: AudioClip,
    amplitude_epsilon: float = 0.01,
    min_pause_ms: float = 20,
) -> list[tuple[float, float]]:
    """Interior silent runs (|sample| < epsilon * FS) lasting at least ``min_pause_ms``.

    Leading and trailing silence is ignored. Returns (start_s, duration_s) pairs.
    """
    x = clip.samples if clip.channels == 1 else clip.samples.mean(axis=1)
    silent = np.abs(np.asarray(x, dtype=np.float64)) < amplitude_epsilon * FULL_SCALE
    if silent.size == 0:
        return []
    padded = np.concatenate(([False], silent, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    min_len = min_pause_ms * clip.sample_rate / 1000
    out = []
    for a, b in zip(starts, ends):
        if a == 0 or b == silent.size or (b - a) < min_len:
            continue
        out.append((float(a / clip.sample_rate), float((b - a) / clip.sample_rate)))
    return out
