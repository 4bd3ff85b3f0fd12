"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class CodeSwitchError(Exception):
    """Base class. ``code`` is machine readable; ``stage`` is filled in by the pipeline."""

    code = "error"

    def __init__(self, message: str = "", *, stage: str | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.stage = stage

    def to_dict(self) -> dict[str, str | None]:
        return {"code": self.code, "message": self.message, "stage": self.stage}


class InputError(CodeSwitchError):
    code = "invalid_input"


class EmptyInput(InputError):
    code = "EmptyInput"


class UnknownScript(InputError):
    code = "UnknownScript"


class DegenerateSplit(CodeSwitchError):
    code = "DegenerateSplit"


class NoLocaleRule(InputError):
    code = "NoLocaleRule"


class NoVoiceForLanguage(InputError):
    code = "NoVoiceForLanguage"


class SizeLimitExceeded(InputError):
    code = "SizeLimitExceeded"

    def __init__(self, byte_len: int, max_bytes: int, **kwargs) -> None:
        super().__init__(f"SSML is {byte_len} bytes; dialect cap is {max_bytes}", **kwargs)
        self.byte_len = byte_len
        self.max_bytes = max_bytes


class InvalidAudio(InputError):
    code = "InvalidAudio"


class NonCanonicalInput(InvalidAudio):
    code = "NonCanonicalInput"


class SilentWindow(CodeSwitchError):
    code = "SilentWindow"


class EngineFailure(CodeSwitchError):
    """Transport or engine error raised at the synthesis boundary."""

    code = "EngineFailure"

    def __init__(
        self,
        reason: str,
        message: str = "",
        *,
        retryable: bool = False,
        index: int | None = None,
        stage: str | None = None,
    ) -> None:
        super().__init__(message or reason, stage=stage)
        self.reason = reason
        self.retryable = retryable
        self.index = index

    def to_dict(self) -> dict:
        out = super().to_dict()
        out.update(reason=self.reason, retryable=self.retryable, index=self.index)
        return out
