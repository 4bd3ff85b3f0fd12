"""Command-line entry point.

    codeswitch segments --text "Hello नमस्ते world"
    codeswitch plan --text "I'm from the United States. Soy de los Estados Unidos."
    codeswitch ssml --file input.txt --dialect azure
    codeswitch synth --text "Hola world" --engine mock --out out.wav
    codeswitch serve --port 8080
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .audio import write_wav
from .config import ENGINES, RunConfig, Runtime
from .errors import CodeSwitchError, EngineFailure
from .pipeline import PipelineResult, make_detector, plan_text, run
from .planner import Mode, UserPrefs
from .ssml import build_ssml, dialect_names

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ENGINE = 2


def plan_json(plan) -> dict:
    return {"schema_version": SCHEMA_VERSION, "entries": [e.to_dict() for e in plan]}


def segments_json(segments) -> dict:
    return {"schema_version": SCHEMA_VERSION, "segments": [s.to_dict() for s in segments]}


def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--text", help="input text")
    src.add_argument("--file", type=Path, help="read input text from a UTF-8 file")
    p.add_argument("--config", type=Path, help="RunConfig JSON file")
    p.add_argument("--prefs", type=Path, help="UserPrefs JSON file")
    p.add_argument("--catalog", help="voice catalog JSON file")
    p.add_argument("--lexicon", action="append", default=None, help="extra lexicon JSON (repeatable)")
    p.add_argument("--hint", help="ISO 639-1 code forced for Latin-script text")
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--dialect", choices=dialect_names())
    p.add_argument("--engine", choices=ENGINES)
    p.add_argument("--endpoint", help="URL for the http engine")
    p.add_argument("--pause-ms", type=int, help="pause inserted at language/voice boundaries")
    p.add_argument("--threshold", type=int, help="foreign spans up to this many words keep the anchor voice")
    p.add_argument("--max-voices", type=int, help="distinct voices per utterance (0 = unlimited)")
    p.add_argument("--single-request", action="store_true", default=None,
                   help="send the whole SSML document in one engine call when possible")
    p.add_argument("--cache-dir", help="persist synthesized clips here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codeswitch", description="Code-switching TTS orchestration")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("segments", "print the tagged segment list as JSON"),
        ("plan", "print the voice plan as JSON"),
        ("ssml", "print the SSML document"),
        ("synth", "synthesize to a WAV file"),
    ]:
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "synth":
            p.add_argument("--out", help="output WAV path")
    serve = sub.add_parser("serve", help="run the HTTP service")
    _add_common(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_json(args.config) if args.config else RunConfig()
    prefs = config.prefs
    if args.prefs:
        prefs = UserPrefs.from_json(args.prefs)
    pref_changes = {
        "latin_lang_hint": args.hint,
        "mode": args.mode,
        "boundary_pause_ms": args.pause_ms,
        "switch_threshold_words": args.threshold,
    }
    if args.max_voices is not None:
        prefs = replace(prefs, max_voices=args.max_voices or None)
    prefs = replace(prefs, **{k: v for k, v in pref_changes.items() if v is not None})
    return config.with_overrides(
        prefs=prefs,
        catalog_path=args.catalog,
        lexicon_paths=tuple(args.lexicon) if args.lexicon else None,
        dialect_name=args.dialect,
        engine_name=args.engine,
        http_endpoint=args.endpoint,
        single_request=args.single_request,
        cache_dir=args.cache_dir,
        out_path=getattr(args, "out", None),
    )


def read_text(args: argparse.Namespace) -> str:
    if args.file is not None:
        return args.file.read_text(encoding="utf-8")
    if args.text is not None:
        return args.text
    return sys.stdin.read()


def synthesize(text: str, rt: Runtime, prefs=None) -> PipelineResult:
    return run(
        text,
        prefs or rt.config.prefs,
        rt.catalog,
        rt.dialect,
        rt.engine,
        cache=rt.cache,
        single_request=rt.config.single_request,
        detector=make_detector(prefs or rt.config.prefs, rt.lexicons),
    )


def _fail(err: Exception, code: int) -> int:
    if isinstance(err, CodeSwitchError):
        body = err.to_dict()
    else:
        body = {"code": type(err).__name__, "message": str(err), "stage": "input"}
    print(json.dumps(body, ensure_ascii=False), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if args.command == "serve":
            from .service import serve

            serve(config, args.host, args.port)
            return EXIT_OK
        rt = Runtime.load(config)
        text = read_text(args)

        if args.command in ("segments", "plan", "ssml"):
            segments, plan = plan_text(
                text, config.prefs, rt.catalog, detector=make_detector(config.prefs, rt.lexicons)
            )
            if args.command == "ssml":
                print(build_ssml(plan, rt.dialect).body)
                return EXIT_OK
            doc = segments_json(segments) if args.command == "segments" else plan_json(plan)
            print(json.dumps(doc, ensure_ascii=False, indent=2))
            return EXIT_OK

        out = config.out_path
        if not out:
            raise ValueError("synth needs --out")
        result = synthesize(text, rt)
        write_wav(out, result.audio)
        print(json.dumps({"out": out, "duration_s": result.audio.duration_s,
                          "entries": len(result.plan)}))
        return EXIT_OK
    except EngineFailure as err:
        return _fail(err, EXIT_ENGINE)
    except (CodeSwitchError, ValueError, OSError) as err:
        return _fail(err, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
