"""Line-record helpers for the plain-text world, topology, assembly and
scenario files. Blank lines and ``#`` comments are ignored; fields are
whitespace separated with shell-style quoting."""

from __future__ import annotations

import shlex
from typing import Iterable, Iterator

from .errors import ScenarioParseError


def iter_records(lines: Iterable[str], first_line: int = 1) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(lines, start=first_line):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        if not any(ch in text for ch in "\"'\\#"):
            # nothing for shlex to interpret
            yield lineno, text.split()
            continue
        try:
            tokens = shlex.split(text, comments=True)
        except ValueError as exc:
            raise ScenarioParseError(str(exc), line=lineno) from None
        if tokens:
            yield lineno, tokens


def split_params(tokens: list[str]) -> tuple[list[str], dict[str, str]]:
    """Separate positional tokens from trailing ``key=value`` tokens."""
    positional, params = [], {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if sep and key and key.replace("_", "").replace("-", "").isalnum():
            params[key] = value
        else:
            positional.append(tok)
    return positional, params


def split_list(text: str) -> list[str]:
    if text in ("", "-"):
        return []
    return [item for item in text.split(",") if item]
