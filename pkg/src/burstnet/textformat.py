"""Sectioned plain-text grammar shared by network specs and run configs.

A file is a sequence of ``[section]`` headers, each followed by lines.
Blank lines and ``#`` comments are ignored.  Inside a section a line is
either a ``key = value`` pair or a whitespace-separated record; which form
a section accepts is decided by the consumer, not the parser.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SpecSyntaxError


@dataclass(frozen=True)
class Line:
    section: str
    lineno: int
    tokens: tuple[str, ...]
    key: str | None = None
    value: str | None = None


def parse_sections(text: str, allowed: set[str] | None = None) -> dict[str, list[Line]]:
    sections: dict[str, list[Line]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip().lower()
            if allowed is not None and current not in allowed:
                raise SpecSyntaxError(f"line {lineno}: unknown section [{current}]")
            if current in sections:
                raise SpecSyntaxError(f"line {lineno}: section [{current}] repeated")
            sections[current] = []
            continue
        if current is None:
            raise SpecSyntaxError(f"line {lineno}: content before first section header")
        if "=" in stripped:
            key, value = stripped.split("=", 1)
            key = key.strip().lower()
            if not key or " " in key:
                raise SpecSyntaxError(f"line {lineno}: malformed key in {stripped!r}")
            sections[current].append(
                Line(current, lineno, tuple(stripped.split()), key, value.strip())
            )
        else:
            sections[current].append(Line(current, lineno, tuple(stripped.split())))
    return sections


def key_values(lines: list[Line], allowed: set[str], section: str) -> dict[str, tuple[int, str]]:
    """Collect ``key = value`` lines, rejecting records and unknown keys."""
    out: dict[str, tuple[int, str]] = {}
    for line in lines:
        if line.key is None:
            raise SpecSyntaxError(f"line {line.lineno}: [{section}] expects key = value")
        if line.key not in allowed:
            raise SpecSyntaxError(f"line {line.lineno}: unknown key {line.key!r} in [{section}]")
        if line.key in out:
            raise SpecSyntaxError(f"line {line.lineno}: duplicate key {line.key!r}")
        out[line.key] = (line.lineno, line.value or "")
    return out


def records(lines: list[Line], section: str) -> list[Line]:
    for line in lines:
        if line.key is not None:
            raise SpecSyntaxError(f"line {line.lineno}: [{section}] expects records, not key = value")
    return lines


def fmt_float(x: float) -> str:
    # repr round-trips exactly, which the snapshot/replay path relies on
    return repr(float(x))
