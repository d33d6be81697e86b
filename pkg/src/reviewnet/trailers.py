"""Peer-review keyword lines (sign-offs, acks, reviews) in commit bodies."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable


class TrailerKind(enum.Enum):
    SIGNED = "signed"
    ACKED = "acked"
    REVIEWED = "reviewed"


# Matched against the lowercased line.  "[ -]" joins words, "[ :;]" ends the keyword.
_KEYWORD_RE = re.compile(
    r"(?P<signed>signed[ -](?:of[ -]|off[ -])?by[ :;])"
    r"|(?P<acked>acked:|acked[ -](?:off[ -])?by[ :;])"
    r"|(?P<reviewed>reviewed:|reviewed[ -]by[ :;])"
)

# name < local @ label . rest (> | end); "." may also be a comma.
_TAIL_RE = re.compile(
    r"(?P<name>[^<]+)<(?P<email>[^<>@]+@[^<>@.,]+[.,][^<>@]+?)\s*(?:>|$)"
)


@dataclass(frozen=True)
class Trailer:
    kind: TrailerKind
    raw_name: str
    raw_email: str
    line_index: int


def _lowered(line: str) -> tuple[str, list[int]]:
    """Lowercase ``line`` and map each lowered position back to an original index.

    ``str.lower`` may change the length of some characters, so positions
    found in the lowered text cannot be reused on the original directly.
    """
    parts = []
    origin = []
    for i, ch in enumerate(line):
        low = ch.lower()
        parts.append(low)
        origin.extend([i] * len(low))
    origin.append(len(line))
    return "".join(parts), origin


def _match_keyword(line: str, pos: int = 0) -> tuple[TrailerKind, int] | None:
    """Keyword at ``line[pos:]``: returns its kind and the end offset in ``line``."""
    low, origin = _lowered(line[pos:])
    m = _KEYWORD_RE.match(low)
    if m is None:
        return None
    kind = TrailerKind(m.lastgroup)
    return kind, pos + origin[m.end()]


def sanitize_trailers(raw_line: str) -> str:
    """Drop keyword prefixes accidentally repeated after the first one.

    ``"Acked-by: Reviewed-by: A B <a@b.c>"`` becomes ``"Acked-by: A B <a@b.c>"``;
    the leftmost keyword always wins.
    """
    head = _match_keyword(raw_line)
    if head is None:
        return raw_line
    _, end = head
    line = raw_line
    while True:
        start = end
        while start < len(line) and line[start] == " ":
            start += 1
        dup = _match_keyword(line, start)
        if dup is None:
            return line
        line = line[:end] + line[dup[1]:]


def parse_trailer_line(line: str, line_index: int = 0) -> Trailer | None:
    line = sanitize_trailers(line)
    head = _match_keyword(line)
    if head is None:
        return None
    kind, end = head
    m = _TAIL_RE.match(line, end)
    if m is None:
        return None
    name = m["name"].strip()
    email = m["email"].strip()
    if not name:
        return None
    return Trailer(kind, name, email, line_index)


def extract_trailers(body: Iterable[str]) -> list[Trailer]:
    """All qualified review keyword lines of a commit body, in line order.

    Keywords are matched case-insensitively at the start of each line; the
    name and e-mail keep their original spelling.  Lines lacking a
    ``name <user@domain.tld>`` tail do not qualify.
    """
    found = []
    for i, line in enumerate(body):
        trailer = parse_trailer_line(line, i)
        if trailer is not None:
            found.append(trailer)
    return found
