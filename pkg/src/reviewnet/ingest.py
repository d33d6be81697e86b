"""Reading the canonical commit-log stream.

Records are separated by the byte 0x1E.  Inside a record the header fields
are separated by 0x1F, in this order::

    hash, author_name, author_email, author_date, commit_date, merge_flag, body

The body is followed by a line consisting of ``--`` and then one touched
path per line.  See the README for the ``git log`` invocation that produces
this format.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import BinaryIO, Iterable, Iterator

from reviewnet.errors import Diagnostic

log = logging.getLogger(__name__)

RECORD_SEP = b"\x1e"
FIELD_SEP = "\x1f"
PATH_MARKER = "--"
ROOT = "ROOT"

HEADER_FIELDS = 7
_HASH_RE = re.compile(r"[0-9a-f]{40}")
_CHUNK = 1 << 20


@dataclass(frozen=True)
class CommitRecord:
    hash: str
    author_name: str
    author_email: str
    author_date: datetime
    commit_date: datetime
    body: tuple[str, ...]
    paths: tuple[str, ...]
    is_merge: bool = False


@dataclass(frozen=True)
class Window:
    """Half-open interval ``[start, end)`` over commit dates, with a label."""

    label: str
    start: datetime
    end: datetime

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"window {self.label!r}: start must precede end")

    def __contains__(self, when: datetime) -> bool:
        return self.start <= when < self.end

    @classmethod
    def year(cls, year: int) -> "Window":
        return cls(
            str(year),
            datetime(year, 1, 1, tzinfo=timezone.utc),
            datetime(year + 1, 1, 1, tzinfo=timezone.utc),
        )


def yearly_windows(first: int, last: int) -> list[Window]:
    """Calendar-year windows (UTC) for ``first..last`` inclusive."""
    if last < first:
        raise ValueError(f"--to {last} precedes --from {first}")
    return [Window.year(y) for y in range(first, last + 1)]


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime.

    Naive timestamps are taken to be UTC.
    """
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    when = datetime.fromisoformat(text)
    if when.tzinfo is None:
        return when.replace(tzinfo=timezone.utc)
    return when.astimezone(timezone.utc)


def _split_records(stream: BinaryIO | bytes) -> Iterator[tuple[bytes, bool]]:
    """Yield ``(raw_record, is_last)`` pairs, skipping blank pieces."""
    if isinstance(stream, (bytes, bytearray)):
        chunks: Iterable[bytes] = [bytes(stream)]
    else:
        chunks = iter(lambda: stream.read(_CHUNK), b"")

    def pieces() -> Iterator[bytes]:
        buf = b""
        for chunk in chunks:
            buf += chunk
            *complete, buf = buf.split(RECORD_SEP)
            yield from complete
        yield buf

    prev = None
    for raw in pieces():
        if not raw.strip():
            continue
        if prev is not None:
            yield prev, False
        prev = raw
    if prev is not None:
        yield prev, True


def _parse_record(text: str) -> CommitRecord:
    fields = text.split(FIELD_SEP)
    if len(fields) != HEADER_FIELDS:
        raise ValueError(f"expected {HEADER_FIELDS} header fields, found {len(fields)}")
    hash_, name, email, author_date, commit_date, merge_flag, rest = fields

    # git emits a newline after the record separator
    hash_ = hash_.lstrip("\n")
    if not _HASH_RE.fullmatch(hash_):
        raise ValueError(f"bad commit hash {hash_!r}")
    if merge_flag not in ("0", "1"):
        raise ValueError(f"merge flag must be 0 or 1, got {merge_flag!r}")
    try:
        adate = parse_timestamp(author_date)
        cdate = parse_timestamp(commit_date)
    except ValueError as exc:
        raise ValueError(f"unparseable date: {exc}") from None

    lines = rest.split("\n")
    try:
        marker = len(lines) - 1 - lines[::-1].index(PATH_MARKER)
    except ValueError:
        raise ValueError("missing '--' path separator line") from None
    body = tuple(lines[:marker])
    paths = tuple(p for p in lines[marker + 1 :] if p.strip())
    return CommitRecord(
        hash=hash_,
        author_name=name,
        author_email=email,
        author_date=adate,
        commit_date=cdate,
        body=body,
        paths=paths,
        is_merge=merge_flag == "1",
    )


def parse_commit_stream(
    stream: BinaryIO | bytes, issues: list[Diagnostic] | None = None
) -> Iterator[CommitRecord]:
    """Parse a canonical log stream into commit records, in stream order.

    Malformed records are skipped.  Each problem is logged and, when
    ``issues`` is given, appended to it as a :class:`Diagnostic`.
    """
    for index, (raw, is_last) in enumerate(_split_records(stream)):
        text = raw.decode("utf-8", errors="replace")
        text = text.replace("\r\n", "\n").replace("\r", "\n")
        where = f"record {index}"
        try:
            yield _parse_record(text)
        except ValueError as exc:
            if is_last and PATH_MARKER not in text.split("\n"):
                diag = Diagnostic("TRUNCATED_STREAM", f"partial final record discarded ({exc})", where)
            else:
                diag = Diagnostic("MALFORMED_RECORD", str(exc), where)
            log.warning("%s", diag)
            if issues is not None:
                issues.append(diag)


def filter_commits(records: Iterable[CommitRecord], window: Window) -> list[CommitRecord]:
    """Keep non-merge commits whose commit date lies in ``window``."""
    return [r for r in records if not r.is_merge and r.commit_date in window]


def subsystem_of(path: str) -> str:
    head, sep, _ = path.lstrip("/").partition("/")
    return head if sep and head else ROOT


def assign_subsystems(record: CommitRecord) -> frozenset[str]:
    """Top-level directories touched by a commit; files at the root map to ROOT."""
    return frozenset(subsystem_of(p) for p in record.paths)


def attributed_subsystems(record: CommitRecord, mode: str = "all") -> frozenset[str]:
    """Subsystems a commit counts towards under the given attribution mode.

    ``all`` counts the commit in every touched subsystem, ``first`` only in
    the subsystem of its first listed path.
    """
    if mode == "all":
        return assign_subsystems(record)
    if mode == "first":
        return frozenset([subsystem_of(record.paths[0])]) if record.paths else frozenset()
    raise ValueError(f"unknown subsystem attribution {mode!r}")


def write_record(record: CommitRecord) -> bytes:
    """Serialize one record in the canonical format (used by fixtures)."""
    header = FIELD_SEP.join(
        [
            record.hash,
            record.author_name,
            record.author_email,
            record.author_date.isoformat(),
            record.commit_date.isoformat(),
            "1" if record.is_merge else "0",
            "".join(line + "\n" for line in record.body),
        ]
    )
    text = header + PATH_MARKER + "\n" + "".join(p + "\n" for p in record.paths)
    return RECORD_SEP + text.encode("utf-8")
