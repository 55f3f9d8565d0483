"""Class archives (CLS1) and resumable job checkpoints.

A CLS1 archive is plain text::

    CLS1 N n 2 t count complete
    <OAM1 block>

    <OAM1 block>

    PRODUCER <job hash>
    SHA256 <digest of every preceding byte>

Loading re-checks the digest and re-verifies every class (strength,
size, canonical form, pairwise distinct).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .core import (
    CanonicalForm,
    FormatError,
    OAParams,
    ParameterError,
    canonical_form,
    format_oam,
    parse_oam,
    verify_strength,
)


class IntegrityError(RuntimeError):
    """Stored data failed its checksum or re-verification."""


class CheckpointError(RuntimeError):
    """A checkpoint cannot be used to resume the requested job."""


def job_hash(job: dict) -> str:
    blob = json.dumps(job, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class ClassArchive:
    params: OAParams
    classes: tuple[CanonicalForm, ...]
    producer: str
    complete: bool

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(sorted(self.classes)))
        keys = [c.key() for c in self.classes]
        if len(set(keys)) != len(keys):
            raise ParameterError("archive classes must be pairwise distinct")
        for c in self.classes:
            if c.n != self.params.factors or c.N != self.params.runs:
                raise ParameterError("class does not match the archive parameters")
        if not self.producer or any(ch.isspace() for ch in self.producer):
            raise ParameterError("producer must be a non-empty token")

    @property
    def content_id(self) -> str:
        """Hash of parameters and class set only; independent of producer and schedule."""
        h = hashlib.sha256()
        p = self.params
        h.update(f"{p.runs} {p.factors} {p.levels} {p.strength}\n".encode())
        for c in self.classes:
            h.update(c.key())
        return h.hexdigest()

    @classmethod
    def from_report(cls, report, producer: str | None = None) -> "ClassArchive":
        """Archive a ``solver.ClassReport``; ``producer`` defaults to a hash of its parameters."""
        params = report.params
        if producer is None:
            producer = job_hash({"n": params.factors, "t": params.strength, "index": params.index,
                                 "method": report.method})[:16]
        return cls(params, report.classes, producer, report.complete)


def format_archive(a: ClassArchive) -> str:
    p = a.params
    parts = [f"CLS1 {p.runs} {p.factors} {p.levels} {p.strength} {len(a.classes)} {int(a.complete)}\n"]
    parts.append("\n".join(format_oam(c.counts) for c in a.classes))
    if a.classes:
        parts.append("\n")
    parts.append(f"PRODUCER {a.producer}\n")
    body = "".join(parts)
    return body + f"SHA256 {hashlib.sha256(body.encode()).hexdigest()}\n"


def parse_archive(text: str, verify: bool = True) -> ClassArchive:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty archive", 1)
    head = lines[0].split()
    if len(head) != 7 or head[0] != "CLS1":
        raise FormatError("expected 'CLS1 N n s t count complete'", 1)
    try:
        N, n, s, t, count, complete = map(int, head[1:])
    except ValueError:
        raise FormatError("header fields must be integers", 1) from None
    if s != 2 or complete not in (0, 1):
        raise FormatError("levels must be 2 and complete must be 0 or 1", 1)
    if len(lines) < 3 or not lines[-1].startswith("SHA256 "):
        raise FormatError("missing SHA256 trailer", len(lines))
    if not lines[-2].startswith("PRODUCER "):
        raise FormatError("missing PRODUCER line", len(lines) - 1)
    body = "\n".join(lines[:-1]) + "\n"
    digest = lines[-1].split(maxsplit=1)[1].strip()
    producer = lines[-2].split(maxsplit=1)[1].strip()

    blocks: list[tuple[int, list[str]]] = []
    current: list[str] = []
    start = 2
    for no, line in enumerate(lines[1:-2], start=2):
        if line.strip() == "":
            if current:
                blocks.append((start, current))
                current = []
            start = no + 1
            continue
        if not current:
            start = no
        current.append(line)
    if current:
        blocks.append((start, current))
    if len(blocks) != count:
        raise FormatError(f"header announces {count} classes, found {len(blocks)}", 1)
    if verify and hashlib.sha256(body.encode()).hexdigest() != digest:
        raise IntegrityError("archive checksum mismatch")

    classes = []
    for first, block in blocks:
        m = parse_oam("\n".join(block), first_line=first)
        if m.n != n or m.total != N:
            raise FormatError(f"class has shape ({m.total}, {m.n}), expected ({N}, {n})", first)
        classes.append((first, m))
    try:
        params = OAParams(N, n, t)
    except ParameterError as e:
        raise FormatError(str(e), 1) from None
    forms = []
    for first, m in classes:
        if verify:
            rep = verify_strength(m.array(), t)
            if not rep.ok:
                raise IntegrityError(f"class at line {first} fails strength {t}: {rep.violation}")
            cf = canonical_form(m)
            if cf.counts != m:
                raise IntegrityError(f"class at line {first} is not in canonical form")
        forms.append(CanonicalForm(m))
    try:
        return ClassArchive(params, tuple(forms), producer, bool(complete))
    except ParameterError as e:
        raise IntegrityError(str(e)) from None


def save_archive(a: ClassArchive, path) -> None:
    _atomic_write(Path(path), format_archive(a))


def load_archive(path) -> ClassArchive:
    return parse_archive(Path(path).read_text())


# ---------------------------------------------------------------- checkpoints


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def checkpoint(job: dict, state: dict, path) -> None:
    """Write ``state`` for ``job``; the file carries a checksum over both."""
    payload = {"job": job, "job_hash": job_hash(job), "state": state}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(blob.encode()).hexdigest()
    _atomic_write(Path(path), json.dumps({"payload": payload, "sha256": digest}, sort_keys=True))


def resume(job: dict, path) -> dict | None:
    """State saved for ``job``, or None when no checkpoint exists.

    Raises CheckpointError if the file is corrupt or belongs to another job.
    """
    path = Path(path)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text())
        payload, digest = doc["payload"], doc["sha256"]
    except (ValueError, KeyError, TypeError):
        raise CheckpointError(f"{path}: unreadable checkpoint; start a fresh run") from None
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    if hashlib.sha256(blob.encode()).hexdigest() != digest:
        raise CheckpointError(f"{path}: checksum mismatch; start a fresh run")
    if payload.get("job_hash") != job_hash(job):
        raise CheckpointError(f"{path}: checkpoint belongs to a different job")
    return payload["state"]
