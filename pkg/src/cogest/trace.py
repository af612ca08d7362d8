"""Line-oriented session trace format.

A trace is an append-only log: a version header, optional ``#scene`` meta
line, then one canonical JSON object per line with strictly increasing
``seq`` and nondecreasing ``t``. Input kinds (utterance, skeleton,
detection_snapshot, pointing, halt, resume) drive replay; output kinds
(sim_event, command) record what the session produced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable

HEADER = "#cogest-trace v1"
SCENE_PREFIX = "#scene "

INPUT_KINDS = frozenset(
    {"utterance", "skeleton", "detection_snapshot", "pointing", "halt", "resume"}
)
OUTPUT_KINDS = frozenset({"sim_event", "command"})
ALL_KINDS = INPUT_KINDS | OUTPUT_KINDS


class MalformedTrace(Exception):
    def __init__(self, message: str, line_no: int | None = None) -> None:
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True)
class TraceRecord:
    seq: int
    t: float
    kind: str
    payload: dict


def dumps_record(record: TraceRecord) -> str:
    body = {"seq": record.seq, "t": record.t, "kind": record.kind, **record.payload}
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


def _parse_record(line: str, line_no: int) -> TraceRecord:
    try:
        body = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedTrace(f"invalid JSON ({exc.msg})", line_no) from exc
    if not isinstance(body, dict):
        raise MalformedTrace("record is not an object", line_no)
    try:
        seq = body.pop("seq")
        t = body.pop("t")
        kind = body.pop("kind")
    except KeyError as exc:
        raise MalformedTrace(f"missing field {exc.args[0]}", line_no) from exc
    if not isinstance(seq, int):
        raise MalformedTrace("seq must be an integer", line_no)
    if not isinstance(t, (int, float)):
        raise MalformedTrace("t must be a number", line_no)
    if kind not in ALL_KINDS:
        raise MalformedTrace(f"unknown record kind {kind!r}", line_no)
    return TraceRecord(seq=seq, t=float(t), kind=kind, payload=body)


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)
    scene: dict | None = None

    def inputs(self) -> Iterable[TraceRecord]:
        return (r for r in self.records if r.kind in INPUT_KINDS)

    def dumps(self) -> str:
        lines = [HEADER]
        if self.scene is not None:
            lines.append(SCENE_PREFIX + json.dumps(self.scene, sort_keys=True, separators=(",", ":")))
        lines.extend(dumps_record(r) for r in self.records)
        return "\n".join(lines) + "\n"

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())


def loads(text: str) -> Trace:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != HEADER:
        raise MalformedTrace(f"missing header {HEADER!r}", 1)

    trace = Trace()
    last_seq: int | None = None
    last_t: float | None = None
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise MalformedTrace("blank line inside trace", idx)
        if line.startswith(SCENE_PREFIX):
            try:
                trace.scene = json.loads(line[len(SCENE_PREFIX):])
            except json.JSONDecodeError as exc:
                raise MalformedTrace("invalid scene meta line", idx) from exc
            continue
        if line.startswith("#"):
            continue  # unknown meta lines are tolerated
        record = _parse_record(line, idx)
        if last_seq is not None and record.seq <= last_seq:
            raise MalformedTrace(
                f"seq {record.seq} not greater than previous {last_seq}", idx
            )
        if last_t is not None and record.t < last_t:
            raise MalformedTrace(f"t {record.t} decreases from {last_t}", idx)
        last_seq, last_t = record.seq, record.t
        trace.records.append(record)
    return trace


def load(path_or_file: str | IO[str]) -> Trace:
    if isinstance(path_or_file, str):
        with open(path_or_file, encoding="utf-8") as fh:
            return loads(fh.read())
    return loads(path_or_file.read())


class TraceRecorder:
    """Write-ahead recorder: assigns sequence numbers and keeps the log."""

    def __init__(self, scene: dict | None = None) -> None:
        self.trace = Trace(scene=scene)
        self._next_seq = 1
        self._last_t: float | None = None

    def append(self, t: float, kind: str, payload: dict) -> TraceRecord:
        if self._last_t is not None and t < self._last_t:
            # guard against caller clock bugs; the trace contract is monotone
            t = self._last_t
        record = TraceRecord(seq=self._next_seq, t=t, kind=kind, payload=payload)
        self._next_seq += 1
        self._last_t = t
        self.trace.records.append(record)
        return record
