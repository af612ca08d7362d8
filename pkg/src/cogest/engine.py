"""Session engine: one timestamp-ordered event loop over all engine stages.

Every input event (spoken utterance, skeleton frame, detection snapshot,
console pointing/halt) is appended to the session trace before it takes
effect, so replaying a trace reproduces the live command log byte for byte.
Simulated time only; the simulator ticks on its own grid, detection
snapshots are generated on their own cadence, and recognized transcripts
are delivered at their modeled recognition times.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable

from .config import HarnessConfig, scene_to_dict
from .fusion import (
    CommandKind,
    FusionEngine,
    FusionError,
    IntentEvent,
    PointingEvent,
    RobotCommand,
    SafetyTriggerEvent,
    SnapshotEvent,
)
from .gestures import SkeletonObservation, TriggerKind, ZoneDebouncer
from .grammar import ParseError, parse_phrase
from .sim import ObjectUnavailable, Phase, SimEvent, WorkcellSim
from .spatial import (
    Detection,
    DetectionClass,
    ObjectDetectionSnapshot,
    PointAtInfinity,
    TablePoint,
    map_to_table,
)
from .speech import SpeechChannel, UtteranceEvent
from .trace import INPUT_KINDS, Trace, TraceRecord, TraceRecorder

_PRIO_TICK = 0
_PRIO_SNAPSHOT = 1
_PRIO_TRANSCRIPT = 2


def detections_to_payload(snapshot: ObjectDetectionSnapshot) -> dict:
    return {
        "detections": [
            {
                "id": d.id,
                "class": d.object_class.value,
                "bbox": [round(v, 2) for v in d.bbox],
                "confidence": d.confidence,
            }
            for d in snapshot.detections
        ]
    }


def payload_to_snapshot(t: float, payload: dict) -> ObjectDetectionSnapshot:
    return ObjectDetectionSnapshot(
        timestamp=t,
        detections=tuple(
            Detection(
                id=d["id"],
                object_class=DetectionClass(d["class"]),
                bbox=tuple(float(v) for v in d["bbox"]),  # type: ignore[arg-type]
                confidence=float(d["confidence"]),
            )
            for d in payload["detections"]
        ),
    )


def command_to_payload(cmd: RobotCommand) -> dict:
    return {
        "command": cmd.kind.value,
        "object_id": cmd.object_id,
        "place_target": None
        if cmd.place_target is None
        else [cmd.place_target.x, cmd.place_target.y],
        "issued_at": cmd.issued_at,
        "provenance": dict(sorted(cmd.provenance.items())),
    }


@dataclass
class SessionMetrics:
    """Raw interaction measurements collected while a session runs."""

    commands: list[RobotCommand] = field(default_factory=list)
    speech_latencies: list[float] = field(default_factory=list)
    halt_responses: list[float] = field(default_factory=list)
    unresolved_references: int = 0
    stale_scenes: int = 0
    parse_errors: int = 0
    dropped_pointings: int = 0

    def counts_by_kind(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for cmd in self.commands:
            counts[cmd.kind.value] = counts.get(cmd.kind.value, 0) + 1
        return counts

    def speech_originated(self) -> int:
        return sum(1 for c in self.commands if "transcript" in c.provenance)

    def cospeech_groundings(self) -> int:
        return sum(1 for c in self.commands if "pointing" in c.provenance)


Listener = Callable[[str, dict], None]


class SessionEngine:
    """Owns one simulated collaboration session end to end."""

    def __init__(
        self,
        config: HarnessConfig | None = None,
        *,
        auto_detections: bool = True,
        record: bool = True,
    ) -> None:
        self.config = config or HarnessConfig()
        self.clock = 0.0
        self.sim = WorkcellSim(self.config.scene, self.config.sim)
        self.channel = SpeechChannel(self.config.speech)
        self.debouncer = ZoneDebouncer(self.config.zones, self.config.noise.min_confidence)
        self.fusion = FusionEngine(self.config.fusion)
        self.metrics = SessionMetrics()
        self.command_log: list[RobotCommand] = []
        self.auto_detections = auto_detections
        self.recorder = TraceRecorder(scene=scene_to_dict(self.config.scene)) if record else None
        self._listeners: list[Listener] = []
        self._heap: list[tuple[float, int, int, dict]] = []
        self._heap_count = 0
        self._next_snapshot_index = 1  # first auto snapshot at 1/detection_fps
        self._utt_seq_by_start: dict[float, int] = {}
        self._event_times: dict[int, float] = {}
        self._pending_halt_cause: float | None = None
        self._input_seq = 0  # replay-mode fallback ids

    # -- wiring -------------------------------------------------------------

    def add_listener(self, listener: Listener) -> None:
        self._listeners.append(listener)

    def _notify(self, kind: str, payload: dict) -> None:
        for listener in self._listeners:
            listener(kind, payload)

    def trace(self) -> Trace | None:
        return self.recorder.trace if self.recorder else None

    def _record(self, t: float, kind: str, payload: dict) -> int:
        """Append to the trace (write-ahead) and fan out to listeners."""
        if self.recorder is not None:
            rec = self.recorder.append(t, kind, payload)
            self._notify("record", {"seq": rec.seq, "t": rec.t, "kind": rec.kind, **rec.payload})
            return rec.seq
        self._input_seq += 1
        return self._input_seq

    def _error(self, code: str, detail: str, t: float) -> None:
        self._notify("error", {"code": code, "detail": detail, "t": t})

    # -- time ---------------------------------------------------------------

    def run_until(self, target: float) -> None:
        """Process ticks, snapshot cadence and transcript deliveries up to target."""
        tick = self.config.sim.tick
        fps = self.config.noise.detection_fps
        while True:
            candidates = [((self.sim.tick_index + 1) * tick, _PRIO_TICK)]
            if self.auto_detections:
                candidates.append((self._next_snapshot_index / fps, _PRIO_SNAPSHOT))
            if self._heap:
                candidates.append((self._heap[0][0], _PRIO_TRANSCRIPT))
            t_next, prio = min(candidates)
            if t_next > target:
                break
            self.clock = max(self.clock, t_next)
            if prio == _PRIO_TICK:
                self._do_tick()
            elif prio == _PRIO_SNAPSHOT:
                self._do_auto_snapshot(t_next)
            else:
                self._deliver_transcript()
        self.clock = max(self.clock, target)

    def run_to_completion(self, settle: float = 1.0, max_steps: int = 3000) -> None:
        """Advance until nothing is pending and the robot has drained its queue."""
        for _ in range(max_steps):
            pending = (
                bool(self._heap)
                or self.channel.has_held
                or self.fusion.pending_intent is not None
            )
            busy = self.sim.phase is not Phase.PAUSED and (
                self.sim.active is not None or bool(self.sim.queue)
            )
            if not pending and not busy:
                return
            self.run_until(self.clock + settle)

    def _do_tick(self) -> None:
        events = self.sim.tick()
        self._record_sim_events(events)
        now = self.sim.now
        for released in self.channel.poll(now):
            self._schedule_transcript(released)
        for err in self.fusion.advance_time(now):
            self._handle_fusion_error(err)

    def _do_auto_snapshot(self, sched_t: float) -> None:
        self._next_snapshot_index += 1
        noise = self.config.noise
        raw = self.sim.snapshot_detections(
            p_detect=noise.detection_p_detect,
            jitter_px=noise.detection_jitter_px,
            seed=noise.detection_seed,
        )
        payload = detections_to_payload(raw)
        seq = self._record(sched_t, "detection_snapshot", payload)
        snapshot = payload_to_snapshot(sched_t, payload)
        self._fusion_ingest(SnapshotEvent(snapshot=snapshot, event_id=seq))

    def _schedule_transcript(self, utterance: UtteranceEvent) -> None:
        transcript = self.channel.recognize(utterance)
        source_seq = self._utt_seq_by_start.get(utterance.speech_start)
        self._heap_count += 1
        heapq.heappush(
            self._heap,
            (
                transcript.recognized_at,
                _PRIO_TRANSCRIPT,
                self._heap_count,
                {"transcript": transcript, "seq": source_seq},
            ),
        )

    def _deliver_transcript(self) -> None:
        _, _, _, item = heapq.heappop(self._heap)
        transcript = item["transcript"]
        seq = item["seq"] if item["seq"] is not None else 0
        try:
            intent = parse_phrase(transcript.text, self.config.vocabulary)
        except ParseError as exc:
            self.metrics.parse_errors += 1
            self._error("parse_error", f"{transcript.text!r}: {exc}", transcript.recognized_at)
            return
        self._event_times[seq] = transcript.speech_end  # latency measured from speech end
        self._fusion_ingest(
            IntentEvent(intent=intent, timestamp=transcript.recognized_at, event_id=seq)
        )

    # -- input events ---------------------------------------------------------

    def submit_utterance(
        self, text: str, speech_start: float, speech_end: float | None = None
    ) -> None:
        speech_end = speech_start if speech_end is None else speech_end
        self.run_until(speech_start)
        payload = {"text": text, "speech_start": speech_start, "speech_end": speech_end}
        seq = self._record(speech_start, "utterance", payload)
        self._apply_utterance(payload, seq)

    def submit_skeleton(
        self,
        t: float,
        wrist_left: tuple[float, float] | None,
        wrist_right: tuple[float, float] | None,
        confidence_left: float = 1.0,
        confidence_right: float = 1.0,
    ) -> None:
        self.run_until(t)
        payload = {
            "wrist_left": list(wrist_left) if wrist_left else None,
            "wrist_right": list(wrist_right) if wrist_right else None,
            "confidence_left": confidence_left,
            "confidence_right": confidence_right,
        }
        seq = self._record(t, "skeleton", payload)
        self._apply_skeleton(t, payload, seq)

    def submit_pointing(self, t: float, x: float, y: float, wrist: str = "left") -> None:
        """Console path: a table-frame point that bypasses the homography."""
        self.run_until(t)
        payload = {"x": x, "y": y, "wrist": wrist}
        seq = self._record(t, "pointing", payload)
        self._apply_pointing(t, payload, seq)

    def submit_halt(self, t: float) -> None:
        self.run_until(t)
        seq = self._record(t, "halt", {})
        self._apply_safety(t, seq, resume=False)

    def submit_resume(self, t: float) -> None:
        self.run_until(t)
        seq = self._record(t, "resume", {})
        self._apply_safety(t, seq, resume=True)

    def feed_trace(self, trace: Trace) -> None:
        """Replay path: drive the session from recorded input events."""
        for rec in trace.records:
            if rec.kind not in INPUT_KINDS:
                continue
            self.run_until(rec.t)
            self._apply_input(rec)
        self.run_to_completion()

    def _apply_input(self, rec: TraceRecord) -> None:
        if rec.kind == "utterance":
            self._apply_utterance(rec.payload, rec.seq)
        elif rec.kind == "skeleton":
            self._apply_skeleton(rec.t, rec.payload, rec.seq)
        elif rec.kind == "detection_snapshot":
            snapshot = payload_to_snapshot(rec.t, rec.payload)
            self._fusion_ingest(SnapshotEvent(snapshot=snapshot, event_id=rec.seq))
        elif rec.kind == "pointing":
            self._apply_pointing(rec.t, rec.payload, rec.seq)
        elif rec.kind == "halt":
            self._apply_safety(rec.t, rec.seq, resume=False)
        elif rec.kind == "resume":
            self._apply_safety(rec.t, rec.seq, resume=True)

    def _apply_utterance(self, payload: dict, seq: int) -> None:
        event = UtteranceEvent(
            text=payload["text"],
            speech_start=float(payload["speech_start"]),
            speech_end=float(payload["speech_end"]),
        )
        self._utt_seq_by_start[event.speech_start] = seq
        for released in self.channel.push(event):
            self._schedule_transcript(released)

    def _apply_skeleton(self, t: float, payload: dict, seq: int) -> None:
        obs = SkeletonObservation(
            timestamp=t,
            wrist_left=tuple(payload["wrist_left"]) if payload["wrist_left"] else None,
            wrist_right=tuple(payload["wrist_right"]) if payload["wrist_right"] else None,
            confidence_left=float(payload.get("confidence_left", 1.0)),
            confidence_right=float(payload.get("confidence_right", 1.0)),
        )
        for trigger in self.debouncer.feed(obs):
            self._event_times[seq] = trigger.timestamp
            if trigger.kind is TriggerKind.POINTING_ARMED:
                try:
                    point = map_to_table(trigger.anchor, self.config.homography)
                except PointAtInfinity:
                    self.metrics.dropped_pointings += 1
                    self._error("pointing_unmappable", f"anchor {trigger.anchor}", t)
                    continue
                self._fusion_ingest(
                    PointingEvent(
                        point=point,
                        timestamp=trigger.timestamp,
                        event_id=seq,
                        wrist=trigger.wrist.value,
                    )
                )
            else:
                self._fusion_ingest(
                    SafetyTriggerEvent(
                        resume=trigger.kind is TriggerKind.CONTINUE,
                        timestamp=trigger.timestamp,
                        event_id=seq,
                    )
                )

    def _apply_pointing(self, t: float, payload: dict, seq: int) -> None:
        self._event_times[seq] = t
        self._fusion_ingest(
            PointingEvent(
                point=TablePoint(float(payload["x"]), float(payload["y"])),
                timestamp=t,
                event_id=seq,
                wrist=payload.get("wrist", "left"),
            )
        )

    def _apply_safety(self, t: float, seq: int, resume: bool) -> None:
        self._event_times[seq] = t
        self._fusion_ingest(SafetyTriggerEvent(resume=resume, timestamp=t, event_id=seq))

    # -- fusion and simulator coupling ----------------------------------------

    def _fusion_ingest(self, event) -> None:
        result = self.fusion.ingest(event)
        for err in result.errors:
            self._handle_fusion_error(err)
        for cmd in result.commands:
            self._issue(cmd)

    def _handle_fusion_error(self, err: FusionError) -> None:
        if err.kind == "unresolved_reference":
            self.metrics.unresolved_references += 1
        elif err.kind == "stale_scene":
            self.metrics.stale_scenes += 1
        self._error(err.kind, err.detail, err.timestamp)

    def _issue(self, cmd: RobotCommand) -> None:
        self.command_log.append(cmd)
        self.metrics.commands.append(cmd)
        if "transcript" in cmd.provenance:
            speech_end = self._event_times.get(cmd.provenance["transcript"])
            if speech_end is not None:
                self.metrics.speech_latencies.append(cmd.issued_at - speech_end)
        self._record(self.clock, "command", command_to_payload(cmd))
        if cmd.kind is CommandKind.HALT and "trigger" in cmd.provenance:
            self._pending_halt_cause = self._event_times.get(cmd.provenance["trigger"])
        try:
            events = self.sim.submit(cmd, now=self.clock)
        except ObjectUnavailable as exc:
            self._error("object_unavailable", str(exc), self.clock)
            return
        self._record_sim_events(events)

    def _record_sim_events(self, events: list[SimEvent]) -> None:
        for event in events:
            if (
                event.kind == "phase_changed"
                and event.data["to"] == Phase.PAUSED.value
                and self._pending_halt_cause is not None
            ):
                self.metrics.halt_responses.append(event.t - self._pending_halt_cause)
                self._pending_halt_cause = None
            self._record(event.t, "sim_event", {"event": event.kind, "data": event.data})

    # -- introspection ----------------------------------------------------------

    def state_snapshot(self) -> dict:
        """Full workcell state for stream subscribers joining mid-session."""
        sim = self.sim
        return {
            "clock": self.clock,
            "phase": sim.phase.value,
            "resume_phase": sim.resume_phase.value if sim.resume_phase else None,
            "gripper_object": sim.gripper_object(),
            "queue": [
                {"command": c.kind.value, "object_id": c.object_id} for c in sim.queue
            ],
            "active": None
            if sim.active is None
            else {"command": sim.active.kind.value, "object_id": sim.active.object_id},
            "objects": [
                {
                    "id": o.id,
                    "class": o.object_class.value,
                    "x": o.pose.x,
                    "y": o.pose.y,
                    "status": o.status.value,
                }
                for o in sorted(sim.scene.objects.values(), key=lambda o: o.id)
            ],
            "place_location": [sim.scene.place_location.x, sim.scene.place_location.y],
            "consumed_ids": sorted(self.fusion.consumed_ids),
            "zones": [
                {
                    "role": z.role.value,
                    "rect": list(z.rect),
                    "wrist": z.required_wrist.value,
                    "debounce_frames": z.debounce_frames,
                }
                for z in self.config.zones
            ],
        }
