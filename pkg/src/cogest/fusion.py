"""Multi-modal fusion: aligns command intents, gesture triggers and detections.

One logical event loop owns a FusionEngine and feeds it timestamp-ordered
events. Safety events (stop/continue, spoken or gestured) become commands in
the same call; deictic intents wait for a pointing event inside the pairing
window; list references (another/last) resolve against the latest detection
snapshot in detector order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .grammar import CommandIntent, Deixis, Verb
from .spatial import (
    DetectionClass,
    NoCandidate,
    ObjectDetectionSnapshot,
    TablePoint,
    nearest_object,
)


class UnresolvedReference(Exception):
    pass


class StaleScene(Exception):
    pass


@dataclass(frozen=True)
class FusionConfig:
    pairing_window: float = 2.0  # max |pointing time - intent time| for pairing
    gesture_precedence: bool = True  # pointing before the phrase is valid
    snapshot_staleness: float = 1.0  # max detection-snapshot age at grounding
    grounding_radius: float = 150.0  # top-down px, passed to nearest_object

    def __post_init__(self) -> None:
        for name in ("pairing_window", "snapshot_staleness", "grounding_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class CommandKind(Enum):
    PICK_PLACE = "pick_place"
    HANDOVER = "handover"
    GO_HOME = "go_home"
    HALT = "halt"
    RESUME = "resume"


@dataclass(frozen=True)
class RobotCommand:
    kind: CommandKind
    issued_at: float
    object_id: int | None = None
    place_target: TablePoint | None = None  # None means the configured place location
    provenance: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.provenance:
            raise ValueError("command provenance must be non-empty")
        if self.kind in (CommandKind.HALT, CommandKind.RESUME, CommandKind.GO_HOME):
            if self.object_id is not None:
                raise ValueError(f"{self.kind.value} carries no object")
        elif self.object_id is None:
            raise ValueError(f"{self.kind.value} requires an object id")


# --- engine input events -----------------------------------------------------

@dataclass(frozen=True)
class IntentEvent:
    intent: CommandIntent
    timestamp: float  # recognition time of the transcript
    event_id: int


@dataclass(frozen=True)
class SafetyTriggerEvent:
    """Stop/continue from a trigger zone or a console button."""

    resume: bool  # False = stop
    timestamp: float
    event_id: int


@dataclass(frozen=True)
class PointingEvent:
    """A debounced pointing gesture already mapped to the table frame."""

    point: TablePoint
    timestamp: float
    event_id: int
    wrist: str = "left"


@dataclass(frozen=True)
class SnapshotEvent:
    snapshot: ObjectDetectionSnapshot
    event_id: int


FusionInput = IntentEvent | SafetyTriggerEvent | PointingEvent | SnapshotEvent


@dataclass(frozen=True)
class FusionError:
    kind: str  # unresolved_reference | stale_scene
    detail: str
    timestamp: float
    event_id: int | None = None


@dataclass
class FusionResult:
    commands: list[RobotCommand] = field(default_factory=list)
    errors: list[FusionError] = field(default_factory=list)


def pair(intent_time: float, pointing_time: float, config: FusionConfig) -> bool:
    """True iff the pointing and the intent form a co-speech pair."""
    if abs(pointing_time - intent_time) > config.pairing_window:
        return False
    if pointing_time <= intent_time and not config.gesture_precedence:
        return False
    return True


_CLASS_OF = {None: None}
for _cls in DetectionClass:
    _CLASS_OF[_cls.value] = _cls


def _class_filter(intent: CommandIntent) -> DetectionClass | None:
    if intent.object_class is None:
        return None
    return _CLASS_OF[intent.object_class.value]


def resolve_deixis(
    intent: CommandIntent,
    pointing: PointingEvent | None,
    snapshot: ObjectDetectionSnapshot,
    consumed: set[int],
    config: FusionConfig | None = None,
) -> int:
    """Ground an object-seeking intent to a detection id.

    this/that need a pointing event and select by proximity (a consumed id
    may be re-referenced — the human explicitly pointed); another picks the
    first unconsumed detection of the class in detector order, last picks
    the final one; a bare class behaves like another.
    """
    config = config or FusionConfig()
    if not intent.requires_object():
        raise ValueError(f"{intent.verb.value} does not reference an object")

    if intent.requires_pointing():
        if pointing is None:
            raise UnresolvedReference(f"{intent.deixis.value} requires a pointing gesture")
        return nearest_object(
            pointing.point,
            snapshot,
            class_filter=_class_filter(intent),
            max_radius=config.grounding_radius,
        )

    cls = _class_filter(intent)
    candidates = [
        d
        for d in snapshot.detections
        if (cls is None or d.object_class is cls) and d.id not in consumed
    ]
    if not candidates:
        raise NoCandidate(
            f"no unconsumed {cls.value if cls else 'object'} in the scene"
        )
    chosen = candidates[-1] if intent.deixis is Deixis.LAST else candidates[0]
    return chosen.id


class FusionEngine:
    """Serialized multi-modal event loop state.

    Call ``ingest`` with events in nondecreasing timestamp order; each call
    may emit commands and error records. Owned by a single feeder.
    """

    def __init__(self, config: FusionConfig | None = None) -> None:
        self.config = config or FusionConfig()
        self.now = 0.0
        self.pending_intent: IntentEvent | None = None
        self.armed_pointing: PointingEvent | None = None
        self.last_snapshot: ObjectDetectionSnapshot | None = None
        self.last_snapshot_event_id: int | None = None
        self.consumed_ids: set[int] = set()
        self._auto_id = 0

    def _next_id(self) -> int:
        self._auto_id -= 1
        return self._auto_id  # negative: never collides with caller-side seqs

    def advance_time(self, now: float) -> list[FusionError]:
        """Move the clock forward, expiring stale pending state."""
        errors: list[FusionError] = []
        if now > self.now:
            self.now = now
        if (
            self.pending_intent is not None
            and self.now > self.pending_intent.timestamp + self.config.pairing_window
        ):
            expired = self.pending_intent
            self.pending_intent = None
            errors.append(
                FusionError(
                    kind="unresolved_reference",
                    detail=(
                        f"no pointing within {self.config.pairing_window}s of "
                        f"'{expired.intent.verb.value} {expired.intent.deixis.value}'"
                    ),
                    timestamp=self.now,
                    event_id=expired.event_id,
                )
            )
        if (
            self.armed_pointing is not None
            and self.now > self.armed_pointing.timestamp + self.config.pairing_window
        ):
            self.armed_pointing = None  # pointing alone commands nothing
        return errors

    def ingest(self, event: FusionInput) -> FusionResult:
        result = FusionResult()
        timestamp = getattr(event, "timestamp", None)
        if timestamp is None:
            timestamp = event.snapshot.timestamp  # type: ignore[union-attr]
        result.errors.extend(self.advance_time(timestamp))

        if isinstance(event, SnapshotEvent):
            self.last_snapshot = event.snapshot
            self.last_snapshot_event_id = event.event_id
        elif isinstance(event, SafetyTriggerEvent):
            kind = CommandKind.RESUME if event.resume else CommandKind.HALT
            result.commands.append(
                RobotCommand(
                    kind=kind,
                    issued_at=self.now,
                    provenance={"trigger": event.event_id},
                )
            )
        elif isinstance(event, PointingEvent):
            self._ingest_pointing(event, result)
        elif isinstance(event, IntentEvent):
            self._ingest_intent(event, result)
        else:  # pragma: no cover - exhaustive dispatch
            raise TypeError(f"unknown fusion input {event!r}")
        return result

    # -- internals ------------------------------------------------------------

    def _ingest_pointing(self, event: PointingEvent, result: FusionResult) -> None:
        pending = self.pending_intent
        if pending is not None and pair(pending.timestamp, event.timestamp, self.config):
            self.pending_intent = None
            self._ground(pending, event, result)
        else:
            self.armed_pointing = event

    def _ingest_intent(self, event: IntentEvent, result: FusionResult) -> None:
        intent = event.intent
        if intent.verb in (Verb.STOP, Verb.PAUSE):
            result.commands.append(
                RobotCommand(
                    kind=CommandKind.HALT,
                    issued_at=self.now,
                    provenance={"transcript": event.event_id},
                )
            )
            return
        if intent.verb is Verb.CONTINUE:
            result.commands.append(
                RobotCommand(
                    kind=CommandKind.RESUME,
                    issued_at=self.now,
                    provenance={"transcript": event.event_id},
                )
            )
            return
        if intent.verb is Verb.GO_HOME:
            result.commands.append(
                RobotCommand(
                    kind=CommandKind.GO_HOME,
                    issued_at=self.now,
                    provenance={"transcript": event.event_id},
                )
            )
            return

        if intent.requires_pointing():
            armed = self.armed_pointing
            if armed is not None and pair(event.timestamp, armed.timestamp, self.config):
                self.armed_pointing = None  # cleared once paired
                self._ground(event, armed, result)
            else:
                # wait for a pointing gesture; a newer intent replaces an
                # older pending one (the human changed their mind)
                self.pending_intent = event
        else:
            self._ground(event, None, result)

    def _ground(
        self, intent_event: IntentEvent, pointing: PointingEvent | None, result: FusionResult
    ) -> None:
        intent = intent_event.intent
        snapshot = self.last_snapshot
        if snapshot is None or self.now - snapshot.timestamp > self.config.snapshot_staleness:
            age = "none" if snapshot is None else f"{self.now - snapshot.timestamp:.2f}s old"
            result.errors.append(
                FusionError(
                    kind="stale_scene",
                    detail=f"detection snapshot unusable at grounding time ({age})",
                    timestamp=self.now,
                    event_id=intent_event.event_id,
                )
            )
            return
        try:
            object_id = resolve_deixis(intent, pointing, snapshot, self.consumed_ids, self.config)
        except (UnresolvedReference, NoCandidate) as exc:
            result.errors.append(
                FusionError(
                    kind="unresolved_reference",
                    detail=str(exc),
                    timestamp=self.now,
                    event_id=intent_event.event_id,
                )
            )
            return

        provenance = {"transcript": intent_event.event_id}
        if pointing is not None:
            provenance["pointing"] = pointing.event_id
        if self.last_snapshot_event_id is not None:
            provenance["snapshot"] = self.last_snapshot_event_id

        kind = CommandKind.HANDOVER if intent.verb is Verb.GIVE else CommandKind.PICK_PLACE
        self.consumed_ids.add(object_id)
        result.commands.append(
            RobotCommand(
                kind=kind,
                issued_at=self.now,
                object_id=object_id,
                provenance=provenance,
            )
        )
