"""Deterministic discrete-time workcell simulation.

Robot motion is modeled as fixed-duration legs on an integer tick grid, so
pause/resume arithmetic is exact: freezing the robot for k ticks shifts every
later completion by exactly k ticks. The simulator owns the scene and is
advanced only by its caller's clock.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum

from .fusion import CommandKind, RobotCommand
from .spatial import Detection, DetectionClass, ObjectDetectionSnapshot, TablePoint


class ObjectUnavailable(Exception):
    pass


class Phase(Enum):
    IDLE = "idle"
    MOVING_TO_OBJECT = "moving_to_object"
    GRASPING = "grasping"
    MOVING_TO_PLACE = "moving_to_place"
    RELEASING = "releasing"
    MOVING_TO_HANDOVER = "moving_to_handover"
    AWAITING_HUMAN_TAKE = "awaiting_human_take"
    MOVING_HOME = "moving_home"
    PAUSED = "paused"


# Gripper actions are atomic: a halt during one engages after it completes.
_GRIPPER_PHASES = frozenset({Phase.GRASPING, Phase.RELEASING})


class ObjectStatus(Enum):
    ON_TABLE = "on_table"
    IN_GRIPPER = "in_gripper"
    PLACED = "placed"
    WITH_HUMAN = "with_human"


@dataclass
class SceneObject:
    id: int
    object_class: DetectionClass
    pose: TablePoint
    status: ObjectStatus = ObjectStatus.ON_TABLE


@dataclass
class SceneState:
    objects: dict[int, SceneObject]
    place_location: TablePoint
    home_pose: str = "home"
    handover_pose: str = "handover"


@dataclass(frozen=True)
class SimConfig:
    tick: float = 1.0 / 24.0
    move_duration: float = 3.0  # seconds per motion leg
    grasp_duration: float = 1.0
    release_duration: float = 1.0
    human_take_delay: float = 2.0

    def __post_init__(self) -> None:
        for name in (
            "tick",
            "move_duration",
            "grasp_duration",
            "release_duration",
            "human_take_delay",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def ticks(self, duration: float) -> int:
        return max(1, int(round(duration / self.tick)))


@dataclass(frozen=True)
class SimEvent:
    kind: str  # phase_changed | object_moved | command_started | command_completed | warning
    t: float
    data: dict

    def __repr__(self) -> str:
        return f"SimEvent({self.kind}, t={self.t:.3f}, {self.data})"


# Per-class bounding-box half extents in top-down pixels.
_BBOX_HALF = {
    DetectionClass.ROD: (30.0, 8.0),
    DetectionClass.ROCKER_ARM: (22.0, 18.0),
}


class WorkcellSim:
    """Robot state machine, gripper and table scene on a fixed tick grid."""

    def __init__(self, scene: SceneState, config: SimConfig | None = None) -> None:
        self.config = config or SimConfig()
        self.scene = scene
        self.phase = Phase.IDLE
        self.resume_phase: Phase | None = None
        self.queue: list[RobotCommand] = []
        self.active: RobotCommand | None = None
        self.tick_index = 0
        self._legs: list[tuple[Phase, int]] = []
        self._leg_pos = 0
        self._leg_elapsed = 0
        self._halt_pending = False
        self._ext_time: float | None = None

    @property
    def now(self) -> float:
        return self.tick_index * self.config.tick

    def _event_t(self) -> float:
        # submit-path events carry the caller's clock, tick-path events the grid
        return self._ext_time if self._ext_time is not None else self.now

    def gripper_object(self) -> int | None:
        for obj in self.scene.objects.values():
            if obj.status is ObjectStatus.IN_GRIPPER:
                return obj.id
        return None

    # -- command intake ---------------------------------------------------

    def submit(self, cmd: RobotCommand, now: float | None = None) -> list[SimEvent]:
        """Queue a grounded command; halt/resume act immediately instead."""
        self._ext_time = now
        try:
            if cmd.kind is CommandKind.HALT:
                return self._halt()
            if cmd.kind is CommandKind.RESUME:
                return self._resume()
            if cmd.kind in (CommandKind.PICK_PLACE, CommandKind.HANDOVER):
                target = self.scene.objects.get(cmd.object_id)
                if target is None:
                    raise ObjectUnavailable(f"object {cmd.object_id} does not exist")
                if target.status is not ObjectStatus.ON_TABLE:
                    raise ObjectUnavailable(
                        f"object {cmd.object_id} is {target.status.value}, not on the table"
                    )
            self.queue.append(cmd)
            return []
        finally:
            self._ext_time = None

    def _halt(self) -> list[SimEvent]:
        if self.phase is Phase.PAUSED:
            return [self._warning("already paused, halt ignored")]
        if self.phase in _GRIPPER_PHASES:
            self._halt_pending = True
            return []
        return [self._enter_pause(self.phase)]

    def _resume(self) -> list[SimEvent]:
        if self._halt_pending:
            self._halt_pending = False  # halt never engaged; cancel it
            return []
        if self.phase is not Phase.PAUSED:
            return [self._warning("not paused, resume ignored")]
        restored = self.resume_phase
        assert restored is not None
        self.resume_phase = None
        return [self._change_phase(restored)]

    def _enter_pause(self, resumable: Phase) -> SimEvent:
        self.resume_phase = resumable
        return self._change_phase(Phase.PAUSED)

    # -- time -------------------------------------------------------------

    def tick(self) -> list[SimEvent]:
        """Advance one tick; fire leg transitions whose timers elapsed."""
        self.tick_index += 1
        events: list[SimEvent] = []
        self._assert_invariants()

        if self.phase is Phase.PAUSED:
            return events  # timers frozen

        if self.phase is Phase.IDLE:
            if self.queue:
                events.extend(self._start_next())
            return events

        self._leg_elapsed += 1
        leg_phase, leg_ticks = self._legs[self._leg_pos]
        assert leg_phase is self.phase
        if self._leg_elapsed >= leg_ticks:
            events.extend(self._complete_leg())
        return events

    def _start_next(self) -> list[SimEvent]:
        cmd = self.queue.pop(0)
        target = self.scene.objects.get(cmd.object_id) if cmd.object_id is not None else None
        if cmd.kind in (CommandKind.PICK_PLACE, CommandKind.HANDOVER):
            if target is None or target.status is not ObjectStatus.ON_TABLE:
                return [
                    self._warning(
                        f"skipping {cmd.kind.value}: object {cmd.object_id} left the table"
                    )
                ]
        cfg = self.config
        if cmd.kind is CommandKind.PICK_PLACE:
            self._legs = [
                (Phase.MOVING_TO_OBJECT, cfg.ticks(cfg.move_duration)),
                (Phase.GRASPING, cfg.ticks(cfg.grasp_duration)),
                (Phase.MOVING_TO_PLACE, cfg.ticks(cfg.move_duration)),
                (Phase.RELEASING, cfg.ticks(cfg.release_duration)),
            ]
        elif cmd.kind is CommandKind.HANDOVER:
            self._legs = [
                (Phase.MOVING_TO_OBJECT, cfg.ticks(cfg.move_duration)),
                (Phase.GRASPING, cfg.ticks(cfg.grasp_duration)),
                (Phase.MOVING_TO_HANDOVER, cfg.ticks(cfg.move_duration)),
                (Phase.AWAITING_HUMAN_TAKE, cfg.ticks(cfg.human_take_delay)),
            ]
        else:  # GO_HOME
            self._legs = [(Phase.MOVING_HOME, cfg.ticks(cfg.move_duration))]
        self.active = cmd
        self._leg_pos = 0
        self._leg_elapsed = 0
        events = [
            SimEvent(
                "command_started",
                self.now,
                {"command": cmd.kind.value, "object_id": cmd.object_id},
            ),
            self._change_phase(self._legs[0][0]),
        ]
        return events

    def _complete_leg(self) -> list[SimEvent]:
        events: list[SimEvent] = []
        cmd = self.active
        assert cmd is not None
        finished = self._legs[self._leg_pos][0]

        if finished is Phase.GRASPING:
            events.append(self._move_object(cmd.object_id, ObjectStatus.IN_GRIPPER, None))
        elif finished is Phase.RELEASING:
            place = cmd.place_target or self.scene.place_location
            events.append(self._move_object(cmd.object_id, ObjectStatus.PLACED, place))
        elif finished is Phase.AWAITING_HUMAN_TAKE:
            events.append(self._move_object(cmd.object_id, ObjectStatus.WITH_HUMAN, None))

        self._leg_pos += 1
        self._leg_elapsed = 0
        if self._leg_pos >= len(self._legs):
            self.active = None
            self._legs = []
            self._leg_pos = 0
            events.append(
                SimEvent(
                    "command_completed",
                    self.now,
                    {"command": cmd.kind.value, "object_id": cmd.object_id},
                )
            )
            next_phase = Phase.IDLE
        else:
            next_phase = self._legs[self._leg_pos][0]

        if self._halt_pending:
            self._halt_pending = False
            events.append(self._enter_pause(next_phase))
        else:
            events.append(self._change_phase(next_phase))
        self._assert_invariants()
        return events

    # -- perception -------------------------------------------------------

    def snapshot_detections(
        self, p_detect: float = 1.0, jitter_px: float = 0.0, seed: int = 0
    ) -> ObjectDetectionSnapshot:
        """Noisy detector view of the on-table objects, ordered by id.

        Deterministic for a given (seed, tick_index) pair; safe to call
        between ticks.
        """
        if not 0.0 <= p_detect <= 1.0:
            raise ValueError("p_detect must be in [0, 1]")
        rng = random.Random(seed * 1_000_003 + self.tick_index)
        detections = []
        for obj_id in sorted(self.scene.objects):
            obj = self.scene.objects[obj_id]
            if obj.status is not ObjectStatus.ON_TABLE:
                continue
            if rng.random() >= p_detect:
                continue
            cx = obj.pose.x + rng.uniform(-jitter_px, jitter_px)
            cy = obj.pose.y + rng.uniform(-jitter_px, jitter_px)
            hx, hy = _BBOX_HALF[obj.object_class]
            detections.append(
                Detection(
                    id=obj.id,
                    object_class=obj.object_class,
                    bbox=(cx - hx, cy - hy, cx + hx, cy + hy),
                    confidence=round(rng.uniform(0.9, 1.0), 4),
                )
            )
        return ObjectDetectionSnapshot(timestamp=self.now, detections=tuple(detections))

    # -- helpers ------------------------------------------------------------

    def _change_phase(self, new: Phase) -> SimEvent:
        old = self.phase
        self.phase = new
        return SimEvent(
            "phase_changed",
            self._event_t(),
            {
                "from": old.value,
                "to": new.value,
                "resume_phase": self.resume_phase.value if self.resume_phase else None,
            },
        )

    def _move_object(
        self, object_id: int | None, status: ObjectStatus, pose: TablePoint | None
    ) -> SimEvent:
        assert object_id is not None
        obj = self.scene.objects[object_id]
        obj.status = status
        if pose is not None:
            obj.pose = pose
        return SimEvent(
            "object_moved",
            self.now,
            {
                "object_id": object_id,
                "status": status.value,
                "pose": [obj.pose.x, obj.pose.y],
            },
        )

    def _warning(self, message: str) -> SimEvent:
        return SimEvent("warning", self._event_t(), {"message": message})

    def _assert_invariants(self) -> None:
        in_gripper = [o.id for o in self.scene.objects.values() if o.status is ObjectStatus.IN_GRIPPER]
        if len(in_gripper) > 1:
            raise AssertionError(f"gripper exclusivity violated: {in_gripper}")
        if (self.phase is Phase.PAUSED) != (self.resume_phase is not None):
            raise AssertionError("paused phase must store exactly one resumable phase")


def make_scene(
    objects: list[tuple[int, DetectionClass, float, float]],
    place_location: tuple[float, float] = (640.0, 600.0),
) -> SceneState:
    return SceneState(
        objects={
            oid: SceneObject(oid, cls, TablePoint(x, y)) for oid, cls, x, y in objects
        },
        place_location=TablePoint(*place_location),
    )
