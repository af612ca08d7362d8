"""Wrist trigger zones: frame classification, debouncing and reliability.

A wrist keypoint held inside a configured image rectangle for N consecutive
frames fires a discrete trigger (stop, continue, or arming a pointing
gesture). Detection flicker is absorbed by the consecutive-run debounce.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ZoneRole(Enum):
    STOP = "stop"
    CONTINUE = "continue"
    POINT_LEFT = "point_left"
    POINT_RIGHT = "point_right"


class Wrist(Enum):
    LEFT = "left"
    RIGHT = "right"


class WristRequirement(Enum):
    LEFT = "left"
    RIGHT = "right"
    EITHER = "either"


class TriggerKind(Enum):
    STOP = "stop"
    CONTINUE = "continue"
    POINTING_ARMED = "pointing_armed"


_ROLE_TO_KIND = {
    ZoneRole.STOP: TriggerKind.STOP,
    ZoneRole.CONTINUE: TriggerKind.CONTINUE,
    ZoneRole.POINT_LEFT: TriggerKind.POINTING_ARMED,
    ZoneRole.POINT_RIGHT: TriggerKind.POINTING_ARMED,
}


class InvalidParams(Exception):
    pass


@dataclass(frozen=True)
class SkeletonObservation:
    timestamp: float
    wrist_left: tuple[float, float] | None = None
    wrist_right: tuple[float, float] | None = None
    confidence_left: float = 1.0
    confidence_right: float = 1.0


@dataclass(frozen=True)
class TriggerZone:
    role: ZoneRole
    rect: tuple[float, float, float, float]  # x0, y0, x1, y1 (inclusive)
    required_wrist: WristRequirement
    debounce_frames: int = 5

    def __post_init__(self) -> None:
        x0, y0, x1, y1 = self.rect
        if x1 <= x0 or y1 <= y0:
            raise ValueError(f"degenerate zone rect {self.rect}")
        if self.debounce_frames < 1:
            raise ValueError("debounce_frames must be >= 1")

    def contains(self, point: tuple[float, float]) -> bool:
        x0, y0, x1, y1 = self.rect
        return x0 <= point[0] <= x1 and y0 <= point[1] <= y1

    def accepts(self, wrist: Wrist) -> bool:
        return self.required_wrist is WristRequirement.EITHER or self.required_wrist.value == wrist.value


@dataclass(frozen=True)
class GestureTrigger:
    kind: TriggerKind
    wrist: Wrist
    timestamp: float
    anchor: tuple[float, float]
    zone: ZoneRole


def _rects_overlap(a: tuple, b: tuple) -> bool:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    return ax0 <= bx1 and bx0 <= ax1 and ay0 <= by1 and by0 <= ay1


def validate_zones(zones: list[TriggerZone]) -> None:
    """Enforce the zone-set invariants: disjoint rects, fixed wrist sides."""
    roles = [z.role for z in zones]
    if len(set(roles)) != len(roles):
        raise ValueError("duplicate zone roles")
    for i, a in enumerate(zones):
        for b in zones[i + 1 :]:
            if _rects_overlap(a.rect, b.rect):
                raise ValueError(f"zones {a.role} and {b.role} overlap")
    for zone in zones:
        if zone.role is ZoneRole.STOP and zone.required_wrist is not WristRequirement.LEFT:
            raise ValueError("stop zone must require the left wrist")
        if zone.role is ZoneRole.CONTINUE and zone.required_wrist is not WristRequirement.RIGHT:
            raise ValueError("continue zone must require the right wrist")
        if zone.role in (ZoneRole.POINT_LEFT, ZoneRole.POINT_RIGHT):
            if zone.required_wrist is not WristRequirement.EITHER:
                raise ValueError("pointing zones accept either wrist")


def default_zones(
    width: int = 1920, height: int = 1080, debounce_frames: int = 5
) -> list[TriggerZone]:
    """Four corner squares inset 5% from the borders, side min(W,H)/4."""
    side = min(width, height) / 4.0
    mx, my = 0.05 * width, 0.05 * height
    corners = {
        ZoneRole.STOP: (mx, my),
        ZoneRole.CONTINUE: (width - mx - side, my),
        ZoneRole.POINT_LEFT: (mx, height - my - side),
        ZoneRole.POINT_RIGHT: (width - mx - side, height - my - side),
    }
    requirement = {
        ZoneRole.STOP: WristRequirement.LEFT,
        ZoneRole.CONTINUE: WristRequirement.RIGHT,
        ZoneRole.POINT_LEFT: WristRequirement.EITHER,
        ZoneRole.POINT_RIGHT: WristRequirement.EITHER,
    }
    zones = [
        TriggerZone(
            role=role,
            rect=(x0, y0, x0 + side, y0 + side),
            required_wrist=requirement[role],
            debounce_frames=debounce_frames,
        )
        for role, (x0, y0) in corners.items()
    ]
    validate_zones(zones)
    return zones


def classify(
    obs: SkeletonObservation,
    zones: list[TriggerZone],
    min_confidence: float = 0.3,
) -> set[tuple[ZoneRole, Wrist]]:
    """Zone hits for one frame: wrist inside rect (edges inclusive), side allowed.

    Keypoints below ``min_confidence`` count as absent.
    """
    wrists = []
    if obs.wrist_left is not None and obs.confidence_left >= min_confidence:
        wrists.append((Wrist.LEFT, obs.wrist_left))
    if obs.wrist_right is not None and obs.confidence_right >= min_confidence:
        wrists.append((Wrist.RIGHT, obs.wrist_right))

    hits: set[tuple[ZoneRole, Wrist]] = set()
    for zone in zones:
        for wrist, point in wrists:
            if zone.accepts(wrist) and zone.contains(point):
                hits.add((zone.role, wrist))
    return hits


@dataclass
class _RunState:
    hits: int = 0
    misses: int = 0
    fired: bool = False


class ZoneDebouncer:
    """Per-(zone, wrist) hysteresis debouncer over a frame-ordered feed.

    A trigger fires on the Nth consecutive frame with a hit. Re-arming is
    symmetric: the wrist must *leave* the zone for N consecutive frames
    before a fresh run of N hits can fire again, so single-frame detector
    flicker neither fires a trigger nor lets a sustained gesture re-fire.
    """

    def __init__(self, zones: list[TriggerZone], min_confidence: float = 0.3) -> None:
        validate_zones(zones)
        self.zones = zones
        self.min_confidence = min_confidence
        self._runs: dict[tuple[ZoneRole, Wrist], _RunState] = {}
        self._anchors: dict[tuple[ZoneRole, Wrist], tuple[float, float]] = {}

    def feed(self, obs: SkeletonObservation) -> list[GestureTrigger]:
        hits = classify(obs, self.zones, self.min_confidence)
        for zone, wrist in hits:
            point = obs.wrist_left if wrist is Wrist.LEFT else obs.wrist_right
            self._anchors[(zone, wrist)] = point  # type: ignore[assignment]

        triggers: list[GestureTrigger] = []
        zone_by_role = {z.role: z for z in self.zones}
        channels = set(self._runs) | hits
        for channel in channels:
            state = self._runs.setdefault(channel, _RunState())
            n = zone_by_role[channel[0]].debounce_frames
            if channel in hits:
                state.hits += 1
                state.misses = 0
                if state.hits >= n and not state.fired:
                    state.fired = True
                    triggers.append(
                        GestureTrigger(
                            kind=_ROLE_TO_KIND[channel[0]],
                            wrist=channel[1],
                            timestamp=obs.timestamp,
                            anchor=self._anchors[channel],
                            zone=channel[0],
                        )
                    )
            else:
                state.misses += 1
                state.hits = 0
                if state.misses >= n:
                    state.fired = False  # the wrist has genuinely left the zone
        triggers.sort(key=lambda t: (t.zone.value, t.wrist.value))
        return triggers


def trigger_reliability(
    p_frame: float,
    debounce_frames: int,
    horizon: int,
    trials: int = 100_000,
    seed: int = 0,
) -> float:
    """Monte-Carlo estimate of P(trigger fires within ``horizon`` frames).

    Each frame is an independent in-zone detection with probability
    ``p_frame``; a trigger needs ``debounce_frames`` consecutive hits.
    The full horizon is always sampled so identical seeds give coupled
    randomness across different ``p_frame`` values.
    """
    if not 0.0 <= p_frame <= 1.0:
        raise InvalidParams(f"p_frame {p_frame} outside [0, 1]")
    if debounce_frames < 1:
        raise InvalidParams("debounce_frames must be >= 1")
    if horizon < debounce_frames:
        raise InvalidParams("horizon must be >= debounce_frames")
    if trials < 1:
        raise InvalidParams("trials must be >= 1")

    rng = np.random.default_rng(seed)
    fired = 0
    chunk = 20_000  # bound memory at ~chunk*horizon doubles
    remaining = trials
    while remaining > 0:
        n = min(chunk, remaining)
        remaining -= n
        hits = rng.random((n, horizon)) < p_frame
        runs = np.cumsum(hits, axis=1)
        # window sum of width N via cumulative differences
        window = runs[:, debounce_frames - 1 :].copy()
        window[:, 1:] -= runs[:, : horizon - debounce_frames]
        fired += int(np.count_nonzero((window == debounce_frames).any(axis=1)))
    return fired / trials
