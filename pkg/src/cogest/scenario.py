"""Scenario scripts: a human's scripted actions rendered into perception events.

A scenario names an initial scene, a time-ordered script of human actions
(say a phrase, move a wrist into a trigger zone, point at an object) and the
ordered command kinds the session is expected to produce. Generation runs a
full closed-loop session: skeleton frames are synthesized at the front-camera
rate with dropout and jitter, detection snapshots come from the live
simulator state, and the resulting trace is a faithful recording.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field, replace

import yaml

from .config import HarnessConfig, scene_from_dict, scene_to_dict
from .engine import SessionEngine
from .gestures import ZoneRole
from .sim import SceneState
from .spatial import map_to_table
from .trace import Trace


class InvalidSpec(Exception):
    pass


# Seconds of speech per word, plus a fixed onset.
_WORD_SECONDS = 0.38
_ONSET_SECONDS = 0.25

_ZONE_ALIASES = {
    "stop": ZoneRole.STOP,
    "continue": ZoneRole.CONTINUE,
    "point_left": ZoneRole.POINT_LEFT,
    "point_right": ZoneRole.POINT_RIGHT,
}


@dataclass(frozen=True)
class SayAction:
    at: float
    text: str

    @property
    def end(self) -> float:
        return self.at + _ONSET_SECONDS + _WORD_SECONDS * len(self.text.split())


@dataclass(frozen=True)
class WristAction:
    """Hold a wrist inside a trigger zone for a while."""

    at: float
    zone: ZoneRole
    hold: float
    wrist: str  # left | right

    @property
    def end(self) -> float:
        return self.at + self.hold


@dataclass(frozen=True)
class PointAction:
    """Point at a scene object: the wrist goes where the homography puts it."""

    at: float
    object_id: int
    hold: float
    wrist: str

    @property
    def end(self) -> float:
        return self.at + self.hold


Action = SayAction | WristAction | PointAction


@dataclass
class ScenarioSpec:
    name: str
    scene: SceneState
    script: list[Action]
    expectations: list[str] = field(default_factory=list)

    def duration(self) -> float:
        return max((a.end for a in self.script), default=0.0)


def load_scenario(path: str) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> ScenarioSpec:
    try:
        scene = scene_from_dict(raw["scene"])
        script: list[Action] = []
        for item in raw["script"]:
            at = float(item["at"])
            if "say" in item:
                script.append(SayAction(at=at, text=str(item["say"])))
            elif "zone" in item:
                zone = _ZONE_ALIASES.get(item["zone"])
                if zone is None:
                    raise InvalidSpec(f"unknown zone {item['zone']!r}")
                script.append(
                    WristAction(
                        at=at,
                        zone=zone,
                        hold=float(item.get("hold", 1.0)),
                        wrist=str(item.get("wrist", "left")),
                    )
                )
            elif "point_at" in item:
                script.append(
                    PointAction(
                        at=at,
                        object_id=int(item["point_at"]),
                        hold=float(item.get("hold", 1.5)),
                        wrist=str(item.get("wrist", "left")),
                    )
                )
            else:
                raise InvalidSpec(f"unrecognized script action {item!r}")
        expectations = [str(k) for k in raw.get("expectations", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"bad scenario spec: {exc}") from exc

    spec = ScenarioSpec(
        name=str(raw.get("name", "scenario")),
        scene=scene,
        script=sorted(script, key=lambda a: a.at),
        expectations=expectations,
    )
    _validate(spec)
    return spec


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    script: list[dict] = []
    for action in spec.script:
        if isinstance(action, SayAction):
            script.append({"at": action.at, "say": action.text})
        elif isinstance(action, WristAction):
            script.append(
                {
                    "at": action.at,
                    "wrist": action.wrist,
                    "zone": action.zone.value,
                    "hold": action.hold,
                }
            )
        else:
            script.append(
                {
                    "at": action.at,
                    "point_at": action.object_id,
                    "hold": action.hold,
                    "wrist": action.wrist,
                }
            )
    return {
        "name": spec.name,
        "scene": scene_to_dict(spec.scene),
        "script": script,
        "expectations": list(spec.expectations),
    }


def _validate(spec: ScenarioSpec) -> None:
    for action in spec.script:
        if isinstance(action, PointAction) and action.object_id not in spec.scene.objects:
            raise InvalidSpec(f"point_at references unknown object {action.object_id}")
        if isinstance(action, (WristAction, PointAction)) and action.wrist not in ("left", "right"):
            raise InvalidSpec(f"wrist must be left or right, got {action.wrist!r}")
        if action.at < 0:
            raise InvalidSpec("actions cannot start before t=0")
    says = [a for a in spec.script if isinstance(a, SayAction)]
    for a, b in zip(says, says[1:]):
        if b.at < a.end:
            raise InvalidSpec(f"overlapping utterances at t={a.at} and t={b.at}")
    # one wrist cannot be in two places at once
    for side in ("left", "right"):
        holds = sorted(
            (a.at, a.end)
            for a in spec.script
            if isinstance(a, (WristAction, PointAction)) and a.wrist == side
        )
        for (s0, e0), (s1, _) in zip(holds, holds[1:]):
            if s1 < e0:
                raise InvalidSpec(f"{side} wrist actions overlap at t={s1}")


def _wrist_target(
    action: Action, config: HarnessConfig, scene: SceneState
) -> tuple[float, float]:
    """Front-camera pixel the scripted wrist aims for."""
    zones = {z.role: z for z in config.zones}
    if isinstance(action, WristAction):
        rect = zones[action.zone].rect
        return ((rect[0] + rect[2]) / 2.0, (rect[1] + rect[3]) / 2.0)
    assert isinstance(action, PointAction)
    pose = scene.objects[action.object_id].pose
    inv = config.homography.inverse()
    target = map_to_table((pose.x, pose.y), inv)
    point = (target.x, target.y)
    pointing = (zones[ZoneRole.POINT_LEFT], zones[ZoneRole.POINT_RIGHT])
    if not any(z.contains(point) for z in pointing):
        raise InvalidSpec(
            f"object {action.object_id} is not reachable from a pointing zone "
            f"(wrist would sit at {point[0]:.0f},{point[1]:.0f})"
        )
    return point


def generate(
    spec: ScenarioSpec, config: HarnessConfig | None = None, seed: int = 0
) -> Trace:
    """Synthesize a full session trace for a scenario under seeded noise.

    ``seed`` drives the perception noise streams (skeleton jitter/dropout and
    detection snapshots); the speech latency seed stays in the config so the
    same scripted session can be regenerated under fresh frame noise.
    """
    config = config or HarnessConfig()
    config = replace_scene(config, spec.scene)
    config.noise = replace(config.noise, detection_seed=seed * 7919 + 23)
    noise = config.noise
    engine = SessionEngine(config)

    rng = random.Random(seed * 7919 + 11)

    duration = spec.duration() + 1.0
    frame_dt = 1.0 / noise.skeleton_fps
    n_frames = int(round(duration / frame_dt))

    holds: dict[str, list[tuple[float, float, tuple[float, float]]]] = {
        "left": [],
        "right": [],
    }
    for action in spec.script:
        if isinstance(action, (WristAction, PointAction)):
            holds[action.wrist].append((action.at, action.end, _wrist_target(action, config, spec.scene)))

    def wrist_at(side: str, t: float) -> tuple[float, float]:
        for start, end, target in holds[side]:
            if start <= t < end:
                return target
        return noise.rest_wrist_left if side == "left" else noise.rest_wrist_right

    events: list[tuple[float, int, int, object]] = []
    for k, action in enumerate(spec.script):
        if isinstance(action, SayAction):
            events.append((action.at, 1, k, action))
    for i in range(n_frames):
        t = round((i + 1) * frame_dt, 6)
        events.append((t, 0, i, ("frame", t)))
    events.sort(key=lambda e: (e[0], e[1], e[2]))

    for t, _, _, item in events:
        if isinstance(item, SayAction):
            engine.submit_utterance(item.text, round(item.at, 6), round(item.end, 6))
            continue
        _, ft = item  # type: ignore[misc]
        frame: dict[str, tuple[float, float] | None] = {}
        conf: dict[str, float] = {}
        for side in ("left", "right"):
            if rng.random() >= noise.skeleton_p_detect:
                frame[side] = None
                conf[side] = 0.0
                continue
            x, y = wrist_at(side, ft)
            frame[side] = (
                round(x + rng.gauss(0.0, noise.skeleton_jitter_sigma), 2),
                round(y + rng.gauss(0.0, noise.skeleton_jitter_sigma), 2),
            )
            conf[side] = round(rng.uniform(0.5, 1.0), 3)
        engine.submit_skeleton(
            ft,
            frame["left"],
            frame["right"],
            confidence_left=conf["left"],
            confidence_right=conf["right"],
        )

    engine.run_to_completion()
    trace = engine.trace()
    assert trace is not None
    return trace


def replace_scene(config: HarnessConfig, scene: SceneState) -> HarnessConfig:
    out = copy.copy(config)
    out.scene = copy.deepcopy(scene)
    return out
