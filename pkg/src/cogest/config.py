"""Harness configuration: one YAML file configures every engine stage.

Anything omitted falls back to the defaults that reproduce the reference
interaction protocol (24 fps front camera at 1920x1080, 4.5 fps top-down
detections at 1280x720, 0.5 s pause filter, ~1.9 s recognition delay).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import yaml

from .fusion import FusionConfig
from .gestures import TriggerZone, WristRequirement, ZoneRole, default_zones, validate_zones
from .grammar import Vocabulary, default_vocabulary, load_vocabulary
from .sim import SceneState, SimConfig, make_scene
from .spatial import DetectionClass, Homography, load_calibration
from .speech import SpeechChannelConfig

ENV_CONFIG = "COGEST_CONFIG"

FRONT_WIDTH = 1920
FRONT_HEIGHT = 1080
TABLE_WIDTH = 1280
TABLE_HEIGHT = 720


@dataclass(frozen=True)
class NoiseConfig:
    """Perception noise for trace generation and live sessions."""

    skeleton_fps: float = 24.0
    detection_fps: float = 4.5
    skeleton_p_detect: float = 0.9  # per-frame wrist detection probability
    skeleton_jitter_sigma: float = 10.0  # px, tuned to keep ~90% in-square rate
    detection_p_detect: float = 0.95
    detection_jitter_px: float = 3.0
    min_confidence: float = 0.3
    skeleton_seed: int = 0
    detection_seed: int = 0
    rest_wrist_left: tuple[float, float] = (860.0, 540.0)
    rest_wrist_right: tuple[float, float] = (1060.0, 540.0)


def default_homography() -> Homography:
    """Bundled calibration: maps the pointing band of the front image
    (the hull of the two lower trigger squares) onto the full table frame."""
    zones = default_zones(FRONT_WIDTH, FRONT_HEIGHT)
    lower = [z.rect for z in zones if z.role in (ZoneRole.POINT_LEFT, ZoneRole.POINT_RIGHT)]
    x0 = min(r[0] for r in lower)
    y0 = min(r[1] for r in lower)
    x1 = max(r[2] for r in lower)
    y1 = max(r[3] for r in lower)
    sx = TABLE_WIDTH / (x1 - x0)
    sy = TABLE_HEIGHT / (y1 - y0)
    return Homography([[sx, 0.0, -x0 * sx], [0.0, sy, -y0 * sy], [0.0, 0.0, 1.0]])


def default_scene() -> SceneState:
    """Nine parts: four in each pointable side band plus one centre spare."""
    rod, arm = DetectionClass.ROD, DetectionClass.ROCKER_ARM
    return make_scene(
        [
            (1, rod, 100.0, 90.0),
            (2, rod, 100.0, 270.0),
            (3, arm, 100.0, 450.0),
            (4, rod, 100.0, 630.0),
            (5, arm, 1180.0, 90.0),
            (6, rod, 1180.0, 270.0),
            (7, arm, 1180.0, 450.0),
            (8, rod, 1180.0, 630.0),
            (9, arm, 640.0, 360.0),
        ],
        place_location=(640.0, 620.0),
    )


@dataclass
class HarnessConfig:
    speech: SpeechChannelConfig = field(default_factory=SpeechChannelConfig)
    zones: list[TriggerZone] = field(default_factory=default_zones)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    homography: Homography = field(default_factory=default_homography)
    vocabulary: Vocabulary = field(default_factory=default_vocabulary)
    scene: SceneState = field(default_factory=default_scene)

    def __post_init__(self) -> None:
        validate_zones(self.zones)


def scene_to_dict(scene: SceneState) -> dict:
    return {
        "objects": [
            {
                "id": o.id,
                "class": o.object_class.value,
                "x": o.pose.x,
                "y": o.pose.y,
            }
            for o in sorted(scene.objects.values(), key=lambda o: o.id)
        ],
        "place_location": [scene.place_location.x, scene.place_location.y],
    }


def scene_from_dict(data: dict) -> SceneState:
    objects = [
        (o["id"], DetectionClass(o["class"]), float(o["x"]), float(o["y"]))
        for o in data["objects"]
    ]
    place = tuple(float(v) for v in data.get("place_location", (640.0, 620.0)))
    return make_scene(objects, place_location=place)  # type: ignore[arg-type]


def _zone_from_dict(data: dict) -> TriggerZone:
    return TriggerZone(
        role=ZoneRole(data["role"]),
        rect=tuple(float(v) for v in data["rect"]),  # type: ignore[arg-type]
        required_wrist=WristRequirement(data["wrist"]),
        debounce_frames=int(data.get("debounce_frames", 5)),
    )


def load_config(path: str | None = None) -> HarnessConfig:
    """Load the harness configuration; ``None`` checks $COGEST_CONFIG, then defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    if path is None:
        return HarnessConfig()
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    return config_from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def config_from_dict(raw: dict, base_dir: str = ".") -> HarnessConfig:
    cfg = HarnessConfig()

    if "speech" in raw:
        cfg.speech = replace(SpeechChannelConfig(), **raw["speech"])
    if "zones" in raw:
        cfg.zones = [_zone_from_dict(z) for z in raw["zones"]]
        validate_zones(cfg.zones)
    if "fusion" in raw:
        cfg.fusion = replace(FusionConfig(), **raw["fusion"])
    if "sim" in raw:
        cfg.sim = replace(SimConfig(), **raw["sim"])
    if "noise" in raw:
        noise = dict(raw["noise"])
        for key in ("rest_wrist_left", "rest_wrist_right"):
            if key in noise:
                noise[key] = tuple(float(v) for v in noise[key])
        cfg.noise = replace(NoiseConfig(), **noise)
    if "calibration" in raw:
        calib = raw["calibration"]
        if isinstance(calib, str):
            calib_path = calib if os.path.isabs(calib) else os.path.join(base_dir, calib)
            cfg.homography, _ = load_calibration(calib_path)
        else:
            cfg.homography = Homography(calib)
    if "vocabulary" in raw:
        vocab_path = raw["vocabulary"]
        if not os.path.isabs(vocab_path):
            vocab_path = os.path.join(base_dir, vocab_path)
        cfg.vocabulary = load_vocabulary(vocab_path)
    if "scene" in raw:
        cfg.scene = scene_from_dict(raw["scene"])
    return cfg
