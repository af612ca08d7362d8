"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS lines.
Every tolerance here is fixed; nothing is calibrated at test time.
"""

import math
import random
import time

import pytest

from cogest.config import HarnessConfig
from cogest.fusion import CommandKind, RobotCommand
from cogest.grammar import (
    CommandIntent,
    Deixis,
    ObjectClass,
    Target,
    Verb,
    parse_phrase,
    phrase_corpus,
)
from cogest.harness import build_report, bundled_scenario, bundled_trace, replay, report_json
from cogest.gestures import trigger_reliability
from cogest.sim import WorkcellSim, make_scene
from cogest.spatial import (
    Detection,
    DetectionClass,
    Homography,
    NoCandidate,
    ObjectDetectionSnapshot,
    TablePoint,
    calibrate,
    map_to_table,
    nearest_object,
)
from cogest.speech import SpeechChannel, SpeechChannelConfig, UtteranceEvent


def verdict(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


class Timer:
    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.monotonic() - self.start


# --- criterion 1: grammar corpus ------------------------------------------------

PROTOCOL_PHRASES = {
    "place rod": CommandIntent(Verb.PLACE, ObjectClass.ROD),
    "go home": CommandIntent(Verb.GO_HOME, target=Target.HOME),
    "give me another rocker arm": CommandIntent(
        Verb.GIVE, ObjectClass.ROCKER_ARM, Deixis.ANOTHER, Target.HUMAN
    ),
    "pick up the last rod": CommandIntent(Verb.PICK, ObjectClass.ROD, Deixis.LAST),
    "pick rod": CommandIntent(Verb.PICK, ObjectClass.ROD),
    "give me this rod": CommandIntent(Verb.GIVE, ObjectClass.ROD, Deixis.THIS, Target.HUMAN),
    "give me that rocker arm": CommandIntent(
        Verb.GIVE, ObjectClass.ROCKER_ARM, Deixis.THAT, Target.HUMAN
    ),
    "stop": CommandIntent(Verb.STOP),
    "pause": CommandIntent(Verb.PAUSE),
    "continue": CommandIntent(Verb.CONTINUE),
}


def test_grammar_corpus():
    with Timer() as timer:
        exact = all(parse_phrase(p) == intent for p, intent in PROTOCOL_PHRASES.items())
        corpus_exact = all(parse_phrase(p) == intent for p, intent in phrase_corpus())
    verdict(
        "grammar corpus: 100% exact match",
        exact and corpus_exact and timer.elapsed < 1.0,
        f"{len(PROTOCOL_PHRASES)} protocol phrases + {len(phrase_corpus())} corpus entries "
        f"in {timer.elapsed:.3f}s",
    )


# --- criterion 2: speech latency reproduction -----------------------------------

FROZEN_LATENCY_MEAN = 1.880273698702447  # 50 draws, defaults, seed 42


def _fifty_trial_mean(seed: int) -> float:
    channel = SpeechChannel(SpeechChannelConfig(rng_seed=seed))
    delays = []
    for i in range(50):
        utterance = UtteranceEvent("stop", i * 5.0, i * 5.0 + 0.4)
        transcript = channel.recognize(utterance)
        delays.append(transcript.recognized_at - utterance.speech_end)
    return sum(delays) / len(delays)


def test_speech_latency_reproduction():
    with Timer() as timer:
        mean = _fifty_trial_mean(42)
        repeat = _fifty_trial_mean(42)
    verdict(
        "speech latency: 50-trial mean within 1.9 +- 0.1 s, deterministic",
        abs(mean - 1.9) <= 0.1 and mean == repeat == FROZEN_LATENCY_MEAN and timer.elapsed < 1.0,
        f"mean={mean:.4f}s in {timer.elapsed:.3f}s",
    )


# --- criterion 3: trigger reliability ---------------------------------------------

FROZEN_RELIABILITY = 1.0  # 1e5 trials, p=0.9, N=5, 48 frames, seed 2024


def test_trigger_reliability():
    with Timer() as timer:
        estimate = trigger_reliability(0.9, 5, horizon=48, trials=100_000, seed=2024)
    verdict(
        "trigger reliability: P(fire within 2s at 24fps) >= 0.99",
        estimate >= 0.99 and estimate == FROZEN_RELIABILITY and timer.elapsed < 30.0,
        f"estimate={estimate} in {timer.elapsed:.2f}s",
    )


# --- criterion 4: nearest-object vs brute force ------------------------------------

def test_nearest_object_oracle():
    rng = random.Random(777)
    classes = [DetectionClass.ROD, DetectionClass.ROCKER_ARM]

    def detection(i, cx, cy):
        return Detection(i, rng.choice(classes), (cx - 10, cy - 10, cx + 10, cy + 10), 0.9)

    mismatches = 0
    with Timer() as timer:
        for scene_idx in range(1000):
            n = rng.randint(1, 20)
            ids = rng.sample(range(200), n)
            dets = [detection(i, rng.uniform(0, 1280), rng.uniform(0, 720)) for i in ids]
            if scene_idx % 3 == 0:
                # forced tie: two detections mirrored around the query point
                a, b = max(ids) + 1, max(ids) + 2
                dets += [detection(a, 400.0, 300.0), detection(b, 600.0, 300.0)]
            snapshot = ObjectDetectionSnapshot(0.0, tuple(dets))
            query = TablePoint(500.0, 300.0) if scene_idx % 3 == 0 else TablePoint(
                rng.uniform(0, 1280), rng.uniform(0, 720)
            )
            flt = rng.choice([None, *classes])
            radius = rng.choice([150.0, 500.0, 5000.0])

            oracle = None
            for d in snapshot.detections:
                if flt is not None and d.object_class is not flt:
                    continue
                cx, cy = d.center()
                dist = math.hypot(cx - query.x, cy - query.y)
                if dist > radius:
                    continue
                key = (dist, d.id)
                if oracle is None or key < oracle:
                    oracle = key
            try:
                got = nearest_object(query, snapshot, flt, radius)
            except NoCandidate:
                got = None
            want = None if oracle is None else oracle[1]
            if got != want:
                mismatches += 1
    verdict(
        "nearest-object: 1000 random scenes match exhaustive scan",
        mismatches == 0 and timer.elapsed < 5.0,
        f"{mismatches} mismatches in {timer.elapsed:.2f}s",
    )


# --- criterion 5: homography -------------------------------------------------------

def _random_h(rng):
    return Homography(
        [
            [rng.uniform(0.5, 1.5), rng.uniform(-0.3, 0.3), rng.uniform(-200, 200)],
            [rng.uniform(-0.3, 0.3), rng.uniform(0.5, 1.5), rng.uniform(-200, 200)],
            [rng.uniform(-1e-5, 1e-5), rng.uniform(-1e-5, 1e-5), 1.0],
        ]
    )


def test_homography():
    rng = random.Random(4242)
    with Timer() as timer:
        worst_recovery = 0.0
        for _ in range(20):
            known = _random_h(rng)
            pts = [(rng.uniform(0, 1920), rng.uniform(0, 1080)) for _ in range(8)]
            pairs = []
            for p in pts:
                q = map_to_table(p, known)
                pairs.append((p, (q.x, q.y)))
            recovered = calibrate(pairs).homography
            worst_recovery = max(
                worst_recovery, float(abs(recovered.matrix - known.matrix).max())
            )

        worst_roundtrip = 0.0
        h = _random_h(rng)
        hinv = h.inverse()
        for x in range(0, 1920, 64):
            for y in range(0, 1080, 64):
                p = map_to_table((float(x), float(y)), h)
                back = map_to_table((p.x, p.y), hinv)
                worst_roundtrip = max(worst_roundtrip, math.hypot(back.x - x, back.y - y))

        known = _random_h(rng)
        pts = [(rng.uniform(0, 1920), rng.uniform(0, 1080)) for _ in range(12)]
        noisy_pairs = []
        for p in pts:
            q = map_to_table(p, known)
            noisy_pairs.append(
                (p, (q.x + rng.uniform(-0.5, 0.5), q.y + rng.uniform(-0.5, 0.5)))
            )
        noisy_rms = calibrate(noisy_pairs).rms_error
    verdict(
        "homography: exact 1e-9, roundtrip 1e-6, noisy RMS < 1px",
        worst_recovery < 1e-9
        and worst_roundtrip < 1e-6
        and noisy_rms < 1.0
        and timer.elapsed < 1.0,
        f"recovery={worst_recovery:.2e} roundtrip={worst_roundtrip:.2e} "
        f"rms={noisy_rms:.3f}px in {timer.elapsed:.2f}s",
    )


# --- criterion 6: paper assembly scenario -------------------------------------------

def test_paper_assembly_scenario():
    scenario = bundled_scenario()
    trace = bundled_trace()
    with Timer() as timer:
        result = replay(trace, HarnessConfig(), scenario)
    report = build_report(result, scenario)
    by_kind = report["commands"]["by_kind"]
    ok = (
        by_kind.get("pick_place") == 4
        and by_kind.get("handover") == 4
        and report["commands"]["speech_originated"] >= 20
        and report["commands"]["cospeech_groundings"] == 7
        and report["reliability"]["unresolved_references"] == 0
        and not result.expectation_failures
        and timer.elapsed < 10.0
    )
    verdict(
        "paper assembly: 4 pick-place + 4 handover, >=20 speech commands, "
        "7 co-speech groundings, 0 unresolved",
        ok,
        f"kinds={by_kind} speech={report['commands']['speech_originated']} "
        f"cospeech={report['commands']['cospeech_groundings']} "
        f"unresolved={report['reliability']['unresolved_references']} "
        f"in {timer.elapsed:.2f}s",
    )


# --- criterion 7: pause soundness -----------------------------------------------------

def _provenance():
    return {"transcript": 1}


def _random_workload(rng):
    classes = [DetectionClass.ROD, DetectionClass.ROCKER_ARM]
    n = rng.randint(2, 6)
    objects = [
        (i + 1, rng.choice(classes), rng.uniform(50, 1200), rng.uniform(50, 700))
        for i in range(n)
    ]
    commands = []
    for oid in rng.sample([o[0] for o in objects], rng.randint(1, min(3, n))):
        kind = rng.choice([CommandKind.PICK_PLACE, CommandKind.HANDOVER])
        commands.append(RobotCommand(kind=kind, issued_at=0.0, object_id=oid, provenance=_provenance()))
    commands.append(RobotCommand(kind=CommandKind.GO_HOME, issued_at=0.0, provenance=_provenance()))
    return objects, commands


def _run(objects, commands, pause_at=None, resume_at=None, horizon=2000):
    sim = WorkcellSim(make_scene(objects))
    for cmd in commands:
        sim.submit(cmd)
    completions = []
    phases = []
    for i in range(1, horizon + 1):
        if pause_at == i:
            sim.submit(RobotCommand(kind=CommandKind.HALT, issued_at=0.0, provenance=_provenance()))
        if resume_at == i:
            sim.submit(RobotCommand(kind=CommandKind.RESUME, issued_at=0.0, provenance=_provenance()))
        events = sim.tick()
        phases.append(sim.phase.value)
        completions.extend(
            round(e.t / sim.config.tick) for e in events if e.kind == "command_completed"
        )
    final = {
        o.id: (o.status.value, round(o.pose.x, 9), round(o.pose.y, 9))
        for o in sim.scene.objects.values()
    }
    return final, completions, phases


def test_pause_soundness():
    rng = random.Random(31337)
    failures = 0
    with Timer() as timer:
        for _ in range(200):
            objects, commands = _random_workload(rng)
            base_final, base_completions, base_phases = _run(objects, commands)
            # base_phases[k] is the phase after tick k+1; injecting at tick
            # k+2 halts while that phase is in effect
            motion_ticks = [
                k + 2
                for k, phase in enumerate(base_phases)
                if phase.startswith("moving")
            ]
            if not motion_ticks or not base_completions:
                continue
            t1 = rng.choice(motion_ticks)
            shift = rng.randint(5, 120)
            t2 = t1 + shift
            final, completions, _ = _run(objects, commands, pause_at=t1, resume_at=t2)
            expected = [c if c <= t1 else c + shift for c in base_completions]
            if final != base_final or completions != expected:
                failures += 1
    verdict(
        "pause soundness: 200 random halt/resume injections, exact shift",
        failures == 0 and timer.elapsed < 30.0,
        f"{failures} failures in {timer.elapsed:.2f}s",
    )


# --- criterion 8: replay determinism ---------------------------------------------------

def test_replay_determinism():
    scenario = bundled_scenario()
    trace = bundled_trace()
    with Timer() as timer:
        first = replay(trace, HarnessConfig(), scenario)
        second = replay(trace, HarnessConfig(), scenario)
        logs_equal = first.command_log_text() == second.command_log_text()
        reports_equal = report_json(build_report(first, scenario)) == report_json(
            build_report(second, scenario)
        )
    verdict(
        "replay determinism: byte-identical command logs and reports",
        logs_equal and reports_equal,
        f"{len(first.command_log)} commands in {timer.elapsed:.2f}s",
    )
