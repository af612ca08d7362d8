"""Replay and reporting: run traces through the full pipeline and measure.

Replay is pure with respect to the trace — simulated time only — so a trace
replayed twice yields byte-identical command logs and reports.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from importlib import resources

from .config import HarnessConfig, scene_from_dict
from .engine import SessionEngine, SessionMetrics, command_to_payload
from .fusion import RobotCommand
from .scenario import ScenarioSpec, load_scenario, replace_scene, scenario_from_dict
from .trace import Trace


@dataclass
class ExpectationFailure:
    index: int
    expected: str | None
    actual: str | None

    def describe(self) -> str:
        return f"command {self.index}: expected {self.expected}, got {self.actual}"


@dataclass
class ReplayResult:
    command_log: list[RobotCommand]
    metrics: SessionMetrics
    expectation_failures: list[ExpectationFailure] = field(default_factory=list)
    completed: bool = True

    def command_log_text(self) -> str:
        lines = [
            json.dumps(command_to_payload(c), sort_keys=True, separators=(",", ":"))
            for c in self.command_log
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def replay(
    trace: Trace,
    config: HarnessConfig | None = None,
    scenario: ScenarioSpec | None = None,
) -> ReplayResult:
    """Feed a trace through speech -> grammar -> fusion -> simulation."""
    config = config or HarnessConfig()
    if trace.scene is not None:
        config = replace_scene(config, scene_from_dict(trace.scene))
    engine = SessionEngine(config, auto_detections=False, record=False)
    engine.feed_trace(trace)

    result = ReplayResult(command_log=engine.command_log, metrics=engine.metrics)
    if scenario is not None and scenario.expectations:
        result.expectation_failures = check_expectations(
            scenario.expectations, engine.command_log
        )
        result.completed = not result.expectation_failures
    if engine.metrics.unresolved_references:
        result.completed = False
    return result


def check_expectations(
    expected: list[str], commands: list[RobotCommand]
) -> list[ExpectationFailure]:
    actual = [c.kind.value for c in commands]
    failures = []
    for i in range(max(len(expected), len(actual))):
        want = expected[i] if i < len(expected) else None
        got = actual[i] if i < len(actual) else None
        if want != got:
            failures.append(ExpectationFailure(index=i, expected=want, actual=got))
    return failures


def _stats(samples: list[float]) -> dict:
    if not samples:
        return {"count": 0, "mean": 0.0, "median": 0.0, "max": 0.0}
    return {
        "count": len(samples),
        "mean": round(statistics.fmean(samples), 6),
        "median": round(statistics.median(samples), 6),
        "max": round(max(samples), 6),
    }


def build_report(result: ReplayResult, scenario: ScenarioSpec | None = None) -> dict:
    metrics = result.metrics
    report = {
        "commands": {
            "total": len(result.command_log),
            "by_kind": dict(sorted(metrics.counts_by_kind().items())),
            "speech_originated": metrics.speech_originated(),
            "cospeech_groundings": metrics.cospeech_groundings(),
        },
        "latency_seconds": {
            "speech_to_command": _stats(metrics.speech_latencies),
            "halt_response": _stats(metrics.halt_responses),
        },
        "reliability": {
            "unresolved_references": metrics.unresolved_references,
            "stale_scenes": metrics.stale_scenes,
            "parse_errors": metrics.parse_errors,
            "dropped_pointings": metrics.dropped_pointings,
        },
        "scenario": None,
    }
    if scenario is not None:
        report["scenario"] = {
            "name": scenario.name,
            "expected_commands": len(scenario.expectations),
            "failures": [f.describe() for f in result.expectation_failures],
            "completed": result.completed,
        }
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def report_text(report: dict) -> str:
    cmd = report["commands"]
    lat = report["latency_seconds"]
    rel = report["reliability"]
    lines = [
        "== session report ==",
        f"commands issued        {cmd['total']}",
    ]
    for kind, count in cmd["by_kind"].items():
        lines.append(f"  {kind:<20} {count}")
    lines += [
        f"speech-originated      {cmd['speech_originated']}",
        f"co-speech groundings   {cmd['cospeech_groundings']}",
        "latency (s)            mean / median / max",
    ]
    for label, key in (("speech->command", "speech_to_command"), ("halt response", "halt_response")):
        s = lat[key]
        lines.append(
            f"  {label:<20} {s['mean']:.3f} / {s['median']:.3f} / {s['max']:.3f}"
            f"  (n={s['count']})"
        )
    lines += [
        f"unresolved references  {rel['unresolved_references']}",
        f"stale scenes           {rel['stale_scenes']}",
        f"parse errors           {rel['parse_errors']}",
    ]
    if report["scenario"] is not None:
        sc = report["scenario"]
        status = "PASS" if sc["completed"] else "FAIL"
        lines.append(f"scenario {sc['name']!r}     {status}")
        for failure in sc["failures"]:
            lines.append(f"  ! {failure}")
    return "\n".join(lines) + "\n"


def bundled_scenario(name: str = "paper_assembly") -> ScenarioSpec:
    import yaml

    data = resources.files("cogest.data").joinpath(f"{name}.yaml").read_text("utf-8")
    return scenario_from_dict(yaml.safe_load(data))


def bundled_trace(name: str = "paper_assembly") -> Trace:
    from .trace import loads

    text = resources.files("cogest.data").joinpath(f"{name}.trace").read_text("utf-8")
    return loads(text)
