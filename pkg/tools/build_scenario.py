"""Build and vet the bundled paper-assembly scenario, then freeze it to data/.

Run from the repo root: python3 tools/build_scenario.py [--write]
"""

import json
import sys

import yaml

sys.path.insert(0, "src")

from cogest.config import HarnessConfig, scene_to_dict, default_scene
from cogest.harness import build_report, replay
from cogest.scenario import generate, scenario_from_dict, scenario_to_dict


def scenario_dict():
    scene = scene_to_dict(default_scene())
    script = [
        {"at": 0.5, "say": "ok, go home"},
        {"at": 4.0, "say": "pick this rod"},
        {"at": 5.4, "point_at": 1, "hold": 1.8, "wrist": "left"},
        {"at": 9.5, "say": "stop"},
        {"at": 13.5, "say": "continue"},
        {"at": 17.5, "say": "give me this rocker arm"},
        {"at": 19.7, "point_at": 3, "hold": 1.8, "wrist": "left"},
        {"at": 23.0, "wrist": "left", "zone": "stop", "hold": 1.2},
        {"at": 26.0, "wrist": "right", "zone": "continue", "hold": 1.2},
        {"at": 29.0, "say": "pick this rod"},
        {"at": 30.4, "point_at": 2, "hold": 1.8, "wrist": "left"},
        {"at": 34.0, "say": "pause"},
        {"at": 38.0, "say": "continue"},
        {"at": 42.0, "say": "give me that rod"},
        {"at": 43.8, "point_at": 4, "hold": 1.8, "wrist": "left"},
        {"at": 48.0, "say": "pick this rocker arm"},
        {"at": 49.8, "point_at": 5, "hold": 1.8, "wrist": "right"},
        {"at": 54.0, "say": "stop"},
        {"at": 58.0, "say": "continue"},
        {"at": 62.0, "say": "give me this rod"},
        {"at": 63.8, "point_at": 6, "hold": 1.8, "wrist": "right"},
        {"at": 68.0, "say": "pick this rocker arm"},
        {"at": 69.8, "point_at": 7, "hold": 1.8, "wrist": "right"},
        {"at": 74.0, "say": "stop"},
        {"at": 77.5, "say": "continue"},
        {"at": 81.0, "say": "pause"},
        {"at": 84.0, "say": "continue"},
        {"at": 87.5, "say": "give me another rocker arm"},
        {"at": 92.5, "say": "ok, go home"},
    ]
    return {"name": "paper-assembly", "scene": scene, "script": script, "expectations": []}


def vet(seed):
    raw = scenario_dict()
    spec = scenario_from_dict(raw)
    trace = generate(spec, HarnessConfig(), seed=seed)
    result = replay(trace)
    report = build_report(result)
    seq = [(c.kind.value, c.object_id) for c in result.command_log]
    return spec, trace, result, report, seq


BUNDLED_SEED = 2  # vetted: 4+4 object commands, 7 co-speech, 0 unresolved


def main():
    seqs = {}
    for seed in (BUNDLED_SEED, 3, 4):
        spec, trace, result, report, seq = vet(seed)
        seqs[seed] = (trace, result, report, seq)
        cmd = report["commands"]
        rel = report["reliability"]
        print(
            f"seed {seed}: total={cmd['total']} by_kind={cmd['by_kind']} "
            f"speech={cmd['speech_originated']} cospeech={cmd['cospeech_groundings']} "
            f"unresolved={rel['unresolved_references']} stale={rel['stale_scenes']} "
            f"records={len(trace.records)}"
        )
    print(f"\nseed {BUNDLED_SEED} sequence:")
    for k in seqs[BUNDLED_SEED][3]:
        print("  ", k)
    same = len({tuple(s[3]) for s in seqs.values()}) == 1
    print("sequences identical across seeds:", same)

    if "--write" in sys.argv and same:
        spec, trace, result, report, seq = vet(BUNDLED_SEED)
        raw = scenario_dict()
        raw["expectations"] = [k for k, _ in seq]
        with open("src/cogest/data/paper_assembly.yaml", "w") as fh:
            yaml.safe_dump(raw, fh, sort_keys=False)
        trace.save("src/cogest/data/paper_assembly.trace")
        print("wrote data files;", len(trace.records), "records")


if __name__ == "__main__":
    main()
