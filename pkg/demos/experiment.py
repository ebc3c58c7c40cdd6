"""
Simulated outlining experiment.

A demonstrator outlines targets on a blob model; an interpreter across
the table watches and outlines what they think was meant. Under MAGIC the
interpreter sees the retargeted avatar fingertip; under Veridical they
see the real fingertip mirrored, with a depth bias and with samples lost
behind the model.

    python3 demos/experiment.py [--trials 200] [--seed 0]
"""
import argparse
import time

import numpy as np

from magic_collab.cli import scale_noise
from magic_collab.sim import AgentModel, generate_scene, run_experiment

parser = argparse.ArgumentParser()
parser.add_argument("--trials", type=int, default=200)
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

scene = generate_scene(0)
agents = AgentModel()
print(f"scene 0: {len(scene.centers)} spheres, {sum(len(s) for s in scene.target_sets)} targets")
print(f"agents: {agents}")
print()

t = time.perf_counter()
records, summary = run_experiment(scene, agents, args.trials, seed=args.seed)
print(f"{args.trials} trials per condition in {time.perf_counter() - t:.0f} s")
for name, c in (("MAGIC", summary.magic), ("Veridical", summary.veridical)):
    print(f"  {name:<10} mean J {c.mean:.3f}  sd {c.sd:.3f}  median {c.median:.3f}")
print(f"  relative improvement {100 * summary.relative_improvement:.1f}%, permutation p = {summary.p_value:.4f}")

print()
print("noise sweep (every noise parameter scaled):")
for k in (0.0, 0.5, 1.0, 1.5, 2.0):
    _, s = run_experiment(scene, scale_noise(agents, k), args.trials // 2, seed=args.seed)
    print(f"  x{k:<4} median J  MAGIC {s.magic.median:.3f}  Veridical {s.veridical.median:.3f}")

print()
by_set = {}
for r in records:
    by_set.setdefault((r.condition, r.set_id), []).append(r.j)
print("mean J per target set:")
for set_id in range(4):
    m, v = np.mean(by_set[("MAGIC", set_id)]), np.mean(by_set[("Veridical", set_id)])
    print(f"  set {set_id}: MAGIC {m:.3f}  Veridical {v:.3f}")
