"""Draw a cascade in the half-plane and in the disk for every turning rule.

Writes SVG files next to this script (demos/out/).  The turning rule only
changes the pictures; every splinter's distance from the origin is the
same for all four rules.
"""
from pathlib import Path

from hypcascade import cascade, svg
from hypcascade.cascade import DirectionPolicy, ModelParams

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)

for policy in DirectionPolicy:
    p = ModelParams(c=1.0, lam=2.0, horizon=2.0, seed=3, direction_policy=policy, path_dt=0.02)
    run = cascade.build_cascade(p, cascade.replication_stream(p.seed, 0))
    paths = cascade.sample_trajectories(run)
    masses = [s.mass for s in run.splinters]
    (out / f"{policy.value}_halfplane.svg").write_text(svg.render_halfplane([xy for xy, _ in paths], masses, True))
    (out / f"{policy.value}_disk.svg").write_text(svg.render_disk([uv for _, uv in paths], masses, True))
    dists = ", ".join(f"{s.cosh_eta:.4f}" for s in run.splinters)
    print(f"{policy.value:>6}: {run.n_events} events, cosh distances {dists}")

print("figures in", out)
