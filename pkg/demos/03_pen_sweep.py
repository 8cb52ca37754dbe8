"""A miniature identification-count sweep on a synthetic pen.

Fifteen-agent scenes take minutes; this six-agent scene finishes in
seconds and shows the same shape. Each cell draws a fresh batch of
artificial station reads (a quarter of them pure noise), scores posterior
fusion against both baselines, and the table reports mean F1 per method.

Run: python3 demos/03_pen_sweep.py
"""
import sys

sys.path.insert(0, "demos")
from _shared import banner

from idfuse import SimConfig, SmoothingConfig, sweep

COUNTS = [2, 4, 8, 16, 32]


def main():
    config = SimConfig(
        pen_width=90.0, pen_height=90.0, population=6, total_frames=2500,
        feeder_zone=(35.0, 0.0, 16.0, 10.0), switch_rate=0.1, seed=3,
    )
    banner(f"{config.population} agents, {config.total_frames} frames, "
           f"counts {COUNTS}, 25% noisy reads, 5 repeats")
    result = sweep(
        config, COUNTS, noise_fraction=0.25, repeats=5, seed=1,
        smoothing=SmoothingConfig(epsilon=0.002), max_workers=1,
    )

    means = {}
    for s in result.summary:
        means.setdefault(s.method, {})[s.count] = (s.mean_f1, s.std_f1)
    header = "count      " + "".join(f"{c:>14d}" for c in COUNTS)
    print(header)
    for method in ("first_frame", "reid", "hmm"):
        cells = "".join(
            f"  {means[method][c][0]:.3f} ~{means[method][c][1]:.3f}"
            for c in COUNTS
        )
        print(f"{method:<11s}{cells}")

    print()
    print("first_frame ignores the reads, so its row is flat. swap-repair and")
    print("fusion both climb with the read budget; fusion starts below (it")
    print("refuses to guess about identities it has not seen) and passes the")
    print("repair baseline once reads cover most of the population")


if __name__ == "__main__":
    main()
