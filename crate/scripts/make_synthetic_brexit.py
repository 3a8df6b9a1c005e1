"""Generate the synthetic referendum inputs under data/synthetic/.

Forty regions with a national leave share of 51.9%. Seven regions (17.5%)
have no town in the locations file, so ingestion has to impute them.
Deterministic: rerunning rewrites identical files.
"""

import csv
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "synthetic"
REGIONS = 40
MISSING = 7
LEAVE_SHARE = 0.519


def main() -> None:
    rng = random.Random(1975)
    OUT.mkdir(parents=True, exist_ok=True)

    sizes = [rng.randint(20_000, 120_000) for _ in range(REGIONS)]
    shares = [min(0.75, max(0.3, rng.gauss(LEAVE_SHARE, 0.08))) for _ in range(REGIONS)]
    leave = [round(s * f) for s, f in zip(sizes, shares)]
    # Nudge the largest region so the national share lands on 51.9%.
    total = sum(sizes)
    target = round(LEAVE_SHARE * total)
    big = max(range(REGIONS), key=lambda i: sizes[i])
    leave[big] += target - sum(leave)
    assert 0 <= leave[big] <= sizes[big]

    names = [f"R{i + 1:02d}" for i in range(REGIONS)]
    with open(OUT / "votes.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["region", "leave", "remain"])
        for name, s, l in zip(names, sizes, leave):
            w.writerow([name, l, s - l])

    missing = set(rng.sample(range(REGIONS), MISSING))
    with open(OUT / "locations.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["town", "region", "lat", "lon"])
        for i, name in enumerate(names):
            if i in missing:
                continue
            lat0, lon0 = rng.uniform(50.5, 57.5), rng.uniform(-4.5, 1.2)
            for t in range(rng.randint(1, 4)):
                lat = lat0 + rng.uniform(-0.3, 0.3)
                lon = lon0 + rng.uniform(-0.4, 0.4)
                w.writerow([f"{name} Town {t + 1}", name, f"{lat:.4f}", f"{lon:.4f}"])


if __name__ == "__main__":
    main()
