#!/usr/bin/env python3
# Copyright 2026 The emem Authors
# SPDX-License-Identifier: Apache-2.0
"""Builds the experiment CSV fixtures.

fear_conditioning.csv
    Ratings for 4 conditions x 7 scenarios x 20 responses. Every scenario's
    ratings average exactly to the per-level condition means below (offsets
    come in +/- pairs), so level means and OLS slopes are known in closed
    form. Safe and medium means are the reference table values; low means
    are chosen, and high means are solved so each condition's threat slope
    equals its reference gradient slope.

forced_choice.csv
    Forced-choice outcomes with the reference per-condition good counts out
    of 40 valid (20 per ordering), plus invalid responses.

alpha_sweep.csv
    Outcomes over an alpha grid for the combined condition.
"""
import csv
import pathlib

HERE = pathlib.Path(__file__).resolve().parent

SCENARIOS = {
    "safe": ["return to the marketplace"],
    "low": ["park on a cloudy afternoon", "bus stop during the day"],
    "medium": ["quiet residential street after sunset", "unfamiliar part of town at night"],
    "high": ["derelict industrial area", "dark alley"],
}
CODE = {"safe": 0, "low": 1, "medium": 2, "high": 3}
PER_SCENARIO = 20

# condition -> level -> (threat, warmth); "high" threat is solved below.
MEANS = {
    "A": {"safe": (2.45, 5.95), "low": (2.90, 5.50), "medium": (3.45, 5.10), "high": (None, 4.40)},
    "C": {"safe": (1.80, 6.50), "low": (2.60, 5.60), "medium": (4.88, 3.90), "high": (None, 3.10)},
    "B": {"safe": (1.15, 7.60), "low": (3.20, 5.20), "medium": (6.60, 2.17), "high": (None, 1.80)},
    "BC": {"safe": (1.80, 6.20), "low": (3.40, 4.90), "medium": (7.33, 1.90), "high": (None, 1.60)},
}
SLOPES = {"A": 0.557, "C": 0.799, "B": 1.195, "BC": 1.130}


def solve_high(cond):
    n = {lvl: PER_SCENARIO * len(s) for lvl, s in SCENARIOS.items()}
    total = sum(n.values())
    xbar = sum(n[l] * CODE[l] for l in n) / total
    sxx = sum(n[l] * (CODE[l] - xbar) ** 2 for l in n)
    partial = sum(n[l] * (CODE[l] - xbar) * MEANS[cond][l][0] for l in n if l != "high")
    return (SLOPES[cond] * sxx - partial) / (n["high"] * (CODE["high"] - xbar))


def spread(mean, count):
    """count values in [1, 10] averaging to mean, in +/- pairs."""
    room = min(1.0, mean - 1.0, 10.0 - mean)
    steps = [1.0, 0.5, 0.25, 0.75, 0.0]
    out = []
    for k in range(count // 2):
        d = room * steps[k % len(steps)]
        out += [mean + d, mean - d]
    return out


def write_ratings():
    for cond in MEANS:
        threat_high = solve_high(cond)
        assert 1.0 <= threat_high <= 10.0, (cond, threat_high)
        MEANS[cond]["high"] = (threat_high, MEANS[cond]["high"][1])
    with open(HERE / "fear_conditioning.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["condition", "scenario", "similarity", "threat", "warmth"])
        for cond in ["A", "B", "C", "BC"]:
            for level, scenarios in SCENARIOS.items():
                threat, warmth = MEANS[cond][level]
                for scen in scenarios:
                    for t, wm in zip(spread(threat, PER_SCENARIO), spread(warmth, PER_SCENARIO)[::-1]):
                        w.writerow([cond, scen, level, repr(round(t, 12)), repr(round(wm, 12))])


# condition -> ordering -> (good, bad, invalid)
DECISIONS = {
    "A": {"blue_first": (0, 20, 2), "red_first": (8, 12, 1)},
    "C": {"blue_first": (2, 18, 11), "red_first": (7, 13, 9)},
    "B": {"blue_first": (2, 18, 3), "red_first": (19, 1, 2)},
    "BC": {"blue_first": (14, 6, 12), "red_first": (18, 2, 10)},
}


def write_decisions():
    with open(HERE / "forced_choice.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["condition", "ordering", "outcome"])
        for cond, by_order in DECISIONS.items():
            for ordering, (good, bad, invalid) in by_order.items():
                for outcome, count in (("good", good), ("bad", bad), ("invalid", invalid)):
                    for _ in range(count):
                        w.writerow([cond, ordering, outcome])


SWEEP = {0.01: 3, 0.05: 3, 0.10: 3, 0.15: 3, 0.20: 20, 0.25: 21, 0.30: 21}  # good of 30 valid


def write_sweep():
    with open(HERE / "alpha_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["condition", "ordering", "outcome", "alpha"])
        for alpha, good in SWEEP.items():
            for i in range(30):
                ordering = "blue_first" if i % 2 == 0 else "red_first"
                w.writerow(["BC", ordering, "good" if i < good else "bad", f"{alpha:.2f}"])
            for i in range(4):
                w.writerow(["BC", "blue_first", "invalid", f"{alpha:.2f}"])


if __name__ == "__main__":
    write_ratings()
    write_decisions()
    write_sweep()
