#!/usr/bin/env python3
"""Regenerates the bundled scenario files.

Usage: generate.py <path-to-drivestyle-binary>

Acceptance scenarios place the context traffic from a probe run of the ego
alone, so the scripted maneuver actually interacts with its neighbors.
"""
import csv
import json
import os
import random
import subprocess
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
RATE = 10.0
LANE_CHANGE_FRAMES = 30


def agent(id, lane, pos, speed, v0=None, cls="conservative", mobil=False):
    a = {"id": id, "class": cls, "lane": lane, "position": round(pos, 3), "speed": speed,
         "mobil": mobil}
    if v0 is not None:
        a["desired_speed"] = v0
    return a


def simulate(cli, sc):
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "s.json")
        with open(path, "w") as f:
            json.dump(sc, f)
        subprocess.run([cli, "simulate", "--scenario", path, "--out", d], check=True)
        rows = list(csv.DictReader(open(os.path.join(d, sc["name"] + ".trajectories.csv"))))
    track = {}
    for r in rows:
        track.setdefault(r["agent_id"], []).append(float(r["x"]))
    return track


def write(sub, sc):
    os.makedirs(os.path.join(HERE, sub), exist_ok=True)
    with open(os.path.join(HERE, sub, sc["name"] + ".json"), "w") as f:
        json.dump(sc, f, indent=2)
        f.write("\n")


def overspeeding(cli, i, start, length, slow):
    ego = agent("ego", 1, 100, 25, 25, "aggressive")
    man = [{"agent": "ego", "style": "overspeeding", "start_frame": start,
            "end_frame": start + length}]
    sc = {"name": f"acc_os_{i}", "lanes": 3, "duration": 25, "seed": 10 + i,
          "agents": [ego], "maneuvers": man}
    mid = start + length // 2
    x_mid = simulate(cli, sc)["ego"][mid]
    t_mid = mid / RATE
    # Slower platoon in the outer lanes, abreast of the ego at mid-maneuver.
    for k, (lane, rel) in enumerate([(0, -10), (0, 30), (2, -30), (2, 10)]):
        sc["agents"].append(agent(f"slow{k}", lane, x_mid + rel - slow * t_mid, slow, slow))
    return sc


def overtaking(cli, i, start, lead_speed, gap):
    agents = [agent("ego", 1, 100, lead_speed, 30, "aggressive"),
              agent("lead", 1, 100 + gap, lead_speed, lead_speed)]
    probe = {"name": f"acc_ot_{i}", "lanes": 3, "duration": 25, "seed": 20 + i,
             "agents": agents,
             "maneuvers": [{"agent": "ego", "style": "overtaking", "start_frame": start,
                            "end_frame": 249}]}
    track = simulate(cli, probe)
    # Close the maneuver symmetrically around the moment the ego draws level.
    level = next(k for k, (e, l) in enumerate(zip(track["ego"], track["lead"])) if e >= l)
    probe["maneuvers"][0]["end_frame"] = 2 * level - start
    return probe


def sudden_lane_change(i, dx, start, direction):
    side = 0 if direction == 1 else 2
    return {"name": f"acc_slc_{i}", "lanes": 3, "duration": 20, "seed": 30 + i,
            "agents": [agent("ego", 1, 100, 25, 25), agent("side", side, 100 + dx, 25, 25),
                       agent("far", side, 300, 25)],
            "maneuvers": [{"agent": "ego", "style": "sudden_lane_change", "start_frame": start,
                           "end_frame": start + LANE_CHANGE_FRAMES, "direction": direction}]}


def weaving(i, dx, start, moves):
    return {"name": f"acc_w_{i}", "lanes": 3, "duration": 25, "seed": 40 + i,
            "agents": [agent("ego", 1, 100, 25, 25), agent("side", 0, 100 + dx, 25, 25)],
            "maneuvers": [{"agent": "ego", "style": "weaving", "start_frame": start,
                           "end_frame": start + moves * LANE_CHANGE_FRAMES, "direction": 1}]}


def traffic(name, seed, aggressive=0, count=10, duration=60):
    """Three-lane traffic with `count` agents; the first `aggressive` are aggressive."""
    rng = random.Random(seed)
    lanes = [[], [], []]
    for k in range(count):
        lanes[k % 3].append(k)
    agents = []
    for lane, members in enumerate(lanes):
        pos = 50 + rng.uniform(0, 30)
        for k in members:
            cls = "aggressive" if k < aggressive else "conservative"
            agents.append(agent(f"v{k}", lane, pos, 25, None, cls, True))
            pos += 45 + rng.uniform(0, 40)
    # Aggressive agents start at the back of the pack.
    for a in agents:
        if a["class"] == "aggressive":
            a["position"] = 5.0
    return {"name": name, "lanes": 3, "duration": duration, "seed": seed,
            "road_length": 5000, "agents": agents, "maneuvers": []}


def main():
    cli = sys.argv[1]
    for i, args in enumerate([(50, 60, 20), (60, 50, 18), (70, 60, 20), (55, 70, 22),
                              (65, 60, 19)]):
        write("acceptance", overspeeding(cli, i, *args))
    for i, args in enumerate([(40, 20, 30), (50, 18, 28), (45, 21, 32), (60, 19, 30),
                              (55, 20, 35)]):
        write("acceptance", overtaking(cli, i, *args))
    for i, args in enumerate([(-3, 60, 1), (2, 80, 1), (0, 70, -1), (4, 90, -1), (-1, 75, 1)]):
        write("acceptance", sudden_lane_change(i, *args))
    for i, args in enumerate([(2, 50, 4), (-3, 60, 4), (0, 40, 5), (4, 70, 3), (-1, 55, 4)]):
        write("acceptance", weaving(i, *args))
    for seed in range(100, 105):
        write("calibration", traffic(f"calibration_{seed}", seed))
    for seed in range(200, 205):
        write("holdout", traffic(f"holdout_{seed}", seed))
    write("mixed", traffic("mixed", 300, aggressive=1))


if __name__ == "__main__":
    main()
