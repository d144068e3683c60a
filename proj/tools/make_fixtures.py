#!/usr/bin/env python3
"""Regenerates the committed fixture files.

    python3 tools/make_fixtures.py [repo_root]

Writes data/chains/wam_bh280_fixture.json and the session/annotation
fixtures under tests/fixtures/. Output is deterministic.
"""
import json
import math
import os
import sys

ROOT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..")


def sph(c, r):
    return {"center": list(c), "radius": r}


def link(name, parent, xyz=(0, 0, 0), rpy=(0, 0, 0), joint=None, finger=-1, spheres=()):
    d = {"name": name, "parent": parent, "origin": {"xyz": list(xyz), "rpy": list(rpy)}, "finger": finger,
         "spheres": list(spheres)}
    if joint:
        d["joint"] = joint
    return d


def arm(i, axis):
    return {"source": "arm", "index": i, "axis": list(axis), "scale": 1.0}


def chain():
    links = [
        link("base", None, spheres=[sph((0, 0, 0.12), 0.10), sph((0, 0, 0.26), 0.08)]),
        link("shoulder_yaw", "base", (0, 0, 0.346), joint=arm(0, (0, 0, 1))),
        link("shoulder_pitch", "shoulder_yaw", joint=arm(1, (0, 1, 0)), spheres=[sph((0, 0, 0), 0.09)]),
        link("upper_arm", "shoulder_pitch", joint=arm(2, (0, 0, 1)),
             spheres=[sph((0, 0, z), 0.06) for z in (0.12, 0.24, 0.36, 0.48)]),
        link("elbow", "upper_arm", (0.045, 0, 0.55), joint=arm(3, (0, 1, 0)), spheres=[sph((0, 0, 0), 0.06)]),
        link("forearm", "elbow", (-0.045, 0, 0.3), joint=arm(4, (0, 0, 1)),
             spheres=[sph((0, 0, z), 0.045) for z in (-0.2, -0.1)]),
        link("wrist_pitch", "forearm", joint=arm(5, (0, 1, 0)), spheres=[sph((0, 0, 0), 0.045)]),
        link("wrist_roll", "wrist_pitch", (0, 0, 0.06), joint=arm(6, (0, 0, 1))),
        # Palm frame: z is the approach direction, the palm face sits at z = 0.065.
        link("palm", "wrist_roll", (0, 0, 0.06), finger=0,
             spheres=[sph((0, 0, 0.03), 0.035)] + [sph((sx * 0.025, sy * 0.025, 0.03), 0.03)
                                                   for sx in (-1, 1) for sy in (-1, 1)]),
    ]
    # Knuckle frames: x points toward the palm centre, y is the flexion axis.
    fingers = [
        (1, (0.05, 0.03, 0.065), math.pi, 0.5),
        (2, (0.05, -0.03, 0.065), math.pi, -0.5),
        (3, (-0.05, 0.0, 0.065), 0.0, None),
    ]
    tips = []
    for k, xyz, yaw, spread in fingers:
        joint = {"source": "spread", "index": 0, "axis": [0, 0, 1], "scale": spread} if spread else None
        links.append(link(f"f{k}_knuckle", "palm", xyz, (0, 0, yaw), joint=joint, finger=0))
        links.append(link(f"f{k}_proximal", f"f{k}_knuckle",
                          joint={"source": "flexion", "index": k - 1, "axis": [0, 1, 0], "scale": 1.0}, finger=k,
                          spheres=[sph((0, 0, z), 0.012) for z in (0.015, 0.035, 0.055)]))
        links.append(link(f"f{k}_distal", f"f{k}_proximal", (0, 0, 0.07),
                          joint={"source": "distal", "index": k - 1, "axis": [0, 1, 0], "scale": 1.0}, finger=k,
                          spheres=[sph((0, 0, z), 0.01) for z in (0.012, 0.03)]))
        links.append(link(f"f{k}_tip", f"f{k}_distal", (0, 0, 0.05), finger=k, spheres=[sph((0, 0, 0), 0.009)]))
        tips.append(f"f{k}_tip")
    return {
        "schema": "graspcap-chain",
        "version": 1,
        "description": "Representative 7-DOF arm with a three-finger hand; dimensions are illustrative, not calibrated.",
        "coupling_ratio": 0.424,
        "limits": {
            "lower": [-2.6, -2.0, -2.8, -0.9, -4.76, -1.6, -3.0, 0.0, 0.0, 0.0, 0.0],
            "upper": [2.6, 2.0, 2.8, 3.1, 1.24, 1.6, 3.0, math.pi, 2.44, 2.44, 2.44],
        },
        "palm": "palm",
        "fingertips": tips,
        "links": links,
    }


IDENTITY = {"m": [1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0], "scale": 1.0}


class Store:
    def __init__(self, sid, participant):
        self.lines = [{"kind": "header", "schema": "graspcap-session", "version": 1},
                      {"kind": "session", "id": sid, "participant": participant}]
        self.grasps, self.ranges, self.trials = [], [], []
        self.n = 0

    def grasp(self, obj, task, label):
        self.n += 1
        gid = f"g{self.n:04d}"
        self.grasps.append({"kind": "grasp", "id": gid, "object": obj, "task": task, "label": label,
                            "hand": "robot", "joints": [0.0] * 11, "timestamp_s": 0.0,
                            "object_pose_in_palm": IDENTITY, "contacts": [], "max_penetration": 0.0,
                            "warnings": []})
        return gid

    def trial(self, participant, obj, task, phase, grasps, ranges=()):
        self.trials.append({"kind": "trial", "id": f"t{len(self.trials) + 1:03d}", "participant": participant,
                            "object": obj, "task": task, "phase": phase, "hand": "robot", "grasps": list(grasps),
                            "ranges": list(ranges), "annotations": []})

    def write(self, path):
        with open(path, "w") as f:
            for rec in self.lines + self.grasps + self.ranges + self.trials:
                f.write(json.dumps(rec, separators=(",", ":")) + "\n")


def add_pair(store, participant, obj, good, bad):
    """One participant-object pair: good and bad grasps split over both tasks."""
    for phase, n in (("good", good), ("bad", bad)):
        if n == 0:
            continue
        first = (n + 1) // 2
        for task, count in (("pick-up", first), ("natural", n - first)):
            if count:
                ids = [store.grasp(obj, task, phase) for _ in range(count)]
                store.trial(participant, obj, task, phase, ids)


OBJECTS = [
    ("Water Pitcher", 11, 1), ("Spray Bottle", 14, 22), ("Margarita Glass", 14, 14), ("Cereal Box", 12, 18),
    ("Cracker Box", 15, 7), ("Television Remote", 11, 14), ("Toy Plane", 13, 19), ("Food Clip", 10, 3),
    ("Soap Dispenser", 10, 5), ("Foam Cylinder", 16, 15), ("Bison Plush Toy", 5, 0), ("Plush Ball", 19, 10),
    ("Thunder Stick", 10, 0), ("Sock Doll", 16, 15), ("Decorative Cord", 5, 6), ("Tape Roll", 11, 4),
]


def objects_store():
    # 16 objects, 17 participant-object pairs: the Spray Bottle was covered by two participants.
    s = Store("objects-table", "p01")
    for i, (obj, good, bad) in enumerate(OBJECTS):
        participant = f"p{i % 13 + 1:02d}"
        if obj == "Spray Bottle":
            add_pair(s, participant, obj, 7, 11)
            add_pair(s, "p13", obj, good - 7, bad - 11)
        else:
            add_pair(s, participant, obj, good, bad)
    return s


# Per participant: objects covered and per-object means (good, bad).
PARTICIPANTS = [
    (8, 4, 0), (4, 6.25, 7.5), (4, 3.25, 4), (4, 4.5, 5.75), (5, 4.8, 3.2), (3, 7, 0), (4, 3, 3.75),
    (4, 3.5, 4.75), (4, 3.75, 4.5), (2, 2.5, 1.5), (2, 2.5, 2), (3, 17 / 3, 2), (3, 8, 0),
]


def participants_store():
    s = Store("participants-table", "p01")
    for p, (n, g, b) in enumerate(PARTICIPANTS):
        good, bad = round(g * n), round(b * n)
        participant = f"p{p + 1:02d}"
        # Spread the participant's totals over n objects.
        for k in range(n):
            obj = OBJECTS[(p + k) % len(OBJECTS)][0]
            gk = good // n + (1 if k < good % n else 0)
            bk = bad // n + (1 if k < bad % n else 0)
            add_pair(s, participant, obj, gk, bk)
    return s


def census_store():
    # 294 trial grasps; the first 179 anchor a range with one or two extremes.
    s = Store("census", "p01")
    with_extremes, total = 179, 294
    for i in range(total):
        obj = OBJECTS[i % len(OBJECTS)][0]
        phase = "good" if i % 3 else "bad"
        task = "pick-up" if i % 2 else "natural"
        gid = s.grasp(obj, task, phase)
        ranges = []
        if i < with_extremes:
            extremes = [s.grasp(obj, task, phase) for _ in range(1 + i % 2)]
            rid = f"r{i + 1:04d}"
            s.ranges.append({"kind": "range", "id": rid, "original": gid, "extremes": extremes, "symmetry": None,
                             "notes": ""})
            ranges.append(rid)
        s.trial(f"p{i % 13 + 1:02d}", obj, task, phase, [gid], ranges)
    return s


ANNOTATIONS = """# capture annotations: <seconds> <KIND> <message>
0.000 NOTE session start
2.000 NOTE beep heard
12.500 GRASP_SET power grasp around the handle
14.250 RANGE_POINT first extreme
16.125 RANGE_POINT second extreme

31.000 TASK_CHANGE natural task: pour
45.750 GRASP_SET pinch at the rim
"""

MALFORMED = """0.000 NOTE start
1.000 NOTE a
2.000 NOTE b
3.000 GRASP_SET c
4.000 RANGE_POINT d
5.000 NOTE e
6.5s NOTE bad timestamp on line seven
"""


def main():
    chain_path = os.path.join(ROOT, "data", "chains", "wam_bh280_fixture.json")
    os.makedirs(os.path.dirname(chain_path), exist_ok=True)
    with open(chain_path, "w") as f:
        json.dump(chain(), f, indent=1)
        f.write("\n")
    fx = os.path.join(ROOT, "tests", "fixtures")
    os.makedirs(fx, exist_ok=True)
    objects_store().write(os.path.join(fx, "objects_table.jsonl"))
    participants_store().write(os.path.join(fx, "participants_table.jsonl"))
    census_store().write(os.path.join(fx, "census.jsonl"))
    with open(os.path.join(fx, "annotations.txt"), "w") as f:
        f.write(ANNOTATIONS)
    with open(os.path.join(fx, "annotations_malformed.txt"), "w") as f:
        f.write(MALFORMED)


if __name__ == "__main__":
    main()
