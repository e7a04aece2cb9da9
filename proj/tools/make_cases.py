"""Builds the pinned wind cases data/case14_wind.json and data/case118_wind.json
from the pypower IEEE 14- and 118-bus data.

Repo-chosen modifications (the source cases carry no line ratings, reserves
or wind):
  * linear cost c = b + a * Pmax from the quadratic a P^2 + b P; q = 0.1 c;
  * line ratings from a DC power flow of the source dispatch, scaled by
    RATING_FACTOR with a floor, so the economic dispatch is congested;
  * angles in [-0.5, 0.5] rad and dtheta_max = 1.0 so Big-M stays valid on
    open lines;
  * reserves r- = -r+ = RESERVE_SHARE * Pmax on AGC generators;
  * wind farms with xi_min/xi_max = -/+ RHO * nominal;
  * 118-bus: only the twelve lines whose single opening saves most in the
    deterministic model are switchable (SWITCHABLE_118, 0-based).
"""

import json
import os
import sys

import numpy as np
from pypower.api import case14, case118

RHO = 0.1
SWITCHABLE_118 = {59, 71, 72, 81, 82, 91, 127, 158, 164, 165, 168, 173}


def dc_flows(ppc):
    bus = ppc["bus"]
    br = ppc["branch"]
    gen = ppc["gen"]
    ids = {int(b[0]): i for i, b in enumerate(bus)}
    n = len(bus)
    inj = -bus[:, 2].copy()
    for g in gen:
        inj[ids[int(g[0])]] += g[1]
    bvec = 1.0 / br[:, 3]
    a = np.zeros((n, len(br)))
    for e, row in enumerate(br):
        a[ids[int(row[0])], e] = 1.0
        a[ids[int(row[1])], e] = -1.0
    bbus = a @ np.diag(bvec) @ a.T
    ref = next(i for i, b in enumerate(bus) if int(b[1]) == 3)
    keep = [i for i in range(n) if i != ref]
    # Slack absorbs the mismatch of the source dispatch.
    inj[ref] -= inj.sum()
    theta = np.zeros(n)
    theta[keep] = np.linalg.solve(bbus[np.ix_(keep, keep)], inj[keep] / ppc["baseMVA"])
    return bvec * (a.T @ theta) * ppc["baseMVA"], ref


def build(ppc, name, wind, agc, rating_factor, rating_floor, reserve_share,
          switchable=None, notes=""):
    bus, br, gen, cost = ppc["bus"], ppc["branch"], ppc["gen"], ppc["gencost"]
    flows, ref = dc_flows(ppc)
    doc = {
        "name": name,
        "notes": notes,
        "base_mva": float(ppc["baseMVA"]),
        "ref_bus": int(bus[ref, 0]),
        "buses": [
            {"id": int(b[0]), "theta_min": -0.5, "theta_max": 0.5,
             "load": round(float(b[2]), 4)}
            for b in bus
        ],
        "lines": [],
        "gens": [],
        "wind": [],
    }
    for e, row in enumerate(br):
        cap = max(rating_floor, round(rating_factor * abs(flows[e])))
        line = {
            "from": int(row[0]),
            "to": int(row[1]),
            "b": round(1.0 / float(row[3]), 6),
            "f_min": -float(cap),
            "f_max": float(cap),
            "dtheta_max": 1.0,
        }
        if switchable is not None:
            line["switchable"] = e in switchable
        doc["lines"].append(line)
    for k, g in enumerate(gen):
        a, b = float(cost[k, 4]), float(cost[k, 5])
        pmax = float(g[8])
        c = round(b + a * pmax, 4)
        entry = {"bus": int(g[0]), "c": c, "q": round(0.1 * c, 4),
                 "g_min": 0.0, "g_max": pmax}
        if k in agc:
            entry["r_minus"] = -round(reserve_share * pmax, 4)
            entry["r_plus"] = round(reserve_share * pmax, 4)
            entry["agc"] = True
        doc["gens"].append(entry)
    for bus_id, nominal in wind:
        doc["wind"].append({"bus": bus_id, "nominal": nominal,
                            "xi_min": -RHO * nominal, "xi_max": RHO * nominal})
    return doc


def main(out_dir):
    c14 = build(
        case14(), "case14_wind",
        wind=[(3, 20.0), (5, 15.0), (6, 25.0), (10, 10.0), (13, 15.0)],
        agc=[0, 1, 2], rating_factor=0.8, rating_floor=20, reserve_share=0.2,
        notes="IEEE 14-bus with five wind farms; ratings, reserves, q and rho are repo-chosen")
    c118 = build(
        case118(), "case118_wind",
        wind=[(10, 80.0), (26, 60.0), (49, 60.0), (65, 80.0), (100, 60.0)],
        agc=list(range(54)), rating_factor=1.0, rating_floor=60,
        reserve_share=0.2,
        switchable=SWITCHABLE_118,
        notes="IEEE 118-bus with five wind farms; ratings, reserves, q and rho are repo-chosen")
    for doc in (c14, c118):
        path = os.path.join(out_dir, doc["name"] + ".json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
