# Scratch: find MCS threshold defaults that reproduce the qualitative
# Table II/III landscape (criteria 5a/5b/5c/6).
import math
import time

import numpy as np

from sliceplan.radio import (
    LinkProfile, McsTable, Numerology, PathLossParams, db_to_linear,
)
from sliceplan.radio import _CQI_EFFICIENCIES
from sliceplan.topology import Scenario, build_layout
from sliceplan.traffic import FlowSpec, PacketSizePmf
from sliceplan.planner import plan

num = Numerology()
pl = PathLossParams()
CARRIER, TX, N0 = 4.7e9, 24.0, -174.0

ues = tuple(
    LinkProfile.from_geometry(uid, d, TX, N0, CARRIER, pl, num)
    for uid, d in [("ue1", 80.0), ("ue2", 200.0), ("ue3", 350.0)]
)
pmf = PacketSizePmf(((512, 1.0),))
lam = [2000, 3000, 1500, 5000, 6600, 4500, 9000, 11000, 8000]
wobj = [0.5, 0.5, 1.0, 0.5, 0.5, 1.0, 0.2, 0.2, 0.5]
ueof = ["ue1"] * 3 + ["ue2"] * 3 + ["ue3"] * 3
flows = tuple(
    FlowSpec(f"f{i+1}", ueof[i], float(lam[i]), pmf, wobj[i] * 1e-3, 1e-5)
    for i in range(9)
)


def table_for(lo_db, hi_db):
    interior = np.linspace(lo_db, hi_db, len(_CQI_EFFICIENCIES) - 1)
    bounds = (0.0, *(db_to_linear(x) for x in interior), math.inf)
    return McsTable(bounds, _CQI_EFFICIENCIES)


def check(lo_db, hi_db):
    table = table_for(lo_db, hi_db)
    print(f"=== thresholds {lo_db}..{hi_db} dB ===")
    results = {}
    t0 = time.perf_counter()
    for rb in (65, 135):
        scen = Scenario.build(ues, flows, rb, num, table)
        for opt in ("DO0", "DO1", "DO2", "DO3", "DO4"):
            res = plan(scen, build_layout(scen, opt))
            ev = res.evaluated
            worst = max(ev.per_flow_w_norm,
                        key=lambda f: (math.inf if ev.per_flow_w_norm[f] is None
                                       else ev.per_flow_w_norm[f]))
            results[(opt, rb)] = (res.status, ev.allocation.total, worst,
                                  ev.per_flow_w_norm)
            fails = sorted(f for f, v in ev.per_flow_w_norm.items()
                           if v is None or v > 1.0)
            print(f"  {opt}@{rb}: {res.status} total={ev.allocation.total} "
                  f"worst={worst} fails={fails}")
    print(f"  ({time.perf_counter()-t0:.0f}s)")
    ok = []
    c5a = all(results[(o, 65)][0] == "INFEASIBLE" and results[(o, 65)][2] in ("f7", "f8")
              for o in ("DO0", "DO1"))
    ok.append(("5a DO0/DO1@65 infeasible worst f7/f8", c5a))
    c5b = results[("DO2", 65)][0] == "FEASIBLE" and results[("DO2", 135)][0] == "FEASIBLE"
    ok.append(("5b DO2 feasible both", c5b))
    c5c = True
    for o in ("DO0", "DO1", "DO2", "DO3", "DO4"):
        st, _, _, norms = results[(o, 135)]
        if st != "FEASIBLE":
            fails = {f for f, v in norms.items() if v is None or v > 1.0}
            if not fails <= {"f4", "f5", "f7", "f8"}:
                c5c = False
    ok.append(("5c all-135 feasible or fails in {f4,f5,f7,f8}", c5c))
    do2_total = results[("DO2", 65)][1]
    c6 = all(results[(o, 65)][1] == 65 for o in ("DO0", "DO1", "DO3", "DO4")) \
        and all(do2_total < results[(o, 65)][1] for o in ("DO0", "DO1", "DO3", "DO4"))
    ok.append(("6 DO2@65 strictly fewer; others exactly 65", c6))
    for label, v in ok:
        print(f"  {'PASS' if v else 'FAIL'}  {label}")
    return all(v for _, v in ok)


import sys
cands = [(-6.0, 28.0), (-6.0, 30.0)] if len(sys.argv) < 2 else [
    (float(sys.argv[1]), float(sys.argv[2]))]
for lo, hi in cands:
    check(lo, hi)
