# Scratch: check the Table-I style scenario against the qualitative criteria.
import time

from sliceplan.radio import LinkProfile, Numerology, PathLossParams, default_mcs_table
from sliceplan.topology import Scenario, build_layout
from sliceplan.traffic import FlowSpec, PacketSizePmf
from sliceplan.planner import plan

num = Numerology()
table = default_mcs_table()
pl = PathLossParams()
CARRIER = 4.7e9
TX = 24.0
N0 = -174.0

ues = tuple(
    LinkProfile.from_geometry(uid, d, TX, N0, CARRIER, pl, num)
    for uid, d in [("ue1", 80.0), ("ue2", 200.0), ("ue3", 350.0)]
)
for u in ues:
    print(u.ue_id, "gain_dB=%.2f" % (-10 * __import__('math').log10(u.path_loss_gain)),
          "snr_dB=%.2f" % (10 * __import__('math').log10(u.avg_snr_linear)))

pmf = PacketSizePmf(((512, 1.0),))
lam = [2000, 3000, 1500, 5000, 6600, 4500, 9000, 11000, 8000]
wobj = [0.5, 0.5, 1.0, 0.5, 0.5, 1.0, 0.2, 0.2, 0.5]
ueof = ["ue1"] * 3 + ["ue2"] * 3 + ["ue3"] * 3
EPS = 1e-5

flows = tuple(
    FlowSpec(f"f{i+1}", ueof[i], float(lam[i]), pmf, wobj[i] * 1e-3, EPS)
    for i in range(9)
)


def run(option, rb):
    scen = Scenario.build(ues, flows, rb, num, table)
    layout = build_layout(scen, option)
    t0 = time.perf_counter()
    res = plan(scen, layout)
    dt = time.perf_counter() - t0
    ev = res.evaluated
    norms = {f: (None if v is None else round(v, 3)) for f, v in ev.per_flow_w_norm.items()}
    print(f"{option} rb={rb}: {res.status} total={ev.allocation.total} "
          f"A={res.trace.phase_a_iterations} B={res.trace.phase_b_iterations} "
          f"t={dt:.2f}s")
    print("   norms:", norms)
    print("   alloc:", ev.allocation.per_slice)


for rb in (65, 135):
    for opt in ("DO0", "DO1", "DO2", "DO3", "DO4"):
        run(opt, rb)
