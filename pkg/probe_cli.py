import contextlib
import io
import json
import os
import time

import numpy as np

from qrdkit.cli import run
from qrdkit.serialize import density_to_dict, save_json, channel_to_dict
from qrdkit.states import (DensityOperator, depolarizing_channel,
                           maximally_mixed, system)

os.makedirs("/tmp/cliprobe", exist_ok=True)
save_json(density_to_dict(DensityOperator([[1, 0], [0, 0]], system("A", 2))),
          "/tmp/cliprobe/ket0.json")
save_json(density_to_dict(maximally_mixed(2)), "/tmp/cliprobe/mixed.json")
from qrdkit.states import SystemDims
save_json(density_to_dict(DensityOperator(np.eye(4) / 4,
                                          SystemDims(("A", "B"), (2, 2)))),
          "/tmp/cliprobe/joint.json")
save_json(channel_to_dict(depolarizing_channel(0.2)), "/tmp/cliprobe/depol.json")


def call(argv):
    out = io.StringIO()
    err = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run(argv)
    return code, out.getvalue(), err.getvalue()


# [1] entropy dmax oracle
code, out, err = call(["entropy", "--op", "dmax", "--rho",
                       "/tmp/cliprobe/ket0.json", "--sigma",
                       "/tmp/cliprobe/mixed.json"])
payload = json.loads(out)
print("[1]", code, payload["value"], payload["units"])
assert code == 0 and abs(payload["value"] - 1.0) < 1e-12

# [2] entropy smooth_dmax / hmin / imax / beta
for op, extra in (("smooth_dmax", ["--eps", "0.1"]),
                  ("beta", ["--eps", "0.3", "--method", "sdp"]),
                  ("hmin", []), ("h0", []), ("imax", ["--eps", "0.0"])):
    rho_path = ("/tmp/cliprobe/joint.json" if op == "imax"
                else "/tmp/cliprobe/mixed.json")
    code, out, err = call(["entropy", "--op", op, "--rho", rho_path,
                           "--sigma", "/tmp/cliprobe/mixed.json"] + extra)
    print("[2]", op, code, json.loads(out).get("value"), err.strip()[:60])
    assert code == 0, (op, err)

# [3] usage errors -> 1
for argv in (["entropy", "--op", "dh", "--rho", "/tmp/cliprobe/ket0.json"],
             ["entropy", "--op", "dmax", "--rho", "/tmp/cliprobe/ket0.json"],
             ["nope"], [], ["entropy", "--op", "dmax", "--rho", "missing.json",
                            "--sigma", "/tmp/cliprobe/mixed.json"],
             ["isotropic", "--n", "x", "--D", "0.25", "--eps", "0.01"]):
    code, out, err = call(argv)
    print("[3]", argv[:2], code, err.strip()[:72])
    assert code == 1, argv

# [4] isotropic stdout + file byte identity
code, out, err = call(["isotropic", "--n", "8", "--D", "0.25",
                       "--eps", "0.01"])
print("[4:stdout]", code)
print(out)
assert code == 0 and "0.4919" in out

for _ in range(2):
    code, out, err = call(["isotropic", "--n", "4,8", "--D", "0.25",
                           "--eps", "0.01", "--out", "/tmp/cliprobe/iso.csv"])
    assert code == 0
    with open("/tmp/cliprobe/iso.csv", "rb") as f:
        data = f.read()
    print("[4:file]", len(data), "manifest exists",
          os.path.exists("/tmp/cliprobe/iso.csv.manifest.json"))
with open("/tmp/cliprobe/iso.csv") as f:
    print(f.read())

# [5] bounds: each name
t = time.monotonic()
code, out, err = call(["bounds", "--bound", "ea_qrd", "--D", "0.25"])
print("[5:ea_qrd]", code, f"{time.monotonic()-t:.1f}s",
      json.loads(out)["result"]["rate_bits"])
assert code == 0

code, out, err = call(["bounds", "--bound", "converse_alt", "--D", "1.0",
                       "--eps", "0.1", "--csv", "/tmp/cliprobe/bound.csv"])
print("[5:converse_alt]", code, json.loads(out)["result"]["value"])
assert code == 0
with open("/tmp/cliprobe/bound.csv") as f:
    print(f.read())

code, out, err = call(["bounds", "--bound", "classical_kv", "--D", "0.25",
                       "--eps", "0.01"])
print("[5:classical_kv]", code, json.loads(out)["result"]["value"])
assert code == 0

for name in ("converse_simple_inner", "achievability_embezzling",
             "achievability_mes"):
    argv = ["bounds", "--bound", name, "--D", "1.0", "--eps", "0.1",
            "--channel", "/tmp/cliprobe/depol.json"]
    if name == "converse_simple_inner":
        argv += ["--eps-prime", "0.25"]
    code, out, err = call(argv)
    print("[5]", name, code,
          json.loads(out)["result"]["value"] if code == 0 else err[:100])
    assert code == 0, (name, err)

code, out, err = call(["bounds", "--bound", "iid_converse", "--D", "0.25",
                       "--eps", "0.01", "--eps-prime", "0.25", "--n", "8"])
print("[5:iid]", code, json.loads(out)["result"]["value"])
assert code == 0

# missing channel -> 1
code, out, err = call(["bounds", "--bound", "achievability_mes", "--D", "1.0",
                       "--eps", "0.1"])
print("[5:missing-channel]", code, err.strip())
assert code == 1

# [6] simulate: flags only, csv + histogram, determinism
argv = ["simulate", "--n", "4", "--M", "16", "--D", "0.25", "--trials", "400",
        "--seed", "3", "--csv", "/tmp/cliprobe/sim.csv", "--histogram",
        "/tmp/cliprobe/hist.csv"]
code1, out1, err1 = call(argv)
code2, out2, err2 = call(argv)
print("[6]", code1, "stdout identical", out1 == out2)
assert code1 == code2 == 0 and out1 == out2
rep = json.loads(out1)["report"]
print("  excess", rep["empirical_excess"], "target", rep["target"])
with open("/tmp/cliprobe/hist.csv") as f:
    print(f.read())
print(open("/tmp/cliprobe/sim.csv").read())
print(open("/tmp/cliprobe/sim.csv.manifest.json").read())

# config + override
save_json({"n": 4, "M": 16, "D": 0.25, "trials": 100, "seed": 9},
          "/tmp/cliprobe/simcfg.json")
code, out, err = call(["simulate", "--config", "/tmp/cliprobe/simcfg.json",
                       "--trials", "50"])
j = json.loads(out)
print("[6:config]", code, j["config"]["trials"], j["report"]["trials"])
assert code == 0 and j["report"]["trials"] == 50

# bad config field
save_json({"n": 4, "M": 16, "D": 0.25, "trials": 100, "bogus": 1},
          "/tmp/cliprobe/simbad.json")
code, out, err = call(["simulate", "--config", "/tmp/cliprobe/simbad.json"])
print("[6:bad-config]", code, err.strip())
assert code == 1

# [7] validate fast suites
for suite in ("band", "step5"):
    code, out, err = call(["validate", "--suite", suite, "--seed", "7"])
    print("[7]", suite, code, out.strip())
    assert code == 0

print("ALL CLI PROBES PASS")
