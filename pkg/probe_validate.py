import time

import numpy as np

t0 = time.monotonic()
from qrdkit.distortion import SymbolwiseObservable, classical_cc_observable
from qrdkit import validate as V

print(f"[import] {time.monotonic() - t0:.2f}s")

# [1] hamming4 n=3 cost breakdown
base = classical_cc_observable(1.0 - np.eye(4))
print("base dims", base.dims, "operator shape", base.operator.shape,
      "dtype", base.operator.dtype, "nvals", len(base.eigenvalues))
t = time.monotonic(); sym = SymbolwiseObservable(base, 3); dense = sym.dense()
print(f"[dense build] {time.monotonic() - t:.2f}s shape {dense.shape} dtype {dense.dtype}")
t = time.monotonic(); full, avg = V._structured_basis(base, 3)
print(f"[kron basis] {time.monotonic() - t:.2f}s")
t = time.monotonic(); resid = dense @ full - full * avg[None, :]
print(f"[gemm resid] {time.monotonic() - t:.2f}s max {np.max(np.abs(resid)):.2e}")
del resid
t = time.monotonic(); w = np.linalg.eigvalsh(dense)
print(f"[eigvalsh 4096] {time.monotonic() - t:.2f}s")
print("multiset gap", np.max(np.abs(np.sort(w) - np.sort(avg))))
del dense, full, w

for name in ("step5", "band", "lemma13", "np_sdp", "properties",
             "smoothing_order", "lemma1"):
    t = time.monotonic()
    res = V.SUITES[name](7)
    dt = time.monotonic() - t
    print(f"[{name}] {res.passed}/{res.total} in {dt:.1f}s "
          + ("" if res.ok else f"FAIL {res.failures[:3]}"))

t = time.monotonic()
res = V.suite_lemma7()
print(f"[lemma7] {res.passed}/{res.total} in {time.monotonic() - t:.1f}s "
      + ("" if res.ok else f"FAIL {res.failures}"))
