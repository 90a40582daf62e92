"""
Three volatility shapes: series against Monte Carlo and Riccati
===============================================================

Zero drift, r = 0.5 at t = 0.8, maturity 1, and volatility either decaying
linearly, decaying exponentially or following sin(s). The table shows the
series price by number of terms next to both references. Raise ``paths`` to
10**6 for the desk-scale run (about half a minute per shape).
"""

from ecirbond import parse_config
from ecirbond.experiments import EXPERIMENT_COLUMNS, run_experiment_s4

cfg = parse_config("""
model.k = 0
model.sigma = const:1       # replaced by each preset below
model.r0 = 0.5
window.t = 0.8
window.T = 1
series.N = 5
mc.paths = 100000
mc.steps = 400
""")

rows = run_experiment_s4(cfg)
keep = ["preset", "terms", "price_series", "price_mc", "stderr_mc", "abs_diff_riccati"]
idx = [EXPERIMENT_COLUMNS.index(c) for c in keep]
print("".join(f"{c:>18}" for c in keep))
for row in rows:
    cells = [row[idx[0]], row[idx[1]]] + [f"{float(row[i]):.10g}" for i in idx[2:]]
    print("".join(f"{c:>18}" for c in cells))
