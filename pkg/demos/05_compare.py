"""Resource comparison over the two standard sweeps.

Equivalent CLI calls::

    ghzpurify compare                       # delta = 0.2, n = 3..20
    ghzpurify compare --n 10                # n = 10, 30 deltas in [0.01, 0.9]
"""
from ghzpurify.cli import RunConfig, render_records, run_compare

import numpy as np

by_n = run_compare(RunConfig("compare", n_values=list(range(3, 21)), delta_values=[0.2]))
print(render_records(by_n, "csv"))

by_delta = run_compare(RunConfig("compare", n_values=[10], delta_values=list(np.geomspace(0.01, 0.9, 30))))
for r in by_delta:
    ratio = f"{r.log2_ratio:7.2f}" if r.log2_ratio is not None else "     --"
    print(f"delta={r.delta:.4f}  k_bi={str(r.k_bipartite):>4}  k_multi={str(r.k_multipartite):>4}  "
          f"log2 ratio {ratio}  {r.status}")
