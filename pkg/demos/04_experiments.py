"""Run a bundled experiment configuration and write the reports.

Run:  python3 demos/04_experiments.py [out_dir]
Same as:  mortar-bddc solve --config <ex1_conforming.json> --oracle --out out
"""
import sys

from mortar_bddc import load_config, run_experiment
from mortar_bddc.harness import data_path

cfg = load_config(data_path("ex1_conforming.json"))
res = run_experiment(cfg, oracle=True)
for r in res.rows:
    print(f"n={r['n']:3d} {r['scaling']}: Iter={r['Iter']:2d} kappa={r['kappa']:.4f} "
          f"(dense {r['oracle_kappa']:.4f}) pnum={r['pnum']}")
if len(sys.argv) > 1:
    print("reports written to", res.write(sys.argv[1]))
