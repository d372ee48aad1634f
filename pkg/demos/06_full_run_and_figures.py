"""End-to-end: a small sweep across policies, CSV artifacts, and figures.

Writes runs/demo/summary.csv + sweep.csv, prints the final-window table, and
renders the figures if the plotting frontend has been built
(cd frontend && npm run build).
"""

import shutil
import subprocess
from pathlib import Path

from slicesim import POLICIES, SimConfig, sweep

OUT = Path(__file__).resolve().parent.parent / "runs" / "demo"

cfg = SimConfig().desk_scale()
result = sweep(cfg, "lambda", [6.0, 8.0, 10.0], POLICIES, seeds=[1],
               horizon=3000, out_dir=str(OUT), window=1000)

print("summary rows:", len(result.rows), "->", result.summary_path)
print(Path(result.table_path).read_text())
print("(3000 slots is a warm-up at best; the learner needs ~2e5 slots "
      "to pull ahead)")

cli = Path(__file__).resolve().parent.parent / "frontend" / "dist" / "src" / "cli.js"
if cli.exists() and shutil.which("node"):
    for kind, name in (("sweep-lambda", "fig_lambda.svg"), ("curve", "fig_curve.svg")):
        out = OUT / name
        subprocess.run(["node", str(cli), str(result.summary_path),
                        "--kind", kind, "--out", str(out)], check=True)
        print("rendered", out)
else:
    print("frontend not built; skipping figures (cd frontend && npm run build)")
