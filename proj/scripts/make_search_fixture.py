#!/usr/bin/env python3
"""Regenerate the seeded end-to-end search fixture in data/search/.

Usage: make_search_fixture.py path/to/genet

Steps: copy Net1 as the master, plan trials with a fixed seed, fill in
accuracies from a planted linear model, fit, and run the search at each
budget. The latency table is synthetic: per-block latency proportional to a
rough MAC count of the block at its operating point, plus a constant.
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "data" / "search"

PLAN_SEED = 7
SEARCH_SEED = 2026
MASTER_ACCURACY = 0.776
BUDGETS = ["0.34", "0.20", "0.10"]
RESOLUTIONS = [192, 224, 256]
BATCH = 64
WIDTHS = [16, 32, 64, 128, 256, 512, 1024, 2048]

# planted pseudo-gradients per body super-block index
PLANT = {
    1: (0.004, 2e-5),
    2: (0.003, 1.5e-5),
    3: (0.002, 1e-5),
    4: (0.0015, 1e-5),
    5: (0.001, 5e-6),
}

MS_PER_MAC = 8e-11
MS_OVERHEAD = 2e-4


def block_macs(kind, w, r, k, s, res):
    o = res // s
    m = w * r
    if kind == "XX":
        return 2 * w * w * k * k * o * o
    if kind == "BL":
        return (2 * w * m + m * m * k * k) * o * o
    if kind == "DW":
        return (2 * w * m + m * k * k) * o * o
    cin = 3 if s == 2 else w // 4
    return cin * w * k * k * o * o


def fmt(x):
    return repr(float(x)) if x != int(x) else f"{x:.1f}"


def latency_rows(master):
    keys = set()
    blocks = master["superblocks"]
    last = len(blocks) - 1
    for res in RESOLUTIONS:
        cur = res
        for i, b in enumerate(blocks):
            kind = b["type"]
            if i == 0 or i == last:
                kernels, ratios = [b["kernel"]], [b["ratio"]]
            else:
                kernels = [3, 5]
                ratios = {"BL": [0.25, 0.5], "DW": [3.0, 6.0, 9.0]}.get(kind, [1.0])
            for k in kernels:
                for r in ratios:
                    keys.add((kind, r, k, b["stride"], cur))
            cur //= b["stride"]
    rows = []
    for kind, r, k, s, res in sorted(keys):
        for w in WIDTHS:
            ms = MS_PER_MAC * block_macs(kind, w, r, k, s, res) + MS_OVERHEAD
            rows.append(f"{kind},{w},{fmt(r)},{k},{s},{res},{BATCH},{ms:.6g}")
    return rows


def run(genet, *args):
    subprocess.run([str(genet), *map(str, args)], check=True)


def main():
    genet = Path(sys.argv[1]).resolve()
    OUT.mkdir(parents=True, exist_ok=True)
    master_path = OUT / "master.json"
    shutil.copyfile(ROOT / "data" / "structures" / "net01.json", master_path)
    master = json.loads(master_path.read_text())

    table = ["# device: synthetic", "# precision: fp32",
             "block_type,width,ratio,kernel,stride,resolution,batch,latency_ms"]
    (OUT / "latency.csv").write_text("\n".join(table + latency_rows(master)) + "\n")

    run(genet, "--out", OUT / "plan.csv", "plan", master_path, "--seed", PLAN_SEED)
    lines = (OUT / "plan.csv").read_text().splitlines()
    filled = [lines[0]]
    for line in lines[1:]:
        f = line.split(",")
        i, d, c = int(f[0]), int(f[2]), int(f[3])
        base = master["superblocks"][i]
        g1, g2 = PLANT[i]
        acc = MASTER_ACCURACY + g1 * (d - base["depth"]) + g2 * (c - base["width"])
        f[6] = repr(acc)
        filled.append(",".join(f))
    (OUT / "trials.csv").write_text("\n".join(filled) + "\n")

    run(genet, "--out", OUT / "gradients.json", "fit", master_path,
        "--trials", OUT / "trials.csv", "--master-accuracy", MASTER_ACCURACY)
    for budget in BUDGETS:
        run(genet, "--out", OUT / f"report-{budget}.json", "search", master_path,
            "--gradients", OUT / "gradients.json", "--latency-table", OUT / "latency.csv",
            "--budget", budget, "--seed", SEARCH_SEED)


if __name__ == "__main__":
    main()
