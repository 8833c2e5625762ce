#!/usr/bin/env python3
"""Writes the shipped structure documents and reference latency tables.

Output is in the canonical form produced by `genet` itself (sorted keys,
two-space indent, trailing newline), so every file round-trips byte for byte.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
STRUCTURES = ROOT / "data" / "structures"
REFERENCE = ROOT / "data" / "reference"

TYPE = {"C": "CONV", "X": "XX", "B": "BL", "D": "DW"}


def block(t, d, c, s, k, r):
    return {"type": t, "depth": d, "width": c, "stride": s, "kernel": k, "ratio": float(r)}


def write(name, resolution, blocks, filename):
    doc = {"name": name, "resolution": resolution, "num_classes": 1000, "superblocks": blocks}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    (STRUCTURES / filename).write_text(text)


GENETS = {
    # name: (resolution, rows of type, d, c, s, k, r)
    "light": (192, [("CONV", 1, 13, 2, 3, 1), ("XX", 1, 48, 2, 3, 1), ("XX", 3, 48, 2, 3, 1),
                    ("BL", 7, 384, 2, 3, 0.25), ("DW", 2, 560, 2, 3, 3), ("DW", 1, 256, 1, 3, 3),
                    ("CONV", 1, 1920, 1, 1, 1)]),
    "normal": (192, [("CONV", 1, 32, 2, 3, 1), ("XX", 1, 128, 2, 3, 1), ("XX", 2, 192, 2, 3, 1),
                     ("BL", 6, 640, 2, 3, 0.25), ("DW", 4, 640, 2, 3, 3), ("DW", 1, 640, 1, 3, 3),
                     ("CONV", 1, 2560, 1, 1, 1)]),
    "large": (256, [("CONV", 1, 32, 2, 3, 1), ("XX", 1, 128, 2, 3, 1), ("XX", 2, 192, 2, 3, 1),
                    ("BL", 6, 640, 2, 3, 0.25), ("DW", 5, 640, 2, 3, 3), ("DW", 4, 640, 1, 3, 3),
                    ("CONV", 1, 2560, 1, 1, 1)]),
}

PROFILINGNET = [("CONV", 1, 16, 2, 3, 1), ("XX", 3, 32, 2, 3, 1), ("XX", 3, 48, 2, 3, 1),
                ("XX", 3, 72, 2, 3, 1), ("XX", 6, 128, 1, 3, 1), ("XX", 6, 256, 2, 3, 1),
                ("XX", 8, 512, 1, 3, 1), ("XX", 8, 1024, 1, 3, 1), ("XX", 4, 2048, 1, 3, 1),
                ("CONV", 1, 4096, 1, 1, 1)]

# model, block types, depths, widths, strides
MANUAL = """
Net1  C,X,X,B,D,D,C 1,1,4,8,4,2,1 32,64,96,512,320,320,1280 2,2,2,2,2,1,1
Net2  C,X,X,D,D,D,C 1,1,4,8,4,2,1 32,48,64,160,320,320,1280 2,2,2,2,2,1,1
Net3  C,X,X,D,D,C 1,1,4,8,6,1 32,48,64,160,320,1280 2,2,2,2,2,1
Net4  C,X,B,B,D,C 1,1,4,8,6,1 32,64,256,512,320,1280 2,2,2,2,2,1
Net5  C,X,B,D,D,D,C 1,1,4,8,4,2,1 32,32,256,144,288,288,1280 2,2,2,2,2,1,1
Net6  C,X,X,B,D,C 1,1,4,8,6,1 32,64,96,512,320,1280 2,2,2,2,2,1
Net7  C,X,B,D,D,C 1,1,4,8,6,1 32,32,256,144,288,1280 2,2,2,2,2,1
Net8  C,D,D,D,D,D,C 1,1,4,8,4,2,1 32,24,64,128,256,256,1280 2,2,2,2,2,1,1
Net9  C,X,X,D,D,D,C 1,1,4,4,4,4,1 32,48,64,160,160,320,1280 2,2,2,2,1,2,1
Net10 C,D,D,D,D,C 1,1,4,8,6,1 32,24,64,128,256,1280 2,2,2,2,2,1
Net11 C,X,X,D,D,D,C 1,1,4,6,2,4,1 32,48,64,160,160,320,1280 2,2,2,2,1,2,1
Net12 C,X,X,B,B,D,C 1,1,4,6,2,4,1 32,64,96,512,512,320,1280 2,2,2,2,1,2,1
Net13 C,X,X,B,B,D,C 1,1,4,4,4,4,1 32,64,96,512,512,320,1280 2,2,2,2,1,2,1
Net14 C,X,B,D,D,D,C 1,1,4,6,2,4,1 32,32,256,144,144,288,1280 2,2,2,2,1,2,1
Net15 C,X,X,B,B,B,C 1,1,4,8,4,2,1 32,64,96,512,1024,1024,1280 2,2,2,2,2,1,1
Net16 C,D,D,D,D,D,C 1,1,4,6,2,4,1 32,24,64,128,128,256,1280 2,2,2,2,1,2,1
Net17 C,X,B,B,B,C 1,1,4,8,6,1 32,64,256,512,1024,1280 2,2,2,2,2,1
Net18 C,X,X,B,B,B,C 1,1,4,6,2,4,1 32,64,96,512,512,1024,1280 2,2,2,2,1,2,1
Net19 C,X,X,B,B,C 1,1,4,8,6,1 32,64,96,512,1024,1280 2,2,2,2,2,1
Net20 C,X,X,B,B,B,C 1,1,4,4,4,4,1 32,64,96,512,512,1024,1280 2,2,2,2,1,2,1
"""

# Manual nets: stem k=3, head k=1, everything else k=5; BL r=1/4, DW r=6.
RATIO = {"C": 1, "X": 1, "B": 0.25, "D": 6}


def manual_nets():
    for line in MANUAL.strip().splitlines():
        name, types, depths, widths, strides = line.split()
        types = types.split(",")
        n = len(types)
        rows = []
        for i, (t, d, c, s) in enumerate(zip(types, depths.split(","), widths.split(","), strides.split(","))):
            k = 3 if i == 0 else (1 if i == n - 1 else 5)
            rows.append(block(TYPE[t], int(d), int(c), int(s), k, RATIO[t]))
        yield name, rows


LATENCY_COLUMNS = {
    "v100-fp16": [1, 2, 4, 8, 16, 32, 64],
    "t4-trt-fp16": [1, 2, 4, 8, 16, 32],
    "t4-trt-int8": [1, 2, 4, 8, 16, 32],
}


def write_reference(src, name):
    rows = ["model,acc,batch,latency_ms"]
    batches = LATENCY_COLUMNS[name]
    for line in (ROOT / "scripts" / src).read_text().strip().splitlines():
        parts = line.split()
        model, acc, values = parts[0], parts[1].rstrip("%"), parts[2:]
        assert len(values) == len(batches), line
        for batch, value in zip(batches, values):
            rows.append(f"{model},{acc},{batch},{value}")
    (REFERENCE / f"{name}.csv").write_text("\n".join(rows) + "\n")


def main():
    STRUCTURES.mkdir(parents=True, exist_ok=True)
    REFERENCE.mkdir(parents=True, exist_ok=True)
    for variant, (res, rows) in GENETS.items():
        write(f"GENet-{variant}", res, [block(*r) for r in rows], f"genet-{variant}.json")
    write("ProfilingNet-132", 224, [block(*r) for r in PROFILINGNET], "profilingnet-132.json")
    for name, rows in manual_nets():
        write(name, 224, rows, f"net{int(name[3:]):02d}.json")
    for name in LATENCY_COLUMNS:
        write_reference(f"{name}.txt", name)


if __name__ == "__main__":
    main()
