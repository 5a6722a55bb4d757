"""Regenerate src/spotdiff/data/catalog.yaml.

The catalog is meant to be edited by hand afterwards; this script only
produces the initial inventory (251 assets over the leaf categories).
"""
from __future__ import annotations

import random
from pathlib import Path

import yaml

# leaf: (width, depth, height, colour pool, material pool)
LEAVES = {
    "fridge": (1.4, 1.3, 3.6, "white gray black", "metal plastic"),
    "television": (1.6, 0.4, 1.1, "black gray white", "plastic metal"),
    "floor lamp": (0.7, 0.7, 3.2, "white black brown gray", "metal fabric wooden"),
    "washing machine": (1.2, 1.2, 1.8, "white gray", "metal plastic"),
    "coffee machine": (0.5, 0.4, 0.7, "black gray red white", "metal plastic"),
    "desk lamp": (0.4, 0.4, 0.9, "white black green yellow", "metal plastic"),
    "chair": (0.9, 0.9, 1.8, "brown black white gray", "wooden metal plastic leather"),
    "bench": (2.4, 0.8, 0.9, "brown gray green", "wooden metal"),
    "sofa": (3.6, 1.6, 1.6, "gray blue brown red", "fabric leather"),
    "nightstand": (1.0, 0.9, 1.1, "white brown black", "wooden metal"),
    "baby bed": (2.4, 1.3, 1.8, "white brown blue", "wooden plastic"),
    "cabinet": (1.6, 0.8, 3.0, "white brown gray", "wooden metal"),
    "carpet": (4.6, 3.4, 0.05, "red gray blue green brown", "fabric"),
    "cloth tree": (0.8, 0.8, 3.4, "brown black white", "wooden metal"),
    "bed": (4.0, 3.0, 1.0, "white gray blue brown", "wooden fabric"),
    "dining table": (3.2, 1.8, 1.5, "brown white black", "wooden glass metal"),
    "tea table": (2.0, 1.2, 0.9, "brown white black", "wooden glass"),
    "study table": (2.6, 1.3, 1.5, "brown white gray", "wooden metal"),
    "teddy bear": (0.5, 0.4, 0.6, "brown white yellow", "fabric"),
    "elephant toy": (0.5, 0.4, 0.5, "gray blue", "plastic fabric"),
    "bunny toy": (0.4, 0.3, 0.5, "white yellow", "fabric plastic"),
    "giraffe toy": (0.4, 0.3, 0.8, "yellow brown", "plastic wooden"),
    "car model": (0.5, 0.3, 0.2, "red blue black yellow", "metal plastic"),
    "airplane model": (0.7, 0.6, 0.2, "white gray blue", "metal plastic"),
    "bike model": (0.5, 0.2, 0.3, "red black green", "metal plastic"),
    "bus model": (0.6, 0.3, 0.3, "yellow red green", "metal plastic"),
    "apple": (0.2, 0.2, 0.2, "red green yellow", "rubber plastic"),
    "banana": (0.3, 0.2, 0.1, "yellow green", "rubber plastic"),
    "watermelon": (0.5, 0.5, 0.4, "green", "rubber plastic"),
    "cola": (0.2, 0.2, 0.4, "red black", "plastic metal glass"),
    "milk": (0.2, 0.2, 0.5, "white blue", "plastic glass"),
    "tea": (0.2, 0.2, 0.3, "green brown yellow", "ceramic glass"),
    "beer": (0.2, 0.2, 0.5, "brown green yellow", "glass metal"),
    "bread": (0.4, 0.2, 0.2, "brown yellow", "rubber plastic"),
    "pizza": (0.6, 0.6, 0.1, "yellow red", "rubber plastic"),
    "chicken leg": (0.3, 0.2, 0.1, "brown yellow", "rubber plastic"),
    "chicken nugget": (0.2, 0.2, 0.1, "yellow brown", "rubber plastic"),
    "soccer": (0.4, 0.4, 0.4, "white black", "leather rubber"),
    "basketball": (0.4, 0.4, 0.4, "brown red", "rubber leather"),
    "tennis": (0.2, 0.2, 0.2, "yellow green", "rubber fabric"),
    "bowling pin": (0.2, 0.2, 0.6, "white red", "wooden plastic"),
    "bow": (0.3, 1.2, 0.1, "black brown", "wooden metal"),
    "dumbbell": (0.5, 0.2, 0.2, "black gray blue", "metal rubber"),
    "baseball bat": (1.0, 0.2, 0.2, "brown black", "wooden metal"),
    "archery target": (1.0, 0.3, 1.0, "red yellow white", "fabric plastic"),
    "skateboard": (1.0, 0.3, 0.2, "black red blue", "wooden plastic"),
    "kettle": (0.4, 0.3, 0.4, "white black gray red", "metal ceramic glass"),
    "plate": (0.6, 0.6, 0.05, "white blue gray", "ceramic glass plastic"),
    "cup": (0.2, 0.2, 0.3, "white blue red green", "ceramic glass plastic"),
    "fork": (0.3, 0.1, 0.05, "gray white", "metal plastic"),
    "spoon": (0.3, 0.1, 0.05, "gray white", "metal plastic wooden"),
    "pencil": (0.3, 0.1, 0.05, "yellow red black blue", "wooden plastic"),
    "palette": (0.4, 0.3, 0.05, "white brown", "wooden plastic"),
    "paperbox": (0.5, 0.4, 0.3, "brown white", "plastic"),
    "notebook": (0.4, 0.3, 0.1, "blue red black green", "plastic leather"),
    "laptop": (0.7, 0.5, 0.1, "gray black white", "metal plastic"),
    "desktop": (0.9, 0.4, 0.9, "black gray white", "metal plastic"),
    "mouse": (0.2, 0.2, 0.1, "black white gray", "plastic"),
    "keyboard": (0.8, 0.3, 0.1, "black white gray", "plastic metal"),
    "headphone": (0.4, 0.3, 0.3, "black white red", "plastic leather"),
    "plug plate": (0.4, 0.2, 0.1, "white black", "plastic"),
    "phone": (0.2, 0.2, 0.05, "black white gray blue", "metal glass"),
    "vase": (0.4, 0.4, 0.8, "white green blue red", "ceramic glass metal"),
    "decorative plate": (0.5, 0.2, 0.5, "white blue yellow", "ceramic metal"),
    "frame": (0.5, 0.2, 0.6, "black brown white", "wooden metal"),
    "backpack": (0.7, 0.4, 0.8, "black blue red gray", "fabric leather"),
    "glasses": (0.3, 0.2, 0.1, "black brown", "plastic metal"),
    "boots": (0.6, 0.5, 0.6, "black brown", "leather rubber"),
    "sandals": (0.6, 0.5, 0.2, "brown black blue", "leather rubber"),
    "canvas shoes": (0.6, 0.5, 0.3, "white black blue red", "fabric"),
    "cotton cap": (0.4, 0.4, 0.3, "gray blue red", "fabric"),
    "top hat": (0.4, 0.4, 0.4, "black gray", "fabric leather"),
    "baseball cap": (0.4, 0.4, 0.2, "blue red black white", "fabric"),
    "trash can": (0.7, 0.7, 1.0, "gray black green", "metal plastic"),
    "plant": (0.9, 0.9, 1.8, "green", "ceramic plastic"),
    "book": (0.4, 0.3, 0.1, "red blue green black", "leather plastic"),
}

SCALES = (1.0, 0.9, 1.1, 0.95)
TOTAL_ASSETS = 251


def build(seed: int = 7) -> list[dict]:
    rng = random.Random(seed)
    leaves = sorted(LEAVES)
    extra = set(rng.sample(leaves, TOTAL_ASSETS - 3 * len(leaves)))
    assets = []
    for leaf in leaves:
        w, d, h, colors, materials = LEAVES[leaf]
        colors = colors.split()
        materials = materials.split()
        for v in range(4 if leaf in extra else 3):
            cs = sorted(rng.sample(colors, max(1, min(len(colors), rng.randint(2, 3)))))
            ms = sorted(rng.sample(materials, max(1, min(len(materials), rng.randint(1, 2)))))
            s = SCALES[v]
            assets.append({
                "id": f"{leaf.replace(' ', '_')}_{v + 1}",
                "category": leaf,
                "colors": cs,
                "materials": ms,
                "size": [round(w * s, 3), round(d * s, 3), round(h * s, 3)],
            })
    return assets


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "src" / "spotdiff" / "data" / "catalog.yaml"
    header = (
        "# Asset catalog: one entry per asset.\n"
        "# size is (width, depth, height) in scene units.\n"
        "# Generated by tools/build_catalog.py, then free to edit.\n"
    )
    body = yaml.safe_dump({"schema": "spotdiff.catalog/1", "assets": build()},
                          sort_keys=False, default_flow_style=None, width=100)
    out.write_text(header + body)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
