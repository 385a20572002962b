#!/usr/bin/env python3
"""Generate the shipped atom data files with screened-hydrogenic mean radii.

Mean radius of a hydrogenic orbital with effective charge Z_eff:

    <r>_{nl} = a0 * (3 n^2 - l (l + 1)) / (2 Z_eff)

Z_eff follows Slater's screening rules (principal quantum number n is kept,
no effective n*). Run from the repository root:

    python3 scripts/gen_atom_radii.py
"""
import json
import os

BOHR_RADIUS_M = 5.29177210903e-11
PROVENANCE = "screened-hydrogenic estimate (Slater rules), scripts/gen_atom_radii.py"

L_OF = {"s": 0, "p": 1, "d": 2, "f": 3}

CONFIGS = {
    "Ge": (32, [("1s", 2), ("2s", 2), ("2p", 6), ("3s", 2), ("3p", 6), ("3d", 10),
                ("4s", 2), ("4p", 2)]),
    "Xe": (54, [("1s", 2), ("2s", 2), ("2p", 6), ("3s", 2), ("3p", 6), ("3d", 10),
                ("4s", 2), ("4p", 6), ("4d", 10), ("5s", 2), ("5p", 6)]),
}


def slater_group(label):
    n, l = int(label[:-1]), L_OF[label[-1]]
    # (ns, np) share a group; d and f are their own groups.
    return (n, 0 if l <= 1 else l)


def group_order(g):
    # Slater ordering: 1s | 2sp | 3sp | 3d | 4sp | 4d | 4f | 5sp | ...
    n, kind = g
    return (n, kind)


def z_eff(z, shells, label):
    n, l = int(label[:-1]), L_OF[label[-1]]
    g = slater_group(label)
    screening = 0.0
    for other, occ in shells:
        og = slater_group(other)
        count = occ - 1 if other == label else occ
        if og == g:
            screening += count * (0.30 if g == (1, 0) else 0.35)
        elif group_order(og) < group_order(g):
            if l >= 2:
                screening += count * 1.00
            elif og[0] == n - 1:
                screening += count * 0.85
            elif og[0] < n - 1:
                screening += count * 1.00
            else:
                # same n, lower group cannot occur for s/p
                screening += count * 1.00
    return z - screening


def mean_radius(z, shells, label):
    n, l = int(label[:-1]), L_OF[label[-1]]
    return BOHR_RADIUS_M * (3 * n * n - l * (l + 1)) / (2.0 * z_eff(z, shells, label))


def main():
    out_dir = os.path.join("crates", "core", "data", "atoms")
    os.makedirs(out_dir, exist_ok=True)
    manifest = {"generator": "scripts/gen_atom_radii.py", "bohr_radius_m": BOHR_RADIUS_M,
                "files": []}
    for symbol, (z, shells) in CONFIGS.items():
        doc = {
            "symbol": symbol,
            "Z": z,
            "neutral": True,
            "radii_provenance": PROVENANCE,
            "shells": [
                {"label": label, "occupancy": occ,
                 "mean_radius_m": float("%.10e" % mean_radius(z, shells, label))}
                for label, occ in shells
            ],
        }
        name = symbol.lower() + ".json"
        with open(os.path.join(out_dir, name), "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        manifest["files"].append({
            "file": name, "symbol": symbol, "Z": z,
            "z_eff": {label: round(z_eff(z, shells, label), 6) for label, _ in shells},
        })
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
