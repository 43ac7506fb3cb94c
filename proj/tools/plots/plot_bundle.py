#!/usr/bin/env python3
"""Draw the PNG for a `dkg figure <id>` output directory.

usage: plot_bundle.py <bundle dir> [-o out.png]

Needs matplotlib. The figure id is read from manifest.json.
"""

import argparse
import csv
import json
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="") as h:
        rows = list(csv.DictReader(h))
    for r in rows:
        for k, v in r.items():
            try:
                r[k] = float(v)
            except (TypeError, ValueError):
                pass
    return rows


def grouped(rows, key):
    out = defaultdict(list)
    for r in rows:
        out[r[key]].append(r)
    return out


def spectra(ax, bundle):
    for i, (name, rows) in enumerate(grouped(read(bundle / "spectra.csv"), "structure").items()):
        ax.plot([r["lambda_re"] + 0.02 * i for r in rows], [r["lambda_im"] for r in rows], ".", label=str(name))
    ax.set_xlabel("Re lambda")
    ax.set_ylabel("Im lambda")
    ax.legend()


def profiles(ax, bundle):
    rows = read(bundle / "profiles.csv")
    for col in list(rows[0])[1:]:
        ax.plot([r["n"] for r in rows], [r[col] for r in rows], "o-", ms=3, label=col)
    ax.set_xlabel("n")
    ax.set_ylabel("u_n")
    ax.legend()


def decay(ax, bundle):
    fits = {r["series"]: r for r in read(bundle / "decay_fits.csv")}
    for name, rows in grouped(read(bundle / "decay_points.csv"), "series").items():
        n = [r["n"] for r in rows]
        ax.plot(n, [r["log_distance"] for r in rows], "o", label=name)
        f = fits.get(name)
        if f:
            ax.plot(n, [f["intercept"] - f["rate"] * x for x in n], "-", lw=1)
    ax.set_xlabel("n")
    ax.set_ylabel("log distance to asymptote")
    ax.legend()


def errors(ax, bundle, x):
    for comp, rows in grouped(read(bundle / "errors.csv"), "component").items():
        ax.plot([r[x] for r in rows], [r["log10_relative_error"] for r in rows], "o-", label=f"component {int(comp)}")
    ax.set_xlabel(x)
    ax.set_ylabel("log10 relative error")
    ax.legend()


def bifurcation(ax, bundle):
    for name, rows in grouped(read(bundle / "branch.csv"), "branch").items():
        ax.plot([r["d"] for r in rows], [r["l2_norm"] for r in rows], "-", label=name)
    for e in read(bundle / "events.csv"):
        if e["kind"] in ("fold", "pitchfork"):
            ax.axvline(e["d"], ls=":", color="grey")
    ax.set_xlabel("d")
    ax.set_ylabel("l2 norm")
    ax.legend()


def trajectory(ax, bundle):
    rows = read(bundle / "trajectory.csv")
    for col in [c for c in rows[0] if c.startswith("probe_")]:
        ax.plot([r["t"] for r in rows], [r[col] for r in rows], lw=0.8, label=col)
    ax.set_xlabel("t")
    ax.set_ylabel("u")
    ax.legend()


DRAW = {
    "kink_profiles": profiles,
    "kink_spectrum": spectra,
    "kak_spectrum": spectra,
    "kinkkink": spectra,
    "decay_fit": decay,
    "error_vs_N": lambda ax, b: errors(ax, b, "N"),
    "threekink": lambda ax, b: errors(ax, b, "N"),
    "error_vs_d": lambda ax, b: errors(ax, b, "d"),
    "bifurcation": bifurcation,
    "timestep_inphase": trajectory,
    "timestep_outphase": trajectory,
    "onsite_destab": trajectory,
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("bundle", type=Path)
    ap.add_argument("-o", "--output", type=Path)
    args = ap.parse_args()
    fig_id = json.loads((args.bundle / "manifest.json").read_text()).get("figure")
    if fig_id not in DRAW:
        raise SystemExit(f"no plot for figure id {fig_id!r}")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    DRAW[fig_id](ax, args.bundle)
    ax.set_title(fig_id)
    fig.tight_layout()
    out = args.output or args.bundle / f"{fig_id}.png"
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
