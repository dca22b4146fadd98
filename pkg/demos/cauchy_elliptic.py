"""Brown measure of a Cauchy variable plus an elliptic element.

Walks from the circular case to the purely imaginary one, printing how the
domain shrinks vertically and how the general pipeline compares with the
closed forms available for the Cauchy law. Writes one picture per setting.

Run:  python3 demos/cauchy_elliptic.py --out demo_out
"""

import argparse
import os

import numpy as np

from brownmeasure import MeasureSpec
from brownmeasure import brown_map as bm
from brownmeasure import cauchy_oracle as co
from brownmeasure.svg import density_svg

SETTINGS = [
    ("circular", 0.5, 0.5, lambda u: co.circular_density(1.0, u)),
    ("elliptic", 0.125, 0.875, lambda u: co.elliptic_density(0.125, 0.875, u)),
    ("imaginary", 0.0, 1.0, lambda u: co.isigma_density(1.0, u)),
]


def plot(field, title, path):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        with open(path + ".svg", "w") as fh:
            fh.write(density_svg(field.u_grid, field.phi, field.w, meta={"title": title}))
        return path + ".svg"
    fig, ax = plt.subplots(figsize=(7, 3))
    inside = field.phi > 0
    u, phi, w = field.u_grid[inside], field.phi[inside], field.w[inside]
    norm = matplotlib.colors.Normalize(0.0, w.max())
    for k in range(len(u) - 1):
        ax.fill_between(u[k:k + 2], -phi[k:k + 2], phi[k:k + 2], color=plt.cm.viridis(norm(w[k])), lw=0)
    ax.plot(u, phi, "k", lw=0.8)
    ax.plot(u, -phi, "k", lw=0.8)
    ax.set_xlim(-8, 8)
    ax.set_title(title)
    fig.colorbar(matplotlib.cm.ScalarMappable(norm, plt.cm.viridis), ax=ax, label="density")
    fig.tight_layout()
    fig.savefig(path + ".png", dpi=120)
    plt.close(fig)
    return path + ".png"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="demo_out")
    ap.add_argument("--resolution", type=int, default=200)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    m = MeasureSpec.cauchy()
    for name, alpha, beta, oracle in SETTINGS:
        p = bm.EllipticParams(alpha, beta)
        field = bm.density_field(m, p, args.resolution, window=(-30, 30))
        inside = field.phi > 0
        err = max(abs(w - oracle(u)) for u, w in zip(field.u_grid[inside], field.w[inside]))
        print(f"{name:9s} alpha={alpha:<5} beta={beta:<5} peak height {field.phi.max():.6f}  "
              f"mass {field.mass:.6f}  max |w - closed form| {err:.1e}")
        print("          picture:", plot(field, f"Cauchy, alpha={alpha}, beta={beta}", os.path.join(args.out, name)))


if __name__ == "__main__":
    main()
