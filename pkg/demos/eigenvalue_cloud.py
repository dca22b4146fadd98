"""Eigenvalues of a random matrix model against the predicted Brown measure.

The model is ``diag(x_1..x_N) + (alpha-part) + i (beta-part)`` with the
``x_j`` drawn from the input law and independent GUE matrices for the two
semicircular parts. Its eigenvalues should fill the predicted domain with the
predicted strip density. The script prints the binned total variation
distance and draws the cloud over the domain boundary.

Run:  python3 demos/eigenvalue_cloud.py --n 1000 --out demo_out
"""

import argparse
import os
import time

from brownmeasure import MeasureSpec
from brownmeasure import brown_map as bm
from brownmeasure import rmt_lab as rmt
from brownmeasure.svg import scatter_svg

CASES = [
    ("cauchy_imaginary", MeasureSpec.cauchy(), bm.EllipticParams(0.0, 1.0)),
    ("two_atoms_elliptic", MeasureSpec.atoms([(-1.0, 1 / 3), (1.0, 2 / 3)]), bm.EllipticParams(0.25, 0.75)),
    ("uniform_circular", MeasureSpec.uniform(-2, 2), bm.EllipticParams(0.5, 0.5)),
]


def draw(cloud, field, cmp, title, path):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        with open(path + ".svg", "w") as fh:
            fh.write(scatter_svg(cloud.eigenvalues, field.u_grid, field.phi, cmp.box, meta={"title": title}))
        return path + ".svg"
    u_lo, u_hi, _, _ = cmp.box
    if not (field.components.unbounded_below or field.components.unbounded_above):
        pad = 0.05 * (field.u_grid.max() - field.u_grid.min())
        u_lo, u_hi = field.u_grid.min() - pad, field.u_grid.max() + pad
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(cloud.eigenvalues.real, cloud.eigenvalues.imag, s=2, c="tab:blue")
    for k in set(field.component_index.tolist()):
        sel = field.component_index == k
        ax.plot(field.u_grid[sel], field.phi[sel], "k", lw=1)
        ax.plot(field.u_grid[sel], -field.phi[sel], "k", lw=1)
    ax.set_xlim(u_lo, u_hi)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path + ".png", dpi=120)
    plt.close(fig)
    return path + ".png"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="demo_out")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for name, m, p in CASES:
        t0 = time.perf_counter()
        cloud = rmt.simulate(m, p, args.n, args.seed)
        field = bm.density_field(m, p, 200)
        cmp = rmt.cloud_vs_density(cloud, field)
        print(f"{name:20s} N={args.n}  tv {cmp.tv_distance:.4f}  clipped {cmp.clipped_fraction:.4f}  "
              f"backward error {cloud.backward_error:.1e}  {time.perf_counter() - t0:.1f} s")
        print(" " * 21, "picture:", draw(cloud, field, cmp, f"{name}, N={args.n}", os.path.join(args.out, name)))


if __name__ == "__main__":
    main()
