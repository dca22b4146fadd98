"""Hamilton-Jacobi characteristics of the log-potential.

For a start point ``lambda0`` and ``eps0 > 0`` the characteristic runs until
``eps`` reaches zero at the lifetime ``t*``. Tuning ``eps0`` so that ``t* = t``
gives the landing point at time ``t``. Starting points inside the region
``Lambda_t`` land on the push-forward ``U(lambda0)``; points outside land on
``lambda0 - t G(lambda0)``. The script prints both cases for a three-atom law.

Run:  python3 demos/characteristics.py
"""

import numpy as np

from brownmeasure import MeasureSpec
from brownmeasure import brown_map as bm
from brownmeasure import hj_characteristics as hj
from brownmeasure import subordination as sb


def main():
    m = MeasureSpec.atoms([(-1.0, 0.2), (0.5, 0.5), (2.0, 0.3)])
    t = 1.0
    p = bm.EllipticParams.imaginary(t)
    print("one path, lambda0 = 0.4+0.3i, eps0 = 0.6")
    tstar = hj.lifetime_tstar(m, 0.4 + 0.3j, 0.6)
    for st in hj.path(m, 0.4 + 0.3j, 0.6, np.linspace(0, tstar, 6)):
        print(f"  t={st.t:.4f}  lambda={st.lam:.5f}  eps={st.eps:.5f}  H={hj.hamiltonian(st):+.15f}")

    print(f"\nlanding points at t = {t}")
    for lam0 in (0.4 + 0.1j, 1.5 + 0.05j, 0.4 + 2.0j, -2.5 + 0.2j):
        v = sb.v_t(m, t, lam0.real).v
        inside = abs(lam0.imag) < v
        land = hj.terminal_position(m, t, lam0)
        G = np.sum(m.weights / (lam0 - m.locations))
        ref = bm.pushforward_U(m, p, lam0) if inside else lam0 - t * G
        where = "inside " if inside else "outside"
        print(f"  lambda0={lam0!s:>12}  {where}  T(lambda0)={hj.T_limit(m, lam0):.4f}  "
              f"lands at {land:.6f}  |landing - prediction| = {abs(land - ref):.1e}")


if __name__ == "__main__":
    main()
