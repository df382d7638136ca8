"""t * Hess E_t at antipodal points of S^1, S^2, S^3 as t decreases.

Prints CSV (n, t, t_hess) followed by the Richardson limit over the two
smallest times, to be compared with -pi^2 / n.
"""
import math
import sys

import numpy as np

from heatcut import heatkernel as hk
from heatcut import manifold as mf
from heatcut.cutanalysis import richardson

T_GRID = (0.16, 0.08, 0.04, 0.02, 0.01)


def main():
    print("n,t,t_hess,limit_target")
    for n in (1, 2, 3):
        M = mf.Circle(1.0) if n == 1 else mf.Sphere(n, 1.0)
        x = np.array([0.0]) if n == 1 else np.eye(n + 1)[-1]
        y = np.array([math.pi]) if n == 1 else -x
        A = mf.tangent_basis(M, y)[0]
        vals = [t * hk.hess_energy_t(M, t, x, y, A) for t in T_GRID]
        for t, v in zip(T_GRID, vals):
            print(f"{n},{t},{v:.10f},{-math.pi**2 / n:.10f}")
        print(f"# n={n} richardson({T_GRID[-2]},{T_GRID[-1]}) = {richardson(T_GRID[-2:], vals[-2:]):.6f}",
              file=sys.stderr)


if __name__ == "__main__":
    main()
