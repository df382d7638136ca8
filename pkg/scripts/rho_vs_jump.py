"""Singular Hessian density on P-directions: closed form against the gradient-jump oracle."""
import math

import numpy as np

from heatcut.cutanalysis import jump_oracle, rho_total
from heatcut.geodesy import classify_theta
from heatcut.manifold import FlatTorus


def main(count: int = 48):
    A = np.array([1.0, 0.5]) / math.sqrt(1.25)
    x = np.zeros(2)
    print("periods,theta,rho_total,jump,rel_diff")
    for periods in ((2 * math.pi, 2 * math.pi), (2 * math.pi, 4 * math.pi)):
        M = FlatTorus(periods)
        for k in range(count):
            a = 2 * math.pi * (k + 0.37) / count
            th = np.array([math.cos(a), math.sin(a)])
            if classify_theta(M, x, th).label != "P":
                continue
            r, j = rho_total(M, x, th, A), jump_oracle(M, x, th, A)
            print(f"\"{periods[0]:.4f}x{periods[1]:.4f}\",{a:.8f},{r:.10f},{j:.10f},{abs(r - j) / abs(j):.2e}")


if __name__ == "__main__":
    main()
