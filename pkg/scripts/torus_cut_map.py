"""Cut distance and C/P/R labels of every direction on a flat torus.

    python scripts/torus_cut_map.py [L1 L2] [count]
"""
import math
import sys

import numpy as np

from heatcut.geodesy import classify_theta
from heatcut.manifold import FlatTorus


def main():
    L1 = float(sys.argv[1]) if len(sys.argv) > 2 else 2 * math.pi
    L2 = float(sys.argv[2]) if len(sys.argv) > 2 else 2 * math.pi
    count = int(sys.argv[3]) if len(sys.argv) > 3 else 360
    M = FlatTorus((L1, L2))
    x = np.zeros(2)
    print("theta,d_theta,label,n_associates")
    tally = {}
    for k in range(count):
        a = 2 * math.pi * k / count
        c = classify_theta(M, x, np.array([math.cos(a), math.sin(a)]))
        tally[c.label] = tally.get(c.label, 0) + 1
        print(f"{a:.12f},{c.d_theta:.12f},{c.label},{c.n_associates}")
    print(f"# labels: {tally}", file=sys.stderr)


if __name__ == "__main__":
    main()
