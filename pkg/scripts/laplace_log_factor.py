"""Log factor of the Newton diagram {(2,2),(6,0),(0,6)} seen in quadrature.

I(t) / sqrt(t) grows by a constant per decade when the diagram has
multiplicity one; the printed increments should settle near
sqrt(pi)/3 * ln 10.
"""
import math

from heatcut.acceptance import log_factor_integral
from heatcut.laplace.newton import newton_remoteness


def main():
    r = newton_remoteness([(2, 2), (6, 0), (0, 6)])
    print(f"# p = {r.alpha}, multiplicity = {r.k_mult}")
    print("t,I,I_over_sqrt_t,increment")
    prev = None
    for e in range(2, 8):
        t = 10.0**-e
        I = log_factor_integral(t)
        R = I / math.sqrt(t)
        inc = "" if prev is None else f"{R - prev:.6f}"
        print(f"{t:g},{I:.10e},{R:.8f},{inc}")
        prev = R
    print(f"# predicted increment {math.sqrt(math.pi) / 3 * math.log(10):.6f}")


if __name__ == "__main__":
    main()
