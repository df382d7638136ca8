"""Newton diagrams: remoteness, log multiplicity and a nondegeneracy heuristic.

For exponent vectors alpha_i in Z^n_+, the Newton polytope is
conv(alpha_i + R^n_+). Its remoteness r0 is where the diagonal ray meets the
boundary; the integral of exp(-g/t) then behaves as t^(1/r0) |log t|^k with
k = n - 1 - dim(minimal face containing (r0, ..., r0)).

r0 and the face are found by enumerating basic solutions of the primal and
dual min-max problems in exact rational arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

MAX_POINTS = 32
MAX_DIM = 4


class NewtonDiagramError(ValueError):
    pass


@dataclass
class NewtonResult:
    r0: Fraction
    p: Fraction
    k_mult: int
    face_dim: int
    face_points: List[Tuple[int, ...]]
    normal: Tuple[Fraction, ...]

    @property
    def alpha(self) -> str:
        return f"{self.p.numerator}/{self.p.denominator}"


@dataclass
class NondegeneracyReport:
    nondegenerate: bool
    witness: Optional[np.ndarray] = None
    face: Optional[List[Tuple[int, ...]]] = None
    faces_checked: int = 0
    min_residual: float = field(default=float("inf"))


# ---------------------------------------------------------------------------
# exact linear algebra

def _solve(A: List[List[Fraction]], b: List[Fraction]) -> Optional[List[Fraction]]:
    """Gauss-Jordan over Fractions; None when singular."""
    n = len(A)
    M = [row[:] + [bb] for row, bb in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        pv = M[c][c]
        M[c] = [v / pv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


def _rank(vectors: List[List[Fraction]]) -> int:
    rows = [list(v) for v in vectors]
    if not rows:
        return 0
    rank, ncol = 0, len(rows[0])
    for c in range(ncol):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / rows[rank][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------

def _validate(points) -> List[Tuple[int, ...]]:
    pts = [tuple(int(a) for a in p) for p in points]
    if not pts:
        raise NewtonDiagramError("empty exponent set")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise NewtonDiagramError("exponent vectors have different lengths")
    if any(a < 0 for p in pts for a in p):
        raise NewtonDiagramError("exponents must be non-negative")
    if n > MAX_DIM or len(set(pts)) > MAX_POINTS:
        raise NewtonDiagramError(f"diagram too large: n <= {MAX_DIM} and at most {MAX_POINTS} points")
    for j in range(n):
        if all(p[j] == 0 for p in pts):
            raise NewtonDiagramError(f"coordinate {j} never appears: the diagram is unbounded")
    if any(not any(p) for p in pts):
        raise NewtonDiagramError("a constant monomial makes the phase non-vanishing at 0")
    return sorted(set(pts))


def _minimal(pts):
    """Drop exponents dominated componentwise by another exponent."""
    return [p for p in pts if not any(q != p and all(a <= b for a, b in zip(q, p)) for q in pts)]


def remoteness(points) -> Fraction:
    """r0 = min over convex weights lambda of max_j sum_i lambda_i alpha_ij."""
    pts = _minimal(_validate(points))
    n = len(pts[0])
    best = None
    for s in range(1, n + 1):
        for S in combinations(range(len(pts)), s):
            for J in combinations(range(n), s):
                # unknowns lambda_S and r: sum_i lambda_i alpha_ij = r (j in J), sum lambda = 1
                A = [[Fraction(pts[i][j]) for i in S] + [Fraction(-1)] for j in J]
                A.append([Fraction(1)] * s + [Fraction(0)])
                b = [Fraction(0)] * s + [Fraction(1)]
                sol = _solve(A, b)
                if sol is None:
                    continue
                lam, r = sol[:s], sol[s]
                if any(l < 0 for l in lam):
                    continue
                if any(sum(l * pts[i][j] for l, i in zip(lam, S)) > r for j in range(n)):
                    continue
                if best is None or r < best:
                    best = r
    return best


def _dual_vertices(pts, r0) -> List[Tuple[Fraction, ...]]:
    """Vertices of {c >= 0, sum c = 1, c . alpha_i >= r0 for all i}."""
    n = len(pts[0])
    cons = []  # (a, b) meaning a . c >= b
    for j in range(n):
        e = [Fraction(0)] * n
        e[j] = Fraction(1)
        cons.append((e, Fraction(0)))
    for p in pts:
        cons.append(([Fraction(a) for a in p], Fraction(r0)))
    verts = set()
    for T in combinations(range(len(cons)), n - 1):
        A = [cons[k][0] for k in T] + [[Fraction(1)] * n]
        b = [cons[k][1] for k in T] + [Fraction(1)]
        sol = _solve(A, b)
        if sol is None:
            continue
        if all(sum(a * c for a, c in zip(ak, sol)) >= bk for ak, bk in cons):
            verts.add(tuple(sol))
    return sorted(verts)


def newton_remoteness(points) -> NewtonResult:
    """Remoteness, decay power p = 1/r0 and log multiplicity of a Newton diagram."""
    pts = _validate(points)
    n = len(pts[0])
    r0 = remoteness(pts)
    verts = _dual_vertices(pts, r0)
    if not verts:
        raise NewtonDiagramError("no supporting hyperplane found at the diagonal point")
    # a relative-interior point of the optimal dual face cuts out the minimal face
    c = tuple(sum(v[j] for v in verts) / len(verts) for j in range(n))
    face = [p for p in pts if sum(ci * a for ci, a in zip(c, p)) == r0]
    rays = [j for j in range(n) if c[j] == 0]
    gens = [[Fraction(a - b) for a, b in zip(p, face[0])] for p in face[1:]]
    for j in rays:
        e = [Fraction(0)] * n
        e[j] = Fraction(1)
        gens.append(e)
    face_dim = _rank(gens)
    return NewtonResult(r0=r0, p=1 / r0, k_mult=max(0, n - 1 - face_dim), face_dim=face_dim,
                        face_points=face, normal=c)


# ---------------------------------------------------------------------------
# nondegeneracy

def compact_faces(points) -> List[List[Tuple[int, ...]]]:
    """Point sets of the compact faces with at least two points (weight vectors c > 0)."""
    from scipy.optimize import linprog
    pts = _minimal(_validate(points))
    if len(pts) > 16:
        raise NewtonDiagramError("face enumeration is limited to 16 minimal exponents")
    n = len(pts[0])
    faces = []
    arr = np.array(pts, dtype=float)
    for size in range(2, len(pts) + 1):
        for S in combinations(range(len(pts)), size):
            inside = set(S)
            # variables (c_1..c_n, s): c . a = s on S, c . a >= s + 1 off S, c >= 1
            A_eq = [list(arr[i]) + [-1.0] for i in S]
            A_ub = [list(-arr[i]) + [1.0] for i in range(len(pts)) if i not in inside]
            b_ub = [-1.0] * len(A_ub)
            res = linprog(np.zeros(n + 1), A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq,
                          b_eq=[0.0] * len(A_eq), bounds=[(1, None)] * n + [(None, None)],
                          method="highs")
            if res.status == 0:
                faces.append([pts[i] for i in S])
    return faces


def nondegeneracy_check(coefficients: Dict[Tuple[int, ...], float], seed: int = 0,
                        grid: int = 9) -> NondegeneracyReport:
    """Heuristic search for common zeros of the partials of each face polynomial in (R \\ 0)^n.

    The scale-free residual sum_j (u_j d_j g_F)^2 / (sum_a |c_a u^a|)^2 is
    minimised from a log-spaced grid in every orthant; a residual below 1e-10
    is reported as a degeneracy witness. Only n <= 3 is supported.
    """
    from scipy.optimize import minimize
    pts = _validate(coefficients.keys())
    n = len(pts[0])
    if n > 3:
        raise NewtonDiagramError("the nondegeneracy heuristic supports n <= 3")
    rep = NondegeneracyReport(nondegenerate=True)
    logs = np.linspace(-2.0, 2.0, grid)
    for face in compact_faces(pts):
        al = np.array(face, dtype=float)
        co = np.array([coefficients[a] for a in face], dtype=float)
        rep.faces_checked += 1
        for signs in product((1.0, -1.0), repeat=n):
            sg = np.array(signs)

            def resid(s, sg=sg, al=al, co=co):
                u = sg * np.exp(s)
                mono = co * np.prod(u[None, :] ** al, axis=1)
                grad = al.T @ mono  # u_j d_j g
                return float(np.sum(grad**2) / np.sum(np.abs(mono)) ** 2)

            starts = np.array(list(product(logs, repeat=n)))
            vals = np.array([resid(s) for s in starts])
            for k in np.argsort(vals)[:3]:
                opt = minimize(resid, starts[k], method="Nelder-Mead",
                               options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
                if opt.fun < rep.min_residual:
                    rep.min_residual = float(opt.fun)
                if opt.fun < 1e-10:
                    rep.nondegenerate = False
                    rep.witness = sg * np.exp(opt.x)
                    rep.face = face
                    return rep
    return rep
