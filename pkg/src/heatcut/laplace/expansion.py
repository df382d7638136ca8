"""Laplace asymptotics for diagonal phases g(u) = sum_j u_j^(2 k_j)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gamma

DerivativeTable = Union[Dict[Tuple[int, ...], float], Callable[[Tuple[int, ...]], float]]


@dataclass(frozen=True)
class DiagonalForm:
    """Exponents (k_1, ..., k_n) of g = sum u_j^(2 k_j), each k_j >= 1."""
    exponents: Tuple[int, ...]

    def __post_init__(self):
        ks = tuple(int(k) for k in self.exponents)
        if not ks or any(k < 1 for k in ks):
            raise ValueError(f"exponents must be positive integers, got {self.exponents}")
        object.__setattr__(self, "exponents", ks)

    @property
    def n(self) -> int:
        return len(self.exponents)

    @property
    def decay_exponent(self) -> Fraction:
        """l = sum_j 1 / (2 k_j): the integral scales as t^l."""
        return sum((Fraction(1, 2 * k) for k in self.exponents), Fraction(0))

    def sorted(self) -> "DiagonalForm":
        return DiagonalForm(tuple(sorted(self.exponents)))

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return sum(u[..., j] ** (2 * k) for j, k in enumerate(self.exponents))


@dataclass
class ExpansionTerm:
    multi_index: Tuple[int, ...]
    coefficient: float
    power: float
    derivative: float

    @property
    def value(self) -> float:
        return self.coefficient * self.derivative


@dataclass
class LowerOrderTerm:
    exponent: Fraction
    coefficient: float
    variance_exponent: Fraction
    variance_coefficient: float


def axis_coefficient(k: int, i: int) -> float:
    """Gamma((2i+1)/(2k)) / ((2i)! k): the t^((2i+1)/(2k)) coefficient on one axis."""
    return gamma((2 * i + 1) / (2 * k)) / (math.factorial(2 * i) * k)


def _lookup(table: Optional[DerivativeTable], idx: Tuple[int, ...]) -> float:
    if table is None:
        return 1.0 if not any(idx) else 0.0
    if callable(table):
        return float(table(idx))
    return float(table.get(idx, 0.0))


def diagonal_terms(form: DiagonalForm, t: float, phi_derivatives: Optional[DerivativeTable] = None,
                   order: int = 2) -> list:
    """Terms of int exp(-g/t) phi du over a neighbourhood of 0, `order` terms per axis.

    Each axis contributes sum_i Gamma((2i+1)/(2k))/((2i)! k) t^((2i+1)/(2k)) d^(2i)/du^(2i);
    the product operator acts on phi at 0. phi_derivatives maps the
    multi-index of even derivative orders (2 i_1, ..., 2 i_n) to its value.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    terms = []
    for ii in product(range(order), repeat=form.n):
        coef = 1.0
        power = 0.0
        for k, i in zip(form.exponents, ii):
            coef *= axis_coefficient(k, i)
            power += (2 * i + 1) / (2 * k)
        idx = tuple(2 * i for i in ii)
        terms.append(ExpansionTerm(idx, coef * t**power, power, _lookup(phi_derivatives, idx)))
    return terms


def diagonal_expansion(form: DiagonalForm, t: float, phi_derivatives: Optional[DerivativeTable] = None,
                       order: int = 2) -> float:
    return float(sum(term.value for term in diagonal_terms(form, t, phi_derivatives, order)))


def limit_weights(forms: Sequence[DiagonalForm], amplitudes: Sequence[float]) -> np.ndarray:
    """Limit masses of a sum of localised Laplace integrals.

    Only the points with the smallest decay exponent survive; they keep
    mass amplitude * prod_j Gamma(1/(2k_j))/k_j, renormalised.
    """
    ls = [f.decay_exponent for f in forms]
    lmin = min(ls)
    w = np.zeros(len(forms))
    for i, (f, a) in enumerate(zip(forms, amplitudes)):
        if ls[i] == lmin:
            w[i] = a * float(np.prod([axis_coefficient(k, 0) for k in f.exponents]))
    return w / w.sum()


def lower_order_hessian_term(form: DiagonalForm, grad_derivatives) -> LowerOrderTerm:
    """Leading variance term of grad_A E over exp(-g/t) at a non-cut midpoint.

    Var ~ Gamma(3/(2k_n)) / Gamma(1/(2k_n)) t^(1/k_n) sum_{j: k_j = k_n} (d_uj grad_A E)^2
    and the Hessian term is -4 / t^(1 - 1/k_n) times the same coefficient.
    grad_derivatives are indexed like form.exponents.
    """
    ks = np.asarray(form.exponents)
    g = np.asarray(grad_derivatives, dtype=float)
    if g.shape != ks.shape:
        raise ValueError("grad_derivatives must match the number of exponents")
    kn = int(ks.max())
    top = ks == kn
    c = gamma(3 / (2 * kn)) / gamma(1 / (2 * kn)) * float(np.sum(g[top] ** 2))
    return LowerOrderTerm(exponent=Fraction(1) - Fraction(1, kn), coefficient=-4.0 * c,
                          variance_exponent=Fraction(1, kn), variance_coefficient=c)
