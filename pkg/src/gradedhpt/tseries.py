"""Formal t-power-series of operators and elements, truncation-order aware.

The central variable t is even; a series knows either its exact finite support
(``known_to is None``) or the last order up to which its coefficients are
reliable.  Congruence claims beyond the reliable order are the caller's
responsibility to report UNDETERMINED.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .core import LinOp, ONE, Q, Vector, ZERO
from .commalg import CommAlgebra


@dataclass
class TOp:
    """Sum_n t^n op_n with op_n : domain -> codomain homogeneous of degree
    (degree - n * t_degree)."""

    coeffs: dict
    domain: object
    codomain: object
    degree: int
    t_degree: int
    known_to: int | None = None

    @staticmethod
    def lift(op: LinOp, t_degree: int, power: int = 0) -> "TOp":
        return TOp({power: op} if power >= 0 else {}, op.domain, op.codomain,
                   op.degree + power * t_degree, t_degree)

    def coeff(self, n: int) -> LinOp:
        got = self.coeffs.get(n)
        if got is not None:
            return got
        return LinOp.zero(self.domain, self.codomain, self.degree - n * self.t_degree)

    def support(self):
        return sorted(self.coeffs)

    def min_power(self) -> int:
        return min(self.coeffs, default=0)

    def is_exact(self) -> bool:
        return self.known_to is None

    def reliable_to(self) -> int | None:
        """Largest order with exact coefficients (None = all orders)."""
        return self.known_to

    def _join(self, other: "TOp", shift_self: int = 0, shift_other: int = 0) -> int | None:
        if self.is_exact() and other.is_exact():
            return None
        outs = []
        if not self.is_exact():
            outs.append(self.known_to + shift_other)
        if not other.is_exact():
            outs.append(other.known_to + shift_self)
        return min(outs)

    def __add__(self, other: "TOp") -> "TOp":
        if self.degree != other.degree:
            raise ValueError("adding t-series of different degree")
        coeffs = dict(self.coeffs)
        for n, op in other.coeffs.items():
            coeffs[n] = coeffs[n] + op if n in coeffs else op
        known = self._join(other)
        return TOp(coeffs, self.domain, self.codomain, self.degree, self.t_degree, known)

    def __sub__(self, other: "TOp") -> "TOp":
        return self + other.scale(-1)

    def scale(self, a) -> "TOp":
        return TOp({n: op.scale(a) for n, op in self.coeffs.items()}, self.domain,
                   self.codomain, self.degree, self.t_degree, self.known_to)

    def compose(self, other: "TOp", max_order: int | None = None) -> "TOp":
        """self o other; coefficients beyond the reliable order are dropped."""
        if other.codomain != self.domain:
            raise ValueError("t-series composition mismatch")
        known = self._join(other, shift_self=self.min_power(), shift_other=other.min_power())
        coeffs: dict = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                n = i + j
                if known is not None and n > known:
                    continue
                if max_order is not None and n > max_order:
                    continue
                coeffs[n] = coeffs[n] + (a @ b) if n in coeffs else a @ b
        if max_order is not None:
            known = max_order if known is None else min(known, max_order)
        return TOp(coeffs, other.domain, self.codomain, self.degree + other.degree,
                   self.t_degree, known)

    def bracket(self, other: "TOp", max_order: int | None = None) -> "TOp":
        sign = -1 if (self.degree % 2 and other.degree % 2) else 1
        return self.compose(other, max_order) - other.compose(self, max_order).scale(sign)

    def apply_key(self, key, max_order: int) -> dict:
        """Orderwise image of a basis key, as {n: Vector}."""
        out: dict = {}
        for n, op in self.coeffs.items():
            if n > max_order:
                continue
            v = op.on_key(key)
            if v:
                out[n] = out.get(n, Vector.zero()) + v
        return {n: v for n, v in out.items() if not v.is_zero()}

    def is_zero_on(self, keys, max_order: int) -> bool:
        return all(not self.apply_key(k, max_order) for k in keys)

    def first_nonzero(self, keys, max_order: int):
        for k in keys:
            img = self.apply_key(k, max_order)
            if img:
                return k, img
        return None


@dataclass
class LaurentVec:
    """Finite exact Laurent element sum_n t^n v_n (poles allowed)."""

    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {n: v for n, v in self.coeffs.items() if not v.is_zero()}

    def coeff(self, n: int) -> Vector:
        return self.coeffs.get(n, Vector.zero())

    def support(self):
        return sorted(self.coeffs)

    def min_power(self) -> int:
        return min(self.coeffs, default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LaurentVec") -> "LaurentVec":
        out = dict(self.coeffs)
        for n, v in other.coeffs.items():
            out[n] = out.get(n, Vector.zero()) + v
        return LaurentVec(out)

    def __sub__(self, other: "LaurentVec") -> "LaurentVec":
        return self + other.scale(-1)

    def scale(self, a) -> "LaurentVec":
        return LaurentVec({n: v.scale(a) for n, v in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentVec) and self.coeffs == other.coeffs


def laurent_mul(A: CommAlgebra, x: LaurentVec, y: LaurentVec) -> LaurentVec:
    out: dict = {}
    for i, v in x.coeffs.items():
        for j, w in y.coeffs.items():
            p = A.mul(v, w)
            if p:
                out[i + j] = out.get(i + j, Vector.zero()) + p
    return LaurentVec(out)


def laurent_apply(op: TOp, x: LaurentVec) -> LaurentVec:
    """Exact application; requires an exact operator series."""
    if not op.is_exact():
        raise ValueError("need an exact operator series for Laurent application")
    out: dict = {}
    for j, f in op.coeffs.items():
        for i, v in x.coeffs.items():
            w = f(v)
            if w:
                out[i + j] = out.get(i + j, Vector.zero()) + w
    return LaurentVec(out)


def laurent_exp(A: CommAlgebra, a: LaurentVec, nilpotency: int) -> LaurentVec:
    """e^a for a with vanishing a^m, m <= nilpotency (verified)."""
    from math import factorial
    out = LaurentVec({0: A.unit()})
    term = LaurentVec({0: A.unit()})
    for j in range(1, nilpotency + 1):
        term = laurent_mul(A, term, a)
        if term.is_zero():
            break
        if j == nilpotency:
            raise ValueError(f"Laurent element not nilpotent within {nilpotency}")
        out = out + term.scale(Q(1, factorial(j)))
    return out


class TSpace:
    """Flattened truncated t-module: keys (n, base_key) for min_power <= n <= N."""

    def __init__(self, base, N: int, t_degree: int, min_power: int = 0):
        self.base = base
        self.N = N
        self.t_degree = t_degree
        self.min_power = min_power

    def keys(self):
        return tuple((n, k) for n in range(self.min_power, self.N + 1)
                     for k in self.base.keys())

    def degree(self, key) -> int:
        n, k = key
        return self.base.degree(k) + n * self.t_degree

    def __eq__(self, other):
        return (isinstance(other, TSpace) and self.base == other.base and self.N == other.N
                and self.t_degree == other.t_degree and self.min_power == other.min_power)

    def __hash__(self):
        return hash(("TSpace", id(self.base), self.N, self.t_degree, self.min_power))


class TruncatedTAlgebra(CommAlgebra):
    """A[t]/(t^{N+1}): an honest quotient ring, so all algebra computations in it
    are exact; claims about orders <= N read off its coefficients."""

    def __init__(self, A: CommAlgebra, N: int, t_degree: int):
        self.A = A
        self.N = N
        self.t_degree = t_degree
        self.space = TSpace(A.space, N, t_degree)
        self.unit_key = (0, A.unit_key)

    def mul_keys(self, k1, k2) -> Vector:
        (n1, a1), (n2, a2) = k1, k2
        n = n1 + n2
        if n > self.N:
            return Vector.zero()
        prod = self.A.mul_keys(a1, a2)
        return Vector({(n, k): c for k, c in prod.items()})

    def inject(self, v: Vector, power: int = 0) -> Vector:
        return Vector({(power, k): c for k, c in v.items()})

    def order_check_keys(self):
        return tuple((0, k) for k in self.A.order_check_keys())


def flatten_top(op: TOp, N: int) -> LinOp:
    """K[[t]]-linear extension of a t-series of operators to the flattened spaces."""
    dom = TSpace(op.domain, N, op.t_degree)
    cod = TSpace(op.codomain, N, op.t_degree)
    if op.known_to is not None and op.known_to < N:
        raise ValueError("series not reliable up to the requested order")

    def fn(key):
        n, k = key
        out = Vector()
        for m, f in op.coeffs.items():
            if n + m > N:
                continue
            for k2, c in f.on_key(k).items():
                out.c[(n + m, k2)] = out.c.get((n + m, k2), ZERO) + c
        out.c = {kk: c for kk, c in out.c.items() if c}
        return out

    return LinOp(dom, cod, op.degree, fn, "flat")


def flat_unital_map(f: TOp, Bt: TruncatedTAlgebra) -> LinOp:
    """Restrict a degree-0 t-series map A[[t]] -> B[[t]] to A, landing in B[t]/t^{N+1}."""
    def fn(key):
        out = Vector()
        for m, op in f.coeffs.items():
            if m > Bt.N:
                continue
            for k2, c in op.on_key(key).items():
                out.c[(m, k2)] = out.c.get((m, k2), ZERO) + c
        out.c = {kk: c for kk, c in out.c.items() if c}
        return out

    return LinOp(f.domain, Bt.space, f.degree, fn, "f~")


def spl_t(C, delta_plus: TOp, N: int, corpus=None):
    """Standard Perturbation Lemma for a t-adically small perturbation
    (min t-power >= 1): all series are computed exactly up to order N.

    Returns (delta_B, sigma, tau, h) as t-series; they are flagged exact when
    the geometric series terminates identically on the given corpus.
    """
    if not delta_plus.coeffs:
        td = delta_plus.t_degree
        zero = TOp({}, C.space_B, C.space_B, delta_plus.degree, td)
        return (zero, TOp.lift(C.sigma, td), TOp.lift(C.tau, td), TOp.lift(C.h, td))
    if delta_plus.min_power() < 1:
        raise ValueError("t-adic perturbation needs positive t-valuation")
    td = delta_plus.t_degree
    h = TOp.lift(C.h, td)
    sigma = TOp.lift(C.sigma, td)
    tau = TOp.lift(C.tau, td)
    hd = h.compose(delta_plus)
    top_order = max(delta_plus.support(), default=1) * (N + 1)
    powers = [TOp.lift(LinOp.identity(C.space_A), td)]
    exact = False
    for j in range(1, N + 1):
        nxt = hd.compose(powers[-1])
        if corpus is not None and nxt.is_zero_on(corpus, top_order):
            exact = True
            break
        powers.append(nxt)
    geo = powers[0]
    for pw in powers[1:]:
        geo = geo + pw
    cap = None
    if not exact:
        geo = TOp({n: op for n, op in geo.coeffs.items() if n <= N},
                  geo.domain, geo.codomain, geo.degree, td, N)
        cap = N
    sd = sigma.compose(delta_plus, cap)
    delta_B = sd.compose(geo.compose(tau, cap), cap)
    tau_new = geo.compose(tau, cap)
    h_new = geo.compose(h, cap)
    sigma_new = sigma + sd.compose(geo.compose(h, cap), cap)
    return delta_B, sigma_new, tau_new, h_new
