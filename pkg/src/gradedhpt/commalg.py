"""Graded commutative unitary algebras, exponential/logarithmic automorphisms,
cumulants and Koszul brackets (each by several independent routes), and the
differential-operator order filtration.

Cumulants measure the failure of a unital map to be an algebra morphism; Koszul
brackets measure the failure of an operator to be a derivation.  Both are
computed here by (a) a closed partition/unshuffle formula, (b) a two-slot
recursion, and (c) the composite through the symmetric coalgebra; agreement of
the routes is a standing internal-consistency requirement.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Iterable, Sequence

from .core import (
    LinOp,
    ONE,
    Overflow,
    Q,
    Vector,
    ZERO,
    expand_homogeneous,
    koszul_sign,
    multi_unshuffles,
    set_partitions,
    unshuffle_sign,
    vector_degree,
)
from .symcoalg import SymSpace, SymWord, TaylorCoderivation, TaylorMorphism, canonical_word


class AlgebraSpace:
    """Key space of an algebra backend (keys may be ints, tuples, ...)."""

    def __init__(self, keys: Sequence, degree_fn, token):
        self._keys = tuple(keys)
        self._degree = degree_fn
        self._token = token

    def keys(self):
        return self._keys

    def degree(self, key):
        return self._degree(key)

    def __eq__(self, other):
        return isinstance(other, AlgebraSpace) and self._token == other._token

    def __hash__(self):
        return hash(self._token)


class CommAlgebra:
    """Interface shared by the algebra backends; products are exact, Overflow is loud."""

    space: object
    unit_key: object

    def mul_keys(self, k1, k2) -> Vector:
        raise NotImplementedError

    def unit(self) -> Vector:
        return Vector.basis(self.unit_key)

    def mul(self, a: Vector, b: Vector) -> Vector:
        out = Vector()
        for k1, c1 in a.items():
            for k2, c2 in b.items():
                prod = self.mul_keys(k1, k2)
                for k, c in prod.items():
                    v = out.c.get(k, ZERO) + c1 * c2 * c
                    if v:
                        out.c[k] = v
                    else:
                        out.c.pop(k, None)
        return out

    def product_list(self, vectors: Sequence[Vector]) -> Vector:
        out = self.unit()
        for v in vectors:
            out = self.mul(out, v)
        return out

    def product_keys(self, keys: Iterable) -> Vector:
        return self.product_list([Vector.basis(k) for k in keys])

    def power(self, a: Vector, n: int) -> Vector:
        out = self.unit()
        for _ in range(n):
            out = self.mul(out, a)
        return out

    def order_check_keys(self):
        """Keys spanning enough of the algebra to certify differential-operator order."""
        return self.space.keys()


class ExplicitFDAlgebra(CommAlgebra):
    """Finite-dimensional backend: structure constants verified at construction."""

    def __init__(self, basis, products: dict, unit_index: int, verify: bool = True):
        self.basis = basis
        self.unit_key = unit_index
        self.space = basis
        table: dict = {}
        for (i, j), v in products.items():
            table[(i, j)] = v
        for (i, j), v in list(table.items()):
            if (j, i) not in table:
                s = -1 if (basis.degree(i) % 2 and basis.degree(j) % 2) else 1
                table[(j, i)] = v.scale(s)
        for k in basis.keys():
            table[(unit_index, k)] = Vector.basis(k)
            table[(k, unit_index)] = Vector.basis(k)
        self.table = table
        if verify:
            self._verify()

    def mul_keys(self, k1, k2) -> Vector:
        return self.table.get((k1, k2), Vector.zero())

    def _verify(self):
        b = self.basis
        if b.degree(self.unit_key) != 0:
            raise ValueError("unit must have degree 0")
        for i in b.keys():
            for j in b.keys():
                v = self.mul_keys(i, j)
                d = b.degree(i) + b.degree(j)
                for k in v.keys():
                    if b.degree(k) != d:
                        raise ValueError(f"product not graded: {i}*{j}")
                s = -1 if (b.degree(i) % 2 and b.degree(j) % 2) else 1
                if self.mul_keys(j, i) != v.scale(s):
                    raise ValueError(f"product not graded-commutative on ({i},{j})")
        for i in b.keys():
            for j in b.keys():
                for k in b.keys():
                    left = self.mul(self.mul_keys(i, j), Vector.basis(k))
                    right = self.mul(Vector.basis(i), self.mul_keys(j, k))
                    if left != right:
                        raise ValueError(f"product not associative on ({i},{j},{k})")


class GuardedFreeAlgebra(CommAlgebra):
    """Free graded-commutative algebra on nilpotent/guarded generators.

    Keys are exponent tuples; odd generators square to zero, even generators may
    carry a nilpotency exponent, and any product whose total word length would
    exceed the guard raises Overflow instead of truncating.
    """

    def __init__(self, generators: Sequence[tuple[str, int, int | None]], length_bound: int):
        self.gen_symbols = tuple(g[0] for g in generators)
        self.gen_degrees = tuple(int(g[1]) for g in generators)
        nil = []
        for sym, deg, n in generators:
            if deg % 2:
                if n is not None and n != 2:
                    raise ValueError(f"odd generator {sym} must have nilpotency 2")
                nil.append(2)
            else:
                nil.append(n)
        self.nilpotency = tuple(nil)
        self.length_bound = length_bound
        self.unit_key = (0,) * len(generators)
        keys = self._enumerate()
        self.space = AlgebraSpace(keys, self._key_degree,
                                  ("guarded", self.gen_symbols, self.gen_degrees,
                                   self.nilpotency, length_bound))

    def _enumerate(self):
        keys = [()]
        for i, _ in enumerate(self.gen_symbols):
            cap = self.nilpotency[i] - 1 if self.nilpotency[i] is not None else self.length_bound
            keys = [k + (e,) for k in keys for e in range(cap + 1)]
        keys = [k for k in keys if sum(k) <= self.length_bound]
        keys.sort(key=lambda k: (sum(k), k))
        return keys

    def _key_degree(self, key) -> int:
        return sum(e * d for e, d in zip(key, self.gen_degrees))

    def key_length(self, key) -> int:
        return sum(key)

    def mul_keys(self, k1, k2) -> Vector:
        out = tuple(a + b for a, b in zip(k1, k2))
        for e, n in zip(out, self.nilpotency):
            if n is not None and e >= n:
                return Vector.zero()
        if sum(out) > self.length_bound:
            raise Overflow(
                f"monomial length {sum(out)} exceeds guard {self.length_bound}")
        sign = 1
        for i in range(len(out)):
            if not self.gen_degrees[i] % 2 or not k2[i]:
                continue
            crossings = sum(k1[j] for j in range(i + 1, len(out)) if self.gen_degrees[j] % 2)
            if (k2[i] * crossings) % 2:
                sign = -sign
        return Vector.basis(out, sign)

    def monomial(self, exponents: dict[str, int], coeff=ONE) -> Vector:
        key = tuple(exponents.get(s, 0) for s in self.gen_symbols)
        for e, n in zip(key, self.nilpotency):
            if n is not None and e >= n:
                return Vector.zero()
        if sum(key) > self.length_bound:
            raise Overflow(f"monomial length {sum(key)} exceeds guard {self.length_bound}")
        return Vector.basis(key, coeff)

    def show_key(self, key) -> str:
        parts = [f"{s}^{e}" if e > 1 else s for s, e in zip(self.gen_symbols, key) if e]
        return "*".join(parts) if parts else "1"

    def order_check_keys(self):
        gens = []
        for i in range(len(self.gen_symbols)):
            k = tuple(1 if j == i else 0 for j in range(len(self.gen_symbols)))
            if k in set(self.space.keys()):
                gens.append(k)
        return tuple(gens)


class SymWordAlgebra(CommAlgebra):
    """S_{<=W}(U) with the symmetric product, as an algebra backend."""

    def __init__(self, sym_space: SymSpace):
        self.sym_space = sym_space
        self.space = sym_space
        self.unit_key = ()

    def mul_keys(self, k1, k2) -> Vector:
        cw = self.sym_space.product_words(k1, k2)
        if cw is None:
            return Vector.zero()
        word, s = cw
        return Vector.basis(word, s)

    def order_check_keys(self):
        return self.sym_space.words_of_weight(1)


# -- exponential / logarithmic automorphisms --------------------------------------


def exp_automorphism(A: CommAlgebra, arity_bound: int) -> TaylorMorphism:
    """Taylor data e_n(a_1,...,a_n) = a_1...a_n."""
    def fn(n, word):
        return A.product_keys(word)
    return TaylorMorphism(A.space, A.space, fn, arity_bound, label="E")


def log_automorphism(A: CommAlgebra, arity_bound: int) -> TaylorMorphism:
    """Taylor data l_n(a_1,...,a_n) = (-1)^{n-1} (n-1)! a_1...a_n; inverse of E."""
    def fn(n, word):
        coeff = Q((-1) ** (n - 1) * factorial(n - 1))
        return A.product_keys(word).scale(coeff)
    return TaylorMorphism(A.space, A.space, fn, arity_bound, label="L")


# -- cumulants ---------------------------------------------------------------------


def _args_degrees(space, parts: tuple[Vector, ...]) -> tuple[int, ...]:
    return tuple(vector_degree(space, p) or 0 for p in parts)


def cumulant_partition(A: CommAlgebra, B: CommAlgebra, f: LinOp, args: tuple[Vector, ...]) -> Vector:
    """Closed formula: sum over unordered set partitions with (-1)^{k-1}(k-1)! weights."""
    def kernel(*parts):
        n = len(parts)
        degs = _args_degrees(A.space, parts)
        out = Vector.zero()
        for part in set_partitions(n):
            flat = tuple(p for block in part for p in block)
            s = koszul_sign(flat, degs)
            k = len(part)
            coeff = Q((-1) ** (k - 1) * factorial(k - 1)) * s
            images = [f(A.product_list([parts[p] for p in block])) for block in part]
            term = B.product_list(images)
            out = out + term.scale(coeff)
        return out

    return expand_homogeneous(A.space, args, kernel)


def cumulant_recursion(A: CommAlgebra, B: CommAlgebra, f: LinOp, args: tuple[Vector, ...]) -> Vector:
    """Two-slot recursion: kappa_{n+2}(..., b, c) from kappa_{n+1}(..., bc) and products."""
    def rec(parts: tuple[Vector, ...]) -> Vector:
        n = len(parts)
        if n == 1:
            return f(parts[0])
        rest, b, c = parts[:-2], parts[-2], parts[-1]
        out = rec(rest + (A.mul(b, c),))
        m = len(rest)
        degs = _args_degrees(A.space, rest) + (vector_degree(A.space, b) or 0,
                                               vector_degree(A.space, c) or 0)
        for i in range(m + 1):
            for unsh in multi_unshuffles((i, m - i)):
                perm = unsh[0] + (m,) + unsh[1] + (m + 1,)
                s = koszul_sign(perm, degs)
                left = rec(tuple(rest[p] for p in unsh[0]) + (b,))
                right = rec(tuple(rest[p] for p in unsh[1]) + (c,))
                out = out - B.mul(left, right).scale(s)
        return out

    return expand_homogeneous(A.space, args, lambda *parts: rec(parts))


def cumulant_composite(A: CommAlgebra, B: CommAlgebra, f: LinOp, args: tuple[Vector, ...],
                       cache: dict | None = None) -> Vector:
    """Definition route: corestriction of L o S(f) o E applied to a_1 o ... o a_n."""
    n = len(args)
    key = ("cum", n)
    if cache is not None and key in cache:
        E, L, Sf, SA, SB = cache[key]
    else:
        SA, SB = SymSpace(A.space, n), SymSpace(B.space, n)
        E = exp_automorphism(A, n)
        L = log_automorphism(B, n)
        Sf = TaylorMorphism.from_linear(f)
        if cache is not None:
            cache[key] = (E, L, Sf, SA, SB)
    word_el = _word_element(A.space, args)
    out = Vector.zero()
    for w, c in word_el.items():
        y = E.apply_word(w, n)
        z = Vector.zero()
        for u, cu in y.items():
            z = z + Sf.apply_word(u, n).scale(cu)
        for u, cu in z.items():
            img = L.apply_word(u, n)
            out = out + Vector({v[0]: cv for v, cv in img.items() if len(v) == 1}).scale(c * cu)
    return out


def _word_element(space, args: tuple[Vector, ...]) -> Vector:
    """a_1 o ... o a_n as an element of S(V), expanded multilinearly."""
    out = Vector()

    def rec(i, keys, coeff):
        if i == len(args):
            cw = canonical_word(space, keys)
            if cw is not None:
                w, s = cw
                v = out.c.get(w, ZERO) + coeff * s
                if v:
                    out.c[w] = v
                else:
                    out.c.pop(w, None)
            return
        for k, c in args[i].items():
            rec(i + 1, keys + (k,), coeff * c)

    rec(0, (), ONE)
    return out


def cumulants(A: CommAlgebra, B: CommAlgebra, f: LinOp, args: tuple[Vector, ...],
              routes: tuple[str, ...] = ("partition", "recursion"), cache: dict | None = None) -> Vector:
    """Evaluate kappa(f)_n on args by the requested routes; exact agreement required."""
    if f(A.unit()) != B.unit():
        raise ValueError("cumulants need a unital map: f(1_A) = 1_B")
    results = {}
    for route in routes:
        if route == "partition":
            results[route] = cumulant_partition(A, B, f, args)
        elif route == "recursion":
            results[route] = cumulant_recursion(A, B, f, args)
        elif route == "composite":
            results[route] = cumulant_composite(A, B, f, args, cache)
        else:
            raise ValueError(f"unknown route {route!r}")
    vals = list(results.values())
    for other in vals[1:]:
        if other != vals[0]:
            from .core import RouteDisagreement
            raise RouteDisagreement(f"cumulant routes disagree: {sorted(results)}")
    return vals[0]


# -- Koszul brackets ---------------------------------------------------------------


def koszul_closed(A: CommAlgebra, delta: LinOp, args: tuple[Vector, ...]) -> Vector:
    """Unshuffle formula; the i = 0 block carries the delta(1)-correction terms."""
    du = delta(A.unit())

    def kernel(*parts):
        n = len(parts)
        degs = _args_degrees(A.space, parts)
        out = Vector.zero()
        for i in range(0, n + 1):
            sign_i = Q((-1) ** (n - i))
            for unsh in multi_unshuffles((i, n - i)):
                s = unshuffle_sign(unsh, degs)
                head = delta(A.product_list([parts[p] for p in unsh[0]])) if i else du
                if head.is_zero():
                    continue
                tail = A.product_list([parts[p] for p in unsh[1]])
                out = out + A.mul(head, tail).scale(sign_i * s)
        return out

    return expand_homogeneous(A.space, args, kernel)


def koszul_recursion(A: CommAlgebra, delta: LinOp, args: tuple[Vector, ...]) -> Vector:
    """Recursion K_{n+2}(..., b, c) = K_{n+1}(..., bc) - K_{n+1}(..., b)c -+ K_{n+1}(..., c)b."""
    du = delta(A.unit())

    def rec(parts: tuple[Vector, ...]) -> Vector:
        n = len(parts)
        if n == 1:
            return delta(parts[0]) - A.mul(du, parts[0])
        rest, b, c = parts[:-2], parts[-2], parts[-1]
        db = vector_degree(A.space, b) or 0
        dc = vector_degree(A.space, c) or 0
        out = rec(rest + (A.mul(b, c),))
        out = out - A.mul(rec(rest + (b,)), c)
        sign = -1 if (db % 2 and dc % 2) else 1
        out = out - A.mul(rec(rest + (c,)), b).scale(sign)
        return out

    return expand_homogeneous(A.space, args, lambda *parts: rec(parts))


def koszul_composite(A: CommAlgebra, delta: LinOp, args: tuple[Vector, ...],
                     cache: dict | None = None) -> Vector:
    """Definition route: corestriction of L o delta~ o E (requires delta(1) = 0)."""
    if not delta(A.unit()).is_zero():
        raise ValueError("composite Koszul route needs delta(1) = 0")
    n = len(args)
    key = ("kos", n)
    if cache is not None and key in cache:
        E, L = cache[key]
    else:
        E = exp_automorphism(A, n)
        L = log_automorphism(A, n)
        if cache is not None:
            cache[key] = (E, L)
    tilde = TaylorCoderivation.from_linear(delta)
    word_el = _word_element(A.space, args)
    out = Vector.zero()
    for w, c in word_el.items():
        y = E.apply_word(w, n)
        z = Vector.zero()
        for u, cu in y.items():
            z = z + tilde.apply_word(u, n).scale(cu)
        for u, cu in z.items():
            img = L.apply_word(u, n)
            out = out + Vector({v[0]: cv for v, cv in img.items() if len(v) == 1}).scale(c * cu)
    return out


def koszul_brackets(A: CommAlgebra, delta: LinOp, args: tuple[Vector, ...],
                    routes: tuple[str, ...] = ("closed", "recursion"), cache: dict | None = None) -> Vector:
    """Evaluate K(delta)_n on args by the requested routes; exact agreement required."""
    results = {}
    for route in routes:
        if route == "closed":
            results[route] = koszul_closed(A, delta, args)
        elif route == "recursion":
            results[route] = koszul_recursion(A, delta, args)
        elif route == "composite":
            results[route] = koszul_composite(A, delta, args, cache)
        else:
            raise ValueError(f"unknown route {route!r}")
    vals = list(results.values())
    for other in vals[1:]:
        if other != vals[0]:
            from .core import RouteDisagreement
            raise RouteDisagreement(f"Koszul bracket routes disagree: {sorted(results)}")
    return vals[0]


def derivation_defect(A: CommAlgebra, delta: LinOp, keys=None):
    """First basis pair where K(delta)_2 != 0, or None if delta is a derivation there."""
    keys = tuple(A.space.keys() if keys is None else keys)
    for i, k1 in enumerate(keys):
        for k2 in keys[i:]:
            val = koszul_closed(A, delta, (Vector.basis(k1), Vector.basis(k2)))
            if not val.is_zero():
                return (k1, k2)
    return None


# -- order filtration --------------------------------------------------------------


def _arg_tuples(keys, n):
    """Canonical multisets of size n over keys (symmetry makes these spanning)."""
    keys = tuple(keys)

    def rec(start, acc):
        if len(acc) == n:
            yield tuple(acc)
            return
        for i in range(start, len(keys)):
            yield from rec(i, acc + [keys[i]])

    yield from rec(0, [])


def koszul_vanishes(A: CommAlgebra, delta: LinOp, n: int, keys=None) -> tuple | None:
    """Witness tuple where K(delta)_n != 0 on the checking corpus, else None."""
    keys = A.order_check_keys() if keys is None else keys
    for tup in _arg_tuples(keys, n):
        args = tuple(Vector.basis(k) for k in tup)
        cw = canonical_word(A.space, tup)
        if cw is None:
            continue
        if not koszul_recursion(A, delta, args).is_zero():
            return tup
    return None


def diff_order(A: CommAlgebra, delta: LinOp, max_order: int, keys=None) -> int | None:
    """Largest arity with a nonvanishing Koszul bracket on the corpus (that is,
    the differential-operator order); None if K_{max_order+1} still fails to
    vanish (reported UNBOUNDED by callers).

    On a generating corpus this is sound: if K_m vanishes on generator tuples
    for every m > k, the two-slot recursion propagates the vanishing to all
    product arguments, downward in product length.
    """
    if koszul_vanishes(A, delta, max_order + 1, keys) is not None:
        return None
    order = 0
    for m in range(1, max_order + 1):
        if koszul_vanishes(A, delta, m, keys) is not None:
            order = m
    return order


# -- lifts to the symmetric coalgebra ----------------------------------------------


def kos_lift(A: CommAlgebra, delta: LinOp, arity_bound: int) -> TaylorCoderivation:
    """Package all K(delta)_n as a coderivation on S(A); needs delta(1) = 0."""
    if not delta(A.unit()).is_zero():
        raise ValueError("kos_lift needs delta(1) = 0")

    def fn(n, word):
        return koszul_recursion(A, delta, tuple(Vector.basis(k) for k in word))

    return TaylorCoderivation(A.space, fn, arity_bound, delta.degree, label=f"Kos({delta.label})")


def cumulant_lift(A: CommAlgebra, B: CommAlgebra, f: LinOp, arity_bound: int) -> TaylorMorphism:
    """Package all kappa(f)_n as a coalgebra morphism S(A) -> S(B)."""
    if f(A.unit()) != B.unit():
        raise ValueError("cumulant_lift needs f(1_A) = 1_B")

    def fn(n, word):
        return cumulant_recursion(A, B, f, tuple(Vector.basis(k) for k in word))

    return TaylorMorphism(A.space, B.space, fn, arity_bound, label=f"kappa({f.label})")


# -- exponentials and Maurer-Cartan evaluation --------------------------------------


def exp_endomorphism(A: CommAlgebra, delta: LinOp, certificate: int) -> LinOp:
    """exp(delta) = sum_{j<m} delta^j / j! for nilpotent degree-0 delta with delta^m = 0."""
    if delta.degree != 0:
        raise ValueError("exp needs a degree-0 operator")
    power = delta.power(certificate)
    bad = [k for k in A.space.keys() if not power.on_key(k).is_zero()]
    if bad:
        raise ValueError(f"nilpotency certificate {certificate} fails at {bad[0]}")

    def fn(key):
        out = Vector.basis(key)
        term = Vector.basis(key)
        for j in range(1, certificate):
            term = delta(term)
            out = out + term.scale(Q(1, factorial(j)))
        return out

    return LinOp(A.space, A.space, 0, fn, f"exp({delta.label})")


def algebra_exponential(A: CommAlgebra, a: Vector, nilpotency: int) -> Vector:
    """e^a = 1 + a + a^2/2! + ... for a with a^nilpotency = 0 (verified)."""
    out = A.unit()
    term = A.unit()
    for j in range(1, nilpotency + 1):
        term = A.mul(term, a)
        if term.is_zero():
            break
        if j == nilpotency:
            raise ValueError(f"element not nilpotent within {nilpotency}")
        out = out + term.scale(Q(1, factorial(j)))
    return out


def mc_koszul_eval(A: CommAlgebra, delta: LinOp, a: Vector, nilpotency: int) -> Vector:
    """sum_n K(delta)_n(a,...,a)/n!, asserted equal to e^{-a} delta(e^a).

    Only defined for degree-0 nilpotent a.
    """
    if vector_degree(A.space, a) not in (None, 0):
        raise ValueError("Maurer-Cartan evaluation needs a degree-0 element")
    series = Vector.zero()
    for n in range(1, 2 * nilpotency - 1):
        term = koszul_recursion(A, delta, (a,) * n)
        series = series + term.scale(Q(1, factorial(n)))
    ea = algebra_exponential(A, a, nilpotency)
    e_minus_a = algebra_exponential(A, -1 * a, nilpotency)
    direct = A.mul(e_minus_a, delta(ea))
    if series != direct:
        from .core import RouteDisagreement
        raise RouteDisagreement("Koszul MC series != e^{-a} delta(e^a)")
    return series
