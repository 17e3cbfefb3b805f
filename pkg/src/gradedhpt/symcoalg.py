"""Truncated symmetric coalgebra S_{<=W}(V): words, coproduct, Taylor calculus, convolution.

Coalgebra morphisms and coderivations of S(V) are handled through their Taylor
coefficients (corestrictions); the two reconstruction formulas, the coderivation
bracket, the unshuffle coproduct and the convolution Hopf calculus (star product,
exp/log, antipode) all live here, together with the dual cocumulant / Koszul
cobracket recursions.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Iterable

from .core import (
    LinOp,
    ONE,
    Overflow,
    Q,
    Vector,
    ZERO,
    compositions,
    expand_multilinear,
    koszul_sign,
    multi_unshuffles,
    set_partitions,
    unshuffle_sign,
)

SymWord = tuple  # ascending tuple of base keys


def canonical_word(base, keys: Iterable) -> tuple[SymWord, int] | None:
    """Sort ``keys`` ascending; return (word, Koszul sign), or None if an odd key repeats."""
    keys = tuple(keys)
    degs = tuple(base.degree(k) for k in keys)
    order = tuple(sorted(range(len(keys)), key=lambda i: (_sort_key(keys[i]), i)))
    word = tuple(keys[i] for i in order)
    for a, b in zip(word, word[1:]):
        if a == b and base.degree(a) % 2:
            return None
    return word, koszul_sign(order, degs)


def _sort_key(k):
    # ints and tuples never mix within one space; tuples sort lexicographically
    return k


class SymSpace:
    """Weight-truncated symmetric power space: canonical words of weight <= W over ``base``."""

    def __init__(self, base, weight_bound: int):
        self.base = base
        self.weight_bound = weight_bound
        self._keys: tuple[SymWord, ...] | None = None
        self._cop: dict = {}
        self._red: dict = {}

    def __eq__(self, other):
        return (isinstance(other, SymSpace) and self.base == other.base
                and self.weight_bound == other.weight_bound)

    def __hash__(self):
        return hash(("SymSpace", self.weight_bound, _space_token(self.base)))

    def degree(self, word: SymWord) -> int:
        return sum(self.base.degree(k) for k in word)

    def keys(self) -> tuple[SymWord, ...]:
        if self._keys is None:
            base_keys = sorted(self.base.keys(), key=_sort_key)
            pos = {k: i for i, k in enumerate(base_keys)}
            words: list[SymWord] = [()]
            frontier: list[SymWord] = [()]
            for _ in range(self.weight_bound):
                nxt: list[SymWord] = []
                for w in frontier:
                    start = pos[w[-1]] if w else 0
                    for k in base_keys[start:]:
                        if w and k == w[-1] and self.base.degree(k) % 2:
                            continue
                        nxt.append(w + (k,))
                words.extend(nxt)
                frontier = nxt
            self._keys = tuple(words)
        return self._keys

    def words_of_weight(self, n: int) -> tuple[SymWord, ...]:
        return tuple(w for w in self.keys() if len(w) == n)

    def unit(self) -> Vector:
        return Vector.basis(())

    # -- coproduct -------------------------------------------------------------
    def coproduct_terms(self, word: SymWord) -> tuple[tuple[SymWord, SymWord, int], ...]:
        """Unshuffle coproduct: all splittings (left, right, Koszul sign)."""
        out = self._cop.get(word)
        if out is None:
            degs = tuple(self.base.degree(k) for k in word)
            n = len(word)
            terms = []
            for i in range(n + 1):
                for unsh in multi_unshuffles((i, n - i)):
                    s = unshuffle_sign(unsh, degs)
                    left = tuple(word[p] for p in unsh[0])
                    right = tuple(word[p] for p in unsh[1])
                    terms.append((left, right, s))
            out = tuple(terms)
            self._cop[word] = out
        return out

    def reduced_coproduct_terms(self, word: SymWord) -> tuple[tuple[SymWord, SymWord, int], ...]:
        out = self._red.get(word)
        if out is None:
            out = tuple(t for t in self.coproduct_terms(word) if t[0] and t[1])
            self._red[word] = out
        return out

    # -- product ---------------------------------------------------------------
    def product_words(self, w1: SymWord, w2: SymWord) -> tuple[SymWord, int] | None:
        if len(w1) + len(w2) > self.weight_bound:
            raise Overflow(f"word weight {len(w1) + len(w2)} exceeds bound {self.weight_bound}")
        return canonical_word(self.base, w1 + w2)

    def product(self, a: Vector, b: Vector) -> Vector:
        out = Vector()
        for w1, c1 in a.items():
            for w2, c2 in b.items():
                cw = self.product_words(w1, w2)
                if cw is None:
                    continue
                word, s = cw
                v = out.c.get(word, ZERO) + c1 * c2 * s
                if v:
                    out.c[word] = v
                else:
                    out.c.pop(word, None)
        return out


def _space_token(base) -> object:
    # stable identity token for hashing spaces built over bases or other spaces
    if isinstance(base, SymSpace):
        return ("S", base.weight_bound, _space_token(base.base))
    return base if base.__hash__ else id(base)


def unshuffle_coproduct(space: SymSpace, word: SymWord):
    """Spec-level alias: formal sum of word pairs with Koszul signs."""
    return space.coproduct_terms(word)


def assemble_word(base, factors: list[Vector], bound: int) -> Vector:
    """Symmetric product of weight-1 vectors: canonical weight-k words with signs."""
    if len(factors) > bound:
        raise Overflow(f"assembled word weight {len(factors)} exceeds bound {bound}")
    out = Vector()

    def rec(i: int, keys: tuple, coeff):
        if i == len(factors):
            cw = canonical_word(base, keys)
            if cw is not None:
                word, s = cw
                v = out.c.get(word, ZERO) + coeff * s
                if v:
                    out.c[word] = v
                else:
                    out.c.pop(word, None)
            return
        for k, c in factors[i].items():
            rec(i + 1, keys + (k,), coeff * c)

    rec(0, (), ONE)
    return out


class TaylorMorphism:
    """Degree-0 coalgebra-morphism data: graded-symmetric tables f_n : V^{on} -> W.

    ``component_fn(n, word)`` must return the value on a canonical word; values on
    permuted tuples follow by the Koszul sign.  ``exact_beyond`` asserts f_n = 0
    for n > arity_bound (as opposed to merely unknown).
    """

    def __init__(self, dom_base, cod_base, component_fn: Callable[[int, SymWord], Vector],
                 arity_bound: int, exact_beyond: bool = True, label: str = ""):
        self.dom_base = dom_base
        self.cod_base = cod_base
        self._fn = component_fn
        self._cache: dict = {}
        self.arity_bound = arity_bound
        self.exact_beyond = exact_beyond
        self.label = label

    @staticmethod
    def from_tables(dom_base, cod_base, tables: dict[int, dict[SymWord, Vector]],
                    arity_bound: int, exact_beyond: bool = True, label: str = "") -> "TaylorMorphism":
        def fn(n, word):
            return tables.get(n, {}).get(word, Vector.zero())
        return TaylorMorphism(dom_base, cod_base, fn, arity_bound, exact_beyond, label)

    @staticmethod
    def from_linear(f: LinOp, arity_bound: int = 1, label: str = "") -> "TaylorMorphism":
        """S(f): the coalgebra morphism with f_1 = f and no higher coefficients."""
        def fn(n, word):
            return f.on_key(word[0]) if n == 1 else Vector.zero()
        return TaylorMorphism(f.domain, f.codomain, fn, max(arity_bound, 1), True, label or f"S({f.label})")

    @staticmethod
    def identity(base, arity_bound: int = 1) -> "TaylorMorphism":
        return TaylorMorphism.from_linear(LinOp.identity(base), arity_bound, "id")

    def component(self, n: int, word: SymWord) -> Vector:
        if n != len(word):
            raise ValueError("arity/word mismatch")
        if n > self.arity_bound:
            if self.exact_beyond:
                return Vector.zero()
            raise Overflow(f"Taylor coefficient f_{n} beyond arity bound {self.arity_bound}")
        key = word
        v = self._cache.get(key)
        if v is None:
            v = self._fn(n, word)
            self._cache[key] = v
        return v

    def eval_keys(self, keys: tuple) -> Vector:
        cw = canonical_word(self.dom_base, keys)
        if cw is None:
            return Vector.zero()
        word, s = cw
        return self.component(len(word), word).scale(s)

    def eval(self, args: tuple[Vector, ...]) -> Vector:
        return expand_multilinear(args, lambda *keys: self.eval_keys(keys))

    def apply_word(self, word: SymWord, cod_bound: int) -> Vector:
        """Reconstruction of the full morphism on a canonical word."""
        n = len(word)
        if n == 0:
            return Vector.basis(())
        degs = tuple(self.dom_base.degree(k) for k in word)
        out = Vector()
        for comp in compositions(n):
            k = len(comp)
            if not self.exact_beyond and max(comp) > self.arity_bound:
                raise Overflow(f"need Taylor coefficient beyond bound {self.arity_bound}")
            if max(comp) > self.arity_bound:
                continue
            coeff = Q(1, factorial(k))
            for unsh in multi_unshuffles(comp):
                s = unshuffle_sign(unsh, degs)
                factors = []
                dead = False
                for block in unsh:
                    fv = self.component(len(block), tuple(word[p] for p in block))
                    if fv.is_zero():
                        dead = True
                        break
                    factors.append(fv)
                if dead:
                    continue
                out = out + assemble_word(self.cod_base, factors, cod_bound).scale(coeff * s)
        return out

    def as_map(self, dom_space: SymSpace, cod_space: SymSpace) -> LinOp:
        if dom_space.base != self.dom_base or cod_space.base != self.cod_base:
            raise ValueError("space/base mismatch")
        return LinOp(dom_space, cod_space, 0,
                     lambda w: self.apply_word(w, cod_space.weight_bound),
                     self.label or "F")

    def compose(self, inner: "TaylorMorphism", arity_bound: int | None = None) -> "TaylorMorphism":
        """Taylor coefficients of self o inner, computed through weight-n words."""
        bound = arity_bound if arity_bound is not None else min(self.arity_bound, inner.arity_bound)
        if self.dom_base != inner.cod_base:
            raise ValueError("composition base mismatch")

        def fn(n, word):
            mid = inner.apply_word(word, n)
            out = Vector.zero()
            for w, c in mid.items():
                out = out + self.component(len(w), w).scale(c)
            return out

        return TaylorMorphism(inner.dom_base, self.cod_base, fn, bound,
                              self.exact_beyond and inner.exact_beyond,
                              f"({self.label})o({inner.label})")


def coalg_morphism_apply(F: TaylorMorphism, space: SymSpace, x: Vector,
                         cod_space: SymSpace | None = None) -> Vector:
    """Apply the coalgebra morphism determined by Taylor data to an element of S(V)."""
    cod = cod_space if cod_space is not None else space
    out = Vector()
    for w, c in x.items():
        out = out + F.apply_word(w, cod.weight_bound).scale(c)
    return out


class TaylorCoderivation:
    """Coderivation data: tables q_n : V^{on} -> V (n >= 1) plus constant term q0 in V."""

    def __init__(self, base, component_fn: Callable[[int, SymWord], Vector], arity_bound: int,
                 degree: int, q0: Vector | None = None, exact_beyond: bool = True, label: str = ""):
        self.base = base
        self._fn = component_fn
        self._cache: dict = {}
        self.arity_bound = arity_bound
        self.degree = degree
        self.q0 = q0 if q0 is not None else Vector.zero()
        self.exact_beyond = exact_beyond
        self.label = label

    @staticmethod
    def from_tables(base, tables: dict[int, dict[SymWord, Vector]], arity_bound: int, degree: int,
                    q0: Vector | None = None, exact_beyond: bool = True, label: str = "") -> "TaylorCoderivation":
        def fn(n, word):
            return tables.get(n, {}).get(word, Vector.zero())
        return TaylorCoderivation(base, fn, arity_bound, degree, q0, exact_beyond, label)

    @staticmethod
    def from_linear(d: LinOp, arity_bound: int = 1, label: str = "") -> "TaylorCoderivation":
        """The linear coderivation extending d (no constant or higher terms)."""
        def fn(n, word):
            return d.on_key(word[0]) if n == 1 else Vector.zero()
        return TaylorCoderivation(d.domain, fn, max(arity_bound, 1), d.degree,
                                  label=label or f"~{d.label}")

    def component(self, n: int, word: SymWord) -> Vector:
        if n != len(word):
            raise ValueError("arity/word mismatch")
        if n == 0:
            return self.q0
        if n > self.arity_bound:
            if self.exact_beyond:
                return Vector.zero()
            raise Overflow(f"Taylor coefficient q_{n} beyond arity bound {self.arity_bound}")
        v = self._cache.get(word)
        if v is None:
            v = self._fn(n, word)
            self._cache[word] = v
        return v

    def eval_keys(self, keys: tuple) -> Vector:
        cw = canonical_word(self.base, keys)
        if cw is None:
            return Vector.zero()
        word, s = cw
        return self.component(len(word), word).scale(s)

    def eval_mixed(self, lead: Vector, rest: tuple) -> Vector:
        """q_{1+len(rest)} evaluated on (lead, rest...) with lead a vector."""
        out = Vector()
        for k, c in lead.items():
            out = out + self.eval_keys((k,) + rest).scale(c)
        return out

    def apply_word(self, word: SymWord, bound: int) -> Vector:
        n = len(word)
        degs = tuple(self.base.degree(k) for k in word)
        out = Vector()
        top = min(n, self.arity_bound) if self.exact_beyond else n
        for i in range(top + 1):
            if i == 0:
                if self.q0.is_zero():
                    continue
                if n + 1 > bound:
                    raise Overflow(f"coderivation output weight {n + 1} exceeds bound {bound}")
                for k, c in self.q0.items():
                    cw = canonical_word(self.base, (k,) + word)
                    if cw is not None:
                        w2, s = cw
                        out = out + Vector.basis(w2, c * s)
                continue
            for unsh in multi_unshuffles((i, n - i)):
                s = unshuffle_sign(unsh, degs)
                qv = self.component(i, tuple(word[p] for p in unsh[0]))
                if qv.is_zero():
                    continue
                rest = tuple(word[p] for p in unsh[1])
                for k, c in qv.items():
                    cw = canonical_word(self.base, (k,) + rest)
                    if cw is not None:
                        w2, s2 = cw
                        v = out.c.get(w2, ZERO) + c * s * s2
                        if v:
                            out.c[w2] = v
                        else:
                            out.c.pop(w2, None)
        return out

    def as_map(self, space: SymSpace) -> LinOp:
        return LinOp(space, space, self.degree,
                     lambda w: self.apply_word(w, space.weight_bound), self.label or "Q")

    def bracket(self, other: "TaylorCoderivation") -> "TaylorCoderivation":
        """Componentwise coderivation bracket [q, r]."""
        if not (self.exact_beyond and other.exact_beyond):
            raise Overflow("bracket needs exact arity data")
        q, r = self, other
        sign = -1 if (q.degree % 2) and (r.degree % 2) else 1

        def fn(n, word):
            degs = tuple(q.base.degree(k) for k in word)
            out = Vector()
            for i in range(n + 1):
                for unsh in multi_unshuffles((i, n - i)):
                    s = unshuffle_sign(unsh, degs)
                    block = tuple(word[p] for p in unsh[0])
                    rest = tuple(word[p] for p in unsh[1])
                    rv = r.component(i, block) if i else r.q0
                    if not rv.is_zero():
                        out = out + q.eval_mixed(rv, rest).scale(s)
                    qv = q.component(i, block) if i else q.q0
                    if not qv.is_zero():
                        out = out - r.eval_mixed(qv, rest).scale(s * sign)
            return out

        q0 = q.eval_mixed(r.q0, ()) - r.eval_mixed(q.q0, ()).scale(sign) if (q.q0 or r.q0) else Vector.zero()
        return TaylorCoderivation(q.base, fn, q.arity_bound + r.arity_bound - 1,
                                  q.degree + r.degree, q0, True, f"[{q.label},{r.label}]")


def coder_bracket(q: TaylorCoderivation, r: TaylorCoderivation) -> TaylorCoderivation:
    return q.bracket(r)


def coderivation_apply(Qd: TaylorCoderivation, space: SymSpace, x: Vector) -> Vector:
    out = Vector()
    for w, c in x.items():
        out = out + Qd.apply_word(w, space.weight_bound).scale(c)
    return out


def taylor_morphism_from_map(F: LinOp, arity_bound: int, exact_beyond: bool = False,
                             label: str = "") -> TaylorMorphism:
    """Corestriction: extract Taylor coefficients of a word-level map (weight-1 parts)."""
    dom: SymSpace = F.domain
    cod: SymSpace = F.codomain

    def fn(n, word):
        img = F.on_key(word)
        return Vector({w[0]: c for w, c in img.items() if len(w) == 1})

    return TaylorMorphism(dom.base, cod.base, fn, arity_bound, exact_beyond, label or F.label)


def taylor_coderivation_from_map(Qm: LinOp, arity_bound: int, exact_beyond: bool = False,
                                 label: str = "") -> TaylorCoderivation:
    space: SymSpace = Qm.domain

    def fn(n, word):
        img = Qm.on_key(word)
        return Vector({w[0]: c for w, c in img.items() if len(w) == 1})

    q0 = Vector({w[0]: c for w, c in Qm.on_key(()).items() if len(w) == 1})
    return TaylorCoderivation(space.base, fn, arity_bound, Qm.degree, q0, exact_beyond, label or Qm.label)


def hat_extension(space: SymSpace, arity: int, table_fn: Callable[[SymWord], Vector],
                  degree: int, label: str = "") -> LinOp:
    """One-block extension of a map U^{o arity} -> S(U) to all of S(U):
    sum over (arity, k-arity)-unshuffles of table(block) o rest."""
    base = space.base

    def fn(word):
        k = len(word)
        if k < arity:
            return Vector.zero()
        degs = tuple(base.degree(x) for x in word)
        out = Vector.zero()
        for unsh in multi_unshuffles((arity, k - arity)):
            s = unshuffle_sign(unsh, degs)
            val = table_fn(tuple(word[p] for p in unsh[0]))
            if val.is_zero():
                continue
            rest = Vector.basis(tuple(word[p] for p in unsh[1]))
            out = out + space.product(val, rest).scale(s)
        return out

    return LinOp(space, space, degree, fn, label or "hat")


# -- convolutionalgebra ---------------------------------------------------------


def counit_map(dom_space: SymSpace, codomain, unit_vec: Vector) -> LinOp:
    """The star-unit: sends the empty word to the codomain unit, reduced words to 0."""
    return LinOp(dom_space, codomain, 0,
                 lambda w: unit_vec if len(w) == 0 else Vector.zero(), "eps")


def convolution(F: LinOp, G: LinOp, mul: Callable[[Vector, Vector], Vector]) -> LinOp:
    """Convolution product F * G = mul o (F (x) G) o Delta on the unshuffle coproduct."""
    dom: SymSpace = F.domain
    if G.domain != dom:
        raise ValueError("convolution factors need the same domain")
    gdeg = G.degree

    def fn(word):
        out = Vector.zero()
        for left, right, s in dom.coproduct_terms(word):
            sgn = s
            if gdeg % 2 and dom.degree(left) % 2:
                sgn = -sgn
            fv = F.on_key(left)
            if fv.is_zero():
                continue
            gv = G.on_key(right)
            if gv.is_zero():
                continue
            out = out + mul(fv, gv).scale(sgn)
        return out

    return LinOp(dom, F.codomain, F.degree + G.degree, fn, f"({F.label})*({G.label})")


def antipode(space: SymSpace) -> LinOp:
    """Hopf antipode of S(V): x_1 o...o x_k -> (-1)^k x_1 o...o x_k."""
    return LinOp(space, space, 0,
                 lambda w: Vector.basis(w, -ONE if len(w) % 2 else ONE), "s")


def star_exp(phi: LinOp, mul: Callable[[Vector, Vector], Vector], unit_vec: Vector) -> LinOp:
    """exp_*(phi) = eps + sum 1/k! phi^{*k}; requires phi(1) = 0 (finite on each word)."""
    if not phi.on_key(()).is_zero():
        raise ValueError("star_exp needs phi(1) = 0")
    dom: SymSpace = phi.domain
    powers: list[LinOp] = [counit_map(dom, phi.codomain, unit_vec), phi]

    def fn(word):
        n = len(word)
        while len(powers) <= n:
            powers.append(convolution(powers[-1], phi, mul))
        out = unit_vec if n == 0 else Vector.zero()
        for k in range(1, n + 1):
            out = out + powers[k].on_key(word).scale(Q(1, factorial(k)))
        return out

    return LinOp(dom, phi.codomain, phi.degree, fn, f"exp*({phi.label})")


def star_log(F: LinOp, mul: Callable[[Vector, Vector], Vector], unit_vec: Vector) -> LinOp:
    """log_*(F) = sum (-1)^{k-1}/k (F - eps)^{*k}; requires F(1) = unit."""
    if F.on_key(()) != unit_vec:
        raise ValueError("star_log needs F(1) = 1")
    dom: SymSpace = F.domain
    eps = counit_map(dom, F.codomain, unit_vec)
    G = F - eps
    powers: list[LinOp] = [eps, G]

    def fn(word):
        n = len(word)
        while len(powers) <= n:
            powers.append(convolution(powers[-1], G, mul))
        out = Vector.zero()
        for k in range(1, n + 1):
            out = out + powers[k].on_key(word).scale(Q((-1) ** (k - 1), k))
        return out

    return LinOp(dom, F.codomain, 0, fn, f"log*({F.label})")


# -- morphism / coderivation certification ---------------------------------------


def _tensor_add(acc: dict, pair: tuple, coeff) -> None:
    v = acc.get(pair, ZERO) + coeff
    if v:
        acc[pair] = v
    else:
        acc.pop(pair, None)


def coalgebra_morphism_defect(F: LinOp, words=None):
    """First word where Delta o F != (F (x) F) o Delta, or None (F degree 0)."""
    dom: SymSpace = F.domain
    cod: SymSpace = F.codomain
    for w in (dom.keys() if words is None else words):
        lhs: dict = {}
        for u, c in F.on_key(w).items():
            for l, r, s in cod.coproduct_terms(u):
                _tensor_add(lhs, (l, r), c * s)
        rhs: dict = {}
        for l, r, s in dom.coproduct_terms(w):
            for u1, c1 in F.on_key(l).items():
                for u2, c2 in F.on_key(r).items():
                    _tensor_add(rhs, (u1, u2), s * c1 * c2)
        if lhs != rhs:
            return w
    return None


def coderivation_defect(Qm: LinOp, words=None):
    """First word where Delta o Q != (Q (x) id + id (x) Q) o Delta, or None."""
    space: SymSpace = Qm.domain
    qdeg = Qm.degree
    for w in (space.keys() if words is None else words):
        lhs: dict = {}
        for u, c in Qm.on_key(w).items():
            for l, r, s in space.coproduct_terms(u):
                _tensor_add(lhs, (l, r), c * s)
        rhs: dict = {}
        for l, r, s in space.coproduct_terms(w):
            for u1, c1 in Qm.on_key(l).items():
                _tensor_add(rhs, (u1, r), s * c1)
            sgn = -s if (qdeg % 2 and space.degree(l) % 2) else s
            for u2, c2 in Qm.on_key(r).items():
                _tensor_add(rhs, (l, u2), sgn * c2)
        if lhs != rhs:
            return w
    return None


# -- brute-force oracles ----------------------------------------------------------


def morphism_partition_oracle(F: TaylorMorphism, word: SymWord, cod_bound: int) -> Vector:
    """Set-partition expansion of a coalgebra morphism on a word (independent of 1/k! route)."""
    n = len(word)
    if n == 0:
        return Vector.basis(())
    degs = tuple(F.dom_base.degree(k) for k in word)
    out = Vector.zero()
    for part in set_partitions(n):
        flat = tuple(p for block in part for p in block)
        s = koszul_sign(flat, degs)
        factors = [F.component(len(block), tuple(word[p] for p in block)) for block in part]
        if any(f.is_zero() for f in factors):
            continue
        out = out + assemble_word(F.cod_base, factors, cod_bound).scale(s)
    return out


# -- cocumulants and Koszul cobrackets --------------------------------------------


class CofreeCoalgebra:
    """S_{<=W}(U) as a coaugmented cocommutative coalgebra (the cofree backend)."""

    def __init__(self, space: SymSpace):
        self.space = space

    def keys(self):
        return self.space.keys()

    def reduced_keys(self):
        return tuple(w for w in self.space.keys() if len(w) >= 1)

    def degree(self, key):
        return self.space.degree(key)

    def unit_key(self):
        return ()

    def coproduct(self, key):
        return self.space.coproduct_terms(key)

    def reduced_coproduct(self, key):
        return self.space.reduced_coproduct_terms(key)


@dataclass
class FiniteCoalgebra:
    """Explicit finite-dimensional cocommutative counital coaugmented coalgebra.

    ``cop`` lists the full coproduct of every basis key as (left, right, coeff)
    triples; the designated ``unit_key`` is grouplike and spans the coaugmentation.
    """

    basis: object
    cop: dict
    unit_key: object

    def __post_init__(self):
        self.verify()

    def keys(self):
        return self.basis.keys()

    def reduced_keys(self):
        return tuple(k for k in self.basis.keys() if k != self.unit_key)

    def degree(self, key):
        return self.basis.degree(key)

    def coproduct(self, key):
        return self.cop.get(key, ())

    def counit(self, key) -> Q:
        return ONE if key == self.unit_key else ZERO

    def reduced_coproduct(self, key):
        """Reduced coproduct on the complement of the coaugmentation."""
        if key == self.unit_key:
            return ()
        acc: dict = {}
        for l, r, c in self.coproduct(key):
            _tensor_add(acc, (l, r), c)
        _tensor_add(acc, (self.unit_key, key), -ONE)
        _tensor_add(acc, (key, self.unit_key), -ONE)
        return tuple((l, r, c) for (l, r), c in acc.items())

    def verify(self):
        if self.basis.degree(self.unit_key) != 0:
            raise ValueError("coaugmentation must have degree 0")
        u = self.unit_key
        if dict(((l, r), c) for l, r, c in self.coproduct(u)) != {(u, u): ONE}:
            raise ValueError("unit key must be grouplike")
        for k in self.keys():
            # counit axiom: (eps (x) id) Delta = id = (id (x) eps) Delta
            left = Vector([(r, c) for l, r, c in self.coproduct(k) if l == u])
            right = Vector([(l, c) for l, r, c in self.coproduct(k) if r == u])
            if left != Vector.basis(k) or right != Vector.basis(k):
                raise ValueError(f"counit axiom fails on {k}")
            # cocommutativity
            acc: dict = {}
            for l, r, c in self.coproduct(k):
                _tensor_add(acc, (l, r), c)
                s = -1 if (self.degree(l) % 2 and self.degree(r) % 2) else 1
                _tensor_add(acc, (r, l), -s * c)
            if acc:
                raise ValueError(f"coproduct not cocommutative on {k}")
            # coassociativity
            acc2: dict = {}
            for l, r, c in self.coproduct(k):
                for l2, r2, c2 in self.coproduct(l):
                    _tensor_add(acc2, (l2, r2, r), c * c2)
                for l2, r2, c2 in self.coproduct(r):
                    _tensor_add(acc2, (l, l2, r2), -c * c2)
            if acc2:
                raise ValueError(f"coproduct not coassociative on {k}")
        # cocompleteness: iterated reduced coproducts vanish
        for k in self.reduced_keys():
            layer = {(k,): ONE}
            for _ in range(len(list(self.keys())) + 1):
                if not layer:
                    break
                nxt: dict = {}
                for word, c in layer.items():
                    for l, r, c2 in self.reduced_coproduct(word[-1]):
                        _tensor_add(nxt, word[:-1] + (l, r), c * c2)
                layer = nxt
            if layer:
                raise ValueError(f"coalgebra not cocomplete at {k}")


def _slot_degree(coalg, tup: tuple, upto: int) -> int:
    return sum(coalg.degree(k) for k in tup[:upto])


def cocumulant_tilde(C, D, f: LinOp, n: int, op_degree: int = 0, _memo=None) -> Callable:
    """Tensor-valued cocumulant recursion (reduced coproducts); returns key -> tensor dict."""
    memo = _memo if _memo is not None else {}

    def kt(m: int, key) -> dict:
        got = memo.get((m, key))
        if got is not None:
            return got
        if m == 1:
            out = {(k,): c for k, c in f.on_key(key).items()}
        else:
            out = {}
            prev = kt(m - 1, key)
            # (id^{m-2} (x) Delta_D) applied to the last slot
            for tup, c in prev.items():
                for l, r, s in D.reduced_coproduct(tup[-1]):
                    _tensor_add(out, tup[:-1] + (l, r), c * s)
            # subtract shuffled products of lower cocumulants
            for k in range(m - 1):
                for l, r, s in C.reduced_coproduct(key):
                    a = kt(k + 1, l)
                    if not a:
                        continue
                    b = kt(m - 1 - k, r)
                    if not b:
                        continue
                    sgn0 = s
                    if op_degree % 2 and C.degree(l) % 2:
                        sgn0 = -sgn0
                    for ta, ca in a.items():
                        for tb, cb in b.items():
                            tup = ta + tb  # m slots total
                            degs = tuple(D.degree(x) for x in tup)
                            # tau_k: move slot k (the last output of a) to position m-2
                            perm = list(range(m))
                            moved = perm.pop(k)
                            perm.insert(m - 2, moved)
                            s1 = koszul_sign(tuple(perm), degs)
                            tup1 = tuple(tup[p] for p in perm)
                            degs1 = tuple(D.degree(x) for x in tup1)
                            # shuffle the first k slots with the next m-2-k, last two fixed
                            for positions in _shuffles(k, m - 2 - k):
                                s2 = koszul_sign(positions + (m - 2, m - 1), degs1)
                                tup2 = tuple(tup1[p] for p in positions) + tup1[m - 2:]
                                _tensor_add(out, tup2, -sgn0 * ca * cb * s1 * s2)
        memo[(m, key)] = out
        return out

    return lambda key: kt(n, key)


def _shuffles(k: int, m: int) -> tuple[tuple[int, ...], ...]:
    """Permutations of 0..k+m-1 interleaving block [0..k) with block [k..k+m)."""
    from itertools import combinations as _comb
    out = []
    for pos in _comb(range(k + m), k):
        left = list(range(k))
        right = list(range(k, k + m))
        perm = []
        for p in range(k + m):
            perm.append(left.pop(0) if p in pos else right.pop(0))
        # perm maps new position -> source slot; we need source order at new positions
        out.append(tuple(perm))
    return tuple(out)


def project_tensor_to_sym(base, tensor: dict) -> Vector:
    """Natural projection C^{(x)n} -> C^{on}: canonicalize each tensor word."""
    out = Vector()
    for tup, c in tensor.items():
        cw = canonical_word(base, tup)
        if cw is not None:
            word, s = cw
            v = out.c.get(word, ZERO) + c * s
            if v:
                out.c[word] = v
            else:
                out.c.pop(word, None)
    return out


def cocumulants_cofree(C, D, f: LinOp, n: int, memo=None) -> Callable:
    """kappa^co(f)_n = (1/n!) pi ktilde_n; zero for all n >= 2 iff f is a coalgebra morphism."""
    kt = cocumulant_tilde(C, D, f, n, 0, memo)

    def comp(key) -> Vector:
        return project_tensor_to_sym(D, kt(key)).scale(Q(1, factorial(n)))

    return comp


def koszul_cobracket_tilde(C, delta: LinOp, n: int, _memo=None) -> Callable:
    """Tensor-valued Koszul cobracket recursion (reduced coproducts)."""
    memo = _memo if _memo is not None else {}
    ddeg = delta.degree

    def kt(m: int, key) -> dict:
        got = memo.get((m, key))
        if got is not None:
            return got
        if m == 1:
            out = {(k,): c for k, c in delta.on_key(key).items()}
        else:
            out = {}
            prev = kt(m - 1, key)
            for tup, c in prev.items():
                for l, r, s in C.reduced_coproduct(tup[-1]):
                    _tensor_add(out, tup[:-1] + (l, r), c * s)
            for l, r, s in C.reduced_coproduct(key):
                a = kt(m - 1, l)
                if not a:
                    continue
                sgn0 = s
                for ta, ca in a.items():
                    tup = ta + (r,)
                    _tensor_add(out, tup, -sgn0 * ca)
                    degs = tuple(C.degree(x) for x in tup)
                    perm = tuple(range(m - 2)) + (m - 1, m - 2)
                    s1 = koszul_sign(perm, degs)
                    _tensor_add(out, tuple(tup[p] for p in perm), -sgn0 * ca * s1)
        memo[(m, key)] = out
        return out

    return lambda key: kt(n, key)


def koszul_cobrackets_cofree(C, delta: LinOp, n: int, memo=None) -> Callable:
    """K^co(delta)_n = (1/n!) pi Ktilde_n; zero for all n >= 2 iff delta is a coderivation."""
    kt = koszul_cobracket_tilde(C, delta, n, _memo=memo)

    def comp(key) -> Vector:
        return project_tensor_to_sym(C, kt(key)).scale(Q(1, factorial(n)))

    return comp
