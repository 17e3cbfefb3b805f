"""Contractions, the Standard Perturbation Lemma, semifullness certificates,
the symmetrized tensor trick, and homotopy transfer for L-infinity[1] structures.

Transfer results are always computed twice (explicit recursions vs perturbation
series on the symmetrized contraction) and the two answers must agree exactly;
this route duplication is an architectural feature, not a test convenience.
Verification corpora are explicit wherever a guarded backend makes full
enumeration impossible; certificates record the corpus they were checked on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial
from typing import Callable

from .core import (
    ConvergenceFault,
    LinOp,
    ONE,
    Overflow,
    Q,
    RouteDisagreement,
    Vector,
    koszul_sign,
)
from .commalg import CommAlgebra, cumulant_lift, derivation_defect, kos_lift, koszul_closed
from .symcoalg import (
    SymSpace,
    TaylorCoderivation,
    TaylorMorphism,
    assemble_word,
    canonical_word,
    coalgebra_morphism_defect,
    coderivation_defect,
    taylor_coderivation_from_map,
    taylor_morphism_from_map,
)


def words_over(base, keys, max_weight: int, min_weight: int = 0) -> list:
    """Canonical words of bounded weight with letters from a key subset."""
    keys = sorted(keys)
    out = [()] if min_weight == 0 else []
    frontier = [()]
    for w in range(1, max_weight + 1):
        nxt = []
        for word in frontier:
            start = keys.index(word[-1]) if word else 0
            for k in keys[start:]:
                if word and k == word[-1] and base.degree(k) % 2:
                    continue
                nxt.append(word + (k,))
        if w >= min_weight:
            out.extend(nxt)
        frontier = nxt
    return out


@dataclass
class Contraction:
    """(sigma, tau, h) with differentials; the five side conditions and the chain-map
    conditions are verified exactly on the basis at construction."""

    sigma: LinOp
    tau: LinOp
    h: LinOp
    d_A: LinOp
    d_B: LinOp
    verify_on_init: bool = True

    def __post_init__(self):
        if self.verify_on_init:
            self.verify()

    @property
    def space_A(self):
        return self.sigma.domain

    @property
    def space_B(self):
        return self.sigma.codomain

    def verify(self, keys_A=None, keys_B=None) -> None:
        keys_A = tuple(self.space_A.keys() if keys_A is None else keys_A)
        keys_B = tuple(self.space_B.keys() if keys_B is None else keys_B)
        idA, idB = LinOp.identity(self.space_A), LinOp.identity(self.space_B)
        checks_B = [
            ("sigma tau = id", self.sigma @ self.tau, idB),
            ("d_B^2 = 0", self.d_B @ self.d_B, LinOp.zero(self.space_B, degree=2)),
            ("tau chain map", self.tau @ self.d_B, self.d_A @ self.tau),
            ("h tau = 0", self.h @ self.tau, LinOp.zero(self.space_B, self.space_A, -1)),
        ]
        checks_A = [
            ("homotopy identity", self.h @ self.d_A + self.d_A @ self.h,
             self.tau @ self.sigma - idA),
            ("d_A^2 = 0", self.d_A @ self.d_A, LinOp.zero(self.space_A, degree=2)),
            ("sigma chain map", self.sigma @ self.d_A, self.d_B @ self.sigma),
            ("sigma h = 0", self.sigma @ self.h, LinOp.zero(self.space_A, self.space_B, -1)),
            ("h^2 = 0", self.h @ self.h, LinOp.zero(self.space_A, degree=-2)),
        ]
        for name, lhs, rhs in checks_B:
            w = lhs.first_difference(rhs, keys_B)
            if w is not None:
                raise ValueError(f"contraction axiom {name!r} fails at {w}")
        for name, lhs, rhs in checks_A:
            w = lhs.first_difference(rhs, keys_A)
            if w is not None:
                raise ValueError(f"contraction axiom {name!r} fails at {w}")


@dataclass
class Perturbation:
    """Degree-one delta with (d_A + delta)^2 = 0 and a nilpotency certificate m
    for (h delta)^m = 0, both verified exactly on a stated corpus."""

    delta: LinOp
    certificate: int

    def verify(self, C: Contraction, keys=None) -> None:
        keys = tuple(C.space_A.keys() if keys is None else keys)
        d_new = C.d_A + self.delta
        sq = d_new @ d_new
        w = sq.first_difference(LinOp.zero(C.space_A, degree=2), keys)
        if w is not None:
            raise ValueError(f"(d + delta)^2 != 0 at {w}")
        power = (C.h @ self.delta).power(self.certificate)
        w = power.first_difference(LinOp.zero(C.space_A, degree=0), keys)
        if w is not None:
            raise ConvergenceFault(
                f"(h delta)^{self.certificate} != 0 at {w}; certificate exceeded")


def perturb(C: Contraction, p: Perturbation, verify_input=None,
            verify_output=None, verify_output_B=None) -> tuple[LinOp, Contraction]:
    """Standard Perturbation Lemma: returns (delta_B, perturbed contraction).

    All series are finite sums of length bounded by the nilpotency certificate,
    summed in ascending order.  ``verify_input``/``verify_output*`` are corpora
    of domain/codomain keys (None: the full basis, False: skip).
    """
    if verify_input is not False:
        p.verify(C, None if verify_input is None else verify_input)
    m = p.certificate
    delta, h, sigma, tau = p.delta, C.h, C.sigma, C.tau
    hd_pows = [LinOp.identity(C.space_A)]
    for _ in range(m):
        hd_pows.append((h @ delta) @ hd_pows[-1])

    def series(build):
        out = build(hd_pows[0])
        for n in range(1, m):
            out = out + build(hd_pows[n])
        return out

    delta_B = series(lambda pw: ((sigma @ delta) @ pw) @ tau)
    tau_new = series(lambda pw: pw @ tau)
    h_new = series(lambda pw: pw @ h)
    # sigma (delta h)^n = sigma delta (h delta)^{n-1} h for n >= 1
    sigma_new = sigma + series(lambda pw: ((sigma @ delta) @ pw) @ h)
    out = Contraction(sigma_new, tau_new, h_new, C.d_A + delta, C.d_B + delta_B,
                      verify_on_init=False)
    if verify_output is not False:
        out.verify(keys_A=verify_output, keys_B=verify_output_B)
    return delta_B, out


# -- semifullness ------------------------------------------------------------------


@dataclass
class SemifullReport:
    ok: bool
    failures: list = field(default_factory=list)
    checked: int = 0
    skipped: int = 0
    dg_strength: bool | None = None

    def first_failure(self):
        return self.failures[0] if self.failures else None


def _run_check(rep: SemifullReport, name, witness, fn) -> None:
    try:
        val = fn()
    except Overflow:
        rep.skipped += 1
        return
    rep.checked += 1
    if not val.is_zero():
        rep.ok = False
        rep.failures.append((name, witness, val))


def check_semifull_algebra(C: Contraction, alg_A: CommAlgebra, alg_B: CommAlgebra,
                           keys_A=None, keys_B=None, dg_identities: bool = True) -> SemifullReport:
    """Verify the eight semifull-algebra identities on basis pairs.

    Pairs whose products leave a guarded regime are recorded as skipped, never
    silently ignored.  When d_A is an algebra derivation, the four stronger
    DG identities are verified as well.
    """
    keys_A = tuple(alg_A.space.keys() if keys_A is None else keys_A)
    keys_B = tuple(alg_B.space.keys() if keys_B is None else keys_B)
    sigma, tau, h = C.sigma, C.tau, C.h
    rep = SemifullReport(ok=True)

    uA = alg_A.unit()
    _run_check(rep, "h(1_A) = 0", (), lambda: h(uA))
    _run_check(rep, "sigma(1_A) = 1_B", (), lambda: sigma(uA) - alg_B.unit())
    for i, a in enumerate(keys_A):
        ha = h(Vector.basis(a))
        for b in keys_A[i:]:
            hb = h(Vector.basis(b))
            _run_check(rep, "h(h(a)h(b)) = 0", (a, b), lambda ha=ha, hb=hb: h(alg_A.mul(ha, hb)))
            _run_check(rep, "sigma(h(a)h(b)) = 0", (a, b),
                       lambda ha=ha, hb=hb: sigma(alg_A.mul(ha, hb)))
        for x in keys_B:
            tx = tau(Vector.basis(x))
            _run_check(rep, "h(h(a)tau(x)) = 0", (a, x), lambda ha=ha, tx=tx: h(alg_A.mul(ha, tx)))
            _run_check(rep, "sigma(h(a)tau(x)) = 0", (a, x),
                       lambda ha=ha, tx=tx: sigma(alg_A.mul(ha, tx)))
    for i, x in enumerate(keys_B):
        tx = tau(Vector.basis(x))
        for y in keys_B[i:]:
            ty = tau(Vector.basis(y))
            _run_check(rep, "h(tau(x)tau(y)) = 0", (x, y), lambda tx=tx, ty=ty: h(alg_A.mul(tx, ty)))
            _run_check(rep, "sigma(tau(x)tau(y)) = xy", (x, y),
                       lambda tx=tx, ty=ty, x=x, y=y: sigma(alg_A.mul(tx, ty)) - alg_B.mul_keys(x, y))

    if dg_identities:
        try:
            is_derivation = derivation_defect(alg_A, C.d_A, keys_A) is None
        except Overflow:
            is_derivation = None
        rep.dg_strength = bool(is_derivation) if is_derivation is not None else None
        if is_derivation:
            for a in keys_A:
                va = Vector.basis(a)
                ha = h(va)
                sa = Q((-1) ** (alg_A.space.degree(a) + 1))
                for b in keys_A:
                    vb = Vector.basis(b)
                    _run_check(rep, "A1bis", (a, b), lambda va=va, vb=vb, ha=ha, sa=sa: h(
                        alg_A.mul(ha, vb).scale(sa) + alg_A.mul(va, h(vb))) - alg_A.mul(ha, h(vb)))
                    _run_check(rep, "A3bis", (a, b), lambda va=va, vb=vb, ha=ha, sa=sa: sigma(
                        alg_A.mul(ha, vb).scale(sa) + alg_A.mul(va, h(vb))))
                for x in keys_B:
                    tx = tau(Vector.basis(x))
                    _run_check(rep, "A2bis", (a, x),
                               lambda va=va, ha=ha, tx=tx: h(alg_A.mul(va, tx)) - alg_A.mul(ha, tx))
                    _run_check(rep, "A4bis", (a, x), lambda va=va, tx=tx, x=x: sigma(
                        alg_A.mul(va, tx)) - alg_B.mul(sigma(va), Vector.basis(x)))
    return rep


def semifull_failure_identities(C: Contraction, alg_A: CommAlgebra, alg_B: CommAlgebra,
                                keys_A=None, keys_B=None) -> SemifullReport:
    """The four defect identities: each bis-defect equals (h or sigma) applied to
    K(d_A)_2 on homotopy/section images.  Holds for every semifull algebra contraction."""
    keys_A = tuple(alg_A.space.keys() if keys_A is None else keys_A)
    keys_B = tuple(alg_B.space.keys() if keys_B is None else keys_B)
    sigma, tau, h = C.sigma, C.tau, C.h
    rep = SemifullReport(ok=True)

    def k2(u, v):
        return koszul_closed(alg_A, C.d_A, (u, v))

    for a in keys_A:
        va = Vector.basis(a)
        ha = h(va)
        sa = Q((-1) ** (alg_A.space.degree(a) + 1))
        for b in keys_A:
            vb = Vector.basis(b)
            _run_check(rep, "failureA1", (a, b), lambda va=va, vb=vb, ha=ha, sa=sa: h(
                alg_A.mul(ha, vb).scale(sa) + alg_A.mul(va, h(vb))) - alg_A.mul(ha, h(vb))
                - h(k2(ha, h(vb))))
            _run_check(rep, "failureA3", (a, b), lambda va=va, vb=vb, ha=ha, sa=sa: sigma(
                alg_A.mul(ha, vb).scale(sa) + alg_A.mul(va, h(vb))) - sigma(k2(ha, h(vb))))
        for x in keys_B:
            tx = tau(Vector.basis(x))
            _run_check(rep, "failureA2", (a, x), lambda va=va, ha=ha, tx=tx: h(
                alg_A.mul(va, tx)) - alg_A.mul(ha, tx) - h(k2(ha, tx)))
            _run_check(rep, "failureA4", (a, x), lambda va=va, ha=ha, tx=tx, x=x: sigma(
                alg_A.mul(va, tx)) - alg_B.mul(sigma(va), Vector.basis(x)) - sigma(k2(ha, tx)))
    return rep


def _tensor_of(coalg, op_left: LinOp, op_right: LinOp, v: Vector) -> dict:
    """(op_left (x) op_right) applied to the coproduct of v, as a tensor dict."""
    out: dict = {}
    rdeg = op_right.degree
    for key, c in v.items():
        for l, r, s in coalg.coproduct(key):
            sgn = c * s
            if rdeg % 2 and coalg.degree(l) % 2:
                sgn = -sgn
            lv = op_left.on_key(l)
            if lv.is_zero():
                continue
            rv = op_right.on_key(r)
            if rv.is_zero():
                continue
            for k1, c1 in lv.items():
                for k2, c2 in rv.items():
                    pair = (k1, k2)
                    w = out.get(pair, 0) + sgn * c1 * c2
                    if w:
                        out[pair] = w
                    else:
                        out.pop(pair, None)
    return out


def check_semifull_coalgebra(C: Contraction, coalg_C, coalg_D,
                             keys_C=None, keys_D=None) -> SemifullReport:
    """Verify the semifull-coalgebra identities plus counit/coaugmentation conditions."""
    keys_C = tuple(coalg_C.keys() if keys_C is None else keys_C)
    keys_D = tuple(coalg_D.keys() if keys_D is None else keys_D)
    sigma, tau, h = C.sigma, C.tau, C.h
    rep = SemifullReport(ok=True)

    def run(name, witness, bad):
        rep.checked += 1
        if bad:
            rep.ok = False
            rep.failures.append((name, witness, bad))

    uC, uD = coalg_C.unit_key(), coalg_D.unit_key()
    run("sigma(1_C) = 1_D", (), sigma.on_key(uC) != Vector.basis(uD))
    run("tau(1_D) = 1_C", (), tau.on_key(uD) != Vector.basis(uC))
    run("h(1_C) = 0", (), not h.on_key(uC).is_zero())
    for k in keys_C:
        run("eps sigma = eps", k, sigma.on_key(k)[uD] != (ONE if k == uC else 0))
        run("eps h = 0", k, h.on_key(k)[uC] != 0)
    for k in keys_D:
        run("eps tau = eps", k, tau.on_key(k)[uC] != (ONE if k == uD else 0))

    for k in keys_C:
        hv = h.on_key(k)
        run("(h(x)h) Delta h = 0", k, bool(_tensor_of(coalg_C, h, h, hv)))
        run("(h(x)sigma) Delta h = 0", k, bool(_tensor_of(coalg_C, h, sigma, hv)))
        run("(sigma(x)sigma) Delta h = 0", k, bool(_tensor_of(coalg_C, sigma, sigma, hv)))
    for k in keys_D:
        tv = tau.on_key(k)
        run("(h(x)h) Delta tau = 0", k, bool(_tensor_of(coalg_C, h, h, tv)))
        run("(h(x)sigma) Delta tau = 0", k, bool(_tensor_of(coalg_C, h, sigma, tv)))
        got = _tensor_of(coalg_C, sigma, sigma, tv)
        expect: dict = {}
        for l, r, s in coalg_D.coproduct(k):
            expect[(l, r)] = expect.get((l, r), 0) + s
        expect = {p: v for p, v in expect.items() if v}
        run("(sigma(x)sigma) Delta tau = Delta_D", k, got != expect)
    return rep


# -- symmetrized tensor trick -------------------------------------------------------


def sym_extension(f: LinOp, dom_space: SymSpace, cod_space: SymSpace, label: str = "") -> LinOp:
    """S(f): word -> f(x_1) o ... o f(x_n), the functorial coalgebra morphism."""
    def fn(word):
        if not word:
            return Vector.basis(())
        return assemble_word(cod_space.base, [f.on_key(k) for k in word], cod_space.weight_bound)

    return LinOp(dom_space, cod_space, 0, fn, label or f"S({f.label})")


def hat_homotopy(C: Contraction, space: SymSpace) -> LinOp:
    """The symmetrized contracting homotopy on S(U): the 1/n! double sum with
    tau-sigma factors to the left of the single h slot (h counts as an odd symbol)."""
    tau_sigma = C.tau @ C.sigma
    h = C.h
    base = space.base

    def fn(word):
        n = len(word)
        if n == 0:
            return Vector.zero()
        degs = (-1,) + tuple(base.degree(k) for k in word)
        out = Vector.zero()
        for perm in itertools.permutations(range(1, n + 1)):
            for j in range(1, n + 1):
                arrangement = perm[:j - 1] + (0,) + perm[j - 1:]
                s = koszul_sign(arrangement, degs)
                hv = h.on_key(word[perm[j - 1] - 1])
                if hv.is_zero():
                    continue
                factors = [tau_sigma.on_key(word[p - 1]) for p in perm[:j - 1]]
                factors.append(hv)
                factors.extend(Vector.basis(word[p - 1]) for p in perm[j:])
                out = out + assemble_word(base, factors, space.weight_bound).scale(Q(s, factorial(n)))
        return out

    return LinOp(space, space, -1, fn, "h^")


def symmetrized_contraction(C: Contraction, weight_bound: int,
                            verify_keys_A=None, verify_keys_B=None) -> Contraction:
    """Contraction (S(sigma), S(tau), h^) of S(U) onto S(V) induced by C.

    ``verify_keys_*``: word corpora for exact verification (None: all words,
    feasible only over small bases; False: skip).
    """
    SU = SymSpace(C.space_A, weight_bound)
    SV = SymSpace(C.space_B, weight_bound)
    Ssigma = sym_extension(C.sigma, SU, SV, "S(sigma)")
    Stau = sym_extension(C.tau, SV, SU, "S(tau)")
    hat = hat_homotopy(C, SU)
    dU = TaylorCoderivation.from_linear(C.d_A).as_map(SU)
    dV = TaylorCoderivation.from_linear(C.d_B).as_map(SV)
    out = Contraction(Ssigma, Stau, hat, dU, dV, verify_on_init=False)
    if verify_keys_A is not False:
        out.verify(keys_A=verify_keys_A, keys_B=verify_keys_B)
    return out


# -- homotopy transfer for L-infinity[1] --------------------------------------------


@dataclass
class LinfTransfer:
    """Transferred structure and morphisms, with the perturbed word-level contraction."""

    r: TaylorCoderivation            # structure on the small side
    f: TaylorMorphism                # S(W) -> S(V), linear part tau
    g: TaylorMorphism                # S(V) -> S(W), linear part sigma
    word_contraction: Contraction    # (G, F, H) with differentials (Q, R)
    arity_bound: int


def _transfer_recursions(Qd: TaylorCoderivation, C: Contraction, bound: int,
                         words_W, hat: LinOp):
    """Explicit transfer recursions for f_i, r_i, and the h^-based one for g_i (lazy)."""
    V = C.space_A
    Wb = C.space_B
    f_tables: dict[int, dict] = {1: {}}
    r_tables: dict[int, dict] = {1: {}}
    by_weight: dict[int, list] = {}
    for w in words_W:
        by_weight.setdefault(len(w), []).append(w)
    for w in by_weight.get(1, []):
        f_tables[1][w] = C.tau.on_key(w[0])
        r_tables[1][w] = C.d_B.on_key(w[0])
    for i in range(2, bound + 1):
        F_part = TaylorMorphism.from_tables(Wb, V, f_tables, i - 1, label="F<")
        f_tables[i], r_tables[i] = {}, {}
        for word in by_weight.get(i, []):
            img = F_part.apply_word(word, i)
            acc = Vector.zero()
            for u, c in img.items():
                if len(u) >= 2:
                    acc = acc + Qd.component(len(u), u).scale(c)
            f_tables[i][word] = C.h(acc)
            r_tables[i][word] = C.sigma(acc)

    g_cache: dict = {}

    def g_component(n, word):
        if n == 1:
            return C.sigma.on_key(word[0])
        got = g_cache.get(word)
        if got is not None:
            return got
        hv = hat.on_key(word)
        acc = Vector.zero()
        for u, c in hv.items():
            img = Qd.apply_word(u, bound)
            for u2, c2 in img.items():
                k = len(u2)
                if 1 <= k <= n - 1:
                    acc = acc + g_component(k, u2).scale(c * c2)
        g_cache[word] = acc
        return acc

    f = TaylorMorphism.from_tables(Wb, V, f_tables, bound, label="F")
    r = TaylorCoderivation.from_tables(Wb, r_tables, bound, 1, label="R")
    g = TaylorMorphism(V, Wb, g_component, bound, label="G")
    return r, f, g


def linf_transfer(Qd: TaylorCoderivation, C: Contraction, arity_bound: int,
                  check_routes: bool = True, corpus_A=None, corpus_B=None) -> LinfTransfer:
    """Transfer the L-infinity[1] structure Q along the contraction C.

    Computes (R, F, G) by the explicit recursions and independently by the
    Standard Perturbation Lemma on the symmetrized contraction; the two must
    agree exactly on the stated corpus.  The output is certified: R^2 = 0,
    F and G are coalgebra morphisms, F intertwines Q and R, the perturbed
    homotopy preserves the weight filtration and restricts to h.
    """
    V, Wb = C.space_A, C.space_B
    if Qd.degree != 1 or not Qd.q0.is_zero():
        raise ValueError("need a degree-one coderivation with vanishing constant term")
    corpus_A = tuple(V.keys()) if corpus_A is None else tuple(corpus_A)
    corpus_B = tuple(Wb.keys()) if corpus_B is None else tuple(corpus_B)
    for k in corpus_A:
        if Qd.component(1, (k,)) != C.d_A.on_key(k):
            raise ValueError("linear part of Q must be the contraction differential")
    words_U = words_over(V, corpus_A, arity_bound)
    words_W = words_over(Wb, corpus_B, arity_bound)

    # route 2: perturbation series on the symmetrized contraction
    sym = symmetrized_contraction(C, arity_bound, verify_keys_A=words_U, verify_keys_B=words_W)
    SU: SymSpace = sym.space_A
    SW: SymSpace = sym.space_B
    Qm = Qd.as_map(SU)
    Q_plus = Qm - sym.d_A
    p = Perturbation(Q_plus, arity_bound + 1)
    _, pert = perturb(sym, p, verify_input=words_U, verify_output=words_U,
                      verify_output_B=words_W)
    r2 = taylor_coderivation_from_map(pert.d_B, arity_bound, label="R(spl)")
    f2 = taylor_morphism_from_map(pert.tau, arity_bound, label="F(spl)")
    g2 = taylor_morphism_from_map(pert.sigma, arity_bound, label="G(spl)")

    # route 1: explicit recursions
    r1, f1, g1 = _transfer_recursions(Qd, C, arity_bound, words_W, sym.h)

    if check_routes:
        for w in words_W:
            if not w:
                continue
            n = len(w)
            if r1.component(n, w) != r2.component(n, w):
                raise RouteDisagreement(f"transferred structure differs at arity {n}, {w}")
            if f1.component(n, w) != f2.component(n, w):
                raise RouteDisagreement(f"transferred morphism F differs at arity {n}, {w}")
        for w in words_U:
            if not w:
                continue
            if g1.component(len(w), w) != g2.component(len(w), w):
                raise RouteDisagreement(f"transferred morphism G differs at arity {len(w)}, {w}")
        R_map = pert.d_B
        if not (R_map @ R_map).is_zero_on(words_W):
            raise RouteDisagreement("[R, R] != 0")
        if coalgebra_morphism_defect(pert.tau, words_W) is not None:
            raise RouteDisagreement("F is not a coalgebra morphism")
        if coalgebra_morphism_defect(pert.sigma, words_U) is not None:
            raise RouteDisagreement("G is not a coalgebra morphism")
        if coderivation_defect(R_map, words_W) is not None:
            raise RouteDisagreement("R is not a coderivation")
        lhs, rhs = Qm @ pert.tau, pert.tau @ R_map
        w = lhs.first_difference(rhs, words_W)
        if w is not None:
            raise RouteDisagreement(f"QF != FR at {w}")
        lhs, rhs = pert.sigma @ Qm, R_map @ pert.sigma
        w = lhs.first_difference(rhs, words_U)
        if w is not None:
            raise RouteDisagreement(f"GQ != RG at {w}")
        # Remark-level facts: H preserves the weight filtration and restricts to h
        for word in words_U:
            img = pert.h.on_key(word)
            if any(len(u) > len(word) for u in img.keys()):
                raise RouteDisagreement("perturbed homotopy does not preserve weights")
        for k in corpus_A:
            if pert.h.on_key((k,)) != Vector({(k2,): c for k2, c in C.h.on_key(k).items()}):
                raise RouteDisagreement("perturbed homotopy does not restrict to h on V")

    return LinfTransfer(r1, f1, g1, pert, arity_bound)


@dataclass
class PropTransferReport:
    ok: bool
    semifull: SemifullReport
    mismatches: list
    words_checked: int = 0


def verify_prop_transfer(alg_A: CommAlgebra, alg_B: CommAlgebra, C: Contraction,
                         arity_bound: int, keys_A=None, keys_B=None) -> PropTransferReport:
    """Check that transferring the Koszul-bracket structure of d_A along a semifull
    algebra contraction yields the Koszul brackets of d_B and the cumulants of tau."""
    keys_A = tuple(alg_A.space.keys() if keys_A is None else keys_A)
    keys_B = tuple(alg_B.space.keys() if keys_B is None else keys_B)
    semifull = check_semifull_algebra(C, alg_A, alg_B, keys_A, keys_B)
    if not semifull.ok:
        return PropTransferReport(False, semifull, [("semifull", semifull.first_failure())])
    Qd = kos_lift(alg_A, C.d_A, arity_bound)
    res = linf_transfer(Qd, C, arity_bound, corpus_A=keys_A, corpus_B=keys_B)
    expect_r = kos_lift(alg_B, C.d_B, arity_bound)
    expect_f = cumulant_lift(alg_B, alg_A, C.tau, arity_bound)
    mismatches: list = []
    checked = 0
    for w in words_over(alg_B.space, keys_B, arity_bound, min_weight=1):
        n = len(w)
        checked += 1
        if res.r.component(n, w) != expect_r.component(n, w):
            mismatches.append(("structure", n, w))
        if res.f.component(n, w) != expect_f.component(n, w):
            mismatches.append(("morphism", n, w))
    return PropTransferReport(not mismatches, semifull, mismatches, checked)
