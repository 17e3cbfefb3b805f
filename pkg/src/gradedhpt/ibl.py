"""IBL-infinity[1] algebras: degree -1 derived BV coalgebra structures on a
cofree symmetric coalgebra, their component calculus indexed by inputs, outputs
and genus, morphism certification by three independent routes, the two-stage
homotopy transfer, and the Maurer-Cartan correspondence.

The central variable t has degree 2 here (k = -1 is hard-wired); general odd k
lives in the derived BV module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from .core import GradedBasis, LinOp, Overflow, Q, RouteDisagreement, Vector
from .commalg import SymWordAlgebra, cumulant_recursion, koszul_recursion
from .hpt import Contraction, LinfTransfer, linf_transfer, words_over
from .mc import NilpotentFiltration
from .report import Report
from .symcoalg import (
    SymSpace,
    TaylorCoderivation,
    antipode,
    coderivation_defect,
    convolution,
    hat_extension,
    star_log,
    taylor_coderivation_from_map,
)
from .tseries import TOp, TruncatedTAlgebra, flat_unital_map, flatten_top, spl_t

T_DEGREE = 2  # k = -1


@dataclass
class IBLStructure:
    """delta = sum t^n delta_n on S_{<=W}(U); coefficient n has degree 1 - 2n."""

    basis: GradedBasis
    space: SymSpace
    delta: TOp
    N: int

    @staticmethod
    def from_components(basis: GradedBasis, W: int, N: int,
                        coefficients: dict[int, LinOp]) -> "IBLStructure":
        space = SymSpace(basis, W)
        delta = TOp(coefficients, space, space, 1, T_DEGREE)
        return IBLStructure(basis, space, delta, N)

    def algebra(self) -> SymWordAlgebra:
        return SymWordAlgebra(self.space)

    def quotient(self) -> TruncatedTAlgebra:
        return TruncatedTAlgebra(self.algebra(), self.N, T_DEGREE)


def safe_weight(space: SymSpace, raise_by: int) -> int:
    """Largest input weight whose image cannot overflow the word bound."""
    return max(space.weight_bound - max(raise_by, 0), 0)


def ibl_check(ibl: IBLStructure, arity_bound: int = 3, d_samples: int = 12) -> Report:
    """Certify an IBL-infinity[1] structure by all equivalent routes.

    (b) the convolution with the antipode has image in bounded weights,
    (c) the Koszul brackets of each coefficient on weight-one words agree with
        (b) and land in bounded weights,
    (d) sampled higher-weight arguments respect the shifted weight bound,
    plus flatness, unit/counit conditions, degrees, and componentwise vanishing
    of the square (the quadratic relations for small input/output/genus).
    """
    rep = Report("IBL structure", bounds={"W": ibl.space.weight_bound, "N": ibl.N,
                                          "arity_bound": arity_bound})
    S = ibl.space
    delta = ibl.delta
    probes = {n: _probe_op(op, S) for n, op in delta.coeffs.items()}
    top_raise = max((r for r, _ in probes.values()), default=0)
    sq_weight = min([safe_weight(S, 2 * top_raise)] + [sc - top_raise for _, sc in probes.values()])
    sq_corpus = [w for w in S.keys() if len(w) <= max(sq_weight, 1)]
    rep.bounds["square_corpus_weight"] = max(sq_weight, 1)

    for n, op in sorted(delta.coeffs.items()):
        rep.add(f"delta_{n}(1) = 0", op.on_key(()).is_zero())
        counit_ok = all(op.on_key(w)[()] == 0 for w in S.keys())
        rep.add(f"counit kills delta_{n}", counit_ok)
        try:
            op.check_homogeneous(S.keys())
            rep.add(f"degree of delta_{n} is {1 - 2 * n}", op.degree == 1 - 2 * n)
        except ValueError as exc:
            rep.add(f"degree of delta_{n} is {1 - 2 * n}", False, str(exc))

    flat_top = 2 * max(delta.support(), default=0) if delta.is_exact() else ibl.N
    for n in range(flat_top + 1):
        acc = None
        for i in range(n + 1):
            term = delta.coeff(i).bracket(delta.coeff(n - i))
            acc = term if acc is None else acc + term
        w = None
        skipped = 0
        for word in sq_corpus:
            try:
                if not acc.on_key(word).is_zero():
                    w = word
                    break
            except Overflow:
                skipped += 1
        rep.add(f"flatness at order {n}", w is None,
                (f"{skipped} words beyond guard" if skipped else "") if w is None
                else f"witness {w}")

    s_map = antipode(S)
    alg = ibl.algebra()
    for n, op in sorted(delta.coeffs.items()):
        phi_n = convolution(op, s_map, S.product)
        raise_n, probe_scope = _probe_op(op, S)
        scope_n = min(safe_weight(S, raise_n), probe_scope)
        bad_b = None
        for word in S.keys():
            if len(word) > scope_n:
                continue
            if any(len(u) > n + 1 for u in phi_n.on_key(word).keys()):
                bad_b = word
                break
        rep.add(f"(b) image of delta_{n} * s in weights <= {n + 1} (inputs <= {scope_n})",
                bad_b is None, "" if bad_b is None else f"witness {bad_b}")
        # (c) on weight-one letters, including exact agreement with route (b)
        bad_c = None
        for k in range(1, min(arity_bound, scope_n) + 1):
            for word in S.words_of_weight(k):
                val = koszul_recursion(alg, op, tuple(Vector.basis((x,)) for x in word))
                if any(len(u) > n + 1 for u in val.keys()):
                    bad_c = ("weight", word)
                    break
                if val != phi_n.on_key(word):
                    bad_c = ("route", word)
                    break
            if bad_c:
                break
        rep.add(f"(c) Koszul brackets of delta_{n} on letters match (b), weights <= {n + 1}",
                bad_c is None, "" if bad_c is None else f"witness {bad_c}")
        # (d) sampled higher-weight arguments
        bad_d = None
        samples = 0
        for k in range(2, arity_bound + 1):
            for tup in _multisets_of_words(S, k):
                total = sum(len(w) for w in tup)
                if total > scope_n or total <= k:
                    continue
                samples += 1
                if samples > d_samples:
                    break
                try:
                    val = koszul_recursion(alg, op, tuple(Vector.basis(w) for w in tup))
                except Overflow:
                    continue
                if any(len(u) > total - k + n + 1 for u in val.keys()):
                    bad_d = tup
                    break
            if bad_d or samples > d_samples:
                break
        rep.add(f"(d) sampled weighted bound for delta_{n}", bad_d is None,
                "" if bad_d is None else f"witness {bad_d}")

    _component_square_checks(rep, ibl)
    return rep


def _max_weight_raise(op: LinOp, S: SymSpace) -> int:
    return _probe_op(op, S)[0]


def _probe_op(op: LinOp, S: SymSpace) -> tuple[int, int]:
    """(max weight raise seen, largest input weight evaluable without overflow)."""
    raise_by = 0
    scope = 0
    for w in sorted(S.keys(), key=len):
        try:
            img = op.on_key(w)
        except Overflow:
            break
        scope = max(scope, len(w))
        for u in img.keys():
            raise_by = max(raise_by, len(u) - len(w))
    return raise_by, scope


def _multisets_of_words(S: SymSpace, k: int):
    words = [w for w in S.keys() if 1 <= len(w)]

    def rec(start, acc):
        if len(acc) == k:
            yield tuple(acc)
            return
        for i in range(start, len(words)):
            yield from rec(i, acc + [words[i]])

    yield from rec(0, [])


def _component_square_checks(rep: Report, ibl: IBLStructure, max_block: int = 3) -> None:
    """Componentwise vanishing of delta^2: for small (inputs i, outputs j, order m),
    the (weight i -> weight j, t^m) block of delta o delta vanishes."""
    S = ibl.space
    delta = ibl.delta
    sq = delta.compose(delta)
    for i in range(1, max_block + 1):
        for j in range(1, max_block + 1):
            for m in range(0, min(ibl.N, max_block) + 1):
                bad = None
                for word in S.words_of_weight(i):
                    img = sq.coeff(m).on_key(word)
                    if any(len(u) == j for u in img.keys()):
                        bad = word
                        break
                g = m + 2 - (j - i + 2)  # bookkeeping only; blocks must vanish regardless
                rep.add(f"square block (in {i}, out {j}, order {m}) vanishes", bad is None,
                        "" if bad is None else f"witness {bad}")


# -- component extraction -------------------------------------------------------------


@dataclass
class PComponents:
    table: dict                      # (i, j, g) -> {word_i: Vector over weight-j words}

    def component(self, i: int, j: int, g: int) -> dict:
        return self.table.get((i, j, g), {})

    def triples(self):
        return sorted(self.table)


def extract_p_components(ibl: IBLStructure, max_inputs: int | None = None) -> PComponents:
    """Read off p_{i,j,g} from delta_n * s via the t^{j+g-1} grading and weight-j
    projection; requires a certified structure (weights <= n+1)."""
    S = ibl.space
    s_map = antipode(S)
    table: dict = {}
    for n, op in sorted(ibl.delta.coeffs.items()):
        phi_n = convolution(op, s_map, S.product)
        top = safe_weight(S, _max_weight_raise(op, S)) if max_inputs is None else max_inputs
        for i in range(1, top + 1):
            for word in S.words_of_weight(i):
                val = phi_n.on_key(word)
                for u, c in val.items():
                    j = len(u)
                    if j == 0:
                        raise ValueError("counit-violating component")
                    g = n + 1 - j
                    if g < 0:
                        raise ValueError(f"weight bound violated at {word}")
                    entry = table.setdefault((i, j, g), {})
                    entry.setdefault(word, Vector())
                    entry[word] = entry[word] + Vector.basis(u, c)
    return PComponents({key: {w: v for w, v in entry.items() if not v.is_zero()}
                        for key, entry in table.items() if any(entry.values())})


def reassemble_defect(ibl: IBLStructure, comps: PComponents):
    """delta must equal sum over components of t^{j+g-1} hat(p_{i,j,g})."""
    S = ibl.space
    coeffs: dict[int, LinOp] = {}
    for (i, j, g), entry in comps.table.items():
        op = hat_extension(S, i, lambda w, entry=entry: entry.get(w, Vector.zero()),
                           1 - 2 * (j + g - 1), f"p^{i},{j},{g}")
        n = j + g - 1
        coeffs[n] = coeffs[n] + op if n in coeffs else op
    rebuilt = TOp(coeffs, S, S, 1, T_DEGREE)
    top_raise = max((_max_weight_raise(op, S) for op in ibl.delta.coeffs.values()), default=0)
    corpus = [w for w in S.keys() if len(w) <= safe_weight(S, top_raise)]
    diff = rebuilt - ibl.delta
    return diff.first_nonzero(corpus, max(ibl.N, max(coeffs, default=0)))


def degree_audit(ibl: IBLStructure, comps: PComponents):
    """|p_{i,j,g}| = 1 - 2(j + g - 1) on every extracted component."""
    S = ibl.space
    for (i, j, g), entry in comps.table.items():
        want = 1 - 2 * (j + g - 1)
        for word, val in entry.items():
            for u in val.keys():
                if S.degree(u) - S.degree(word) != want:
                    return (i, j, g, word)
    return None


# -- morphisms --------------------------------------------------------------------------


def ibl_morphism_check(f: TOp, source: IBLStructure, target: IBLStructure,
                       arity_bound: int = 3, d_samples: int = 8,
                       title: str = "IBL morphism") -> Report:
    """Certify f: (U, delta) -> (V, delta') through the log route (b), the cumulant
    route (c) with exact route agreement, and sampled (d)."""
    rep = Report(title, bounds={"N": target.N, "arity_bound": arity_bound})
    SU, SV = source.space, target.space
    N = min(source.N, target.N)
    rep.add("f(1) = 1", f.coeff(0).on_key(()) == Vector.basis(())
            and all(f.coeff(n).on_key(()).is_zero() for n in f.support() if n >= 1))
    bad_counit = None
    for n in f.support():
        for w in SU.keys():
            if w and f.coeff(n).on_key(w)[()] != 0:
                bad_counit = (n, w)
                break
    rep.add("counit compatibility", bad_counit is None,
            "" if bad_counit is None else f"witness {bad_counit}")

    raise_f = max((_max_weight_raise(op, SU) for op in f.coeffs.values()), default=0)
    raise_d = max((_max_weight_raise(op, SU) for op in source.delta.coeffs.values()), default=0)
    corpus = [w for w in SU.keys() if len(w) <= safe_weight(SU, raise_f + raise_d)]
    inter = f.compose(source.delta) - target.delta.compose(f)
    bad = inter.first_nonzero(corpus, N)
    rep.add(f"f delta = delta' f (orders <= {N}, weights <= {safe_weight(SU, raise_f + raise_d)})",
            bad is None, "" if bad is None else f"witness {bad[0]}")

    Vt = target.quotient()
    f_flat = flat_unital_map(f, Vt)
    # (b): log of f lands in the shifted weight bound
    logf = star_log(f_flat, Vt.mul, Vt.unit())
    bad_b = None
    for word in SU.keys():
        for (m, u) in logf.on_key(word).keys():
            if len(u) > m + 1:
                bad_b = (word, m)
                break
        if bad_b:
            break
    rep.add("(b) log_* of f lands in t^m S_{<=m+1}", bad_b is None,
            "" if bad_b is None else f"witness {bad_b}")

    # (c): cumulants on letters; exact agreement with the log route
    SU_alg = SymWordAlgebra(SU)
    bad_c = None
    for k in range(1, arity_bound + 1):
        for word in SU.words_of_weight(k):
            val = cumulant_recursion(SU_alg, Vt, f_flat, tuple(Vector.basis((x,)) for x in word))
            if any(len(u) > m + 1 for (m, u) in val.keys()):
                bad_c = ("weight", word)
                break
            if val != logf.on_key(word):
                bad_c = ("route", word)
                break
        if bad_c:
            break
    rep.add("(c) cumulants on letters match (b) and the weight bound", bad_c is None,
            "" if bad_c is None else f"witness {bad_c}")

    # (d): sampled words of higher weight
    bad_d = None
    samples = 0
    for k in range(2, arity_bound + 1):
        for tup in _multisets_of_words(SU, k):
            total = sum(len(w) for w in tup)
            if total <= k:
                continue
            samples += 1
            if samples > d_samples:
                break
            try:
                val = cumulant_recursion(SU_alg, Vt, f_flat, tuple(Vector.basis(w) for w in tup))
            except Overflow:
                continue
            if any(len(u) > total - k + m + 1 for (m, u) in val.keys()):
                bad_d = tup
                break
        if bad_d or samples > d_samples:
            break
    rep.add("(d) sampled weighted cumulant bound", bad_d is None,
            "" if bad_d is None else f"witness {bad_d}")
    return rep


# -- two-stage transfer -------------------------------------------------------------------


@dataclass
class IBLTransfer:
    target: IBLStructure
    F: TOp                     # S(V)[[t]] -> S(U)[[t]]
    G: TOp                     # S(U)[[t]] -> S(V)[[t]]
    H: TOp
    stage1: LinfTransfer
    report: Report


def ibl_transfer(ibl: IBLStructure, C: Contraction, arity_bound: int = 3) -> IBLTransfer:
    """Stage 1: transfer the order-zero coderivation through the symmetrized
    contraction; stage 2: perturb by the positive-order part, which preserves
    the weight-shifted subspace.  Outputs are re-certified."""
    rep = Report("IBL transfer", bounds={"W": ibl.space.weight_bound, "N": ibl.N})
    S = ibl.space
    W = S.weight_bound
    delta0 = ibl.delta.coeff(0)
    rep.add("order-zero part is a coderivation", coderivation_defect(delta0, S.keys()) is None)
    Qd = taylor_coderivation_from_map(delta0, W, exact_beyond=True, label="delta0")
    stage1 = linf_transfer(Qd, C, W)
    word_con = stage1.word_contraction
    SV: SymSpace = word_con.space_B

    # Remark-level: the positive part preserves the weight-shifted subspace
    delta_plus = TOp({n: op for n, op in ibl.delta.coeffs.items() if n >= 1},
                     S, S, 1, T_DEGREE, ibl.delta.known_to)
    bad = None
    for n, op in delta_plus.coeffs.items():
        scope = safe_weight(S, _max_weight_raise(op, S))
        for word in S.keys():
            if len(word) > scope:
                continue
            if any(len(u) > len(word) + n for u in op.on_key(word).keys()):
                bad = (n, word)
                break
    rep.add("positive part preserves the weight-shifted subspace", bad is None,
            "" if bad is None else f"witness {bad}")

    dB, G, F, H = spl_t(word_con, delta_plus, ibl.N, corpus=S.keys())
    deltaV = TOp.lift(word_con.d_B, T_DEGREE) + dB
    target = IBLStructure(_cod_basis(C), SV, deltaV, ibl.N)
    rep.merge(ibl_check(target, arity_bound), prefix="transferred: ")
    rep.merge(ibl_morphism_check(F, target, ibl, arity_bound, title="F"), prefix="F: ")
    rep.merge(ibl_morphism_check(G, ibl, target, arity_bound, title="G"), prefix="G: ")
    # perturbed homotopy preserves the weight-shifted subspace
    bad_h = None
    for n in H.support():
        scope = safe_weight(S, n)
        for word in S.keys():
            if len(word) > scope:
                continue
            if any(len(u) > len(word) + n for u in H.coeff(n).on_key(word).keys()):
                bad_h = (n, word)
                break
    rep.add("perturbed homotopy preserves the weight-shifted subspace", bad_h is None,
            "" if bad_h is None else f"witness {bad_h}")
    # linear parts
    ok_lin = all(F.coeff(0).on_key((k,)) == Vector({(k2,): c for k2, c in C.tau.on_key(k).items()})
                 for k in C.space_B.keys())
    rep.add("linear part of F is the section", ok_lin)
    ok_lin_g = all(G.coeff(0).on_key((k,)) == Vector({(k2,): c for k2, c in C.sigma.on_key(k).items()})
                   for k in C.space_A.keys())
    rep.add("linear part of G is the projection", ok_lin_g)
    return IBLTransfer(target, F, G, H, stage1, rep)


def _cod_basis(C: Contraction) -> GradedBasis:
    space = C.space_B
    if isinstance(space, GradedBasis):
        return space
    raise ValueError("contraction target must be a graded basis")


# -- Maurer-Cartan theory -------------------------------------------------------------------


@dataclass
class IBLElement:
    """x = sum t^n x_n with x_n a reduced word vector of weight <= n+1."""

    coeffs: dict

    def __post_init__(self):
        self.coeffs = {n: v for n, v in self.coeffs.items() if not v.is_zero()}

    def flatten(self) -> Vector:
        out = Vector()
        for n, v in self.coeffs.items():
            for w, c in v.items():
                out.c[(n, w)] = c
        return out

    @staticmethod
    def from_flat(v: Vector) -> "IBLElement":
        coeffs: dict = {}
        for (n, w), c in v.items():
            coeffs.setdefault(n, Vector()).c[w] = c
        return IBLElement(coeffs)

    def __eq__(self, other):
        return isinstance(other, IBLElement) and self.coeffs == other.coeffs


def ibl_shape_defect(ibl_space: SymSpace, x: IBLElement):
    for n, v in x.coeffs.items():
        for w in v.keys():
            if len(w) > n + 1 or len(w) == 0:
                return (n, w)
            if ibl_space.degree(w) + T_DEGREE * n != 0:
                return (n, w)
    return None


def ibl_mc_residual(ibl: IBLStructure, x: IBLElement, arity_cap: int) -> IBLElement:
    St = ibl.quotient()
    dflat = flatten_top(ibl.delta, ibl.N)
    dflat_at = LinOp(St.space, St.space, 1, dflat.on_key, "delta~")
    xf = x.flatten()
    out = Vector()
    for m in range(1, arity_cap + 1):
        val = koszul_recursion(St, dflat_at, (xf,) * m)
        out = out + val.scale(Q(1, factorial(m)))
    return IBLElement.from_flat(out)


def ibl_mc_check(ibl: IBLStructure, x: IBLElement, arity_cap: int) -> tuple[bool, IBLElement]:
    bad = ibl_shape_defect(ibl.space, x)
    if bad is not None:
        raise ValueError(f"candidate violates the weight-shift shape at {bad}")
    res = ibl_mc_residual(ibl, x, arity_cap)
    return (not res.coeffs), res


def ibl_mc_pushforward(f: TOp, source: IBLStructure, target: IBLStructure,
                       x: IBLElement, arity_cap: int) -> IBLElement:
    SU_alg = SymWordAlgebra(source.space)
    Vt = target.quotient()
    f_flat = flat_unital_map(f, Vt)
    xf = Vector()
    for n, v in x.coeffs.items():
        for w, c in v.items():
            xf.c[(n, w)] = c
    # arguments live in the source quotient; cumulants are K[[t]]-multilinear
    St = TruncatedTAlgebra(SU_alg, source.N, T_DEGREE)

    def f_on_t(key):
        n, w = key
        out = Vector()
        for m, op in f.coeffs.items():
            if n + m > Vt.N:
                continue
            for u, c in op.on_key(w).items():
                out.c[(n + m, u)] = out.c.get((n + m, u), 0) + c
        out.c = {kk: c for kk, c in out.c.items() if c}
        return out

    f_t = LinOp(St.space, Vt.space, 0, f_on_t, "f~")
    out = Vector()
    for m in range(1, arity_cap + 1):
        val = cumulant_recursion(St, Vt, f_t, (xf,) * m)
        out = out + val.scale(Q(1, factorial(m)))
    return IBLElement.from_flat(out)


def ibl_kuranishi_report(ibl: IBLStructure, res: IBLTransfer, arity_cap: int,
                         samples_U, samples_V) -> Report:
    """Both correspondences of the Maurer-Cartan theorem on sampled elements:
    x -> (push-forward along G, H(x)) with its recursive inverse, and the
    restriction bijection onto Ker(H)."""
    rep = Report("IBL Maurer-Cartan correspondence", bounds={"arity_cap": arity_cap})
    target = res.target

    def H_apply(x: IBLElement) -> IBLElement:
        out = Vector()
        for n, v in x.coeffs.items():
            for m, op in res.H.coeffs.items():
                if n + m > ibl.N:
                    continue
                img = op(v)
                for w, c in img.items():
                    out.c[(n + m, w)] = out.c.get((n + m, w), 0) + c
        out.c = {kk: c for kk, c in out.c.items() if c}
        return IBLElement.from_flat(out)

    def rho(x: IBLElement):
        return ibl_mc_pushforward(res.G, ibl, target, x, arity_cap), H_apply(x)

    def rho_inverse(y: IBLElement, hv: IBLElement, steps: int = 12) -> IBLElement:
        St = ibl.quotient()
        dflat = LinOp(St.space, St.space, 1, flatten_top(ibl.delta, ibl.N).on_key, "d~")
        SU_alg = SymWordAlgebra(ibl.space)
        Vt_src = St

        def G_t(key):
            n, w = key
            out = Vector()
            for m, op in res.G.coeffs.items():
                if n + m > target.N:
                    continue
                for u, c in op.on_key(w).items():
                    out.c[(n + m, u)] = out.c.get((n + m, u), 0) + c
            out.c = {kk: c for kk, c in out.c.items() if c}
            return out

        Gt = LinOp(St.space, target.quotient().space, 0, G_t, "G~")

        def F_apply(y_el: IBLElement) -> Vector:
            out = Vector()
            for n, v in y_el.coeffs.items():
                for m, op in res.F.coeffs.items():
                    if n + m > ibl.N:
                        continue
                    img = op(v)
                    for w, c in img.items():
                        out.c[(n + m, w)] = out.c.get((n + m, w), 0) + c
            out.c = {kk: c for kk, c in out.c.items() if c}
            return out

        head = F_apply(y) - dflat(hv.flatten())
        x = Vector()
        for _ in range(steps + 1):
            nxt = head
            for i in range(2, arity_cap + 1):
                qv = koszul_recursion(St, dflat, (x,) * i)
                hq = Vector()
                for (n, w), c in qv.items():
                    for m, op in res.H.coeffs.items():
                        if n + m > ibl.N:
                            continue
                        for u, c2 in op.on_key(w).items():
                            hq.c[(n + m, u)] = hq.c.get((n + m, u), 0) + c * c2
                hq.c = {kk: c for kk, c in hq.c.items() if c}
                gv = cumulant_recursion(St, target.quotient(), Gt, (x,) * i)
                fg = F_apply(IBLElement.from_flat(gv))
                nxt = nxt + (hq - fg).scale(Q(1, factorial(i)))
            if nxt == x:
                return IBLElement.from_flat(x)
            x = nxt
        raise RouteDisagreement("fixed-point recursion did not stabilize")

    for x in samples_U:
        ok, _ = ibl_mc_check(ibl, x, arity_cap)
        if not ok:
            continue
        y, hx = rho(x)
        ok_y, res_y = ibl_mc_check(target, y, arity_cap)
        rep.add(f"push-forward of sample {sorted(x.coeffs)} is Maurer-Cartan", ok_y,
                "" if ok_y else f"residual orders {sorted(res_y.coeffs)}")
        back = rho_inverse(y, hx)
        rep.add(f"inverse recovers sample {sorted(x.coeffs)}", back == x)
        if not H_apply(x).coeffs:
            y2 = ibl_mc_pushforward(res.G, ibl, target, x, arity_cap)
            x2 = ibl_mc_pushforward(res.F, target, ibl, y2, arity_cap)
            rep.add("restriction bijection round-trip", x2 == x)
    for y in samples_V:
        ok, _ = ibl_mc_check(target, y, arity_cap)
        if not ok:
            continue
        x = rho_inverse(y, IBLElement({}))
        direct = ibl_mc_pushforward(res.F, target, ibl, y, arity_cap)
        rep.add(f"inverse at zero homotopy datum is the push-forward along F "
                f"({sorted(y.coeffs)})", x == direct)
        ok_x, res_x = ibl_mc_check(ibl, x, arity_cap)
        rep.add(f"lifted sample {sorted(y.coeffs)} is Maurer-Cartan", ok_x,
                "" if ok_x else f"residual orders {sorted(res_x.coeffs)}")
        rep.add(f"lift of {sorted(y.coeffs)} lies in Ker(H)", not H_apply(x).coeffs)
        y2, _ = rho(x)
        rep.add(f"round-trip returns {sorted(y.coeffs)}", y2 == y)
    return rep
