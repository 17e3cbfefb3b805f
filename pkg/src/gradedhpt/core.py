"""Exact graded linear algebra: bases, sparse vectors, homogeneous maps, Koszul signs.

Everything downstream (symmetric coalgebras, cumulants, perturbation theory)
is built on the three primitives defined here: `koszul_sign`, `multi_unshuffles`
and the `Vector`/`LinOp` pair.  All scalars are `fractions.Fraction`; no float
ever enters any computation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping

Q = Fraction

ZERO = Q(0)
ONE = Q(1)


class Overflow(Exception):
    """A result would leave the guarded regime (weight/word-length bound).

    Raised instead of silently truncating, so every reported identity is exact.
    """


class ConvergenceFault(Exception):
    """A perturbation series did not terminate within its certificate."""


class RouteDisagreement(Exception):
    """Two independent computation routes produced different exact answers."""


def koszul_sign(perm: tuple[int, ...], degrees: tuple[int, ...] | list[int]) -> int:
    """Sign of rearranging homogeneous symbols ``x_0..x_{n-1}`` into ``x_perm[0]..x_perm[n-1]``.

    Each inversion of two odd-degree symbols contributes a factor -1.
    """
    if len(perm) != len(degrees):
        raise ValueError(f"permutation length {len(perm)} != degrees length {len(degrees)}")
    odd = [p for p in perm if degrees[p] % 2]
    s = 1
    for i in range(len(odd)):
        for j in range(i + 1, len(odd)):
            if odd[i] > odd[j]:
                s = -s
    return s


Unshuffle = tuple[tuple[int, ...], ...]


@lru_cache(maxsize=None)
def multi_unshuffles(sizes: tuple[int, ...]) -> tuple[Unshuffle, ...]:
    """All partitions of ``{0..n-1}`` into ordered blocks of the given sizes.

    Positions increase within each block; blocks keep their role order, so the
    result enumerates S(i_1,...,i_k) with n!/(i_1!...i_k!) entries, in a fixed
    lexicographic order.
    """
    if any(s < 0 for s in sizes):
        raise ValueError(f"negative block size in {sizes}")
    n = sum(sizes)

    def rec(positions: tuple[int, ...], rest: tuple[int, ...]) -> Iterator[Unshuffle]:
        if not rest:
            yield ()
            return
        size, tail = rest[0], rest[1:]
        for block in combinations(positions, size):
            block_set = set(block)
            remaining = tuple(p for p in positions if p not in block_set)
            for sub in rec(remaining, tail):
                yield (block,) + sub

    return tuple(rec(tuple(range(n)), tuple(sizes)))


def unshuffle_sign(unshuffle: Unshuffle, degrees: tuple[int, ...] | list[int]) -> int:
    """Koszul sign of the permutation obtained by concatenating the blocks."""
    flat = tuple(p for block in unshuffle for p in block)
    return koszul_sign(flat, degrees)


@lru_cache(maxsize=None)
def compositions(n: int, min_part: int = 1) -> tuple[tuple[int, ...], ...]:
    """Ordered compositions of ``n`` into parts >= min_part."""
    if n == 0:
        return ((),)
    out: list[tuple[int, ...]] = []
    for first in range(min_part, n + 1):
        for rest in compositions(n - first, min_part):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def set_partitions(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Unordered partitions of ``{0..n-1}``; blocks ascending, ordered by minimum."""
    if n == 0:
        return ((),)
    out: list[tuple[tuple[int, ...], ...]] = []
    # element n-1 joins an existing block or forms a new one
    for part in set_partitions(n - 1):
        for i in range(len(part)):
            out.append(part[:i] + (part[i] + (n - 1,),) + part[i + 1:])
        out.append(part + ((n - 1,),))
    return tuple(sorted(out))


class Vector:
    """Sparse exact vector: mapping basis-key -> nonzero Fraction."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Mapping | Iterable | None = None):
        c: dict = {}
        if coeffs:
            items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
            for k, v in items:
                v = Q(v)
                if v:
                    c[k] = c.get(k, ZERO) + v
                    if not c[k]:
                        del c[k]
        self.c = c

    @staticmethod
    def basis(key, coeff=ONE) -> "Vector":
        v = Vector()
        coeff = Q(coeff)
        if coeff:
            v.c[key] = coeff
        return v

    @staticmethod
    def zero() -> "Vector":
        return Vector()

    def is_zero(self) -> bool:
        return not self.c

    def __bool__(self) -> bool:
        return bool(self.c)

    def __add__(self, other: "Vector") -> "Vector":
        out = dict(self.c)
        for k, v in other.c.items():
            w = out.get(k, ZERO) + v
            if w:
                out[k] = w
            else:
                out.pop(k, None)
        r = Vector()
        r.c = out
        return r

    def __sub__(self, other: "Vector") -> "Vector":
        out = dict(self.c)
        for k, v in other.c.items():
            w = out.get(k, ZERO) - v
            if w:
                out[k] = w
            else:
                out.pop(k, None)
        r = Vector()
        r.c = out
        return r

    def __neg__(self) -> "Vector":
        r = Vector()
        r.c = {k: -v for k, v in self.c.items()}
        return r

    def scale(self, a) -> "Vector":
        a = Q(a)
        r = Vector()
        if a:
            r.c = {k: a * v for k, v in self.c.items()}
        return r

    __rmul__ = scale
    __mul__ = scale

    def __eq__(self, other) -> bool:
        return isinstance(other, Vector) and self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def items(self):
        return self.c.items()

    def keys(self):
        return self.c.keys()

    def __getitem__(self, key) -> Q:
        return self.c.get(key, ZERO)

    def __repr__(self) -> str:
        if not self.c:
            return "0"
        return " + ".join(f"({v})*{k}" for k, v in sorted(self.c.items(), key=lambda t: repr(t[0])))


@dataclass(frozen=True)
class GradedBasis:
    """Finite ordered basis of a graded space; index order is the canonical order."""

    symbols: tuple[str, ...]
    degrees: tuple[int, ...]

    def __post_init__(self):
        if len(self.symbols) != len(self.degrees):
            raise ValueError("symbols/degrees length mismatch")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate basis symbols")

    @staticmethod
    def make(entries: Iterable[tuple[str, int]]) -> "GradedBasis":
        entries = list(entries)
        return GradedBasis(tuple(s for s, _ in entries), tuple(int(d) for _, d in entries))

    def __len__(self) -> int:
        return len(self.symbols)

    def keys(self) -> range:
        return range(len(self.symbols))

    def degree(self, key: int) -> int:
        return self.degrees[key]

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise KeyError(f"unknown basis symbol {symbol!r}") from None

    def el(self, symbol: str, coeff=ONE) -> Vector:
        return Vector.basis(self.index(symbol), coeff)

    def show(self, v: Vector) -> str:
        if v.is_zero():
            return "0"
        return " + ".join(f"({c})*{self.symbols[k]}" for k, c in sorted(v.items()))


@dataclass(frozen=True)
class ShiftedSpace:
    """Same keys as ``base``, degrees shifted by a constant (even shifts only here)."""

    base: object
    shift: int

    def keys(self):
        return self.base.keys()

    def degree(self, key) -> int:
        return self.base.degree(key) + self.shift


def vector_degree(space, v: Vector) -> int | None:
    """Degree of a homogeneous vector, None for 0; raises if inhomogeneous."""
    degs = {space.degree(k) for k in v.keys()}
    if not degs:
        return None
    if len(degs) > 1:
        raise ValueError(f"inhomogeneous vector (degrees {sorted(degs)}): {v!r}")
    return degs.pop()


def homogeneous_parts(space, v: Vector) -> dict[int, Vector]:
    parts: dict[int, Vector] = {}
    for k, c in v.items():
        parts.setdefault(space.degree(k), Vector()).c[k] = c
    return parts


class LinOp:
    """Homogeneous linear map between spaces, given on basis keys and extended linearly.

    Lazy: images are computed on demand and cached, so operator algebra
    (composition, perturbation series) stays affordable on large word spaces.
    """

    __slots__ = ("domain", "codomain", "degree", "_fn", "_cache", "label")

    def __init__(self, domain, codomain, degree: int, fn: Callable, label: str = ""):
        self.domain = domain
        self.codomain = codomain
        self.degree = degree
        self._fn = fn
        self._cache: dict = {}
        self.label = label

    # -- construction helpers -------------------------------------------------
    @staticmethod
    def from_dict(domain, codomain, degree: int, images: Mapping, label: str = "") -> "LinOp":
        d = dict(images)
        return LinOp(domain, codomain, degree, lambda k: d.get(k, Vector.zero()), label)

    @staticmethod
    def identity(space) -> "LinOp":
        return LinOp(space, space, 0, Vector.basis, "id")

    @staticmethod
    def zero(domain, codomain=None, degree: int = 0) -> "LinOp":
        return LinOp(domain, codomain if codomain is not None else domain, degree,
                     lambda k: Vector.zero(), "0")

    # -- evaluation ------------------------------------------------------------
    def on_key(self, key) -> Vector:
        v = self._cache.get(key)
        if v is None:
            v = self._fn(key)
            self._cache[key] = v
        return v

    def __call__(self, v: Vector) -> Vector:
        out = Vector()
        for k, c in v.items():
            img = self.on_key(k)
            for k2, c2 in img.items():
                w = out.c.get(k2, ZERO) + c * c2
                if w:
                    out.c[k2] = w
                else:
                    out.c.pop(k2, None)
        return out

    # -- operator algebra --------------------------------------------------------
    def __matmul__(self, other: "LinOp") -> "LinOp":
        if other.codomain != self.domain:
            raise ValueError(f"composition mismatch: {other.label or other.codomain} -> {self.label or self.domain}")
        return LinOp(other.domain, self.codomain, self.degree + other.degree,
                     lambda k: self(other.on_key(k)), f"({self.label})o({other.label})")

    def __add__(self, other: "LinOp") -> "LinOp":
        if self.degree != other.degree:
            raise ValueError("adding maps of different degree")
        return LinOp(self.domain, self.codomain, self.degree,
                     lambda k: self.on_key(k) + other.on_key(k), f"{self.label}+{other.label}")

    def __sub__(self, other: "LinOp") -> "LinOp":
        if self.degree != other.degree:
            raise ValueError("subtracting maps of different degree")
        return LinOp(self.domain, self.codomain, self.degree,
                     lambda k: self.on_key(k) - other.on_key(k), f"{self.label}-{other.label}")

    def __neg__(self) -> "LinOp":
        return LinOp(self.domain, self.codomain, self.degree, lambda k: -self.on_key(k), f"-{self.label}")

    def scale(self, a) -> "LinOp":
        a = Q(a)
        return LinOp(self.domain, self.codomain, self.degree, lambda k: self.on_key(k).scale(a))

    __rmul__ = scale

    def power(self, n: int) -> "LinOp":
        if self.domain != self.codomain:
            raise ValueError("powers need an endomorphism")
        out = LinOp.identity(self.domain)
        for _ in range(n):
            out = self @ out
        return out

    def bracket(self, other: "LinOp") -> "LinOp":
        """Graded commutator [self, other] = s o - (-1)^{|s||o|} o s."""
        sign = -1 if (self.degree % 2) and (other.degree % 2) else 1
        first = self @ other
        second = (other @ self).scale(sign)
        return LinOp(first.domain, first.codomain, first.degree,
                     lambda k: first.on_key(k) - second.on_key(k),
                     f"[{self.label},{other.label}]")

    # -- verification ------------------------------------------------------------
    def is_zero_on(self, keys) -> bool:
        return all(self.on_key(k).is_zero() for k in keys)

    def first_difference(self, other: "LinOp", keys):
        for k in keys:
            if self.on_key(k) != other.on_key(k):
                return k
        return None

    def equal_on(self, other: "LinOp", keys) -> bool:
        return self.first_difference(other, keys) is None

    def check_homogeneous(self, keys=None) -> None:
        keys = self.domain.keys() if keys is None else keys
        for k in keys:
            d = self.domain.degree(k)
            for k2 in self.on_key(k).keys():
                if self.codomain.degree(k2) != d + self.degree:
                    raise ValueError(
                        f"map {self.label!r} not homogeneous of degree {self.degree}: "
                        f"key {k} (degree {d}) -> {k2} (degree {self.codomain.degree(k2)})")

    def __repr__(self):
        return f"LinOp({self.label or 'anon'}, degree={self.degree})"


def compose_maps(g: LinOp, f: LinOp) -> LinOp:
    """Exact composition g o f; degrees add, bases must match."""
    return g @ f


def expand_multilinear(args: tuple[Vector, ...], kernel: Callable[..., Vector]) -> Vector:
    """Multilinear extension of a kernel defined on tuples of basis keys.

    Coefficients are degree-0 scalars, so no Koszul signs arise here.
    """
    out = Vector()
    if not args:
        return kernel()

    def rec(i: int, keys: tuple, coeff: Q):
        nonlocal out
        if i == len(args):
            out = out + kernel(*keys).scale(coeff)
            return
        for k, c in args[i].items():
            rec(i + 1, keys + (k,), coeff * c)

    rec(0, (), ONE)
    return out


def expand_homogeneous(spaces, args: tuple[Vector, ...], kernel: Callable[..., Vector]) -> Vector:
    """Extend a kernel defined on homogeneous vectors multilinearly over degree parts."""
    out = Vector()

    def rec(i: int, parts: tuple):
        nonlocal out
        if i == len(args):
            out = out + kernel(*parts)
            return
        space = spaces[i] if isinstance(spaces, (list, tuple)) else spaces
        for part in homogeneous_parts(space, args[i]).values():
            rec(i + 1, parts + (part,))

    rec(0, ())
    return out
