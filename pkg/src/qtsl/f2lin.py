"""Exact linear algebra over the binary field.

Vectors are fixed-length bit strings packed into Python ints (leftmost
coordinate = most significant bit), subspaces are kept as canonical reduced
row echelon bases so that equal point sets compare equal as plain values.
Everything in here is integer arithmetic; no floats, no randomness except
where an rng is passed in explicitly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from random import Random
from typing import Iterable, Iterator, Sequence

__all__ = [
    "DimensionError",
    "F2Vector",
    "Subspace",
    "InvertibleMap",
    "xor_add",
    "dot",
    "canonicalize",
    "dual",
    "member",
    "member_or_dual",
    "sample_subspace",
    "sample_element",
    "sample_nonzero_element",
    "intersection_dim",
    "sample_related",
    "gaussian_binomial",
    "enumerate_subspaces",
    "random_invertible",
    "identity_map",
    "apply_map",
    "image",
]


class DimensionError(ValueError):
    """Vector lengths or subspace ambients that do not line up."""


@dataclass(frozen=True, order=True)
class F2Vector:
    """A vector in F2^n, packed into an int (coordinate 1 is the MSB)."""

    n: int
    value: int

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise DimensionError(f"vector length must be positive, got {self.n}")
        if not 0 <= self.value < (1 << self.n):
            raise ValueError(f"value {self.value} out of range for length {self.n}")

    @classmethod
    def from_string(cls, text: str) -> "F2Vector":
        """Parse a '0'/'1' string, first character = coordinate 1."""
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"not a bit string: {text!r}")
        return cls(len(text), int(text, 2))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "F2Vector":
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"bad bit {b!r}")
            value = (value << 1) | b
        return cls(len(bits), value)

    @classmethod
    def zero(cls, n: int) -> "F2Vector":
        return cls(n, 0)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.n - 1 - i)) & 1 for i in range(self.n))

    def bit(self, i: int) -> int:
        """Coordinate i, 0-based from the left."""
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.value >> (self.n - 1 - i)) & 1

    def flip(self, i: int) -> "F2Vector":
        """Return a copy with coordinate i (0-based from the left) toggled."""
        if not 0 <= i < self.n:
            raise IndexError(i)
        return F2Vector(self.n, self.value ^ (1 << (self.n - 1 - i)))

    def is_zero(self) -> bool:
        return self.value == 0

    def __xor__(self, other: "F2Vector") -> "F2Vector":
        return xor_add(self, other)

    def __str__(self) -> str:
        return format(self.value, f"0{self.n}b")

    def __repr__(self) -> str:
        return f"F2Vector({str(self)!r})"


def xor_add(u: F2Vector, v: F2Vector) -> F2Vector:
    """Coordinatewise sum over F2."""
    if u.n != v.n:
        raise DimensionError(f"length mismatch: {u.n} vs {v.n}")
    return F2Vector(u.n, u.value ^ v.value)


def dot(u: F2Vector, v: F2Vector) -> int:
    """Inner product mod 2."""
    if u.n != v.n:
        raise DimensionError(f"length mismatch: {u.n} vs {v.n}")
    return (u.value & v.value).bit_count() & 1


def _rref(rows: Iterable[int]) -> list[int]:
    """Reduced row echelon form of a set of int-packed rows.

    Returns rows sorted so the leftmost pivot comes first (descending as
    ints); zero rows are dropped.
    """
    by_pivot: dict[int, int] = {}
    for row in rows:
        r = row
        for q, other in by_pivot.items():
            if (r >> q) & 1:
                r ^= other
        if not r:
            continue
        p = r.bit_length() - 1
        # clear this new pivot column in every existing row
        for q, other in by_pivot.items():
            if (other >> p) & 1:
                by_pivot[q] = other ^ r
        by_pivot[p] = r
    return [by_pivot[p] for p in sorted(by_pivot, reverse=True)]


def _rank(rows: Iterable[int]) -> int:
    pivots: dict[int, int] = {}
    for row in rows:
        r = row
        while r:
            p = r.bit_length() - 1
            if p in pivots:
                r ^= pivots[p]
            else:
                pivots[p] = r
                break
    return len(pivots)


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of F2^n held as a canonical RREF basis.

    ``basis`` rows are pivot-sorted (leftmost pivot first), each pivot
    column is cleared in all other rows, and no row is zero.  Two Subspace
    values are equal exactly when they contain the same points.
    """

    ambient_n: int
    basis: tuple[F2Vector, ...]

    def __post_init__(self) -> None:
        if self.ambient_n <= 0:
            raise DimensionError(f"ambient must be positive, got {self.ambient_n}")
        rows = [b.value for b in self.basis]
        if any(b.n != self.ambient_n for b in self.basis):
            raise DimensionError("basis row length != ambient")
        if rows != _rref(rows):
            raise ValueError("basis is not in canonical reduced form")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return 1 << self.dim

    def elements(self) -> Iterator[F2Vector]:
        """Iterate all 2^dim points (small dimensions only)."""
        rows = [b.value for b in self.basis]
        for mask in range(1 << len(rows)):
            acc = 0
            m = mask
            i = 0
            while m:
                if m & 1:
                    acc ^= rows[i]
                m >>= 1
                i += 1
            yield F2Vector(self.ambient_n, acc)

    def element_set(self) -> frozenset[F2Vector]:
        return frozenset(self.elements())

    def __str__(self) -> str:
        return "\n".join(str(b) for b in self.basis)

    def __repr__(self) -> str:
        return f"Subspace(n={self.ambient_n}, dim={self.dim})"

    @classmethod
    def from_string(cls, text: str) -> "Subspace":
        """Parse the newline-separated basis-row form."""
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty subspace text (ambient unknown)")
        return canonicalize([F2Vector.from_string(ln.strip()) for ln in lines])


def canonicalize(vectors: Sequence[F2Vector], ambient_n: int | None = None) -> Subspace:
    """Span of ``vectors`` as a canonical Subspace.

    Empty input yields the zero subspace (``ambient_n`` required then).
    """
    if vectors:
        n = vectors[0].n
        if any(v.n != n for v in vectors):
            raise DimensionError("mixed vector lengths")
        if ambient_n is not None and ambient_n != n:
            raise DimensionError("ambient_n disagrees with vector length")
    else:
        if ambient_n is None:
            raise DimensionError("empty input needs an explicit ambient_n")
        n = ambient_n
    rows = _rref(v.value for v in vectors)
    return Subspace(n, tuple(F2Vector(n, r) for r in rows))


def member(space: Subspace, v: F2Vector) -> bool:
    """Decide v in space by reducing against the canonical basis."""
    if v.n != space.ambient_n:
        raise DimensionError("vector length != ambient")
    x = v.value
    for row in space.basis:
        r = row.value
        if x >> (r.bit_length() - 1) & 1:
            x ^= r
    return x == 0


def dual(space: Subspace) -> Subspace:
    """The orthogonal complement {b : a.b = 0 for all a in space}."""
    n = space.ambient_n
    pivots = [b.value.bit_length() - 1 for b in space.basis]
    pivot_set = set(pivots)
    free = [p for p in range(n - 1, -1, -1) if p not in pivot_set]
    out = []
    for f in free:
        w = 1 << f
        for prow, pbit in zip(space.basis, pivots):
            if (prow.value >> f) & 1:
                w |= 1 << pbit
        out.append(F2Vector(n, w))
    return canonicalize(out, ambient_n=n)


def member_or_dual(space: Subspace, v: F2Vector, p: int) -> int:
    """Membership bit for the space (p=0) or its dual (p=1)."""
    if p not in (0, 1):
        raise ValueError(f"selector must be 0 or 1, got {p!r}")
    target = space if p == 0 else dual(space)
    return 1 if member(target, v) else 0


def sample_subspace(n: int, rng: Random) -> Subspace:
    """Uniform dimension-n/2 subspace of F2^n via rejection sampling."""
    if n < 2 or n % 2:
        raise DimensionError(f"ambient must be even and >= 2, got {n}")
    k = n // 2
    while True:
        rows = [rng.getrandbits(n) for _ in range(k)]
        if _rank(rows) == k:
            return canonicalize([F2Vector(n, r) for r in rows])


def sample_element(space: Subspace, rng: Random) -> F2Vector:
    """Uniform point of the subspace (the zero vector included)."""
    acc = 0
    mask = rng.getrandbits(space.dim) if space.dim else 0
    for i, row in enumerate(space.basis):
        if (mask >> i) & 1:
            acc ^= row.value
    return F2Vector(space.ambient_n, acc)


def sample_nonzero_element(space: Subspace, rng: Random) -> F2Vector:
    if space.dim == 0:
        raise ValueError("zero subspace has no nonzero points")
    while True:
        v = sample_element(space, rng)
        if not v.is_zero():
            return v


def intersection_dim(a: Subspace, b: Subspace) -> int:
    """dim(a ∩ b), computed as dim a + dim b − dim(a + b)."""
    if a.ambient_n != b.ambient_n:
        raise DimensionError("ambient mismatch")
    joint = _rank(itertools.chain((r.value for r in a.basis), (r.value for r in b.basis)))
    return a.dim + b.dim - joint


def sample_related(space: Subspace, rng: Random) -> Subspace:
    """Uniform half-dimension subspace meeting ``space`` in dimension n/2 − 1.

    Picks a uniformly random ordered basis of the input, drops the last
    vector, and adjoins a uniform vector from outside the input space.
    """
    n = space.ambient_n
    k = space.dim
    if k != n // 2 or n % 2:
        raise DimensionError("expected a half-dimension subspace of even ambient")
    f = random_invertible(k, rng)
    rows = [r.value for r in space.basis]
    kept = []
    for i in range(k - 1):
        acc = 0
        row_i = f.rows[i]
        for j in range(k):
            if (row_i >> (k - 1 - j)) & 1:
                acc ^= rows[j]
        kept.append(F2Vector(n, acc))
    while True:
        v = F2Vector(n, rng.getrandbits(n))
        if not member(space, v):
            break
    return canonicalize(kept + [v])


def gaussian_binomial(m: int, k: int) -> int:
    """Number of k-dimensional subspaces of F2^m (exact integer)."""
    if k < 0 or m < 0:
        raise ValueError("m and k must be nonnegative")
    if k > m:
        return 0
    num = 1
    den = 1
    for i in range(k):
        num *= (1 << (m - i)) - 1
        den *= (1 << (k - i)) - 1
    assert num % den == 0
    return num // den


def enumerate_subspaces(n: int, k: int) -> Iterator[Subspace]:
    """All k-dimensional subspaces of F2^n, via canonical echelon forms.

    Exhaustive; intended for small n (the count is the Gaussian binomial).
    """
    if k == 0:
        yield canonicalize([], ambient_n=n)
        return
    if k > n:
        return
    for pivot_cols in itertools.combinations(range(n), k):
        # free cells: columns right of the row's pivot that are not pivots
        free_cells = [
            [c for c in range(pivot_cols[i] + 1, n) if c not in pivot_cols]
            for i in range(k)
        ]
        total_free = sum(len(cells) for cells in free_cells)
        for assign in range(1 << total_free):
            rows = []
            pos = 0
            for i in range(k):
                row = 1 << (n - 1 - pivot_cols[i])
                for c in free_cells[i]:
                    if (assign >> pos) & 1:
                        row |= 1 << (n - 1 - c)
                    pos += 1
                rows.append(F2Vector(n, row))
            yield Subspace(n, tuple(rows))


@dataclass(frozen=True)
class InvertibleMap:
    """An invertible linear map on F2^n, stored as matrix rows (packed ints)."""

    n: int
    rows: tuple[int, ...]
    inverse_rows: tuple[int, ...]

    def __call__(self, v: F2Vector) -> F2Vector:
        return apply_map(self, v)

    def inverse(self) -> "InvertibleMap":
        return InvertibleMap(self.n, self.inverse_rows, self.rows)


def _invert_rows(n: int, rows: Sequence[int]) -> tuple[int, ...] | None:
    """Gauss-Jordan inverse of an n×n bit matrix, or None if singular."""
    aug = [(rows[i] << n) | (1 << (n - 1 - i)) for i in range(n)]
    for col in range(n):
        bit = (n - 1 - col) + n
        piv = None
        for i in range(col, n):
            if (aug[i] >> bit) & 1:
                piv = i
                break
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        for i in range(n):
            if i != col and (aug[i] >> bit) & 1:
                aug[i] ^= aug[col]
    mask = (1 << n) - 1
    return tuple(aug[i] & mask for i in range(n))


def random_invertible(n: int, rng: Random) -> InvertibleMap:
    """Uniform invertible n×n matrix over F2 (rejection sampling)."""
    while True:
        rows = [rng.getrandbits(n) for _ in range(n)]
        inv = _invert_rows(n, rows)
        if inv is not None:
            return InvertibleMap(n, tuple(rows), inv)


def identity_map(n: int) -> InvertibleMap:
    rows = tuple(1 << (n - 1 - i) for i in range(n))
    return InvertibleMap(n, rows, rows)


def apply_map(f: InvertibleMap, v: F2Vector) -> F2Vector:
    if v.n != f.n:
        raise DimensionError("vector length != map size")
    acc = 0
    for i, row in enumerate(f.rows):
        if (row & v.value).bit_count() & 1:
            acc |= 1 << (f.n - 1 - i)
    return F2Vector(f.n, acc)


def image(f: InvertibleMap, space: Subspace) -> Subspace:
    """The image f(space) as a canonical Subspace."""
    if space.ambient_n != f.n:
        raise DimensionError("ambient != map size")
    return canonicalize([apply_map(f, b) for b in space.basis], ambient_n=f.n)
