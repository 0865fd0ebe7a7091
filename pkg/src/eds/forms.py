"""Graded exterior algebra over an ordered basis of named 1-forms.

A form of degree k stores a sparse map from strictly increasing index tuples
to :class:`~eds.ring.Scalar` coefficients.  Opaque 2-form symbols (used for
underdetermined connection derivatives) are carried as separate terms keyed
by ``(symbol, companion indices)``; they are never expanded, only cancelled
by reductions or extracted by :func:`isolate_opaque`.

Values are immutable after construction and all operations are pure.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .ring import Ring, Scalar


class FormError(Exception):
    """Usage error: basis mismatch, degree mismatch, bad reduction set."""


class StructuralError(FormError):
    """An opaque symbol appears where the requested extraction forbids it."""


class Basis:
    """Ordered 1-form names (coframe first, then connection names) plus
    declared opaque 2-form symbols."""

    __slots__ = ("oneforms", "n_coframe", "opaque_twoforms", "_index")

    def __init__(self, coframe: Iterable[str], connection: Iterable[str] = (),
                 opaque_twoforms: Iterable[str] = ()):
        coframe = tuple(coframe)
        connection = tuple(connection)
        self.oneforms = coframe + connection
        self.n_coframe = len(coframe)
        self.opaque_twoforms = tuple(opaque_twoforms)
        if len(set(self.oneforms)) != len(self.oneforms):
            raise FormError("duplicate 1-form names")
        self._index = {n: i for i, n in enumerate(self.oneforms)}

    @property
    def coframe(self) -> tuple:
        return self.oneforms[: self.n_coframe]

    @property
    def connection(self) -> tuple:
        return self.oneforms[self.n_coframe:]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise FormError(f"unknown 1-form {name!r}") from None

    def __eq__(self, other):
        return (isinstance(other, Basis) and self.oneforms == other.oneforms
                and self.n_coframe == other.n_coframe
                and self.opaque_twoforms == other.opaque_twoforms)

    def __repr__(self):
        return f"Basis({list(self.oneforms)!r})"


def _merge_sign(a: tuple, b: tuple):
    """Merge strictly increasing tuples; return (merged, sign) or None on a
    repeated index."""
    if not a:
        return b, 1
    if not b:
        return a, 1
    out = []
    sign = 1
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            out.append(a[i]); i += 1
        elif b[j] < a[i]:
            # b[j] jumps over the remaining len(a) - i entries of a
            if (len(a) - i) & 1:
                sign = -sign
            out.append(b[j]); j += 1
        else:
            return None
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out), sign


class Form:
    """Exterior-algebra element of homogeneous degree."""

    __slots__ = ("basis", "ring", "degree", "terms", "opaque")

    def __init__(self, basis: Basis, ring: Ring, degree: int,
                 terms: Mapping | None = None, opaque: Mapping | None = None):
        self.basis = basis
        self.ring = ring
        self.degree = degree
        self.terms = {}
        if terms:
            for mi, c in terms.items():
                if len(mi) != degree:
                    raise FormError(f"index {mi} has wrong length for degree {degree}")
                if not c.is_zero():
                    self.terms[tuple(mi)] = c
        self.opaque = {}
        if opaque:
            for (name, mi), c in opaque.items():
                if len(mi) + 2 != degree:
                    raise FormError(f"opaque term {name}@{mi} has wrong degree")
                if not c.is_zero():
                    self.opaque[(name, tuple(mi))] = c

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(basis: Basis, ring: Ring, degree: int) -> "Form":
        return Form(basis, ring, degree)

    @staticmethod
    def basis_oneform(basis: Basis, ring: Ring, name: str) -> "Form":
        return Form(basis, ring, 1, {(basis.index(name),): ring.one})

    @staticmethod
    def opaque_twoform(basis: Basis, ring: Ring, name: str) -> "Form":
        if name not in basis.opaque_twoforms:
            raise FormError(f"unknown opaque 2-form {name!r}")
        return Form(basis, ring, 2, opaque={(name, ()): ring.one})

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms and not self.opaque

    def _check(self, other: "Form") -> None:
        if not isinstance(other, Form):
            raise FormError(f"expected a Form, got {type(other).__name__}")
        if other.basis != self.basis:
            raise FormError("forms over different bases")

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        if other.degree != self.degree:
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            raise FormError("degree mismatch in addition")
        terms = dict(self.terms)
        for mi, c in other.terms.items():
            s = terms.get(mi)
            terms[mi] = c if s is None else s + c
        opaque = dict(self.opaque)
        for k, c in other.opaque.items():
            s = opaque.get(k)
            opaque[k] = c if s is None else s + c
        return Form(self.basis, self.ring, self.degree, terms, opaque)

    def __neg__(self) -> "Form":
        return Form(self.basis, self.ring, self.degree,
                    {mi: -c for mi, c in self.terms.items()},
                    {k: -c for k, c in self.opaque.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, c) -> "Form":
        if not isinstance(c, Scalar):
            c = self.ring.const(c)
        return Form(self.basis, self.ring, self.degree,
                    {mi: c * v for mi, v in self.terms.items()},
                    {k: c * v for k, v in self.opaque.items()})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    # -- algebra -------------------------------------------------------------

    def wedge(self, other: "Form") -> "Form":
        self._check(other)
        out_terms: dict = {}
        out_opaque: dict = {}

        def put(store, key, coeff):
            s = store.get(key)
            store[key] = coeff if s is None else s + coeff

        for mi, c in self.terms.items():
            for mj, d in other.terms.items():
                merged = _merge_sign(mi, mj)
                if merged is None:
                    continue
                idx, sign = merged
                put(out_terms, idx, c * d if sign > 0 else -(c * d))
        # opaque blocks have even degree, so they commute through wedges
        for (name, mi), c in self.opaque.items():
            for mj, d in other.terms.items():
                merged = _merge_sign(mi, mj)
                if merged is None:
                    continue
                idx, sign = merged
                put(out_opaque, (name, idx), c * d if sign > 0 else -(c * d))
        for mi, c in self.terms.items():
            for (name, mj), d in other.opaque.items():
                merged = _merge_sign(mi, mj)
                if merged is None:
                    continue
                idx, sign = merged
                put(out_opaque, (name, idx), c * d if sign > 0 else -(c * d))
        if self.opaque and other.opaque:
            raise FormError("wedge of two opaque 2-form symbols is unsupported")
        return Form(self.basis, self.ring, self.degree + other.degree, out_terms, out_opaque)

    def coefficient(self, names: Sequence[str]) -> Scalar:
        """Coefficient of the wedge of ``names`` (in the given order)."""
        if len(names) != self.degree:
            raise FormError("index length differs from form degree")
        idx = tuple(self.basis.index(n) for n in names)
        order = tuple(sorted(idx))
        if len(set(order)) != len(order):
            return self.ring.zero
        # parity of the permutation sorting idx
        sign = 1
        lst = list(idx)
        for i in range(len(lst)):
            for j in range(i + 1, len(lst)):
                if lst[i] > lst[j]:
                    sign = -sign
        c = self.terms.get(order)
        if c is None:
            return self.ring.zero
        return c if sign > 0 else -c

    def reduce_mod(self, drop: Iterable[str]) -> "Form":
        """Delete every term whose index meets ``drop``; the quotient-algebra
        representative.  Opaque symbols survive unless a companion is dropped."""
        dropset = {self.basis.index(n) for n in drop}
        terms = {mi: c for mi, c in self.terms.items() if not dropset & set(mi)}
        opaque = {(n, mi): c for (n, mi), c in self.opaque.items() if not dropset & set(mi)}
        return Form(self.basis, self.ring, self.degree, terms, opaque)

    def change_basis(self, replacements: Mapping[str, "Form"], check: bool = True) -> "Form":
        """Apply the algebra homomorphism mapping each named 1-form to its
        replacement (degree-1) form; unnamed 1-forms map to themselves."""
        reps = {}
        for name, f in replacements.items():
            i = self.basis.index(name)
            if not isinstance(f, Form) or f.degree != 1 or f.basis != self.basis:
                raise FormError(f"replacement for {name!r} must be a degree-1 form on the same basis")
            reps[i] = f
        if check and reps and not _replacement_invertible(self.basis, self.ring, reps):
            raise FormError("replacement is not an invertible change of basis")

        def image(i: int) -> Form:
            f = reps.get(i)
            if f is not None:
                return f
            return Form(self.basis, self.ring, 1, {(i,): self.ring.one})

        out = Form.zero(self.basis, self.ring, self.degree)
        for mi, c in self.terms.items():
            prod = Form(self.basis, self.ring, 0, {(): self.ring.one})
            for i in mi:
                prod = prod.wedge(image(i))
                if prod.is_zero():
                    break
            out = out + prod.scale(c)
        for (name, mi), c in self.opaque.items():
            prod = Form(self.basis, self.ring, 0, {(): self.ring.one})
            for i in mi:
                prod = prod.wedge(image(i))
                if prod.is_zero():
                    break
            piece = Form(self.basis, self.ring, self.degree,
                         opaque={(name, mj): c * d for mj, d in prod.terms.items()})
            out = out + piece
        return out

    # -- rendering ----------------------------------------------------------

    def text(self) -> str:
        """Canonical text: index-sorted terms, ``/\\`` wedges, coefficients in
        parentheses."""
        if self.is_zero():
            return "0"
        pieces = []
        for mi in sorted(self.terms):
            names = "/\\".join(self.basis.oneforms[i] for i in mi)
            c = self.terms[mi].text()
            pieces.append(f"({c}) {names}" if names else f"({c})")
        for (name, mi) in sorted(self.opaque):
            names = "/\\".join([name] + [self.basis.oneforms[i] for i in mi])
            c = self.opaque[(name, mi)].text()
            pieces.append(f"({c}) {names}")
        return " + ".join(pieces)

    __str__ = text

    def __repr__(self):
        return f"Form<{self.degree}>({self.text()})"


def wedge(a: Form, b: Form) -> Form:
    return a.wedge(b)


def _replacement_invertible(basis: Basis, ring: Ring, reps: Mapping[int, Form]) -> bool:
    """The replaced rows must stay linearly independent over the scalar field.

    This admits triangular shifts and scaled renamings while rejecting
    replacements that collapse information (a zero image, or two names sent
    to proportional images).
    """
    n = len(basis.oneforms)
    rows = [[f.terms.get((j,), ring.zero) for j in range(n)] for f in reps.values()]
    return rank(rows) == len(rows)


def rank(rows: Sequence[Sequence[Scalar]]) -> int:
    """Exact rank of a matrix of scalars (Gaussian elimination in the field)."""
    if not rows:
        return 0
    m = [list(r) for r in rows]
    nrows, ncols = len(m), len(m[0])
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if not m[i][c].is_zero():
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][c]
        for i in range(r + 1, nrows):
            if m[i][c].is_zero():
                continue
            factor = m[i][c] / inv
            for j in range(c, ncols):
                m[i][j] = m[i][j] - factor * m[r][j]
        r += 1
        if r == nrows:
            break
    return r


def det(rows: Sequence[Sequence[Scalar]]) -> Scalar:
    """Exact determinant of a square matrix of scalars.

    Division-free dynamic programming over column subsets: O(n * 2^n)
    multiplications, fine for the small matrices used here.
    """
    n = len(rows)
    if n == 0:
        raise FormError("empty matrix")
    for r in rows:
        if len(r) != n:
            raise FormError("matrix is not square")
    ring = rows[0][0].ring
    # minors[mask] = det of rows[0:k] on the column set encoded by mask
    minors = {0: ring.one}
    for k in range(n):
        nxt = {}
        for mask, val in minors.items():
            if val.is_zero():
                continue
            # Laplace along row k: sign is the parity of mask bits above j
            bits_above = bin(mask).count("1")
            for j in range(n):
                bit = 1 << j
                if mask & bit:
                    bits_above -= 1
                    continue
                entry = rows[k][j]
                if not entry.is_zero():
                    contrib = val * entry
                    if bits_above & 1:
                        contrib = -contrib
                    key = mask | bit
                    acc = nxt.get(key)
                    nxt[key] = contrib if acc is None else acc + contrib
        minors = nxt
        if not minors:
            return ring.zero
    return minors.get((1 << n) - 1, ring.zero)


def isolate_opaque(identity: Form, opaque: str, partner: str, drop: Iterable[str]):
    """Extract the congruence class of an opaque 2-form from a degree-3 identity.

    Writing the reduced identity as c*(opaque ^ partner) + R = 0, returns the
    2-form X with X ^ partner = -R/c restricted to partner-carrying terms,
    i.e. the class of the opaque symbol modulo drop + {partner}.  Terms of R
    free of the partner are returned as the residue.
    """
    X, _residue = isolate_opaque_with_residue(identity, opaque, partner, drop)
    return X


def isolate_opaque_with_residue(identity: Form, opaque: str, partner: str, drop: Iterable[str]):
    if identity.degree != 3:
        raise FormError("isolate_opaque expects a degree-3 identity")
    basis, ring = identity.basis, identity.ring
    reduced = identity.reduce_mod(drop)
    p = basis.index(partner)
    coeff = None
    for (name, mi), c in reduced.opaque.items():
        if name != opaque:
            raise StructuralError(f"foreign opaque symbol {name!r} survives the reduction")
        if mi != (p,):
            companions = [basis.oneforms[i] for i in mi]
            raise StructuralError(
                f"opaque {opaque!r} appears with companions {companions}, expected [{partner}]")
        coeff = c
    if coeff is None:
        if reduced.terms:
            return Form.zero(basis, ring, 2), reduced
        return Form.zero(basis, ring, 2), Form.zero(basis, ring, 3)
    # c*(O ^ partner) + R = 0  =>  O ^ partner = -R/c
    x_terms = {}
    res_terms = {}
    for mi, c in reduced.terms.items():
        if p in mi:
            k = mi.index(p)
            rest = mi[:k] + mi[k + 1:]
            # move the partner past the trailing factors to the last slot
            sgn = -1 if (len(mi) - 1 - k) & 1 else 1
            val = c / coeff
            x_terms[rest] = -val if sgn > 0 else val
        else:
            res_terms[mi] = c
    X = Form(basis, ring, 2, x_terms).reduce_mod(set(drop) | {partner})
    residue = Form(basis, ring, 3, res_terms)
    return X, residue
