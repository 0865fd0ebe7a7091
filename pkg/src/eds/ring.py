"""Exact field of multivariate rational functions over arbitrary-precision rationals.

Representation: a monomial is a sorted tuple of ``(variable_id, exponent)`` pairs
with no zero exponents; a polynomial is a dict mapping monomials to ``Fraction``
coefficients with no zero entries.  ``Scalar`` is the public quotient num/den.

Normalization keeps integer coefficients with joint content 1, cancels common
monomial factors, attempts exact cancellation of the denominator into the
numerator (an optimization only -- zero testing never relies on it), and fixes
the sign so the denominator's graded-lex leading coefficient is positive.
Every value is immutable after construction; all operations are pure.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Union

Monomial = tuple  # tuple[tuple[int, int], ...], sorted by variable id
Poly = dict      # dict[Monomial, Fraction]

QLike = Union[int, Fraction, str]


class RingError(Exception):
    """Usage error: ring mismatch, unknown variable, malformed input."""


class PoleError(ArithmeticError):
    """Division by an identically zero scalar, or evaluation at a pole."""


_ONE_MONO: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        va, ea = a[i]
        vb, eb = b[j]
        if va < vb:
            out.append(a[i]); i += 1
        elif vb < va:
            out.append(b[j]); j += 1
        else:
            out.append((va, ea + eb)); i += 1; j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _mono_div(a: Monomial, b: Monomial):
    """a / b, or None when b does not divide a."""
    if not b:
        return a
    out = []
    i = j = 0
    while j < len(b):
        if i >= len(a):
            return None
        va, ea = a[i]
        vb, eb = b[j]
        if va < vb:
            out.append(a[i]); i += 1
        elif va > vb:
            return None
        else:
            if ea < eb:
                return None
            if ea > eb:
                out.append((va, ea - eb))
            i += 1; j += 1
    out.extend(a[i:])
    return tuple(out)


def _mono_gcd(a: Monomial, b: Monomial) -> Monomial:
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        va, ea = a[i]
        vb, eb = b[j]
        if va < vb:
            i += 1
        elif vb < va:
            j += 1
        else:
            out.append((va, min(ea, eb))); i += 1; j += 1
    return tuple(out)


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _grlex_key(m: Monomial):
    # Graded-lex with earlier-declared variables larger: higher total degree
    # first, then lexicographic preference for small variable ids with large
    # exponents.  Encoded so that plain tuple comparison sorts descending
    # monomials ascending by key negation at call sites.
    return (_mono_degree(m), tuple((-v, e) for v, e in m))


def _poly_add(a: Poly, b: Poly) -> Poly:
    if not a:
        return dict(b)
    out = dict(a)
    for m, c in b.items():
        s = out.get(m)
        if s is None:
            out[m] = c
        else:
            s = s + c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def _poly_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def _poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _mono_mul(ma, mb)
            c = out.get(m)
            if c is None:
                out[m] = ca * cb
            else:
                c = c + ca * cb
                if c:
                    out[m] = c
                else:
                    del out[m]
    return out


def _poly_scale(a: Poly, q: Fraction) -> Poly:
    if not q:
        return {}
    return {m: c * q for m, c in a.items()}


def _poly_const(q: Fraction) -> Poly:
    return {_ONE_MONO: q} if q else {}


def _poly_partial(a: Poly, var: int) -> Poly:
    out: Poly = {}
    for m, c in a.items():
        for k, (v, e) in enumerate(m):
            if v == var:
                dm = m[:k] + ((v, e - 1),) + m[k + 1:] if e > 1 else m[:k] + m[k + 1:]
                nc = out.get(dm, Fraction(0)) + c * e
                if nc:
                    out[dm] = nc
                elif dm in out:
                    del out[dm]
                break
    return out


def _poly_leading(a: Poly) -> Monomial:
    return max(a, key=_grlex_key)


def _poly_divexact(a: Poly, b: Poly, max_steps: int = 4096):
    """Exact quotient a / b, or None when b does not divide a evenly.

    Sparse long division in graded-lex order, capped so pathological inputs
    fall back to the unreduced fraction instead of stalling.
    """
    if not b:
        return None
    if not a:
        return {}
    lb = _poly_leading(b)
    cb = b[lb]
    rem = dict(a)
    quo: Poly = {}
    steps = 0
    while rem:
        steps += 1
        if steps > max_steps:
            return None
        la = _poly_leading(rem)
        m = _mono_div(la, lb)
        if m is None:
            return None
        q = rem[la] / cb
        quo[m] = quo.get(m, Fraction(0)) + q
        for mb, c in b.items():
            mm = _mono_mul(m, mb)
            nc = rem.get(mm, Fraction(0)) - q * c
            if nc:
                rem[mm] = nc
            elif mm in rem:
                del rem[mm]
    return {m: c for m, c in quo.items() if c}


def _poly_eval(a: Poly, values) -> Fraction:
    total = Fraction(0)
    for m, c in a.items():
        term = c
        for v, e in m:
            term *= values[v] ** e
        total += term
    return total


def _poly_eval_float(a: Poly, values) -> float:
    total = 0.0
    for m, c in a.items():
        term = float(c)
        for v, e in m:
            term *= values[v] ** e
        total += term
    return total


class Ring:
    """Declared variable list plus bound numeric parameters.

    Variable order is the declaration order; it fixes the graded-lex term
    order used for canonical text.  Parameter names are disjoint from
    variable names and are substituted by their bound rational value at
    scalar construction time.
    """

    __slots__ = ("variables", "parameters", "_index")

    def __init__(self, variables: Iterable[str], parameters: Mapping[str, QLike] | None = None):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise RingError("duplicate variable names")
        self.parameters = {k: Fraction(v) for k, v in (parameters or {}).items()}
        clash = set(self.parameters) & set(self.variables)
        if clash:
            raise RingError(f"parameter names clash with variables: {sorted(clash)}")
        self._index = {n: i for i, n in enumerate(self.variables)}

    def __repr__(self):
        return f"Ring({list(self.variables)!r}, params={self.parameters!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise RingError(f"unknown variable {name!r}") from None

    def var(self, name: str) -> "Scalar":
        if name in self.parameters:
            return self.const(self.parameters[name])
        i = self.index(name)
        return Scalar(self, {((i, 1),): Fraction(1)}, _poly_const(Fraction(1)), _normalized=True)

    def const(self, q: QLike) -> "Scalar":
        q = Fraction(q)
        num = {_ONE_MONO: Fraction(q.numerator)} if q else {}
        return Scalar(self, num, _poly_const(Fraction(q.denominator)), _normalized=True)

    @property
    def zero(self) -> "Scalar":
        return self.const(0)

    @property
    def one(self) -> "Scalar":
        return self.const(1)


def _int_content(polys: Iterable[Poly]) -> Fraction:
    """Positive rational c with coeffs/c integral and jointly content-free."""
    num_gcd = 0
    den_lcm = 1
    for p in polys:
        for c in p.values():
            num_gcd = gcd(num_gcd, abs(c.numerator))
            den_lcm = den_lcm * c.denominator // gcd(den_lcm, c.denominator)
    if num_gcd == 0:
        return Fraction(1)
    return Fraction(num_gcd, den_lcm)


class Scalar:
    """Element num/den of the rational-function field of a :class:`Ring`."""

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring: Ring, num: Poly, den: Poly, _normalized: bool = False):
        if not den:
            raise PoleError("denominator is the zero polynomial")
        self.ring = ring
        if _normalized:
            self.num = num
            self.den = den
            return
        if not num:
            self.num = {}
            self.den = _poly_const(Fraction(1))
            return
        # exact cancellation of den into num (optional optimization)
        if len(den) > 1 or den.get(_ONE_MONO) != 1:
            q = _poly_divexact(num, den)
            if q is not None:
                num, den = q, _poly_const(Fraction(1))
        # joint integer content: integer coefficients, jointly content-free
        content = _int_content((num, den))
        if content != 1:
            inv = 1 / content
            num = _poly_scale(num, inv)
            den = _poly_scale(den, inv)
        # common monomial factor
        mg = None
        for m in num:
            mg = m if mg is None else _mono_gcd(mg, m)
            if not mg:
                break
        if mg:
            for m in den:
                mg = _mono_gcd(mg, m)
                if not mg:
                    break
        if mg:
            num = {_mono_div(m, mg): c for m, c in num.items()}
            den = {_mono_div(m, mg): c for m, c in den.items()}
        # sign: leading denominator coefficient positive
        if den[_poly_leading(den)] < 0:
            num = _poly_neg(num)
            den = _poly_neg(den)
        self.num = num
        self.den = den

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.num == self.den

    def is_constant(self) -> bool:
        return (not self.num or self.num.keys() == {_ONE_MONO}) and self.den.keys() == {_ONE_MONO}

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise RingError(f"not a constant: {self}")
        if not self.num:
            return Fraction(0)
        return self.num[_ONE_MONO] / self.den[_ONE_MONO]

    # -- arithmetic ------------------------------------------------------

    def _check(self, other: "Scalar") -> "Scalar":
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        if other.ring is not self.ring and other.ring.variables != self.ring.variables:
            raise RingError("scalars belong to different rings")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return Scalar(self.ring, _poly_add(self.num, other.num), dict(self.den))
        num = _poly_add(_poly_mul(self.num, other.den), _poly_mul(other.num, self.den))
        return Scalar(self.ring, num, _poly_mul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.ring, _poly_neg(self.num), dict(self.den), _normalized=True)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return Scalar(self.ring, _poly_mul(self.num, other.num), _poly_mul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise PoleError("division by zero scalar")
        return Scalar(self.ring, _poly_mul(self.num, other.den), _poly_mul(self.den, other.num))

    def __rtruediv__(self, other):
        return self.ring.const(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.ring.one / self ** (-k)
        out = self.ring.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def __eq__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # mutable-free but equality is semantic; not hashable

    # -- calculus and evaluation -----------------------------------------

    def partial(self, name: str) -> "Scalar":
        """Exact quotient-rule partial derivative with respect to ``name``."""
        v = self.ring.index(name)
        dnum = _poly_partial(self.num, v)
        dden = _poly_partial(self.den, v)
        num = _poly_add(_poly_mul(dnum, self.den), _poly_neg(_poly_mul(self.num, dden)))
        return Scalar(self.ring, num, _poly_mul(self.den, self.den))

    def eval(self, point: Mapping[str, QLike]) -> Fraction:
        """Exact value at a point assigning every ring variable."""
        values = []
        for name in self.ring.variables:
            if name not in point:
                raise RingError(f"point does not assign variable {name!r}")
            values.append(Fraction(point[name]))
        den = _poly_eval(self.den, values)
        if den == 0:
            raise PoleError(f"denominator ({poly_text(self.den, self.ring)}) vanishes at point")
        return _poly_eval(self.num, values) / den

    def eval_float(self, point: Mapping[str, float]) -> float:
        values = [float(point[name]) for name in self.ring.variables]
        den = _poly_eval_float(self.den, values)
        if den == 0.0:
            raise PoleError(f"denominator ({poly_text(self.den, self.ring)}) vanishes at point")
        return _poly_eval_float(self.num, values) / den

    def used_variables(self) -> tuple:
        ids = set()
        for p in (self.num, self.den):
            for m in p:
                for v, _ in m:
                    ids.add(v)
        return tuple(self.ring.variables[i] for i in sorted(ids))

    def substitute(self, mapping: Mapping[str, "Scalar"], target: Ring) -> "Scalar":
        """Image under the homomorphism sending each variable to ``mapping[name]``.

        Occurring variables absent from ``mapping`` must exist in ``target``
        under the same name.
        """
        images: dict[int, Scalar] = {}
        for name in self.used_variables():
            i = self.ring.index(name)
            if name in mapping:
                img = mapping[name]
                img = target.const(img) if isinstance(img, (int, Fraction)) else img
            else:
                img = target.var(name)
            images[i] = img

        def poly_image(p: Poly) -> Scalar:
            total = target.zero
            for m, c in p.items():
                term = target.const(c)
                for v, e in m:
                    term = term * images[v] ** e
                total = total + term
            return total

        den = poly_image(self.den)
        if den.is_zero():
            raise PoleError("substitution sends denominator to zero")
        return poly_image(self.num) / den

    # -- rendering -------------------------------------------------------

    def text(self) -> str:
        """Canonical text: graded-lex terms, ``^`` powers, explicit ``*``."""
        if not self.num:
            return "0"
        num = poly_text(self.num, self.ring)
        if self.den.keys() == {_ONE_MONO} and self.den[_ONE_MONO] == 1:
            return num
        return f"({num})/({poly_text(self.den, self.ring)})"

    __str__ = text

    def __repr__(self):
        return f"Scalar({self.text()})"


def _term_text(m: Monomial, c: Fraction, ring: Ring) -> str:
    if not m:
        return str(c)
    factors = [] if c in (1, -1) else [str(abs(c))]
    for v, e in m:
        name = ring.variables[v]
        factors.append(name if e == 1 else f"{name}^{e}")
    body = "*".join(factors)
    return "-" + body if c < 0 else body


def poly_text(p: Poly, ring: Ring) -> str:
    if not p:
        return "0"
    monos = sorted(p, key=_grlex_key, reverse=True)
    pieces = []
    for m in monos:
        t = _term_text(m, p[m], ring)
        if not pieces:
            pieces.append(t)
        elif t.startswith("-"):
            pieces.append("- " + t[1:])
        else:
            pieces.append("+ " + t)
    return " ".join(pieces)
