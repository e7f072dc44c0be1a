"""Sparse multivariate polynomials over the rationals.

A polynomial in ``nvars`` variables is stored as a dict mapping exponent
tuples to nonzero :class:`fractions.Fraction` coefficients.  Instances are
treated as immutable; every operation returns a new polynomial.

Canonical term order (used for printing and JSON) is graded lexicographic,
leading term first: higher total degree first, ties broken by comparing
exponents of ``x1, x2, ...`` left to right, larger first.
"""

from __future__ import annotations

import numbers
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]

_SUBSCRIPTS = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and decimal/ratio strings to ``Fraction``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (numbers.Rational, str)):
        return Fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def grlex_key(exp: Exponent):
    """Sort key placing exponents in descending graded-lex order."""
    return (-sum(exp), tuple(-e for e in exp))


class SparsePoly:
    __slots__ = ("_nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], object] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        clean: dict[Exponent, Fraction] = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} has length {len(exp)}, expected {nvars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = clean.get(exp, Fraction(0)) + as_rational(coeff)
            if c:
                clean[exp] = c
            else:
                clean.pop(exp, None)
        self._nvars = nvars
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exponent, Fraction]) -> "SparsePoly":
        # trusted constructor: terms already normalized
        p = cls.__new__(cls)
        p._nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "SparsePoly":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, value) -> "SparsePoly":
        c = as_rational(value)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def one(cls, nvars: int) -> "SparsePoly":
        return cls.constant(nvars, 1)

    @classmethod
    def var(cls, nvars: int, index: int) -> "SparsePoly":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        exp = [0] * nvars
        exp[index] = 1
        return cls._raw(nvars, {tuple(exp): Fraction(1)})

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff=1) -> "SparsePoly":
        return cls(len(exp), {tuple(exp): coeff})

    @classmethod
    def linear_form(cls, coeffs: Sequence) -> "SparsePoly":
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            exp = [0] * n
            exp[i] = 1
            terms[tuple(exp)] = c
        return cls(n, terms)

    @classmethod
    def variables(cls, nvars: int) -> list["SparsePoly"]:
        return [cls.var(nvars, i) for i in range(nvars)]

    # -- basic accessors --------------------------------------------------

    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]))

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, index: int) -> int:
        return max((e[index] for e in self._terms), default=-1)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = {sum(e) for e in self._terms}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return degree is None or degs == {degree}

    def is_multilinear(self) -> bool:
        return all(e <= 1 for exp in self._terms for e in exp)

    def support(self) -> set[int]:
        """Indices of variables that occur in some term."""
        return {i for exp in self._terms for i, e in enumerate(exp) if e}

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        exp = tuple(exp)
        if len(exp) != self._nvars:
            raise ValueError(f"exponent length {len(exp)} != nvars {self._nvars}")
        return self._terms.get(exp, Fraction(0))

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other._nvars != self._nvars:
                raise ValueError(
                    f"variable-count mismatch: {self._nvars} vs {other._nvars}"
                )
            return other
        return SparsePoly.constant(self._nvars, other)

    def __add__(self, other) -> "SparsePoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for exp, c in other._terms.items():
            s = out.get(exp, 0) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        return SparsePoly._raw(self._nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "SparsePoly":
        return SparsePoly._raw(self._nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "SparsePoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "SparsePoly":
        return (-self) + other

    def scale(self, factor) -> "SparsePoly":
        f = as_rational(factor)
        if not f:
            return SparsePoly.zero(self._nvars)
        return SparsePoly._raw(self._nvars, {e: c * f for e, c in self._terms.items()})

    def __mul__(self, other) -> "SparsePoly":
        if not isinstance(other, SparsePoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        other = self._coerce(other)
        if len(self._terms) > len(other._terms):
            a, b = self._terms, other._terms
        else:
            a, b = other._terms, self._terms
        out: dict[Exponent, Fraction] = {}
        for eb, cb in b.items():
            for ea, ca in a.items():
                exp = tuple(x + y for x, y in zip(ea, eb))
                out[exp] = out.get(exp, 0) + ca * cb
        return SparsePoly._raw(self._nvars, {e: c for e, c in out.items() if c})

    def __rmul__(self, other) -> "SparsePoly":
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, k: int) -> "SparsePoly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = SparsePoly.one(self._nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, SparsePoly):
            return self._nvars == other._nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == SparsePoly.constant(self._nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._nvars, frozenset(self._terms.items())))
        return self._hash

    # -- calculus and substitution ----------------------------------------

    def partial_derivative(self, index: int) -> "SparsePoly":
        if not 0 <= index < self._nvars:
            raise IndexError(f"variable index {index} out of range for {self._nvars} variables")
        out = {}
        for exp, c in self._terms.items():
            e = exp[index]
            if e:
                new = list(exp)
                new[index] = e - 1
                out[tuple(new)] = c * e
        return SparsePoly._raw(self._nvars, out)

    def gradient(self) -> list["SparsePoly"]:
        return [self.partial_derivative(i) for i in range(self._nvars)]

    def substitute_linear(self, substitution) -> "SparsePoly":
        """Compose with a map sending variables to polynomials of degree <= 1.

        ``substitution`` is either a full sequence (one image per variable)
        or a mapping ``{index: image}``; unmapped variables stay put, which
        requires the images to live in the same number of variables.
        """
        images = _expand_substitution(self._nvars, substitution)
        target = images[0].nvars if images else self._nvars
        for img in images:
            if img.nvars != target:
                raise ValueError("substituted forms disagree on the number of variables")
            if img.degree() > 1:
                raise ValueError("substitute_linear only accepts forms of degree <= 1")
        return self.compose(images)

    def compose(self, images: Sequence["SparsePoly"]) -> "SparsePoly":
        if len(images) != self._nvars:
            raise ValueError(f"need {self._nvars} images, got {len(images)}")
        target = images[0].nvars if images else 0
        powers: list[dict[int, SparsePoly]] = [{0: SparsePoly.one(target)} for _ in images]

        def power(i: int, k: int) -> SparsePoly:
            cache = powers[i]
            if k not in cache:
                cache[k] = power(i, k - 1) * images[i]
            return cache[k]

        result = SparsePoly.zero(target)
        for exp, c in self._terms.items():
            term = SparsePoly.constant(target, c)
            for i, e in enumerate(exp):
                if e:
                    term = term * power(i, e)
            result = result + term
        return result

    def evaluate(self, point: Sequence):
        """Evaluate at ``point``; exact for rationals, float/complex otherwise."""
        if len(point) != self._nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self._nvars}")
        total = 0
        for exp, c in self._terms.items():
            val = c
            for x, e in zip(point, exp):
                if e:
                    val = val * x**e
            total = total + val
        return total

    def embed(self, nvars: int, positions: Sequence[int]) -> "SparsePoly":
        """Re-index variable ``i`` as variable ``positions[i]`` of an ``nvars`` ring."""
        if len(positions) != self._nvars:
            raise ValueError("positions must list one target index per variable")
        out = {}
        for exp, c in self._terms.items():
            new = [0] * nvars
            for i, e in enumerate(exp):
                new[positions[i]] += e
            out[tuple(new)] = c
        return SparsePoly._raw(nvars, out)

    # -- printing and serialization ---------------------------------------

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i + 1}".translate(_SUBSCRIPTS) for i in range(self._nvars)]
        if not self._terms:
            return "0"
        pieces = []
        for exp, c in self.sorted_terms():
            mono = "·".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exp) if e
            )
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}·{mono}"
            pieces.append((sign, body))
        first_sign, first_body = pieces[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"SparsePoly({self._nvars}, {self.to_str()!r})"

    def to_json(self) -> dict:
        return {
            "nvars": self._nvars,
            "terms": [
                {"exp": list(exp), "num": str(c.numerator), "den": str(c.denominator)}
                for exp, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SparsePoly":
        nvars = int(data["nvars"])
        terms: dict[Exponent, Fraction] = {}
        for t in data["terms"]:
            exp = tuple(int(e) for e in t["exp"])
            if exp in terms:
                raise ValueError(f"duplicate exponent {exp} in polynomial JSON")
            den = int(t["den"])
            if den <= 0:
                raise ValueError("denominators must be positive")
            terms[exp] = Fraction(int(t["num"]), den)
        return cls(nvars, terms)


def _expand_substitution(nvars: int, substitution) -> list[SparsePoly]:
    if isinstance(substitution, Mapping):
        images = []
        for i in range(nvars):
            if i in substitution:
                images.append(substitution[i])
            else:
                images.append(SparsePoly.var(nvars, i))
        for k in substitution:
            if not 0 <= k < nvars:
                raise IndexError(f"substitution index {k} out of range")
        return images
    images = list(substitution)
    if len(images) != nvars:
        raise ValueError(f"need {nvars} substituted forms, got {len(images)}")
    return images


# -- functional surface ----------------------------------------------------


def poly_mul(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    return a * b


def partial_derivative(p: SparsePoly, var_index: int) -> SparsePoly:
    return p.partial_derivative(var_index)


def substitute_linear(p: SparsePoly, substitution) -> SparsePoly:
    return p.substitute_linear(substitution)


def coefficient_of(p: SparsePoly, monomial: Sequence[int]) -> Fraction:
    return p.coefficient(monomial)


def monomials_of_degree(nvars: int, degree: int) -> list[Exponent]:
    """All exponent vectors of the given total degree, in canonical order."""
    out: list[Exponent] = []

    def rec(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 1:
            out.append(tuple(prefix + [remaining]))
            return
        for e in range(remaining, -1, -1):
            rec(prefix + [e], remaining - e, slots - 1)

    if nvars == 0:
        return [()] if degree == 0 else []
    rec([], degree, nvars)
    return out


def poly_sum(polys: Iterable[SparsePoly], nvars: int) -> SparsePoly:
    total = SparsePoly.zero(nvars)
    for p in polys:
        total = total + p
    return total
