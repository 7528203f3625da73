"""Exact arithmetic core: rationals, weight covectors, sparse multivariate
polynomials, and fractions whose numerator and denominator are products of
linear forms.

All coefficients are exact rationals.  Integer coefficients are kept as
plain Python ints (arbitrary precision) and only promoted to ``Fraction``
when an operation actually produces a non-integer; the two interoperate
transparently.

Conventions:
  * a ``Weight`` is a covector in m coordinates x_1..x_m;
  * a ``Poly`` maps exponent tuples (length m) to nonzero coefficients;
  * term order is graded lexicographic with x_1 > x_2 > ... > x_m;
  * linear forms stored inside a ``LinFrac`` are primitive: integer
    coordinates with content 1 and positive first nonzero entry, the
    leftover rational scale being absorbed into the scalar.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import GenericityError, NotDivisible

# The scalar coefficient ring used everywhere.  Always in lowest terms with
# positive denominator, which is exactly what fractions.Fraction enforces.
Rational = Fraction


def _as_exact(x) -> int | Fraction:
    """Coerce an int, Fraction, or 'a/b' string to an exact scalar."""
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    if isinstance(x, float):
        raise TypeError("floating point input rejected; use int, Fraction, or 'a/b'")
    f = Fraction(x)
    return int(f) if f.denominator == 1 else f


def _div_scalar(c, d):
    """Exact scalar division, staying integral when possible."""
    if isinstance(c, int) and isinstance(d, int):
        if c % d == 0:
            return c // d
        return Fraction(c, d)
    v = Fraction(c) / d
    return int(v) if v.denominator == 1 else v


def format_scalar(c) -> str:
    """Serialize a scalar as 'a/b', or 'a' when the denominator is 1."""
    f = Fraction(c)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


class Weight:
    """A covector with exact rational coordinates, e.g. an edge weight.

    Immutable and hashable; arithmetic returns new instances.
    """

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable):
        object.__setattr__(self, "coords", tuple(_as_exact(c) for c in coords))

    def __setattr__(self, *a):
        raise AttributeError("Weight is immutable")

    def __len__(self):
        return len(self.coords)

    def __eq__(self, other):
        return isinstance(other, Weight) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(a + b for a, b in zip(self.coords, other.coords, strict=True))

    def __sub__(self, other: "Weight") -> "Weight":
        return Weight(a - b for a, b in zip(self.coords, other.coords, strict=True))

    def __neg__(self) -> "Weight":
        return Weight(-a for a in self.coords)

    def __rmul__(self, c) -> "Weight":
        c = _as_exact(c)
        return Weight(c * a for a in self.coords)

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def primitive(self) -> tuple[tuple[int, ...], Fraction]:
        """Split self = scale * prim with prim integral, content 1, and
        positive leading (first nonzero) coordinate.  Raises on zero."""
        prim, scale = _primitive(self.coords)
        return prim, scale

    def __str__(self):
        return format_weight(self.coords)

    def __repr__(self):
        return f"Weight({self})"

    def to_json(self):
        return [format_scalar(c) for c in self.coords]


# XiVector is structurally a Weight: a direction in the dual space used to
# orient the graph.  Certification against a concrete edge set happens in
# the graph layer.
XiVector = Weight


def _primitive(coords: Sequence) -> tuple[tuple[int, ...], Fraction]:
    den = 1
    for c in coords:
        if isinstance(c, Fraction):
            den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coords]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g == 0:
        raise ValueError("zero form has no primitive representative")
    lead = next(v for v in ints if v != 0)
    if lead < 0:
        g = -g
    return tuple(v // g for v in ints), Fraction(g, den)


def pair(w: Weight, xi: Weight):
    """Bilinear pairing sum_i w_i * xi_i.  Lengths must agree."""
    if len(w) != len(xi):
        raise ValueError(f"length mismatch: {len(w)} vs {len(xi)}")
    return sum(a * b for a, b in zip(w.coords, xi.coords))


def rho_project(x: Weight, eta: Weight, xi: Weight) -> Weight:
    """Project x along eta onto the hyperplane pairing to zero with xi:
    x - (<x,xi>/<eta,xi>) * eta."""
    d = pair(eta, xi)
    if d == 0:
        raise GenericityError("projection direction pairs to zero with xi")
    t = Fraction(pair(x, xi), 1) / d
    if t == 0:
        return x
    return x - t * eta


def format_weight(coords: Sequence) -> str:
    parts = []
    for i, c in enumerate(coords):
        if c == 0:
            continue
        var = f"x{i + 1}"
        if c == 1:
            term = var
        elif c == -1:
            term = f"-{var}"
        else:
            term = f"{format_scalar(c)}*{var}"
        if parts and not term.startswith("-"):
            parts.append("+ " + term)
        elif parts:
            parts.append("- " + term[1:])
        else:
            parts.append(term)
    return " ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# Sparse multivariate polynomials
# ---------------------------------------------------------------------------

def _grlex_key(exp: tuple[int, ...]):
    return (sum(exp), exp)


class Poly:
    """Sparse polynomial over the rationals in x_1..x_m.

    ``terms`` maps exponent tuples to nonzero coefficients; the zero
    polynomial has an empty dict.  Instances are treated as immutable.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict | None = None, _clean: bool = False):
        self.n = n
        if terms is None:
            self.terms = {}
        elif _clean:
            self.terms = terms
        else:
            self.terms = {e: c for e, c in terms.items() if c != 0}

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls(n, {}, _clean=True)

    @classmethod
    def const(cls, n: int, c) -> "Poly":
        c = _as_exact(c)
        return cls(n, {} if c == 0 else {(0,) * n: c}, _clean=True)

    @classmethod
    def variable(cls, n: int, i: int) -> "Poly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1}, _clean=True)

    @classmethod
    def from_weight(cls, w: Weight) -> "Poly":
        n = len(w)
        terms = {}
        for i, c in enumerate(w.coords):
            if c != 0:
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = c
        return cls(n, terms, _clean=True)

    @classmethod
    def from_weight_product(cls, n: int, weights: Iterable[Weight]) -> "Poly":
        p = cls.const(n, 1)
        for w in weights:
            p = p.mul_weight(w)
        return p

    # -- predicates and views ---------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def leading(self) -> tuple[tuple[int, ...], int | Fraction]:
        """Leading (exponent, coefficient) in graded lex order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def sorted_terms(self) -> list[tuple[tuple[int, ...], int | Fraction]]:
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def integer_coefficients(self) -> bool:
        return all(Fraction(c).denominator == 1 for c in self.terms.values())

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        for e, c in b.items():
            s = out.get(e, 0) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return Poly(self.n, out, _clean=True)

    def __neg__(self) -> "Poly":
        return Poly(self.n, {e: -c for e, c in self.terms.items()}, _clean=True)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if len(self.terms) > len(other.terms):
            self, other = other, self
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return Poly(self.n, out, _clean=True)

    def scale(self, c) -> "Poly":
        c = _as_exact(c)
        if c == 0:
            return Poly.zero(self.n)
        if c == 1:
            return self
        return Poly(self.n, {e: c * v for e, v in self.terms.items()}, _clean=True)

    def mul_weight(self, w: Weight) -> "Poly":
        """Multiply by a linear form, term by term."""
        out: dict = {}
        for i, wc in enumerate(w.coords):
            if wc == 0:
                continue
            for e, c in self.terms.items():
                e2 = e[:i] + (e[i] + 1,) + e[i + 1:]
                s = out.get(e2, 0) + wc * c
                if s == 0:
                    out.pop(e2, None)
                else:
                    out[e2] = s
        return Poly(self.n, out, _clean=True)

    # -- exact division ----------------------------------------------------

    def div_exact(self, d: "Poly") -> "Poly":
        """Exact quotient self / d; raises NotDivisible on any remainder."""
        if d.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero():
            return Poly.zero(self.n)
        if d.degree() == 1 and len({sum(e) for e in d.terms}) == 1:
            coords = [0] * self.n
            for e, c in d.terms.items():
                coords[e.index(1)] = c
            return self.div_weight(Weight(coords))
        return self._div_general(d)

    def div_weight(self, w: Weight) -> "Poly":
        """Exact division by a (homogeneous) linear form via synthetic
        division in the form's leading variable."""
        piv = next((i for i, c in enumerate(w.coords) if c != 0), None)
        if piv is None:
            raise ZeroDivisionError("division by zero form")
        if self.is_zero():
            return self
        c0 = w.coords[piv]
        # rest = the form minus its pivot term, as (index, coeff) pairs
        rest = [(i, c) for i, c in enumerate(w.coords) if c != 0 and i != piv]
        # bucket terms by pivot exponent, keys with the pivot slot zeroed
        buckets: dict[int, dict] = {}
        for e, c in self.terms.items():
            e0 = e[:piv] + (0,) + e[piv + 1:]
            buckets.setdefault(e[piv], {})[e0] = c
        top = max(buckets)
        quot: dict = {}
        # writing self = sum_k x_piv^k a_k and quotient = sum_k x_piv^k q_k:
        #   a_k = c0 * q_{k-1} + rest * q_k   =>   q_{k-1} = (a_k - rest*q_k)/c0
        qk: dict = {}
        for k in range(top, 0, -1):
            num = dict(buckets.get(k, {}))
            for e, c in qk.items():
                for i, rc in rest:
                    e2 = e[:i] + (e[i] + 1,) + e[i + 1:]
                    s = num.get(e2, 0) - rc * c
                    if s == 0:
                        num.pop(e2, None)
                    else:
                        num[e2] = s
            qk = {e: _div_scalar(c, c0) for e, c in num.items()}
            for e, v in qk.items():
                quot[e[:piv] + (k - 1,) + e[piv + 1:]] = v
        # remainder check: a_0 - rest*q_0 must vanish
        rem = dict(buckets.get(0, {}))
        for e, c in qk.items():
            for i, rc in rest:
                e2 = e[:i] + (e[i] + 1,) + e[i + 1:]
                s = rem.get(e2, 0) - rc * c
                if s == 0:
                    rem.pop(e2, None)
                else:
                    rem[e2] = s
        if rem:
            raise NotDivisible(f"not divisible by linear form {format_weight(w.coords)}")
        return Poly(self.n, quot, _clean=True)

    def _div_general(self, d: "Poly") -> "Poly":
        lead_d, cd = d.leading()
        rem = dict(self.terms)
        quot: dict = {}
        while rem:
            e = max(rem, key=_grlex_key)
            ce = rem[e]
            qe = tuple(a - b for a, b in zip(e, lead_d))
            if any(a < 0 for a in qe):
                raise NotDivisible("leading monomial not divisible")
            qc = _div_scalar(ce, cd)
            quot[qe] = qc
            for e2, c2 in d.terms.items():
                e3 = tuple(a + b for a, b in zip(qe, e2))
                s = rem.get(e3, 0) - qc * c2
                if s == 0:
                    rem.pop(e3, None)
                else:
                    rem[e3] = s
        return Poly(self.n, quot, _clean=True)

    # -- substitution ------------------------------------------------------

    def restrict_zero(self, w: Weight) -> "Poly":
        """Restrict to the hyperplane w = 0 by eliminating the form's
        leading variable.  The result lives in the same variable set with
        that variable absent.  self is divisible by w iff this is zero."""
        piv = next((i for i, c in enumerate(w.coords) if c != 0), None)
        if piv is None:
            raise ZeroDivisionError("restriction along zero form")
        c0 = w.coords[piv]
        rest = [(i, c) for i, c in enumerate(w.coords) if c != 0 and i != piv]
        out: dict = {}
        if not rest:
            # substitute x_piv = 0: drop terms touching the pivot
            for e, c in self.terms.items():
                if e[piv] == 0:
                    out[e] = c
            return Poly(self.n, out, _clean=True)
        if len(rest) == 1:
            # substitute x_piv = r * x_j: a monomial rename with a scale
            j, cj = rest[0]
            r = _div_scalar(-cj, c0)
            powers = [1]
            for e, c in self.terms.items():
                k = e[piv]
                while len(powers) <= k:
                    powers.append(powers[-1] * r)
                e2 = list(e)
                e2[piv] = 0
                e2[j] += k
                e2 = tuple(e2)
                s = out.get(e2, 0) + c * powers[k]
                if s == 0:
                    out.pop(e2, None)
                else:
                    out[e2] = s
            return Poly(self.n, out, _clean=True)
        # general replacement polynomial, expanded once per pivot power
        terms = {}
        for i, c in rest:
            e = [0] * self.n
            e[i] = 1
            terms[tuple(e)] = _div_scalar(-c, c0)
        repl = Poly(self.n, terms, _clean=True)
        buckets: dict[int, dict] = {}
        for e, c in self.terms.items():
            e2 = e[:piv] + (0,) + e[piv + 1:]
            buckets.setdefault(e[piv], {})[e2] = c
        powers = [Poly.const(self.n, 1)]
        for _ in range(max(buckets)):
            powers.append(powers[-1] * repl)
        for k, bucket in buckets.items():
            for e2, c2 in powers[k].terms.items():
                for e, c in bucket.items():
                    e3 = tuple(a + b for a, b in zip(e, e2))
                    s = out.get(e3, 0) + c * c2
                    if s == 0:
                        out.pop(e3, None)
                    else:
                        out[e3] = s
        return Poly(self.n, out, _clean=True)

    def divisible_by_weight(self, w: Weight) -> bool:
        return self.restrict_zero(w).is_zero()

    def substitute(self, images: Sequence[Weight], n_out: int) -> "Poly":
        """Linear change of variables x_i -> images[i] (a form in n_out
        coordinates)."""
        img = [Poly.from_weight(w) if not w.is_zero() else Poly.zero(n_out)
               for w in images]
        out = Poly.zero(n_out)
        cache: dict[tuple[int, int], Poly] = {}

        def power(i, k):
            if k == 0:
                return Poly.const(n_out, 1)
            got = cache.get((i, k))
            if got is None:
                got = power(i, k - 1) * img[i]
                cache[(i, k)] = got
            return got

        for e, c in self.terms.items():
            t = Poly.const(n_out, c)
            for i, k in enumerate(e):
                if k:
                    t = t * power(i, k)
            out = out + t
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> list[dict]:
        return [{"exp": list(e), "coeff": format_scalar(c)}
                for e, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, n: int, data: list[dict]) -> "Poly":
        terms = {}
        for item in data:
            e = tuple(int(a) for a in item["exp"])
            if len(e) != n:
                raise ValueError("exponent length mismatch")
            terms[e] = _as_exact(item["coeff"])
        return cls(n, terms)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"x{i + 1}" if k == 1 else f"x{i + 1}^{k}"
                for i, k in enumerate(e) if k
            )
            if not mono:
                body = format_scalar(abs(c) if parts else c)
                if parts:
                    parts.append(("- " if c < 0 else "+ ") + body)
                else:
                    parts.append(body)
                continue
            ac = abs(c)
            coef = "" if ac == 1 else format_scalar(ac) + "*"
            if parts:
                parts.append(("- " if c < 0 else "+ ") + coef + mono)
            else:
                parts.append(("-" if c < 0 else "") + coef + mono)
        return " ".join(parts)

    def __repr__(self):
        return f"Poly({self})"


def parse_poly(text: str, n: int) -> Poly:
    """Parse the human-readable polynomial format produced by str(Poly).

    Accepts terms like '3*x1^2*x2', 'x3', '-5', '1/2*x1'.
    """
    s = text.replace("-", "+-").replace(" ", "")
    out = Poly.zero(n)
    for chunk in s.split("+"):
        if not chunk:
            continue
        coeff: int | Fraction = 1
        e = [0] * n
        if chunk.startswith("-"):
            coeff = -1
            chunk = chunk[1:]
        for factor in chunk.split("*"):
            if not factor:
                raise ValueError(f"cannot parse term in {text!r}")
            if factor[0] == "x":
                if "^" in factor:
                    var, _, p = factor.partition("^")
                else:
                    var, p = factor, "1"
                i = int(var[1:]) - 1
                if not (0 <= i < n):
                    raise ValueError(f"variable {var} out of range")
                e[i] += int(p)
            else:
                coeff = coeff * _as_exact(factor)
        out = out + Poly(n, {tuple(e): coeff})
    return out


def poly_div_exact(p: Poly, d: Poly) -> Poly:
    """Exact polynomial division; raises NotDivisible if d does not divide p."""
    return p.div_exact(d)


# ---------------------------------------------------------------------------
# Fractions of products of linear forms
# ---------------------------------------------------------------------------

def _merge_sorted(a: tuple, b: tuple) -> tuple:
    return tuple(sorted(a + b))


def _cancel(num: tuple, den: tuple) -> tuple[tuple, tuple]:
    if not num or not den:
        return num, den
    from collections import Counter
    cn, cd = Counter(num), Counter(den)
    common = cn & cd
    if not common:
        return num, den
    cn.subtract(common)
    cd.subtract(common)
    return (tuple(sorted(cn.elements())), tuple(sorted(cd.elements())))


class LinFrac:
    """scalar * (product of primitive linear forms) / (product of primitive
    linear forms).

    Proportional numerator/denominator pairs cancel into the scalar, so a
    form never appears on both sides.  The zero element has scalar 0 and no
    forms.
    """

    __slots__ = ("n", "scalar", "num", "den")

    def __init__(self, n: int, scalar, num: tuple = (), den: tuple = ()):
        scalar = _as_exact(scalar)
        if scalar == 0:
            num, den = (), ()
        else:
            num, den = _cancel(tuple(sorted(num)), tuple(sorted(den)))
        self.n = n
        self.scalar = scalar
        self.num = num
        self.den = den

    @classmethod
    def one(cls, n: int) -> "LinFrac":
        return cls(n, 1)

    @classmethod
    def from_scalar(cls, n: int, c) -> "LinFrac":
        return cls(n, c)

    @classmethod
    def from_weight(cls, w: Weight) -> "LinFrac":
        prim, scale = w.primitive()
        return cls(len(w), scale, (prim,))

    def __eq__(self, other):
        return (isinstance(other, LinFrac) and self.n == other.n
                and self.scalar == other.scalar and self.num == other.num
                and self.den == other.den)

    def __hash__(self):
        return hash((self.n, self.scalar, self.num, self.den))

    def is_zero(self) -> bool:
        return self.scalar == 0

    def __mul__(self, other: "LinFrac") -> "LinFrac":
        if self.scalar == 0 or other.scalar == 0:
            return LinFrac(self.n, 0)
        return LinFrac(self.n, self.scalar * other.scalar,
                       _merge_sorted(self.num, other.num),
                       _merge_sorted(self.den, other.den))

    def mul_scalar(self, c) -> "LinFrac":
        c = _as_exact(c)
        return LinFrac(self.n, self.scalar * c, self.num, self.den)

    def mul_weight(self, w: Weight) -> "LinFrac":
        prim, scale = w.primitive()
        return LinFrac(self.n, self.scalar * scale,
                       _merge_sorted(self.num, (prim,)), self.den)

    def div_weight(self, w: Weight) -> "LinFrac":
        prim, scale = w.primitive()
        return LinFrac(self.n, self.scalar / scale, self.num,
                       _merge_sorted(self.den, (prim,)))

    def is_polynomial(self) -> bool:
        return not self.den

    def numerator_poly(self) -> Poly:
        p = Poly.const(self.n, self.scalar)
        for f in self.num:
            p = p.mul_weight(Weight(f))
        return p

    def to_poly(self) -> Poly:
        if self.den:
            raise NotDivisible("fraction has a nontrivial denominator")
        return self.numerator_poly()

    def __str__(self):
        if self.scalar == 0:
            return "0"
        if not self.num:
            s = format_scalar(self.scalar)
        elif self.scalar == 1:
            s = "*".join(f"({format_weight(f)})" for f in self.num)
        else:
            s = format_scalar(self.scalar) + "*" + "*".join(
                f"({format_weight(f)})" for f in self.num)
        if self.den:
            den = "*".join(f"({format_weight(f)})" for f in self.den)
            s += f" / {den}"
        return s

    def __repr__(self):
        return f"LinFrac({self})"


def linfrac_sum_to_poly(terms: Iterable, n: int | None = None) -> Poly:
    """Sum a collection of LinFrac values (optionally paired with polynomial
    multipliers) into an exact polynomial.

    Each element is either a LinFrac or a tuple (LinFrac, Poly).  All terms
    are brought over the least common denominator (maximum multiplicity of
    each primitive form), expanded, summed, and divided back out.  Raises
    NotDivisible if the sum is not a polynomial.
    """
    from collections import Counter
    items: list[tuple[LinFrac, Poly | None]] = []
    for t in terms:
        if isinstance(t, LinFrac):
            items.append((t, None))
        else:
            items.append((t[0], t[1]))
    if n is None:
        if not items:
            raise ValueError("cannot infer variable count from an empty sum")
        n = items[0][0].n
    lcd: Counter = Counter()
    for f, _ in items:
        if f.scalar != 0:
            lcd |= Counter(f.den)
    total = Poly.zero(n)
    for f, mult in items:
        if f.scalar == 0:
            continue
        p = Poly.const(n, f.scalar)
        for form in f.num:
            p = p.mul_weight(Weight(form))
        extra = lcd - Counter(f.den)
        for form, k in extra.items():
            for _ in range(k):
                p = p.mul_weight(Weight(form))
        if mult is not None:
            p = p * mult
        total = total + p
    for form, k in lcd.items():
        w = Weight(form)
        for _ in range(k):
            total = total.div_weight(w)
    return total
