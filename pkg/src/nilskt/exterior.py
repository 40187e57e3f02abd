"""Bigraded complex exterior algebra on an invariant coframe.

Basis monomials are pairs of strictly increasing index sets, stored as bit
masks over ``{0..n-1}``: holomorphic legs first, then antiholomorphic legs.
Every sign in the system is derived from transposition counting against this
canonical leg order.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, NamedTuple

from .errors import BidegreeMismatch, DegreeOverflow
from .scalars import E_ONE, E_ZERO, ParamExpr, _as_expr


class Monomial(NamedTuple):
    hol: int
    anti: int

    @property
    def p(self):
        return self.hol.bit_count()

    @property
    def q(self):
        return self.anti.bit_count()

    def render(self) -> str:
        out = "e"
        out += "".join(str(i + 1) for i in _bits(self.hol))
        if self.anti:
            out += "~" + "".join(str(j + 1) for j in _bits(self.anti))
        return out if len(out) > 1 else "1"


MONO_ONE = Monomial(0, 0)


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _inversions(a: int, b: int) -> int:
    """Pairs (x in a, y in b) with x > y, i.e. crossings when merging b after a."""
    count = 0
    for y in _bits(b):
        count += (a >> (y + 1)).bit_count()
    return count


def _merge_masks(a: int, b: int):
    """(sign, union) for sorting the concatenation a++b, or None on overlap."""
    if a & b:
        return None
    return (-1) ** (_inversions(a, b) & 1), a | b


def wedge_mono(m1: Monomial, m2: Monomial):
    """(sign, monomial) for m1 ^ m2 in canonical leg order, or None."""
    h = _merge_masks(m1.hol, m2.hol)
    if h is None:
        return None
    a = _merge_masks(m1.anti, m2.anti)
    if a is None:
        return None
    sh, hol = h
    sa, anti = a
    # move m2's holomorphic block past m1's antiholomorphic block
    cross = (-1) ** ((m1.q * m2.p) & 1)
    return sh * sa * cross, Monomial(hol, anti)


def contract_hol_mono(k: int, m: Monomial):
    """(sign, monomial) of the interior product by the k-th (1,0) frame vector."""
    bit = 1 << k
    if not m.hol & bit:
        return None
    sign = (-1) ** ((m.hol & (bit - 1)).bit_count() & 1)
    return sign, Monomial(m.hol & ~bit, m.anti)


def contract_anti_mono(k: int, m: Monomial):
    bit = 1 << k
    if not m.anti & bit:
        return None
    before = m.p + (m.anti & (bit - 1)).bit_count()
    return (-1) ** (before & 1), Monomial(m.hol, m.anti & ~bit)


def conj_mono(m: Monomial):
    """(sign, monomial) of the complex conjugate, reordered canonically."""
    return (-1) ** ((m.p * m.q) & 1), Monomial(m.anti, m.hol)


def _masks(n: int, k: int):
    for idx in combinations(range(n), k):
        mask = 0
        for i in idx:
            mask |= 1 << i
        yield mask


def basis_monomials(n: int, p: int, q: int) -> list[Monomial]:
    """Deterministic basis of the (p,q) component; empty outside 0..n."""
    if p < 0 or q < 0 or p > n or q > n:
        return []
    return [Monomial(h, a) for h in _masks(n, p) for a in _masks(n, q)]


class Form:
    """Homogeneous invariant (p,q)-form: sparse monomial -> ParamExpr map."""

    __slots__ = ("n", "p", "q", "terms")

    def __init__(self, n: int, p: int, q: int, terms=None):
        self.n = n
        self.p = p
        self.q = q
        t = {}
        if terms:
            for m, c in terms.items():
                c = _as_expr(c)
                if c.is_zero():
                    continue
                if m.p != p or m.q != q:
                    raise BidegreeMismatch(
                        f"monomial {m.render()} is not of bidegree ({p},{q})")
                t[m] = c
        self.terms = t

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(n, p, q):
        return Form(n, p, q)

    @staticmethod
    def monomial(n, m: Monomial, coeff=1):
        return Form(n, m.p, m.q, {m: _as_expr(coeff)})

    @staticmethod
    def leg(n, index: int, anti=False):
        """The coframe 1-form e^{index+1} (or its conjugate)."""
        m = Monomial(0, 1 << index) if anti else Monomial(1 << index, 0)
        return Form.monomial(n, m)

    # -- basics ---------------------------------------------------------------

    @property
    def bidegree(self):
        return (self.p, self.q)

    def is_zero(self):
        return not self.terms

    def coeff(self, m: Monomial) -> ParamExpr:
        return self.terms.get(m, E_ZERO)

    def _check_mate(self, other: "Form"):
        if self.n != other.n or self.p != other.p or self.q != other.q:
            raise BidegreeMismatch(
                f"({self.p},{self.q}) vs ({other.p},{other.q}) on n={self.n},{other.n}")

    def __add__(self, other):
        self._check_mate(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            s = t.get(m)
            s = c if s is None else s + c
            if s.is_zero():
                t.pop(m, None)
            else:
                t[m] = s
        out = Form(self.n, self.p, self.q)
        out.terms = t
        return out

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        out = Form(self.n, self.p, self.q)
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def scale(self, c) -> "Form":
        c = _as_expr(c)
        if c.is_zero():
            return Form(self.n, self.p, self.q)
        out = Form(self.n, self.p, self.q)
        out.terms = {m: cc * c for m, cc in self.terms.items()}
        return out

    __mul__ = scale
    __rmul__ = scale

    def map_coeffs(self, f: Callable[[ParamExpr], ParamExpr]) -> "Form":
        out = Form(self.n, self.p, self.q)
        for m, c in self.terms.items():
            nc = f(c)
            if not nc.is_zero():
                out.terms[m] = nc
        return out

    def wedge(self, other: "Form") -> "Form":
        if self.n != other.n:
            raise BidegreeMismatch("mismatched coframe dimensions")
        p, q = self.p + other.p, self.q + other.q
        if p > self.n or q > self.n:
            raise DegreeOverflow(f"bidegree ({p},{q}) exceeds ({self.n},{self.n})")
        out = Form(self.n, p, q)
        t = out.terms
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                w = wedge_mono(m1, m2)
                if w is None:
                    continue
                sign, m = w
                c = c1 * c2
                if sign < 0:
                    c = -c
                s = t.get(m)
                s = c if s is None else s + c
                if s.is_zero():
                    t.pop(m, None)
                else:
                    t[m] = s
        return out

    def conj(self) -> "Form":
        out = Form(self.n, self.q, self.p)
        for m, c in self.terms.items():
            sign, mm = conj_mono(m)
            cc = c.conj()
            out.terms[mm] = -cc if sign < 0 else cc
        return out

    def contract_hol(self, k: int) -> "Form":
        """Interior product by the k-th holomorphic frame vector (0-based)."""
        out = Form(self.n, self.p - 1, self.q)
        for m, c in self.terms.items():
            r = contract_hol_mono(k, m)
            if r is None:
                continue
            sign, mm = r
            cc = -c if sign < 0 else c
            s = out.terms.get(mm)
            s = cc if s is None else s + cc
            if s.is_zero():
                out.terms.pop(mm, None)
            else:
                out.terms[mm] = s
        return out

    def contract_anti(self, k: int) -> "Form":
        out = Form(self.n, self.p, self.q - 1)
        for m, c in self.terms.items():
            r = contract_anti_mono(k, m)
            if r is None:
                continue
            sign, mm = r
            cc = -c if sign < 0 else c
            s = out.terms.get(mm)
            s = cc if s is None else s + cc
            if s.is_zero():
                out.terms.pop(mm, None)
            else:
                out.terms[mm] = s
        return out

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self.n, self.p, self.q) == (other.n, other.p, other.q) and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, self.p, self.q, frozenset(self.terms.items())))

    def render(self) -> str:
        if not self.terms:
            return "0"
        order = {m: i for i, m in enumerate(basis_monomials(self.n, self.p, self.q))}
        parts = []
        for m in sorted(self.terms, key=order.get):
            c = self.terms[m]
            body = m.render()
            s = c.render()
            if s == "1":
                text, sign = body, "+"
            elif s == "-1":
                text, sign = body, "-"
            elif s.startswith("-") and "+" not in s and " - " not in s[1:]:
                text, sign = f"{s[1:]}*{body}", "-"
            elif set("+-") & set(s[1:]) or "/" in s:
                text, sign = f"({s})*{body}", "+"
            else:
                text, sign = f"{s}*{body}", "+"
            parts.append((sign, text))
        out = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
        for sign, text in parts[1:]:
            out += f" {sign} {text}"
        return out

    def __repr__(self):
        return f"Form({self.p},{self.q}; {self.render()})"


class FormBundle:
    """A finite sum of homogeneous forms of different bidegrees."""

    __slots__ = ("n", "parts")

    def __init__(self, n: int, parts=None):
        self.n = n
        self.parts = {}
        if parts:
            for bid, f in parts.items():
                if not f.is_zero():
                    self.parts[bid] = f

    @staticmethod
    def of(form: Form) -> "FormBundle":
        return FormBundle(form.n, {form.bidegree: form})

    @staticmethod
    def zero(n: int) -> "FormBundle":
        return FormBundle(n)

    def component(self, p: int, q: int) -> Form:
        return self.parts.get((p, q), Form(self.n, p, q))

    def bidegrees(self):
        return sorted(self.parts)

    def is_zero(self):
        return not self.parts

    def __add__(self, other):
        other = other if isinstance(other, FormBundle) else FormBundle.of(other)
        parts = dict(self.parts)
        for bid, f in other.parts.items():
            s = parts.get(bid)
            s = f if s is None else s + f
            if s.is_zero():
                parts.pop(bid, None)
            else:
                parts[bid] = s
        out = FormBundle(self.n)
        out.parts = parts
        return out

    def __sub__(self, other):
        return self + (-(other if isinstance(other, FormBundle) else FormBundle.of(other)))

    def __neg__(self):
        out = FormBundle(self.n)
        out.parts = {bid: -f for bid, f in self.parts.items()}
        return out

    def scale(self, c) -> "FormBundle":
        out = FormBundle(self.n)
        for bid, f in self.parts.items():
            g = f.scale(c)
            if not g.is_zero():
                out.parts[bid] = g
        return out

    __mul__ = scale
    __rmul__ = scale

    def wedge(self, other) -> "FormBundle":
        other = other if isinstance(other, FormBundle) else FormBundle.of(other)
        out = FormBundle(self.n)
        for f in self.parts.values():
            for g in other.parts.values():
                if f.p + g.p > self.n or f.q + g.q > self.n:
                    continue
                out = out + f.wedge(g)
        return out

    def conj(self) -> "FormBundle":
        out = FormBundle(self.n)
        for f in self.parts.values():
            g = f.conj()
            out.parts[g.bidegree] = g
        return out

    def map_coeffs(self, fn) -> "FormBundle":
        out = FormBundle(self.n)
        for bid, f in self.parts.items():
            g = f.map_coeffs(fn)
            if not g.is_zero():
                out.parts[bid] = g
        return out

    def __eq__(self, other):
        if isinstance(other, Form):
            other = FormBundle.of(other)
        if not isinstance(other, FormBundle):
            return NotImplemented
        return self.n == other.n and self.parts == other.parts

    def __hash__(self):
        return hash((self.n, frozenset((bid, f) for bid, f in self.parts.items())))

    def render(self) -> str:
        if not self.parts:
            return "0"
        return " + ".join(self.parts[bid].render() for bid in self.bidegrees())

    def __repr__(self):
        return f"FormBundle({self.render()})"


class LinearOp:
    """Matrix of a linear operator between two bidegree components.

    Rows index the codomain basis, columns the domain basis, both in the
    deterministic `basis_monomials` order.
    """

    __slots__ = ("n", "dom", "cod", "mat", "_dom_basis", "_cod_index")

    def __init__(self, n, dom, cod, mat):
        self.n = n
        self.dom = dom
        self.cod = cod
        self.mat = mat
        self._dom_basis = basis_monomials(n, *dom)
        self._cod_index = {m: i for i, m in enumerate(basis_monomials(n, *cod))}
        rows, cols = len(self._cod_index), len(self._dom_basis)
        if len(mat) != rows or any(len(r) != cols for r in mat):
            raise BidegreeMismatch(
                f"matrix shape {len(mat)}x{'?' if not mat else len(mat[0])} "
                f"does not match bases {rows}x{cols}")

    @staticmethod
    def from_action(n, dom, cod, action: Callable[[Monomial], Form]) -> "LinearOp":
        dom_basis = basis_monomials(n, *dom)
        cod_basis = basis_monomials(n, *cod)
        cod_index = {m: i for i, m in enumerate(cod_basis)}
        mat = [[E_ZERO] * len(dom_basis) for _ in cod_basis]
        for j, m in enumerate(dom_basis):
            img = action(m)
            if img.is_zero():
                continue
            if img.bidegree != tuple(cod):
                raise BidegreeMismatch(
                    f"action sends ({dom[0]},{dom[1]}) to {img.bidegree}, not {cod}")
            for mm, c in img.terms.items():
                mat[cod_index[mm]][j] = c
        return LinearOp(n, tuple(dom), tuple(cod), mat)

    @staticmethod
    def identity(n, bid) -> "LinearOp":
        d = len(basis_monomials(n, *bid))
        mat = [[E_ONE if i == j else E_ZERO for j in range(d)] for i in range(d)]
        return LinearOp(n, tuple(bid), tuple(bid), mat)

    @staticmethod
    def zero(n, dom, cod) -> "LinearOp":
        rows = len(basis_monomials(n, *cod))
        cols = len(basis_monomials(n, *dom))
        return LinearOp(n, tuple(dom), tuple(cod), [[E_ZERO] * cols for _ in range(rows)])

    def apply(self, form: Form) -> Form:
        if form.bidegree != self.dom or form.n != self.n:
            raise BidegreeMismatch(f"operator domain {self.dom}, form {form.bidegree}")
        vec = [form.coeff(m) for m in self._dom_basis]
        out = Form(self.n, *self.cod)
        cod_basis = basis_monomials(self.n, *self.cod)
        for i, row in enumerate(self.mat):
            acc = E_ZERO
            for c, x in zip(row, vec):
                if not (c.is_zero() or x.is_zero()):
                    acc = acc + c * x
            if not acc.is_zero():
                out.terms[cod_basis[i]] = acc
        return out

    def compose(self, inner: "LinearOp") -> "LinearOp":
        """self o inner."""
        if inner.cod != self.dom or inner.n != self.n:
            raise BidegreeMismatch(f"cannot compose {self.dom}<-{inner.cod}")
        rows = len(self.mat)
        mid = len(inner.mat)
        cols = len(inner.mat[0]) if inner.mat else 0
        mat = [[E_ZERO] * cols for _ in range(rows)]
        for i in range(rows):
            srow = self.mat[i]
            orow = mat[i]
            for k in range(mid):
                c = srow[k]
                if c.is_zero():
                    continue
                irow = inner.mat[k]
                for j in range(cols):
                    x = irow[j]
                    if not x.is_zero():
                        orow[j] = orow[j] + c * x
        return LinearOp(self.n, inner.dom, self.cod, mat)

    def __add__(self, other):
        if (self.n, self.dom, self.cod) != (other.n, other.dom, other.cod):
            raise BidegreeMismatch("operator shape mismatch in sum")
        mat = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.mat, other.mat)]
        return LinearOp(self.n, self.dom, self.cod, mat)

    def __sub__(self, other):
        if (self.n, self.dom, self.cod) != (other.n, other.dom, other.cod):
            raise BidegreeMismatch("operator shape mismatch in difference")
        mat = [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.mat, other.mat)]
        return LinearOp(self.n, self.dom, self.cod, mat)

    def map_entries(self, fn) -> "LinearOp":
        return LinearOp(self.n, self.dom, self.cod, [[fn(c) for c in row] for row in self.mat])

    def is_zero(self) -> bool:
        return all(c.is_zero() for row in self.mat for c in row)

    def __eq__(self, other):
        if not isinstance(other, LinearOp):
            return NotImplemented
        return (self.n, self.dom, self.cod) == (other.n, other.dom, other.cod) and self.mat == other.mat
