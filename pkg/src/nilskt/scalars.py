"""Exact scalars: Gaussian rationals and rational expressions in parameters.

Coefficients live in Q(i).  A ParamExpr is a quotient of sparse multivariate
polynomials over a global, append-only variable table in which every complex
parameter ``x`` is paired with its conjugate ``~x``; parameters declared real
are fixed by conjugation.  Fractions are kept canonical (GCD-reduced,
denominator monic in graded-lex order, monomials interned sorted) so that
structural equality coincides with mathematical equality.

Monomials are tuples ``((var_index, exponent), ...)`` sorted by index; the
graded-lex key treats lower indices as more significant.
"""

from __future__ import annotations

import threading
from fractions import Fraction

from .errors import DivisionByZero, ParseError, UnassignedVariable, UnknownParameter


class GaussRat:
    """A Gaussian rational re + im*i with exact Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    def __add__(self, other):
        if type(other) is not GaussRat:
            other = _as_gauss(other)
        out = GaussRat.__new__(GaussRat)
        out.re = self.re + other.re
        out.im = self.im + other.im
        return out

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not GaussRat:
            other = _as_gauss(other)
        out = GaussRat.__new__(GaussRat)
        out.re = self.re - other.re
        out.im = self.im - other.im
        return out

    def __rsub__(self, other):
        return _as_gauss(other) - self

    def __neg__(self):
        out = GaussRat.__new__(GaussRat)
        out.re = -self.re
        out.im = -self.im
        return out

    def __mul__(self, other):
        if type(other) is not GaussRat:
            other = _as_gauss(other)
        # pure real / pure imaginary products dominate; skip dead Fraction work
        out = GaussRat.__new__(GaussRat)
        if not self.im:
            if not self.re:
                out.re = out.im = _F_ZERO
                return out
            out.re = self.re * other.re
            out.im = self.re * other.im
            return out
        if not self.re:
            out.re = -(self.im * other.im)
            out.im = self.im * other.re
            return out
        if not other.im:
            out.re = self.re * other.re
            out.im = self.im * other.re
            return out
        if not other.re:
            out.re = -(self.im * other.im)
            out.im = self.re * other.im
            return out
        out.re = self.re * other.re - self.im * other.im
        out.im = self.re * other.im + self.im * other.re
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_gauss(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise DivisionByZero("division by zero Gaussian rational")
        return GaussRat((self.re * other.re + self.im * other.im) / n,
                        (self.im * other.re - self.re * other.im) / n)

    def __rtruediv__(self, other):
        return _as_gauss(other) / self

    def conj(self):
        return GaussRat(self.re, -self.im)

    def norm2(self):
        """|z|^2, an exact nonnegative Fraction."""
        return self.re * self.re + self.im * self.im

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def is_real(self):
        return self.im == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GaussRat(other)
        if not isinstance(other, GaussRat):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"GaussRat({self.re}, {self.im})"

    def render(self):
        """Canonical text form, parseable by the fixture scalar grammar."""
        re, im = self.re, self.im
        if im == 0:
            return _frac_str(re)
        if re == 0:
            return _imag_str(im)
        sep = "+" if im > 0 else "-"
        return f"{_frac_str(re)}{sep}{_imag_str(abs(im))}"

    def __str__(self):
        return self.render()


def _frac_str(f: Fraction) -> str:
    return str(f)


def _imag_str(f: Fraction) -> str:
    if f == 1:
        return "i"
    if f == -1:
        return "-i"
    return f"{f}*i"


_F_ZERO = Fraction(0)

GR_ZERO = GaussRat(0)
GR_ONE = GaussRat(1)
GR_I = GaussRat(0, 1)
GR_TWO_I = GaussRat(0, 2)


def _as_gauss(x) -> GaussRat:
    if isinstance(x, GaussRat):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussRat(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to GaussRat")


# ---------------------------------------------------------------------------
# Variable table
# ---------------------------------------------------------------------------

class _VarTable:
    """Global append-only registry of parameters.

    Complex parameters occupy two adjacent slots (base, conjugate); real
    parameters a single self-conjugate slot.  Reads need no lock; appends are
    serialized.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._names: list[str] = []
        self._conj: list[int] = []
        self._real: list[bool] = []
        self._by_name: dict[str, int] = {}

    def declare(self, name: str, real: bool = False) -> int:
        if not name or name.startswith("~"):
            raise ValueError("conjugates are implicit; declare the base name")
        if name == "i":
            raise ValueError("'i' is reserved for the imaginary unit")
        with self._lock:
            idx = self._by_name.get(name)
            if idx is not None:
                if self._real[idx] != real:
                    kind = "real" if self._real[idx] else "complex"
                    raise ValueError(f"parameter {name!r} already declared {kind}")
                return idx
            idx = len(self._names)
            self._names.append(name)
            self._real.append(real)
            self._by_name[name] = idx
            if real:
                self._conj.append(idx)
            else:
                self._names.append("~" + name)
                self._real.append(False)
                self._by_name["~" + name] = idx + 1
                self._conj.append(idx + 1)
                self._conj.append(idx)
            return idx

    def index(self, name: str) -> int:
        idx = self._by_name.get(name)
        if idx is None:
            raise UnknownParameter(f"undeclared parameter {name!r}")
        return idx

    def known(self, name: str) -> bool:
        return name in self._by_name

    def conj_index(self, idx: int) -> int:
        return self._conj[idx]

    def name(self, idx: int) -> str:
        return self._names[idx]

    def is_real(self, idx: int) -> bool:
        return self._real[idx]

    def base_index(self, idx: int) -> int:
        """Index of the base parameter (strips a conjugate slot)."""
        if self._names[idx].startswith("~"):
            return self._conj[idx]
        return idx


VARS = _VarTable()


# ---------------------------------------------------------------------------
# Sparse polynomials: dict monomial -> GaussRat, monomial = ((idx, exp), ...)
# ---------------------------------------------------------------------------

_MONE = ()          # the constant monomial


def _mkey(m):
    # graded-lex: total degree first, then lower index more significant,
    # higher exponent larger.  (-i, e) tuples make python tuple order agree.
    return (sum(e for _, e in m), tuple((-i, e) for i, e in m))


def _mmul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    while i < len(m1) and j < len(m2):
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _mdivides(m1, m2):
    """True if m1 | m2."""
    d = dict(m2)
    return all(d.get(v, 0) >= e for v, e in m1)


def _mdiv(m2, m1):
    """m2 / m1 (assumes divisibility)."""
    d = dict(m2)
    for v, e in m1:
        d[v] -= e
    return tuple(sorted((v, e) for v, e in d.items() if e))


def _mgcd(m1, m2):
    d1, d2 = dict(m1), dict(m2)
    return tuple(sorted((v, min(e, d2[v])) for v, e in d1.items() if v in d2))


def _pzero():
    return {}


def _pconst(c: GaussRat):
    return {} if c.is_zero() else {_MONE: c}


_P_ONE = {_MONE: GR_ONE}


def _padd(a, b):
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    out = dict(a)
    for m, c in b.items():
        s = out.get(m)
        if s is None:
            out[m] = c
        else:
            s = s + c
            if s.is_zero():
                del out[m]
            else:
                out[m] = s
    return out


def _pneg(a):
    return {m: -c for m, c in a.items()}


def _psub(a, b):
    return _padd(a, _pneg(b))


def _pmul(a, b):
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = _mmul(m1, m2)
            c = c1 * c2
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
    return out


def _pscale(a, c: GaussRat):
    if c.is_zero():
        return {}
    return {m: cc * c for m, cc in a.items()}


def _pconj(a):
    ci = VARS.conj_index
    out = {}
    for m, c in a.items():
        mm = tuple(sorted((ci(v), e) for v, e in m))
        out[mm] = c.conj()
    return out


def _plead(a):
    """(monomial, coeff) of the graded-lex leading term."""
    m = max(a, key=_mkey)
    return m, a[m]


def _pdiff(a, idx):
    out = {}
    for m, c in a.items():
        for k, (v, e) in enumerate(m):
            if v == idx:
                nm = m[:k] + ((v, e - 1),) + m[k + 1:] if e > 1 else m[:k] + m[k + 1:]
                nc = c * e
                s = out.get(nm)
                out[nm] = nc if s is None else s + nc
                break
    return {m: c for m, c in out.items() if not c.is_zero()}


def _peval(a, vals):
    """Evaluate with vals: dict idx -> GaussRat (must cover all vars)."""
    total = GR_ZERO
    for m, c in a.items():
        acc = c
        for v, e in m:
            if v not in vals:
                raise UnassignedVariable(f"no value for {VARS.name(v)!r}")
            acc = acc * _gpow(vals[v], e)
        total = total + acc
    return total


def _gpow(g: GaussRat, e: int) -> GaussRat:
    out = GR_ONE
    base = g
    while e:
        if e & 1:
            out = out * base
        base = base * base
        e >>= 1
    return out


def _psubs(a, vals):
    """Partial substitution: vals dict idx -> GaussRat; other vars kept."""
    out = {}
    for m, c in a.items():
        keep = []
        acc = c
        for v, e in m:
            if v in vals:
                acc = acc * _gpow(vals[v], e)
            else:
                keep.append((v, e))
        if acc.is_zero():
            continue
        nm = tuple(keep)
        s = out.get(nm)
        s = acc if s is None else s + acc
        if s.is_zero():
            out.pop(nm, None)
        else:
            out[nm] = s
    return out


def _pvars(a):
    s = set()
    for m in a:
        for v, _ in m:
            s.add(v)
    return s


def _pdeg_in(a, x):
    d = 0
    for m in a:
        for v, e in m:
            if v == x and e > d:
                d = e
    return d


def _pdivexact(a, b):
    """Exact multivariate division a / b, or None if not divisible."""
    if not b:
        raise DivisionByZero("polynomial division by zero")
    if not a:
        return {}
    mb, cb = _plead(b)
    rem = dict(a)
    quo = {}
    while rem:
        ma, ca = _plead(rem)
        if not _mdivides(mb, ma):
            return None
        mq = _mdiv(ma, mb)
        cq = ca / cb
        quo[mq] = cq
        # rem -= (cq * mq) * b
        for m, c in b.items():
            mm = _mmul(mq, m)
            cc = cq * c
            s = rem.get(mm)
            s = -cc if s is None else s - cc
            if s.is_zero():
                rem.pop(mm, None)
            else:
                rem[mm] = s
    return quo


# --- multivariate GCD (primitive pseudo-remainder sequence) ----------------

_gcd_cache: dict = {}
_GCD_CACHE_MAX = 1 << 16


def _pfreeze(a):
    return frozenset(a.items())


def _pmonic(a):
    if not a:
        return a
    _, c = _plead(a)
    if c == GR_ONE:
        return a
    return _pscale(a, GR_ONE / c)


def _pgcd(a, b):
    """Some GCD of a and b (normalized monic).  gcd(0, x) = monic(x)."""
    if not a:
        return _pmonic(b)
    if not b:
        return _pmonic(a)
    ka, kb = _pfreeze(a), _pfreeze(b)
    key = (ka, kb) if len(ka) <= len(kb) else (kb, ka)
    hit = _gcd_cache.get(key)
    if hit is not None:
        return hit
    g = _pmonic(_pgcd_raw(a, b))
    if len(_gcd_cache) < _GCD_CACHE_MAX:
        _gcd_cache[key] = g
    return g


def _pgcd_raw(a, b):
    # common monomial factor
    mono = None
    for m in a:
        mono = m if mono is None else _mgcd(mono, m)
        if not mono:
            break
    monb = None
    for m in b:
        monb = m if monb is None else _mgcd(monb, m)
        if not monb:
            break
    common = _mgcd(mono, monb) if mono and monb else _MONE
    if mono:
        a = {_mdiv(m, mono): c for m, c in a.items()}
    if monb:
        b = {_mdiv(m, monb): c for m, c in b.items()}
    out_mono = {common: GR_ONE}
    if len(a) == 1 and _MONE in a:
        return out_mono
    if len(b) == 1 and _MONE in b:
        return out_mono
    if a == b:
        return _pmul(out_mono, a)
    va, vb = _pvars(a), _pvars(b)
    shared = va & vb
    if not shared:
        return out_mono
    x = max(shared)
    core = _gcd_in_var(a, b, x)
    return _pmul(out_mono, core)


def _px_split(a, x):
    """View a in R[rest][x]: dict exp_x -> poly in the rest."""
    out = {}
    for m, c in a.items():
        e = 0
        rest = []
        for v, ee in m:
            if v == x:
                e = ee
            else:
                rest.append((v, ee))
        lvl = out.setdefault(e, {})
        lvl[tuple(rest)] = c
    return out


def _px_join(sp, x):
    out = {}
    for e, poly in sp.items():
        for m, c in poly.items():
            mm = _mmul(m, ((x, e),)) if e else m
            out[mm] = c
    return out


def _px_content(sp):
    g = {}
    for poly in sp.values():
        g = _pgcd(g, poly)
        if len(g) == 1 and _MONE in g:
            return _P_ONE
    return g


def _px_primitive(sp):
    cont = _px_content(sp)
    if len(cont) == 1 and _MONE in cont and cont[_MONE] == GR_ONE:
        return _px_scalar_reduce(sp), cont
    out = {}
    for e, poly in sp.items():
        q = _pdivexact(poly, cont)
        assert q is not None, "content division must be exact"
        out[e] = q
    return _px_scalar_reduce(out), cont


def _rat_content(polys) -> Fraction:
    """Positive rational c with all coefficients of p/c coprime integers;
    keeps pseudo-remainder coefficients from exploding."""
    from math import gcd as _igcd
    num_g = 0
    den_l = 1
    for p in polys:
        for c in p.values():
            for f in (c.re, c.im):
                if f:
                    num_g = _igcd(num_g, abs(f.numerator))
                    den_l = den_l // _igcd(den_l, f.denominator) * f.denominator
    if num_g == 0:
        return Fraction(1)
    return Fraction(num_g, den_l)


def _px_scalar_reduce(sp):
    """Divide a split polynomial by its rational scalar content."""
    c = _rat_content(sp.values())
    if c == 1 or c == 0:
        return sp
    inv = GaussRat(1 / c)
    return {e: _pscale(p, inv) for e, p in sp.items()}


def _px_mul_poly(sp, poly):
    return {e: _pmul(p, poly) for e, p in sp.items()}


def _px_sub(s1, s2):
    out = dict(s1)
    for e, p in s2.items():
        r = _psub(out.get(e, {}), p)
        if r:
            out[e] = r
        else:
            out.pop(e, None)
    return out


def _px_shift(sp, k):
    return {e + k: p for e, p in sp.items()}


def _pprem(A, B):
    """Pseudo-remainder of A by B in split form, up to scalar factors.

    Scalar content is stripped after every elimination step; gcd callers
    only need the result up to units, and this keeps the rational
    coefficients bounded.
    """
    dB = max(B)
    lB = B[dB]
    R = A
    while R and max(R) >= dB:
        dR = max(R)
        lR = R[dR]
        R = _px_sub(_px_mul_poly(R, lB), _px_shift(_px_mul_poly(B, lR), dR - dB))
        if R and max(R) == dR:  # numerical safety; cancellation should occur
            R.pop(dR, None)
        R = _px_scalar_reduce(R)
    return R


def _gcd_in_var(a, b, x):
    sa, sb = _px_split(a, x), _px_split(b, x)
    pa, ca = _px_primitive(sa)
    pb, cb = _px_primitive(sb)
    cg = _pgcd(ca, cb)
    A, B = (pa, pb) if max(pa) >= max(pb) else (pb, pa)
    while True:
        if not B:
            g = _px_join(A, x)
            break
        if max(B) == 0:
            # x-degree 0: primitive parts are coprime in x
            g = _P_ONE
            break
        R = _pprem(A, B)
        if not R:
            g = _px_join(B, x)
            break
        R, _ = _px_primitive(R)
        A, B = B, R
    return _pmul(cg, g)


# ---------------------------------------------------------------------------
# ParamExpr: canonical fraction of polynomials
# ---------------------------------------------------------------------------

class ParamExpr:
    """Exact rational expression in declared parameters over Q(i).

    Canonical invariants: num/den share no factor, den is monic in graded-lex
    order, and the zero expression is {}/{1}.  Instances are immutable.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _canonical=False):
        if den is None:
            den = _P_ONE
        if not _canonical:
            num, den = _canonical_fraction(num, den)
        self.num = num
        self.den = den

    # -- constructors -------------------------------------------------------

    @staticmethod
    def const(c) -> "ParamExpr":
        return ParamExpr(_pconst(_as_gauss(c)), _P_ONE, _canonical=True)

    @staticmethod
    def var(name: str) -> "ParamExpr":
        idx = VARS.index(name)
        return ParamExpr({((idx, 1),): GR_ONE}, _P_ONE, _canonical=True)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = _as_expr(other)
        if not self.num:
            return other
        if not other.num:
            return self
        if self.den == other.den:
            return ParamExpr(_padd(self.num, other.num), self.den)
        num = _padd(_pmul(self.num, other.den), _pmul(other.num, self.den))
        return ParamExpr(num, _pmul(self.den, other.den))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_expr(other))

    def __rsub__(self, other):
        return _as_expr(other) + (-self)

    def __neg__(self):
        return ParamExpr(_pneg(self.num), self.den, _canonical=True)

    def __mul__(self, other):
        other = _as_expr(other)
        if not self.num or not other.num:
            return E_ZERO
        if self.den == _P_ONE and other.den == _P_ONE:
            return ParamExpr(_pmul(self.num, other.num), _P_ONE, _canonical=True)
        # cross-cancel to keep intermediate fractions small
        g1 = _pgcd(self.num, other.den) if other.den != _P_ONE else _P_ONE
        g2 = _pgcd(other.num, self.den) if self.den != _P_ONE else _P_ONE
        n1 = self.num if _pis_one(g1) else _pdivexact(self.num, g1)
        d2 = other.den if _pis_one(g1) else _pdivexact(other.den, g1)
        n2 = other.num if _pis_one(g2) else _pdivexact(other.num, g2)
        d1 = self.den if _pis_one(g2) else _pdivexact(self.den, g2)
        num = _pmul(n1, n2)
        den = _pmul(d1, d2)
        if den == _P_ONE:
            return ParamExpr(num, den, _canonical=True)
        lm, lc = _plead(den)
        if lc != GR_ONE:
            inv = GR_ONE / lc
            num = _pscale(num, inv)
            den = _pscale(den, inv)
        return ParamExpr(num, den, _canonical=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_expr(other)
        if not other.num:
            raise DivisionByZero("division by identically-zero expression")
        return self * ParamExpr(other.den, other.num)

    def __rtruediv__(self, other):
        return _as_expr(other) / self

    # -- structure -----------------------------------------------------------

    def conj(self) -> "ParamExpr":
        num, den = _pconj(self.num), _pconj(self.den)
        if den != _P_ONE:
            _, lc = _plead(den)
            if lc != GR_ONE:
                inv = GR_ONE / lc
                num, den = _pscale(num, inv), _pscale(den, inv)
        return ParamExpr(num, den, _canonical=True)

    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.num == _P_ONE and self.den == _P_ONE

    def is_constant(self) -> bool:
        return (not self.num or set(self.num) == {_MONE}) and self.den == _P_ONE

    def to_gaussrat(self) -> GaussRat:
        if not self.is_constant():
            raise ValueError(f"expression {self} is not constant")
        return self.num.get(_MONE, GR_ZERO)

    def variables(self) -> set:
        """Names of base parameters occurring in the expression."""
        return {VARS.name(VARS.base_index(v)) for v in (_pvars(self.num) | _pvars(self.den))}

    def evaluate(self, assignment: dict) -> GaussRat:
        """Evaluate at {base name -> GaussRat}; conjugates filled automatically."""
        vals = _assignment_values(assignment, _pvars(self.num) | _pvars(self.den))
        den = _peval(self.den, vals)
        if den.is_zero():
            raise DivisionByZero("denominator vanishes at the assignment")
        return _peval(self.num, vals) / den

    def subs(self, assignment: dict) -> "ParamExpr":
        """Partial substitution of {base name -> GaussRat}; re-canonicalizes."""
        vals = {}
        for name, value in assignment.items():
            idx = VARS.index(name)
            value = _as_gauss(value)
            if VARS.is_real(idx) and not value.is_real():
                raise ValueError(f"real parameter {name!r} assigned non-real value")
            vals[idx] = value
            vals[VARS.conj_index(idx)] = value.conj()
        num = _psubs(self.num, vals)
        den = _psubs(self.den, vals)
        if not den:
            raise DivisionByZero("denominator vanishes under substitution")
        return ParamExpr(num, den)

    def diff(self, name: str) -> "ParamExpr":
        """Partial derivative with respect to a (base or real) parameter."""
        idx = VARS.index(name)
        dn = _pdiff(self.num, idx)
        dd = _pdiff(self.den, idx)
        if not dd:
            return ParamExpr(dn, self.den)
        num = _psub(_pmul(dn, self.den), _pmul(self.num, dd))
        return ParamExpr(num, _pmul(self.den, self.den))

    def __eq__(self, other):
        try:
            other = _as_expr(other)
        except TypeError:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((frozenset(self.num.items()), frozenset(self.den.items())))

    def __bool__(self):
        return not self.is_zero()

    def render(self) -> str:
        if not self.num:
            return "0"
        ns = _poly_str(self.num)
        if self.den == _P_ONE:
            return ns
        return f"({ns})/({_poly_str(self.den)})"

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"ParamExpr({self.render()})"


E_ZERO = ParamExpr(_pzero(), _P_ONE, _canonical=True)
E_ONE = ParamExpr(dict(_P_ONE), _P_ONE, _canonical=True)
E_I = ParamExpr(_pconst(GR_I), _P_ONE, _canonical=True)


def _pis_one(p):
    return len(p) == 1 and p.get(_MONE) == GR_ONE


def _canonical_fraction(num, den):
    if not den:
        raise DivisionByZero("zero denominator")
    if not num:
        return {}, _P_ONE
    if den == _P_ONE:
        return num, den
    g = _pgcd(num, den)
    if not _pis_one(g):
        num = _pdivexact(num, g)
        den = _pdivexact(den, g)
    _, lc = _plead(den)
    if lc != GR_ONE:
        inv = GR_ONE / lc
        num = _pscale(num, inv)
        den = _pscale(den, inv)
    return num, den


def _as_expr(x) -> ParamExpr:
    if isinstance(x, ParamExpr):
        return x
    if isinstance(x, (int, Fraction, GaussRat)):
        return ParamExpr.const(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to ParamExpr")


def _assignment_values(assignment, needed):
    vals = {}
    for name, value in assignment.items():
        idx = VARS.index(name)
        value = _as_gauss(value)
        if VARS.is_real(idx) and not value.is_real():
            raise ValueError(f"real parameter {name!r} assigned non-real value")
        vals[idx] = value
        vals[VARS.conj_index(idx)] = value.conj()
    missing = [v for v in needed if v not in vals]
    if missing:
        names = sorted(VARS.name(VARS.base_index(v)) for v in missing)
        raise UnassignedVariable(f"no value for parameter(s): {', '.join(names)}")
    return vals


def sym(name: str, real: bool = False) -> ParamExpr:
    """Declare (idempotently) and return the parameter as an expression."""
    VARS.declare(name, real=real)
    return ParamExpr.var(name)


def two_i_im(x) -> ParamExpr:
    """x - conj(x), i.e. 2i times the imaginary part."""
    x = _as_expr(x)
    return x - x.conj()


def re_part(x) -> ParamExpr:
    x = _as_expr(x)
    return (x + x.conj()) / 2


def _coeff_term_str(c: GaussRat, body: str):
    """(sign, text) for rendering c * body."""
    if c.re != 0 and c.im != 0:
        return "+", (f"({c.render()})*{body}" if body else f"({c.render()})")
    neg = (c.re < 0) or (c.re == 0 and c.im < 0)
    a = -c if neg else c
    s = a.render()
    if body:
        text = body if s == "1" else (f"i*{body}" if s == "i" else f"{s}*{body}")
    else:
        text = s
    return ("-" if neg else "+"), text


def _poly_str(p) -> str:
    parts = []
    for m in sorted(p, key=_mkey, reverse=True):
        body = "*".join(
            f"{VARS.name(v)}" + (f"^{e}" if e > 1 else "") for v, e in m
        )
        sign, text = _coeff_term_str(p[m], body)
        parts.append((sign, text))
    out = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
    for sign, text in parts[1:]:
        out += f" {sign} {text}"
    return out


# ---------------------------------------------------------------------------
# Scalar expression grammar:  + - * / ~ ( ) ^int, literals, i, parameters
# ---------------------------------------------------------------------------

def tokenize_scalar(text: str, line=None, col0=0):
    """Yield (kind, value, col) tokens; kind in NUM NAME OP END."""
    i, n = 0, len(text)
    toks = []
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        col = col0 + i + 1
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("NUM", int(text[i:j]), col))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("NAME", text[i:j], col))
            i = j
        elif ch in "+-*/()~^@,=":
            toks.append(("OP", ch, col))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(("END", None, col0 + n + 1))
    return toks


class _ScalarParser:
    """Recursive-descent parser for the scalar sub-grammar."""

    def __init__(self, toks, line=None, declare_missing=False):
        self.toks = toks
        self.pos = 0
        self.line = line
        self.declare_missing = declare_missing

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect_op(self, op):
        kind, val, col = self.next()
        if kind != "OP" or val != op:
            raise ParseError(f"expected {op!r}", self.line, col)

    def parse(self) -> ParamExpr:
        e = self.expr()
        kind, val, col = self.peek()
        if kind != "END":
            raise ParseError(f"unexpected trailing {val!r}", self.line, col)
        return e

    def expr(self) -> ParamExpr:
        kind, val, _ = self.peek()
        if kind == "OP" and val in "+-":
            self.next()
            e = -self.term() if val == "-" else self.term()
        else:
            e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "OP" and val in "+-":
                self.next()
                rhs = self.term()
                e = e + rhs if val == "+" else e - rhs
            else:
                return e

    def term(self) -> ParamExpr:
        e = self.power()
        while True:
            kind, val, _ = self.peek()
            if kind == "OP" and val in "*/":
                self.next()
                rhs = self.power()
                e = e * rhs if val == "*" else e / rhs
            else:
                return e

    def power(self) -> ParamExpr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "OP" and val == "^":
            self.next()
            kind, ev, col = self.next()
            if kind != "NUM":
                raise ParseError("exponent must be a nonnegative integer", self.line, col)
            out = E_ONE
            for _ in range(ev):
                out = out * base
            return out
        return base

    def atom(self) -> ParamExpr:
        kind, val, col = self.next()
        if kind == "NUM":
            return ParamExpr.const(val)
        if kind == "NAME":
            if val == "i":
                return E_I
            if self.declare_missing and not VARS.known(val):
                VARS.declare(val, real=(val == "t"))
            return ParamExpr.var(val)
        if kind == "OP" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "OP" and val == "~":
            return self.atom().conj()
        if kind == "OP" and val == "-":
            return -self.atom()
        raise ParseError(f"unexpected token {val!r}", self.line, col)


def parse_scalar(text: str, line=None, declare_missing=False) -> ParamExpr:
    """Parse a scalar expression (e.g. ``(a2 + ~r*a10)/(1 - r*~r)``)."""
    toks = tokenize_scalar(text, line)
    return _ScalarParser(toks, line, declare_missing).parse()
