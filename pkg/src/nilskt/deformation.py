"""(0,1)-vector forms and the operators a deformation induces on forms.

A vector form ``phi`` is stored as the n-vector of its (0,1) coefficient
forms; component ``lam`` pairs with the lam-th holomorphic frame vector.
From it we build: the contraction (a bidegree (-1,+1) derivation), the
legwise extension map onto the deformed coframe, the deformed structure
equations with their integrability defect, endomorphism pairs with the
simultaneous legwise contraction, and the deformed complex differentials.

Integrability is always checked through the deformed coframe: the vector
form satisfies the deformation equation exactly when every deformed
structure equation has vanishing (0,2) part in the deformed grading.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .errors import (NonInvertibleFrame, PreconditionFailure,
                     SingularEndomorphism)
from .exterior import Form, FormBundle, Monomial
from .scalars import E_ONE, E_ZERO, GaussRat, ParamExpr, _as_expr


class VectorForm01:
    """phi = sum_lam phi^lam (x) Z_lam with each phi^lam a (0,1)-form."""

    __slots__ = ("n", "comps")

    def __init__(self, n, comps=None):
        self.n = n
        self.comps = []
        for lam in range(n):
            f = comps[lam] if comps and lam < len(comps) and comps[lam] is not None \
                else Form(n, 0, 1)
            if f.bidegree != (0, 1):
                raise ValueError(f"component {lam + 1} has bidegree {f.bidegree}")
            self.comps.append(f)

    @staticmethod
    def zero(n):
        return VectorForm01(n)

    @staticmethod
    def from_entries(n, entries):
        """entries: iterable of (coeff, anti_index, frame_index), 0-based."""
        comps = [Form(n, 0, 1) for _ in range(n)]
        for coeff, j, lam in entries:
            comps[lam] = comps[lam] + Form.monomial(n, Monomial(0, 1 << j), coeff)
        return VectorForm01(n, comps)

    def is_zero(self):
        return all(f.is_zero() for f in self.comps)

    def matrix(self):
        """n x n matrix: entry [lam][j] is the coefficient of ~e^{j+1} in
        phi^{lam+1} (the vector form as a map T^{0,1} -> T^{1,0})."""
        return [[self.comps[lam].coeff(Monomial(0, 1 << j)) for j in range(self.n)]
                for lam in range(self.n)]

    def map_coeffs(self, fn):
        return VectorForm01(self.n, [f.map_coeffs(fn) for f in self.comps])

    def subs(self, assignment):
        return self.map_coeffs(lambda c: c.subs(assignment))

    def __eq__(self, other):
        if not isinstance(other, VectorForm01):
            return NotImplemented
        return self.n == other.n and self.comps == other.comps

    def render(self):
        parts = []
        for lam, f in enumerate(self.comps):
            if not f.is_zero():
                parts.append(f"({f.render()})@e{lam + 1}")
        return " + ".join(parts) if parts else "0"


def contract(phi: VectorForm01, x):
    """i_phi: wedge each component with the matching frame contraction.

    A degree-0 derivation sending (p,q) to (p-1,q+1).
    """
    bundle = x if isinstance(x, FormBundle) else FormBundle.of(x)
    out = FormBundle.zero(phi.n)
    for lam in range(phi.n):
        f = phi.comps[lam]
        if f.is_zero():
            continue
        for g in bundle.parts.values():
            piece = g.contract_hol(lam)
            if not piece.is_zero():
                out = out + f.wedge(piece)
    return out if isinstance(x, FormBundle) else out.component(x.p - 1, x.q + 1)


def contract_conj(phi: VectorForm01, x):
    """i_{conj(phi)}: conjugate components against antiholomorphic legs."""
    bundle = x if isinstance(x, FormBundle) else FormBundle.of(x)
    out = FormBundle.zero(phi.n)
    for lam in range(phi.n):
        f = phi.comps[lam]
        if f.is_zero():
            continue
        fc = f.conj()
        for g in bundle.parts.values():
            piece = g.contract_anti(lam)
            if not piece.is_zero():
                out = out + fc.wedge(piece)
    return out if isinstance(x, FormBundle) else out.component(x.p + 1, x.q - 1)


# ---------------------------------------------------------------------------
# legwise substitution and the extension map
# ---------------------------------------------------------------------------

def substitute_legs(n, hol_images, anti_images, x) -> FormBundle:
    """Extend leg -> 1-form images multiplicatively over every monomial."""
    bundle = x if isinstance(x, FormBundle) else FormBundle.of(x)
    out = FormBundle.zero(n)
    for f in bundle.parts.values():
        for m, c in f.terms.items():
            acc = None
            for i in range(n):
                if m.hol & (1 << i):
                    leg = hol_images[i]
                    acc = leg if acc is None else acc.wedge(leg)
            for j in range(n):
                if m.anti & (1 << j):
                    leg = anti_images[j]
                    acc = leg if acc is None else acc.wedge(leg)
            if acc is None:
                acc = FormBundle.of(Form.monomial(n, Monomial(0, 0)))
            out = out + acc.scale(c)
    return out


def _one_form_bundle(n, hol_row, anti_row) -> FormBundle:
    terms_h = {Monomial(1 << k, 0): c for k, c in enumerate(hol_row) if not c.is_zero()}
    terms_a = {Monomial(0, 1 << k): c for k, c in enumerate(anti_row) if not c.is_zero()}
    return FormBundle(n, {(1, 0): Form(n, 1, 0, terms_h),
                          (0, 1): Form(n, 0, 1, terms_a)})


def extension_map(phi: VectorForm01, x) -> FormBundle:
    """Replace every leg e^i by e^i + phi^i and ~e^j by ~e^j + conj(phi^j).

    Because the contraction is a derivation its exponential acts exactly as
    this algebra substitution; the power-series route is kept separately for
    cross-checking.
    """
    n = phi.n
    hol_images = []
    anti_images = []
    for i in range(n):
        leg = FormBundle.of(Form.leg(n, i)) + FormBundle.of(phi.comps[i])
        hol_images.append(leg)
    for j in range(n):
        leg = FormBundle.of(Form.leg(n, j, anti=True)) + FormBundle.of(phi.comps[j].conj())
        anti_images.append(leg)
    return substitute_legs(n, hol_images, anti_images, x)


def extension_map_series(phi: VectorForm01, alpha: Form) -> FormBundle:
    """Independent route: exponentiate the contraction on each pure factor."""
    n = phi.n
    out = FormBundle.zero(n)
    for m, c in alpha.terms.items():
        hol = FormBundle.of(Form.monomial(n, Monomial(m.hol, 0)))
        term = hol
        k = 1
        while True:
            hol = contract(phi, hol).scale(Fraction(1, k))
            if hol.is_zero():
                break
            term = term + hol
            k += 1
        anti = FormBundle.of(Form.monomial(n, Monomial(0, m.anti)))
        aterm = anti
        k = 1
        while True:
            anti = contract_conj(phi, anti).scale(Fraction(1, k))
            if anti.is_zero():
                break
            aterm = aterm + anti
            k += 1
        out = out + term.wedge(aterm).scale(c)
    return out


# ---------------------------------------------------------------------------
# endomorphism pairs and simultaneous contraction
# ---------------------------------------------------------------------------

@dataclass
class EndoPair:
    """Matrices acting on holomorphic resp. antiholomorphic coframe legs."""
    hol: list
    anti: list


@dataclass
class EndoBundle:
    phi_matrix: list            # coefficient of ~e^j in phi^lam
    phi_phibar: list            # acts on holomorphic legs
    phibar_phi: list            # its conjugate, acts on antiholomorphic legs
    inv_one_minus_phi_phibar: list
    inv_one_minus_phibar_phi: list


def endo_pairs(phi: VectorForm01) -> EndoBundle:
    n = phi.n
    P = phi.matrix()
    PB = linalg.mat_conj(P)
    pp = linalg.matmul(P, PB)
    bp = linalg.mat_conj(pp)
    s = linalg.mat_sub(linalg.mat_identity(n), pp)
    inv_s = linalg.invert(s)
    if inv_s is None:
        raise SingularEndomorphism("I - phi.conj(phi) is not invertible")
    inv_t = linalg.mat_conj(inv_s)
    return EndoBundle(P, pp, bp, inv_s, inv_t)


def simul_contract(pair: EndoPair, x) -> FormBundle:
    """Apply pair.hol to every holomorphic leg and pair.anti to every
    antiholomorphic leg, then expand."""
    n = len(pair.hol)
    hol_images = [_one_form_bundle(n, pair.hol[i], [E_ZERO] * n) for i in range(n)]
    anti_images = [_one_form_bundle(n, [E_ZERO] * n, pair.anti[j]) for j in range(n)]
    return substitute_legs(n, hol_images, anti_images, x)


def pure_pair(mat) -> EndoPair:
    """The pair (M, conj M) a single holomorphic-side matrix induces."""
    return EndoPair(mat, linalg.mat_conj(mat))


# ---------------------------------------------------------------------------
# deformed structure equations
# ---------------------------------------------------------------------------

@dataclass
class DeformedStructure:
    """Structure equations of the deformed coframe, expressed on deformed
    monomials, plus the integrability defect ((0,2) parts)."""
    n: int
    d_eta_t: list               # FormBundle per generator, deformed coordinates
    defect: list                # (0,2) Form per generator
    base_to_deformed_hol: list  # rows: e^i in deformed legs
    base_to_deformed_anti: list

    def defect_is_zero(self, reduce=None):
        for f in self.defect:
            g = f.map_coeffs(reduce) if reduce else f
            if not g.is_zero():
                return False
        return True


def frame_substitution(phi: VectorForm01):
    """Images of the base legs in the deformed coframe.

    With Phi the vector-form matrix, the deformed legs are
    ``e_t = e + Phi ~e`` and ``~e_t = conj(Phi) e + ~e``; inverting the
    2n x 2n change of basis through the Schur complement S = I - Phi conj(Phi)
    gives e = S^-1 e_t - (S^-1 Phi) ~e_t and the conjugate row.
    """
    n = phi.n
    P = phi.matrix()
    PB = linalg.mat_conj(P)
    S = linalg.mat_sub(linalg.mat_identity(n), linalg.matmul(P, PB))
    S_inv = linalg.invert(S)
    if S_inv is None:
        raise NonInvertibleFrame("deformed coframe change of basis is singular")
    minus_SP = [[-c for c in row] for row in linalg.matmul(S_inv, P)]
    hol_rows = [(S_inv[i], minus_SP[i]) for i in range(n)]
    # conjugate relation for the antiholomorphic legs
    anti_rows = [([c.conj() for c in minus_SP[i]], [c.conj() for c in S_inv[i]])
                 for i in range(n)]
    return hol_rows, anti_rows


def deformed_structure(A, phi: VectorForm01) -> DeformedStructure:
    n = A.n
    hol_rows, anti_rows = frame_substitution(phi)
    hol_images = [_one_form_bundle(n, hr, ar) for hr, ar in hol_rows]
    anti_images = [_one_form_bundle(n, hr, ar) for hr, ar in anti_rows]
    table = []
    defect = []
    for k in range(n):
        d_eta_t_base = A.d_eta[k] + A.d(phi.comps[k])
        in_deformed = substitute_legs(n, hol_images, anti_images, d_eta_t_base)
        table.append(in_deformed)
        defect.append(in_deformed.component(0, 2))
    return DeformedStructure(n, table, defect, hol_rows, anti_rows)


def to_deformed_coordinates(A, phi: VectorForm01, x) -> FormBundle:
    """Rewrite a base-coordinates form in the deformed monomial basis."""
    n = A.n
    hol_rows, anti_rows = frame_substitution(phi)
    hol_images = [_one_form_bundle(n, hr, ar) for hr, ar in hol_rows]
    anti_images = [_one_form_bundle(n, hr, ar) for hr, ar in anti_rows]
    return substitute_legs(n, hol_images, anti_images, x)


# ---------------------------------------------------------------------------
# deformed differentials
# ---------------------------------------------------------------------------

def _check_integrable(A, phi):
    ds = deformed_structure(A, phi)
    if not ds.defect_is_zero(A.reduce):
        raise PreconditionFailure(
            "vector form does not satisfy the integrability equation",
            {f"e{k + 1}": f for k, f in enumerate(ds.defect) if not f.is_zero()})


def del_t_coeff(A, phi: VectorForm01, alpha, check=True) -> FormBundle:
    """Coefficients beta with d'_t(ext(alpha)) = ext(beta):

    beta = (I - phi conj(phi))^-1 |><| ([d'', i_conj(phi)] + d')
           (I - phi conj(phi)) |><| alpha.

    The sandwich factor is valued in the holomorphic tangent directions, so
    its simultaneous contraction touches holomorphic legs only (verified
    against the projection definition of d'_t on sampled integrable points).
    """
    if check:
        _check_integrable(A, phi)
    n = A.n
    eb = endo_pairs(phi)
    ident = linalg.mat_identity(n)
    s_mat = linalg.mat_sub(ident, eb.phi_phibar)
    step1 = simul_contract(EndoPair(s_mat, ident), alpha)
    step2 = (A.delbar_form(contract_conj(phi, step1))
             - contract_conj(phi, A.delbar_form(step1))
             + A.del_form(step1))
    return simul_contract(EndoPair(eb.inv_one_minus_phi_phibar, ident), step2)


def delbar_t_coeff(A, phi: VectorForm01, alpha, check=True) -> FormBundle:
    """Coefficients beta with d''_t(ext(alpha)) = ext(beta):

    beta = (I - conj(phi) phi)^-1 |><| ([d', i_phi] + d'')
           (I - conj(phi) phi) |><| alpha.

    Mirror of del_t_coeff: the sandwich acts on antiholomorphic legs only.
    """
    if check:
        _check_integrable(A, phi)
    n = A.n
    eb = endo_pairs(phi)
    ident = linalg.mat_identity(n)
    t_mat = linalg.mat_sub(ident, eb.phibar_phi)
    step1 = simul_contract(EndoPair(ident, t_mat), alpha)
    step2 = (A.del_form(contract(phi, step1))
             - contract(phi, A.del_form(step1))
             + A.delbar_form(step1))
    return simul_contract(EndoPair(ident, eb.inv_one_minus_phibar_phi), step2)


def del_t(A, phi: VectorForm01, alpha, check=True) -> FormBundle:
    """The deformed d' applied to ext(alpha), in base coordinates."""
    return extension_map(phi, del_t_coeff(A, phi, alpha, check))


def delbar_t(A, phi: VectorForm01, alpha, check=True) -> FormBundle:
    return extension_map(phi, delbar_t_coeff(A, phi, alpha, check))


# -- denominator-split variants ----------------------------------------------
#
# Every operator above is linear over the invariant scalars, so the matrix
# inverses can be replaced by polynomial adjugates with the determinant power
# carried separately.  This keeps heavily parametric pipelines (the Taylor
# identity on fully symbolic families) inside polynomial arithmetic.

def _perm_det(mat) -> ParamExpr:
    """Determinant by permutation expansion (matrices here are at most 4x4)."""
    from itertools import permutations
    m = len(mat)
    acc = E_ZERO
    for perm in permutations(range(m)):
        inv = sum(1 for i in range(m) for j in range(i + 1, m) if perm[i] > perm[j])
        term = E_ONE
        for i in range(m):
            term = term * mat[i][perm[i]]
            if term.is_zero():
                break
        acc = acc + (term if inv % 2 == 0 else -term)
    return acc


def _adjugate(mat):
    """adj(M) with M @ adj(M) = det(M) I, via cofactor expansion."""
    m = len(mat)
    out = [[E_ZERO] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            minor = [[mat[r][c] for c in range(m) if c != j]
                     for r in range(m) if r != i]
            cof = _perm_det(minor)
            out[j][i] = cof if (i + j) % 2 == 0 else -cof
    return out


def _epow(e: ParamExpr, k: int) -> ParamExpr:
    out = E_ONE
    for _ in range(k):
        out = out * e
    return out


def _cleared_phi(phi: VectorForm01):
    """(phi_num, D) with phi = phi_num / D and phi_num polynomial.

    D is the least common denominator of every component coefficient, so
    the adjugate pipeline below stays inside polynomial arithmetic even for
    vector forms with rational coefficients.
    """
    from .scalars import _P_ONE, _pdivexact, _pgcd, _pmul
    den = _P_ONE
    for f in phi.comps:
        for c in f.terms.values():
            if c.den != _P_ONE:
                g = _pgcd(den, c.den)
                den = _pmul(den, c.den if g == _P_ONE else _pdivexact(c.den, g))
    if den == _P_ONE:
        return phi, E_ONE
    d_expr = ParamExpr(den)
    return phi.map_coeffs(lambda c: c * d_expr), d_expr


def del_t_split(A, phi: VectorForm01, f: Form):
    """(numerator bundle, denominator scalar) with
    del_t_coeff(f) = numerator / denominator.

    The numerator is computed with the adjugate of the denominator-cleared
    Schur complement, so it stays polynomial whenever f does; the only
    fraction arithmetic is the single closed-form denominator."""
    n = A.n
    phi_num, d_phi = _cleared_phi(phi)
    d_phi_bar = d_phi.conj()
    dd = d_phi * d_phi_bar
    P = phi_num.matrix()
    ppbar = linalg.matmul(P, linalg.mat_conj(P))
    s_hat = [[(dd if i == j else E_ZERO) - ppbar[i][j] for j in range(n)]
             for i in range(n)]
    ident = linalg.mat_identity(n)
    step1 = simul_contract(EndoPair(s_hat, ident), f)
    step2 = (A.delbar_form(contract_conj(phi_num, step1))
             - contract_conj(phi_num, A.delbar_form(step1))
             + A.del_form(step1).scale(d_phi_bar))
    num = simul_contract(EndoPair(_adjugate(s_hat), ident), step2)
    den = _epow(_perm_det(s_hat), f.p + 1) / d_phi
    return num, den


def delbar_t_split(A, phi: VectorForm01, f: Form):
    """Mirror of del_t_split on the antiholomorphic side."""
    n = A.n
    phi_num, d_phi = _cleared_phi(phi)
    d_phi_bar = d_phi.conj()
    dd = d_phi * d_phi_bar
    P = phi_num.matrix()
    ppbar = linalg.matmul(P, linalg.mat_conj(P))
    t_hat = linalg.mat_conj(
        [[(dd if i == j else E_ZERO) - ppbar[i][j] for j in range(n)]
         for i in range(n)])
    ident = linalg.mat_identity(n)
    step1 = simul_contract(EndoPair(ident, t_hat), f)
    step2 = (A.del_form(contract(phi_num, step1))
             - contract(phi_num, A.del_form(step1))
             + A.delbar_form(step1).scale(d_phi))
    num = simul_contract(EndoPair(ident, _adjugate(t_hat)), step2)
    den = _epow(_perm_det(t_hat), f.q + 1) / d_phi_bar
    return num, den


# ---------------------------------------------------------------------------
# one-parameter curves
# ---------------------------------------------------------------------------

class DeformationCurve:
    """A vector form whose coefficients depend rationally on the real curve
    parameter t, vanishing at t = 0."""

    def __init__(self, phi: VectorForm01, var: str = "t"):
        self.phi = phi
        self.var = var
        at0 = phi.subs({var: Fraction(0)})
        if not at0.is_zero():
            raise ValueError("curve must vanish at t = 0")

    @property
    def n(self):
        return self.phi.n

    def at(self, value) -> VectorForm01:
        return self.phi.subs({self.var: value})

    def derivative_at_zero(self) -> VectorForm01:
        return self.phi.map_coeffs(
            lambda c: c.diff(self.var).subs({self.var: Fraction(0)}))


def mc_defect_on_curve(A, curve: DeformationCurve):
    """Integrability defect of the curve as exact scalars in t.

    Returns (defect_terms, first_order_terms): lists of (generator,
    monomial, coefficient) triples; the first-order list is the exact
    t-derivative at 0 and vanishes exactly when the curve is integrable to
    first order.
    """
    ds = deformed_structure(A, curve.phi)
    defect_terms = []
    first_order = []
    for k, f in enumerate(ds.defect):
        f = f.map_coeffs(A.reduce)
        for m, c in sorted(f.terms.items()):
            defect_terms.append((k + 1, m, c))
            c1 = A.reduce(c.diff(curve.var).subs({curve.var: Fraction(0)}))
            if not c1.is_zero():
                first_order.append((k + 1, m, c1))
    return defect_terms, first_order
