"""First-order obstruction to curves of pluriclosed metrics.

Given a metric whose fundamental form omega is pluriclosed and a deformation
curve with first-order direction phi1, the (2,2)-form

    2i Im( d' i_phi1 d' (omega) )  =  X - conj(X),   X = d'(i_phi1 d' omega)

must equal d'd''(omega'(0)) along any smooth pluriclosed family riding the
curve; in particular its imaginary part must be d'd''-exact.  This module
computes the form, its class test, the family condition, the first-order
Taylor identity behind the theorem, and a numeric sweep of the defect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import PreconditionFailure, RankAmbiguous
from .exterior import Form, FormBundle
from .hermitian import (HermitianMetric, fundamental_form, inner_bundle,
                        is_bc_harmonic, is_ddbar_exact)
from .deformation import (DeformationCurve, VectorForm01, contract,
                          contract_conj, delbar_t_coeff, delbar_t_split,
                          del_t_coeff, del_t_split, deformed_structure,
                          extension_map, mc_defect_on_curve)
from .scalars import E_ZERO, GaussRat, ParamExpr, _as_expr


class MetricFamily:
    """A (1,1)-form family omega(t): coefficients rational in the real curve
    parameter, equal to the declared base metric at t = 0."""

    def __init__(self, h_t, base: HermitianMetric, var: str = "t"):
        self.n = base.n
        self.var = var
        self.base = base
        self.h_t = [[_as_expr(c) for c in row] for row in h_t]
        for j in range(self.n):
            for k in range(self.n):
                if self.h_t[j][k] != self.h_t[k][j].conj():
                    raise ValueError(f"family matrix not Hermitian at ({j+1},{k+1})")
                if self.h_t[j][k].subs({var: Fraction(0)}) != base.h[j][k]:
                    raise ValueError(
                        f"family does not restrict to the base metric at t=0 "
                        f"(entry ({j+1},{k+1}))")
        self.omega_t = fundamental_form(HermitianMetricView(self.n, self.h_t))

    @staticmethod
    def constant(base: HermitianMetric, var: str = "t") -> "MetricFamily":
        return MetricFamily([list(r) for r in base.h], base, var)

    def omega0(self) -> Form:
        return fundamental_form(self.base)

    def omega_at(self, value) -> Form:
        return self.omega_t.map_coeffs(lambda c: c.subs({self.var: value}))

    def omega_prime0(self) -> Form:
        return self.omega_t.map_coeffs(
            lambda c: c.diff(self.var).subs({self.var: Fraction(0)}))


class HermitianMetricView(HermitianMetric):
    """Metric wrapper that skips Hermitian re-validation (already checked)."""

    def __init__(self, n, h):
        self.n = n
        self.h = h
        self._h_inv = None
        self._gram_hol = None
        self._minors = {"hol": {}, "anti": {}}
        self._vol = None
        self._op_cache = {}


def first_order_obstruction(A, omega: Form, phi1: VectorForm01) -> Form:
    """X - conj(X) with X = d'(i_phi1(d' omega)); a (2,2)-form equal to
    2i times the imaginary part of d' i_phi1 d' (omega)."""
    x = del_i_del(A, omega, phi1)
    return x - x.conj()


def del_i_del(A, omega: Form, phi1: VectorForm01) -> Form:
    """The composition d' o i_phi1 o d' applied to omega."""
    d_om = A.del_homog(omega)
    mid = contract(phi1, d_om)
    return A.del_homog(mid).map_coeffs(A.reduce)


@dataclass
class ObstructionReport:
    obstruction: Form                    # 2i Im(d' i d')(omega)
    im_part: Form                        # the imaginary part itself
    del_residue: Form = None
    delbar_residue: Form = None
    closed: bool = False
    exact: bool = None                   # None when undecidable symbolically
    witness: Form = None
    harmonic_projection: list = None     # [(harmonic form, coefficient)]
    verdict: str = "UNDECIDED"           # NO_OBSTRUCTION | OBSTRUCTED | CONDITIONAL
    conditions: list = field(default_factory=list)   # scalars that must vanish
    notes: list = field(default_factory=list)


def class_test(A, h: HermitianMetric, obstruction: Form) -> ObstructionReport:
    """Decide whether the imaginary part represents zero in invariant
    Bott-Chern (2,2) cohomology.

    Numeric data gives a definite verdict; with free parameters the report
    carries the scalar conditions under which the class vanishes.
    """
    minus_half_i = ParamExpr.const(GaussRat(0, Fraction(-1, 2)))
    im_part = obstruction.scale(minus_half_i)    # (X - conj X)/(2i)
    rep = ObstructionReport(obstruction=obstruction, im_part=im_part)
    rep.del_residue = A.del_homog(im_part).map_coeffs(A.reduce)
    rep.delbar_residue = A.delbar_homog(im_part).map_coeffs(A.reduce)
    rep.closed = rep.del_residue.is_zero() and rep.delbar_residue.is_zero()
    if not rep.closed:
        rep.verdict = "NOT_CLOSED"
        rep.notes.append("imaginary part is not closed; no class verdict")
        return rep
    if im_part.is_zero():
        rep.exact = True
        rep.witness = Form(A.n, 1, 1)
        rep.verdict = "NO_OBSTRUCTION"
        return rep
    numeric = all(c.is_constant() for c in im_part.terms.values()) and A.is_numeric()
    if numeric:
        rep.exact, rep.witness = is_ddbar_exact(im_part, A, h)
        rep.verdict = "NO_OBSTRUCTION" if rep.exact else "OBSTRUCTED"
        if h.is_numeric():
            rep.harmonic_projection = _harmonic_projection(A, h, im_part)
        return rep
    # parametric mode: try the solve; fall back to the condition expressions
    try:
        rep.exact, rep.witness = is_ddbar_exact(im_part, A, h)
        rep.verdict = "NO_OBSTRUCTION" if rep.exact else "CONDITIONAL"
        if not rep.exact:
            rep.conditions = [c for _, c in sorted(im_part.terms.items())]
            rep.notes.append("obstructed unless every condition expression vanishes")
    except RankAmbiguous:
        rep.exact = None
        rep.verdict = "CONDITIONAL"
        rep.conditions = [c for _, c in sorted(im_part.terms.items())]
        rep.notes.append("rank ambiguous on the constraint variety; "
                         "supply a numeric assignment for a definite verdict")
    return rep


def _harmonic_projection(A, h, form: Form):
    """Components of the form against an orthogonal harmonic kernel basis."""
    from .hermitian import bc_cohomology, inner
    data = bc_cohomology(A, h, form.p, form.q)
    basis = data["laplacian_kernel"] or []
    out = []
    # Gram-solve <form, b_i> = sum_j c_j <b_j, b_i>
    if basis:
        from . import linalg
        g = [[inner(bj, bi, h) for bj in basis] for bi in basis]
        rhs = [inner(form, bi, h) for bi in basis]
        sol = linalg.solve(g, rhs)
        for b, c in zip(basis, sol):
            out.append((b, c))
    return out


def family_condition(A, curve: DeformationCurve, fam: MetricFamily):
    """Residual coefficients of [2i Im(d' i_phi'(0) d')(omega) - d'd'' omega'(0)].

    Zero residual is exactly the first-order necessary condition for a
    pluriclosed family along the curve.  Returns (residual form, lhs, rhs,
    first-order integrability defect).
    """
    phi1 = curve.derivative_at_zero()
    omega0 = fam.omega0()
    lhs = first_order_obstruction(A, omega0, phi1).map_coeffs(A.reduce)
    rhs = A.del_homog(A.delbar_homog(fam.omega_prime0())).map_coeffs(A.reduce)
    residual = (lhs - rhs).map_coeffs(A.reduce)
    _, first_order = mc_defect_on_curve(A, curve)
    return residual, lhs, rhs, first_order


def ddbar_t_split_family(A, curve: DeformationCurve, fam: MetricFamily):
    """d'_t d''_t of the metric family as (numerator bundle, denominator):
    the deformed-coordinate coefficients are numerator/denominator, both
    polynomial in the curve parameter (exact rational function of t)."""
    phi_t = curve.phi
    om_t = fam.omega_t
    inner_num, inner_den = delbar_t_split(A, phi_t, om_t)
    comp = inner_num.component(om_t.p, om_t.q + 1)
    outer_num, outer_den = del_t_split(A, phi_t, comp)
    return outer_num, inner_den * outer_den


def ddbar_t_coeff_family(A, curve: DeformationCurve, fam: MetricFamily,
                         check=True) -> FormBundle:
    """d'_t d''_t of the metric family, as deformed-coordinate coefficients
    (exact rational functions of the curve parameter)."""
    if check:
        num, den = ddbar_t_split_family(A, curve, fam)
        return num.scale(ParamExpr.const(1) / den)
    phi_t = curve.phi
    inner_part = delbar_t_coeff(A, phi_t, fam.omega_t, check=False)
    return del_t_coeff(A, phi_t, inner_part, check=False)


def taylor_identity_check(A, curve: DeformationCurve, fam: MetricFamily):
    """Machine check of the first-order expansion behind the main theorem.

    Computes delta(t) = d'_t d''_t coefficients of the family as an exact
    rational function of t, requires delta(0) = 0 (the base metric is
    pluriclosed), and verifies

        delta'(0) = -d'(phi'(0) _| d' omega) + d''(conj(phi'(0)) _| d'' omega)
                    + d'd'' omega'(0)

    exactly, modulo the declared constraints.  Returns a dict with the two
    sides and the residual.
    """
    var = curve.var
    num, den = ddbar_t_split_family(A, curve, fam)
    den0 = den.subs({var: Fraction(0)})
    if A.reduce(den0).is_zero():
        raise AssertionError("split denominator vanishes at t = 0")
    at0 = num.map_coeffs(lambda c: A.reduce(c.subs({var: Fraction(0)})))
    if not at0.is_zero():
        raise PreconditionFailure(
            "base metric is not pluriclosed; first-order identity needs "
            "d'd''(omega(0)) = 0", {"delta(0)": at0})
    # exact quotient rule at t = 0 (num(0) kept: it may vanish only on the
    # constraint variety)
    den_prime0 = den.diff(var).subs({var: Fraction(0)})
    deriv0 = num.map_coeffs(
        lambda c: A.reduce(
            (c.diff(var).subs({var: Fraction(0)}) * den0
             - c.subs({var: Fraction(0)}) * den_prime0) / (den0 * den0)))
    phi1 = curve.derivative_at_zero()
    omega0 = fam.omega0()
    d_om = A.del_homog(omega0)
    db_om = A.delbar_homog(omega0)
    rhs = (-A.del_homog(contract(phi1, d_om))
           + A.delbar_homog(contract_conj(phi1, db_om))
           + A.del_homog(A.delbar_homog(fam.omega_prime0())))
    rhs = rhs.map_coeffs(A.reduce)
    residual = (deriv0 - FormBundle.of(rhs)).map_coeffs(A.reduce)
    return {"derivative": deriv0, "expected": rhs, "residual": residual}


def defect_norm_squared(A, curve: DeformationCurve, fam: MetricFamily,
                        t_value: Fraction) -> Fraction:
    """Exact squared norm of d'_t d''_t omega_t at one rational t, measured
    against the base inner product at t = 0."""
    phi_val = curve.at(t_value)
    om_val = fam.omega_at(t_value)
    inner_part = delbar_t_coeff(A, phi_val, om_val, check=False)
    coeffs = del_t_coeff(A, phi_val, inner_part, check=False)
    defect = extension_map(phi_val, coeffs)
    val = inner_bundle(defect, defect, fam.base)
    g = val.to_gaussrat()
    if not g.is_real():
        raise AssertionError("squared norm must be real")
    return g.re


def sweep(A, curve: DeformationCurve, fam: MetricFamily, grid) -> list:
    """Rows (t, defect_norm_num, defect_norm_den) over exact rational t."""
    rows = []
    for t_value in grid:
        t_value = Fraction(t_value)
        norm2 = defect_norm_squared(A, curve, fam, t_value)
        rows.append((t_value, norm2.numerator, norm2.denominator))
    rows.sort(key=lambda r: r[0])
    return rows


def sweep_grid(a, b, steps):
    a, b = Fraction(a), Fraction(b)
    if steps < 1:
        raise ValueError("need at least one step")
    return [a + (b - a) * Fraction(k, steps) for k in range(steps + 1)]
