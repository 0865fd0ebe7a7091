"""Coefficient-matrix invariants, the cohomogeneity classifier, the rank-2
locus certificates, and the torsion constraint-extraction pipeline.

Column indexing of the 4x7 coefficient matrix is 1-based in the coframe
order (w0, wb0, g, w1, w2, w3, w4); rows follow H1..H4.  All verdicts are
exact; floating point never enters this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .catalog import (ORBIT_CONGRUENCE_W1, ORBIT_CONGRUENCE_W3, ORBIT_FUNCTIONS, ZETA_TEXT,
                      builtin, discrete_symmetry_definitions, discrete_symmetry_point,
                      submodel_first_branch, submodel_second_branch, typeb_stage)
from .dsl import parse_form_text
from .forms import Form, StructuralError, det, isolate_opaque_with_residue
from .models import CheckOutcome, ModelError, StructureModel, verify_derived_coframing
from .ring import Scalar, _poly_divexact


class InputError(ValueError):
    """A classification input violates a domain constraint."""


# ---------------------------------------------------------------------------
# the coefficient matrix and its minors

H_NAMES = ("H1", "H2", "H3", "H4")


class HMatrix:
    """4x7 matrix of the 1-form coefficients of dH1..dH4."""

    def __init__(self, model: StructureModel, rows):
        self.model = model
        self.rows = rows  # list[list[Scalar]], 4 x 7

    @staticmethod
    def from_model(model: StructureModel) -> "HMatrix":
        ring = model.ring
        rows = []
        for n in H_NAMES:
            sym = model.functions.get(n)
            if sym is None or sym.free:
                raise ModelError(f"model does not declare a differential for {n}")
            f = sym.differential
            rows.append([f.terms.get((j,), ring.zero) for j in range(7)])
        return HMatrix(model, rows)

    def entry(self, i: int, lam: int) -> Scalar:
        """1-based entry h_{i,lam}."""
        return self.rows[i - 1][lam - 1]


def h_matrix(model: StructureModel) -> HMatrix:
    return HMatrix.from_model(model)


def submodel_h_matrix(sub: StructureModel, bindings: Mapping[str, Scalar]) -> HMatrix:
    """The substituted matrix on a sub-locus: rows of bound functions are the
    chain-rule derivatives of their defining expressions."""
    ring = sub.ring
    rows = []
    for n in H_NAMES:
        sym = sub.functions.get(n)
        if sym is not None:
            f = sym.differential
        else:
            f = sub.d(bindings[n])
        rows.append([f.terms.get((j,), ring.zero) for j in range(7)])
    return HMatrix(sub, rows)


def minor_det(h: HMatrix, rows: Sequence[int], cols: Sequence[int]) -> Scalar:
    """Exact determinant of the minor on 1-based row and column index sets."""
    if len(rows) != len(cols):
        raise ModelError("minor needs equally many rows and columns")
    if not 1 <= len(rows) <= 4:
        raise ModelError("minor size must be between 1 and 4")
    return det([[h.entry(r, c) for c in cols] for r in rows])


def fraction_matrix_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Exact rank of a matrix of rationals."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(rank + 1, nrows):
            if m[i][c]:
                f = m[i][c] / m[rank][c]
                for j in range(c, ncols):
                    m[i][j] -= f * m[rank][j]
        rank += 1
        if rank == nrows:
            break
    return rank


def h_rank_at(eps: int, H) -> int:
    """Exact rank of the coefficient matrix evaluated at a rational point."""
    m = builtin("typeA1", eps)
    point = dict(zip(H_NAMES, (Fraction(x) for x in H)))
    h = h_matrix(m)
    return fraction_matrix_rank([[c.eval(point) for c in row] for row in h.rows])


# ---------------------------------------------------------------------------
# scalar invariants and the classifier

def chi_scalars(model: StructureModel):
    """The three invariant factors of the key 4x4 minor, as exact scalars."""
    r = model.ring
    e = r.const(r.parameters["eps"])
    H1, H2, H3, H4 = (r.var(n) for n in H_NAMES)
    chi1 = H2 - 1
    chi2 = H1 ** 2 - e * H2
    chi3 = -e * (3 * H2 * H3 + H3 + 4 * H2) * chi2 \
        - (e * H2 + 3 * H1 ** 2) * (H4 + e) * chi1
    return chi1, chi2, chi3


def chi_values(eps: int, H):
    """(chi1, chi2, chi3) at a rational point."""
    point = dict(zip(H_NAMES, (Fraction(x) for x in H)))
    return tuple(c.eval(point) for c in chi_scalars(builtin("typeA1", eps)))


@dataclass(frozen=True)
class ClassificationResult:
    cohomogeneity: int
    branch: str  # which condition fired

    def as_json(self) -> dict:
        return {"cohomogeneity": self.cohomogeneity, "branch": self.branch}


BRANCH_FIRST = "first-bracket"
BRANCH_SECOND = "second-bracket"
BRANCH_PRODUCT = "product-relation"
BRANCH_GENERIC = "generic"


def validate_classification_input(eps: int, H) -> tuple:
    if eps not in (1, -1):
        raise InputError("eps must be +1 or -1")
    H = tuple(Fraction(x) for x in H)
    if len(H) != 4:
        raise InputError("expected four rational values H1..H4")
    H1, H2, H3, H4 = H
    if H1 <= 0:
        raise InputError("violated constraint: H1 > 0")
    if H1 * H1 == eps:
        raise InputError("violated constraint: H1^2 != eps")
    if H2 == 0:
        raise InputError("violated constraint: H2 != 0")
    return H


def classify(eps: int, H) -> ClassificationResult:
    """Cohomogeneity 2, 3 or 4 of the structure at a rational parameter point.

    Cohomogeneity 2 on either bracket (H2 = 1, H3 = -1) or
    (H2 = eps*H1^2, H4 = -eps); otherwise 3 exactly when the two displayed
    products agree; otherwise 4.  Exact rational arithmetic throughout.
    """
    H1, H2, H3, H4 = validate_classification_input(eps, H)
    if H2 == 1 and H3 == -1:
        return ClassificationResult(2, BRANCH_FIRST)
    if H2 == eps * H1 ** 2 and H4 == -eps:
        return ClassificationResult(2, BRANCH_SECOND)
    lhs = eps * (3 * H2 * H3 + H3 + 4 * H2) * (H1 ** 2 - eps * H2)
    rhs = -(eps * H2 + 3 * H1 ** 2) * (H4 + eps) * (H2 - 1)
    if lhs == rhs:
        return ClassificationResult(3, BRANCH_PRODUCT)
    return ClassificationResult(4, BRANCH_GENERIC)


def verify_discrete_symmetry(model: StructureModel):
    """Recompute all eleven structure equations after the order-2 substitution."""
    form_defs, scalar_defs = discrete_symmetry_definitions(model)
    return verify_derived_coframing(model, form_defs, model, scalar_defs)


def classify_symmetry_invariant(eps: int, H) -> bool:
    """classify agrees with itself across the substitution, brackets swapped."""
    a = classify(eps, H)
    b = classify(eps, discrete_symmetry_point(eps, H))
    if a.cohomogeneity != b.cohomogeneity:
        return False
    swap = {BRANCH_FIRST: BRANCH_SECOND, BRANCH_SECOND: BRANCH_FIRST}
    if a.branch in swap:
        return b.branch == swap[a.branch]
    return a.branch == b.branch


# ---------------------------------------------------------------------------
# rank-2 locus certificates

@dataclass(frozen=True)
class Rank2Report:
    branch: str
    all_3x3_zero: bool
    witness_rows: tuple
    witness_cols: tuple
    witness: str
    chi2_power: int
    cofactor: str
    degenerate_witness: str
    degenerate_pure: bool
    samples_nonzero: bool

    @property
    def ok(self) -> bool:
        return (self.all_3x3_zero and self.chi2_power >= 1
                and self.degenerate_pure and self.samples_nonzero)

    def as_json(self) -> dict:
        return {
            "branch": self.branch,
            "all_3x3_zero": self.all_3x3_zero,
            "witness_rows": list(self.witness_rows),
            "witness_cols": list(self.witness_cols),
            "witness": self.witness,
            "chi2_power": self.chi2_power,
            "cofactor": self.cofactor,
            "degenerate_witness": self.degenerate_witness,
            "degenerate_pure": self.degenerate_pure,
            "samples_nonzero": self.samples_nonzero,
            "ok": self.ok,
        }


def _factor_power(s: Scalar, factor: Scalar) -> tuple:
    """Largest k with factor^k dividing the numerator, and the cofactor with
    those factors stripped from the numerator."""
    k = 0
    num = s.num
    while True:
        q = _poly_divexact(num, factor.num)
        if q is None:
            break
        num = q
        k += 1
    return k, Scalar(s.ring, dict(num), dict(s.den))


def _pure_in_h1_chi2(s: Scalar, chi2: Scalar) -> bool:
    """True when the numerator is unit * H1^a * ((H1)^2 - eps)^b."""
    if s.is_zero():
        return False
    _, rest = _factor_power(s, chi2)
    monos = list(rest.num)
    if len(monos) != 1:
        return False
    h1 = s.ring.index("H1")
    return all(v == h1 for v, _ in monos[0])


_BRANCH_DATA = {
    "first-bracket": dict(build=submodel_first_branch,
                          bound=lambda ring, eps: {
                              "H2": ring.one, "H3": -ring.one},
                          live_rows=(1, 4), primary=(2, 6), secondary=(2, 4),
                          degenerate=lambda ring, eps: {"H4": ring.const(-eps)},
                          sample_vars=("H1", "H4")),
    "second-bracket": dict(build=submodel_second_branch,
                           bound=lambda ring, eps: {
                               "H2": ring.const(eps) * ring.var("H1") ** 2,
                               "H4": ring.const(-eps)},
                           live_rows=(1, 3), primary=(1, 4), secondary=(1, 6),
                           degenerate=lambda ring, eps: {"H3": -ring.one},
                           sample_vars=("H1", "H3")),
}


def rank2_locus_check(eps: int, branch: str, seed: int = 2024) -> Rank2Report:
    """Exact certificate that the coefficient matrix has rank 2 on a branch.

    Checks that every 3x3 minor vanishes identically, exhibits a witnessing
    2x2 minor together with the multiplicity of ((H1)^2 - eps) in its
    numerator, and certifies the witness pair covers the whole branch: on
    the cofactor's zero locus the secondary minor is a unit times powers of
    H1 and ((H1)^2 - eps), hence nonvanishing under the domain constraints.
    Five random admissible sample evaluations cross-check nonvanishing.
    """
    import random
    if branch not in _BRANCH_DATA:
        raise ModelError(f"unknown branch {branch!r}")
    data = _BRANCH_DATA[branch]
    sub = data["build"](eps)
    ring = sub.ring
    h = submodel_h_matrix(sub, data["bound"](ring, eps))

    all_zero = all(
        minor_det(h, rs, cs).is_zero()
        for rs in combinations(range(1, 5), 3) for cs in combinations(range(1, 8), 3))

    chi2 = ring.var("H1") ** 2 - eps
    primary = minor_det(h, data["live_rows"], data["primary"])
    k, cofactor = _factor_power(primary, chi2)

    secondary = minor_det(h, data["live_rows"], data["secondary"])
    degen = data["degenerate"](ring, eps)
    sub_bind = {n: v for n, v in degen.items()}
    degen_secondary = secondary.substitute(sub_bind, ring)
    degenerate_pure = _pure_in_h1_chi2(degen_secondary, chi2)

    rng = random.Random(seed)
    samples_ok = True
    checked = 0
    while checked < 5:
        point = {}
        for v in ring.variables:
            point[v] = Fraction(rng.randint(1, 19), rng.randint(1, 7))
        if point["H1"] <= 0 or point["H1"] ** 2 == eps:
            continue
        try:
            val = primary.eval(point)
        except Exception:
            continue
        checked += 1
        # the witness may vanish on the degenerate slice, never identically
        if val == 0 and degen_secondary.eval(point) == 0:
            samples_ok = False
    return Rank2Report(branch, all_zero, data["live_rows"], data["primary"],
                       primary.text(), k, cofactor.text(),
                       degen_secondary.text(), degenerate_pure, samples_ok)


# ---------------------------------------------------------------------------
# torsion constraint extraction

@dataclass
class ConstraintSet:
    equations: list = field(default_factory=list)   # list[Scalar]
    provenance: list = field(default_factory=list)  # list[str]

    def append(self, eq: Scalar, source: str):
        self.equations.append(eq)
        self.provenance.append(source)

    def nonzero(self) -> "ConstraintSet":
        out = ConstraintSet()
        for eq, src in zip(self.equations, self.provenance):
            if not eq.is_zero():
                out.append(eq, src)
        return out

    def texts(self) -> set:
        return {eq.text() for eq in self.equations}


PLAIN_RECIPES = (
    ("w0", ("w0",)),
    ("wb0", ("wb0",)),
    ("g", ("w0", "wb0", "g")),
)


def typeb_extract(model: StructureModel, recipes=PLAIN_RECIPES) -> ConstraintSet:
    """Coefficient equations of reduced d(d(name)) identities.

    Every recipe reduction must eliminate all opaque symbols, otherwise the
    reduction is structurally invalid for plain extraction.
    """
    out = ConstraintSet()
    for name, drop in recipes:
        f = model.d_squared(name).reduce_mod(drop)
        if f.opaque:
            survivors = sorted({n for (n, _) in f.opaque})
            raise StructuralError(
                f"opaque symbols {survivors} survive the reduction of d2({name})")
        for mi in sorted(f.terms):
            wedge = "/\\".join(model.basis.oneforms[i] for i in mi)
            out.append(f.terms[mi], f"d2({name}) mod {','.join(drop)} @ {wedge}")
    return out


def connection_pair_difference(model: StructureModel, opaque: str,
                               first, second, shift=None) -> Form:
    """Difference of the two congruence classes of an opaque symbol.

    ``first``/``second`` are (identity name, partner, drop) triples; an
    optional ``shift`` replacement is applied before reduction so the drop
    sets may name shifted combinations.
    """
    def extract(spec):
        name, partner, drop = spec
        f = model.d_squared(name)
        if shift:
            f = f.change_basis(shift, check=True)
        X, residue = isolate_opaque_with_residue(f, opaque, partner, drop)
        if not residue.is_zero():
            raise StructuralError(
                f"partner-free residue survives extracting {opaque} from d2({name}): "
                + residue.text())
        return X, partner
    Xa, pa = extract(first)
    Xb, pb = extract(second)
    common = set(first[2]) | set(second[2]) | {pa, pb}
    return (Xa - Xb).reduce_mod(common)


def dphi_pair_difference(model: StructureModel, i: int = 2, j: int = 3) -> Form:
    """Difference of the two extractions of the scale-connection derivative,
    reduced modulo w0, wb0, g, wi, wj."""
    first = ("w0", "w0", ("wb0", "g", f"w{i}", f"w{j}"))
    second = ("wb0", "wb0", ("w0", "g", f"w{i}", f"w{j}"))
    return connection_pair_difference(model, "dphi", first, second)


def dpi_pair_difference(model: StructureModel) -> Form:
    """Difference of the two extractions of the off-diagonal connection
    derivative, reduced modulo w0, wb0, g and the combination w1 - w3."""
    w1 = parse_form_text("w1", model)
    w3 = parse_form_text("w3", model)
    shift = {"w1": w1 + w3}  # afterwards the w1 slot denotes w1 - w3
    first = ("g", "wb0", ("w0", "g", "w1"))
    second = ("g", "w0", ("wb0", "g", "w1"))
    return connection_pair_difference(model, "dpi", first, second, shift=shift)


@dataclass
class TypeBReport:
    outcomes: list

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.outcomes)

    def as_json(self) -> dict:
        return {"checks": [o.as_json() for o in self.outcomes], "pass": self.ok}


def typeb_pipeline() -> TypeBReport:
    """Run the staged constraint extraction and compare against the recorded
    relation content at each stage."""
    outcomes = []

    m1 = typeb_stage(1)
    residue = typeb_extract(m1).nonzero()
    outcomes.append(CheckOutcome(
        "plain-reductions-after-relation-block", not residue.equations,
        len(residue.equations),
        "; ".join(f"{s}: {e.text()}" for e, s in zip(residue.equations, residue.provenance))))

    diff = dphi_pair_difference(m1)
    expected = parse_form_text("4*C4*w1/\\w4", m1, degree=2)
    outcomes.append(_diff_outcome("dphi-pair-difference-is-4C4-w1w4", diff, expected))

    m2 = typeb_stage(2)
    r2 = m2.ring
    pair_expect = {
        (1, 4): parse_form_text("4*C2*w2/\\w3", m2, degree=2),
        (2, 4): parse_form_text("(4*C1 + 4*C3)*w1/\\w3", m2, degree=2),
        (3, 4): parse_form_text("(2*C2 + 4*K + P2 - P4)*w1/\\w2", m2, degree=2),
    }
    for (i, j), expected in pair_expect.items():
        diff = dphi_pair_difference(m2, i, j)
        outcomes.append(_diff_outcome(f"dphi-pair-({i},{j})", diff, expected))
    # the remaining pairs must not impose anything beyond the three relations
    relations = {"C2": r2.zero, "C3": -r2.var("C1"),
                 "K": (r2.var("P4") - r2.var("P2")) / 4}
    for (i, j) in ((1, 2), (1, 3)):
        diff = dphi_pair_difference(m2, i, j)
        reduced_terms = {mi: c.substitute(relations, r2) for mi, c in diff.terms.items()}
        residual = Form(m2.basis, r2, 2,
                        {mi: c for mi, c in reduced_terms.items() if not c.is_zero()})
        outcomes.append(_outcome_form(f"dphi-pair-({i},{j})-no-new-relations", residual))

    m3 = typeb_stage(3)
    diff = dpi_pair_difference(m3)
    zeta = parse_form_text(ZETA_TEXT, m3, degree=2)
    outcomes.append(_diff_outcome("dpi-pair-difference-is-zeta", diff, zeta))

    # zeta = 0 forces P0 = 0 and C1*(P2 - P4) = 0, i.e. C1*K = 0
    r3 = m3.ring
    c_23 = diff.coefficient(["w2", "w3"])
    c_34 = diff.coefficient(["w3", "w4"])
    p0 = (c_23 + c_34) / 4
    c1k = (c_34 - c_23) / 8
    forced_ok = (p0 == r3.var("P0")) and \
        (c1k == r3.var("C1") * (r3.var("P4") - r3.var("P2")) / 4)
    outcomes.append(CheckOutcome("zeta-forces-P0-and-C1K", forced_ok, 0 if forced_ok else 1,
                                 "" if forced_ok else f"P0-part {p0.text()}, C1K-part {c1k.text()}"))
    return TypeBReport(outcomes)


def _diff_outcome(name: str, got: Form, expected: Form) -> CheckOutcome:
    return _outcome_form(name, got - expected)


def _outcome_form(name: str, residual: Form) -> CheckOutcome:
    n = len(residual.terms) + len(residual.opaque)
    return CheckOutcome(name, residual.is_zero(), n, residual.text())


# ---------------------------------------------------------------------------
# orbit-dimension criterion

@dataclass(frozen=True)
class OrbitReport:
    all_zero: bool
    w1_congruence_zero: bool
    w3_congruence_zero: bool

    @property
    def agreement(self) -> bool:
        return self.all_zero == (self.w1_congruence_zero and self.w3_congruence_zero)

    def as_json(self) -> dict:
        return {
            "all_zero": self.all_zero,
            "w1_congruence_zero": self.w1_congruence_zero,
            "w3_congruence_zero": self.w3_congruence_zero,
            "agreement": self.agreement,
        }


def orbit_criterion(values: Mapping[str, object]):
    """True exactly when all ten listed functions vanish.

    The report evaluates the two displayed integrability congruences at the
    values by plain rational arithmetic, so the criterion and the congruence
    verdicts can be cross-checked independently.
    """
    vals = {}
    for n in ORBIT_FUNCTIONS:
        if n not in values:
            raise InputError(f"missing value for {n}")
        vals[n] = Fraction(values[n])
    extra = set(values) - set(ORBIT_FUNCTIONS)
    if extra:
        raise InputError(f"unexpected names: {sorted(extra)}")
    flag = all(v == 0 for v in vals.values())
    w1_coeffs = (vals["T1_0"], vals["T1_2"], vals["Tb1_2"], vals["R1_2"],
                 vals["P2"] / 2)
    w3_coeffs = (vals["T3_0"], vals["Tb3_4"], vals["T3_4"], vals["R3_4"],
                 vals["P4"] / 2)
    report = OrbitReport(flag,
                         all(c == 0 for c in w1_coeffs),
                         all(c == 0 for c in w3_coeffs))
    return flag, report


def orbit_congruences(model: StructureModel):
    """Model-derived congruences (dw1 mod w1, dw3 mod w3) next to the displays."""
    got_w1 = model.d_of_name("w1").reduce_mod(["w1"])
    got_w3 = model.d_of_name("w3").reduce_mod(["w3"])
    want_w1 = parse_form_text(ORBIT_CONGRUENCE_W1, model, degree=2)
    want_w3 = parse_form_text(ORBIT_CONGRUENCE_W3, model, degree=2)
    return (got_w1, want_w1), (got_w3, want_w3)
