"""Structure models: coframings with declared exterior-derivative rules.

A model couples a scalar ring, a 1-form basis and a d-rule for every coframe
name.  Ring variables are function symbols: either with a declared
differential (a degree-1 form), or free, in which case differentiation uses
auto-generated covariant-derivative variables named ``<f>_<basisname>``.
Connection names carry opaque differentials ``d<name>``.

The exterior derivative is the unique antiderivation extending the d-rules
and the chain rule on scalar coefficients; ``d_squared`` expands d(d(name))
exactly, which is the engine behind every closure verdict here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .forms import Basis, Form, FormError
from .ring import PoleError, Ring, RingError, Scalar


class ModelError(Exception):
    """Usage error against a structure model."""


class ConsistencyError(ModelError):
    """A binding contradicts the model's own derivative rules."""

    def __init__(self, residuals):
        self.residuals = residuals
        lines = ", ".join(f"d({n}) residual: {t}" for n, t in residuals)
        super().__init__(f"inconsistent binding; {lines}")


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    differential: Form | None = None  # None marks a free symbol

    @property
    def free(self) -> bool:
        return self.differential is None


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    ok: bool
    residual_terms: int
    residual: str

    def as_json(self) -> dict:
        return {
            "identity": self.name,
            "status": "zero" if self.ok else "nonzero",
            "residual_terms": self.residual_terms,
            "residual": self.residual,
        }


def _outcome(name: str, residual: Form) -> CheckOutcome:
    n = len(residual.terms) + len(residual.opaque)
    return CheckOutcome(name, residual.is_zero(), n, residual.text())


def covariant_name(func: str, oneform: str) -> str:
    return f"{func}_{oneform}"


class StructureModel:
    """Immutable coframing + d-rules + function-symbol table."""

    def __init__(self, name: str, ring: Ring, basis: Basis,
                 drules: Mapping[str, Form],
                 functions: Mapping[str, FunctionSymbol],
                 constraints=(), chart: bool = False):
        self.name = name
        self.ring = ring
        self.basis = basis
        self.drules = dict(drules)
        self.functions = dict(functions)
        self.constraints = tuple(constraints)
        self.chart = chart
        for cf in basis.coframe:
            if cf not in self.drules:
                raise ModelError(f"missing d-rule for coframe name {cf!r}")
        self._d_var: dict[str, Form] = {}
        self._d_basis: dict[str, Form] = {}
        self._d2: dict[str, Form] = {}

    def __repr__(self):
        return f"StructureModel({self.name!r})"

    # -- differentials ----------------------------------------------------

    def _differential_of_variable(self, name: str) -> Form:
        f = self._d_var.get(name)
        if f is not None:
            return f
        sym = self.functions.get(name)
        if sym is None:
            raise ModelError(f"no differential declared for variable {name!r}")
        if sym.free:
            terms = {}
            for i, b in enumerate(self.basis.oneforms):
                terms[(i,)] = self.ring.var(covariant_name(name, b))
            f = Form(self.basis, self.ring, 1, terms)
        else:
            f = sym.differential
        self._d_var[name] = f
        return f

    def _differential_of_basis(self, name: str) -> Form:
        f = self._d_basis.get(name)
        if f is not None:
            return f
        if name in self.drules:
            f = self.drules[name]
        elif name in self.basis.connection:
            f = Form.opaque_twoform(self.basis, self.ring, "d" + name)
        else:
            raise ModelError(f"no d-rule for {name!r}")
        self._d_basis[name] = f
        return f

    def d_scalar(self, c: Scalar) -> Form:
        """Chain rule: sum of partials times declared (or free) differentials."""
        out = Form.zero(self.basis, self.ring, 1)
        for v in c.used_variables():
            dc = c.partial(v)
            if dc.is_zero():
                continue
            out = out + self._differential_of_variable(v).scale(dc)
        return out

    def d(self, f) -> Form:
        """Exterior derivative of a scalar (degree 0) or a form."""
        if isinstance(f, Scalar):
            return self.d_scalar(f)
        if not isinstance(f, Form):
            raise ModelError(f"cannot differentiate {type(f).__name__}")
        if f.opaque:
            raise ModelError("cannot differentiate a form with opaque terms")
        out = Form.zero(self.basis, self.ring, f.degree + 1)
        for mi, c in f.terms.items():
            base = Form(self.basis, self.ring, f.degree, {mi: self.ring.one})
            out = out + self.d_scalar(c).wedge(base)
            # antiderivation: d(e_1^...^e_k) = sum_k (-1)^(k-1) e_1^..^de_k^..
            for k, i in enumerate(mi):
                prefix = Form(self.basis, self.ring, k,
                              {mi[:k]: self.ring.one}) if k else Form(self.basis, self.ring, 0, {(): self.ring.one})
                suffix_idx = mi[k + 1:]
                suffix = Form(self.basis, self.ring, len(suffix_idx), {suffix_idx: self.ring.one})
                middle = self._differential_of_basis(self.basis.oneforms[i])
                piece = prefix.wedge(middle).wedge(suffix)
                out = out + piece.scale(c if k % 2 == 0 else -c)
        return out

    def d_of_name(self, name: str) -> Form:
        """d of a basis 1-form or of a function symbol."""
        if name in self.basis._index:
            return self._differential_of_basis(name)
        if name in self.functions:
            return self._differential_of_variable(name)
        raise ModelError(f"unknown name {name!r}")

    def d_squared(self, name: str) -> Form:
        f = self._d2.get(name)
        if f is None:
            f = self.d(self.d_of_name(name))
            self._d2[name] = f
        return f

    # -- verification -------------------------------------------------------

    def closure_names(self) -> list:
        names = list(self.basis.coframe)
        names.extend(n for n, s in self.functions.items() if not s.free)
        return names

    def verify_closure(self) -> list:
        """d(d(name)) for every coframe name and declared function symbol."""
        return [_outcome(f"d2({n})", self.d_squared(n)) for n in self.closure_names()]

    # -- submodels ------------------------------------------------------------

    def derive_submodel(self, bindings: Mapping[str, object], name: str | None = None) -> "StructureModel":
        """Substitute function symbols and check the bindings are consistent.

        For a bound symbol with a declared differential, d of the binding must
        reproduce the declared rule after substitution; a nonzero residual
        raises :class:`ConsistencyError`.  Free symbols are eliminated without
        a check (their covariant-derivative variables disappear with them).
        """
        for n in bindings:
            if n not in self.functions:
                raise ModelError(f"cannot bind {n!r}: not a function symbol")
        removed = set(bindings)
        for n in bindings:
            if self.functions[n].free:
                removed.update(covariant_name(n, b) for b in self.basis.oneforms)
        new_vars = [v for v in self.ring.variables if v not in removed]
        new_ring = Ring(new_vars, self.ring.parameters)

        exprs: dict[str, Scalar] = {}
        for n, e in bindings.items():
            if isinstance(e, Scalar):
                exprs[n] = e.substitute({}, new_ring) if e.ring is not new_ring else e
            else:
                exprs[n] = new_ring.const(Fraction(e))

        def migrate(c: Scalar) -> Scalar:
            return c.substitute(exprs, new_ring)

        def migrate_form(f: Form) -> Form:
            terms = {}
            for mi, c in f.terms.items():
                cc = migrate(c)
                if not cc.is_zero():
                    terms[mi] = cc
            opaque = {}
            for k, c in f.opaque.items():
                cc = migrate(c)
                if not cc.is_zero():
                    opaque[k] = cc
            return Form(self.basis, new_ring, f.degree, terms, opaque)

        drules = {n: migrate_form(f) for n, f in self.drules.items()}
        functions = {}
        for n, sym in self.functions.items():
            if n in bindings:
                continue
            functions[n] = FunctionSymbol(n, None if sym.free else migrate_form(sym.differential))
        constraints = []
        for c, rel in self.constraints:
            cc = migrate(c)
            if cc.is_constant():
                val = cc.as_fraction()
                if (rel == "!=0" and val == 0) or (rel == ">0" and val <= 0):
                    raise ModelError(f"binding violates domain constraint {c.text()} {rel}")
                continue
            constraints.append((cc, rel))

        label = name or (self.name + "[" + ",".join(
            f"{n}={exprs[n].text()}" for n in sorted(bindings)) + "]")
        sub = StructureModel(label, new_ring, self.basis, drules, functions,
                             constraints, chart=self.chart)

        residuals = []
        for n in sorted(bindings):
            sym = self.functions[n]
            if sym.free:
                continue
            declared = migrate_form(sym.differential)
            chained = sub.d(exprs[n])
            residual = declared - chained
            if not residual.is_zero():
                residuals.append((n, residual.text()))
        if residuals:
            raise ConsistencyError(residuals)
        return sub

    # -- structural comparison -------------------------------------------------

    def structurally_equal(self, other: "StructureModel") -> bool:
        if not isinstance(other, StructureModel):
            return False
        if (self.basis.oneforms != other.basis.oneforms
                or self.basis.n_coframe != other.basis.n_coframe
                or self.ring.variables != other.ring.variables
                or self.ring.parameters != other.ring.parameters
                or self.chart != other.chart):
            return False
        if sorted((c.text(), rel) for c, rel in self.constraints) != \
           sorted((c.text(), rel) for c, rel in other.constraints):
            return False
        if set(self.drules) != set(other.drules):
            return False
        for n, f in self.drules.items():
            if f.text() != other.drules[n].text():
                return False
        if list(self.functions) != list(other.functions):
            return False
        for n, s in self.functions.items():
            o = other.functions[n]
            if s.free != o.free:
                return False
            if not s.free and s.differential.text() != o.differential.text():
                return False
        return True


def map_form_to_base(target_form: Form, form_defs: Mapping[str, Form],
                     scalar_defs: Mapping[str, Scalar], base: StructureModel) -> Form:
    """Push a form over the target basis down to the base model by replacing
    every target basis name with its defining form and every target ring
    variable with its defining scalar."""
    if target_form.opaque:
        raise ModelError("cannot map a form with opaque terms")
    degree = target_form.degree
    out = Form.zero(base.basis, base.ring, degree)
    for mi, c in target_form.terms.items():
        coeff = c.substitute(scalar_defs, base.ring)
        if coeff.is_zero():
            continue
        prod = Form(base.basis, base.ring, 0, {(): base.ring.one})
        for i in mi:
            name = target_form.basis.oneforms[i]
            if name not in form_defs:
                raise ModelError(f"no definition supplied for target 1-form {name!r}")
            prod = prod.wedge(form_defs[name])
            if prod.is_zero():
                break
        out = out + prod.scale(coeff)
    return out


def verify_derived_coframing(base: StructureModel, form_defs: Mapping[str, Form],
                             target: StructureModel,
                             scalar_defs: Mapping[str, Scalar] | None = None) -> list:
    """Check that defined 1-forms over ``base`` satisfy ``target``'s equations.

    For each target coframe name, compares d(definition) computed in the base
    model against the target d-rule with basis names and ring variables
    replaced by their definitions.  Target function symbols with declared
    differentials and an entry in ``scalar_defs`` are checked the same way.
    """
    scalar_defs = dict(scalar_defs or {})
    outcomes = []
    for n in target.basis.coframe:
        lhs = base.d(form_defs[n])
        rhs = map_form_to_base(target.drules[n], form_defs, scalar_defs, base)
        outcomes.append(_outcome(f"d({n})", lhs - rhs))
    for n, sym in target.functions.items():
        if sym.free or n not in scalar_defs:
            continue
        lhs = base.d(scalar_defs[n])
        rhs = map_form_to_base(sym.differential, form_defs, scalar_defs, base)
        outcomes.append(_outcome(f"d({n})", lhs - rhs))
    return outcomes
