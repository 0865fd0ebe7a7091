r"""Builtin structure models and the derived-coframing definitions between them.

All builtins are defined as ``.eds`` sources and constructed through the
parser, so the catalog itself exercises the model-file dialect and printing
round-trips are stable by construction.

Catalog:

* ``typeA1``       7-dim rigid model: coframe (w0, wb0, g, w1..w4), declared
                   function symbols H1..H4, parameter eps in {1, -1}.
* ``sigma``        5-form homogeneous coframing with eps-only coefficients.
* ``tau``          5-form coframing with function symbols R, S.
* ``chartGoursat`` exact rational chart (x, y, u, v, s); exponentials are
                   eliminated through the substitutions u = e^f, v = e^h and
                   the chart is used on the sheet x > y, u, v > 0.
* ``typeB1``       7 coframe + 4 connection names with symbolic torsion, the
                   input to the constraint-extraction pipeline.
"""

from __future__ import annotations

from fractions import Fraction

from .dsl import build_model, parse, parse_form_text, parse_scalar_text
from .models import ModelError, StructureModel

TYPE_A1_SRC = r"""
model typeA1 {
  param eps in {1, -1};
  vars H1 > 0, H2 != 0, H3, H4;
  coframe w0, wb0, g, w1, w2, w3, w4;

  d w0 = (1/2 - eps*H2/(2*H1^2))*w0/\wb0
       + (3*eps*H4 - H3 + 1)*w0/\g
       + H1*w1/\w2
       - (1/2)*(H2*(eps*H4 - 3*H3 - 3) - 3*eps*H4 + H3 - 3)*w0/\w2
       + w3/\w4 + w3/\g
       - (1/2)*(H3 - 3*eps*H4 + 1 + H1^2*(eps*H3 - 3*H4 - 3*eps)/H2)*w0/\w4;

  d wb0 = (3*eps*H4 - H3 + 3)*wb0/\w2 + (3*eps*H4 - H3 + 3)*wb0/\g
        + (eps*H4 + H3 + 1)*wb0/\w4
        + w1/\w2 + w1/\g
        + eps*H1*w3/\w4;

  d g = (H3/H1)*g/\w0 + (H2/H1)*w2/\w0 - (1/H1)*w4/\w0
      + (H2*H4/H1^2)*g/\wb0 - (eps*H2/H1^2)*w2/\wb0 + w4/\wb0
      + (3/4 + eps*H2/(4*H1^2))*w1/\g
      + (3*eps*H4 - H3 + 3)*(eps*H4 + 1)*w2/\g
      - ((3*H2 + 1)/(4*H1))*w3/\g
      + (eps*H4 - 3*H3 - 3)*(H3 + 1)*w4/\g;

  d w1 = (3*H4^2 - 3*H3^2 + 8*eps*H4 - 6*H3 + 1)*w1/\g
       + ((H3 + 1)/H1)*w0/\w1
       + (3*H4^2 - eps*H3*H4 + 7*eps*H4 + 4)*w1/\w2
       + (H2*(H4 + eps)/H1^2)*wb0/\w1
       - (3*H3^2 - eps*H3*H4 + 5*H3 - 2*eps*H4 + 2)*w1/\w4
       - ((3*H2 + 1)/(4*H1))*w1/\w3;

  d w2 = - (1/H1)*w0/\w4 - (1/H1)*w0/\g
       + ((H2 - H3 - 1)/H1)*w0/\w2
       - (H2*(H4 + eps)/H1^2)*wb0/\w2
       + (3/4 + eps*H2/(4*H1^2))*w1/\w2
       + (3*H3^2 - 3*H4^2 + 7*H3 - 7*eps*H4)*w2/\g
       + ((3*H2 + 1)/(4*H1))*w2/\w3
       - (eps*H4 - 3*H3 - 3)*(H3 + 1)*w2/\w4;

  d w3 = ((1 + H2 + 2*H3)/(2*H1))*w0/\w3
       + (H2*H4/H1^2 + 3*eps*H2/(2*H1^2) - 1/2)*wb0/\w3
       - (3/4 + eps*H2/(4*H1^2))*w1/\w3
       + (3*H4^2 + 8*eps*H4 - 3*H3^2 - 6*H3 + 3)*w3/\g
       + (1/2)*(eps*H4*(H2 + 2*H3 - 6*eps*H4 - 15) - 3*H2*H3 - 3*H2 + 3*H3 - 9)*w2/\w3
       - (1/2)*(H1^2*(eps*H3 - 3*H4 - 3*eps)/H2 + (3*H3 - eps*H4 + 3)*(2*H3 + 1))*w3/\w4;

  d w4 = - ((H3 + 1)/H1)*w0/\w4
       - (eps*H2/H1^2)*wb0/\w2 - (eps*H2/H1^2)*wb0/\g
       + (1 - H2*(H4 + eps)/H1^2)*wb0/\w4
       + (3/4 + eps*H2/(4*H1^2))*w1/\w4
       + (H4 + eps)*(3*H4 - eps*H3 + 3*eps)*w2/\w4
       - ((3*H2 + 1)/(4*H1))*w3/\w4
       + (3*H3^2 - 3*H4^2 + 7*H3 - 7*eps*H4)*w4/\g;

  d H1 = - (1/2)*(H2 - 1)*w0
       - (1/2)*(H1 - eps*H2/H1)*wb0
       + 2*H1*(H3 - eps*H4)*g
       - (H1/2)*(eps*H2*H4 + 3*eps*H4 - 3*H2*H3 - 3*H2 - H3 + 3)*w2
       - (H1/2)*(H1^2*(3*H4 + 3*eps - eps*H3)/H2 + eps*H4 - 3*H3 - 3)*w4;

  d H2 = (H2*(1 - H2)/H1)*w0
       + 4*H2*(H3 + 1)*w4 + 4*H2*(H3 + 1)*g
       - H2*(eps*H2*H4 - eps*H4 - 3*H2*H3 - 3*H2 - H3 - 1)*w2;

  d H3 = (H3*(H3 + 1)/H1)*w0
       + (H2*(H3 + 1)*(H4 + eps)/H1^2)*wb0
       - (6*eps*H4 - 3*H3^2 + 3*H4^2 - 4*H3 + 3)*(H3 + 1)*g
       - (H3 + 1)*(3/4 + eps*H2/(4*H1^2))*w1
       + ((3*H2*H3 + 4*H2 + H3)/(4*H1))*w3
       - (H3 + 1)*(3*H4 - eps*H3 + 3*eps)*(H4 + eps)*w2
       - H3*(H3 + 1)*(eps*H4 - 3*H3 - 3)*w4;

  d H4 = ((H3 + 1)*(H4 + eps)/H1)*w0
       + (H2*H4*(H4 + eps)/H1^2)*wb0
       - (4*eps*H4 - 3*H3^2 + 3*H4^2 - 6*H3 - 3)*(H4 + eps)*g
       - (3*H4/4 + eps*H2*H4/(4*H1^2) + eps)*w1
       - H4*(3*eps*H4 - H3 + 3)*(eps*H4 + 1)*w2
       + ((H4 + eps)*(3*H2 + 1)/(4*H1))*w3
       - (H3 + 1)*(H4 + eps)*(eps*H4 - 3*H3 - 3)*w4;
}
"""

SIGMA_SRC = r"""
model sigma {
  param eps in {1, -1};
  coframe s0, s1, s2, s3, s4;
  d s0 = - eps*s0/\s2 + eps*s0/\s4 + s1/\s2 + s3/\s4;
  d s1 = eps*s1/\s2 + eps*s1/\s3 + eps*s1/\s4;
  d s2 = s0/\s2 - s0/\s4 - eps*s1/\s2 - eps*s2/\s3;
  d s3 = eps*s1/\s3 + eps*s2/\s3 - eps*s3/\s4;
  d s4 = - s0/\s2 + s0/\s4 - eps*s1/\s4 + eps*s3/\s4;
}
"""

TAU_SRC = r"""
model tau {
  vars R != 0, S != 0;
  coframe t0, t1, t2, t3, t4;
  d t0 = - (S/R)*t0/\t1 + (1/S)*t0/\t2 + S*t0/\t3 + t0/\t4 + t1/\t2 + R*t3/\t4;
  d t1 = t1/\t2 + t1/\t3 + t1/\t4;
  d t2 = - ((R + S)/R)*t1/\t2 - t2/\t3 - S*t3/\t4;
  d t3 = t1/\t3 + t2/\t3 - t3/\t4;
  d t4 = (S/R)*t1/\t2 - t1/\t4 + (S + 1)*t3/\t4;
  d R = - (R*(S + 1)/S)*t2 - (R*(R + S)/S)*t4;
  d S = - ((R + S)*S/R)*t1 - (S + 1)*t2 + S*(S + 1)*t3;
}
"""

CHART_GOURSAT_SRC = r"""
model chartGoursat {
  vars x, y, u > 0, v > 0, s;
  coframe dx, dy, du, dv, ds;
  d dx = 0;
  d dy = 0;
  d du = 0;
  d dv = 0;
  d ds = 0;
  d x = dx;
  d y = dy;
  d u = du;
  d v = dv;
  d s = ds;
}
"""

TYPE_B1_SRC = r"""
model typeB1 {
  vars C1, C2, C3, C4, P0, K,
       P1, P2, P3, P4, Q1, Q2, Q3, Q4, S1, S2, S3, S4,
       T1_0, T2_0, T3_0,
       T1_1, T1_2, Tb1_1, Tb1_2, R1_1, R1_2,
       T2_2, Tb2_2, R2_2,
       T3_3, T3_4, Tb3_3, Tb3_4, R3_3, R3_4,
       T4_4, Tb4_4, R4_4,
       T1_12, T1_13, T1_14, T3_13, T3_23, T3_34;
  coframe w0, wb0, g, w1, w2, w3, w4;
  connection phi, pi, alpha, beta;

  d w0 = - phi/\w0
       + w1/\w2 + w3/\w4 + w3/\g
       + P0*wb0/\w0 + K*g/\w0
       + P1*w1/\w0 + P2*w2/\w0 + P3*w3/\w0 + P4*w4/\w0;

  d wb0 = - phi/\wb0
        + w1/\w2 + w1/\g + w3/\w4
        + P0*w0/\wb0 - K*g/\wb0
        + Q1*w1/\wb0 + Q2*w2/\wb0 + Q3*w3/\wb0 + Q4*w4/\wb0;

  d g = - pi/\w0 + pi/\wb0 - phi/\g
      + w1/\w2 - w3/\w4
      + C1*w1/\w0 + C2*w2/\w0 + C3*w3/\w0 + C4*w4/\w0
      + C1*w1/\wb0 + C2*w2/\wb0 + C3*w3/\wb0 + C4*w4/\wb0;

  d w1 = T1_0*w0/\wb0
       + T1_1*w0/\w1 + T1_2*w0/\w2 + T1_2*w0/\g
       + Tb1_1*wb0/\w1 + Tb1_2*wb0/\w2
       + R1_1*g/\w1 + R1_2*g/\w2
       + S1*w3/\g + S1*w3/\w2 + S1*w3/\w4
       + T1_12*w1/\w2 + T1_13*w1/\w3 + T1_14*w1/\w4;

  d w2 = pi/\w0 - alpha/\w1 - phi/\w2
       + T2_0*w0/\wb0
       + C3*w0/\w3 + C4*w0/\w4 + T2_2*w0/\w2 + T2_2*w0/\g
       + Tb2_2*wb0/\w2
       + C2*g/\w0 + R2_2*g/\w2
       + S2*w3/\g + S2*w3/\w2 + S2*w3/\w4;

  d w3 = T3_0*wb0/\w0
       + Tb3_3*wb0/\w3 + Tb3_4*wb0/\w4 + Tb3_4*wb0/\g
       + T3_3*w0/\w3 + T3_4*w0/\w4
       + R3_3*g/\w3 + R3_4*g/\w4
       + S3*w1/\g + S3*w1/\w2 + S3*w1/\w4
       + T3_13*w1/\w3 + T3_23*w2/\w3 + T3_34*w3/\w4;

  d w4 = - pi/\wb0 - beta/\w3 - phi/\w4
       - T2_0*wb0/\w0
       + C1*wb0/\w1 + C2*wb0/\w2 + Tb4_4*wb0/\w4 + Tb4_4*wb0/\g
       + T4_4*w0/\w4
       + C4*g/\wb0 + R4_4*g/\w4
       + S4*w1/\g + S4*w1/\w2 + S4*w1/\w4;
}
"""

_SOURCES = {
    "typeA1": TYPE_A1_SRC,
    "sigma": SIGMA_SRC,
    "tau": TAU_SRC,
    "chartGoursat": CHART_GOURSAT_SRC,
    "typeB1": TYPE_B1_SRC,
}

_ALIASES = {"type_a1": "typeA1", "type_b1": "typeB1", "chart_goursat": "chartGoursat"}

_PARAMETRIC = {"typeA1", "sigma"}

_cache: dict = {}


def canonical_name(name: str) -> str:
    key = name.replace("-", "_")
    if key in _SOURCES:
        return key
    lowered = key.lower()
    for canon in _SOURCES:
        if lowered == canon.lower():
            return canon
    if lowered in _ALIASES:
        return _ALIASES[lowered]
    raise ModelError(f"unknown builtin model {name!r}")


def builtin_names() -> tuple:
    return tuple(_SOURCES)


def builtin(name: str, eps: int | None = None) -> StructureModel:
    """Construct (and cache) a builtin model, binding eps where applicable."""
    canon = canonical_name(name)
    if canon in _PARAMETRIC:
        if eps not in (1, -1):
            raise ModelError(f"builtin {canon!r} requires eps in {{1, -1}}")
        key = (canon, eps)
        params = {"eps": eps}
    else:
        if eps is not None:
            raise ModelError(f"builtin {canon!r} takes no eps parameter")
        key = (canon, None)
        params = None
    model = _cache.get(key)
    if model is None:
        model = build_model(parse(_SOURCES[canon]), params)
        _cache[key] = model
    return model


# ---------------------------------------------------------------------------
# cohomogeneity-2 sub-models and their adapted coframings

def submodel_first_branch(eps: int) -> StructureModel:
    """typeA1 restricted by H2 = 1, H3 = -1 (consistency-checked)."""
    m = builtin("typeA1", eps)
    return m.derive_submodel({"H2": 1, "H3": -1})


def submodel_second_branch(eps: int) -> StructureModel:
    """typeA1 restricted by H2 = eps*H1^2, H4 = -eps."""
    m = builtin("typeA1", eps)
    return m.derive_submodel({
        "H2": parse_scalar_text("eps*H1^2", m.ring),
        "H4": parse_scalar_text("-eps", m.ring),
    })


def _forms(model: StructureModel, defs: dict) -> dict:
    return {k: parse_form_text(v, model, degree=1) for k, v in defs.items()}


def sigma_definitions(sub: StructureModel) -> dict:
    """The adapted 5-coframing on the first branch (needs H4 != 0)."""
    return _forms(sub, {
        "s0": "(1/H1)*w0",
        "s1": "(1/H4)*w1",
        "s2": "H4*w2",
        "s3": "(1/(H1*H4))*w3",
        "s4": "H4*w4 + H4*g",
    })


def tau_definitions(sub: StructureModel):
    """The companion 5-coframing plus its scalar definitions R, S."""
    form_defs = _forms(sub, {
        "t0": "wb0",
        "t1": "(eps/H4)*w1",
        "t2": "eps*H4*w2 + eps*H4*g - (eps*H4/((3*H4 + 4*eps)*H1^2))*wb0",
        "t3": "(eps/(H1*H4))*w3",
        "t4": "eps*H4*w4 + (eps*H4/((3*H4 + 4*eps)*H1^2))*wb0",
    })
    scalar_defs = {
        "R": parse_scalar_text("eps*H1^2", sub.ring),
        "S": parse_scalar_text("H4/(3*H4 + 4*eps)", sub.ring),
    }
    return form_defs, scalar_defs


def goursat_sigma_definitions(chart: StructureModel) -> dict:
    """The rational chart realization of the sigma coframing (eps = +1)."""
    return _forms(chart, {
        "s0": "(1/(2*v))*dv + (u/2)*dx - (1/(2*u*(x - y)^2))*dy - (v/2)*ds",
        "s1": "u*dx",
        "s2": "- (1/(2*u))*du - (1/(x - y) + u/2)*dx - (1/(2*u*(x - y)^2))*dy + (v/2)*ds",
        "s3": "(1/(u*(x - y)^2))*dy",
        "s4": "- (1/(2*u))*du - (1/(x - y) + u/2)*dx - (1/(2*u*(x - y)^2))*dy - (v/2)*ds",
    })


def goursat_contact_functions(chart: StructureModel) -> dict:
    """z, p, q realizing the graph coordinates on the chart."""
    return {
        "z": parse_scalar_text("s + 1/v", chart.ring),
        "p": parse_scalar_text("u/v", chart.ring),
        "q": parse_scalar_text("-1/(u*v*(x - y)^2)", chart.ring),
    }


def discrete_symmetry_definitions(model: StructureModel):
    """The order-2 substitution that exchanges the two underlying systems."""
    form_defs = _forms(model, {
        "w0": "(eps*H2/H1)*wb0",
        "wb0": "(H2/H1)*w0",
        "g": "- g",
        "w1": "- (H2/H1)*w3",
        "w2": "- w4",
        "w3": "- (eps*H2/H1)*w1",
        "w4": "- w2",
    })
    scalar_defs = {
        "H1": parse_scalar_text("H1", model.ring),
        "H2": parse_scalar_text("eps*H1^2/H2", model.ring),
        "H3": parse_scalar_text("eps*H4", model.ring),
        "H4": parse_scalar_text("eps*H3", model.ring),
    }
    return form_defs, scalar_defs


def discrete_symmetry_point(eps: int, H) -> tuple:
    """Image of an H-tuple under the discrete symmetry substitution."""
    H1, H2, H3, H4 = (Fraction(h) for h in H)
    return (H1, Fraction(eps) * H1 ** 2 / H2, Fraction(eps) * H4, Fraction(eps) * H3)


def sigma_swap_definitions(model: StructureModel) -> dict:
    """Renaming that exchanges the two characteristic pairs of the sigma model
    (and with it the sign of eps in the structure equations)."""
    return _forms(model, {"s0": "s0", "s1": "s3", "s3": "s1", "s2": "s4", "s4": "s2"})


# ---------------------------------------------------------------------------
# torsion-normalization stages of the typeB1 pipeline

RELATION_BLOCK = {
    "T2_2": "P0 - T1_1 + C2",
    "T4_4": "P0 - T3_3",
    "Tb2_2": "P0 - Tb1_1",
    "Tb4_4": "P0 - Tb3_3 + C4",
    "T1_12": "-2*K - P2 - C4 + P4/2",
    "T3_34": "2*K - P4 + C2 + P2/2",
    "T1_13": "-C3 - C1 - (P1 + P3 + 1)/2",
    "T3_13": "-C1 - C3 + (P1 + P3 + 1)/2",
    "T1_14": "-C4 - P4/2",
    "T3_23": "-C2 + P2/2",
    "Q1": "P1 + 1",
    "Q2": "P2",
    "Q3": "P3 + 1",
    "Q4": "P4",
    "S1": "C2 + P2/2",
    "S2": "-C1 - P1/2",
    "S3": "-C4 + P4/2",
    "S4": "C3 - (P3 + 1)/2",
    "R2_2": "K + C4 - R1_1 - P4/2",
    "R4_4": "-K - C2 - R3_3 - P2/2",
}

_STAGE_BINDINGS = (
    RELATION_BLOCK,
    {"C4": "0"},
    {"C2": "0", "C3": "-C1", "K": "(P4 - P2)/4"},
    {"P0": "0"},
)


def typeb_stage(stage: int) -> StructureModel:
    """typeB1 with the first ``stage`` groups of torsion relations bound.

    Stage 0 is the raw model; 1 applies the twenty-relation block; 2 kills the
    coefficient forced by the first paired extraction; 3 binds the relations
    from the remaining pairs; 4 removes the last function forced by the
    final pair.
    """
    if not 0 <= stage <= 4:
        raise ModelError("stage must be between 0 and 4")
    key = ("typeB1-stage", stage)
    model = _cache.get(key)
    if model is not None:
        return model
    model = builtin("typeB1")
    for i in range(stage):
        bindings = {k: parse_scalar_text(v, model.ring)
                    for k, v in _STAGE_BINDINGS[i].items()}
        model = model.derive_submodel(bindings, name=f"typeB1.stage{i + 1}")
    _cache[key] = model
    return model


ORBIT_FUNCTIONS = ("P2", "P4", "R1_2", "R3_4", "T1_2", "Tb1_2", "T3_4", "Tb3_4", "T1_0", "T3_0")

# the two displayed integrability congruences (dw1 mod w1, dw3 mod w3)
ORBIT_CONGRUENCE_W1 = (
    "T1_0*w0/\\wb0 + T1_2*w0/\\g + T1_2*w0/\\w2 + Tb1_2*wb0/\\w2"
    " + R1_2*g/\\w2 - (P2/2)*g/\\w3 + (P2/2)*w3/\\w2 + (P2/2)*w3/\\w4"
)
ORBIT_CONGRUENCE_W3 = (
    "T3_0*wb0/\\w0 + Tb3_4*wb0/\\g + Tb3_4*wb0/\\w4 + T3_4*w0/\\w4"
    " + R3_4*g/\\w4 - (P4/2)*g/\\w1 + (P4/2)*w1/\\w2 + (P4/2)*w1/\\w4"
)

# displayed difference of the two paired extractions of the gamma-row symbol
ZETA_TEXT = (
    "(2*P0 + C1*(P2 - P4))*w2/\\w3 + (2*P0 - C1*(P2 - P4))*w3/\\w4"
)
