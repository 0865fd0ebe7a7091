import random
from fractions import Fraction

import pytest

from eds.analysis import (InputError, dphi_pair_difference, dpi_pair_difference,
                          orbit_criterion, orbit_congruences, typeb_extract, typeb_pipeline)
from eds.catalog import ORBIT_FUNCTIONS, ZETA_TEXT, builtin, typeb_stage
from eds.dsl import parse_form_text
from eds.forms import StructuralError


def test_raw_model_closure_is_obstructed():
    # before any relations are imposed, the closure identities do not vanish
    m = builtin("typeB1")
    outs = m.verify_closure()
    assert any(not o.ok for o in outs)


def test_plain_recipes_zero_after_relation_block():
    m1 = typeb_stage(1)
    residue = typeb_extract(m1).nonzero()
    assert residue.equations == []


def test_plain_recipes_nonempty_before_block():
    m0 = builtin("typeB1")
    cs = typeb_extract(m0).nonzero()
    assert cs.equations
    # the extraction is stable under recipe order permutation
    from eds.analysis import PLAIN_RECIPES
    cs2 = typeb_extract(m0, tuple(reversed(PLAIN_RECIPES))).nonzero()
    assert cs.texts() == cs2.texts()


def test_plain_recipe_rejects_surviving_opaque():
    m1 = typeb_stage(1)
    with pytest.raises(StructuralError):
        typeb_extract(m1, (("w0", ("w1",)),))


def test_dphi_pair_difference_forces_c4():
    m1 = typeb_stage(1)
    diff = dphi_pair_difference(m1)
    expected = parse_form_text("4*C4*w1/\\w4", m1, degree=2)
    assert diff == expected


def test_dphi_indexed_pairs_reproduce_relations():
    m2 = typeb_stage(2)
    r = m2.ring
    d14 = dphi_pair_difference(m2, 1, 4)
    assert d14.coefficient(["w2", "w3"]) == 4 * r.var("C2")
    assert len(d14.terms) == 1
    d24 = dphi_pair_difference(m2, 2, 4)
    assert d24.coefficient(["w1", "w3"]) == 4 * (r.var("C1") + r.var("C3"))
    assert len(d24.terms) == 1
    d34 = dphi_pair_difference(m2, 3, 4)
    assert d34.coefficient(["w1", "w2"]) == \
        2 * r.var("C2") + 4 * r.var("K") + r.var("P2") - r.var("P4")
    assert len(d34.terms) == 1
    # with C2 = 0 the third coefficient is exactly 4*(K - (P4 - P2)/4)
    relations = {"C2": r.zero, "C3": -r.var("C1"),
                 "K": (r.var("P4") - r.var("P2")) / 4}
    for (i, j) in ((1, 2), (1, 3), (1, 4), (2, 4), (3, 4)):
        diff = dphi_pair_difference(m2, i, j)
        for c in diff.terms.values():
            assert c.substitute(relations, r).is_zero()


def test_dpi_pair_difference_is_zeta():
    m3 = typeb_stage(3)
    diff = dpi_pair_difference(m3)
    zeta = parse_form_text(ZETA_TEXT, m3, degree=2)
    assert diff == zeta
    # forcing zeta = 0 means P0 = 0 and C1*(P2 - P4) = 0
    r = m3.ring
    c23 = diff.coefficient(["w2", "w3"])
    c34 = diff.coefficient(["w3", "w4"])
    assert (c23 + c34) / 4 == r.var("P0")
    assert (c34 - c23) / 8 == r.var("C1") * (r.var("P4") - r.var("P2")) / 4


def test_typeb_pipeline_report():
    report = typeb_pipeline()
    assert report.ok
    names = [o.name for o in report.outcomes]
    assert "plain-reductions-after-relation-block" in names
    assert "dphi-pair-difference-is-4C4-w1w4" in names
    assert "dpi-pair-difference-is-zeta" in names


def test_stage4_congruences_match_displays():
    m4 = typeb_stage(4)
    (got1, want1), (got3, want3) = orbit_congruences(m4)
    assert got1 == want1
    assert got3 == want3


def test_orbit_criterion_examples():
    zero = {n: 0 for n in ORBIT_FUNCTIONS}
    flag, report = orbit_criterion(zero)
    assert flag and report.agreement
    assert report.w1_congruence_zero and report.w3_congruence_zero

    one = dict(zero, P2=1)
    flag, report = orbit_criterion(one)
    assert not flag and report.agreement
    assert not report.w1_congruence_zero

    t30 = dict(zero, T3_0=1)
    flag, report = orbit_criterion(t30)
    assert not flag and report.agreement
    assert not report.w3_congruence_zero


def test_orbit_criterion_input_checking():
    with pytest.raises(InputError):
        orbit_criterion({"P2": 1})
    bad = {n: 0 for n in ORBIT_FUNCTIONS}
    bad["bogus"] = 1
    with pytest.raises(InputError):
        orbit_criterion(bad)


def test_orbit_criterion_sign_patterns_sample():
    rng = random.Random(99)
    for _ in range(64):
        pattern = [rng.randint(0, 1) for _ in ORBIT_FUNCTIONS]
        values = {n: bit * Fraction(rng.randint(1, 9), rng.randint(1, 5)) * rng.choice((1, -1))
                  for n, bit in zip(ORBIT_FUNCTIONS, pattern)}
        flag, report = orbit_criterion(values)
        assert flag == (sum(pattern) == 0)
        assert report.agreement
