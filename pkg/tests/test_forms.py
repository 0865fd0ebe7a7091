import random
from fractions import Fraction

import pytest

from eds.forms import Basis, Form, FormError, StructuralError, det, isolate_opaque, wedge
from eds.ring import Ring

from test_ring import rand_scalar


@pytest.fixture
def setting():
    ring = Ring(["H1", "H2", "H3", "H4"], {"eps": 1})
    basis = Basis(["w0", "wb0", "g", "w1", "w2", "w3", "w4"])
    return ring, basis


def one(basis, ring, name):
    return Form.basis_oneform(basis, ring, name)


def rand_form(rng, basis, ring, degree, max_terms=3):
    import itertools
    idx = list(itertools.combinations(range(len(basis.oneforms)), degree))
    pool = [ring.one, ring.var(ring.variables[0])] if ring.variables else [ring.one]
    f = Form.zero(basis, ring, degree)
    for _ in range(rng.randint(0, max_terms)):
        mi = idx[rng.randrange(len(idx))]
        c = rand_scalar(rng, ring, denom_pool=pool)
        f = f + Form(basis, ring, degree, {mi: c})
    return f


def test_wedge_basics(setting):
    ring, basis = setting
    w1, w2 = one(basis, ring, "w1"), one(basis, ring, "w2")
    assert w1.wedge(w2).coefficient(["w1", "w2"]) == ring.one
    assert w1.wedge(w1).is_zero()
    assert w2.wedge(w1) == -(w1.wedge(w2))


def test_coefficient_examples(setting):
    ring, basis = setting
    h1 = ring.var("H1")
    f = Form(basis, ring, 2, {(basis.index("w1"), basis.index("w2")): h1})
    assert f.coefficient(["w1", "w2"]) == h1
    assert f.coefficient(["w3", "w4"]).is_zero()
    g = one(basis, ring, "w2").wedge(one(basis, ring, "w1"))
    assert g.coefficient(["w1", "w2"]) == -ring.one


def test_reduce_mod_examples(setting):
    ring, basis = setting
    w0, g_ = one(basis, ring, "w0"), one(basis, ring, "g")
    w1, w2 = one(basis, ring, "w1"), one(basis, ring, "w2")
    f = w0.wedge(g_) + w1.wedge(w2)
    assert f.reduce_mod(["w0"]) == w1.wedge(w2)
    w3, w4 = one(basis, ring, "w3"), one(basis, ring, "w4")
    assert w3.wedge(w4).reduce_mod(["w0", "wb0", "g"]) == w3.wedge(w4)


def test_reduce_mod_drops_opaque_by_companion():
    ring = Ring(["K"])
    basis = Basis(["w0", "w1"], connection=["phi"], opaque_twoforms=["dphi"])
    dphi = Form.opaque_twoform(basis, ring, "phi" and "dphi")
    t = dphi.wedge(Form.basis_oneform(basis, ring, "w0"))
    assert not t.is_zero()
    assert t.reduce_mod(["w0"]).is_zero()


def test_change_basis_telescope(setting):
    ring, basis = setting
    w3, w4, g_ = (one(basis, ring, n) for n in ["w3", "w4", "g"])
    f = w3.wedge(w4 + g_)
    shifted = f.change_basis({"w4": w4 - g_})
    assert shifted == w3.wedge(w4)


def test_change_basis_identity_and_scaling(setting):
    ring, basis = setting
    w0, wb0, g_ = (one(basis, ring, n) for n in ["w0", "wb0", "g"])
    f = w0.wedge(g_)
    assert f.change_basis({}) == f
    c = ring.var("eps") * ring.var("H2") / ring.var("H1")
    got = f.change_basis({"w0": wb0.scale(c)})
    assert got == wb0.wedge(g_).scale(c)


def test_change_basis_rejects_singular(setting):
    ring, basis = setting
    w1 = one(basis, ring, "w1")
    with pytest.raises(FormError):
        w1.change_basis({"w1": Form.zero(basis, ring, 1)})


def test_graded_anticommutativity_random(setting):
    ring, basis = setting
    rng = random.Random(11)
    for _ in range(300):
        da = rng.randint(0, 2)
        db = rng.randint(0, 2)
        a = rand_form(rng, basis, ring, da)
        b = rand_form(rng, basis, ring, db)
        lhs = a.wedge(b)
        rhs = b.wedge(a)
        if (da * db) % 2 == 1:
            rhs = -rhs
        assert lhs == rhs


def test_associativity_random(setting):
    ring, basis = setting
    rng = random.Random(12)
    for _ in range(200):
        a = rand_form(rng, basis, ring, rng.randint(0, 2))
        b = rand_form(rng, basis, ring, rng.randint(0, 2))
        c = rand_form(rng, basis, ring, rng.randint(0, 1))
        assert a.wedge(b).wedge(c) == a.wedge(b.wedge(c))


def test_bilinearity_random(setting):
    ring, basis = setting
    rng = random.Random(13)
    for _ in range(200):
        a = rand_form(rng, basis, ring, 1)
        b = rand_form(rng, basis, ring, 1)
        c = rand_form(rng, basis, ring, 1)
        s = rand_scalar(rng, ring, denom_pool=[ring.one, ring.var("H2")])
        assert (a + b).wedge(c) == a.wedge(c) + b.wedge(c)
        assert a.scale(s).wedge(c) == a.wedge(c).scale(s)


def test_reduce_mod_laws_random(setting):
    ring, basis = setting
    rng = random.Random(14)
    names = list(basis.oneforms)
    for _ in range(200):
        f = rand_form(rng, basis, ring, 2)
        g = rand_form(rng, basis, ring, 1)
        S = set(rng.sample(names, rng.randint(0, 3)))
        assert f.reduce_mod(S).reduce_mod(S) == f.reduce_mod(S)
        lhs = f.wedge(g).reduce_mod(S)
        rhs = f.reduce_mod(S).wedge(g.reduce_mod(S)).reduce_mod(S)
        assert lhs == rhs


def test_change_basis_homomorphism_random(setting):
    ring, basis = setting
    rng = random.Random(15)
    w4, g_ = one(basis, ring, "w4"), one(basis, ring, "g")
    reps = {"w4": w4 + g_, "w0": one(basis, ring, "w0").scale(ring.var("H1"))}
    for _ in range(200):
        a = rand_form(rng, basis, ring, rng.randint(1, 2))
        b = rand_form(rng, basis, ring, 1)
        assert a.wedge(b).change_basis(reps) == a.change_basis(reps).wedge(b.change_basis(reps))
        a2 = rand_form(rng, basis, ring, a.degree)
        assert (a + a2).change_basis(reps) == a.change_basis(reps) + a2.change_basis(reps)


def test_det_small():
    ring = Ring(["x"])
    x = ring.var("x")
    rows = [[ring.one, x], [x, x * x]]
    assert det(rows).is_zero()
    rows = [[ring.one, x], [-x, ring.one]]
    assert det(rows) == ring.one + x * x


def test_det_vs_permutation_expansion():
    import itertools
    ring = Ring(["a", "b", "c", "d"])
    rng = random.Random(5)
    for _ in range(25):
        n = rng.randint(1, 4)
        rows = [[ring.const(rng.randint(-3, 3)) + ring.var(ring.variables[rng.randrange(4)]) * rng.randint(-1, 1)
                 for _ in range(n)] for _ in range(n)]
        expect = ring.zero
        for perm in itertools.permutations(range(n)):
            sign = 1
            for i in range(n):
                for j in range(i + 1, n):
                    if perm[i] > perm[j]:
                        sign = -sign
            t = ring.one
            for i in range(n):
                t = t * rows[i][perm[i]]
            expect = expect + (t if sign > 0 else -t)
        assert det(rows) == expect


def test_isolate_opaque_no_opaque_term(setting):
    ring, basis0 = setting
    basis = Basis(list(basis0.oneforms), connection=["phi"], opaque_twoforms=["dphi"])
    f = Form.zero(basis, ring, 3)
    X = isolate_opaque(f, "dphi", "w0", ["wb0"])
    assert X.is_zero()


def test_isolate_opaque_roundtrip():
    ring = Ring(["K"])
    basis = Basis(["w0", "w1", "w4"], connection=["phi"], opaque_twoforms=["dphi"])
    k = ring.var("K")
    dphi = Form.opaque_twoform(basis, ring, "dphi")
    w0 = Form.basis_oneform(basis, ring, "w0")
    w1 = Form.basis_oneform(basis, ring, "w1")
    w4 = Form.basis_oneform(basis, ring, "w4")
    X_true = w1.wedge(w4).scale(k)
    identity = -(dphi.wedge(w0)) + X_true.wedge(w0)
    X = isolate_opaque(identity, "dphi", "w0", [])
    assert X == X_true


def test_isolate_opaque_wrong_partner():
    ring = Ring(["K"])
    basis = Basis(["w0", "w1", "w4"], connection=["phi"], opaque_twoforms=["dphi"])
    dphi = Form.opaque_twoform(basis, ring, "dphi")
    w1 = Form.basis_oneform(basis, ring, "w1")
    identity = dphi.wedge(w1)
    with pytest.raises(StructuralError):
        isolate_opaque(identity, "dphi", "w0", [])
