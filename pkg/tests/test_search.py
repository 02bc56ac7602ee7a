import random

import pytest
from hypothesis import given, settings, strategies as st

from fpolab.canonical import canonical_form
from fpolab.diagram import diagram, raw_fpo
from fpolab.enumeration import bell, bottleneck, enumerate_fpo_types, full_frame, oneway_l, zz22
from fpolab.errors import BudgetExceeded, ClassMismatchError, FopValidationError, NotEquivalentError, NotMinimalError
from fpolab.poset import Fpo, frame_only, parallel_compose, random_fpo
from fpolab.search import (FopMap, MapClass, classify_map, embeds, find_fop_map, find_nonsurjective_self_map,
                           is_equivalent, is_minimal_representative, iter_fop_maps, minimal_representative,
                           projection_to_minrep, two_parents_violation, validate_fop)

import oracles


def bell_plus(k=1):
    b = bell()
    for i in range(k):
        b = Fpo(b.elements + (f"z{i}",), b.relations, b.inputs, b.outputs)
    return b


def identity(f):
    return FopMap(f, f, {e: e for e in f.elements})


def test_bell_embeds_in_oneway(BELL, ONEWAY_L):
    m = find_fop_map(BELL, ONEWAY_L)
    assert m is not None and m("s") == "X"
    assert find_fop_map(ONEWAY_L, BELL) is None


def test_self_map_exists(BELL):
    m = find_fop_map(BELL, BELL)
    assert m.assignment == {e: e for e in BELL.elements}


def test_class_mismatch(BELL):
    with pytest.raises(ClassMismatchError):
        find_fop_map(BELL, frame_only(1, 1))


def test_classify_identity_is_relabelling(BELL):
    assert classify_map(identity(BELL)).map_class is MapClass.RELABELLING


def test_classify_bell_to_oneway(BELL, ONEWAY_L):
    c = classify_map(find_fop_map(BELL, ONEWAY_L))
    assert c.map_class is MapClass.FOP and c.reason == "not order-reflecting"
    x, y = c.witness
    m = find_fop_map(BELL, ONEWAY_L)
    assert ONEWAY_L.leq(m(x), m(y)) and not BELL.less(x, y)


def test_classify_inclusion_is_foe(BELL):
    big = bell_plus()
    c = classify_map(FopMap(BELL, big, {e: e for e in BELL.elements}))
    assert c.map_class is MapClass.FOE and c.reason == "not surjective"


def test_classify_reports_violation(BELL, ONEWAY_L):
    bad = FopMap(ONEWAY_L, BELL, {e: e for e in ONEWAY_L.elements})
    c = classify_map(bad)
    assert c.map_class is None and c.reason == "not order-preserving" and c.witness == ("X", "B")
    with pytest.raises(FopValidationError):
        validate_fop(bad)
    swapped = FopMap(BELL, BELL, {"X": "Y", "Y": "X", "s": "s", "A": "A", "B": "B"})
    assert classify_map(swapped).reason == "input not preserved"


def test_equivalence_examples(BELL, ONEWAY_L):
    assert is_equivalent(BELL, bell_plus())
    assert not is_equivalent(BELL, ONEWAY_L)
    assert is_equivalent(BELL, BELL)


def test_minimality_examples():
    for f in (frame_only(2, 2, [(0, 0), (1, 1)]), full_frame(2, 3), bottleneck(2, 2), bell()):
        assert is_minimal_representative(f)
        assert is_minimal_representative(f, "idempotent")
    assert not is_minimal_representative(bell_plus())
    assert not is_minimal_representative(bell_plus(), "idempotent")


def test_minimal_representative_examples(BELL):
    r = minimal_representative(bell_plus(3))
    assert canonical_form(r) == canonical_form(BELL)
    assert set(r.elements) <= set(bell_plus(3).elements)
    f = frame_only(2, 2, [(0, 1)])
    assert minimal_representative(f) == f


def test_minrep_of_raw_chain_diagram():
    d = diagram([("a", 1, 1), ("b", 1, 1), ("c", 1, 1)],
                [(("in", 0), ("box", "a", 0)), (("box", "a", 0), ("box", "b", 0)),
                 (("box", "b", 0), ("box", "c", 0)), (("box", "c", 0), ("out", 0))], ["I"], ["O"])
    raw = raw_fpo(d)
    assert len(raw) == 5
    assert canonical_form(minimal_representative(raw)) == canonical_form(frame_only(1, 1, [(0, 0)]))


def test_projection_identity(BELL):
    p = projection_to_minrep(identity(BELL))
    assert p.assignment == identity(BELL).assignment


def test_projection_from_bell_plus(BELL):
    big = bell_plus()
    e = FopMap(BELL, big, {x: x for x in BELL.elements})
    p = projection_to_minrep(e)
    assert p.source == big and p.target == BELL
    assert p.image() == set(BELL.elements)
    assert all(p(e(p(x))) == p(x) for x in big.elements)
    assert classify_map(p).map_class is not None


def test_projection_errors(BELL, ONEWAY_L):
    with pytest.raises(NotMinimalError):
        projection_to_minrep(identity(bell_plus()))
    e = find_fop_map(BELL, ONEWAY_L)
    with pytest.raises(NotEquivalentError):
        projection_to_minrep(e)


def test_budget_exceeded_is_explicit():
    z = zz22(3)
    with pytest.raises(BudgetExceeded):
        find_fop_map(z, zz22(4), budget=1)
    with pytest.raises(BudgetExceeded):
        find_nonsurjective_self_map(z, budget=1, shortcuts=False)


def test_two_parents_predicate():
    # x below O1 only, with O1 the only element above it: x can be pushed into O1
    f = Fpo(["I", "x", "O1", "O2"], [("x", "O1"), ("I", "O2")], ["I"], ["O1", "O2"])
    assert two_parents_violation(f) is not None
    assert not is_minimal_representative(f)
    assert two_parents_violation(bell()) is None


def test_fop_map_json_round_trip(BELL, ONEWAY_L):
    m = find_fop_map(BELL, ONEWAY_L)
    again = FopMap.from_dict(m.to_dict())
    assert again.source == BELL and again.target == ONEWAY_L and dict(again.assignment) == dict(m.assignment)


def _small_pair(seed):
    rng = random.Random(seed)
    m, n = rng.randint(0, 2), rng.randint(0, 2)
    a = random_fpo(rng, 6, m, n)
    b = random_fpo(rng, 6, m, n)
    return a, b


@given(st.integers(0, 10 ** 9))
@settings(max_examples=200, deadline=None)
def test_map_existence_matches_brute_force(seed):
    a, b = _small_pair(seed)
    m = find_fop_map(a, b)
    assert (m is not None) == oracles.has_fop_map(a, b)
    if m is not None:
        validate_fop(m)


@given(st.integers(0, 10 ** 9))
@settings(max_examples=60, deadline=None)
def test_all_maps_enumerated(seed):
    a, b = _small_pair(seed)
    if len(a.internal) > 3:
        return
    ours = {tuple(sorted(m.assignment.items())) for m in iter_fop_maps(a, b)}
    brute = {tuple(sorted(x.items())) for x in oracles.fop_maps(a, b)}
    assert ours == brute


@given(st.integers(0, 10 ** 9))
@settings(max_examples=150, deadline=None)
def test_minimality_matches_brute_force_and_strategies_agree(seed):
    rng = random.Random(seed)
    f = random_fpo(rng, 7)
    expected = oracles.is_minimal(f)
    assert is_minimal_representative(f) == expected
    assert is_minimal_representative(f, "idempotent") == expected
    assert is_minimal_representative(f, shortcuts=False) == expected


@given(st.integers(0, 10 ** 9))
@settings(max_examples=100, deadline=None)
def test_minrep_is_equivalent_and_minimal(seed):
    f = random_fpo(random.Random(seed), 8)
    r = minimal_representative(f)
    assert is_minimal_representative(r)
    assert is_equivalent(r, f)
    assert canonical_form(minimal_representative(r)) == canonical_form(r)


@given(st.integers(0, 10 ** 9))
@settings(max_examples=100, deadline=None)
def test_preorder_transitive(seed):
    rng = random.Random(seed)
    m, n = rng.randint(0, 2), rng.randint(0, 2)
    a, b, c = (random_fpo(rng, 7, m, n) for _ in range(3))
    ab, bc = find_fop_map(a, b), find_fop_map(b, c)
    if ab and bc:
        validate_fop(ab.then(bc))
    validate_fop(find_fop_map(a, a))


def test_reflexive_and_transitive_on_enumerated_types():
    forms = list(enumerate_fpo_types((1, 2), 5))
    fpos = [f.to_fpo() for f in forms]
    rng = random.Random(7)
    for f in fpos:
        assert embeds(f, f)
    for _ in range(300):
        a, b, c = rng.sample(fpos, 3)
        ab, bc = find_fop_map(a, b), find_fop_map(b, c)
        if ab and bc:
            validate_fop(ab.then(bc))
            assert embeds(a, c)


def test_single_labelling_test_agrees_with_two_labelling_criterion():
    # minimal iff every FOP map between any two labellings of the type is surjective
    for form in enumerate_fpo_types((1, 2), 5):
        f = form.to_fpo()
        rng = random.Random(form.key)
        internal = list(f.internal)
        new = internal[:]
        rng.shuffle(new)
        g = f.relabel({a: "r" + b for a, b in zip(internal, new)})
        two = all(len(m.image()) == len(g) for m in iter_fop_maps(f, g))
        assert two == is_minimal_representative(f)


def test_search_is_deterministic():
    z = zz22(3)
    maps = [find_fop_map(zz22(4), z).assignment for _ in range(3)]
    assert maps[0] == maps[1] == maps[2]
