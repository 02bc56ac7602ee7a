import itertools
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from fpolab.canonical import canonical_form
from fpolab.diagram import diagram_to_fpo
from fpolab.enumeration import (Catalog, ZigzagSpec, bell, bottleneck, catalog_named, collapse_ok, compose_closure,
                                enumerate_fpo_types, enumerate_minimal_representatives, exogenise, fence_parity_ok,
                                frame_orbit, full_frame, is_causal_relevant, is_markov_relevant,
                                named_connected_pieces, oneway_l, oneway_r, orbit_key, random_causal_fpo,
                                structure_family, two_parents_ok, zigzag_cascade, zz13, zz22)
from fpolab.errors import NotCausalRelevantError, UnknownName
from fpolab.poset import Fpo, FpoClass, frame_only, internal_connection, parallel_compose
from fpolab.search import find_fop_map, is_equivalent, is_minimal_representative, minimal_representative

import oracles


@pytest.mark.parametrize("m,n,max_order", [(0, 0, 3), (0, 1, 4), (1, 1, 4), (0, 2, 5), (1, 2, 5), (2, 1, 5),
                                           (2, 2, 6), (0, 3, 5), (1, 3, 5)])
def test_type_counts_match_brute_force(m, n, max_order):
    forms = list(enumerate_fpo_types((m, n), max_order))
    assert len(forms) == len(set(forms))
    expected = sum(len(oracles.all_types(m, n, k)) for k in range(m + n, max_order + 1))
    assert len(forms) == expected


def test_small_enumeration_examples():
    assert len(list(enumerate_fpo_types((0, 2), 2))) == 1
    assert len(list(enumerate_fpo_types((1, 1), 2))) == 2
    assert [len(f.to_fpo()) for f in enumerate_fpo_types((0, 0), 0)] == [0]
    assert list(enumerate_fpo_types((2, 2), 3)) == []


def test_enumeration_order_is_canonical():
    forms = list(enumerate_fpo_types((1, 2), 5))
    by_level = {}
    for f in forms:
        by_level.setdefault(f.order, []).append(f)
    for level in by_level.values():
        assert level == sorted(level)


def test_zero_two_causal():
    assert len(enumerate_minimal_representatives((0, 2), 2, "causal")) == 1
    cat = enumerate_minimal_representatives((0, 2), 3, "causal")
    assert len(cat) == 2
    assert {e.form for e in cat.entries} == {canonical_form(frame_only(0, 2)), canonical_form(bottleneck(0, 2))}


def test_one_two_deterministic_is_frame_only():
    cat = enumerate_minimal_representatives((1, 2), 3, "det")
    assert all(not f.internal for f in cat.fpos())
    assert sum(e.orbit_size for e in cat.entries) == 4


def test_two_two_markov():
    cat = enumerate_minimal_representatives((2, 2), 5, "markov")
    forms = cat.all_forms()
    for f in (bell(), oneway_l(), oneway_r(), full_frame(2, 2)):
        assert canonical_form(f) in forms
    for f in (bottleneck(2, 2), zz22(1)):
        assert canonical_form(f) not in forms
    assert all(is_markov_relevant(f) for f in cat.fpos())
    pieces = {}
    for c in [(0, 1), (1, 0), (1, 1), (0, 2), (2, 0), (1, 2), (2, 1), (2, 2)]:
        pieces[FpoClass(*c)] = [f for f in named_connected_pieces(c, 5).values() if is_markov_relevant(f)]
    assert forms == compose_closure(pieces, FpoClass(2, 2), 5)


def test_flags_consistent():
    cat = enumerate_minimal_representatives((2, 2), 6)
    for e in cat.entries:
        if e.flags["deterministic_relevant"]:
            assert e.flags["markov_relevant"]
        if e.flags["markov_relevant"]:
            assert e.flags["causal_relevant"]
        assert e.flags["minimal"]
        assert e.orbit_size == len(frame_orbit(e.fpo()))
        assert e.form == orbit_key(e.fpo())


def test_catalog_json_round_trip():
    cat = enumerate_minimal_representatives((1, 2), 5, "causal")
    again = Catalog.from_json(cat.to_json(), (1, 2), 5, "causal_relevant")
    assert again.entries == cat.entries
    data = json.loads(cat.to_json())
    assert set(data[0]) == {"form", "flags", "orbit_size"}


def test_catalog_independent_of_workers():
    a = enumerate_minimal_representatives((1, 2), 5, "all", workers=1)
    b = enumerate_minimal_representatives((1, 2), 5, "all", workers=2)
    assert a.to_json() == b.to_json()


def test_unknown_filter():
    with pytest.raises(ValueError):
        enumerate_minimal_representatives((1, 1), 3, "nonsense")


def test_named_families():
    assert catalog_named("BELL") == bell()
    assert catalog_named("TWOWAY") == full_frame(2, 2)
    assert catalog_named("ZZ22", 2) == zz22(2)
    assert catalog_named("ZZ13", n=1) == zz13(1)
    assert catalog_named("FULL_FRAME", inputs=1, outputs=3) == full_frame(1, 3)
    assert catalog_named("BOTTLENECK", inputs=2, outputs=2) == bottleneck(2, 2)
    with pytest.raises(UnknownName):
        catalog_named("TRIANGLE")
    with pytest.raises(ValueError):
        ZigzagSpec("ZZ22", 0)
    with pytest.raises(UnknownName):
        ZigzagSpec("ZZ33", 1)
    assert ZigzagSpec("ZZ13", 2).fpo() == zz13(2)


def test_zigzag_shapes():
    z = zz22(1)
    assert set(z.internal) == {"u0", "v1", "u1"}
    assert len(zz22(3)) == 4 + 7
    assert len(zz13(2)) == 4 + 4
    for n in range(1, 5):
        for f in (zz22(n), zz13(n)):
            assert is_minimal_representative(f)
            assert is_causal_relevant(f)
            assert fence_parity_ok(f)


def test_twoway_above_zigzag():
    m = find_fop_map(full_frame(2, 2), zz22(1))
    assert m is not None and all(m(e) == e for e in zz22(1).frame)
    assert find_fop_map(zz22(1), full_frame(2, 2)) is None


def test_exogenise_examples():
    assert exogenise(bottleneck(2, 2)) == full_frame(2, 2)
    assert canonical_form(exogenise(bell())) == canonical_form(bell())
    out = exogenise(zz22(1))
    assert is_markov_relevant(out) and is_minimal_representative(out)
    assert find_fop_map(out, zz22(1)) is not None
    assert canonical_form(out) == canonical_form(full_frame(2, 2))
    with pytest.raises(NotCausalRelevantError):
        exogenise(Fpo(["I", "x", "O"], [("I", "x")], ["I"], ["O"]))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("slot", ["A", "F"])
def test_zigzag_cascade(n, slot):
    d = zigzag_cascade(n + 1, slot)
    assert canonical_form(minimal_representative(diagram_to_fpo(d))) == canonical_form(zz22(n + 1))


def test_cascade_base_is_zigzag():
    assert canonical_form(diagram_to_fpo(zigzag_cascade(1))) == canonical_form(zz22(1))


@pytest.fixture(scope="module")
def catalogs():
    out = {}
    for c, k in [((0, 2), 5), ((0, 3), 6), ((1, 2), 6), ((2, 1), 6), ((2, 2), 6), ((1, 3), 6)]:
        out[c] = enumerate_minimal_representatives(c, k, "all", orbits=False)
    return out


def test_predicates_hold_on_all_minimal_representatives(catalogs):
    for cat in catalogs.values():
        for f in cat.fpos():
            assert collapse_ok(f)
            assert two_parents_ok(f)
            assert fence_parity_ok(f)


def test_structure_family_on_causal_representatives(catalogs):
    for c, cat in catalogs.items():
        if c == (2, 1):
            continue
        for f in cat.fpos():
            if is_causal_relevant(f):
                assert structure_family(f) is not None, f


def test_structure_family_rejects_non_minimal():
    f = Fpo(["I1", "I2", "x", "y", "O1", "O2"],
            [("x", "O1"), ("x", "O2"), ("y", "O1"), ("y", "O2")], ["I1", "I2"], ["O1", "O2"])
    assert not is_minimal_representative(f)
    assert structure_family(f) is None


def test_parallel_composition_of_minimal_is_minimal(catalogs):
    rng = random.Random(3)
    pool = [f for cat in catalogs.values() for f in cat.fpos() if len(f) <= 5]
    for _ in range(150):
        a, b = rng.choice(pool), rng.choice(pool)
        assert is_minimal_representative(parallel_compose(a, b))
    extra = Fpo(bell().elements + ("z",), bell().relations, bell().inputs, bell().outputs)
    assert not is_minimal_representative(parallel_compose(extra, full_frame(1, 1)))


def test_one_connection_component_each(catalogs):
    for cat in catalogs.values():
        for f in cat.fpos():
            comps = {internal_connection(f, x) for x in f.internal}
            completed = [f.restrict(c | set(f.frame)) for c in comps]
            for g in completed:
                assert is_minimal_representative(g)
            for g, h in itertools.combinations(completed, 2):
                assert find_fop_map(g, h) is None and find_fop_map(h, g) is None


@given(st.integers(0, 10 ** 9))
@settings(max_examples=80, deadline=None)
def test_exogenise_properties(seed):
    s = random_causal_fpo(random.Random(seed), 8)
    out = exogenise(s)
    assert is_markov_relevant(out)
    assert is_minimal_representative(out)
    assert find_fop_map(out, s) is not None
