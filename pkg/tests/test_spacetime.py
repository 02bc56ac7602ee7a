import random

import pytest
from hypothesis import given, settings, strategies as st

from fpolab.enumeration import bell, oneway_l, random_causal_fpo
from fpolab.errors import LocalisationError
from fpolab.poset import Fpo, random_fpo
from fpolab.search import find_fop_map, validate_fop
from fpolab.spacetime import (CausalSite, Localisation, c_local_embed, causally_precedes, disjoint_union,
                              embedding_from_window_map, is_c_local_embedding, minkowski_lattice, parse_site,
                              site_window_fpo, unanchored, window_for)

import oracles

SPACELIKE = {"X": "0,-2", "A": "1,-2", "Y": "0,2", "B": "1,2"}


@pytest.fixture(scope="module")
def lattice():
    return minkowski_lattice(1, (-2, 1), (-4, 4))


def test_lattice_order_examples(lattice):
    assert lattice.leq("0,0", "1,1")
    assert not lattice.leq("0,0", "1,2") and not lattice.leq("1,2", "0,0")
    assert lattice.leq("-2,0", "1,-2") and lattice.leq("-2,0", "1,2")
    assert len(lattice) == 4 * 9


def test_lattice_matches_pointwise_rule(lattice):
    for p in lattice.points:
        for q in lattice.points:
            expected = p != q and causally_precedes(lattice.coords[p], lattice.coords[q])
            assert lattice.less(p, q) == expected


def test_strict_timelike_mode():
    site = minkowski_lattice(1, (0, 2), (-2, 2), strict_timelike=True)
    assert not site.leq("0,0", "1,1")
    assert site.leq("0,0", "2,1")
    assert not parse_site("mink:d=1,t=0..1,x=-1..1,lightlike=0").leq("0,0", "1,1")


def test_parse_site():
    s = parse_site("mink:d=1,t=-4..4,x=-4..4")
    assert len(s) == 81 and s.provenance["kind"] == "minkowski_lattice"
    s2 = parse_site("mink:d=2,t=0..1,x1=0..1,x2=-1..1")
    assert len(s2) == 2 * 2 * 3
    assert s2.leq("0,0,0", "1,0,1") and not s2.leq("0,0,-1", "1,1,1")
    with pytest.raises(ValueError):
        parse_site("mink:d=1,t=0:3")


def test_disjoint_union():
    one = CausalSite.explicit(["p"], [])
    u = disjoint_union(one, one)
    assert len(u) == 2 and not u.order.relations
    a = minkowski_lattice(1, (0, 1), (-1, 1))
    both = disjoint_union(a, a)
    assert len(both) == 2 * len(a)
    for p in a.points:
        for q in a.points:
            assert not both.leq(p, q + "'") and not both.leq(q + "'", p)
    assert both.provenance["kind"] == "disjoint_union"


def test_window_example(lattice):
    loc = Localisation(SPACELIKE)
    w = site_window_fpo(lattice, loc, bell())
    assert w.inputs == ("X", "Y") and w.outputs == ("A", "B")
    frame_rel = {(a, b) for a, b in w.relations if a in w.frame and b in w.frame}
    assert frame_rel == {("X", "A"), ("Y", "B")}
    assert "-2,0" in w and w.less("-2,0", "A") and w.less("-2,0", "B")


def test_window_without_other_points():
    # only the localised points themselves remain besides the frame copies
    site = CausalSite.explicit(["p", "q"], [])
    w = site_window_fpo(site, Localisation({"I": "p", "O": "q"}), (["I"], ["O"]))
    assert set(w.internal) == {"p", "q"}
    assert set(w.relations) == {("I", "p"), ("q", "O")}


def test_window_split_site_has_no_cross_relations():
    a = minkowski_lattice(1, (0, 1), (-1, 1))
    u = disjoint_union(a, a)
    loc = Localisation({"X": "0,0", "A": "1,0", "Y": "0,0'", "B": "1,0'"})
    w = site_window_fpo(u, loc, bell())
    left = {"X", "A"} | set(a.points)
    for x, y in w.relations:
        assert (x in left) == (y in left)


def test_bell_embeds_spacelike(lattice):
    loc = Localisation(SPACELIKE)
    emb = c_local_embed(bell(), lattice, loc)
    assert emb is not None and is_c_local_embedding(bell(), lattice, loc, emb)
    assert lattice.leq(emb["s"], "1,-2") and lattice.leq(emb["s"], "1,2")


def test_oneway_does_not_embed(lattice):
    assert c_local_embed(oneway_l(), lattice, Localisation(SPACELIKE)) is None


def test_bell_blocked_by_disjoint_union():
    a = minkowski_lattice(1, (-2, 1), (-3, 3))
    u = disjoint_union(a, a)
    loc = Localisation({"X": "0,0", "A": "1,0", "Y": "0,0'", "B": "1,0'"})
    assert c_local_embed(bell(), u, loc) is None
    assert find_fop_map(bell(), site_window_fpo(u, loc, bell())) is None


def test_localisation_errors(lattice):
    with pytest.raises(LocalisationError):
        c_local_embed(bell(), lattice, Localisation({"X": "0,-2"}))
    with pytest.raises(LocalisationError):
        site_window_fpo(lattice, Localisation(dict(SPACELIKE, X="9,9")), bell())
    with pytest.raises(LocalisationError):
        lattice.point_at((7, 7))
    assert Localisation.from_dict({"X": [0, -2]}, lattice)["X"] == "0,-2"


def test_unanchored_uses_full_site(lattice):
    f = Fpo(["I", "z", "O"], [("I", "O")], ["I"], ["O"])
    assert unanchored(f) == ["z"]
    loc = Localisation({"I": "0,0", "O": "1,0"})
    w = window_for(f, lattice, loc)
    assert len(w.internal) == len(lattice)


def test_site_json_round_trip(lattice):
    again = CausalSite.from_dict(lattice.to_dict())
    assert again.order == lattice.order and again.coords == lattice.coords


def _triple(seed):
    rng = random.Random(seed)
    f = random_causal_fpo(rng, 6)
    site = minkowski_lattice(1, (0, rng.randint(1, 3)), (-2, 2), strict_timelike=rng.random() < 0.3)
    pts = list(site.points)
    loc = Localisation({e: rng.choice(pts) for e in f.frame})
    return f, site, loc


@given(st.integers(0, 10 ** 9))
@settings(max_examples=150, deadline=None)
def test_embedding_iff_window_map(seed):
    f, site, loc = _triple(seed)
    emb = c_local_embed(f, site, loc)
    m = find_fop_map(f, window_for(f, site, loc))
    assert (emb is None) == (m is None)
    if emb is not None:
        assert is_c_local_embedding(f, site, loc, emb)
        validate_fop(m)
        assert is_c_local_embedding(f, site, loc, embedding_from_window_map(f, loc, m.assignment))


@given(st.integers(0, 10 ** 9))
@settings(max_examples=40, deadline=None)
def test_embedding_matches_exhaustive_oracle(seed):
    rng = random.Random(seed)
    f = random_fpo(rng, 5)
    if len(f.internal) > 2:
        return
    site = minkowski_lattice(1, (0, 2), (-1, 1))
    loc = {e: rng.choice(site.points) for e in f.frame}
    found = next(oracles.embeddings(f, site.points, site.leq, loc), None)
    assert (found is None) == (c_local_embed(f, site, Localisation(loc)) is None)


@given(st.integers(0, 10 ** 9))
@settings(max_examples=60, deadline=None)
def test_monotone_under_preorder(seed):
    rng = random.Random(seed)
    f, site, loc = _triple(seed)
    g = random_causal_fpo(rng, 6)
    if g.fpo_class != f.fpo_class:
        return
    g = g.relabel(dict(zip(g.frame, f.frame)))
    m = find_fop_map(g, f)
    emb = c_local_embed(f, site, loc)
    if m is not None and emb is not None:
        assert c_local_embed(g, site, loc) is not None


@given(st.integers(0, 10 ** 9))
@settings(max_examples=60, deadline=None)
def test_order_invariant_under_reflection_and_translation(seed):
    rng = random.Random(seed)
    p = [rng.randint(-5, 5) for _ in range(3)]
    q = [rng.randint(-5, 5) for _ in range(3)]
    shift = rng.randint(-4, 4)
    base = causally_precedes(p, q)
    assert causally_precedes([p[0] + shift] + p[1:], [q[0] + shift] + q[1:]) == base
    assert causally_precedes([p[0], -p[1], p[2]], [q[0], -q[1], q[2]]) == base
    assert causally_precedes([p[0], p[1], -p[2]], [q[0], q[1], -q[2]]) == base


def test_embedding_invariant_under_site_reflection():
    site = minkowski_lattice(1, (-2, 1), (-4, 4))
    mirror_loc = {e: "{},{}".format(p.split(",")[0], -int(p.split(",")[1])) for e, p in SPACELIKE.items()}
    for f in (bell(), oneway_l()):
        a = c_local_embed(f, site, Localisation(SPACELIKE)) is None
        b = c_local_embed(f, site, Localisation(mirror_loc)) is None
        assert a == b
