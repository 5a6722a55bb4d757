import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import obj
from oracles import all_triples, lineage, triple
from spotdiff.taxonomy import (AtomicProperty, PropertySet, TaxonomyError, identifier_set, load_taxonomy)


def test_ancestor_chains(tax):
    assert tax.ancestors("pizza") == ["baked food", "food"]
    assert tax.ancestors("table") == ["furniture"]
    assert tax.ancestors("furniture") == []


def test_unknown_category_raises(tax):
    with pytest.raises(TaxonomyError):
        tax.ancestors("spaceship")


def test_hierarchy_is_a_forest(tax):
    for name, c in tax.categories.items():
        for child in c.children:
            assert tax.categories[child].parent == name
        assert len(set(tax.chain(name))) == len(tax.chain(name))


def test_max_depth_three_below_roots(tax):
    assert max(len(tax.ancestors(c)) for c in tax.categories) == 3


def test_inventory_sizes(tax):
    assert len(tax.categories) == 104
    assert len(tax.leaves()) == 76
    assert len(tax.assets) == 251


def test_assets_are_valid(tax):
    for a in tax.assets:
        assert tax.is_leaf(a.category)
        assert a.allowed_colors and a.allowed_materials
        assert set(a.allowed_colors) <= set(tax.colors)
        assert set(a.allowed_materials) <= set(tax.materials)
        assert all(s > 0 for s in a.base_size)


def test_every_leaf_has_an_asset(tax):
    assert {a.category for a in tax.assets} == set(tax.leaves())


def test_entailment_examples(tax):
    assert tax.entails(PropertySet("white", None, "nightstand"), PropertySet("white", None, "furniture"))
    assert tax.entails(PropertySet("white"), PropertySet("white"))
    assert not tax.entails(PropertySet(None, "wooden", "table"), PropertySet("white"))
    assert not tax.entails(PropertySet(category="furniture"), PropertySet(category="nightstand"))


def test_property_set_rules():
    with pytest.raises(ValueError):
        PropertySet()
    with pytest.raises(ValueError):
        AtomicProperty("size", "big")
    assert PropertySet("white", None, "vase").union(PropertySet(None, "glass", None)) == PropertySet("white", "glass", "vase")
    assert PropertySet("white").union(PropertySet("black")) is None
    p = PropertySet("red", "metal", "cup")
    assert PropertySet.from_json(p.to_json()) == p


def test_enumeration_counts(tax):
    stand = obj("o1", "nightstand", "white", "wooden")
    sets = tax.enumerate_property_sets(stand)
    plain = [p for p in sets if not p.is_identifier]
    assert len(plain) == 11
    assert identifier_set(stand) in sets
    assert {PropertySet("white", None, "nightstand"), PropertySet(None, "wooden", "furniture"),
            PropertySet("white")} <= set(plain)
    apple = obj("o2", "apple", "red", "plastic")
    assert len([p for p in tax.enumerate_property_sets(apple) if not p.is_identifier]) == 15


def test_identifier_entails_exactly_its_enumeration(tax):
    for a in tax.assets[::7]:
        o = obj("o9", a.category, a.allowed_colors[0], a.allowed_materials[0])
        ident = identifier_set(o)
        sets = tax.enumerate_property_sets(o)
        for p in tax.iter_askable_sets():
            assert tax.entails(ident, p) == (p in sets)


def test_enumeration_matches_oracle(tax):
    for a in tax.assets:
        o = obj("o1", a.category, a.allowed_colors[-1], a.allowed_materials[-1])
        mine = {triple(p) for p in tax.enumerate_property_sets(o) if not p.is_identifier}
        assert mine == set(all_triples(o))
        assert list(tax.chain(a.category)) == lineage(a.category)


def test_loader_rejects_bad_catalog(tmp_path, tax):
    bad = tmp_path / "catalog.yaml"
    bad.write_text("assets:\n  - {id: x, category: furniture, colors: [white], materials: [wooden], size: [1,1,1]}\n")
    with pytest.raises(TaxonomyError):
        load_taxonomy(catalog_path=bad)


@st.composite
def property_sets(draw, tax):
    cat = draw(st.sampled_from(sorted(tax.categories)) | st.none())
    col = draw(st.sampled_from(tax.colors) | st.none())
    mat = draw(st.sampled_from(tax.materials) | st.none())
    if cat is None and col is None and mat is None:
        col = tax.colors[0]
    return PropertySet(col, mat, cat)


def _tax():
    from spotdiff.taxonomy import default_taxonomy
    return default_taxonomy()


@settings(max_examples=300, deadline=None)
@given(property_sets(_tax()), property_sets(_tax()), property_sets(_tax()))
def test_entailment_is_a_preorder(a, b, c):
    tax = _tax()
    assert tax.entails(a, a)
    if tax.entails(a, b) and tax.entails(b, c):
        assert tax.entails(a, c)
    if tax.entails(a, b) and tax.entails(b, a):
        assert a == b


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(_tax().assets), st.data())
def test_matches_agrees_with_union_rule(asset, data):
    tax = _tax()
    o = obj("o1", asset.category, data.draw(st.sampled_from(asset.allowed_colors)),
            data.draw(st.sampled_from(asset.allowed_materials)))
    sets = [p for p in tax.enumerate_property_sets(o) if not p.is_identifier]
    for a, b in itertools.combinations(sets, 2):
        u = a.union(b)
        if u is not None:
            assert tax.matches(o, u) == (tax.matches(o, a) and tax.matches(o, b))
