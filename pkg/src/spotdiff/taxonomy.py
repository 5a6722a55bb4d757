"""Category hierarchy, attribute vocabularies, asset catalog and property sets."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterator

import yaml

KINDS = ("color", "material", "category")


class TaxonomyError(LookupError):
    pass


@dataclass(frozen=True, order=True)
class AtomicProperty:
    kind: str
    value: str

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown property kind {self.kind!r}")


@dataclass(frozen=True)
class PropertySet:
    """A combination of at most one colour, material and category.

    An identifier set (``ident`` set) stands for one particular object. It
    carries that object's full description so entailment can be decided
    without a scene lookup.
    """

    color: str | None = None
    material: str | None = None
    category: str | None = None
    ident: str | None = None

    def __post_init__(self) -> None:
        if self.ident is None and not (self.color or self.material or self.category):
            raise ValueError("empty property set")

    @property
    def is_identifier(self) -> bool:
        return self.ident is not None

    @property
    def cardinality(self) -> int:
        return sum(v is not None for v in (self.color, self.material, self.category))

    def atoms(self) -> tuple[AtomicProperty, ...]:
        return tuple(AtomicProperty(k, v) for k, v in zip(KINDS, (self.color, self.material, self.category))
                     if v is not None)

    def describe(self) -> "PropertySet":
        """The plain description of an identifier set (itself otherwise)."""
        if not self.is_identifier:
            return self
        return PropertySet(self.color, self.material, self.category)

    def union(self, other: "PropertySet") -> "PropertySet | None":
        """A ∪ B, or None when the two disagree on some kind."""
        if self.is_identifier or other.is_identifier:
            return None
        merged = []
        for a, b in zip((self.color, self.material, self.category), (other.color, other.material, other.category)):
            if a is not None and b is not None and a != b:
                return None
            merged.append(a if a is not None else b)
        return PropertySet(*merged)

    def sort_key(self) -> tuple:
        return (self.ident or "", self.color or "", self.material or "", self.category or "")

    def to_json(self) -> dict:
        return {k: v for k, v in (("color", self.color), ("material", self.material),
                                  ("category", self.category), ("ident", self.ident)) if v is not None}

    @classmethod
    def from_json(cls, d: dict) -> "PropertySet":
        return cls(d.get("color"), d.get("material"), d.get("category"), d.get("ident"))

    def __str__(self) -> str:
        if self.is_identifier:
            return "{" + self.ident + "}"
        return "{" + ", ".join(a.value for a in self.atoms()) + "}"


@dataclass(frozen=True)
class Category:
    name: str
    parent: str | None
    children: tuple[str, ...] = ()


@dataclass(frozen=True)
class AssetSpec:
    id: str
    category: str
    allowed_colors: tuple[str, ...]
    allowed_materials: tuple[str, ...]
    base_size: tuple[float, float, float]

    @property
    def footprint_area(self) -> float:
        return self.base_size[0] * self.base_size[1]


@dataclass
class Taxonomy:
    categories: dict[str, Category]
    colors: tuple[str, ...]
    materials: tuple[str, ...]
    assets: tuple[AssetSpec, ...] = ()
    _chains: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False)
    _asset_index: dict[str, AssetSpec] = field(default_factory=dict, repr=False)
    _signatures: list[tuple[str, str, str]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        for name in self.categories:
            seen = [name]
            node = self.categories[name].parent
            while node is not None:
                if node in seen:
                    raise TaxonomyError(f"cycle through {node!r}")
                seen.append(node)
                node = self.categories[node].parent
            self._chains[name] = tuple(seen)
        for a in self.assets:
            self._check_asset(a)
            self._asset_index[a.id] = a

    def _check_asset(self, a: AssetSpec) -> None:
        if a.category not in self.categories:
            raise TaxonomyError(f"asset {a.id}: unknown category {a.category!r}")
        if not self.is_leaf(a.category):
            raise TaxonomyError(f"asset {a.id}: {a.category!r} is not a leaf")
        if not a.allowed_colors or not a.allowed_materials:
            raise TaxonomyError(f"asset {a.id}: empty colour or material list")
        bad = (set(a.allowed_colors) - set(self.colors)) | (set(a.allowed_materials) - set(self.materials))
        if bad:
            raise TaxonomyError(f"asset {a.id}: values outside vocabulary {sorted(bad)}")

    # --- hierarchy -------------------------------------------------------

    def __contains__(self, name: str) -> bool:
        return name in self.categories

    def chain(self, category: str) -> tuple[str, ...]:
        """``category`` followed by its ancestors up to the root."""
        try:
            return self._chains[category]
        except KeyError:
            raise TaxonomyError(f"unknown category {category!r}") from None

    def ancestors(self, category: str) -> list[str]:
        return list(self.chain(category)[1:])

    def children(self, category: str) -> tuple[str, ...]:
        if category not in self.categories:
            raise TaxonomyError(f"unknown category {category!r}")
        return self.categories[category].children

    def is_leaf(self, category: str) -> bool:
        return not self.children(category)

    def is_a(self, category: str, general: str) -> bool:
        return general in self.chain(category)

    def leaves(self) -> list[str]:
        return sorted(c for c in self.categories if not self.categories[c].children)

    def descendants(self, category: str) -> set[str]:
        out = {category}
        for c in self.children(category):
            out |= self.descendants(c)
        return out

    def asset(self, asset_id: str) -> AssetSpec:
        try:
            return self._asset_index[asset_id]
        except KeyError:
            raise TaxonomyError(f"unknown asset {asset_id!r}") from None

    def assets_for(self, category: str) -> list[AssetSpec]:
        return [a for a in self.assets if self.is_a(a.category, category)]

    # --- property sets ---------------------------------------------------

    def entails(self, specific: PropertySet, general: PropertySet) -> bool:
        if general.is_identifier:
            return specific == general
        if specific.is_identifier:
            specific = specific.describe()
        if general.color is not None and specific.color != general.color:
            return False
        if general.material is not None and specific.material != general.material:
            return False
        if general.category is not None:
            if specific.category is None or not self.is_a(specific.category, general.category):
                return False
        return True

    def matches(self, obj, pset: PropertySet) -> bool:
        """Whether ``obj`` (anything with color/material/category) satisfies ``pset``."""
        if pset.is_identifier:
            return getattr(obj, "id", None) == pset.ident
        return self.entails(PropertySet(obj.color, obj.material, obj.category), pset)

    def enumerate_property_sets(self, obj) -> set[PropertySet]:
        sets = {identifier_set(obj)}
        for c in (None, obj.color):
            for m in (None, obj.material):
                for cat in (None, *self.chain(obj.category)):
                    if c is None and m is None and cat is None:
                        continue
                    sets.add(PropertySet(c, m, cat))
        return sets

    def iter_askable_sets(self) -> Iterator[PropertySet]:
        """Every non-identifier set some catalogued asset variant can satisfy."""
        seen: set[PropertySet] = set()
        for a in self.assets:
            for col, mat in itertools.product(a.allowed_colors, a.allowed_materials):
                for c in (None, col):
                    for m in (None, mat):
                        for cat in (None, *self.chain(a.category)):
                            if c is None and m is None and cat is None:
                                continue
                            p = PropertySet(c, m, cat)
                            if p not in seen:
                                seen.add(p)
                                yield p

    def signatures(self) -> list[tuple[str, str, str]]:
        """All distinct (category, colour, material) an object can have."""
        if not self._signatures:
            self._signatures.extend(sorted({(a.category, c, m) for a in self.assets
                                            for c in a.allowed_colors for m in a.allowed_materials}))
        return self._signatures


def identifier_set(obj) -> PropertySet:
    return PropertySet(obj.color, obj.material, obj.category, ident=obj.id)


def full_set(obj) -> PropertySet:
    return PropertySet(obj.color, obj.material, obj.category)


def _data_path(name: str) -> Path:
    return Path(str(resources.files("spotdiff") / "data" / name))


def load_taxonomy(taxonomy_path: str | Path | None = None, catalog_path: str | Path | None = None) -> Taxonomy:
    tax = yaml.safe_load(Path(taxonomy_path or _data_path("taxonomy.yaml")).read_text())
    parents: dict[str, str | None] = {}
    children: dict[str, list[str]] = {}
    for parent, subs in tax["subcategories"].items():
        parents.setdefault(parent, None)
        children.setdefault(parent, [])
        for s in subs:
            if parents.get(s) is not None:
                raise TaxonomyError(f"{s!r} has two parents")
            parents[s] = parent
            children[parent].append(s)
            children.setdefault(s, [])
    for r in tax.get("extra_roots", []):
        if r in parents:
            raise TaxonomyError(f"duplicate category {r!r}")
        parents[r] = None
        children[r] = []
    cats = {n: Category(n, parents[n], tuple(children[n])) for n in parents}
    cat = yaml.safe_load(Path(catalog_path or _data_path("catalog.yaml")).read_text())
    assets = tuple(
        AssetSpec(a["id"], a["category"], tuple(a["colors"]), tuple(a["materials"]), tuple(a["size"]))
        for a in cat["assets"]
    )
    if len({a.id for a in assets}) != len(assets):
        raise TaxonomyError("duplicate asset ids")
    return Taxonomy(cats, tuple(tax["colors"]), tuple(tax["materials"]), assets)


@lru_cache(maxsize=1)
def default_taxonomy() -> Taxonomy:
    return load_taxonomy()


