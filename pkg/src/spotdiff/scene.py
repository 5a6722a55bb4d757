"""Random scene synthesis under placement, spacing and co-occurrence constraints."""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import yaml

from .taxonomy import AssetSpec, Taxonomy, _data_path, default_taxonomy

FLOOR = "FLOOR"
FLOOR_CATEGORY = "floor"


class PlacementFailure(RuntimeError):
    pass


class GenerationFailure(RuntimeError):
    pass


class InjectionFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SceneConfig:
    min_objects: int = 8
    max_objects: int = 15
    sample_points: int = 100          # T
    min_gap: float = 0.3              # d_min
    max_divergence: int = 3           # K
    floor_size: tuple[float, float] = (14.0, 10.0)
    retry_budget: int = 50
    diff_category_prob: float = 0.5
    min_footprint_area: float = 0.005
    view_height: float = 8.0


@dataclass(frozen=True)
class PlacementGraph:
    edges: dict[str, frozenset[str]]

    def supports(self, surface_category: str, child_category: str, tax: Taxonomy) -> bool:
        surface_chain = (FLOOR_CATEGORY,) if surface_category == FLOOR_CATEGORY else tax.chain(surface_category)
        child_chain = set(tax.chain(child_category))
        return any(child_chain & self.edges.get(s, frozenset()) for s in surface_chain)

    def is_surface(self, category: str, tax: Taxonomy) -> bool:
        chain = (FLOOR_CATEGORY,) if category == FLOOR_CATEGORY else tax.chain(category)
        return any(c in self.edges for c in chain)


def load_placement(path: str | Path | None = None, tax: Taxonomy | None = None) -> PlacementGraph:
    raw = yaml.safe_load(Path(path or _data_path("placement.yaml")).read_text())
    tax = tax or default_taxonomy()
    edges = {}
    for surface, cats in raw["supports"].items():
        for c in [surface, *cats]:
            if c != FLOOR_CATEGORY and c not in tax:
                raise ValueError(f"placement table mentions unknown category {c!r}")
        edges[surface] = frozenset(cats)
    return PlacementGraph(edges)


@lru_cache(maxsize=1)
def default_placement() -> PlacementGraph:
    return load_placement()


@dataclass(frozen=True)
class ObjectInstance:
    id: str
    asset_id: str
    category: str
    color: str
    material: str
    x: float
    y: float
    z: float
    width: float
    depth: float
    height: float
    parent_id: str = FLOOR

    @property
    def rect(self) -> tuple[float, float, float, float]:
        return (self.x - self.width / 2, self.y - self.depth / 2, self.x + self.width / 2, self.y + self.depth / 2)

    @property
    def top(self) -> float:
        return self.z + self.height

    @property
    def signature(self) -> tuple[str, str, str]:
        return (self.category, self.color, self.material)


@dataclass(frozen=True)
class BoundingBox2D:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self}")

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass(frozen=True)
class SceneGraph:
    objects: tuple[ObjectInstance, ...]
    bounds: tuple[float, float]
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {o.id: o for o in self.objects})
        if len(self._index) != len(self.objects):
            raise ValueError("duplicate object ids")

    def __getitem__(self, oid: str) -> ObjectInstance:
        return self._index[oid]

    def __contains__(self, oid: str) -> bool:
        return oid in self._index

    def __len__(self) -> int:
        return len(self.objects)

    def children_of(self, oid: str) -> list[ObjectInstance]:
        return [o for o in self.objects if o.parent_id == oid]

    def surface_rect(self, oid: str) -> tuple[float, float, float, float]:
        if oid == FLOOR:
            return (0.0, 0.0, self.bounds[0], self.bounds[1])
        return self[oid].rect

    def surface_height(self, oid: str) -> float:
        return 0.0 if oid == FLOOR else self[oid].top

    def surface_category(self, oid: str) -> str:
        return FLOOR_CATEGORY if oid == FLOOR else self[oid].category

    def with_objects(self, objects: Sequence[ObjectInstance]) -> "SceneGraph":
        return SceneGraph(tuple(objects), self.bounds)


@dataclass(frozen=True)
class ScenePair:
    scene_q: SceneGraph
    scene_a: SceneGraph
    target_id: str
    replacement_id: str

    def oriented(self, orientation: str) -> tuple[SceneGraph, SceneGraph, str, str]:
        """(questioner scene, answerer scene, target, replacement) for ``"qa"`` or ``"aq"``."""
        if orientation == "qa":
            return self.scene_q, self.scene_a, self.target_id, self.replacement_id
        if orientation == "aq":
            return self.scene_a, self.scene_q, self.replacement_id, self.target_id
        raise ValueError(f"bad orientation {orientation!r}")


# --- geometry -------------------------------------------------------------


def footprint_gap(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    """L-infinity clearance between two axis-aligned rectangles (negative when they overlap)."""
    dx = max(b[0] - a[2], a[0] - b[2])
    dy = max(b[1] - a[3], a[1] - b[3])
    return max(dx, dy)


def _rect_at(x: float, y: float, w: float, d: float) -> tuple[float, float, float, float]:
    return (x - w / 2, y - d / 2, x + w / 2, y + d / 2)


def _inside(inner: tuple[float, float, float, float], outer: tuple[float, float, float, float]) -> bool:
    eps = 1e-9
    return (inner[0] >= outer[0] - eps and inner[1] >= outer[1] - eps
            and inner[2] <= outer[2] + eps and inner[3] <= outer[3] + eps)


def sample_points(area: tuple[float, float, float, float], n: int, rng: random.Random) -> list[tuple[float, float]]:
    return [(rng.uniform(area[0], area[2]), rng.uniform(area[1], area[3])) for _ in range(n)]


def choose_point(points: Sequence[tuple[float, float]], area: tuple[float, float, float, float],
                 size: tuple[float, float], siblings: Sequence[ObjectInstance], min_gap: float,
                 rng: random.Random) -> tuple[float, float] | None:
    """Filter candidate centres and pick one.

    Points whose footprint leaves ``area`` or comes closer than ``min_gap`` to a
    sibling are dropped. With siblings present the survivor with the smallest
    L1 distance to its nearest sibling wins; otherwise a survivor is drawn
    uniformly.
    """
    w, d = size
    survivors = []
    for px, py in points:
        rect = _rect_at(px, py, w, d)
        if not _inside(rect, area):
            continue
        if any(footprint_gap(rect, s.rect) < min_gap for s in siblings):
            continue
        survivors.append((px, py))
    if not survivors:
        return None
    if not siblings:
        return rng.choice(survivors)

    def nearest_l1(p: tuple[float, float]) -> float:
        return min(abs(p[0] - s.x) + abs(p[1] - s.y) for s in siblings)

    return min(survivors, key=nearest_l1)


def place_object(scene: SceneGraph, size: tuple[float, float], surface_id: str, rng: random.Random,
                 n_points: int = 100, min_gap: float = 0.3) -> tuple[float, float] | None:
    """Sample ``n_points`` positions on a surface and keep the tightest valid one; None on failure."""
    if n_points < 1:
        raise ValueError("need at least one sample point")
    area = scene.surface_rect(surface_id)
    pts = sample_points(area, n_points, rng)
    return choose_point(pts, area, size, scene.children_of(surface_id), min_gap, rng)


# --- co-occurrence --------------------------------------------------------


def _instantiated(categories, tax: Taxonomy) -> set[str]:
    out: set[str] = set()
    for c in categories:
        out.update(tax.chain(c))
    return out


def divergence(scene: SceneGraph, category: str, tax: Taxonomy) -> int:
    present = _instantiated((o.category for o in scene.objects), tax)
    return sum(1 for v in tax.children(category) if v in present)


def max_divergence(categories, tax: Taxonomy) -> int:
    present = _instantiated(categories, tax)
    return max((sum(1 for v in tax.children(u) if v in present) for u in present), default=0)


# --- generation -----------------------------------------------------------


def _new_object(oid: str, asset: AssetSpec, color: str, material: str, x: float, y: float,
                surface_id: str, scene: SceneGraph) -> ObjectInstance:
    w, d, h = asset.base_size
    return ObjectInstance(oid, asset.id, asset.category, color, material, x, y,
                          scene.surface_height(surface_id), w, d, h, surface_id)


def _fits(asset: AssetSpec, rect: tuple[float, float, float, float]) -> bool:
    return asset.base_size[0] <= rect[2] - rect[0] and asset.base_size[1] <= rect[3] - rect[1]


def generate_scene(config: SceneConfig, rng: random.Random, tax: Taxonomy | None = None,
                   placement: PlacementGraph | None = None) -> SceneGraph:
    tax = tax or default_taxonomy()
    placement = placement or default_placement()
    if config.min_objects < 1 or config.max_objects < config.min_objects:
        raise ValueError("bad object-count range")
    assets = [a for a in tax.assets if a.footprint_area >= config.min_footprint_area]
    scene = SceneGraph((), tuple(config.floor_size))
    wanted = rng.randint(config.min_objects, config.max_objects)
    failures = 0
    while len(scene) < wanted and failures < config.retry_budget:
        surfaces = [FLOOR] + [o.id for o in scene.objects if placement.is_surface(o.category, tax)]
        surface = rng.choice(surfaces)
        s_cat = scene.surface_category(surface)
        s_rect = scene.surface_rect(surface)
        options = [a for a in assets if placement.supports(s_cat, a.category, tax) and _fits(a, s_rect)]
        if not options:
            failures += 1
            continue
        asset = rng.choice(options)
        if max_divergence([o.category for o in scene.objects] + [asset.category], tax) > config.max_divergence:
            failures += 1
            continue
        pos = place_object(scene, asset.base_size[:2], surface, rng, config.sample_points, config.min_gap)
        if pos is None:
            failures += 1
            continue
        obj = _new_object(f"o{len(scene)}", asset, rng.choice(asset.allowed_colors),
                          rng.choice(asset.allowed_materials), pos[0], pos[1], surface, scene)
        scene = scene.with_objects([*scene.objects, obj])
    if len(scene) < config.min_objects:
        raise GenerationFailure(f"only placed {len(scene)} of at least {config.min_objects} objects")
    return scene


def replaceable(scene: SceneGraph) -> list[ObjectInstance]:
    """Objects with nothing placed on them."""
    parents = {o.parent_id for o in scene.objects}
    return [o for o in scene.objects if o.id not in parents]


def _replacement_options(scene: SceneGraph, target: ObjectInstance, same_category: bool, config: SceneConfig,
                         tax: Taxonomy, placement: PlacementGraph) -> list[tuple[AssetSpec, str, str]]:
    area = scene.surface_rect(target.parent_id)
    s_cat = scene.surface_category(target.parent_id)
    siblings = [o for o in scene.children_of(target.parent_id) if o.id != target.id]
    others = [o.category for o in scene.objects if o.id != target.id]
    out = []
    for a in tax.assets:
        if a.footprint_area < config.min_footprint_area:
            continue
        if same_category != (a.category == target.category):
            continue
        if not same_category:
            if not placement.supports(s_cat, a.category, tax):
                continue
            if max_divergence(others + [a.category], tax) > config.max_divergence:
                continue
        rect = _rect_at(target.x, target.y, a.base_size[0], a.base_size[1])
        if not _inside(rect, area) or any(footprint_gap(rect, s.rect) < config.min_gap for s in siblings):
            continue
        for c in a.allowed_colors:
            for m in a.allowed_materials:
                if same_category and (c, m) == (target.color, target.material):
                    continue
                out.append((a, c, m))
    return out


def inject_difference(scene: SceneGraph, rng: random.Random, config: SceneConfig | None = None,
                      tax: Taxonomy | None = None, placement: PlacementGraph | None = None) -> ScenePair:
    config = config or SceneConfig()
    tax = tax or default_taxonomy()
    placement = placement or default_placement()
    candidates = replaceable(scene)
    if not candidates:
        raise InjectionFailure("no replaceable object")
    for _ in range(config.retry_budget):
        target = rng.choice(candidates)
        same = rng.random() >= config.diff_category_prob
        options = _replacement_options(scene, target, same, config, tax, placement)
        if not options:
            continue
        assets = sorted({a.id: a for a, _, _ in options}.values(), key=lambda a: a.id)
        asset = rng.choice(assets)
        color, material = rng.choice([(c, m) for a, c, m in options if a.id == asset.id])
        new_id = f"o{len(scene)}"
        w, d, h = asset.base_size
        repl = replace(target, id=new_id, asset_id=asset.id, category=asset.category, color=color,
                       material=material, width=w, depth=d, height=h)
        scene_a = scene.with_objects([repl if o.id == target.id else o for o in scene.objects])
        return ScenePair(scene, scene_a, target.id, new_id)
    raise InjectionFailure("no valid replacement within retry budget")


# --- projection -----------------------------------------------------------


def project_bbox2d(scene: SceneGraph, obj: ObjectInstance, view_height: float = 8.0) -> BoundingBox2D:
    """Fixed oblique camera: x goes across the image, depth and height blend into the vertical axis."""
    width, depth = scene.bounds

    def v(y: float, z: float) -> float:
        return min(1.0, max(0.0, 1.0 - (0.6 * y / depth + 0.4 * z / view_height)))

    x0, y0, x1, y1 = obj.rect
    u0 = min(1.0, max(0.0, x0 / width))
    u1 = min(1.0, max(0.0, x1 / width))
    top, bottom = v(y1, obj.top), v(y0, obj.z)
    if bottom <= top:  # clamped flat against the frame edge
        top = max(0.0, bottom - 1e-6)
    return BoundingBox2D(u0, top, u1, bottom)


# --- serialisation --------------------------------------------------------


def scene_to_json(scene: SceneGraph, tax: Taxonomy | None = None) -> dict:
    tax = tax or default_taxonomy()
    objs = []
    for o in scene.objects:
        objs.append({
            "id": o.id,
            "asset": o.asset_id,
            "category": o.category,
            "category_chain": list(tax.chain(o.category)),
            "color": o.color,
            "material": o.material,
            "parent": o.parent_id,
            "position": [o.x, o.y, o.z],
            "size": [o.width, o.depth, o.height],
            "bbox2d": project_bbox2d(scene, o).as_list(),
        })
    return {"bounds": list(scene.bounds), "objects": objs}


def scene_from_json(d: dict) -> SceneGraph:
    objs = [ObjectInstance(o["id"], o["asset"], o["category"], o["color"], o["material"], *o["position"],
                           *o["size"], o["parent"]) for o in d["objects"]]
    return SceneGraph(tuple(objs), tuple(d["bounds"]))


def pair_to_json(pair: ScenePair, tax: Taxonomy | None = None) -> dict:
    return {"scene_q": scene_to_json(pair.scene_q, tax), "scene_a": scene_to_json(pair.scene_a, tax),
            "target_id": pair.target_id, "replacement_id": pair.replacement_id}


def pair_from_json(d: dict) -> ScenePair:
    return ScenePair(scene_from_json(d["scene_q"]), scene_from_json(d["scene_a"]), d["target_id"], d["replacement_id"])


# --- validation -----------------------------------------------------------


def scene_violations(scene: SceneGraph, config: SceneConfig, tax: Taxonomy | None = None,
                     placement: PlacementGraph | None = None) -> list[str]:
    tax = tax or default_taxonomy()
    placement = placement or default_placement()
    out = []
    for o in scene.objects:
        asset = tax._asset_index.get(o.asset_id)
        if asset is None or asset.category != o.category:
            out.append(f"{o.id}: asset mismatch")
        elif o.color not in asset.allowed_colors or o.material not in asset.allowed_materials:
            out.append(f"{o.id}: attribute not allowed for asset")
        if o.parent_id != FLOOR and o.parent_id not in scene:
            out.append(f"{o.id}: missing parent {o.parent_id}")
            continue
        if not placement.supports(scene.surface_category(o.parent_id), o.category, tax):
            out.append(f"{o.id}: {o.category} not placeable on {scene.surface_category(o.parent_id)}")
        if not _inside(o.rect, scene.surface_rect(o.parent_id)):
            out.append(f"{o.id}: footprint leaves its surface")
    for o in scene.objects:  # parent chains must reach the floor
        seen, node = set(), o
        while node.parent_id != FLOOR and node.parent_id in scene:
            if node.id in seen:
                out.append(f"{o.id}: placement cycle")
                break
            seen.add(node.id)
            node = scene[node.parent_id]
    objs = scene.objects
    for i, a in enumerate(objs):
        for b in objs[i + 1:]:
            if a.parent_id == b.parent_id and footprint_gap(a.rect, b.rect) < config.min_gap - 1e-9:
                out.append(f"{a.id},{b.id}: siblings closer than {config.min_gap}")
    if max_divergence([o.category for o in objs], tax) > config.max_divergence:
        out.append("divergence bound exceeded")
    return out


def pair_violations(pair: ScenePair, config: SceneConfig, tax: Taxonomy | None = None,
                    placement: PlacementGraph | None = None) -> list[str]:
    out = scene_violations(pair.scene_q, config, tax, placement)
    out += scene_violations(pair.scene_a, config, tax, placement)
    q, a = pair.scene_q, pair.scene_a
    if len(q) != len(a):
        out.append("object counts differ")
    q_only = {o.id for o in q.objects} - {o.id for o in a.objects}
    a_only = {o.id for o in a.objects} - {o.id for o in q.objects}
    if q_only != {pair.target_id} or a_only != {pair.replacement_id}:
        out.append(f"difference is not exactly one object: {sorted(q_only)} vs {sorted(a_only)}")
        return out
    for o in q.objects:
        if o.id != pair.target_id and a[o.id] != o:
            out.append(f"{o.id} changed between scenes")
    t, r = q[pair.target_id], a[pair.replacement_id]
    if (t.parent_id, t.x, t.y) != (r.parent_id, r.x, r.y):
        out.append("replacement moved")
    if t.category == r.category and (t.color, t.material) == (r.color, r.material):
        out.append("replacement identical to target")
    if q.children_of(t.id):
        out.append("target supports other objects")
    return out
