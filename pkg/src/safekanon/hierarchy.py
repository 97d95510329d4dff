"""Generalization hierarchies and the recoding schemes built on them.

Hierarchy documents are JSON::

    {"attributes": [
        {"name": "age", "kind": "numeric",
         "levels": [[0, 30, 60, 120], [0, 60, 120]]},
        {"name": "sex", "kind": "categorical",
         "levels": [{"M": "person", "F": "person"}]}
    ]}

Level 0 (identity) is implicit. A numeric level is a strictly increasing
breakpoint list whose intervals are ``[b_i, b_{i+1})``; a categorical level
maps every raw value to a label. Each level must coarsen the one before it.
If the last listed level still has more than one class, a root level mapping
everything to ``"*"`` is appended.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .data import CATEGORICAL, NUMERIC, Row
from .errors import ParseError, RecodingError

ROOT = "*"


def format_number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def interval_label(lo: float, hi: float) -> str:
    return f"[{format_number(lo)},{format_number(hi)})"


@dataclass(frozen=True)
class AttributeHierarchy:
    name: str
    kind: str
    # numeric: tuple of breakpoint tuples; categorical: tuple of dicts
    levels: tuple

    @property
    def top(self) -> int:
        return len(self.levels)

    @property
    def domain(self) -> frozenset | None:
        if self.kind == CATEGORICAL and self.levels and self.levels[0] is not None:
            return frozenset(self.levels[0])
        return None

    def generalize(self, value: str, level: int) -> str:
        if not 0 <= level <= self.top:
            raise RecodingError(self.name, value, f"level {level} outside [0, {self.top}]")
        if self.kind == NUMERIC:
            return self._numeric(value, level)
        return self._categorical(value, level)

    def _numeric(self, value: str, level: int) -> str:
        try:
            x = float(value)
        except ValueError:
            raise RecodingError(self.name, value, "is not numeric") from None
        if self.levels and self.levels[0] is not None:
            first = self.levels[0]
            if not first[0] <= x < first[-1]:
                raise RecodingError(self.name, value, f"outside [{first[0]}, {first[-1]})")
        if level == 0:
            return value
        cuts = self.levels[level - 1]
        if cuts is None:
            return ROOT
        i = bisect.bisect_right(cuts, x) - 1
        return interval_label(cuts[i], cuts[i + 1])

    def _categorical(self, value: str, level: int) -> str:
        domain = self.domain
        if domain is not None and value not in domain:
            raise RecodingError(self.name, value)
        if level == 0:
            return value
        mapping = self.levels[level - 1]
        return ROOT if mapping is None else mapping[value]


def _parse_numeric(name: str, raw_levels) -> tuple:
    levels = []
    for i, cuts in enumerate(raw_levels, start=1):
        if not isinstance(cuts, list) or len(cuts) < 2:
            raise ParseError(f"{name}: level {i} needs at least two breakpoints")
        cuts = tuple(float(c) for c in cuts)
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ParseError(f"{name}: level {i} breakpoints must increase strictly")
        if levels:
            prev = levels[-1]
            if (cuts[0], cuts[-1]) != (prev[0], prev[-1]):
                raise ParseError(f"{name}: level {i} changes the outer range")
            if not set(cuts) <= set(prev):
                raise ParseError(f"{name}: level {i} does not coarsen level {i - 1}")
        levels.append(cuts)
    if not levels or len(levels[-1]) > 2:
        levels.append(None)
    return tuple(levels)


def _parse_categorical(name: str, raw_levels) -> tuple:
    levels: list = []
    for i, mapping in enumerate(raw_levels, start=1):
        if not isinstance(mapping, dict):
            raise ParseError(f"{name}: categorical level {i} must be an object")
        mapping = {str(k): str(v) for k, v in mapping.items()}
        if levels:
            prev = levels[-1]
            if set(mapping) != set(prev):
                raise ParseError(f"{name}: level {i} covers different values than level {i - 1}")
            image: dict[str, str] = {}
            for value, label in prev.items():
                if image.setdefault(label, mapping[value]) != mapping[value]:
                    raise ParseError(f"{name}: level {i} splits class {label!r} of level {i - 1}")
        levels.append(mapping)
    if not levels or len(set(levels[-1].values())) > 1:
        levels.append(None)
    return tuple(levels)


class HierarchySpec:
    """Per-attribute generalization ladders, in attribute order."""

    def __init__(self, attributes: Sequence[AttributeHierarchy]):
        self.attributes = tuple(attributes)
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ParseError("duplicate attribute names in hierarchy")
        self._index = {a.name: i for i, a in enumerate(self.attributes)}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "HierarchySpec":
        try:
            entries = doc["attributes"]
        except (KeyError, TypeError):
            raise ParseError("hierarchy document needs an 'attributes' list") from None
        attrs = []
        for entry in entries:
            name, kind = entry.get("name"), entry.get("kind")
            raw = entry.get("levels", [])
            if not isinstance(name, str):
                raise ParseError("attribute without a name")
            if kind == NUMERIC:
                attrs.append(AttributeHierarchy(name, kind, _parse_numeric(name, raw)))
            elif kind == CATEGORICAL:
                attrs.append(AttributeHierarchy(name, kind, _parse_categorical(name, raw)))
            else:
                raise ParseError(f"{name}: kind must be 'numeric' or 'categorical', got {kind!r}")
        return cls(attrs)

    @classmethod
    def from_json(cls, text: str) -> "HierarchySpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid hierarchy JSON: {exc}") from None
        return cls.from_dict(doc)

    @classmethod
    def read(cls, path: str | Path) -> "HierarchySpec":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def top_levels(self) -> tuple[int, ...]:
        return tuple(a.top for a in self.attributes)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ParseError(f"column {name!r} has no hierarchy") from None


@dataclass(frozen=True)
class RecodingScheme:
    """Chosen generalization level per hierarchy attribute."""

    levels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(x) for x in self.levels))

    def check(self, h: HierarchySpec) -> None:
        if len(self.levels) != len(h.attributes):
            raise ParseError(f"scheme has {len(self.levels)} levels for {len(h.attributes)} attributes")
        for lvl, attr in zip(self.levels, h.attributes):
            if not 0 <= lvl <= attr.top:
                raise ParseError(f"{attr.name}: level {lvl} outside [0, {attr.top}]")

    def describe(self, h: HierarchySpec) -> dict[str, int]:
        return dict(zip(h.names, self.levels))

    @classmethod
    def parse(cls, text: str, h: HierarchySpec) -> "RecodingScheme":
        """Read ``"1,0,2"`` (attribute order) or ``"age=1,sex=0"`` (unnamed attributes stay at 0).

        A bare ``"top"`` generalizes every attribute fully.
        """
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if parts == ["top"] and len(h.attributes) != 1:
            parts = ["top"] * len(h.attributes)
        if parts and all("=" in p for p in parts):
            levels = [0] * len(h.attributes)
            for p in parts:
                name, value = (s.strip() for s in p.split("=", 1))
                levels[h.index(name)] = _level(value, h.attributes[h.index(name)])
        else:
            if len(parts) != len(h.attributes):
                raise ParseError(f"scheme {text!r} needs {len(h.attributes)} levels")
            levels = [_level(v, a) for v, a in zip(parts, h.attributes)]
        scheme = cls(tuple(levels))
        scheme.check(h)
        return scheme


def _level(text: str, attr: AttributeHierarchy) -> int:
    if text == "top":
        return attr.top
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{attr.name}: bad level {text!r}") from None


def recode(g: RecodingScheme, h: HierarchySpec, t: Row) -> Row:
    """Generalize a tuple laid out in hierarchy attribute order."""
    if len(t) != len(h.attributes):
        raise RecodingError("<tuple>", repr(t), f"has {len(t)} fields, hierarchy has {len(h.attributes)}")
    return tuple(a.generalize(v, lvl) for a, v, lvl in zip(h.attributes, t, g.levels))


def row_recoder(g: RecodingScheme, h: HierarchySpec, columns: Sequence[str]):
    """Return a function generalizing rows laid out in ``columns`` order."""
    g.check(h)
    positions = [h.index(c) for c in columns]
    missing = set(h.names) - set(columns)
    if missing:
        raise ParseError(f"dataset lacks hierarchy attributes: {sorted(missing)}")
    attrs = [(h.attributes[i], g.levels[i]) for i in positions]

    def apply(row: Row) -> Row:
        return tuple(a.generalize(v, lvl) for (a, lvl), v in zip(attrs, row))

    return apply
