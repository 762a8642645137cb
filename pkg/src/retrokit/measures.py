"""Vocabulary of retrofit measures and their grouping into output categories.

Raw datasets record very specific improvement strings ("Cavity wall
insulation", "Heating controls (programmer and TRVs)", ...).  The model works
at the level of four umbrella categories.  This module owns that grouping: a
measure map shipped as editable JSON data, a matcher that turns a bag of raw
strings into the four output flags, and the user-facing names/descriptions of
the categories.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

#: Canonical category ids, in label order.
CATEGORY_IDS = (
    "building_fabric",
    "heating_and_lighting_controls",
    "dhw_upgrades",
    "heating_system_installation",
)

UNMATCHED_POLICIES = ("error", "warn")


class MeasureMapError(ValueError):
    """Invalid measure map, or an unmatched measure under the error policy."""


def normalize_measure(text: str) -> str:
    """Matching key for a raw measure string: collapse whitespace, lowercase."""
    return " ".join(text.split()).lower()


@dataclass(frozen=True)
class RetrofitLabels:
    """The four output flags, one per retrofit category."""

    building_fabric: bool = False
    heating_and_lighting_controls: bool = False
    dhw_upgrades: bool = False
    heating_system_installation: bool = False

    def to_dict(self) -> dict[str, bool]:
        return {cid: getattr(self, cid) for cid in CATEGORY_IDS}

    def to_array(self) -> np.ndarray:
        return np.array([float(getattr(self, cid)) for cid in CATEGORY_IDS])


@dataclass(frozen=True)
class MeasureCategory:
    id: str
    display_name: str
    description: str
    measures: tuple[str, ...]


@dataclass(frozen=True)
class MeasureMap:
    """Immutable grouping of raw measure strings into the four categories."""

    categories: tuple[MeasureCategory, ...]
    unmatched_policy: str = "error"

    def __post_init__(self) -> None:
        problems = []
        ids = [c.id for c in self.categories]
        if ids != list(CATEGORY_IDS):
            problems.append(f"categories must be exactly {list(CATEGORY_IDS)} in order, got {ids}")
        if self.unmatched_policy not in UNMATCHED_POLICIES:
            problems.append(
                f"unmatched_policy must be one of {list(UNMATCHED_POLICIES)},"
                f" got {self.unmatched_policy!r}"
            )
        seen: dict[str, str] = {}
        for cat in self.categories:
            for raw in cat.measures:
                if not raw.strip():
                    problems.append(f"category {cat.id!r} contains a blank measure string")
                    continue
                key = normalize_measure(raw)
                if key in seen:
                    problems.append(
                        f"measure {raw!r} appears in both {seen[key]!r} and {cat.id!r}"
                    )
                else:
                    seen[key] = cat.id
        if problems:
            raise MeasureMapError("; ".join(problems))
        object.__setattr__(self, "_lookup", seen)

    def category(self, category_id: str) -> MeasureCategory:
        for c in self.categories:
            if c.id == category_id:
                return c
        raise MeasureMapError(f"unknown category {category_id!r}")

    def describe(self) -> dict[str, dict[str, str]]:
        """User-facing names and descriptions keyed by category id."""
        return {
            c.id: {"display_name": c.display_name, "description": c.description}
            for c in self.categories
        }

    def match(self, raw: str) -> str | None:
        """Category id for a raw measure string, or None if unknown."""
        return self._lookup.get(normalize_measure(raw))  # type: ignore[attr-defined]

    def to_dict(self) -> dict:
        return {
            "unmatched_policy": self.unmatched_policy,
            "categories": {
                c.id: {
                    "display_name": c.display_name,
                    "description": c.description,
                    "measures": list(c.measures),
                }
                for c in self.categories
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureMap":
        raw_cats = d.get("categories")
        if not isinstance(raw_cats, dict):
            raise MeasureMapError("map must have a 'categories' object")
        categories = tuple(
            MeasureCategory(
                id=cid,
                display_name=str(body.get("display_name", cid)),
                description=str(body.get("description", "")),
                measures=tuple(body.get("measures", [])),
            )
            for cid, body in raw_cats.items()
        )
        return cls(categories=categories, unmatched_policy=d.get("unmatched_policy", "error"))


def load_measure_map(path: str | Path | None = None) -> MeasureMap:
    """Load a measure map from JSON; without a path, the shipped default."""
    if path is None:
        raw = resources.files("retrokit._data").joinpath("uk_measure_map.json")
        return MeasureMap.from_dict(json.loads(raw.read_text(encoding="utf-8")))
    with open(path, encoding="utf-8") as fh:
        return MeasureMap.from_dict(json.load(fh))


def map_measures(raw_strings: list[str], measure_map: MeasureMap) -> RetrofitLabels:
    """Fold raw measure strings into the four category flags.

    A flag is set iff any string belongs to that category.  Matching is
    case-insensitive after whitespace normalization.  Unknown strings follow
    the map's policy: hard error, or warn and ignore.
    """
    flags = {cid: False for cid in CATEGORY_IDS}
    for raw in raw_strings:
        cid = measure_map.match(raw)
        if cid is None:
            if measure_map.unmatched_policy == "error":
                raise MeasureMapError(f"unmatched measure string: {raw!r}")
            warnings.warn(f"ignoring unmatched measure string: {raw!r}", stacklevel=2)
            continue
        flags[cid] = True
    return RetrofitLabels(**flags)
