"""Energy performance class bands and consumption deltas.

Latvian regulations grade residential buildings into classes A+ through F,
with per-class consumption limits (kWh per m2 per year) that depend on the
heated area band.  The jump between two classes, evaluated at a building's
area, is a useful scalar feature: it approximates how much consumption a
retrofit must shave off.

Class F has no regulatory ceiling; the shipped table carries a surrogate
limit of 1.25x the class E limit of the same band so deltas stay finite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

ENERGY_CLASSES = ("A+", "A", "B", "C", "D", "E", "F")

#: Ordinal codes, best class first.  Used by the feature encoder.
ENERGY_CLASS_CODES = {name: i for i, name in enumerate(ENERGY_CLASSES)}


class EnergyTableError(ValueError):
    """Malformed class table or query outside its domain."""


@dataclass(frozen=True)
class EnergyBand:
    """Consumption limits for one heated-area band.

    ``upper_area`` is the band's inclusive upper edge in m2, or None for the
    open-ended top band.
    """

    upper_area: float | None
    limits: dict[str, float]

    def __post_init__(self) -> None:
        missing = [c for c in ENERGY_CLASSES if c not in self.limits]
        if missing:
            raise EnergyTableError(f"band is missing limits for classes {missing}")
        extra = sorted(set(self.limits) - set(ENERGY_CLASSES))
        if extra:
            raise EnergyTableError(f"band has limits for unknown classes {extra}")
        values = [self.limits[c] for c in ENERGY_CLASSES]
        if any(v <= 0 or not math.isfinite(v) for v in values):
            raise EnergyTableError("limits must be finite and positive")
        if any(a >= b for a, b in zip(values, values[1:])):
            raise EnergyTableError("limits must increase strictly from A+ to F")


@dataclass(frozen=True)
class EnergyClassTable:
    """Area-banded class limits; bands ordered by ascending upper edge."""

    bands: tuple[EnergyBand, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bands", tuple(self.bands))
        if not self.bands:
            raise EnergyTableError("table needs at least one band")
        edges = [b.upper_area for b in self.bands]
        if edges[-1] is not None:
            raise EnergyTableError("last band must be open-ended (upper_area null)")
        finite = edges[:-1]
        if any(e is None for e in finite):
            raise EnergyTableError("only the last band may be open-ended")
        if any(a >= b for a, b in zip(finite, finite[1:])):  # type: ignore[operator]
            raise EnergyTableError("band edges must increase strictly")

    def band_for(self, area: float) -> EnergyBand:
        """Band containing the area.  Areas below the first band's nominal
        range still use the first band; edges are inclusive on the left band.
        """
        if not math.isfinite(area) or area <= 0:
            raise EnergyTableError(f"area must be finite and positive, got {area!r}")
        for band in self.bands:
            if band.upper_area is None or area <= band.upper_area:
                return band
        raise AssertionError("unreachable: last band is open-ended")

    def limit(self, energy_class: str, area: float) -> float:
        if energy_class not in ENERGY_CLASS_CODES:
            raise EnergyTableError(
                f"unknown energy class {energy_class!r}, expected one of {list(ENERGY_CLASSES)}"
            )
        return self.band_for(area).limits[energy_class]

    def class_delta(self, initial: str, final: str, area: float) -> float:
        """Consumption headroom released by moving initial -> final at this area.

        Positive when the final class is better (lower ceiling).  Antisymmetric
        in (initial, final) and piecewise constant in area within a band.
        """
        return self.limit(initial, area) - self.limit(final, area)

    def to_dict(self) -> dict:
        return {
            "classes": list(ENERGY_CLASSES),
            "bands": [
                {"upper_area": b.upper_area, "limits": dict(b.limits)} for b in self.bands
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnergyClassTable":
        bands = tuple(
            EnergyBand(
                upper_area=None if b["upper_area"] is None else float(b["upper_area"]),
                limits={k: float(v) for k, v in b["limits"].items()},
            )
            for b in d["bands"]
        )
        return cls(bands=bands)


_DEFAULT: EnergyClassTable | None = None


def default_energy_table() -> EnergyClassTable:
    """The shipped Latvian residential table (three area bands)."""
    global _DEFAULT
    if _DEFAULT is None:
        raw = resources.files("retrokit._data").joinpath("latvian_energy_classes.json")
        _DEFAULT = EnergyClassTable.from_dict(json.loads(raw.read_text(encoding="utf-8")))
    return _DEFAULT


def class_delta(initial: str, final: str, area: float) -> float:
    """``EnergyClassTable.class_delta`` against the shipped table."""
    return default_energy_table().class_delta(initial, final, area)
