"""Shared fabricated renovation survey used by the demo scripts.

Small, plausible, and deliberately patterned: poorly performing large
buildings tend to need heavier interventions, so every demo has real
structure to find.  Not a benchmark; just something the scripts can load.
"""

import numpy as np

from retrokit.schema import BuildingRecord, ColumnSpec, DatasetSchema

LABELS = [
    "building_fabric",
    "heating_and_lighting_controls",
    "dhw_upgrades",
    "heating_system_installation",
]

SCHEMA = DatasetSchema(
    id="demo-survey",
    version=1,
    columns=[
        ColumnSpec("area", "numerical", unit="m2"),
        ColumnSpec("region", "categorical"),
        ColumnSpec("class_before", "categorical"),
        ColumnSpec("class_after", "categorical"),
        ColumnSpec("insulated", "boolean"),
        *[ColumnSpec(name, "boolean", "label") for name in LABELS],
    ],
)

REGIONS = ["Riga", "Kurzeme", "Latgale", "Vidzeme", "Zemgale"]


def build_survey(n: int = 240, seed: int = 9) -> list[BuildingRecord]:
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(n):
        area = float(rng.uniform(45, 380))
        before = ["D", "E", "F"][int(rng.integers(3))]
        after = ["A+", "A", "B", "C"][int(rng.integers(4))]
        insulated = bool(rng.uniform() < 0.45)
        big_and_poor = area > 220 and before == "F"
        records.append(
            BuildingRecord(
                {
                    "area": area,
                    "region": REGIONS[int(rng.integers(len(REGIONS)))],
                    "class_before": before,
                    "class_after": str(after),
                    "insulated": insulated,
                    "building_fabric": not insulated or rng.uniform() < 0.25,
                    "heating_and_lighting_controls": after in ("A+", "A"),
                    "dhw_upgrades": bool(big_and_poor and rng.uniform() < 0.75),
                    "heating_system_installation": bool(
                        before == "F" and not insulated and rng.uniform() < 0.6
                    ),
                }
            )
        )
    return records
