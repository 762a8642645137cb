"""
Energy class limits and the renovation headroom feature
========================================================

Latvian residential energy classes are defined by heating-energy ceilings
(kWh per m2 per year) that depend on the heated-area band.  The difference
between the initial and target class ceilings is a single number that says
how much a planned renovation actually has to achieve; the toolkit derives
it as an extra model feature.
"""

from retrokit.energy import ENERGY_CLASSES, class_delta, default_energy_table

table = default_energy_table()

# The same letter grade means different consumption depending on size:
# a class C ceiling is stricter for a large building than for a cottage.
print("class ceilings in kWh/m2/year")
print(f"{'area':>8} " + " ".join(f"{c:>7}" for c in ENERGY_CLASSES))
for area in (90.0, 180.0, 320.0):
    limits = [table.limit(c, area) for c in ENERGY_CLASSES]
    print(f"{area:8.0f} " + " ".join(f"{v:7.2f}" for v in limits))

# The delta is the ceiling headroom a renovation must close.  It is positive
# for genuine improvements and antisymmetric by construction.
print()
print("renovation headroom, initial E -> target C")
for area in (100.0, 300.0):
    print(f"  {area:5.0f} m2: {class_delta('E', 'C', area):6.1f} kWh/m2/year")

print("reversing the direction flips the sign:",
      class_delta("C", "E", 100.0))

# Within one area band the delta never changes; crossing a band boundary
# re-prices every class.
print()
print("delta E->C at 119 m2:", class_delta("E", "C", 119.0))
print("delta E->C at 121 m2:", class_delta("E", "C", 121.0))
