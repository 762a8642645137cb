"""
From a messy CSV to clean train/val/test partitions
====================================================

Survey exports are never tidy: inconsistent spellings, missing cells,
the odd typo that turns a cottage into a stadium.  This walks the load,
harmonize, drop, flag, split sequence the command line wraps.
"""

import tempfile
from pathlib import Path

from retrokit.schema import (
    SplitSpec,
    drop_nulls,
    load_dataset,
    save_dataset,
    split,
    zscore_flags,
)

from _survey import SCHEMA, build_survey

workdir = Path(tempfile.mkdtemp(prefix="retrokit-demo-"))
raw_csv = workdir / "survey_raw.csv"

# fabricate an export, then rough it up the way real ones arrive
records = build_survey(120)
save_dataset(records, SCHEMA, raw_csv)
rows = raw_csv.read_text().splitlines()
rows[3] = rows[3].replace(rows[3].split(",")[1], "RIX", 1)   # regional code, not a name
cells = rows[7].split(","); cells[2] = ""                     # missing initial class
rows[7] = ",".join(cells)
rows[12] = rows[12].replace(rows[12].split(",")[0], "48000.0", 1)  # fat-fingered area
cells = rows[18].split(","); cells[4] = "maybe"                    # not a yes/no answer
rows[18] = ",".join(cells)
raw_csv.write_text("\n".join(rows) + "\n")

# value maps translate known spelling variants before any typed parsing;
# anything still unparseable is rejected row by row, never silently
result = load_dataset(raw_csv, SCHEMA, value_map={"region": {"RIX": "Riga"}})
print(f"loaded {len(result.records)} records, rejected {len(result.rejected)}")
for err in result.rejected:
    print(f"  row {err.row_index}: {err.column}: {err.message}")

kept, dropped = drop_nulls(result.records, ["class_before"], SCHEMA)
print(f"null policy removed {sum(dropped.values())} record(s): {dropped}")

# outlier flags are advisory; inspect, then decide
flags = zscore_flags(kept, "area", SCHEMA)
for i in flags:
    print(f"flagged row {i}: area = {kept[i]['area']:.0f} m2")
kept = [rec for i, rec in enumerate(kept) if i not in set(flags)]

parts = split(kept, SplitSpec(seed=7))
print(f"split -> train {len(parts.train)}, val {len(parts.val)}, test {len(parts.test)}")
print("the test indices are withheld from every later stage;")
print("training commands pin them to a digest file and refuse to run if it breaks")

clean_csv = workdir / "survey_clean.csv"
save_dataset(kept, SCHEMA, clean_csv)
print(f"clean table written to {clean_csv}")
