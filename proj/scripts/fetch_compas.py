#!/usr/bin/env python3
"""Download the ProPublica COMPAS two-year table and prepare it for auditing.

Applies the standard row filter (screening within 30 days of arrest, known
recidivism flag, no ordinary-traffic charges, a valid score), derives the
jail length of stay in days, and writes an audit-ready CSV whose column
names match configs/compas_schema.json.
"""

import argparse
import hashlib
import sys
from pathlib import Path

import pandas as pd

DEFAULT_URL = ("https://raw.githubusercontent.com/propublica/"
               "compas-analysis/master/compas-scores-two-years.csv")

SOURCE_COLUMNS = [
    "age", "priors_count", "c_charge_degree", "sex", "race",
    "two_year_recid", "c_jail_in", "c_jail_out",
    "days_b_screening_arrest", "is_recid", "score_text",
]


def standard_filter(df: pd.DataFrame) -> pd.DataFrame:
    keep = (
        df["days_b_screening_arrest"].between(-30, 30)
        & (df["is_recid"] != -1)
        & (df["c_charge_degree"] != "O")
        & (df["score_text"] != "N/A")
    )
    return df[keep].copy()


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--url", default=DEFAULT_URL, help="source CSV location")
    ap.add_argument("--raw", type=Path, default=None,
                    help="already-downloaded source CSV (skips the download)")
    ap.add_argument("--out", type=Path,
                    default=Path("data/compas-scores-two-years.csv"))
    args = ap.parse_args()

    if args.raw is not None:
        blob = args.raw.read_bytes()
    else:
        import urllib.request
        print(f"downloading {args.url}")
        with urllib.request.urlopen(args.url) as resp:
            blob = resp.read()
    print(f"source sha256 {hashlib.sha256(blob).hexdigest()} ({len(blob)} bytes)")

    import io
    df = pd.read_csv(io.BytesIO(blob))
    missing = [c for c in SOURCE_COLUMNS if c not in df.columns]
    if missing:
        print(f"source is missing expected columns: {missing}", file=sys.stderr)
        return 1
    print(f"rows in source: {len(df)}")

    df = standard_filter(df)
    print(f"rows after standard filter: {len(df)}")

    jail_in = pd.to_datetime(df["c_jail_in"], errors="coerce")
    jail_out = pd.to_datetime(df["c_jail_out"], errors="coerce")
    stay = (jail_out - jail_in).dt.days

    out = pd.DataFrame({
        "race": df["race"],
        "Age": df["age"],
        "PriorCounts": df["priors_count"],
        "ChargeDegree": df["c_charge_degree"],
        "Sex": df["sex"],
        "LengthOfStay": stay,
        "two_year_recid": df["two_year_recid"],
    })

    counts = out["race"].value_counts()
    aa = int(counts.get("African-American", 0))
    ca = int(counts.get("Caucasian", 0))
    print(f"group rows: African-American {aa}, Caucasian {ca}")
    for name, got, want in (("African-American", aa, 3175), ("Caucasian", ca, 2103)):
        if abs(got - want) > 0.02 * want:
            print(f"{name} count {got} is >2% away from the expected {want}; "
                  "the upstream file may have changed", file=sys.stderr)
            return 1

    args.out.parent.mkdir(parents=True, exist_ok=True)
    out.to_csv(args.out, index=False)
    print(f"wrote {args.out} ({len(out)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
