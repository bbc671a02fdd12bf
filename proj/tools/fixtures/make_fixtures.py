"""Writes the synthetic sample datasets under data/."""
import csv
import datetime as dt
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parents[2] / "data"


def marketing(rng, n=400):
    education = ["Graduation", "PhD", "Master", "Basic", "2n Cycle"]
    marital = ["Married", "Together", "Single", "Divorced", "Widow"]
    rows = []
    start = dt.date(2012, 7, 30)
    for i in range(n):
        birth = int(rng.integers(1945, 1997))
        edu = education[rng.choice(5, p=[0.5, 0.22, 0.16, 0.03, 0.09])]
        status = marital[rng.choice(5, p=[0.39, 0.26, 0.21, 0.1, 0.04])]
        income = None if rng.random() < 0.03 else round(abs(float(rng.normal(52000, 21000))), 0)
        kids = int(rng.choice(3, p=[0.58, 0.4, 0.02]))
        teens = int(rng.choice(3, p=[0.52, 0.46, 0.02]))
        joined = start + dt.timedelta(days=int(rng.integers(0, 700)))
        recency = int(rng.integers(0, 100))
        scale = (income or 30000) / 52000
        wines = int(max(0, rng.gamma(1.2, 250 * scale)))
        meat = int(max(0, rng.gamma(1.0, 160 * scale)))
        web = int(rng.poisson(4 * scale + 1))
        store = int(rng.poisson(6 * scale + 1))
        accepted = rng.random() < 0.07 + 0.1 * (scale > 1.3)
        response = rng.random() < 0.15
        rows.append([
            i + 1, birth, edu, status, "NA" if income is None else f"{income:.1f}", kids, teens,
            joined.isoformat(), recency, wines, meat, web, store,
            "TRUE" if accepted else "FALSE", "TRUE" if response else "FALSE",
        ])
    header = ["ID", "Year_Birth", "Education", "Marital_Status", "Income", "Kidhome", "Teenhome",
              "Dt_Customer", "Recency", "MntWines", "MntMeatProducts", "NumWebPurchases",
              "NumStorePurchases", "AcceptedCmp", "Response"]
    with open(OUT / "marketing_campaign.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def infant_mortality(rng):
    rows = []
    level = 14.0
    seasonal = np.array([0.9, 0.6, 0.2, -0.1, -0.4, -0.7, -0.6, -0.3, 0.0, 0.1, 0.4, 0.8])
    noise_prev = 0.0
    for year in range(2005, 2020):
        for month in range(1, 13):
            level -= 0.035
            e = rng.normal(0, 0.35)
            noise = e + 0.4 * noise_prev
            noise_prev = e
            rows.append([year, month, round(level + seasonal[month - 1] + noise, 2)])
    with open(OUT / "infant_mortality.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["year", "month", "rate"])
        w.writerows(rows)


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(20230601)
    marketing(rng)
    infant_mortality(rng)
