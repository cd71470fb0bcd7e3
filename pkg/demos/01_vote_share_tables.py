"""Vote shares from tweet counts, and how far each method lands from the result.

The bundled counts are the 2020 US tallies of positive, negative and neutral
tweets per party. Three count-based baselines turn them into vote shares;
the multifactor method turns two forecast values into shares instead. Every
method is then scored by mean absolute error against the certified result.
"""

from mfelect import election
from mfelect.sentiment import read_counts_csv

counts = read_counts_csv()
for c in counts.values():
    pct = c.percentages()
    print(f"{c.party:<11} {c.total:>10,d} tweets  "
          f"+{pct['positive']:.2f}%  -{pct['negative']:.2f}%  ={pct['neutral']:.2f}%")

# Forecast values of the daily median score for each party on election day.
forecasts = {"Democratic": 0.004256, "Republican": -0.010304}
report = election.evaluate(counts, forecasts, election.ReferenceResults.load())

print("\nshares (%)")
print(f"{'method':<18}{'Democratic':>12}{'Republican':>12}{'total':>9}")
for name, s in report.methods.items():
    print(f"{name:<18}{s['Democratic']:>12.2f}{s['Republican']:>12.2f}{s.total:>9.2f}")

# The net-sentiment baseline is rescaled by the sum of its raw values, which
# is why it can leave the 0-100 range when one party's net sentiment is
# negative.
raw = report.methods["actual_sentiment"].raw
print(f"\nraw net sentiment: D {raw['Democratic']:.3f}%, R {raw['Republican']:.3f}%")

print("\nmean absolute error (pp)")
for name, e in report.errors().items():
    print(f"{name:<18}{e.mean:>8.2f}")
