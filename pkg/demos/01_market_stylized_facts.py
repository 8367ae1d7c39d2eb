"""Simulate the bidding market and measure the stylized facts of its returns.

Runs the same system under the exact-martingale speculator rule and under
the numerically solved price-efficient profile, then compares tail
exponents, return autocorrelations, and magnitude clustering. The
price-efficient profile carries a slight boundary-repelling drift; that one
detail decides whether the demand lingers in the boundary zones or sweeps
them uniformly, and with it the whole shape of the return distribution.
"""

from pathlib import Path

import numpy as np

from effbid import (
    ModelParams,
    autocorrelation,
    ccdf,
    hill_tail_exponent,
    log_price_profile,
    log_returns,
    simulate,
    simulate_from_profile,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# A tenth of the full-size run keeps this demo under ~20 seconds.
params = ModelParams(n_speculators=2000, n_random=2, seed=7)
steps = 400_000

print(f"market: {params.n_speculators} speculators, {params.n_random} coin flippers")
print(f"simulating {steps} steps under two speculator rules...\n")

runs = {}
runs["martingale"] = simulate(params, steps)
profile = log_price_profile(params)
runs["price-efficient"] = simulate_from_profile(profile, params, steps)

for name, run in runs.items():
    series = log_returns(run)
    magnitudes = np.abs(series.values)
    fit = hill_tail_exponent(magnitudes, tail_fraction=0.01)
    acf_r = autocorrelation(series.values, 50)
    acf_m = autocorrelation(magnitudes, 50)
    band = 3 / np.sqrt(len(series))
    n = run.n_total
    boundary = (run.demands < n // 50).mean() + (run.demands > n - n // 50).mean()

    print(f"--- {name} rule ---")
    print(f"  returns: {len(series)} usable, {series.skipped} skipped at the boundary")
    print(f"  tail exponent (Hill, top 1%): xi = {fit.xi:.2f} +/- {fit.standard_error:.2f}")
    print(f"  max |ACF_r| lags 1..50:       {np.abs(acf_r[1:]).max():.4f}  (iid band {band:.4f})")
    print(f"  magnitude ACF above band:     {(acf_m[1:] > band).mean():.0%} of lags")
    print(f"  time spent near boundaries:   {boundary:.1%} (uniform would be 4.0%)")

    curve = ccdf(magnitudes)
    path = OUT / f"ccdf_{name.replace('-', '_')}.csv"
    with open(path, "w") as fh:
        fh.write("magnitude,ccdf\n")
        for x, p in zip(curve.thresholds[::20], curve.probabilities[::20]):
            fh.write(f"{float(x)!r},{float(p)!r}\n")
    print(f"  CCDF written to {path}\n")

print("The martingale rule pins the demand near the boundaries (heavy")
print("occupancy, distorted tail); the price-efficient profile keeps the")
print("occupancy near-uniform and the tail exponent near 2.")
