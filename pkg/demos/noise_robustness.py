"""Final error under additive intensity noise.

For each SNR the median NMSE over a handful of trials is printed together
with the least-squares slope of log10(median NMSE) against SNR in dB.
"""
import numpy as np

from safpr import experiments as ex

spec = ex.ExperimentSpec(kind=ex.SNR_SWEEP, n=100, field="real", ratios=(4.0,),
                         snrs=(20, 30, 40, 50), trials=20, seed=1)
rows = ex.run_snr_sweep(spec)

for (algo, ratio, snr), med in sorted(ex.summarize_snr(rows).items(), key=lambda kv: kv[0][2]):
    print(f"SNR {snr:4.0f} dB   median NMSE {med:.3e}")

slope = ex.snr_slope(rows, "saf", 4.0)
print(f"slope of log10(NMSE) vs SNR: {slope:.3f} per dB")
print("(a slope of -0.1 means the error falls tenfold for every 10 dB)")
