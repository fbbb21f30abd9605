"""
Zero-phase filtering
====================

The windowed-sinc FIR filters used for preprocessing and the Butterworth
band-pass used for detection, checked against their ideal responses.
"""

# %%
import numpy as np

from artifact.preprocess import apply_fir, butterworth_bandpass, fir_order, fir_taps

fs = 2500.0
t = np.arange(int(4 * fs)) / fs

# %%
# A 250 Hz lowpass of order 3 * floor(fs / fc).  Running it forward and
# backward squares the magnitude response and cancels the phase.
order = fir_order(fs, 250)
taps = fir_taps("lowpass", 250, fs, order)
print(f"order {order}, tap sum {taps.sum():.12f}")
for f in (60, 250, 400):
    x = np.sin(2 * np.pi * f * t)
    y = apply_fir(x[None], taps, "twopass")[0]
    gain = np.sqrt(np.mean(y[500:-500] ** 2) / np.mean(x[500:-500] ** 2))
    print(f"{f:4d} Hz: {20 * np.log10(gain):7.1f} dB")

# %%
# No lag: the cross-correlation between input and output peaks at zero.
x = np.random.default_rng(0).standard_normal(t.size)
y = apply_fir(x[None], taps, "twopass")[0]
lags = np.arange(-10, 11)
print("peak lag:", lags[np.argmax([np.dot(x[50 + l:-50 + l], y[50:-50]) for l in lags])])

# %%
# The order-3 Butterworth band-pass over 2-15 Hz, single pass.
for f in (1, 2, 8, 15, 50):
    x = np.sin(2 * np.pi * f * np.arange(int(20 * fs)) / fs)
    y = butterworth_bandpass(x, fs, 2, 15, 3, "onepass")
    tail = slice(int(10 * fs), None)
    print(f"{f:3d} Hz: gain {np.std(y[tail]) / np.std(x[tail]):.3f}")
