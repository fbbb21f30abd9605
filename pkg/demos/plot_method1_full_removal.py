"""
Full removal of blink components
================================

Simulate a recording with blinks leaking into the frontal channels, find
the components that track the EOG and drop them from the whole recording.
"""

# %%
# A synthetic recording: eight EEG channels, VEOG and HEOG, five blinks.
# The blink loads heavily on Fp1, Fp2 and Fz.
from pathlib import Path

import numpy as np

from artifact import SynthSpec, method1_full_removal, synth_contaminated_recording
from artifact.report import emit_correlation_report, emit_signal_plot

out = Path(__file__).parent / "output" / "method1"
out.mkdir(parents=True, exist_ok=True)

rec, truth = synth_contaminated_recording(SynthSpec(seed=1))
veog = rec.channel("VEOG")
for ch in ("Fp1", "Fz", "FC1"):
    print(f"corr({ch}, VEOG) before: {np.corrcoef(rec.channel(ch), veog)[0, 1]:+.3f}")

# %%
# Decompose the EEG channels, correlate every component with both EOG
# channels and flag the components whose summed |corr| is an outlier.
res = method1_full_removal(rec)
print("sum |corr| per component:", np.round(res.report_before.abs_sums, 3))
print("selected for removal:", sorted(res.selected))

# %%
# After cleaning, the frontal channels no longer follow the EOG.  A fresh
# decomposition of the cleaned data shows no remaining EOG-like component.
for ch in ("Fp1", "Fz"):
    print(f"corr({ch}, VEOG) after:  {np.corrcoef(res.cleaned.channel(ch), veog)[0, 1]:+.3f}")
print(f"total sum |corr|: {res.report_before.total:.3f} -> {res.report_after.total:.3f}")

# %%
# Bar charts of the sums before and after, plus the signal traces.
emit_correlation_report(res, out)
emit_signal_plot(rec, res.cleaned, ["Fp1", "Fz"], (0.0, 10.0), out)
print("figures written to", out)
