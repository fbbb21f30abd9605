"""
Removing blink components only where blinks occur
=================================================

Full removal also subtracts whatever brain activity the blink component
happened to capture.  Gating the removal with an artifact membership
function (MSF) leaves the blink-free stretches untouched.
"""

# %%
from pathlib import Path

import numpy as np

from artifact import SynthSpec, create_msf, method1_full_removal, method2_partial_removal, synth_contaminated_recording
from artifact.recording import concatenate_trials
from artifact.report import emit_signal_plot

out = Path(__file__).parent / "output" / "method2"
out.mkdir(parents=True, exist_ok=True)
rec, truth = synth_contaminated_recording(SynthSpec(seed=1))

# %%
# Detect blinks from the EOG channels.  The MSF is 1 inside a detected
# blink (padded by 0.1 s on each side) and 0 elsewhere.
msf = create_msf(rec)
print(f"flagged: {msf.flagged_fraction():.1%} of samples")

# %%
# Compare both methods.  Outside the MSF, Method 2 returns the input exactly.
X = concatenate_trials(rec)
full = concatenate_trials(method1_full_removal(rec).cleaned)
gated = concatenate_trials(method2_partial_removal(rec, msf).cleaned)
quiet = msf.concatenated() == 0
print("max |change| outside blinks, method 1:", f"{np.abs(full - X)[:, quiet].max():.3f} µV")
print("max |change| outside blinks, method 2:", f"{np.abs(gated - X)[:, quiet].max():.3f} µV")

# %%
# Inside the blinks, the large Fp1 peaks are gone.
fp1 = rec.index("Fp1")
before = np.abs(X[fp1, truth.blink_mask]).max()
after = np.abs(gated[fp1, truth.blink_mask]).max()
print(f"Fp1 blink peak: {before:.1f} µV -> {after:.1f} µV ({1 - after / before:.0%} lower)")

# %%
# The EOG panel shades the flagged samples.
cleaned = method2_partial_removal(rec, msf).cleaned
emit_signal_plot(rec, cleaned, ["Fp1", "Fz"], (0.0, 10.0), out, msf=msf)
print("figure written to", out / "signals.svg")
