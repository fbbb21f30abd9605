"""ICA-based removal of ocular artifacts from multichannel EEG."""

from .brainvision import BrainVisionError, load_brainvision, write_brainvision
from .ica import (Components, IcaModel, amari_index, apply_unmixing, fastica, load_model,
                  reconstruct, reconstruct_partial, save_model, whiten)
from .methods import (CleanResult, MethodOptions, ica_from_artifact_free_data, method1_full_removal,
                      method2_partial_removal, method3_artifact_free_unmixing, run_method)
from .msf import DetectConfig, Msf, create_msf, load_msf, msf_to_weights, save_msf, threshold_and_pad, zvalue_trace
from .preprocess import (PreprocessConfig, butterworth_bandpass, demean, detrend_linear, filter_fir,
                         preprocess_pipeline, rereference)
from .recording import (ChannelError, Recording, TrialIndex, concatenate_trials, load_csv, select_channels,
                        split_trials, write_csv)
from .selection import CorrelationReport, corrcoeff_matrix, select_outlier_components, sum_abs_rows
from .synth import BlinkSpec, SynthSpec, synth_contaminated_recording

__version__ = "0.1.0"
