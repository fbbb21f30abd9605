import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from artifact.recording import (ChannelError, Recording, TrialIndex, concatenate_trials, global_column,
                                load_csv, select_channels, split_trials, trial_index, write_csv)


def three_trials():
    rng = np.random.default_rng(0)
    return Recording(("A", "B", "VEOG"), 100.0, tuple(rng.standard_normal((3, 100)) for _ in range(3)))


def test_recording_validation():
    with pytest.raises(ValueError):
        Recording(("A", "A"), 100, (np.zeros((2, 5)),))
    with pytest.raises(ValueError):
        Recording(("A",), 0, (np.zeros((1, 5)),))
    with pytest.raises(ValueError):
        Recording(("A", "B"), 100, (np.zeros((3, 5)),))
    with pytest.raises(ValueError):
        Recording(("A",), 100, (np.zeros((1, 0)),))
    with pytest.raises(ChannelError):
        Recording(("A",), 100, (np.zeros((1, 5)),), eog_labels=("VEOG",))


def test_trials_are_read_only():
    rec = three_trials()
    with pytest.raises(ValueError):
        rec.trials[0][0, 0] = 1.0


def test_default_eog_labels():
    assert three_trials().eog_labels == ("VEOG",)


def test_concatenate_lengths_and_identity():
    rec = three_trials()
    assert concatenate_trials(rec).shape == (3, 300)
    single = Recording(("A",), 10, (np.arange(5.0)[None],))
    np.testing.assert_array_equal(concatenate_trials(single), single.trials[0])


def test_concatenate_index_oracle():
    rec = three_trials()
    X = concatenate_trials(rec)
    col = global_column(rec.trial_lengths, TrialIndex(1, 5))
    assert col == rec.trial_lengths[0] + 5
    np.testing.assert_array_equal(X[:, col], rec.trials[1][:, 5])
    assert trial_index(rec.trial_lengths, col) == TrialIndex(1, 5)


def test_resegment_reproduces_trials():
    rec = three_trials()
    parts = split_trials(concatenate_trials(rec), rec.trial_lengths)
    for a, b in zip(parts, rec.trials):
        np.testing.assert_array_equal(a, b)


def test_select_channels_patterns():
    labels = tuple(f"E{i}" for i in range(64)) + ("Audio",)
    rec = Recording(labels, 100, (np.zeros((65, 4)),))
    assert select_channels(rec, ["all", "-Audio"]).n_channels == 64
    eog = select_channels(three_trials(), ["VEOG", "B"])
    assert eog.labels == ("B", "VEOG")
    with pytest.raises(ChannelError):
        select_channels(rec, ["Zz9"])
    assert select_channels(rec, ["all", "-Zz9"]).n_channels == 65


@given(st.lists(st.sampled_from(["all", "A", "B", "VEOG", "-A", "-B", "-VEOG", "-X"]), min_size=1, max_size=5))
def test_select_channels_idempotent(pattern):
    rec = three_trials()
    try:
        once = select_channels(rec, pattern)
    except ChannelError:
        return
    assert select_channels(once, pattern).equals(once)


def test_load_csv_shape_and_ragged(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1,2\n3,4\n5,6\n7,8\n")
    rec = load_csv(p, fs=100)
    assert rec.n_trials == 1 and rec.trials[0].shape == (2, 4)
    rows = load_csv(p, fs=100, channels_as="rows")
    assert rows.trials[0].shape == (4, 2)
    p.write_text("1,2\n3\n")
    with pytest.raises(ValueError, match="ragged"):
        load_csv(p, fs=100)
    p.write_text("1,x\n")
    with pytest.raises(ValueError):
        load_csv(p, fs=100)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 20)),
              elements=st.floats(-1e12, 1e12, allow_nan=False)))
def test_csv_round_trip_exact(tmp_path_factory, data):
    p = tmp_path_factory.mktemp("csv") / "r.csv"
    labels = tuple(f"Ch{i}" for i in range(data.shape[0]))
    rec = Recording(labels, 250.0, (data,))
    back = load_csv(write_csv(rec, p), fs=250.0)
    assert back.labels == labels
    np.testing.assert_array_equal(back.trials[0], data)
