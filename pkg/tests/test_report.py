import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from artifact.methods import method1_full_removal, method2_partial_removal
from artifact.msf import create_msf
from artifact.recording import load_csv
from artifact.report import (emit_correlation_report, emit_signal_plot, read_correlation_csv,
                             signal_svg)

from conftest import artifact_free_recording


def assert_self_contained(path):
    text = path.read_text(encoding="utf-8")
    ET.fromstring(text.encode("utf-8"))
    body = text.replace('xmlns="http://www.w3.org/2000/svg"', "")
    for ref in ("href", "url(", "<image", "<script", "http://", "https://"):
        assert ref not in body


@pytest.fixture(scope="module")
def result(blink_data):
    return method1_full_removal(blink_data[0])


def test_correlation_report_files(result, tmp_path):
    csv_path, svg_path = emit_correlation_report(result, tmp_path)
    before, after, selected = read_correlation_csv(csv_path)
    k = result.report_before.abs_sums.size
    assert before.size == k
    np.testing.assert_array_equal(before, result.report_before.abs_sums)
    after_k = result.report_after.abs_sums.size
    np.testing.assert_array_equal(after[:after_k], result.report_after.abs_sums)
    assert all(math.isnan(v) for v in after[after_k:])
    assert selected == result.selected
    assert_self_contained(svg_path)
    assert load_csv(csv_path, fs=1.0).n_samples == k


def test_noop_columns_agree(tmp_path):
    res = method1_full_removal(artifact_free_recording())
    assert res.selected == frozenset()
    before, after, _ = read_correlation_csv(emit_correlation_report(res, tmp_path)[0])
    np.testing.assert_allclose(before, after, atol=1e-8)


def test_signal_plot(blink_data, tmp_path):
    rec, _ = blink_data
    msf = create_msf(rec)
    cleaned = method2_partial_removal(rec, msf).cleaned
    path = emit_signal_plot(rec, cleaned, ["Fp1", "Fz"], (0.0, 5.0), tmp_path, msf=msf)
    assert_self_contained(path)
    root = ET.parse(path).getroot()
    lines = [e for e in root.iter() if e.tag.endswith("polyline")]
    assert len(lines) == 2 + 2 + 2


@pytest.mark.parametrize("window", [(5.0, 5.0), (-1.0, 2.0), (10.0, 99.0)])
def test_signal_window_errors(blink_data, window):
    rec, _ = blink_data
    with pytest.raises(ValueError):
        signal_svg(rec, rec, ["Fp1"], window)


def test_signal_missing_channel(blink_data):
    rec, _ = blink_data
    with pytest.raises(ValueError):
        signal_svg(rec, rec, ["Zz9"], (0, 1))
