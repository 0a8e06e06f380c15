import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectraforge.eigen import Spectrum
from spectraforge.encoding import (
    GLOBAL_LABEL,
    EncodingError,
    Segment,
    SpectralEncoding,
    build_encoding,
    dataset_stats,
    diff_encode,
    encoding_from_dict,
    encoding_to_dict,
    interpolate,
    load_encoding,
    save_encoding,
    swap_segments,
)


def make_encoding(values, lengths_labels):
    layout, off = [], 0
    for label, length in lengths_labels:
        layout.append(Segment(label, off, length))
        off += length
    return SpectralEncoding(np.asarray(values, dtype=np.float64), tuple(layout))


def test_diff_encode_oracle():
    spec = Spectrum(np.array([0.0, 2.0, 5.0, 5.0, 9.5]))
    np.testing.assert_array_equal(diff_encode(spec), [2.0, 3.0, 0.0, 4.5])


def test_diff_encode_clamps_numerical_noise():
    # descending pairs below solver precision are clamped, not propagated
    spec = Spectrum(np.array([1.0, 1.0, 2.0]))
    assert (diff_encode(spec) >= 0).all()


def test_build_encoding_lengths():
    glob = Spectrum(np.linspace(0, 29, 30))
    enc = build_encoding(glob)
    assert len(enc) == 29  # k eigenvalues -> k-1 consecutive differences
    assert enc.layout[0].label == GLOBAL_LABEL

    local = Spectrum(np.linspace(1, 15, 15))
    enc2 = build_encoding(Spectrum(np.linspace(0, 14, 15)), [("front", local)])
    assert len(enc2) == 28  # 14 global + 14 local differences
    assert [s.label for s in enc2.layout] == [GLOBAL_LABEL, "front"]
    assert enc2.segment("front").size == 14


def test_layout_validation():
    with pytest.raises(EncodingError):
        make_encoding([1.0, 2.0], [("a", 1)])  # layout does not tile values
    with pytest.raises(EncodingError):
        make_encoding([1.0, 2.0], [("a", 1), ("a", 1)])  # duplicate label
    with pytest.raises(EncodingError):
        make_encoding([1.0, -2.0], [("a", 2)])  # negative entry


def test_segment_lookup():
    enc = make_encoding([1, 2, 3, 4, 5], [("global", 2), ("front", 3)])
    assert enc.segment_slice("front") == slice(2, 5)
    with pytest.raises(EncodingError):
        enc.segment("nope")


def test_swap_segments():
    a = make_encoding([1, 2, 3, 4], [("global", 2), ("front", 2)])
    b = make_encoding([9, 8, 7, 6], [("global", 2), ("front", 2)])
    out = swap_segments(a, b, {"front"})
    np.testing.assert_array_equal(out.values, [1, 2, 7, 6])
    # original operands untouched
    np.testing.assert_array_equal(a.values, [1, 2, 3, 4])
    with pytest.raises(EncodingError):
        swap_segments(a, b, {"nope"})


def test_swap_layout_mismatch():
    a = make_encoding([1, 2], [("global", 2)])
    b = make_encoding([1, 2, 3], [("global", 3)])
    with pytest.raises(EncodingError):
        swap_segments(a, b, {"global"})


def test_interpolate_endpoints_and_segments():
    a = make_encoding([0.0, 0.0, 4.0], [("global", 2), ("front", 1)])
    b = make_encoding([2.0, 6.0, 8.0], [("global", 2), ("front", 1)])
    np.testing.assert_array_equal(interpolate(a, b, 0.0).values, a.values)
    np.testing.assert_array_equal(interpolate(a, b, 1.0).values, b.values)
    np.testing.assert_array_equal(interpolate(a, b, 0.5).values, [1.0, 3.0, 6.0])
    only_front = interpolate(a, b, 1.0, {"front"})
    np.testing.assert_array_equal(only_front.values, [0.0, 0.0, 8.0])
    with pytest.raises(EncodingError):
        interpolate(a, b, 1.5)


def test_dataset_stats():
    a = make_encoding([1, 5], [("global", 2)])
    b = make_encoding([3, 2], [("global", 2)])
    stats = dataset_stats([a, b])
    np.testing.assert_array_equal(stats.minimum, [1, 2])
    np.testing.assert_array_equal(stats.maximum, [3, 5])
    with pytest.raises(EncodingError):
        dataset_stats([])


def test_serialization_roundtrip(tmp_path):
    enc = make_encoding([1.5, 0.25, 3.0], [("global", 2), ("front", 1)])
    doc = encoding_to_dict(enc)
    assert doc["layout"] == [["global", 0, 2], ["front", 2, 1]]
    back = encoding_from_dict(doc)
    assert back.same_layout(enc)
    np.testing.assert_array_equal(back.values, enc.values)

    path = tmp_path / "enc.json"
    save_encoding(path, enc)
    loaded = load_encoding(path)
    np.testing.assert_array_equal(loaded.values, enc.values)


nonneg = st.floats(0.0, 1e6, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(nonneg, min_size=2, max_size=8),
    st.lists(nonneg, min_size=2, max_size=8),
    st.floats(0.0, 1.0),
)
def test_interpolation_properties(av, bv, t):
    n = min(len(av), len(bv))
    a = make_encoding(av[:n], [("global", n)])
    b = make_encoding(bv[:n], [("global", n)])
    out = interpolate(a, b, t)
    assert (out.values >= 0).all()
    lo = np.minimum(a.values, b.values)
    hi = np.maximum(a.values, b.values)
    assert (out.values >= lo - 1e-9).all() and (out.values <= hi + 1e-9).all()


@settings(max_examples=50, deadline=None)
@given(st.lists(nonneg, min_size=4, max_size=4), st.lists(nonneg, min_size=4, max_size=4))
def test_swap_involution(av, bv):
    layout = [("global", 2), ("front", 2)]
    a = make_encoding(av, layout)
    b = make_encoding(bv, layout)
    once = swap_segments(a, b, {"front"})
    twice = swap_segments(once, a, {"front"})
    np.testing.assert_array_equal(twice.values, a.values)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 1e9, allow_nan=False), min_size=2, max_size=30))
def test_diff_encode_nonnegative(lams):
    spec = Spectrum(np.sort(np.asarray(lams)))
    assert (diff_encode(spec) >= 0).all()
