"""Spectral encodings: consecutive-difference vectors of global and local
spectra, concatenated with a labeled segment layout."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .eigen import Spectrum

GLOBAL_LABEL = "global"


class EncodingError(ValueError):
    """Invalid encoding construction or incompatible layouts."""


@dataclass(frozen=True)
class Segment:
    label: str
    offset: int
    length: int


@dataclass(frozen=True)
class SpectralEncoding:
    """Nonnegative difference vector plus the segment layout that tiles it."""

    values: np.ndarray
    layout: tuple[Segment, ...]

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if vals.ndim != 1:
            raise EncodingError("encoding values must be a vector")
        layout = tuple(
            s if isinstance(s, Segment) else Segment(*s) for s in self.layout
        )
        pos = 0
        labels = set()
        for seg in layout:
            if seg.offset != pos or seg.length < 1:
                raise EncodingError("layout segments must tile the vector exactly")
            if seg.label in labels:
                raise EncodingError(f"duplicate segment label {seg.label!r}")
            labels.add(seg.label)
            pos += seg.length
        if pos != vals.size:
            raise EncodingError(
                f"layout covers {pos} values but encoding has {vals.size}"
            )
        if (vals < 0).any():
            raise EncodingError("encoding values must be nonnegative")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "layout", layout)

    def __len__(self) -> int:
        return self.values.size

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.layout)

    def segment(self, label: str) -> np.ndarray:
        for seg in self.layout:
            if seg.label == label:
                return self.values[seg.offset : seg.offset + seg.length]
        raise EncodingError(f"unknown segment label {label!r}")

    def segment_slice(self, label: str) -> slice:
        for seg in self.layout:
            if seg.label == label:
                return slice(seg.offset, seg.offset + seg.length)
        raise EncodingError(f"unknown segment label {label!r}")

    def same_layout(self, other: "SpectralEncoding") -> bool:
        return self.layout == other.layout


def layout_compatible(a, b) -> None:
    if tuple(a.layout) != tuple(b.layout):
        raise EncodingError("encoding layouts differ")


def diff_encode(spectrum: Spectrum) -> np.ndarray:
    """Consecutive differences of a sorted spectrum; length k-1, all >= 0."""
    lam = spectrum.eigenvalues
    if lam.size < 2:
        raise EncodingError("need at least 2 eigenvalues to difference")
    return np.maximum(np.diff(lam), 0.0)


def build_encoding(
    global_spectrum: Spectrum, locals_: list[tuple[str, Spectrum]] = ()
) -> SpectralEncoding:
    """Concatenate [diff(global); diff(local_1); ...] with a recorded layout."""
    parts = [diff_encode(global_spectrum)]
    layout = [Segment(GLOBAL_LABEL, 0, parts[0].size)]
    pos = parts[0].size
    for label, spec in locals_:
        d = diff_encode(spec)
        layout.append(Segment(label, pos, d.size))
        parts.append(d)
        pos += d.size
    return SpectralEncoding(np.concatenate(parts), tuple(layout))


def swap_segments(
    a: SpectralEncoding, b: SpectralEncoding, take_from_b: set[str]
) -> SpectralEncoding:
    """Copy of `a` with the named segments replaced by `b`'s."""
    layout_compatible(a, b)
    known = set(a.labels)
    unknown = set(take_from_b) - known
    if unknown:
        raise EncodingError(f"unknown segment label(s) {sorted(unknown)}")
    values = a.values.copy()
    for label in take_from_b:
        sl = a.segment_slice(label)
        values[sl] = b.values[sl]
    return SpectralEncoding(values, a.layout)


def interpolate(
    a: SpectralEncoding,
    b: SpectralEncoding,
    t: float,
    segments: set[str] | None = None,
) -> SpectralEncoding:
    """Linear blend of the selected segments; unselected copied from `a`."""
    layout_compatible(a, b)
    if not 0.0 <= t <= 1.0:
        raise EncodingError(f"t={t} outside [0, 1]")
    if segments is None:
        segments = set(a.labels)
    unknown = set(segments) - set(a.labels)
    if unknown:
        raise EncodingError(f"unknown segment label(s) {sorted(unknown)}")
    values = a.values.copy()
    for label in segments:
        sl = a.segment_slice(label)
        values[sl] = (1.0 - t) * a.values[sl] + t * b.values[sl]
    return SpectralEncoding(values, a.layout)


@dataclass(frozen=True)
class EncodingStats:
    """Per-dimension extremes of a set of same-layout encodings."""

    minimum: np.ndarray
    maximum: np.ndarray
    layout: tuple[Segment, ...]

    def __post_init__(self):
        lo = np.asarray(self.minimum, dtype=np.float64)
        hi = np.asarray(self.maximum, dtype=np.float64)
        if lo.shape != hi.shape or (lo > hi).any():
            raise EncodingError("stats need elementwise min <= max")
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)
        object.__setattr__(
            self,
            "layout",
            tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.layout),
        )


def dataset_stats(encodings: list[SpectralEncoding]) -> EncodingStats:
    if not encodings:
        raise EncodingError("need at least one encoding")
    first = encodings[0]
    for enc in encodings[1:]:
        layout_compatible(first, enc)
    stack = np.stack([e.values for e in encodings])
    return EncodingStats(stack.min(axis=0), stack.max(axis=0), first.layout)


# ---------------------------------------------------------------------------
# JSON wire format: {"layout": [[label, offset, length], ...], "values": [...]}


def encoding_to_dict(enc: SpectralEncoding) -> dict:
    return {
        "layout": [[s.label, s.offset, s.length] for s in enc.layout],
        "values": [float(v) for v in enc.values],
    }


def encoding_from_dict(doc: dict) -> SpectralEncoding:
    try:
        layout = tuple(Segment(str(l), int(o), int(n)) for l, o, n in doc["layout"])
        values = np.asarray(doc["values"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise EncodingError(f"bad encoding document: {exc}") from exc
    return SpectralEncoding(values, layout)


def save_encoding(path: str, enc: SpectralEncoding) -> None:
    with open(path, "w") as fh:
        json.dump(encoding_to_dict(enc), fh)


def load_encoding(path: str) -> SpectralEncoding:
    with open(path) as fh:
        return encoding_from_dict(json.load(fh))
