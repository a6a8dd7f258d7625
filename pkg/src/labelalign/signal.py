"""Causal FIR band-pass filtering, epoching, and downsampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DimMismatchError,
    InvalidBandError,
    NonFiniteError,
    WindowOutOfRangeError,
)

Array = np.ndarray


@dataclass
class Trial:
    """One multichannel epoch: data is channels x samples, label optional."""

    data: Array
    label: int | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or self.data.shape[1] < 1:
            raise DimMismatchError(f"trial data must be 2-D with T > 0, got {self.data.shape}")
        if not np.isfinite(self.data).all():
            raise NonFiniteError("trial data contains NaN or Inf")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def samples(self) -> int:
        return self.data.shape[1]


@dataclass
class ContinuousRecording:
    """Continuous multichannel signal with (sample_index, label) cue events."""

    data: Array
    sample_rate: float
    events: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise DimMismatchError(f"recording data must be 2-D, got {self.data.shape}")
        if self.sample_rate <= 0:
            raise DataError(f"sample_rate must be positive, got {self.sample_rate}")
        n = self.data.shape[1]
        for idx, _ in self.events:
            if not 0 <= idx < n:
                raise WindowOutOfRangeError(
                    f"event at sample {idx} outside recording of length {n}", idx
                )

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


def design_fir_bandpass(order: int, lo_hz: float, hi_hz: float, fs: float) -> Array:
    """Windowed-sinc linear-phase band-pass, ``order + 1`` Hamming-windowed taps.

    The ideal impulse response is the difference of two sincs at the
    normalized cutoffs; the edges land at roughly -6 dB.
    """
    if order <= 0 or order % 2 != 0:
        raise InvalidBandError(f"order must be a positive even integer, got {order}")
    if not (0.0 < lo_hz < hi_hz < fs / 2.0):
        raise InvalidBandError(
            f"need 0 < lo < hi < fs/2, got lo={lo_hz}, hi={hi_hz}, fs={fs}"
        )
    m = order // 2
    n = np.arange(order + 1)
    f1 = lo_hz / fs
    f2 = hi_hz / fs
    ideal = 2.0 * f2 * np.sinc(2.0 * f2 * (n - m)) - 2.0 * f1 * np.sinc(2.0 * f1 * (n - m))
    window = 0.54 - 0.46 * np.cos(2.0 * np.pi * n / order)
    return ideal * window


def filter_causal(rec: ContinuousRecording, coeffs) -> ContinuousRecording:
    """Per-channel direct-form FIR convolution with zero initial state.

    output[n] = sum_k h[k] * x[n - k] with x[<0] = 0; no phase compensation.
    """
    h = np.asarray(coeffs, dtype=np.float64)
    if h.ndim != 1 or h.size == 0:
        raise InvalidBandError("coefficient vector must be nonempty and 1-D")
    if not np.isfinite(rec.data).all():
        raise NonFiniteError("recording contains NaN or Inf")
    n = rec.n_samples
    out = np.empty_like(rec.data)
    for c in range(rec.channels):
        out[c] = np.convolve(rec.data[c], h)[:n]
    return ContinuousRecording(out, rec.sample_rate, list(rec.events))


def epoch(rec: ContinuousRecording, start_s: float, end_s: float) -> list[Trial]:
    """Cut one trial per event from ``start_s`` to ``end_s`` after the cue."""
    if end_s <= start_s:
        raise InvalidBandError(f"need end_s > start_s, got [{start_s}, {end_s}]")
    fs = rec.sample_rate
    t = int(round((end_s - start_s) * fs))
    offset = int(round(start_s * fs))
    trials = []
    for idx, label in rec.events:
        s0 = idx + offset
        if s0 < 0 or s0 + t > rec.n_samples:
            raise WindowOutOfRangeError(
                f"event at sample {idx}: window [{s0}, {s0 + t}) outside "
                f"recording of length {rec.n_samples}",
                idx,
            )
        trials.append(Trial(rec.data[:, s0 : s0 + t].copy(), label=label))
    return trials


def downsample(rec: ContinuousRecording, factor: int) -> ContinuousRecording:
    """Keep every ``factor``-th sample; run after band-limiting."""
    if factor < 1:
        raise InvalidBandError(f"factor must be >= 1, got {factor}")
    data = rec.data[:, ::factor].copy()
    events = [(idx // factor, label) for idx, label in rec.events]
    return ContinuousRecording(data, rec.sample_rate / factor, events)


def resample_linear(rec: ContinuousRecording, up: int, down: int) -> ContinuousRecording:
    """Rational-rate resampling: linear interpolation by ``up``, then keep
    every ``down``-th sample (e.g. up=2, down=5 converts 250 Hz to 100 Hz).

    Only needed for externally recorded data whose rate is not an integer
    multiple of the target; the synthetic generator emits the target rate
    directly.
    """
    if up < 1 or down < 1:
        raise InvalidBandError(f"up and down must be >= 1, got up={up}, down={down}")
    n = rec.n_samples
    # Positions of the kept output samples, in units of original samples.
    n_out = ((n - 1) * up) // down + 1
    positions = np.arange(n_out) * (down / up)
    grid = np.arange(n)
    data = np.vstack([np.interp(positions, grid, rec.data[c]) for c in range(rec.channels)])
    events = [((idx * up) // down, label) for idx, label in rec.events]
    return ContinuousRecording(data, rec.sample_rate * up / down, events)
