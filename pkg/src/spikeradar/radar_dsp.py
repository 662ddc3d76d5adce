"""Raw recordings to range-Doppler map sequences.

Pipeline per recording: overlapping frame slicing, static-clutter removal
(slow-time mean subtraction per range row), 2D DFT, magnitude, bilinear
resampling to 128x128, per-map max-abs normalization.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scene_sim import C, ChirpConfig, RawRecording

RD_SIZE = 128
FRAME_LEN = 256
FRAME_OVERLAP = 146
SEQ_LEN = 15

_RDSQ_MAGIC = b"RDSQ"
_RDSQ_HEADER = struct.Struct("<4sIIII")


@dataclass
class RadarFrame:
    """One radar frame: fast time x slow time, i.e. [n_fast, n_chirps_in_frame]."""

    data: np.ndarray
    cfg: ChirpConfig


@dataclass
class RdSequence:
    """L range-Doppler maps plus the class label; the network input."""

    maps: np.ndarray  # [L, RD_SIZE, RD_SIZE] float
    label: int

    @property
    def seq_len(self) -> int:
        return self.maps.shape[0]


def slice_frames(
    rec: RawRecording,
    frame_len: int = FRAME_LEN,
    overlap: int = FRAME_OVERLAP,
) -> list[RadarFrame]:
    """Cut the recording into overlapping frames of `frame_len` chirps."""
    if overlap >= frame_len:
        raise ValueError("overlap must be smaller than frame_len")
    if overlap < 0:
        raise ValueError("overlap must be non-negative")
    n_chirps = rec.samples.shape[0]
    if n_chirps < frame_len:
        raise ValueError(
            f"recording has {n_chirps} chirps, need at least {frame_len} for one frame"
        )
    hop = frame_len - overlap
    frames = []
    for start in range(0, n_chirps - frame_len + 1, hop):
        chunk = rec.samples[start : start + frame_len]  # [frame_len, n_fast]
        frames.append(RadarFrame(data=chunk.T.copy(), cfg=rec.cfg))
    return frames


def remove_static_clutter(frame: RadarFrame) -> RadarFrame:
    """Subtract the slow-time mean of every range row (zero-Doppler notch)."""
    data = frame.data - frame.data.mean(axis=1, keepdims=True)
    return RadarFrame(data=data, cfg=frame.cfg)


def range_doppler_spectrum(frame: RadarFrame) -> np.ndarray:
    """One-sided, Doppler-centered magnitude spectrum of a frame.

    Fast-time DFT down the columns keeps bins [0, n_fast/2); the slow-time
    DFT is shifted so zero Doppler lands in the center column. Shape is
    [n_fast/2, n_chirps_in_frame].
    """
    fast = np.fft.fft(frame.data, axis=0)
    fast = fast[: frame.data.shape[0] // 2]
    full = np.fft.fft(fast, axis=1)
    full = np.fft.fftshift(full, axes=1)
    return np.abs(full)


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resample with the half-pixel-center convention and edge clamping."""
    in_h, in_w = img.shape
    ys = (np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, in_h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)[:, None]
    wx = np.clip(xs - x0, 0.0, 1.0)[None, :]
    top = img[np.ix_(y0, x0)] * (1 - wx) + img[np.ix_(y0, x1)] * wx
    bot = img[np.ix_(y1, x0)] * (1 - wx) + img[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


def compute_rd_map(frame: RadarFrame, size: int = RD_SIZE) -> np.ndarray:
    """Normalized range-Doppler map of one frame, `size` x `size`, values in [0, 1]."""
    mag = range_doppler_spectrum(frame)
    if mag.shape != (size, size):
        mag = bilinear_resize(mag, size, size)
    peak = mag.max()
    if peak > 0:
        mag = mag / peak
    return mag


def range_resolution(cfg: ChirpConfig) -> float:
    """Range bin width in meters: c / (2B)."""
    return C / (2.0 * cfg.bandwidth)


def velocity_resolution(cfg: ChirpConfig, n_chirps_in_frame: int = FRAME_LEN) -> float:
    """Doppler bin width in m/s: c / (2 * f0 * M * t_r)."""
    return C / (2.0 * cfg.f0 * n_chirps_in_frame * cfg.t_r)


def preprocess_sequence(
    rec: RawRecording,
    seq_len: int = SEQ_LEN,
    frame_len: int = FRAME_LEN,
    overlap: int = FRAME_OVERLAP,
) -> RdSequence:
    """Slice, de-clutter and transform a recording into its RD-map sequence."""
    frames = slice_frames(rec, frame_len=frame_len, overlap=overlap)
    if len(frames) < seq_len:
        hop = frame_len - overlap
        needed = frame_len + (seq_len - 1) * hop
        raise ValueError(
            f"recording yields {len(frames)} frames, {seq_len} required "
            f"(needs >= {needed} chirps)"
        )
    maps = np.stack(
        [compute_rd_map(remove_static_clutter(f)) for f in frames[:seq_len]]
    )
    return RdSequence(maps=maps, label=rec.label)


def write_rd_sequence(seq: RdSequence, path: str | Path) -> None:
    """Write the little-endian RDSQ container (header + row-major f32 maps)."""
    length, h, w = seq.maps.shape
    header = _RDSQ_HEADER.pack(_RDSQ_MAGIC, length, h, w, seq.label)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(seq.maps.astype("<f4").tobytes())


def read_rd_sequence(path: str | Path) -> RdSequence:
    with open(path, "rb") as fh:
        raw = fh.read(_RDSQ_HEADER.size)
        if len(raw) < _RDSQ_HEADER.size:
            raise ValueError(f"{path}: truncated sequence header")
        magic, length, h, w, label = _RDSQ_HEADER.unpack(raw)
        if magic != _RDSQ_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_RDSQ_MAGIC!r}")
        body = np.frombuffer(fh.read(4 * length * h * w), dtype="<f4")
        if body.size != length * h * w:
            raise ValueError(f"{path}: truncated map block")
    return RdSequence(maps=body.reshape(length, h, w).astype(np.float64), label=label)
