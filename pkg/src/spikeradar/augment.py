"""Training-time augmentation of RD-map sequences.

One random draw of (noise, flip, cyclic shift, scale) per sequence; the
geometric transform and the scale factor are shared by all frames, noise is
drawn independently per pixel. Operations apply in that order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .radar_dsp import RdSequence


@dataclass(frozen=True)
class AugmentParams:
    noise_sigma: float = 0.01
    flip_prob: float = 0.5
    shift_max: int = 16
    scale_range: tuple[float, float] = (0.9, 1.1)

    def __post_init__(self) -> None:
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ValueError("flip_prob must be in [0, 1]")
        if self.shift_max < 0:
            raise ValueError("shift_max must be non-negative")
        if self.scale_range[0] > self.scale_range[1]:
            raise ValueError("scale_range low must not exceed high")


def augment_sequence(
    seq: RdSequence, params: AugmentParams, rng: np.random.Generator
) -> RdSequence:
    """Randomly perturb a sequence, identically across its frames.

    Draw order is fixed: flip event, flip axis, range shift, Doppler shift,
    scale factor, then per-pixel noise (skipped when sigma is 0).
    """
    flip = bool(rng.random() < params.flip_prob)
    axis = int(rng.integers(2))  # 0 = range rows, 1 = Doppler columns
    s_r = int(rng.integers(-params.shift_max, params.shift_max + 1))
    s_d = int(rng.integers(-params.shift_max, params.shift_max + 1))
    scale = float(rng.uniform(params.scale_range[0], params.scale_range[1]))

    maps = seq.maps
    if params.noise_sigma > 0:
        maps = maps + rng.normal(0.0, params.noise_sigma, maps.shape)
    if flip:
        maps = np.flip(maps, axis=axis + 1)
    maps = np.roll(maps, (s_r, s_d), axis=(1, 2))
    maps = maps * scale
    return RdSequence(maps=np.ascontiguousarray(maps), label=seq.label)
