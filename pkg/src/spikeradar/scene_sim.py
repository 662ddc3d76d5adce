"""Synthetic FMCW radar scenes: moving point targets rendered to beat signals.

The simulator produces labeled raw recordings so the whole downstream
pipeline (range-Doppler preprocessing, training, profiling) can run
without any external dataset.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Two-way propagation at the speed of light; 299792458 m/s (exact SI value).
C = 299792458.0

_SPKR_MAGIC = b"SPKR"
_SPKR_VERSION = 1
_SPKR_HEADER = struct.Struct("<4sIIIIdddd")


@dataclass(frozen=True)
class ChirpConfig:
    """Linear-sweep chirp parameters of the simulated radar front end.

    f0: sweep start frequency (Hz)
    bandwidth: swept bandwidth (Hz)
    n_fast: ADC samples per chirp
    t_s: fast-time sample period (s)
    t_r: chirp repetition interval, i.e. slow-time spacing (s)
    """

    f0: float = 8.0e9
    bandwidth: float = 750.0e6
    n_fast: int = 128
    t_s: float = 0.15e-3 / 128
    t_r: float = 1.670e-3

    def __post_init__(self) -> None:
        if self.f0 <= 0:
            raise ValueError("f0 must be positive")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.n_fast < 2:
            raise ValueError("n_fast must be at least 2")
        if self.t_s <= 0:
            raise ValueError("t_s must be positive")
        if self.t_r < self.n_fast * self.t_s:
            raise ValueError("t_r must cover the sampled chirp (t_r >= n_fast * t_s)")

    @property
    def kappa(self) -> float:
        """Sweep slope in Hz/s, exactly bandwidth / (n_fast * t_s)."""
        return self.bandwidth / (self.n_fast * self.t_s)

    @property
    def max_range(self) -> float:
        """Largest unambiguous target range in meters."""
        return C * self.n_fast / (4.0 * self.bandwidth)

    @property
    def max_speed(self) -> float:
        """Largest unambiguous radial speed in m/s."""
        return C / (4.0 * self.f0 * self.t_r)


@dataclass(frozen=True)
class PointTarget:
    """Point scatterer at constant radial velocity."""

    range_m: float
    velocity_mps: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.range_m < 0:
            raise ValueError("range_m must be non-negative")


@dataclass(frozen=True)
class MotionSegment:
    """Piece of a target trajectory: v(tau) = v_base + v_amp * sin(2*pi*f*tau + phase)."""

    duration_s: float
    v_base: float = 0.0
    v_amp: float = 0.0
    v_freq_hz: float = 0.0
    v_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ValueError("segment duration must be positive")
        if self.v_amp != 0.0 and self.v_freq_hz <= 0:
            raise ValueError("oscillating segment needs a positive frequency")


@dataclass(frozen=True)
class TargetTrack:
    """One scatterer's initial range, reflection gain, and motion segments."""

    r0: float
    amplitude: float
    segments: tuple[MotionSegment, ...]


@dataclass(frozen=True)
class GestureScript:
    """Class-distinctive synthetic motion for one labeled recording."""

    class_id: int
    n_classes: int
    targets: tuple[TargetTrack, ...]

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def duration_s(self) -> float:
        if not self.targets:
            return math.inf
        return min(sum(s.duration_s for s in t.segments) for t in self.targets)


@dataclass
class RawRecording:
    """Real-valued beat-signal samples, one row per chirp."""

    samples: np.ndarray  # [n_chirps, n_fast] float
    label: int
    cfg: ChirpConfig
    noise_sigma: float = 0.0

    @property
    def n_chirps(self) -> int:
        return self.samples.shape[0]


def _track_ranges(track: TargetTrack, times: np.ndarray) -> np.ndarray:
    """Instantaneous range of a track at the given absolute times.

    Positions integrate the segment velocity laws in closed form; the final
    segment's law is extended if the recording outlasts the script.
    """
    ranges = np.empty_like(times)
    start_t = 0.0
    start_r = track.r0
    for i, seg in enumerate(track.segments):
        end_t = start_t + seg.duration_s
        if i == len(track.segments) - 1:
            sel = times >= start_t
        else:
            sel = (times >= start_t) & (times < end_t)
        tau = times[sel] - start_t
        pos = start_r + seg.v_base * tau
        if seg.v_amp != 0.0:
            w = 2.0 * math.pi * seg.v_freq_hz
            pos = pos + (seg.v_amp / w) * (
                math.cos(seg.v_phase) - np.cos(w * tau + seg.v_phase)
            )
        ranges[sel] = pos
        # advance the segment boundary state
        tau_end = seg.duration_s
        start_r = start_r + seg.v_base * tau_end
        if seg.v_amp != 0.0:
            w = 2.0 * math.pi * seg.v_freq_hz
            start_r += (seg.v_amp / w) * (
                math.cos(seg.v_phase) - math.cos(w * tau_end + seg.v_phase)
            )
        start_t = end_t
    return ranges


def _beat_from_ranges(
    ranges: np.ndarray,  # [n_targets, n_chirps]
    amplitudes: np.ndarray,  # [n_targets]
    cfg: ChirpConfig,
) -> np.ndarray:
    """Sum of per-target beat signals given per-chirp instantaneous ranges.

    The received phase at fast-time sample n of chirp m is the two-way phase
    of the instantaneous sweep frequency:

        phi(n, m) = (4*pi/c) * R_m * (f0 + kappa * n * t_s)

    whose first-order expansion in R_m = R0 + v*m*t_r recovers the usual
    constant + Doppler + beat decomposition of the received-phase model.
    """
    n_targets, n_chirps = ranges.shape
    sweep = cfg.f0 + cfg.kappa * cfg.t_s * np.arange(cfg.n_fast)  # [n_fast]
    out = np.zeros((n_chirps, cfg.n_fast))
    for t in range(n_targets):
        phase = (4.0 * math.pi / C) * np.outer(ranges[t], sweep)
        out += amplitudes[t] * np.cos(phase)
    return out


def _check_ranges(ranges: np.ndarray, cfg: ChirpConfig) -> None:
    rmax = float(np.max(ranges)) if ranges.size else 0.0
    rmin = float(np.min(ranges)) if ranges.size else 0.0
    if rmax >= cfg.max_range:
        raise ValueError(
            f"target range {rmax:.2f} m exceeds the unambiguous limit "
            f"{cfg.max_range:.2f} m"
        )
    if rmin < 0:
        raise ValueError(f"target range went negative ({rmin:.2f} m)")


def synth_beat_signal(
    targets: list[PointTarget],
    cfg: ChirpConfig,
    n_chirps: int,
    noise_sigma: float = 0.0,
    rng: np.random.Generator | None = None,
    label: int = 0,
) -> RawRecording:
    """Render constant-velocity point targets to a raw beat-signal recording."""
    if n_chirps < 1:
        raise ValueError("n_chirps must be at least 1")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    if noise_sigma > 0 and rng is None:
        raise ValueError("a seeded generator is required when noise_sigma > 0")

    times = cfg.t_r * np.arange(n_chirps)
    if targets:
        for tgt in targets:
            if abs(tgt.velocity_mps) >= cfg.max_speed:
                raise ValueError(
                    f"target speed {tgt.velocity_mps:.3f} m/s exceeds the "
                    f"unambiguous limit {cfg.max_speed:.3f} m/s"
                )
        ranges = np.stack([t.range_m + t.velocity_mps * times for t in targets])
        _check_ranges(ranges, cfg)
        amps = np.array([t.amplitude for t in targets])
        samples = _beat_from_ranges(ranges, amps, cfg)
    else:
        samples = np.zeros((n_chirps, cfg.n_fast))
    if noise_sigma > 0:
        samples = samples + rng.normal(0.0, noise_sigma, samples.shape)
    return RawRecording(samples=samples, label=label, cfg=cfg, noise_sigma=noise_sigma)


def render_script(
    script: GestureScript,
    cfg: ChirpConfig,
    n_chirps: int,
    noise_sigma: float = 0.0,
    rng: np.random.Generator | None = None,
) -> RawRecording:
    """Render a gesture script with the same beat-signal kernel as synth_beat_signal."""
    if n_chirps < 1:
        raise ValueError("n_chirps must be at least 1")
    if noise_sigma > 0 and rng is None:
        raise ValueError("a seeded generator is required when noise_sigma > 0")
    times = cfg.t_r * np.arange(n_chirps)
    if script.targets:
        ranges = np.stack([_track_ranges(t, times) for t in script.targets])
        _check_ranges(ranges, cfg)
        amps = np.array([t.amplitude for t in script.targets])
        samples = _beat_from_ranges(ranges, amps, cfg)
    else:
        samples = np.zeros((n_chirps, cfg.n_fast))
    if noise_sigma > 0:
        samples = samples + rng.normal(0.0, noise_sigma, samples.shape)
    return RawRecording(
        samples=samples, label=script.class_id, cfg=cfg, noise_sigma=noise_sigma
    )


def _u(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(rng.uniform(lo, hi))


def _single(r0, amp, *segs) -> tuple[TargetTrack, ...]:
    return (TargetTrack(r0=r0, amplitude=amp, segments=tuple(segs)),)


N_CLASS_TEMPLATES = 11


def _start_range(rng: np.random.Generator, sign: float, travel: float) -> float:
    """Pick an initial range that keeps `travel` meters of motion in bounds."""
    if sign < 0:
        return _u(rng, 1.2 + travel, 11.8)
    return _u(rng, 1.2, 11.8 - travel)


def gen_gesture_script(
    class_id: int,
    rng: np.random.Generator,
    n_classes: int = 4,
    duration_s: float = 3.2,
) -> GestureScript:
    """Draw a jittered instance of the motion template for one gesture class.

    Every class keeps a fixed segment structure; the seeded generator
    jitters speeds, signs, ranges, oscillation rates and reflection gains.
    Classes are told apart by cues that survive the training augmentations
    (axis flips, cyclic shifts): presence gaps from static pauses, Doppler
    smear width, oscillation rate, speed ramps, and target count, never by
    absolute peak position or velocity sign alone.
    """
    if not 1 <= n_classes <= N_CLASS_TEMPLATES:
        raise ValueError(f"n_classes must be in [1, {N_CLASS_TEMPLATES}]")
    if not 0 <= class_id < n_classes:
        raise ValueError(f"class_id {class_id} out of range for {n_classes} classes")

    amp = _u(rng, 0.7, 1.3)
    sign = 1.0 if rng.random() < 0.5 else -1.0
    phase = _u(rng, 0.0, 2.0 * math.pi)
    d = duration_s
    if class_id == 0:  # steady mover: tight blob in every frame
        v = sign * _u(rng, 0.8, 1.6)
        targets = _single(_start_range(rng, v, abs(v) * d), amp, MotionSegment(d, v_base=v))
    elif class_id == 1:  # stop and go: a late-gesture presence gap
        v = sign * _u(rng, 0.9, 1.6)
        d1 = _u(rng, 1.3, 1.7)
        pause = _u(rng, 0.8, 1.1)
        targets = _single(
            _start_range(rng, v, abs(v) * (d - pause)),
            amp,
            MotionSegment(d1, v_base=v),
            MotionSegment(pause, v_base=0.0),
            MotionSegment(d - d1 - pause, v_base=v),
        )
    elif class_id == 2:  # slow wave: Doppler sweep over a couple of seconds
        targets = _single(
            _u(rng, 3.5, 7.5),
            amp,
            MotionSegment(
                d, v_amp=_u(rng, 1.2, 2.0), v_freq_hz=_u(rng, 0.4, 0.7), v_phase=phase
            ),
        )
    elif class_id == 3:  # fast wave: wide Doppler smear in every frame
        targets = _single(
            _u(rng, 3.5, 7.5),
            amp,
            MotionSegment(
                d, v_amp=_u(rng, 1.2, 2.0), v_freq_hz=_u(rng, 1.7, 2.5), v_phase=phase
            ),
        )
    elif class_id == 4:  # two simultaneous movers
        v1 = sign * _u(rng, 0.7, 1.3)
        v2 = -sign * _u(rng, 0.7, 1.3)
        targets = _single(
            _start_range(rng, v1, abs(v1) * d), amp, MotionSegment(d, v_base=v1)
        ) + _single(
            _start_range(rng, v2, abs(v2) * d),
            _u(rng, 0.7, 1.3),
            MotionSegment(d, v_base=v2),
        )
    elif class_id == 5:  # speed ramp: Doppler offset grows through the gesture
        v_slow = sign * _u(rng, 0.3, 0.5)
        v_fast = sign * _u(rng, 1.8, 2.5)
        split = _u(rng, 1.3, 1.7)
        travel = abs(v_slow) * split + abs(v_fast) * (d - split)
        targets = _single(
            _start_range(rng, sign, travel),
            amp,
            MotionSegment(split, v_base=v_slow),
            MotionSegment(d - split, v_base=v_fast),
        )
    elif class_id == 6:  # double stop and go: two presence gaps
        v = sign * _u(rng, 0.9, 1.6)
        move = (d - 1.1) / 3.0
        targets = _single(
            _start_range(rng, v, abs(v) * (d - 1.1)),
            amp,
            MotionSegment(move, v_base=v),
            MotionSegment(0.55, v_base=0.0),
            MotionSegment(move, v_base=v),
            MotionSegment(0.55, v_base=0.0),
            MotionSegment(move, v_base=v),
        )
    elif class_id == 7:  # wide slow wave: much larger sweep than class 2
        targets = _single(
            _u(rng, 4.0, 8.0),
            amp,
            MotionSegment(
                d, v_amp=_u(rng, 2.6, 3.4), v_freq_hz=_u(rng, 0.4, 0.7), v_phase=phase
            ),
        )
    elif class_id == 8:  # drifting flutter: narrow very-fast oscillation plus drift
        v = sign * _u(rng, 0.35, 0.6)
        targets = _single(
            _start_range(rng, v, abs(v) * d),
            amp,
            MotionSegment(
                d,
                v_base=v,
                v_amp=_u(rng, 0.7, 1.1),
                v_freq_hz=_u(rng, 2.6, 3.4),
                v_phase=phase,
            ),
        )
    elif class_id == 9:  # faint mover: weak reflection, noisy background texture
        v = sign * _u(rng, 0.8, 1.5)
        targets = _single(
            _start_range(rng, v, abs(v) * d),
            _u(rng, 0.25, 0.45),
            MotionSegment(d, v_base=v),
        )
    else:  # class 10: empty scene, background only
        targets = ()
    return GestureScript(class_id=class_id, n_classes=n_classes, targets=targets)


def write_recording(rec: RawRecording, path: str | Path) -> None:
    """Write the little-endian SPKR container (header + row-major f32 samples)."""
    n_chirps, n_fast = rec.samples.shape
    header = _SPKR_HEADER.pack(
        _SPKR_MAGIC,
        _SPKR_VERSION,
        rec.label,
        n_chirps,
        n_fast,
        rec.cfg.f0,
        rec.cfg.bandwidth,
        rec.cfg.t_s,
        rec.cfg.t_r,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rec.samples.astype("<f4").tobytes())


def read_recording(path: str | Path) -> RawRecording:
    """Read an SPKR file back into a RawRecording (noise_sigma is not persisted)."""
    with open(path, "rb") as fh:
        raw = fh.read(_SPKR_HEADER.size)
        if len(raw) < _SPKR_HEADER.size:
            raise ValueError(f"{path}: truncated recording header")
        magic, version, label, n_chirps, n_fast, f0, bw, t_s, t_r = _SPKR_HEADER.unpack(raw)
        if magic != _SPKR_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_SPKR_MAGIC!r}")
        if version != _SPKR_VERSION:
            raise ValueError(f"{path}: unsupported recording version {version}")
        body = np.frombuffer(fh.read(4 * n_chirps * n_fast), dtype="<f4")
        if body.size != n_chirps * n_fast:
            raise ValueError(f"{path}: truncated sample block")
    cfg = ChirpConfig(f0=f0, bandwidth=bw, n_fast=n_fast, t_s=t_s, t_r=t_r)
    samples = body.reshape(n_chirps, n_fast).astype(np.float64)
    return RawRecording(samples=samples, label=label, cfg=cfg)


def write_manifest(entries: list[tuple[str, int]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rel, label in entries:
            fh.write(f"{rel},{label}\n")


def read_manifest(path: str | Path) -> list[tuple[Path, int]]:
    """Parse `path,label` lines; relative paths resolve against the manifest dir."""
    base = Path(path).parent
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rel, label = line.rsplit(",", 1)
                out.append((base / rel, int(label)))
            except ValueError as exc:
                raise ValueError(f"{path}:{ln}: malformed manifest line {line!r}") from exc
    return out


DEFAULT_N_CHIRPS = 1796  # 15 frames of 256 chirps with 146-chirp overlap
DEFAULT_NOISE_SIGMA = 0.02


def build_dataset(
    n_per_class: int,
    n_classes: int,
    rng: np.random.Generator,
    out_path: str | Path,
    cfg: ChirpConfig | None = None,
    n_chirps: int = DEFAULT_N_CHIRPS,
    noise_sigma: float = DEFAULT_NOISE_SIGMA,
) -> Path:
    """Generate a balanced labeled recording set plus its manifest.

    Returns the manifest path. Each recording draws its own child generator
    seeded from `rng`, so regenerating with the same seed is byte-identical.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    cfg = cfg or ChirpConfig()
    out_dir = Path(out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries: list[tuple[str, int]] = []
    for class_id in range(n_classes):
        for i in range(n_per_class):
            child = np.random.default_rng(rng.integers(0, 2**63))
            script = gen_gesture_script(class_id, child, n_classes=n_classes)
            rec = render_script(script, cfg, n_chirps, noise_sigma, child)
            name = f"rec_c{class_id}_{i:04d}.spkr"
            write_recording(rec, out_dir / name)
            entries.append((name, class_id))
    manifest = out_dir / "manifest.txt"
    write_manifest(entries, manifest)
    return manifest
