"""Synthetic body channel: multipath taps, hydration effect, breathing, AWGN.

The physical experiment is replaced by a linear tap-delay-line channel whose
first (direct) tap carries the class effect.  Base taps are complex Gaussian
with power profile exp(-l/2), normalized to unit total power and held fixed
for a whole session.  A dehydrated session scales tap 0 by ``1 - separation``
and rotates it by ``separation * pi/4``.  In the chest geometry tap 0 is also
amplitude-modulated by breathing.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .labels import Label, ScenarioKind
from .ofdm import TimeFrame, modulate, symbols_from_bits
from .errors import ConfigError, ScenarioError

NOISELESS = math.inf


@dataclass(frozen=True)
class ChannelScenario:
    kind: ScenarioKind = ScenarioKind.CHEST
    hydration_label: Label = Label.HYDRATED
    separation: float = 0.2
    snr_db: float = 15.0
    n_taps: int = 4
    breathing_rate_hz: float = 0.25
    breathing_depth: float = 0.1
    subject_id: int = 0
    session_id: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        object.__setattr__(self, "hydration_label", Label(self.hydration_label))
        if self.n_taps < 1:
            raise ScenarioError("n_taps must be >= 1")
        if not 0 <= self.breathing_depth < 1:
            raise ScenarioError("breathing_depth must lie in [0, 1)")
        if not math.isfinite(self.separation) or self.separation < 0:
            raise ScenarioError("separation must be finite and >= 0")
        if math.isnan(self.snr_db):
            raise ScenarioError("snr_db is NaN")
        if not 0 <= self.seed < 2**64:
            raise ScenarioError("seed must fit in 64 unsigned bits")

    def validate_for(self, cfg):
        if self.n_taps > cfg.cp_len:
            raise ScenarioError(
                f"n_taps={self.n_taps} exceeds cp_len={cfg.cp_len}; "
                "channel memory must fit in the cyclic prefix"
            )

    def to_dict(self):
        d = dict(self.__dict__)
        d["kind"] = self.kind.value
        d["hydration_label"] = self.hydration_label.value
        return d


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray
    frame_index: int = 0


def base_taps(scenario):
    """Taps before the class effect; unit total power.

    Keyed on (seed, subject) only: a subject's body and room geometry stay
    put across sessions, so sessions differ by class effect, breathing and
    noise.
    """
    stream = rng.derive_stream(rng.DOMAIN_TAPS, scenario.subject_id)
    ell = np.arange(scenario.n_taps)
    g = rng.complex_normals(scenario.seed, stream, ell) * np.sqrt(np.exp(-ell / 2.0))
    return g / np.sqrt(np.sum(np.abs(g) ** 2))


def class_factor(scenario):
    """Multiplier applied to tap 0 for the scenario's class."""
    if scenario.hydration_label is Label.HYDRATED:
        return 1.0 + 0j
    d = scenario.separation
    return (1.0 - d) * np.exp(1j * d * np.pi / 4)


def breathing_factor(scenario, frame_index, frames_per_second):
    frame_index = np.asarray(frame_index, dtype=np.float64)
    if scenario.kind is not ScenarioKind.CHEST or scenario.breathing_depth == 0:
        return np.ones_like(frame_index)
    t = frame_index / frames_per_second
    return 1.0 + scenario.breathing_depth * np.sin(2 * np.pi * scenario.breathing_rate_hz * t)


def draw_taps(scenario, frame_indices, frames_per_second=250.0, cp_len=16):
    """Tap matrix, shape (len(frame_indices), n_taps)."""
    if scenario.n_taps > cp_len:
        raise ScenarioError(f"n_taps={scenario.n_taps} exceeds cp_len={cp_len}")
    frame_indices = np.atleast_1d(np.asarray(frame_indices))
    taps = np.tile(base_taps(scenario), (frame_indices.size, 1))
    taps[:, 0] *= class_factor(scenario) * breathing_factor(
        scenario, frame_indices, frames_per_second
    )
    return taps


def draw_channel(scenario, frame_index, frames_per_second=250.0, cp_len=16):
    """Channel realization seen by one frame of a session."""
    taps = draw_taps(scenario, [frame_index], frames_per_second, cp_len)[0]
    return ChannelRealization(taps, int(frame_index))


def _convolve_truncated(samples, taps):
    """Row-wise linear convolution truncated to the input length."""
    out = np.zeros(samples.shape, dtype=np.complex128)
    n = samples.shape[-1]
    for ell in range(min(taps.shape[-1], n)):
        out[..., ell:] += taps[..., ell : ell + 1] * samples[..., : n - ell]
    return out


def awgn(shape_frames, frame_len, noise_seeds):
    """Unit-variance complex noise, one independent stream per noise seed."""
    seeds = np.asarray(noise_seeds, dtype=np.uint64).reshape(-1, 1)
    z = rng.complex_normals(seeds, rng.DOMAIN_NOISE, np.arange(frame_len)[None, :])
    return z.reshape(shape_frames + (frame_len,))


def apply_channel_batch(samples, taps, snr_db, noise_seeds):
    """Vectorized ``apply_channel`` over rows of ``samples`` and ``taps``."""
    samples = np.asarray(samples, dtype=np.complex128)
    taps = np.asarray(taps, dtype=np.complex128)
    if taps.ndim == 1:
        taps = np.broadcast_to(taps, samples.shape[:-1] + taps.shape)
    clean = _convolve_truncated(samples, taps)
    if snr_db == NOISELESS:
        return clean
    power = np.mean(np.abs(clean) ** 2, axis=-1, keepdims=True)
    sigma = np.sqrt(power / 10.0 ** (snr_db / 10.0))
    z = awgn(samples.shape[:-1], samples.shape[-1], noise_seeds)
    return clean + sigma * z


def apply_channel(frame, ch, snr_db, noise_seed):
    """Convolve a CP-extended frame with the taps and add complex AWGN.

    Noise variance per sample is the frame's mean received power divided by
    10**(snr_db/10); ``snr_db = inf`` is noiseless.
    """
    out = apply_channel_batch(frame.samples[None, :], np.asarray(ch.taps)[None, :], snr_db,
                              [noise_seed])
    return TimeFrame(out[0], frame.frame_index)


@dataclass
class Session:
    """Transmitted and received frames of one session, stored as arrays.

    Iterating yields ``(transmitted, received)`` TimeFrame pairs.
    """

    scenario: ChannelScenario
    tx: np.ndarray
    rx: np.ndarray
    frame_indices: np.ndarray

    def __len__(self):
        return len(self.frame_indices)

    def __iter__(self):
        for i, k in enumerate(self.frame_indices):
            yield TimeFrame(self.tx[i], int(k)), TimeFrame(self.rx[i], int(k))


def frame_streams(scenario, frame_indices):
    """Per-frame bit stream ids; unique across subjects, sessions and labels."""
    return rng.derive_stream(rng.DOMAIN_BITS, scenario.subject_id, scenario.session_id,
                             scenario.hydration_label.code, frame_indices)


def noise_seeds(scenario, frame_indices):
    key = rng.derive_stream(rng.DOMAIN_NOISE, scenario.subject_id, scenario.session_id,
                            scenario.hydration_label.code, frame_indices)
    return key ^ np.uint64(scenario.seed)


def n_frames_for(cfg, duration_s):
    if duration_s <= 0:
        raise ConfigError("duration_s must be positive")
    return int(math.floor(duration_s * cfg.frames_per_second + 1e-9))


def transmitted_frames(cfg, scenario, frame_indices):
    """Tx frames for a session; the receiver calls this to regenerate them."""
    streams = frame_streams(scenario, frame_indices)
    bits = rng.bits_many(cfg.master_seed, streams, cfg.bits_per_frame)
    return modulate(cfg, symbols_from_bits(cfg, bits))


def simulate_session(cfg, scenario, duration_s=30.0):
    """Generate ``duration_s * frames_per_second`` transmitted/received frame pairs."""
    scenario.validate_for(cfg)
    idx = np.arange(n_frames_for(cfg, duration_s), dtype=np.int64)
    tx = transmitted_frames(cfg, scenario, idx)
    taps = draw_taps(scenario, idx, cfg.frames_per_second, cfg.cp_len)
    rx = apply_channel_batch(tx, taps, scenario.snr_db, noise_seeds(scenario, idx))
    return Session(scenario, tx, rx, idx)


@dataclass
class SessionSet:
    """Campaign description; sessions are simulated lazily on iteration."""

    cfg: object
    scenarios: list = field(default_factory=list)
    duration_s: float = 30.0

    def __len__(self):
        return len(self.scenarios)

    def __iter__(self):
        for sc in self.scenarios:
            yield simulate_session(self.cfg, sc, self.duration_s)

    def label_counts(self):
        counts = {lab: 0 for lab in Label}
        for sc in self.scenarios:
            counts[sc.hydration_label] += 1
        return counts


def simulate_campaign(cfg, kind=ScenarioKind.CHEST, n_subjects=5, sessions_per_class=5,
                      duration_s=30.0, separation=0.2, snr_db=15.0, seed=0, **scenario_kw):
    """Subjects x classes x sessions, mirroring the fasting-study layout.

    Session ids run 0..2M-1 per subject: hydrated sessions first, then
    dehydrated.  Each session draws its own data bits and noise.
    """
    if n_subjects <= 0 or sessions_per_class <= 0:
        raise ConfigError("n_subjects and sessions_per_class must be positive")
    n_frames_for(cfg, duration_s)
    cfg = replace(cfg, master_seed=seed)
    scenarios = []
    for subject in range(n_subjects):
        for c, label in enumerate((Label.HYDRATED, Label.DEHYDRATED)):
            for s in range(sessions_per_class):
                sc = ChannelScenario(kind=kind, hydration_label=label, separation=separation,
                                     snr_db=snr_db, subject_id=subject,
                                     session_id=c * sessions_per_class + s, seed=seed,
                                     **scenario_kw)
                sc.validate_for(cfg)
                scenarios.append(sc)
    return SessionSet(cfg, scenarios, duration_s)
