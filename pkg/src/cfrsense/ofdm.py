"""OFDM frame assembly and disassembly with Gray-coded QPSK.

All subcarriers carry pseudo-random QPSK symbols that the receiver can
regenerate from ``(master_seed, stream_id)``.  DFT convention: forward
unscaled, inverse scaled by 1/N, so a frame body of unit-magnitude symbols has
energy exactly 1.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ConfigError, DemapAmbiguityError, FrameFormatError

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class OfdmConfig:
    """Link parameters.  Defaults are the USRP testbed values."""

    n_subcarriers: int = 64
    cp_len: int = 16
    bits_per_frame: int = 128
    bits_per_symbol: int = 2
    n_data_subcarriers: int = 52
    n_pilot_subcarriers: int = 12
    sample_rate: float = 20000.0
    center_frequency: float = 5.23e9
    gain_db: float = 40.0  # front-end gain, metadata only
    master_seed: int = 0

    def __post_init__(self):
        if self.bits_per_symbol != 2:
            raise ConfigError("only QPSK (2 bits/symbol) is supported")
        if self.n_subcarriers < 1 or self.cp_len < 0:
            raise ConfigError("n_subcarriers must be >= 1 and cp_len >= 0")
        if self.bits_per_frame != self.n_subcarriers * self.bits_per_symbol:
            raise ConfigError(
                f"bits_per_frame={self.bits_per_frame} must equal "
                f"n_subcarriers*bits_per_symbol={self.n_subcarriers * self.bits_per_symbol}"
            )
        if self.n_data_subcarriers + self.n_pilot_subcarriers != self.n_subcarriers:
            raise ConfigError("data + pilot subcarriers must equal n_subcarriers")
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must fit in 64 unsigned bits")

    @property
    def frame_len(self):
        return self.n_subcarriers + self.cp_len

    @property
    def frames_per_second(self):
        return self.sample_rate / self.frame_len

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class TimeFrame:
    samples: np.ndarray
    frame_index: int = 0


def qpsk_map(bits):
    """Map a bit pair to its Gray-coded unit-energy QPSK point.

    (0,0)->(+1+j)/sqrt2, (0,1)->(-1+j)/sqrt2, (1,1)->(-1-j)/sqrt2,
    (1,0)->(+1-j)/sqrt2.  Also accepts an (..., 2) array of pairs.
    """
    b = np.asarray(bits)
    if b.shape[-1] != 2:
        raise ConfigError("qpsk_map expects bit pairs")
    if np.any((b != 0) & (b != 1)):
        raise ConfigError("bits must be 0 or 1")
    b = b.astype(np.int8)
    sym = ((1 - 2 * b[..., 1]) + 1j * (1 - 2 * b[..., 0])) * _INV_SQRT2
    return complex(sym) if sym.ndim == 0 else sym


def qpsk_demap(sym):
    """Nearest-constellation-point bit pair(s) for complex sample(s)."""
    s = np.asarray(sym, dtype=np.complex128)
    if np.any(s == 0):
        raise DemapAmbiguityError("cannot demap the zero sample")
    out = np.stack([(s.imag < 0), (s.real < 0)], axis=-1).astype(np.uint8)
    return tuple(int(v) for v in out) if s.ndim == 0 else out


def prng_bits(master_seed, stream_id, n):
    """Deterministic bits keyed by ``(master_seed, stream_id)``."""
    if n <= 0:
        raise ConfigError("n must be positive")
    return rng.bits(master_seed, stream_id, n)


def symbols_from_bits(cfg, bits):
    bits = np.asarray(bits)
    if bits.shape[-1] != cfg.bits_per_frame:
        raise ConfigError(f"expected {cfg.bits_per_frame} bits, got {bits.shape[-1]}")
    return qpsk_map(bits.reshape(bits.shape[:-1] + (cfg.n_subcarriers, 2)))


def modulate(cfg, symbols):
    """IDFT (1/N) and cyclic prefix for one or many symbol vectors."""
    body = np.fft.ifft(symbols, axis=-1)
    return np.concatenate([body[..., cfg.n_subcarriers - cfg.cp_len:], body], axis=-1)


def demodulate(cfg, samples):
    """Strip the CP and apply the unscaled forward DFT."""
    samples = np.asarray(samples)
    if samples.shape[-1] != cfg.frame_len:
        raise FrameFormatError(
            f"frame has {samples.shape[-1]} samples, expected {cfg.frame_len}"
        )
    return np.fft.fft(samples[..., cfg.cp_len:], axis=-1)


def assemble_frame(cfg, bits, frame_index=0):
    """Bits -> QPSK on every subcarrier -> IDFT -> CP-prefixed TimeFrame."""
    return TimeFrame(modulate(cfg, symbols_from_bits(cfg, bits)), frame_index)


def disassemble_frame(cfg, frame):
    """Received frequency-domain values (not re-quantized) of one frame."""
    samples = frame.samples if isinstance(frame, TimeFrame) else frame
    return demodulate(cfg, samples)
