"""Denoising, artifact rejection and windowed featurization of CFR streams."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import ConfigError, FilterSpecError
from .labels import Label

log = logging.getLogger(__name__)

ROBUST_SD_SCALE = 1.4826


@dataclass(frozen=True)
class FilterSpec:
    lowpass_order: int = 4
    lowpass_cutoff_hz: float = 5.0
    savgol_window: int = 11
    savgol_polyorder: int = 3

    def validate(self, rate_hz=None):
        if self.lowpass_order < 1:
            raise FilterSpecError("lowpass_order must be >= 1")
        if self.savgol_window < 1 or self.savgol_window % 2 == 0:
            raise FilterSpecError(f"savgol_window must be odd, got {self.savgol_window}")
        if not 0 <= self.savgol_polyorder < self.savgol_window:
            raise FilterSpecError("savgol_polyorder must be < savgol_window")
        if self.lowpass_cutoff_hz <= 0:
            raise FilterSpecError("cutoff must be positive")
        if rate_hz is not None and self.lowpass_cutoff_hz >= rate_hz / 2:
            raise FilterSpecError(
                f"cutoff {self.lowpass_cutoff_hz} Hz is not below Nyquist ({rate_hz / 2} Hz)"
            )
        return self

    def to_dict(self):
        return dict(self.__dict__)


def butter_lowpass(order, cutoff_hz, rate_hz):
    """Digital Butterworth low-pass (b, a) via the bilinear transform.

    Analog poles on the left half circle are pre-warped so the -3 dB point
    lands exactly on ``cutoff_hz``; all zeros map to z = -1 and the gain is
    set for unit DC response.
    """
    if not 0 < cutoff_hz < rate_hz / 2:
        raise FilterSpecError(f"cutoff must lie in (0, {rate_hz / 2}) Hz")
    fs2 = 2.0 * rate_hz
    warped = fs2 * math.tan(math.pi * cutoff_hz / rate_hz)
    k = np.arange(1, order + 1)
    s_poles = warped * np.exp(1j * np.pi * (2 * k + order - 1) / (2 * order))
    z_poles = (fs2 + s_poles) / (fs2 - s_poles)
    a = np.real(np.poly(z_poles))
    b = np.array([math.comb(order, i) for i in range(order + 1)], dtype=np.float64)
    b *= a.sum() / b.sum()
    return b, a


def lowpass_filter(series, spec=FilterSpec(), rate_hz=250.0):
    """Zero-phase Butterworth low-pass along axis 0.

    Forward-backward application (effective order doubles, phase cancels);
    edges use odd extension with steady-state initial conditions.
    """
    spec.validate(rate_hz)
    x = np.asarray(series, dtype=np.float64)
    if x.shape[0] < 3 * spec.lowpass_order:
        raise ConfigError(
            f"series length {x.shape[0]} < 3 x filter order ({3 * spec.lowpass_order})"
        )
    b, a = butter_lowpass(spec.lowpass_order, spec.lowpass_cutoff_hz, rate_hz)
    padlen = min(3 * (spec.lowpass_order + 1), x.shape[0] - 1)
    return signal.filtfilt(b, a, x, axis=0, padlen=padlen)


def savgol_coefficients(window, polyorder):
    """Smoothing weights of the centered least-squares polynomial fit."""
    half = window // 2
    t = np.arange(-half, half + 1, dtype=np.float64)
    vander = t[:, None] ** np.arange(polyorder + 1)[None, :]
    # value of the fitted polynomial at t=0 is the constant coefficient
    return np.linalg.pinv(vander)[0]


def savgol_filter(series, spec=FilterSpec()):
    """Savitzky-Golay smoothing along axis 0 with mirror-padded edges."""
    spec.validate()
    x = np.asarray(series, dtype=np.float64)
    w = spec.savgol_window
    if x.shape[0] < w:
        raise ConfigError(f"series length {x.shape[0]} < savgol window {w}")
    c = savgol_coefficients(w, spec.savgol_polyorder)
    half = w // 2
    pad = [(half, half)] + [(0, 0)] * (x.ndim - 1)
    xp = np.pad(x, pad, mode="reflect")
    out = np.zeros_like(x)
    n = x.shape[0]
    for i, ci in enumerate(c):
        out += ci * xp[i : i + n]
    return out


def reject_artifacts(block, z_threshold=6.0):
    """Drop snapshots whose magnitude is a robust-z outlier on any subcarrier.

    Returns ``(kept_block, n_rejected)``.
    """
    if len(block) == 0:
        raise ConfigError("reject_artifacts needs a nonempty session")
    if math.isinf(z_threshold):
        return block, 0
    mag = np.abs(block.h)
    med = np.median(mag, axis=0)
    sd = ROBUST_SD_SCALE * np.median(np.abs(mag - med), axis=0)
    # a noiseless session has MAD 0; ignore deviations at rounding level
    sd = np.maximum(sd, 1e-9 * np.maximum(med, 1e-12))
    bad = np.any(np.abs(mag - med) > z_threshold * sd, axis=1)
    n_bad = int(bad.sum())
    if n_bad:
        log.info("session %d: rejected %d artifact frames", block.session_id, n_bad)
    return block.take(~bad), n_bad


@dataclass(frozen=True)
class LabeledExample:
    features: np.ndarray
    label: Label
    subject_id: int
    session_id: int
    window_index: int


@dataclass
class Dataset:
    """Examples as arrays: X (n, d), y (n,) codes with 1 = dehydrated."""

    X: np.ndarray
    y: np.ndarray
    subject_id: np.ndarray
    session_id: np.ndarray
    window_index: np.ndarray

    def __len__(self):
        return len(self.y)

    def __iter__(self):
        for i in range(len(self)):
            yield LabeledExample(self.X[i], Label.from_code(self.y[i]), int(self.subject_id[i]),
                                 int(self.session_id[i]), int(self.window_index[i]))

    def subset(self, idx):
        return Dataset(self.X[idx], self.y[idx], self.subject_id[idx], self.session_id[idx],
                       self.window_index[idx])

    @property
    def groups(self):
        """One integer per (subject, session, label) group."""
        keys = np.stack([self.subject_id, self.session_id, self.y], axis=1)
        _, inv = np.unique(keys, axis=0, return_inverse=True)
        return inv.reshape(-1)

    @classmethod
    def from_examples(cls, examples, n_features=64):
        examples = list(examples)
        if not examples:
            return cls.empty(n_features)
        return cls(
            np.stack([np.asarray(e.features, dtype=np.float64) for e in examples]),
            np.array([Label(e.label).code for e in examples], dtype=np.int64),
            np.array([e.subject_id for e in examples], dtype=np.int64),
            np.array([e.session_id for e in examples], dtype=np.int64),
            np.array([e.window_index for e in examples], dtype=np.int64),
        )

    @classmethod
    def empty(cls, n_features=64):
        z = np.zeros(0, dtype=np.int64)
        return cls(np.zeros((0, n_features)), z, z.copy(), z.copy(), z.copy())

    @classmethod
    def concat(cls, parts):
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in
                     ("X", "y", "subject_id", "session_id", "window_index")))


def featurize(block, window_frames=125, spec=FilterSpec(), rate_hz=250.0):
    """Filtered per-subcarrier magnitudes averaged over non-overlapping windows.

    A session shorter than one window yields an empty Dataset and a warning.
    """
    if window_frames < 1:
        raise ConfigError("window_frames must be >= 1")
    n_windows = len(block) // window_frames
    if n_windows == 0:
        log.warning("session %d has %d snapshots, fewer than one %d-frame window",
                    block.session_id, len(block), window_frames)
        return Dataset.empty(block.h.shape[1])
    mag = np.abs(block.h)
    smooth = savgol_filter(lowpass_filter(mag, spec, rate_hz), spec)
    used = smooth[: n_windows * window_frames]
    X = used.reshape(n_windows, window_frames, -1).mean(axis=1)
    ones = np.ones(n_windows, dtype=np.int64)
    return Dataset(X, ones * block.label.code, ones * block.subject_id,
                   ones * block.session_id, np.arange(n_windows, dtype=np.int64))


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    sd: np.ndarray

    def apply(self, X):
        return standardize_apply(X, self)


def standardize_fit(X):
    """Per-feature mean and population sd of the training rows."""
    X = np.asarray(X, dtype=np.float64)
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    # rounding leaves ~1e-17 spread on constant columns; use the exact value
    constant = np.ptp(X, axis=0) == 0 if len(X) else np.ones(X.shape[1], bool)
    if len(X):
        mean[constant] = X[0, constant]
    sd[constant | (sd <= 1e-12 * np.maximum(np.abs(mean), 1.0))] = 0.0
    return Standardizer(mean, sd)


def standardize_apply(X, stats):
    """z-score with training statistics; zero-sd features are only centered."""
    scale = np.where(stats.sd > 0, stats.sd, 1.0)
    return (np.asarray(X, dtype=np.float64) - stats.mean) / scale
