"""Per-subcarrier channel estimation, h_i = y_i / x_i."""

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError
from .labels import Label
from .ofdm import demodulate


@dataclass(frozen=True)
class CfrSnapshot:
    h: np.ndarray
    frame_index: int
    session_id: int
    subject_id: int
    label: Label


@dataclass
class CfrBlock:
    """All snapshots of one session as a (frames, subcarriers) complex array."""

    h: np.ndarray
    frame_indices: np.ndarray
    subject_id: int
    session_id: int
    label: Label

    def __len__(self):
        return len(self.frame_indices)

    def __iter__(self):
        for row, k in zip(self.h, self.frame_indices):
            yield CfrSnapshot(row, int(k), self.session_id, self.subject_id, self.label)

    def take(self, mask):
        return CfrBlock(self.h[mask], self.frame_indices[mask], self.subject_id,
                        self.session_id, self.label)

    @classmethod
    def from_snapshots(cls, snapshots):
        snapshots = list(snapshots)
        if not snapshots:
            raise ValueError("no snapshots")
        first = snapshots[0]
        return cls(np.stack([s.h for s in snapshots]),
                   np.array([s.frame_index for s in snapshots], dtype=np.int64),
                   first.subject_id, first.session_id, first.label)


def estimate_cfr_batch(tx, rx, cfg, frame_indices=None):
    """Rows of h for matching rows of transmitted and received samples."""
    x = demodulate(cfg, tx)
    y = demodulate(cfg, rx)
    zero = x == 0
    if np.any(zero):
        rows = np.nonzero(np.any(np.atleast_2d(zero), axis=-1))[0]
        frame = int(frame_indices[rows[0]]) if frame_indices is not None else int(rows[0])
        raise EstimationError(f"zero transmitted symbol in frame {frame}", frame)
    return y / x


def estimate_cfr(tx, rx, cfg, session_id=0, subject_id=0, label=Label.HYDRATED):
    """Estimate one snapshot from a transmitted/received TimeFrame pair."""
    h = estimate_cfr_batch(tx.samples, rx.samples, cfg, [tx.frame_index])
    return CfrSnapshot(h, tx.frame_index, session_id, subject_id, Label(label))


def cfr_stream(session, cfg):
    """One snapshot per frame pair of a simulated session, order preserved."""
    sc = session.scenario
    if len(session) == 0:
        return CfrBlock(np.zeros((0, cfg.n_subcarriers), complex), np.zeros(0, np.int64),
                        sc.subject_id, sc.session_id, sc.hydration_label)
    h = estimate_cfr_batch(session.tx, session.rx, cfg, session.frame_indices)
    return CfrBlock(h, np.asarray(session.frame_indices), sc.subject_id, sc.session_id,
                    sc.hydration_label)
