"""End-to-end helpers: campaign -> CFR blocks -> labeled examples."""

import logging

from .channel import simulate_campaign
from .estimation import cfr_stream
from .ofdm import OfdmConfig
from .preprocess import Dataset, FilterSpec, featurize, reject_artifacts

log = logging.getLogger(__name__)


def campaign_blocks(session_set):
    """Yield one CfrBlock per simulated session."""
    for session in session_set:
        yield cfr_stream(session, session_set.cfg)


def examples_from_blocks(blocks, window_frames=125, spec=FilterSpec(), rate_hz=250.0,
                         z_threshold=6.0):
    """Reject artifacts and featurize every block; returns (Dataset, n_rejected)."""
    parts, rejected = [], 0
    for block in blocks:
        kept, n_bad = reject_artifacts(block, z_threshold)
        rejected += n_bad
        parts.append(featurize(kept, window_frames, spec, rate_hz))
    log.info("artifact rejection dropped %d snapshots", rejected)
    return Dataset.concat(parts), rejected


def build_dataset(kind="chest", n_subjects=5, sessions_per_class=5, duration_s=30.0,
                  separation=0.2, snr_db=15.0, seed=0, cfg=None, window_frames=125,
                  spec=FilterSpec(), z_threshold=6.0):
    cfg = cfg or OfdmConfig()
    sessions = simulate_campaign(cfg, kind, n_subjects, sessions_per_class, duration_s,
                                 separation, snr_db, seed)
    return examples_from_blocks(campaign_blocks(sessions), window_frames, spec,
                                cfg.frames_per_second, z_threshold)
