"""Deterministic seed derivation for replications and per-patient streams.

Every worker owns a stream derived from the master seed and a stable key,
so results never depend on scheduling. Patient streams key on the profile
content rather than cohort position: equal profiles reuse equal draws,
which makes population summaries invariant to duplicating or reordering
members.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .core import CovariateProfile

_RUN_STREAM = 1
_PATIENT_STREAM = 2


def _derive(parts: list[int]) -> int:
    ss = np.random.SeedSequence(parts)
    return int(ss.generate_state(2, np.uint32).view(np.uint64)[0])


def run_seed(master_seed: int, index: int) -> int:
    """Seed of replication run ``index`` under ``master_seed``."""
    return _derive([int(master_seed), _RUN_STREAM, int(index)])


def run_seeds(master_seed: int, n_runs: int) -> list[int]:
    return [run_seed(master_seed, i) for i in range(n_runs)]


def profile_key(profile: CovariateProfile) -> int:
    """Stable 64-bit key of a profile's field values."""
    payload = repr(
        (
            profile.age,
            profile.sex.value,
            profile.smoker,
            profile.alcohol,
            profile.diabetes,
            profile.hypertension,
            profile.ses_level,
            profile.eq5d_index,
        )
    ).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def patient_seed(master_seed: int, profile: CovariateProfile) -> int:
    """Seed of the sampling stream for one patient's engine run."""
    key = profile_key(profile)
    return _derive([int(master_seed), _PATIENT_STREAM, key >> 32, key & 0xFFFFFFFF])
