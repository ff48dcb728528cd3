"""Run configuration shared by the library entry points and the CLI."""
from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class RunConfig:
    kmax: int = 3
    bmax: int = 16
    cores_to_try: int = 8
    mode: str = "auto"            # auto | structural | hybrid | oracle
    state_cap: int = 10 ** 8
    seed: int = 0
    json: bool = False
    paranoid: bool = False        # cross-check consistency decisions even under python -O
    max_promoted: int = 12        # quantified variables the hybrid search may enumerate over
    timings: bool = False         # emit measured elapsed_ms in JSON reports
    sbar_order: str = "maximal"   # maximal | minimal, see hybrid.selections

    def __post_init__(self):
        for name in ("kmax", "bmax", "cores_to_try", "state_cap", "max_promoted"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.mode not in ("auto", "structural", "hybrid", "oracle"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.sbar_order not in ("maximal", "minimal"):
            raise ValueError(f"unknown selection order {self.sbar_order!r}")

    @property
    def cross_check(self) -> bool:
        return self.paranoid or __debug__


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("SHARPCQ_THREADS", "1")))
    except ValueError:
        return 1
