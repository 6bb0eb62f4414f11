"""FFT entry points honoring the CHOQUARD_THREADS parallelism cap."""

from __future__ import annotations

import os

import scipy.fft as _sf


def fft_workers() -> int:
    raw = os.environ.get("CHOQUARD_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return max(1, min(n, os.cpu_count() or 1))


def fftn(a):
    return _sf.fftn(a, workers=fft_workers())


def ifftn(a):
    return _sf.ifftn(a, workers=fft_workers())
