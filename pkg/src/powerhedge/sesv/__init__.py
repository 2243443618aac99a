"""Self-exciting jumps, fractional Brownian motion and long-memory diagnostics."""

from .fbm import FbmParams, fbm_generate, fgbm_path, fgn_autocovariance, fgn_sample
from .hawkes import HawkesParams, simulate_hawkes
from .lrd import LrdReport, lrd_diagnostics, sample_acf
from .model import JumpSizeLaw, SesvParams, jump_security_paths, simulate_sesv

__all__ = [
    "FbmParams", "fbm_generate", "fgbm_path", "fgn_autocovariance", "fgn_sample",
    "HawkesParams", "simulate_hawkes", "LrdReport", "lrd_diagnostics", "sample_acf",
    "JumpSizeLaw", "SesvParams", "jump_security_paths", "simulate_sesv",
]
