"""Metrics, file enhancement, the gradient suite and the command-line interface."""

from .enhance import Enhancer, check_compatible, enhance_file, evaluate, score
from .gradsuite import GradResult, end_to_end_check, run_gradient_suite
from .metrics import MetricEntry, MetricReport, input_snr, si_sdr, ssnr

__all__ = [
    "Enhancer",
    "GradResult",
    "MetricEntry",
    "MetricReport",
    "check_compatible",
    "end_to_end_check",
    "enhance_file",
    "evaluate",
    "input_snr",
    "run_gradient_suite",
    "score",
    "si_sdr",
    "ssnr",
]
