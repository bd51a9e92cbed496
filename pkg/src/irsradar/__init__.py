"""Unimodular waveform and multi-IRS beamformer design for DoA CRLB minimization."""

from .fisher import (
    FisherOperators,
    SingularInformationError,
    crlb,
    fisher_direct,
    fisher_no_irs,
    fisher_quartic,
)
from .scene import ChannelSet, IrsConfig, SceneConfig, build_channels, draw_reflectivities
from .uber import UberConfig, UberResult, run_uber
from .uqp import UqpProblem, UqpResult, solve

__version__ = "0.1.0"
