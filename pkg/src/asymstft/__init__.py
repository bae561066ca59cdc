"""Low-latency streaming STFT with an asymmetric analysis/synthesis window pair."""

from asymstft.metrics import MultiResConfig, measure_delay_snr, multires_mag_loss
from asymstft.nalr import Audiogram, NalrPrescription, apply_amplification, design_fir, nalr_gains
from asymstft.process import (
    FrameProcessor,
    SuppressionParams,
    chain,
    identity_processor,
    magnitude_gain_processor,
)
from asymstft.stft import (
    SpectrumFrame,
    StftConfig,
    StreamingStft,
    algorithmic_latency,
    process_signal,
)
from asymstft.window import (
    TailVariant,
    WindowPair,
    WindowParams,
    cola_envelope,
    make_window_pair,
    normalize_synthesis,
)

__version__ = "0.1.0"
