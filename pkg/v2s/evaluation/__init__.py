__all__ = [
    "EvalReport",
    "ProbeReport",
    "asr_adapter",
    "edit_operations",
    "evaluate_corpus",
    "mcd",
    "mcd_from_mfcc",
    "mel_spectrogram_figure",
    "oracle_asr",
    "pesq_adapter",
    "silent_probe",
    "spectrogram_difference",
    "stoi",
    "voiced_rms",
    "waveform_figure",
    "wer",
]

from .adapters import asr_adapter, oracle_asr, pesq_adapter
from .diagnostics import mel_spectrogram_figure, spectrogram_difference, waveform_figure
from .metrics import edit_operations, mcd, mcd_from_mfcc, stoi, wer
from .probe import ProbeReport, silent_probe, voiced_rms
from .report import EvalReport, evaluate_corpus
