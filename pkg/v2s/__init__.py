"""End-to-end video-to-speech synthesis with adversarially trained waveform generation."""

__version__ = "0.3.0"
