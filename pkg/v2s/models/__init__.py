__all__ = [
    "GeneratorNet",
    "PowerCriticNet",
    "WaveCriticNet",
    "build_networks",
    "critic_power",
    "critic_wave",
    "decode",
    "encode",
    "encode_frames",
    "generate",
]

from .critics import PowerCriticNet, WaveCriticNet
from .generator import GeneratorNet
from .inference import build_networks, critic_power, critic_wave, decode, encode, encode_frames, generate
