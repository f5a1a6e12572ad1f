__all__ = [
    "AudioVisualDataset",
    "EpochBatchSampler",
    "ManifestRecord",
    "SyntheticSpec",
    "augment",
    "batch_stream",
    "center_crop",
    "collate_clips",
    "hflip",
    "load_audio",
    "load_manifest",
    "load_video",
    "make_synthetic_corpus",
    "preprocess_adapter",
    "run_tool",
    "sample_clip_window",
    "sample_clip_windows",
    "save_audio",
    "save_video",
    "split_records",
    "write_manifest",
]

from .adapter import preprocess_adapter, run_tool
from .augment import augment, center_crop, hflip, sample_clip_window, sample_clip_windows
from .dataset import AudioVisualDataset, EpochBatchSampler, batch_stream, collate_clips
from .io import load_audio, load_video, save_audio, save_video
from .manifest import ManifestRecord, load_manifest, split_records, write_manifest
from .synthetic import SyntheticSpec, make_synthetic_corpus
