"""
Dataset plumbing for training and validation.

Items are addressed by ``(epoch, index)`` so the augmentation of an item
depends only on the seed, the epoch and the index, never on which worker
loads it or on the order of loading.
"""
import logging
import os
from typing import Iterator, List, Sequence, Tuple, Union

import torch
from torch.utils.data import DataLoader, Dataset, Sampler

from ..core.rng import Rng
from ..errors import FormatError
from .augment import augment
from .io import load_audio, load_video
from .manifest import ManifestRecord

logpy = logging.getLogger(__name__)

ItemKey = Union[int, Tuple[int, int]]


def num_workers_cap(requested: int) -> int:
    """``requested`` capped by the V2S_NUM_WORKERS environment variable."""
    cap = os.environ.get("V2S_NUM_WORKERS")
    if cap is None:
        return requested
    try:
        return max(0, min(requested, int(cap)))
    except ValueError:
        logpy.warning(f"ignoring non-integer V2S_NUM_WORKERS={cap!r}")
        return requested


def fit_audio(samples: torch.Tensor, length: int) -> torch.Tensor:
    if samples.shape[-1] >= length:
        return samples[..., :length]
    return torch.nn.functional.pad(samples, (0, length - samples.shape[-1]))


class AudioVisualDataset(Dataset):
    """
    :param records: manifest records of one split
    :param samples_per_frame: audio samples per video frame; audio is cut or
        zero-padded to ``T * samples_per_frame``
    :param train: random crop and flip when true, centred crop otherwise
    """

    def __init__(
        self,
        records: Sequence[ManifestRecord],
        seed: int = 0,
        image_size: int = 96,
        frame_rate: int = 25,
        sample_rate: int = 16000,
        samples_per_frame: int = 640,
        train: bool = True,
    ):
        super().__init__()
        self.records = list(records)
        self.seed = seed
        self.image_size = image_size
        self.frame_rate = frame_rate
        self.sample_rate = sample_rate
        self.samples_per_frame = samples_per_frame
        self.train = train
        self.rng = Rng(seed, stream=7)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, key: ItemKey) -> dict:
        epoch, index = key if isinstance(key, tuple) else (0, key)
        record = self.records[index]
        clip = load_video(record.video_path, self.frame_rate, self.image_size)
        audio = load_audio(record.audio_path, self.sample_rate)
        expected = clip.num_frames * self.samples_per_frame
        if abs(len(audio) - expected) > self.samples_per_frame:
            raise FormatError(
                f"{record.id}: {len(audio)} audio samples for {clip.num_frames} frames, expected about {expected}"
            )
        clip = augment(clip, self.rng.spawn(epoch, index), train=self.train)
        return {"video": clip.frames, "audio": fit_audio(audio.samples, expected), "id": record.id}


def collate_clips(items: List[dict]) -> dict:
    """Stack items, truncating every clip to the shortest one in the batch."""
    frames = min(item["video"].shape[0] for item in items)
    samples = min(item["audio"].shape[0] for item in items)
    samples = min(samples, frames * (items[0]["audio"].shape[0] // items[0]["video"].shape[0]))
    return {
        "video": torch.stack([item["video"][:frames] for item in items]),
        "audio": torch.stack([item["audio"][:samples] for item in items]),
        "id": [item["id"] for item in items],
    }


class EpochBatchSampler(Sampler):
    """
    Endless stream of index batches, starting at global batch ``start``.

    Epoch ``e`` visits the items in a permutation seeded by ``(seed, e)``;
    batch ``i`` belongs to epoch ``i // batches_per_epoch``.
    """

    def __init__(self, num_items: int, batch_size: int, seed: int = 0, start: int = 0):
        if num_items < 1:
            raise ValueError("cannot sample batches from an empty dataset")
        self.num_items = num_items
        self.batch_size = min(batch_size, num_items)
        self.batches_per_epoch = max(1, num_items // self.batch_size)
        self.seed = seed
        self.start = start

    def batch(self, i: int) -> List[Tuple[int, int]]:
        epoch, j = divmod(i, self.batches_per_epoch)
        perm = Rng(self.seed, stream=11).spawn(epoch).permutation(self.num_items).tolist()
        return [(epoch, k) for k in perm[j * self.batch_size : (j + 1) * self.batch_size]]

    def __iter__(self) -> Iterator[List[Tuple[int, int]]]:
        i = self.start
        while True:
            yield self.batch(i)
            i += 1


def batch_stream(dataset: AudioVisualDataset, batch_size: int, seed: int = 0, start: int = 0, num_workers: int = 0):
    sampler = EpochBatchSampler(len(dataset), batch_size, seed, start)
    return DataLoader(dataset, batch_sampler=sampler, num_workers=num_workers_cap(num_workers), collate_fn=collate_clips)
