import json
import math
import shutil

import numpy as np
import pytest
import soundfile as sf
import torch

import oracles
from v2s.core import Rng, VideoClip, Waveform
from v2s.data import (
    AudioVisualDataset,
    EpochBatchSampler,
    ManifestRecord,
    SyntheticSpec,
    augment,
    batch_stream,
    center_crop,
    collate_clips,
    hflip,
    load_audio,
    load_manifest,
    load_video,
    make_synthetic_corpus,
    preprocess_adapter,
    sample_clip_window,
    sample_clip_windows,
    save_audio,
    save_video,
    split_records,
    write_manifest,
)
from v2s.data.synthetic import REST, decode_bar_positions, render_audio, tone_sequence
from v2s.errors import AdapterError, ConfigurationError, FormatError, ManifestError, ShapeError
from v2s.evaluation import mcd


def _record(i, **changes):
    fields = dict(
        id=f"u{i}", video_path=f"v{i}.v2sf", audio_path=f"a{i}.wav", transcript="1 2", speaker_id="s0", split="train"
    )
    fields.update(changes)
    return fields


class TestManifest:
    def _write(self, tmp_path, lines):
        path = tmp_path / "manifest.jsonl"
        path.write_text("".join(line + "\n" for line in lines))
        return path

    def test_empty_manifest(self, tmp_path):
        assert load_manifest(self._write(tmp_path, []), check_paths=False) == []

    def test_paths_resolve_against_manifest_dir(self, tmp_path):
        records = load_manifest(self._write(tmp_path, [json.dumps(_record(0)), "", json.dumps(_record(1))]), check_paths=False)
        assert [r.id for r in records] == ["u0", "u1"]
        assert records[0].video_path == str(tmp_path / "v0.v2sf")
        assert records[0].words == ["1", "2"]

    def test_duplicate_id_names_line(self, tmp_path):
        lines = [json.dumps(_record(0)), json.dumps(_record(1)), json.dumps(_record(0))]
        with pytest.raises(ManifestError, match="line 3.*u0") as info:
            load_manifest(self._write(tmp_path, lines), check_paths=False)
        assert info.value.line == 3

    @pytest.mark.parametrize(
        "line, message",
        [
            ("{not json", "malformed"),
            (json.dumps({k: v for k, v in _record(0).items() if k != "split"}), "missing"),
            (json.dumps(dict(_record(0), extra="x")), "unknown"),
            (json.dumps(_record(0, split="dev")), "split"),
            (json.dumps(_record(0, transcript=3)), "string"),
        ],
    )
    def test_malformed_lines(self, tmp_path, line, message):
        with pytest.raises(ManifestError, match=f"line 2: .*{message}"):
            load_manifest(self._write(tmp_path, [json.dumps(_record(5)), line]), check_paths=False)

    def test_missing_media_file(self, tmp_path):
        with pytest.raises(ManifestError, match="does not exist"):
            load_manifest(self._write(tmp_path, [json.dumps(_record(0))]))

    def test_write_and_split(self, tmp_path):
        records = [ManifestRecord(**_record(i, split=s)) for i, s in enumerate(["train", "val", "train"])]
        path = write_manifest(records, tmp_path / "m.jsonl")
        loaded = load_manifest(path, check_paths=False)
        assert [r.id for r in split_records(loaded, "train")] == ["u0", "u2"]


class TestAudioIO:
    def test_pcm_scaling(self, tmp_path):
        path = tmp_path / "a.wav"
        sf.write(str(path), np.array([0, 16384, -16384], dtype=np.int16), 16000, subtype="PCM_16")
        assert load_audio(path).samples.tolist() == [0.0, 0.5, -0.5]

    def test_wrong_rate(self, tmp_path):
        path = tmp_path / "a.wav"
        sf.write(str(path), np.zeros(100, dtype=np.int16), 44100, subtype="PCM_16")
        with pytest.raises(FormatError, match="16000 Hz"):
            load_audio(path)

    def test_stereo(self, tmp_path):
        path = tmp_path / "a.wav"
        sf.write(str(path), np.zeros((100, 2), dtype=np.int16), 16000, subtype="PCM_16")
        with pytest.raises(FormatError, match="channels"):
            load_audio(path)

    def test_float_wav_is_rejected(self, tmp_path):
        path = tmp_path / "a.wav"
        sf.write(str(path), np.zeros(100, dtype=np.float32), 16000, subtype="FLOAT")
        with pytest.raises(FormatError, match="PCM"):
            load_audio(path)

    def test_save_quantizes(self, tmp_path):
        samples = Rng(0).uniform(1000) * 2 - 1
        loaded = load_audio(save_audio(Waveform(samples), tmp_path / "a.wav"))
        assert (loaded.samples - samples).abs().max() <= 1 / 32768 + 1e-7


class TestVideoIO:
    def test_round_trip(self, tmp_path):
        clip = VideoClip(Rng(0).uniform(25, 96, 96))
        loaded = load_video(save_video(clip, tmp_path / "c.v2sf"), image_size=96)
        assert loaded.num_frames == 25
        assert (loaded.frames - clip.frames).abs().max() <= 0.5 / 255 + 1e-6

    def test_header_layout(self, tmp_path):
        path = save_video(VideoClip(torch.zeros(2, 3, 4)), tmp_path / "c.v2sf")
        raw = path.read_bytes()
        assert raw[:4] == b"V2SF" and raw[4] == 1
        assert len(raw) == 11 + 2 * 3 * 4

    def test_bad_magic(self, tmp_path):
        path = save_video(VideoClip(torch.zeros(2, 8, 8)), tmp_path / "c.v2sf")
        path.write_bytes(b"XXXX" + path.read_bytes()[4:])
        with pytest.raises(FormatError, match="magic"):
            load_video(path)

    def test_truncated_payload(self, tmp_path):
        path = save_video(VideoClip(torch.zeros(2, 8, 8)), tmp_path / "c.v2sf")
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(FormatError, match="payload"):
            load_video(path)

    def test_wrong_frame_size(self, tmp_path):
        path = save_video(VideoClip(torch.zeros(2, 64, 64)), tmp_path / "c.v2sf")
        with pytest.raises(FormatError, match="96x96"):
            load_video(path, image_size=96)


class TestAugment:
    def test_train_augmentation_is_seeded(self):
        clip = VideoClip(Rng(0).uniform(5, 96, 96))
        a, b = augment(clip, Rng(3)), augment(clip, Rng(3))
        assert torch.equal(a.frames, b.frames)
        assert a.frames.shape == (5, 96, 96)
        assert a.frames.min() >= 0 and a.frames.max() <= 1

    def test_same_window_for_every_frame(self):
        frame = Rng(0).uniform(96, 96)
        out = augment(VideoClip(frame.expand(4, 96, 96).clone()), Rng(5))
        for t in range(1, 4):
            assert torch.equal(out.frames[t], out.frames[0])

    def test_eval_is_center_crop(self):
        clip = VideoClip(Rng(0).uniform(3, 96, 96))
        assert torch.equal(augment(clip, Rng(1), train=False).frames, center_crop(clip).frames)
        assert torch.equal(augment(clip, Rng(1), train=False).frames, augment(clip, Rng(2), train=False).frames)

    def test_hflip_is_an_involution(self):
        clip = VideoClip(Rng(0).uniform(3, 16, 16))
        assert torch.equal(hflip(hflip(clip)).frames, clip.frames)
        assert torch.equal(hflip(clip).frames[..., 0], clip.frames[..., -1])


class TestClipWindow:
    def test_window_is_aligned(self):
        ramp = Waveform(torch.arange(48000, dtype=torch.float64) / 48000)
        real, fake = sample_clip_window(ramp, ramp, Rng(0))
        assert len(real) == 16000
        start = int(round(float(real.samples[0]) * 48000))
        assert torch.equal(real.samples, ramp.samples[start : start + 16000])
        assert torch.equal(real.samples, fake.samples)

    def test_short_input_is_zero_padded(self):
        half = Waveform(torch.full((8000,), 0.5))
        real, _ = sample_clip_window(half, half, Rng(0))
        assert len(real) == 16000
        assert torch.equal(real.samples[8000:], torch.zeros(8000))

    def test_seeded(self):
        x = Waveform(Rng(1).uniform(40000))
        assert torch.equal(sample_clip_window(x, x, Rng(4))[0].samples, sample_clip_window(x, x, Rng(4))[0].samples)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            sample_clip_window(Waveform(torch.zeros(100)), Waveform(torch.zeros(99)), Rng(0))

    def test_batched_windows_pair_rows(self):
        real = torch.arange(3 * 20000, dtype=torch.float32).view(3, 20000)
        r, f = sample_clip_windows(real, real + 0.5, Rng(0), 16000)
        assert r.shape == (3, 16000)
        assert torch.equal(f, r + 0.5)


class TestSynthetic:
    def test_single_tone_is_a_continuous_sine(self, tmp_path):
        spec = SyntheticSpec(num_clips=4, tones=(1000.0,))
        n = torch.arange(16000, dtype=torch.float64)
        expected = 0.5 * torch.sin(2 * math.pi * 1000 * n / 16000)
        for record in load_manifest(make_synthetic_corpus(spec, tmp_path)):
            audio = load_audio(record.audio_path).samples.double()
            assert (audio - expected).abs().max() <= 1 / 32768 + 1e-6
            frames = load_video(record.video_path).frames
            assert all(torch.equal(frames[t], frames[0]) for t in range(25))
            assert record.transcript == " ".join(["0"] * 25)

    def test_rests_only_when_requested(self):
        assert SyntheticSpec(num_clips=1).rest_probability == 0.0
        sequence = tone_sequence(SyntheticSpec(num_clips=1, frames_per_clip=200, rest_probability=0.5), Rng(0))
        assert REST in sequence and any(i != REST for i in sequence)

    def test_each_frame_carries_its_tone(self):
        spec = SyntheticSpec(num_clips=1, rest_probability=0.2)
        sequence = tone_sequence(spec, Rng(2))
        audio = render_audio(sequence, spec).samples.numpy()
        for t, index in enumerate(sequence):
            segment = audio[t * 640 : (t + 1) * 640]
            if index == REST:
                assert np.all(segment == 0)
            else:
                assert oracles.dominant_frequency(segment) == pytest.approx(spec.tones[index])

    def test_split_proportions(self, corpus20):
        records = load_manifest(corpus20)
        assert [len(split_records(records, s)) for s in ("train", "val", "test")] == [18, 1, 1]
        assert records[-1].split == "test" and records[-2].split == "val"

    def test_unseen_speakers(self, tmp_path):
        spec = SyntheticSpec(num_clips=12, frames_per_clip=5, num_speakers=4, split_mode="unseen")
        records = load_manifest(make_synthetic_corpus(spec, tmp_path))
        assert {r.speaker_id for r in split_records(records, "test")} == {"spk3"}
        assert {r.speaker_id for r in split_records(records, "val")} == {"spk2"}
        assert {r.speaker_id for r in split_records(records, "train")} == {"spk0", "spk1"}

    def test_byte_identical_across_runs(self, tmp_path):
        spec = SyntheticSpec(num_clips=3, frames_per_clip=10, seed=5)
        make_synthetic_corpus(spec, tmp_path / "a")
        make_synthetic_corpus(spec, tmp_path / "b")
        for rel in ["manifest.jsonl", "video/clip00002.v2sf", "audio/clip00002.wav", "transcripts/clip00002.txt"]:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_bar_position_oracle_reconstructs_audio(self, corpus20):
        spec = SyntheticSpec(num_clips=20, seed=7, rest_probability=0.1)
        for record in load_manifest(corpus20)[:3]:
            sequence = decode_bar_positions(load_video(record.video_path), len(spec.tones))
            assert " ".join(str(i) for i in sequence if i != REST) == record.transcript
            reconstructed = render_audio(sequence, spec)
            assert mcd(load_audio(record.audio_path), reconstructed) < 1.0

    def test_speakers_differ_in_loudness_and_brightness(self, tmp_path):
        spec = SyntheticSpec(num_clips=2, frames_per_clip=5, num_speakers=2, rest_probability=0.0)
        records = load_manifest(make_synthetic_corpus(spec, tmp_path))
        peaks = [load_audio(r.audio_path).samples.abs().max().item() for r in records]
        brightness = [load_video(r.video_path).frames.max().item() for r in records]
        assert peaks[0] == pytest.approx(0.5, abs=1e-3) and peaks[1] == pytest.approx(0.45, abs=1e-3)
        assert brightness[0] == pytest.approx(1.0) and brightness[1] == pytest.approx(0.9, abs=1 / 255)

    @pytest.mark.parametrize(
        "changes", [{"num_clips": 0}, {"tones": (9000.0,)}, {"rest_probability": 1.0}, {"split_mode": "unseen"}]
    )
    def test_invalid_specs(self, changes):
        with pytest.raises(ConfigurationError):
            SyntheticSpec(**dict({"num_clips": 4}, **changes))


class TestPreprocessAdapter:
    def test_copy_tool(self, tmp_path):
        clip = VideoClip(Rng(0).uniform(4, 96, 96))
        raw = save_video(clip, tmp_path / "raw.v2sf")
        out = preprocess_adapter("cp {in} {out}", raw)
        assert torch.equal(out.frames, load_video(raw).frames)

    def test_failing_tool(self, tmp_path):
        with pytest.raises(AdapterError, match="status"):
            preprocess_adapter("false {in} {out}", tmp_path / "raw.v2sf")

    def test_missing_tool(self, tmp_path):
        with pytest.raises(AdapterError, match="not found"):
            preprocess_adapter("no-such-roi-tool-xyz {in} {out}", tmp_path / "raw.v2sf")

    def test_tool_writes_wrong_size(self, tmp_path):
        raw = save_video(VideoClip(torch.zeros(2, 64, 64)), tmp_path / "raw.v2sf")
        with pytest.raises(FormatError):
            preprocess_adapter("cp {in} {out}", raw)

    def test_tool_writes_nothing(self, tmp_path):
        with pytest.raises(AdapterError, match="no output"):
            preprocess_adapter("true {in} {out}", tmp_path / "raw.v2sf")


class TestDataset:
    def test_items(self, tiny_corpus):
        dataset = AudioVisualDataset(load_manifest(tiny_corpus))
        item = dataset[(0, 1)]
        assert item["video"].shape == (25, 96, 96)
        assert item["audio"].shape == (16000,)
        assert item["id"] == "clip00001"
        assert torch.equal(dataset[(0, 1)]["video"], item["video"])

    def test_eval_items_ignore_epoch(self, tiny_corpus):
        dataset = AudioVisualDataset(load_manifest(tiny_corpus), train=False)
        assert torch.equal(dataset[(0, 2)]["video"], dataset[(5, 2)]["video"])

    def test_audio_video_mismatch(self, tmp_path):
        spec = SyntheticSpec(num_clips=1, frames_per_clip=5)
        manifest = make_synthetic_corpus(spec, tmp_path)
        record = load_manifest(manifest)[0]
        save_audio(Waveform(torch.zeros(5000)), record.audio_path)
        with pytest.raises(FormatError, match="audio samples"):
            AudioVisualDataset([record])[0]

    def test_collate_truncates_to_shortest(self):
        items = [
            {"video": torch.zeros(5, 8, 8), "audio": torch.zeros(3200), "id": "a"},
            {"video": torch.zeros(3, 8, 8), "audio": torch.zeros(1920), "id": "b"},
        ]
        batch = collate_clips(items)
        assert batch["video"].shape == (2, 3, 8, 8)
        assert batch["audio"].shape == (2, 1920)
        assert batch["id"] == ["a", "b"]

    def test_batch_sampler_covers_each_epoch(self):
        sampler = EpochBatchSampler(10, 3, seed=1)
        assert sampler.batches_per_epoch == 3
        epoch0 = [k for i in range(3) for (_, k) in sampler.batch(i)]
        assert len(set(epoch0)) == 9
        assert all(e == 1 for e, _ in sampler.batch(3))
        assert sampler.batch(4) == EpochBatchSampler(10, 3, seed=1).batch(4)

    def test_batch_stream_resumes_at_start(self, tiny_corpus):
        dataset = AudioVisualDataset(load_manifest(tiny_corpus))
        full = iter(batch_stream(dataset, 2, seed=0))
        batches = [next(full)["id"] for _ in range(3)]
        resumed = iter(batch_stream(dataset, 2, seed=0, start=2))
        assert next(resumed)["id"] == batches[2]
