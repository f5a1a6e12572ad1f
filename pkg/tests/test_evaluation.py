import itertools
import json
import logging
import shutil

import numpy as np
import pytest
import torch

import oracles
from v2s.core import TrainConfig, Waveform
from v2s.data import load_audio, load_manifest, save_audio
from v2s.data.synthetic import DEFAULT_TONES
from v2s.dsp import mel_center_frequencies
from v2s.errors import ConfigurationError, MetricError
from v2s.evaluation import (
    EvalReport,
    asr_adapter,
    edit_operations,
    evaluate_corpus,
    mcd,
    mcd_from_mfcc,
    mel_spectrogram_figure,
    oracle_asr,
    pesq_adapter,
    silent_probe,
    spectrogram_difference,
    stoi,
    wer,
)
from v2s.evaluation.metrics import MCD_SCALE
from v2s.evaluation.report import UtteranceScores, parse_metrics
from v2s.training import build_state


@pytest.fixture
def speech_like():
    """Two seconds of noise under a 4 Hz syllable-rate envelope."""
    rng = np.random.default_rng(0)
    t = np.arange(32000) / 16000
    envelope = 0.5 * (1 + np.sin(2 * np.pi * 4 * t)) ** 2 / 4
    return envelope * rng.uniform(-1, 1, 32000)


class TestStoi:
    def test_identical(self, speech_like):
        assert stoi(speech_like, speech_like) == pytest.approx(1.0, abs=1e-9)

    def test_tiny_noise(self, speech_like):
        noisy = speech_like + 1e-4 * np.random.default_rng(1).standard_normal(len(speech_like))
        assert stoi(speech_like, noisy) >= 0.99

    def test_independent_noise(self, speech_like):
        noise = 0.2 * np.random.default_rng(2).uniform(-1, 1, len(speech_like))
        assert stoi(speech_like, noise) < 0.35

    def test_monotone_in_noise_level(self, speech_like):
        noise = np.random.default_rng(3).standard_normal(len(speech_like))
        scores = [stoi(speech_like, speech_like + level * noise) for level in (0.01, 0.1, 0.5)]
        assert scores[0] >= scores[1] >= scores[2]

    def test_too_short(self):
        with pytest.raises(MetricError, match="shorter"):
            stoi(np.ones(1000), np.ones(1000))

    def test_length_mismatch(self, speech_like):
        with pytest.raises(MetricError, match="length"):
            stoi(speech_like, speech_like[:-1])


class TestMcd:
    def test_identical(self, noise):
        assert mcd(noise, noise) == 0.0

    def test_first_coefficient_offset(self):
        reference = np.random.default_rng(0).standard_normal((25, 10))
        shifted = reference.copy()
        shifted[1] += 0.5
        assert mcd_from_mfcc(reference, shifted) == pytest.approx(MCD_SCALE * 0.5, abs=1e-9)

    def test_zeroth_coefficient_is_ignored(self):
        reference = np.zeros((25, 10))
        shifted = reference.copy()
        shifted[0] += 3.0
        assert mcd_from_mfcc(reference, shifted) == 0.0

    def test_matches_oracle(self, noise):
        other = torch.from_numpy(np.random.default_rng(5).uniform(-0.5, 0.5, 16000))
        assert mcd(noise, other) == pytest.approx(oracles.mcd(noise.numpy(), other.numpy()), abs=1e-6)

    def test_symmetric_and_triangle(self, noise):
        rng = np.random.default_rng(6)
        y = torch.from_numpy(rng.uniform(-0.5, 0.5, 16000))
        z = torch.from_numpy(rng.uniform(-0.1, 0.1, 16000))
        assert mcd(noise, y) == pytest.approx(mcd(y, noise))
        assert mcd(noise, z) <= mcd(noise, y) + mcd(y, z) + 1e-9


class TestWer:
    def test_one_substitution_in_six(self):
        assert wer("a b c d e f", "a b x d e f") == pytest.approx(1 / 6)

    def test_empty_hypothesis(self):
        assert wer("a b c", "") == 1.0

    def test_identical(self):
        assert wer(["1", "2"], ["1", "2"]) == 0.0

    def test_insertions_can_exceed_one(self):
        assert wer("a", "b c d") == 3.0

    def test_empty_reference(self):
        with pytest.raises(MetricError):
            wer("", "a")

    def test_consistent_case_changes_do_not_matter(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            ref = " ".join(rng.choice(["bin", "Blue", "AT", "f", "two"], size=6))
            hyp = " ".join(rng.choice(["bin", "Blue", "AT", "f", "now"], size=5))
            expected = wer(ref, hyp)
            for normalize in (str.lower, str.upper, str.title):
                assert wer(normalize(ref), normalize(hyp)) == expected
        assert wer("Place Blue AT", "place blue at") == 0.0
        assert wer("a b", "a b") == 0.0

    def test_operations(self):
        assert edit_operations("a b c", "a c") == (0, 1, 0)
        assert edit_operations("a c", "a b c") == (0, 0, 1)
        assert edit_operations("a b", "a x") == (1, 0, 0)

    def test_matches_exhaustive_alignment(self):
        vocab = ["a", "b"]
        sequences = [list(s) for n in range(0, 5) for s in itertools.product(vocab, repeat=n)]
        rng = np.random.default_rng(0)
        sequences += [list(rng.choice(["a", "b", "c"], size=6)) for _ in range(30)]
        for ref in sequences:
            if not ref:
                continue
            for hyp in sequences:
                assert sum(edit_operations(ref, hyp)) == oracles.edit_distance(tuple(ref), tuple(hyp))


class TestSpectrogramDifference:
    def test_identical_is_white(self, noise, tmp_path):
        diff, image = spectrogram_difference(noise, noise, tmp_path / "d.png")
        assert np.all(diff == 0)
        assert np.all(np.asarray(image) == 255)
        assert (tmp_path / "d.png").is_file()

    def test_symmetric(self, noise):
        other = -0.5 * noise
        np.testing.assert_array_equal(spectrogram_difference(noise, other)[0], spectrogram_difference(other, noise)[0])

    def test_tone_against_silence_peaks_in_its_band(self):
        centers = mel_center_frequencies()
        band = 15
        tone = round(centers[band] / 31.25) * 31.25
        t = np.arange(16000) / 16000
        diff, image = spectrogram_difference(0.5 * np.sin(2 * np.pi * tone * t), np.zeros(16000))
        assert int(np.argmax(diff.mean(axis=1))) == band
        assert np.asarray(image).shape == (40, 98)

    def test_length_mismatch(self):
        with pytest.raises(MetricError):
            spectrogram_difference(np.zeros(1000), np.zeros(999))

    def test_figure(self, noise, tmp_path):
        a, b = Waveform(noise.float()), Waveform((0.5 * noise).float())
        assert mel_spectrogram_figure(a, b, tmp_path / "fig.png").stat().st_size > 0


class TestAdapters:
    def test_pesq_unconfigured(self, tmp_path):
        assert pesq_adapter(None, tmp_path / "r.wav", tmp_path / "d.wav") is None

    def test_pesq_parses_last_number(self, tmp_path):
        assert pesq_adapter("echo P.862 score: 2.10", tmp_path / "r.wav", tmp_path / "d.wav") == pytest.approx(2.10)

    def test_pesq_failure_is_logged(self, tmp_path, caplog):
        with caplog.at_level(logging.WARNING):
            assert pesq_adapter("false {ref} {deg}", tmp_path / "r.wav", tmp_path / "d.wav") is None
        assert "PESQ failed" in caplog.text

    def test_asr_words(self, tmp_path):
        assert asr_adapter("echo bin blue at f two now", tmp_path / "x.wav") == ["bin", "blue", "at", "f", "two", "now"]
        assert asr_adapter("false", tmp_path / "x.wav") is None

    def test_oracle_asr_recovers_transcripts(self, corpus20):
        for record in load_manifest(corpus20)[:5]:
            assert oracle_asr(load_audio(record.audio_path)) == record.words

    def test_oracle_asr_on_silence(self):
        assert oracle_asr(Waveform(torch.zeros(16000))) == []


class TestReport:
    def test_means_and_missing(self):
        rows = [
            UtteranceScores("a", "s0", scores={"mcd": 1.0, "wer": 0.0}),
            UtteranceScores("b", "s1", scores={"mcd": 3.0, "wer": 0.5}),
            UtteranceScores("c", "s1", missing=True),
        ]
        report = EvalReport(("mcd", "wer"), rows)
        assert report.missing_count == 1
        assert report.means() == {"mcd": 2.0, "wer": 0.25}
        assert report.speaker_means()["s1"] == {"mcd": 3.0, "wer": 0.5}
        frame = report.to_frame()
        assert list(frame.columns) == ["id", "speaker_id", "missing", "mcd", "wer"]
        assert frame.iloc[-1]["id"] == "mean"

    def test_write(self, tmp_path):
        report = EvalReport(("mcd",), [UtteranceScores("a", "s0", scores={"mcd": 1.5})])
        csv_path, json_path = report.write(tmp_path / "r.csv")
        assert json.loads(json_path.read_text())["means"] == {"mcd": 1.5}
        assert csv_path.read_text().splitlines()[0] == "id,speaker_id,missing,mcd"

    def test_parse_metrics(self):
        assert parse_metrics("MCD, wer,mcd") == ("mcd", "wer")
        with pytest.raises(ConfigurationError, match="bleu"):
            parse_metrics("stoi,bleu")

    def test_reference_as_hypothesis(self, corpus20, tmp_path):
        records = load_manifest(corpus20)[:4]
        for record in records:
            shutil.copy(record.audio_path, tmp_path / f"{record.id}.wav")
        report = evaluate_corpus(records, tmp_path, num_workers=2)
        means = report.means()
        assert means["stoi"] == pytest.approx(1.0, abs=1e-6)
        assert means["mcd"] == 0.0
        assert means["wer"] == 0.0

    def test_missing_hypothesis_and_subset(self, corpus20, tmp_path):
        records = load_manifest(corpus20)[:3]
        for record in records[:2]:
            shutil.copy(record.audio_path, tmp_path / f"{record.id}.wav")
        report = evaluate_corpus(records, tmp_path, metrics="mcd", num_workers=1)
        assert report.metrics == ("mcd",)
        assert report.missing_count == 1
        assert report.summary()["missing_count"] == 1

    def test_length_mismatch_is_recorded(self, corpus20, tmp_path, caplog):
        records = load_manifest(corpus20)[:2]
        for record, cut in zip(records, (2000, 300)):
            samples = load_audio(record.audio_path).samples
            save_audio(Waveform(samples[:-cut]), tmp_path / f"{record.id}.wav")
        with caplog.at_level(logging.WARNING, logger="v2s.evaluation.report"):
            report = evaluate_corpus(records, tmp_path, metrics="mcd", num_workers=1)
        assert [r.length_mismatch for r in report.rows] == [-2000, -300]
        assert report.summary()["length_mismatch"] == {records[0].id: -2000, records[1].id: -300}
        warned = [r.getMessage() for r in caplog.records if "common prefix" in r.getMessage()]
        assert len(warned) == 1 and records[0].id in warned[0]

    def test_pesq_dropped_without_command(self, corpus20, tmp_path):
        records = load_manifest(corpus20)[:1]
        shutil.copy(records[0].audio_path, tmp_path / f"{records[0].id}.wav")
        assert evaluate_corpus(records, tmp_path, metrics="mcd,pesq", num_workers=1).metrics == ("mcd",)

    def test_missing_hyp_dir(self, corpus20, tmp_path):
        with pytest.raises(ConfigurationError, match="hypothesis directory"):
            evaluate_corpus(load_manifest(corpus20), tmp_path / "nope")


class TestSilentProbe:
    @pytest.fixture
    def state(self):
        return build_state(TrainConfig(model_width_scale=0.25))

    def test_length_and_files(self, state, tmp_path):
        report = silent_probe(state, seconds=2.0, out_dir=tmp_path)
        assert report.num_samples == 32000
        assert len(load_audio(tmp_path / "silent.wav")) == 32000
        assert (tmp_path / "silent.png").is_file()
        assert json.loads((tmp_path / "silent.json").read_text())["num_samples"] == 32000
        assert 0 <= report.rms <= report.peak <= 1

    def test_deterministic(self, state):
        assert silent_probe(state, seconds=1.0) == silent_probe(state, seconds=1.0)
