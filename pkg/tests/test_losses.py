import math

import numpy as np
import pytest
import torch
import torch.nn as nn
import torch.nn.functional as F

import oracles
from v2s.core import LossWeights, Rng
from v2s.errors import GradientError, ShapeError
from v2s.modules.losses import (
    InterpolatedSample,
    LossParts,
    LossToggles,
    PerceptualExtractor,
    critic_loss,
    fallback_extractor,
    generator_adversarial_loss,
    gradient_penalty,
    mfcc_loss,
    pase_loss,
    power_loss,
    total_generator_loss,
)


_BIAS = torch.zeros(1, requires_grad=True)


def _linear_critic(direction, slope=1.0):
    return lambda x: slope * (x.flatten(1) * direction).sum(dim=1)


def _unit(n, seed=0):
    u = Rng(seed).normal(n)
    return u / u.norm()


class TestCriticLoss:
    def test_constant_critic_gives_zero(self):
        D = lambda x: torch.full((x.shape[0],), 3.0)
        assert critic_loss(D, torch.randn(4, 10), torch.randn(4, 10)).item() == 0.0

    def test_sum_critic(self):
        D = lambda x: x.sum(dim=1)
        assert critic_loss(D, torch.ones(2, 4), torch.zeros(2, 4)).item() == pytest.approx(-4.0)

    def test_batch_mismatch(self):
        with pytest.raises(ShapeError):
            critic_loss(lambda x: x.sum(1), torch.zeros(2, 4), torch.zeros(3, 4))

    def test_empty_batch(self):
        with pytest.raises(ShapeError):
            critic_loss(lambda x: x.sum(1), torch.zeros(0, 4), torch.zeros(0, 4))


class TestGradientPenalty:
    def test_unit_slope_critic_has_no_penalty(self):
        u = _unit(64)
        real, fake = torch.randn(8, 64), torch.randn(8, 64)
        assert gradient_penalty(_linear_critic(u), real, fake, Rng(0)).item() == pytest.approx(0.0, abs=1e-5)

    def test_slope_two_critic(self):
        u = _unit(64)
        real, fake = torch.randn(8, 64), torch.randn(8, 64)
        assert gradient_penalty(_linear_critic(u, 2.0), real, fake, Rng(0)).item() == pytest.approx(10.0, rel=1e-4)

    @pytest.mark.parametrize(
        "D",
        [lambda x: x.sum(dim=1) * 0.0, lambda x: _BIAS.expand(x.shape[0])],
        ids=["zero-slope", "parameter-only"],
    )
    def test_flat_critic_pays_lambda(self, D):
        real, fake = torch.randn(4, 16), torch.randn(4, 16)
        assert gradient_penalty(D, real, fake, Rng(0)).item() == pytest.approx(10.0)
        assert gradient_penalty(D, real, fake, Rng(0), lam=3.0).item() == pytest.approx(3.0)

    def test_works_on_spectrogram_shaped_batches(self):
        u = _unit(5 * 7).view(5, 7)
        D = lambda x: (x * u).sum(dim=(1, 2))
        penalty = gradient_penalty(D, torch.randn(3, 5, 7), torch.randn(3, 5, 7), Rng(0))
        assert penalty.item() == pytest.approx(0.0, abs=1e-5)

    def test_penalty_is_differentiable_in_critic_parameters(self):
        net = nn.Sequential(nn.Linear(16, 8), nn.Tanh(), nn.Linear(8, 1))
        D = lambda x: net(x).squeeze(-1)
        gradient_penalty(D, torch.randn(4, 16), torch.randn(4, 16), Rng(0)).backward()
        assert all(p.grad is not None for p in net.parameters())

    @pytest.mark.parametrize(
        "D", [lambda x: x.detach().sum(dim=1), lambda x: torch.zeros(x.shape[0])], ids=["detached", "constant"]
    )
    def test_critic_without_input_gradient_is_rejected(self, D):
        with pytest.raises(GradientError, match="not differentiable"):
            gradient_penalty(D, torch.randn(4, 16), torch.randn(4, 16), Rng(0))

    def test_non_tensor_critic_is_rejected(self):
        with pytest.raises(TypeError):
            gradient_penalty(lambda x: x.detach().numpy().sum(1), torch.randn(2, 4), torch.randn(2, 4), Rng(0))

    def test_negative_lambda(self):
        with pytest.raises(ValueError):
            gradient_penalty(lambda x: x.sum(1), torch.randn(2, 4), torch.randn(2, 4), Rng(0), lam=-1.0)


def test_interpolants_lie_between_endpoints():
    real, fake = torch.zeros(16, 10), torch.ones(16, 10)
    sample = InterpolatedSample.draw(real, fake, Rng(3))
    assert sample.epsilon.shape == (16,)
    assert ((sample.epsilon >= 0) & (sample.epsilon <= 1)).all()
    torch.testing.assert_close(sample.x_hat, (1 - sample.epsilon)[:, None].expand(16, 10))
    again = InterpolatedSample.draw(real, fake, Rng(3))
    assert torch.equal(sample.x_hat, again.x_hat)


def test_generator_adversarial_loss():
    wave, spec = torch.zeros(3, 100), torch.zeros(3, 5, 5)
    D_wave = lambda x: torch.ones(x.shape[0])
    D_power = lambda x: torch.full((x.shape[0],), 2.0)
    assert generator_adversarial_loss(D_wave, D_power, wave, spec).item() == pytest.approx(-3.0)
    assert generator_adversarial_loss(None, D_power, wave, spec).item() == pytest.approx(-2.0)
    assert generator_adversarial_loss(None, None, wave, spec).item() == 0.0


class TestSpectralLosses:
    def test_identical_signals(self, noise):
        assert power_loss(noise, noise).item() == 0.0
        assert mfcc_loss(noise, noise).item() == 0.0

    def test_scaling_by_e_shifts_log_power_by_two(self):
        x = 0.3 * Rng(0).normal(16000)
        assert power_loss(x, math.e * x).item() == pytest.approx(2.0, abs=1e-4)

    def test_sign_flip_is_invisible(self, noise):
        assert mfcc_loss(noise, -noise).item() == 0.0
        assert power_loss(noise, -noise).item() == 0.0

    def test_symmetric(self, noise):
        other = torch.from_numpy(np.random.default_rng(8).uniform(-0.5, 0.5, 16000))
        assert power_loss(noise, other).item() == pytest.approx(power_loss(other, noise).item())
        assert mfcc_loss(noise, other).item() == pytest.approx(mfcc_loss(other, noise).item())

    def test_power_loss_matches_naive_dft(self, noise):
        other = torch.from_numpy(np.random.default_rng(8).uniform(-0.5, 0.5, 16000))
        log_p = lambda x: np.log(np.maximum(np.abs(oracles.naive_stft(x)) ** 2, 1e-10))
        expected = np.mean(np.abs(log_p(noise.numpy()) - log_p(other.numpy())))
        assert power_loss(noise, other).item() == pytest.approx(expected, abs=1e-5)

    def test_mfcc_loss_matches_explicit_sums(self, noise):
        other = torch.from_numpy(np.random.default_rng(8).uniform(-0.5, 0.5, 16000))
        expected = np.mean(np.abs(oracles.mfcc(noise.numpy()) - oracles.mfcc(other.numpy())))
        assert mfcc_loss(noise, other).item() == pytest.approx(expected, abs=1e-5)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            power_loss(torch.zeros(16000), torch.zeros(15000))
        with pytest.raises(ShapeError):
            mfcc_loss(torch.zeros(16000), torch.zeros(15000))


class TestPerceptual:
    def test_identity_extractor(self):
        extractor = PerceptualExtractor(nn.Identity(), "identity")
        assert pase_loss(extractor, torch.zeros(4), torch.full((4,), 0.5)).item() == pytest.approx(0.5)
        assert pase_loss(extractor, torch.ones(4), torch.ones(4)).item() == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            pase_loss(fallback_extractor(), torch.zeros(16000), torch.zeros(8000))

    def test_fallback_is_deterministic(self, noise):
        x = noise.float()
        torch.testing.assert_close(fallback_extractor(7)(x), fallback_extractor(7)(x), rtol=0, atol=0)
        assert not torch.equal(fallback_extractor(7)(x), fallback_extractor(8)(x))

    def test_fallback_features_match_manual_convolutions(self, noise):
        extractor = fallback_extractor()
        x = noise.float()
        convs = [m for m in extractor.net if isinstance(m, nn.Conv1d)]
        h = x.view(1, 1, -1)
        for i, conv in enumerate(convs):
            h = F.conv1d(h, conv.weight, conv.bias, stride=conv.stride)
            if i < len(convs) - 1:
                h = F.leaky_relu(h, 0.2)
        features = extractor(x)
        assert features.shape == (1, 123, 100)
        torch.testing.assert_close(features, h.transpose(1, 2))

    def test_fallback_is_frozen_and_stays_in_eval(self):
        extractor = fallback_extractor()
        extractor.train()
        assert not extractor.net.training
        assert not any(p.requires_grad for p in extractor.parameters())

    def test_gradient_reaches_the_estimate(self, noise):
        x_hat = (0.5 * noise.float()).requires_grad_(True)
        pase_loss(fallback_extractor(), noise.float(), x_hat).backward()
        assert x_hat.grad.abs().sum() > 0

    def test_sine_and_silence_are_apart(self):
        t = torch.arange(16000) / 16000
        sine = 0.5 * torch.sin(2 * math.pi * 440 * t)
        assert pase_loss(fallback_extractor(), sine, torch.zeros(16000)).item() > 0


class TestTotal:
    def test_default_weights_on_unit_parts(self):
        assert total_generator_loss(LossWeights(), LossParts(1.0, 1.0, 1.0, 1.0)) == pytest.approx(191.4)

    def test_only_adversarial(self):
        weights = LossWeights(alpha_adv=2.0, alpha_pase=9.0, alpha_power=9.0, alpha_mfcc=9.0)
        toggles = LossToggles(adversarial=True, pase=False, power=False, mfcc=False)
        assert total_generator_loss(weights, (1.0, 5.0, 5.0, 5.0), toggles) == pytest.approx(2.0)

    def test_disabling_removes_exactly_one_term(self):
        weights, parts = LossWeights(), LossParts(0.3, 0.02, 0.5, 4.0)
        full = total_generator_loss(weights, parts)
        without_power = total_generator_loss(weights, parts, LossToggles(power=False))
        assert full - without_power == pytest.approx(50.0 * 0.5)

    def test_disabled_term_is_not_evaluated(self):
        parts = LossParts(1.0, float("nan"), 1.0, 1.0)
        total = total_generator_loss(LossWeights(), parts, LossToggles(pase=False))
        assert total == pytest.approx(1.0 + 50.0 + 0.4)

    def test_zero_weights(self):
        weights = LossWeights(0.0, 0.0, 0.0, 0.0)
        assert total_generator_loss(weights, LossParts(1.0, 1.0, 1.0, 1.0)) == 0.0

    def test_toggles_from_config(self):
        from v2s.core import TrainConfig

        toggles = LossToggles.from_config(TrainConfig(enable_wave_critic=False, enable_power_critic=False))
        assert not toggles.adversarial and toggles.pase
