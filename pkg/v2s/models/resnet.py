from typing import Callable, Sequence

import torch
import torch.nn as nn
from torchvision.models.resnet import BasicBlock, conv1x1

RESNET18_WIDTHS = (64, 128, 256, 512)


def scaled(width: int, scale: float) -> int:
    return max(1, int(round(width * scale)))


def no_norm(num_features: int) -> nn.Module:
    return nn.Identity()


class ResNetTrunk(nn.Module):
    """
    The four residual stages of a ResNet-18 (two basic blocks, i.e. four
    3x3 convolutions, per stage) followed by global average pooling.

    :param in_planes: channels produced by the front-end
    :param widths: output channels of each stage
    :param norm_layer: ``nn.BatchNorm2d`` for the generator, :func:`no_norm`
        for the critics (batch statistics break the gradient penalty)
    """

    def __init__(
        self,
        in_planes: int,
        widths: Sequence[int] = RESNET18_WIDTHS,
        norm_layer: Callable[[int], nn.Module] = nn.BatchNorm2d,
    ):
        super().__init__()
        self.inplanes = in_planes
        self.norm_layer = norm_layer
        self.layers = nn.Sequential(
            *[self._make_layer(width, blocks=2, stride=1 if i == 0 else 2) for i, width in enumerate(widths)]
        )
        self.avgpool = nn.AdaptiveAvgPool2d((1, 1))
        self.out_features = widths[-1]

        for m in self.modules():
            if isinstance(m, nn.Conv2d):
                nn.init.kaiming_normal_(m.weight, mode="fan_out", nonlinearity="relu")
            elif isinstance(m, nn.BatchNorm2d):
                nn.init.constant_(m.weight, 1)
                nn.init.constant_(m.bias, 0)

    def _make_layer(self, planes: int, blocks: int, stride: int) -> nn.Sequential:
        downsample = None
        if stride != 1 or self.inplanes != planes:
            downsample = nn.Sequential(conv1x1(self.inplanes, planes, stride), self.norm_layer(planes))
        layers = [BasicBlock(self.inplanes, planes, stride, downsample, norm_layer=self.norm_layer)]
        self.inplanes = planes
        for _ in range(1, blocks):
            layers.append(BasicBlock(self.inplanes, planes, norm_layer=self.norm_layer))
        return nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.layers(x)
        return torch.flatten(self.avgpool(x), 1)
