"""The recurrent depth-prediction network.

Encoder: three stride-2 convolutions, each followed by layer norm and a
5x5 conv-LSTM (whose output is layer-normalized before feeding forward;
the recurrent state keeps the raw cell output).  Decoder: three
depth-to-space upsamplings interleaved with stride-1 convolutions and two
more conv-LSTMs, ending in a 1-channel convolution and a sigmoid, so the
output is a normalized depth label map in (0, 1).

Odd input sizes are supported by ceil-mode SAME convolutions in the
encoder and cropping decoder feature maps back to the matching encoder
size after each upsampling; at the default 88x288 input no cropping ever
happens.
"""

from dataclasses import dataclass, field

import numpy as np

from geowarp.nn import ops
from geowarp.nn.tensor import Tensor

# (name, kernel, base output channels, stride) for the plain convolutions
_CONV_SPECS = [
    ("conv1", 5, 32, 2),
    ("conv2", 3, 64, 2),
    ("conv3", 3, 128, 2),
    ("conv4", 3, 64, 1),
    ("conv5", 3, 32, 1),
    ("conv6", 5, 1, 1),
]
_LSTM_KERNEL = 5


@dataclass(frozen=True)
class ArchitectureConfig:
    """Layer stack description; channel_divisor shrinks every hidden width."""

    input_height: int = 88
    input_width: int = 288
    channel_divisor: int = 1

    def __post_init__(self):
        if self.input_height < 8 or self.input_width < 8:
            raise ValueError("input must be at least 8x8")
        for _, _, base, _ in _CONV_SPECS[:-1]:
            c = base // self.channel_divisor
            if c < 4 or base % self.channel_divisor:
                raise ValueError(
                    f"channel_divisor {self.channel_divisor} leaves too few channels"
                )

    def channels(self, name):
        for n, _, base, _ in _CONV_SPECS:
            if n == name:
                return 1 if name == "conv6" else base // self.channel_divisor
        raise KeyError(name)

    def encoder_sizes(self):
        """Spatial size at each encoder level (level 0 = input)."""
        h, w = self.input_height, self.input_width
        sizes = [(h, w)]
        for _ in range(3):
            h, w = -(-h // 2), -(-w // 2)
            sizes.append((h, w))
        return sizes

    def param_specs(self):
        """Ordered (name, shape) pairs for every parameter tensor."""
        specs = []
        c_in = 3
        for i, (name, k, _base, _stride) in enumerate(_CONV_SPECS):
            c_out = self.channels(name)
            specs.append((f"{name}/w", (k, k, c_in, c_out)))
            specs.append((f"{name}/b", (c_out,)))
            if name != "conv6":
                specs.append((f"{name}_ln/gamma", (c_out,)))
                specs.append((f"{name}_ln/beta", (c_out,)))
            if i < 5:
                lstm = f"lstm{i + 1}"
                specs.append((f"{lstm}/w", (_LSTM_KERNEL, _LSTM_KERNEL, 2 * c_out, 4 * c_out)))
                specs.append((f"{lstm}/b", (4 * c_out,)))
                specs.append((f"{lstm}_ln/gamma", (c_out,)))
                specs.append((f"{lstm}_ln/beta", (c_out,)))
                # a depth-to-space (block 2) precedes conv4, conv5 and conv6
                c_in = c_out // 4 if i >= 2 else c_out
        return specs

    def lstm_channels(self):
        return [self.channels("conv1"), self.channels("conv2"), self.channels("conv3"),
                self.channels("conv4"), self.channels("conv5")]

    def lstm_sizes(self):
        enc = self.encoder_sizes()
        return [enc[1], enc[2], enc[3], enc[2], enc[1]]

    def to_dict(self):
        return {
            "input_height": self.input_height,
            "input_width": self.input_width,
            "channel_divisor": self.channel_divisor,
        }

    @staticmethod
    def from_dict(d):
        return ArchitectureConfig(
            input_height=int(d.get("input_height", 88)),
            input_width=int(d.get("input_width", 288)),
            channel_divisor=int(d.get("channel_divisor", 1)),
        )


@dataclass
class ConvLstmState:
    """Raw hidden and cell tensors of one conv-LSTM layer."""

    h: Tensor
    c: Tensor


def zero_states(config, batch, dtype=np.float32):
    """Fresh all-zero recurrent states for a sequence start."""
    states = []
    for (h, w), c in zip(config.lstm_sizes(), config.lstm_channels()):
        z = np.zeros((batch, h, w, c), dtype=dtype)
        states.append(ConvLstmState(Tensor(z.copy()), Tensor(z.copy())))
    return states


def init_params(config, seed, dtype=np.float32):
    """Gaussian(0, 0.01) weights, zero biases except forget-gate biases = 1,
    unit layer-norm gains; deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in config.param_specs():
        if name.endswith("/w"):
            data = rng.normal(0.0, 0.01, size=shape)
        elif name.endswith("ln/gamma"):
            data = np.ones(shape)
        elif name.endswith("ln/beta"):
            data = np.zeros(shape)
        else:  # conv or lstm bias
            data = np.zeros(shape)
            if name.startswith("lstm"):
                c = shape[0] // 4
                data[c:2 * c] = 1.0
        params[name] = Tensor(data.astype(dtype), requires_grad=True)
    return params


def _conv_ln(params, x, name, stride, trace):
    y = ops.conv2d(x, params[f"{name}/w"], params[f"{name}/b"], stride)
    if trace is not None:
        trace[name] = y.shape
    return ops.layer_norm(y, params[f"{name}_ln/gamma"], params[f"{name}_ln/beta"])


def _lstm_ln(params, x, idx, states, new_states, trace):
    name = f"lstm{idx}"
    st = states[idx - 1]
    cat = ops.concat_channels(x, st.h)
    pre = ops.conv2d(cat, params[f"{name}/w"], params[f"{name}/b"], 1)
    h, c = ops.lstm_gates(pre, st.c)
    new_states.append(ConvLstmState(h, c))
    if trace is not None:
        trace[name] = h.shape
    return ops.layer_norm(h, params[f"{name}_ln/gamma"], params[f"{name}_ln/beta"])


def forward_step(params, frame, states, config, trace=None):
    """One recurrence step: frame (N,H,W,3) in [0,1] -> (depth labels, new states).

    Output is (N,H,W,1) in (0,1); `states` must hold the previous step's
    five ConvLstmStates (use zero_states at a sequence start).
    """
    n, h, w, c = frame.shape
    if (h, w, c) != (config.input_height, config.input_width, 3):
        raise ValueError(
            f"frame shape {(h, w, c)} does not match config "
            f"{(config.input_height, config.input_width, 3)}"
        )
    enc = config.encoder_sizes()
    new_states = []

    x = _conv_ln(params, frame, "conv1", 2, trace)
    x = _lstm_ln(params, x, 1, states, new_states, trace)
    x = _conv_ln(params, x, "conv2", 2, trace)
    x = _lstm_ln(params, x, 2, states, new_states, trace)
    x = _conv_ln(params, x, "conv3", 2, trace)
    x = _lstm_ln(params, x, 3, states, new_states, trace)

    x = ops.depth_to_space(x)
    x = ops.crop_spatial(x, *enc[2])
    if trace is not None:
        trace["ds1"] = x.shape
    x = _conv_ln(params, x, "conv4", 1, trace)
    x = _lstm_ln(params, x, 4, states, new_states, trace)

    x = ops.depth_to_space(x)
    x = ops.crop_spatial(x, *enc[1])
    if trace is not None:
        trace["ds2"] = x.shape
    x = _conv_ln(params, x, "conv5", 1, trace)
    x = _lstm_ln(params, x, 5, states, new_states, trace)

    x = ops.depth_to_space(x)
    x = ops.crop_spatial(x, *enc[0])
    if trace is not None:
        trace["ds3"] = x.shape
    x = ops.conv2d(x, params["conv6/w"], params["conv6/b"], 1)
    if trace is not None:
        trace["conv6"] = x.shape
    out = ops.sigmoid(x)
    if trace is not None:
        trace["sigmoid"] = out.shape
    return out, new_states


def forward_sequence(params, frames, config):
    """Run the unrolled recurrence from zero state over (k,N,H,W,3) frames.

    Prediction i depends only on frames 0..i (causality); all steps share
    the same parameters.
    """
    k = len(frames)
    if k < 1:
        raise ValueError("need at least one frame")
    tensors = [f if isinstance(f, Tensor) else Tensor(f) for f in frames]
    states = zero_states(config, tensors[0].shape[0], dtype=tensors[0].data.dtype)
    outputs = []
    for ft in tensors:
        out, states = forward_step(params, ft, states, config)
        outputs.append(out)
    return outputs


def frames_to_input(frames_u8):
    """uint8 (..., H, W, 3) -> float32 in [0, 1]."""
    return frames_u8.astype(np.float32) / 255.0
