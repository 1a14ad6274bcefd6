from geowarp.nn.tensor import Tape, Tensor, record_op, replay_backward, zero_grads
from geowarp.nn import ops
from geowarp.nn.adam import adam_step, adam_update, clip_global_norm, zero_moments
from geowarp.nn.checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Tape", "Tensor", "record_op", "replay_backward", "zero_grads", "ops",
    "adam_step", "adam_update", "clip_global_norm", "zero_moments",
    "load_checkpoint", "save_checkpoint",
]
