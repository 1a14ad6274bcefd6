"""Mini-batch training of the depth model.

Deterministic given the config seed: parameter init, batch sampling and
every kernel are seeded or order-fixed.  Emits a loss log (CSV), periodic
eval numbers and a checkpoint in the GWCK format.
"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from geowarp import losses, model
from geowarp.labels import DepthLabelConfig
from geowarp.nn import adam, checkpoint
from geowarp.nn.tensor import Tape, Tensor


@dataclass
class TrainingConfig:
    seed: int = 0
    steps: int = 1000
    batch_size: int = 8
    sequence_length: int = 10
    learning_rate: float = 1e-4
    loss_kind: str = "l2"
    lambda_gdl: float = 0.0
    grad_clip: float = 10.0          # None disables clipping
    eval_every: int = 50
    target_eval_ratio: float = 0.0   # early-stop when eval/initial falls below; 0 = off
    checkpoint_every: int = 0        # also write step-tagged checkpoints; 0 = off
    arch: model.ArchitectureConfig = field(default_factory=model.ArchitectureConfig)
    labels: DepthLabelConfig = field(default_factory=DepthLabelConfig)
    data_dir: str = ""
    eval_dir: str = ""
    checkpoint_path: str = "model.gwck"
    loss_log_path: str = "loss_log.csv"

    def to_dict(self):
        return {
            "version": 1,
            "seed": self.seed,
            "steps": self.steps,
            "batch_size": self.batch_size,
            "sequence_length": self.sequence_length,
            "learning_rate": self.learning_rate,
            "loss_kind": self.loss_kind,
            "lambda_gdl": self.lambda_gdl,
            "grad_clip": self.grad_clip,
            "eval_every": self.eval_every,
            "target_eval_ratio": self.target_eval_ratio,
            "checkpoint_every": self.checkpoint_every,
            "arch": self.arch.to_dict(),
            "labels": self.labels.to_dict(),
            "data_dir": self.data_dir,
            "eval_dir": self.eval_dir,
            "checkpoint_path": self.checkpoint_path,
            "loss_log_path": self.loss_log_path,
        }

    @staticmethod
    def from_dict(d):
        cfg = TrainingConfig()
        for key in (
            "seed", "steps", "batch_size", "sequence_length", "eval_every",
            "checkpoint_every",
        ):
            if key in d:
                setattr(cfg, key, int(d[key]))
        for key in ("learning_rate", "lambda_gdl", "target_eval_ratio"):
            if key in d:
                setattr(cfg, key, float(d[key]))
        if "grad_clip" in d:
            cfg.grad_clip = None if d["grad_clip"] is None else float(d["grad_clip"])
        for key in ("loss_kind", "data_dir", "eval_dir", "checkpoint_path", "loss_log_path"):
            if key in d:
                setattr(cfg, key, d[key])
        if "arch" in d:
            cfg.arch = model.ArchitectureConfig.from_dict(d["arch"])
        if "labels" in d:
            cfg.labels = DepthLabelConfig.from_dict(d["labels"])
        return cfg

    @staticmethod
    def load(path):
        with open(path) as fh:
            return TrainingConfig.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    def loss_config(self):
        return losses.LossConfig(kind=self.loss_kind, lambda_gdl=self.lambda_gdl)


@dataclass
class TrainResult:
    params: dict
    loss_log: list          # (step, loss, wall_time)
    eval_log: list          # (step, eval_l2)
    initial_eval: float
    final_eval: float
    steps_run: int


def _batch_arrays(records, idx, seq_len):
    frames = np.stack([records[i].frames[:seq_len] for i in idx], axis=1)
    labels = np.stack([records[i].labels[:seq_len] for i in idx], axis=1)
    masks = np.stack([records[i].label_masks[:seq_len] for i in idx], axis=1)
    return (
        model.frames_to_input(frames),
        labels[..., None].astype(np.float32),
        masks[..., None],
    )


def training_step(params, batch, cfg, loss_cfg):
    """Forward + backward over one mini-batch; returns (loss, grads)."""
    frames, labels, masks = batch
    k = frames.shape[0]
    with Tape() as tape:
        preds = model.forward_sequence(params, [Tensor(frames[i]) for i in range(k)], cfg.arch)
        loss = losses.sequence_loss(
            preds, [labels[i] for i in range(k)], [masks[i] for i in range(k)], loss_cfg
        )
        tape.backward(loss)
    grads = {}
    for name, p in params.items():
        grads[name] = p.grad if p.grad is not None else np.zeros_like(p.data)
        p.grad = None
    return float(loss.data), grads


def evaluate_depth_l2(params, records, cfg):
    """Masked depth-label L2 (lambda_gdl = 0) averaged over sequences."""
    if not records:
        raise ValueError("empty evaluation set")
    seq_len = min(len(r) for r in records)
    batch = _batch_arrays(records, range(len(records)), seq_len)
    frames, labels, masks = batch
    preds = model.forward_sequence(params, [Tensor(f) for f in frames], cfg.arch)
    l2 = losses.sequence_loss(
        preds,
        [labels[i] for i in range(seq_len)],
        [masks[i] for i in range(seq_len)],
        losses.LossConfig(kind="l2"),
    )
    return float(l2.data)


def train(records, cfg, eval_records=None, checkpoint_dir=None):
    """Train from scratch on SequenceRecords; see TrainingConfig for knobs.

    With checkpoint_every set (and a checkpoint_dir), step-tagged GWCK
    checkpoints are written during the run in addition to the final one.
    """
    if not records:
        raise ValueError("training dataset is empty")
    rng = np.random.default_rng(cfg.seed)
    params = model.init_params(cfg.arch, seed=cfg.seed)
    loss_cfg = cfg.loss_config()
    moments = adam.zero_moments({n: p.data for n, p in params.items()})
    loss_log = []
    eval_log = []
    initial_eval = final_eval = float("nan")
    if eval_records:
        initial_eval = evaluate_depth_l2(params, eval_records, cfg)
        eval_log.append((0, initial_eval))
        final_eval = initial_eval

    t0 = time.monotonic()
    steps_run = 0
    for step in range(1, cfg.steps + 1):
        idx = rng.integers(0, len(records), size=cfg.batch_size)
        batch = _batch_arrays(records, idx, cfg.sequence_length)
        loss_val, grads = training_step(params, batch, cfg, loss_cfg)
        if not np.isfinite(loss_val):
            raise FloatingPointError(f"training loss became non-finite at step {step}")
        if cfg.grad_clip is not None:
            grads, _norm = adam.clip_global_norm(grads, cfg.grad_clip)
        new_p, moments = adam.adam_step(
            {n: p.data for n, p in params.items()}, grads, moments, step,
            lr=cfg.learning_rate,
        )
        for name, p in params.items():
            p.data = new_p[name]
        loss_log.append((step, loss_val, time.monotonic() - t0))
        steps_run = step

        if cfg.checkpoint_every and checkpoint_dir and step % cfg.checkpoint_every == 0:
            save_params(Path(checkpoint_dir) / f"step_{step:06d}.gwck", params)

        if eval_records and cfg.eval_every and step % cfg.eval_every == 0:
            final_eval = evaluate_depth_l2(params, eval_records, cfg)
            eval_log.append((step, final_eval))
            if (
                cfg.target_eval_ratio > 0
                and final_eval < cfg.target_eval_ratio * initial_eval
            ):
                break

    if eval_records and (not eval_log or eval_log[-1][0] != steps_run):
        final_eval = evaluate_depth_l2(params, eval_records, cfg)
        eval_log.append((steps_run, final_eval))

    return TrainResult(
        params=params, loss_log=loss_log, eval_log=eval_log,
        initial_eval=initial_eval, final_eval=final_eval, steps_run=steps_run,
    )


def write_loss_log(path, loss_log):
    with open(path, "w") as fh:
        fh.write("# version: 1\n")
        fh.write("step,loss,wall_time\n")
        for step, loss_val, wall in loss_log:
            fh.write(f"{step},{loss_val!r},{wall:.3f}\n")


def save_params(path, params):
    checkpoint.save_checkpoint(path, {n: p.data for n, p in params.items()})


def load_params(path, arch):
    """Load a checkpoint and validate shapes against the architecture."""
    raw = checkpoint.load_checkpoint(path)
    params = {}
    for name, shape in arch.param_specs():
        if name not in raw:
            raise ValueError(f"checkpoint is missing parameter {name}")
        if tuple(raw[name].shape) != tuple(shape):
            raise ValueError(
                f"checkpoint parameter {name} has shape {raw[name].shape}, expected {shape}"
            )
        params[name] = Tensor(raw[name], requires_grad=True)
    return params
