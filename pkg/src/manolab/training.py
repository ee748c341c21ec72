"""Small-MLP training harness wiring the optimizer suite to synthetic tasks.

The model is deliberately modest (dense tanh layers, identity output)
because the point is to exercise optimizer behavior, not to fit hard
problems.  The harness owns the things the optimizers do not: dataset
generation, batching, the learning-rate schedule, global gradient
clipping, per-layer diagnostics, and optional tensor snapshots for the
spectrum and geodesic tools.

Everything is seeded and single-threaded deterministic: two runs with
the same TrainConfig produce bit-identical trajectory records.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .manifold import ManifoldSchedule
from .optimizers import (
    AdamWConfig,
    ManoConfig,
    MuonConfig,
    OptimizerState,
    adamw_step,
    clip_global_grad_norm,
    cosine_warmup_lr,
    mano_step,
    muon_step,
    rsgdm_step,
    sgdm_step,
)
from .tensor import EPS_DIV, rms

# Gradient SNR denominators get this floor so constant gradients report
# a large but finite ratio.
EPS_SNR = 1e-12

TASKS = ("linreg", "blobs-classify")
LOSSES = ("mse", "cross-entropy")
OPTIMIZERS = ("mano", "muon", "adamw", "sgdm", "rsgdm")

TRAJECTORY_CSV_HEADER = (
    "step",
    "train_loss",
    "eval_loss",
    "lr",
    "layer",
    "grad_norm",
    "grad_var",
    "grad_snr",
    "update_rms",
)


class TrainingDiverged(RuntimeError):
    """Loss or gradients went non-finite; carries the failing step."""

    def __init__(self, step: int, detail: str):
        self.step = step
        super().__init__(f"training diverged at step {step}: {detail}")


@dataclass
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    w_star: np.ndarray | None = None


def make_dataset(
    task: str,
    n_samples: int,
    dims: tuple[int, int],
    seed: int = 0,
    noise: float = 0.0,
    separation: float = 10.0,
) -> Dataset:
    """Synthetic regression or classification data.

    ``linreg``: standard-normal features, targets X @ W* plus optional
    Gaussian noise, with W* scaled by 1/sqrt(d_in) so targets have unit
    order of magnitude.  ``blobs-classify``: Gaussian clusters of unit
    within-cluster deviation whose centers sit ``separation`` apart
    along orthogonal directions (random directions if the feature dim
    cannot hold that many orthogonal ones); targets are integer labels.
    """
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}, got {task!r}")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    d_in, d_out = dims
    if d_in < 1 or d_out < 1:
        raise ValueError("dims must be positive")
    rng = np.random.default_rng(seed)
    if task == "linreg":
        x = rng.standard_normal((n_samples, d_in))
        w_star = rng.standard_normal((d_in, d_out)) / np.sqrt(d_in)
        y = x @ w_star
        if noise > 0.0:
            y = y + noise * rng.standard_normal(y.shape)
        return Dataset(features=x, targets=y, w_star=w_star)
    # blobs-classify: d_out is the class count.
    if d_in >= d_out:
        q, _ = np.linalg.qr(rng.standard_normal((d_in, d_out)))
        directions = q.T
    else:
        raw = rng.standard_normal((d_out, d_in))
        directions = raw / np.sqrt((raw * raw).sum(axis=1, keepdims=True))
    centers = separation * directions
    labels = rng.integers(0, d_out, n_samples)
    x = centers[labels] + rng.standard_normal((n_samples, d_in))
    return Dataset(features=x, targets=labels.astype(np.int64))


class MlpModel:
    """Dense tanh network with an identity output layer.

    ``layer_sizes`` runs input to output, e.g. (4, 8, 3).  Weights are
    drawn from a seeded generator at scale 1/sqrt(fan_in); biases start
    at zero.  ``loss`` selects mean squared error over batch and output
    entries, or softmax cross-entropy averaged over the batch with
    integer labels.
    """

    def __init__(self, layer_sizes, loss: str = "mse", seed: int = 0):
        sizes = tuple(int(s) for s in layer_sizes)
        if len(sizes) < 2:
            raise ValueError("need at least an input and an output size")
        if any(s < 1 for s in sizes):
            raise ValueError("layer sizes must be positive")
        if loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}, got {loss!r}")
        self.layer_sizes = sizes
        self.loss = loss
        rng = np.random.default_rng(seed)
        self.weights = [
            rng.standard_normal((a, b)) / np.sqrt(a)
            for a, b in zip(sizes[:-1], sizes[1:])
        ]
        self.biases = [np.zeros(b) for b in sizes[1:]]

    def parameters(self) -> list[np.ndarray]:
        """Flat parameter list, weight then bias per layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def parameter_names(self) -> list[str]:
        out = []
        for i in range(len(self.weights)):
            out.extend((f"layer{i}.weight", f"layer{i}.bias"))
        return out

    def set_parameters(self, params) -> None:
        if len(params) != 2 * len(self.weights):
            raise ValueError("parameter count mismatch")
        for i in range(len(self.weights)):
            self.weights[i] = params[2 * i]
            self.biases[i] = params[2 * i + 1]

    def forward(self, features: np.ndarray) -> np.ndarray:
        acts = features
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = acts @ w + b
            acts = z if i == last else np.tanh(z)
        return acts

    def evaluate_loss(self, features: np.ndarray, targets: np.ndarray) -> float:
        out = self.forward(features)
        if self.loss == "mse":
            diff = out - targets
            return float(np.mean(diff * diff))
        shifted = out - out.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1))
        picked = shifted[np.arange(out.shape[0]), targets]
        return float(np.mean(log_z - picked))


def mlp_forward_backward(model: MlpModel, features, targets):
    """Loss and exact gradients for every parameter, mean over the batch.

    Returns ``(loss, grads)`` with grads ordered like
    ``model.parameters()``.  Because both losses are means, duplicating
    every sample leaves loss and gradients unchanged.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.layer_sizes[0]:
        raise ValueError(
            f"features must be (batch, {model.layer_sizes[0]}), got {features.shape}"
        )
    batch = features.shape[0]
    if batch < 1:
        raise ValueError("empty batch")

    acts = [features]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w + b
        acts.append(z if i == last else np.tanh(z))
    out = acts[-1]

    if model.loss == "mse":
        targets = np.asarray(targets, dtype=np.float64)
        if targets.shape != out.shape:
            raise ValueError(
                f"targets must match output shape {out.shape}, got {targets.shape}"
            )
        diff = out - targets
        loss = float(np.mean(diff * diff))
        dz = 2.0 * diff / diff.size
    else:
        targets = np.asarray(targets)
        if targets.shape != (batch,):
            raise ValueError(f"labels must be ({batch},), got {targets.shape}")
        shifted = out - out.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1))
        picked = shifted[np.arange(batch), targets]
        loss = float(np.mean(log_z - picked))
        dz = np.exp(shifted - log_z[:, None])
        dz[np.arange(batch), targets] -= 1.0
        dz /= batch

    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.weights)
    for i in range(last, -1, -1):
        grads_w[i] = acts[i].T @ dz
        grads_b[i] = dz.sum(axis=0)
        if i > 0:
            dz = (dz @ model.weights[i].T) * (1.0 - acts[i] * acts[i])

    grads = []
    for gw, gb in zip(grads_w, grads_b):
        grads.extend((gw, gb))
    return loss, grads


def grad_stats(grads) -> list[tuple[float, float, float]]:
    """Per-tensor (Frobenius norm, entry variance, norm/(variance+eps))."""
    out = []
    for g in grads:
        g = np.asarray(g, dtype=np.float64)
        norm = float(np.sqrt(np.sum(g * g)))
        var = float(g.var())
        out.append((norm, var, norm / (var + EPS_SNR)))
    return out


@dataclass
class TrajectoryRecord:
    step: int
    train_loss: float
    eval_loss: float
    lr: float
    layer: str
    grad_norm: float
    grad_var: float
    grad_snr: float
    update_rms: float

    def as_row(self) -> list:
        return [
            self.step,
            repr(self.train_loss),
            repr(self.eval_loss),
            repr(self.lr),
            self.layer,
            repr(self.grad_norm),
            repr(self.grad_var),
            repr(self.grad_snr),
            repr(self.update_rms),
        ]


@dataclass
class TrainConfig:
    task: str = "linreg"
    n_samples: int = 512
    in_dim: int = 8
    out_dim: int = 4
    hidden: tuple[int, ...] = ()
    loss: str = "mse"
    optimizer: str = "mano"
    total_steps: int = 2000
    warmup_steps: int = 100
    batch_size: int = 32
    lr_max: float = 3e-3
    min_ratio: float = 0.1
    clip_norm: float = 1.0
    weight_decay: float = 0.1
    momentum: float = 0.95
    nesterov: bool = False
    manifold_mode: str = "rotating"
    retract_momentum: bool = False
    cadence: int = 50
    eval_fraction: float = 0.2
    snapshot_every: int = 0
    noise: float = 0.0
    separation: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(
                f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}"
            )
        if self.task == "blobs-classify" and self.loss != "cross-entropy":
            raise ValueError("blobs-classify requires the cross-entropy loss")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not 0 < self.warmup_steps < self.total_steps:
            raise ValueError("warmup_steps must lie strictly inside (0, total_steps)")
        if not 0.0 < self.eval_fraction < 1.0:
            raise ValueError("eval_fraction must lie in (0, 1)")
        if self.cadence < 1:
            raise ValueError("cadence must be positive")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be non-negative")
        if self.manifold_mode not in ("rotating", "static"):
            raise ValueError("manifold_mode must be 'rotating' or 'static'")
        self.hidden = tuple(int(h) for h in self.hidden)


def _parse_config_value(name: str, text: str, kind):
    text = text.strip()
    if kind is bool:
        lowered = text.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ValueError(f"cannot parse boolean for {name!r}: {text!r}")
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    if kind is str:
        return text
    # the only remaining field type is the tuple of hidden widths
    if text in ("", "()"):
        return ()
    return tuple(int(part) for part in text.split(",") if part.strip())


def load_config(path) -> TrainConfig:
    """Read a flat ``key = value`` file into a TrainConfig.

    Blank lines and lines starting with ``#`` are skipped.  Unknown keys
    are an error, as is a missing file (the message names the path).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    fields = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
    kinds = {
        "int": int,
        "float": float,
        "str": str,
        "bool": bool,
        "tuple[int, ...]": tuple,
    }
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in fields:
            raise ValueError(
                f"{path}:{lineno}: unknown key {key!r}; valid keys: "
                f"{', '.join(sorted(fields))}"
            )
        values[key] = _parse_config_value(key, value, kinds[str(fields[key])])
    return TrainConfig(**values)


class Trainer:
    """Owns one training run: model, data split, optimizer states.

    Exposed as a class so tests can poke at ``states`` and ``groups``;
    normal callers use ``train_run``.
    """

    def __init__(self, cfg: TrainConfig, snapshot_dir=None):
        self.cfg = cfg
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir is not None else None
        dims = (cfg.in_dim, cfg.out_dim)
        self.dataset = make_dataset(
            cfg.task, cfg.n_samples, dims, seed=cfg.seed,
            noise=cfg.noise, separation=cfg.separation,
        )
        n_eval = max(1, int(round(cfg.n_samples * cfg.eval_fraction)))
        n_train = cfg.n_samples - n_eval
        if n_train < 1:
            raise ValueError("eval_fraction leaves no training samples")
        self.train_x = self.dataset.features[:n_train]
        self.train_y = self.dataset.targets[:n_train]
        self.eval_x = self.dataset.features[n_train:]
        self.eval_y = self.dataset.targets[n_train:]

        sizes = (cfg.in_dim, *cfg.hidden, cfg.out_dim)
        self.model = MlpModel(sizes, loss=cfg.loss, seed=cfg.seed + 1)
        self.batch_rng = np.random.default_rng(cfg.seed + 2)

        if cfg.optimizer == "rsgdm":
            # This rule lives on the fixed-axis manifold: project the
            # freshly initialized weights onto it once, up front.
            for i, w in enumerate(self.model.weights):
                norms = np.sqrt((w * w).sum(axis=0, keepdims=True))
                self.model.weights[i] = w / norms

        self.names = self.model.parameter_names()
        self.states = {name: OptimizerState() for name in self.names}
        self.matrix_cfg = self._matrix_config()
        self.fallback_cfg = AdamWConfig(
            lr=cfg.lr_max, weight_decay=cfg.weight_decay
        )

    def _matrix_config(self):
        cfg = self.cfg
        if cfg.optimizer == "mano":
            schedule = ManifoldSchedule(
                mode=cfg.manifold_mode, order=2, fixed_axis=0
            )
            return ManoConfig(
                lr=cfg.lr_max,
                momentum=cfg.momentum,
                weight_decay=cfg.weight_decay,
                nesterov=cfg.nesterov,
                schedule=schedule,
                retract_momentum=cfg.retract_momentum,
            )
        if cfg.optimizer == "muon":
            return MuonConfig(
                lr=cfg.lr_max,
                momentum=cfg.momentum,
                weight_decay=cfg.weight_decay,
                nesterov=True,
            )
        if cfg.optimizer == "adamw":
            return AdamWConfig(lr=cfg.lr_max, weight_decay=cfg.weight_decay)
        return None  # sgdm and rsgdm take plain keyword arguments

    def _step_matrix(self, name, theta, grad, lr):
        cfg = self.cfg
        state = self.states[name]
        if cfg.optimizer == "mano":
            return mano_step(theta, grad, state, self.matrix_cfg, lr)
        if cfg.optimizer == "muon":
            return muon_step(theta, grad, state, self.matrix_cfg, lr)
        if cfg.optimizer == "adamw":
            return adamw_step(theta, grad, state, self.matrix_cfg, lr)
        if cfg.optimizer == "sgdm":
            return sgdm_step(
                theta, grad, state, lr,
                momentum=cfg.momentum, weight_decay=cfg.weight_decay,
            )
        return rsgdm_step(theta, grad, state, lr, momentum=cfg.momentum, axis=0)

    def _step_fallback(self, name, theta, grad, lr):
        return adamw_step(theta, grad, self.states[name], self.fallback_cfg, lr)

    def _batches(self):
        """Without-replacement batches, reshuffled each epoch, forever."""
        n = self.train_x.shape[0]
        while True:
            order = self.batch_rng.permutation(n)
            for start in range(0, n, self.cfg.batch_size):
                yield order[start : start + self.cfg.batch_size]

    def _snapshot(self, step, name, theta, grad, delta):
        state = self.states[name]
        momentum = state.momentum
        if momentum is None:
            momentum = state.exp_avg
        if momentum is None:
            momentum = np.zeros_like(theta)
        path = self.snapshot_dir / f"step{step:06d}_{name}.npz"
        np.savez(path, theta=theta, grad=grad, momentum=momentum, update=delta)

    def run(self) -> list[TrajectoryRecord]:
        cfg = self.cfg
        records: list[TrajectoryRecord] = []
        snapshotting = cfg.snapshot_every > 0 and self.snapshot_dir is not None
        if snapshotting:
            self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        batches = self._batches()

        for t in range(cfg.total_steps):
            idx = next(batches)
            loss, grads = mlp_forward_backward(
                self.model, self.train_x[idx], self.train_y[idx]
            )
            if not np.isfinite(loss) or not all(
                np.all(np.isfinite(g)) for g in grads
            ):
                raise TrainingDiverged(t, f"non-finite loss or gradient (loss={loss})")

            clipped, _ = clip_global_grad_norm(grads, cfg.clip_norm)
            lr_t = cosine_warmup_lr(
                t, cfg.total_steps, cfg.warmup_steps, cfg.lr_max, cfg.min_ratio
            )

            params = self.model.parameters()
            deltas = []
            new_params = []
            for name, theta, grad in zip(self.names, params, clipped):
                if theta.ndim >= 2:
                    new = self._step_matrix(name, theta, grad, lr_t)
                else:
                    new = self._step_fallback(name, theta, grad, lr_t)
                deltas.append(theta - new)
                new_params.append(new)

            record_now = (t % cfg.cadence == 0) or (t == cfg.total_steps - 1)
            if snapshotting and t % cfg.snapshot_every == 0:
                for name, theta, grad, delta in zip(
                    self.names, params, clipped, deltas
                ):
                    if theta.ndim >= 2:
                        self._snapshot(t, name, theta, grad, delta)

            self.model.set_parameters(new_params)

            if record_now:
                eval_loss = self.model.evaluate_loss(self.eval_x, self.eval_y)
                stats = grad_stats(clipped)
                for name, (norm, var, snr), delta in zip(self.names, stats, deltas):
                    records.append(
                        TrajectoryRecord(
                            step=t,
                            train_loss=loss,
                            eval_loss=eval_loss,
                            lr=float(lr_t),
                            layer=name,
                            grad_norm=norm,
                            grad_var=var,
                            grad_snr=snr,
                            update_rms=rms(delta) if delta.size else 0.0,
                        )
                    )
        return records


def train_run(cfg: TrainConfig, snapshot_dir=None) -> list[TrajectoryRecord]:
    """Run one training job and return its trajectory records."""
    return Trainer(cfg, snapshot_dir=snapshot_dir).run()


def write_trajectory_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_CSV_HEADER)
        for record in records:
            writer.writerow(record.as_row())
