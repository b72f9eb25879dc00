"""End-to-end training: minibatch loop on the composite cost, restarts, sweep.

The computation graph is fixed (one-hot -> encoder -> power normalization ->
AWGN -> decoder -> cross entropy + lambda / P_del) and its reverse-mode
gradients are written out by hand; noise realizations are constants during
backpropagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import (ROLE_DATA, ROLE_NOISE, derive_seed, make_channel,
                      sample_noise, substream)
from .harvester import HarvesterModel, pdel_exact, pdel_with_grads
from .nn import (AdamState, NetworkParams, adam_step, init_params,
                 mlp_backward, mlp_forward, softmax)
from .transceiver import (EPS_LOG, EPS_NORM, Constellation,
                          export_constellation)

EPS_PDEL = 1e-12   # clamp on P_del inside the cost


class TrainingFailure(Exception):
    """All restarts diverged (non-finite cost)."""


@dataclass
class TrainConfig:
    m: int
    p_a: float
    snr: float
    harvester: HarvesterModel
    epochs: int = 1000
    minibatch_size: int | None = None     # default 100*M (desk scale)
    train_set_size: int | None = None     # default 1e4*M (desk scale)
    learning_rate: float = 0.01
    restarts: int = 10
    lambda_start: float = 1e-5
    lambda_factor: float = 2.0
    lambda_max_points: int = 12
    ser_max: float = 0.95
    seed: int = 0
    encoder_hidden: tuple[int, ...] | None = None   # default (2M,)
    decoder_hidden: tuple[int, ...] | None = None   # default (2M,)
    eval_samples: int | None = None       # default 1e4*M for in-run records
    noise_variance: float | None = None   # explicit sigma^2 override

    def resolved(self) -> "TrainConfig":
        m = self.m
        return replace(
            self,
            minibatch_size=self.minibatch_size or 100 * m,
            train_set_size=self.train_set_size or 10_000 * m,
            encoder_hidden=tuple(self.encoder_hidden or (2 * m,)),
            decoder_hidden=tuple(self.decoder_hidden or (2 * m,)),
            eval_samples=self.eval_samples or 10_000 * m,
        )

    def encoder_dims(self) -> list[int]:
        return [self.m, *(self.encoder_hidden or (2 * self.m,)), 2]

    def decoder_dims(self) -> list[int]:
        return [2, *(self.decoder_hidden or (2 * self.m,)), self.m]

    def sigma2(self) -> float:
        return make_channel(self.p_a, self.snr, self.noise_variance).noise_variance

    def validate(self) -> None:
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if self.p_a <= 0 or self.snr <= 0:
            raise ValueError("p_a and snr must be positive")
        cfg = self.resolved()
        if cfg.minibatch_size <= 0 or cfg.train_set_size < cfg.minibatch_size:
            raise ValueError("need minibatch_size <= train_set_size, both positive")
        if self.epochs <= 0 or self.restarts <= 0:
            raise ValueError("epochs and restarts must be positive")
        if not 0.0 < self.ser_max < 1.0:
            raise ValueError("ser_max must lie in (0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class RunRecord:
    lam: float
    seed: int
    final_cost: float
    ser: float
    p_del: float
    cross_entropy: float
    constellation: Constellation | None
    checkpoint_ref: str | None = None
    failed: bool = False
    terminal: bool = False
    max_power_err: float = 0.0
    params: NetworkParams | None = None


def total_cost(batch_ce: float, p_del: float, lam: float) -> float:
    """Composite training cost: mean cross entropy plus lam / P_del (clamped)."""
    if lam == 0.0:
        return batch_ce
    return batch_ce + lam / max(p_del, EPS_PDEL)


def network_cost(params: NetworkParams, messages: np.ndarray, noise: np.ndarray,
                 p_a: float, lam: float, harvester: HarvesterModel,
                 want_grads: bool = True):
    """Cost of one minibatch with frozen noise; optionally its gradients.

    messages are 0-based indices, noise is (B, 2) real/imag components.
    Returns (cost, info, grads) where grads is a flat list matching
    params.arrays() (encoder layers first, W before b) or None.
    """
    enc, dec = params.encoder, params.decoder
    msgs = np.asarray(messages, dtype=int)
    batch = msgs.shape[0]

    # encoder forward; the one-hot input is a column selection
    first = enc[0]
    z0 = first.weights.T[msgs] + first.biases
    h, zs_e, post_e = mlp_forward(enc[1:], np.maximum(z0, 0.0)
                                  if first.activation == "relu" else z0)
    u = h  # (B, 2) pre-normalization re/im

    energy = float(np.sum(u * u))
    degenerate = energy < EPS_NORM
    scale = math.sqrt(p_a * batch / max(energy, EPS_NORM))
    x = scale * u
    y = x + noise

    _, zs_d, post_d = mlp_forward(dec[:-1], y)
    logits = post_d[-1] @ dec[-1].weights.T + dec[-1].biases
    probs = softmax(logits)

    picked = probs[np.arange(batch), msgs]
    ce = float(-np.log(np.maximum(picked, EPS_LOG)).mean())

    xc = x[:, 0] + 1j * x[:, 1]
    p_del, dpdel_r, dpdel_i = pdel_with_grads(xc, harvester)
    cost = total_cost(ce, p_del, lam)

    relu_zs = ([z0] if first.activation == "relu" else []) + zs_e + zs_d
    relu_margin = min((float(np.min(np.abs(z))) for z in relu_zs if z.size),
                      default=np.inf)
    info = {
        "cross_entropy": ce,
        "p_del": p_del,
        "scale": scale,
        "degenerate": degenerate,
        "batch_power": float(np.mean(x[:, 0] ** 2 + x[:, 1] ** 2)),
        "symbols": xc,
        "probs": probs,
        "min_prob": float(picked.min()),
        "min_relu_margin": relu_margin,
    }
    if not want_grads:
        return cost, info, None

    # softmax + cross entropy head, averaged over the batch
    dlogits = probs.copy()
    dlogits[np.arange(batch), msgs] -= 1.0
    dlogits /= batch
    dec_grads, dy = mlp_backward(dec, zs_d + [logits], post_d + [probs], dlogits)

    dx = dy.copy()
    if lam > 0.0 and p_del > EPS_PDEL:
        coef = -lam / (p_del * p_del)
        dx[:, 0] += coef * dpdel_r
        dx[:, 1] += coef * dpdel_i

    # power normalization: x = scale(u) * u
    if degenerate:
        du = scale * dx
    else:
        du = scale * (dx - (float(np.sum(dx * u)) / energy) * u)

    # encoder output layer is linear, so d(cost)/d(last z) is du itself
    if enc[1:]:
        enc_grads_rest, dh0 = mlp_backward(enc[1:], zs_e, post_e, du)
    else:
        enc_grads_rest, dh0 = [], du
    dz0 = dh0 * (z0 > 0.0) if first.activation == "relu" else dh0
    dw0 = np.zeros_like(first.weights.T)
    np.add.at(dw0, msgs, dz0)
    enc_grads = [(dw0.T, dz0.sum(axis=0))] + enc_grads_rest

    grads = []
    for dw, db in enc_grads + dec_grads:
        grads.append(dw)
        grads.append(db)
    return cost, info, grads


def train_run(cfg: TrainConfig, lam: float, seed: int) -> RunRecord:
    """One full optimization run at a fixed lambda and restart seed."""
    from .evaluator import estimate_ser

    cfg = cfg.resolved()
    cfg.validate()
    sigma2 = cfg.sigma2()
    params = init_params(cfg.encoder_dims(), cfg.decoder_dims(), seed)
    state = AdamState.for_params(params, cfg.learning_rate)
    data_rng = substream(seed, ROLE_DATA)
    noise_rng = substream(seed, ROLE_NOISE)
    steps_per_epoch = max(1, cfg.train_set_size // cfg.minibatch_size)
    max_power_err = 0.0

    for _ in range(cfg.epochs):
        for _ in range(steps_per_epoch):
            msgs = data_rng.integers(0, cfg.m, size=cfg.minibatch_size)
            noise = sample_noise(cfg.minibatch_size, sigma2, noise_rng)
            cost, info, grads = network_cost(params, msgs, noise, cfg.p_a,
                                             lam, cfg.harvester)
            if not math.isfinite(cost):
                return RunRecord(lam=lam, seed=seed, final_cost=math.nan,
                                 ser=1.0, p_del=math.nan, cross_entropy=math.nan,
                                 constellation=None, failed=True)
            if not info["degenerate"]:
                max_power_err = max(max_power_err,
                                    abs(info["batch_power"] - cfg.p_a))
            adam_step(params.arrays(), grads, state)

    const = export_constellation(params.encoder, cfg.m, cfg.p_a)
    report = estimate_ser(const, params.decoder, sigma2, cfg.eval_samples,
                          seed=seed)
    p_del = pdel_exact(const, cfg.harvester)
    final_cost = total_cost(report.cross_entropy, p_del, lam)
    return RunRecord(lam=lam, seed=seed, final_cost=final_cost, ser=report.ser,
                     p_del=p_del, cross_entropy=report.cross_entropy,
                     constellation=const, max_power_err=max_power_err,
                     params=params)


def multi_restart(cfg: TrainConfig, lam: float, seeds: list[int]) -> RunRecord:
    """Best-of-restarts: the record minimizing final cost, ties to lowest seed."""
    if not seeds:
        raise ValueError("multi_restart needs at least one seed")
    records = [train_run(cfg, lam, s) for s in seeds]
    ok = [r for r in records if not r.failed]
    if not ok:
        raise TrainingFailure(f"all {len(seeds)} restarts diverged at lambda={lam}")
    return min(ok, key=lambda r: (r.final_cost, r.seed))


def lambda_schedule(cfg: TrainConfig) -> list[float]:
    """0 followed by start * factor^k, capped at lambda_max_points values."""
    lams = [0.0]
    k = 0
    while len(lams) < cfg.lambda_max_points:
        lams.append(cfg.lambda_start * cfg.lambda_factor ** k)
        k += 1
    return lams


def restart_seeds(cfg: TrainConfig, lam_index: int) -> list[int]:
    return [derive_seed(cfg.seed, lam_index, r) for r in range(cfg.restarts)]


def lambda_sweep(cfg: TrainConfig, progress=None) -> list[RunRecord]:
    """Sweep lambda upward until SER exceeds ser_max or the schedule ends.

    The violating record is retained and marked terminal.
    """
    cfg = cfg.resolved()
    records = []
    for k, lam in enumerate(lambda_schedule(cfg)):
        rec = multi_restart(cfg, lam, restart_seeds(cfg, k))
        records.append(rec)
        if progress is not None:
            progress(rec)
        if rec.ser > cfg.ser_max:
            rec.terminal = True
            break
    return records
