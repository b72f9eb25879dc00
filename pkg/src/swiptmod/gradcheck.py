"""Central finite-difference verification of the full-chain gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ROLE_MISC, sample_noise, substream
from .harvester import ModelAParams, ModelBParams
from .nn import NetworkParams, init_params
from .trainer import network_cost

DEFAULT_STEP = 1e-5
DEFAULT_TOL = 1e-6
DEFAULT_LAMBDAS = (0.0, 1e-4, 1e-2)

# Finite differences are only valid away from the ReLU kinks and the clamp
# thresholds; configurations violating these margins are redrawn.
RELU_MARGIN = 1e-3
PROB_MARGIN = 1e-6
PDEL_MARGIN = 1e-10


@dataclass
class BlockReport:
    name: str
    max_rel_err: float


@dataclass
class ConfigReport:
    index: int
    model: str
    lam: float
    m: int
    blocks: list[BlockReport]

    @property
    def max_rel_err(self) -> float:
        return max(b.max_rel_err for b in self.blocks)


@dataclass
class GradcheckReport:
    configs: list[ConfigReport]
    tol: float

    @property
    def max_rel_err(self) -> float:
        return max(c.max_rel_err for c in self.configs)

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tol

    def worst_blocks(self) -> dict[str, float]:
        worst: dict[str, float] = {}
        for cfg in self.configs:
            for blk in cfg.blocks:
                worst[blk.name] = max(worst.get(blk.name, 0.0), blk.max_rel_err)
        return worst


def _block_names(params: NetworkParams) -> list[str]:
    names = []
    for side, layers in (("enc", params.encoder), ("dec", params.decoder)):
        for i in range(len(layers)):
            names.append(f"{side}{i}.W")
            names.append(f"{side}{i}.b")
    return names


def _rel_errors(analytic: np.ndarray, numeric: np.ndarray,
                floor: float) -> np.ndarray:
    # Components below `floor` are dominated by the finite-difference roundoff
    # resolution eps*|cost|/(2*step) and cannot be resolved to the relative
    # tolerance; the floor folds them into an absolute check at that scale.
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / denom


def _denominator_floor(cost: float, step: float, tol: float) -> float:
    eps = np.finfo(float).eps
    return eps * (1.0 + abs(cost)) / (step * tol)

def _draw_case(rng, case_index):
    lam = DEFAULT_LAMBDAS[case_index % len(DEFAULT_LAMBDAS)]
    if (case_index // len(DEFAULT_LAMBDAS)) % 2 == 0:
        model = ModelAParams(alpha=0.3829, beta=0.0034, gamma=0.0)
        p_a = float(rng.uniform(0.05, 0.2))
    else:
        # near the sigmoid knee: the power path is active but the curvature
        # stays low enough for the fixed finite-difference step
        model = ModelBParams(ls=0.02, a=6400.0, b=0.003)
        p_a = float(rng.uniform(0.003, 0.006))
    m = int(rng.choice([4, 8]))
    return model, p_a, lam, m


def check_one(model, p_a, lam, m, seed, step=DEFAULT_STEP, tol=DEFAULT_TOL,
              corrupt: bool = False) -> list[BlockReport] | None:
    """FD-vs-analytic comparison for one random configuration.

    Returns None when the drawn point sits too close to a ReLU kink or a clamp
    threshold for finite differences to be meaningful.
    """
    batch = 8
    params = init_params([m, 2 * m, 2], [2, 2 * m, m], seed)
    rng = substream(seed, ROLE_MISC)
    msgs = rng.integers(0, m, size=batch)
    noise = sample_noise(batch, p_a / 50.0, rng)

    cost, info, grads = network_cost(params, msgs, noise, p_a, lam, model)
    if (info["min_relu_margin"] < RELU_MARGIN
            or info["min_prob"] < PROB_MARGIN
            or info["p_del"] < PDEL_MARGIN
            or info["degenerate"]):
        return None

    floor = _denominator_floor(cost, step, tol)
    arrays = params.arrays()
    if corrupt:
        grads = [g.copy() for g in grads]
        grads[0].flat[0] *= 1.001
        grads[0].flat[0] += 1e-4
    blocks = []
    for name, arr, grad in zip(_block_names(params), arrays, grads):
        numeric = np.zeros_like(arr)
        flat = arr.reshape(-1)
        nflat = numeric.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            up, _, _ = network_cost(params, msgs, noise, p_a, lam, model,
                                    want_grads=False)
            flat[j] = orig - step
            dn, _, _ = network_cost(params, msgs, noise, p_a, lam, model,
                                    want_grads=False)
            flat[j] = orig
            nflat[j] = (up - dn) / (2.0 * step)
        err = _rel_errors(grad, numeric, floor)
        blocks.append(BlockReport(name=name, max_rel_err=float(err.max())))
    return blocks


def run_gradcheck(num_configs: int = 20, seed: int = 0, step: float = DEFAULT_STEP,
                  tol: float = DEFAULT_TOL, corrupt: bool = False) -> GradcheckReport:
    """FD comparison over random configurations covering both harvester
    models, the normalization layer and lambda in {0, 1e-4, 1e-2}."""
    rng = substream(seed, ROLE_MISC, 0)
    reports = []
    attempt = 0
    case = 0
    while len(reports) < num_configs:
        model, p_a, lam, m = _draw_case(rng, case)
        blocks = check_one(model, p_a, lam, m,
                           seed=int(rng.integers(0, 2 ** 31)), step=step,
                           tol=tol, corrupt=corrupt)
        attempt += 1
        if attempt > 20 * num_configs:
            raise RuntimeError("could not draw enough kink-free configurations")
        if blocks is None:
            continue
        reports.append(ConfigReport(
            index=len(reports),
            model=type(model).__name__.replace("Params", ""),
            lam=lam, m=m, blocks=blocks))
        case += 1
    return GradcheckReport(configs=reports, tol=tol)
