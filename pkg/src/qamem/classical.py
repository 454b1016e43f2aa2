"""Classical Hopfield baseline: Hebb couplings, energy, asynchronous dynamics.

Patterns are stored in the couplings w_ij = (1/n) sum_mu xi_i xi_j (zero
diagonal) and retrieved by zero-temperature asynchronous updates
s_i <- sign(sum_j w_ij s_j), which never increase the energy
E = -(1/2) sum_{i != j} w_ij s_i s_j.  The capacity experiment measures the
final overlap with a target pattern from corrupted starts as the loading
factor alpha = p/n grows; retrieval degrades sharply past alpha ~ 0.14
because of crosstalk between stored patterns.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .patterns import PatternSet


class ClassicalError(ValueError):
    pass


@dataclass(frozen=True)
class HopfieldNet:
    weights: np.ndarray  # symmetric, zero diagonal

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def _as_spins(s) -> np.ndarray:
    arr = np.asarray(s, dtype=np.int64)
    if arr.ndim != 1 or not np.all(np.abs(arr) == 1):
        raise ClassicalError("state must be a 1-D sequence of +/-1 spins")
    return arr


def hebb(pattern_set: PatternSet) -> HopfieldNet:
    """Couplings w_ij = (1/n) sum over patterns of xi_i * xi_j, zero diagonal."""
    xi = np.array([p.to_spins() for p in pattern_set], dtype=np.float64)
    n = pattern_set.n
    w = xi.T @ xi / n
    np.fill_diagonal(w, 0.0)
    return HopfieldNet(weights=w)


def energy(net: HopfieldNet, s) -> float:
    spins = _as_spins(s)
    if spins.shape[0] != net.n:
        raise ClassicalError(
            f"state length {spins.shape[0]} does not match n={net.n}"
        )
    return -0.5 * float(spins @ net.weights @ spins)


def update_async(
    net: HopfieldNet, s, rng: np.random.Generator, sweeps: int = 100
) -> tuple[np.ndarray, bool]:
    """Asynchronous single-spin updates in seeded random order.

    Each sweep visits every neuron once in a fresh random permutation and
    sets s_i to the sign of its local field, keeping the current value on a
    zero field (which makes every accepted flip lower the energy).  Returns
    the final state and whether a full sweep passed with no change.
    """
    if sweeps < 1:
        raise ClassicalError("sweeps must be >= 1")
    spins = _as_spins(s).copy()
    if spins.shape[0] != net.n:
        raise ClassicalError(
            f"state length {spins.shape[0]} does not match n={net.n}"
        )
    w = net.weights
    for _ in range(sweeps):
        changed = False
        for i in rng.permutation(net.n):
            field = w[i] @ spins
            if field > 0 and spins[i] != 1:
                spins[i] = 1
                changed = True
            elif field < 0 and spins[i] != -1:
                spins[i] = -1
                changed = True
        if not changed:
            return spins, True
    return spins, False


def overlap(a, b) -> float:
    """Normalized overlap (1/n) sum_i a_i b_i between two spin states."""
    sa, sb = _as_spins(a), _as_spins(b)
    if sa.shape != sb.shape:
        raise ClassicalError("overlap requires equal-length states")
    return float(sa @ sb) / sa.shape[0]


@dataclass(frozen=True)
class CapacityRow:
    alpha: float
    p: int
    trials: int
    mean_overlap: float
    std_overlap: float


@dataclass(frozen=True)
class CapacityTable:
    rows: tuple[CapacityRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["alpha", "p", "trials", "mean_overlap", "std_overlap"])
        for row in self.rows:
            writer.writerow(
                [
                    format(row.alpha, ".17g"),
                    row.p,
                    row.trials,
                    format(row.mean_overlap, ".17g"),
                    format(row.std_overlap, ".17g"),
                ]
            )
        return buf.getvalue()


def _capacity_trial(
    n: int, p: int, corruption: float, rng: np.random.Generator, sweeps: int
) -> float:
    xi = rng.choice([-1, 1], size=(p, n))
    w = xi.T.astype(np.float64) @ xi.astype(np.float64) / n
    np.fill_diagonal(w, 0.0)
    net = HopfieldNet(weights=w)
    start = xi[0].copy()
    k = round(corruption * n)
    if k:
        flip = rng.choice(n, size=k, replace=False)
        start[flip] *= -1
    final, _ = update_async(net, start, rng, sweeps=sweeps)
    return abs(overlap(final, xi[0]))


def capacity_experiment_seeded(
    n: int,
    alpha_grid,
    trials: int,
    corruption: float,
    seed: int,
    workers: int = 1,
    sweeps: int = 50,
) -> CapacityTable:
    """Capacity experiment with per-trial derived seeds.

    Trial (i_alpha, i_trial) runs on its own generator seeded from the
    master seed and the flat task index, so results are identical for any
    worker count and collected in task order.
    """
    from concurrent.futures import ThreadPoolExecutor

    from .seeds import task_rng

    if not 0.0 <= corruption < 1.0:
        raise ClassicalError("corruption must be in [0, 1)")
    alphas = [float(a) for a in alpha_grid]
    tasks = []
    for i, alpha in enumerate(alphas):
        p = max(1, round(alpha * n))
        for t in range(trials):
            tasks.append((p, i * trials + t))

    def run(task):
        p, index = task
        return _capacity_trial(n, p, corruption, task_rng(seed, index), sweeps)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(task) for task in tasks]

    rows = []
    for i, alpha in enumerate(alphas):
        arr = np.array(results[i * trials : (i + 1) * trials])
        rows.append(
            CapacityRow(
                alpha=alpha,
                p=max(1, round(alpha * n)),
                trials=trials,
                mean_overlap=float(arr.mean()),
                std_overlap=float(arr.std()),
            )
        )
    return CapacityTable(rows=tuple(rows))


def capacity_experiment(
    n: int,
    alpha_grid,
    trials: int,
    corruption: float,
    rng: np.random.Generator,
    sweeps: int = 50,
) -> CapacityTable:
    """Mean retrieval overlap from corrupted inputs at each loading factor.

    For every alpha, stores p = round(alpha * n) random patterns, starts the
    dynamics from the first pattern with a fraction of spins flipped, and
    records the final overlap with that target.
    """
    if not 0.0 <= corruption < 1.0:
        raise ClassicalError("corruption must be in [0, 1)")
    rows = []
    for alpha in alpha_grid:
        p = max(1, round(alpha * n))
        arr = np.array(
            [_capacity_trial(n, p, corruption, rng, sweeps) for _ in range(trials)]
        )
        rows.append(
            CapacityRow(
                alpha=float(alpha),
                p=p,
                trials=trials,
                mean_overlap=float(arr.mean()),
                std_overlap=float(arr.std()),
            )
        )
    return CapacityTable(rows=tuple(rows))
