"""NSGA-II mixture design: minimize (cost, |target fc - predicted fc|).

A chromosome is the seven content shares (kg/m3) in ``CONTENTS`` order; the
age of curing is a fixed per-run scalar. Populations only ever hold feasible
mixtures: every draw or child is rescaled to unit volume and checked against
the ratio table and the per-component ranges, and failures are re-drawn.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .data import CONTENTS, FEATURES, Dataset, Mixture

log = logging.getLogger(__name__)

C, BFS, FLA, W, SP, CA, FA = range(7)
BINDER = (C, BFS, FLA)
AGGREGATE = (CA, FA)
ALL = tuple(range(7))


@dataclass(frozen=True)
class PriceTable:
    """Unit prices in $/kg."""

    cement: float = 0.11
    blast_furnace_slag: float = 0.060
    fly_ash: float = 0.055
    water: float = 0.00024
    superplasticizer: float = 2.94
    coarse_aggregate: float = 0.010
    fine_aggregate: float = 0.006

    def __post_init__(self):
        if any(getattr(self, f.name) < 0 for f in fields(self)):
            raise ValueError("prices must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in CONTENTS])


@dataclass(frozen=True)
class UnitWeightTable:
    """Unit weights in kg/m3."""

    cement: float = 3150.0
    blast_furnace_slag: float = 2800.0
    fly_ash: float = 2500.0
    water: float = 1000.0
    superplasticizer: float = 1350.0
    coarse_aggregate: float = 2500.0
    fine_aggregate: float = 2650.0

    def __post_init__(self):
        if any(getattr(self, f.name) <= 0 for f in fields(self)):
            raise ValueError("unit weights must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in CONTENTS])


@dataclass(frozen=True)
class RatioBound:
    name: str
    numerator: tuple
    denominator: tuple
    lower: float  # percent
    upper: float  # percent

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"{self.name}: lower bound exceeds upper bound")


RATIO_TABLE = (
    RatioBound("cement/binder", (C,), BINDER, 26.4, 100.0),
    RatioBound("water/binder", (W,), BINDER, 23.5, 90.0),
    RatioBound("water/cement", (W,), (C,), 27.0, 188.0),
    RatioBound("fly_ash/binder", (FLA,), BINDER, 0.0, 55.2),
    RatioBound("fly_ash/cement", (FLA,), (C,), 0.0, 143.0),
    RatioBound("slag/binder", (BFS,), BINDER, 0.0, 61.0),
    RatioBound("slag/cement", (BFS,), (C,), 0.0, 158.0),
    RatioBound("superplasticizer/binder", (SP,), BINDER, 0.0, 5.6),
    RatioBound("superplasticizer/cement", (SP,), (C,), 0.0, 13.0),
    RatioBound("coarse_agg/total_agg", (CA,), AGGREGATE, 46.2, 65.2),
    RatioBound("fine_agg/total_agg", (FA,), AGGREGATE, 34.8, 53.8),
    RatioBound("coarse_agg/binder", (CA,), BINDER, 118.0, 563.0),
    RatioBound("fine_agg/binder", (FA,), BINDER, 106.0, 423.0),
    RatioBound("binder/total_weight", BINDER, ALL, 8.5, 27.0),
    RatioBound("aggregate/total_weight", AGGREGATE, ALL, 64.0, 84.0),
)


class InfeasibleError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Ratio rows, per-component [lower, upper] ranges (kg/m3) and the volume tolerance.

    ``ratio_tol`` (in percentage points) absorbs floating-point rounding only.
    """

    lower: np.ndarray
    upper: np.ndarray
    ratios: tuple = RATIO_TABLE
    volume_tol: float = 1e-6
    ratio_tol: float = 1e-9

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != (7,) or upper.shape != (7,):
            raise ValueError("component ranges must have 7 entries")
        if np.any(lower > upper) or np.any(lower < 0):
            raise ValueError("component ranges must satisfy 0 <= lower <= upper")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_dataset(cls, ds: Dataset, **kwargs) -> "ConstraintSet":
        contents = ds.X[:, :7]
        return cls(contents.min(axis=0), contents.max(axis=0), **kwargs)

    def to_dict(self) -> dict:
        return {
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "volume_tol": self.volume_tol,
            "ratio_tol": self.ratio_tol,
        }

    @classmethod
    def from_dict(cls, d) -> "ConstraintSet":
        return cls(
            np.array(d["lower"], dtype=float),
            np.array(d["upper"], dtype=float),
            volume_tol=float(d.get("volume_tol", 1e-6)),
            ratio_tol=float(d.get("ratio_tol", 1e-9)),
        )


def _contents(m) -> np.ndarray:
    if isinstance(m, Mixture):
        return m.as_array()[:7]
    m = np.asarray(m, dtype=float)
    return m[..., :7]


def cost(m, prices: PriceTable = PriceTable()):
    """Material cost in $ per m3; age of curing does not enter."""
    x = _contents(m)
    out = x @ prices.as_array()
    return float(out) if np.ndim(out) == 0 else out


def volume(m, uw: UnitWeightTable = UnitWeightTable()):
    """Absolute volume sum(C_i / gamma_i) in m3."""
    x = _contents(m)
    out = x @ (1.0 / uw.as_array())
    return float(out) if np.ndim(out) == 0 else out


def normalize_volume(X, uw: UnitWeightTable = UnitWeightTable()) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    v = np.asarray(volume(X, uw))
    return X / v[..., None]


def ratio_values(X, ratios=RATIO_TABLE) -> np.ndarray:
    """Ratios in percent, shape (n, len(ratios)); a zero denominator gives nan."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty((len(X), len(ratios)))
    with np.errstate(divide="ignore", invalid="ignore"):
        for k, r in enumerate(ratios):
            num = X[:, list(r.numerator)].sum(axis=1)
            den = X[:, list(r.denominator)].sum(axis=1)
            out[:, k] = np.where(den > 0, 100.0 * num / np.where(den > 0, den, 1.0), np.nan)
    return out


def feasible_mask(X, cs: ConstraintSet, uw: UnitWeightTable = UnitWeightTable()) -> np.ndarray:
    """Vectorized feasibility of content rows; agrees with ``check_constraints``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))[:, :7]
    r = ratio_values(X, cs.ratios)
    lo = np.array([b.lower for b in cs.ratios]) - cs.ratio_tol
    hi = np.array([b.upper for b in cs.ratios]) + cs.ratio_tol
    ok = np.all((r >= lo) & (r <= hi), axis=1)  # nan compares False
    ok &= np.all((X >= cs.lower) & (X <= cs.upper), axis=1)
    ok &= np.abs(np.asarray(volume(X, uw)) - 1.0) <= cs.volume_tol
    return ok


@dataclass(frozen=True)
class CheckRow:
    name: str
    kind: str  # "ratio", "range" or "volume"
    value: float
    lower: float
    upper: float
    passed: bool
    margin: float  # distance inside the nearest bound; negative when violated
    reason: str = ""


@dataclass(frozen=True)
class FeasibilityReport:
    rows: tuple
    volume: float

    @property
    def feasible(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]

    def row(self, name) -> CheckRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def check_constraints(m, cs: ConstraintSet, uw: UnitWeightTable = UnitWeightTable()) -> FeasibilityReport:
    x = _contents(m).astype(float)
    rows = []
    for bound, value in zip(cs.ratios, ratio_values(x, cs.ratios)[0]):
        if np.isnan(value):
            rows.append(CheckRow(bound.name, "ratio", float("nan"), bound.lower, bound.upper,
                                 False, float("-inf"), "zero denominator"))
            continue
        margin = min(value - bound.lower, bound.upper - value)
        passed = margin >= -cs.ratio_tol
        rows.append(CheckRow(bound.name, "ratio", float(value), bound.lower, bound.upper, passed,
                             float(margin), "" if passed else "ratio outside bounds"))
    for i, name in enumerate(CONTENTS):
        margin = min(x[i] - cs.lower[i], cs.upper[i] - x[i])
        passed = margin >= 0
        rows.append(CheckRow(name, "range", float(x[i]), float(cs.lower[i]), float(cs.upper[i]),
                             passed, float(margin), "" if passed else "content outside range"))
    v = volume(x, uw)
    margin = cs.volume_tol - abs(v - 1.0)
    rows.append(CheckRow("volume", "volume", v, 1.0 - cs.volume_tol, 1.0 + cs.volume_tol,
                         margin >= 0, margin, "" if margin >= 0 else "unit volume violated"))
    return FeasibilityReport(tuple(rows), v)


def sample_feasible_batch(cs: ConstraintSet, rng, n: int, uw: UnitWeightTable = UnitWeightTable(),
                          max_attempts: int = 100_000) -> np.ndarray:
    """``n`` feasible content rows by rejection sampling.

    Each attempt draws every component uniformly within its range and rescales
    the mixture to unit volume. Raises ``InfeasibleError`` when a sample needs
    more than ``max_attempts`` draws on average.
    """
    out = []
    found = attempts = 0
    chunk = min(max(256, 8 * n), max_attempts)
    while found < n:
        if (found == 0 and attempts >= max_attempts) or attempts >= max_attempts * n:
            raise InfeasibleError(
                f"found {found} of {n} feasible mixtures after {attempts} attempts; "
                "the ratio table and component ranges may be inconsistent"
            )
        X = normalize_volume(rng.uniform(cs.lower, cs.upper, size=(chunk, 7)), uw)
        take = np.flatnonzero(feasible_mask(X, cs, uw))[: n - found]
        out.append(X[take])
        found += len(take)
        attempts += chunk
    return np.concatenate(out)


def sample_feasible(cs: ConstraintSet, seed=None, uw: UnitWeightTable = UnitWeightTable(),
                    age: float = 28.0, max_attempts: int = 100_000) -> Mixture:
    rng = np.random.default_rng(seed)
    x = sample_feasible_batch(cs, rng, 1, uw, max_attempts)[0]
    return Mixture(*x, age=age)


def dominates(a, b) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    return bool(np.all(a <= b) and np.any(a < b))


def non_dominated_sort(F) -> list:
    """Fronts as lists of row indices into ``F`` (n x n_objectives), best first."""
    F = np.asarray(F, dtype=float)
    n = len(F)
    if n == 0:
        return []
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    remaining = np.ones(n, dtype=bool)
    fronts = []
    while remaining.any():
        front = np.flatnonzero(remaining & (count == 0))
        fronts.append(front.tolist())
        remaining[front] = False
        count = count - dom[front].sum(axis=0)
    return fronts


def crowding_distance(F) -> np.ndarray:
    """Crowding distance within a single front; boundary points get +inf."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        lo, hi = F[order[0], k], F[order[-1], k]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = hi - lo
        if span == 0:
            continue
        dist[order[1:-1]] += (F[order[2:], k] - F[order[:-2], k]) / span
    return dist


def rank_and_crowding(F):
    F = np.asarray(F, dtype=float)
    rank = np.empty(len(F), dtype=int)
    crowd = np.empty(len(F))
    for r, front in enumerate(non_dominated_sort(F)):
        rank[front] = r
        crowd[front] = crowding_distance(F[front])
    return rank, crowd


def survival_order(rank, crowd) -> np.ndarray:
    """Indices ordered by rank ascending, then crowding descending."""
    return np.lexsort((-np.asarray(crowd), np.asarray(rank)))


def fitness(rank, crowd, crowd_weight: float = 0.5) -> np.ndarray:
    """Roulette score ``1 / (1 + rank + crowd_weight * (1 - c/(1+c)))``.

    With ``crowd_weight < 1`` crowding only reorders individuals of equal
    rank; boundary points (c = inf) score exactly ``1 / (1 + rank)``.
    """
    rank = np.asarray(rank, dtype=float)
    crowd = np.asarray(crowd, dtype=float)
    with np.errstate(invalid="ignore"):
        squashed = np.where(np.isinf(crowd), 1.0, crowd / (1.0 + crowd))
    return 1.0 / (1.0 + rank + crowd_weight * (1.0 - squashed))


def select_parents(rank, crowd, k: int, rng) -> np.ndarray:
    """Roulette-wheel draw of ``k`` indices with probability proportional to ``fitness``."""
    if k == 0:
        return np.empty(0, dtype=int)
    fit = fitness(rank, crowd)
    return rng.choice(len(fit), size=k, replace=True, p=fit / fit.sum())


def crossover(a, b, rng):
    """Arithmetic blend; each child draws its own mixing coefficient in U(0, 1)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    shape = a.shape[:-1] + (1,)
    alpha1 = rng.random(shape)
    alpha2 = rng.random(shape)
    return alpha1 * a + (1 - alpha1) * b, alpha2 * a + (1 - alpha2) * b


def mutate(m, rng, sigma, prob: float = 1 / 7) -> np.ndarray:
    """Add N(0, sigma_i) noise to each component independently with probability ``prob``."""
    m = np.asarray(m, dtype=float)
    hit = rng.random(m.shape) < prob
    noise = rng.standard_normal(m.shape) * np.asarray(sigma, dtype=float)
    return m + np.where(hit, noise, 0.0)


@dataclass(frozen=True)
class GaConfig:
    population: int = 200
    children: int = 100
    survivors: int = 50
    generations: int = 200
    target_cs: float = 40.0
    age: float = 28.0
    seed: int = 0
    mutation_sigma: float = 0.05  # fraction of each component's range
    mutation_prob: float = 1 / 7
    repair_retries: int = 20
    refill: bool = True
    max_sample_attempts: int = 100_000
    max_deviation: float = 2.0
    blend: str = "mse_only"

    def __post_init__(self):
        if not 0 < self.survivors <= self.population:
            raise ValueError("need 0 < survivors <= population")
        if self.children < 0 or self.generations < 0:
            raise ValueError("children and generations must be non-negative")
        if self.age < 1:
            raise ValueError("age of curing must be >= 1 day")


@dataclass(frozen=True)
class Individual:
    mixture: Mixture
    cost: float
    deviation: float
    predicted_cs: float
    rank: int = 0
    crowding: float = 0.0

    @property
    def objectives(self) -> tuple:
        return (self.cost, self.deviation)


@dataclass
class ParetoResult:
    front: list
    best: Individual
    history: list = field(default_factory=list)  # per generation: (min cost, min deviation) on front 0
    discarded_children: int = 0
    config: GaConfig = None


class Problem:
    """Objective evaluation for one target strength."""

    def __init__(self, predict: Callable, target_cs: float, age: float = 28.0,
                 prices: PriceTable = PriceTable()):
        self.predict = predict
        self.target_cs = float(target_cs)
        self.age = float(age)
        self.price_vector = prices.as_array()

    def features(self, X7) -> np.ndarray:
        X7 = np.atleast_2d(X7)
        return np.column_stack([X7, np.full(len(X7), self.age)])

    def evaluate(self, X7):
        """Objective matrix (n x 2) and the predicted strengths."""
        X7 = np.atleast_2d(X7)
        pred = np.asarray(self.predict(self.features(X7)), dtype=float).reshape(-1)
        F = np.column_stack([X7 @ self.price_vector, np.abs(self.target_cs - pred)])
        return F, pred


def cs_deviation(m, target: float, predict: Callable) -> float:
    """|target - predicted fc| for a single mixture (age taken from ``m``)."""
    x = m.as_array() if isinstance(m, Mixture) else np.asarray(m, dtype=float)
    return float(abs(target - np.asarray(predict(x[None, :])).reshape(-1)[0]))


def make_children(X, rank, crowd, cfg: GaConfig, cs: ConstraintSet, uw: UnitWeightTable, rng):
    """Selection, crossover and mutation with repair by re-draw.

    Returns the feasible children and the number discarded after
    ``cfg.repair_retries`` failed re-draws.
    """
    n_pairs = (cfg.children + 1) // 2
    parents = select_parents(rank, crowd, 2 * n_pairs, rng)
    a = np.repeat(X[parents[0::2]], 2, axis=0)
    b = np.repeat(X[parents[1::2]], 2, axis=0)
    sigma = cfg.mutation_sigma * (cs.upper - cs.lower)
    children = np.empty_like(a)
    pending = np.arange(len(a))
    for _ in range(cfg.repair_retries + 1):
        if pending.size == 0:
            break
        c1, _ = crossover(a[pending], b[pending], rng)
        c1 = mutate(c1, rng, sigma, cfg.mutation_prob)
        with np.errstate(divide="ignore", invalid="ignore"):
            c1 = normalize_volume(c1, uw)
        ok = feasible_mask(c1, cs, uw) & np.all(np.isfinite(c1), axis=1)
        children[pending[ok]] = c1[ok]
        pending = pending[~ok]
    keep = np.setdiff1d(np.arange(len(a)), pending)
    return children[keep][: cfg.children], int(pending.size)


def _front_minima(F):
    front = non_dominated_sort(F)[0]
    return float(F[front, 0].min()), float(F[front, 1].min())


def run_nsga2(cfg: GaConfig, predict: Callable, prices: PriceTable = PriceTable(),
              uw: UnitWeightTable = UnitWeightTable(), cs: ConstraintSet = None) -> ParetoResult:
    """Evolve feasible mixtures toward the cost / strength-deviation Pareto front.

    Each generation breeds ``cfg.children`` children from roulette-selected
    parents, ranks parents and children together, keeps ``cfg.survivors``
    by (rank, crowding) and, when ``cfg.refill`` is set, tops the population
    back up to ``cfg.population`` with fresh feasible samples.
    """
    if cs is None:
        raise ValueError("a ConstraintSet is required")
    rng = np.random.default_rng(cfg.seed)
    problem = Problem(predict, cfg.target_cs, cfg.age, prices)

    X = sample_feasible_batch(cs, rng, cfg.population, uw, cfg.max_sample_attempts)
    F, pred = problem.evaluate(X)
    history = [_front_minima(F)]
    discarded = 0
    for gen in range(cfg.generations):
        rank, crowd = rank_and_crowding(F)
        kids, lost = make_children(X, rank, crowd, cfg, cs, uw, rng)
        discarded += lost
        Fk, pk = problem.evaluate(kids) if len(kids) else (np.empty((0, 2)), np.empty(0))
        X = np.concatenate([X, kids])
        F = np.concatenate([F, Fk])
        pred = np.concatenate([pred, pk])

        rank, crowd = rank_and_crowding(F)
        keep = survival_order(rank, crowd)[: cfg.survivors]
        X, F, pred = X[keep], F[keep], pred[keep]
        if cfg.refill and len(X) < cfg.population:
            fresh = sample_feasible_batch(cs, rng, cfg.population - len(X), uw, cfg.max_sample_attempts)
            Ff, pf = problem.evaluate(fresh)
            X = np.concatenate([X, fresh])
            F = np.concatenate([F, Ff])
            pred = np.concatenate([pred, pf])
        history.append(_front_minima(F))
        if (gen + 1) % 50 == 0:
            log.debug("target %.1f gen %d: min cost %.3f, min deviation %.4f",
                      cfg.target_cs, gen + 1, *history[-1])

    rank, crowd = rank_and_crowding(F)
    front_idx = non_dominated_sort(F)[0]
    front = [
        Individual(Mixture(*X[i], age=cfg.age), float(F[i, 0]), float(F[i, 1]), float(pred[i]),
                   int(rank[i]), float(crowd[i]))
        for i in sorted(front_idx, key=lambda i: (F[i, 0], F[i, 1]))
    ]
    best = min(front, key=lambda ind: (ind.deviation, ind.cost))
    if discarded:
        log.info("target %.1f: %d children discarded after failed repair", cfg.target_cs, discarded)
    return ParetoResult(front, best, history, discarded, cfg)


@dataclass(frozen=True)
class ParetoRow:
    target: float
    achieved_cs: float
    deviation: float
    cost: float
    mixture: Mixture
    flagged: bool = False  # no front member within max_deviation


def choose_row(result: ParetoResult, max_deviation: float) -> ParetoRow:
    """Cheapest front member within ``max_deviation``; else the closest one, flagged."""
    cfg = result.config
    close = [ind for ind in result.front if ind.deviation <= max_deviation]
    if close:
        ind = min(close, key=lambda i: (i.cost, i.deviation))
        flagged = False
    else:
        ind = result.best
        flagged = True
    return ParetoRow(cfg.target_cs, ind.predicted_cs, ind.deviation, ind.cost, ind.mixture, flagged)


def target_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def pareto_table(targets, template: GaConfig, predict: Callable, prices: PriceTable = PriceTable(),
                 uw: UnitWeightTable = UnitWeightTable(), cs: ConstraintSet = None,
                 return_results: bool = False):
    """One independent GA run per target; one row per target."""
    targets = list(targets)
    if not targets:
        raise ValueError("no target strengths given")
    rows, results = [], []
    for k, t in enumerate(targets):
        cfg = replace(template, target_cs=float(t), seed=target_seed(template.seed, k))
        res = run_nsga2(cfg, predict, prices, uw, cs)
        rows.append(choose_row(res, template.max_deviation))
        results.append(res)
    return (rows, results) if return_results else rows


def marginal_cost(rows, lo: float, hi: float) -> float:
    """Average $ per MPa between the rows whose targets are ``lo`` and ``hi``."""
    by_target = {r.target: r for r in rows}
    return (by_target[hi].cost - by_target[lo].cost) / (hi - lo)


PARETO_COLUMNS = ("target", "achieved_cs", "deviation", "cost", "flagged") + FEATURES


def write_pareto_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(PARETO_COLUMNS)
        for r in rows:
            w.writerow([repr(r.target), repr(r.achieved_cs), repr(r.deviation), repr(r.cost),
                        int(r.flagged)] + [repr(float(v)) for v in r.mixture.as_array()])


def format_pareto_table(rows) -> str:
    lines = [f"{'Target CS (MPa)':>16} {'Sample CS (MPa)':>16} {'Distance (MPa)':>15} {'Cost ($)':>10}"]
    for r in rows:
        flag = "  *" if r.flagged else ""
        lines.append(f"{r.target:>16.6g} {r.achieved_cs:>16.6g} {r.deviation:>15.6g} {r.cost:>10.6g}{flag}")
    if any(r.flagged for r in rows):
        lines.append("* no front member within the deviation limit; closest shown")
    return "\n".join(lines)


def write_front_svg(results, path) -> None:
    """Cost against predicted strength for every final front, one colour per target."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for res in results:
        cs_vals = [ind.predicted_cs for ind in res.front]
        costs = [ind.cost for ind in res.front]
        ax.scatter(cs_vals, costs, s=10, label=f"{res.config.target_cs:g} MPa")
    ax.set_xlabel("predicted compressive strength (MPa)")
    ax.set_ylabel("cost ($/m3)")
    ax.legend(fontsize=7, ncol=3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


_INT_KEYS = {"population", "children", "survivors", "generations", "seed", "repair_retries",
             "max_sample_attempts"}
_FLOAT_KEYS = {"target_cs", "age", "mutation_sigma", "mutation_prob", "max_deviation"}


def parse_ga_config(text: str):
    """Parse ``key = value`` lines (``#`` starts a comment).

    Returns ``(targets, GaConfig)``; ``targets`` is a comma-separated list.
    """
    values = {}
    targets = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            if key == "targets":
                targets = [float(t) for t in val.split(",") if t.strip()]
            elif key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key == "refill":
                values[key] = val.lower() in ("1", "true", "yes", "on")
            elif key == "blend":
                values[key] = val
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    cfg = GaConfig(**values)
    return (targets if targets is not None else [cfg.target_cs]), cfg


def load_ga_config(path):
    return parse_ga_config(Path(path).read_text(encoding="utf-8"))
