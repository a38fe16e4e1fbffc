"""Real-coded genetic algorithm over detuning-waveform coefficients.

Costs are evaluated for the whole population in one compiled batch, so a
generation costs roughly one propagation per (genome, kappa) pair.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .core import MediumParams
from .propagation import Backend, SolverOptions, batch_ce, fine_grid
from .waveforms import BernsteinDetuning, CouplingProfile, FourierDetuning, LinearRamp

logger = logging.getLogger(__name__)

DEFAULT_BOUND = 150.0

# kappa_i = i / 4 for i = 0..20; the mean runs over all 21 samples.
DEFAULT_KAPPA_GRID = tuple(i / 4 for i in range(21))


@dataclass(frozen=True)
class GenomeSpec:
    """Waveform family plus per-gene bounds.

    ``size`` is the Fourier order (7 genes for 3) or the Bernstein degree
    (8 genes for 7).
    """

    family: str = "fourier"
    size: int | None = None
    bounds: tuple | None = None

    def __post_init__(self):
        if self.family not in ("fourier", "bernstein"):
            raise ValueError(f"cannot optimise waveform family {self.family!r}")
        if self.size is None:
            object.__setattr__(self, "size", 3 if self.family == "fourier" else 7)
        if self.bounds is None:
            object.__setattr__(self, "bounds", ((-DEFAULT_BOUND, DEFAULT_BOUND),) * self.n_genes)
        b = np.asarray(self.bounds, dtype=float)
        object.__setattr__(self, "bounds", tuple(map(tuple, b.tolist())))
        if b.shape != (self.n_genes, 2):
            raise ValueError(f"need {self.n_genes} (lo, hi) bounds, got shape {b.shape}")
        if np.any(b[:, 0] >= b[:, 1]):
            raise ValueError("every gene needs lo < hi")

    @property
    def n_genes(self) -> int:
        return 2 * self.size + 1 if self.family == "fourier" else self.size + 1

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    def waveform(self, genome):
        if self.family == "fourier":
            return FourierDetuning.from_coefficients(genome)
        return BernsteinDetuning.from_coefficients(genome)

    def basis(self, z) -> np.ndarray:
        return self.waveform(np.zeros(self.n_genes)).basis(z)


@dataclass(frozen=True)
class AverageOverGrid:
    kappa_samples: tuple = DEFAULT_KAPPA_GRID

    def __post_init__(self):
        k = tuple(float(x) for x in self.kappa_samples)
        if not k or list(k) != sorted(k):
            raise ValueError("kappa_samples must be nonempty and sorted")
        object.__setattr__(self, "kappa_samples", k)

    @property
    def kappas(self):
        return self.kappa_samples


@dataclass(frozen=True)
class SingleKappa:
    kappa: float = 15.0

    @property
    def kappas(self):
        return (float(self.kappa),)


@dataclass(frozen=True)
class CostSpec:
    target: Union[AverageOverGrid, SingleKappa] = field(default_factory=AverageOverGrid)
    params: MediumParams = field(default_factory=lambda: MediumParams(200.0, 1e-4, 0.03))
    coupling: CouplingProfile = field(default_factory=LinearRamp)
    opts: SolverOptions = field(
        default_factory=lambda: SolverOptions(4096, Backend.REDUCED, richardson_check=False)
    )

    def __post_init__(self):
        if self.opts.backend is Backend.LINDBLAD:
            raise ValueError("the lindblad backend is too slow for GA cost evaluation")


@dataclass(frozen=True)
class GAConfig:
    population: int = 64
    generations: int = 200
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_sigma: float = 0.08
    mutation_rate: float = 0.25
    sigma_halving_period: int = 50
    elite_count: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        if self.population < 4:
            raise ValueError("population must be >= 4")
        if not 0 <= self.elite_count < self.population:
            raise ValueError("need 0 <= elite_count < population")
        if self.generations < 1 or self.tournament_size < 1:
            raise ValueError("generations and tournament_size must be >= 1")
        if not (0 <= self.crossover_rate <= 1 and 0 <= self.mutation_rate <= 1):
            raise ValueError("rates must lie in [0, 1]")
        if self.mutation_sigma <= 0 or self.rng_seed < 0:
            raise ValueError("mutation_sigma must be > 0 and rng_seed unsigned")


@dataclass
class OptimizationReport:
    best_genome: list
    best_cost: float
    history: list
    evaluations: int
    seed: int
    family: str
    config: dict

    @property
    def best_ce(self) -> float:
        return 1.0 - self.best_cost

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def population_costs(genomes, spec: GenomeSpec, cost: CostSpec) -> np.ndarray:
    """``1 - mean CE`` for each row of ``genomes``; failed rows cost 1."""
    genomes = np.atleast_2d(np.asarray(genomes, dtype=float))
    if genomes.shape[1] != spec.n_genes:
        raise ValueError(f"genome length {genomes.shape[1]} != {spec.n_genes}")
    z = fine_grid(cost.opts.steps)
    try:
        with np.errstate(all="ignore"):
            delta = genomes @ spec.basis(z)
            ce = batch_ce(cost.params, cost.coupling, delta, cost.target.kappas, cost.opts)
    except Exception as exc:  # keep the GA total
        logger.warning("cost evaluation failed for the whole batch: %s", exc)
        return np.ones(len(genomes))
    out = 1.0 - ce.mean(axis=1)
    bad = ~np.isfinite(out)
    if bad.any():
        logger.warning("%d genomes produced non-finite CE; assigned cost 1", int(bad.sum()))
        out[bad] = 1.0
    return out


def evaluate_cost(genome, cost: CostSpec, spec: GenomeSpec | None = None) -> float:
    """Cost of a single coefficient vector.

    Without ``spec``, odd lengths are read as Fourier and even lengths as
    Bernstein coefficients.
    """
    genome = np.asarray(genome, dtype=float)
    if spec is None:
        n = genome.size
        spec = GenomeSpec("fourier", (n - 1) // 2) if n % 2 else GenomeSpec("bernstein", n - 1)
    return float(population_costs(genome[None, :], spec, cost)[0])


def seed_population(spec: GenomeSpec, cfg: GAConfig, rng=None) -> np.ndarray:
    """Uniform draws within the bounds; row 0 is the all-zero (delta = 0) genome."""
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    pop = rng.uniform(spec.lower, spec.upper, size=(cfg.population, spec.n_genes))
    pop[0] = np.clip(0.0, spec.lower, spec.upper)
    return pop


def _tournament(rng, costs, k):
    idx = rng.integers(0, costs.size, size=k)
    return idx[np.argmin(costs[idx])]


def run_ga(spec: GenomeSpec, cost: CostSpec, cfg: GAConfig) -> OptimizationReport:
    rng = np.random.default_rng(cfg.rng_seed)
    lo, hi = spec.lower, spec.upper
    span = hi - lo
    pop = seed_population(spec, cfg, rng)
    costs = population_costs(pop, spec, cost)
    evaluations = len(pop)
    history = []
    for gen in range(cfg.generations):
        order = np.argsort(costs, kind="stable")
        history.append((float(costs[order[0]]), float(costs.mean())))
        if gen == cfg.generations - 1:
            break
        sigma = cfg.mutation_sigma * 0.5 ** (gen // cfg.sigma_halving_period) * span
        elites = pop[order[: cfg.elite_count]]
        children = []
        while len(children) < cfg.population - cfg.elite_count:
            p1 = pop[_tournament(rng, costs, cfg.tournament_size)]
            p2 = pop[_tournament(rng, costs, cfg.tournament_size)]
            if rng.random() < cfg.crossover_rate:
                w = rng.random(spec.n_genes)
                c1, c2 = w * p1 + (1 - w) * p2, (1 - w) * p1 + w * p2
            else:
                c1, c2 = p1.copy(), p2.copy()
            for c in (c1, c2):
                mask = rng.random(spec.n_genes) < cfg.mutation_rate
                c += mask * rng.normal(0.0, sigma)
                children.append(np.clip(c, lo, hi))
        children = np.array(children[: cfg.population - cfg.elite_count])
        child_costs = population_costs(children, spec, cost)
        evaluations += len(children)
        pop = np.vstack([elites, children])
        costs = np.concatenate([costs[order[: cfg.elite_count]], child_costs])
    best = int(np.argmin(costs))
    return OptimizationReport(
        best_genome=[float(x) for x in pop[best]],
        best_cost=float(costs[best]),
        history=[list(h) for h in history],
        evaluations=evaluations,
        seed=cfg.rng_seed,
        family=spec.family,
        config=asdict(cfg),
    )
