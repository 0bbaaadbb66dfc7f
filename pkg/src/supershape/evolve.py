"""Genetic algorithm engine for supershape genomes.

Two loop modes share the same operators (per-allele uniform mutation,
size-3 tournaments):

* steady_state — one offspring per step from a best-of-k parent
  tournament, replacing the loser of a worst-of-k tournament; used for
  target-match evolution.
* generational — the single fittest individual is promoted unchanged
  and the rest of the next generation is bred fresh; offspring below
  the active-voxel viability floor are discarded and regenerated; used
  for the hardware-in-the-loop workflow.

Every random draw for an individual comes from its own Philox stream
keyed by (run seed, individual id), so results are reproducible no
matter how evaluations are scheduled.  All state changes append events
to an event log from which a run can be replayed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .geometry import BasicGenome, ExtendedGenome, Genome, genome_from_array

MASK64 = (1 << 64) - 1


class NotEnoughEvaluated(RuntimeError):
    """Tournament cannot sample enough evaluated individuals."""


class SeedInfeasible(RuntimeError):
    """1000 consecutive candidates failed the viability check."""


class GenerationIncomplete(RuntimeError):
    """The current generation still has pending individuals."""


class UnknownIndividual(KeyError):
    """No individual with that id in this run."""


class AlreadyEvaluated(RuntimeError):
    """Fitness resubmission without the override flag."""


class InvalidFitness(ValueError):
    """Fitness value outside the accepted domain."""


def stream(seed: int, *key: int) -> np.random.Generator:
    """Philox stream for (run seed, individual id): portable and
    independent of evaluation scheduling."""
    ss = np.random.SeedSequence(entropy=int(seed) & MASK64,
                                spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GAConfig:
    population_size: int
    mutation_rate: float
    mutation_step: tuple[float, ...]
    gene_bounds: tuple[tuple[float, float], ...]
    seed_spread: tuple[float, ...]
    crossover_rate: float = 0.0
    tournament_size: int = 3
    elitism_count: int = 0
    mode: str = "steady_state"
    rng_seed: int = 0
    discard_min_active: float = 0.0

    def __post_init__(self):
        if self.mode not in ("steady_state", "generational"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.tournament_size > self.population_size:
            raise ValueError("tournament_size must not exceed population_size")
        if self.elitism_count >= self.population_size:
            raise ValueError("elitism_count must be below population_size")
        if len(self.mutation_step) != len(self.gene_bounds):
            raise ValueError("mutation_step and gene_bounds lengths differ")
        if len(self.seed_spread) != len(self.gene_bounds):
            raise ValueError("seed_spread and gene_bounds lengths differ")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be a probability")

    @property
    def n_genes(self) -> int:
        return len(self.gene_bounds)

    @property
    def genome_kind(self) -> str:
        return "basic" if self.n_genes == 8 else "extended"

    @classmethod
    def target_mode(cls, rng_seed: int = 0, population_size: int = 200) -> "GAConfig":
        return cls(population_size=population_size, mutation_rate=0.25,
                   mutation_step=(5.0,) * 8,
                   gene_bounds=((0.0, 50.0),) * 8,
                   seed_spread=(5.0,) * 8,
                   crossover_rate=0.0, tournament_size=3, elitism_count=0,
                   mode="steady_state", rng_seed=rng_seed,
                   discard_min_active=0.0)

    @classmethod
    def vawt_basic(cls, rng_seed: int = 0) -> "GAConfig":
        return cls(population_size=20, mutation_rate=0.25,
                   mutation_step=(5.0,) * 8,
                   gene_bounds=((0.0, 50.0),) * 8,
                   seed_spread=(5.0,) * 8,
                   crossover_rate=0.0, tournament_size=3, elitism_count=1,
                   mode="generational", rng_seed=rng_seed,
                   discard_min_active=0.01)

    @classmethod
    def vawt_extended(cls, rng_seed: int = 0) -> "GAConfig":
        # Deformation genes move in much smaller steps than the shape
        # octet; r0 stays strictly positive.
        bounds = ((0.0, 50.0),) * 8 + ((-10.0, 10.0),) * 7 + ((0.1, 100.0),)
        return cls(population_size=20, mutation_rate=0.25,
                   mutation_step=(5.0,) * 8 + (0.5,) * 8,
                   gene_bounds=bounds,
                   seed_spread=(10.0,) * 8 + (1.0,) * 8,
                   crossover_rate=0.0, tournament_size=3, elitism_count=1,
                   mode="generational", rng_seed=rng_seed,
                   discard_min_active=0.01)

    def to_dict(self) -> dict:
        return {
            "population_size": self.population_size,
            "mutation_rate": self.mutation_rate,
            "mutation_step": list(self.mutation_step),
            "gene_bounds": [list(b) for b in self.gene_bounds],
            "seed_spread": list(self.seed_spread),
            "crossover_rate": self.crossover_rate,
            "tournament_size": self.tournament_size,
            "elitism_count": self.elitism_count,
            "mode": self.mode,
            "rng_seed": self.rng_seed,
            "discard_min_active": self.discard_min_active,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GAConfig":
        return cls(population_size=int(d["population_size"]),
                   mutation_rate=float(d["mutation_rate"]),
                   mutation_step=tuple(float(s) for s in d["mutation_step"]),
                   gene_bounds=tuple((float(lo), float(hi))
                                     for lo, hi in d["gene_bounds"]),
                   seed_spread=tuple(float(s) for s in d["seed_spread"]),
                   crossover_rate=float(d["crossover_rate"]),
                   tournament_size=int(d["tournament_size"]),
                   elitism_count=int(d["elitism_count"]),
                   mode=str(d["mode"]),
                   rng_seed=int(d["rng_seed"]),
                   discard_min_active=float(d["discard_min_active"]))


@dataclass
class Individual:
    id: int
    genome: Genome
    generation: int
    parent_ids: list[int] = field(default_factory=list)
    fitness: float | None = None

    @property
    def state(self) -> str:
        return "pending" if self.fitness is None else "evaluated"

    def to_dict(self) -> dict:
        return {"id": self.id, "genome": self.genome.to_dict(),
                "generation": self.generation,
                "parent_ids": list(self.parent_ids),
                "fitness": self.fitness, "state": self.state}


@dataclass
class RunState:
    config: GAConfig
    population: list[Individual] = field(default_factory=list)
    individuals: dict[int, Individual] = field(default_factory=dict)
    generation: int = 0
    evaluations: int = 0
    next_id: int = 0
    best_id: int | None = None
    events: list[dict] = field(default_factory=list)

    @property
    def best(self) -> Individual | None:
        return None if self.best_id is None else self.individuals[self.best_id]

    def pending(self) -> list[Individual]:
        return [ind for ind in self.population if ind.fitness is None]

    def evaluated(self) -> list[Individual]:
        return [ind for ind in self.population if ind.fitness is not None]

    def mean_fitness(self) -> float:
        vals = [ind.fitness for ind in self.population if ind.fitness is not None]
        return float(np.mean(vals)) if vals else math.nan


# Viability and evaluator signatures: both take a genome.  A viability
# callback returns the candidate's active voxel fraction (or any score
# compared against discard_min_active); None disables discarding.
Evaluator = Callable[[Genome], float]
Viability = Callable[[Genome], float]


def new_run(config: GAConfig) -> RunState:
    run = RunState(config=config)
    run.events.append({"type": "run_created", "config": config.to_dict()})
    return run


def mutate(genome: Genome, cfg: GAConfig, rng: np.random.Generator) -> Genome:
    """Each allele mutates independently with probability mutation_rate
    by a uniform delta in +-step for its gene group, clamped to bounds."""
    values = genome.as_array()
    mask = rng.random(cfg.n_genes) < cfg.mutation_rate
    delta = rng.uniform(-1.0, 1.0, cfg.n_genes) * np.asarray(cfg.mutation_step)
    values = np.where(mask, values + delta, values)
    return _clamped_genome(values, cfg)


def crossover_uniform(a: Genome, b: Genome, rng: np.random.Generator) -> Genome:
    """Uniform crossover; kept behind crossover_rate (default 0)."""
    av, bv = a.as_array(), b.as_array()
    pick = rng.random(len(av)) < 0.5
    return genome_from_array(np.where(pick, av, bv))


def _clamped_genome(values: np.ndarray, cfg: GAConfig) -> Genome:
    bounds = np.asarray(cfg.gene_bounds)
    return genome_from_array(np.clip(values, bounds[:, 0], bounds[:, 1]))


def random_genome(cfg: GAConfig, rng: np.random.Generator) -> Genome:
    bounds = np.asarray(cfg.gene_bounds)
    return genome_from_array(rng.uniform(bounds[:, 0], bounds[:, 1]))


def tournament_select(population: list[Individual], k: int,
                      rng: np.random.Generator,
                      objective: str = "best") -> Individual:
    """Best (or worst) of k distinct uniformly sampled evaluated
    individuals; ties broken uniformly at random."""
    if objective not in ("best", "worst"):
        raise ValueError("objective must be 'best' or 'worst'")
    pool = [ind for ind in population if ind.fitness is not None]
    if len(pool) < k:
        raise NotEnoughEvaluated(f"need {k} evaluated, have {len(pool)}")
    picks = rng.choice(len(pool), size=k, replace=False)
    sampled = [pool[i] for i in picks]
    extreme = max if objective == "best" else min
    target = extreme(ind.fitness for ind in sampled)
    ties = [ind for ind in sampled if ind.fitness == target]
    return ties[0] if len(ties) == 1 else ties[int(rng.integers(len(ties)))]


def _commit_evaluation(run: RunState, ind: Individual, fitness: float,
                       extra: dict | None = None) -> None:
    ind.fitness = float(fitness)
    run.evaluations += 1
    event = {"type": "evaluation", "id": ind.id, "fitness": ind.fitness}
    if extra:
        event.update(extra)
    run.events.append(event)
    if run.best_id is None or ind.fitness > run.individuals[run.best_id].fitness:
        run.best_id = ind.id


def _birth(run: RunState, genome: Genome, origin: str,
           parents: Iterable[int] = ()) -> Individual:
    ind = Individual(id=run.next_id, genome=genome,
                     generation=run.generation,
                     parent_ids=list(parents))
    run.next_id += 1
    run.individuals[ind.id] = ind
    run.events.append({"type": "birth", "id": ind.id, "origin": origin,
                       "generation": ind.generation,
                       "parents": ind.parent_ids,
                       "genome": [float(v) for v in genome.as_array()]})
    return ind


def init_random_population(run: RunState) -> None:
    """Target-mode initializer: every genome uniform within bounds."""
    cfg = run.config
    for _ in range(cfg.population_size):
        rng = stream(cfg.rng_seed, run.next_id)
        ind = _birth(run, random_genome(cfg, rng), origin="init")
        run.population.append(ind)


def seed_population(run: RunState, seed_genome: Genome,
                    viability: Viability | None = None) -> None:
    """Hardware-mode initializer: individual 0 is the seed unmodified;
    the rest perturb every gene by a uniform value in +-seed_spread,
    regenerating any candidate below the active-voxel floor."""
    cfg = run.config
    seed_values = seed_genome.as_array()
    if len(seed_values) != cfg.n_genes:
        raise ValueError("seed genome length does not match config bounds")
    ind = _birth(run, seed_genome, origin="seed")
    run.population.append(ind)
    spread = np.asarray(cfg.seed_spread)
    for _ in range(cfg.population_size - 1):
        rng = stream(cfg.rng_seed, run.next_id)
        genome = None
        for _attempt in range(1000):
            candidate = _clamped_genome(
                seed_values + rng.uniform(-1.0, 1.0, cfg.n_genes) * spread, cfg)
            if viability is None:
                genome = candidate
                break
            active = viability(candidate)
            if active >= cfg.discard_min_active:
                genome = candidate
                break
            run.events.append({"type": "discard", "origin": "seed",
                               "generation": run.generation,
                               "active_fraction": float(active),
                               "genome": [float(v) for v in candidate.as_array()]})
        if genome is None:
            raise SeedInfeasible("1000 consecutive seed perturbations discarded")
        ind = _birth(run, genome, origin="seed")
        run.population.append(ind)


def eval_pending(run: RunState, evaluator: Evaluator,
                 precomputed: dict[int, float] | None = None) -> None:
    """Evaluate pending individuals in id order.  precomputed maps
    individual id to an already-computed fitness (e.g. from a worker
    pool); entries missing from it fall back to the evaluator."""
    for ind in sorted(run.pending(), key=lambda i: i.id):
        if precomputed is not None and ind.id in precomputed:
            fitness = precomputed[ind.id]
        else:
            fitness = evaluator(ind.genome)
        _commit_evaluation(run, ind, fitness)


def _breed(run: RunState, rng: np.random.Generator) -> tuple[Genome, list[int]]:
    cfg = run.config
    parent = tournament_select(run.population, cfg.tournament_size, rng, "best")
    parents = [parent.id]
    genome = parent.genome
    if cfg.crossover_rate > 0.0 and rng.random() < cfg.crossover_rate:
        mate = tournament_select(run.population, cfg.tournament_size, rng, "best")
        parents.append(mate.id)
        genome = crossover_uniform(genome, mate.genome, rng)
    return mutate(genome, cfg, rng), parents


def step_steady_state(run: RunState, evaluator: Evaluator) -> Individual:
    """One offspring bred, evaluated, and swapped in for the loser of a
    worst-of-k tournament.  Evaluator failure propagates with the run
    state untouched."""
    cfg = run.config
    child_id = run.next_id
    rng = stream(cfg.rng_seed, child_id)
    genome, parents = _breed(run, rng)
    fitness = evaluator(genome)  # may raise; nothing committed yet
    victim = tournament_select(run.population, cfg.tournament_size, rng, "worst")
    child = _birth(run, genome, origin="offspring", parents=parents)
    _commit_evaluation(run, child, fitness)
    slot = next(i for i, ind in enumerate(run.population) if ind.id == victim.id)
    run.population[slot] = child
    run.events.append({"type": "replacement", "victim": victim.id,
                       "child": child.id})
    return child


def step_generational(run: RunState, evaluator: Evaluator | None = None,
                      viability: Viability | None = None) -> list[Individual]:
    """Advance one generation: promote the elite unchanged (fitness
    retained), breed the rest, discard and regenerate offspring below
    the viability floor.  With an evaluator the new generation is
    scored immediately; without one it stays pending for manual
    fitness entry."""
    cfg = run.config
    if run.pending():
        raise GenerationIncomplete(
            f"{len(run.pending())} individuals still pending")

    elites = sorted(run.population,
                    key=lambda ind: (-ind.fitness, ind.id))[:cfg.elitism_count]
    next_population = list(elites)
    run.generation += 1
    for elite in elites:
        run.events.append({"type": "promotion", "id": elite.id,
                           "generation": run.generation})

    while len(next_population) < cfg.population_size:
        child_id = run.next_id
        rng = stream(cfg.rng_seed, child_id)
        genome = None
        parents: list[int] = []
        for _attempt in range(1000):
            candidate, parents = _breed(run, rng)
            if viability is None:
                genome = candidate
                break
            active = viability(candidate)
            if active >= cfg.discard_min_active:
                genome = candidate
                break
            run.events.append({"type": "discard", "origin": "offspring",
                               "generation": run.generation,
                               "active_fraction": float(active),
                               "genome": [float(v) for v in candidate.as_array()]})
        if genome is None:
            raise SeedInfeasible("1000 consecutive offspring discarded")
        next_population.append(_birth(run, genome, origin="offspring",
                                      parents=parents))

    run.population = next_population
    run.events.append({"type": "generation", "generation": run.generation,
                       "population": [ind.id for ind in next_population]})
    if evaluator is not None:
        eval_pending(run, evaluator)
    return next_population


def submit_manual_fitness(run: RunState, individual_id: int, value: float,
                          note: str | None = None, timestamp: str | None = None,
                          override: bool = False) -> Individual:
    """Record a human-measured fitness (rpm) for a pending individual."""
    if individual_id not in run.individuals:
        raise UnknownIndividual(individual_id)
    if not (isinstance(value, (int, float)) and math.isfinite(value)) or value < 0:
        raise InvalidFitness(f"fitness must be a finite value >= 0, got {value!r}")
    ind = run.individuals[individual_id]
    if ind.fitness is not None and not override:
        raise AlreadyEvaluated(f"individual {individual_id} already evaluated")
    extra = {"manual": True}
    if note is not None:
        extra["note"] = note
    if timestamp is not None:
        extra["ts"] = timestamp
    if ind.fitness is not None:
        extra["override"] = True
        ind.fitness = float(value)
        run.evaluations += 1
        event = {"type": "evaluation", "id": ind.id, "fitness": ind.fitness}
        event.update(extra)
        run.events.append(event)
        run.best_id = max((i for i in run.individuals.values()
                           if i.fitness is not None),
                          key=lambda i: (i.fitness, -i.id)).id
    else:
        _commit_evaluation(run, ind, value, extra=extra)
    return ind


def replay_events(events: list[dict]) -> RunState:
    """Rebuild a run from its event log; no RNG involved."""
    if not events or events[0].get("type") != "run_created":
        raise ValueError("event log must start with run_created")
    run = RunState(config=GAConfig.from_dict(events[0]["config"]))
    run.events.append(events[0])
    for event in events[1:]:
        kind = event.get("type")
        if kind == "birth":
            ind = Individual(id=int(event["id"]),
                             genome=genome_from_array(event["genome"]),
                             generation=int(event["generation"]),
                             parent_ids=[int(p) for p in event["parents"]])
            run.individuals[ind.id] = ind
            run.next_id = max(run.next_id, ind.id + 1)
            if event["origin"] in ("init", "seed"):
                run.population.append(ind)
        elif kind == "evaluation":
            ind = run.individuals[int(event["id"])]
            ind.fitness = float(event["fitness"])
            run.evaluations += 1
            if event.get("override"):
                run.best_id = max((i for i in run.individuals.values()
                                   if i.fitness is not None),
                                  key=lambda i: (i.fitness, -i.id)).id
            elif (run.best_id is None
                  or ind.fitness > run.individuals[run.best_id].fitness):
                run.best_id = ind.id
        elif kind == "replacement":
            victim = int(event["victim"])
            child = run.individuals[int(event["child"])]
            slot = next(i for i, ind in enumerate(run.population)
                        if ind.id == victim)
            run.population[slot] = child
        elif kind == "generation":
            run.generation = int(event["generation"])
            run.population = [run.individuals[int(i)]
                              for i in event["population"]]
        elif kind in ("promotion", "discard", "run_created"):
            pass
        else:
            raise ValueError(f"unknown event type {kind!r}")
        run.events.append(event)
    return run


def run_steady_state(config: GAConfig, evaluator: Evaluator, budget: int,
                     stop_fitness: float | None = None,
                     on_eval: Callable[[RunState], None] | None = None,
                     precomputed_init: dict[int, float] | None = None) -> RunState:
    """Full target-mode run: random init, then steady-state steps until
    the evaluation budget is spent or best fitness reaches
    stop_fitness.  on_eval fires after every committed evaluation."""
    run = new_run(config)
    init_random_population(run)
    for ind in sorted(run.pending(), key=lambda i: i.id):
        if run.evaluations >= budget:
            break
        if precomputed_init is not None and ind.id in precomputed_init:
            _commit_evaluation(run, ind, precomputed_init[ind.id])
        else:
            _commit_evaluation(run, ind, evaluator(ind.genome))
        if on_eval:
            on_eval(run)
    while run.evaluations < budget:
        if stop_fitness is not None and run.best is not None \
                and run.best.fitness >= stop_fitness:
            break
        if run.pending():
            break  # budget ran out during init; population incomplete
        step_steady_state(run, evaluator)
        if on_eval:
            on_eval(run)
    return run
