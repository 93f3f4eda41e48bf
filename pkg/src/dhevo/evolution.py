"""The co-evolution loop: instance-paired heuristic evolution plus the
averaged-fitness baseline used as its ablation arm.

The paired mode keeps one champion heuristic per retained instance and
only ever replaces it with a strictly fitter one (elitism). Instance
retention is rank-based in generation one and softmax-sampled afterwards,
with the sampling temperature reducing to exact rank selection as it
approaches zero. The baseline mode scores every candidate by its mean
fitness over all instances and performs no instance selection; episode
budgets per generation are identical across the two modes so their runs
differ only in the selection and fitness pathways.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .agents import Candidate, EpisodeLimits, run_episode
from .agents.episode import AgentTranscript
from .bnb import solve_bnb
from .diving import dive, program_scorer
from .dsl import random_program
from .errors import ConfigError, EpisodeFailed, TooFew
from .metrics import primal_gap, summarize
from .model import Instance, MipSolution
from .rng import derive_seed, stream

FITNESS_MODES = ("per_instance", "averaged")


@dataclass
class EvolveConfig:
    m: int = 4                     # population size
    n: int = 6                     # number of instances
    k: int = 3                     # retained pairs / final portfolio size
    t_iters: int = 3               # total iterations (generations)
    temperature: float = 1.0       # softmax temperature for selection
    gap_cap: float = 10.0          # fitness floor is -gap_cap
    seed: int = 0
    provider: str = "mock"         # mock | http
    d_max: int = 0                 # 0 = per-instance default
    fitness_mode: str = "per_instance"
    offspring_per_pair: int = 4    # fresh candidates per pair per iteration
    max_rounds: int = 3
    max_retries: int = 3
    call_budget: int = 10
    zref_max_nodes: int = 100_000
    zref_max_seconds: float = 60.0

    def validate(self) -> None:
        if self.m < 1:
            raise ConfigError("population size m must be >= 1")
        if not (1 <= self.k <= self.n):
            raise ConfigError("need 1 <= k <= n")
        if self.t_iters < 1:
            raise ConfigError("t_iters must be >= 1")
        if self.temperature <= 0:
            raise ConfigError("temperature must be > 0")
        if self.gap_cap <= 0:
            raise ConfigError("gap_cap must be > 0")
        if self.fitness_mode not in FITNESS_MODES:
            raise ConfigError(f"fitness_mode must be one of {FITNESS_MODES}")
        if self.offspring_per_pair < 1:
            raise ConfigError("offspring_per_pair must be >= 1")

    def episode_limits(self) -> EpisodeLimits:
        return EpisodeLimits(max_rounds=self.max_rounds,
                             max_retries=self.max_retries,
                             call_budget=self.call_budget)


@dataclass
class DataCodePair:
    instance_id: str
    candidate: Candidate
    fitness: float
    generation: int                # generation the candidate was created in


@dataclass
class Archive:
    """Append-only record of one evolution run, JSON-serializable."""

    config: dict
    mode: str
    instances: list = field(default_factory=list)
    initial_population: list = field(default_factory=list)
    generations: list = field(default_factory=list)
    final_portfolio: list = field(default_factory=list)
    episodes: dict = field(default_factory=dict)     # episode_id -> transcript
    events: list = field(default_factory=list)       # JSONL-ready event dicts
    complete: bool = False
    schema_version: int = 1

    def as_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": "archive",
            "complete": self.complete,
            "mode": self.mode,
            "config": self.config,
            "instances": self.instances,
            "initial_population": self.initial_population,
            "generations": self.generations,
            "final_portfolio": self.final_portfolio,
            "episodes": self.episodes,
        }


def evaluate_fitness(candidate: Candidate, inst: Instance, z_ref: float,
                     cfg: EvolveConfig) -> float:
    """-min(primal gap of the best dive solution, gap_cap); the full
    penalty when the dive finds nothing."""
    d_max = cfg.d_max if cfg.d_max > 0 else None
    result = dive(inst, program_scorer(candidate.program), d_max=d_max)
    if result.best_objective is None:
        return -cfg.gap_cap
    return -min(primal_gap(result.best_objective, z_ref), cfg.gap_cap)


def select_topk_pairs(pairs: list, k: int, temperature: float,
                      rng: np.random.Generator,
                      strict_rank: bool = False) -> list:
    """k distinct pairs, softmax-weighted by fitness without replacement.

    strict_rank switches to exact rank top-k (used for generation one).
    As temperature approaches zero the sampled set converges to the rank
    selection. Raises TooFew when fewer than k pairs are offered.
    """
    if len(pairs) < k:
        raise TooFew(f"need at least {k} pairs, got {len(pairs)}")
    order = sorted(range(len(pairs)),
                   key=lambda i: (-pairs[i].fitness, i))
    if strict_rank or k == len(pairs):
        chosen = order[:k] if strict_rank else sorted(range(len(pairs)))
        return [pairs[i] for i in chosen]
    fitness = np.array([p.fitness for p in pairs], dtype=float)
    remaining = list(range(len(pairs)))
    picked: list[int] = []
    for _ in range(k):
        weights = np.exp((fitness[remaining] - fitness[remaining].max())
                         / temperature)
        total = weights.sum()
        if total <= 0 or not np.isfinite(total):
            probs = np.full(len(remaining), 1.0 / len(remaining))
        else:
            probs = weights / total
        idx = int(rng.choice(len(remaining), p=probs))
        picked.append(remaining.pop(idx))
    picked.sort()
    return [pairs[i] for i in picked]


def _softmax_pick(rng: np.random.Generator, fitnesses: list[float],
                  temperature: float, exclude: Optional[int] = None) -> int:
    """Fitness-proportional parent index via softmax(fitness / T)."""
    idxs = [i for i in range(len(fitnesses)) if i != exclude]
    f = np.array([fitnesses[i] for i in idxs], dtype=float)
    weights = np.exp((f - f.max()) / temperature)
    probs = weights / weights.sum()
    return idxs[int(rng.choice(len(idxs), p=probs))]


class _Run:
    """Shared machinery for both evolution modes."""

    def __init__(self, cfg: EvolveConfig, instances: list[Instance], provider):
        cfg.validate()
        if len(instances) != cfg.n:
            raise ConfigError(
                f"config expects n={cfg.n} instances, got {len(instances)}")
        self.cfg = cfg
        self.instances = instances
        self.provider = provider
        self.limits = cfg.episode_limits()
        self.archive: Optional[Archive] = None
        self.z_ref: list[float] = []
        self.z_ref_proven: list[bool] = []
        self.episode_counter = 0

    def prepare(self, mode: str, instance_hashes: list[str]) -> None:
        self.archive = Archive(config=asdict(self.cfg), mode=mode)
        for inst, ih in zip(self.instances, instance_hashes):
            ref = solve_bnb(inst, max_nodes=self.cfg.zref_max_nodes,
                            max_seconds=self.cfg.zref_max_seconds)
            if ref.objective is None:
                raise ConfigError(
                    f"no reference solution for {inst.name}: {ref.status}")
            self.z_ref.append(ref.objective)
            self.z_ref_proven.append(ref.status == MipSolution.OPTIMAL)
            self.archive.instances.append({
                "id": inst.name,
                "hash": ih,
                "z_ref": ref.objective,
                "z_ref_proven": ref.status == MipSolution.OPTIMAL,
            })
            self.event("z_ref", instance=inst.name, z_ref=ref.objective,
                       proven=ref.status == MipSolution.OPTIMAL)

    def event(self, kind: str, **payload) -> None:
        self.archive.events.append({"event": kind, **payload})

    def episode(self, op: str, parents: list[Candidate], generation: int,
                slot: str) -> Candidate:
        """One generation episode with the random-program fallback."""
        episode_id = f"g{generation}-{slot}"
        episode_seed = derive_seed(self.cfg.seed, "episode", generation, slot)
        self.episode_counter += 1
        try:
            cand = run_episode(op, parents, self.provider, limits=self.limits,
                               episode_id=episode_id, episode_seed=episode_seed)
        except EpisodeFailed as exc:
            # Keep the population size fixed: substitute a random program.
            program = random_program(stream(episode_seed, "fallback"), max_depth=4)
            transcript = AgentTranscript(episode_id=episode_id, op=op,
                                         verdict="Discarded")
            cand = Candidate(program=program,
                             description="random substitute after failed episode",
                             transcript=transcript,
                             origin={"init": "Init", "mutation": "Mutation",
                                     "crossover": "Crossover"}[op])
            self.event("episode_fallback", episode=episode_id, reason=str(exc))
        self.archive.episodes[episode_id] = cand.transcript.as_dict()
        self.event("episode", episode=episode_id, op=op,
                   verdict=cand.transcript.verdict,
                   calls=cand.transcript.calls, program=cand.program_text())
        return cand

    def offspring_op(self, rng: np.random.Generator) -> str:
        return "crossover" if rng.random() < 0.5 else "mutation"

    def gen1_per_instance(self) -> int:
        """Generation-one candidates per instance.

        One iteration's episode budget (k * offspring_per_pair) is spread
        over the n instances so the whole run stays within
        m + t_iters * k * offspring_per_pair episodes; every instance
        still gets at least one episode.
        """
        cfg = self.cfg
        return max(1, (cfg.k * cfg.offspring_per_pair) // cfg.n)

    def fitness_on(self, cand: Candidate, i: int) -> float:
        f = evaluate_fitness(cand, self.instances[i], self.z_ref[i], self.cfg)
        self.event("evaluation", instance=self.instances[i].name,
                   episode=cand.transcript.episode_id, fitness=f)
        return f


def run_dhevo(cfg: EvolveConfig, instances: list[Instance], provider,
              instance_hashes: Optional[list[str]] = None,
              on_archive: Optional[Callable] = None) -> Archive:
    """Instance-paired evolution: per-instance fitness, champion pairs,
    temperature-controlled retention, averaged final selection.

    on_archive, when given, receives the Archive as soon as it exists so a
    caller can flush partial state if the run is interrupted.
    """
    run = _Run(cfg, instances, provider)
    run.prepare("dhevo", instance_hashes or [inst.name for inst in instances])
    archive = run.archive
    if on_archive is not None:
        on_archive(archive)

    # Initial population: m init episodes, each scored on one instance
    # (round-robin) to seed parent selection.
    population: list[Candidate] = []
    pop_fitness: list[float] = []
    for j in range(cfg.m):
        cand = run.episode("init", [], generation=1, slot=f"init{j}")
        population.append(cand)
        pop_fitness.append(run.fitness_on(cand, j % cfg.n))
    archive.initial_population = [
        {"candidate": c.as_dict(), "fitness": f}
        for c, f in zip(population, pop_fitness)
    ]

    # Generation 1: per-instance offspring conditioned on the population;
    # the best performer on each instance forms that instance's pair.
    pairs: list[DataCodePair] = []
    width = run.gen1_per_instance()
    for i, inst in enumerate(instances):
        best: Optional[tuple[Candidate, float]] = None
        for s in range(width):
            rng = stream(cfg.seed, "gen", 1, "inst", i, "offspring", s)
            op = run.offspring_op(rng)
            if op == "crossover" and cfg.m >= 2:
                a = _softmax_pick(rng, pop_fitness, cfg.temperature)
                b = _softmax_pick(rng, pop_fitness, cfg.temperature, exclude=a)
                parents = [population[a], population[b]]
            else:
                op = "mutation"
                parents = [population[_softmax_pick(rng, pop_fitness,
                                                    cfg.temperature)]]
            cand = run.episode(op, parents, generation=1, slot=f"i{i}s{s}")
            fit = run.fitness_on(cand, i)
            if best is None or fit > best[1]:
                best = (cand, fit)
        pairs.append(DataCodePair(instance_id=inst.name, candidate=best[0],
                                  fitness=best[1], generation=1))

    sel_rng = stream(cfg.seed, "select", 1)
    retained = select_topk_pairs(pairs, cfg.k, cfg.temperature, sel_rng,
                                 strict_rank=True)
    _record_generation(archive, 1, pairs, retained)

    # Iterations 2..T: evolve each retained pair, elitist champion update.
    index_of = {inst.name: i for i, inst in enumerate(instances)}
    for t in range(2, cfg.t_iters + 1):
        new_pairs: list[DataCodePair] = []
        champ_fitness = [p.fitness for p in retained]
        for slot_j, pair in enumerate(retained):
            i = index_of[pair.instance_id]
            best_cand, best_fit, best_gen = (pair.candidate, pair.fitness,
                                             pair.generation)
            for s in range(cfg.offspring_per_pair):
                rng = stream(cfg.seed, "gen", t, "pair", slot_j, "offspring", s)
                op = run.offspring_op(rng)
                if op == "crossover" and len(retained) >= 2:
                    partner = _softmax_pick(rng, champ_fitness,
                                            cfg.temperature, exclude=slot_j)
                    parents = [pair.candidate, retained[partner].candidate]
                else:
                    op = "mutation"
                    parents = [pair.candidate]
                cand = run.episode(op, parents, generation=t,
                                   slot=f"p{slot_j}s{s}")
                fit = run.fitness_on(cand, i)
                if fit > best_fit:    # elitism: strictly fitter only
                    best_cand, best_fit, best_gen = cand, fit, t
            new_pairs.append(DataCodePair(instance_id=pair.instance_id,
                                          candidate=best_cand,
                                          fitness=best_fit,
                                          generation=best_gen))
        sel_rng = stream(cfg.seed, "select", t)
        retained = select_topk_pairs(new_pairs, min(cfg.k, len(new_pairs)),
                                     cfg.temperature, sel_rng)
        _record_generation(archive, t, new_pairs, retained)

    archive.final_portfolio = final_select(run, retained)
    archive.complete = True
    return archive


def final_select(run: _Run, retained: list[DataCodePair]) -> list:
    """Score every retained champion on all retained instances and rank by
    mean fitness (ties to the earlier generation)."""
    cfg = run.cfg
    index_of = {inst.name: i for i, inst in enumerate(run.instances)}
    rows = []
    for pair in retained:
        per_instance = {}
        for other in retained:
            i = index_of[other.instance_id]
            per_instance[other.instance_id] = run.fitness_on(pair.candidate, i)
        stats = summarize(list(per_instance.values()))
        rows.append({
            "candidate": pair.candidate.as_dict(),
            "home_instance": pair.instance_id,
            "generation": pair.generation,
            "f_avg": stats["mean"],
            "variance": stats["variance"],
            "per_instance_fitness": per_instance,
        })
    rows.sort(key=lambda r: (-r["f_avg"], r["generation"]))
    return rows


def run_baseline_ec(cfg: EvolveConfig, instances: list[Instance], provider,
                    instance_hashes: Optional[list[str]] = None,
                    on_archive: Optional[Callable] = None) -> Archive:
    """Ablation arm: average fitness over all instances, no instance
    selection, same episode budget per generation as the paired mode."""
    run = _Run(cfg, instances, provider)
    run.prepare("baseline_ec", instance_hashes or [inst.name for inst in instances])
    archive = run.archive
    if on_archive is not None:
        on_archive(archive)

    def avg_fitness(cand: Candidate) -> float:
        return float(np.mean([run.fitness_on(cand, i)
                              for i in range(cfg.n)]))

    population: list[tuple[Candidate, float, int]] = []
    for j in range(cfg.m):
        cand = run.episode("init", [], generation=1, slot=f"init{j}")
        population.append((cand, avg_fitness(cand), 1))
    archive.initial_population = [
        {"candidate": c.as_dict(), "fitness": f}
        for c, f, _ in population
    ]

    def breed(count: int, generation: int) -> list[tuple[Candidate, float, int]]:
        out = []
        fitnesses = [f for _, f, _ in population]
        for s in range(count):
            rng = stream(cfg.seed, "gen", generation, "offspring", s)
            op = run.offspring_op(rng)
            if op == "crossover" and len(population) >= 2:
                a = _softmax_pick(rng, fitnesses, cfg.temperature)
                b = _softmax_pick(rng, fitnesses, cfg.temperature, exclude=a)
                parents = [population[a][0], population[b][0]]
            else:
                op = "mutation"
                parents = [population[_softmax_pick(rng, fitnesses,
                                                    cfg.temperature)][0]]
            cand = run.episode(op, parents, generation=generation, slot=f"o{s}")
            out.append((cand, avg_fitness(cand), generation))
        return out

    def survivors(pool: list) -> list:
        # Elitist (mu + lambda): keep the best m, stable on ties.
        ranked = sorted(range(len(pool)), key=lambda i: (-pool[i][1], i))
        return [pool[i] for i in sorted(ranked[:cfg.m])]

    # Same per-generation episode counts as the paired mode.
    population = survivors(population + breed(cfg.n * run.gen1_per_instance(), 1))
    _record_population(archive, 1, population)
    for t in range(2, cfg.t_iters + 1):
        population = survivors(population + breed(cfg.k * cfg.offspring_per_pair, t))
        _record_population(archive, t, population)

    rows = []
    for cand, fit, gen in population:
        per_instance = {instances[i].name: run.fitness_on(cand, i)
                        for i in range(cfg.n)}
        stats = summarize(list(per_instance.values()))
        rows.append({
            "candidate": cand.as_dict(),
            "generation": gen,
            "f_avg": stats["mean"],
            "variance": stats["variance"],
            "per_instance_fitness": per_instance,
        })
    rows.sort(key=lambda r: (-r["f_avg"], r["generation"]))
    archive.final_portfolio = rows[:cfg.k]
    archive.complete = True
    return archive


def _record_generation(archive: Archive, index: int, pairs: list,
                       retained: list) -> None:
    archive.generations.append({
        "index": index,
        "pairs": [
            {"instance": p.instance_id, "candidate": p.candidate.as_dict(),
             "fitness": p.fitness, "generation": p.generation}
            for p in pairs
        ],
        "selected": [p.instance_id for p in retained],
        "best_fitness": max(p.fitness for p in pairs),
    })


def _record_population(archive: Archive, index: int, population: list) -> None:
    archive.generations.append({
        "index": index,
        "population": [
            {"candidate": c.as_dict(), "fitness": f, "generation": g}
            for c, f, g in population
        ],
        "selected": [],
        "best_fitness": max(f for _, f, _ in population),
    })
