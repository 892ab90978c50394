"""Seeded ensemble sweeps with reproducible per-draw streams.

Every draw gets its own RNG seed derived by a stable hash of
(master_seed, cell id, draw index), so scheduling and parallelism cannot
change the sampled ensemble.  Draw failures (capacity, positivity drift,
non-finite numbers) are recorded as data with a reason code rather than
retried, since retries would bias the ensemble statistics.  Bootstrap
confidence intervals run on their own seeded stream, independent of the
physics RNG.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from hashlib import sha256
from typing import Optional

import numpy as np

from .analysis import (
    BoundCheckReport,
    Check,
    energy_report,
    first_order_sum_dense,
    max_eigenvalue,
    rademacher_average_energy,
    schedule,
    spectral_tail_bound,
)
from .densemat import random_hermitian, spectral_norm
from .ensembles import EnsembleSpec, derive_seed, instance_to_dense, sample
from .errors import DissipError, ValidationError
from .evolution import (
    EvolutionConfig,
    choi_matrix,
    choi_output_trace,
    evolve,
    heisenberg_evolve,
    maximally_mixed,
)
from .lindblad import (
    build_jump_set,
    build_lindbladian,
    commutation_table,
    condition2_max_residual,
    cross_piece_adjoint,
    cross_piece_norm_bound,
    sampled_superop_norm,
    single_piece_adjoint,
    single_piece_norm_bound,
    weighted_anticommute_sum,
)

CELL_FAILURE_FRACTION = 0.10
BOOTSTRAP_RESAMPLES = 10_000


@dataclass(frozen=True)
class CellSpec:
    """One grid cell: an ensemble plus either explicit (y, t) or a schedule."""

    cell_id: str
    model: str
    n: int
    k: int
    m: Optional[int] = None
    y: Optional[float] = None
    t: Optional[float] = None
    c_y: Optional[float] = None
    c_t: Optional[float] = None

    def ensemble(self, seed: int) -> EnsembleSpec:
        return EnsembleSpec(model=self.model, n=self.n, k=self.k, m=self.m, seed=seed)


@dataclass(frozen=True)
class ExperimentConfig:
    cells: tuple
    draws: int
    master_seed: int = 0
    method: str = "rk4"
    steps: int = 0
    run_bound_checks: bool = False
    results_csv: Optional[str] = None
    stats_json: Optional[str] = None
    manifest_json: Optional[str] = None

    def __post_init__(self):
        if self.draws < 1:
            raise ValidationError("draws must be >= 1")
        if len({c.cell_id for c in self.cells}) != len(self.cells):
            raise ValidationError("cell ids must be unique")

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "draws": self.draws,
            "evolution": {"method": self.method, "steps": self.steps},
            "run_bound_checks": self.run_bound_checks,
            "cells": [
                {
                    ("id" if k == "cell_id" else k): v
                    for k, v in asdict(c).items()
                    if v is not None
                }
                for c in self.cells
            ],
            "output": {
                k: v
                for k, v in {
                    "results_csv": self.results_csv,
                    "stats_json": self.stats_json,
                    "manifest_json": self.manifest_json,
                }.items()
                if v is not None
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def config_hash(self) -> str:
        return sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


_CELL_KEYS = {"id", "model", "n", "k", "m", "y", "t", "c_y", "c_t"}
_TOP_KEYS = {"master_seed", "draws", "evolution", "run_bound_checks", "cells", "output"}


def config_from_dict(doc: dict) -> ExperimentConfig:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    if "cells" not in doc or not doc["cells"]:
        raise ValidationError("config needs a nonempty 'cells' list")
    cells = []
    for i, cd in enumerate(doc["cells"]):
        bad = set(cd) - _CELL_KEYS
        if bad:
            raise ValidationError(f"unknown cell keys: {sorted(bad)}")
        cell = CellSpec(
            cell_id=cd.get("id", f"cell{i}"),
            model=cd["model"],
            n=int(cd["n"]),
            k=int(cd["k"]),
            m=int(cd["m"]) if "m" in cd else None,
            y=cd.get("y"),
            t=cd.get("t"),
            c_y=cd.get("c_y"),
            c_t=cd.get("c_t"),
        )
        cell.ensemble(0)  # validate ensemble parameters eagerly
        cells.append(cell)
    evo = doc.get("evolution", {})
    out = doc.get("output", {})
    return ExperimentConfig(
        cells=tuple(cells),
        draws=int(doc.get("draws", 1)),
        master_seed=int(doc.get("master_seed", 0)),
        method=evo.get("method", "rk4"),
        steps=int(evo.get("steps", 0)),
        run_bound_checks=bool(doc.get("run_bound_checks", False)),
        results_csv=out.get("results_csv"),
        stats_json=out.get("stats_json"),
        manifest_json=out.get("manifest_json"),
    )


def config_from_json(text: str) -> ExperimentConfig:
    return config_from_dict(json.loads(text))


@dataclass(frozen=True)
class RunResult:
    """One draw; numeric fields are NaN when status is not 'ok'."""

    cell_id: str
    draw: int
    seed: int
    n: int
    k: int
    m: int
    model: str
    y: float
    t: float
    energy: float
    t1: float
    residual: float
    lambda_max: float
    ratio: float
    wall_ms: float
    status: str


def _failed_result(cell, draw, seed, reason) -> RunResult:
    nan = math.nan
    return RunResult(
        cell_id=cell.cell_id, draw=draw, seed=seed, n=cell.n, k=cell.k,
        m=cell.m if cell.m is not None else 0, model=cell.model,
        y=nan, t=nan, energy=nan, t1=nan, residual=nan, lambda_max=nan,
        ratio=nan, wall_ms=nan, status=reason,
    )


def run_draw(config: ExperimentConfig, cell: CellSpec, draw: int) -> RunResult:
    seed = derive_seed(config.master_seed, cell.cell_id, draw)
    start = time.perf_counter()
    try:
        instance = sample(cell.ensemble(seed))
        if cell.y is None or cell.t is None:
            sched = schedule(instance, c_y=cell.c_y, c_t=cell.c_t)
        y = cell.y if cell.y is not None else sched.y
        t = cell.t if cell.t is not None else sched.t
        rep = build_lindbladian(instance, y)
        rho_t = evolve(
            rep,
            maximally_mixed(instance.qubits),
            EvolutionConfig(t_final=t, steps=config.steps, method=config.method),
        )
        report = energy_report(instance, rho_t, rep.h_dense, y, t)
        values = [report.achieved, report.t1_prediction, report.lambda_max, report.ratio]
        if not all(math.isfinite(v) for v in values):
            return _failed_result(cell, draw, seed, "nonfinite")
        wall_ms = 1000.0 * (time.perf_counter() - start)
        return RunResult(
            cell_id=cell.cell_id, draw=draw, seed=seed, n=instance.n, k=instance.k,
            m=instance.m, model=instance.model, y=y, t=t,
            energy=report.achieved, t1=report.t1_prediction, residual=report.residual,
            lambda_max=report.lambda_max, ratio=report.ratio,
            wall_ms=wall_ms, status="ok",
        )
    except DissipError as err:
        return _failed_result(cell, draw, seed, f"{type(err).__name__}: {err}")


def run_cell(config: ExperimentConfig, cell: CellSpec, workers: int = 1) -> list[RunResult]:
    """All draws of one cell, collected in draw order regardless of scheduling."""
    if workers <= 1:
        return [run_draw(config, cell, d) for d in range(config.draws)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_draw, config, cell, d) for d in range(config.draws)]
        return [f.result() for f in futures]


def run_experiment(config: ExperimentConfig, workers: int = 1):
    """(ordered results, per-cell stats) for the whole grid."""
    results = []
    stats = []
    for cell in config.cells:
        cell_results = run_cell(config, cell, workers=workers)
        results.extend(cell_results)
        stats.append(
            aggregate(
                cell_results,
                bootstrap_seed=derive_seed(config.master_seed, "bootstrap", cell.cell_id),
            )
        )
    return results, stats


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleStats:
    """Per-cell aggregate; mean/m2/count support associative merging."""

    cell_id: str
    draws: int
    draws_ok: int
    mean_energy: float
    m2: float
    stderr: float
    ci_low: float
    ci_high: float
    mean_ratio: float
    mean_lambda_max: float
    cell_failed: bool

    @property
    def variance(self) -> float:
        return self.m2 / (self.draws_ok - 1) if self.draws_ok > 1 else 0.0

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["variance"] = self.variance
        return doc


def aggregate(results, bootstrap_seed: int = 0, resamples: int = BOOTSTRAP_RESAMPLES) -> EnsembleStats:
    if not results:
        raise ValidationError("cannot aggregate an empty result list")
    cell_ids = {r.cell_id for r in results}
    if len(cell_ids) != 1:
        raise ValidationError(f"aggregate needs a homogeneous cell, got {sorted(cell_ids)}")
    ok = [r for r in results if r.status == "ok"]
    draws = len(results)
    if not ok:
        return EnsembleStats(
            cell_id=results[0].cell_id, draws=draws, draws_ok=0,
            mean_energy=math.nan, m2=math.nan, stderr=math.nan,
            ci_low=math.nan, ci_high=math.nan, mean_ratio=math.nan,
            mean_lambda_max=math.nan, cell_failed=True,
        )
    energies = np.array([r.energy for r in ok])
    mean = float(energies.mean())
    m2 = float(((energies - mean) ** 2).sum())
    stderr = math.sqrt(m2 / (len(ok) - 1) / len(ok)) if len(ok) > 1 else 0.0
    if len(ok) > 1 and resamples > 0:
        rng = np.random.default_rng(bootstrap_seed)
        idx = rng.integers(0, len(ok), size=(resamples, len(ok)))
        means = energies[idx].mean(axis=1)
        ci_low, ci_high = (float(q) for q in np.percentile(means, [2.5, 97.5]))
    else:
        ci_low = ci_high = mean
    return EnsembleStats(
        cell_id=ok[0].cell_id,
        draws=draws,
        draws_ok=len(ok),
        mean_energy=mean,
        m2=m2,
        stderr=stderr,
        ci_low=ci_low,
        ci_high=ci_high,
        mean_ratio=float(np.mean([r.ratio for r in ok])),
        mean_lambda_max=float(np.mean([r.lambda_max for r in ok])),
        cell_failed=(draws - len(ok)) > CELL_FAILURE_FRACTION * draws,
    )


def merge_moments(count_a, mean_a, m2_a, count_b, mean_b, m2_b):
    """Chan et al. parallel merge of (count, mean, sum of squared deviations)."""
    count = count_a + count_b
    if count == 0:
        return 0, 0.0, 0.0
    delta = mean_b - mean_a
    mean = mean_a + delta * count_b / count
    m2 = m2_a + m2_b + delta * delta * count_a * count_b / count
    return count, mean, m2


# ---------------------------------------------------------------------------
# verification suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyConfig:
    """Sizes and overrides for the bundled identity-and-bound check suite."""

    seed: int = 42
    y: Optional[float] = None        # override; default is the per-instance schedule
    t: Optional[float] = None
    instances_per_model: int = 3
    condition_instances: int = 25
    norm_probes: int = 30
    contraction_probes: int = 20
    tail_draws: int = 30
    tail_delta: float = 0.01


_VERIFY_MODELS = (
    ("gaussian_pauli", 3, 2, None),
    ("syk", 6, 4, None),
    ("sparse_pauli", 3, 2, 4),
    ("sparse_fermion", 6, 2, 4),
)


def _verify_instances(cfg):
    for model, n, k, m in _VERIFY_MODELS:
        for i in range(cfg.instances_per_model):
            seed = derive_seed(cfg.seed, "verify", model, i)
            yield sample(EnsembleSpec(model=model, n=n, k=k, m=m, seed=seed))


def _params_for(instance, cfg):
    sched = schedule(instance)
    y = cfg.y if cfg.y is not None else sched.y
    t = cfg.t if cfg.t is not None else sched.t
    return y, t


def verify_suite(cfg: VerifyConfig = VerifyConfig()) -> BoundCheckReport:
    """Run every named exact identity and bound check; all must pass."""
    checks = []
    rng = np.random.default_rng(derive_seed(cfg.seed, "verify", "probes"))

    # Condition 1: unit squares of canonical terms (worst dense deviation)
    worst_sq = 0.0
    # Condition 2: commutation flag consistency in dense form
    worst_comm = 0.0
    # T1 identity (summed over terms and jumps)
    worst_t1 = 0.0
    # Appendix bounds
    worst_single = -math.inf
    worst_cross = -math.inf
    worst_weighted = -math.inf
    guard_violations = 0

    for instance in _verify_instances(cfg):
        y, t = _params_for(instance, cfg)
        sched = schedule(instance)
        y_eff = cfg.y if cfg.y is not None else sched.y
        t_eff = cfg.t if cfg.t is not None else sched.t
        time_ok = instance.a_loc * instance.k * t_eff < 1.0
        coupling_ok = y_eff**2 * instance.h_loc**2 * instance.a_loc * instance.k < 0.125
        guard_violations += int(not (time_ok and coupling_ok))
        rep = build_lindbladian(instance, y)
        eye = np.eye(rep.dim)
        for u in rep.unit_denses:
            worst_sq = max(worst_sq, float(np.abs(u @ u - eye).max()))
        worst_comm = max(worst_comm, condition2_max_residual(rep))
        closed = -8.0 * y * instance.h_glo**2 * instance.a_ac * instance.k
        worst_t1 = max(worst_t1, abs(first_order_sum_dense(rep) - closed))
        for g in range(len(instance.terms)):
            observed = sampled_superop_norm(
                lambda o, g=g: single_piece_adjoint(rep, g, o), rep.dim, cfg.norm_probes, rng
            )
            worst_single = max(worst_single, observed - single_piece_norm_bound(rep, g))
            worst_weighted = max(
                worst_weighted,
                weighted_anticommute_sum(rep, g) - instance.a_loc * instance.k * instance.h_loc**2,
            )
        for g1 in range(len(instance.terms)):
            for g2 in range(g1 + 1, len(instance.terms)):
                observed = sampled_superop_norm(
                    lambda o: cross_piece_adjoint(rep, g1, g2, o), rep.dim, cfg.norm_probes, rng
                )
                worst_cross = max(worst_cross, observed - cross_piece_norm_bound(rep, g1, g2))

    checks.append(Check.one_sided("condition1_unit_squares", worst_sq, 0.0, 1e-12))
    checks.append(Check.one_sided("condition2_commutation_flags", worst_comm, 0.0, 1e-12))

    # Condition 3: exact jump counting over many cheap instances (no dense work)
    rowsum_violations = 0
    count_violations = 0
    for model, n, k, m in _VERIFY_MODELS:
        for i in range(cfg.condition_instances):
            seed = derive_seed(cfg.seed, "cond3", model, i)
            inst = sample(EnsembleSpec(model=model, n=n, k=k, m=m, seed=seed))
            jumps = build_jump_set(inst)
            table = commutation_table(jumps, inst.terms)
            rowsum_violations += int((table.sum(axis=0) != inst.a_ac * inst.k).any())
            count_violations += int(len(jumps) != inst.a_loc * inst.n)
    checks.append(Check.one_sided("condition3_anticommuting_rowsums", rowsum_violations, 0.0, 0.0))
    checks.append(Check.one_sided("condition3_jump_counts", count_violations, 0.0, 0.0))

    checks.append(Check.one_sided("t1_summed_identity", worst_t1, 0.0, 1e-9))

    # zeroth order under exact enumeration
    inst0 = sample(EnsembleSpec("sparse_pauli", 3, 2, 6, seed=derive_seed(cfg.seed, "zeroth")))
    mean0, _ = rademacher_average_energy(inst0, y=-0.1, t=0.0)
    checks.append(Check.one_sided("zeroth_order_enumeration", abs(mean0), 0.0, 1e-12))

    checks.append(Check.one_sided("appendix_c_single_piece_norms", worst_single, 0.0, 1e-9))
    checks.append(Check.one_sided("appendix_c_cross_piece_norms", worst_cross, 0.0, 1e-9))
    checks.append(Check.one_sided("appendix_c_weighted_anticommute_sum", worst_weighted, 0.0, 1e-12))

    # spectral tail
    tail_bound = spectral_tail_bound("sparse_pauli", 8, cfg.tail_delta)
    tail_violations = 0
    for i in range(cfg.tail_draws):
        seed = derive_seed(cfg.seed, "tail", i)
        inst = sample(EnsembleSpec("sparse_pauli", 8, 2, 24, seed=seed))
        if max_eigenvalue(instance_to_dense(inst)) > tail_bound:
            tail_violations += 1
    checks.append(Check.one_sided("matrix_hoeffding_tail", tail_violations, 0.0, 0.0))

    # contraction and channel validity on one spin and one fermion instance
    worst_contract = -math.inf
    worst_choi_eig = 0.0
    worst_choi_trace = 0.0
    for model, n, k, m in (("sparse_pauli", 2, 2, 3), ("sparse_fermion", 4, 2, 3)):
        inst = sample(EnsembleSpec(model, n, k, m, seed=derive_seed(cfg.seed, "channel", model)))
        y, t = _params_for(inst, cfg)
        rep = build_lindbladian(inst, y)
        cfg_evo = EvolutionConfig(t_final=t, method="expm")
        for _ in range(cfg.contraction_probes):
            probe = random_hermitian(rep.dim, rng)
            before = spectral_norm(probe, hermitian=True)
            after = spectral_norm(heisenberg_evolve(rep, probe, cfg_evo))
            worst_contract = max(worst_contract, after - before)
        for t_choi in (0.1, 0.5):
            choi = choi_matrix(rep, t_choi)
            min_eig = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2).min())
            worst_choi_eig = max(worst_choi_eig, -min_eig)
            ptrace = choi_output_trace(choi, rep.dim)
            worst_choi_trace = max(worst_choi_trace, float(np.abs(ptrace - np.eye(rep.dim)).max()))
    checks.append(Check.one_sided("heisenberg_contraction", worst_contract, 0.0, 1e-8))
    checks.append(Check.one_sided("choi_positive_semidefinite", worst_choi_eig, 0.0, 1e-8))
    checks.append(Check.one_sided("choi_trace_preservation", worst_choi_trace, 0.0, 1e-9))

    checks.append(Check.one_sided("schedule_guards", guard_violations, 0.0, 0.0))

    return BoundCheckReport(checks=tuple(checks))
