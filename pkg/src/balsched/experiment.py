"""Seeded sweeps of BAL against SRPT, FCFS and RR on Poisson / bounded-Pareto workloads.

Config files are INI with one ``[experiment]`` section::

    [experiment]
    lambda_inv = 20:40:1        # start:stop:step (inclusive) or a comma list
    horizon = 65536
    pairs = 1, 2, 3, 4, 5       # indices into PARETO_PAIRS, or L:H entries
    shape = 1.1
    seeds = 10
    master_seed = 20240601
    exponents = 2/6, 3/6, 4/6, 5/6, 6/6
    policies = srpt, fcfs, rr, bal_static, bal_dynamic

Run ``r`` of cell ``(h_index, lambda index)`` draws from
``numpy.random.SeedSequence([master_seed, h_index, lambda_index, r])``.
"""
from __future__ import annotations

import configparser
import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analysis import RunResult, partition_idle_free, ratio_table
from .core import flow_stats
from .engine import simulate
from .policies import Threshold, bal, dynamic_bal, fcfs, rr, srpt
from .workload import DEFAULT_SHAPE, PARETO_PAIRS, WorkloadConfig, gen_poisson_instance

BASELINES = ("srpt", "fcfs", "rr")
ALL_POLICIES = ("srpt", "fcfs", "rr", "bal_static", "bal_dynamic")
WORKERS_ENV = "BALSCHED_WORKERS"
DEFAULT_MASTER_SEED = 20240601


class ConfigError(ValueError):
    pass


def _grid(text: str) -> list[float]:
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigError(f"bad range {text!r}, expected start:stop:step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]


def _pairs(text: str) -> list[tuple[int, float, float]]:
    """(h_index, L, H) triples; bare integers index PARETO_PAIRS from 1."""
    out = []
    for k, item in enumerate(p.strip() for p in text.split(",") if p.strip()):
        if ":" in item:
            low, high = (float(v) for v in item.split(":"))
            out.append((k + 1, low, high))
        else:
            idx = int(item)
            if not 1 <= idx <= len(PARETO_PAIRS):
                raise ConfigError(f"pair index {idx} out of range")
            out.append((idx, *PARETO_PAIRS[idx - 1]))
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    lambda_inv_grid: tuple = tuple(float(v) for v in range(20, 41))
    horizon: int = 2**16
    pairs: tuple = tuple((k + 1, L, H) for k, (L, H) in enumerate(PARETO_PAIRS))
    shape: float = DEFAULT_SHAPE
    seeds: int = 10
    master_seed: int = DEFAULT_MASTER_SEED
    exponents: tuple = tuple(Fraction(k, 6) for k in range(2, 7))
    policies: tuple = ALL_POLICIES

    def __post_init__(self):
        if not self.lambda_inv_grid or not self.pairs or not self.exponents:
            raise ConfigError("grids must be nonempty")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")
        unknown = set(self.policies) - set(ALL_POLICIES)
        if unknown:
            raise ConfigError(f"unknown policies {sorted(unknown)}")

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.read_string(text)
        if not parser.has_section("experiment"):
            raise ConfigError("missing [experiment] section")
        sec = parser["experiment"]
        kw = {}
        try:
            if "lambda_inv" in sec:
                kw["lambda_inv_grid"] = tuple(_grid(sec["lambda_inv"]))
            if "horizon" in sec:
                kw["horizon"] = sec.getint("horizon")
            if "pairs" in sec:
                kw["pairs"] = tuple(_pairs(sec["pairs"]))
            if "shape" in sec:
                kw["shape"] = sec.getfloat("shape")
            if "seeds" in sec:
                kw["seeds"] = sec.getint("seeds")
            if "master_seed" in sec:
                kw["master_seed"] = sec.getint("master_seed")
            if "exponents" in sec:
                kw["exponents"] = tuple(
                    Fraction(p.strip()) for p in sec["exponents"].split(",") if p.strip()
                )
            if "policies" in sec:
                kw["policies"] = tuple(
                    p.strip().lower() for p in sec["policies"].split(",") if p.strip()
                )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        extra = set(sec) - {
            "lambda_inv", "horizon", "pairs", "shape", "seeds",
            "master_seed", "exponents", "policies",
        }
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}")
        return cls(**kw)

    @classmethod
    def read(cls, path) -> "ExperimentConfig":
        return cls.from_ini(Path(path).read_text())

    @property
    def baselines(self) -> tuple:
        return tuple(p for p in BASELINES if p in self.policies)

    @property
    def variants(self) -> tuple:
        out = []
        if "bal_static" in self.policies:
            out.extend(static_label(k) for k in range(1, len(self.exponents) + 1))
        if "bal_dynamic" in self.policies:
            out.append("bal_dynamic")
        return tuple(out)


def static_label(x_index: int) -> str:
    return f"bal_x{x_index}"


def run_seed(master_seed: int, h_index: int, lambda_index: int, r: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, h_index, lambda_index, r])


@dataclass(frozen=True)
class Task:
    h_index: int
    low: float
    high: float
    lambda_index: int
    lambda_inv: float
    run: int


@dataclass(frozen=True)
class RunRecord:
    task: Task
    n_jobs: int
    n_tilde: Fraction
    F: dict = field(default_factory=dict)

    def as_result(self) -> RunResult:
        return RunResult(self.task.h_index, self.task.lambda_inv, self.task.run, self.F)


def run_task(cfg: ExperimentConfig, task: Task) -> RunRecord:
    wl = WorkloadConfig(task.lambda_inv, cfg.horizon, task.low, task.high, cfg.shape)
    rng = np.random.default_rng(run_seed(cfg.master_seed, task.h_index, task.lambda_index, task.run))
    inst = gen_poisson_instance(wl, rng)
    n_tilde = partition_idle_free(inst).estimate() if inst.n else Fraction(0)

    makers = {"srpt": srpt, "fcfs": fcfs, "rr": rr}
    F = {}
    for name in cfg.baselines:
        F[name] = flow_stats(simulate(inst, makers[name]())).F
    if "bal_static" in cfg.policies:
        for k, x in enumerate(cfg.exponents, 1):
            F[static_label(k)] = flow_stats(simulate(inst, bal(Threshold(n_tilde, x)))).F
    if "bal_dynamic" in cfg.policies:
        F["bal_dynamic"] = flow_stats(simulate(inst, dynamic_bal())).F
    return RunRecord(task, inst.n, n_tilde, F)


def tasks(cfg: ExperimentConfig, h_indices=None, lambdas=None) -> list[Task]:
    out = []
    for h_index, low, high in cfg.pairs:
        if h_indices is not None and h_index not in h_indices:
            continue
        for li, lam in enumerate(cfg.lambda_inv_grid):
            if lambdas is not None and lam not in lambdas:
                continue
            for r in range(cfg.seeds):
                out.append(Task(h_index, low, high, li, lam, r))
    return out


def _worker_count(workers):
    if workers is not None:
        return max(1, int(workers))
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _run_one(args):
    return run_task(*args)


def run_experiment(cfg: ExperimentConfig, h_indices=None, lambdas=None, workers=None) -> list[RunRecord]:
    """Run every (cell, seed) task; the result order is fixed regardless of workers."""
    todo = tasks(cfg, h_indices, lambdas)
    n = _worker_count(workers)
    if n == 1:
        records = [run_task(cfg, t) for t in todo]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            records = list(pool.map(_run_one, [(cfg, t) for t in todo], chunksize=1))
    return records


# -- output ------------------------------------------------------------------

RAW_FIELDS = ("h_index", "lambda_inv", "run", "n_jobs", "n_tilde", "policy", "F")


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_raw(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_FIELDS)
        for rec in records:
            t = rec.task
            for name, F in rec.F.items():
                w.writerow((t.h_index, _fmt_num(t.lambda_inv), t.run, rec.n_jobs, rec.n_tilde, name, F))


def read_raw(path) -> list[RunResult]:
    """Rebuild per-seed results from a raw CSV without simulating again."""
    cells: dict[tuple, dict] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (int(row["h_index"]), float(row["lambda_inv"]), int(row["run"]))
            cells.setdefault(key, {})[row["policy"]] = int(row["F"])
    return [RunResult(h, lam, r, F) for (h, lam, r), F in sorted(cells.items())]


def dat_name(baseline: str, h_index: int, x_index: int | None = None) -> str:
    if x_index is None:
        return f"{baseline.upper()}_BP_{h_index}.dat"
    return f"{baseline.upper()}_BP_{h_index}_{x_index}.dat"


def write_dat_files(cfg: ExperimentConfig, table: dict, out_dir) -> list[Path]:
    """One two-column "lambda_inv ratio" file per (baseline, H index, x index).

    Dynamic-threshold ratios go to ``out_dir/dynamic`` with no x index.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    lambdas = sorted({k[0] for k in table})
    h_list = sorted({k[1] for k in table})
    for variant in cfg.variants:
        if variant == "bal_dynamic":
            target, x_index = out_dir / "dynamic", None
            target.mkdir(exist_ok=True)
        else:
            target, x_index = out_dir, int(variant.removeprefix("bal_x"))
        for h in h_list:
            for b in cfg.baselines:
                path = target / dat_name(b, h, x_index)
                lines = [
                    f"{_fmt_num(lam)} {table[(lam, h, variant, b)]:.10g}\n"
                    for lam in lambdas
                    if (lam, h, variant, b) in table
                ]
                path.write_text("".join(lines))
                written.append(path)
    return written


def summarize(cfg: ExperimentConfig, records) -> dict:
    return ratio_table((r.as_result() for r in records), cfg.variants, cfg.baselines)


def cmd_experiment(cfg: ExperimentConfig, out_dir, workers=None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_experiment(cfg, workers=workers)
    write_raw(records, out_dir / "raw.csv")
    return write_dat_files(cfg, summarize(cfg, records), out_dir)
