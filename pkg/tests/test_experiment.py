from fractions import Fraction

import pytest

from balsched.experiment import (
    ConfigError,
    ExperimentConfig,
    cmd_experiment,
    dat_name,
    read_raw,
    run_experiment,
    run_seed,
    summarize,
    tasks,
    write_dat_files,
)
from balsched.analysis import ratio_table
from balsched.workload import PARETO_PAIRS

SMALL = """
[experiment]
lambda_inv = 28
horizon = 2048
pairs = 1
seeds = 1
exponents = 4/6
policies = srpt, fcfs, rr, bal_static
"""


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.lambda_inv_grid == tuple(float(x) for x in range(20, 41))
    assert cfg.horizon == 2**16 and cfg.seeds == 10
    assert [p[1:] for p in cfg.pairs] == list(PARETO_PAIRS)
    assert cfg.exponents == tuple(Fraction(k, 6) for k in range(2, 7))
    assert cfg.variants == ("bal_x1", "bal_x2", "bal_x3", "bal_x4", "bal_x5", "bal_dynamic")
    assert cfg.baselines == ("srpt", "fcfs", "rr")


def test_parse_ini():
    cfg = ExperimentConfig.from_ini(
        "[experiment]\nlambda_inv = 20:24:2\npairs = 2, 3.5:100\nexponents = 1/2\nseeds = 3  # few\n"
    )
    assert cfg.lambda_inv_grid == (20.0, 22.0, 24.0)
    assert cfg.pairs == ((2, *PARETO_PAIRS[1]), (2, 3.5, 100.0))
    assert cfg.exponents == (Fraction(1, 2),) and cfg.seeds == 3


@pytest.mark.parametrize("text", [
    "[other]\n",
    "[experiment]\nhorizon = 0\n",
    "[experiment]\nseeds = x\n",
    "[experiment]\npolicies = srpt, magic\n",
    "[experiment]\nlambda_inv = 20:10\n",
    "[experiment]\npairs = 9\n",
    "[experiment]\nbogus = 1\n",
])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_ini(text)


def test_seed_derivation_is_stable():
    a = run_seed(1, 2, 3, 4).generate_state(2)
    assert (a == run_seed(1, 2, 3, 4).generate_state(2)).all()
    assert not (a == run_seed(1, 2, 3, 5).generate_state(2)).all()


def test_small_sweep_files(tmp_path):
    cfg = ExperimentConfig.from_ini(SMALL)
    files = cmd_experiment(cfg, tmp_path)
    assert sorted(p.name for p in files) == ["FCFS_BP_1_1.dat", "RR_BP_1_1.dat", "SRPT_BP_1_1.dat"]
    for p in files:
        lines = p.read_text().splitlines()
        assert len(lines) == 1
        lam, ratio = lines[0].split(" ")
        assert lam == "28" and float(ratio) > 0
    results = read_raw(tmp_path / "raw.csv")
    assert ratio_table(results, cfg.variants, cfg.baselines) == summarize(cfg, run_experiment(cfg))


def test_outputs_are_byte_stable(tmp_path):
    cfg = ExperimentConfig.from_ini(SMALL)
    cmd_experiment(cfg, tmp_path / "a")
    cmd_experiment(cfg, tmp_path / "b")
    for name in ("raw.csv", "SRPT_BP_1_1.dat"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_workers_do_not_change_results():
    cfg = ExperimentConfig.from_ini(SMALL.replace("seeds = 1", "seeds = 2"))
    assert run_experiment(cfg, workers=1) == run_experiment(cfg, workers=2)


def test_dynamic_files(tmp_path):
    cfg = ExperimentConfig.from_ini(SMALL.replace("bal_static", "bal_dynamic"))
    files = cmd_experiment(cfg, tmp_path)
    assert sorted(str(p.relative_to(tmp_path)) for p in files) == [
        "dynamic/FCFS_BP_1.dat", "dynamic/RR_BP_1.dat", "dynamic/SRPT_BP_1.dat",
    ]


def test_desk_layout_shape(tmp_path):
    cfg = ExperimentConfig()
    table = {
        (lam, h, v, b): 0.5
        for lam in cfg.lambda_inv_grid
        for h, _, _ in cfg.pairs
        for v in cfg.variants
        for b in cfg.baselines
    }
    files = write_dat_files(cfg, table, tmp_path)
    static = [p for p in files if p.parent == tmp_path]
    assert len(static) == 5 * 5 * 3
    assert all(len(p.read_text().splitlines()) == 21 for p in files)
    assert dat_name("srpt", 5, 3) == "SRPT_BP_5_3.dat"


def test_task_filtering():
    cfg = ExperimentConfig(seeds=2)
    sel = tasks(cfg, h_indices={5}, lambdas={20.0, 40.0})
    assert len(sel) == 4 and {t.h_index for t in sel} == {5}
