import numpy as np
import pytest

from ncrr.bench import (
    TrialSpec,
    gen_instance,
    metrics,
    run_fig1,
    run_fig4,
    run_fig8,
    to_csv,
)


def test_instance_properties():
    spec = TrialSpec(p=200, n=50, s=8, epsilon=0.3, seed=3)
    prob = gen_instance(spec, 2)
    assert prob.X.shape == (50, 200)
    assert prob.s == 8
    assert np.all(np.abs(prob.theta_star[prob.support]) >= 0.1)
    assert np.linalg.norm(prob.noise) == pytest.approx(0.3, rel=1e-12)
    np.testing.assert_allclose(prob.y, prob.X @ prob.theta_star + prob.noise)


def test_instance_noise_free_and_reproducible():
    spec = TrialSpec(p=50, n=20, s=3, epsilon=0.0)
    a, b = gen_instance(spec, 0), gen_instance(spec, 0)
    assert np.all(a.noise == 0)
    np.testing.assert_array_equal(a.X, b.X)
    assert not np.array_equal(a.X, gen_instance(spec, 1).X)


def test_metrics():
    truth = np.array([1.0, 0, -2.0, 0])
    assert metrics(truth, truth) == (2, 0.0, 1.0)
    sp, rre, srr = metrics(np.array([1.0, 0.5, 0, 0]), truth)
    assert sp == 2
    assert rre == pytest.approx(np.sqrt(0.25 + 4) / np.sqrt(5))
    assert srr == pytest.approx(1 / 3)
    assert metrics(np.array([1e-9, 0, -2, 0]), truth)[0] == 1


def test_csv_format(tmp_path):
    path = tmp_path / "x.csv"
    text = to_csv(("a", "b", "c"), [(1, 0.1, "L1")], path)
    assert text == "a,b,c\n1,0.10000000000000001,L1\n"
    assert path.read_text() == text


def test_fig1_small_run():
    spec = TrialSpec(p=60, n=40, s=3, num_trials=3, nu=1e-3, max_sweeps=300, seed=1)
    res = run_fig1(spec)
    kmax = max(t["sweeps"] for t in res.trials)
    assert len(res.rows) == kmax * 5 * 3
    first = res.csv().splitlines()[0]
    assert first == "sweep,quantile,metric,value"
    for t in res.trials:
        assert t["converged"]
        assert np.all(np.diff(t["mu"]) <= 1e-12)
        assert t["nu"][-1] <= spec.nu * (1 + 1e-12)
    # quantiles are ordered at every sweep
    mu = [r for r in res.rows if r[2] == "mu" and r[0] == kmax]
    assert [r[3] for r in mu] == sorted(r[3] for r in mu)


def test_fig4_small_run():
    res = run_fig4(60, [20, 40], [1, 2, 4], num_trials=3, num_submatrices=10)
    assert set(res.ratios) == {20, 40}
    assert res.ratios[20].shape == (3, 3)
    assert np.all(res.ratios[20] >= 1)
    assert len(res.rows) == 2 * 3 * 3


def test_fig8_small_run():
    spec = TrialSpec(p=80, n=40, s=3, gamma=1e-3, num_trials=2, max_sweeps=200)
    res = run_fig8(spec, [30, 40], regs=("LSP", "L1"), lambda_grid=(1e-3, 1e-1))
    assert len(res.rows) == 2 * 2 * 2
    assert set(res.selected) == {("LSP", 30), ("LSP", 40), ("L1", 30), ("L1", 40)}
    assert len(res.selected_rows()) == 4
    med = res.medians("LSP", 40)
    assert 0 <= med["srr"] <= 1 and med["rre"] >= 0


def test_bench_outputs_are_reproducible():
    spec = TrialSpec(p=50, n=30, s=3, num_trials=2, max_sweeps=100)
    assert run_fig1(spec).csv() == run_fig1(spec).csv()
    assert run_fig4(40, [20], [1, 3], num_trials=2).csv() == run_fig4(40, [20], [1, 3], num_trials=2).csv()
    a = run_fig8(spec, [30], regs=("MCP",), lambda_grid=(1e-2,))
    b = run_fig8(spec, [30], regs=("MCP",), lambda_grid=(1e-2,))
    assert a.csv() == b.csv()


def test_parallel_matches_serial():
    spec = TrialSpec(p=50, n=30, s=3, num_trials=2, max_sweeps=100)
    assert run_fig1(spec, threads=2).csv() == run_fig1(spec, threads=1).csv()
