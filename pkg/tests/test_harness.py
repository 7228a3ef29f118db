import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from largegaps.errors import ValidationError
from largegaps.harness import (
    ExperimentConfig,
    cli_main,
    poisson_from_gaps,
    run_gumbel,
    sample_top_gaps,
    sigma_membership_crosscheck,
)
from largegaps.harness.cli import CSV_COLUMNS
from largegaps.harness.io import content_hash, csv_text, format_value
from largegaps.harness.membership import (
    cue_membership_conditions,
    cue_membership_definitional,
    gue_membership_conditions,
    gue_membership_definitional,
)
from largegaps.harness.parallel import THREADS_ENV, worker_count
from largegaps.harness.suites import SUITES, run_suite
from largegaps.holeprob import log_hole_cue
from largegaps.rescaling import BulkInterval
from largegaps.samplers import TWO_PI, CueSpectrum, Seed, extract_gaps_cue, sample_cue
from oracles import d2_closed_form

# Frozen from the mpmath closed form d2_closed_form(0.5).
CLI_HOLE_N2_ARC1 = -0.380189466756126
C0_FOR_TESTS = -0.4385


def run_cli(args, capsys):
    code = cli_main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------------
# Membership


def test_membership_window_over_eigenvalue():
    angles = [0.5, 2.0, 4.0]
    assert not cue_membership_definitional(angles, [1.8], [0.5])
    assert not cue_membership_conditions(angles, [1.8], [0.5])
    assert sigma_membership_crosscheck(CueSpectrum(angles), [1.8], [0.5], "cue")


def test_membership_single_gap():
    angles = [0.5, 2.0, 4.0]
    assert cue_membership_definitional(angles, [2.1], [0.5])
    assert cue_membership_conditions(angles, [2.1], [0.5])
    # Wraparound gap from 4.0 to 0.5 + 2 pi.
    assert cue_membership_definitional(angles, [6.0], [0.6])
    assert cue_membership_conditions(angles, [6.0], [0.6])


def test_membership_two_windows_same_gap():
    angles = [0.5, 2.0, 4.0]
    assert not cue_membership_definitional(angles, [2.1, 2.9], [0.3, 0.3])
    assert not cue_membership_conditions(angles, [2.1, 2.9], [0.3, 0.3])


def _cue_instance(rng):
    n = int(rng.integers(3, 9))
    k = int(rng.integers(1, 4))
    angles = np.sort(rng.uniform(0, TWO_PI, n))
    ys, widths = [], []
    for _ in range(k):
        if rng.random() < 0.6:
            # Aim inside a random gap so that true cases are common.
            i = int(rng.integers(n))
            lo = angles[i]
            hi = angles[(i + 1) % n] + (TWO_PI if i == n - 1 else 0.0)
            y = rng.uniform(lo, hi)
            ys.append(float(y % TWO_PI))
            widths.append(float(rng.uniform(0, 1.2) * (hi - y)))
        else:
            ys.append(float(rng.uniform(0, TWO_PI)))
            widths.append(float(rng.uniform(0.001, 2.0)))
    return angles, ys, [max(w, 1e-9) for w in widths]


def test_membership_random_cue():
    rng = np.random.default_rng(2718)
    agree, trues = 0, 0
    for _ in range(10_000):
        angles, ys, widths = _cue_instance(rng)
        d = cue_membership_definitional(angles, ys, widths)
        agree += d == cue_membership_conditions(angles, ys, widths)
        trues += d
    assert agree == 10_000
    assert trues > 1000


def test_membership_random_gue():
    rng = np.random.default_rng(31415)
    agree, trues = 0, 0
    for _ in range(10_000):
        n, k = int(rng.integers(3, 9)), int(rng.integers(1, 4))
        values = np.sort(rng.standard_normal(n))
        lo, hi = np.sort(rng.uniform(-2.5, 2.5, 2))
        ys, widths = [], []
        for _ in range(k):
            y = rng.uniform(lo, hi)
            nxt = values[values > y]
            room = (nxt[0] if nxt.size else hi) - y
            ys.append(float(y))
            widths.append(float(max(rng.uniform(0, 1.2) * room, 1e-9)))
        d = gue_membership_definitional(values, (lo, hi), ys, widths)
        agree += d == gue_membership_conditions(values, (lo, hi), ys, widths)
        trues += d
    assert agree == 10_000
    assert trues > 500


def test_membership_crosscheck_validation():
    with pytest.raises(ValidationError):
        sigma_membership_crosscheck(CueSpectrum([1.0, 2.0]), [1.5], [0.0], "cue")
    with pytest.raises(ValidationError):
        sigma_membership_crosscheck(np.array([0.0, 1.0]), [0.5], [0.1], "gue")


# ---------------------------------------------------------------------------
# Experiments


def test_config_validation():
    with pytest.raises(ValidationError):
        ExperimentConfig("gue", 10, 5)
    with pytest.raises(ValidationError):
        ExperimentConfig("cue", 10, 0)
    with pytest.raises(ValidationError):
        ExperimentConfig("cue", 10, 5, k=0)
    with pytest.raises(ValidationError):
        ExperimentConfig("cue", 10, 5, interval=BulkInterval(-1, 1))


def test_parallel_equals_serial():
    a = sample_top_gaps("cue", 64, 12, 5, workers=1)
    b = sample_top_gaps("cue", 64, 12, 5, workers=3)
    assert a.tobytes() == b.tobytes()
    iv = BulkInterval(-1.0, -0.5)
    c = sample_top_gaps("gue", 200, 9, 5, iv, workers=1)
    d = sample_top_gaps("gue", 200, 9, 5, iv, workers=2)
    assert np.array_equal(c, d, equal_nan=True)


def test_top_gaps_layout():
    gaps = sample_top_gaps("cue", 20, 3, 1)
    assert gaps.shape == (3, 64)
    assert np.all(np.isfinite(gaps[:, :20])) and np.all(np.isnan(gaps[:, 20:]))
    assert np.allclose(np.nansum(gaps, axis=1), TWO_PI)


def test_run_gumbel_smoke():
    dist = run_gumbel(ExperimentConfig("cue", 64, 200, seed_root=3), c0_hat=C0_FOR_TESTS)
    assert dist.trials == 200 and dist.n_missing == 0
    assert np.all(np.diff(dist.samples) >= 0)
    assert 0.0 <= dist.ks_distance_vs_reference <= 1.0
    assert dist.reference.location == pytest.approx(C0_FOR_TESTS + math.log(math.pi / 2))


def test_run_gumbel_missing_trials():
    cfg = ExperimentConfig("gue", 16, 50, k=3, interval=BulkInterval(-0.3, -0.1), seed_root=4)
    dist = run_gumbel(cfg, c0_hat=C0_FOR_TESTS)
    assert dist.n_missing > 0 and dist.trials == 50


def test_poisson_large_threshold():
    cfg = ExperimentConfig("cue", 256, 300, x_grid=(20.0,), seed_root=9)
    gaps = sample_top_gaps("cue", 256, 300, 9)
    rep = poisson_from_gaps(cfg, gaps, [20.0], C0_FOR_TESTS)
    assert rep.empirical_factorial_moment == 0.0
    assert rep.empirical_count_histogram == {0: 1.0}
    assert sum(rep.empirical_count_histogram.values()) == pytest.approx(1.0)


def test_poisson_validation():
    gaps = sample_top_gaps("cue", 16, 4, 0)
    with pytest.raises(ValidationError):
        poisson_from_gaps(ExperimentConfig("cue", 16, 4, k=2), gaps, [0.0], C0_FOR_TESTS)
    with pytest.raises(ValidationError):
        poisson_from_gaps(
            ExperimentConfig("gue", 16, 4, interval=BulkInterval(-1, 1)), gaps, [0.0], C0_FOR_TESTS
        )


def test_poisson_two_thresholds_brute_force():
    # The distinct-tuple sum equals the brute-force double loop over i != j.
    cfg = ExperimentConfig("cue", 12, 20, k=2, seed_root=2)
    gaps = sample_top_gaps("cue", 12, 20, 2)
    xs = (-4.0, -3.5)
    rep = poisson_from_gaps(cfg, gaps, xs, C0_FOR_TESTS)
    from largegaps.rescaling import RescaleParams, tau_from_gap_cue

    p = RescaleParams(12)
    vals = []
    for row in gaps:
        t = tau_from_gap_cue(p, row[np.isfinite(row)])
        vals.append(sum(
            max(t[i] - xs[0], 0) * max(t[j] - xs[1], 0)
            for i in range(t.size) for j in range(t.size) if i != j
        ))
    assert rep.empirical_factorial_moment == pytest.approx(np.mean(vals), rel=1e-12)


@pytest.mark.parametrize("n,a", [(2, 1.0), (3, 0.8), (3, 2.5)])
def test_k1_identity_brute_force(n, a):
    # E sum_i (m_i - a)_+ = 2 pi D_n(a/2) over the circular gaps m_i.
    trials = 40_000
    vals = np.empty(trials)
    for t in range(trials):
        g = extract_gaps_cue(sample_cue(n, Seed(77, t))).gaps
        vals[t] = np.clip(g - a, 0, None).sum()
    exact = TWO_PI * math.exp(log_hole_cue(n, a / 2).log_prob)
    se = vals.std(ddof=1) / math.sqrt(trials)
    assert abs(vals.mean() - exact) < 3 * se


def test_k1_identity_n2_closed_form():
    # For n = 2 the identity can be checked against the closed form directly.
    assert TWO_PI * math.exp(log_hole_cue(2, 0.5).log_prob) == pytest.approx(
        TWO_PI * math.exp(d2_closed_form(0.5)), rel=1e-13
    )


# ---------------------------------------------------------------------------
# Output helpers


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(-math.inf) == "-inf" and format_value(math.nan) == "nan"
    assert format_value(True) == "true" and format_value(np.int64(3)) == "3"
    assert format_value(None) == ""


def test_csv_text_line_endings():
    text = csv_text(["a", "b"], [(1, 2.5), (2, -math.inf)])
    assert text == "a,b\n1,2.5\n2,-inf\n"


def test_content_hash_stable():
    assert content_hash({"b": 1, "a": [1.0, 2]}) == content_hash({"a": [1.0, 2], "b": 1})
    assert content_hash({"a": 1}) != content_hash({"a": 2})


def test_worker_count(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert worker_count(None) == 1 and worker_count(3) == 3
    monkeypatch.setenv(THREADS_ENV, "2")
    assert worker_count(5) == 2
    monkeypatch.setenv(THREADS_ENV, "0")
    with pytest.raises(ValidationError):
        worker_count(None)


# ---------------------------------------------------------------------------
# Command line


def test_cli_hole_example(capsys):
    code, out, err = run_cli(["hole", "--ensemble", "cue", "--n", "2", "--arc-size", "1.0"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS["hole"])
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(row["log_prob"]) == pytest.approx(CLI_HOLE_N2_ARC1, rel=1e-13)
    assert d2_closed_form(0.5) == pytest.approx(CLI_HOLE_N2_ARC1, rel=1e-14)
    summary = json.loads(err)
    assert set(summary) == {"config", "input_hash", "results", "warnings", "version"}


def test_cli_hole_methods_agree(capsys):
    _, a, _ = run_cli(["hole", "--n", "7", "--arc-size", "0.9"], capsys)
    _, b, _ = run_cli(["hole", "--n", "7", "--arc-size", "0.9", "--method", "gram"], capsys)
    la = float(a.splitlines()[1].split(",")[3])
    lb = float(b.splitlines()[1].split(",")[3])
    assert la == pytest.approx(lb, rel=1e-10)


def test_cli_hole_gue(capsys):
    code, out, _ = run_cli(["hole", "--ensemble", "gue", "--n", "1", "--intervals", "0:1"], capsys)
    assert code == 0
    assert float(out.splitlines()[1].split(",")[3]) == pytest.approx(
        math.log(1 - 0.3413447460685429), rel=1e-12
    )


def test_cli_validation_exit_code(capsys):
    assert run_cli(["hole", "--n", "2"], capsys)[0] == 1
    assert run_cli(["hole", "--n", "2", "--arc-size", "7.0"], capsys)[0] == 1
    assert run_cli(["nonsense"], capsys)[0] == 1
    assert run_cli(["gumbel", "--ensemble", "gue", "--n", "8", "--trials", "2"], capsys)[0] == 1
    assert run_cli(["checks", "--suite", "lemma4", "--threads", "0"], capsys)[0] == 1


def test_cli_numerical_exit_code(capsys):
    code, _, err = run_cli(["c0", "--alphas", "0.05,3.0", "--n-grid", "2,3"], capsys)
    assert code == 2 and "numerical failure" in err


def test_cli_checks_lemma4(capsys, tmp_path):
    summary = tmp_path / "s.json"
    code, out, _ = run_cli(
        ["checks", "--suite", "lemma4", "--n", "16", "--instances", "200", "--summary", str(summary)], capsys
    )
    assert code == 0
    res = json.loads(summary.read_text())["results"]
    assert res["all_hold"] is True and res["checked"] == 200
    assert len(out.splitlines()) == 201


@pytest.mark.parametrize("suite", SUITES)
def test_cli_every_suite(suite, capsys):
    n = {"lemma12": 64, "lemma14": 256, "splitting": 64, "lemma9": 256}.get(suite, 8)
    code, out, _ = run_cli(["checks", "--suite", suite, "--n", str(n), "--instances", "3"], capsys)
    assert code == 0
    assert out.splitlines()[0] == ",".join(CSV_COLUMNS["checks"])


def test_suites_all_hold():
    for name in ("lemma6", "lemma7", "membership"):
        rows = run_suite(name, 8, 200, seed_root=1)
        assert all(r[4] for r in rows)
    rows = run_suite("membership", 6, 200, seed_root=1, ensemble="gue")
    assert all(r[4] for r in rows)


def test_cli_output_files_and_config(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# hole settings\nn = 3\narc_size = 1.0\n")
    out = tmp_path / "hole.csv"
    code = cli_main(["hole", "--config", str(cfg), "--output", str(out)])
    assert code == 0
    first = out.read_bytes()
    assert (tmp_path / "hole.json").exists()
    # Explicit flags override the file.
    code = cli_main(["hole", "--config", str(cfg), "--n", "2", "--output", str(out)])
    assert code == 0
    row = out.read_text().splitlines()[1].split(",")
    assert row[1] == "2" and float(row[3]) == pytest.approx(CLI_HOLE_N2_ARC1, rel=1e-13)
    assert first != out.read_bytes()
    bad = tmp_path / "bad.cfg"
    bad.write_text("n 3\n")
    assert cli_main(["hole", "--config", str(bad)]) == 1
    capsys.readouterr()


def test_cli_config_negative_values(capsys, tmp_path):
    cfg = tmp_path / "gue.cfg"
    cfg.write_text("ensemble = gue\nn = 2\nintervals = -0.5:0.5\n")
    assert cli_main(["hole", "--config", str(cfg), "--output", str(tmp_path / "a.csv")]) == 0
    assert cli_main(["hole", "--ensemble", "gue", "--n", "2", "--intervals=-0.5:0.5",
                     "--output", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    capsys.readouterr()


def test_cli_sample(capsys):
    code, out, _ = run_cli(["sample", "--n", "5", "--trials", "2", "--what", "gaps"], capsys)
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()[1:]]
    assert len(rows) == 10
    assert sum(float(r[2]) for r in rows[:5]) == pytest.approx(TWO_PI, abs=1e-12)
    code, out, _ = run_cli(
        ["sample", "--ensemble", "gue", "--n", "5", "--what", "gaps", "--interval=-1,1"], capsys
    )
    assert code == 0


def test_cli_limits(capsys):
    code, out, _ = run_cli(["limits", "--n", "256", "--x", "0", "--z", "0", "--c0", "-0.44"], capsys)
    assert code == 0
    kinds = [line.split(",")[0] for line in out.splitlines()[1:]]
    assert kinds == ["lemma1", "lemma8", "lemma10"]


def test_cli_poisson(capsys):
    code, out, err = run_cli(
        ["poisson", "--n", "64", "--trials", "50", "--x", "0", "--c0", "-0.44"], capsys
    )
    assert code == 0
    res = json.loads(err)["results"]
    assert res["exact"] > 0 and res["standard_error"] > 0


def test_cli_gumbel_deterministic(tmp_path):
    paths = []
    for i, threads in enumerate(("1", "1", "2")):
        out = tmp_path / f"g{i}.csv"
        args = ["gumbel", "--ensemble", "cue", "--n", "128", "--k", "1", "--trials", "40",
                "--seed", "7", "--c0", "-0.44", "--threads", threads, "--output", str(out)]
        assert cli_main(args) == 0
        paths.append(out.read_bytes())
    assert paths[0] == paths[1] == paths[2]
    lines = paths[0].decode().split("\n")
    assert lines[0] == "trial,tau" and lines[-1] == "" and len(lines) == 42
    assert b"\r" not in paths[0]


def test_console_entry_point(tmp_path):
    env = {**os.environ}
    env.pop(THREADS_ENV, None)
    proc = subprocess.run(
        [sys.executable, "-m", "largegaps", "hole", "--n", "2", "--arc-size", "1.0"],
        capture_output=True, text=True, env=env, check=False,
    )
    assert proc.returncode == 0
    assert float(proc.stdout.splitlines()[1].split(",")[3]) == pytest.approx(CLI_HOLE_N2_ARC1, rel=1e-13)
