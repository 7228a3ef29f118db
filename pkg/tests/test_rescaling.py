import math

import numpy as np
import pytest

from largegaps.errors import ValidationError
from largegaps.harness.experiments import default_c0
from largegaps.rescaling import (
    BulkInterval,
    GumbelLaw,
    RescaleParams,
    check_lemma1,
    check_lemma8,
    check_lemma9,
    check_lemma10,
    f_n,
    g_n,
    gumbel_k_cdf,
    gumbel_k_pdf,
    m0_of_interval,
    m_of_interval,
    s_of_interval,
    tau_from_gap_cue,
    tau_from_gap_gue,
)

E2 = math.exp(2.0)
# Ratios that stay outside their bands at n = 4096; see the decisions ledger.
SLOW_LOG_CONVERGENCE = pytest.mark.xfail(
    strict=True, reason="1/ln n correction keeps the finite-n ratio outside the band at n = 4096"
)


@pytest.fixture(scope="module")
def c0_hat():
    return default_c0()


@pytest.fixture(scope="module")
def p4096(c0_hat):
    return RescaleParams(4096, c0_hat)


def test_params_validation():
    with pytest.raises(ValidationError):
        RescaleParams(2)
    p = RescaleParams(100, -0.3)
    assert p.c1 - p.c0_hat == math.log(math.pi / 2)


def test_f_n_example():
    p = RescaleParams(E2)
    expected = 3 * math.log(4) / (4 * E2) + 8 / E2
    assert f_n(p, 0.0) == pytest.approx(expected, rel=1e-14)


def test_f_n_inverse():
    p = RescaleParams(777)
    for x in (-3.0, 0.0, 3.0):
        assert abs(tau_from_gap_cue(p, f_n(p, x)) - x) < 1e-12


def test_f_n_leading_order_trend():
    ratios = []
    for n in (1e3, 1e6, 1e9):
        p = RescaleParams(n)
        ratios.append(n * f_n(p, 0.0) / math.sqrt(32 * p.ln_n))
    assert all(r > 1 for r in ratios)
    assert ratios[0] > ratios[1] > ratios[2]


def test_g_n_example():
    p = RescaleParams(E2)
    expected = -5 * math.log(4) / (4 * E2) + 8 / E2
    assert g_n(p, 0.0) == pytest.approx(expected, rel=1e-14)


def test_g_minus_f():
    for n in (5, 100, 10**6):
        p = RescaleParams(n)
        diff = -8 * math.log(p.two_ln_n) / (2 * n * p.sqrt_two_ln_n)
        for x in (-2.0, 0.5):
            assert abs(g_n(p, x) - f_n(p, x) - diff) < 1e-14


def test_g_n_inverse():
    interval = BulkInterval(-1.0, -0.5)
    s = s_of_interval(interval)
    p = RescaleParams(500)
    for x in (-3.0, 0.0, 3.0):
        assert abs(tau_from_gap_gue(p, g_n(p, x) / s, interval) - x) < 1e-12


def test_tau_cue_examples():
    for n in (10, 1000):
        p = RescaleParams(n)
        assert tau_from_gap_cue(p, p.base_gap) == pytest.approx(-3 / 8 * math.log(p.two_ln_n), abs=1e-13)
    assert abs(tau_from_gap_cue(RescaleParams(E2), 1.2233931709015111)) < 1e-10
    p = RescaleParams(E2)
    assert abs(tau_from_gap_cue(p, f_n(p, 0.0))) < 1e-10
    m = np.linspace(0.01, 6, 100)
    assert np.all(np.diff(tau_from_gap_cue(RescaleParams(64), m)) > 0)


def test_tau_gue_examples():
    interval = BulkInterval(-1.0, 1.0)
    s = s_of_interval(interval)
    p = RescaleParams(300)
    assert tau_from_gap_gue(p, p.base_gap / s, interval) == pytest.approx(5 / 8 * math.log(p.two_ln_n), abs=1e-13)
    m = 0.02
    step = tau_from_gap_gue(p, 2 * m, interval) - tau_from_gap_gue(p, m, interval)
    assert step == pytest.approx(p.n * p.sqrt_two_ln_n * s * m / 4, rel=1e-12)


def test_interval_constants():
    assert s_of_interval(BulkInterval(-1, 1)) == pytest.approx(math.sqrt(3), rel=1e-15)
    assert s_of_interval(BulkInterval(0.5, 1.5)) == pytest.approx(math.sqrt(1.75), rel=1e-15)
    assert s_of_interval(BulkInterval(-1.5, -0.5)) == pytest.approx(math.sqrt(1.75), rel=1e-15)
    assert m_of_interval(BulkInterval(-1, -0.5)) == pytest.approx(3.0, rel=1e-15)
    assert m_of_interval(BulkInterval(0.5, 1)) == pytest.approx(3.0, rel=1e-15)
    assert m_of_interval(BulkInterval(-1, 1)) == pytest.approx(6.0, rel=1e-15)
    assert m0_of_interval(BulkInterval(-1, -0.5)) == pytest.approx(1.5 * math.log(3) - math.log(4), rel=1e-14)
    assert m0_of_interval(BulkInterval(-1, -0.5)) == pytest.approx(0.261624, abs=1e-6)
    assert m0_of_interval(BulkInterval(-1, 1)) == pytest.approx(1.5 * math.log(3) - math.log(2), rel=1e-14)
    assert m0_of_interval(BulkInterval(-1, 1)) == pytest.approx(0.954771, abs=1e-6)


def test_interval_touching_zero():
    # The relevant endpoint is the one farther from 0, so it never vanishes.
    assert m_of_interval(BulkInterval(-1.0, 0.0)) == pytest.approx(3.0, rel=1e-15)
    assert m_of_interval(BulkInterval(0.0, 1.0)) == pytest.approx(3.0, rel=1e-15)
    with pytest.raises(ValidationError):
        BulkInterval(-2.0, 0.0)
    with pytest.raises(ValidationError):
        BulkInterval(0.5, 0.5)


def test_m0_identity_random():
    rng = np.random.default_rng(5)
    done = 0
    while done < 100:
        a, b = np.sort(rng.uniform(-1.95, 1.95, 2))
        iv = BulkInterval(float(a), float(b))
        try:
            m = m_of_interval(iv)
        except ValidationError:
            continue
        assert m0_of_interval(iv) == pytest.approx(math.log(m * s_of_interval(iv) / 4), abs=1e-12)
        done += 1


def test_gumbel_examples():
    law = GumbelLaw(0.7, 1)
    assert gumbel_k_pdf(law, 0.7) == pytest.approx(math.exp(-1), rel=1e-15)
    assert gumbel_k_cdf(law, 0.7) == pytest.approx(math.exp(-1), rel=1e-15)
    assert gumbel_k_cdf(GumbelLaw(0.7, 2), 0.7) == pytest.approx(2 * math.exp(-1), rel=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_gumbel_pdf_integrates_to_one(k):
    law = GumbelLaw(-0.2, k)
    t, w = np.polynomial.legendre.leggauss(400)
    x = 30 * t + 10
    assert float(np.dot(30 * w, gumbel_k_pdf(law, x))) == pytest.approx(1.0, abs=1e-8)
    cdf = gumbel_k_cdf(law, np.linspace(-20, 40, 500))
    assert np.all(np.diff(cdf) >= -1e-15) and cdf[0] < 1e-12 and cdf[-1] > 1 - 1e-12


def test_gumbel_moments():
    for k in (1, 2, 3):
        law = GumbelLaw(0.3, k)
        t, w = np.polynomial.legendre.leggauss(600)
        x, w = 40 * t + 10, 40 * w
        pdf = gumbel_k_pdf(law, x)
        mean = float(np.dot(w, x * pdf))
        var = float(np.dot(w, (x - mean) ** 2 * pdf))
        assert mean == pytest.approx(law.mean, abs=1e-8)
        assert var == pytest.approx(law.variance, abs=1e-8)


def test_lemma1_decreasing(p4096):
    vals = [check_lemma1(p4096, x) for x in (-2, -1, 0, 1, 2)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_lemma1_level(p4096, c0_hat):
    assert 0.7 <= check_lemma1(p4096, 0.0) / math.exp(c0_hat) <= 1.3


@SLOW_LOG_CONVERGENCE
def test_lemma1_shift_ratio(p4096):
    ratio = check_lemma1(p4096, 1.0) / check_lemma1(p4096, 0.0)
    assert abs(ratio / math.exp(-1) - 1) <= 0.05


@SLOW_LOG_CONVERGENCE
def test_lemma8_shift_ratio(p4096):
    ratio = check_lemma8(p4096, 1.0, 0.0) / check_lemma8(p4096, 0.0, 0.0)
    assert abs(ratio / math.exp(-1) - 1) <= 0.05


@SLOW_LOG_CONVERGENCE
def test_lemma8_z_ratio(p4096):
    ratio = check_lemma8(p4096, 0.0, 1.0) / check_lemma8(p4096, 0.0, 0.0)
    assert abs(ratio / math.exp(-2) - 1) <= 0.10


def test_lemma8_positive(p4096):
    for x in (-2, 0, 2):
        for z in (-1, 0, 1, 2):
            assert check_lemma8(p4096, x, z) > 0


def test_lemma1_lemma8_normalizations():
    # f_n(x) = g_n(x + ln(2 ln n)), so the two checks see the same arc and
    # differ only by their prefactors, whose ratio is 2 ln n.
    p = RescaleParams(1024)
    for x in (-1.0, 0.5):
        a = check_lemma1(p, x)
        b = check_lemma8(p, x + math.log(p.two_ln_n), 0.0)
        assert a / p.two_ln_n == pytest.approx(b, rel=1e-12)


def test_lemma9_w1_slack():
    rec = check_lemma9(RescaleParams(256), 0.3, 1.0)
    assert rec.holds and rec.slack == pytest.approx(1.0, abs=1e-12)


def test_lemma9_example():
    assert check_lemma9(RescaleParams(1024), 0.0, 1.5).holds


def test_lemma9_holds_rate_trend():
    ws = np.linspace(1.1, 2.0, 10)
    rates = [np.mean([check_lemma9(RescaleParams(n), 0.0, w).holds for w in ws]) for n in (256, 1024, 4096)]
    assert rates[0] <= rates[1] <= rates[2]


def test_lemma9_validation():
    with pytest.raises(ValidationError):
        check_lemma9(RescaleParams(256), 0.0, 0.5)


@pytest.fixture(scope="module")
def lemma10_values(c0_hat):
    p = RescaleParams(2048, c0_hat)
    iv = BulkInterval(-1.0, -0.5)
    return p, iv, {x: check_lemma10(p, x, iv) for x in (-1.0, 0.0, 1.0)}


def test_lemma10_shift_ratio(lemma10_values):
    _, _, vals = lemma10_values
    for x in (-1.0, 0.0):
        assert abs(vals[x + 1] / vals[x] / math.exp(-1) - 1) <= 0.10


def test_lemma10_constant(lemma10_values, c0_hat):
    _, iv, vals = lemma10_values
    ratio = vals[0.0] / math.exp(c0_hat) / m_of_interval(iv)
    assert abs(ratio - 1) <= 0.30


def test_lemma10_additivity():
    p = RescaleParams(512)
    whole = check_lemma10(p, 0.0, BulkInterval(-1.0, 1.0))
    parts = check_lemma10(p, 0.0, BulkInterval(-1.0, 0.0)) + check_lemma10(p, 0.0, BulkInterval(0.0, 1.0))
    assert whole == pytest.approx(parts, rel=1e-8)
