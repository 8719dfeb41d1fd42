import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from foliage_rt.channel import PathContribution
from foliage_rt.metrics import (
    Cir,
    Pdp,
    assemble_cir,
    cdf_median,
    channel_stats,
    empirical_cdf,
    mean_delay,
    path_loss_db,
    pdp_from_realizations,
    read_cir_csv,
    rms_delay_spread,
    rssi_dbm,
    write_cir_csv,
)

BW = 2e9
DT = 1 / BW


def brute_ds(delays, powers):
    """Delay spread from its definition, in plain Python floats."""
    tot = sum(powers)
    mean = sum(t * p for t, p in zip(delays, powers)) / tot
    return math.sqrt(sum((t - mean) ** 2 * p for t, p in zip(delays, powers)) / tot), mean


def pdp_at(delays_ns, powers, step_ns=1.0):
    k = np.rint(np.asarray(delays_ns) / step_ns).astype(int)
    p = np.zeros(k.max() + 1)
    p[k] = powers
    return Pdp(p, 0.0, step_ns * 1e-9)


# -- CIR assembly ------------------------------------------------------------------


def test_on_grid_path():
    tau0 = 1e-7
    cir = assemble_cir([PathContribution(tau0 + 40 * DT, 1.0 + 0j, 0)], BW, tau0=tau0)
    assert abs(cir.taps[40]) == pytest.approx(1.0)
    others = np.delete(np.abs(cir.taps), 40)
    assert others.max() < 1e-12
    assert np.sum(np.abs(cir.taps) ** 2) == pytest.approx(1.0, rel=0.01)
    assert cir.dtau == pytest.approx(0.5e-9)


def test_half_tap_offset():
    cir = assemble_cir([PathContribution(100.5 * DT, 1.0 + 0j, 0)], BW, tau0=0.0)
    # sinc(+-1/2) = 2 / pi
    mag = np.abs(cir.taps)
    top = np.argsort(mag)[-2:]
    assert sorted(top.tolist()) == [100, 101]
    npt.assert_allclose(mag[top], 2 / math.pi, rtol=1e-12)


def test_zero_paths():
    cir = assemble_cir([], BW)
    assert not np.any(cir.taps)
    assert path_loss_db(cir) == -math.inf


def test_default_origin_leads_earliest_path():
    paths = [PathContribution(1e-7, 1.0 + 0j, 0), PathContribution(1.3e-7, 0.5 + 0j, 1)]
    cir = assemble_cir(paths, BW)
    assert cir.tau0 == pytest.approx(1e-7 - 32 * DT)
    assert len(cir.taps) == 1024


def test_delay_outside_grid_is_named():
    with pytest.raises(ValueError, match="1.0000"):
        assemble_cir([PathContribution(1e-6, 1.0 + 0j, 0)], BW, grid_len=64, tau0=0.0)


def disjoint_path_set(rng, grid_len=1024, margin=70):
    """Random paths whose truncated sinc supports do not overlap."""
    n = int(rng.integers(1, 7))
    slots = np.sort(rng.choice(np.arange(margin, grid_len - margin, 130), n, replace=False))
    tau = (slots + rng.uniform(0, 1, n)) * DT
    amp = rng.rayleigh(1e-6, n) * np.exp(2j * np.pi * rng.random(n))
    return [PathContribution(float(t), complex(a), i) for i, (t, a) in enumerate(zip(tau, amp))]


def test_energy_conservation_random_sets():
    rng = np.random.default_rng(8)
    for _ in range(100):
        paths = disjoint_path_set(rng)
        cir = assemble_cir(paths, BW, tau0=0.0)
        e_taps = np.sum(np.abs(cir.taps) ** 2)
        e_paths = sum(p.power for p in paths)
        assert abs(e_taps / e_paths - 1) < 0.01


def test_energy_conservation_shared_fraction_dense_sets():
    # Integer-spaced delays keep the sinc pulses orthogonal even when they overlap.
    rng = np.random.default_rng(9)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        slots = rng.choice(np.arange(100, 900), n, replace=False)
        tau = (slots + rng.random()) * DT
        amp = rng.normal(size=n) + 1j * rng.normal(size=n)
        paths = [PathContribution(float(t), complex(a), i) for i, (t, a) in enumerate(zip(tau, amp))]
        cir = assemble_cir(paths, BW, tau0=0.0)
        assert abs(np.sum(np.abs(cir.taps) ** 2) / np.sum(np.abs(amp) ** 2) - 1) < 0.01


# -- path loss ----------------------------------------------------------------------


def test_path_loss_examples():
    assert path_loss_db(Cir([0.1], 0.0, DT)) == pytest.approx(-20.0)
    assert path_loss_db(Cir([0.1, 0.1j], 0.0, DT)) == pytest.approx(-16.9897, abs=1e-4)


def test_path_loss_permutation_and_phase_invariant():
    rng = np.random.default_rng(2)
    taps = rng.normal(size=64) + 1j * rng.normal(size=64)
    ref = path_loss_db(Cir(taps, 0.0, DT))
    rotated = taps[rng.permutation(64)] * np.exp(2j * np.pi * rng.random(64))
    assert path_loss_db(Cir(rotated, 0.0, DT)) == pytest.approx(ref, abs=1e-12)


def test_rssi_respects_floor():
    cir = Cir([1e-6, 1e-7, 1e-8], 0.0, DT)  # -120, -140, -160 dB
    assert rssi_dbm(cir, 0.0, None) == pytest.approx(10 * math.log10(1e-12 + 1e-14 + 1e-16))
    assert rssi_dbm(cir, 0.0, -130.0) == pytest.approx(-120.0)
    assert rssi_dbm(cir, 20.0, -130.0) == pytest.approx(10 * math.log10(1e-10 + 1e-12))
    assert rssi_dbm(cir, 0.0, -100.0) == -math.inf


# -- delay spread -------------------------------------------------------------------


def test_ds_single_tap():
    assert rms_delay_spread(pdp_at([7.0], [3.0])) == 0.0


def test_ds_two_equal_taps():
    assert rms_delay_spread(pdp_at([0.0, 10.0], [1.0, 1.0])) * 1e9 == pytest.approx(5.0, abs=1e-12)


def test_ds_three_taps_against_brute_force():
    delays, powers = [0.0, 4.0, 10.0], [1.0, 0.5, 0.25]
    ds_ref, mean_ref = brute_ds(delays, powers)
    assert mean_ref == pytest.approx(2.5714, abs=1e-4)
    assert ds_ref == pytest.approx(3.4993, abs=1e-4)
    pdp = pdp_at(delays, powers)
    assert rms_delay_spread(pdp) * 1e9 == pytest.approx(ds_ref, abs=1e-9)
    assert mean_delay(pdp) * 1e9 == pytest.approx(mean_ref, abs=1e-9)


def test_ds_zero_power_raises():
    with pytest.raises(ValueError):
        rms_delay_spread(Pdp(np.zeros(8), 0.0, DT))


powers = st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=40)


@settings(max_examples=200, deadline=None)
@given(powers, st.integers(0, 10_000))
def test_ds_shift_invariant(p, shift):
    p = np.array(p)
    a = rms_delay_spread(Pdp(p, 0.0, DT))
    b = rms_delay_spread(Pdp(np.concatenate([np.zeros(shift % 97), p]), 3e-6, DT))
    assert b == pytest.approx(a, rel=1e-12, abs=1e-21)


@settings(max_examples=200, deadline=None)
@given(powers, st.floats(0.01, 100.0))
def test_ds_scales_linearly(p, beta):
    p = np.array(p)
    a = rms_delay_spread(Pdp(p, 0.0, DT))
    b = rms_delay_spread(Pdp(p, 0.0, DT * beta))
    assert b == pytest.approx(beta * a, rel=1e-12, abs=1e-21)


def test_ds_matches_brute_force_random():
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = rng.exponential(size=rng.integers(1, 50))
        ds, _ = brute_ds(list(np.arange(len(p)) * DT), list(p))
        assert rms_delay_spread(Pdp(p, 0.0, DT)) == pytest.approx(ds, rel=1e-9, abs=1e-20)


def test_channel_stats_of_empty_cir():
    s = channel_stats(Cir(np.zeros(16), 0.0, DT))
    assert s.pl_db == -math.inf and math.isnan(s.ds_s)


# -- PDP over realizations ------------------------------------------------------------


def test_pdp_identical_cirs():
    rng = np.random.default_rng(3)
    cir = Cir(rng.normal(size=32) + 1j * rng.normal(size=32), 0.0, DT)
    pdp = pdp_from_realizations([cir] * 5)
    npt.assert_array_equal(pdp.power, np.abs(cir.taps) ** 2)


def test_pdp_half_of_nonzero():
    cir = Cir(np.arange(8) + 1j, 0.0, DT)
    zero = Cir(np.zeros(8), 0.0, DT)
    npt.assert_allclose(pdp_from_realizations([cir, zero]).power, np.abs(cir.taps) ** 2 / 2)


def test_pdp_grid_mismatch():
    with pytest.raises(ValueError):
        pdp_from_realizations([Cir(np.ones(8), 0.0, DT), Cir(np.ones(8), DT, DT)])


# -- CDF ------------------------------------------------------------------------------


def test_cdf_basics():
    x, p = empirical_cdf([3, 1, 2])
    npt.assert_array_equal(x, [1, 2, 3])
    npt.assert_allclose(p, [1 / 3, 2 / 3, 1])
    assert cdf_median([1, 2, 3]) == 2
    x, p = empirical_cdf([4.0] * 5)
    assert set(x) == {4.0} and p[-1] == 1.0
    assert cdf_median([4.0] * 5) == 4.0
    with pytest.raises(ValueError):
        empirical_cdf([])


def test_cir_csv_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    cir = Cir(rng.normal(size=50) + 1j * rng.normal(size=50), 1.23e-7, DT)
    write_cir_csv(tmp_path / "cir.csv", cir)
    back = read_cir_csv(tmp_path / "cir.csv")
    npt.assert_allclose(back.taps, cir.taps, rtol=1e-15)
    assert back.tau0 == cir.tau0 and back.dtau == pytest.approx(DT, rel=1e-9)
