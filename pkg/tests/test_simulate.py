"""Time-sharing and zero-forcing simulations against their outer bounds."""

import math

import numpy as np
import pytest
from scipy import integrate

from nocsit import (
    BcConfig,
    IcConfig,
    Schedule,
    bc_dof_region,
    bc_outer_region,
    dof_slope,
    gap_to_outer,
    ick_outer_region,
    simulate_bc_time_sharing,
    simulate_ic_zero_forcing,
)
from nocsit.errors import ParameterError
from nocsit.simulate import SimResult

POWERS = (1e2, 1e3, 1e4, 1e5, 1e6)


def scalar_rate_oracle(power):
    val, _ = integrate.quad(lambda x: np.log1p(power * x) * np.exp(-x), 0, np.inf)
    return val


def test_single_user_time_sharing_matches_oracle():
    cfg = BcConfig(1, (1,))
    res = simulate_bc_time_sharing(cfg, Schedule((1.0,)), 10.0, 20000, seed=1)
    oracle = scalar_rate_oracle(10.0)
    assert abs(res.rates[0] - oracle) <= 3 * res.stderrs[0]


def test_all_zero_schedule_gives_zero_rates():
    cfg = BcConfig(2, (2, 1))
    res = simulate_bc_time_sharing(cfg, Schedule((0.0, 0.0)), 10.0, 500, seed=2)
    assert res.rates == (0.0, 0.0)
    assert res.slot_counts == (0, 0)


def test_time_sharing_deterministic():
    cfg = BcConfig(2, (2, 1))
    sched = Schedule((0.5, 0.5))
    a = simulate_bc_time_sharing(cfg, sched, 100.0, 1000, seed=3)
    b = simulate_bc_time_sharing(cfg, sched, 100.0, 1000, seed=3)
    assert a == b


def test_time_sharing_slot_accounting():
    cfg = BcConfig(2, (2, 1))
    res = simulate_bc_time_sharing(cfg, Schedule((0.3, 0.3)), 10.0, 1000, seed=4)
    assert sum(res.slot_counts) <= 1000
    assert res.slot_counts == (300, 300)


def test_time_sharing_schedule_mismatch():
    with pytest.raises(ParameterError):
        simulate_bc_time_sharing(
            BcConfig(2, (2, 1)), Schedule((1.0,)), 10.0, 100, seed=0
        )


def test_bc_sweep_slopes_match_schedule():
    cfg = BcConfig(2, (2, 1))
    sched = Schedule((0.5, 0.5))
    sweep = [
        simulate_bc_time_sharing(cfg, sched, p, 4000, seed=10) for p in POWERS
    ]
    fits = [dof_slope([(s.power, s.rates[i]) for s in sweep]) for i in range(2)]
    # per-user slope alpha_i * r_i
    assert fits[0].slope == pytest.approx(1.0, rel=0.05)
    assert fits[1].slope == pytest.approx(0.5, rel=0.05)


def test_ic_zero_forcing_full_activation():
    cfg = IcConfig((1, 1), (2, 2))
    res = simulate_ic_zero_forcing(cfg, 100.0, 4000, seed=20)
    assert res.slot_counts == (4000, 4000)
    assert res.max_interference_ratio < 1e-20
    # projected own channel is a unit-variance complex scalar, so the rate
    # matches the 1x1 point-to-point oracle
    oracle = scalar_rate_oracle(100.0)
    for rate, err in zip(res.rates, res.stderrs):
        assert abs(rate - oracle) <= 3 * err


def test_ic_zero_forcing_deterministic():
    cfg = IcConfig((1, 1), (2, 2))
    a = simulate_ic_zero_forcing(cfg, 100.0, 500, seed=21)
    b = simulate_ic_zero_forcing(cfg, 100.0, 500, seed=21)
    assert a == b


def test_ic_zero_forcing_grouped_rotation():
    # K=3, M=1, N=2: groups of size 2 wrap the user ring; slot shares are
    # (1, 1/2, 1/2), so every slot keeps two transmitters active and the
    # weighted DoF sum can reach the bound
    cfg = IcConfig((1, 1, 1), (2, 2, 2))
    res = simulate_ic_zero_forcing(cfg, 100.0, 4000, seed=22)
    assert res.slot_counts == (4000, 2000, 2000)
    assert res.max_interference_ratio < 1e-20

    sweep = [simulate_ic_zero_forcing(cfg, p, 3000, seed=23) for p in POWERS]
    fits = [dof_slope([(s.power, s.rates[i]) for s in sweep]) for i in range(3)]
    weighted = sum(f.slope for f in fits) / 2  # min(M_T, N) = 2
    assert weighted == pytest.approx(1.0, rel=0.05)
    assert fits[0].slope == pytest.approx(1.0, rel=0.05)
    assert fits[1].slope == pytest.approx(0.5, rel=0.06)
    assert fits[2].slope == pytest.approx(0.5, rel=0.06)


def test_ic_zero_forcing_class_precondition():
    with pytest.raises(ParameterError, match="N >= M"):
        simulate_ic_zero_forcing(IcConfig((3, 2), (2, 2)), 10.0, 100, seed=0)
    with pytest.raises(ParameterError):
        simulate_ic_zero_forcing(IcConfig((1, 3), (2, 4)), 10.0, 100, seed=0)
    # N = M equal is inside the class even though time sharing also applies
    res = simulate_ic_zero_forcing(IcConfig((2, 2), (2, 2)), 10.0, 200, seed=1)
    assert res.slot_counts == (100, 100)


def test_gap_to_outer_rate_region():
    cfg = BcConfig(2, (2, 1))
    sched = Schedule((0.5, 0.5))
    sim = simulate_bc_time_sharing(cfg, sched, 100.0, 4000, seed=30)
    region = bc_outer_region(cfg, 100.0, 4000, seed=31)
    report = gap_to_outer(sim, region)
    assert not report.any_violation
    assert {g.label for g in report.gaps} == {"cap-user1", "cap-user2", "weighted-sum"}

    inflated = gap_to_outer(sim.inflated(2.0), region)
    assert inflated.any_violation

    zeros = SimResult("null", 100.0, 1, 0, (0.0, 0.0), (0.0, 0.0), (0, 0))
    zero_report = gap_to_outer(zeros, region)
    for gap in zero_report.gaps:
        assert gap.slack == pytest.approx(gap.bound)


def test_gap_to_outer_dof_region():
    cfg = BcConfig(2, (2, 1))
    region = bc_dof_region(cfg)
    # synthetic exact lines: rates = slope * ln P + c
    sweep = [
        SimResult(
            "line", p, 1000, 0,
            (1.0 * math.log(p) - 2.0, 0.5 * math.log(p) - 1.0),
            (0.001, 0.001),
            (500, 500),
        )
        for p in POWERS
    ]
    report = gap_to_outer(sweep, region)
    assert not report.any_violation
    assert report.gaps[0].value == pytest.approx(1.0, abs=1e-9)

    inflated = gap_to_outer([s.inflated(2.0) for s in sweep], region)
    assert inflated.any_violation


def test_gap_to_outer_type_checks():
    cfg = BcConfig(2, (2, 1))
    region = bc_dof_region(cfg)
    sim = SimResult("x", 10.0, 10, 0, (0.1, 0.1), (0.0, 0.0), (5, 5))
    with pytest.raises(ParameterError):
        gap_to_outer(sim, region)  # DoF region needs a sweep
    with pytest.raises(ParameterError):
        gap_to_outer([sim], bc_outer_region(cfg, 10.0, 1000, seed=0))
    bad_dim = SimResult("x", 10.0, 10, 0, (0.1,), (0.0,), (5,))
    with pytest.raises(ParameterError):
        gap_to_outer(
            bad_dim, bc_outer_region(cfg, 10.0, 1000, seed=0)
        )


def test_gap_roundoff_guard_with_zero_stderr():
    cfg = BcConfig(1, (1,))
    region = bc_dof_region(cfg)
    # an exact boundary slope that overshoots only by float epsilon must not
    # trip the flag, while a real overshoot must
    graze = [
        SimResult("line", p, 10, 0, ((1 + 1e-15) * math.log(p),), (0.0,), (10,))
        for p in POWERS
    ]
    assert not gap_to_outer(graze, region).any_violation
    over = [
        SimResult("line", p, 10, 0, ((1 + 1e-6) * math.log(p),), (0.0,), (10,))
        for p in POWERS
    ]
    assert gap_to_outer(over, region).any_violation


def test_ic_sweep_never_violates_cooperation_bound():
    cfg = IcConfig((1, 1), (2, 2))
    sweep = [simulate_ic_zero_forcing(cfg, p, 2000, seed=33) for p in POWERS]
    report = gap_to_outer(sweep, ick_outer_region(cfg))
    assert not report.any_violation
