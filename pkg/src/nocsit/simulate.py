"""Achievable-scheme simulation: time sharing and receive zero-forcing.

Every scheme draws a fresh channel per slot (i.i.d. across slots and users),
transmits isotropic Gaussian input at covariance (P/M) I, and measures the
per-slot mutual information.  Measured rate tuples are then compared against
outer regions: an achievable scheme must never exceed an outer bound beyond
Monte Carlo noise, which `gap_to_outer` checks with 3-standard-error bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .capacity import (
    RateRegion,
    Seed,
    SlopeFit,
    _sample_batch,
    _seed_tuple,
    dof_slope,
)
from .errors import MathCheckError, ParameterError
from .regions import BcConfig, DofRegion, IcConfig, Schedule, _equal_n_ge_equal_m

ZF_LEAKAGE_RATIO = 1e-20  # residual interference per slot must stay below ratio * P


@dataclass(frozen=True)
class SimResult:
    """Measured per-user rates of one simulated scheme at one power level."""

    scheme: str
    power: float
    n_slots: int
    seed: Seed
    rates: tuple[float, ...]
    stderrs: tuple[float, ...]
    slot_counts: tuple[int, ...]
    max_interference_ratio: float = 0.0

    @property
    def k_users(self) -> int:
        return len(self.rates)

    def inflated(self, factor: float) -> "SimResult":
        """Copy with rates scaled; used as a negative control against bounds."""
        return SimResult(
            self.scheme + f"-x{factor:g}",
            self.power,
            self.n_slots,
            self.seed,
            tuple(r * factor for r in self.rates),
            self.stderrs,
            self.slot_counts,
            self.max_interference_ratio,
        )


def _batch_isotropic_rates(
    m_tx: int, n_rx: int, power: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    h = _sample_batch(m_tx, n_rx, count, rng)
    gram = np.einsum("bij,bik->bjk", h.conj(), h)
    lam = np.maximum(np.linalg.eigvalsh(gram), 0.0)
    return np.sum(np.log1p((power / m_tx) * lam), axis=1)


def simulate_bc_time_sharing(
    cfg: BcConfig,
    sched: Schedule,
    power: float,
    n_slots: int,
    seed: Seed,
) -> SimResult:
    """Serve one user per slot at full power per the schedule's frame realization.

    User i gets slots_i = realize(n_slots)[i] slots; its rate is
    slots_i/n_slots times the average of ln det(I + (P/M) H_i^H H_i) over its
    own fresh channel draws.
    """
    if sched.k_users != cfg.k_users:
        raise ParameterError(
            f"schedule has {sched.k_users} users, config has {cfg.k_users}"
        )
    if n_slots < 1:
        raise ParameterError("need at least one slot")
    if power <= 0:
        raise ParameterError(f"power must be > 0, got {power}")
    counts = sched.realize(n_slots)
    rates = []
    errs = []
    for i, (n_rx, s_i) in enumerate(zip(cfg.n_rx, counts)):
        if s_i == 0:
            rates.append(0.0)
            errs.append(0.0)
            continue
        rng = np.random.default_rng(_seed_tuple(seed, i + 1))
        slot_rates = _batch_isotropic_rates(cfg.m_tx, n_rx, power, s_i, rng)
        share = s_i / n_slots
        rates.append(share * float(np.mean(slot_rates)))
        if s_i > 1:
            errs.append(share * float(np.std(slot_rates, ddof=1) / math.sqrt(s_i)))
        else:
            errs.append(0.0)
    return SimResult(
        "bc_time_sharing", power, n_slots, seed, tuple(rates), tuple(errs), counts
    )


def _zf_groups(k_users: int, n_rx: int, m_tx: int) -> list[tuple[int, ...]]:
    """Active-user groups for receive zero-forcing.

    With N >= sum of all M, everyone is active every slot.  Otherwise groups
    of g = floor(N/M) users rotate; the ceil(K/g) groups wrap around the user
    ring so every slot keeps exactly g transmitters active (leaving antennas
    idle would strand DoF).
    """
    m_total = k_users * m_tx
    if n_rx >= m_total:
        return [tuple(range(k_users))]
    g = n_rx // m_tx
    n_groups = math.ceil(k_users / g)
    return [
        tuple((j * g + l) % k_users for l in range(g)) for j in range(n_groups)
    ]


def simulate_ic_zero_forcing(
    cfg: IcConfig, power: float, n_slots: int, seed: Seed
) -> SimResult:
    """Receive zero-forcing with round-robin activation for the equal-antenna IC.

    Requires N_i = N >= M = M_i for all pairs.  Each active receiver
    projects its observation onto the orthogonal complement of its active
    interferers' channel spans and decodes its own M streams there; the
    projection is exact linear algebra, so residual interference is checked
    against ZF_LEAKAGE_RATIO * P rather than estimated.
    """
    if not _equal_n_ge_equal_m(cfg):
        raise ParameterError(
            "receive zero-forcing needs equal receive counts N and equal "
            f"transmit counts M with N >= M; got M={cfg.m_tx}, N={cfg.n_rx}"
        )
    if n_slots < 1:
        raise ParameterError("need at least one slot")
    if power <= 0:
        raise ParameterError(f"power must be > 0, got {power}")
    k = cfg.k_users
    m_tx = cfg.m_tx[0]
    n_rx = cfg.n_rx[0]
    groups = _zf_groups(k, n_rx, m_tx)
    n_groups = len(groups)
    # slot t belongs to group t mod n_groups
    group_slots = [
        n_slots // n_groups + (1 if j < n_slots % n_groups else 0)
        for j in range(n_groups)
    ]

    sums = np.zeros(k)
    sumsq = np.zeros(k)
    counts = np.zeros(k, dtype=int)
    max_leak_ratio = 0.0
    for j, group in enumerate(groups):
        c = group_slots[j]
        if c == 0:
            continue
        active = list(group)
        s = len(active)
        for i in active:
            rng = np.random.default_rng(_seed_tuple(seed, j + 1, i + 1))
            own = _sample_batch(m_tx, n_rx, c, rng)  # H_ii, (c, M, N)
            own_rx = own.conj().transpose(0, 2, 1)  # H_ii^H, (c, N, M)
            interferers = [u for u in active if u != i]
            if interferers:
                cols = [
                    _sample_batch(m_tx, n_rx, c, rng).conj().transpose(0, 2, 1)
                    for _ in interferers
                ]
                b = np.concatenate(cols, axis=2)  # (c, N, (s-1)M)
                rank = (s - 1) * m_tx
                u_full = np.linalg.svd(b, compute_uv=True)[0]  # (c, N, N)
                q = u_full[:, :, rank:]  # orth. complement basis
                g_eff = np.einsum("bnk,bnm->bkm", q.conj(), own_rx)
                leak = np.einsum("bnk,bnj->bkj", q.conj(), b)
                leak_power = (power / m_tx) * np.sum(
                    np.abs(leak) ** 2, axis=(1, 2)
                )
                max_leak_ratio = max(
                    max_leak_ratio, float(np.max(leak_power)) / power
                )
            else:
                g_eff = own_rx
            gram = np.einsum("bkm,bkl->bml", g_eff.conj(), g_eff)
            lam = np.maximum(np.linalg.eigvalsh(gram), 0.0)
            slot_rates = np.sum(np.log1p((power / m_tx) * lam), axis=1)
            sums[i] += float(np.sum(slot_rates))
            sumsq[i] += float(np.sum(slot_rates**2))
            counts[i] += c

    if max_leak_ratio >= ZF_LEAKAGE_RATIO:
        raise MathCheckError(
            f"zero-forcing leakage {max_leak_ratio:.3e} * P exceeds "
            f"{ZF_LEAKAGE_RATIO:.0e} * P"
        )
    rates = []
    errs = []
    for i in range(k):
        if counts[i] == 0:
            rates.append(0.0)
            errs.append(0.0)
            continue
        mean = sums[i] / counts[i]
        share = counts[i] / n_slots
        rates.append(share * mean)
        if counts[i] > 1:
            var = (sumsq[i] - counts[i] * mean**2) / (counts[i] - 1)
            errs.append(share * math.sqrt(max(var, 0.0) / counts[i]))
        else:
            errs.append(0.0)
    return SimResult(
        "ic_zero_forcing",
        power,
        n_slots,
        seed,
        tuple(rates),
        tuple(errs),
        tuple(int(c) for c in counts),
        max_interference_ratio=max_leak_ratio,
    )


@dataclass(frozen=True)
class ConstraintGap:
    """Slack of one outer constraint against measured values."""

    label: str
    value: float  # measured left-hand side
    bound: float
    stderr: float  # combined Monte Carlo stderr of value and bound

    @property
    def slack(self) -> float:
        return self.bound - self.value

    @property
    def violated(self) -> bool:
        # absolute floor keeps zero-stderr comparisons (exact synthetic
        # inputs) from flagging float roundoff
        return self.slack < -(3.0 * self.stderr + 1e-12)


@dataclass(frozen=True)
class GapReport:
    scheme: str
    gaps: tuple[ConstraintGap, ...]

    @property
    def any_violation(self) -> bool:
        return any(g.violated for g in self.gaps)

    def lines(self) -> list[str]:
        out = []
        for g in self.gaps:
            verdict = "VIOLATED" if g.violated else "ok"
            out.append(
                f"{g.label}: measured {g.value:.5f} vs bound {g.bound:.5f} "
                f"(slack {g.slack:+.5f}, 3*stderr {3 * g.stderr:.5f}) -> {verdict}"
            )
        return out


def _rate_region_gaps(sim: SimResult, region: RateRegion) -> list[ConstraintGap]:
    gaps = []
    if region.per_user_caps is not None:
        for i, cap in enumerate(region.per_user_caps):
            gaps.append(
                ConstraintGap(
                    f"cap-user{i + 1}",
                    sim.rates[i],
                    cap.mean,
                    math.hypot(sim.stderrs[i], cap.stderr),
                )
            )
    w = [float(x) for x in region.weights]
    value = sum(wi * ri for wi, ri in zip(w, sim.rates))
    err = math.sqrt(
        sum((wi * si) ** 2 for wi, si in zip(w, sim.stderrs))
        + region.sum_bound.stderr**2
    )
    gaps.append(
        ConstraintGap("weighted-sum", value, region.sum_bound.mean, err)
    )
    return gaps


def _dof_region_gaps(
    sweep: Sequence[SimResult], region: DofRegion
) -> list[ConstraintGap]:
    k = sweep[0].k_users
    fits: list[SlopeFit] = []
    for i in range(k):
        fits.append(dof_slope([(s.power, s.rates[i]) for s in sweep]))
    gaps = []
    for c in region.constraints:
        a = [float(x) for x in c.a]
        value = sum(ai * f.slope for ai, f in zip(a, fits))
        err = math.sqrt(sum((ai * f.slope_stderr) ** 2 for ai, f in zip(a, fits)))
        gaps.append(ConstraintGap(c.label or "constraint", value, float(c.b), err))
    return gaps


def gap_to_outer(
    sim: SimResult | Sequence[SimResult], region: RateRegion | DofRegion
) -> GapReport:
    """Compare measured rates (or regressed DoF slopes) against an outer region.

    A RateRegion takes a single SimResult and reports per-constraint rate
    slack; a DofRegion takes a power sweep of SimResults, regresses per-user
    slopes, and reports slope slack.  A constraint is flagged as violated
    when its slack is below -3 combined standard errors, which a genuinely
    simulated scheme must never trigger.
    """
    if isinstance(region, RateRegion):
        if not isinstance(sim, SimResult):
            raise ParameterError("rate-region comparison needs a single SimResult")
        if sim.k_users != region.dim:
            raise ParameterError(
                f"result has {sim.k_users} users, region has dim {region.dim}"
            )
        return GapReport(sim.scheme, tuple(_rate_region_gaps(sim, region)))
    if isinstance(region, DofRegion):
        if isinstance(sim, SimResult):
            raise ParameterError("DoF-region comparison needs a sweep of SimResults")
        sweep = list(sim)
        if not sweep:
            raise ParameterError("empty sweep")
        if any(s.k_users != region.dim for s in sweep):
            raise ParameterError("sweep user count does not match region dimension")
        return GapReport(sweep[0].scheme, tuple(_dof_region_gaps(sweep, region)))
    raise ParameterError(f"unsupported region type {type(region).__name__}")
