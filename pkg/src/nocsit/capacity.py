"""Monte Carlo estimation of ergodic log-det rates over Gaussian MIMO channels.

Channel entries are i.i.d. circularly-symmetric complex Gaussian CN(0,1)
(real and imaginary parts independent with variance 1/2 each, so the
per-entry second moment is 1).  Rates are in nats per channel use and come
from sum_i ln(1 + (P/M) lambda_i(H^H H)), evaluated through the eigenvalues
of the N x N Gram matrix rather than raw determinants.

Estimates are seeded and bit-reproducible: sampling is split into fixed-size
chunks, chunk k drawing from ``default_rng((seed..., k))``, and reduced in
chunk order, so the same (seed, n_samples) always yields the same result
regardless of how callers interleave other RNG use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import MathCheckError, ParameterError
from .regions import BcConfig

CHUNK = 4096

Seed = int | tuple[int, ...]


def _seed_tuple(seed: Seed, *extra: int) -> tuple[int, ...]:
    base = (seed,) if isinstance(seed, int) else tuple(seed)
    return base + extra


def sample_channel(m_tx: int, n_rx: int, rng: np.random.Generator) -> np.ndarray:
    """One M x N channel draw with i.i.d. CN(0,1) entries."""
    if m_tx < 1 or n_rx < 1:
        raise ParameterError("antenna counts must be >= 1")
    re = rng.standard_normal((m_tx, n_rx))
    im = rng.standard_normal((m_tx, n_rx))
    return (re + 1j * im) / math.sqrt(2.0)


def _sample_batch(m_tx: int, n_rx: int, count: int, rng: np.random.Generator) -> np.ndarray:
    re = rng.standard_normal((count, m_tx, n_rx))
    im = rng.standard_normal((count, m_tx, n_rx))
    return (re + 1j * im) / math.sqrt(2.0)


def _gram_eigenvalues(h_batch: np.ndarray) -> np.ndarray:
    """Eigenvalues of H^H H for a (count, M, N) batch; shape (count, N)."""
    gram = np.einsum("bij,bik->bjk", h_batch.conj(), h_batch)
    lam = np.linalg.eigvalsh(gram)
    if not np.all(np.isfinite(lam)):
        raise MathCheckError("non-finite eigenvalue in Gram matrix batch")
    return np.maximum(lam, 0.0)


def log_det_rate(h: np.ndarray, power: float) -> float:
    """ln det(I_N + (P/M) H^H H) for one channel draw, in nats."""
    h = np.asarray(h)
    if h.ndim != 2:
        raise ParameterError("channel must be a 2-D matrix")
    if power <= 0:
        raise ParameterError(f"power must be > 0, got {power}")
    m_tx = h.shape[0]
    lam = _gram_eigenvalues(h[None, :, :])[0]
    return float(np.sum(np.log1p((power / m_tx) * lam)))


@dataclass(frozen=True)
class CapacityEstimate:
    """Monte Carlo mean with its standard error, in nats per channel use."""

    mean: float
    stderr: float
    n_samples: int
    seed: Seed

    def scaled(self, factor: float) -> "CapacityEstimate":
        return CapacityEstimate(
            self.mean * factor, self.stderr * abs(factor), self.n_samples, self.seed
        )


def _chunk_sizes(n_samples: int) -> list[int]:
    full, rem = divmod(n_samples, CHUNK)
    return [CHUNK] * full + ([rem] if rem else [])


def _iter_channel_chunks(
    m_tx: int, n_rx: int, n_samples: int, seed: Seed
) -> Iterable[tuple[np.ndarray, np.random.Generator]]:
    if m_tx < 1 or n_rx < 1:
        raise ParameterError("antenna counts must be >= 1")
    for k, size in enumerate(_chunk_sizes(n_samples)):
        rng = np.random.default_rng(_seed_tuple(seed, k))
        yield _sample_batch(m_tx, n_rx, size, rng), rng


def _estimate(values: np.ndarray, n_samples: int, seed: Seed) -> CapacityEstimate:
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(len(values)))
    return CapacityEstimate(mean, stderr, n_samples, seed)


def ergodic_capacity(
    m_tx: int, n_rx: int, power: float, n_samples: int, seed: Seed
) -> CapacityEstimate:
    """Monte Carlo E[ln det(I + (P/M) H^H H)] with isotropic input covariance."""
    if n_samples < 100:
        raise ParameterError(f"need at least 100 samples, got {n_samples}")
    if power <= 0:
        raise ParameterError(f"power must be > 0, got {power}")
    rates = []
    for batch, _ in _iter_channel_chunks(m_tx, n_rx, n_samples, seed):
        lam = _gram_eigenvalues(batch)
        rates.append(np.sum(np.log1p((power / m_tx) * lam), axis=1))
    return _estimate(np.concatenate(rates), n_samples, seed)


@dataclass(frozen=True)
class DegenerateEigens:
    """All squared singular values equal to one fixed lambda."""

    lam: float

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ParameterError(f"eigenvalue must be >= 0, got {self.lam}")


@dataclass(frozen=True, eq=False)
class EmpiricalEigens:
    """Pooled squared-singular-value samples from some channel ensemble."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        s = np.array(self.samples, dtype=float).ravel()
        if s.size == 0:
            raise ParameterError("empirical eigenvalue spec needs samples")
        if np.any(s < 0):
            raise ParameterError("eigenvalue samples must be nonnegative")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)


EigenDistSpec = DegenerateEigens | EmpiricalEigens


def eigen_samples(
    m_tx: int, n_rx: int, n_samples: int, seed: Seed
) -> EmpiricalEigens:
    """Pool the unordered Gram eigenvalues of n_samples channel draws.

    Uses the same chunked draws as ergodic_capacity for the same
    (m_tx, n_rx, n_samples, seed), so per-draw identities carry over
    exactly; eigenvalues are shuffled within each chunk to kill the sorted
    order eigvalsh reports.
    """
    if n_samples < 100:
        raise ParameterError(f"need at least 100 samples, got {n_samples}")
    pools = []
    for batch, rng in _iter_channel_chunks(m_tx, n_rx, n_samples, seed):
        lam = _gram_eigenvalues(batch).ravel()
        pools.append(rng.permutation(lam))
    return EmpiricalEigens(np.concatenate(pools))


def theorem2_bound(q: EigenDistSpec, m_tx: int, power: float) -> CapacityEstimate:
    """Weighted-sum rate cap E_q[ln(1 + (P/M) lambda)] for a common eigenvalue law.

    Exact (zero stderr) for a degenerate spec; sample mean with stderr for an
    empirical one.
    """
    if power <= 0:
        raise ParameterError(f"power must be > 0, got {power}")
    if m_tx < 1:
        raise ParameterError("transmit antenna count must be >= 1")
    if isinstance(q, DegenerateEigens):
        return CapacityEstimate(
            math.log(1.0 + (power / m_tx) * q.lam), 0.0, 1, seed=0
        )
    vals = np.log1p((power / m_tx) * q.samples)
    return _estimate(vals, len(vals), seed=0)


@dataclass(frozen=True)
class RateRegion:
    """Finite-SNR rate region: optional per-user caps plus one weighted-sum cap.

    Constraints are R_i <= caps[i].mean and
    sum_i weights[i] * R_i <= sum_bound.mean; the stored stderrs let callers
    test membership up to Monte Carlo noise.
    """

    dim: int
    weights: tuple[Fraction, ...]
    sum_bound: CapacityEstimate
    per_user_caps: tuple[CapacityEstimate, ...] | None = None
    power: float = 0.0

    def __post_init__(self) -> None:
        if len(self.weights) != self.dim:
            raise ParameterError("weight vector dimension mismatch")
        if self.per_user_caps is not None and len(self.per_user_caps) != self.dim:
            raise ParameterError("per-user cap dimension mismatch")

    def export_lines(self, bits: bool = False) -> list[str]:
        scale = 1.0 / math.log(2.0) if bits else 1.0
        unit = "bits" if bits else "nats"
        lines = [f"dim {self.dim}  # rate units: {unit}"]
        if self.per_user_caps is not None:
            for i, cap in enumerate(self.per_user_caps):
                coeffs = " ".join("1" if j == i else "0" for j in range(self.dim))
                lines.append(
                    f"{coeffs} <= {cap.mean * scale:.12g}  # cap-user{i + 1}, "
                    f"stderr {cap.stderr * scale:.3g}"
                )
        coeffs = " ".join(str(w) for w in self.weights)
        lines.append(
            f"{coeffs} <= {self.sum_bound.mean * scale:.12g}  # weighted-sum, "
            f"stderr {self.sum_bound.stderr * scale:.3g}"
        )
        return lines


def _require_sorted_bc(cfg: BcConfig) -> None:
    if any(cfg.n_rx[i] < cfg.n_rx[i + 1] for i in range(cfg.k_users - 1)):
        raise ParameterError(
            "receive antenna counts must be nonincreasing; sort users first"
        )
    if cfg.m_tx < cfg.n_rx[0]:
        raise ParameterError(
            f"requires M >= max(N_i): M={cfg.m_tx}, N_1={cfg.n_rx[0]}"
        )


def bc_outer_region(
    cfg: BcConfig, power: float, n_samples: int, seed: Seed
) -> RateRegion:
    """Finite-SNR outer region for the sorted broadcast setup (M >= N_1 >= ...).

    Per-user caps are point-to-point ergodic capacities under isotropic
    input; the weighted-sum cap is the last (fewest-antenna) user's capacity
    divided by its rank r_K = N_K.  User i draws from seed (seed..., i).
    """
    _require_sorted_bc(cfg)
    caps = tuple(
        ergodic_capacity(cfg.m_tx, n, power, n_samples, _seed_tuple(seed, i + 1))
        for i, n in enumerate(cfg.n_rx)
    )
    r = cfg.r  # equals n_rx under the sorted premise
    weights = tuple(Fraction(1, ri) for ri in r)
    sum_bound = caps[-1].scaled(1.0 / r[-1])
    return RateRegion(cfg.k_users, weights, sum_bound, per_user_caps=caps, power=power)


def theorem2_region(cfg: BcConfig, q: EigenDistSpec, power: float) -> RateRegion:
    """CDIT capacity region for a common squared-singular-value law q.

    A single constraint sum_i R_i / r_i <= E_q[ln(1 + (P/M) lambda)]; no
    per-user caps.
    """
    _require_sorted_bc(cfg)
    bound = theorem2_bound(q, cfg.m_tx, power)
    weights = tuple(Fraction(1, ri) for ri in cfg.r)
    return RateRegion(cfg.k_users, weights, bound, per_user_caps=None, power=power)


@dataclass(frozen=True)
class KsComparison:
    user_a: int
    user_b: int
    statistic: float
    critical: float

    @property
    def same_law(self) -> bool:
        return self.statistic <= self.critical


@dataclass(frozen=True)
class CovarianceProbe:
    alternative: int
    diff_mean: float  # isotropic-rate minus alternative-rate, paired
    diff_stderr: float

    @property
    def ok(self) -> bool:
        return self.diff_mean >= -3.0 * self.diff_stderr


def _random_trace_p_covariance(
    m_tx: int, power: float, rng: np.random.Generator
) -> np.ndarray:
    a = (rng.standard_normal((m_tx, m_tx)) + 1j * rng.standard_normal((m_tx, m_tx)))
    sigma = a @ a.conj().T
    return power * sigma / np.trace(sigma).real


def covariance_optimality_probe(
    m_tx: int,
    n_rx: int,
    power: float,
    n_alternatives: int,
    n_samples: int,
    seed: Seed,
) -> list[CovarianceProbe]:
    """Paired comparison of isotropic input against random trace-P covariances.

    Same channel draws under both covariances; for isotropic-optimal
    ensembles every probe should satisfy diff_mean >= -3 stderr.
    """
    if n_samples < 100:
        raise ParameterError(f"need at least 100 samples, got {n_samples}")
    alt_rng = np.random.default_rng(_seed_tuple(seed, 0xA17))
    alternatives = [
        _random_trace_p_covariance(m_tx, power, alt_rng) for _ in range(n_alternatives)
    ]
    iso = (power / m_tx) * np.eye(m_tx)
    diffs = [[] for _ in range(n_alternatives)]
    eye = np.eye(n_rx)

    def rates_under(batch: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        inner = np.einsum("bji,jk,bkl->bil", batch.conj(), sigma, batch)
        sign, logdet = np.linalg.slogdet(eye + inner)
        if np.any(sign.real <= 0):
            raise MathCheckError("non-PD matrix in covariance probe")
        return logdet.real

    for batch, _ in _iter_channel_chunks(m_tx, n_rx, n_samples, seed):
        iso_rates = rates_under(batch, iso)
        for idx, sigma in enumerate(alternatives):
            diffs[idx].append(iso_rates - rates_under(batch, sigma))
    out = []
    for idx in range(n_alternatives):
        d = np.concatenate(diffs[idx])
        out.append(
            CovarianceProbe(
                idx,
                float(np.mean(d)),
                float(np.std(d, ddof=1) / math.sqrt(len(d))),
            )
        )
    return out


@dataclass(frozen=True)
class ThetaClassReport:
    """Statistical evidence that a set of channel shapes shares one eigenvalue law
    and is isotropic-input optimal."""

    ks_comparisons: tuple[KsComparison, ...]
    probes: tuple[CovarianceProbe, ...]

    @property
    def eigen_law_matches(self) -> bool:
        return all(c.same_law for c in self.ks_comparisons)

    @property
    def isotropic_ok(self) -> bool:
        return all(p.ok for p in self.probes)

    @property
    def passed(self) -> bool:
        return self.eigen_law_matches and self.isotropic_ok

    def lines(self) -> list[str]:
        out = []
        for c in self.ks_comparisons:
            verdict = "pass" if c.same_law else "FAIL"
            out.append(
                f"KS users {c.user_a}/{c.user_b}: D={c.statistic:.4f} "
                f"critical={c.critical:.4f} -> {verdict}"
            )
        for p in self.probes:
            verdict = "pass" if p.ok else "FAIL"
            out.append(
                f"covariance alt {p.alternative}: iso-minus-alt "
                f"{p.diff_mean:.5f} +- {p.diff_stderr:.5f} -> {verdict}"
            )
        out.append(f"class check: {'pass' if self.passed else 'FAIL'}")
        return out


def theta_class_report(
    m_tx: int,
    n_rx_list: Sequence[int],
    n_samples: int,
    seed: Seed,
    ks_threshold: float = 1.63,
    power: float = 10.0,
    n_alternatives: int = 20,
) -> ThetaClassReport:
    """Check the common-eigenvalue-law and isotropic-optimality class conditions.

    (a) pairwise two-sample Kolmogorov-Smirnov statistics between the pooled
    Gram eigenvalues of each user's (M, N_i) shape, compared against
    ks_threshold * sqrt((n1+n2)/(n1*n2)); (b) a covariance-optimality probe
    per distinct receive shape.  Results are flags in the report, never
    exceptions.
    """
    n_rx_list = _validate_theta_shapes(m_tx, n_rx_list)
    pools = {
        n: eigen_samples(m_tx, n, n_samples, _seed_tuple(seed, 0xE1, n)).samples
        for n in sorted(set(n_rx_list))
    }
    comparisons = []
    for i in range(len(n_rx_list)):
        for j in range(i + 1, len(n_rx_list)):
            x, y = pools[n_rx_list[i]], pools[n_rx_list[j]]
            stat = float(stats.ks_2samp(x, y).statistic)
            critical = ks_threshold * math.sqrt((len(x) + len(y)) / (len(x) * len(y)))
            comparisons.append(KsComparison(i + 1, j + 1, stat, critical))
    probes: list[CovarianceProbe] = []
    for n in sorted(set(n_rx_list)):
        probes.extend(
            covariance_optimality_probe(
                m_tx, n, power, n_alternatives, n_samples, _seed_tuple(seed, 0xC0, n)
            )
        )
    return ThetaClassReport(tuple(comparisons), tuple(probes))


def _validate_theta_shapes(m_tx: int, n_rx_list: Sequence[int]) -> tuple[int, ...]:
    shapes = tuple(int(n) for n in n_rx_list)
    if not shapes:
        raise ParameterError("need at least one receive shape")
    if any(shapes[i] < shapes[i + 1] for i in range(len(shapes) - 1)):
        raise ParameterError("receive antenna counts must be nonincreasing")
    if any(n > m_tx or n < 1 for n in shapes):
        raise ParameterError("receive counts must satisfy 1 <= N_i <= M")
    return shapes


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares slope of rate against ln P."""

    slope: float
    intercept: float
    slope_stderr: float
    residual_rms: float
    n_points: int

    def __str__(self) -> str:
        return (
            f"slope {self.slope:.4f} +- {self.slope_stderr:.4f} per ln P "
            f"(intercept {self.intercept:.3f}, residual rms {self.residual_rms:.3g}, "
            f"{self.n_points} points)"
        )


def dof_slope(points: Sequence[tuple[float, float]]) -> SlopeFit:
    """Regress rate (nats) on ln P over a power sweep.

    Needs at least 3 points spanning at least two decades of P; the slope is
    the measured DoF.
    """
    if len(points) < 3:
        raise ParameterError(f"need at least 3 sweep points, got {len(points)}")
    p_vals = np.array([p for p, _ in points], dtype=float)
    if np.any(p_vals <= 0):
        raise ParameterError("powers must be positive")
    if p_vals.max() / p_vals.min() < 100 * (1 - 1e-9):
        raise ParameterError("sweep must span at least two decades of power")
    x = np.log(p_vals)
    y = np.array([r for _, r in points], dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = len(points) - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    sxx = float(np.sum((x - x.mean()) ** 2))
    return SlopeFit(
        float(slope),
        float(intercept),
        math.sqrt(s2 / sxx),
        math.sqrt(float(np.mean(resid**2))),
        len(points),
    )
