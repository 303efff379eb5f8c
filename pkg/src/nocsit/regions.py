"""DoF region polytopes for broadcast and interference configurations.

Regions are halfspace-represented: exact rational constraint rows a . d <= b
over the nonnegative orthant.  Geometry queries evaluate in floats; vertex
enumeration solves the K x K subsystems exactly in rational arithmetic (the
constraint data is rational, so vertices are too), which keeps the small
regions handled here free of roundoff artifacts.
"""

from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import MathCheckError, ParameterError

DofPoint = tuple[float, ...]


class UnboundedRegionError(MathCheckError):
    """A region that should be bounded is not."""


CONTAINS_SLACK = 1e-12
MAX_VERTEX_DIM = 8


def _validate_counts(values: Sequence[int], label: str) -> tuple[int, ...]:
    vals = tuple(int(v) for v in values)
    if not vals:
        raise ParameterError(f"{label} must be nonempty")
    if any(v < 1 for v in vals):
        raise ParameterError(f"all {label} must be >= 1, got {vals}")
    return vals


@dataclass(frozen=True)
class BcConfig:
    """One transmitter with ``m_tx`` antennas serving K receivers."""

    m_tx: int
    n_rx: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.m_tx < 1:
            raise ParameterError(f"transmit antenna count must be >= 1, got {self.m_tx}")
        object.__setattr__(self, "n_rx", _validate_counts(self.n_rx, "receive antenna counts"))

    @property
    def k_users(self) -> int:
        return len(self.n_rx)

    @property
    def r(self) -> tuple[int, ...]:
        """Per-user spatial rank r_i = min(M, N_i)."""
        return tuple(min(self.m_tx, n) for n in self.n_rx)


@dataclass(frozen=True)
class IcConfig:
    """K transmitter-receiver pairs with per-pair antenna counts."""

    m_tx: tuple[int, ...]
    n_rx: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "m_tx", _validate_counts(self.m_tx, "transmit antenna counts"))
        object.__setattr__(self, "n_rx", _validate_counts(self.n_rx, "receive antenna counts"))
        if len(self.m_tx) != len(self.n_rx):
            raise ParameterError("transmit and receive antenna lists must have equal length")
        if len(self.m_tx) < 2:
            raise ParameterError("interference configuration needs K >= 2 users")

    @property
    def k_users(self) -> int:
        return len(self.m_tx)

    @property
    def m_total(self) -> int:
        return sum(self.m_tx)


class TightnessClass(enum.Enum):
    """Which achievability argument, if any, closes the K-user outer bound."""

    ALL_N_LE_M = "AllNleM"
    EQUAL_N_GE_EQUAL_M = "EqualNgeEqualM"
    UNKNOWN = "Unknown"


def _equal_n_ge_equal_m(cfg: IcConfig) -> bool:
    return (
        len(set(cfg.n_rx)) == 1
        and len(set(cfg.m_tx)) == 1
        and cfg.n_rx[0] >= cfg.m_tx[0]
    )


def tightness_class(cfg: IcConfig) -> TightnessClass:
    """Classify an IC configuration by which bound-closing scheme applies.

    ALL_N_LE_M (N_i <= M_i for every pair, closed by time sharing) wins when
    both conditions hold; EQUAL_N_GE_EQUAL_M is the receive zero-forcing
    class; UNKNOWN means no tightness is asserted.
    """
    if all(n <= m for n, m in zip(cfg.n_rx, cfg.m_tx)):
        return TightnessClass.ALL_N_LE_M
    if _equal_n_ge_equal_m(cfg):
        return TightnessClass.EQUAL_N_GE_EQUAL_M
    return TightnessClass.UNKNOWN


@dataclass(frozen=True)
class Constraint:
    """One halfspace a . d <= b with exact rational data."""

    a: tuple[Fraction, ...]
    b: Fraction
    label: str = ""

    def violation(self, point: Sequence[float]) -> float:
        """a . p - b  (positive means violated)."""
        return float(sum(float(c) * x for c, x in zip(self.a, point)) - float(self.b))


@dataclass(frozen=True)
class DofRegion:
    """Bounded polytope { d >= 0 : a_j . d <= b_j for all j }."""

    dim: int
    constraints: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        for c in self.constraints:
            if len(c.a) != self.dim:
                raise ParameterError("constraint dimension mismatch")

    def contains(self, point: Sequence[float], slack: float = CONTAINS_SLACK) -> bool:
        """Membership within absolute slack, nonnegativity included."""
        p = tuple(float(x) for x in point)
        if len(p) != self.dim:
            raise ParameterError(f"point has dim {len(p)}, region has dim {self.dim}")
        if any(x < -slack for x in p):
            return False
        return all(c.violation(p) <= slack for c in self.constraints)

    def _facets(self) -> list[tuple[tuple[Fraction, ...], Fraction]]:
        rows = [(c.a, c.b) for c in self.constraints]
        for i in range(self.dim):
            a = tuple(Fraction(-1) if j == i else Fraction(0) for j in range(self.dim))
            rows.append((a, Fraction(0)))  # -d_i <= 0
        return rows

    def vertices(self) -> list[DofPoint]:
        """Exact vertex set, enumerated over all dim-subsets of facets.

        Each subsystem is solved in rational arithmetic; singular subsets are
        skipped, infeasible intersections dropped, duplicates (which are exact
        here) merged.  Output is sorted lexicographically.
        """
        if self.dim > MAX_VERTEX_DIM:
            raise ParameterError(f"vertex enumeration limited to dim <= {MAX_VERTEX_DIM}")
        for i in range(self.dim):
            if not any(c.a[i] > 0 for c in self.constraints):
                raise UnboundedRegionError(
                    f"coordinate {i + 1} is unbounded; not a valid DoF region"
                )
        facets = self._facets()
        seen: set[tuple[Fraction, ...]] = set()
        for subset in itertools.combinations(facets, self.dim):
            sol = _solve_square_exact([row[0] for row in subset], [row[1] for row in subset])
            if sol is None:
                continue
            if any(x < 0 for x in sol):
                continue
            if all(
                sum(ai * xi for ai, xi in zip(a, sol)) <= b for a, b in facets
            ):
                seen.add(tuple(sol))
        return sorted(tuple(float(x) for x in v) for v in seen)

    def export_lines(self) -> list[str]:
        """Text form: 'dim K' then one 'a_1 ... a_K <= b' line per constraint."""
        lines = [f"dim {self.dim}"]
        for c in self.constraints:
            coeffs = " ".join(str(x) for x in c.a)
            suffix = f"  # {c.label}" if c.label else ""
            lines.append(f"{coeffs} <= {c.b}{suffix}")
        return lines


def _solve_square_exact(
    rows: list[tuple[Fraction, ...]], rhs: list[Fraction]
) -> list[Fraction] | None:
    """Solve a K x K rational system by Gauss-Jordan; None when singular."""
    k = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(k):
        pivot = next((i for i in range(col, k) if aug[i][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = aug[col][col]
        aug[col] = [v / inv for v in aug[col]]
        for i in range(k):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    return [aug[i][k] for i in range(k)]


def bc_dof_region(cfg: BcConfig) -> DofRegion:
    """DoF region of the no-CSIT broadcast setup: sum_i d_i / r_i <= 1."""
    r = cfg.r
    a = tuple(Fraction(1, ri) for ri in r)
    return DofRegion(
        cfg.k_users, (Constraint(a, Fraction(1), label="weighted-sum"),)
    )


def ic2_outer_region(cfg: IcConfig) -> DofRegion:
    """Two-user IC outer bound, stated for N_1 <= N_2.

    With r_i = min(M_2, N_i):  d_i <= min(M_i, N_i) and
    d_1/r_1 + d_2/r_2 <= min(N_1, M_1 + M_2) / r_1.  Callers with N_1 > N_2
    should relabel via relabel_ic2 first.
    """
    if cfg.k_users != 2:
        raise ParameterError("ic2_outer_region requires exactly 2 users")
    n1, n2 = cfg.n_rx
    m1, m2 = cfg.m_tx
    if n1 > n2:
        raise ParameterError(
            "ic2_outer_region requires N1 <= N2; sort users with relabel_ic2 first"
        )
    r1, r2 = min(m2, n1), min(m2, n2)
    bound = Fraction(min(n1, m1 + m2), r1)
    return DofRegion(
        2,
        (
            Constraint((Fraction(1), Fraction(0)), Fraction(min(m1, n1)), label="cap-user1"),
            Constraint((Fraction(0), Fraction(1)), Fraction(min(m2, n2)), label="cap-user2"),
            Constraint((Fraction(1, r1), Fraction(1, r2)), bound, label="weighted-sum"),
        ),
    )


def ick_outer_region(cfg: IcConfig) -> DofRegion:
    """K-user IC outer bound via full transmitter cooperation.

    d_i <= min(M_i, N_i) per user plus sum_i d_i / min(M_T, N_i) <= 1 with
    M_T the total transmit antenna count.
    """
    k = cfg.k_users
    m_total = cfg.m_total
    constraints = [
        Constraint(
            tuple(Fraction(1) if j == i else Fraction(0) for j in range(k)),
            Fraction(min(cfg.m_tx[i], cfg.n_rx[i])),
            label=f"cap-user{i + 1}",
        )
        for i in range(k)
    ]
    a = tuple(Fraction(1, min(m_total, n)) for n in cfg.n_rx)
    constraints.append(Constraint(a, Fraction(1), label="weighted-sum"))
    return DofRegion(k, tuple(constraints))


def relabel_ic2(cfg: IcConfig) -> tuple[IcConfig, tuple[int, int]]:
    """Sort a 2-user IC by receive antenna count, ascending and stable.

    Returns the sorted config and the permutation p with p[j] = original
    1-based user index occupying sorted slot j; ties keep original order.
    """
    if cfg.k_users != 2:
        raise ParameterError("relabel_ic2 requires exactly 2 users")
    order = sorted(range(2), key=lambda i: (cfg.n_rx[i], i))
    perm = tuple(i + 1 for i in order)
    sorted_cfg = IcConfig(
        tuple(cfg.m_tx[i] for i in order), tuple(cfg.n_rx[i] for i in order)
    )
    return sorted_cfg, perm


def apply_permutation(region: DofRegion, perm: Sequence[int]) -> DofRegion:
    """Express a region built under a relabeling back in original coordinates.

    ``perm`` is the relabel_ic2 convention: perm[j] = original 1-based user
    index at sorted slot j.  Constraint coefficients are permuted accordingly
    and per-user cap labels renamed to the original indices.
    """
    if sorted(perm) != list(range(1, region.dim + 1)):
        raise ParameterError(f"not a permutation of 1..{region.dim}: {perm}")
    cols = [perm.index(i + 1) for i in range(region.dim)]
    constraints = []
    for c in region.constraints:
        a = tuple(c.a[cols[i]] for i in range(region.dim))
        label = c.label
        match = re.fullmatch(r"cap-user(\d+)", label)
        if match:
            label = f"cap-user{perm[int(match.group(1)) - 1]}"
        constraints.append(Constraint(a, c.b, label))
    return DofRegion(region.dim, tuple(constraints))


@dataclass(frozen=True)
class Schedule:
    """Per-user time-sharing fractions, optionally realized over a frame."""

    fractions: tuple[float, ...]
    frame: int | None = None
    slots: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        fr = tuple(float(a) for a in self.fractions)
        if any(a < 0 for a in fr):
            raise ParameterError("schedule fractions must be nonnegative")
        if sum(fr) > 1 + 1e-12:
            raise ParameterError(f"schedule fractions sum to {sum(fr)} > 1")
        object.__setattr__(self, "fractions", fr)
        if (self.frame is None) != (self.slots is None):
            raise ParameterError("frame and slots must be given together")
        if self.slots is not None:
            if len(self.slots) != len(fr):
                raise ParameterError("slot list length mismatch")
            if sum(self.slots) > self.frame:
                raise ParameterError("slot counts exceed frame length")

    @property
    def k_users(self) -> int:
        return len(self.fractions)

    def realize(self, frame: int) -> tuple[int, ...]:
        """Integer slot counts over ``frame`` by largest-remainder rounding.

        Totals never exceed the frame and each count is within one slot of
        fraction * frame.
        """
        if self.slots is not None and self.frame == frame:
            return self.slots
        if frame < 1:
            raise ParameterError("frame length must be >= 1")
        exact = [a * frame for a in self.fractions]
        base = [math.floor(x) for x in exact]
        target = min(frame, round(sum(exact)))
        leftovers = sorted(
            range(len(exact)), key=lambda i: (exact[i] - base[i], i), reverse=True
        )
        extra = target - sum(base)
        counts = list(base)
        for i in leftovers[:max(extra, 0)]:
            counts[i] += 1
        return tuple(counts)


def time_sharing_schedule(
    cfg: BcConfig, point: Sequence[float], frame: int | None = None
) -> Schedule:
    """Schedule realizing a feasible DoF point: alpha_i = d_i / r_i.

    Raises for points outside the region, naming the most-violated
    constraint and the excess.
    """
    region = bc_dof_region(cfg)
    p = tuple(float(x) for x in point)
    if not region.contains(p):
        neg = [x for x in p if x < -CONTAINS_SLACK]
        if neg:
            raise ParameterError(f"DoF point has negative coordinates: {p}")
        worst = max(region.constraints, key=lambda c: c.violation(p))
        raise ParameterError(
            f"DoF point outside region: constraint '{worst.label}' exceeded "
            f"by {worst.violation(p):.6g}"
        )
    fractions = tuple(d / r for d, r in zip(p, cfg.r))
    if frame is None:
        return Schedule(fractions)
    sched = Schedule(fractions)
    return Schedule(fractions, frame=frame, slots=sched.realize(frame))
