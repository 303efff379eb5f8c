"""Entropic vectors over finite variable sets and Shannon-type inequalities.

A collection of n random variables induces a point in the (2^n - 1)-dimensional
space of joint entropies, one coordinate per nonempty subset.  Subsets are
indexed by bitmasks: variable i (1-based) owns bit i-1, so the full set is
mask 2^n - 1 and the empty set (mask 0, entropy 0 by convention) is never
stored.  When a conditioning variable A is present it occupies the highest
bit, and a conditional entropy h(S|A) always expands to h(S u {A}) - h({A}).

This module provides

* the elemental inequalities that generate the Shannon cone,
* the cyclic sliding-window inequality family
  sum_i h(W_i | A) >= (N-m) * h(Y_1..Y_N | A),
  where W_1..W_N are the cyclic windows of size N-m over Y_1..Y_N,
* entropy vectors of Gaussian densities (log-det polymatroids), used as
  numeric cross-checks for anything proved exactly elsewhere.

Entropies are in nats throughout; conversion to bits happens only at
output boundaries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .errors import ParameterError

MAX_VARS = 12

LN_2PIE = math.log(2.0 * math.pi * math.e)


@dataclass(frozen=True)
class VarSet:
    """Index space for joint entropies over ``n`` random variables."""

    n: int

    def __post_init__(self) -> None:
        if not (2 <= self.n <= MAX_VARS):
            raise ParameterError(
                f"variable count must be in [2, {MAX_VARS}], got {self.n}"
            )

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def n_subsets(self) -> int:
        """Number of nonempty subsets, i.e. the ambient dimension."""
        return (1 << self.n) - 1

    def bit(self, var: int) -> int:
        """Bitmask of the singleton {var}, var is 1-based."""
        if not (1 <= var <= self.n):
            raise ParameterError(f"variable index {var} out of range 1..{self.n}")
        return 1 << (var - 1)

    def mask_of(self, *variables: int) -> int:
        m = 0
        for v in variables:
            m |= self.bit(v)
        return m

    def subsets(self) -> Iterator[int]:
        """All nonempty subset masks in ascending order."""
        return iter(range(1, 1 << self.n))

    def describe(self, mask: int, cond_var: int | None = None) -> str:
        """Render a subset mask as e.g. 'Y1,Y3' (with 'A' for cond_var)."""
        names = []
        for v in range(1, self.n + 1):
            if mask & (1 << (v - 1)):
                names.append("A" if v == cond_var else f"Y{v}")
        return ",".join(names)


@dataclass(frozen=True, eq=False)
class EntropyVector:
    """A point in the joint-entropy space of a VarSet.

    ``values`` has length 2^n with values[0] == 0; entry at index ``mask``
    is the joint entropy (nats) of the subset encoded by ``mask``.
    """

    varset: VarSet
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (1 << self.varset.n,):
            raise ParameterError(
                f"expected {1 << self.varset.n} entries, got shape {vals.shape}"
            )
        vals = vals.copy()
        vals[0] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def h(self, mask: int) -> float:
        """Joint entropy of the subset ``mask``."""
        return float(self.values[mask])

    def cond_h(self, mask: int, given: int) -> float:
        """Conditional entropy h(mask | given) = h(mask u given) - h(given)."""
        return float(self.values[mask | given] - self.values[given])


@dataclass(frozen=True, eq=False)
class LinearInequality:
    """An assertion  sum_S coeffs[S] * h(S) >= 0  with exact rational coeffs."""

    varset: VarSet
    coeffs: Mapping[int, Fraction]
    name: str = ""

    def __post_init__(self) -> None:
        clean: dict[int, Fraction] = {}
        for mask, c in self.coeffs.items():
            if not (1 <= mask <= self.varset.full_mask):
                raise ParameterError(f"subset mask {mask} out of range")
            f = Fraction(c)
            if f != 0:
                clean[int(mask)] = f
        object.__setattr__(self, "coeffs", clean)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearInequality):
            return NotImplemented
        return self.varset.n == other.varset.n and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.varset.n, frozenset(self.coeffs.items())))

    def evaluate(self, vec: EntropyVector) -> float:
        """Value of the linear form on an entropy vector (>= 0 if it holds)."""
        if vec.varset.n != self.varset.n:
            raise ParameterError("entropy vector and inequality sizes differ")
        return float(
            sum(float(c) * vec.values[mask] for mask, c in self.coeffs.items())
        )

    def dense(self) -> np.ndarray:
        """Float coefficient vector indexed by mask-1, length 2^n - 1."""
        out = np.zeros(self.varset.n_subsets)
        for mask, c in self.coeffs.items():
            out[mask - 1] = float(c)
        return out

    def embed(self, n_new: int, var_map: Mapping[int, int]) -> "LinearInequality":
        """Re-house the inequality in a larger VarSet under a variable renaming.

        ``var_map`` sends each old 1-based variable index to its new index;
        it must be injective over the variables actually used.
        """
        new_vs = VarSet(n_new)
        used = set(var_map.values())
        if len(used) != len(var_map):
            raise ParameterError("variable map must be injective")
        coeffs: dict[int, Fraction] = {}
        for mask, c in self.coeffs.items():
            new_mask = 0
            for v in range(1, self.varset.n + 1):
                if mask & (1 << (v - 1)):
                    if v not in var_map:
                        raise ParameterError(f"variable {v} missing from map")
                    new_mask |= new_vs.bit(var_map[v])
            coeffs[new_mask] = coeffs.get(new_mask, Fraction(0)) + c
        return LinearInequality(new_vs, coeffs, name=self.name)


def elemental_inequalities(n: int) -> list[LinearInequality]:
    """The elemental generating set of the Shannon cone on n variables.

    Returns the n conditional-entropy forms h(X_i | rest) >= 0 followed by
    the C(n,2) * 2^(n-2) conditional mutual informations
    I(X_i; X_j | X_K) >= 0 over i < j and K a subset of the remaining
    variables.  Identifiers are stable across runs: ``monoII`` and
    ``miII-JJ-KKKK`` with K printed as a hex mask.
    """
    vs = VarSet(n)
    full = vs.full_mask
    out: list[LinearInequality] = []
    for i in range(1, n + 1):
        bi = vs.bit(i)
        out.append(
            LinearInequality(
                vs, {full: Fraction(1), full ^ bi: Fraction(-1)}, name=f"mono{i:02d}"
            )
        )
    for i, j in itertools.combinations(range(1, n + 1), 2):
        bi, bj = vs.bit(i), vs.bit(j)
        rest = [k for k in range(1, n + 1) if k not in (i, j)]
        for r in range(len(rest) + 1):
            for comb in itertools.combinations(rest, r):
                kmask = vs.mask_of(*comb) if comb else 0
                coeffs: dict[int, Fraction] = {}
                for mask, sign in (
                    (kmask | bi, 1),
                    (kmask | bj, 1),
                    (kmask | bi | bj, -1),
                    (kmask, -1),
                ):
                    if mask == 0:
                        continue
                    coeffs[mask] = coeffs.get(mask, Fraction(0)) + sign
                out.append(
                    LinearInequality(vs, coeffs, name=f"mi{i:02d}-{j:02d}-{kmask:04x}")
                )
    return out


def window_mask(n_vars: int, start: int, size: int) -> int:
    """Bitmask of the cyclic block {Y_start, ..., Y_(start+size-1)} mod n_vars."""
    if not (1 <= start <= n_vars):
        raise ParameterError(f"window start {start} out of range 1..{n_vars}")
    if not (1 <= size <= n_vars):
        raise ParameterError(f"window size {size} out of range 1..{n_vars}")
    m = 0
    for t in range(size):
        m |= 1 << ((start - 1 + t) % n_vars)
    return m


def window_masks(n_vars: int, size: int) -> list[int]:
    """The n_vars cyclic windows of a given size, by starting variable."""
    return [window_mask(n_vars, i, size) for i in range(1, n_vars + 1)]


def _validate_window_params(n_vars: int, m: int) -> None:
    if n_vars < 2:
        raise ParameterError(f"need at least 2 windowed variables, got {n_vars}")
    if not (1 <= m <= n_vars - 1):
        raise ParameterError(
            f"overlap deficit m={m} outside [1, {n_vars - 1}] for N={n_vars}"
        )


def sliding_window_inequality(
    n_vars: int, m: int, conditioned: bool = False
) -> LinearInequality:
    """The sliding-window entropy inequality for N variables and deficit m.

    Asserts  sum_{i=1..N} h(W_i | A) - (N-m) * h(Y_1..Y_N | A) >= 0  where
    W_i is the cyclic window of size N-m starting at Y_i.  With
    ``conditioned`` the inequality lives on N+1 variables, A being the
    highest-indexed one and every h(.|A) expanded via h(S u A) - h(A);
    otherwise A is absent and the VarSet has N variables.
    """
    _validate_window_params(n_vars, m)
    size = n_vars - m
    if not conditioned:
        vs = VarSet(n_vars)
        coeffs: dict[int, Fraction] = {}
        for wm in window_masks(n_vars, size):
            coeffs[wm] = coeffs.get(wm, Fraction(0)) + 1
        full = vs.full_mask
        coeffs[full] = coeffs.get(full, Fraction(0)) - size
        name = f"window-N{n_vars}-m{m}"
    else:
        vs = VarSet(n_vars + 1)
        a_bit = vs.bit(n_vars + 1)
        coeffs = {}

        def add_cond(mask: int, c: int) -> None:
            coeffs[mask | a_bit] = coeffs.get(mask | a_bit, Fraction(0)) + c
            coeffs[a_bit] = coeffs.get(a_bit, Fraction(0)) - c

        for wm in window_masks(n_vars, size):
            add_cond(wm, 1)
        add_cond((1 << n_vars) - 1, -size)
        name = f"window-N{n_vars}-m{m}-cond"
    return LinearInequality(vs, coeffs, name=name)


def gaussian_entropy_vector(cov: np.ndarray, min_eig: float = 1e-10) -> EntropyVector:
    """Differential-entropy vector of a real Gaussian with covariance ``cov``.

    h(S) = |S|/2 * ln(2*pi*e) + 1/2 * ln det(cov restricted to S).  The
    matrix must be symmetric positive definite (smallest eigenvalue above
    ``min_eig``).  These vectors satisfy every conditional-mutual-information
    inequality (hence submodularity and the whole sliding-window family), but
    being differential entropies they are monotone only when all conditional
    variances stay above 1/(2*pi*e); use e.g. cov = G G^T + I when a full
    polymatroid is needed.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ParameterError(f"covariance must be square, got shape {cov.shape}")
    n = cov.shape[0]
    vs = VarSet(n)
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ParameterError("covariance must be symmetric")
    if np.linalg.eigvalsh(cov).min() <= min_eig:
        raise ParameterError(
            f"covariance must be positive definite (min eigenvalue > {min_eig})"
        )
    values = np.zeros(1 << n)
    for mask in vs.subsets():
        idx = [v for v in range(n) if mask & (1 << v)]
        sub = cov[np.ix_(idx, idx)]
        sign, logdet = np.linalg.slogdet(sub)
        if sign <= 0:
            raise ParameterError("principal submatrix not positive definite")
        values[mask] = 0.5 * len(idx) * LN_2PIE + 0.5 * logdet
    return EntropyVector(vs, values)
