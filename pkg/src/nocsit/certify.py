"""LP certificates that a linear entropy inequality is Shannon-type.

An inequality ``t . h >= 0`` is Shannon-type when it is a nonnegative
combination of the elemental inequalities.  The search runs in floats
(scipy's HiGHS), but a certificate is only ever accepted after an exact
rational replay: the multipliers are reconstructed as Fractions and the
combination must reproduce the target coefficient-for-coefficient, with
zero tolerance.  A failed replay is repaired by re-solving the equality
system exactly on the LP support; it is never silently accepted.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, TextIO

import numpy as np
from scipy.optimize import linprog

from .cone import LinearInequality, VarSet, elemental_inequalities, sliding_window_inequality
from .errors import MathCheckError, ParameterError

# limit_denominator bound when rationalizing float LP multipliers
MAX_DENOMINATOR = 1 << 16

_SUPPORT_TOL = 1e-11


class NotShannonProvable(MathCheckError):
    """No elemental combination proves the target.

    Means the inequality is either not Shannon-type or simply false; the LP
    status string is kept for diagnosis.
    """

    def __init__(self, target: LinearInequality, lp_status: str):
        self.target = target
        self.lp_status = lp_status
        super().__init__(
            f"no elemental certificate for '{target.name or 'target'}': {lp_status}"
        )


class CertificateReplayError(MathCheckError):
    """Exact rational replay of a certificate did not reproduce the target."""


@dataclass
class ProofCertificate:
    """Nonnegative rational multipliers over elemental-inequality identifiers."""

    target: LinearInequality
    multipliers: dict[str, Fraction]
    lp_iterations: int = 0

    @property
    def size(self) -> int:
        return len(self.multipliers)


def _combine(
    multipliers: dict[str, Fraction], elementals: Iterable[LinearInequality]
) -> dict[int, Fraction]:
    """Exact coefficients of sum_e y_e * elemental_e."""
    by_name = {e.name: e for e in elementals}
    acc: dict[int, Fraction] = {}
    for name, y in multipliers.items():
        if name not in by_name:
            raise CertificateReplayError(f"unknown elemental id '{name}'")
        if y < 0:
            raise CertificateReplayError(f"negative multiplier on '{name}'")
        if y == 0:
            continue
        for mask, c in by_name[name].coeffs.items():
            acc[mask] = acc.get(mask, Fraction(0)) + y * c
    return {mask: c for mask, c in acc.items() if c != 0}


def check_replay(cert: ProofCertificate) -> None:
    """Exactly replay the certificate; raise CertificateReplayError on mismatch."""
    elems = elemental_inequalities(cert.target.varset.n)
    combined = _combine(cert.multipliers, elems)
    if combined != dict(cert.target.coeffs):
        raise CertificateReplayError(
            f"replay of '{cert.target.name or 'target'}' does not match target"
        )


def _solve_exact_nonneg(
    columns: list[dict[int, Fraction]], rhs: dict[int, Fraction], dim: int
) -> list[Fraction] | None:
    """Solve sum_j x_j * col_j = rhs exactly with x >= 0, or return None.

    Plain fraction Gauss-Jordan on the (dim x len(columns)) system; free
    variables are pinned to zero, so this recovers the basic solution the
    float LP found, without its roundoff.
    """
    ncols = len(columns)
    rows = [[Fraction(0)] * (ncols + 1) for _ in range(dim)]
    for j, col in enumerate(columns):
        for mask, c in col.items():
            rows[mask - 1][j] = c
    for mask, c in rhs.items():
        rows[mask - 1][ncols] = c

    pivot_of_col: dict[int, int] = {}
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, dim) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c]
        rows[r] = [v / inv for v in rows[r]]
        for i in range(dim):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivot_of_col[c] = r
        r += 1
        if r == dim:
            break
    # consistency: zero rows must have zero rhs
    for i in range(r, dim):
        if rows[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for c, pr in pivot_of_col.items():
        x[c] = rows[pr][ncols]
    if any(v < 0 for v in x):
        return None
    return x


def verify_shannon_type(target: LinearInequality) -> ProofCertificate:
    """Find and exactly verify an elemental certificate for ``target``.

    Phase 1 is a float LP (minimize the multiplier sum subject to the exact
    coefficient-matching equalities, multipliers >= 0).  Phase 2 rounds the
    multipliers to small-denominator rationals and replays exactly; if the
    rounding misses, the equality system is re-solved exactly over the LP
    support.  Raises NotShannonProvable when the LP is infeasible and
    CertificateReplayError when no exact reconstruction succeeds.
    """
    n = target.varset.n
    elems = elemental_inequalities(n)
    dim = target.varset.n_subsets
    a_eq = np.zeros((dim, len(elems)))
    for col, e in enumerate(elems):
        for mask, c in e.coeffs.items():
            a_eq[mask - 1, col] = float(c)
    b_eq = target.dense()
    res = linprog(
        np.ones(len(elems)), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs"
    )
    if not res.success:
        raise NotShannonProvable(target, res.message.strip() or f"status {res.status}")
    nit = int(getattr(res, "nit", 0))

    # rational rounding, then exact replay
    mult = {
        elems[j].name: Fraction(x).limit_denominator(MAX_DENOMINATOR)
        for j, x in enumerate(res.x)
        if x > _SUPPORT_TOL
    }
    cert = ProofCertificate(target, {k: v for k, v in mult.items() if v > 0}, nit)
    try:
        check_replay(cert)
        return cert
    except CertificateReplayError:
        pass

    # exact repair on the LP support
    support = [j for j, x in enumerate(res.x) if x > _SUPPORT_TOL]
    columns = [dict(elems[j].coeffs) for j in support]
    x_exact = _solve_exact_nonneg(columns, dict(target.coeffs), dim)
    if x_exact is None:
        raise CertificateReplayError(
            f"float LP succeeded for '{target.name or 'target'}' "
            "but no exact nonnegative reconstruction was found"
        )
    cert = ProofCertificate(
        target,
        {elems[j].name: x for j, x in zip(support, x_exact) if x > 0},
        nit,
    )
    check_replay(cert)
    return cert


@dataclass(frozen=True)
class LemmaInstance:
    """One certified sliding-window instance in a family report."""

    n_window: int
    m: int
    conditioned: bool
    certificate_size: int
    lp_iterations: int


@dataclass
class LemmaFamilyReport:
    """Certification record for all (N, m) sliding-window instances."""

    n_max: int
    instances: list[LemmaInstance] = field(default_factory=list)

    @property
    def all_certified(self) -> bool:
        return len(self.instances) == self.n_max * (self.n_max - 1)

    def lines(self) -> list[str]:
        out = [f"sliding-window certification up to N={self.n_max}"]
        for inst in self.instances:
            form = "conditioned" if inst.conditioned else "unconditioned"
            out.append(
                f"N={inst.n_window} m={inst.m} {form:>13}: certified, "
                f"{inst.certificate_size} multipliers, {inst.lp_iterations} LP pivots"
            )
        out.append(f"{len(self.instances)} instances certified")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())


def verify_lemma_family(n_max: int) -> LemmaFamilyReport:
    """Certify the sliding-window inequality for all 2 <= N <= n_max, 1 <= m <= N-1.

    Both the unconditioned and the conditioned form of every instance must
    receive an exactly-replayed certificate; any failure raises (a failure
    here would falsify the inequality family, so it is never soft).
    Conditioned instances live on N+1 variables, hence n_max <= 7.
    """
    if not (2 <= n_max <= 7):
        raise ParameterError(f"n_max must be in [2, 7], got {n_max}")
    report = LemmaFamilyReport(n_max)
    for n_window in range(2, n_max + 1):
        for m in range(1, n_window):
            for conditioned in (False, True):
                target = sliding_window_inequality(n_window, m, conditioned)
                cert = verify_shannon_type(target)
                report.instances.append(
                    LemmaInstance(
                        n_window, m, conditioned, cert.size, cert.lp_iterations
                    )
                )
    return report


def _format_fraction(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _parse_fraction(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"malformed rational {tok!r}") from exc


def write_certificate(cert: ProofCertificate, stream: TextIO) -> None:
    """Serialize a certificate to the line-oriented text format.

    Header: ``n=<n> target=<c_1> <c_2> ... <c_(2^n-1)>`` giving every target
    coefficient in subset-bitmask order; then one ``<elemental-id> <p>/<q>``
    line per multiplier, sorted by id for diffability.
    """
    n = cert.target.varset.n
    coeffs = [
        _format_fraction(cert.target.coeffs.get(mask, Fraction(0)))
        for mask in range(1, 1 << n)
    ]
    stream.write(f"n={n} target={' '.join(coeffs)}\n")
    for name in sorted(cert.multipliers):
        stream.write(f"{name} {_format_fraction(cert.multipliers[name])}\n")


def certificate_text(cert: ProofCertificate) -> str:
    buf = io.StringIO()
    write_certificate(cert, buf)
    return buf.getvalue()


def read_certificate(stream: TextIO) -> ProofCertificate:
    """Parse and exactly re-verify a certificate written by write_certificate."""
    header = stream.readline().strip()
    if not header.startswith("n=") or " target=" not in header:
        raise ParameterError("malformed certificate header")
    n_part, target_part = header.split(" target=", 1)
    try:
        n = int(n_part[2:])
    except ValueError as exc:
        raise ParameterError(f"malformed variable count {n_part!r}") from exc
    vs = VarSet(n)
    raw = target_part.split()
    if len(raw) != vs.n_subsets:
        raise ParameterError(
            f"expected {vs.n_subsets} target coefficients, got {len(raw)}"
        )
    coeffs = {
        mask: _parse_fraction(tok) for mask, tok in zip(range(1, 1 << n), raw)
    }
    target = LinearInequality(vs, coeffs, name="imported")
    multipliers: dict[str, Fraction] = {}
    for line in stream:
        line = line.strip()
        if not line:
            continue
        name, _, frac = line.partition(" ")
        if not frac:
            raise ParameterError(f"malformed multiplier line: {line!r}")
        multipliers[name] = _parse_fraction(frac)
    cert = ProofCertificate(target, multipliers)
    check_replay(cert)
    return cert
