"""Explicit inductive proof traces for the sliding-window inequality.

The inequality (N-m) h(Y_1..Y_N | A) <= sum_i h(W_i | A) is proved by
induction on N for fixed m: the base case N = m+1 is subadditivity, and
each layer N -> N+1 merges Z = (Y_N, Y_{N+1}) into one variable, applies
the previous level to {Y_1, ..., Y_{N-1}, Z}, re-identifies the merged
windows, splits the leftover joint entropy by the chain rule, and drops
conditioning variables.  This module unrolls those layers into a single
linear chain of step records over the final variable set, so every
intermediate claim can be checked numerically on concrete entropy vectors.

Steps relate two linear functionals on the entropy space (dicts of
subset-mask -> Fraction); all '=' steps are coefficient-level identities
and the only genuine inequalities are subadditivity applications and
conditioning drops, which is exactly why the chain holds on every
polymatroid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .cone import EntropyVector, VarSet, window_mask, window_masks
from .errors import MathCheckError, ParameterError

Form = dict[int, Fraction]

RULE_SUBADDITIVITY = "subadditivity"
RULE_MERGE = "merge_decomposition"
RULE_REIDENTIFY = "window_reidentification"
RULE_CHAIN = "chain_rule"
RULE_DROP = "drop_conditioning"
RULE_ASSEMBLE = "window_assembly"


@dataclass(frozen=True)
class TraceStep:
    """One asserted relation lhs (=|<=) rhs between entropy functionals."""

    rule: str
    relation: str  # "=" or "<="
    lhs: Form
    rhs: Form
    layer: int  # window-host size N at which the step was introduced
    note: str = ""


def _add(dst: Form, src: Mapping[int, Fraction], scale: int = 1) -> None:
    for mask, c in src.items():
        v = dst.get(mask, Fraction(0)) + c * scale
        if v == 0:
            dst.pop(mask, None)
        else:
            dst[mask] = v


def _cond_h(mask: int, a_bit: int, scale: int = 1) -> Form:
    """Functional for scale * h(S | A) = scale * (h(S u A) - h(A))."""
    out: Form = {}
    _add(out, {mask | a_bit: Fraction(1), a_bit: Fraction(-1)}, scale)
    return out


def _cond_h_given(mask: int, given: int, a_bit: int) -> Form:
    """Functional for h(S | T, A) with S, T disjoint Y-masks."""
    out: Form = {}
    _add(out, {mask | given | a_bit: Fraction(1), given | a_bit: Fraction(-1)})
    return out


def _sum_forms(*forms: Form) -> Form:
    out: Form = {}
    for f in forms:
        _add(out, f)
    return out


def _map_mask(mask: int, n_old: int) -> int:
    """Un-merge Z: map a mask over {Y_1..Y_{n_old}, A} into {Y_1..Y_{n_old+1}, A}.

    Variable n_old stood for the pair (Y_{n_old}, Y_{n_old+1}); A moves from
    index n_old+1 to n_old+2.
    """
    out = 0
    for v in range(1, n_old + 2):
        if mask & (1 << (v - 1)):
            if v <= n_old - 1:
                out |= 1 << (v - 1)
            elif v == n_old:
                out |= (1 << (n_old - 1)) | (1 << n_old)
            else:  # A
                out |= 1 << (n_old + 1)
    return out


def _map_form(form: Form, n_old: int) -> Form:
    return {_map_mask(mask, n_old): c for mask, c in form.items()}


def _require_identity(lhs: Form, rhs: Form, context: str) -> None:
    if lhs != rhs:
        raise MathCheckError(f"internal trace identity failed at {context}")


def merged_window_identity(n_window: int, m: int) -> bool:
    """Check that un-merging Z sends windows m+1..N of level N to level N+1.

    For i in [m+1, N] the size-(N-m) cyclic window over {Y_1..Y_{N-1}, Z}
    must equal, after expanding Z = (Y_N, Y_{N+1}), the size-(N+1-m) cyclic
    window over Y_1..Y_{N+1} with the same start; compared as bitmasks.
    """
    _ = VarSet(n_window + 1)  # validates range
    if not (1 <= m <= n_window - 1):
        raise ParameterError(f"m={m} outside [1, {n_window - 1}]")
    for i in range(m + 1, n_window + 1):
        old = window_mask(n_window, i, n_window - m)
        mapped = _map_mask(old, n_window)
        new = window_mask(n_window + 1, i, n_window + 1 - m)
        if mapped != new:
            return False
    return True


def _base_chain(m: int) -> list[TraceStep]:
    """Base case N = m+1: h(Y_1..Y_N | A) <= sum_i h(Y_i | A)."""
    n = m + 1
    vs = VarSet(n + 1)
    a_bit = vs.bit(n + 1)
    full = (1 << n) - 1
    lhs = _cond_h(full, a_bit)
    rhs = _sum_forms(*(_cond_h(vs.bit(i), a_bit) for i in range(1, n + 1)))
    return [
        TraceStep(
            RULE_SUBADDITIVITY,
            "<=",
            lhs,
            rhs,
            layer=n,
            note="joint entropy is at most the sum of the parts' entropies",
        )
    ]


def _extend_chain(steps: list[TraceStep], n_old: int, m: int) -> list[TraceStep]:
    """Lift a verified chain for window host n_old to n_old + 1."""
    n_new = n_old + 1
    vs = VarSet(n_new + 1)
    a_bit = vs.bit(n_new + 1)
    full_new = (1 << n_new) - 1
    size_new = n_new - m

    def block(lo: int, hi: int) -> int:
        """Mask of Y_lo..Y_hi (empty when lo > hi)."""
        out = 0
        for v in range(lo, hi + 1):
            out |= vs.bit(v)
        return out

    carry = _cond_h(full_new, a_bit)
    out: list[TraceStep] = []

    # (7) regroup (n_new - m) h(Y_[1:n_new] | A) and hand the second term to
    # the previous level, with Z = (Y_{n_old}, Y_{n_old+1}) merged
    start = _cond_h(full_new, a_bit, scale=n_new - m)
    mapped_first = _sum_forms(carry, _map_form(steps[0].lhs, n_old))
    _require_identity(start, mapped_first, f"merge decomposition N={n_new}")
    out.append(
        TraceStep(
            RULE_MERGE,
            "=",
            start,
            mapped_first,
            layer=n_new,
            note=f"split off one copy of h(Y1..Y{n_new}|A); bound the remaining "
            f"{n_old - m}*h(Y1..Y{n_old - 1},Z|A), Z=(Y{n_old},Y{n_new}), "
            "by the previous level",
        )
    )

    # replay the previous level's chain with Z un-merged and the split-off
    # copy carried along
    for s in steps:
        out.append(
            TraceStep(
                s.rule,
                s.relation,
                _sum_forms(carry, _map_form(s.lhs, n_old)),
                _sum_forms(carry, _map_form(s.rhs, n_old)),
                layer=s.layer,
                note=s.note,
            )
        )
    current = out[-1].rhs

    # (8) windows m+1..n_old of the merged set are the size-(n_new - m)
    # windows of the un-merged set; windows 1..m never contain Z
    if not merged_window_identity(n_old, m):
        raise MathCheckError(f"window re-identification failed at N={n_new}")
    low_windows = [block(i, n_old - m + i - 1) for i in range(1, m + 1)]
    high_windows = [
        _cond_h(window_mask(n_new, i, size_new), a_bit)
        for i in range(m + 1, n_old + 1)
    ]
    reident = _sum_forms(
        carry, *(_cond_h(w, a_bit) for w in low_windows), *high_windows
    )
    _require_identity(current, reident, f"window re-identification N={n_new}")
    out.append(
        TraceStep(
            RULE_REIDENTIFY,
            "=",
            current,
            reident,
            layer=n_new,
            note=f"windows {m + 1}..{n_old} over the merged set coincide with "
            f"the size-{size_new} windows over Y1..Y{n_new}",
        )
    )
    current = reident

    # (9) chain rule: h(Y_[1:n_new]|A) = h(Y_[n_old-m+1:n_old] | T, A) + h(T|A)
    # with T the window starting at Y_{n_new}
    w_last = window_mask(n_new, n_new, size_new)  # {Y_n_new} u Y_[1:n_old-m]
    mid_block = block(n_old - m + 1, n_old)
    split = _sum_forms(
        _cond_h_given(mid_block, w_last, a_bit),
        _cond_h(w_last, a_bit),
        *(_cond_h(w, a_bit) for w in low_windows),
        *high_windows,
    )
    _require_identity(current, split, f"chain rule split N={n_new}")
    out.append(
        TraceStep(
            RULE_CHAIN,
            "=",
            current,
            split,
            layer=n_new,
            note="chain rule: peel the window starting at the new variable "
            "off the full joint entropy",
        )
    )
    current = split

    # (10) expand the peeled block element by element, conditioning each
    # Y_{n_old-m+i} on everything drawn before it
    cond_sets = [
        vs.bit(n_new) | block(1, n_old - m + i - 1) for i in range(1, m + 1)
    ]
    tail_terms = [
        _cond_h_given(vs.bit(n_old - m + i), cond_sets[i - 1], a_bit)
        for i in range(1, m + 1)
    ]
    expanded = _sum_forms(
        *tail_terms,
        _cond_h(w_last, a_bit),
        *(_cond_h(w, a_bit) for w in low_windows),
        *high_windows,
    )
    _require_identity(current, expanded, f"chain rule expansion N={n_new}")
    out.append(
        TraceStep(
            RULE_CHAIN,
            "=",
            current,
            expanded,
            layer=n_new,
            note="chain rule: write the peeled block in terms of its elements",
        )
    )
    current = expanded

    # (11) drop {Y_n_new} u Y_[1:i-1] from each condition, one term at a time
    kept_sets = [block(i, n_old - m + i - 1) for i in range(1, m + 1)]
    running = [t.copy() for t in tail_terms]
    for i in range(1, m + 1):
        replaced = _cond_h_given(vs.bit(n_old - m + i), kept_sets[i - 1], a_bit)
        nxt_terms = running[: i - 1] + [replaced] + running[i:]
        nxt = _sum_forms(
            *nxt_terms,
            _cond_h(w_last, a_bit),
            *(_cond_h(w, a_bit) for w in low_windows),
            *high_windows,
        )
        if i == 1:
            dropped = f"Y{n_new}"
        elif i == 2:
            dropped = f"Y{n_new},Y1"
        else:
            dropped = f"Y{n_new},Y1..Y{i - 1}"
        out.append(
            TraceStep(
                RULE_DROP,
                "<=",
                current,
                nxt,
                layer=n_new,
                note="conditioning does not increase entropy: drop "
                f"{dropped} from the condition of h(Y{n_old - m + i}|.)",
            )
        )
        running[i - 1] = replaced
        current = nxt

    # (12) reassemble h(Y_v|kept,A) + h(kept|A) = h(window_i|A) for i <= m
    final = _sum_forms(
        *(_cond_h(w, a_bit) for w in window_masks(n_new, size_new))
    )
    _require_identity(current, final, f"window assembly N={n_new}")
    out.append(
        TraceStep(
            RULE_ASSEMBLE,
            "=",
            current,
            final,
            layer=n_new,
            note=f"merge each conditional term with its window stub into the "
            f"size-{size_new} windows 1..{m}",
        )
    )
    return out


@dataclass(frozen=True)
class StepCheck:
    index: int
    rule: str
    relation: str
    residual: float  # rhs - lhs on the vector
    ok: bool


@dataclass(frozen=True)
class InductionTrace:
    """Unrolled proof chain for one (N, m) sliding-window instance.

    Functionals live over N+1 variables, the conditioning variable being
    index N+1.  The first functional is (N-m) h(Y_1..Y_N | A) and the last
    is the window sum; consecutive steps share their middle functional.
    """

    n_window: int
    m: int
    varset: VarSet
    steps: tuple[TraceStep, ...]

    @property
    def cond_var(self) -> int:
        return self.n_window + 1

    @property
    def first_form(self) -> Form:
        return self.steps[0].lhs

    @property
    def last_form(self) -> Form:
        return self.steps[-1].rhs

    def expected_endpoints(self) -> tuple[Form, Form]:
        """The two sides of the inequality as functionals, built directly."""
        a_bit = self.varset.bit(self.cond_var)
        full = (1 << self.n_window) - 1
        lhs = _cond_h(full, a_bit, scale=self.n_window - self.m)
        rhs = _sum_forms(
            *(
                _cond_h(w, a_bit)
                for w in window_masks(self.n_window, self.n_window - self.m)
            )
        )
        return lhs, rhs

    def evaluate(self, vec: EntropyVector, slack: float = 1e-9) -> list[StepCheck]:
        """Check every step on a concrete entropy vector.

        '=' steps must match within ``slack``; '<=' steps must have
        rhs - lhs >= -slack.  Polymatroids satisfy all of them.
        """
        if vec.varset.n != self.varset.n:
            raise ParameterError("entropy vector size does not match trace")

        def value(form: Form) -> float:
            return float(sum(float(c) * vec.values[mask] for mask, c in form.items()))

        checks = []
        for idx, s in enumerate(self.steps):
            residual = value(s.rhs) - value(s.lhs)
            ok = abs(residual) <= slack if s.relation == "=" else residual >= -slack
            checks.append(StepCheck(idx, s.rule, s.relation, residual, ok))
        return checks

    def holds_on(self, vec: EntropyVector, slack: float = 1e-9) -> bool:
        return all(c.ok for c in self.evaluate(vec, slack))

    def render_form(self, form: Form) -> str:
        parts = []
        for mask in sorted(form):
            c = form[mask]
            names = self.varset.describe(mask, self.cond_var)
            coeff = "" if c == 1 else ("-" if c == -1 else f"{c}*")
            parts.append(f"{coeff}h({names})")
        return " + ".join(parts).replace("+ -", "- ")

    def render(self) -> str:
        lines = [
            f"induction trace: N={self.n_window}, m={self.m}, "
            f"windows of size {self.n_window - self.m}, conditioning variable A",
            f"start: {self.render_form(self.first_form)}",
        ]
        for idx, s in enumerate(self.steps):
            lines.append(
                f"step {idx + 1:2d} [layer N={s.layer}] {s.rule} ({s.relation}): "
                f"{s.note}"
            )
            lines.append(f"   {s.relation} {self.render_form(s.rhs)}")
        return "\n".join(lines)


def induction_trace(n_window: int, m: int) -> InductionTrace:
    """Unroll the induction proof for the (N, m) sliding-window inequality.

    Builds the base case at N = m+1 and applies one extension layer per
    increment up to ``n_window``; every '=' step is verified as a
    coefficient identity during construction.
    """
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if n_window < m + 1:
        raise ParameterError(f"need N >= m+1, got N={n_window}, m={m}")
    _ = VarSet(n_window + 1)  # range check
    steps = _base_chain(m)
    for n in range(m + 1, n_window):
        steps = _extend_chain(steps, n, m)
    trace = InductionTrace(n_window, m, VarSet(n_window + 1), tuple(steps))
    lhs, rhs = trace.expected_endpoints()
    _require_identity(trace.first_form, lhs, "trace start")
    _require_identity(trace.last_form, rhs, "trace end")
    return trace
