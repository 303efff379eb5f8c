"""Certificate search, exact replay, and the text format."""

import io
from fractions import Fraction

import numpy as np
import pytest

from nocsit import (
    LinearInequality,
    NotShannonProvable,
    VarSet,
    gaussian_entropy_vector,
    read_certificate,
    sliding_window_inequality,
    verify_lemma_family,
    verify_shannon_type,
    write_certificate,
)
from nocsit.certify import CertificateReplayError, ProofCertificate, check_replay
from nocsit.errors import ParameterError


def test_subadditivity_certificate_is_the_elemental():
    cert = verify_shannon_type(sliding_window_inequality(2, 1))
    assert cert.multipliers == {"mi01-02-0000": Fraction(1)}
    check_replay(cert)


def test_three_window_certificate_exists_and_replays():
    cert = verify_shannon_type(sliding_window_inequality(3, 1))
    assert all(v > 0 for v in cert.multipliers.values())
    check_replay(cert)


def test_false_inequality_not_provable():
    vs = VarSet(2)
    target = LinearInequality(vs, {1: -1}, name="minus-entropy")
    with pytest.raises(NotShannonProvable) as exc:
        verify_shannon_type(target)
    assert exc.value.lp_status


def test_certified_targets_hold_on_gaussians():
    # soundness spot check: a certified inequality can never be violated by
    # a polymatroid, so evaluate the target on random log-det vectors
    target = sliding_window_inequality(4, 2, conditioned=True)
    verify_shannon_type(target)
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = rng.standard_normal((5, 5))
        vec = gaussian_entropy_vector(g @ g.T + 1e-3 * np.eye(5))
        assert target.evaluate(vec) >= -1e-9


def test_lemma_family_small():
    report = verify_lemma_family(3)
    assert len(report.instances) == 6  # 3 (N, m) pairs x 2 forms
    assert report.all_certified
    assert {(i.n_window, i.m) for i in report.instances} == {(2, 1), (3, 1), (3, 2)}
    text = str(report)
    assert "6 instances certified" in text


@pytest.mark.parametrize("bad", [1, 0, 8])
def test_lemma_family_rejects_bad_bound(bad):
    with pytest.raises(ParameterError):
        verify_lemma_family(bad)


def test_certificate_roundtrip():
    cert = verify_shannon_type(sliding_window_inequality(3, 1, conditioned=True))
    buf = io.StringIO()
    write_certificate(cert, buf)
    text = buf.getvalue()
    # header carries n and every coefficient in bitmask order
    header = text.splitlines()[0]
    assert header.startswith("n=4 target=")
    assert len(header.split("target=")[1].split()) == 15
    # multiplier lines are sorted for diffability
    ids = [line.split()[0] for line in text.splitlines()[1:]]
    assert ids == sorted(ids)

    loaded = read_certificate(io.StringIO(text))
    assert loaded.multipliers == cert.multipliers
    assert loaded.target == cert.target

    # serialization is deterministic
    buf2 = io.StringIO()
    write_certificate(verify_shannon_type(cert.target), buf2)
    assert buf2.getvalue() == text


def test_tampered_certificate_rejected():
    cert = verify_shannon_type(sliding_window_inequality(3, 1))
    buf = io.StringIO()
    write_certificate(cert, buf)
    lines = buf.getvalue().splitlines()
    lines[1] = lines[1].rsplit(" ", 1)[0] + " 2/1"
    with pytest.raises(CertificateReplayError):
        read_certificate(io.StringIO("\n".join(lines)))


def test_malformed_certificate_rejected():
    with pytest.raises(ParameterError):
        read_certificate(io.StringIO("nonsense\n"))
    with pytest.raises(ParameterError):
        read_certificate(io.StringIO("n=x target=1/1 1/1 -1/1\n"))
    with pytest.raises(ParameterError):
        read_certificate(io.StringIO("n=2 target=1/1 1/1\n"))  # wrong length
    with pytest.raises(ParameterError):
        read_certificate(io.StringIO("n=2 target=1/1 1/1 -1/0\n"))  # zero denom
    with pytest.raises(ParameterError):
        read_certificate(io.StringIO("n=2 target=1/1 1/1 -1/1\nmi01-02-0000\n"))


def test_exact_repair_solver_paths():
    from nocsit.certify import _solve_exact_nonneg

    f = Fraction
    # unique nonnegative solution (1/3, 2/3) over a 3-row system
    cols = [{1: f(3), 2: f(0), 3: f(3)}, {1: f(0), 2: f(3), 3: f(3)}]
    rhs = {1: f(1), 2: f(2), 3: f(3)}
    assert _solve_exact_nonneg(cols, rhs, dim=3) == [f(1, 3), f(2, 3)]

    # inconsistent right-hand side
    assert _solve_exact_nonneg(cols, {1: f(1), 2: f(2), 3: f(10)}, dim=3) is None

    # consistent but needs a negative multiplier
    assert _solve_exact_nonneg(cols, {1: f(-1), 2: f(2), 3: f(1)}, dim=3) is None

    # underdetermined: free column pinned to zero, pivot solution returned
    cols = [{1: f(1)}, {2: f(1)}, {1: f(1), 2: f(1)}]
    sol = _solve_exact_nonneg(cols, {1: f(2), 2: f(5)}, dim=2)
    assert sol == [f(2), f(5), f(0)]


def test_replay_rejects_negative_multiplier():
    target = sliding_window_inequality(2, 1)
    cert = ProofCertificate(target, {"mi01-02-0000": Fraction(-1)})
    with pytest.raises(CertificateReplayError):
        check_replay(cert)


def test_replay_rejects_unknown_elemental():
    target = sliding_window_inequality(2, 1)
    cert = ProofCertificate(target, {"nonsense": Fraction(1)})
    with pytest.raises(CertificateReplayError):
        check_replay(cert)
