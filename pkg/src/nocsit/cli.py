"""Command-line front end: lemma, region, capacity, simulate, slope.

Exit codes: 0 success, 1 usage or precondition error, 2 mathematical
failure (an unprovable inequality or a violated check), 3 negative query
result (e.g. a point outside a region).  All randomized subcommands are
deterministic under a fixed --seed and their CSV output is byte-stable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import capacity, certify, regions, simulate
from .cone import gaussian_entropy_vector, sliding_window_inequality
from .errors import MathCheckError, ParameterError
from .induction import induction_trace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MATH = 2
EXIT_NEGATIVE = 3

LN2 = math.log(2.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 instead of argparse's default 2
        raise UsageError(message)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _p_grid(text: str) -> tuple[float, ...]:
    """Parse 'start:stop:count' into a log-spaced power grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("power grid must be start:stop:count, e.g. 1e2:1e6:5")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad power grid {text!r}") from exc
    if start <= 0 or stop <= start or count < 2:
        raise UsageError("power grid needs 0 < start < stop and count >= 2")
    return tuple(float(p) for p in np.logspace(math.log10(start), math.log10(stop), count))


def _out_stream(path: str | None):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _unit_scale(bits: bool) -> float:
    return 1.0 / LN2 if bits else 1.0


def _echo_params(args: argparse.Namespace, keys: Sequence[str]) -> str:
    parts = []
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            parts.append(f"{k}={v}")
    return " ".join(parts)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# lemma


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def _cmd_lemma(args: argparse.Namespace) -> int:
    stream, close = _out_stream(args.output)
    try:
        if args.action == "verify":
            report = certify.verify_lemma_family(args.n_max)
            for line in report.lines():
                stream.write(line + "\n")
            return EXIT_OK
        if args.action == "certificate":
            _require(args, "N", "m")
            target = sliding_window_inequality(args.N, args.m, args.conditioned)
            cert = certify.verify_shannon_type(target)
            certify.write_certificate(cert, stream)
            return EXIT_OK
        if args.action == "trace":
            _require(args, "N", "m")
            trace = induction_trace(args.N, args.m)
            stream.write(trace.render() + "\n")
            return EXIT_OK
        if args.action == "mc":
            return _lemma_mc(args, stream)
        raise UsageError(f"unknown lemma action {args.action!r}")
    finally:
        if close:
            stream.close()


def _lemma_mc(args: argparse.Namespace, stream) -> int:
    """Gaussian batch check of the window inequality family."""
    n_vars = args.vars
    n_max = min(args.n_max, n_vars - 1)
    rng = np.random.default_rng(args.seed)
    instances = []
    for n_window in range(2, n_max + 1):
        for m in range(1, n_window):
            ineq = sliding_window_inequality(n_window, m, conditioned=True)
            var_map = {v: v for v in range(1, n_window + 1)}
            var_map[n_window + 1] = n_vars  # conditioning variable sits last
            instances.append((n_window, m, ineq.embed(n_vars, var_map)))
    worst = math.inf
    for _ in range(args.covariances):
        g = rng.standard_normal((n_vars, n_vars))
        vec = gaussian_entropy_vector(g @ g.T + 1e-3 * np.eye(n_vars))
        for _, _, ineq in instances:
            worst = min(worst, ineq.evaluate(vec))
    stream.write(
        f"checked {len(instances)} window instances (N<={n_max}, conditioned) on "
        f"{args.covariances} random covariances over {n_vars} variables\n"
    )
    stream.write(f"worst slack: {worst:.3e} (tolerance {-args.slack:.0e})\n")
    if worst < -args.slack:
        stream.write("FAIL: inequality violated beyond tolerance\n")
        return EXIT_MATH
    stream.write("pass\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# region


def _build_region(args: argparse.Namespace):
    _require(args, "M", "N")
    notices = []
    if args.kind == "bc":
        if len(args.M) != 1:
            raise UsageError("broadcast region takes a single --M value")
        region = regions.bc_dof_region(regions.BcConfig(args.M[0], args.N))
    elif args.kind == "ic2":
        cfg = regions.IcConfig(args.M, args.N)
        if cfg.k_users != 2:
            raise UsageError("ic2 requires exactly two users")
        sorted_cfg, perm = regions.relabel_ic2(cfg)
        if perm != (1, 2):
            notices.append(
                f"# users relabeled to satisfy N1 <= N2; sorted order was {perm}, "
                "output is in original user order"
            )
        region = regions.apply_permutation(regions.ic2_outer_region(sorted_cfg), perm)
    elif args.kind == "ick":
        region = regions.ick_outer_region(regions.IcConfig(args.M, args.N))
    else:
        raise UsageError(f"unknown region kind {args.kind!r}")
    return region, notices


def _cmd_region(args: argparse.Namespace) -> int:
    region, notices = _build_region(args)
    stream, close = _out_stream(args.output)
    try:
        for note in notices:
            stream.write(note + "\n")
        if args.contains is not None:
            point = _float_list(args.contains)
            inside = region.contains(point)
            stream.write(f"{'inside' if inside else 'outside'}\n")
            return EXIT_OK if inside else EXIT_NEGATIVE
        if args.vertices:
            writer = csv.writer(stream)
            writer.writerow([f"d{i + 1}" for i in range(region.dim)])
            for v in region.vertices():
                writer.writerow([_fmt(x) for x in v])
            return EXIT_OK
        for line in region.export_lines():
            stream.write(line + "\n")
        return EXIT_OK
    finally:
        if close:
            stream.close()


# ---------------------------------------------------------------------------
# capacity


def _parse_eigen_spec(text: str) -> capacity.EigenDistSpec:
    kind, _, rest = text.partition(":")
    if kind == "degenerate":
        try:
            return capacity.DegenerateEigens(float(rest))
        except ValueError as exc:
            raise UsageError(f"bad degenerate eigenvalue {rest!r}") from exc
    if kind == "gaussian":
        try:
            m_tx, n_rx, n_samples, seed = (int(t) for t in rest.split(","))
        except ValueError as exc:
            raise UsageError(
                "gaussian eigen spec is gaussian:M,N,samples,seed"
            ) from exc
        return capacity.eigen_samples(m_tx, n_rx, n_samples, seed)
    raise UsageError(f"unknown eigenvalue spec {text!r}; use degenerate:<lam> or gaussian:M,N,samples,seed")


def _sweep_powers(args: argparse.Namespace) -> tuple[float, ...]:
    if getattr(args, "P_grid", None):
        return _p_grid(args.P_grid)
    if getattr(args, "P", None) is not None:
        return (args.P,)
    raise UsageError("specify --P or --P-grid")


def _cmd_capacity(args: argparse.Namespace) -> int:
    _require(args, "M")
    stream, close = _out_stream(args.output)
    scale = _unit_scale(args.bits)
    unit = "bits" if args.bits else "nats"
    try:
        if args.action == "ergodic":
            if args.N is None or len(args.N) != 1:
                raise UsageError("ergodic takes a single --N value")
            powers = _sweep_powers(args)
            stream.write(
                f"# capacity ergodic {_echo_params(args, ['M', 'N', 'samples', 'seed'])} "
                f"units={unit}\n"
            )
            writer = csv.writer(stream)
            writer.writerow(["P", f"mean_{unit}", "stderr", "n_samples", "seed"])
            for p in powers:
                est = capacity.ergodic_capacity(
                    args.M, args.N[0], p, args.samples, args.seed
                )
                writer.writerow(
                    [_fmt(p), _fmt(est.mean * scale), _fmt(est.stderr * scale),
                     est.n_samples, args.seed]
                )
            return EXIT_OK
        if args.action == "theorem2":
            if args.q is None:
                raise UsageError("theorem2 needs --q (e.g. degenerate:1)")
            if args.P is None:
                raise UsageError("theorem2 needs --P")
            spec = _parse_eigen_spec(args.q)
            bound = capacity.theorem2_bound(spec, args.M, args.P)
            stream.write(
                f"# capacity theorem2 {_echo_params(args, ['q', 'M', 'P'])} units={unit}\n"
            )
            stream.write(f"sum_bound {_fmt(bound.mean * scale)} {unit}"
                         f" stderr {_fmt(bound.stderr * scale)}\n")
            if args.N is not None:
                cfg = regions.BcConfig(args.M, args.N)
                region = capacity.theorem2_region(cfg, spec, args.P)
                for line in region.export_lines(bits=args.bits):
                    stream.write(line + "\n")
            return EXIT_OK
        if args.action == "outer":
            if args.N is None or args.P is None:
                raise UsageError("outer region needs --N and --P")
            cfg = regions.BcConfig(args.M, args.N)
            region = capacity.bc_outer_region(cfg, args.P, args.samples, args.seed)
            stream.write(
                f"# capacity outer {_echo_params(args, ['M', 'N', 'P', 'samples', 'seed'])} "
                f"units={unit}\n"
            )
            for line in region.export_lines(bits=args.bits):
                stream.write(line + "\n")
            return EXIT_OK
        if args.action == "theta":
            if args.N is None or args.P is None:
                raise UsageError("theta report needs --N and --P")
            report = capacity.theta_class_report(
                args.M, args.N, args.samples, args.seed, power=args.P
            )
            for line in report.lines():
                stream.write(line + "\n")
            return EXIT_OK
        raise UsageError(f"unknown capacity action {args.action!r}")
    finally:
        if close:
            stream.close()


# ---------------------------------------------------------------------------
# simulate / slope


def _write_sim_rows(writer, sweep, r, unit_scale, seed) -> None:
    for res in sweep:
        for i in range(res.k_users):
            writer.writerow(
                [
                    _fmt(res.power),
                    res.scheme,
                    i + 1,
                    r[i],
                    _fmt(res.rates[i] * unit_scale),
                    _fmt(res.stderrs[i] * unit_scale),
                    res.n_slots,
                    seed,
                ]
            )


def _cmd_simulate(args: argparse.Namespace) -> int:
    _require(args, "M", "N")
    powers = _sweep_powers(args)
    scale = _unit_scale(args.bits)
    unit = "bits" if args.bits else "nats"
    stream, close = _out_stream(args.output)
    try:
        if args.scheme == "bc":
            if len(args.M) != 1:
                raise UsageError("broadcast simulation takes a single --M value")
            cfg = regions.BcConfig(args.M[0], args.N)
            if args.alpha is None:
                raise UsageError("broadcast simulation needs --alpha")
            sched = regions.Schedule(args.alpha)
            if sched.k_users != cfg.k_users:
                raise UsageError("--alpha length must match user count")
            sweep = [
                simulate.simulate_bc_time_sharing(cfg, sched, p, args.slots, args.seed)
                for p in powers
            ]
            r = cfg.r
        elif args.scheme == "ic":
            cfg = regions.IcConfig(args.M, args.N)
            sweep = [
                simulate.simulate_ic_zero_forcing(cfg, p, args.slots, args.seed)
                for p in powers
            ]
            r = tuple(min(m, n) for m, n in zip(cfg.m_tx, cfg.n_rx))
        else:
            raise UsageError(f"unknown scheme {args.scheme!r}")
        stream.write(
            f"# simulate {args.scheme} {_echo_params(args, ['M', 'N', 'alpha', 'slots', 'seed'])} "
            f"units={unit}\n"
        )
        writer = csv.writer(stream)
        writer.writerow(
            ["P", "scheme", "user", "r", f"mean_{unit}", "stderr", "n_slots", "seed"]
        )
        _write_sim_rows(writer, sweep, r, scale, args.seed)
        return EXIT_OK
    finally:
        if close:
            stream.close()


def _read_sweep_csv(path: str) -> tuple[list[dict], list[str]]:
    with open(path, newline="") as f:
        rows = [line for line in f if not line.startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None:
        raise UsageError(f"no CSV header found in {path}")
    return list(reader), list(reader.fieldnames)


def _cmd_slope(args: argparse.Namespace) -> int:
    _require(args, "input")
    rows, fields = _read_sweep_csv(args.input)
    mean_col = next((c for c in fields if c.startswith("mean_")), None)
    if mean_col is None:
        raise UsageError("input CSV has no mean_<unit> column")
    stream, close = _out_stream(args.output)
    try:
        if "user" in fields:
            by_user: dict[int, list[tuple[float, float]]] = {}
            r_of: dict[int, float] = {}
            for row in rows:
                u = int(row["user"])
                by_user.setdefault(u, []).append(
                    (float(row["P"]), float(row[mean_col]))
                )
                if "r" in fields:
                    r_of[u] = float(row["r"])
            weighted_sum = 0.0
            for u in sorted(by_user):
                fit = capacity.dof_slope(by_user[u])
                stream.write(f"user {u}: {fit}\n")
                if u in r_of:
                    weighted_sum += fit.slope / r_of[u]
            if r_of:
                stream.write(f"sum of slope_i / r_i: {weighted_sum:.4f}\n")
        else:
            fit = capacity.dof_slope(
                [(float(row["P"]), float(row[mean_col])) for row in rows]
            )
            stream.write(f"{fit}\n")
        return EXIT_OK
    finally:
        if close:
            stream.close()


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nocsit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    lemma = sub.add_parser("lemma", help="window-inequality certificates and checks")
    lemma_sub = lemma.add_subparsers(dest="action", required=True)
    lv = lemma_sub.add_parser("verify", help="certify the whole (N, m) family")
    lv.add_argument("--n-max", dest="n_max", type=int, default=None)
    lv.add_argument("--output", default=None)
    lc = lemma_sub.add_parser("certificate", help="write one certificate file")
    lc.add_argument("--N", type=int, default=None)
    lc.add_argument("--m", type=int, default=None)
    lc.add_argument("--conditioned", action="store_true")
    lc.add_argument("--output", default=None)
    lt = lemma_sub.add_parser("trace", help="write the unrolled induction proof")
    lt.add_argument("--N", type=int, default=None)
    lt.add_argument("--m", type=int, default=None)
    lt.add_argument("--output", default=None)
    lm = lemma_sub.add_parser("mc", help="Gaussian entropy-vector batch check")
    lm.add_argument("--vars", type=int, default=None)
    lm.add_argument("--covariances", type=int, default=None)
    lm.add_argument("--n-max", dest="n_max", type=int, default=None)
    lm.add_argument("--slack", type=float, default=None)
    lm.add_argument("--seed", type=int, default=None)
    lm.add_argument("--output", default=None)

    region = sub.add_parser("region", help="DoF region constraints and queries")
    region.add_argument("kind", choices=["bc", "ic2", "ick"])
    region.add_argument("--M", type=_int_list, default=None)
    region.add_argument("--N", type=_int_list, default=None)
    region.add_argument("--vertices", action="store_true")
    region.add_argument("--contains", default=None, metavar="d1,d2,...")
    region.add_argument("--output", default=None)

    cap = sub.add_parser("capacity", help="Monte Carlo rate estimates and bounds")
    cap.add_argument("action", choices=["ergodic", "theorem2", "outer", "theta"])
    cap.add_argument("--M", type=int, default=None)
    cap.add_argument("--N", type=_int_list, default=None)
    cap.add_argument("--P", type=float, default=None)
    cap.add_argument("--P-grid", dest="P_grid", default=None, metavar="lo:hi:count")
    cap.add_argument("--q", default=None, help="eigenvalue spec for theorem2")
    cap.add_argument("--samples", type=int, default=None)
    cap.add_argument("--seed", type=int, default=None)
    cap.add_argument("--bits", action="store_true")
    cap.add_argument("--output", default=None)

    sim = sub.add_parser("simulate", help="achievable-scheme rate sweeps")
    sim.add_argument("scheme", choices=["bc", "ic"])
    sim.add_argument("--M", type=_int_list, default=None)
    sim.add_argument("--N", type=_int_list, default=None)
    sim.add_argument("--alpha", type=_float_list, default=None)
    sim.add_argument("--P", type=float, default=None)
    sim.add_argument("--P-grid", dest="P_grid", default=None, metavar="lo:hi:count")
    sim.add_argument("--slots", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--bits", action="store_true")
    sim.add_argument("--output", default=None)

    slope = sub.add_parser("slope", help="regress DoF slopes from a sweep CSV")
    slope.add_argument("--input", default=None)
    slope.add_argument("--output", default=None)

    parser.add_argument("--config", default=None, help="JSON file with default flags")
    return parser


# built-in defaults, applied after config merging so a config file can
# override them while explicit flags still win over both
_FALLBACKS = {
    "samples": 10000,
    "slots": 10000,
    "seed": 0,
    "vars": 6,
    "covariances": 1000,
    "slack": 1e-9,
    "n_max": 5,
}

_CONFIG_KEYS = {
    "n_max", "N", "m", "M", "P", "P_grid", "q", "samples", "seed",
    "slots", "alpha", "vars", "covariances", "slack", "output",
    "bits", "conditioned", "contains", "vertices", "input",
}


def _load_config(argv: list[str]) -> tuple[list[str], dict]:
    """Split off --config and parse its JSON payload."""
    if "--config" not in argv:
        return argv, {}
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    path = argv[idx + 1]
    rest = argv[:idx] + argv[idx + 2:]
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key, value in list(data.items()):
        if isinstance(value, list):
            data[key] = tuple(value)
        elif isinstance(value, str) and key in ("M", "N"):
            data[key] = _int_list(value)
        elif isinstance(value, str) and key == "alpha":
            data[key] = _float_list(value)
    return rest, data


def _merge_defaults(args: argparse.Namespace, config: dict) -> None:
    """Fill unset options from the config file, then from built-in fallbacks."""
    for key, value in config.items():
        if hasattr(args, key):
            current = getattr(args, key)
            if current is None or current is False:  # identity: 0 stays explicit
                setattr(args, key, value)
    for key, value in _FALLBACKS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv, config = _load_config(argv)
        args = parser.parse_args(argv)
        _merge_defaults(args, config)
        handler = {
            "lemma": _cmd_lemma,
            "region": _cmd_region,
            "capacity": _cmd_capacity,
            "simulate": _cmd_simulate,
            "slope": _cmd_slope,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except certify.NotShannonProvable as exc:
        print(f"not provable: {exc}", file=sys.stderr)
        return EXIT_MATH
    except MathCheckError as exc:
        print(f"mathematical failure: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (ParameterError, OSError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
