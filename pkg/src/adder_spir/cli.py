"""Batch experiment harness: seeded runs, sweeps, audits, capacity checks.

Output is line-delimited JSON: one versioned header record (its
``generated_at`` field is the only non-deterministic value, so golden
comparisons skip the header line) followed by one record per session,
sweep cell, or report.  Exit codes: 0 all checks pass, 1 check failure,
2 configuration error, 3 resource/budget error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import capacity as cap
from .model import (
    ConfigurationError,
    ProtocolParams,
    Selection,
    party_stream,
    sample_filestore,
    trial_seeds,
)
from .multifile import run_multifile
from .oracle import StateBudgetExceeded, audit, otp_lemma_check, DEFAULT_STATE_BUDGET
from .protocol import run_session, run_session_adaptive

__all__ = ["main", "build_parser"]

FORMAT_VERSION = "adder-spir/1"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _default_workers() -> int:
    env = os.environ.get("ADDER_SPIR_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"ADDER_SPIR_WORKERS must be an integer, got {env!r}")
    return 1


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _int_list(text: str) -> list[int]:
    return [_positive_int(part) for part in text.split(",") if part]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part]


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=_positive_int, default=4096, help="channel uses per sub-protocol")
    p.add_argument("--t", type=float, default=0.4, dest="t_exponent", help="abort exponent in (0, 1/2)")
    p.add_argument("--alpha", type=float, default=0.5, help="share split in [0, 1]")
    p.add_argument("--L1", type=_positive_int, default=2, help="files at server 1")
    p.add_argument("--L2", type=_positive_int, default=2, help="files at server 2")
    p.add_argument("--ell1", type=int, default=0, help="per-round file bits from server 1")
    p.add_argument("--ell2", type=int, default=0, help="per-round file bits from server 2")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=0, help="master seed; trials split deterministically")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--workers", type=_positive_int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adder-spir",
        description="Dual-source private retrieval over a binary adder channel: "
        "simulation, auditing, and capacity checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute seeded retrieval sessions")
    _add_param_flags(p_run)
    _add_common_flags(p_run)
    p_run.add_argument("--no-abort", action="store_true", help="skip the size-deviation abort check")

    p_sweep = sub.add_parser("sweep", help="Monte Carlo abort-rate and rate sweep")
    p_sweep.add_argument("--n", type=_int_list, default=[1024, 4096, 16384], help="comma-separated block lengths")
    p_sweep.add_argument("--alpha", type=_float_list, default=[0.5], help="comma-separated share splits")
    p_sweep.add_argument("--t", type=float, default=0.4, dest="t_exponent")
    _add_common_flags(p_sweep)

    p_audit = sub.add_parser("audit", help="exhaustive leakage audit of a tiny instance")
    _add_param_flags(p_audit)
    p_audit.add_argument("--seed", type=int, default=0)
    p_audit.add_argument("--out", default="-")
    p_audit.add_argument("--no-abort", action="store_true")
    p_audit.add_argument("--condition-nonabort", action="store_true")
    p_audit.add_argument("--mutate", default=None, help="audit a deliberately broken variant")
    p_audit.add_argument("--exact-rational", action="store_true", help="exact-arithmetic cross-check mode")
    p_audit.add_argument("--budget", type=_positive_int, default=DEFAULT_STATE_BUDGET)

    p_cap = sub.add_parser("capacity", help="entropy maximization and region checks")
    p_cap.add_argument("--out", default="-")

    p_otp = sub.add_parser("otp-check", help="exhaustive one-time-pad lemma catalog")
    p_otp.add_argument("--out", default="-")
    p_otp.add_argument("--pad-width", type=_positive_int, default=2, help="check widths 1..this")

    return parser


def _emit(records: list[dict], out: str) -> None:
    text = "\n".join(json.dumps(r) for r in records) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _header(command: str, config: dict) -> dict:
    return {
        "record": "header",
        "format": FORMAT_VERSION,
        "command": command,
        "config": config,
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def _run_one_trial(args: tuple) -> dict:
    params, master_seed, trial, abort_disabled = args
    rnd = trial_seeds(master_seed, trial)
    client = party_stream(rnd.client_seed, ())
    sel = Selection(
        int(client.integers(1, params.L1 + 1)), int(client.integers(1, params.L2 + 1))
    )
    if params.L1 == 2 and params.L2 == 2:
        files1 = sample_filestore(1, 2, params.ell1, rnd.server1_seed)
        files2 = sample_filestore(2, 2, params.ell2, rnd.server2_seed)
        transcript = run_session(
            params, files1, files2, sel, rnd, abort_disabled=abort_disabled
        )
        rec = transcript.to_record()
        aborted, ok = transcript.aborted, transcript.recovery_ok
        bits1 = 0 if aborted else transcript.public_bits_from_server(1)
        bits2 = 0 if aborted else transcript.public_bits_from_server(2)
        recovered = (params.ell1, params.ell2)
        rounds = 1
    else:
        files1 = sample_filestore(1, params.L1, params.ell1 * (params.L2 - 1), rnd.server1_seed)
        files2 = sample_filestore(2, params.L2, params.ell2 * (params.L1 - 1), rnd.server2_seed)
        transcript = run_multifile(
            params, files1, files2, sel, rnd, abort_disabled=abort_disabled
        )
        rec = transcript.to_record()
        aborted = transcript.aborted
        ok = (
            None
            if aborted
            else (
                transcript.recovered[0] == files1.file(sel.z1)
                and transcript.recovered[1] == files2.file(sel.z2)
            )
        )
        rec["recovery_ok"] = ok
        bits1 = transcript.public_bits_from_server(1)
        bits2 = transcript.public_bits_from_server(2)
        recovered = (files1.file_length, files2.file_length)
        rounds = transcript.round_count
    rec["trial"] = trial
    rec["selection"] = [sel.z1, sel.z2]
    if not aborted:
        per_bit1 = bits1 / recovered[0] if recovered[0] else 0.0
        per_bit2 = bits2 / recovered[1] if recovered[1] else 0.0
        rec["download_bits_per_file_bit"] = [per_bit1, per_bit2]
        rates = cap.achieved_rates(
            recovered[0], recovered[1], params.n, rounds, params.L1 - 1, params.L2 - 1, (bits1, bits2)
        )
        rec["rates"] = [rates.rate1, rates.rate2]
        rec["region_ok"] = cap.region_check(rates.rate1, rates.rate2, params.L1, params.L2)
    return rec


def _map_trials(fn, jobs: list[tuple], workers: int) -> list[dict]:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def cmd_run(args: argparse.Namespace) -> int:
    params = ProtocolParams(
        n=args.n,
        t_exponent=args.t_exponent,
        alpha=args.alpha,
        L1=args.L1,
        L2=args.L2,
        ell1=args.ell1,
        ell2=args.ell2,
    )
    params.validate()
    workers = args.workers if args.workers is not None else _default_workers()
    jobs = [(params, args.seed, trial, args.no_abort) for trial in range(1, args.trials + 1)]
    records = _map_trials(_run_one_trial, jobs, workers)
    config = {k: getattr(args, k) for k in ("n", "t_exponent", "alpha", "L1", "L2", "ell1", "ell2", "trials", "seed")}
    _emit([_header("run", config), *records], args.out)
    failed = [r for r in records if not r["aborted"] and not r.get("recovery_ok")]
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _sweep_cell(args: tuple) -> dict:
    n, alpha, t_exponent, master_seed, trials = args
    params = ProtocolParams(n=n, t_exponent=t_exponent, alpha=alpha)
    aborts = 0
    failures = 0
    r1s: list[float] = []
    r2s: list[float] = []
    for trial in range(1, trials + 1):
        rnd = trial_seeds((master_seed << 20) ^ (n * 1013 + int(alpha * 1000)), trial)
        client = party_stream(rnd.client_seed, ())
        sel = Selection(int(client.integers(1, 3)), int(client.integers(1, 3)))
        transcript, sized = run_session_adaptive(params, sel, rnd)
        if transcript.aborted:
            aborts += 1
            continue
        if not transcript.recovery_ok:
            failures += 1
        r1s.append(sized.ell1 / n)
        r2s.append(sized.ell2 / n)
    mean_r1 = float(np.mean(r1s)) if r1s else 0.0
    mean_r2 = float(np.mean(r2s)) if r2s else 0.0
    return {
        "record": "sweep-cell",
        "n": n,
        "alpha": alpha,
        "t": t_exponent,
        "trials": trials,
        "abort_rate": aborts / trials,
        "chebyshev_bound": n ** (2 * t_exponent - 1) / 4,
        "mean_r1": mean_r1,
        "mean_r2": mean_r2,
        "target_r1": alpha / 2,
        "target_r2": (1 - alpha) / 2,
        "region_margin": 0.5 - (mean_r1 + mean_r2),
        "failures": failures,
    }


def cmd_sweep(args: argparse.Namespace) -> int:
    if not 0 < args.t_exponent < 0.5:
        raise ConfigurationError("t must lie in (0, 1/2)")
    workers = args.workers if args.workers is not None else _default_workers()
    jobs = [
        (n, alpha, args.t_exponent, args.seed, args.trials)
        for n in args.n
        for alpha in args.alpha
    ]
    cells = _map_trials(_sweep_cell, jobs, workers)
    config = {"n": args.n, "alpha": args.alpha, "t_exponent": args.t_exponent, "trials": args.trials, "seed": args.seed}
    _emit([_header("sweep", config), *cells], args.out)
    bad = [
        c
        for c in cells
        if c["failures"]
        or c["abort_rate"]
        > c["chebyshev_bound"] + 3 * math.sqrt(c["chebyshev_bound"] / c["trials"]) + 1e-9
    ]
    return EXIT_CHECK_FAILED if bad else EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    params = ProtocolParams(
        n=args.n,
        t_exponent=args.t_exponent,
        alpha=args.alpha,
        L1=args.L1,
        L2=args.L2,
        ell1=args.ell1,
        ell2=args.ell2,
    )
    params.validate()
    mode = "two_file" if (params.L1 == 2 and params.L2 == 2) else "multifile"
    report = audit(
        params,
        mode,
        abort_disabled=args.no_abort,
        condition_nonabort=args.condition_nonabort,
        mutation=args.mutate,
        exact=args.exact_rational,
        state_budget=args.budget,
    )
    config = {k: getattr(args, k) for k in ("n", "t_exponent", "alpha", "L1", "L2", "ell1", "ell2")}
    config.update(
        mutate=args.mutate,
        no_abort=args.no_abort,
        condition_nonabort=args.condition_nonabort,
        exact_rational=args.exact_rational,
    )
    _emit([_header("audit", config), report.to_record()], args.out)
    return EXIT_OK if report.all_zero(1e-9) else EXIT_CHECK_FAILED


def cmd_capacity(args: argparse.Namespace) -> int:
    p1, p2, value = cap.maximize_f()
    cert = cap.verify_g_monotone()
    grid = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    max_grad_err = 0.0
    for a in grid:
        for b in grid:
            d1, d2 = cap.f_gradient(a, b)
            fd1 = (cap.conditional_entropy_f(a + h, b) - cap.conditional_entropy_f(a - h, b)) / (2 * h)
            fd2 = (cap.conditional_entropy_f(a, b + h) - cap.conditional_entropy_f(a, b - h)) / (2 * h)
            max_grad_err = max(max_grad_err, abs(d1 - fd1), abs(d2 - fd2))
    passed = (
        abs(value - 0.5) <= 1e-9
        and abs(p1 - 0.5) <= 1e-6
        and abs(p2 - 0.5) <= 1e-6
        and cert.passed()
        and max_grad_err <= 1e-5
    )
    records = [
        _header("capacity", {}),
        {
            "record": "capacity-report",
            "argmax": [p1, p2],
            "max_value": value,
            "monotone_pass": cert.passed(),
            "min_forward_difference": cert.min_forward_difference,
            "max_gradient_error": max_grad_err,
            "passed": passed,
        },
    ]
    # Region boundary table: the extreme achievable rate pairs per library size.
    for L1 in range(2, 6):
        for L2 in range(2, 6):
            r1_max = 0.5 / (L1 - 1)
            r2_max = 0.5 / (L2 - 1)
            records.append(
                {
                    "record": "region-boundary",
                    "L1": L1,
                    "L2": L2,
                    "corner_r1": r1_max,
                    "corner_r2": r2_max,
                    "corners_feasible": cap.region_check(r1_max, 0.0, L1, L2)
                    and cap.region_check(0.0, r2_max, L1, L2),
                }
            )
    _emit(records, args.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_otp_check(args: argparse.Namespace) -> int:
    records = [_header("otp-check", {"pad_width": args.pad_width})]
    all_ok = True
    for width in range(1, args.pad_width + 1):
        report = otp_lemma_check(width)
        records.append(report.to_record())
        all_ok = all_ok and report.passed(1e-12)
    _emit(records, args.out)
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


_COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
    "capacity": cmd_capacity,
    "otp-check": cmd_otp_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except StateBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
