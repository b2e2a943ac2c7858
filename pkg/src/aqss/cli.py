"""Command-line front end.

Every command prints one JSON RunReport. Exit codes: 0 success, 1 domain
refusal (unauthorized coalition, protocol abort), 2 input error, 3 internal
fault.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .access import DEALER, parse_access_structure
from .codes import hamming74
from .engine import (
    certify_leakage,
    encrypted_reconstruct,
    encrypted_share,
    field_size,
    quantum_reconstruct,
    quantum_share,
    state_fidelity,
)
from .errors import AQSSError, CapacityError, ParseError, StructureError, UnauthorizedError
from .oracles import SUITES, run_suite
from .plan import MODES, STRICT, analyze, build_aqss_plan, describe, evaluate_coalition
from .qkd import (
    PAPER_LITERAL,
    SYNDROME,
    ProtocolConfig,
    chain_tree,
    run_protocol,
    run_trials,
    star_tree,
)
from .quantum import QuditRegister, prepare
from .rng import stream

EXIT_OK = 0
EXIT_REFUSED = 1
EXIT_INPUT = 2
EXIT_FAULT = 3


class InputError(ValueError):
    """Bad command-line input."""


# ------------------------------------------------------------------ parsing


def parse_secret(text: str) -> QuditRegister:
    """'0', '1', ... basis states; '+' or '-'; a JSON amplitude list (reals or
    [re, im] pairs); or '@file.json' holding a serialized register."""
    text = text.strip()
    if text.startswith("@"):
        return QuditRegister.from_json(json.loads(Path(text[1:]).read_text()))
    if text in ("+", "-"):
        sign = 1 if text == "+" else -1
        return prepare([2], [1 / math.sqrt(2), sign / math.sqrt(2)])
    if text.isdigit():
        s = int(text)
        d = max(2, s + 1)
        vec = np.zeros(d, dtype=complex)
        vec[s] = 1
        return prepare([d], vec)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"cannot parse secret {text!r}: {exc.msg}") from None
    if not isinstance(data, list) or not data:
        raise InputError("secret must be a non-empty amplitude list")
    amps = [complex(*a) if isinstance(a, list) else complex(a) for a in data]
    try:
        return prepare([len(amps)], amps)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def parse_coalition(text: str) -> list[str]:
    members = [p.strip() for p in text.replace(" ", ",").split(",") if p.strip()]
    return [DEALER if p.lower() == DEALER else p for p in members]


def parse_tree(text: str | None, n: int):
    if text is None or text == "chain":
        return chain_tree(n)
    if text == "star":
        return star_tree(n)
    try:
        return tuple(tuple(int(v) for v in e.split("-")) for e in text.split(","))
    except ValueError:
        raise InputError(f"tree must be 'chain', 'star' or edges like 0-1,1-2; got {text!r}") from None


def parse_eve(text: str | None) -> int | None:
    if text is None or text == "none":
        return None
    key, _, value = text.partition("=")
    if key != "edge" or not value.isdigit():
        raise InputError(f"--eve expects edge=<index>, got {text!r}")
    return int(value)


# ------------------------------------------------------------------ commands


def _reconstruction_outputs(plan, secret, coalition, rng) -> tuple[dict, int]:
    if not evaluate_coalition(plan, coalition):
        leak = certify_leakage(plan, coalition, max(2, secret.dims[0]))
        return {
            "authorized": False,
            "refusal": str(UnauthorizedError(coalition)),
            "leakage": leak.to_json(),
        }, EXIT_REFUSED
    alloc = quantum_share(plan, secret, rng)
    rec = quantum_reconstruct(alloc, coalition)
    return {
        "authorized": True,
        "fidelity": rec.fidelity,
        "output_site": rec.output_site,
        "allocation": alloc.manifest(),
    }, EXIT_OK


def cmd_analyze(args, rng) -> tuple[dict, int]:
    gamma = parse_access_structure(args.gamma)
    return analyze(gamma), EXIT_OK


def cmd_plan(args, rng) -> tuple[dict, int]:
    gamma = parse_access_structure(args.gamma)
    plan = build_aqss_plan(gamma, args.mode)
    out = plan.to_json()
    out["text"] = describe(plan.root)
    out["field_q"] = field_size(plan)
    return out, EXIT_OK


def cmd_share(args, rng) -> tuple[dict, int]:
    gamma = parse_access_structure(args.gamma)
    secret = parse_secret(args.secret)
    if args.encrypted:
        enc = encrypted_share(gamma, secret, stream(args.seed, "encrypt"))
        return {"encrypted": True, "allocation": enc.manifest()}, EXIT_OK
    plan = build_aqss_plan(gamma, args.mode)
    alloc = quantum_share(plan, secret, rng)
    return {"encrypted": False, "plan": describe(plan.root), "allocation": alloc.manifest()}, EXIT_OK


def cmd_reconstruct(args, rng) -> tuple[dict, int]:
    gamma = parse_access_structure(args.gamma)
    secret = parse_secret(args.secret)
    coalition = parse_coalition(args.coalition)
    if args.encrypted:
        enc = encrypted_share(gamma, secret, stream(args.seed, "encrypt"))
        if not gamma.is_authorized(coalition):
            return {"encrypted": True, "authorized": False,
                    "refusal": str(UnauthorizedError(coalition))}, EXIT_REFUSED
        out = encrypted_reconstruct(enc, coalition)
        return {"encrypted": True, "authorized": True,
                "fidelity": state_fidelity(out, secret)}, EXIT_OK
    plan = build_aqss_plan(gamma, args.mode)
    outputs, code = _reconstruction_outputs(plan, secret, coalition, rng)
    outputs["coalition"] = sorted(coalition)
    return outputs, code


def cmd_leakage(args, rng) -> tuple[dict, int]:
    gamma = parse_access_structure(args.gamma)
    plan = build_aqss_plan(gamma, args.mode)
    coalition = parse_coalition(args.coalition)
    if evaluate_coalition(plan, coalition):
        return {"authorized": True,
                "refusal": "coalition can reconstruct; leakage is not meaningful"}, EXIT_REFUSED
    return {"authorized": False, "leakage": certify_leakage(plan, coalition).to_json()}, EXIT_OK


def _qkd_config(args, seed: int) -> ProtocolConfig:
    try:
        return ProtocolConfig(
            n=args.n,
            split=args.split if args.split is not None else args.n // 2,
            tree=parse_tree(args.tree, args.n),
            leader=args.leader,
            rounds=args.rounds,
            noise_p=args.noise,
            eve_edge=parse_eve(args.eve),
            abort_threshold=args.threshold,
            code=hamming74(),
            reconciliation=args.reconciliation,
            check_sample=args.check_sample,
            seed=seed,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_qkd(args, rng) -> tuple[dict, int]:
    config = _qkd_config(args, args.seed)
    if args.trials > 1:
        runs = run_trials(config, args.trials, args.workers)
        aborted = [r for r in runs if r["decision"] == "abort"]
        return {
            "config": config.to_json(),
            "trials": args.trials,
            "abort_rate": len(aborted) / len(runs),
            "abort_steps": sorted({r["abort_step"] for r in aborted}),
            "agreed_rate": sum(r["agreed"] for r in runs) / len(runs),
            "runs": runs,
        }, EXIT_OK
    tr = run_protocol(config)
    out = {"config": config.to_json(), "summary": tr.summary(),
           "abort_reason": tr.abort_reason}
    if args.transcript:
        out["transcript"] = tr.to_json()
    return out, EXIT_REFUSED if tr.aborted else EXIT_OK


def cmd_oracle(args, rng) -> tuple[dict, int]:
    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
    return run_suite(args.suite, seed=args.seed).to_json(), EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "plan": cmd_plan,
    "share": cmd_share,
    "reconstruct": cmd_reconstruct,
    "leakage": cmd_leakage,
    "qkd": cmd_qkd,
    "oracle": cmd_oracle,
}


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed for every random stream")
    common.add_argument("--pretty", action="store_true", help="indent the JSON report")

    parser = argparse.ArgumentParser(prog="aqss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def gamma_cmd(name, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("gamma", help="access structure, e.g. '{ABC, BD, EFG}' or JSON")
        return p

    gamma_cmd("analyze", "lambda, partition, maximal structure and home-share counts")
    p = gamma_cmd("plan", "build the assisted share plan")
    p.add_argument("--mode", choices=MODES, default=STRICT)

    for name, help_text in (("share", "share a secret and print the allocation manifest"),
                            ("reconstruct", "share, then reconstruct for a coalition")):
        p = gamma_cmd(name, help_text)
        p.add_argument("--secret", default="+", help="0, 1, +, -, JSON amplitudes or @file")
        p.add_argument("--mode", choices=MODES, default=STRICT)
        p.add_argument("--encrypted", action="store_true", help="one-time-pad home share path")
        if name == "reconstruct":
            p.add_argument("--coalition", required=True, help="comma-separated, e.g. A,B,dealer")

    p = gamma_cmd("leakage", "trace distance seen by an unauthorized coalition")
    p.add_argument("--coalition", required=True)
    p.add_argument("--mode", choices=MODES, default=STRICT)

    p = sub.add_parser("qkd", parents=[common], help="run the two-group key protocol")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--split", type=int, default=None, help="size of the first group")
    p.add_argument("--tree", default="chain", help="chain, star or edges 0-1,1-2,...")
    p.add_argument("--leader", type=int, default=0)
    p.add_argument("--rounds", type=int, default=32, help="2m GHZ rounds")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--eve", default=None, help="edge=<index> for intercept-resend")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--reconciliation", choices=(SYNDROME, PAPER_LITERAL), default=SYNDROME)
    p.add_argument("--check-sample", type=int, default=128, help="EPR test pairs per edge")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--transcript", action="store_true", help="include the full transcript")

    p = sub.add_parser("oracle", parents=[common], help="run a brute-force oracle suite")
    p.add_argument("suite", help=", ".join(sorted(SUITES)))
    return parser


def _inputs(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("pretty",)}


def make_report(args, outputs: dict, elapsed: float) -> dict:
    inputs = json.dumps(_inputs(args), sort_keys=True, default=str)
    return {
        "command": args.command,
        "seed": args.seed,
        "inputs": _inputs(args),
        "inputs_digest": hashlib.sha256(inputs.encode()).hexdigest(),
        "outputs": outputs,
        "timing": {"seconds": round(elapsed, 6)},
    }


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    rng = stream(args.seed, args.command)
    try:
        outputs, code = COMMANDS[args.command](args, rng)
    except (ParseError, StructureError, CapacityError, InputError, ValueError) as exc:
        outputs = {"error": {"type": type(exc).__name__, "message": str(exc),
                             "position": getattr(exc, "position", None)}}
        code = EXIT_INPUT
    except UnauthorizedError as exc:
        outputs = {"refusal": str(exc)}
        code = EXIT_REFUSED
    except AQSSError as exc:
        outputs = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        code = EXIT_FAULT
    except Exception as exc:  # report instead of a traceback, but flag as a fault
        outputs = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        code = EXIT_FAULT
    report = make_report(args, outputs, time.perf_counter() - start)
    report["exit_code"] = code
    text = json.dumps(report, sort_keys=True, indent=2 if args.pretty else None,
                      default=_jsonable)
    print(text)
    return code


def run() -> None:
    sys.exit(main())
