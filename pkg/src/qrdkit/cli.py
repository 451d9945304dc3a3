"""Command-line surface tying the toolkit together.

Five subcommands: entropy (entropic quantities from state files), bounds
(single bound evaluation), isotropic (finite-blocklength sweeps to CSV),
simulate (protocol simulation), validate (invariant suites).  Every emitted
file gets a sibling <file>.manifest.json recording the run; numbers in CSV
cells are fixed at 17 significant digits so identical parameters reproduce
byte-identical outputs.

Exit codes: 0 success, 1 usage or malformed input, 2 numeric/solver failure,
3 validation failures present.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bounds import (achievability_embezzling, achievability_mes,
                     classical_kv_converse, converse_alt,
                     converse_simple_inner, ea_qrd_function, iid_converse_rate)
from .distortion import entanglement_fidelity_observable
from .entropies import (beta_epsilon, d_h, d_max, h0, h0_smooth, h_min,
                        h_min_smooth, i_max, i_max_smooth, smooth_d_max)
from .isotropic import achievability_rate, converse_rate, m_star, rate_approx
from .protocol import SimulationConfig, simulate_teleportation_rd
from .serialize import (channel_from_dict, density_from_dict, load_json,
                        save_json)
from .states import maximally_mixed, purify
from .validate import SUITES, run_suites


class UsageError(Exception):
    """Bad flags or malformed inputs; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on error; raise instead so run() owns codes
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunManifest:
    """Record of one invocation; emitted beside every output file."""

    subcommand: str
    inputs: tuple = ()
    parameters: dict = field(default_factory=dict)
    seed: int = None
    outputs: tuple = ()
    version: str = __version__
    wall_clock_s: float = None

    def core_dict(self) -> dict:
        """Deterministic fields only; embedded in data outputs so reruns
        with the same parameters stay byte-identical."""
        return {"subcommand": self.subcommand, "inputs": list(self.inputs),
                "parameters": dict(self.parameters), "seed": self.seed,
                "outputs": list(self.outputs), "version": self.version}

    def to_dict(self) -> dict:
        d = self.core_dict()
        d["wall_clock_s"] = self.wall_clock_s
        return d


def _g17(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: str, header, rows) -> None:
    lines = [f"# manifest: {os.path.basename(path)}.manifest.json",
             ",".join(header)]
    lines.extend(",".join(_g17(c) for c in row) for row in rows)
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _write_manifests(man: RunManifest, t0: float) -> None:
    wall = time.monotonic() - t0
    for path in man.outputs:
        save_json({**man.core_dict(), "wall_clock_s": wall},
                  path + ".manifest.json")


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _load(path: str) -> dict:
    try:
        return load_json(path)
    except FileNotFoundError:
        raise UsageError(f"{path}: file not found")
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON ({e})")


def _density(path: str):
    obj = _load(path)
    try:
        return density_from_dict(obj)
    except (KeyError, ValueError, TypeError) as e:
        raise UsageError(f"{path}: bad density operator ({e})")


def _channel(path: str):
    obj = _load(path)
    try:
        return channel_from_dict(obj)
    except (KeyError, ValueError, TypeError) as e:
        raise UsageError(f"{path}: bad channel ({e})")


def _floats(text: str, flag: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects a comma-separated list of numbers")


def _ints(text: str, flag: str):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects a comma-separated list of integers")


# ------------------------------------------------------------------ entropy


_NEEDS_SIGMA = ("dmax", "dh", "beta", "smooth_dmax")
_NEEDS_EPS = ("dh", "beta", "smooth_dmax")


def _put_result(payload: dict, res) -> None:
    payload["value"] = res.value
    payload["certainty"] = res.certainty
    if res.interval is not None:
        payload["interval"] = list(res.interval)


def _cmd_entropy(args, t0: float) -> int:
    rho = _density(args.rho)
    inputs = [args.rho]
    payload = {"op": args.op, "units": "probability" if args.op == "beta"
               else "bits"}
    sigma = None
    if args.op in _NEEDS_SIGMA:
        if not args.sigma:
            raise UsageError(f"--sigma is required for --op {args.op}")
        sigma = _density(args.sigma)
        inputs.append(args.sigma)
    if args.op in _NEEDS_EPS and args.eps is None:
        raise UsageError(f"--eps is required for --op {args.op}")
    eps = args.eps
    cond = tuple(v for v in args.cond.split(",") if v) if args.cond else ()

    if args.op == "dmax":
        payload["value"] = d_max(rho, sigma)
    elif args.op == "dh":
        payload["value"] = d_h(rho, sigma, eps, method=args.method)
    elif args.op == "beta":
        payload["value"] = beta_epsilon(rho, sigma, eps, method=args.method)
    elif args.op == "smooth_dmax":
        _put_result(payload, smooth_d_max(rho, sigma, eps))
    elif args.op == "hmin":
        if eps:
            _put_result(payload, h_min_smooth(rho, cond, eps))
        else:
            payload["value"] = h_min(rho, cond)
    elif args.op == "h0":
        if eps:
            _put_result(payload, h0_smooth(rho, eps))
        else:
            payload["value"] = h0(rho)
    elif args.op == "imax":
        if eps:
            _put_result(payload, i_max_smooth(rho, b=args.b, eps=eps))
        else:
            payload["value"] = i_max(rho, b=args.b)

    man = RunManifest("entropy", inputs=tuple(inputs),
                      parameters={"op": args.op, "eps": eps,
                                  "cond": list(cond), "b": args.b,
                                  "method": args.method})
    payload["manifest"] = man.core_dict()
    _emit(payload)
    return 0


# ------------------------------------------------------------------- bounds


_BOUND_NAMES = ("converse_alt", "converse_simple_inner",
                "achievability_embezzling", "achievability_mes", "ea_qrd",
                "iid_converse", "classical_kv")
_NEEDS_CHANNEL = ("converse_simple_inner", "achievability_embezzling",
                  "achievability_mes")
_NEEDS_EPS_PRIME = ("converse_simple_inner", "iid_converse")


def _default_source(rho_path):
    """Source triple (rho, its purification, ent-fid observable); the
    isotropic qubit unless --rho overrides."""
    rho = _density(rho_path) if rho_path else maximally_mixed(2, label="A")
    phi = purify(rho, ref_label="R")
    return rho, phi, entanglement_fidelity_observable(phi)


def _bound_row(name: str, res, args) -> tuple:
    if name == "ea_qrd":
        lo, hi = res.certificate
        return ("ea_rate_distortion_frank_wolfe", "certified_interval",
                "valid", args.D, args.eps, args.eps_prime, args.n,
                res.rate, lo, hi)
    lo = res.value if res.direction == "lower_bound_on_logM" else -math.inf
    hi = res.value if res.direction == "upper_bound_on_logM" else math.inf
    return (res.provenance, res.direction, res.validity, args.D, args.eps,
            args.eps_prime, args.n, res.value, lo, hi)


_BOUND_HEADER = ("provenance", "direction", "validity", "D", "eps",
                 "eps_prime", "n", "value_bits", "lo_bits", "hi_bits")


def _cmd_bounds(args, t0: float) -> int:
    name = args.bound
    if args.D is None:
        raise UsageError("--D is required")
    if name != "ea_qrd" and args.eps is None:
        raise UsageError(f"--eps is required for --bound {name}")
    if name in _NEEDS_EPS_PRIME and args.eps_prime is None:
        raise UsageError(f"--eps-prime is required for --bound {name}")
    if name in _NEEDS_CHANNEL and not args.channel:
        raise UsageError(f"--channel is required for --bound {name}")

    inputs = [p for p in (args.rho, args.channel, args.sigma) if p]
    rho, phi, delta = _default_source(args.rho)
    channel = _channel(args.channel) if args.channel else None

    if name == "converse_alt":
        sigma = _density(args.sigma) if args.sigma else phi.density()
        res = converse_alt(phi, delta, args.D, args.eps, sigma)
    elif name == "converse_simple_inner":
        res = converse_simple_inner(phi, delta, args.D, args.eps,
                                    args.eps_prime, channel,
                                    method=args.method)
    elif name == "achievability_embezzling":
        res = achievability_embezzling(phi, channel, args.eps, delta=delta,
                                       D=args.D)
    elif name == "achievability_mes":
        res = achievability_mes(phi, channel, args.eps, delta=delta, D=args.D)
    elif name == "ea_qrd":
        res = ea_qrd_function(rho, delta, args.D)
    elif name == "iid_converse":
        res = iid_converse_rate(rho, delta, args.n, args.D, args.eps,
                                args.eps_prime)
    else:
        dim = rho.dims.dim ** 2
        px = np.full(dim, 1.0 / dim)
        res = classical_kv_converse(px, 1.0 - np.eye(dim), args.D, args.eps,
                                    px)

    params = {"bound": name, "D": args.D, "eps": args.eps,
              "eps_prime": args.eps_prime, "n": args.n, "method": args.method}
    outputs = (args.csv,) if args.csv else ()
    man = RunManifest("bounds", inputs=tuple(inputs), parameters=params,
                      outputs=outputs)
    if args.csv:
        _write_csv(args.csv, _BOUND_HEADER, [_bound_row(name, res, args)])
        _write_manifests(man, t0)

    if name == "ea_qrd":
        body = {"D": res.D, "rate_bits": res.rate,
                "certificate_bits": list(res.certificate), "gap": res.gap,
                "iterations": res.iterations, "d_used": res.d_used,
                "note": res.note}
    else:
        body = res.to_dict()
    _emit({"bound": name, "result": body, "units": "bits",
           "manifest": man.core_dict()})
    return 0


# ---------------------------------------------------------------- isotropic


_ISO_HEADER = ("provenance", "n", "D", "eps", "converse_rate_bits",
               "achievability_rate_bits", "m_star_count", "rate_approx_bits")


def _cmd_isotropic(args, t0: float) -> int:
    ns = _ints(args.n, "--n")
    ds = _floats(args.D, "--D")
    es = _floats(args.eps, "--eps")
    if not ns or not ds or not es:
        raise UsageError("--n, --D and --eps each need at least one value")
    rows = []
    for n in ns:
        for d in ds:
            for e in es:
                rows.append(("isotropic_finite_blocklength", n, d, e,
                             converse_rate(n, d, e),
                             achievability_rate(n, d, e, quantum=True),
                             m_star(n, d, e), rate_approx(n, d, e)))
    outputs = (args.out,) if args.out else ()
    man = RunManifest("isotropic",
                      parameters={"n": ns, "D": ds, "eps": es},
                      outputs=outputs)
    if args.out:
        _write_csv(args.out, _ISO_HEADER, rows)
        _write_manifests(man, t0)
    else:
        print("# manifest: " + json.dumps(man.core_dict(), sort_keys=True))
        print(",".join(_ISO_HEADER))
        for row in rows:
            print(",".join(_g17(c) for c in row))
    return 0


# ----------------------------------------------------------------- simulate


_SIM_FIELDS = ("n", "M", "D", "trials", "seed", "codebook_mode")
_SIM_HEADER = ("provenance", "n", "M", "D", "trials", "seed",
               "empirical_excess_prob", "ci_low_prob", "ci_high_prob",
               "target_prob", "mean_distortion_fraction")


def _cmd_simulate(args, t0: float) -> int:
    conf = {}
    if args.config:
        conf = _load(args.config)
        unknown = set(conf) - set(_SIM_FIELDS) - {"codebook"}
        if unknown:
            raise UsageError(f"{args.config}: unknown fields "
                             f"{sorted(unknown)}")
    for name in _SIM_FIELDS:
        flag = getattr(args, name)
        if flag is not None:
            conf[name] = flag
    conf.setdefault("seed", 0)
    conf.setdefault("codebook_mode", "fresh_per_trial")
    missing = [k for k in ("n", "M", "D", "trials") if k not in conf]
    if missing:
        raise UsageError(f"missing simulation fields {missing}; set them in "
                         "--config or by flags")
    if "codebook" in conf and conf["codebook"] is not None:
        conf["codebook"] = np.asarray(conf["codebook"])
    try:
        cfg = SimulationConfig(**conf)
    except (ValueError, TypeError) as e:
        raise UsageError(f"bad simulation config: {e}")

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("QRD_THREADS", "1"))
    report = simulate_teleportation_rd(cfg, threads=max(1, threads))

    outputs = tuple(p for p in (args.csv, args.histogram) if p)
    man = RunManifest("simulate",
                      inputs=(args.config,) if args.config else (),
                      parameters={k: conf[k] for k in _SIM_FIELDS},
                      seed=cfg.seed, outputs=outputs)
    if args.csv:
        _write_csv(args.csv, _SIM_HEADER,
                   [("teleportation_random_code", cfg.n, cfg.M, cfg.D,
                     cfg.trials, cfg.seed, report.empirical_excess,
                     report.ci_low, report.ci_high, report.target,
                     report.mean_distortion_hat)])
    if args.histogram:
        vals, counts = np.unique(report.per_trial_distortion,
                                 return_counts=True)
        _write_csv(args.histogram, ("distortion_fraction", "trial_count"),
                   [(float(v), int(c)) for v, c in zip(vals, counts)])
    if outputs:
        _write_manifests(man, t0)

    _emit({"report": report.to_dict(),
           "config": {k: conf[k] for k in _SIM_FIELDS},
           "manifest": man.core_dict()})
    return 0


# ----------------------------------------------------------------- validate


def _cmd_validate(args, t0: float) -> int:
    results = run_suites(args.suite, args.seed)
    for res in results:
        print(f"{res.name}: {res.passed}/{res.total} pass")
        for failure in res.failures[:5]:
            print(f"  {res.name} failure: {failure}", file=sys.stderr)
    return 0 if all(r.ok for r in results) else 3


# ------------------------------------------------------------------ parsing


def _build_parser() -> _Parser:
    p = _Parser(prog="qrdkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd")

    e = sub.add_parser("entropy", help="entropic quantities from state files")
    e.add_argument("--op", required=True,
                   choices=("dmax", "dh", "beta", "smooth_dmax", "hmin",
                            "h0", "imax"))
    e.add_argument("--rho", required=True, help="density operator JSON")
    e.add_argument("--sigma", help="second density operator JSON")
    e.add_argument("--eps", type=float, help="error / smoothing parameter")
    e.add_argument("--cond", help="conditioning labels, comma separated")
    e.add_argument("--b", default="B", help="label of the B system for imax")
    e.add_argument("--method", default="np", choices=("np", "sdp"))

    b = sub.add_parser("bounds", help="evaluate one named bound")
    b.add_argument("--bound", required=True, choices=_BOUND_NAMES)
    b.add_argument("--D", type=float, help="distortion budget")
    b.add_argument("--eps", type=float,
                   help="excess tolerance (smoothing parameter for "
                        "achievability bounds)")
    b.add_argument("--eps-prime", type=float, dest="eps_prime")
    b.add_argument("--n", type=int, default=1, help="number of copies")
    b.add_argument("--channel", help="channel JSON")
    b.add_argument("--sigma", help="test state JSON for converse_alt")
    b.add_argument("--rho", help="source density JSON (default: qubit I/2)")
    b.add_argument("--method", default="auto",
                   choices=("auto", "alternating", "sdp"))
    b.add_argument("--csv", help="append-free CSV output path")

    i = sub.add_parser("isotropic", help="finite-blocklength sweep to CSV")
    i.add_argument("--n", required=True, help="comma list of blocklengths")
    i.add_argument("--D", required=True, help="comma list of budgets")
    i.add_argument("--eps", required=True, help="comma list of tolerances")
    i.add_argument("--out", help="CSV path (default: stdout)")

    s = sub.add_parser("simulate", help="run the teleportation protocol")
    s.add_argument("--config", help="JSON config mirroring the flag names")
    s.add_argument("--n", type=int)
    s.add_argument("--M", type=int)
    s.add_argument("--D", type=float)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--codebook-mode", dest="codebook_mode",
                   choices=("fresh_per_trial", "fixed"))
    s.add_argument("--threads", type=int,
                   help="worker threads (falls back to QRD_THREADS)")
    s.add_argument("--csv", help="summary CSV row path")
    s.add_argument("--histogram", help="per-trial distortion histogram CSV")

    v = sub.add_parser("validate", help="run invariant suites")
    v.add_argument("--suite", default="all",
                   choices=tuple(SUITES) + ("all",))
    v.add_argument("--seed", type=int, default=7)
    return p


_HANDLERS = {"entropy": _cmd_entropy, "bounds": _cmd_bounds,
             "isotropic": _cmd_isotropic, "simulate": _cmd_simulate,
             "validate": _cmd_validate}


def run(argv) -> int:
    """Dispatch argv; returns the process exit code instead of raising."""
    t0 = time.monotonic()
    try:
        args = _build_parser().parse_args(argv)
        if args.cmd is None:
            raise UsageError("a subcommand is required: "
                             + ", ".join(sorted(_HANDLERS)))
        return _HANDLERS[args.cmd](args, t0)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
