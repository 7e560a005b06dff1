"""Command-line front end.

Subcommands: solve, certify, ic, arc, warc, experiment, version.  Structured
reports are JSON, tabular sweeps are CSV.  Exit codes: 0 success, 2 usage
(bad flags or malformed spec strings), 3 data (unreadable files), 4 failed
mathematical precondition.  Index sets in output are 1-based.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, signals
from .certify import first_order_certificate, small_noise_window
from .criteria import DRConfig, compute_arc, compute_ic, compute_warc
from .decomposition import build_decomposition, d_support, theorem_constants
from .dictionaries import from_spec as dict_from_spec
from .errors import DataError, PreconditionError
from .experiments import ExperimentSpec, run_experiment, worker_count
from .operators import (circular_gaussian_blur, dense, gaussian_random_matrix,
                        identity)
from .solvers import SolveConfig, solve_lasso

_GENERATORS = ("boxcar", "staircase", "two-boxcar")


class _UsageError(Exception):
    """Bad flag values; maps to exit code 2."""


def _parse_phase(ns):
    """Instance-spec grammar errors are usage errors, not data errors."""
    try:
        return parse_instance(ns)
    except DataError as exc:
        raise _UsageError(str(exc)) from exc


def _split_spec(spec, what):
    """Parse ``name:key=val,key=val`` into (name, {key: val})."""
    spec = str(spec).strip()
    name, _, argstr = spec.partition(":")
    args = {}
    if argstr:
        for item in argstr.split(","):
            key, eq, val = item.partition("=")
            if not eq or not key.strip():
                raise DataError(f"malformed {what} spec {spec!r}: expected key=value pairs")
            args[key.strip()] = val.strip()
    return name, args


def _require(args, keys, what, spec):
    missing = [k for k in keys if k not in args]
    if missing:
        raise DataError(f"{what} spec {spec!r} is missing {', '.join(missing)}")
    extra = [k for k in args if k not in keys]
    if extra:
        raise DataError(f"{what} spec {spec!r} has unknown options {', '.join(extra)}")


@dataclass(frozen=True)
class InstanceSpec:
    """Parsed but unresolved problem instance."""

    phi_spec: str
    dict_spec: str
    signal_spec: str | None
    noise_spec: str
    lam_spec: str

    def canonical(self):
        return {
            "phi": self.phi_spec,
            "dict": self.dict_spec,
            "signal": self.signal_spec,
            "noise": self.noise_spec,
            "lambda": self.lam_spec,
        }


def parse_instance(ns):
    """Validate the instance flags' grammar and fill defaults."""
    phi_spec = getattr(ns, "phi", None) or "id"
    name, args = _split_spec(phi_spec, "phi")
    if name == "id":
        _require(args, (), "phi", phi_spec)
    elif name == "blur":
        _require(args, ("sigma",), "phi", phi_spec)
        float(args["sigma"])
    elif name == "gauss":
        if "seed" not in args:
            args["seed"] = "0"
        _require(args, ("q", "seed"), "phi", phi_spec)
        phi_spec = f"gauss:q={int(args['q'])},seed={int(args['seed'])}"
    else:
        raise DataError(f"unknown phi spec {phi_spec!r} (expected id, blur, gauss)")

    dict_spec = getattr(ns, "dict", None) or "tv"
    dname, dargs = _split_spec(dict_spec, "dict")
    if dname == "tv" or dname == "id":
        _require(dargs, (), "dict", dict_spec)
    elif dname == "haar":
        _require(dargs, ("jmax", "tau"), "dict", dict_spec)
        int(dargs["jmax"]), float(dargs["tau"])
    elif dname == "fused":
        _require(dargs, ("eps",), "dict", dict_spec)
        float(dargs["eps"])
    else:
        raise DataError(f"unknown dictionary {dict_spec!r} (expected tv, id, haar, fused)")

    signal_spec = getattr(ns, "signal", None)
    if signal_spec is not None:
        sname, sargs = _split_spec(signal_spec, "signal")
        if sname == "boxcar":
            _require(sargs, ("n", "eta"), "signal", signal_spec)
        elif sname == "staircase":
            _require(sargs, ("n",), "signal", signal_spec)
        elif sname == "two-boxcar":
            _require(sargs, ("n", "eta", "rho"), "signal", signal_spec)
        # anything else is taken to be a CSV file path

    noise_spec = getattr(ns, "noise", None) or "none"
    nname, nargs = _split_spec(noise_spec, "noise")
    if nname == "none":
        _require(nargs, (), "noise", noise_spec)
    elif nname == "gaussian":
        if "seed" not in nargs:
            nargs["seed"] = "0"
        _require(nargs, ("sigma", "seed"), "noise", noise_spec)
        noise_spec = f"gaussian:sigma={float(nargs['sigma']):g},seed={int(nargs['seed'])}"
    elif nname == "file":
        _require(nargs, ("path",), "noise", noise_spec)
    else:
        raise DataError(f"unknown noise spec {noise_spec!r} (expected none, gaussian, file)")

    lam_spec = getattr(ns, "lam", None)
    lam_spec = "0" if lam_spec is None else str(lam_spec)
    if lam_spec not in ("auto-small",) and not lam_spec.startswith("auto-noise("):
        try:
            float(lam_spec)
        except ValueError:
            raise DataError(
                f"lambda must be a number, auto-small or auto-noise(rho), got {lam_spec!r}")
    elif lam_spec.startswith("auto-noise("):
        if not lam_spec.endswith(")"):
            raise DataError(f"malformed lambda spec {lam_spec!r}")
        float(lam_spec[len("auto-noise("):-1])

    return InstanceSpec(phi_spec=phi_spec, dict_spec=dict_spec,
                        signal_spec=signal_spec, noise_spec=noise_spec,
                        lam_spec=lam_spec)


def _load_signal(path):
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=1)
    except OSError as exc:
        raise DataError(f"cannot read signal file {path!r}: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"signal file {path!r} is not one value per line: {exc}") from exc
    return np.asarray(data, dtype=float).ravel()


def _make_signal(spec):
    name, args = _split_spec(spec, "signal")
    if name == "boxcar":
        return signals.boxcar(int(args["n"]), float(args["eta"]))
    if name == "staircase":
        return signals.staircase(int(args["n"]))
    if name == "two-boxcar":
        return signals.two_boxcar(int(args["n"]), float(args["eta"]), float(args["rho"]))
    return _load_signal(spec)


@dataclass
class ResolvedInstance:
    spec: InstanceSpec
    phi: object
    dictionary: object
    x0: np.ndarray | None
    w: np.ndarray | None
    y: np.ndarray
    lam: float


def resolve_instance(spec, y_file=None, need_lambda=True):
    """Build operators, signals and the regularization weight."""
    if spec.signal_spec is None and y_file is None:
        raise DataError("an instance needs --signal or --y")
    x0 = _make_signal(spec.signal_spec) if spec.signal_spec is not None else None

    if x0 is not None:
        n = x0.size
    elif spec.phi_spec == "id" or spec.phi_spec.startswith("blur"):
        n = _load_signal(y_file).size
    else:
        raise DataError("cannot infer the signal length: give --signal")

    pname, pargs = _split_spec(spec.phi_spec, "phi")
    if pname == "id":
        phi = identity(n)
    elif pname == "blur":
        phi = circular_gaussian_blur(n, float(pargs["sigma"]))
    else:
        phi = dense(gaussian_random_matrix(int(pargs["q"]), n, int(pargs["seed"])),
                    label="gauss")
    dictionary = dict_from_spec(spec.dict_spec, n)

    nname, nargs = _split_spec(spec.noise_spec, "noise")
    if nname == "none":
        w = np.zeros(phi.out_dim)
    elif nname == "gaussian":
        rng = np.random.default_rng(int(nargs["seed"]))
        w = float(nargs["sigma"]) * rng.standard_normal(phi.out_dim)
    else:
        w = _load_signal(nargs["path"])
        if w.size != phi.out_dim:
            raise DataError(f"noise file has length {w.size}, expected {phi.out_dim}")

    if y_file is not None:
        y = _load_signal(y_file)
        if y.size != phi.out_dim:
            raise DataError(f"observation file has length {y.size}, expected {phi.out_dim}")
    else:
        y = phi.apply(x0) + w

    lam = None
    if need_lambda:
        lam = _resolve_lambda(spec, phi, dictionary, x0, w)
    return ResolvedInstance(spec=spec, phi=phi, dictionary=dictionary,
                            x0=x0, w=w, y=y, lam=lam)


def _resolve_lambda(spec, phi, dictionary, x0, w):
    lam_spec = spec.lam_spec
    if lam_spec == "auto-small":
        if x0 is None:
            raise DataError("auto-small needs --signal")
        s = d_support(x0, dictionary)
        dec = build_decomposition(dictionary, phi, s.cosupport)
        ic = compute_ic(dec, s).value
        if ic >= 1.0:
            raise PreconditionError(f"auto-small needs IC < 1, got IC = {ic:.6g}")
        window = small_noise_window(dec, x0, w, ic)
        if window.empty:
            raise PreconditionError(
                "noise too large: the small-noise lambda window "
                f"({window.lo:.6g}, {window.hi:.6g}) is empty")
        return window.midpoint
    if lam_spec.startswith("auto-noise("):
        if x0 is None:
            raise DataError("auto-noise needs --signal")
        rho = float(lam_spec[len("auto-noise("):-1])
        s = d_support(x0, dictionary)
        dec = build_decomposition(dictionary, phi, s.cosupport)
        arc = compute_arc(dec).value
        if arc >= 1.0:
            raise PreconditionError(f"ARC ≥ 1 (got {arc:.6g}): auto-noise lambda undefined")
        w_norm = float(np.linalg.norm(w))
        if w_norm == 0.0:
            raise PreconditionError("auto-noise with zero noise gives lambda = 0")
        return rho * w_norm * theorem_constants(dec).c_noise / (1.0 - arc)
    return float(lam_spec)


def _emit(payload, out_path):
    text = json.dumps(payload, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _maybe_print_resolved(ns, spec):
    if getattr(ns, "print_resolved", False):
        print(json.dumps(spec.canonical(), indent=2))
        return True
    return False


def _cmd_solve(ns):
    spec = _parse_phase(ns)
    if _maybe_print_resolved(ns, spec):
        return 0
    inst = resolve_instance(spec, y_file=ns.y)
    cfg = SolveConfig(lam=inst.lam, max_iters=ns.max_iters, tol=ns.tol)
    report = solve_lasso(inst.phi, inst.dictionary, inst.y, cfg)
    payload = {
        "lambda": inst.lam,
        "objective": report.objective,
        "iterations": report.iterations,
        "converged": report.converged,
        "solution": [float(v) for v in report.solution],
    }
    _emit(payload, ns.out)
    return 0


def _cmd_certify(ns):
    spec = _parse_phase(ns)
    if _maybe_print_resolved(ns, spec):
        return 0
    try:
        with open(ns.report) as fh:
            solve_payload = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read solve report {ns.report!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"solve report {ns.report!r} is not JSON: {exc}") from exc
    if "solution" not in solve_payload or "lambda" not in solve_payload:
        raise DataError("solve report must carry 'solution' and 'lambda'")
    inst = resolve_instance(spec, y_file=ns.y, need_lambda=False)
    x = np.asarray(solve_payload["solution"], dtype=float)
    lam = float(solve_payload["lambda"])
    reference = None
    if inst.x0 is not None:
        reference = d_support(inst.x0, inst.dictionary)
    cert = first_order_certificate(inst.phi, inst.dictionary, inst.y, lam, x,
                                   reference_signs=reference)
    _emit(cert.summary(), ns.out)
    return 0


def _cmd_criterion(ns, which):
    spec = _parse_phase(ns)
    if _maybe_print_resolved(ns, spec):
        return 0
    inst = resolve_instance(spec, need_lambda=False)
    if inst.x0 is None:
        raise DataError(f"{which} needs --signal to define the sign pattern")
    s = d_support(inst.x0, inst.dictionary)
    dec = build_decomposition(inst.dictionary, inst.phi, s.cosupport)
    dr = DRConfig(tol=ns.dr_tol, max_iters=ns.dr_max_iters)
    if which == "ic":
        res = compute_ic(dec, s, dr)
        value, converged, iterations = res.value, res.converged, res.iterations
    elif which == "arc":
        res = compute_arc(dec, cap=ns.cap, config=dr)
        value, converged, iterations = res.value, res.converged, res.iterations
    else:
        value, converged, iterations = compute_warc(dec), True, 0
    payload = {
        "value": float(value),
        "converged": bool(converged),
        "iterations": int(iterations),
        "support": [int(i) + 1 for i in dec.I],
        "cosupport_dim": int(dec.J.size),
    }
    _emit(payload, ns.out)
    return 0


def _cmd_experiment(ns):
    params = {}
    for item in ns.param or []:
        key, eq, val = item.partition("=")
        if not eq:
            raise DataError(f"--param expects key=value, got {item!r}")
        if "," in val:
            params[key] = tuple(float(v) for v in val.split(","))
        else:
            try:
                params[key] = float(val) if "." in val or "e" in val.lower() else int(val)
            except ValueError:
                params[key] = val
    if ns.name == "fused_cs":
        params.setdefault("n_workers", worker_count())
    spec = ExperimentSpec(name=ns.name, parameters=params, seed=ns.seed,
                          output_path=ns.out)
    table = run_experiment(spec)
    if not ns.out:
        table.to_csv(mkstdout())
    return 0


def mkstdout():
    return sys.stdout


def _cmd_version(_ns):
    print(__version__)
    return 0


def _add_instance_flags(sub, with_lambda=True):
    sub.add_argument("--phi", default="id",
                     help="forward operator: id | blur:sigma=S | gauss:q=Q,seed=K")
    sub.add_argument("--dict", default="tv",
                     help="dictionary: tv | id | haar:jmax=J,tau=T | fused:eps=E")
    sub.add_argument("--signal", default=None,
                     help="ground-truth signal: CSV path or boxcar:n=..,eta=.. | "
                          "staircase:n=.. | two-boxcar:n=..,eta=..,rho=..")
    sub.add_argument("--noise", default="none",
                     help="noise: none | gaussian:sigma=S,seed=K | file:path=P")
    sub.add_argument("--y", default=None, help="observations CSV (one value per line)")
    if with_lambda:
        sub.add_argument("--lambda", dest="lam", default="0",
                         help="number | auto-small | auto-noise(rho)")
    sub.add_argument("--out", default=None, help="output path (stdout when omitted)")
    sub.add_argument("--print-resolved", action="store_true",
                     help="echo the canonical instance spec as JSON and exit")


def build_parser():
    parser = argparse.ArgumentParser(prog="cosparse",
                                     description="Sparse analysis regularization toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="solve the penalized problem")
    _add_instance_flags(solve)
    solve.add_argument("--max-iters", type=int, default=100_000)
    solve.add_argument("--tol", type=float, default=1e-10)
    solve.set_defaults(func=_cmd_solve)

    certify = commands.add_parser("certify", help="check a solve report")
    _add_instance_flags(certify, with_lambda=False)
    certify.add_argument("--report", required=True, help="solve report JSON")
    certify.set_defaults(func=_cmd_certify)

    for which in ("ic", "arc", "warc"):
        crit = commands.add_parser(which, help=f"compute the {which} criterion")
        _add_instance_flags(crit, with_lambda=False)
        crit.add_argument("--dr-tol", type=float, default=1e-10)
        crit.add_argument("--dr-max-iters", type=int, default=50_000)
        if which == "arc":
            crit.add_argument("--cap", type=int, default=16)
        crit.set_defaults(func=lambda ns, w=which: _cmd_criterion(ns, w))

    experiment = commands.add_parser("experiment", help="run a numerical study")
    experiment.add_argument("name", choices=("tv_staircase", "haar_deconv", "fused_cs"))
    experiment.add_argument("--param", action="append", default=[],
                            help="key=value, repeatable; commas make a list")
    experiment.add_argument("--seed", type=int, default=0)
    experiment.add_argument("--out", default=None)
    experiment.set_defaults(func=_cmd_experiment)

    version = commands.add_parser("version", help="print the version")
    version.set_defaults(func=_cmd_version)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return ns.func(ns)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
