"""Command-line front end: ``qdesk run|trotter|spectrum|surface|compile``.

Every command writes one text artefact (CSV or report) that opens with a
``#`` comment block echoing the version, the command line, the effective
configuration and the seed. Identical inputs give byte-identical files.

Exit codes: 0 success, 1 usage or parse error, 2 precondition violation,
3 soft "not found" outcome (no compiled sequence, no threshold crossing).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import shlex
import sys
import tempfile
import warnings

import numpy as np

from . import __version__
from .circuit import (
    CircuitParseError,
    compile_1q,
    execute,
    parse_circuit,
    phase_distance,
    sequence_matrix,
)
from .hamsim import (
    HamiltonianParseError,
    TrotterPlan,
    commutator_bound,
    gate_count,
    operator_error,
    parse_hamiltonian,
    step_size_for,
)
from .phasest import PhaseEstimationConfig, auto_time_unit, spectrum_histogram
from .statevec import StateVector, basis_state, sample_counts
from .surface import (
    TRIAL_COLUMNS,
    NoCrossing,
    logical_error_reports,
    run_trials,
    threshold_estimate,
    union_bound,
    verify_code_conditions,
)

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_NOT_FOUND = 0, 1, 2, 3


class UsageError(Exception):
    pass


class SoftFailure(Exception):
    """The search or estimate came up empty; nothing is written."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- defaults and config merging ------------------------------------------------

DEFAULTS = {
    "run": {"shots": 1000, "n": None, "majority": False},
    "trotter": {"t": 1.0, "steps": [10, 20, 40], "target_error": None, "constant": 1.0},
    "spectrum": {"state": None, "m": 4, "T": "auto", "shots": 1000, "mode": "exact",
                 "steps": 100},
    "surface trials": {"d": [3, 5, 7], "eps": [0.05, 0.1], "trials": 10000},
    "surface threshold": {"d": [3, 5, 7], "eps": [0.08, 0.09, 0.1, 0.11, 0.12],
                          "trials": 20000, "bootstrap": 400},
    "surface bound": {"d": [3, 5], "eps": [0.01, 0.02]},
    "surface verify": {"d": 3, "max_weight": 1, "tol": 1e-9},
    "compile": {"target": None, "eps": 0.1, "max_depth": 20},
}
GLOBAL_DEFAULTS = {"seed": 0, "out": "-", "workers": 1}


def _effective_config(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags."""
    cfg = dict(GLOBAL_DEFAULTS)
    cfg.update(DEFAULTS[command])
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            cfg[key] = value
    if not 0 <= int(cfg["seed"]) < 2**64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    if int(cfg["workers"]) < 1:
        raise UsageError("workers must be positive")
    return cfg


# --- output ---------------------------------------------------------------------

def _header(argv: list[str], cfg: dict, extra: list[str] = ()) -> str:
    lines = [
        f"# qdesk {__version__}",
        f"# command: qdesk {shlex.join(argv)}",
        f"# config: {json.dumps(cfg, sort_keys=True)}",
        f"# seed: {cfg['seed']}",
    ]
    lines.extend(f"# {x}" for x in extra)
    return "\n".join(lines) + "\n"


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _emit(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qdesk-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


# --- commands -------------------------------------------------------------------

def cmd_run(args, cfg):
    text = _read(args.circuit)
    try:
        circuit = parse_circuit(text, cfg["n"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg["shots"] < 1:
        raise ValueError("shots must be positive")
    n = circuit.n_qubits
    final = execute(circuit, basis_state(n, 0))
    rng = np.random.default_rng(cfg["seed"])
    counts = sample_counts(final, cfg["shots"], rng)
    shots = int(counts.sum())
    rows = [
        (format(x, f"0{n}b"), int(c), _fmt(c / shots))
        for x, c in enumerate(counts) if c
    ]
    extra = [f"qubits: {n}", f"gates: {len(circuit)}"]
    if cfg["majority"]:
        best = int(np.argmax(counts))
        frac = counts[best] / shots
        verdict = "accepted" if frac >= 2 / 3 else "inconclusive"
        extra.append(f"majority outcome={format(best, f'0{n}b')} fraction={_fmt(frac)} {verdict}")
    return extra, _csv(("bitstring", "count", "frequency"), rows)


def cmd_trotter(args, cfg):
    try:
        ham = parse_hamiltonian(_read(args.hamiltonian))
    except HamiltonianParseError as exc:
        raise UsageError(str(exc)) from None
    t = float(cfg["t"])
    if t <= 0:
        raise ValueError("evolution time must be positive")
    if cfg["target_error"] is not None:
        plans = [step_size_for(float(cfg["target_error"]), ham, t, float(cfg["constant"]))]
    else:
        if any(int(s) < 1 for s in cfg["steps"]):
            raise ValueError("step counts must be positive")
        plans = [TrotterPlan.for_time(t, int(s)) for s in cfg["steps"]]
    bound = commutator_bound(ham)
    rows = []
    for plan in plans:
        err = operator_error(ham, plan)
        predicted = bound * plan.delta**2 * plan.steps
        rows.append((_fmt(plan.delta), plan.steps, gate_count(ham, plan), _fmt(err), _fmt(predicted)))
    extra = [f"qubits: {ham.n_qubits}", f"terms: {ham.M}", f"commutator_bound: {_fmt(bound)}"]
    cols = ("delta", "steps", "gate_count", "operator_error", "commutator_bound_prediction")
    return extra, _csv(cols, rows)


def parse_state(text: str, n: int) -> StateVector:
    """Product state from one character per qubit, most significant first.

    ``0``/``1`` are basis states, ``+``/``-`` the X eigenstates.
    """
    if len(text) != n or set(text) - set("01+-"):
        raise UsageError(f"state must be {n} characters from 0 1 + -, got {text!r}")
    single = {
        "0": np.array([1, 0], dtype=complex),
        "1": np.array([0, 1], dtype=complex),
        "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
        "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
    }
    amps = np.ones(1, dtype=complex)
    for ch in text:  # leftmost character is the high qubit
        amps = np.kron(amps, single[ch])
    return StateVector(n, amps)


def cmd_spectrum(args, cfg):
    try:
        ham = parse_hamiltonian(_read(args.hamiltonian))
    except HamiltonianParseError as exc:
        raise UsageError(str(exc)) from None
    state = cfg["state"] or "0" * ham.n_qubits
    psi = parse_state(state, ham.n_qubits)
    if cfg["T"] == "auto":
        T = auto_time_unit(ham)
    else:
        try:
            T = float(cfg["T"])
        except ValueError:
            raise UsageError(f"T must be a number or 'auto', got {cfg['T']!r}") from None
    cfg["T_effective"] = T
    pe = PhaseEstimationConfig(int(cfg["m"]), int(cfg["shots"]), T)
    plan = TrotterPlan.for_time(T, int(cfg["steps"])) if cfg["mode"] == "trotter" else None
    rng = np.random.default_rng(cfg["seed"])
    hist = spectrum_histogram(ham, psi, pe, rng, evolution=cfg["mode"], plan=plan)
    extra = [
        f"peak phase={_fmt(p.phase)} weight={_fmt(p.weight)} energy={_fmt(p.energy)}"
        for p in hist.peaks()
    ]
    rows = [(k, _fmt(ph), c, _fmt(f)) for k, ph, c, f in hist.csv_rows()]
    return extra, _csv(("k", "phase", "count", "frequency"), rows)


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def cmd_surface_trials(args, cfg):
    rows = []
    for d in _as_list(cfg["d"]):
        for eps in _as_list(cfg["eps"]):
            st = run_trials(int(d), float(eps), int(cfg["trials"]), int(cfg["seed"]),
                            workers=int(cfg["workers"]))
            rows.append(tuple(_fmt(v) if isinstance(v, float) else v for v in st.csv_row()))
    return [], _csv(TRIAL_COLUMNS, rows)


def cmd_surface_threshold(args, cfg):
    try:
        rep = threshold_estimate(
            [int(d) for d in _as_list(cfg["d"])], [float(e) for e in _as_list(cfg["eps"])],
            int(cfg["trials"]), int(cfg["seed"]), workers=int(cfg["workers"]),
            bootstrap=int(cfg["bootstrap"]),
        )
    except NoCrossing as exc:
        raise SoftFailure(str(exc)) from None
    rows = [tuple(_fmt(v) if isinstance(v, float) else v for v in st.csv_row()) for st in rep.stats]
    return rep.lines(), _csv(TRIAL_COLUMNS, rows)


def cmd_surface_bound(args, cfg):
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        for d in _as_list(cfg["d"]):
            for eps in _as_list(cfg["eps"]):
                rows.append((int(d), _fmt(eps), _fmt(union_bound(int(d), float(eps)))))
    return [], _csv(("d", "epsilon", "union_bound"), rows)


def cmd_surface_verify(args, cfg):
    rep = verify_code_conditions(int(cfg["d"]), int(cfg["max_weight"]), float(cfg["tol"]))
    lines = ["[correctable errors]", *rep.lines()]
    for name, r in logical_error_reports(int(cfg["d"]), float(cfg["tol"])).items():
        lines += [f"[identity vs {name}]", *r.lines()]
    if not rep.passed:
        raise ValueError("code conditions fail for the correctable error set:\n" + "\n".join(lines))
    return [], "\n".join(lines) + "\n"


NAMED_TARGETS = {
    "I": np.eye(2),
    "H": np.array([[1, 1], [1, -1]]) / math.sqrt(2),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "S": np.diag([1, 1j]),
    "X": np.array([[0, 1], [1, 0]]),
    "Z": np.diag([1, -1]),
    "Y": np.array([[0, -1j], [1j, 0]]),
}


def parse_target(text: str) -> np.ndarray:
    """Named gate, ``rz:<angle>``, ``rx:<angle>`` or four comma-separated entries."""
    s = text.strip()
    if s.upper() in NAMED_TARGETS:
        return np.asarray(NAMED_TARGETS[s.upper()], dtype=complex)
    try:
        if s.lower().startswith("rz:"):
            a = float(s[3:])
            return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
        if s.lower().startswith("rx:"):
            a = float(s[3:])
            c, sn = math.cos(a / 2), math.sin(a / 2)
            return np.array([[c, -1j * sn], [-1j * sn, c]])
        entries = [complex(x.replace(" ", "")) for x in s.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse target {text!r}") from None
    if len(entries) != 4:
        raise UsageError("matrix target needs four entries u00,u01,u10,u11")
    return np.array(entries, dtype=complex).reshape(2, 2)


def cmd_compile(args, cfg):
    target = parse_target(str(cfg["target"]))
    res = compile_1q(target, float(cfg["eps"]), int(cfg["max_depth"]))
    if not res.found:
        raise SoftFailure(
            f"no sequence within eps={cfg['eps']} up to depth {cfg['max_depth']} "
            f"({res.explored} unitaries explored)"
        )
    check = phase_distance(target, sequence_matrix(res.sequence))
    body = (
        f"sequence: {' '.join(res.sequence) if res.sequence else '(empty)'}\n"
        f"length: {len(res.sequence)}\n"
        f"distance: {_fmt(check)}\n"
        f"explored: {res.explored}\n"
    )
    return [], body


# --- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="unsigned 64-bit RNG seed (default 0)")
    common.add_argument("--out", help="output path, '-' for stdout (default)")
    common.add_argument("--workers", type=int, help="parallel trial workers (never changes results)")
    common.add_argument("--config", help="JSON file of parameter overrides")

    p = _Parser(prog="qdesk", description="desk-scale quantum computing experiments")
    p.add_argument("--version", action="version", version=f"qdesk {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", parents=[common], help="execute a circuit file and sample outcomes")
    r.add_argument("circuit")
    r.add_argument("--n", type=int, help="register width (default: fit the circuit)")
    r.add_argument("--shots", type=int)
    r.add_argument("--majority", action="store_true", help="report the majority outcome")

    t = sub.add_parser("trotter", parents=[common], help="product-formula error table")
    t.add_argument("hamiltonian")
    t.add_argument("--t", type=float, help="total evolution time")
    g = t.add_mutually_exclusive_group()
    g.add_argument("--steps", type=int, nargs="+")
    g.add_argument("--target-error", type=float)
    t.add_argument("--constant", type=float, help="step-size rule constant")

    s = sub.add_parser("spectrum", parents=[common], help="phase-estimation spectroscopy")
    s.add_argument("hamiltonian")
    s.add_argument("--state", help="product state, one of 0 1 + - per qubit, MSB first")
    s.add_argument("--m", type=int, help="time register width")
    s.add_argument("--T", help="time unit or 'auto'")
    s.add_argument("--shots", type=int)
    s.add_argument("--mode", choices=("exact", "trotter"))
    s.add_argument("--steps", type=int, help="Trotter steps per time unit (trotter mode)")

    su = sub.add_parser("surface", help="surface-code memory experiments")
    ssub = su.add_subparsers(dest="surface_command", required=True, parser_class=_Parser)
    for name, helptext in (("trials", "logical failure rates"),
                           ("threshold", "threshold from curve crossings")):
        x = ssub.add_parser(name, parents=[common], help=helptext)
        x.add_argument("--d", type=int, nargs="+")
        x.add_argument("--eps", type=float, nargs="+")
        x.add_argument("--trials", type=int)
        if name == "threshold":
            x.add_argument("--bootstrap", type=int)
    b = ssub.add_parser("bound", parents=[common], help="path-counting union bound")
    b.add_argument("--d", type=int, nargs="+")
    b.add_argument("--eps", type=float, nargs="+")
    v = ssub.add_parser("verify", parents=[common], help="check the code conditions on explicit states")
    v.add_argument("--d", type=int)
    v.add_argument("--max-weight", type=int)
    v.add_argument("--tol", type=float)

    c = sub.add_parser("compile", parents=[common], help="brute-force {H, T} approximation")
    c.add_argument("--target", required=True, help="I H T S X Y Z, rz:<a>, rx:<a> or u00,u01,u10,u11")
    c.add_argument("--eps", type=float)
    c.add_argument("--max-depth", type=int)
    return p


COMMANDS = {
    "run": cmd_run,
    "trotter": cmd_trotter,
    "spectrum": cmd_spectrum,
    "surface trials": cmd_surface_trials,
    "surface threshold": cmd_surface_threshold,
    "surface bound": cmd_surface_bound,
    "surface verify": cmd_surface_verify,
    "compile": cmd_compile,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            args = build_parser().parse_args(argv)
            command = args.command
            if command == "surface":
                command = f"surface {args.surface_command}"
            cfg = _effective_config(command, args)
            extra, body = COMMANDS[command](args, cfg)
        except UsageError as exc:
            print(f"qdesk: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except SoftFailure as exc:
            print(f"qdesk: {exc}", file=sys.stderr)
            return EXIT_NOT_FOUND
        except (ValueError, CircuitParseError) as exc:
            print(f"qdesk: precondition violated: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
        finally:
            notes = [f"warning: {w.category.__name__}: {w.message}" for w in caught]
            for note in notes:
                print(f"qdesk: {note}", file=sys.stderr)
    _emit(cfg["out"], _header(argv, cfg, notes + extra) + body)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
