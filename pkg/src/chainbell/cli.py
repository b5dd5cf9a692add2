"""Command-line front end.

Exit codes: 0 every verdict passes, 1 some verdict fails, 2 usage error or
size cap, 3 degenerate extraction.
"""

import argparse
import csv
import io
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, chained, linalg, randomness, robustness, selftest
from .ncpoly import SYMBOLIC_TOL

NUMERIC_TOL = 1e-9
DISTANCE_TOL = 1e-8
ENTROPY_TOL = 1e-7
SOS_FIRST_MAX_N = 32
NUMERIC_SEEDS = 5

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- serialization -------------------------------------------------------------


def _float_json(x):
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = format(x, ".17g")
    return text if any(ch in text for ch in ".e") else text + ".0"


def to_json(obj, indent=0):
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float_json(float(obj))
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{to_json(str(k))}: {to_json(obj[k], indent + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj, key=str):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}")
    else:
        yield prefix, obj


def _scalar_text(v):
    if isinstance(v, (float, np.floating)):
        return _float_json(float(v))
    if v is None:
        return ""
    return str(v)


def to_csv(report):
    """Long format: one ``n,key,value`` row per scalar in ``results``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "key", "value"])
    for entry in report["results"]:
        n = entry.get("n", "")
        for key, val in _flatten({k: v for k, v in entry.items() if k != "n"}):
            w.writerow([n, key, _scalar_text(val)])
    w.writerow(["", "verdict", report["verdict"]])
    return buf.getvalue()


def to_text(report):
    lines = [f"{report['command']}  (chainbell {report['version']}, seed {report['seed']})"]
    for entry in report["results"]:
        lines.append(f"n = {entry.get('n')}")
        for key, val in _flatten({k: v for k, v in entry.items() if k != "n"}):
            lines.append(f"  {key}: {_scalar_text(val)}")
    lines.append(f"verdict: {report['verdict']}")
    return "\n".join(lines) + "\n"


# -- argument helpers --------------------------------------------------------


def parse_n_range(text):
    """``"5"``, ``"2..8"`` or ``"2,4,8"`` to a sorted list of ints."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad n specification {text!r}") from None
    if not values:
        raise UsageError(f"empty n specification {text!r}")
    if min(values) < 2:
        raise UsageError("n must be >= 2")
    return sorted(set(values))


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for num, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def thread_count():
    raw = os.environ.get("CHAINBELL_THREADS", "")
    if not raw:
        return 1
    try:
        k = int(raw)
    except ValueError:
        raise UsageError(f"CHAINBELL_THREADS must be an integer, got {raw!r}") from None
    return max(1, k)


def _pmap(fn, items):
    """Order-preserving map, parallel up to ``CHAINBELL_THREADS``."""
    items = list(items)
    k = min(thread_count(), max(1, len(items)))
    if k == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def _dump(args, name, text):
    if not args.dump:
        return
    d = Path(args.dump)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)


# -- commands ------------------------------------------------------------------


def cmd_verify_sos(args):
    ns = parse_n_range(args.n)
    cap = chained.SOS_SECOND_MAX_N if args.degree == 2 else SOS_FIRST_MAX_N
    if args.max_n is not None:
        cap = args.max_n
    if max(ns) > cap:
        raise UsageError(f"n={max(ns)} exceeds the degree-{args.degree} cap of {cap} (raise with --max-n)")

    def run(n):
        terms = chained.sos_terms_first(n) if args.degree == 1 else chained.sos_terms_second(n)
        if args.variant == "dual":
            terms = chained.sos_variant(terms)
        expanded = chained.expand_terms(terms, n)
        sym = chained.sos_residual(terms, n)
        ident = abs(expanded.identity_coefficient() - chained.max_violation(n))
        numeric = max(
            chained.sos_numeric_residual(terms, chained.random_realization(n, 2 + s % 3, args.seed + s))
            for s in range(NUMERIC_SEEDS)
        )
        _dump(args, f"sos_n{n}_deg{args.degree}_{args.variant}.txt", expanded.dump())
        ok = sym < args.sym_tol and ident < args.sym_tol and numeric < args.num_tol
        return {
            "n": n,
            "terms": len(terms),
            "symbolic_residual": sym,
            "identity_coefficient": expanded.identity_coefficient().real,
            "identity_error": ident,
            "numeric_residual": numeric,
            "verdict": "pass" if ok else "fail",
        }

    return _pmap(run, ns)


def _selftest_one(args, n):
    if args.jitter > 0 or args.theta is not None:
        r = robustness.perturbed_realization(n, args.jitter, args.seed + n, args.theta)
    else:
        r = chained.optimal_realization(n)
    if args.junk_dims != "1x1":
        ja, jb = (int(x) for x in args.junk_dims.split("x"))
        r = selftest.locally_rotated(r, args.seed + n, (ja, jb))
    method = "gates" if args.gates else "closed_form"
    rep = selftest.theorem1_distances(r, method=method)
    diag = selftest.exact_identity_diagnostics(r)
    eps = robustness.deficit(r)
    entry = {
        "n": n,
        "epsilon": eps,
        "fidelity": rep.fidelity,
        "junk_norm": rep.junk_norm,
        "max_distance": rep.max_distance,
        "distances": rep.condition_distances,
        "max_diagnostic_residual": max(diag.values()),
    }
    _dump(args, f"junk_n{n}.txt", linalg.dump_matrix(rep.junk_state))
    exact = args.jitter == 0 and args.theta is None
    if exact:
        ok = rep.fidelity > 1 - args.num_tol and rep.max_distance < args.dist_tol
    else:
        try:
            emp = robustness.empirical_check(r, args.junk_variant, args.chsh_fallback, method)
        except robustness.BoundUndefinedError:
            entry["verdict"] = "out of formula range"
            return entry
        counts = {v: 0 for v in (robustness.HOLDS, robustness.VACUOUS, robustness.VIOLATED)}
        for v in emp.verdicts.values():
            counts[v] += 1
        entry["bound_verdicts"] = counts
        ok = counts[robustness.VIOLATED] == 0
    entry["verdict"] = "pass" if ok else "fail"
    return entry


def cmd_selftest(args):
    ns = parse_n_range(args.n)
    return _pmap(lambda n: _selftest_one(args, n), ns)


def _report_dict(rep):
    return {
        "eps1": rep.eps1,
        "eps2": rep.eps2,
        "omega": rep.omega,
        "junk_bound": rep.junk_bound,
        "f_state": rep.f_state,
        "g": {str(k): v for k, v in rep.g.items()},
        "h": {str(k): v for k, v in rep.h.items()},
        "f_A": {str(k): v for k, v in rep.f_A.items()},
        "f_B": {str(k): v for k, v in rep.f_B.items()},
        "max_f_AB": max(rep.f_AB.values()),
    }


def cmd_robustness(args):
    ns = parse_n_range(args.n)
    out = []
    for n in ns:
        entry = {"n": n}
        try:
            if args.samples == 0:
                rep = robustness.f_bounds(args.eps, n, args.junk_variant, args.chsh_fallback)
                entry.update(_report_dict(rep))
                entry["epsilon"] = args.eps
                entry["verdict"] = "pass"
            else:
                entry.update(_robustness_sweep(args, n))
        except robustness.BoundUndefinedError:
            entry["verdict"] = "out of formula range"
        out.append(entry)
    return out


def _robustness_sweep(args, n):
    seeds = [args.seed + s for s in range(args.samples)]

    def one(seed):
        r = robustness.perturbed_realization(n, args.jitter, seed, args.theta)
        rep = robustness.empirical_check(r, args.junk_variant, args.chsh_fallback)
        ratio = max(rep.empirical[k] / rep.bound_for(k) if rep.bound_for(k) > 0 else 0.0 for k in rep.empirical)
        return rep, ratio

    runs = _pmap(one, seeds)
    counts = {v: 0 for v in (robustness.HOLDS, robustness.VACUOUS, robustness.VIOLATED)}
    for rep, _ in runs:
        for v in rep.verdicts.values():
            counts[v] += 1
    return {
        "samples": len(seeds),
        "jitter": args.jitter,
        "max_epsilon": max(rep.epsilon for rep, _ in runs),
        "max_measured_over_bound": max(ratio for _, ratio in runs),
        "verdict_counts": counts,
        "verdict": "pass" if counts[robustness.VIOLATED] == 0 else "fail",
    }


def cmd_randomness(args):
    ns = parse_n_range(args.n)
    out = []
    for n in ns:
        if n % 2:
            raise UsageError(f"the modified inequality needs even n, got {n}")
        r = randomness.optimal_modified_realization(n, args.k)
        poly = randomness.modified_bell_polynomial(n, args.k)
        table = randomness.certified_distribution(r, n, args.k)
        classical, quantum = randomness.modified_bounds(n)
        brute = None
        if 2 * n + 1 <= 2 * chained.BRUTEFORCE_MAX_N + 1:
            brute = int(round(chained.classical_max_bruteforce(poly)))
        achieved = chained.bell_value(r, poly)
        h = randomness.min_entropy(table)
        ok = (
            np.abs(table.probs - 0.25).max() < args.num_tol
            and abs(h - 2.0) < ENTROPY_TOL
            and abs(achieved - quantum) < args.num_tol
            and (brute is None or brute == classical)
        )
        out.append({
            "n": n,
            "setting_pair": list(table.setting_pair),
            "probabilities": {f"{a}{b}": p for (a, b), p in table.as_dict().items()},
            "min_entropy_bits": h,
            "classical_bound": classical,
            "classical_bruteforce": brute,
            "quantum_bound": quantum,
            "achieved": achieved,
            "marginals": list(randomness.marginals(r, n, args.k)),
            "verdict": "pass" if ok else "fail",
        })
    return out


def cmd_violation(args):
    ns = parse_n_range(args.n)

    def run(n):
        brute = chained.classical_bound_bruteforce(n) if n <= chained.BRUTEFORCE_MAX_N else None
        quantum = chained.max_violation(n)
        achieved = chained.bell_value(chained.optimal_realization(n))
        ok = (brute is None or brute == chained.classical_bound(n)) and abs(achieved - quantum) < args.num_tol
        return {
            "n": n,
            "classical_bound": chained.classical_bound(n),
            "classical_bruteforce": brute,
            "bruteforce_match": None if brute is None else brute == chained.classical_bound(n),
            "quantum_bound": quantum,
            "achieved": achieved,
            "verdict": "pass" if ok else "fail",
        }

    return _pmap(run, ns)


COMMANDS = {
    "verify-sos": cmd_verify_sos,
    "selftest": cmd_selftest,
    "robustness": cmd_robustness,
    "randomness": cmd_randomness,
    "violation": cmd_violation,
}


# -- parser ---------------------------------------------------------------------


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _nonneg(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _flag(text):
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", default="2..6", help="n, a range lo..hi or a comma list")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--config", help="file of 'key = value' lines supplying defaults")
    common.add_argument("--dump", help="directory for matrix and polynomial dumps")
    common.add_argument("--sym-tol", type=_positive, default=SYMBOLIC_TOL)
    common.add_argument("--num-tol", type=_positive, default=NUMERIC_TOL)
    common.add_argument("--dist-tol", type=_positive, default=DISTANCE_TOL)
    common.add_argument("--no-wall-time", action="store_true",
                        help="report wall_ms as 0 so repeated runs are byte-identical")

    p = argparse.ArgumentParser(prog="chainbell", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"chainbell {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-sos", parents=[common], help="check the sum-of-squares certificates")
    s.add_argument("--degree", type=int, choices=(1, 2), default=1)
    s.add_argument("--variant", choices=("primary", "dual"), default="primary")
    s.add_argument("--max-n", type=int, default=None, help="override the size cap")

    for name, helptext in (("selftest", "run the swap-isometry extraction"),
                           ("robustness", "evaluate and check the robustness bounds")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--jitter", type=_nonneg, default=0.0, help="angle jitter in radians")
        s.add_argument("--theta", type=float, default=None, help="state cos(t)|00> + sin(t)|11>")
        s.add_argument("--junk-variant", choices=robustness.JUNK_VARIANTS, default="main_text")
        s.add_argument("--chsh-fallback", type=_flag, nargs="?", const=True, default=False)
        if name == "selftest":
            s.add_argument("--gates", type=_flag, nargs="?", const=True, default=False,
                           help="apply the isometry gate by gate")
            s.add_argument("--junk-dims", default="1x1", help="embed random junk, e.g. 2x3")
        else:
            s.add_argument("--eps", type=_nonneg, default=1e-6, help="deficit for closed-form bounds")
            s.add_argument("--samples", type=int, default=0, help="perturbed realizations per n")

    s = sub.add_parser("randomness", parents=[common], help="certified randomness at the optimum")
    s.add_argument("--k", type=int, default=1, help="Alice input mirrored by the extra Bob input")

    sub.add_parser("violation", parents=[common], help="classical and quantum bounds")
    return p


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            values = read_config(args.config)
        except OSError as e:
            raise UsageError(f"cannot read config: {e}") from None
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        for key, raw in values.items():
            if key not in known or key in ("help", "config"):
                raise UsageError(f"unknown config key {key!r}")
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                sub.set_defaults(**{key: _flag(raw)})
            else:
                conv = action.type or str
                try:
                    sub.set_defaults(**{key: conv(raw)})
                except (ValueError, argparse.ArgumentTypeError) as e:
                    raise UsageError(f"config key {key!r}: {e}") from None
        args = parser.parse_args(argv)
    if args.command in ("selftest", "robustness"):
        if getattr(args, "samples", 0) < 0:
            raise UsageError("--samples must be >= 0")
    if args.command == "selftest" and not _valid_junk_dims(args.junk_dims):
        raise UsageError(f"bad --junk-dims {args.junk_dims!r}")
    return args


def _valid_junk_dims(text):
    parts = text.split("x")
    return len(parts) == 2 and all(p.isdigit() and int(p) >= 1 for p in parts)


def _config_echo(args):
    skip = {"output", "format", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def run(argv=None):
    """Parse, execute and render; returns ``(exit_code, text)``."""
    start = time.perf_counter()
    try:
        args = parse(argv)
        results = COMMANDS[args.command](args)
    except UsageError as e:
        return EXIT_USAGE, f"error: {e}\n"
    except selftest.DegenerateExtractionError as e:
        return EXIT_DEGENERATE, f"error: {e}\n"
    except ValueError as e:
        return EXIT_USAGE, f"error: {e}\n"
    ok = all(r.get("verdict") in ("pass", "out of formula range") for r in results)
    report = {
        "command": args.command,
        "config": _config_echo(args),
        "results": results,
        "verdict": "pass" if ok else "fail",
        "version": __version__,
        "seed": args.seed,
        "wall_ms": 0.0 if args.no_wall_time else (time.perf_counter() - start) * 1000,
    }
    if args.format == "json":
        text = to_json(report) + "\n"
    elif args.format == "csv":
        text = to_csv(report)
    else:
        text = to_text(report)
    if args.output:
        Path(args.output).write_text(text)
        text = ""
    return (EXIT_OK if ok else EXIT_FAIL), text


def main(argv=None):
    try:
        code, text = run(argv)
    except SystemExit as e:  # argparse usage errors
        return 2 if e.code not in (0, None) else 0
    stream = sys.stderr if text.startswith("error:") else sys.stdout
    stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
