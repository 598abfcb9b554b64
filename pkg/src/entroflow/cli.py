"""``entroflow`` command line: CSV curves, stability reports, verification suites.

Exit codes: 0 success, 1 domain or verification failure, 2 usage error.
"""

import argparse
import json
import math
import re
import sys
from decimal import Decimal, InvalidOperation

import numpy as np

from . import __version__
from .curves import EntropyCurve, is_non_monotone, strict_extrema
from .dde_kernel import (
    BrownianHistory,
    DelayParams,
    PointHistory,
    Stability,
    TabulatedHistory,
    fundamental_solution,
    hayes_report,
    solution_map,
)
from .errors import DomainError
from .gaussian_entropy import Gaussian1D, conditional_entropy, gibbs_entropy
from .ou_process import OUParams, ou_entropy_curve, ou_stationary, ou_transition
from .sdde_gaussian import entropy_curve_brownian, entropy_curve_point, stationary_law
from .verify import SUITES, render, run_suite

# a truncated decimal with this many significant digits is read as "about"
# its value, so stability reports Marginal if the rounding box crosses a boundary
ROUNDED_SIG_DIGITS = 6

_PI_RE = re.compile(r"^\s*([+-]?)\s*(?:([0-9.eE+-]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


class UsageError(Exception):
    pass


def parse_number(text):
    """Float from a literal such as ``0.25``, ``-1``, ``pi``, ``pi/2`` or ``3*pi/4``."""
    s = str(text).strip().lower()
    m = _PI_RE.match(s)
    try:
        if m:
            sign = -1.0 if m.group(1) == "-" else 1.0
            coef = float(m.group(2)) if m.group(2) else 1.0
            den = float(m.group(3)) if m.group(3) else 1.0
            val = sign * coef * math.pi / den
        else:
            val = float(s)
    except ValueError:
        raise UsageError(f"cannot parse number {text!r}") from None
    if not math.isfinite(val):
        raise UsageError(f"number must be finite, got {text!r}")
    return val


def literal_resolution(text):
    """Half a unit in the last place of a long decimal literal, else 0."""
    s = str(text).strip().lower()
    if "pi" in s or "e" in s:
        return 0.0
    try:
        d = Decimal(s)
    except InvalidOperation:
        return 0.0
    digits = d.as_tuple()
    if digits.exponent >= 0 or len(digits.digits) < ROUNDED_SIG_DIGITS:
        return 0.0
    return 0.5 * 10.0 ** digits.exponent


# --- option tables ---------------------------------------------------------
# (flag, converter, default); None default means required

_NUM = parse_number


def _int(text):
    try:
        return int(str(text).strip())
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None


def _str(text):
    return str(text).strip()


OPTIONS = {
    "ou": [("a", _NUM, None), ("sigma", _NUM, None), ("init-mean", _NUM, "0"),
           ("init-var", _NUM, "1"), ("t-max", _NUM, "5"), ("points", _int, "500"),
           ("out", _str, "-")],
    "dde": [("a", _NUM, "0"), ("b", _NUM, None), ("tau", _NUM, None), ("phi-const", _NUM, ""),
            ("phi-file", _str, ""), ("t-max", _NUM, None), ("points", _int, "500"),
            ("out", _str, "-")],
    "entropy": [("a", _NUM, "0"), ("b", _NUM, None), ("tau", _NUM, None), ("sigma", _NUM, None),
                ("phi-const", _NUM, ""), ("phi-file", _str, ""), ("brownian", _NUM, ""),
                ("t-max", _NUM, "6"), ("points", _int, "2000"), ("out", _str, "-")],
    "verify": [("suite", _str, None), ("seed", _int, "42"), ("out", _str, "-"),
               ("n-traj", _int, "100000"), ("dt", _NUM, "1e-3")],
}

HELP = {
    "ou": "Ornstein-Uhlenbeck law and entropies from a Gaussian start",
    "dde": "deterministic delay solution x(t) = S_t phi(0)",
    "entropy": "entropy curves for the delayed linear SDE",
    "stability": "Hayes stability class of x' = a x + b x(t - tau)",
    "verify": "run a verification suite",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="entroflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"entroflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", default=None, help="flat key=value file; flags win")
        for flag, _, default in opts:
            hint = "required" if default is None else f"default {default!r}" if default else "optional"
            sp.add_argument(f"--{flag}", default=None, help=hint)
    sp = sub.add_parser("stability", help=HELP["stability"],
                        description="Long decimals (6+ significant digits) are treated as rounded "
                                    "constants; use pi/2 style literals for exact values.")
    for name in ("a", "b", "tau"):
        sp.add_argument(name)
    return parser


def read_config(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        values[key.replace("_", "-")] = val
    return values


def resolve(command, ns):
    """Merge flags over config over defaults; returns (values, raw strings)."""
    config = read_config(ns.config) if ns.config else {}
    known = {flag for flag, _, _ in OPTIONS[command]}
    unknown = set(config) - known
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
    values, raw = {}, {}
    for flag, conv, default in OPTIONS[command]:
        text = getattr(ns, flag.replace("-", "_"))
        if text is None:
            text = config.get(flag, default)
        if text is None:
            raise UsageError(f"--{flag} is required")
        if text == "":
            values[flag] = None
            continue
        raw[flag] = text
        values[flag] = conv(text)
    return values, raw


# --- output ----------------------------------------------------------------


def fmt(x):
    x = float(x)
    return repr(x) if math.isfinite(x) else "nan"


def write_csv(path, header, columns):
    n = len(columns[0])
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(fmt(c[i]) if c is not None else "nan" for c in columns))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def write_manifest(command, raw, out, seed=None, extras=None):
    # --flag=value keeps values such as -pi/2 from reading as options
    echo = [command] + [f"--{flag}={text}" for flag, text in raw.items()]
    manifest = {
        "tool": "entroflow",
        "version": __version__,
        "subcommand": command,
        "params": raw,
        "argv": echo,
        "master_seed": seed,
        "outputs": [] if out == "-" else [out],
    }
    if extras:
        manifest.update(extras)
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    if out == "-":
        sys.stderr.write(text)
    else:
        with open(out + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _grid(t_max, points, include_zero):
    if points < 2:
        raise UsageError("--points must be at least 2")
    if not t_max > 0:
        raise UsageError("--t-max must be positive")
    if include_zero:
        return np.linspace(0.0, t_max, points)
    return np.linspace(0.0, t_max, points + 1)[1:]


def _history(v, tau):
    """The single deterministic history chosen by --phi-const / --phi-file."""
    if v["phi-file"] is not None:
        try:
            data = np.loadtxt(v["phi-file"], delimiter=",", ndmin=2, comments="#")
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read --phi-file: {exc}") from None
        if data.shape[1] != 2:
            raise UsageError("--phi-file needs two columns: s,value")
        phi = TabulatedHistory(data[:, 0], data[:, 1])
        phi.check_span(tau)
        return phi
    return PointHistory(v["phi-const"])


def _one_of(v, names):
    given = [n for n in names if v[n] is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of " + ", ".join(f"--{n}" for n in names))
    return given[0]


def _curve_extras(curve):
    extras = {"non_monotone": {"H_G": bool(is_non_monotone(curve.h_g))},
              "extrema": {"H_G": [float(curve.t[i]) for i in strict_extrema(curve.h_g)]}}
    if curve.h_c is not None:
        extras["non_monotone"]["H_c"] = bool(is_non_monotone(curve.h_c))
        extras["extrema"]["H_c"] = [float(curve.t[i]) for i in strict_extrema(curve.h_c)]
    return extras


def cmd_ou(v, raw):
    p = OUParams(v["a"], v["sigma"])
    init = Gaussian1D(v["init-mean"], v["init-var"])
    curve = ou_entropy_curve(p, init, _grid(v["t-max"], v["points"], True))
    write_csv(v["out"], ["t", "mean", "variance", "H_G", "H_c"],
              [curve.t, curve.mean, curve.variance, curve.h_g, curve.h_c])
    extras = _curve_extras(curve)
    extras["stationary_variance"] = ou_stationary(p).variance
    write_manifest("ou", raw, v["out"], extras=extras)
    return 0


def cmd_dde(v, raw):
    _one_of(v, ("phi-const", "phi-file"))
    p = DelayParams(v["a"], v["b"], v["tau"])
    phi = _history(v, p.tau)
    grid = _grid(v["t-max"], v["points"], True)
    F = fundamental_solution(p, grid[-1])
    x = [solution_map(p, phi, t, F) for t in grid]
    write_csv(v["out"], ["t", "x"], [grid, x])
    write_manifest("dde", raw, v["out"])
    return 0


def _ou_reduction(v, kind):
    """b = 0 or tau = 0: the equation is the undelayed x' = (a + b) x."""
    a = v["a"] if v["tau"] == 0 else v["a"] + v["b"]
    p = OUParams(a, v["sigma"])
    if kind == "brownian":
        if v["tau"] == 0:
            raise DomainError("a Brownian history needs tau > 0")
        init = Gaussian1D(0.0, v["brownian"] ** 2 * v["tau"])
        return ou_entropy_curve(p, init, _grid(v["t-max"], v["points"], True))
    x0 = v["phi-const"] if kind == "phi-const" else float(_history(v, v["tau"])(0.0))
    grid = _grid(v["t-max"], v["points"], False)
    fstar = ou_stationary(p)
    laws = [ou_transition(p, x0, t) for t in grid]
    return EntropyCurve(grid, [g.mean for g in laws], [g.variance for g in laws],
                        [gibbs_entropy(g) for g in laws], [conditional_entropy(g, fstar) for g in laws])


def cmd_entropy(v, raw):
    kind = _one_of(v, ("phi-const", "phi-file", "brownian"))
    if v["tau"] < 0:
        raise UsageError("--tau must be >= 0")
    extras = {}
    if v["b"] == 0 or v["tau"] == 0:
        curve = _ou_reduction(v, kind)
        a = v["a"] if v["tau"] == 0 else v["a"] + v["b"]
        extras["K0"] = ou_stationary(OUParams(a, v["sigma"])).variance
    else:
        p = DelayParams(v["a"], v["b"], v["tau"], v["sigma"])
        rep = hayes_report(p)
        extras["hayes"] = _hayes_dict(rep)
        if rep.stability is Stability.UNSTABLE:
            raise DomainError("parameters are Unstable; no stationary law\n" + _hayes_text(rep))
        if rep.stability is Stability.MARGINAL and p.sigma > 0:
            raise DomainError("parameters are Marginal with sigma > 0; no stationary density\n"
                              + _hayes_text(rep))
        if kind == "brownian":
            curve = entropy_curve_brownian(p, v["brownian"], _grid(v["t-max"], v["points"], True))
        else:
            if p.sigma == 0:
                raise DomainError("sigma = 0 with a deterministic history gives a point mass; "
                                  "entropy is -inf")
            curve = entropy_curve_point(p, _history(v, p.tau), _grid(v["t-max"], v["points"], False))
        if rep.stability is Stability.STABLE:
            extras["K0"] = stationary_law(p).K0
    write_csv(v["out"], ["t", "variance", "H_G", "H_c"], [curve.t, curve.variance, curve.h_g, curve.h_c])
    extras.update(_curve_extras(curve))
    write_manifest("entropy", raw, v["out"], extras=extras)
    return 0


def _hayes_dict(rep):
    return {"class": rep.stability.value, "kappa": rep.kappa,
            "1-a*tau": rep.c1, "-(a+b)*tau": rep.c2, "b*tau+a*tau*cos(k)+k*sin(k)": rep.c3}


def _hayes_text(rep):
    return "\n".join([rep.stability.value,
                      f"kappa = {fmt(rep.kappa)}",
                      f"1 - a*tau = {fmt(rep.c1)}",
                      f"-(a + b)*tau = {fmt(rep.c2)}",
                      f"b*tau + a*tau*cos(kappa) + kappa*sin(kappa) = {fmt(rep.c3)}"]) + "\n"


def cmd_stability(ns):
    a, b, tau = (parse_number(x) for x in (ns.a, ns.b, ns.tau))
    if not tau > 0:
        raise UsageError("tau must be positive")
    res = tuple(literal_resolution(x) for x in (ns.a, ns.b, ns.tau))
    rep = hayes_report(DelayParams(a, b, tau), resolution=res)
    sys.stdout.write(_hayes_text(rep))
    return 0


def cmd_verify(v, raw):
    if v["suite"] not in SUITES:
        raise UsageError(f"--suite must be one of {', '.join(SUITES)}")
    kwargs = {}
    if v["suite"] == "mc-vs-analytic":
        kwargs = {"n_traj": v["n-traj"], "dt": v["dt"]}
    checks = run_suite(v["suite"], v["seed"], **kwargs)
    report = render(v["suite"], checks)
    if v["out"] == "-":
        sys.stdout.write(report)
    else:
        with open(v["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report)
    ok = all(c.passed for c in checks)
    write_manifest("verify", raw, v["out"], seed=v["seed"],
                   extras={"passed": ok, "n_checks": len(checks)})
    return 0 if ok else 1


COMMANDS = {"ou": cmd_ou, "dde": cmd_dde, "entropy": cmd_entropy, "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)  # exits 2 on bad flags
    try:
        if ns.command == "stability":
            return cmd_stability(ns)
        values, raw = resolve(ns.command, ns)
        return COMMANDS[ns.command](values, raw)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"entroflow: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:  # DomainError included
        print(f"entroflow: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
