"""Command-line experiment runner.

Every command writes a JSON report (and ``comp-norm`` a CSV sequence).
Reports depend only on the inputs and the seed, so reruns are
byte-identical.

Exit status: 0 success, 1 configuration or I/O error, 2 mathematical
failure (``NotDivisible``, a failed battery item, or a negativity
certificate under ``--fail-on-negative``).
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .bipoly import BiPoly, NotDivisible, sup_norm_grid
from .hardy_ops import (OriginOnBoundary, comp_norm_sequence, is_stabilized,
                        theorem_M_bound)
from .kernels import (DBR2, NO_COUNTEREXAMPLE, NOT_PSD, PointSet, RKernel, SingularPencil, Szego,
                      kernel_from_json, multiplier_norm_lb, negativity_search,
                      positivity_test, random_pointset, trial_rng)
from .subhardy import (MATE_PAIRS, assemble, decompose, default_com_sets, g_function,
                       mate_deviation, theorem_com_k)

log = logging.getLogger("bidisk")

COMMANDS = ("kernel-check", "comp-norm", "mult-norm", "mate-check", "decompose", "examples")

DEFAULTS = {
    "seed": 0,
    "trials": 200,
    "set_size": 12,
    "tol": 1e-8,
    "n_list": list(range(1, 11)),
    "form": "ex1",
    "fail_on_negative": False,
}


class ConfigError(Exception):
    """Malformed configuration or unreadable input."""


class MathFailure(Exception):
    """A mathematical check failed; carries a structured report."""

    def __init__(self, report):
        super().__init__(report.get("message", "mathematical failure"))
        self.report = report


# ---------------------------------------------------------------------------
# input parsing

_NAMES = {"z1": BiPoly.z1(), "z2": BiPoly.z2()}


def _expr(node):
    if isinstance(node, ast.Expression):
        return _expr(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return node.value
    if isinstance(node, ast.Name):
        if node.id in _NAMES:
            return _NAMES[node.id]
        if node.id in ("i", "j"):
            return 1j
        raise ConfigError(f"unknown name {node.id!r} in polynomial expression")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _expr(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a, b = _expr(node.left), _expr(node.right)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            if isinstance(a, BiPoly) and not isinstance(b, BiPoly):
                return a.scale(b)
            if isinstance(b, BiPoly) and not isinstance(a, BiPoly):
                return b.scale(a)
            return a * b
        if isinstance(node.op, ast.Div):
            if isinstance(b, BiPoly):
                raise ConfigError("division by a polynomial")
            return a.scale(1 / b) if isinstance(a, BiPoly) else a / b
        if isinstance(node.op, ast.Pow) and isinstance(b, int):
            return a ** b
    raise ConfigError(f"unsupported polynomial expression: {ast.dump(node)}")


def parse_poly(value) -> BiPoly:
    """Polynomial from a JSON object, a JSON file, inline JSON or an expression in z1, z2."""
    if isinstance(value, BiPoly):
        return value
    if isinstance(value, (int, float)):
        return BiPoly.constant(value)
    if isinstance(value, dict):
        try:
            return BiPoly.from_json(value)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad polynomial JSON: {exc}") from exc
    text = str(value).strip()
    if text.startswith("{"):
        return parse_poly(_loads(text))
    path = Path(text)
    if text.endswith(".json") or path.is_file():
        return parse_poly(_read_json(path))
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse polynomial {text!r}") from exc
    val = _expr(tree)
    return val if isinstance(val, BiPoly) else BiPoly.constant(val)


def parse_kernel(value):
    if isinstance(value, dict):
        obj = value
    else:
        text = str(value).strip()
        if text in ("szego", "Szego"):
            return Szego()
        obj = _loads(text) if text.startswith("{") else _read_json(Path(text))
    try:
        return kernel_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad kernel JSON: {exc}") from exc


def parse_n_list(value) -> list[int]:
    """``"1,2,5"``, ``"1..30"`` or a list of ints."""
    if isinstance(value, (list, tuple)):
        return [int(x) for x in value]
    out = []
    for part in str(value).split(","):
        part = part.strip()
        if not part or part == "...":
            continue
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    if not out:
        raise ConfigError(f"empty N list {value!r}")
    return out


def _loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def _read_json(path: Path):
    try:
        return _loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# commands


def _r(x, nd=12):
    """Round floats for reports so platform noise below 1e-12 cannot leak in."""
    return None if x is None else float(round(float(x), nd)) + 0.0


def _pair(cfg):
    if "phi" not in cfg or "psi" not in cfg:
        raise ConfigError("this command needs --phi and --psi")
    return parse_poly(cfg["phi"]), parse_poly(cfg["psi"])


def _kernel_from_cfg(cfg):
    if cfg.get("kernel") is not None:
        return parse_kernel(cfg["kernel"])
    if "phi" in cfg and "psi" in cfg:
        phi, psi = _pair(cfg)
        try:
            return RKernel(phi, psi)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError("kernel-check needs --kernel or both --phi and --psi")


def run_kernel_check(cfg) -> dict:
    K = _kernel_from_cfg(cfg)
    res = positivity_test(K, cfg["trials"], cfg["set_size"], cfg["seed"], cfg["tol"])
    report = {
        "command": "kernel-check",
        "kernel": K.to_json(),
        "verdict": res.verdict,
        "worst_min_eig": _r(res.worst_min_eig),
        "trials": cfg["trials"],
        "trials_run": res.trials_run,
        "set_size": cfg["set_size"],
        "seed": cfg["seed"],
        "tol": cfg["tol"],
    }
    if res.verdict == NOT_PSD:
        cert = res.certificate
        refined = negativity_search(K, restarts=0, seed=cfg["seed"], tol=cfg["tol"],
                                    init=cert.points)
        if refined is not None and refined.value < cert.value:
            cert = refined
        cj = cert.to_json()
        cj["value"] = _r(cj["value"])
        report["certificate"] = cj
        if cfg.get("fail_on_negative"):
            raise MathFailure(dict(report, error="NotPSD",
                                   message="negativity certificate found"))
    return report


def run_comp_norm(cfg) -> dict:
    phi, psi = _pair(cfg)
    n_list = parse_n_list(cfg["n_list"])
    norms = comp_norm_sequence((phi, psi), n_list)
    try:
        bound = theorem_M_bound((phi, psi))
    except OriginOnBoundary:
        bound = None
    rows = [{"N": N, "norm": _r(v), "bound": _r(bound)} for N, v in zip(n_list, norms)]
    return {
        "command": "comp-norm",
        "N_list": n_list,
        "norms": [_r(v) for v in norms],
        "stabilized": is_stabilized(norms),
        "last_norm": _r(norms[-1]),
        "bound": _r(bound),
        "note": "truncated norms are lower bounds; growth without plateau is "
                "evidence of unboundedness, not proof",
        "_csv": rows,
    }


def run_mult_norm(cfg) -> dict:
    psi = parse_poly(cfg.get("psi", 1))
    if cfg.get("kernel") is not None:
        K = parse_kernel(cfg["kernel"])
    elif "phi" in cfg:
        K = DBR2(parse_poly(cfg["phi"]))
    else:
        K = Szego()
    S = random_pointset(trial_rng(cfg["seed"], 0), cfg["set_size"])
    deltas = []
    for m in range(1, len(S) + 1):
        sub = PointSet(list(S)[:m])
        try:
            deltas.append(_r(multiplier_norm_lb(psi, K, sub)))
        except SingularPencil:
            deltas.append(None)
    return {
        "command": "mult-norm",
        "kernel": K.to_json(),
        "psi": psi.to_json(),
        "seed": cfg["seed"],
        "points": S.to_json(),
        "delta_by_set_size": deltas,
    }


def run_mate_check(cfg) -> dict:
    if "phi" not in cfg or "a" not in cfg:
        raise ConfigError("mate-check needs --phi and --a")
    dev = mate_deviation(parse_poly(cfg["phi"]), parse_poly(cfg["a"]))
    return {"command": "mate-check", "equal": dev <= 1e-12, "max_coeff_dev": _r(dev, 15)}


def run_decompose(cfg) -> dict:
    if "f" not in cfg:
        raise ConfigError("decompose needs --f")
    f = parse_poly(cfg["f"])
    try:
        d = decompose(f, cfg["form"])
    except NotDivisible as exc:
        raise MathFailure({"command": "decompose", "error": "NotDivisible",
                           "message": str(exc)}) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = d.to_json()
    out["command"] = "decompose"
    return out


_BUNDLE = ["z1*z2", "z1**2 - z2", "(1+z1)/2", "3*z1**3*z2 - 2*z2**2 + 1", "z1*z2**2 + 2*z1**2*z2"]
_PSIS = {"z1": "z1", "z2": "z2", "z1z2": "z1*z2", "avg": "(z1+z2)/2"}


def _random_int_poly(rng, deg):
    c = rng.integers(-3, 4, size=(deg + 1, deg + 1)) + 1j * rng.integers(-3, 4, size=(deg + 1, deg + 1))
    return BiPoly.from_dense(c.astype(np.complex128))


def run_examples(cfg) -> dict:
    seed = cfg["seed"]
    items = []
    for form, (phi, a) in MATE_PAIRS.items():
        dev = mate_deviation(phi, a)
        items.append({"name": f"mate:{form}", "pass": dev <= 1e-12, "max_coeff_dev": _r(dev, 15)})
    rng = trial_rng(seed, 0)
    polys = [parse_poly(s) for s in _BUNDLE] + [_random_int_poly(rng, 4) for _ in range(3)]
    for form in MATE_PAIRS:
        for k, f in enumerate(polys):
            try:
                d = decompose(f, form)
            except NotDivisible as exc:
                items.append({"name": f"roundtrip:{form}:{k}", "pass": False, "error": str(exc)})
                continue
            resid = (assemble(d) - f).max_abs_coeff()
            items.append({"name": f"roundtrip:{form}:{k}", "pass": resid == 0.0, "residual": resid})
            gsup = sup_norm_grid(g_function(d), 64)
            items.append({"name": f"g_sup:{form}:{k}", "pass": bool(np.isfinite(gsup)),
                          "value": _r(gsup)})
    sets = default_com_sets(seed)
    for form, (phi, _) in MATE_PAIRS.items():
        for pname, ps in _PSIS.items():
            psi = parse_poly(ps)
            est = theorem_com_k(phi, psi, sets)
            for label, c in (("0", 0.0), ("0.9k", 0.9 * est.k)):
                r = positivity_test(RKernel(phi, psi.scale(c)), cfg["trials"],
                                    min(cfg["set_size"], 10), seed, cfg["tol"])
                items.append({"name": f"positivity:{form}:{pname}:c={label}",
                              "pass": r.verdict == NO_COUNTEREXAMPLE, "c": _r(c),
                              "k_est": _r(est.k), "worst_min_eig": _r(r.worst_min_eig)})
    return {
        "command": "examples",
        "seed": seed,
        "items": items,
        "all_pass": all(it["pass"] for it in items),
    }


RUNNERS = {
    "kernel-check": run_kernel_check,
    "comp-norm": run_comp_norm,
    "mult-norm": run_mult_norm,
    "mate-check": run_mate_check,
    "decompose": run_decompose,
    "examples": run_examples,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bidisk", description=__doc__.split("\n")[0])
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with any of the options below")
    p.add_argument("--phi")
    p.add_argument("--psi")
    p.add_argument("--a", help="Pythagorean mate for mate-check")
    p.add_argument("--f", help="polynomial for decompose")
    p.add_argument("--form", choices=("ex1", "ex2", "ex3"))
    p.add_argument("--kernel", help="kernel JSON (file or inline) or 'szego'")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--set-size", dest="set_size", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--n-list", dest="n_list")
    p.add_argument("--out", help="JSON report path (stdout if omitted)")
    p.add_argument("--csv", help="CSV path for comp-norm (default: --out with .csv suffix)")
    p.add_argument("--fail-on-negative", dest="fail_on_negative", action="store_true",
                   default=None)
    return p


def load_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        data = _read_json(Path(args.config))
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in data.items()})
    for k, v in vars(args).items():
        if k != "config" and v is not None:
            cfg[k] = v
    if cfg.get("command") not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}")
    for key in ("trials", "set_size"):
        if int(cfg[key]) < 1:
            raise ConfigError(f"{key} must be positive")
        cfg[key] = int(cfg[key])
    cfg["seed"] = int(cfg["seed"])
    cfg["tol"] = float(cfg["tol"])
    return cfg


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_csv(rows, path: Path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "norm", "bound"])
    for r in rows:
        w.writerow([r["N"], repr(r["norm"]), "" if r["bound"] is None else repr(r["bound"])])
    path.write_text(buf.getvalue())


def _emit(report, cfg):
    rows = report.pop("_csv", None)
    text = _dump(report)
    out = cfg.get("out")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    if rows is not None:
        target = cfg.get("csv") or (Path(out).with_suffix(".csv") if out else None)
        if target:
            _write_csv(rows, Path(target))


def _setup_logging():
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("BIDISK_LOG", "quiet").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        log.info("running %s (seed=%d)", cfg["command"], cfg["seed"])
        report = RUNNERS[cfg["command"]](cfg)
        status = 0
        if cfg["command"] == "examples" and not report["all_pass"]:
            status = 2
        _emit(report, cfg)
        return status
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except MathFailure as exc:
        _emit(exc.report, cfg)
        return 2


if __name__ == "__main__":
    sys.exit(main())
