"""Command-line front end.

Tuples are read from JSON files ``{"n": .., "d": .., "matrices": [...], "label": ..}``
where every entry is an ``[re, im]`` pair.  Each command prints one report on
standard output; logs go to standard error.

Exit codes: 0 success, 1 invalid input, 2 inconclusive verdict, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time

import numpy as np

from . import numlin
from .automorph import ball_point, identity_defect, mobius
from .dilation import intertwiner, minimal_isometric_dilation, verify_intertwining
from .dilation import characteristic_system
from .errors import InconclusiveError, NumericalError, ValidationError
from .fock import FockBasis
from .harnack import (DEFAULT_KERNEL_LEVEL, default_truncation, dominates, hyperbolic_delta,
                      l_norm_report, suciu_norm)
from .holomap import FreeMap, contractivity_bound, schwarz_pick_report
from .realization import exact_norm, truncated_norm
from .rowop import as_tuple, is_strict, joint_spectral_radius, row_norm

log = logging.getLogger("nchyper")

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_NUMERICAL = 0, 1, 2, 3


# ---------------------------------------------------------------- encoding

def to_jsonable(obj):
    """Complex numbers become ``[re, im]``; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    return obj


def _float(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _pairs_to_array(data, shape, what):
    arr = np.asarray(data, dtype=float)
    if arr.shape != tuple(shape) + (2,):
        raise ValidationError(f"{what}: expected shape {tuple(shape)} of [re, im] pairs, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what}: non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def load_tuple(path):
    """Read a tuple file; returns ``(array, label, digest)``."""
    doc = read_json(path)
    try:
        n, d = int(doc["n"]), int(doc["d"])
        mats = doc["matrices"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: needs integer n, d and a matrices list") from exc
    if n < 1 or d < 1:
        raise ValidationError(f"{path}: n and d must be positive")
    X = _pairs_to_array(mats, (n, d, d), path)
    return X, doc.get("label", str(path)), digest(X)


def dump_tuple(X, label=None) -> dict:
    X = as_tuple(X)
    doc = {"n": X.shape[0], "d": X.shape[1], "matrices": to_jsonable(X)}
    if label is not None:
        doc["label"] = label
    return doc


def load_free_map(path):
    doc = read_json(path)
    try:
        n, m, e = int(doc["n"]), int(doc["m"]), int(doc["e"])
        coeffs = {}
        for term in doc["terms"]:
            key = (int(term["output"]), tuple(int(i) for i in term["word"]))
            A = _pairs_to_array(term["coeff"], (e, e), f"{path} term {key}")
            coeffs[key] = coeffs.get(key, 0) + A
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed free map ({exc})") from exc
    F = FreeMap(n, m, e, coeffs)
    return F, doc.get("label", str(path)), digest(sorted((k, v.tolist()) for k, v in F.coeffs.items()))


def digest(obj) -> str:
    if isinstance(obj, np.ndarray):
        payload = json.dumps(to_jsonable(obj), separators=(",", ":"))
    else:
        payload = json.dumps(to_jsonable(obj), separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def parse_point(text: str) -> np.ndarray:
    """Comma-separated coordinates, each a Python complex literal such as ``0.3-0.1j``."""
    try:
        return ball_point([complex(tok.strip().replace(" ", "")) for tok in text.split(",")])
    except ValueError as exc:
        raise ValidationError(f"cannot parse point {text!r}") from exc


# ---------------------------------------------------------------- commands

def _basis(args, n):
    K = args.trunc if args.trunc is not None else default_truncation(n)
    return FockBasis(n, K)


def _pair(args):
    A, la, ha = load_tuple(args.A)
    B, lb, hb = load_tuple(args.B)
    if A.shape != B.shape:
        raise ValidationError(f"tuples differ in shape: {A.shape} vs {B.shape}")
    return A, B, [{"label": la, "sha256": ha}, {"label": lb, "sha256": hb}]


def _lnorm_dict(rep):
    return {"value": rep.value, "method": rep.method, "K": rep.K, "truncated": rep.truncated,
            "lower_bound": rep.lower, "sweep": [list(p) for p in rep.sweep],
            "converged": rep.converged, "lmi_residual": rep.lmi_residual}


def cmd_delta(args, report):
    A, B, report["inputs"] = _pair(args)
    K = args.trunc if args.trunc is not None else default_truncation(A.shape[0])
    report["parameters"].update(K=K)
    rep = hyperbolic_delta(A, B, K)
    report["results"] = {"delta": rep.delta, "omega": rep.omega, "l_ab": rep.l_ab, "l_ba": rep.l_ba,
                         "truncated_l_ab": rep.truncated_l_ab, "truncated_l_ba": rep.truncated_l_ba,
                         "truncation_gap": rep.gap, "method": rep.method, "K": K}
    return EXIT_OK


def cmd_harnack(args, report):
    A, B, report["inputs"] = _pair(args)
    K = args.trunc if args.trunc is not None else default_truncation(A.shape[0])
    q = args.kernel_level
    report["parameters"].update(K=K, q=q, c=args.c, slack=args.slack)
    rep = dominates(A, B, args.c, q=q, slack=args.slack, K=K)
    report["results"] = {
        "c_required": rep.c_required,
        "kernel_path": {"levels": list(rep.kernel_levels), "q": q},
        "norm_path": _lnorm_dict(rep.l_report) if rep.l_report is not None else None,
        "method": rep.method,
        "reason": rep.reason,
    }
    report["verdicts"] = {"dominated": rep.dominated}
    report["residuals"] = rep.residuals
    return EXIT_INCONCLUSIVE if rep.dominated == "inconclusive" else EXIT_OK


def cmd_lnorm(args, report):
    A, B, report["inputs"] = _pair(args)
    K = args.trunc if args.trunc is not None else default_truncation(A.shape[0])
    report["parameters"].update(K=K)
    rep = l_norm_report(A, B, K)
    report["results"] = _lnorm_dict(rep)
    if A.shape[0] == 1 and is_strict(A) and is_strict(B):
        report["parameters"]["grid"] = args.grid
        report["results"]["circle_formula"] = suciu_norm(A[0], B[0], grid=args.grid)
    return EXIT_OK


def cmd_dilate(args, report):
    T, label, h = load_tuple(args.T)
    report["inputs"] = [{"label": label, "sha256": h}]
    basis = _basis(args, T.shape[0])
    report["parameters"].update(K=basis.K)
    dil = minimal_isometric_dilation(T, basis)
    d = T.shape[1]
    interior = dil.level_mask(basis.K - 1)
    worst = 0.0
    for i, Vi in enumerate(dil.blocks):
        for j, Vj in enumerate(dil.blocks):
            G = (Vi.conj().T @ Vj).toarray()[np.ix_(interior, interior)]
            target = np.eye(G.shape[0]) if i == j else 0
            worst = max(worst, float(np.abs(G - target).max(initial=0.0)))
    compress = max(float(np.abs(Vi.conj().T.toarray()[:d, :d] - T[i].conj().T).max())
                   for i, Vi in enumerate(dil.blocks))
    report["results"] = {"dimension": dil.dim, "base_dimension": d,
                         "defect_dimension": T.shape[0] * d, "fock_dimension": basis.dim}
    report["residuals"] = {"isometry_interior": worst, "compression": compress}
    return EXIT_OK


def cmd_intertwine(args, report):
    A, B, report["inputs"] = _pair(args)
    basis = _basis(args, A.shape[0])
    q = max(basis.K - 2, 0)
    report["parameters"].update(K=basis.K, q=q, tol=args.tol, seed=args.seed)
    L = intertwiner(A, B, basis, tol=args.tol)
    VA = minimal_isometric_dilation(A, basis)
    WB = minimal_isometric_dilation(B, basis)
    res = L.norm()
    report["results"] = {
        "omega0": L.omega0, "theta0": L.theta0,
        "norm": res.value, "norm_truncated": L.truncated_norm(),
        "omega_norm_by_level": L.omega_growth(),
    }
    report["residuals"] = dict(L.residuals, lmi=res.lmi_residual,
                               intertwining=verify_intertwining(L, VA, WB, q, seed=args.seed))
    return EXIT_OK


def cmd_charfn(args, report):
    T, label, h = load_tuple(args.T)
    report["inputs"] = [{"label": label, "sha256": h}]
    K = args.trunc if args.trunc is not None else default_truncation(T.shape[0])
    report["parameters"].update(K=K)
    sysm = characteristic_system(T)
    res = exact_norm(sysm)
    report["results"] = {"norm": res.value, "norm_truncated": truncated_norm(sysm, K),
                         "constant_term": sysm.feed, "K": K}
    report["residuals"] = {"lmi": res.lmi_residual}
    return EXIT_OK


def cmd_mobius(args, report):
    a, z = parse_point(args.a), parse_point(args.z)
    report["inputs"] = [{"label": "a", "value": a}, {"label": "z", "value": z}]
    w = mobius(a, z)
    report["results"] = {"phi": w, "norm": float(np.linalg.norm(w))}
    report["residuals"] = {"identity_defect": identity_defect(a, z)}
    return EXIT_OK


def cmd_schwarz_pick(args, report):
    F, label, h = load_free_map(args.F)
    z, xi = parse_point(args.z), parse_point(args.xi)
    report["inputs"] = [{"label": label, "sha256": h}, {"label": "z", "value": z},
                        {"label": "xi", "value": xi}]
    basis = _basis(args, F.n)
    report["parameters"].update(K=basis.K, contractivity_r=0.99, tol=args.tol)
    bound = contractivity_bound(F, basis, 0.99)
    rep = schwarz_pick_report(F, z, xi, K=basis.K, contractivity=bound, tol=args.tol)
    report["results"] = {
        "delta_image": rep.delta_image, "delta_source": rep.delta_source,
        "delta_closed_form": rep.delta_closed_form, "l_image": rep.l_image,
        "l_image_reverse": rep.l_image_reverse, "l_closed_form": rep.l_closed_form,
        "contractivity": {"value": bound.value, "r": bound.r, "K": bound.K},
    }
    report["verdicts"] = {"delta": rep.delta_holds, "norm": rep.norm_holds}
    report["residuals"] = {"delta_margin": rep.delta_margin, "norm_margin": rep.norm_margin}
    return EXIT_OK


def cmd_spectral_radius(args, report):
    A, label, h = load_tuple(args.A)
    report["inputs"] = [{"label": label, "sha256": h}]
    est = joint_spectral_radius(A, rtol=args.tol)
    report["parameters"].update(k_max=20, rtol=args.tol)
    report["results"] = {"value": est.value, "last_term": est.last_term, "terms": list(est.terms),
                         "converged": est.converged, "row_norm": row_norm(A)}
    report["verdicts"] = {"dominated_by_zero": bool(est.value < 1)}
    return EXIT_OK


COMMANDS = {
    "delta": cmd_delta, "harnack": cmd_harnack, "lnorm": cmd_lnorm, "dilate": cmd_dilate,
    "intertwine": cmd_intertwine, "charfn": cmd_charfn, "mobius": cmd_mobius,
    "schwarz-pick": cmd_schwarz_pick, "spectral-radius": cmd_spectral_radius,
}


class _Parser(argparse.ArgumentParser):
    """Usage errors become validation failures (exit 1) instead of argparse's exit 2."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--trunc", type=int, default=None, metavar="K",
                        help="Fock truncation level (default depends on n)")
    common.add_argument("--kernel-level", type=int, default=DEFAULT_KERNEL_LEVEL, metavar="q")
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--grid", type=int, default=4096)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=numlin.POWER_SEED)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="nchyper", description=__doc__.splitlines()[0],
                     epilog="Points are comma-separated complex literals; write --z=-0.1,0.5 "
                            "when the first coordinate is negative.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("delta", "lnorm", "intertwine"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("A")
        p.add_argument("B")
    p = sub.add_parser("harnack", parents=[common])
    p.add_argument("A")
    p.add_argument("B")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--slack", type=float, default=1e-3)
    for name in ("dilate", "charfn"):
        sub.add_parser(name, parents=[common]).add_argument("T")
    sub.add_parser("spectral-radius", parents=[common]).add_argument("A")
    p = sub.add_parser("mobius", parents=[common])
    p.add_argument("--a", required=True)
    p.add_argument("--z", required=True)
    p = sub.add_parser("schwarz-pick", parents=[common])
    p.add_argument("F")
    p.add_argument("--z", required=True)
    p.add_argument("--xi", required=True)
    return parser


def _params(args) -> dict:
    return {"trunc": args.trunc, "kernel_level": args.kernel_level, "tol": args.tol,
            "grid": args.grid, "seed": args.seed}


def render(report: dict, fmt: str) -> str:
    doc = to_jsonable(report)
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=True)
    lines = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else k, obj[k])
        else:
            lines.append(f"{prefix}: {json.dumps(obj)}")

    walk("", doc)
    return "\n".join(lines)


def run(argv=None) -> tuple[int, dict]:
    """Dispatch ``argv``; returns the exit code and the report."""
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as exc:
        report = {"command": None, "inputs": [], "parameters": {"format": "json"}, "results": {},
                  "verdicts": {}, "residuals": {}, "exit_code": EXIT_INVALID,
                  "error": {"type": "UsageError", "message": str(exc)}, "timing": {"seconds": 0.0}}
        return EXIT_INVALID, report
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    report = {"command": args.command, "inputs": [], "parameters": _params(args),
              "results": {}, "verdicts": {}, "residuals": {}}
    start = time.perf_counter()
    try:
        code = COMMANDS[args.command](args, report)
    except InconclusiveError as exc:
        code = EXIT_INCONCLUSIVE
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "residuals", None):
            report["residuals"].update(exc.residuals)
    except ValidationError as exc:
        code = EXIT_INVALID
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except (NumericalError, np.linalg.LinAlgError) as exc:
        code = EXIT_NUMERICAL
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    report["exit_code"] = code
    report["timing"] = {"seconds": time.perf_counter() - start}
    report["parameters"]["format"] = args.format
    return code, report


def main(argv=None) -> int:
    code, report = run(argv)
    print(render(report, report["parameters"]["format"]))
    return code


if __name__ == "__main__":
    sys.exit(main())
