"""Command-line interface.  Exit codes: 0 pass, 1 check failure, 2 usage, 3 domain error."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import List, Optional

from .core import EXACT, DomainError, TwistFockError, fraction_str
from .kahler import KahlerData, KahlerPotential, builtin_potential, canonical_model, model_hbar, normalize_potential
from .series import TruncatedSeries


class InputError(TwistFockError):
    """Malformed input file."""


def _read_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _emit(obj, args, fmt: str = "json"):
    if fmt == "csv" and isinstance(obj, dict) and "checks" in obj:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["suite", "name", "pass", "residual", "detail"])
        for c in obj["checks"]:
            w.writerow([c.get("suite", ""), c["name"], c["pass"], c["residual"], c["detail"]])
        text = buf.getvalue()
    else:
        text = json.dumps(obj, indent=2) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- potential / KahlerData resolution -------------------------------------------------


def _series_from_obj(obj) -> TruncatedSeries:
    try:
        return TruncatedSeries.from_json_obj(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed series JSON: {exc}") from exc


def _load_potential(args, cutoffs) -> KahlerPotential:
    if getattr(args, "potential", None):
        obj = _read_json(args.potential)
        s = _series_from_obj(obj)
        phi = KahlerPotential(s, False, obj.get("model"), {})
        return normalize_potential(phi)
    model = getattr(args, "model", None) or "cn"
    return builtin_potential(model, args.N, cutoffs)


def _hbar(args, required=True) -> Optional[Fraction]:
    if getattr(args, "L", None) is not None or getattr(args, "hbar", None) is not None:
        return model_hbar(getattr(args, "model", None) or "", args.hbar, args.L)
    if required:
        raise DomainError("this command needs --hbar or --L")
    return None


def _kd_numeric(args, N=None, D=None) -> KahlerData:
    if N is not None:
        args.N = N
    D = args.cutoff if D is None else D
    if D is None or D < 1:
        raise DomainError("--cutoff must be at least 1")
    h = _hbar(args)
    phi = _load_potential(args, (D, D))
    return KahlerData(phi, h, D, D if phi.series.dz != EXACT else None)


def _kd_formal(args, precision) -> KahlerData:
    phi = _load_potential(args, (precision, precision))
    return KahlerData(phi, None, None, precision)


# --- commands ------------------------------------------------------------------------------


def cmd_potential(args):
    D = args.cutoff or 4
    phi = _load_potential(args, (D, D))
    phi = normalize_potential(phi) if args.action == "normalize" else phi
    obj = phi.series.to_json_obj()
    obj["model"] = phi.model
    if args.hbar is not None or args.L is not None:
        obj["hbar"] = fraction_str(_hbar(args))
    _emit(obj, args)
    return 0


def cmd_hmatrix(args):
    kd = _kd_numeric(args)
    obj = kd.H.to_json_obj()
    obj["model"] = kd.model
    _emit(obj, args)
    return 0


def cmd_star(args):
    from .starprod import star_closed_Cn, star_closed_CPn_CHn, star_formal

    f = _series_from_obj(_read_json(args.f))
    g = _series_from_obj(_read_json(args.g))
    K = args.order
    if K is None or K < 0:
        raise DomainError("--order K is required")
    if f.N != g.N:
        raise DomainError("f and g have different dimensions")
    args.N = f.N
    target = args.cutoff or max(1, min(min(f.cutoffs), min(g.cutoffs)) if min(f.cutoffs) != EXACT else 4)
    prec = args.precision or target + K + 1
    if args.mode == "cn":
        res = star_closed_Cn(f, g, order=K)
    elif args.mode in ("cpn", "chn"):
        args.model = args.mode
        kd = _kd_formal(args, prec)
        res = star_closed_CPn_CHn(f, g, kd, K)
    else:
        kd = _kd_formal(args, prec)
        res = star_formal(f, g, kd, K)
    obj = {"label": f"order-{K} truncation", "order": K, "result": res.to_json_obj()}
    h = _hbar(args, required=False)
    if h is not None:
        obj["hbar"] = fraction_str(h)
        obj["evaluated"] = res.evaluate_hbar(h).to_json_obj()
    _emit(obj, args)
    return 0


def _load_matrix(path, args):
    from .fock import FockMatrix

    obj = _read_json(path)
    if not isinstance(obj, dict) or "entries" not in obj:
        raise InputError(f"{path}: not a FockMatrix JSON object")
    if args.model is None and obj.get("model") and not args.potential:
        args.model = obj["model"]
    if args.hbar is None and args.L is None and obj.get("hbar"):
        args.hbar = obj["hbar"]
    N = obj.get("N") or (len(obj["entries"][0]["m"]) if obj["entries"] else args.N)
    deg = max([max(sum(e["m"]), sum(e["n"])) for e in obj["entries"]] + [1])
    D = args.cutoff or obj.get("D") or deg
    kd = _kd_numeric(args, N, D)
    return FockMatrix.from_json_obj(obj, kd)


def cmd_fock(args):
    from .fock import Generator, WeightedElement, apply_generator, fock_mul, from_fock, to_fock, word_to_fock

    a = args.action
    if a == "to":
        P = _series_from_obj(_read_json(args.f))
        kd = _kd_numeric(args, P.N)
        _emit(to_fock(WeightedElement(P, kd)).to_json_obj(), args)
    elif a == "from":
        A = _load_matrix(args.matrix, args)
        _emit(from_fock(A).P.to_json_obj(), args)
    elif a == "mul":
        A = _load_matrix(args.a, args)
        B = _load_matrix(args.b, args)
        _emit(fock_mul(A, B).to_json_obj(), args)
    elif a == "apply":
        A = _load_matrix(args.matrix, args)
        x = A
        for g in _parse_word(args.generator):
            x = apply_generator(x, g, args.path)
        _emit(x.to_json_obj(), args)
    elif a == "word":
        kd = _kd_numeric(args)
        _emit(word_to_fock(_parse_word(args.word), kd, args.start).to_json_obj(), args)
    elif a == "verify":
        args.suite = "fock"
        return cmd_verify(args)
    return 0


def _parse_word(text: str):
    from .fock import Generator

    if not text:
        raise DomainError("empty generator word")
    return [Generator.parse(t.strip()) for t in text.split(",") if t.strip()]


def _chart_label(x: str) -> int:
    x = x.strip()
    if x.isdigit():
        return int(x)
    if len(x) == 1 and x.isalpha():
        return ord(x.lower()) - ord("a")
    raise DomainError(f"chart label {x!r} must be an integer or a letter")


def cmd_transition(args):
    from .charts import AnalyticTransition, transition_matrix

    if canonical_model(args.model or "cpn") != "CPn_chart":
        raise DomainError("the transition command handles the CP^N charts")
    args.model = "cpn"
    A = _load_matrix(args.matrix, args)
    s = 1 / A.kd.hbar
    if s.denominator != 1:
        raise DomainError("CP^N transitions need 1/hbar = L integral")
    L = int(s)
    src, dst = _chart_label(args.source), _chart_label(args.target)
    kd = KahlerData.builtin("cpn", A.kd.N, A.kd.hbar, L)
    T = transition_matrix(AnalyticTransition.cpn_swap(kd.N, L, dst, src), kd, kd)
    A.kd = kd
    img = T.apply(A)
    obj = {"from": src, "to": dst, "L": L, "matrix": img.to_json_obj(), "transition": T.to_json_obj()}
    _emit(obj, args)
    return 0


def cmd_trace(args):
    from .trace import TraceSpec, default_spec, quad_trace_fock, sp_trace

    A = _load_matrix(args.matrix, args)
    model = canonical_model(args.model or "cn")
    if args.mode == "sp":
        v = sp_trace(A)
        obj = {"value": fraction_str(v), "unit": "c_p", "tolerance": 0}
    else:
        if model not in ("Cn", "CHn"):
            raise DomainError("quadrature traces exist for cn and chn")
        v = quad_trace_fock(A, model)
        obj = {"value": v, "unit": "absolute", "tolerance": 1e-9}
        if model == "CHn":
            obj["c0"] = default_spec(model, A.kd.hbar, A.kd.N).label()
    _emit(obj, args)
    return 0


def cmd_verify(args):
    from .verify import SUITES, VerifyConfig, run_suites

    suites = SUITES if args.suite == "all" else (args.suite,)
    h = _hbar(args, required=False)
    model = args.model or "cn"
    if h is None:
        h = Fraction(1)
    pot = None
    if args.potential:
        pot = _load_potential(args, (args.cutoff or 4,) * 2)
        model = pot.model or "custom"
    cfg = VerifyConfig(model, args.N, h, args.cutoff or 4, args.order if args.order is not None else 3, args.seed, args.samples, pot)
    res = run_suites(suites, cfg)
    checks = [dict(c.to_json_obj(), suite=s) for s, lst in res.items() for c in lst]
    ok = all(c["pass"] for c in checks)
    obj = {
        "suite": args.suite,
        "model": model,
        "N": args.N,
        "hbar": fraction_str(h),
        "cutoff": cfg.cutoff,
        "order": cfg.order,
        "seed": args.seed,
        "passed": ok,
        "checks": checks,
    }
    _emit(obj, args, args.format)
    return 0 if ok else 1


# --- parser ----------------------------------------------------------------------------


def _common(p, numeric=True):
    p.add_argument("--model", default=None, help="cn, cylinder, cpn, chn, perturbed")
    p.add_argument("--potential", default=None, help="series JSON file of a potential")
    p.add_argument("--N", type=int, default=1, help="complex dimension")
    p.add_argument("--hbar", default=None, help="rational hbar, e.g. 1/5")
    p.add_argument("--L", type=int, default=None, help="set hbar = 1/L")
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twistfock", description="Exact star products and twisted Fock algebras")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential", help="expand or normalize a potential")
    p.add_argument("action", choices=("normalize", "expand"))
    _common(p)
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("hmatrix", help="coefficients of exp(Phi/hbar)")
    _common(p)
    p.set_defaults(func=cmd_hmatrix)

    p = sub.add_parser("star", help="star product of two series")
    p.add_argument("--mode", choices=("formal", "cn", "cpn", "chn"), default="formal")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--precision", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("fock", help="Fock matrices")
    p.add_argument("action", choices=("to", "from", "mul", "apply", "word", "verify"))
    p.add_argument("--f", default=None, help="weight series P for 'to'")
    p.add_argument("--matrix", default=None)
    p.add_argument("--a", default=None)
    p.add_argument("--b", default=None)
    p.add_argument("--generator", default=None, help="side:kind:index[,...]")
    p.add_argument("--word", default=None, help="side:kind:index,...")
    p.add_argument("--start", choices=("vacuum", "identity"), default="vacuum")
    p.add_argument("--path", choices=("matrix", "weighted"), default="matrix")
    p.add_argument("--samples", type=int, default=5)
    _common(p)
    p.set_defaults(func=cmd_fock)

    p = sub.add_parser("transition", help="CP^N chart transition of a matrix")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--matrix", required=True)
    _common(p)
    p.set_defaults(func=cmd_transition)

    p = sub.add_parser("trace", help="Sp or quadrature trace of a matrix")
    p.add_argument("--mode", choices=("sp", "quad"), default="sp")
    p.add_argument("--matrix", required=True)
    _common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("suite", choices=("starprod", "fock", "charts", "trace", "all"))
    p.add_argument("--samples", type=int, default=5)
    _common(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "fock":
            need = {"to": ("f",), "from": ("matrix",), "mul": ("a", "b"), "apply": ("matrix", "generator"), "word": ("word",)}
            for n in need.get(args.action, ()):
                if getattr(args, n) is None:
                    ap.error(f"fock {args.action} needs --{n}")
        return args.func(args)
    except TwistFockError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "module": type(exc).__module__, "message": str(exc)}) + "\n")
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
