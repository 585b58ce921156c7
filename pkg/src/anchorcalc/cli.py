"""Command-line front end.

Commands:
  check <model-file> [--only a,b,...]   symbolic check suite for an ODE model
  catalog <model-id> [flags]            built-in field-model verifications
  oracle <model-file> [flags]           RK4 invariant-drift oracle
  search <model-file> --degree d        polynomial characteristic search

Exit codes: 0 all PASS/SKIP, 1 some FAIL, 2 ERROR or usage problem.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from . import expr as ex
from . import field_models as fm
from . import forms as fo
from . import numeric, ode
from .conventions import CONVENTION_SHEET
from .modelfile import ModelFile, ModelFileError, parse_model
from .report import ERROR, FAIL, PASS, SKIP, CheckRecord, ModelReport

ODE_CHECKS = (
    "anchor",
    "characteristic",
    "noether_map",
    "proper_symmetry",
    "schouten_square",
    "symmetry",
    "twist_invariance",
)


def _residual_text(residual) -> str | None:
    if residual is None:
        return None
    if isinstance(residual, ex.Expr):
        return ex.to_text(residual)
    if isinstance(residual, dict):
        inside = "; ".join(f"{k}: {ex.to_text(v)}" for k, v in sorted(residual.items()))
        return inside or None
    if isinstance(residual, (list, tuple)):
        parts = [ex.to_text(r) for r in residual]
        if all(p == "0" for p in parts):
            return None
        return "(" + ", ".join(parts) + ")"
    return str(residual)


def run_checks(model: ModelFile, selection=None) -> ModelReport:
    """Run the named checks (default: all known) against an ODE model file;
    FAIL never aborts the run."""
    if selection is None:
        selection = ODE_CHECKS
    unknown = [name for name in selection if name not in ODE_CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}")
    report = ModelReport(model=model.name)
    sys_ = model.system
    for name in selection:
        start = time.perf_counter()
        try:
            record = _run_one(name, model, sys_)
        except ex.ExprError as exc:
            record = CheckRecord(name, ERROR, residual=str(exc))
        record.ms = (time.perf_counter() - start) * 1000.0
        report.add(record)
    return report


def _run_one(name: str, model: ModelFile, sys_: ode.OdeSystem) -> CheckRecord:
    alpha, f, w, ham = model.alpha, model.f, model.w, model.hamiltonian
    if name == "characteristic":
        if f is None:
            return CheckRecord(name, SKIP, "no [characteristic] section")
        ok, residual = ode.check_characteristic(sys_, f)
        return CheckRecord(name, PASS if ok else FAIL, _residual_text(residual if not ok else None))
    if name == "symmetry":
        if w is None:
            return CheckRecord(name, SKIP, "no [symmetry] section")
        ok, residual = ode.check_symmetry(sys_, w)
        return CheckRecord(name, PASS if ok else FAIL, _residual_text(residual if not ok else None))
    if name == "anchor":
        if alpha is None:
            return CheckRecord(name, SKIP, "no [anchor] section")
        ok, residual = ode.check_anchor(sys_, alpha)
        return CheckRecord(name, PASS if ok else FAIL, _residual_text(residual if not ok else None))
    if name == "schouten_square":
        if alpha is None:
            return CheckRecord(name, SKIP, "no [anchor] section")
        square = ode.schouten_square(alpha)
        if square.is_zero():
            return CheckRecord(name, PASS)
        inside = "; ".join(
            f"S{i + 1}{j + 1}{k + 1}: {ex.to_text(v)}"
            for (i, j, k), v in sorted(square.upper.items())
        )
        return CheckRecord(name, FAIL, inside)
    if name == "noether_map":
        if alpha is None or f is None:
            return CheckRecord(name, SKIP, "needs [anchor] and [characteristic]")
        image = ode.anchor_apply(alpha, f)
        ok, residual = ode.check_symmetry(sys_, image)
        return CheckRecord(name, PASS if ok else FAIL, _residual_text(residual if not ok else None))
    if name == "proper_symmetry":
        if alpha is None or f is None:
            return CheckRecord(name, SKIP, "needs [anchor] and [characteristic]")
        psi = ode.differential(f, sys_.n)
        ok, residual = ode.proper_symmetry_conditions(sys_, alpha, psi)
        return CheckRecord(name, PASS if ok else FAIL, _residual_text(residual if not ok else None))
    if name == "twist_invariance":
        if alpha is None or f is None or ham is None:
            return CheckRecord(name, SKIP, "needs [anchor], [characteristic] and [hamiltonian]")
        ok, detail = ode.twist_invariance_check(sys_, alpha, f, ham)
        return CheckRecord(name, PASS if ok else FAIL, None if ok else detail)
    raise ValueError(f"unknown check {name}")


# ---------------------------------------------------------------------------
# catalog


def _parse_xi(space, text):
    if text == "dil":
        return fo.dilation(space)
    if text.startswith("t") and text[1:].isdigit():
        mu = int(text[1:])
        if mu >= space.n:
            raise ValueError(f"translation index {mu} out of range")
        return fo.translation(space, mu)
    if text.startswith("r") and text[1:].isdigit() and len(text) == 3:
        mu, nu = int(text[1]), int(text[2])
        if not (mu < nu < space.n):
            raise ValueError(f"rotation indices {mu}{nu} out of range")
        return fo.rotation(space, mu, nu)
    raise ValueError(f"cannot read vector selector {text!r} (use t0, r01 or dil)")


def _default_xis(space):
    return [(f"t{mu}", fo.translation(space, mu)) for mu in range(space.n)]


def catalog_report(args) -> ModelReport:
    if args.model == "pform":
        return _pform_report(args)
    if args.model == "selfdual":
        return _selfdual_report(args)
    if args.model == "chiral":
        return _chiral_report(args)
    raise ValueError(f"unknown catalog model {args.model!r}")


def _timed(report, name, fn):
    start = time.perf_counter()
    try:
        record = fn()
        if record is None:
            record = CheckRecord(name, PASS)
    except ex.ExprError as exc:
        record = CheckRecord(name, ERROR, residual=str(exc))
    record.ms = (time.perf_counter() - start) * 1000.0
    report.add(record)


def _pform_report(args) -> ModelReport:
    space = fo.euclidean(args.n) if args.euclidean else fo.lorentzian(args.n)
    a, b = Fraction(args.a), Fraction(args.b)
    model = fm.PFormModel(space, args.p, a, b)
    sig = "euclidean" if args.euclidean else "lorentzian"
    report = ModelReport(model=f"pform(n={args.n},p={args.p},a={args.a},b={args.b},{sig})")
    xis = [(args.xi, _parse_xi(space, args.xi))] if args.xi else _default_xis(space)

    def noether():
        ok = model.noether_identity_check()
        return CheckRecord("noether_identity", PASS if ok else FAIL)

    _timed(report, "noether_identity", noether)

    for name, xi in xis:
        def current(xi=xi, name=name):
            _, ok, residual = model.killing_current(xi)
            return CheckRecord(
                f"current_certificate[{name}]",
                PASS if ok else FAIL,
                None if ok else fm._form_text(residual),
            )

        _timed(report, f"current_certificate[{name}]", current)

        def proper(xi=xi, name=name):
            ok, residual = model.proper_symmetry(xi)
            return CheckRecord(
                f"proper_symmetry[{name}]",
                PASS if ok else FAIL,
                None if ok else fm._form_text(residual),
            )

        _timed(report, f"proper_symmetry[{name}]", proper)

    def emt():
        model.energy_momentum()
        return CheckRecord("energy_momentum", PASS)

    _timed(report, "energy_momentum", emt)

    def anchor():
        ok, residual = model.anchor_verify()
        return CheckRecord(
            "anchor_identity", PASS if ok else FAIL, None if ok else residual.describe()
        )

    _timed(report, "anchor_identity", anchor)

    def trivial():
        witness = model.triviality_witness()
        if witness is None:
            return CheckRecord("triviality_witness", PASS, "does not fire (a != b)")
        return CheckRecord("triviality_witness", PASS, f"fires: G = {args.a} * Id")

    _timed(report, "triviality_witness", trivial)
    return report


def _selfdual_report(args) -> ModelReport:
    space = fo.lorentzian(args.n)
    model = fm.SelfDualModel(space)
    report = ModelReport(model=f"selfdual(n={args.n})")
    xis = (
        [(args.xi, _parse_xi(space, args.xi))]
        if args.xi
        else _default_xis(space) + [("dil", fo.dilation(space))]
    )
    _timed(
        report,
        "noether_identity",
        lambda: CheckRecord(
            "noether_identity", PASS if model.noether_identity_check() else FAIL
        ),
    )
    for name, xi in xis:
        def verify(xi=xi, name=name):
            ok, payload = model.verify(xi)
            detail = None if ok else str(payload)
            return CheckRecord(f"certificates[{name}]", PASS if ok else FAIL, detail)

        _timed(report, f"certificates[{name}]", verify)

    def emt():
        model.energy_momentum()
        return CheckRecord("energy_momentum", PASS)

    _timed(report, "energy_momentum", emt)
    return report


def _chiral_report(args) -> ModelReport:
    space = fo.lorentzian(2)
    if args.algebra not in fm.ALGEBRAS:
        raise ValueError(f"unknown algebra {args.algebra!r} (have {sorted(fm.ALGEBRAS)})")
    algebra = fm.ALGEBRAS[args.algebra]()
    g = Fraction(args.g)
    model = fm.ChiralModel(space, algebra, g)
    epsilon = [Fraction(part) for part in args.epsilon.split(",")]
    report = ModelReport(model=f"chiral(N={algebra.n},algebra={args.algebra},g={args.g})")

    def verify():
        ok, payload = model.verify(epsilon)
        names = {
            "current_residual": payload["current_residual"] != "0",
            "transform_residual": any(r != "0" for r in payload["transform_residual"]),
            "symmetry_residual": any(r != "0" for r in payload["symmetry_residual"]),
        }
        detail = "; ".join(k for k, bad in names.items() if bad) or None
        return CheckRecord("internal_certificates", PASS if ok else FAIL, detail)

    _timed(report, "internal_certificates", verify)

    xi_items = (
        [(args.xi, _parse_xi(space, args.xi))]
        if args.xi
        else _default_xis(space) + [("dil", fo.dilation(space))]
    )
    for name, xi in xi_items:
        def spacetime(xi=xi, name=name):
            ok, _ = model.spacetime_verify(xi)
            return CheckRecord(f"spacetime_certificates[{name}]", PASS if ok else FAIL)

        _timed(report, f"spacetime_certificates[{name}]", spacetime)
    return report


# ---------------------------------------------------------------------------
# oracle and search


def oracle_report(args) -> ModelReport:
    model = parse_model(args.model_file)
    if model.f is None:
        raise ModelFileError("the oracle needs a [characteristic] section")
    report = ModelReport(model=model.name, seed=args.seed)
    tracked = [("f", model.f)]
    start = time.perf_counter()
    symbolic_ok, _ = ode.check_characteristic(model.system, model.f)
    records = numeric.integrate_drift(
        model.system,
        tracked,
        seed=args.seed,
        t_end=args.t_end,
        step=args.step,
        points=args.points,
    )
    elapsed = (time.perf_counter() - start) * 1000.0
    for rec in records:
        drift_text = f"drift = {rec.drift:.6e}"
        if rec.blowup:
            record = CheckRecord(
                f"drift[{rec.name}]", ERROR, drift_text + " (trajectory blow-up, partial)"
            )
        elif not symbolic_ok:
            record = CheckRecord(
                f"drift[{rec.name}]",
                SKIP,
                drift_text + " (advisory: not a symbolic characteristic)",
            )
        elif rec.drift <= args.tolerance:
            record = CheckRecord(f"drift[{rec.name}]", PASS, drift_text)
        else:
            record = CheckRecord(f"drift[{rec.name}]", FAIL, drift_text)
        record.ms = elapsed
        report.add(record)
    return report


def search_output(args):
    model = parse_model(args.model_file)
    solutions = ode.search_characteristics(model.system, args.degree)
    texts = [ex.to_text(s.f) for s in solutions]
    doc = {
        "version": "1",
        "model": model.name,
        "degree": args.degree,
        "solutions": texts,
    }
    return doc, texts


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anchorcalc",
        description="Symbolic checks for Lagrange anchors, characteristics and conservation laws.",
    )
    parser.add_argument(
        "--convention",
        action="store_true",
        help="print the frozen sign/Hodge convention sheet and exit",
    )
    sub = parser.add_subparsers(dest="command")

    p_check = sub.add_parser("check", help="run the symbolic check suite on a model file")
    p_check.add_argument("model_file")
    p_check.add_argument("--only", help="comma-separated subset of checks")
    p_check.add_argument("--json", action="store_true", help="machine-readable output")
    p_check.add_argument("--timings", action="store_true", help="include wall times in JSON")

    p_cat = sub.add_parser("catalog", help="verify a built-in field model")
    p_cat.add_argument("model", choices=("pform", "selfdual", "chiral"))
    p_cat.add_argument("--n", type=int, default=4)
    p_cat.add_argument("--p", type=int, default=2)
    p_cat.add_argument("--a", default="1")
    p_cat.add_argument("--b", default="0")
    p_cat.add_argument("--g", default="1")
    p_cat.add_argument("--algebra", default="su2")
    p_cat.add_argument("--epsilon", default="1,1,1", help="constant algebra element")
    p_cat.add_argument("--xi", help="vector selector: t<mu>, r<mu><nu> or dil")
    p_cat.add_argument("--euclidean", action="store_true")
    p_cat.add_argument("--json", action="store_true")
    p_cat.add_argument("--timings", action="store_true")

    p_oracle = sub.add_parser("oracle", help="numeric invariant-drift oracle")
    p_oracle.add_argument("model_file")
    p_oracle.add_argument("--t-end", type=float, default=numeric.DEFAULT_T_END)
    p_oracle.add_argument("--step", type=float, default=numeric.DEFAULT_STEP)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--points", type=int, default=numeric.DEFAULT_POINTS)
    p_oracle.add_argument("--tolerance", type=float, default=numeric.DRIFT_TOLERANCE)
    p_oracle.add_argument("--json", action="store_true")
    p_oracle.add_argument("--timings", action="store_true")

    p_search = sub.add_parser("search", help="polynomial characteristic search")
    p_search.add_argument("model_file")
    p_search.add_argument("--degree", type=int, required=True)
    p_search.add_argument("--json", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.convention:
        print(CONVENTION_SHEET, end="")
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "check":
            model = parse_model(args.model_file)
            selection = (
                [part.strip() for part in args.only.split(",")] if args.only else None
            )
            report = run_checks(model, selection)
        elif args.command == "catalog":
            report = catalog_report(args)
        elif args.command == "oracle":
            report = oracle_report(args)
        elif args.command == "search":
            import json as _json

            doc, texts = search_output(args)
            if args.json:
                sys.stdout.write(
                    _json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
                )
            elif texts:
                for t in texts:
                    print(t)
            else:
                print("no polynomial characteristics up to degree", args.degree)
            return 0
    except (ModelFileError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ex.ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 2
    if args.json:
        sys.stdout.write(report.to_json(include_timings=args.timings))
    else:
        sys.stdout.write(report.human())
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
