"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 usage or domain error.
JSON output carries exact numbers as decimal strings.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import casecheck, isogeny, jfun, quadforms, relations, searches
from .errors import DomainError, PrecisionError, ResourceError


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def _emit(args, payload: dict, human: str | None = None, csv_text: str | None = None) -> None:
    fmt = args.format
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif fmt == "csv":
        if csv_text is None:
            raise UsageError("this subcommand has no CSV output")
        sys.stdout.write(csv_text)
    else:
        print(human if human is not None else "\n".join(f"{k}: {v}" for k, v in payload.items()))


def _progress(args, msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


# -- subcommands ----------------------------------------------------------------


def cmd_classnum(args) -> int:
    disc = quadforms.as_discriminant(args.delta)
    s = quadforms.class_group_summary(disc)
    payload = {**disc.to_json(), **s.to_json(), "two_rank": str(s.two_rank)}
    _emit(args, payload)
    return 0


def cmd_forms(args) -> int:
    disc = quadforms.as_discriminant(args.delta)
    forms = quadforms.forms_with_denominator(disc, args.a) if args.a else quadforms.reduced_forms(disc)
    payload = {"delta": str(disc.delta), "forms": [[str(x) for x in f] for f in forms]}
    csv_text = "a,b,c\n" + "".join(f"{f.a},{f.b},{f.c}\n" for f in forms)
    _emit(args, payload, "\n".join(f"({f.a}, {f.b}, {f.c})" for f in forms), csv_text)
    return 0


def cmd_psi(args) -> int:
    v = quadforms.psi(args.ell, args.delta)
    _emit(args, {"ell": str(args.ell), "delta": str(args.delta), "psi": str(v)}, str(v))
    return 0


def cmd_denominators(args) -> int:
    payload = {}
    if args.a is not None:
        payload["s"] = str(quadforms.max_forms_per_denominator(args.a))
    if args.A is not None:
        payload["S"] = str(quadforms.denominator_count_bounds(args.A))
    if not payload:
        raise UsageError("give --a and/or --A")
    _emit(args, payload)
    return 0


def cmd_isogeny(args) -> int:
    z, w = tuple(_ints(args.z)), tuple(_ints(args.w))
    if len(z) != 3 or len(w) != 3:
        raise UsageError("points are b,a,delta")
    ok = isogeny.isogenous_upper_triangular(z, w, args.n)
    _emit(args, {"isogenous": ok}, "isogenous" if ok else "not isogenous")
    return 0


def cmd_jeval(args) -> int:
    if args.form:
        a, b, c = _ints(args.form)
        form = quadforms.ReducedForm(a, b, c)
        ball = jfun.singular_modulus(form, form.discriminant, args.prec_bits)
    elif args.tau:
        parts = [Fraction(x) for x in args.tau.split(",")]
        if len(parts) != 2:
            raise UsageError("--tau is re,im with rational parts")
        re, im = parts
        from .ball import Ball

        ball = jfun.eval_j_with(lambda: Ball.exact(re) + Ball.exact(im).mul_i(), args.prec_bits)
    else:
        raise UsageError("give --form or --tau")
    text = ball.to_str(max(10, args.prec_bits // 4))
    n = ball.certified_integer() if ball.mid.imag == 0 or abs(ball.mid.imag) <= ball.rad else None
    payload = {"value": text}
    if n is not None:
        payload["integer"] = str(n)
    _emit(args, payload, text)
    return 0


def cmd_verify_constants(args) -> int:
    checks = jfun.verify_expansion_constants(args.prec_bits)
    ok = all(c.ok for c in checks)
    _emit(
        args,
        {"passed": ok, "checks": [c.to_json() for c in checks]},
        "\n".join(f"{'ok  ' if c.ok else 'FAIL'} {c.name}: {c.majorant} < {c.constant}" for c in checks),
    )
    return 0 if ok else 1


def cmd_masser_bound(args) -> int:
    if args.generic:
        if args.h is None or args.eta is None:
            raise UsageError("--generic needs --h and --eta")
        v = relations.masser_generic_bound(args.k, Fraction(args.h), Fraction(args.eta), args.omega)
    else:
        if args.X is None:
            raise UsageError("give --X")
        v = relations.masser_basis_bound(args.k, args.X, args.ell)
    _emit(args, {"bound": str(v)}, str(v))
    return 0


def cmd_check_hypothesis(args) -> int:
    if args.eps is not None:
        ok, lhs, rhs = relations.delta_condition(args.k, Fraction(args.A), Fraction(args.eps), args.X, args.Y)
        name = "|delta| condition"
    else:
        ok, lhs, rhs = relations.root_y_condition(args.k, Fraction(args.A), args.X, args.Y)
        name = "root-Y condition"
    rep = relations.hypothesis_report(ok, lhs, rhs, name)
    _emit(args, rep, f"{rep['verdict']}: {rep['lhs']} vs {rep['rhs']}")
    return 0 if ok else 1


def cmd_solve_cases(args) -> int:
    tables = ("t2", "t3", "t4", "t5", "lambda") if args.table == "all" else (args.table,)
    rep = casecheck.check_all_cases(tables, keep_systems=args.format == "json")
    payload = rep.to_json(include_systems=args.format == "json")
    lines = [f"{k}: {v} systems" for k, v in rep.counts.items() if k != "t2"]
    if "t2" in rep.counts:
        lines.insert(0, f"t2: {rep.counts['t2']} configurations checked")
    lines.append("totals " + "+".join(str(v) for k, v in rep.counts.items() if k != "t2"))
    if args.refined:
        refined = {}
        for name, rows in casecheck.builtin_case_tables().items():
            if name not in tables:
                continue
            for row in rows:
                kept = casecheck.refined_systems(row)
                bad = [s.provenance for s in kept if not casecheck.solve_homogeneous(s).trivial]
                refined[f"{name}:{row.case_id}"] = {"systems": str(len(kept)), "nontrivial": [[str(x) for x in p] for p in bad]}
                lines.append(f"refined {name}:{row.case_id}: {len(kept)} systems, {len(bad)} nontrivial")
        payload["refined"] = refined
    for p in rep.nontrivial:
        lines.append(f"nontrivial kernel: {p}")
    lines += rep.audit_problems
    lines.append("PASS" if rep.passed else "FAIL")
    _emit(args, payload, "\n".join(lines))
    return 0 if rep.passed else 1


def cmd_search_watkins(args) -> int:
    bound = searches.FULL_BOUND if args.full else args.bound
    rep_detail = searches.watkins_extension_bound_detail()
    hs = searches.sieve_class_numbers(
        bound, workers=args.threads, chunks=max(args.threads, args.chunks),
        checkpoint=args.checkpoint, quiet=args.quiet,
    )
    mx, cnt = searches.largest_with_class_number_at_most(hs, args.max_h)
    payload = {
        "bound": str(bound),
        "h_threshold": str(args.max_h),
        "max_abs_delta_found": str(mx),
        "count_qualifying": str(cnt),
        "formula_bound": str(rep_detail.bound),
        "formula_argmax_f": str(rep_detail.argmax_f),
    }
    csv_text = searches.sieve_csv(hs, args.max_h) if args.format == "csv" else None
    _emit(args, payload, f"largest |delta| with h <= {args.max_h} up to {bound}: {mx} ({cnt} discriminants)", csv_text)
    return 0


def cmd_search_2elem(args) -> int:
    rep = searches.enumerate_two_elementary(args.almost, check_bands=not args.no_bands, quiet=args.quiet)
    csv_text = "delta,h,flags\n" + "".join(
        f"{d},{h},{'almost' if args.almost else 'elementary'}\n" for d, h in rep.discriminants
    )
    human = (
        f"{rep.count} {'almost ' if args.almost else ''}2-elementary discriminants, "
        f"largest |delta| {rep.max_abs}, max h {max(h for _, h in rep.discriminants)}, "
        f"omega 7..11 bands empty: {rep.bands_empty} ({rep.caveat})"
    )
    _emit(args, rep.to_json(), human, csv_text)
    return 0 if rep.bands_empty else 1


def cmd_verify_relation(args) -> int:
    ok = relations.verify_relation_exact(_ints(args.values), _ints(args.exps))
    _emit(args, {"verified": ok}, "verified" if ok else "not a relation")
    return 0 if ok else 1


def cmd_lattice_bruteforce(args) -> int:
    basis = relations.relation_lattice_bruteforce(_ints(args.values), args.cap)
    _emit(
        args,
        {"basis": [[str(x) for x in v] for v in basis]},
        "\n".join(str(v) for v in basis) if basis else "empty basis",
    )
    return 0


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="singmod", description="Singular moduli and relation bounds toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, formats=("human", "json")):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--format", choices=formats, default="human")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("classnum", cmd_classnum, "class number, conductor and 2-torsion of a discriminant")
    sp.add_argument("--delta", type=int, required=True)

    sp = add("forms", cmd_forms, "reduced forms (CSV columns: a,b,c)", ("human", "json", "csv"))
    sp.add_argument("--delta", type=int, required=True)
    sp.add_argument("--a", type=int, help="only forms with this first coefficient")

    sp = add("psi", cmd_psi, "the class-number-formula factor Psi(ell, delta)")
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--delta", type=int, required=True)

    sp = add("denominators", cmd_denominators, "s(a) and S(A) = sum_{a<A} s(a)")
    sp.add_argument("--a", type=int)
    sp.add_argument("--A", type=int)

    sp = add("isogeny", cmd_isogeny, "upper-triangular n-isogeny test for points b,a,delta")
    sp.add_argument("--z", required=True)
    sp.add_argument("--w", required=True)
    sp.add_argument("--n", type=int, required=True)

    sp = add("jeval", cmd_jeval, "certified j(tau) as value +/- radius")
    sp.add_argument("--form", help="reduced form a,b,c")
    sp.add_argument("--tau", help="re,im as rationals")
    sp.add_argument("--prec-bits", type=int, default=128)

    sp = add("verify-constants", cmd_verify_constants, "certify the q-expansion constants")
    sp.add_argument("--prec-bits", type=int, default=256)

    sp = add("masser-bound", cmd_masser_bound, "relation-lattice basis norm bounds")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--X", type=int)
    sp.add_argument("--ell", type=int, default=1)
    sp.add_argument("--generic", action="store_true")
    sp.add_argument("--h")
    sp.add_argument("--eta")
    sp.add_argument("--omega", type=int, default=24)

    sp = add("check-hypothesis", cmd_check_hypothesis, "root-Y condition, or the |delta| condition with --eps")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--A", required=True)
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--Y", type=int, required=True, help="Y, or |delta| with --eps")
    sp.add_argument("--eps")

    sp = add("solve-cases", cmd_solve_cases, "solve every stored denominator system")
    sp.add_argument("--table", choices=("t2", "t3", "t4", "t5", "lambda", "all"), default="all")
    sp.add_argument("--refined", action="store_true", help="also report systems left after denominator admissibility")
    sp.add_argument("--threads", type=int, default=1)

    sp = add("search-watkins", cmd_search_watkins, "class-number sieve (CSV columns: delta,h,flags)", ("human", "json", "csv"))
    sp.add_argument("--bound", type=int, default=searches.DEFAULT_BOUND)
    sp.add_argument("--max-h", type=int, default=100)
    sp.add_argument("--full", action="store_true", help=f"sieve to {searches.FULL_BOUND}")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--chunks", type=int, default=1)
    sp.add_argument("--checkpoint")
    sp.add_argument("--quiet", action="store_true")

    sp = add("search-2elem", cmd_search_2elem, "(almost) 2-elementary discriminants (CSV columns: delta,h,flags)", ("human", "json", "csv"))
    sp.add_argument("--almost", action="store_true")
    sp.add_argument("--no-bands", action="store_true", help="skip the omega 7..11 band check")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--quiet", action="store_true")

    sp = add("verify-relation", cmd_verify_relation, "exact check of prod v_i^m_i = 1")
    sp.add_argument("--values", required=True)
    sp.add_argument("--exps", required=True)

    sp = add("lattice-bruteforce", cmd_lattice_bruteforce, "relation lattice basis within |m_i| <= cap")
    sp.add_argument("--values", required=True)
    sp.add_argument("--cap", type=int, required=True)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PrecisionError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
