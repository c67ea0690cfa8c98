"""Command-line entry point.

Parses one THF problem, optionally embeds a modal problem into classical
HOL, runs the saturation loop and reports an SZS status line plus, on
request, a TSTP refutation certificate.
"""

from __future__ import annotations

import argparse
import sys

from .terms import Abs, App, Const, Term, type_str
from .tptp import (
    InferenceRecord, ParseError, Problem, ProofLine,
    UnsupportedInputError, parse_problem, print_clause, print_formula,
    print_proof, print_szs, render_file_source, render_inference,
)
from .modal import embed, uses_modal_operators
from .saturation import ProverConfig, Result, extract_proof, saturate


SUCCESS_STATUSES = ("Theorem", "Unsatisfiable", "ContradictoryAxioms",
                    "CounterSatisfiable", "Satisfiable")

_BUILTIN_NAMES = frozenset({
    "~", "|", "&", "=>", "<=>", "=", "!!", "??",
    "$true", "$false", "$box", "$dia",
})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ep-prover",
        description="saturation prover for monomorphic higher-order logic")
    ap.add_argument("problem", help="THF problem file")
    ap.add_argument("-t", "--timeout", type=float, default=60.0,
                    help="wall clock limit in seconds (default 60)")
    ap.add_argument("-p", "--proof", action="store_true",
                    help="print a TSTP refutation certificate")
    ap.add_argument("--unif-depth", type=int, default=8,
                    help="pre-unification search depth")
    ap.add_argument("--unifiers", type=int, default=4,
                    help="unifiers kept per constraint set")
    ap.add_argument("--ps-limit", type=int, default=3,
                    help="primitive substitution depth per clause lineage")
    ap.add_argument("--no-inj", action="store_true",
                    help="disable the injectivity postulate rule")
    ap.add_argument("--modal-s5", choices=("relational", "universal"),
                    default="relational",
                    help="S5 accessibility encoding for modal problems")
    ap.add_argument("--include-dir", default=None,
                    help="directory for TPTP include resolution")
    ap.add_argument("--seed", type=int, default=None,
                    help="reserved; the search is deterministic")
    return ap


def _collect_consts(t: Term, out: dict):
    if isinstance(t, Const):
        if t.name not in _BUILTIN_NAMES:
            out.setdefault(t.name, t.ty)
    elif isinstance(t, Abs):
        _collect_consts(t.body, out)
    elif isinstance(t, App):
        _collect_consts(t.head, out)
        for a in t.args:
            _collect_consts(a, out)


def _record_terms(d):
    if d.clause is not None:
        for l in d.clause.literals:
            yield l.lhs
            yield l.rhs
    elif d.formula is not None:
        yield d.formula


def build_proof_lines(result: Result, problem: Problem) -> list:
    """TSTP lines for the refutation: type declarations, the relevant
    definitions, and the derivation records in dependency order."""
    proof = extract_proof(result.records, result.empty_id)

    definitions = {}
    for f in problem.formulas:
        if f.role == "definition":
            k = next(iter(_collect_one_name(f.formula)), None)
            if k is not None:
                definitions[k] = f

    # constants of the derivation, then close over definition bodies
    consts: dict = {}
    for d in proof:
        for t in _record_terms(d):
            _collect_consts(t, consts)
    used_defs = []
    queue = [n for n in consts if n in definitions]
    while queue:
        n = queue.pop(0)
        if n in used_defs:
            continue
        used_defs.append(n)
        body: dict = {}
        _collect_consts(definitions[n].formula, body)
        for m in body:
            consts.setdefault(m, body[m])
            if m in definitions and m not in used_defs:
                queue.append(m)

    lines = []
    base_types = sorted(bt for bt in problem.signature.base_types
                        if not bt.startswith("$"))
    for bt in base_types:
        lines.append(ProofLine(f"{bt}_type", "type", f"{bt}: $tType"))

    def_order = [n for n in definitions if n in used_defs]
    rest = sorted(n for n in consts if n not in definitions)
    for name in def_order + rest:
        ty = consts.get(name)
        if ty is None:
            sig_ty = problem.signature.constants.get(name)
            if sig_ty is None:
                continue
            ty = sig_ty
        lines.append(ProofLine(f"{name}_type", "type",
                               f"{name}: {type_str(ty)}"))
        if name in definitions:
            lines.append(ProofLine(
                f"{name}_def", "definition",
                print_formula(definitions[name].formula)))

    clause_names: dict = {}
    for d in proof:
        if d.clause is not None:
            text, names = print_clause(d.clause)
        else:
            text, names = print_formula(d.formula), {}
        clause_names[d.id] = names
        if d.rule == "input":
            src = render_file_source(*d.source) if d.source else None
            lines.append(ProofLine(str(d.id), d.role, text, src))
            continue
        bindings = []
        if d.bindings:
            pnames = clause_names.get(d.parents[0], {})
            for v, t in d.bindings:
                bindings.append((pnames.get(v, v.name),
                                 _print_binding(t, pnames)))
        rec = InferenceRecord(d.rule, d.status, d.parents, tuple(bindings))
        role = d.role if d.role == "negated_conjecture" else "plain"
        lines.append(ProofLine(str(d.id), role, text,
                               render_inference(rec)))
    return lines


def _collect_one_name(def_formula: Term):
    """The constant a definition equation defines."""
    from .terms import spine
    h, args = spine(def_formula)
    if isinstance(h, Const) and h.name == "=" and len(args) == 2:
        dh, _ = spine(args[0])
        while isinstance(dh, Abs):
            dh, _ = spine(dh.body)
        if isinstance(dh, Const):
            yield dh.name


def _print_binding(t: Term, names: dict) -> str:
    from .terms import const, substitute_raw
    mapping = {v: const(n, v.ty) for v, n in names.items() if v in t.fvs}
    if mapping:
        t = substitute_raw(t, mapping)
    return print_formula(t)


def run(args) -> int:
    name = args.problem.rsplit("/", 1)[-1]
    try:
        with open(args.problem, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(print_szs("Error", name))
        print(f"cannot read problem file: {e}", file=sys.stderr)
        return 2
    try:
        problem = parse_problem(text, name, args.include_dir)
        if problem.logic_spec is not None:
            problem = embed(problem, args.modal_s5).problem
        elif uses_modal_operators(problem):
            raise UnsupportedInputError(
                "modal operators used without a logic specification")
    except ParseError as e:
        print(print_szs("Error", name))
        print(str(e), file=sys.stderr)
        return 2

    config = ProverConfig(
        time_limit=args.timeout,
        unif_depth=args.unif_depth,
        unifiers_per_inference=args.unifiers,
        ps_limit=args.ps_limit,
        enable_inj=not args.no_inj,
    )
    result = saturate(problem, config)
    print(print_szs(result.status, name))
    if args.proof and result.empty_id is not None:
        print(print_proof(build_proof_lines(result, problem), name))
    if result.status in SUCCESS_STATUSES:
        return 0
    if result.status in ("GaveUp", "Timeout"):
        return 1
    return 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.timeout <= 0:
        build_parser().error("timeout must be positive")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
