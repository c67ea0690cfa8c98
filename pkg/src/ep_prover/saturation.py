"""Given-clause saturation with preprocessing and proof reconstruction.

The main loop is a DISCOUNT-style two-set algorithm: unprocessed clauses
U and processed clauses P, a weight/age given-clause heuristic, forward
and backward subsumption, renormalization of non-CNF conclusions, and
eager (pre-)unification of constraint literals with retention of the
raw constrained clause.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .terms import (
    Const, Free, FunType, O, Signature, Term, TRUE, canon, eta_long, neg,
)
from .clauses import (
    Clause, Literal, alpha_key, clause_weight, is_empty_clause,
    is_flex_flex, literal, prop_literal, rename_clause, subsumes,
)
from . import cnf as cnf_mod
from .cnf import (
    PreprocessConfig, expand_definition_map, expand_term, miniscope,
    normalize, replace_defined_equalities_term,
)
from .calculus import (
    RuleApplication, apply_subst_clause, bool_ext, eqfac_candidates,
    exhaustive_instantiate, func_ext, inj_rule, para_candidates, prim_subst,
    simplify,
)
from .unification import (
    FAIL, NOT_PATTERN, pattern_unify, pre_unify,
)
from .tptp import Problem, AnnotatedFormula


@dataclass
class ProverConfig:
    time_limit: float = 60.0
    unif_depth: int = 8
    unifiers_per_inference: int = 4
    ps_limit: int = 3
    age_ratio: int = 5
    naming_threshold: int = 16
    enable_inj: bool = True
    max_clause_weight: int = 200
    max_clauses: int = 200000


@dataclass
class Derived:
    id: int
    rule: str                     # "input" or a proof-rule name
    status: str                   # thm / esa / cth / axiom-ish tag
    parents: tuple = ()
    clause: Optional[Clause] = None
    formula: Optional[Term] = None
    role: str = "plain"
    source: Optional[tuple] = None   # (file name, original formula name)
    bindings: tuple = ()             # ((Free, Term), ...) on first parent
    ps_depth: int = 0
    from_conjecture: bool = False


@dataclass
class Result:
    status: str
    records: dict = field(default_factory=dict)
    empty_id: Optional[int] = None
    signature: Optional[Signature] = None
    definitions: tuple = ()          # names of definition formulas used


class Saturation:
    def __init__(self, problem: Problem, config: ProverConfig,
                 pre: Optional[PreprocessConfig] = None):
        self.problem = problem
        self.config = config
        self.pre = pre if pre is not None else PreprocessConfig()
        self.sig = problem.signature
        self.records: dict = {}
        self._next_id = 0
        self.seen: dict = {}          # Clause -> id
        self.U: list = []             # ids
        self.P: list = []             # ids
        self.deadline = None
        self.inj_done: set = set()
        self.empty_id: Optional[int] = None
        self.picks = 0

    # -- record keeping -----------------------------------------------------

    def record(self, rule: str, status: str, parents: tuple = (),
               clause: Optional[Clause] = None, formula: Optional[Term] = None,
               role: str = "plain", source=None, bindings=(),
               ps_extra: int = 0) -> Derived:
        self._next_id += 1
        parent_recs = [self.records[p] for p in parents]
        d = Derived(
            self._next_id, rule, status, tuple(parents), clause, formula,
            role, source, tuple(bindings),
            max([r.ps_depth for r in parent_recs], default=0) + ps_extra,
            any(r.from_conjecture for r in parent_recs)
            or rule == "neg_conjecture")
        self.records[d.id] = d
        return d

    def out_of_time(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline

    # -- preprocessing ------------------------------------------------------

    def preprocess(self) -> Optional[str]:
        """Turn the problem into initial clauses; returns an early status."""
        prob = self.problem
        defs = {}
        self.def_names = []
        for f in prob.formulas:
            if f.role == "definition":
                name, body = self._definition_parts(f)
                defs[name] = body
                self.def_names.append(f.name)
        expanded_defs = expand_definition_map(defs) if defs else {}

        work = []
        for f in prob.formulas:
            if f.role in ("type", "logic", "definition"):
                continue
            src = (prob.name, f.name)
            if f.role == "conjecture":
                inp = self.record("input", "axiom", (), formula=f.formula,
                                  role="conjecture", source=src)
                cur = self.record("neg_conjecture", "cth", (inp.id,),
                                  formula=canon(neg(f.formula)),
                                  role="negated_conjecture")
            elif f.role == "negated_conjecture":
                cur = self.record("neg_conjecture", "cth", (),
                                  formula=f.formula,
                                  role="negated_conjecture", source=src)
            else:
                cur = self.record("input", "axiom", (), formula=f.formula,
                                  role="axiom", source=src)
            work.append(cur)

        clauses = []
        for cur in work:
            t = cur.formula
            t2 = t
            if self.pre.expand_definitions and expanded_defs:
                t2 = expand_term(t2, expanded_defs)
            if self.pre.replace_defined_eq:
                t2 = canon(replace_defined_equalities_term(t2))
            if t2 is not t:
                cur = self.record("defexp_and_simp_and_etaexpand", "thm",
                                  (cur.id,), formula=t2)
                t = t2
            if self.pre.miniscope:
                t2 = canon(miniscope(t))
                if t2 is not t:
                    cur = self.record("miniscope", "thm", (cur.id,),
                                      formula=t2)
                    t = t2
            start = Clause([prop_literal(t, True)])
            produced = sorted(
                normalize(start, self.sig, self.config.naming_threshold),
                key=lambda c: c._key)
            for c in produced:
                clauses.append(self.record("cnf", "esa", (cur.id,), clause=c))

        # exhaustive instantiation of finite-typed variables
        final = []
        queue = list(clauses)
        while queue:
            d = queue.pop(0)
            v = next((x for x in sorted(d.clause.free_vars(),
                                        key=lambda v: v.name)
                      if x.ty in self.pre.exhaustive_inst_types), None)
            if v is None:
                final.append(d)
                continue
            for inst in sorted(exhaustive_instantiate(d.clause, v),
                               key=lambda c: c._key):
                queue.append(self.record("instantiate", "thm", (d.id,),
                                         clause=inst))
        for d in final:
            self.insert_new(d)
        return None

    @staticmethod
    def _definition_parts(f: AnnotatedFormula):
        from .terms import spine
        from .cnf import formula_kind
        k = formula_kind(f.formula)
        if k is None or k[0] != "eq":
            raise ValueError(
                f"definition {f.name} is not an equation")
        lhs, rhs = k[1], k[2]
        h, args = spine(lhs)
        if not isinstance(h, Const) or args:
            # defined symbol may be eta-expanded on the left
            h2 = _eta_const(lhs)
            if h2 is None:
                raise ValueError(
                    f"definition {f.name} does not define a constant")
            h = h2
        return h.name, canon(rhs)

    # -- clause intake ------------------------------------------------------

    def insert_new(self, d: Derived):
        """Simplify, renormalize, eagerly unify and enqueue a new clause."""
        stack = [d]
        while stack:
            cur = stack.pop()
            c = cur.clause
            if alpha_key(c) in self.seen:
                continue
            # renormalize non-CNF clauses
            if _needs_cnf(c):
                for nc in sorted(normalize(c, self.sig,
                                           self.config.naming_threshold),
                                 key=lambda x: x._key):
                    if nc != c:
                        stack.append(self.record("cnf", "esa", (cur.id,),
                                                 clause=nc))
                    else:
                        self._enqueue(cur)
                continue
            out = simplify(c, self._units())
            if out.clause is None:
                continue
            if out.changed:
                rule = "rewrite" if "rewrite" in out.rules else "simp"
                cur = self.record(rule, "thm",
                                  (cur.id,) + tuple(out.used_units),
                                  clause=out.clause)
                stack.append(cur)
                continue
            # splitting a ground Boolean equation is an equivalence, so
            # the parent clause can be replaced by the two halves
            gi = _ground_bool_eq(out.clause)
            if gi is not None:
                for half in bool_ext(out.clause, gi):
                    stack.append(self.record("bool_ext", "thm", (cur.id,),
                                             clause=half))
                continue
            self._enqueue(cur)
            self._eager_unify(cur)

    def _enqueue(self, d: Derived):
        c = d.clause
        key = alpha_key(c)
        if key in self.seen:
            return
        if is_empty_clause(c) and self.empty_id is None:
            self.empty_id = d.id
        if clause_weight(c) > self.config.max_clause_weight \
                and not is_empty_clause(c):
            return
        for pid in self.P:
            if subsumes(self.records[pid].clause, c):
                return
        self.seen[key] = d.id
        self.U.append(d.id)

    def _units(self):
        out = []
        for pid in self.P:
            c = self.records[pid].clause
            if len(c.literals) == 1 and not is_flex_flex(c.literals[0]):
                out.append((pid, c))
        return out

    def _eager_unify(self, d: Derived):
        c = d.clause
        constraints = [l for l in c.literals
                       if not l.pos and not l.is_shorthand]
        if not constraints:
            return
        pairs = [(l.lhs, l.rhs) for l in constraints]
        rest = [l for l in c.literals if l.pos or l.is_shorthand]
        res = pattern_unify(pairs, self.sig)
        if res is FAIL:
            return
        if res is not NOT_PATTERN:
            self._emit_unified(d, rest, res, (), "pattern_uni")
            return
        outcome = pre_unify(pairs, self.sig,
                            depth=self.config.unif_depth,
                            limit=self.config.unifiers_per_inference)
        for u in outcome.unifiers:
            self._emit_unified(d, rest, u.subst, u.residuals, "pre_uni")

    def _emit_unified(self, d: Derived, rest, subst, residuals, rule):
        lits = [Literal(subst.apply(l.lhs), subst.apply(l.rhs), l.pos)
                for l in rest]
        for a, b in residuals:
            lits.append(literal(a, b, False))
        nc = Clause(lits)
        if nc == d.clause:
            return
        fvs = d.clause.free_vars()
        binds = [(v, t) for v, t in sorted(
            subst.items(), key=lambda it: it[0].name) if v in fvs]
        self.insert_new(self.record(rule, "thm", (d.id,), clause=nc,
                                    bindings=binds))

    # -- main loop ----------------------------------------------------------

    def run(self) -> Result:
        self.deadline = time.monotonic() + self.config.time_limit
        try:
            self.preprocess()
        except RecursionError:
            return Result("GaveUp", self.records, None, self.sig,
                          tuple(self.def_names))
        while True:
            if self.empty_id is not None:
                return self._refutation_result()
            if self.out_of_time():
                return Result("Timeout", self.records, None, self.sig,
                              tuple(self.def_names))
            if not self.U:
                return self._saturated_result()
            if self._next_id > self.config.max_clauses:
                return Result("GaveUp", self.records, None, self.sig,
                              tuple(self.def_names))
            gid = self._select()
            g = self.records[gid]
            # forward simplification against current units
            out = simplify(g.clause, self._units())
            if out.clause is None:
                continue
            if out.changed:
                rule = "rewrite" if "rewrite" in out.rules else "simp"
                g = self.record(rule, "thm",
                                (gid,) + tuple(out.used_units),
                                clause=out.clause)
                self.seen.setdefault(alpha_key(g.clause), g.id)
                gid = g.id
            if is_empty_clause(g.clause):
                self.empty_id = gid
                continue
            if any(subsumes(self.records[p].clause, g.clause)
                   for p in self.P):
                continue
            self.P = [p for p in self.P
                      if not subsumes(g.clause, self.records[p].clause)]
            self.P.append(gid)
            self._generate(gid)
        # unreachable

    def _select(self) -> int:
        self.picks += 1
        if self.picks % self.config.age_ratio == 0:
            best = min(self.U)
        else:
            best = min(self.U, key=lambda i: (
                clause_weight(self.records[i].clause), i))
        self.U.remove(best)
        return best

    def _generate(self, gid: int):
        g = self.records[gid]
        produced = []
        # factoring
        for ra in eqfac_candidates(g.clause):
            produced.append((ra.rule, (gid,), ra.clause, 0))
        # paramodulation with every processed clause (including itself)
        for pid in list(self.P):
            if self.out_of_time():
                break
            p = self.records[pid]
            variant, _ = rename_clause(p.clause, self.sig)
            for ra in para_candidates(g.clause, variant, self.sig):
                produced.append((ra.rule, (gid, pid), ra.clause, 0))
            if pid != gid:
                variant_g, _ = rename_clause(g.clause, self.sig)
                for ra in para_candidates(p.clause, variant_g, self.sig):
                    produced.append((ra.rule, (pid, gid), ra.clause, 0))
        # extensionality
        for i, l in enumerate(g.clause.literals):
            if l.is_shorthand:
                continue
            if l.lhs.ty is O:
                for c in bool_ext(g.clause, i):
                    produced.append(("bool_ext", (gid,), c, 0))
            elif isinstance(l.lhs.ty, FunType):
                produced.append(("func_ext", (gid,),
                                 func_ext(g.clause, i, self.sig), 0))
        # primitive substitution
        if g.ps_depth < self.config.ps_limit:
            inst_types = tuple(sorted(
                self._problem_types(), key=lambda ty: ty.uid))
            for i in range(len(g.clause.literals)):
                for ra in prim_subst(g.clause, i, self.sig, inst_types):
                    produced.append(("prim_subst", (gid,),
                                     ra.detail["constrained"], 1))
        # injectivity
        if self.config.enable_inj:
            ra = inj_rule(g.clause, self.sig, self.inj_done)
            if ra is not None:
                produced.append(("inj", (gid,), ra.clause, 0))
        for rule, parents, clause, ps_extra in produced:
            if self.out_of_time() or self.empty_id is not None:
                return
            status = "esa" if rule in ("func_ext", "inj") else "thm"
            self.insert_new(self.record(rule, status, parents, clause=clause,
                                        ps_extra=ps_extra))

    def _problem_types(self):
        tys = set()
        for name, ty in self.sig.constants.items():
            if name in self.sig.system:
                continue
            stack = [ty]
            while stack:
                t = stack.pop()
                if isinstance(t, FunType):
                    stack.extend((t.arg, t.res))
                else:
                    tys.add(t)
        tys.discard(O)
        from .terms import base_type
        if not tys:
            tys = {base_type("$i")}
        return tys

    # -- results ------------------------------------------------------------

    def _refutation_result(self) -> Result:
        status = classify_refutation(self.records, self.empty_id,
                                     self.problem.conjecture() is not None)
        return Result(status, self.records, self.empty_id, self.sig,
                      tuple(self.def_names))

    def _saturated_result(self) -> Result:
        has_conj = any(r.rule == "neg_conjecture"
                       for r in self.records.values())
        ground = all(not self.records[p].clause.free_vars() for p in self.P)
        if ground:
            status = "CounterSatisfiable" if has_conj else "Satisfiable"
        else:
            status = "GaveUp"
        return Result(status, self.records, None, self.sig,
                      tuple(self.def_names))


def _eta_const(t: Term):
    from .terms import Abs, App, spine
    body = t
    depth = 0
    while isinstance(body, Abs):
        body = body.body
        depth += 1
    h, args = spine(body)
    if isinstance(h, Const) and t is eta_long(h):
        return h
    return None


def _ground_bool_eq(c: Clause):
    """Index of a variable-free proper Boolean equation literal, if any."""
    for i, l in enumerate(c.literals):
        if not l.is_shorthand and l.lhs.ty is O \
                and not l.lhs.fvs and not l.rhs.fvs:
            return i
    return None


def _needs_cnf(c: Clause) -> bool:
    from .cnf import formula_kind
    for l in c.literals:
        if l.lhs is l.rhs:
            return True
        if l.is_shorthand and formula_kind(l.lhs) is not None:
            return True
        if l.is_shorthand and l.lhs.ty is not O:
            return True
    return False


def classify_refutation(records: dict, empty_id: int,
                        had_conjecture: bool) -> str:
    if not had_conjecture and not any(
            r.rule == "neg_conjecture" for r in records.values()):
        return "Unsatisfiable"
    return ("Theorem" if records[empty_id].from_conjecture
            else "ContradictoryAxioms")


def extract_proof(records: dict, empty_id: int) -> list:
    """Minimal ancestor chain of the empty clause in topological order."""
    needed = set()
    stack = [empty_id]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        stack.extend(records[i].parents)
    order = []
    seen = set()

    def visit(i):
        if i in seen:
            return
        seen.add(i)
        for p in records[i].parents:
            visit(p)
        order.append(i)

    for i in sorted(needed):
        visit(i)
    return [records[i] for i in order]


def saturate(problem: Problem, config: Optional[ProverConfig] = None,
             pre: Optional[PreprocessConfig] = None) -> Result:
    sat = Saturation(problem, config or ProverConfig(), pre)
    return sat.run()
