"""Independent validation of emitted refutations.

Each derivation record is re-derived from its recorded parents: rule by
rule the checker either reruns the inference and compares the results up
to renaming, or replays recorded unifier bindings by substitution.
Ground propositional steps are additionally validated by exhaustive
truth-valuation checking.
"""

from __future__ import annotations

import re
from typing import Optional

from .terms import (
    Abs, App, Bound, Const, Free, FunType, O, Signature, Subst, Term,
    TRUE, canon, neg, spine, type_str,
)
from .clauses import (
    Clause, Literal, _term_sig, alpha_key, literal, prop_literal,
)
from .cnf import (
    expand_definition_map, expand_term, miniscope, normalize,
    replace_defined_equalities_term,
)
from .calculus import (
    bool_ext, eqfac_candidates, exhaustive_instantiate, func_ext, inj_rule,
    para_candidates, prim_subst, simplify,
)
from .unification import _Clash, simplify_pairs
from .tptp import RULE_VOCABULARY


_EXPECTED_STATUS = {
    "input": "axiom", "neg_conjecture": "cth",
    "defexp_and_simp_and_etaexpand": "thm", "miniscope": "thm",
    "cnf": "esa", "func_ext": "esa", "bool_ext": "thm",
    "paramod_ordered": "thm", "eqfactor_ordered": "thm",
    "pre_uni": "thm", "pattern_uni": "thm", "rewrite": "thm",
    "simp": "thm", "prim_subst": "thm", "inj": "esa",
    "instantiate": "thm",
}


_MINTED = re.compile(r"sk\d+|\w+_inv\d*")


def _is_mintable(name: str) -> bool:
    """Skolem-style constants freshly minted during the run."""
    return _MINTED.fullmatch(name) is not None


def _const_names(t: Term):
    if isinstance(t, Const):
        yield t.name
    elif isinstance(t, Abs):
        yield from _const_names(t.body)
    elif isinstance(t, App):
        yield from _const_names(t.head)
        for a in t.args:
            yield from _const_names(a)


def blind_key(c: Clause) -> tuple:
    """Clause key invariant under renaming of free variables and of
    freshly minted constants; used to compare re-derived clauses."""
    renamed: dict = {}

    def walk(t: Term, names: Optional[dict], out: list):
        if isinstance(t, Const) and _is_mintable(t.name):
            if names is None:
                out.append("k:*:" + type_str(t.ty))
            else:
                out.append("k:%d" % renamed.setdefault(t, len(renamed)))
        elif isinstance(t, Abs):
            out.append("l:" + type_str(t.var_ty))
            walk(t.body, names, out)
        elif isinstance(t, App):
            out.append("a:%d" % len(t.args))
            walk(t.head, names, out)
            for a in t.args:
                walk(a, names, out)
        else:
            _term_sig(t, names, out)

    def blind(l: Literal) -> tuple:
        acc = ["+" if l.pos else "-"]
        walk(l.lhs, None, acc)
        walk(l.rhs, None, acc)
        return tuple(acc)

    order = sorted(range(len(c.literals)),
                   key=lambda i: blind(c.literals[i]))
    names: dict = {}
    out: list = []
    for i in order:
        l = c.literals[i]
        out.append("+" if l.pos else "-")
        walk(l.lhs, names, out)
        walk(l.rhs, names, out)
    return tuple(out)


class ReplayError(Exception):
    pass


class ProofChecker:
    def __init__(self, records: dict, problem=None):
        self.records = records
        self.problem = problem
        self.sig = Signature()
        self._defs = None

    def _scratch_sig(self, *clauses) -> Signature:
        """Fresh signature whose variable counter clears the given clauses,
        so replayed inferences never capture an existing variable."""
        sig = Signature()
        top = sk_top = 0
        for c in clauses:
            for v in c.free_vars():
                m = re.fullmatch(r"V(\d+)", v.name)
                if m:
                    top = max(top, int(m.group(1)))
            for l in c.literals:
                for t in (l.lhs, l.rhs):
                    for name in _const_names(t):
                        m = re.fullmatch(r"sk(\d+)", name)
                        if m:
                            sk_top = max(sk_top, int(m.group(1)))
        sig._fv = top
        sig._sk = sk_top
        return sig

    def _definition_map(self) -> dict:
        if self._defs is None:
            from .saturation import Saturation
            defs = {}
            if self.problem is not None:
                for f in self.problem.formulas:
                    if f.role == "definition":
                        name, body = Saturation._definition_parts(f)
                        defs[name] = body
            self._defs = expand_definition_map(defs) if defs else {}
        return self._defs

    def check(self, proof: list) -> list:
        """Validate a record list; returns a list of complaints."""
        complaints = []
        seen = set()
        for d in proof:
            if d.rule != "input" and d.rule not in RULE_VOCABULARY:
                complaints.append(f"{d.id}: unknown rule {d.rule}")
                continue
            if any(p not in seen for p in d.parents):
                complaints.append(f"{d.id}: parent out of order")
            seen.add(d.id)
            expected = _EXPECTED_STATUS.get(d.rule)
            if expected is not None and d.status != expected:
                complaints.append(
                    f"{d.id}: status {d.status} for rule {d.rule}")
            try:
                self._check_rule(d)
            except ReplayError as e:
                complaints.append(f"{d.id} ({d.rule}): {e}")
        return complaints

    # -- per rule -----------------------------------------------------------

    def _check_rule(self, d):
        parents = [self.records[p] for p in d.parents]
        handler = getattr(self, "_r_" + d.rule.replace("-", "_"), None)
        if handler is not None:
            handler(d, parents)

    def _r_input(self, d, parents):
        if d.formula is None:
            raise ReplayError("input without formula")

    def _r_neg_conjecture(self, d, parents):
        if parents:
            if d.formula is not canon(neg(parents[0].formula)):
                raise ReplayError("not the negation of its parent")

    def _r_defexp_and_simp_and_etaexpand(self, d, parents):
        t = parents[0].formula
        defs = self._definition_map()
        if defs:
            t = expand_term(t, defs)
        t = canon(replace_defined_equalities_term(t))
        if t is not d.formula:
            raise ReplayError("definition expansion does not replay")

    def _r_miniscope(self, d, parents):
        if canon(miniscope(parents[0].formula)) is not d.formula:
            raise ReplayError("miniscoping does not replay")

    def _r_cnf(self, d, parents):
        p = parents[0]
        if p.clause is None:
            start = Clause([prop_literal(p.formula, True)])
        else:
            start = p.clause
        out = normalize(start, self._scratch_sig(), 16)
        keys = {blind_key(c) for c in out}
        if blind_key(d.clause) not in keys:
            raise ReplayError("clausification does not produce this clause")

    def _r_instantiate(self, d, parents):
        c = parents[0].clause
        want = blind_key(d.clause)
        for v in sorted(c.free_vars(), key=lambda x: x.name):
            try:
                insts = exhaustive_instantiate(c, v)
            except Exception:
                continue
            if any(blind_key(x) == want for x in insts):
                return
        raise ReplayError("no instantiation produces this clause")

    def _r_eqfactor_ordered(self, d, parents):
        want = blind_key(d.clause)
        for ra in eqfac_candidates(parents[0].clause):
            if blind_key(ra.clause) == want:
                return
        raise ReplayError("no factoring inference produces this clause")

    def _r_paramod_ordered(self, d, parents):
        want = blind_key(d.clause)
        from .clauses import rename_clause
        a = parents[0].clause
        b = parents[-1].clause
        for c, e in ((a, b), (b, a)):
            sig = self._scratch_sig(a, b, d.clause)
            variant, _ = rename_clause(e, sig)
            for ra in para_candidates(c, variant, sig):
                if blind_key(ra.clause) == want:
                    return
        raise ReplayError("no paramodulation inference produces this clause")

    def _r_bool_ext(self, d, parents):
        want = blind_key(d.clause)
        c = parents[0].clause
        for i, l in enumerate(c.literals):
            if l.is_shorthand or l.lhs.ty is not O:
                continue
            if any(blind_key(x) == want for x in bool_ext(c, i)):
                return
        raise ReplayError("no Boolean extensionality step matches")

    def _r_func_ext(self, d, parents):
        want = blind_key(d.clause)
        c = parents[0].clause
        for i, l in enumerate(c.literals):
            if l.is_shorthand or not isinstance(l.lhs.ty, FunType):
                continue
            if blind_key(func_ext(c, i, self._scratch_sig(c, d.clause))) \
                    == want:
                return
        raise ReplayError("no functional extensionality step matches")

    def _r_inj(self, d, parents):
        ra = inj_rule(parents[0].clause,
                      self._scratch_sig(parents[0].clause, d.clause), set())
        if ra is None or blind_key(ra.clause) != blind_key(d.clause):
            raise ReplayError("injectivity postulate does not replay")

    def _r_prim_subst(self, d, parents):
        want = blind_key(d.clause)
        c = parents[0].clause
        types = self._clause_types(c, d.clause)
        for i in range(len(c.literals)):
            for ra in prim_subst(c, i, self._scratch_sig(c, d.clause), types):
                if blind_key(ra.detail["constrained"]) == want:
                    return
                if blind_key(ra.clause) == want:
                    return
        raise ReplayError("no primitive substitution matches")

    @staticmethod
    def _clause_types(*clauses) -> tuple:
        tys = set()
        for c in clauses:
            for l in c.literals:
                for t in (l.lhs, l.rhs):
                    stack = [t.ty]
                    while stack:
                        ty = stack.pop()
                        if isinstance(ty, FunType):
                            stack.extend((ty.arg, ty.res))
                        else:
                            tys.add(ty)
        tys.discard(O)
        return tuple(sorted(tys, key=lambda ty: ty.uid))

    def _r_rewrite(self, d, parents):
        self._replay_simplify(d, parents)

    def _r_simp(self, d, parents):
        self._replay_simplify(d, parents)

    def _replay_simplify(self, d, parents):
        c = parents[0].clause
        if c is None:
            raise ReplayError("simplification of a non-clause")
        units = [(p.id, p.clause) for p in parents[1:]]
        out = simplify(c, units)
        if out.clause is None:
            raise ReplayError("parent simplifies to a tautology")
        if blind_key(out.clause) != blind_key(d.clause):
            raise ReplayError("simplification does not replay")

    def _r_pattern_uni(self, d, parents):
        self._replay_unifier(d, parents)

    def _r_pre_uni(self, d, parents):
        self._replay_unifier(d, parents)

    def _replay_unifier(self, d, parents):
        c = parents[0].clause
        subst = Subst()
        for v, t in d.bindings:
            subst = subst.bind(v, t)
        kept = []
        constraints = []
        for l in c.literals:
            if l.pos or l.is_shorthand:
                kept.append(Literal(subst.apply(l.lhs),
                                    subst.apply(l.rhs), l.pos))
            else:
                constraints.append((l.lhs, l.rhs))
        try:
            _, flex_rigid, flex_flex = simplify_pairs(constraints, subst)
        except _Clash:
            raise ReplayError("recorded bindings clash with the constraints")
        if flex_rigid:
            raise ReplayError("recorded bindings leave a rigid constraint")
        lits = kept + [literal(a, b, False) for a, b in flex_flex]
        if alpha_key(Clause(lits)) != alpha_key(d.clause):
            raise ReplayError("substituted clause differs from the record")


# ---------------------------------------------------------------------------
# Ground propositional validation
# ---------------------------------------------------------------------------

_BINARY = {
    "|": lambda a, b: a or b,
    "&": lambda a, b: a and b,
    "=>": lambda a, b: (not a) or b,
    "<=>": lambda a, b: a == b,
}


def _contains_logical(t: Term) -> bool:
    from .terms import LOGICAL_NAMES
    return any(n in LOGICAL_NAMES for n in _const_names(t))


def _collect_atoms(t: Term, atoms: list) -> bool:
    """Gather the opaque atoms of a ground Boolean term.

    Returns False when the term falls outside the propositional
    fragment (a connective hidden inside an application, say).
    """
    from .terms import FALSE
    if t is TRUE or t is FALSE:
        return True
    h, args = spine(t)
    if isinstance(h, Const):
        if h.name == "~" and len(args) == 1:
            return _collect_atoms(args[0], atoms)
        if h.name in _BINARY and len(args) == 2:
            return (_collect_atoms(args[0], atoms)
                    and _collect_atoms(args[1], atoms))
        if h.name == "=" and len(args) == 2 and args[0].ty is O:
            return (_collect_atoms(args[0], atoms)
                    and _collect_atoms(args[1], atoms))
    if t.ty is not O or _contains_logical(t):
        return False
    if t not in atoms:
        atoms.append(t)
    return True


def _eval_bool(t: Term, val: dict) -> bool:
    from .terms import FALSE
    if t is TRUE:
        return True
    if t is FALSE:
        return False
    h, args = spine(t)
    if isinstance(h, Const):
        if h.name == "~" and len(args) == 1:
            return not _eval_bool(args[0], val)
        if h.name in _BINARY and len(args) == 2:
            return _BINARY[h.name](_eval_bool(args[0], val),
                                   _eval_bool(args[1], val))
        if h.name == "=" and len(args) == 2 and args[0].ty is O:
            return _eval_bool(args[0], val) is _eval_bool(args[1], val)
    return val[t]


def _eval_literal(l: Literal, val: dict) -> bool:
    if l.is_shorthand:
        v = _eval_bool(l.lhs, val)
    elif l.lhs.ty is O:
        v = _eval_bool(l.lhs, val) is _eval_bool(l.rhs, val)
    else:
        v = l.lhs is l.rhs
    return v is l.pos


def _occurs_in(a: Term, t: Term) -> bool:
    if a is t:
        return True
    if isinstance(t, Abs):
        return _occurs_in(a, t.body)
    if isinstance(t, App):
        return _occurs_in(a, t.head) or any(_occurs_in(a, x)
                                            for x in t.args)
    return False


def ground_step_valid(parents: list, child: Clause) -> Optional[bool]:
    """Exhaustive valuation check of one ground propositional step.

    Returns None when the step is outside the propositional fragment
    (free variables, non-Boolean equations, connectives inside atoms),
    else whether the conjunction of the parents entails the child.
    """
    clauses = list(parents) + [child]
    atoms: list = []
    for c in clauses:
        for l in c.literals:
            if l.free_vars():
                return None
            if l.is_shorthand:
                if not _collect_atoms(l.lhs, atoms):
                    return None
            elif l.lhs.ty is O:
                if not (_collect_atoms(l.lhs, atoms)
                        and _collect_atoms(l.rhs, atoms)):
                    return None
            elif l.lhs is not l.rhs:
                # a proper non-Boolean equation needs equality reasoning
                return None
    for a in atoms:
        for b in atoms:
            if a is not b and _occurs_in(a, b):
                return None
    for mask in range(1 << len(atoms)):
        val = {a: bool(mask >> i & 1) for i, a in enumerate(atoms)}
        if all(any(_eval_literal(l, val) for l in p.literals)
               for p in clauses[:-1]) \
                and not any(_eval_literal(l, val) for l in child.literals):
            return False
    return True


def check_ground_steps(records: dict, proof: list) -> list:
    """Valuation-check every ground propositional proof step.

    Steps with status "esa" only preserve satisfiability (they mint
    fresh symbols), so entailment checking is restricted to the
    theorem-status rules.
    """
    complaints = []
    for d in proof:
        if d.clause is None or not d.parents or d.status != "thm":
            continue
        parent_clauses = [records[p].clause for p in d.parents]
        if any(c is None for c in parent_clauses):
            continue
        ok = ground_step_valid(parent_clauses, d.clause)
        if ok is False:
            complaints.append(f"{d.id} ({d.rule}): ground step invalid")
    return complaints


def replay_proof(result, problem=None) -> list:
    """Convenience wrapper: full structural replay plus ground checks."""
    from .saturation import extract_proof
    proof = extract_proof(result.records, result.empty_id)
    checker = ProofChecker(result.records, problem)
    out = checker.check(proof)
    out.extend(check_ground_steps(result.records, proof))
    return out
