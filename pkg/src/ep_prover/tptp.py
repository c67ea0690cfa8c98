"""TPTP THF0 input and TSTP/SZS output.

Parses annotated THF formulas (including `logic`-role modal semantics
specifications), producing fully type-checked problems over the interned
term representation; prints formulas, clauses, SZS status lines and
TSTP proof certificates.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .terms import (
    Abs, App, Bound, Const, Free, FunType, O, I, PI_NAME, SIGMA_NAME,
    Signature, SimpleType, Term, TermError, TRUE, FALSE, NOT, OR, AND,
    IMPLIES, IFF, app, arg_types, base_type, bound, canon, conj, const,
    disj, eq_const, equality, exists, forall, fun_type, iff, implies, lam,
    match_quant, neg, pi_const, result_type, spine, substitute_raw, type_str,
)
from .clauses import Clause, Literal
from .cnf import ordered_free_vars


class ParseError(Exception):
    """Lexical, syntactic or type error in the input, with location."""


class UnsupportedInputError(ParseError):
    """Recognized but unsupported dialect or semantics."""


# ---------------------------------------------------------------------------
# Logic specifications (modal semantics selection)
# ---------------------------------------------------------------------------

MODAL_SYSTEMS = ("K", "D", "T", "B", "S4", "S5")
MODAL_AXIOMS = ("K", "D", "T", "B", "4", "5")


@dataclass
class LogicSpec:
    constants: str = "rigid"
    quantification: str = "constant"
    consequence: str = "global"
    system: Optional[str] = None       # one of MODAL_SYSTEMS
    axioms: tuple = ()                 # alternative: axiom scheme names


@dataclass
class AnnotatedFormula:
    name: str
    role: str
    formula: Union[Term, tuple, LogicSpec, None]
    source: Optional[str] = None


@dataclass
class Problem:
    signature: Signature
    formulas: list = field(default_factory=list)
    logic_spec: Optional[LogicSpec] = None
    name: str = "problem"

    def conjecture(self) -> Optional[AnnotatedFormula]:
        for f in self.formulas:
            if f.role == "conjecture":
                return f
        return None


@dataclass
class InferenceRecord:
    rule: str
    status: str
    parents: tuple
    bindings: tuple = ()   # (printed var name, term text) pairs


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*|/\*.*?\*/)
  | (?P<squote>'(?:[^'\\]|\\.)*')
  | (?P<dollar>\$\$?[a-zA-Z0-9_]+)
  | (?P<lower>[a-z][a-zA-Z0-9_]*)
  | (?P<upper>[A-Z][a-zA-Z0-9_]*)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<op><=>|=>|<=|!=|:=|!!|\?\?|[!?^@~|&=()\[\],.:><*])
""", re.VERBOSE | re.DOTALL)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError(
                f"line {line}, column {col}: unexpected character {text[pos]!r}")
        kind = m.lastgroup
        tok_text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, tok_text, line, pos - line_start + 1))
        nl = tok_text.count("\n")
        if nl:
            line += nl
            line_start = pos + tok_text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise ParseError(
                f"line {t.line}, column {t.col}: expected {text!r}, "
                f"found {t.text!r}")
        return t

    def error(self, msg: str):
        t = self.peek()
        raise ParseError(f"line {t.line}, column {t.col}: {msg}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

ROLE_ALIASES = {
    "axiom": "axiom", "hypothesis": "axiom", "lemma": "axiom",
    "definition": "definition", "conjecture": "conjecture",
    "negated_conjecture": "negated_conjecture", "plain": "plain",
    "type": "type", "logic": "logic",
}

MODAL_OP_TYPES = {"$box": None, "$dia": None}  # filled lazily (needs O)


def _unquote(s: str) -> str:
    if s.startswith("'"):
        return s[1:-1].replace("\\'", "'").replace("\\\\", "\\")
    return s


class Parser:
    def __init__(self, sig: Optional[Signature] = None,
                 include_dir: Optional[str] = None):
        self.sig = sig if sig is not None else Signature()
        self.include_dir = include_dir
        self.formulas: list = []
        self.logic_spec: Optional[LogicSpec] = None
        self.names: set = set()

    # -- types --------------------------------------------------------------

    def parse_type(self, ts: TokenStream) -> SimpleType:
        left = self.parse_type_atom(ts)
        if ts.peek().text == ">":
            ts.next()
            return fun_type(left, self.parse_type(ts))
        return left

    def parse_type_atom(self, ts: TokenStream) -> SimpleType:
        t = ts.next()
        if t.text == "(":
            ty = self.parse_type(ts)
            ts.expect(")")
            return ty
        if t.text in ("$o", "$i"):
            return base_type(t.text)
        if t.text == "$tType":
            raise UnsupportedInputError(
                f"line {t.line}, column {t.col}: type-valued expression "
                "outside a declaration (TH1 is unsupported)")
        if t.kind in ("lower", "squote"):
            name = _unquote(t.text)
            if name in self.sig.base_types:
                return base_type(name)
            raise ParseError(
                f"line {t.line}, column {t.col}: unknown type {name!r}")
        raise ParseError(
            f"line {t.line}, column {t.col}: expected a type, found {t.text!r}")

    # -- formulas -----------------------------------------------------------

    def parse_formula(self, ts: TokenStream, env: list) -> Term:
        left = self.parse_eq(ts, env)
        op = ts.peek().text
        if op in ("|", "&"):
            while ts.peek().text == op:
                ts.next()
                right = self.parse_eq(ts, env)
                left = disj(left, right) if op == "|" else conj(left, right)
            nxt = ts.peek().text
            if nxt in ("|", "&", "=>", "<=>", "<="):
                ts.error(f"ambiguous mix of binary connectives near {nxt!r}")
            return left
        if op in ("=>", "<=>", "<="):
            ts.next()
            right = self.parse_eq(ts, env)
            nxt = ts.peek().text
            if nxt in ("|", "&", "=>", "<=>", "<="):
                ts.error(f"connective {op!r} is non-associative")
            if op == "=>":
                return implies(left, right)
            if op == "<=":
                return implies(right, left)
            return iff(left, right)
        return left

    def parse_eq(self, ts: TokenStream, env: list) -> Term:
        left = self.parse_unitary(ts, env)
        op = ts.peek().text
        if op in ("=", "!="):
            ts.next()
            right = self.parse_unitary(ts, env)
            try:
                e = equality(left, right)
            except TermError as exc:
                ts.error(str(exc))
            return neg(e) if op == "!=" else e
        return left

    def parse_unitary(self, ts: TokenStream, env: list) -> Term:
        t = self.parse_unit_base(ts, env)
        while ts.peek().text == "@":
            ts.next()
            arg = self.parse_unit_base(ts, env)
            try:
                t = app(t, arg)
            except TermError as exc:
                ts.error(str(exc))
        return t

    def parse_unit_base(self, ts: TokenStream, env: list) -> Term:
        tok = ts.peek()
        text = tok.text
        if text == "~":
            ts.next()
            arg = self.parse_unit_base(ts, env)
            while ts.peek().text == "@":
                ts.next()
                arg = app(arg, self.parse_unit_base(ts, env))
            if arg.ty is not O:
                ts.error("negation applied to a non-Boolean term")
            return neg(arg)
        if text in ("!", "?", "^"):
            ts.next()
            ts.expect("[")
            binders = []
            while True:
                v = ts.next()
                if v.kind != "upper":
                    raise ParseError(
                        f"line {v.line}, column {v.col}: expected a variable")
                ts.expect(":")
                ty = self.parse_type(ts)
                binders.append((v.text, ty))
                nxt = ts.next()
                if nxt.text == "]":
                    break
                if nxt.text != ",":
                    raise ParseError(
                        f"line {nxt.line}, column {nxt.col}: expected ',' "
                        f"or ']', found {nxt.text!r}")
            ts.expect(":")
            body = self.parse_eq(ts, env + binders)
            for name, ty in reversed(binders):
                if text == "^":
                    body = lam(ty, body)
                elif text == "!":
                    if body.ty is not O:
                        ts.error("quantified body must be Boolean")
                    body = forall(ty, body)
                else:
                    if body.ty is not O:
                        ts.error("quantified body must be Boolean")
                    body = exists(ty, body)
            return body
        if text == "(":
            ts.next()
            f = self.parse_formula(ts, env)
            ts.expect(")")
            return f
        if text == "$true":
            ts.next()
            return TRUE
        if text == "$false":
            ts.next()
            return FALSE
        if text in ("$box", "$dia"):
            ts.next()
            return const(text, fun_type(O, O))
        if tok.kind == "upper":
            ts.next()
            for depth, (name, ty) in enumerate(reversed(env)):
                if name == text:
                    return bound(depth, ty)
            ts.error(f"unbound variable {text}")
        if tok.kind in ("lower", "squote", "num"):
            ts.next()
            name = _unquote(text)
            ty = self.sig.constants.get(name)
            if ty is None:
                ts.error(f"undeclared symbol {name!r}")
            return const(name, ty)
        if tok.kind == "dollar":
            raise UnsupportedInputError(
                f"line {tok.line}, column {tok.col}: unsupported defined "
                f"symbol {text!r}")
        ts.error(f"unexpected token {text!r} in formula")

    # -- logic specifications ----------------------------------------------

    def parse_logic_spec(self, ts: TokenStream) -> LogicSpec:
        parens = 0
        while ts.peek().text == "(":
            ts.next()
            parens += 1
        head = ts.next()
        if head.text != "$modal":
            raise UnsupportedInputError(
                f"line {head.line}: unsupported logic {head.text!r}")
        ts.expect(":=")
        ts.expect("[")
        spec = LogicSpec()
        while True:
            key = ts.next().text
            ts.expect(":=")
            if key == "$constants":
                val = ts.next().text
                if val != "$rigid":
                    raise UnsupportedInputError(
                        f"unsupported semantics: constants {val}")
                spec.constants = "rigid"
            elif key == "$quantification":
                val = ts.next().text
                if val != "$constant":
                    raise UnsupportedInputError(
                        f"unsupported semantics: quantification {val}")
                spec.quantification = "constant"
            elif key == "$consequence":
                val = ts.next().text
                if val not in ("$global", "$local"):
                    raise UnsupportedInputError(
                        f"unsupported semantics: consequence {val}")
                spec.consequence = val[1:]
            elif key == "$modalities":
                if ts.peek().text == "[":
                    ts.next()
                    axioms = []
                    while True:
                        a = ts.next().text
                        m = re.fullmatch(r"\$modal_axiom_([A-Z0-9]+)", a)
                        if m is None or m.group(1) not in MODAL_AXIOMS:
                            raise UnsupportedInputError(
                                f"unsupported modal axiom {a}")
                        axioms.append(m.group(1))
                        nxt = ts.next().text
                        if nxt == "]":
                            break
                        if nxt != ",":
                            ts.error("expected ',' or ']' in axiom list")
                    spec.axioms = tuple(axioms)
                else:
                    v = ts.next().text
                    m = re.fullmatch(r"\$modal_system_([A-Z0-9]+)", v)
                    if m is None or m.group(1) not in MODAL_SYSTEMS:
                        raise UnsupportedInputError(
                            f"unsupported modal system {v}")
                    spec.system = m.group(1)
            else:
                raise UnsupportedInputError(
                    f"unsupported logic specification key {key}")
            nxt = ts.next().text
            if nxt == "]":
                break
            if nxt != ",":
                ts.error("expected ',' or ']' in logic specification")
        for _ in range(parens):
            ts.expect(")")
        return spec

    # -- top level ----------------------------------------------------------

    def skip_annotations(self, ts: TokenStream):
        """Skip a trailing source annotation up to the closing paren."""
        depth = 0
        while True:
            t = ts.peek()
            if t.kind == "eof":
                ts.error("unterminated annotation")
            if t.text == "(" or t.text == "[":
                depth += 1
            elif t.text == ")" and depth == 0:
                return
            elif t.text in (")", "]"):
                depth -= 1
            ts.next()

    def parse_file(self, ts: TokenStream):
        while ts.peek().kind != "eof":
            t = ts.next()
            if t.text == "include":
                ts.expect("(")
                path_tok = ts.next()
                if path_tok.kind != "squote":
                    ts.error("include path must be quoted")
                self.load_include(_unquote(path_tok.text), path_tok)
                ts.expect(")")
                ts.expect(".")
                continue
            if t.text in ("fof", "cnf", "tff", "tcf", "tpi"):
                raise UnsupportedInputError(
                    f"line {t.line}: the {t.text.upper()} dialect is not "
                    "supported; only THF input is accepted")
            if t.text != "thf":
                raise ParseError(
                    f"line {t.line}, column {t.col}: expected 'thf' or "
                    f"'include', found {t.text!r}")
            ts.expect("(")
            name_tok = ts.next()
            name = _unquote(name_tok.text)
            if name in self.names:
                raise ParseError(f"line {name_tok.line}: duplicate formula "
                                 f"name {name!r}")
            ts.expect(",")
            role_tok = ts.next()
            role = ROLE_ALIASES.get(role_tok.text)
            if role is None:
                raise ParseError(
                    f"line {role_tok.line}: unknown formula role "
                    f"{role_tok.text!r}")
            ts.expect(",")
            self.parse_annotated(ts, name, role)
            if ts.peek().text == ",":
                ts.next()
                self.skip_annotations(ts)
            ts.expect(")")
            ts.expect(".")
            self.names.add(name)

    def parse_annotated(self, ts: TokenStream, name: str, role: str):
        if role == "type":
            parens = 0
            while ts.peek().text == "(":
                ts.next()
                parens += 1
            sym_tok = ts.next()
            sym = _unquote(sym_tok.text)
            ts.expect(":")
            if ts.peek().text == "$tType":
                ts.next()
                self.sig.declare_base_type(sym)
                decl = (sym, None)
            else:
                ty = self.parse_type(ts)
                try:
                    self.sig.declare(sym, ty)
                except TermError as exc:
                    raise ParseError(f"formula {name}: {exc}")
                decl = (sym, ty)
            for _ in range(parens):
                ts.expect(")")
            self.formulas.append(AnnotatedFormula(name, "type", decl))
            return
        if role == "logic":
            if self.logic_spec is not None:
                raise ParseError(f"formula {name}: duplicate logic "
                                 "specification")
            self.logic_spec = self.parse_logic_spec(ts)
            self.formulas.append(AnnotatedFormula(name, "logic",
                                                  self.logic_spec))
            return
        if role == "conjecture" and any(
                f.role == "conjecture" for f in self.formulas):
            raise ParseError(f"formula {name}: more than one conjecture")
        try:
            f = self.parse_formula(ts, [])
        except TermError as exc:
            raise ParseError(f"formula {name}: {exc}")
        if f.ty is not O:
            raise ParseError(f"formula {name}: not a Boolean formula")
        self.formulas.append(AnnotatedFormula(name, role, canon(f)))

    def load_include(self, path: str, tok: Token):
        roots = []
        if self.include_dir:
            roots.append(self.include_dir)
        roots.append(os.getcwd())
        for root in roots:
            full = os.path.join(root, path)
            if os.path.exists(full):
                with open(full, encoding="utf-8") as fh:
                    self.parse_file(TokenStream(tokenize(fh.read())))
                return
        raise ParseError(
            f"line {tok.line}: cannot resolve include {path!r}")


def parse_problem(text: str, name: str = "problem",
                  include_dir: Optional[str] = None) -> Problem:
    parser = Parser(include_dir=include_dir)
    parser.parse_file(TokenStream(tokenize(text)))
    return Problem(parser.sig, parser.formulas, parser.logic_spec, name)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _binder_name(i: int) -> str:
    return chr(ord("A") + i) if i < 26 else f"Z{i - 25}"


class TermPrinter:
    """Renders terms in TPTP concrete syntax with A,B,C binder names."""

    def __init__(self):
        self.counter = 0

    def fresh(self) -> str:
        n = _binder_name(self.counter)
        self.counter += 1
        return n

    def print(self, t: Term, env: Optional[list] = None) -> str:
        return self._bare(t, env or [])

    def _operand(self, t: Term, env: list) -> str:
        if isinstance(t, (Const, Free)):
            return t.name
        if isinstance(t, Bound):
            return env[-1 - t.index]
        h, args = spine(t)
        if isinstance(h, Const) and h is NOT and len(args) == 1 \
                and self._is_equation(args[0]):
            return "( " + self._flat(t, env) + " )"
        if isinstance(t, Abs) or (isinstance(h, Const) and h is NOT) \
                or match_quant(t, PI_NAME) or match_quant(t, SIGMA_NAME):
            return self._bare(t, env)
        return "( " + self._flat(t, env) + " )"

    def _eq_operand(self, t: Term, env: list) -> str:
        # binders and negations must be bracketed next to an equality sign
        h, _ = spine(t)
        if isinstance(t, Abs) or (isinstance(h, Const) and h is NOT) \
                or match_quant(t, PI_NAME) or match_quant(t, SIGMA_NAME):
            return "( " + self._bare(t, env) + " )"
        return self._operand(t, env)

    @staticmethod
    def _is_equation(t: Term) -> bool:
        h, args = spine(t)
        return isinstance(h, Const) and h.name == "=" and len(args) == 2

    def _bare(self, t: Term, env: list) -> str:
        for qname, sym in ((PI_NAME, "!"), (SIGMA_NAME, "?")):
            q = match_quant(t, qname)
            if q is not None:
                binders = []
                while q is not None:
                    nm = self.fresh()
                    binders.append(f"{nm}: {type_str(q.var_ty)}")
                    env = env + [nm]
                    body = q.body
                    q = match_quant(body, qname)
                return (f"{sym} [" + ",".join(binders) + "] : "
                        + self._body(body, env))
        if isinstance(t, Abs):
            binders = []
            while isinstance(t, Abs):
                nm = self.fresh()
                binders.append(f"{nm}: {type_str(t.var_ty)}")
                env = env + [nm]
                t = t.body
            return "^ [" + ",".join(binders) + "] : " + self._body(t, env)
        h, args = spine(t)
        if isinstance(h, Const) and h is NOT and len(args) == 1 \
                and not self._is_equation(args[0]):
            return "~ " + self._operand(args[0], env)
        return self._flat(t, env)

    def _body(self, t: Term, env: list) -> str:
        h, _ = spine(t)
        if isinstance(t, Abs) or (isinstance(h, Const) and h is NOT) \
                or match_quant(t, PI_NAME) or match_quant(t, SIGMA_NAME):
            return self._bare(t, env)
        if isinstance(t, (Const, Free, Bound)):
            return "( " + self._operand(t, env) + " )"
        return "( " + self._flat(t, env) + " )"

    def _flat(self, t: Term, env: list) -> str:
        h, args = spine(t)
        if isinstance(h, Const) and len(args) == 2:
            if h in (OR, AND):
                return self._chain(t, h, "|" if h is OR else "&", env)
            if h is IMPLIES:
                return (self._operand(args[0], env) + " => "
                        + self._operand(args[1], env))
            if h is IFF:
                return (self._operand(args[0], env) + " <=> "
                        + self._operand(args[1], env))
            if h.name == "=":
                return (self._eq_operand(args[0], env) + " = "
                        + self._eq_operand(args[1], env))
        if isinstance(h, Const) and h is NOT and len(args) == 1:
            inner = args[0]
            ih, ia = spine(inner)
            if isinstance(ih, Const) and ih.name == "=" and len(ia) == 2:
                return (self._eq_operand(ia[0], env) + " != "
                        + self._eq_operand(ia[1], env))
            return "~ " + self._operand(inner, env)
        if args:
            return " @ ".join(self._operand(x, env) for x in (h,) + args)
        return self._operand(t, env)

    def _chain(self, t: Term, op: Const, sym: str, env: list) -> str:
        parts = []

        def collect(s):
            sh, sa = spine(s)
            if sh is op and len(sa) == 2:
                collect(sa[0])
                collect(sa[1])
            else:
                parts.append(self._operand(s, env))

        collect(t)
        return f" {sym} ".join(parts)


def print_formula(t: Term) -> str:
    return TermPrinter().print(t)


def literal_formula(l: Literal) -> Term:
    """A literal as a plain formula (shorthand unfolded, != via negation)."""
    if l.is_shorthand:
        return l.lhs if l.pos else neg(l.lhs)
    e = equality(l.lhs, l.rhs)
    return e if l.pos else neg(e)


def clause_to_formula(c: Clause) -> tuple:
    """Universal closure of a clause; returns (term, ordered free vars)."""
    fvs = ordered_free_vars([x for l in c.literals for x in (l.lhs, l.rhs)])
    if not c.literals:
        body = FALSE
    else:
        body = literal_formula(c.literals[0])
        for l in c.literals[1:]:
            body = disj(body, literal_formula(l))
    n = len(fvs)
    mapping = {v: bound(n - 1 - k, v.ty) for k, v in enumerate(fvs)}
    body = substitute_raw(body, mapping)
    for v in reversed(fvs):
        body = forall(v.ty, body)
    return body, fvs


def print_clause(c: Clause) -> tuple:
    """Clause text plus the printed name of each of its free variables."""
    t, fvs = clause_to_formula(c)
    printer = TermPrinter()
    text = printer.print(t)
    names = {v: _binder_name(i) for i, v in enumerate(fvs)}
    return text, names


# ---------------------------------------------------------------------------
# SZS and proofs
# ---------------------------------------------------------------------------

SZS_STATUSES = ("Theorem", "ContradictoryAxioms", "CounterSatisfiable",
                "GaveUp", "Timeout", "Unsatisfiable", "Satisfiable", "Error")

RULE_VOCABULARY = frozenset({
    "neg_conjecture", "defexp_and_simp_and_etaexpand", "miniscope", "cnf",
    "func_ext", "bool_ext", "paramod_ordered", "eqfactor_ordered", "pre_uni",
    "pattern_uni", "rewrite", "simp", "prim_subst", "inj", "instantiate",
})


def print_szs(status: str, problem_name: str) -> str:
    if status not in SZS_STATUSES:
        raise ValueError(f"unknown SZS status {status!r}")
    return f"% SZS status {status} for {problem_name}"


@dataclass
class ProofLine:
    name: str
    role: str
    content: str          # rendered formula or type declaration
    source: Optional[str] = None


def render_inference(rec: InferenceRecord) -> str:
    if rec.bindings:
        binds = ",".join(f"bind({v},$thf({t}))" for v, t in rec.bindings)
        parent = rec.parents[0]
        rest = "".join(f",{p}" for p in rec.parents[1:])
        inside = f"{parent}:[{binds}]{rest}"
    else:
        inside = ",".join(str(p) for p in rec.parents)
    return f"inference({rec.rule},[status({rec.status})],[{inside}])"


def render_file_source(problem_file: str, original_name: str) -> str:
    return f"file('{problem_file}',{original_name})"


def print_proof(lines: list, problem_name: str) -> str:
    out = [f"% SZS output start CNFRefutation for {problem_name}"]
    for pl in lines:
        src = f",\n    {pl.source}" if pl.source else ""
        out.append(f"thf({pl.name},{pl.role},\n    ( {pl.content} ){src}).")
    out.append(f"% SZS output end CNFRefutation for {problem_name}")
    return "\n".join(out)
