"""Simple types and interned spine-notation lambda terms.

Terms are locally nameless (de Bruijn indices for bound variables) and
perfectly shared: every structurally identical term is represented by a
single interned node, so alpha-equivalence is pointer equality.  The
canonical stored form is beta-normal eta-long; `canon` converts any
well-typed term into it.
"""

from __future__ import annotations

from typing import Iterator, Optional


class TermError(Exception):
    """Ill-typed term construction or invalid term operation."""


# ---------------------------------------------------------------------------
# Simple types
# ---------------------------------------------------------------------------

class SimpleType:
    __slots__ = ("uid",)


class BaseType(SimpleType):
    __slots__ = ("name",)

    def __repr__(self):
        return self.name


class FunType(SimpleType):
    __slots__ = ("arg", "res")

    def __repr__(self):
        return f"({self.arg!r}>{self.res!r})"


_type_table: dict = {}
_type_uid = 0


def base_type(name: str) -> BaseType:
    global _type_uid
    key = ("b", name)
    ty = _type_table.get(key)
    if ty is None:
        ty = BaseType.__new__(BaseType)
        ty.name = name
        ty.uid = _type_uid = _type_uid + 1
        _type_table[key] = ty
    return ty


def fun_type(arg: SimpleType, res: SimpleType) -> FunType:
    global _type_uid
    key = ("f", arg.uid, res.uid)
    ty = _type_table.get(key)
    if ty is None:
        ty = FunType.__new__(FunType)
        ty.arg = arg
        ty.res = res
        ty.uid = _type_uid = _type_uid + 1
        _type_table[key] = ty
    return ty


def fn(*args: SimpleType, res: SimpleType) -> SimpleType:
    """Curried function type from argument types to a result type."""
    ty = res
    for a in reversed(args):
        ty = fun_type(a, ty)
    return ty


O = base_type("$o")
I = base_type("$i")


def arg_types(ty: SimpleType) -> tuple:
    out = []
    while isinstance(ty, FunType):
        out.append(ty.arg)
        ty = ty.res
    return tuple(out)


def result_type(ty: SimpleType) -> SimpleType:
    while isinstance(ty, FunType):
        ty = ty.res
    return ty


def type_str(ty: SimpleType) -> str:
    """Render a type in TPTP syntax; composite components get parentheses."""
    if isinstance(ty, BaseType):
        return ty.name
    parts = []
    while isinstance(ty, FunType):
        parts.append(ty.arg)
        ty = ty.res
    parts.append(ty)
    rendered = []
    for p in parts:
        s = type_str(p)
        rendered.append(f"( {s} )" if isinstance(p, FunType) else s)
    return " > ".join(rendered)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class Term:
    __slots__ = ("ty", "tid", "fvs", "loose", "size", "skey", "_bnf", "_eta")

    ty: SimpleType
    tid: int
    fvs: frozenset
    loose: int          # number of binders the term reaches out of (0 = closed)
    size: int           # number of leaf symbol occurrences
    skey: str           # structural sort key, stable across intern orders


class Const(Term):
    __slots__ = ("name",)

    def __repr__(self):
        return self.name


class Free(Term):
    __slots__ = ("name",)

    def __repr__(self):
        return self.name


class Bound(Term):
    __slots__ = ("index",)

    def __repr__(self):
        return f"#{self.index}"


class Abs(Term):
    __slots__ = ("var_ty", "body")

    def __repr__(self):
        return f"(\\{self.var_ty!r}. {self.body!r})"


class App(Term):
    __slots__ = ("head", "args")

    def __repr__(self):
        return "(" + " ".join(map(repr, (self.head,) + self.args)) + ")"


_term_table: dict = {}
_term_tid = 0


def _register(key, node: Term, ty, fvs, loose, size, skey) -> Term:
    global _term_tid
    node.ty = ty
    node.fvs = fvs
    node.loose = loose
    node.size = size
    node.skey = skey
    node._bnf = None
    node._eta = None
    node.tid = _term_tid = _term_tid + 1
    _term_table[key] = node
    return node


def const(name: str, ty: SimpleType) -> Const:
    key = ("c", name, ty.uid)
    t = _term_table.get(key)
    if t is None:
        node = Const.__new__(Const)
        node.name = name
        t = _register(key, node, ty, frozenset(), 0, 1, f"c{name}\x00{ty.uid}\x01")
    return t


def free(name: str, ty: SimpleType) -> Free:
    key = ("v", name, ty.uid)
    t = _term_table.get(key)
    if t is None:
        node = Free.__new__(Free)
        node.name = name
        t = _register(key, node, ty, None, 0, 1, f"v{name}\x00{ty.uid}\x01")
        node.fvs = frozenset((node,))
    return t


def bound(index: int, ty: SimpleType) -> Bound:
    key = ("b", index, ty.uid)
    t = _term_table.get(key)
    if t is None:
        node = Bound.__new__(Bound)
        node.index = index
        t = _register(key, node, ty, frozenset(), index + 1, 1, f"b{index}\x01")
    return t


def lam(var_ty: SimpleType, body: Term) -> Abs:
    key = ("l", var_ty.uid, body.tid)
    t = _term_table.get(key)
    if t is None:
        node = Abs.__new__(Abs)
        node.var_ty = var_ty
        node.body = body
        t = _register(key, node, fun_type(var_ty, body.ty), body.fvs,
                      max(0, body.loose - 1), body.size,
                      f"l{var_ty.uid}\x00" + body.skey)
    return t


def app(f: Term, *args: Term) -> Term:
    """Apply f to args, flattening nested applications (spine form)."""
    if not args:
        return f
    if isinstance(f, App):
        head, all_args = f.head, f.args + args
    else:
        head, all_args = f, args
    ty = f.ty
    for a in args:
        if not isinstance(ty, FunType):
            raise TermError(f"over-application: {f!r} applied to {len(args)} args")
        if ty.arg is not a.ty:
            raise TermError(f"argument type mismatch: expected {ty.arg!r}, got {a.ty!r}")
        ty = ty.res
    key = ("a", head.tid) + tuple(a.tid for a in all_args)
    t = _term_table.get(key)
    if t is None:
        node = App.__new__(App)
        node.head = head
        node.args = all_args
        fvs = head.fvs
        loose = head.loose
        size = head.size
        for a in all_args:
            fvs = fvs | a.fvs
            if a.loose > loose:
                loose = a.loose
            size += a.size
        skey = "a(" + head.skey + "".join(a.skey for a in all_args) + ")"
        t = _register(key, node, ty, fvs, loose, size, skey)
    return t


def spine(t: Term) -> tuple:
    """Head and argument list of a term (empty args for atoms)."""
    if isinstance(t, App):
        return t.head, t.args
    return t, ()


# ---------------------------------------------------------------------------
# Logical constants
# ---------------------------------------------------------------------------

TRUE = const("$true", O)
FALSE = const("$false", O)
NOT = const("~", fn(O, res=O))
OR = const("|", fn(O, O, res=O))
AND = const("&", fn(O, O, res=O))
IMPLIES = const("=>", fn(O, O, res=O))
IFF = const("<=>", fn(O, O, res=O))

EQ_NAME = "="
PI_NAME = "!!"
SIGMA_NAME = "??"

LOGICAL_NAMES = {"$true", "$false", "~", "|", "&", "=>", "<=>", EQ_NAME,
                 PI_NAME, SIGMA_NAME}


def eq_const(ty: SimpleType) -> Const:
    return const(EQ_NAME, fn(ty, ty, res=O))


def pi_const(ty: SimpleType) -> Const:
    return const(PI_NAME, fn(fun_type(ty, O), res=O))


def sigma_const(ty: SimpleType) -> Const:
    return const(SIGMA_NAME, fn(fun_type(ty, O), res=O))


def neg(s: Term) -> Term:
    return app(NOT, s)


def disj(s: Term, t: Term) -> Term:
    return app(OR, s, t)


def conj(s: Term, t: Term) -> Term:
    return app(AND, s, t)


def implies(s: Term, t: Term) -> Term:
    return app(IMPLIES, s, t)


def iff(s: Term, t: Term) -> Term:
    return app(IFF, s, t)


def equality(s: Term, t: Term) -> Term:
    if s.ty is not t.ty:
        raise TermError("equation between terms of different types")
    return app(eq_const(s.ty), s, t)


def forall(var_ty: SimpleType, body: Term) -> Term:
    """Universal quantification over a de Bruijn body (Bound 0 is the var)."""
    return app(pi_const(var_ty), lam(var_ty, body))


def exists(var_ty: SimpleType, body: Term) -> Term:
    return app(sigma_const(var_ty), lam(var_ty, body))


def match_quant(t: Term, name: str) -> Optional[Abs]:
    """The abstraction under a quantifier constant application, if t is one."""
    if isinstance(t, App) and isinstance(t.head, Const) and t.head.name == name \
            and len(t.args) == 1 and isinstance(t.args[0], Abs):
        return t.args[0]
    return None


# ---------------------------------------------------------------------------
# de Bruijn operations
# ---------------------------------------------------------------------------

def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    if d == 0 or t.loose <= cutoff:
        return t
    if isinstance(t, Bound):
        return bound(t.index + d, t.ty)
    if isinstance(t, Abs):
        return lam(t.var_ty, shift(t.body, d, cutoff + 1))
    if isinstance(t, App):
        return app(shift(t.head, d, cutoff), *[shift(a, d, cutoff) for a in t.args])
    return t


def _inst(t: Term, j: int, repl: Term) -> Term:
    """Replace Bound(j) by repl (shifted), decrementing higher indices."""
    if t.loose <= j:
        return t
    if isinstance(t, Bound):
        if t.index == j:
            return shift(repl, j)
        if t.index > j:
            return bound(t.index - 1, t.ty)
        return t
    if isinstance(t, Abs):
        return lam(t.var_ty, _inst(t.body, j + 1, repl))
    if isinstance(t, App):
        return app(_inst(t.head, j, repl), *[_inst(a, j, repl) for a in t.args])
    return t


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def beta_normalize(t: Term) -> Term:
    if t._bnf is not None:
        return t._bnf
    if isinstance(t, Abs):
        res = lam(t.var_ty, beta_normalize(t.body))
    elif isinstance(t, App):
        h = t.head
        if isinstance(h, Abs):
            r: Term = h
            args = list(t.args)
            while isinstance(r, Abs) and args:
                r = _inst(r.body, 0, args.pop(0))
            if args:
                r = app(r, *args)
            res = beta_normalize(r)
        else:
            res = app(h, *[beta_normalize(a) for a in t.args])
    else:
        res = t
    t._bnf = res
    res._bnf = res
    return res


def eta_long(t: Term) -> Term:
    """Eta-long form of a beta-normal term."""
    if t._eta is not None:
        return t._eta
    if isinstance(t, Abs):
        res = lam(t.var_ty, eta_long(t.body))
    else:
        if isinstance(t, App):
            core = app(t.head, *[eta_long(a) for a in t.args])
        else:
            core = t
        ats = arg_types(t.ty)
        if not ats:
            res = core
        else:
            n = len(ats)
            body = app(shift(core, n),
                       *[eta_long(bound(n - 1 - k, ats[k])) for k in range(n)])
            for ty in reversed(ats):
                body = lam(ty, body)
            res = body
    t._eta = res
    res._eta = res
    res._bnf = res
    return res


def canon(t: Term) -> Term:
    """Canonical beta-normal eta-long representative."""
    return eta_long(beta_normalize(t))


def has_beta_redex(t: Term) -> bool:
    if isinstance(t, App):
        if isinstance(t.head, Abs):
            return True
        return any(has_beta_redex(a) for a in t.args)
    if isinstance(t, Abs):
        return has_beta_redex(t.body)
    return False


# ---------------------------------------------------------------------------
# Substitution of free variables
# ---------------------------------------------------------------------------

def substitute_raw(t: Term, mapping: dict, depth: int = 0) -> Term:
    """Apply a {Free -> closed Term} mapping without normalizing."""
    if not t.fvs or not any(v in mapping for v in t.fvs):
        return t
    if isinstance(t, Free):
        r = mapping.get(t)
        return shift(r, depth) if r is not None else t
    if isinstance(t, Abs):
        return lam(t.var_ty, substitute_raw(t.body, mapping, depth + 1))
    if isinstance(t, App):
        return app(substitute_raw(t.head, mapping, depth),
                   *[substitute_raw(a, mapping, depth) for a in t.args])
    return t


def substitute(t: Term, mapping: dict) -> Term:
    """Capture-free substitution; result is canonical (beta-normal eta-long)."""
    for v, r in mapping.items():
        if v.ty is not r.ty:
            raise TermError(f"binding type mismatch for {v!r}")
        if r.loose:
            raise TermError("substitution image must be closed")
    return canon(substitute_raw(t, mapping))


class Subst:
    """Finite map from free variables to closed terms."""

    __slots__ = ("map",)

    def __init__(self, mapping: Optional[dict] = None):
        self.map = dict(mapping) if mapping else {}

    def apply(self, t: Term) -> Term:
        return substitute(t, self.map) if self.map else canon(t)

    def bind(self, v: Free, r: Term) -> "Subst":
        """Compose with {r/v}: apply the new binding inside existing images."""
        new = {w: substitute(img, {v: r}) for w, img in self.map.items()}
        if v not in new:
            new[v] = canon(r)
        return Subst(new)

    def compose(self, other: "Subst") -> "Subst":
        """Result applies self first, then other."""
        new = {v: other.apply(img) for v, img in self.map.items()}
        for v, img in other.map.items():
            if v not in new:
                new[v] = img
        return Subst(new)

    def restrict(self, fvs) -> "Subst":
        return Subst({v: r for v, r in self.map.items() if v in fvs})

    def items(self):
        return self.map.items()

    def __bool__(self):
        return bool(self.map)

    def __repr__(self):
        return "Subst(" + ", ".join(f"{v!r}:={r!r}" for v, r in self.map.items()) + ")"


# ---------------------------------------------------------------------------
# Positions
# ---------------------------------------------------------------------------
# A position is a tuple of integers.  At an App node, 0 descends into the
# head and k >= 1 into the k-th spine argument; at an Abs node, 0 descends
# into the body.

def subterm_at(t: Term, pos: tuple) -> Term:
    for step in pos:
        if isinstance(t, App):
            if step == 0:
                t = t.head
            elif 1 <= step <= len(t.args):
                t = t.args[step - 1]
            else:
                raise TermError(f"invalid position step {step}")
        elif isinstance(t, Abs):
            if step != 0:
                raise TermError(f"invalid position step {step}")
            t = t.body
        else:
            raise TermError("position descends below a leaf")
    return t


def replace_at(t: Term, pos: tuple, r: Term) -> Term:
    if not pos:
        if t.ty is not r.ty:
            raise TermError("replacement type mismatch")
        return r
    step = pos[0]
    if isinstance(t, App):
        if step == 0:
            return app(replace_at(t.head, pos[1:], r), *t.args)
        if 1 <= step <= len(t.args):
            args = list(t.args)
            args[step - 1] = replace_at(args[step - 1], pos[1:], r)
            return app(t.head, *args)
        raise TermError(f"invalid position step {step}")
    if isinstance(t, Abs):
        if step != 0:
            raise TermError(f"invalid position step {step}")
        return lam(t.var_ty, replace_at(t.body, pos[1:], r))
    raise TermError("position descends below a leaf")


def subterm_positions(t: Term) -> Iterator[tuple]:
    """All positions in preorder, the empty position first."""
    stack = [((), t)]
    while stack:
        pos, s = stack.pop()
        yield pos, s
        if isinstance(s, App):
            for k in range(len(s.args), 0, -1):
                stack.append((pos + (k,), s.args[k - 1]))
            stack.append((pos + (0,), s.head))
        elif isinstance(s, Abs):
            stack.append((pos + (0,), s.body))


# ---------------------------------------------------------------------------
# Signature
# ---------------------------------------------------------------------------

class Signature:
    """Constant declarations plus fresh-symbol supplies for one prover run."""

    def __init__(self):
        self.constants: dict[str, SimpleType] = {}
        self.system: set[str] = set()
        self.base_types: set[str] = {"$i", "$o"}
        self._sk = 0
        self._fv = 0

    def declare(self, name: str, ty: SimpleType, system: bool = False):
        old = self.constants.get(name)
        if old is not None and old is not ty:
            raise TermError(f"conflicting declaration for {name}")
        self.constants[name] = ty
        if system:
            self.system.add(name)

    def declare_base_type(self, name: str):
        self.base_types.add(name)

    def is_declared(self, name: str) -> bool:
        return name in self.constants

    def fresh_skolem(self, ty: SimpleType) -> Const:
        while True:
            self._sk += 1
            name = f"sk{self._sk}"
            if name not in self.constants:
                break
        self.declare(name, ty, system=True)
        return const(name, ty)

    def fresh_free(self, ty: SimpleType) -> Free:
        self._fv += 1
        return free(f"V{self._fv}", ty)

    def problem_base_types(self) -> list:
        return sorted(self.base_types)
