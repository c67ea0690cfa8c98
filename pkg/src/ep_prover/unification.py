"""Higher-order unification: pre-unification with search budget.

Constraints are pairs of closed beta-normal eta-long terms of equal type.
The simplification phase applies trivial deletion, variable binding and
rigid-rigid decomposition to a fixpoint; remaining flex-rigid pairs are
attacked by branching over partial bindings (imitation, then projections).
Flex-flex pairs are never solved here, they are returned as residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .terms import (
    Abs, App, Bound, Const, Free, FunType, SimpleType, Subst, Term,
    app, arg_types, bound, canon, const, eta_long, fun_type, lam,
    result_type, spine,
)
from .clauses import _remap_bounds


DEFAULT_DEPTH = 8
DEFAULT_LIMIT = 4


@dataclass
class Unifier:
    subst: Subst
    residuals: tuple  # flex-flex pairs left unsolved


@dataclass
class UnifOutcome:
    unifiers: list
    exhausted: bool = False  # search hit the depth budget somewhere

    @property
    def definitely_fails(self) -> bool:
        return not self.unifiers and not self.exhausted


class _Clash(Exception):
    """Definitive non-unifiability found during simplification."""


def strip_prefix(t: Term):
    """Binder types and body of the leading abstraction prefix."""
    tys = []
    while isinstance(t, Abs):
        tys.append(t.var_ty)
        t = t.body
    return tys, t


def _wrap(binders: list, t: Term) -> Term:
    for ty in reversed(binders):
        t = lam(ty, t)
    return t


def is_eta_var(t: Term) -> Optional[Free]:
    """The free variable t is an eta-expansion of, if it is one."""
    _, body = strip_prefix(t)
    h, _ = spine(body)
    if isinstance(h, Free) and t is eta_long(h):
        return h
    return None


def _head_kind(t: Term):
    _, body = strip_prefix(t)
    h, _ = spine(body)
    return h


def simplify_pairs(pairs: list, subst: Subst):
    """Exhaustively apply Triv, Bind and Decomp.

    Returns (subst, flex_rigid, flex_flex) or raises _Clash.
    """
    work = list(pairs)
    flex_rigid: list = []
    flex_flex: list = []
    while work:
        s, t = work.pop()
        s, t = subst.apply(s), subst.apply(t)
        if s is t:
            continue
        binders, sb = strip_prefix(s)
        _, tb = strip_prefix(t)
        hs, sargs = spine(sb)
        ht, targs = spine(tb)
        s_flex = isinstance(hs, Free)
        t_flex = isinstance(ht, Free)
        if not s_flex and not t_flex:
            if isinstance(hs, Const):
                if hs is not ht:
                    raise _Clash
            elif isinstance(hs, Bound):
                if not (isinstance(ht, Bound) and ht.index == hs.index):
                    raise _Clash
            else:
                raise _Clash
            for sa, ta in zip(sargs, targs):
                work.append((_wrap(binders, sa), _wrap(binders, ta)))
            continue
        # Bind: one side is (eta-equivalent to) a bare free variable
        xv = is_eta_var(s)
        if xv is not None and xv not in t.fvs:
            subst = subst.bind(xv, t)
            work.extend(flex_rigid)
            work.extend(flex_flex)
            flex_rigid, flex_flex = [], []
            continue
        yv = is_eta_var(t)
        if yv is not None and yv not in s.fvs:
            subst = subst.bind(yv, s)
            work.extend(flex_rigid)
            work.extend(flex_flex)
            flex_rigid, flex_flex = [], []
            continue
        if s_flex and t_flex:
            flex_flex.append((s, t))
        elif s_flex:
            flex_rigid.append((s, t))
        else:
            flex_rigid.append((t, s))
    return subst, flex_rigid, flex_flex


def general_bindings(var_ty: SimpleType, rigid_head: Optional[Term],
                     sig) -> list:
    """Partial bindings for a flexible head of type var_ty.

    The imitation binding (if rigid_head is a constant) comes first,
    followed by the projection bindings in argument order.
    """
    ats = list(arg_types(var_ty))
    res = result_type(var_ty)
    n = len(ats)
    xs = [bound(n - 1 - k, ats[k]) for k in range(n)]

    def fresh_applied(goal: SimpleType) -> Term:
        h = sig.fresh_free(fun_type_chain(ats, goal))
        return app(h, *xs) if xs else h

    out = []
    if isinstance(rigid_head, Const):
        head_args = arg_types(rigid_head.ty)
        body = app(rigid_head, *[fresh_applied(g) for g in head_args])
        out.append(canon(_wrap(ats, body)))
    for i, aty in enumerate(ats):
        if result_type(aty) is not res:
            continue
        proj_args = arg_types(aty)
        body = app(xs[i], *[fresh_applied(g) for g in proj_args])
        out.append(canon(_wrap(ats, body)))
    return out


def fun_type_chain(ats: list, res: SimpleType) -> SimpleType:
    ty = res
    for a in reversed(ats):
        ty = fun_type(a, ty)
    return ty


def pre_unify(pairs: list, sig, depth: int = DEFAULT_DEPTH,
              limit: int = DEFAULT_LIMIT) -> UnifOutcome:
    """Pre-unify a list of closed term pairs.

    Returns up to `limit` unifiers, each with its flex-flex residuals.
    `exhausted` is set when a branch was cut off by the depth budget, so
    an empty result list is only a definitive failure when it is False.
    """
    pairs = [(canon(a), canon(b)) for a, b in pairs]
    outcome = UnifOutcome([], False)

    def search(pairs, subst, d):
        if len(outcome.unifiers) >= limit:
            return
        try:
            subst, flex_rigid, flex_flex = simplify_pairs(pairs, subst)
        except _Clash:
            return
        if not flex_rigid:
            outcome.unifiers.append(Unifier(subst, tuple(flex_flex)))
            return
        if d >= depth:
            outcome.exhausted = True
            return
        s, t = flex_rigid[0]
        fv = _head_kind(s)
        rigid = _head_kind(t)
        head = rigid if isinstance(rigid, Const) else None
        for b in general_bindings(fv.ty, head, sig):
            if len(outcome.unifiers) >= limit:
                return
            search(flex_rigid + flex_flex, subst.bind(fv, b), d + 1)

    search(pairs, Subst(), 0)
    for u in outcome.unifiers:
        _verify(pairs, u)
    return outcome


def _verify(pairs, u: Unifier):
    for a, b in pairs:
        try:
            _, fr, _ = simplify_pairs([(a, b)], u.subst)
        except _Clash:
            raise AssertionError("unifier fails to unify its problem")
        if fr:
            raise AssertionError("unifier leaves a flex-rigid pair")


# ---------------------------------------------------------------------------
# Pattern unification (Miller fragment)
# ---------------------------------------------------------------------------

FAIL = "fail"
NOT_PATTERN = "not_pattern"


def occurs_rigidly(v: Free, t: Term) -> bool:
    """True if v occurs in t outside the arguments of any flexible head."""
    _, body = strip_prefix(t)
    h, args = spine(body)
    if h is v:
        return True
    if isinstance(h, Free):
        return False
    return any(v in a.fvs and occurs_rigidly(v, a) for a in args)


def pattern_unify(pairs: list, sig):
    """Unify pattern pairs; returns a Subst, FAIL, or NOT_PATTERN.

    A pair is handled when every flexible head is applied to distinct
    bound variables and the solution can be read off by inversion.
    Anything outside that fragment returns NOT_PATTERN so the caller can
    fall back to full pre-unification.
    """
    subst = Subst()
    work = [(canon(a), canon(b)) for a, b in pairs]
    while work:
        s, t = work.pop()
        s, t = subst.apply(s), subst.apply(t)
        if s is t:
            continue
        binders, sb = strip_prefix(s)
        _, tb = strip_prefix(t)
        hs, sargs = spine(sb)
        ht, targs = spine(tb)
        if not isinstance(hs, Free) and not isinstance(ht, Free):
            if isinstance(hs, Const):
                if hs is not ht:
                    return FAIL
            elif isinstance(hs, Bound):
                if not (isinstance(ht, Bound) and ht.index == hs.index):
                    return FAIL
            else:
                return FAIL
            for sa, ta in zip(sargs, targs):
                work.append((_wrap(binders, sa), _wrap(binders, ta)))
            continue
        if not isinstance(hs, Free):
            s, t = t, s
            binders2, sb = strip_prefix(s)
            _, tb = strip_prefix(t)
            hs, sargs = spine(sb)
            ht, targs = spine(tb)
        # flexible side: hs applied to sargs under binders
        if not all(isinstance(a, Bound) for a in sargs):
            return NOT_PATTERN
        idxs = [a.index for a in sargs]
        if len(set(idxs)) != len(idxs):
            return NOT_PATTERN
        if hs in t.fvs:
            return FAIL if occurs_rigidly(hs, tb) else NOT_PATTERN
        m = len(sargs)
        remap = {idx: m - 1 - k for k, idx in enumerate(idxs)}
        img_body = _remap_bounds(tb, remap, 0)
        if img_body is None:
            # t mentions a binder the flexible head cannot see; deciding
            # this needs pruning, so hand the pair to full pre-unification
            return NOT_PATTERN
        img = canon(_wrap([a.ty for a in sargs], img_body))
        subst = subst.bind(hs, img)
    return subst
