"""Multi-sorted first-order formulas: AST, parser, renderer, substitution.

All nodes are immutable and hash in O(1) (the hash is computed once at
construction from the children's cached hashes), so formulas can be used
freely as dictionary keys by the memoizing layers above.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Mapping

ELEM = "elem"
CLASS = "class"

KEYWORDS = frozenset({"exists", "forall", "true", "false", "cl", "E"})


class FormulaError(ValueError):
    """Base class for parse and sort errors."""


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class SortError(FormulaError):
    pass


# ---------------------------------------------------------------- terms


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    sort: str = ELEM

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    """An element of a canonical model, tagged with its sort.

    ``value`` is an ``int`` (EQ elements, EREL classes), a ``Fraction``
    (DLO) or a pair ``(class, member)`` (EREL elements).
    """

    value: Hashable
    sort: str = ELEM

    def sort_key(self):
        v = self.value
        return (self.sort, v if not isinstance(v, tuple) else v)


@dataclass(frozen=True, slots=True)
class Cl:
    arg: "Term"

    @property
    def sort(self) -> str:
        return CLASS


Term = Var | Const | Cl


# ------------------------------------------------------------- formulas


class Formula:
    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return conj([self, other])

    def __or__(self, other: "Formula") -> "Formula":
        return disj([self, other])

    def __invert__(self) -> "Formula":
        return Not(self)


def _cached_hash(obj, *parts) -> None:
    object.__setattr__(obj, "_hash", hash((type(obj).__name__,) + parts))


@dataclass(frozen=True, slots=True, eq=False)
class Top(Formula):
    def __eq__(self, other):
        return isinstance(other, Top)

    def __hash__(self):
        return 0x70B


@dataclass(frozen=True, slots=True, eq=False)
class Bottom(Formula):
    def __eq__(self, other):
        return isinstance(other, Bottom)

    def __hash__(self):
        return 0xB07


TRUE = Top()
FALSE = Bottom()


class _Node(Formula):
    __slots__ = ()

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self) or other._hash != self._hash:
            return False
        return all(getattr(self, f) == getattr(other, f) for f in self._fields)


@dataclass(frozen=True, slots=True, eq=False)
class Eq(_Node):
    left: Term
    right: Term
    _hash: int = field(init=False, repr=False, compare=False)
    _fields = ("left", "right")

    def __post_init__(self):
        _cached_hash(self, self.left, self.right)


@dataclass(frozen=True, slots=True, eq=False)
class Lt(_Node):
    left: Term
    right: Term
    _hash: int = field(init=False, repr=False, compare=False)
    _fields = ("left", "right")

    def __post_init__(self):
        _cached_hash(self, self.left, self.right)


@dataclass(frozen=True, slots=True, eq=False)
class SameClass(_Node):
    """``E(s, t)``: s and t lie in the same class."""

    left: Term
    right: Term
    _hash: int = field(init=False, repr=False, compare=False)
    _fields = ("left", "right")

    def __post_init__(self):
        _cached_hash(self, self.left, self.right)


@dataclass(frozen=True, slots=True, eq=False)
class Not(_Node):
    arg: Formula
    _hash: int = field(init=False, repr=False, compare=False)
    _fields = ("arg",)

    def __post_init__(self):
        _cached_hash(self, self.arg)


def _flatten(kind, args) -> tuple:
    out = []
    for a in args:
        if isinstance(a, kind):
            out.extend(a.args)
        else:
            out.append(a)
    return tuple(out)


@dataclass(frozen=True, slots=True, eq=False)
class And(_Node):
    args: tuple
    _hash: int = field(init=False, repr=False, compare=False)
    _fields = ("args",)

    def __post_init__(self):
        args = _flatten(And, self.args)
        if len(args) < 2:
            raise ValueError("And needs at least two conjuncts; use conj()")
        object.__setattr__(self, "args", args)
        _cached_hash(self, args)


@dataclass(frozen=True, slots=True, eq=False)
class Or(_Node):
    args: tuple
    _hash: int = field(init=False, repr=False, compare=False)
    _fields = ("args",)

    def __post_init__(self):
        args = _flatten(Or, self.args)
        if len(args) < 2:
            raise ValueError("Or needs at least two disjuncts; use disj()")
        object.__setattr__(self, "args", args)
        _cached_hash(self, args)


@dataclass(frozen=True, slots=True, eq=False)
class Implies(_Node):
    left: Formula
    right: Formula
    _hash: int = field(init=False, repr=False, compare=False)
    _fields = ("left", "right")

    def __post_init__(self):
        _cached_hash(self, self.left, self.right)


@dataclass(frozen=True, slots=True, eq=False)
class Exists(_Node):
    vars: tuple
    body: Formula
    _hash: int = field(init=False, repr=False, compare=False)
    _fields = ("vars", "body")

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if not self.vars:
            raise ValueError("quantifier without variables")
        _cached_hash(self, self.vars, self.body)


@dataclass(frozen=True, slots=True, eq=False)
class Forall(_Node):
    vars: tuple
    body: Formula
    _hash: int = field(init=False, repr=False, compare=False)
    _fields = ("vars", "body")

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if not self.vars:
            raise ValueError("quantifier without variables")
        _cached_hash(self, self.vars, self.body)


ATOMS = (Eq, Lt, SameClass)
Quantifier = Exists | Forall


def conj(args: Iterable[Formula]) -> Formula:
    """Conjunction with unit/zero simplification."""
    out = []
    seen = set()
    for a in args:
        if isinstance(a, Top):
            continue
        if isinstance(a, Bottom):
            return FALSE
        for b in (a.args if isinstance(a, And) else (a,)):
            if b not in seen:
                seen.add(b)
                out.append(b)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(args: Iterable[Formula]) -> Formula:
    out = []
    seen = set()
    for a in args:
        if isinstance(a, Bottom):
            continue
        if isinstance(a, Top):
            return TRUE
        for b in (a.args if isinstance(a, Or) else (a,)):
            if b not in seen:
                seen.add(b)
                out.append(b)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bottom):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


# ------------------------------------------------------------ signatures


@dataclass(frozen=True)
class Signature:
    """Sorts, relation and function symbols, and element-literal syntax.

    Equality is available at every sort and is not listed in ``relations``.
    """

    name: str
    sorts: tuple[str, ...]
    relations: Mapping[str, tuple[str, ...]]
    functions: Mapping[str, tuple[tuple[str, ...], str]]
    parse_literal: Callable[[str], Const | None]
    render_literal: Callable[[Const], str]

    def __post_init__(self):
        if len(set(self.sorts)) != len(self.sorts):
            raise ValueError("duplicate sort names")
        for name, args in self.relations.items():
            for s in args:
                if s not in self.sorts:
                    raise ValueError(f"relation {name} uses undeclared sort {s}")
        for name, (args, res) in self.functions.items():
            for s in args + (res,):
                if s not in self.sorts:
                    raise ValueError(f"function {name} uses undeclared sort {s}")

    def __hash__(self):
        return hash(self.name)

    def __eq__(self, other):
        return isinstance(other, Signature) and other.name == self.name

    def literal(self, text: str) -> Const:
        c = self.parse_literal(text)
        if c is None:
            raise FormulaError(f"{text!r} is not an element literal of {self.name}")
        return c


def _eq_literal(text: str) -> Const | None:
    m = re.fullmatch(r"#(\d+)", text)
    return Const(int(m.group(1))) if m else None


def _dlo_literal(text: str) -> Const | None:
    if re.fullmatch(r"-?\d+(/\d+)?", text):
        try:
            return Const(Fraction(text))
        except ZeroDivisionError:
            return None
    return None


def _render_dlo(c: Const) -> str:
    v = Fraction(c.value)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _erel_literal(text: str) -> Const | None:
    m = re.fullmatch(r"(\d+)\.(\d+)", text)
    if m:
        return Const((int(m.group(1)), int(m.group(2))))
    m = re.fullmatch(r"@(\d+)", text)
    if m:
        return Const(int(m.group(1)), CLASS)
    return None


def _render_erel(c: Const) -> str:
    if c.sort == CLASS:
        return f"@{c.value}"
    i, j = c.value
    return f"{i}.{j}"


EQ_SIG = Signature(
    "eq", (ELEM,), {}, {}, _eq_literal, lambda c: f"#{c.value}"
)
DLO_SIG = Signature(
    "dlo", (ELEM,), {"<": (ELEM, ELEM)}, {}, _dlo_literal, _render_dlo
)
EREL_SIG = Signature(
    "erel",
    (ELEM, CLASS),
    {"E": (ELEM, ELEM)},
    {"cl": ((ELEM,), CLASS)},
    _erel_literal,
    _render_erel,
)


# ------------------------------------------------------------- traversal


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif isinstance(t, Cl):
        yield from term_vars(t.arg)


def term_consts(t: Term) -> Iterator[Const]:
    if isinstance(t, Const):
        yield t
    elif isinstance(t, Cl):
        yield from term_consts(t.arg)


def free_vars(f: Formula) -> frozenset[Var]:
    """The variables with at least one free occurrence in ``f``."""
    return _free_vars(f)


_fv_cache: dict = {}


def _free_vars(f: Formula) -> frozenset[Var]:
    got = _fv_cache.get(f)
    if got is not None:
        return got
    if isinstance(f, (Top, Bottom)):
        out = frozenset()
    elif isinstance(f, ATOMS):
        out = frozenset(term_vars(f.left)) | frozenset(term_vars(f.right))
    elif isinstance(f, Not):
        out = _free_vars(f.arg)
    elif isinstance(f, (And, Or)):
        out = frozenset().union(*(_free_vars(a) for a in f.args))
    elif isinstance(f, Implies):
        out = _free_vars(f.left) | _free_vars(f.right)
    elif isinstance(f, (Exists, Forall)):
        out = _free_vars(f.body) - frozenset(f.vars)
    else:
        raise TypeError(f"not a formula: {f!r}")
    if len(_fv_cache) > 200_000:
        _fv_cache.clear()
    _fv_cache[f] = out
    return out


def all_vars(f: Formula) -> set[Var]:
    out: set[Var] = set()
    for node in walk(f):
        if isinstance(node, ATOMS):
            out.update(term_vars(node.left))
            out.update(term_vars(node.right))
        elif isinstance(node, (Exists, Forall)):
            out.update(node.vars)
    return out


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal of all subformulas."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.args))
        elif isinstance(g, Implies):
            stack.extend((g.right, g.left))
        elif isinstance(g, (Exists, Forall)):
            stack.append(g.body)


def constants(f: Formula) -> list[Const]:
    """Distinct constants of ``f`` in order of first occurrence."""
    out: dict[Const, None] = {}
    for node in walk(f):
        if isinstance(node, ATOMS):
            for t in (node.left, node.right):
                for c in term_consts(t):
                    out.setdefault(c)
    return list(out)


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(g, (Exists, Forall)) for g in walk(f))


# ---------------------------------------------------------- substitution


def subst_term(t: Term, binding: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return binding.get(t, t)
    if isinstance(t, Cl):
        inner = subst_term(t.arg, binding)
        return t if inner is t.arg else Cl(inner)
    return t


def _fresh_name(base: str, taken: set[str]) -> str:
    stem = base.rstrip("0123456789") or base
    i = 1
    while f"{stem}{i}" in taken:
        i += 1
    return f"{stem}{i}"


def substitute(f: Formula, binding: Mapping[Var, Term]) -> Formula:
    """Replace free occurrences of variables, renaming bound variables
    that would capture a variable of a substituted term."""
    for v, t in binding.items():
        if v.sort != t.sort:
            raise SortError(f"cannot substitute {t!r} of sort {t.sort} for {v.name}:{v.sort}")
    binding = {v: t for v, t in binding.items() if v != t}
    if not binding:
        return f
    return _subst(f, binding)


def _subst(f: Formula, binding: Mapping[Var, Term]) -> Formula:
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, ATOMS):
        left = subst_term(f.left, binding)
        right = subst_term(f.right, binding)
        if left is f.left and right is f.right:
            return f
        return type(f)(left, right)
    if isinstance(f, Not):
        return Not(_subst(f.arg, binding))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_subst(a, binding) for a in f.args))
    if isinstance(f, Implies):
        return Implies(_subst(f.left, binding), _subst(f.right, binding))
    if isinstance(f, (Exists, Forall)):
        fv = _free_vars(f)
        inner = {v: t for v, t in binding.items() if v in fv}
        if not inner:
            return f
        incoming = {w.name for t in inner.values() for w in term_vars(t)}
        new_vars = []
        rename: dict[Var, Term] = {}
        taken = incoming | {v.name for v in all_vars(f)} | {v.name for v in inner}
        for v in f.vars:
            if v.name in incoming:
                nv = Var(_fresh_name(v.name, taken), v.sort)
                taken.add(nv.name)
                rename[v] = nv
                new_vars.append(nv)
            else:
                new_vars.append(v)
        body = _subst(f.body, rename) if rename else f.body
        return type(f)(tuple(new_vars), _subst(body, inner))
    raise TypeError(f"not a formula: {f!r}")


def alpha_normal(f: Formula) -> Formula:
    """Rename bound variables to _b0, _b1, ... in order of binding, so that
    alpha-equivalent formulas become equal."""
    counter = [0]

    def go(g: Formula, env: dict) -> Formula:
        if isinstance(g, (Top, Bottom)):
            return g
        if isinstance(g, ATOMS):
            return type(g)(subst_term(g.left, env), subst_term(g.right, env))
        if isinstance(g, Not):
            return Not(go(g.arg, env))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(a, env) for a in g.args))
        if isinstance(g, Implies):
            return Implies(go(g.left, env), go(g.right, env))
        inner = dict(env)
        new_vars = []
        for v in g.vars:
            nv = Var(f"_b{counter[0]}", v.sort)
            counter[0] += 1
            inner[v] = nv
            new_vars.append(nv)
        return type(g)(tuple(new_vars), go(g.body, inner))

    return go(f, {})


def alpha_equal(f: Formula, g: Formula) -> bool:
    return alpha_normal(f) == alpha_normal(g)


def map_terms(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    """Rewrite every term bottom-up with ``fn`` (no capture checks: ``fn``
    must not introduce variables)."""

    def mt(t: Term) -> Term:
        if isinstance(t, Cl):
            t = Cl(mt(t.arg))
        return fn(t)

    def go(g: Formula) -> Formula:
        if isinstance(g, (Top, Bottom)):
            return g
        if isinstance(g, ATOMS):
            return type(g)(mt(g.left), mt(g.right))
        if isinstance(g, Not):
            return Not(go(g.arg))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(go(g.left), go(g.right))
        return type(g)(g.vars, go(g.body))

    return go(f)


def map_constants(f: Formula, mapping: Mapping[Const, Const]) -> Formula:
    """Rename element constants (used to transport formulas along a
    partial isomorphism)."""
    return map_terms(f, lambda t: mapping.get(t, t) if isinstance(t, Const) else t)


# ------------------------------------------------------------- rendering

_PREC_QUANT, _PREC_IMPL, _PREC_OR, _PREC_AND, _PREC_LIT = range(5)


def render_term(t: Term, sig: Signature) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return sig.render_literal(t)
    return f"cl({render_term(t.arg, sig)})"


def _prec(f: Formula) -> int:
    if isinstance(f, (Exists, Forall)):
        return _PREC_QUANT
    if isinstance(f, Implies):
        return _PREC_IMPL
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    return _PREC_LIT


def render(f: Formula, sig: Signature) -> str:
    """Canonical text: precedence ``!`` > ``&`` > ``|`` > ``->``,
    quantifier bodies extend as far right as possible."""
    return _render(f, sig, _PREC_QUANT)


def _render(f: Formula, sig: Signature, ctx: int) -> str:
    if _prec(f) < ctx:
        return "(" + _render(f, sig, _PREC_QUANT) + ")"
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Eq):
        return f"{render_term(f.left, sig)} = {render_term(f.right, sig)}"
    if isinstance(f, Lt):
        return f"{render_term(f.left, sig)} < {render_term(f.right, sig)}"
    if isinstance(f, SameClass):
        return f"E({render_term(f.left, sig)}, {render_term(f.right, sig)})"
    if isinstance(f, Not):
        a = f.arg
        if isinstance(a, Eq):
            return f"{render_term(a.left, sig)} != {render_term(a.right, sig)}"
        if isinstance(a, (Not, Top, Bottom, SameClass)):
            return "!" + _render(a, sig, _PREC_LIT)
        return "!(" + _render(a, sig, _PREC_QUANT) + ")"
    if isinstance(f, And):
        return " & ".join(_render(a, sig, _PREC_LIT) for a in f.args)
    if isinstance(f, Or):
        return " | ".join(_render(a, sig, _PREC_AND) for a in f.args)
    if isinstance(f, Implies):
        return f"{_render(f.left, sig, _PREC_OR)} -> {_render(f.right, sig, _PREC_IMPL)}"
    if isinstance(f, (Exists, Forall)):
        q = "exists" if isinstance(f, Exists) else "forall"
        names = ", ".join(v.name for v in f.vars)
        return f"{q} {names}. {_render(f.body, sig, _PREC_QUANT)}"
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<arrow>->)|(?P<neq>!=)|(?P<op>[!&|().,=<])"
    r"|(?P<lit>#\d+|@\d+|-?\d+(?:\.\d+|/\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    pos = 0
    out = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        val = m.group(kind)
        out.append((kind, val, m.start(kind)))
        pos = m.end()
    out.append(("eof", "", n))
    return out


class _RawVar:
    """A variable occurrence whose sort is not yet inferred."""

    __slots__ = ("name", "key")

    def __init__(self, name: str, key: int):
        self.name = name
        self.key = key


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.scopes: list[dict[str, int]] = []
        self.free: dict[str, int] = {}
        self.next_key = 0
        self.keys_of: dict[int, str] = {}

    # token helpers
    def peek(self, ahead: int = 0):
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, val: str):
        kind, v, pos = self.take()
        if v != val:
            raise ParseError(f"expected {val!r}, found {v or 'end of input'!r}", pos)

    def is_op(self, val: str, ahead: int = 0) -> bool:
        kind, v, _ = self.peek(ahead)
        return kind in ("op", "arrow", "neq") and v == val

    # variables
    def new_key(self, name: str) -> int:
        k = self.next_key
        self.next_key += 1
        self.keys_of[k] = name
        return k

    def lookup(self, name: str) -> _RawVar:
        for scope in reversed(self.scopes):
            if name in scope:
                return _RawVar(name, scope[name])
        if name not in self.free:
            self.free[name] = self.new_key(name)
        return _RawVar(name, self.free[name])

    # grammar
    def formula(self):
        kind, v, pos = self.peek()
        if kind == "ident" and v in ("exists", "forall"):
            self.take()
            names = [self.var_name()]
            while self.is_op(","):
                self.take()
                names.append(self.var_name())
            self.expect(".")
            scope = {n: self.new_key(n) for n in names}
            self.scopes.append(scope)
            body = self.formula()
            self.scopes.pop()
            raw_vars = [_RawVar(n, scope[n]) for n in names]
            return ("exists" if v == "exists" else "forall", raw_vars, body)
        return self.impl()

    def var_name(self) -> str:
        kind, v, pos = self.take()
        if kind != "ident" or v in KEYWORDS or not v[0].islower():
            raise ParseError(f"expected a variable, found {v or 'end of input'!r}", pos)
        return v

    def impl(self):
        left = self.disj()
        if self.peek()[0] == "arrow":
            self.take()
            return ("implies", left, self.impl())
        return left

    def disj(self):
        parts = [self.conj()]
        while self.is_op("|"):
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else ("or", parts)

    def conj(self):
        parts = [self.lit()]
        while self.is_op("&"):
            self.take()
            parts.append(self.lit())
        return parts[0] if len(parts) == 1 else ("and", parts)

    def lit(self):
        kind, v, pos = self.peek()
        if kind == "op" and v == "!":
            self.take()
            return ("not", self.lit())
        if kind == "ident" and v in ("true", "false"):
            self.take()
            return (v,)
        if kind == "ident" and v in ("exists", "forall"):
            return self.formula()
        if kind == "op" and v == "(":
            # a parenthesized formula, unless it is a parenthesized term
            save = self.i
            self.take()
            try:
                inner = self.formula()
                self.expect(")")
            except ParseError:
                self.i = save
            else:
                nxt = self.peek()
                if not (nxt[0] in ("op", "neq") and nxt[1] in ("=", "<", "!=")):
                    return inner
                self.i = save
            return self.atom()
        return self.atom()

    def atom(self):
        kind, v, pos = self.peek()
        if kind == "ident" and v == "E" and self.is_op("(", 1):
            if "E" not in self.sig.relations:
                raise SortError(f"relation E is not in the {self.sig.name} signature")
            self.take()
            self.take()
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            return ("E", a, b, pos)
        left = self.term()
        kind, v, opos = self.take()
        if v not in ("=", "<", "!="):
            raise ParseError(f"expected '=', '!=' or '<', found {v or 'end of input'!r}", opos)
        if v == "<" and "<" not in self.sig.relations:
            raise SortError(f"relation < is not in the {self.sig.name} signature (at position {opos})")
        right = self.term()
        if v == "!=":
            return ("not", ("=", left, right, opos))
        return (v, left, right, opos)

    def term(self):
        kind, v, pos = self.take()
        if kind == "lit":
            return ("const", self.sig.literal(v) if self.sig.parse_literal(v) else self._bad_lit(v, pos), pos)
        if kind == "ident" and v == "cl":
            if "cl" not in self.sig.functions:
                raise SortError(f"function cl is not in the {self.sig.name} signature (at position {pos})")
            self.expect("(")
            inner = self.term()
            self.expect(")")
            return ("cl", inner, pos)
        if kind == "op" and v == "(":
            inner = self.term()
            self.expect(")")
            return inner
        if kind == "ident" and v not in KEYWORDS and v[0].islower():
            return ("var", self.lookup(v), pos)
        raise ParseError(f"expected a term, found {v or 'end of input'!r}", pos)

    def _bad_lit(self, v, pos):
        raise ParseError(f"{v!r} is not an element literal of {self.sig.name}", pos)


class _Sorts:
    """Union-find over sort variables (variable keys) and fixed sorts."""

    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b, where: str):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        fa = isinstance(ra, str)
        fb = isinstance(rb, str)
        if fa and fb:
            raise SortError(f"sort mismatch in {where}: {ra} vs {rb}")
        if fa:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb


def parse(text: str, sig: Signature, sorts: Mapping[str, str] | None = None) -> Formula:
    """Parse ``text`` over ``sig``, inferring variable sorts.

    Unconstrained variables default to the element sort; ``sorts`` may fix
    the sort of free variables by name.
    """
    p = _Parser(text, sig)
    raw = p.formula()
    kind, v, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {v!r}", pos)
    uf = _Sorts()
    for name, key in p.free.items():
        if sorts and name in sorts:
            uf.union(("k", key), sorts[name], f"declared sort of {name}")

    def tsort(t) -> object:
        tag = t[0]
        if tag == "const":
            return t[1].sort
        if tag == "var":
            return ("k", t[1].key)
        inner = tsort(t[1])
        uf.union(inner, ELEM, f"cl(...) at position {t[2]}")
        return CLASS

    def constrain(node):
        tag = node[0]
        if tag in ("=",):
            uf.union(tsort(node[1]), tsort(node[2]), f"equation at position {node[3]}")
        elif tag == "<":
            uf.union(tsort(node[1]), ELEM, f"'<' at position {node[3]}")
            uf.union(tsort(node[2]), ELEM, f"'<' at position {node[3]}")
        elif tag == "E":
            uf.union(tsort(node[1]), ELEM, f"E at position {node[3]}")
            uf.union(tsort(node[2]), ELEM, f"E at position {node[3]}")
        elif tag == "not":
            constrain(node[1])
        elif tag in ("and", "or"):
            for c in node[1]:
                constrain(c)
        elif tag == "implies":
            constrain(node[1])
            constrain(node[2])
        elif tag in ("exists", "forall"):
            constrain(node[2])

    constrain(raw)

    def sort_of(key: int) -> str:
        r = uf.find(("k", key))
        if isinstance(r, str):
            if r not in sig.sorts:
                raise SortError(f"sort {r} not in the {sig.name} signature")
            return r
        return ELEM

    def build_term(t) -> Term:
        tag = t[0]
        if tag == "const":
            return t[1]
        if tag == "var":
            return Var(t[1].name, sort_of(t[1].key))
        return Cl(build_term(t[1]))

    def build(node) -> Formula:
        tag = node[0]
        if tag == "true":
            return TRUE
        if tag == "false":
            return FALSE
        if tag == "=":
            return Eq(build_term(node[1]), build_term(node[2]))
        if tag == "<":
            return Lt(build_term(node[1]), build_term(node[2]))
        if tag == "E":
            return SameClass(build_term(node[1]), build_term(node[2]))
        if tag == "not":
            return Not(build(node[1]))
        if tag == "and":
            return And(tuple(build(c) for c in node[1]))
        if tag == "or":
            return Or(tuple(build(c) for c in node[1]))
        if tag == "implies":
            return Implies(build(node[1]), build(node[2]))
        vs = tuple(Var(r.name, sort_of(r.key)) for r in node[1])
        cls = Exists if tag == "exists" else Forall
        return cls(vs, build(node[2]))

    return build(raw)


def parse_term(text: str, sig: Signature) -> Term:
    """Parse a single element literal or variable (used for tuples)."""
    text = text.strip()
    c = sig.parse_literal(text)
    if c is not None:
        return c
    if re.fullmatch(r"[a-z][A-Za-z0-9_]*", text) and text not in KEYWORDS:
        return Var(text)
    raise ParseError(f"{text!r} is not a term", 0)
