"""Concrete syntax: a recursive-descent parser and a minimal-parenthesis printer.

Precedence, loosest first: ``->`` (right assoc), ``<->``, ``|``, ``&``,
``U``/``S`` (right assoc), then prefix operators.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ptel.syntax import (
    AgentSignature, Always, And, Atom, Bottom, Common, Eventually, Everyone,
    Formula, FormulaSyntaxError, Iff, Implies, Know, Next, Not, Once, Or,
    ProbAgent, ProbAgentCmp, ProbRun, ProbRunCmp, Since, SoFar, Top, Until,
    WeakPrev, active,
)

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<active>active\(\s*(?P<act_agent>[A-Za-z0-9_]+)\s*\))
  | (?P<prob>Pr(?:\[\s*(?P<prob_agent>[A-Za-z0-9_]+)\s*\])?\s*(?P<cmp>>=|<=|<|>|=)\s*
            (?P<rat>\d+\s*/\s*\d+|\d+))
  | (?P<know>K\[\s*(?P<know_agent>[A-Za-z0-9_]+)\s*\])
  | (?P<op><->|->|[~&|()])
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)

_PREFIX = {"~": Not, "X": Next, "Z": WeakPrev, "F": Eventually, "G": Always,
           "O": Once, "H": SoFar, "C": Common, "E": Everyone}
_KEYWORDS = set(_PREFIX) | {"U", "S", "true", "false", "active", "Pr", "K"}


class _Tok:
    __slots__ = ("kind", "text", "pos", "agent", "cmp", "value")

    def __init__(self, kind, text, pos, agent=None, cmp=None, value=None):
        self.kind, self.text, self.pos = kind, text, pos
        self.agent, self.cmp, self.value = agent, cmp, value


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.group("ws"):
            pass
        elif m.group("active"):
            toks.append(_Tok("active", m.group(0), pos, agent=m.group("act_agent")))
        elif m.group("prob"):
            raw = re.sub(r"\s+", "", m.group("rat"))
            if "/" in raw:
                num, den = raw.split("/")
                if int(den) == 0:
                    raise FormulaSyntaxError("zero denominator in threshold", pos)
                value = Fraction(int(num), int(den))
            else:
                value = Fraction(int(raw))
            if not 0 <= value <= 1:
                raise FormulaSyntaxError(f"threshold {raw} outside [0, 1]", pos)
            toks.append(_Tok("prob", m.group(0), pos, agent=m.group("prob_agent"),
                             cmp=m.group("cmp"), value=value))
        elif m.group("know"):
            toks.append(_Tok("know", m.group(0), pos, agent=m.group("know_agent")))
        elif m.group("op") == "~":
            toks.append(_Tok("prefix", "~", pos))
        elif m.group("op"):
            toks.append(_Tok(m.group("op"), m.group(0), pos))
        else:
            word = m.group("word")
            if word in _PREFIX:
                toks.append(_Tok("prefix", word, pos))
            elif word in ("U", "S"):
                toks.append(_Tok(word, word, pos))
            elif word in ("true", "false"):
                toks.append(_Tok(word, word, pos))
            elif word in _KEYWORDS or word[0].isupper():
                raise FormulaSyntaxError(f"unexpected keyword {word!r}", pos)
            else:
                toks.append(_Tok("atom", word, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, sig: AgentSignature | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str) -> _Tok:
        tok = self.cur
        if tok.kind != kind:
            want = "end of input" if kind == "eof" else repr(kind)
            got = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise FormulaSyntaxError(f"expected {want}, found {got}", tok.pos)
        self.i += 1
        return tok

    def agent(self, tok: _Tok) -> str:
        if self.sig is not None and tok.agent not in self.sig:
            raise FormulaSyntaxError(f"unknown agent {tok.agent!r}", tok.pos)
        return tok.agent

    def impl(self) -> Formula:
        left = self.iff()
        if self.cur.kind == "->":
            self.i += 1
            return Implies(left, self.impl())
        return left

    def iff(self) -> Formula:
        left = self.disj()
        while self.cur.kind == "<->":
            self.i += 1
            left = Iff(left, self.disj())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.cur.kind == "|":
            self.i += 1
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.temporal()
        while self.cur.kind == "&":
            self.i += 1
            left = And(left, self.temporal())
        return left

    def temporal(self) -> Formula:
        left = self.unary()
        if self.cur.kind in ("U", "S"):
            op = Until if self.take(self.cur.kind).kind == "U" else Since
            return op(left, self.temporal())
        return left

    def unary(self) -> Formula:
        tok = self.cur
        if tok.kind == "prefix":
            self.i += 1
            return _PREFIX[tok.text](self.unary())
        if tok.kind == "know":
            self.i += 1
            ag = self.agent(tok)
            return Know(ag, self.unary())
        if tok.kind == "prob":
            self.i += 1
            body = self.unary()
            if tok.agent is None:
                if tok.cmp == ">=":
                    return ProbRun(tok.value, body)
                return ProbRunCmp(tok.cmp, tok.value, body)
            ag = self.agent(tok)
            if tok.cmp == ">=":
                return ProbAgent(ag, tok.value, body)
            return ProbAgentCmp(ag, tok.cmp, tok.value, body)
        if tok.kind == "atom":
            self.i += 1
            return Atom(tok.text)
        if tok.kind == "active":
            self.i += 1
            return active(self.agent(tok))
        if tok.kind == "true":
            self.i += 1
            return Top()
        if tok.kind == "false":
            self.i += 1
            return Bottom()
        if tok.kind == "(":
            self.i += 1
            inner = self.impl()
            self.take(")")
            return inner
        got = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise FormulaSyntaxError(f"expected a formula, found {got}", tok.pos)


def parse(text: str, sig: AgentSignature | None = None) -> Formula:
    """Parse concrete syntax into a surface formula.

    When `sig` is given, agent names are checked against it.
    """
    p = _Parser(text, sig)
    out = p.impl()
    p.take("eof")
    return out


# ------------------------------------------------------------------ printer

_IMPL, _IFF, _OR, _AND, _TEMP, _UNARY = range(1, 7)


def format_bound(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _prefix_text(phi: Formula) -> tuple[str, Formula] | None:
    match phi:
        case Not(a):
            return "~", a
        case Next(a):
            return "X", a
        case WeakPrev(a):
            return "Z", a
        case Eventually(a):
            return "F", a
        case Always(a):
            return "G", a
        case Once(a):
            return "O", a
        case SoFar(a):
            return "H", a
        case Common(a):
            return "C", a
        case Everyone(a):
            return "E", a
        case Know(ag, a):
            return f"K[{ag}]", a
        case ProbRun(s, a):
            return f"Pr>={format_bound(s)}", a
        case ProbRunCmp(cmp, s, a):
            return f"Pr{cmp}{format_bound(s)}", a
        case ProbAgent(ag, s, a):
            return f"Pr[{ag}]>={format_bound(s)}", a
        case ProbAgentCmp(ag, cmp, s, a):
            return f"Pr[{ag}]{cmp}{format_bound(s)}", a
    return None


_BINARY = {Implies: ("->", _IMPL), Iff: ("<->", _IFF), Or: ("|", _OR),
           And: ("&", _AND), Until: ("U", _TEMP), Since: ("S", _TEMP)}


def _show(phi: Formula, ctx: int) -> str:
    kind = _BINARY.get(type(phi))
    if kind is not None:
        sym, prec = kind
        if prec == _IMPL or prec == _TEMP:
            # right-assoc; the left operand of U/S must be a prefix term
            lhs = _show(phi.left, prec + 1 if prec == _IMPL else _UNARY)
            rhs = _show(phi.right, prec)
        else:
            lhs = _show(phi.left, prec)
            rhs = _show(phi.right, prec + 1)
        text = f"{lhs} {sym} {rhs}"
        return f"({text})" if prec < ctx else text
    pre = _prefix_text(phi)
    if pre is not None:
        sym, arg = pre
        body = _show(arg, _UNARY)
        if sym == "~" or (body.startswith("(") and not sym.startswith("Pr")):
            return f"{sym}{body}"
        return f"{sym} {body}"
    match phi:
        case Atom(name):
            return name
        case Top():
            return "true"
        case Bottom():
            return "false"
    raise TypeError(f"cannot print {phi!r}")


def unparse(phi: Formula) -> str:
    return _show(phi, _IMPL)
