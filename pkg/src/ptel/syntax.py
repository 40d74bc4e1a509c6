"""Formula syntax: core and surface AST, abbreviation expansion, k-nested
implications and the ordinal rank function."""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Iterator, Sequence

# Surface-only `false` expands to `BOT_ATOM & ~BOT_ATOM`; the choice of atom is
# irrelevant to the truth value.
BOT_ATOM = "bot"


class FormulaSyntaxError(ValueError):
    """Malformed formula text, unknown agent or out-of-range threshold."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


@dataclass(frozen=True)
class AgentSignature:
    agents: tuple[str, ...]

    def __post_init__(self):
        if not self.agents:
            raise ValueError("agent signature must be non-empty")
        if len(set(self.agents)) != len(self.agents):
            raise ValueError(f"duplicate agent names in {self.agents}")

    @classmethod
    def of(cls, *agents: str) -> "AgentSignature":
        return cls(tuple(agents))

    def __contains__(self, agent: str) -> bool:
        return agent in self.agents


def check_bound(value: Fraction) -> Fraction:
    value = Fraction(value)
    if not 0 <= value <= 1:
        raise ValueError(f"probability threshold {value} outside [0, 1]")
    return value


class Formula:
    """Base class of every formula node, core or surface."""

    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return tuple(getattr(self, f.name) for f in fields(self)
                     if isinstance(getattr(self, f.name), Formula))

    def __str__(self) -> str:
        from ptel.grammar import unparse
        return unparse(self)


def _node(cls):
    # frozen dataclass with a cached hash; formulas are used heavily as memo keys
    cls = dataclass(frozen=True, eq=True, repr=True)(cls)
    plain_hash = cls.__hash__

    def __hash__(self):
        try:
            return object.__getattribute__(self, "_hash")
        except AttributeError:
            h = plain_hash(self)
            object.__setattr__(self, "_hash", h)
            return h

    cls.__hash__ = __hash__
    return cls


# ---------------------------------------------------------------- core nodes

@_node
class Atom(Formula):
    name: str


@_node
class Not(Formula):
    arg: Formula


@_node
class And(Formula):
    left: Formula
    right: Formula


@_node
class Next(Formula):
    arg: Formula


@_node
class Until(Formula):
    left: Formula
    right: Formula


@_node
class WeakPrev(Formula):
    arg: Formula


@_node
class Since(Formula):
    left: Formula
    right: Formula


@_node
class Know(Formula):
    agent: str
    arg: Formula


@_node
class Common(Formula):
    arg: Formula


@_node
class ProbRun(Formula):
    """P_{>=bound} arg, probability over runs."""
    bound: Fraction
    arg: Formula


@_node
class ProbAgent(Formula):
    """P_{agent, >=bound} arg, probability over the agent's sample worlds."""
    agent: str
    bound: Fraction
    arg: Formula


CORE_TYPES = (Atom, Not, And, Next, Until, WeakPrev, Since, Know, Common,
              ProbRun, ProbAgent)


# ------------------------------------------------------------- surface nodes

@_node
class Top(Formula):
    pass


@_node
class Bottom(Formula):
    pass


@_node
class Implies(Formula):
    left: Formula
    right: Formula


@_node
class Or(Formula):
    left: Formula
    right: Formula


@_node
class Iff(Formula):
    left: Formula
    right: Formula


@_node
class Eventually(Formula):
    arg: Formula


@_node
class Always(Formula):
    arg: Formula


@_node
class Once(Formula):
    arg: Formula


@_node
class SoFar(Formula):
    arg: Formula


@_node
class Everyone(Formula):
    arg: Formula


@_node
class ProbRunCmp(Formula):
    """P_{cmp bound} arg for cmp in <, <=, >, = (>= is the core ProbRun)."""
    cmp: str
    bound: Fraction
    arg: Formula


@_node
class ProbAgentCmp(Formula):
    agent: str
    cmp: str
    bound: Fraction
    arg: Formula


COMPARATORS = (">=", "<=", "<", ">", "=")


def active(agent: str) -> Atom:
    """The activity atom A_a."""
    return Atom(f"active({agent})")


def active_agent(atom: Atom) -> str | None:
    if atom.name.startswith("active(") and atom.name.endswith(")"):
        return atom.name[len("active("):-1]
    return None


def is_core(phi: Formula) -> bool:
    if not isinstance(phi, CORE_TYPES):
        return False
    return all(is_core(c) for c in phi.children())


# --------------------------------------------------------------- iteration

def iterate(op, n: int, phi: Formula) -> Formula:
    """op applied n times, op^0 phi = phi."""
    for _ in range(n):
        phi = op(phi)
    return phi


def next_n(n: int, phi: Formula) -> Formula:
    return iterate(Next, n, phi)


def prev_n(n: int, phi: Formula) -> Formula:
    return iterate(WeakPrev, n, phi)


def everyone_n(n: int, phi: Formula) -> Formula:
    return iterate(Everyone, n, phi)


def conj(items: Sequence[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is Top."""
    if not items:
        return Top()
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def bottom_core() -> Formula:
    return And(Atom(BOT_ATOM), Not(Atom(BOT_ATOM)))


def contradiction(phi: Formula) -> Formula:
    """phi & ~phi, the falsum shape used throughout the axioms."""
    return And(phi, Not(phi))


# --------------------------------------------------------------- expansion

def expand(phi: Formula, sig: AgentSignature | None = None) -> Formula:
    """Rewrite every abbreviation into the core operators.

    `sig` is needed only when the formula uses E (everyone knows).
    """
    memo: dict[Formula, Formula] = {}
    return _expand(phi, sig, memo)


def _expand(phi, sig, memo):
    hit = memo.get(phi)
    if hit is not None:
        return hit
    out = _expand_node(phi, sig, memo)
    memo[phi] = out
    return out


def _imp(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def _expand_node(phi, sig, memo):
    ex = lambda f: _expand(f, sig, memo)  # noqa: E731
    if getattr(phi, "is_pattern_leaf", False):
        return phi
    match phi:
        case Atom():
            return phi
        case Not(a):
            return Not(ex(a))
        case And(a, b):
            return And(ex(a), ex(b))
        case Next(a):
            return Next(ex(a))
        case WeakPrev(a):
            return WeakPrev(ex(a))
        case Until(a, b):
            return Until(ex(a), ex(b))
        case Since(a, b):
            return Since(ex(a), ex(b))
        case Know(ag, a):
            return Know(ag, ex(a))
        case Common(a):
            return Common(ex(a))
        case ProbRun(s, a):
            return ProbRun(s, ex(a))
        case ProbAgent(ag, s, a):
            return ProbAgent(ag, s, ex(a))
        case Top():
            return Not(bottom_core())
        case Bottom():
            return bottom_core()
        case Implies(a, b):
            return _imp(ex(a), ex(b))
        case Or(a, b):
            return Not(And(Not(ex(a)), Not(ex(b))))
        case Iff(a, b):
            x, y = ex(a), ex(b)
            return And(_imp(x, y), _imp(y, x))
        case Eventually(a):
            x = ex(a)
            return Until(_imp(x, x), x)
        case Always(a):
            x = ex(a)
            return Not(Until(_imp(Not(x), Not(x)), Not(x)))
        case Once(a):
            x = ex(a)
            return Since(_imp(x, x), x)
        case SoFar(a):
            x = ex(a)
            return Not(Since(_imp(Not(x), Not(x)), Not(x)))
        case Everyone(a):
            if sig is None:
                raise ValueError("expanding E requires an agent signature")
            x = ex(a)
            ks = [Know(ag, x) for ag in sig.agents]
            out = ks[-1]
            for k in reversed(ks[:-1]):
                out = And(k, out)
            return out
        case ProbRunCmp(cmp, s, a):
            return _expand_cmp(cmp, s, ex(a), ProbRun)
        case ProbAgentCmp(ag, cmp, s, a):
            return _expand_cmp(cmp, s, ex(a), lambda b, f: ProbAgent(ag, b, f))
    raise TypeError(f"not a formula: {phi!r}")


def _expand_cmp(cmp, s, x, mk):
    at_least = lambda b, f: mk(b, f)  # noqa: E731
    at_most = lambda b, f: mk(1 - b, Not(f))  # noqa: E731
    if cmp == ">=":
        return at_least(s, x)
    if cmp == "<":
        return Not(at_least(s, x))
    if cmp == "<=":
        return at_most(s, x)
    if cmp == ">":
        return Not(at_most(s, x))
    if cmp == "=":
        return And(at_least(s, x), at_most(s, x))
    raise ValueError(f"unknown comparator {cmp!r}")


# ------------------------------------------------------------ k-nested form

@dataclass(frozen=True)
class NestedContext:
    """Data (B, X) of a k-nested implication.

    `ops` holds k operator tokens, each "X", "Z" or "K[agent]", ordered
    X_1..X_k; `premises` holds beta_0..beta_k.
    """

    premises: tuple[Formula, ...]
    ops: tuple[str, ...]

    def __post_init__(self):
        if len(self.premises) != len(self.ops) + 1:
            raise ValueError("a k-nested context needs k+1 formulas and k operators")
        for op in self.ops:
            op_agent(op)

    @property
    def k(self) -> int:
        return len(self.ops)


def op_agent(op: str) -> str | None:
    if op in ("X", "Z"):
        return None
    if op.startswith("K[") and op.endswith("]") and len(op) > 3:
        return op[2:-1]
    raise ValueError(f"bad nesting operator {op!r}; expected X, Z or K[agent]")


def apply_op(op: str, phi: Formula) -> Formula:
    if op == "X":
        return Next(phi)
    if op == "Z":
        return WeakPrev(phi)
    return Know(op_agent(op), phi)


def build_k_nested(ctx: NestedContext, core: Formula) -> Formula:
    out = Implies(ctx.premises[0], core)
    for beta, op in zip(ctx.premises[1:], ctx.ops):
        out = Implies(beta, apply_op(op, out))
    return out


def _unwrap_op(op: str, phi: Formula) -> Formula | None:
    if op == "X" and isinstance(phi, Next):
        return phi.arg
    if op == "Z" and isinstance(phi, WeakPrev):
        return phi.arg
    if isinstance(phi, Know) and op == f"K[{phi.agent}]":
        return phi.arg
    return None


def _unwrap_implies(beta: Formula, phi: Formula, sig=None) -> Formula | None:
    if isinstance(phi, Implies):
        return phi.right if phi.left == beta else None
    # expanded form ~(beta & ~rest)
    if (isinstance(phi, Not) and isinstance(phi.arg, And)
            and isinstance(phi.arg.right, Not)):
        left = phi.arg.left
        if left == beta or (is_core(left) and left == _expand_any(beta, sig)):
            return phi.arg.right.arg
    return None


def _expand_any(phi: Formula, sig=None) -> Formula | None:
    try:
        return expand(phi, sig)
    except ValueError:
        return None


def match_k_nested(phi: Formula, ctx: NestedContext,
                   sig: "AgentSignature | None" = None) -> Formula | None:
    """Inverse of build_k_nested: the core formula, or None.

    Accepts both the surface form and its expansion (premises using E need
    `sig` to be recognized in expanded form).
    """
    cur = phi
    for i in range(ctx.k, 0, -1):
        body = _unwrap_implies(ctx.premises[i], cur, sig)
        if body is None:
            return None
        cur = _unwrap_op(ctx.ops[i - 1], body)
        if cur is None:
            return None
    return _unwrap_implies(ctx.premises[0], cur, sig)


# ---------------------------------------------------------------- ordinals

@dataclass(frozen=True, order=True)
class OrdinalRank:
    """The ordinal omega*omega_coeff + finite (below omega^2)."""

    omega_coeff: int = 0
    finite: int = 0

    def __add__(self, other: "OrdinalRank") -> "OrdinalRank":
        if other.omega_coeff == 0:
            return OrdinalRank(self.omega_coeff, self.finite + other.finite)
        return OrdinalRank(self.omega_coeff + other.omega_coeff, other.finite)

    def __str__(self):
        if self.omega_coeff == 0:
            return str(self.finite)
        w = "omega" if self.omega_coeff == 1 else f"omega*{self.omega_coeff}"
        return w if self.finite == 0 else f"{w} + {self.finite}"


ONE = OrdinalRank(0, 1)
OMEGA = OrdinalRank(1, 0)


def rank(phi: Formula, _memo: dict | None = None) -> OrdinalRank:
    memo = {} if _memo is None else _memo
    hit = memo.get(phi)
    if hit is not None:
        return hit
    match phi:
        case Atom():
            out = OrdinalRank()
        case Common(a):
            out = OMEGA + rank(a, memo)
        case And(a, b) | Until(a, b) | Since(a, b):
            out = max(rank(a, memo), rank(b, memo)) + ONE
        case Not(a) | Next(a) | WeakPrev(a) | Know(_, a) | ProbRun(_, a) | ProbAgent(_, _, a):
            out = rank(a, memo) + ONE
        case _:
            raise TypeError(f"rank is defined on core formulas only, got {type(phi).__name__}")
    memo[phi] = out
    return out


# ------------------------------------------------------------- subformulas

def subformulas(phi: Formula) -> list[Formula]:
    """Distinct subformulas, each listed after all of its children."""
    seen: set[Formula] = set()
    order: list[Formula] = []

    def visit(f):
        if f in seen:
            return
        for c in f.children():
            visit(c)
        seen.add(f)
        order.append(f)

    visit(phi)
    return order


def node_count(phi: Formula) -> int:
    return 1 + sum(node_count(c) for c in phi.children())


def walk(phi: Formula) -> Iterator[Formula]:
    yield phi
    for c in phi.children():
        yield from walk(c)


def agents_in(phi: Formula) -> set[str]:
    out = set()
    for f in walk(phi):
        ag = getattr(f, "agent", None)
        if ag is not None:
            out.add(ag)
        if isinstance(f, Atom) and active_agent(f) is not None:
            out.add(active_agent(f))
    return out


def atoms_in(phi: Formula) -> set[str]:
    return {f.name for f in walk(phi) if isinstance(f, Atom)}
