"""Ground atom orderings, the trail bound, and bounded grounding enumeration.

Two concrete orderings are provided:

* ``CountKBO`` — Knuth-Bendix style with every symbol weighing one, so the
  weight of an atom is its symbol count; ties break by head precedence and
  then lexicographically on arguments.  Only finitely many ground atoms sit
  below any given atom, which is what the trail bound needs.
* ``GroundLPO`` — lexicographic path ordering on ground atoms.  Safe as a
  bound only over signatures without proper function symbols (otherwise
  infinitely many atoms can sit below a bound literal); this is checked when
  a ``Bound`` is built.

``Bound`` packages a limiting literal beta with its ordering and signature
and enumerates the finite set of atoms strictly below beta.
"""

from __future__ import annotations

import functools
import itertools
from typing import Iterable, Optional, Sequence

from .terms import (
    Atom, Clause, Fn, Literal, Signature, Subst, apply, is_ground, match,
    symbol_count,
)

LESS, EQUAL, GREATER = -1, 0, 1


class OrderingConfigError(ValueError):
    """The requested ordering/bound combination cannot be used."""


class EnumerationCapExceeded(RuntimeError):
    def __init__(self, cap: int, context: str):
        super().__init__(f"enumeration exceeded cap of {cap} ({context})")
        self.cap = cap


class Precedence:
    """A strict total precedence over all signature symbols."""

    def __init__(self, symbols: Sequence[str]):
        if len(set(symbols)) != len(symbols):
            raise OrderingConfigError("precedence lists a symbol twice")
        self.rank = {s: i for i, s in enumerate(symbols)}

    def __contains__(self, sym: str) -> bool:
        return sym in self.rank

    def compare(self, a: str, b: str) -> int:
        try:
            ra, rb = self.rank[a], self.rank[b]
        except KeyError as exc:
            raise OrderingConfigError(f"symbol {exc.args[0]} not in precedence")
        return (ra > rb) - (ra < rb)

    @staticmethod
    def default_for(signature: Signature) -> "Precedence":
        # functions below predicates, each group by (arity, name)
        funcs = sorted(signature.functions, key=lambda na: (na[1], na[0]))
        preds = sorted(signature.predicates, key=lambda na: (na[1], na[0]))
        return Precedence([n for n, _ in funcs] + [n for n, _ in preds])


def _head(x) -> str:
    return x.pred if isinstance(x, Atom) else x.name


class CountKBO:
    """Symbol-count KBO: weight first, then precedence, then args."""

    kind = "kbo"

    def __init__(self, precedence: Precedence):
        self.precedence = precedence

    def compare_terms(self, s, t) -> int:
        ws, wt = symbol_count(s), symbol_count(t)
        if ws != wt:
            return LESS if ws < wt else GREATER
        c = self.precedence.compare(_head(s), _head(t))
        if c != 0:
            return c
        for sa, ta in zip(s.args, t.args):
            c = self.compare_terms(sa, ta)
            if c != 0:
                return c
        return EQUAL

    def compare_atoms(self, a: Atom, b: Atom) -> int:
        return self.compare_terms(a, b)


class GroundLPO:
    """Lexicographic path ordering on ground atoms and terms."""

    kind = "lpo"

    def __init__(self, precedence: Precedence):
        self.precedence = precedence

    def _greater(self, s, t) -> bool:
        # s > t in LPO; atoms and terms treated uniformly by head symbol
        if s == t:
            return False
        if any(sa == t or self._greater(sa, t) for sa in s.args):
            return True
        c = self.precedence.compare(_head(s), _head(t))
        if c > 0:
            return all(self._greater(s, tb) for tb in t.args)
        if c == 0:
            for i, (sa, ta) in enumerate(zip(s.args, t.args)):
                if sa == ta:
                    continue
                # s > t_j for j < i holds via the subterm property, and
                # s > t_i follows from s > s_i > t_i
                return (self._greater(sa, ta)
                        and all(self._greater(s, tb) for tb in t.args[i + 1:]))
        return False

    def compare_terms(self, s, t) -> int:
        if s == t:
            return EQUAL
        return GREATER if self._greater(s, t) else LESS

    def compare_atoms(self, a: Atom, b: Atom) -> int:
        return self.compare_terms(a, b)


def make_ordering(kind: str, precedence: Precedence):
    if kind == "kbo":
        return CountKBO(precedence)
    if kind == "lpo":
        return GroundLPO(precedence)
    raise OrderingConfigError(f"unknown ordering kind {kind!r}")


# ---------------------------------------------------------------------------
# Ground term/atom enumeration by symbol count
# ---------------------------------------------------------------------------

def ground_terms_of_weight(signature: Signature, weight: int,
                           _memo=None) -> list[Fn]:
    """All ground terms with exactly ``weight`` symbols."""
    if _memo is None:
        _memo = {}
    if weight in _memo:
        return _memo[weight]
    out: list[Fn] = []
    if weight >= 1:
        for name, arity in signature.functions:
            if arity == 0:
                if weight == 1:
                    out.append(Fn(name))
                continue
            for parts in _compositions(weight - 1, arity):
                pools = [ground_terms_of_weight(signature, w, _memo)
                         for w in parts]
                for args in itertools.product(*pools):
                    out.append(Fn(name, args))
    _memo[weight] = out
    return out


def ground_atoms_of_weight(signature: Signature, weight: int,
                           _memo=None) -> list[Atom]:
    if _memo is None:
        _memo = {}
    out: list[Atom] = []
    for name, arity in signature.predicates:
        if arity == 0:
            if weight == 1:
                out.append(Atom(name))
            continue
        if weight < 1 + arity:
            continue
        for parts in _compositions(weight - 1, arity):
            pools = [ground_terms_of_weight(signature, w, _memo) for w in parts]
            for args in itertools.product(*pools):
                out.append(Atom(name, args))
    return out


def _compositions(total: int, k: int):
    """All k-tuples of integers >= 1 summing to total."""
    if k == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - k + 2):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# The bound
# ---------------------------------------------------------------------------

DEFAULT_ENUMERATION_CAP = 10 ** 6


class Bound:
    """A ground limiting literal beta interpreted under an atom ordering.

    ``atoms_below()`` is the complete finite set of ground atoms strictly
    below beta, enumerated in ascending order.  Construction validates that
    the enumeration stays within ``cap``.
    """

    def __init__(self, beta: Literal, ordering, signature: Signature,
                 cap: int = DEFAULT_ENUMERATION_CAP, validate: bool = True):
        if not is_ground(beta):
            raise OrderingConfigError(f"bound literal {beta} is not ground")
        self.beta = beta
        self.ordering = ordering
        self.signature = signature
        self.cap = cap
        self._atoms_below: Optional[tuple[Atom, ...]] = None
        self._groundings: dict[Clause, tuple[Subst, ...]] = {}
        if validate:
            self.atoms_below()

    def atoms_below(self) -> tuple[Atom, ...]:
        if self._atoms_below is None:
            atoms = self._enumerate_below()
            key = functools.cmp_to_key(self.ordering.compare_atoms)
            self._atoms_below = tuple(sorted(atoms, key=key))
        return self._atoms_below

    def _enumerate_below(self) -> list[Atom]:
        beta_atom = self.beta.atom
        found: list[Atom] = []
        if isinstance(self.ordering, CountKBO):
            memo: dict = {}
            limit = symbol_count(beta_atom)
            for w in range(1, limit + 1):
                for atom in ground_atoms_of_weight(self.signature, w, memo):
                    if self.ordering.compare_atoms(atom, beta_atom) < 0:
                        found.append(atom)
                        if len(found) > self.cap:
                            raise EnumerationCapExceeded(
                                self.cap, f"atoms below {self.beta}")
            return found
        if isinstance(self.ordering, GroundLPO):
            if self.signature.has_proper_functions:
                raise OrderingConfigError(
                    "LPO bound over a signature with non-constant function "
                    "symbols can have infinitely many atoms below the bound; "
                    "use the count-KBO ordering instead")
            for name, arity in self.signature.predicates:
                consts = [Fn(c) for c in self.signature.constants]
                if arity > 0 and not consts:
                    continue
                for args in itertools.product(consts, repeat=arity):
                    atom = Atom(name, tuple(args))
                    if self.ordering.compare_atoms(atom, beta_atom) < 0:
                        found.append(atom)
                        if len(found) > self.cap:
                            raise EnumerationCapExceeded(
                                self.cap, f"atoms below {self.beta}")
            return found
        raise OrderingConfigError(
            f"unsupported ordering {type(self.ordering).__name__}")

    def atom_below(self, atom: Atom) -> bool:
        return self.ordering.compare_atoms(atom, self.beta.atom) < 0

    def literal_below(self, lit: Literal) -> bool:
        """Literals compare by their atoms."""
        return self.atom_below(lit.atom)

    def clause_below(self, clause: Clause) -> bool:
        """Multiset comparison of a ground clause against {beta}.

        Against a singleton this reduces to: every literal strictly below
        beta.  The empty clause is below every bound.
        """
        return all(self.literal_below(lit) for lit in clause)

    def grow_to(self, beta2: Literal) -> "Bound":
        return Bound(beta2, self.ordering, self.signature, self.cap)


# ---------------------------------------------------------------------------
# Bounded grounding enumeration
# ---------------------------------------------------------------------------

def literal_groundings(lit: Literal, bound: Bound,
                       partial: Optional[Subst] = None) -> list[Subst]:
    """Substitutions extending ``partial`` that take ``lit`` below the bound."""
    out = []
    for atom in bound.atoms_below():
        if atom.pred != lit.atom.pred:
            continue
        m = match(lit.atom, atom, partial)
        if m is not None:
            out.append(m)
    return out


def bounded_groundings(clause: Clause, bound: Bound) -> tuple[Subst, ...]:
    """All grounding substitutions producing only literals below the bound.

    Deterministic order: atoms below beta ascending, literals left to right.
    Cached on the bound, which never changes once built.
    """
    cached = bound._groundings.get(clause)
    if cached is not None:
        return cached
    results: list[Subst] = []

    def extend(i: int, sigma: Optional[Subst]):
        if len(results) > bound.cap:
            raise EnumerationCapExceeded(bound.cap,
                                         f"groundings of {clause}")
        if i == len(clause.literals):
            results.append(sigma if sigma is not None else Subst())
            return
        for ext in literal_groundings(clause[i], bound, sigma):
            extend(i + 1, ext)

    extend(0, None)
    bound._groundings[clause] = tuple(results)
    return bound._groundings[clause]


def bounded_instances(clause: Clause, bound: Bound) -> list[Clause]:
    """The set Gnd restricted below the bound, as ground clauses."""
    return [apply(sigma, clause) for sigma in bounded_groundings(clause, bound)]


def bounded_instances_of_set(clauses: Iterable[Clause],
                             bound: Bound) -> list[Clause]:
    seen = set()
    out: list[Clause] = []
    for c in clauses:
        for inst in bounded_instances(c, bound):
            key = tuple(sorted((str(lit) for lit in inst)))
            if key not in seen:
                seen.add(key)
                out.append(inst)
    return out


# ---------------------------------------------------------------------------
# Trail-induced ordering
# ---------------------------------------------------------------------------

class TrailOrder:
    """Snapshot ordering induced by a trail L1, ..., Ln.

    L1 < comp(L1) < L2 < ... < Ln < comp(Ln) < all undefined literals.
    Undefined literals are ordered among themselves by the atom ordering and
    then by polarity (negative first) so the order is total.
    """

    def __init__(self, literals: Sequence[Literal], ordering):
        self.literals = tuple(literals)
        self.ordering = ordering
        self._rank: dict[Literal, int] = {}
        for i, lit in enumerate(self.literals):
            self._rank[lit] = 2 * i
            self._rank[lit.complement()] = 2 * i + 1

    def defined(self, lit: Literal) -> bool:
        return lit in self._rank

    def compare(self, x: Literal, y: Literal) -> int:
        rx, ry = self._rank.get(x), self._rank.get(y)
        if rx is not None and ry is not None:
            return (rx > ry) - (rx < ry)
        if rx is not None:
            return LESS
        if ry is not None:
            return GREATER
        if x == y:
            return EQUAL
        c = self.ordering.compare_atoms(x.atom, y.atom)
        if c != 0:
            return c
        return (x.positive > y.positive) - (x.positive < y.positive)

    def compare_clauses(self, c: Clause, d: Clause) -> int:
        """Dershowitz-Manna multiset extension of the literal order.

        For a total element order this equals comparing the descending-sorted
        literal sequences lexicographically, shorter prefix first.
        """
        key = functools.cmp_to_key(self.compare)
        xs = sorted(c.literals, key=key, reverse=True)
        ys = sorted(d.literals, key=key, reverse=True)
        for x, y in zip(xs, ys):
            cc = self.compare(x, y)
            if cc != 0:
                return cc
        return (len(xs) > len(ys)) - (len(xs) < len(ys))
