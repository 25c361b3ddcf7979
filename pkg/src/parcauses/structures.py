"""Core data model: event structures in four flavours, configurations,
maps and families of configurations, with axiom validators.

All values are immutable after construction and safe to share; every
operation here is a pure function of its inputs.  Enumerations are emitted
in canonical (size, then lexicographic) order so outputs are reproducible
byte for byte.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .errors import BudgetError, FormatError, UsageError

KINDS = ("prime", "general", "ese", "edc")
ORDERED_KINDS = ("prime", "ese", "edc")  # kinds carrying a causal order

#: Default cap on candidate subsets examined by a single enumeration call.
DEFAULT_BUDGET = 2 ** 20


def config_key(x: frozenset) -> tuple:
    """Canonical sort key for a finite set of event names."""
    return (len(x), tuple(sorted(x)))


def sorted_configs(xs: Iterable[frozenset]) -> list[frozenset]:
    return sorted(xs, key=config_key)


def _transitive_closure(events: tuple[str, ...],
                        pairs: frozenset[tuple[str, str]]) -> dict[str, frozenset]:
    """Reflexive-transitive closure as a map event -> down-set (including self).

    Returns None-free dict even for cyclic input; cycle detection is the
    validator's job.
    """
    preds: dict[str, set[str]] = {e: {e} for e in events}
    changed = True
    while changed:
        changed = False
        for (a, b) in pairs:
            if not preds[a] <= preds[b]:
                preds[b] |= preds[a]
                changed = True
    return {e: frozenset(s) for e, s in preds.items()}


def transitive_reduction(events: Iterable[str],
                         down: Mapping[str, frozenset]) -> frozenset[tuple[str, str]]:
    """Immediate-dependency pairs of the partial order given by down-sets."""
    events = list(events)
    pairs = set()
    for b in events:
        strict = down[b] - {b}
        for a in strict:
            if not any(a in (down[c] - {c}) for c in strict):
                pairs.add((a, b))
    return frozenset(pairs)


@dataclass(frozen=True)
class Structure:
    """A finite event structure record covering all four flavours.

    kind        one of prime | general | ese | edc
    events      canonically ordered event names
    causality   immediate causal pairs (prime/ese/edc); the full order is
                the reflexive-transitive closure
    enablings   generating (set, event) pairs (general); the enabling
                relation is their monotone closure over consistent sets
    conflicts   minimal inconsistent subsets, or None when `consistent`
                carries the explicit representation
    consistent  the full set of consistent finite subsets, or None
    classes     equivalence partition (identity for prime/general)
    polarity    optional total event -> '+'/'-' table
    """

    kind: str
    events: tuple[str, ...]
    causality: frozenset = frozenset()
    enablings: frozenset = frozenset()
    conflicts: Optional[frozenset] = frozenset()
    consistent: Optional[frozenset] = None
    classes: frozenset = frozenset()
    polarity: Optional[tuple] = None
    _down: Mapping[str, frozenset] = field(default=None, compare=False, repr=False)
    _pol: Mapping[str, str] = field(default=None, compare=False, repr=False)
    _cls: Mapping[str, frozenset] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_down",
                           _transitive_closure(self.events, self.causality)
                           if self.kind in ORDERED_KINDS else {})
        object.__setattr__(self, "_pol", dict(self.polarity) if self.polarity else None)
        cls = {}
        for c in self.classes:
            for e in c:
                cls[e] = c
        object.__setattr__(self, "_cls", cls)

    # -- derived views ------------------------------------------------

    def down(self, e: str) -> frozenset:
        """Down-closure [e] of a single event, including e."""
        return self._down[e]

    def down_set(self, xs: Iterable[str]) -> frozenset:
        out = frozenset()
        for e in xs:
            out |= self._down[e]
        return out

    def leq(self, a: str, b: str) -> bool:
        return a in self._down[b]

    def pol(self, e: str) -> Optional[str]:
        return self._pol[e] if self._pol else None

    def cls(self, e: str) -> frozenset:
        return self._cls[e]

    def equiv(self, a: str, b: str) -> bool:
        return b in self._cls[a]

    def has_identity_equivalence(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    def is_consistent(self, xs: Iterable[str]) -> bool:
        x = frozenset(xs)
        if self.consistent is not None:
            return x in self.consistent
        return not any(c <= x for c in self.conflicts)

    def enables(self, xs: Iterable[str], e: str) -> bool:
        """Derived enabling X |- e (general kind): monotone closure of the
        stored generators over consistent sets."""
        x = frozenset(xs)
        if not self.is_consistent(x):
            return False
        return any(ev == e and y <= x for (y, ev) in self.enablings)

    def consistent_sets(self, budget: int = DEFAULT_BUDGET) -> list[frozenset]:
        """All consistent finite subsets, canonically ordered."""
        if self.consistent is not None:
            return sorted_configs(self.consistent)
        n = len(self.events)
        if 2 ** n > budget:
            raise BudgetError(f"2^{n} candidate subsets exceed budget {budget}")
        out = []
        for r in range(n + 1):
            for combo in itertools.combinations(self.events, r):
                x = frozenset(combo)
                if self.is_consistent(x):
                    out.append(x)
        return sorted_configs(out)

    def unambiguous(self, xs: Iterable[str]) -> bool:
        xs = list(xs)
        for a, b in itertools.combinations(xs, 2):
            if a != b and self.equiv(a, b):
                return False
        return True


def identity_partition(events: Iterable[str]) -> frozenset:
    return frozenset(frozenset([e]) for e in events)


def make_structure(kind: str,
                   events: Iterable[str],
                   causality: Iterable[tuple[str, str]] = (),
                   enablings: Iterable[tuple[Iterable[str], str]] = (),
                   conflicts: Optional[Iterable[Iterable[str]]] = (),
                   consistent: Optional[Iterable[Iterable[str]]] = None,
                   classes: Optional[Iterable[Iterable[str]]] = None,
                   polarity: Optional[Mapping[str, str]] = None) -> Structure:
    """Normalise and syntactically check a structure; raises FormatError on
    unresolved ids, duplicates or malformed parts (distinct from axiom
    violations, which validate() reports as data)."""
    ev = list(events)
    if len(set(ev)) != len(ev):
        raise FormatError("duplicate event names")
    evset = set(ev)
    if kind not in KINDS:
        raise FormatError(f"unknown kind {kind!r}")

    def check_ids(names, where):
        for n in names:
            if n not in evset:
                raise FormatError(f"unresolved event id {n!r} in {where}")

    caus = frozenset((a, b) for (a, b) in causality)
    check_ids([a for a, _ in caus] + [b for _, b in caus], "causality")
    if kind == "general" and caus:
        raise FormatError("general structures carry enablings, not causality")
    ena = frozenset((frozenset(y), e) for (y, e) in enablings)
    check_ids([e for _, e in ena], "enablings")
    for y, _ in ena:
        check_ids(y, "enablings")
    if kind != "general" and ena:
        raise FormatError("only general structures carry enablings")

    if (conflicts is None) == (consistent is None):
        raise FormatError("exactly one of conflicts/consistent must be given")
    confl = None if conflicts is None else frozenset(frozenset(c) for c in conflicts)
    if confl is not None:
        for c in confl:
            check_ids(c, "conflicts")
    cons = None if consistent is None else frozenset(frozenset(c) for c in consistent)
    if cons is not None:
        for c in cons:
            check_ids(c, "consistent")

    if classes is None:
        part = identity_partition(ev)
    else:
        part = frozenset(frozenset(c) for c in classes)
        seen: set[str] = set()
        for c in part:
            check_ids(c, "classes")
            if seen & set(c):
                raise FormatError("equivalence classes overlap")
            seen |= set(c)
        part |= frozenset(frozenset([e]) for e in ev if e not in seen)

    pol = None
    if polarity is not None:
        check_ids(polarity.keys(), "polarity")
        if set(polarity) != evset:
            raise FormatError("polarity must be total when present")
        if not set(polarity.values()) <= {"+", "-"}:
            raise FormatError("polarity values must be '+' or '-'")
        pol = tuple(sorted(polarity.items()))

    return Structure(kind=kind, events=tuple(sorted(ev)), causality=caus,
                     enablings=ena, conflicts=confl, consistent=cons,
                     classes=part, polarity=pol)


# ---------------------------------------------------------------------------
# Validation reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple
    info: tuple = ()

    def info_dict(self) -> dict:
        return dict(self.info)

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [dict(v) for v in self.violations],
            "info": {k: v for k, v in self.info},
        }


def make_report(violations: list[dict], info: Optional[dict] = None) -> ValidationReport:
    canon = tuple(tuple(sorted(v.items())) for v in violations)
    return ValidationReport(valid=not violations,
                            violations=canon,
                            info=tuple(sorted((info or {}).items())))


def _viol(axiom: str, **witness) -> dict:
    d = {"axiom": axiom}
    for k, v in witness.items():
        if isinstance(v, frozenset):
            v = tuple(sorted(v))
        d[k] = v
    return d


def _find_cycle(s: Structure) -> Optional[tuple]:
    for a in s.events:
        for b in s.events:
            if a != b and s.leq(a, b) and s.leq(b, a):
                return (a, b)
    return None


def validate(s: Structure, budget: int = DEFAULT_BUDGET) -> ValidationReport:
    """Check the axioms of s's kind; the report lists one entry per violated
    axiom with a concrete witness.  For kind general adds a `replete` flag."""
    violations: list[dict] = []
    info: dict = {}

    if s.kind in ORDERED_KINDS:
        cyc = _find_cycle(s)
        if cyc is not None:
            violations.append(_viol("causality-partial-order", events=cyc))
            return make_report(violations, info)

    if s.kind in ("prime", "general") and not s.has_identity_equivalence():
        big = sorted(c for c in s.classes if len(c) > 1)[0]
        violations.append(_viol("equivalence-identity-required", witness=big))

    if s.conflicts is not None:
        if frozenset() in s.conflicts:
            violations.append(_viol("empty-set-inconsistent", witness=()))
    else:
        if frozenset() not in s.consistent:
            violations.append(_viol("empty-set-inconsistent", witness=()))
        for x in sorted_configs(s.consistent):
            for e in sorted(x):
                if x - {e} not in s.consistent:
                    violations.append(_viol("consistency-subset-closed",
                                            witness=x, missing=x - {e}))
                    break

    if s.kind in ORDERED_KINDS:
        for e in s.events:
            if not s.is_consistent({e}):
                violations.append(_viol("singleton-consistent", event=e))
        violations.extend(_downclosure_violations(s, budget))

    if s.kind == "edc":
        for p in s.events:
            strict = sorted(s.down(p))
            for a, b in itertools.combinations(strict, 2):
                if a != b and s.equiv(a, b):
                    violations.append(_viol("edc-no-two-equivalent-causes",
                                            witness=(a, b, p)))
                    break
            else:
                continue
            break

    if s.polarity is not None:
        for c in s.classes:
            pols = {s.pol(e) for e in c}
            if len(pols) > 1:
                violations.append(_viol("equivalence-respects-polarity",
                                        witness=c))

    if s.kind == "general":
        for (y, e) in sorted(s.enablings, key=lambda p: (p[1], config_key(p[0]))):
            if not s.is_consistent(y):
                violations.append(_viol("enabling-set-consistent", event=e, witness=y))
        info["replete"] = _is_replete(s, budget) if not violations else False

    return make_report(violations, info)


def _downclosure_violations(s: Structure, budget: int) -> list[dict]:
    """Violations of: X in Con and e <= e' in X implies X u {e} in Con."""
    out = []
    if s.conflicts is not None:
        for c in sorted(s.conflicts, key=config_key):
            for e in sorted(c):
                above = [e2 for e2 in s.events if e2 != e and s.leq(e, e2)]
                for e2 in sorted(above):
                    x = (c - {e}) | {e2}
                    if s.is_consistent(x):
                        out.append(_viol("consistency-down-closed",
                                         witness=x, event=e, above=e2))
                        return out
    else:
        for x in sorted_configs(s.consistent):
            for e2 in sorted(x):
                for e in sorted(s.down(e2)):
                    if not s.is_consistent(x | {e}):
                        out.append(_viol("consistency-down-closed",
                                         witness=x, event=e, above=e2))
                        return out
    return out


def _is_replete(s: Structure, budget: int) -> bool:
    cons = s.consistent_sets(budget)
    cfgs = set(configs(s, len(s.events), budget))
    for e in s.events:
        if not any(ev == e and s.is_consistent(y) for (y, ev) in s.enablings):
            return False
    for x in cons:
        if not any(x <= c for c in cfgs):
            return False
    for (y, e) in s.enablings:
        if not s.is_consistent(y):
            continue
        if not any(e in c and c <= y | {e} for c in cfgs):
            return False
    return True


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------

def configs(s: Structure, max_size: Optional[int] = None,
            budget: int = DEFAULT_BUDGET) -> list[frozenset]:
    """The configurations of size <= max_size in canonical order.

    prime/ese/edc: consistent down-closed sets, grown one enabled event at a
    time.  general: consistent secured sets, grown by breadth-first
    saturation (sound because enabling is monotone).
    """
    if max_size is None:
        max_size = len(s.events)
    seen: set[frozenset] = {frozenset()}
    frontier = [frozenset()]
    steps = 0
    while frontier:
        nxt = []
        for x in frontier:
            if len(x) == max_size:
                continue
            for e in s.events:
                if e in x:
                    continue
                steps += 1
                if steps > budget:
                    raise BudgetError("configuration enumeration exceeded budget")
                if s.kind in ORDERED_KINDS:
                    ok = s.down(e) - {e} <= x and s.is_consistent(x | {e})
                else:
                    ok = s.is_consistent(x | {e}) and s.enables(x, e)
                if ok:
                    y = x | {e}
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
        frontier = nxt
    return sorted_configs(seen)


def configs_bruteforce(s: Structure, max_size: Optional[int] = None,
                       budget: int = DEFAULT_BUDGET) -> list[frozenset]:
    """Independent oracle: filter every subset by the definition."""
    if max_size is None:
        max_size = len(s.events)
    n = len(s.events)
    if 2 ** n > budget:
        raise BudgetError("oracle enumeration exceeded budget")
    out = []
    for r in range(min(n, max_size) + 1):
        for combo in itertools.combinations(s.events, r):
            x = frozenset(combo)
            if not all(s.is_consistent(sub)
                       for k in range(len(x) + 1)
                       for sub in map(frozenset, itertools.combinations(sorted(x), k))):
                continue
            if s.kind in ORDERED_KINDS:
                if all(s.down(e) <= x for e in x):
                    out.append(x)
            else:
                if _secured(s, x):
                    out.append(x)
    return sorted_configs(out)


def _secured(s: Structure, x: frozenset) -> bool:
    t: frozenset = frozenset()
    while True:
        add = {e for e in x - t if s.enables(t, e)}
        if not add:
            return t == x
        t |= add


def is_config(s: Structure, xs: Iterable[str]) -> bool:
    x = frozenset(xs)
    if not all(e in s.events for e in x):
        return False
    if not s.is_consistent(x):
        return False
    if s.kind in ORDERED_KINDS:
        return all(s.down(e) <= x for e in x)
    return _secured(s, x)


def enabled_events(s: Structure, x: frozenset) -> list[str]:
    """Events e with x --< e, canonically ordered."""
    out = []
    for e in s.events:
        if e not in x and is_config(s, x | {e}):
            out.append(e)
    return out


# ---------------------------------------------------------------------------
# Families of configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    """An explicit finite set of finite configurations over a carrier, with
    an equivalence partition (an equivalence family when nontrivial)."""

    carrier: tuple[str, ...]
    configs: frozenset
    classes: frozenset
    _cls: Mapping[str, frozenset] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        cls = {}
        for c in self.classes:
            for e in c:
                cls[e] = c
        object.__setattr__(self, "_cls", cls)

    def cls(self, e: str) -> frozenset:
        return self._cls[e]

    def equiv(self, a: str, b: str) -> bool:
        return b in self._cls[a]

    def has_identity_equivalence(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    def unambiguous(self, x: Iterable[str]) -> bool:
        xs = list(x)
        for a, b in itertools.combinations(xs, 2):
            if a != b and self.equiv(a, b):
                return False
        return True

    def sorted_configs(self) -> list[frozenset]:
        return sorted_configs(self.configs)


def make_family(carrier: Iterable[str], cfgs: Iterable[Iterable[str]],
                classes: Optional[Iterable[Iterable[str]]] = None) -> Family:
    car = tuple(sorted(set(carrier)))
    fs = frozenset(frozenset(c) for c in cfgs)
    for c in fs:
        for e in c:
            if e not in car:
                raise FormatError(f"configuration event {e!r} outside carrier")
    if classes is None:
        part = identity_partition(car)
    else:
        part = frozenset(frozenset(c) for c in classes)
        seen: set[str] = set()
        for c in part:
            for e in c:
                if e not in car:
                    raise FormatError(f"class event {e!r} outside carrier")
            if seen & set(c):
                raise FormatError("equivalence classes overlap")
            seen |= set(c)
        part |= frozenset(frozenset([e]) for e in car if e not in seen)
    return Family(carrier=car, configs=fs, classes=part)


def family_of(s: Structure, budget: int = DEFAULT_BUDGET) -> Family:
    """Forgetful image: all configurations, carrying s's equivalence."""
    cfgs = configs(s, None, budget)
    return Family(carrier=s.events, configs=frozenset(cfgs), classes=s.classes)


def _family_reachable(f: Family, x: frozenset) -> set[frozenset]:
    """F-members below x reachable from {} by single-event F-steps."""
    reach = {frozenset()} if frozenset() in f.configs else set()
    frontier = list(reach)
    while frontier:
        y = frontier.pop()
        for e in sorted(x - y):
            z = y | {e}
            if z <= x and z in f.configs and z not in reach:
                reach.add(z)
                frontier.append(z)
    return reach


def validate_family(f: Family, budget: int = DEFAULT_BUDGET) -> ValidationReport:
    """Family axioms (union-closure, securing chains) with witnesses, plus
    stability info: plain stability and stability as an equivalence family.

    The axioms are checked in their finite form only; the artifact is
    restricted to finite families throughout.
    """
    violations: list[dict] = []
    cfgs = f.sorted_configs()
    if frozenset() not in f.configs:
        violations.append(_viol("empty-configuration-present", witness=()))

    # union-closure: pairwise suffices for finite families.  One witness per
    # missing union; prefer the pair with the largest intersection (the
    # cover-shaped witness), tie-broken canonically.
    missing: dict[frozenset, tuple] = {}
    for i, y in enumerate(cfgs):
        for z in cfgs[i + 1:]:
            u = y | z
            if u in f.configs:
                continue
            bounds = [w for w in cfgs if u <= w]
            if not bounds:
                continue
            cand = (-len(y & z), config_key(y), config_key(z), y, z, bounds[0])
            if u not in missing or cand < missing[u]:
                missing[u] = cand
    for u in sorted(missing, key=config_key):
        _, _, _, y, z, bound = missing[u]
        violations.append(_viol("union-closure", x=y & z, y=y, z=z,
                                union=u, bound=bound))

    for x in cfgs:
        reach = _family_reachable(f, x)
        covered = frozenset().union(*reach) if reach else frozenset()
        for e in sorted(x - covered):
            violations.append(_viol("securing-chain", event=e, witness=x))
            break

    info = {
        "finite-restriction": True,
        "stable": _is_stable(f),
        "stable-ef": _is_stable_ef(f),
    }
    return make_report(violations, info)


def _is_stable(f: Family) -> bool:
    cfgs = f.sorted_configs()
    for i, x in enumerate(cfgs):
        for y in cfgs[i + 1:]:
            if any(x | y <= z for z in cfgs) and (x & y) not in f.configs:
                return False
    return True


def _is_stable_ef(f: Family) -> bool:
    cfgs = f.sorted_configs()
    unamb = [z for z in cfgs if f.unambiguous(z)]
    for z in unamb:
        below = [x for x in cfgs if x <= z]
        for i, x in enumerate(below):
            for y in below[i + 1:]:
                if (x & y) not in f.configs:
                    return False
    for x in cfgs:
        for a in sorted(x):
            if not any(a in z and z <= x for z in unamb):
                return False
    return True


def stability_failure(f: Family) -> Optional[str]:
    """Name of the violated equivalence-family stability clause, if any."""
    cfgs = f.sorted_configs()
    unamb = [z for z in cfgs if f.unambiguous(z)]
    for z in unamb:
        below = [x for x in cfgs if x <= z]
        for i, x in enumerate(below):
            for y in below[i + 1:]:
                if (x & y) not in f.configs:
                    return "intersection-below-unambiguous"
    for x in cfgs:
        for a in sorted(x):
            if not any(a in z and z <= x for z in unamb):
                return "no-unambiguous-cover"
    return None


def irreducibles(f: Family) -> list[frozenset]:
    """Members x with a (necessarily unique) e such that every member y with
    e in y <= x equals x."""
    out = []
    for x in f.sorted_configs():
        if not x:
            continue
        for e in sorted(x):
            if all(y == x for y in f.configs if e in y and y <= x):
                out.append(x)
                break
    return sorted_configs(out)


def irreducibles_bruteforce(f: Family) -> list[frozenset]:
    """Oracle via the complete-join-irreducible characterisation: x is
    irreducible iff it is not the union of the members strictly below it."""
    out = []
    for x in f.sorted_configs():
        if not x:
            continue
        below = [y for y in f.configs if y < x]
        u = frozenset().union(*below) if below else frozenset()
        if u != x:
            out.append(x)
    return sorted_configs(out)


def canonical_ges(f: Family, budget: int = DEFAULT_BUDGET) -> Structure:
    """The replete general event structure of a plain family: Con is the
    subsets of members, and X |- a iff a lies in some member y <= X u {a}."""
    if not f.has_identity_equivalence():
        raise UsageError("canonical_ges requires a trivial equivalence; use pr instead")
    cons: set[frozenset] = set()
    for y in f.configs:
        if 2 ** len(y) > budget:
            raise BudgetError("consistency materialisation exceeded budget")
        for k in range(len(y) + 1):
            for sub in itertools.combinations(sorted(y), k):
                cons.add(frozenset(sub))
    ena = set()
    for y in f.configs:
        for a in y:
            ena.add((y - {a}, a))
    return Structure(kind="general", events=tuple(sorted(f.carrier)),
                     causality=frozenset(), enablings=frozenset(ena),
                     conflicts=None, consistent=frozenset(cons),
                     classes=identity_partition(f.carrier), polarity=None)


def minimal_conflicts(events: Iterable[str], is_consistent, budget: int = DEFAULT_BUDGET
                      ) -> frozenset:
    """Minimal inconsistent subsets of a subset-closed consistency predicate."""
    events = sorted(events)
    if 2 ** len(events) > budget:
        raise BudgetError("conflict materialisation exceeded budget")
    inconsistent = []
    for r in range(len(events) + 1):
        for combo in itertools.combinations(events, r):
            x = frozenset(combo)
            if not is_consistent(x):
                inconsistent.append(x)
    minimal = [c for c in inconsistent
               if not any(d < c for d in inconsistent)]
    return frozenset(minimal)


def explicit_consistent(events: Iterable[str], is_consistent,
                        budget: int = DEFAULT_BUDGET) -> frozenset:
    events = sorted(events)
    if 2 ** len(events) > budget:
        raise BudgetError("consistency materialisation exceeded budget")
    out = set()
    for r in range(len(events) + 1):
        for combo in itertools.combinations(events, r):
            x = frozenset(combo)
            if is_consistent(x):
                out.add(x)
    return frozenset(out)


def to_conflicts(s: Structure, budget: int = DEFAULT_BUDGET) -> Structure:
    """Same structure with consistency re-expressed as minimal conflicts."""
    if s.conflicts is not None:
        return s
    confl = minimal_conflicts(s.events, s.is_consistent, budget)
    return Structure(kind=s.kind, events=s.events, causality=s.causality,
                     enablings=s.enablings, conflicts=confl, consistent=None,
                     classes=s.classes, polarity=s.polarity)


def to_explicit(s: Structure, budget: int = DEFAULT_BUDGET) -> Structure:
    """Same structure with the full consistent-set table materialised."""
    if s.consistent is not None:
        return s
    cons = explicit_consistent(s.events, s.is_consistent, budget)
    return Structure(kind=s.kind, events=s.events, causality=s.causality,
                     enablings=s.enablings, conflicts=None, consistent=cons,
                     classes=s.classes, polarity=s.polarity)


def restrict_events(s: Structure, keep: Iterable[str]) -> Structure:
    """Full substructure on a subset of events (order, consistency and
    equivalence all restricted).  No equivalence-closure requirement here;
    the hiding operation adds that check on top."""
    v = frozenset(keep)
    for e in v:
        if e not in s.events:
            raise FormatError(f"unknown event {e!r} in restriction")
    caus = frozenset((a, b) for (a, b) in s.causality if a in v and b in v)
    if s.kind in ORDERED_KINDS:
        down = {e: s.down(e) & v for e in v}
        caus = transitive_reduction(v, down)
    ena = frozenset((y, e) for (y, e) in s.enablings if e in v and y <= v)
    confl = None if s.conflicts is None else frozenset(c for c in s.conflicts if c <= v)
    cons = None if s.consistent is None else frozenset(c for c in s.consistent if c <= v)
    cls = frozenset(frozenset(c & v) for c in s.classes if c & v)
    pol = None if s.polarity is None else tuple((e, p) for (e, p) in s.polarity if e in v)
    return Structure(kind=s.kind, events=tuple(sorted(v)), causality=caus,
                     enablings=ena, conflicts=confl, consistent=cons,
                     classes=cls, polarity=pol)


def prime_as_general(s: Structure) -> Structure:
    """View a prime event structure as a (replete) general one:
    X |- p iff X in Con and [p] <= X u {p}."""
    if s.kind != "prime":
        raise UsageError("prime_as_general expects kind prime")
    ena = frozenset((s.down(p) - {p}, p) for p in s.events)
    return Structure(kind="general", events=s.events, causality=frozenset(),
                     enablings=ena, conflicts=s.conflicts, consistent=s.consistent,
                     classes=s.classes, polarity=s.polarity)


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructMap:
    """A partial, label-respecting function between structures.  Events
    absent from `mapping` (or mapped to None) are undefined."""

    source: Structure
    target: Structure
    mapping: tuple

    def __call__(self, e: str) -> Optional[str]:
        return dict(self.mapping).get(e)

    @property
    def as_dict(self) -> dict:
        return {k: v for k, v in self.mapping if v is not None}

    def defined(self, e: str) -> bool:
        return self.as_dict.get(e) is not None

    def image(self, xs: Iterable[str]) -> frozenset:
        d = self.as_dict
        return frozenset(d[e] for e in xs if e in d)

    def domain(self) -> frozenset:
        return frozenset(self.as_dict)


def make_map(source: Structure, target: Structure,
             mapping: Mapping[str, Optional[str]]) -> StructMap:
    for k, v in mapping.items():
        if k not in source.events:
            raise FormatError(f"map source id {k!r} unknown")
        if v is not None and v not in target.events:
            raise FormatError(f"map target id {v!r} unknown")
    norm = tuple(sorted((e, mapping.get(e)) for e in source.events))
    return StructMap(source=source, target=target, mapping=norm)


def identity_map(s: Structure) -> StructMap:
    return make_map(s, s, {e: e for e in s.events})


def compose_maps(g: StructMap, f: StructMap) -> StructMap:
    """g after f (partial composition)."""
    if f.target != g.source:
        raise UsageError("maps do not compose: endpoints mismatch")
    m = {}
    for e in f.source.events:
        v = f(e)
        m[e] = g(v) if v is not None else None
    return make_map(f.source, g.target, m)


def validate_map(f: StructMap, budget: int = DEFAULT_BUDGET) -> ValidationReport:
    """Check the map conditions matching the kinds of source and target."""
    s, t = f.source, f.target
    violations: list[dict] = []
    general = s.kind == "general" or t.kind == "general"
    if general and not (s.kind == "general" and t.kind == "general"):
        raise UsageError("mixed general/ordered map; convert with prime_as_general")

    for c in sorted(s.classes, key=config_key):
        defined = {e for e in c if f.defined(e)}
        if defined and defined != set(c):
            violations.append(_viol("equi-definedness-on-classes", witness=c))
            continue
        for a, b in itertools.combinations(sorted(c), 2):
            if f.defined(a) and f.defined(b) and not t.equiv(f(a), f(b)):
                violations.append(_viol("preserves-equivalence", witness=(a, b)))
                break

    if s.polarity is not None and t.polarity is not None:
        for e in s.events:
            if f.defined(e) and s.pol(e) != t.pol(f(e)):
                violations.append(_viol("preserves-polarity", event=e))

    if general:
        for x in s.consistent_sets(budget):
            fx = f.image(x)
            if not t.is_consistent(fx):
                violations.append(_viol("image-consistent", witness=x))
                break
            d = f.as_dict
            pts = [e for e in sorted(x) if e in d]
            if len({d[e] for e in pts}) != len(pts):
                violations.append(_viol("locally-injective", witness=x))
                break
        for (y, e) in sorted(s.enablings, key=lambda p: (p[1], config_key(p[0]))):
            if s.is_consistent(y) and f.defined(e) and not t.enables(f.image(y), f(e)):
                violations.append(_viol("preserves-enabling", event=e, witness=y))
                break
    else:
        for x in configs(s, None, budget):
            fx = f.image(x)
            if not is_config(t, fx):
                violations.append(_viol("image-is-configuration", witness=x))
                break
            d = f.as_dict
            pts = [e for e in sorted(x) if e in d]
            bad = False
            for a, b in itertools.combinations(pts, 2):
                if t.equiv(d[a], d[b]) and not s.equiv(a, b):
                    violations.append(_viol("reflects-equivalence-in-configurations",
                                            witness=(a, b), configuration=x))
                    bad = True
                    break
            if bad:
                break

    return make_report(violations)


def maps_equivalent(f: StructMap, g: StructMap) -> bool:
    """Equi-defined with equivalent results everywhere (the 2-cell relation
    on homsets)."""
    if f.source != g.source or f.target != g.target:
        raise UsageError("maps_equivalent requires identical endpoints")
    for e in f.source.events:
        fv, gv = f(e), g(e)
        if (fv is None) != (gv is None):
            return False
        if fv is not None and not f.target.equiv(fv, gv):
            return False
    return True


@dataclass(frozen=True)
class FamilyMap:
    """A total map of (equivalence) families: underlying function on events."""

    source: Family
    target: Family
    mapping: tuple

    def __call__(self, e: str) -> Optional[str]:
        return dict(self.mapping).get(e)

    @property
    def as_dict(self) -> dict:
        return {k: v for k, v in self.mapping if v is not None}

    def image(self, xs: Iterable[str]) -> frozenset:
        d = self.as_dict
        return frozenset(d[e] for e in xs if e in d)


def make_family_map(source: Family, target: Family,
                    mapping: Mapping[str, Optional[str]]) -> FamilyMap:
    for k, v in mapping.items():
        if k not in source.carrier:
            raise FormatError(f"family-map source id {k!r} unknown")
        if v is not None and v not in target.carrier:
            raise FormatError(f"family-map target id {v!r} unknown")
    norm = tuple(sorted((e, mapping.get(e)) for e in source.carrier))
    return FamilyMap(source=source, target=target, mapping=norm)


def validate_family_map(f: FamilyMap) -> ValidationReport:
    violations = []
    for c in sorted(f.source.classes, key=config_key):
        defined = {e for e in c if f(e) is not None}
        if defined and defined != set(c):
            violations.append(_viol("equi-definedness-on-classes", witness=c))
        for a, b in itertools.combinations(sorted(c), 2):
            if f(a) is not None and f(b) is not None \
                    and not f.target.equiv(f(a), f(b)):
                violations.append(_viol("preserves-equivalence", witness=(a, b)))
    for x in f.source.sorted_configs():
        if f.image(x) not in f.target.configs:
            violations.append(_viol("image-is-configuration", witness=x))
            break
        d = f.as_dict
        pts = [e for e in sorted(x) if e in d]
        stop = False
        for a, b in itertools.combinations(pts, 2):
            if f.target.equiv(d[a], d[b]) and not f.source.equiv(a, b):
                violations.append(_viol("reflects-equivalence-in-configurations",
                                        witness=(a, b), configuration=x))
                stop = True
                break
        if stop:
            break
    return make_report(violations)
