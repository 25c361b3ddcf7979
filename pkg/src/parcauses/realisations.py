"""Causal realisations, extremal realisations, and the adjoint chain
between event structures with equivalence, equivalence families and
general event structures.

A realisation of a family is a finite labelled poset whose down-closed
subsets have label-images in the family.  Extremal realisations (every
total outgoing map is an isomorphism) play the role of minimal complete
enablings; the ones with a top element ("prime extremals") are the events
of the right-adjoint construction.

All searches here are brute force over small carriers; the instances this
package targets stay below roughly ten elements, where simple beats
clever.  A separate all-maps oracle backs the optimised extremality test.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .errors import BudgetError, InternalError, UsageError
from .structures import (DEFAULT_BUDGET, Family, Structure, StructMap,
                         config_key, configs, family_of, identity_partition,
                         make_map, maps_equivalent, minimal_conflicts,
                         restrict_events, sorted_configs, stability_failure,
                         transitive_reduction, validate_family)


# ---------------------------------------------------------------------------
# Labelled posets, internal form
# ---------------------------------------------------------------------------
# Positions 0..n-1; labels[i] is the family event at position i; down[i] is
# the frozenset of *strict* predecessors of i.  The order is always stored
# transitively closed.

class _Poset:
    """Labelled poset on positions 0..n-1; `down[i]` is the bitmask of the
    strict predecessors of i, stored transitively closed."""

    __slots__ = ("labels", "down", "_masks", "_imgs")

    def __init__(self, labels: tuple, down: tuple):
        self.labels = labels
        self.down = down
        self._masks = None
        self._imgs = None

    @property
    def n(self) -> int:
        return len(self.labels)

    def __eq__(self, other):
        return self.labels == other.labels and self.down == other.down

    def __hash__(self):
        return hash((self.labels, self.down))

    def down_masks(self) -> list[int]:
        """All down-closed position sets as bitmasks, ascending."""
        if self._masks is None:
            n, down = self.n, self.down
            out = []
            for m in range(1 << n):
                mm = m
                ok = True
                while mm:
                    i = (mm & -mm).bit_length() - 1
                    if down[i] & ~m:
                        ok = False
                        break
                    mm &= mm - 1
                if ok:
                    out.append(m)
            self._masks = out
        return self._masks

    def image(self, mask: int) -> frozenset:
        if self._imgs is None:
            self._imgs = {}
        img = self._imgs.get(mask)
        if img is None:
            out = set()
            mm = mask
            while mm:
                i = (mm & -mm).bit_length() - 1
                out.add(self.labels[i])
                mm &= mm - 1
            img = frozenset(out)
            self._imgs[mask] = img
        return img

    def covers(self) -> list[tuple[int, int]]:
        out = []
        for j in range(self.n):
            d = self.down[j]
            mm = d
            while mm:
                i = (mm & -mm).bit_length() - 1
                mm &= mm - 1
                via = False
                kk = d
                while kk:
                    k = (kk & -kk).bit_length() - 1
                    kk &= kk - 1
                    if self.down[k] & (1 << i):
                        via = True
                        break
                if not via:
                    out.append((i, j))
        return out

    def tops(self) -> list[int]:
        full = (1 << self.n) - 1
        return [i for i in range(self.n)
                if self.down[i] | (1 << i) == full]


def _bits(mask: int):
    while mask:
        i = (mask & -mask).bit_length() - 1
        yield i
        mask &= mask - 1


def _canon_key(p: _Poset) -> tuple:
    """Lexicographically minimal encoding over label-respecting relabelings."""
    n = p.n
    order = sorted(range(n), key=lambda i: p.labels[i])
    groups: list[list[int]] = []
    for i in order:
        if groups and p.labels[groups[-1][0]] == p.labels[i]:
            groups[-1].append(i)
        else:
            groups.append([i])
    slot = 0
    slots: list[list[int]] = []
    for g in groups:
        slots.append(list(range(slot, slot + len(g))))
        slot += len(g)
    best = None
    for arrangement in itertools.product(*[itertools.permutations(g) for g in groups]):
        perm = [0] * n
        for g_idx, perm_group in enumerate(arrangement):
            for pos, i in zip(slots[g_idx], perm_group):
                perm[i] = pos
        pairs = tuple(sorted((perm[i], perm[j])
                             for j in range(n) for i in _bits(p.down[j])))
        if best is None or pairs < best:
            best = pairs
    labels = tuple(p.labels[i] for i in order)
    return (n, labels, best)


def _canon_poset(p: _Poset) -> _Poset:
    n, labels, pairs = _canon_key(p)
    down = [0] * n
    for (i, j) in pairs:
        down[j] |= 1 << i
    return _Poset(labels=labels, down=tuple(down))


# ---------------------------------------------------------------------------
# Public realisation value
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Realisation:
    """A finite labelled poset; `order` holds the immediate pairs."""

    elements: tuple
    order: frozenset
    label: tuple

    def label_of(self, e: str) -> str:
        return dict(self.label)[e]

    @property
    def size(self) -> int:
        return len(self.elements)

    def to_json(self) -> dict:
        return {
            "elements": list(self.elements),
            "order": sorted([a, b] for (a, b) in self.order),
            "label": {k: v for k, v in self.label},
        }


def _to_public(p: _Poset) -> Realisation:
    c = _canon_poset(p)
    names = tuple(f"x{i}" for i in range(c.n))
    red = transitive_reduction(range(c.n),
                               {i: frozenset(_bits(c.down[i])) | {i} for i in range(c.n)})
    order = frozenset((names[a], names[b]) for (a, b) in red)
    label = tuple((names[i], c.labels[i]) for i in range(c.n))
    return Realisation(elements=names, order=order, label=label)


def _from_public(r: Realisation) -> _Poset:
    idx = {e: i for i, e in enumerate(r.elements)}
    n = len(r.elements)
    down = [0] * n
    for (a, b) in r.order:
        down[idx[b]] |= 1 << idx[a]
    changed = True
    while changed:
        changed = False
        for j in range(n):
            for i in _bits(down[j]):
                if down[i] & ~down[j]:
                    down[j] |= down[i]
                    changed = True
    for j in range(n):
        if down[j] & (1 << j):
            raise UsageError("realisation order is cyclic")
    lbl = dict(r.label)
    return _Poset(labels=tuple(lbl[e] for e in r.elements), down=tuple(down))


def _is_realisation(p: _Poset, f: Family) -> bool:
    return all(p.image(m) in f.configs for m in p.down_masks())


def validate_realisation(r: Realisation, f: Family) -> bool:
    try:
        p = _from_public(r)
    except UsageError:
        return False
    if not all(l in f.carrier for _, l in r.label):
        return False
    return _is_realisation(p, f)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _enumerate_posets(f: Family, max_size: int,
                      budget: int = DEFAULT_BUDGET,
                      extremal_closed: bool = False) -> dict:
    """Canonical representatives of all realisations with carrier <= max_size,
    keyed by canonical encoding.  Grows by adding one maximal element, which
    reaches every realisation since any maximal element can be removed.

    With extremal_closed=True, keeps only posets in which two same-label
    elements never share a strict down-set (merging such a pair is a valid
    non-iso quotient) and every principal down-set is a prime extremal
    (extremal realisations are exactly the poset-unions of their principal
    primes).  Both properties pass to down-closed restrictions, and
    extensions add only maximal elements, so no extremal or ancestor of an
    extremal is ever pruned.
    """
    empty = _Poset(labels=(), down=())
    out = {_canon_key(empty): empty}
    frontier = [empty]
    work = 0
    prime_cache: dict[tuple, bool] = {}
    while frontier:
        nxt = []
        for p in frontier:
            if p.n >= max_size:
                continue
            masks = p.down_masks()
            # labels that may sit above a given down-closed set: the label
            # must extend the image of every down-closed superset
            ext_ok = {m: frozenset(a for a in f.carrier
                                   if p.image(m) | {a} in f.configs)
                      for m in masks}
            for d_mask in masks:
                allowed = None
                for m in masks:
                    if d_mask & ~m:
                        continue
                    allowed = ext_ok[m] if allowed is None else allowed & ext_ok[m]
                    if not allowed:
                        break
                if not allowed:
                    continue
                for a in sorted(allowed):
                    if extremal_closed:
                        if any(p.labels[i] == a and p.down[i] == d_mask
                               for i in range(p.n)):
                            continue
                        principal = _restrict_poset(p, d_mask, a)
                        pkey = _canon_key(principal)
                        good = prime_cache.get(pkey)
                        if good is None:
                            good = _is_extremal_poset(principal, f)
                            prime_cache[pkey] = good
                        if not good:
                            continue
                    work += 1
                    if work > budget:
                        raise BudgetError("realisation enumeration exceeded budget")
                    q = _Poset(labels=p.labels + (a,), down=p.down + (d_mask,))
                    key = _canon_key(q)
                    if key not in out:
                        canon = _canon_poset(q)
                        out[key] = canon
                        nxt.append(canon)
        frontier = nxt
    return out


def _restrict_poset(p: _Poset, d_mask: int, top_label: str) -> _Poset:
    """The principal down-set obtained by putting a new `top_label` element
    above the down-closed set d_mask of p."""
    keep = sorted(_bits(d_mask))
    pos = {i: k for k, i in enumerate(keep)}
    labels = tuple(p.labels[i] for i in keep) + (top_label,)
    down = []
    for i in keep:
        m = 0
        for j in _bits(p.down[i] & d_mask):
            m |= 1 << pos[j]
        down.append(m)
    down.append((1 << len(keep)) - 1)
    return _Poset(labels=labels, down=tuple(down))


def enumerate_realisations(f: Family, max_size: int,
                           budget: int = DEFAULT_BUDGET) -> list[Realisation]:
    posets = _enumerate_posets(f, max_size, budget)
    reals = [_to_public(p) for p in posets.values()]
    return sorted(reals, key=lambda r: (r.size, r.label, tuple(sorted(r.order))))


# ---------------------------------------------------------------------------
# Extremality
# ---------------------------------------------------------------------------

def _label_partitions(p: _Poset):
    """Partitions of positions into label-constant blocks, skipping the
    all-singleton partition."""
    groups: dict[str, list[int]] = {}
    for i, l in enumerate(p.labels):
        groups.setdefault(l, []).append(i)

    def set_partitions(items: list[int]):
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for part in set_partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [[first] + part[i]] + part[i + 1:]
            yield [[first]] + part

    per_group = [list(set_partitions(g)) for g in groups.values()]
    for combo in itertools.product(*per_group):
        blocks = [frozenset(b) for part in combo for b in part]
        if any(len(b) > 1 for b in blocks):
            yield blocks


def _quotient_candidates(p: _Poset, blocks: list) -> list[_Poset]:
    """Maximal candidate orders on the quotient along the block map.  A
    quotient pair (q, q') is allowed only when every principal down-set
    image containing q' contains q; the allowed relation is transitive, and
    only its maximal partial suborders need testing."""
    blocks = sorted(blocks, key=lambda b: sorted(b))
    of = {}
    for qi, b in enumerate(blocks):
        for i in b:
            of[i] = qi
    nq = len(blocks)
    imgs = [frozenset(of[j] for j in _bits(p.down[i] | (1 << i)))
            for i in range(p.n)]
    allowed = set()
    for q1 in range(nq):
        for q2 in range(nq):
            if q1 == q2:
                continue
            if all(q1 in img for img in imgs if q2 in img):
                allowed.add((q1, q2))
    labels = tuple(p.labels[min(b)] for b in blocks)

    def to_poset(pairs) -> _Poset:
        down = [0] * nq
        for (a, b) in pairs:
            down[b] |= 1 << a
        return _Poset(labels=labels, down=tuple(down))

    cycles = {(a, b) for (a, b) in allowed if (b, a) in allowed}
    if not cycles:
        return [to_poset(allowed)]
    # break each strongly-connected clump by a linear order; keep cross edges
    comp = list(range(nq))
    for (a, b) in cycles:
        ra, rb = comp[a], comp[b]
        if ra != rb:
            comp = [ra if c == rb else c for c in comp]
    sccs: dict[int, list[int]] = {}
    for q in range(nq):
        sccs.setdefault(comp[q], []).append(q)
    multi = [sorted(v) for v in sccs.values() if len(v) > 1]
    cands = []
    for lin in itertools.product(*[itertools.permutations(m) for m in multi]):
        drop = set()
        for perm in lin:
            rank = {q: k for k, q in enumerate(perm)}
            for a, b in itertools.combinations(perm, 2):
                if rank[a] > rank[b]:
                    a, b = b, a
                drop.add((b, a))
        cands.append(to_poset(allowed - drop))
    return cands


def is_extremal(r: Realisation, f: Family) -> bool:
    """True iff every total realisation map out of r is an isomorphism.

    Total maps either weaken the order bijectively or collapse same-label
    elements; testing maximal weakenings (single cover removals) and, per
    label-compatible partition, the maximal quotient orders is complete
    because adding order relations only shrinks the set of down-closed
    subsets that must land in the family.
    """
    p = _from_public(r)
    if not _is_realisation(p, f):
        raise UsageError("not a realisation of the family")
    return _is_extremal_poset(p, f)


def _is_extremal_poset(p: _Poset, f: Family) -> bool:
    for (i, j) in p.covers():
        down = list(p.down)
        down[j] = down[j] & ~(1 << i)
        weak = _Poset(labels=p.labels, down=tuple(down))
        if _is_realisation(weak, f):
            return False
    for blocks in _label_partitions(p):
        for cand in _quotient_candidates(p, blocks):
            if _is_realisation(cand, f):
                return False
    return True


def is_extremal_bruteforce(r: Realisation, f: Family,
                           budget: int = DEFAULT_BUDGET) -> bool:
    """Oracle: test every total surjective label-commuting function onto
    every enumerated realisation, checking down-set preservation directly."""
    p = _from_public(r)
    if not _is_realisation(p, f):
        raise UsageError("not a realisation of the family")
    targets = _enumerate_posets(f, p.n, budget)
    masks = p.down_masks()
    for t in targets.values():
        cand_per_pos = [[j for j in range(t.n) if t.labels[j] == p.labels[i]]
                        for i in range(p.n)]
        if any(not c for c in cand_per_pos):
            continue
        t_masks = set(t.down_masks())
        for assign in itertools.product(*cand_per_pos):
            if len(set(assign)) != t.n:
                continue
            ok = True
            for m in masks:
                img = 0
                for i in _bits(m):
                    img |= 1 << assign[i]
                if img not in t_masks:
                    ok = False
                    break
            if not ok:
                continue
            if _map_is_iso(p, t, assign):
                continue
            return False
    return True


def _map_is_iso(p: _Poset, t: _Poset, assign: tuple) -> bool:
    if p.n != t.n or len(set(assign)) != p.n:
        return False
    for j in range(p.n):
        for i in range(p.n):
            if bool(p.down[j] & (1 << i)) != bool(t.down[assign[j]] & (1 << assign[i])):
                return False
    return True


def enumerate_extremals(f: Family, max_size: int,
                        budget: int = DEFAULT_BUDGET) -> list[Realisation]:
    """One canonical representative per isomorphism class of extremal
    realisations with carrier <= max_size, canonically ordered."""
    posets = _enumerate_posets(f, max_size, budget, extremal_closed=True)
    out = [_to_public(p) for p in posets.values() if _is_extremal_poset(p, f)]
    return sorted(out, key=lambda r: (r.size, r.label, tuple(sorted(r.order))))


# ---------------------------------------------------------------------------
# Maps between realisations (for the order on prime extremals)
# ---------------------------------------------------------------------------

def _exists_real_map(src: _Poset, dst: _Poset, total: bool) -> bool:
    """Is there a (partial when not total) surjective label-commuting map
    src -> dst preserving down-closed subsets?"""
    cand = []
    for i in range(src.n):
        c = [j for j in range(dst.n) if dst.labels[j] == src.labels[i]]
        if not total:
            c = c + [None]
        if not c:
            return False
        cand.append(c)
    src_masks = src.down_masks()
    dst_masks = set(dst.down_masks())
    full = set(range(dst.n))
    for assign in itertools.product(*cand):
        if set(a for a in assign if a is not None) != full:
            continue
        ok = True
        for m in src_masks:
            img = 0
            for i in _bits(m):
                if assign[i] is not None:
                    img |= 1 << assign[i]
            if img not in dst_masks:
                ok = False
                break
        if ok:
            return True
    return False


def count_total_maps(a: Realisation, b: Realisation) -> int:
    """Number of total realisation maps a -> b (used to check that between
    extremals there is at most one)."""
    src, dst = _from_public(a), _from_public(b)
    n = 0
    cand = [[j for j in range(dst.n) if dst.labels[j] == src.labels[i]]
            for i in range(src.n)]
    if any(not c for c in cand):
        return 0
    src_masks = src.down_masks()
    dst_masks = set(dst.down_masks())
    full = set(range(dst.n))
    for assign in itertools.product(*cand):
        if set(assign) != full:
            continue
        ok = True
        for m in src_masks:
            img = 0
            for i in _bits(m):
                img |= 1 << assign[i]
            if img not in dst_masks:
                ok = False
                break
        if ok:
            n += 1
    return n


# ---------------------------------------------------------------------------
# ges : ese -> general
# ---------------------------------------------------------------------------

def class_name(c: frozenset) -> str:
    return min(c)


def ges_of(s: Structure, budget: int = DEFAULT_BUDGET) -> Structure:
    """Quotient an ese/edc to a general event structure on its equivalence
    classes.  Classes are named after their least member."""
    if s.kind not in ("ese", "edc", "prime"):
        raise UsageError("ges_of expects an ese/edc (or prime) structure")
    names = {c: class_name(c) for c in s.classes}
    events = tuple(sorted(names.values()))

    def q(e: str) -> str:
        return names[s.cls(e)]

    cons = set()
    for y in s.consistent_sets(budget):
        cons.add(frozenset(q(e) for e in y))
    ena = set()
    for p in s.events:
        e = q(p)
        x = frozenset(q(e2) for e2 in s.down(p)) - {e}
        ena.add((x, e))
    pol = None
    if s.polarity is not None:
        pol = tuple(sorted({q(e): s.pol(e) for e in s.events}.items()))
    return Structure(kind="general", events=events, causality=frozenset(),
                     enablings=frozenset(ena), conflicts=None,
                     consistent=frozenset(cons),
                     classes=identity_partition(events), polarity=pol)


def ges_of_map(f: StructMap, gs: Structure, gt: Structure) -> StructMap:
    """Functorial action on maps: the induced partial function on classes."""
    m: dict[str, Optional[str]] = {}
    for c in f.source.classes:
        name = class_name(c)
        rep = min(c)
        v = f(rep)
        m[name] = None if v is None else class_name(f.target.cls(v))
    return make_map(gs, gt, m)


# ---------------------------------------------------------------------------
# er : general (or equivalence family) -> ese
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErResult:
    structure: Structure
    counit: tuple                      # (prime-name, family event) pairs
    primes: tuple                      # (prime-name, Realisation) pairs

    def counit_of(self, p: str) -> str:
        return dict(self.counit)[p]

    def prime(self, p: str) -> Realisation:
        return dict(self.primes)[p]


def er_of_family(f: Family, max_carrier: Optional[int] = None,
                 budget: int = DEFAULT_BUDGET) -> ErResult:
    """Events are canonical prime extremals; order is existence of a
    realisation map; a set is consistent when the tops of its down-closure
    form a family member; primes are equivalent when their tops are."""
    if max_carrier is None:
        max_carrier = len(f.carrier) + 2
    items = [p for p in _enumerate_posets(f, max_carrier, budget,
                                           extremal_closed=True).values()
             if p.n > 0 and len(p.tops()) == 1 and _is_extremal_poset(p, f)]
    items.sort(key=lambda p: (p.n, _canon_key(p)))
    top_label = [p.labels[p.tops()[0]] for p in items]
    names = [f"p{k}:{top_label[k]}" for k in range(len(items))]
    top_of = dict(zip(names, top_label))
    below: dict[str, set[str]] = {n: set() for n in names}
    for i, pi in enumerate(items):
        for j, pj in enumerate(items):
            if i == j:
                continue
            if pj.n <= pi.n and _exists_real_map(pi, pj, total=False):
                below[names[i]].add(names[j])
    down = {n: frozenset(below[n]) | {n} for n in names}
    caus = transitive_reduction(names, down)

    def consistent(xs: frozenset) -> bool:
        closure = set()
        for n in xs:
            closure |= down[n]
        return frozenset(top_of[n] for n in closure) in f.configs

    confl = minimal_conflicts(names, consistent, budget)
    classes: dict[frozenset, set[str]] = {}
    for k in range(len(items)):
        classes.setdefault(f.cls(top_label[k]), set()).add(names[k])
    struct = Structure(kind="ese", events=tuple(sorted(names)),
                       causality=caus, enablings=frozenset(),
                       conflicts=confl, consistent=None,
                       classes=frozenset(frozenset(v) for v in classes.values()),
                       polarity=None)
    counit = tuple(sorted(zip(names, top_label)))
    primes = tuple(sorted((names[k], _to_public(p)) for k, p in enumerate(items)))
    return ErResult(structure=struct, counit=counit, primes=primes)


def er(g: Structure, max_carrier: Optional[int] = None,
       budget: int = DEFAULT_BUDGET) -> ErResult:
    if g.kind != "general":
        raise UsageError("er expects a general event structure")
    return er_of_family(family_of(g, budget), max_carrier, budget)


def counit_map(res: ErResult, g: Structure, budget: int = DEFAULT_BUDGET) -> StructMap:
    """max_A as a map of general event structures ges(er(A)) -> A."""
    gs = ges_of(res.structure, budget)
    m = {}
    for c in res.structure.classes:
        m[class_name(c)] = res.counit_of(min(c))
    return make_map(gs, g, m)


def factor_through_er(f: StructMap, q: Structure, res: ErResult,
                      budget: int = DEFAULT_BUDGET) -> StructMap:
    """Given f : ges(q) -> A, produce h : q -> er(A) with
    max_A o ges(h) = f; unique up to map-equivalence."""
    hs = _enumerate_factorisations(f, q, res, budget, first_only=True)
    if not hs:
        raise InternalError("no factorisation found; the adjunction guarantees one")
    return hs[0]


def _enumerate_factorisations(f: StructMap, q: Structure, res: ErResult,
                              budget: int, first_only: bool = False) -> list[StructMap]:
    p = res.structure
    counit = dict(res.counit)
    cand: dict[str, list[Optional[str]]] = {}
    for e in q.events:
        v = f(class_name(q.cls(e)))
        if v is None:
            cand[e] = [None]
        else:
            cand[e] = sorted(n for n in p.events if counit[n] == v)
    from .structures import validate_map
    found = []
    events = list(q.events)
    gq = ges_of(q, budget)
    gp = ges_of(p, budget)
    for assign in itertools.product(*[cand[e] for e in events]):
        m = dict(zip(events, assign))
        h = make_map(q, p, m)
        if not validate_map(h, budget).valid:
            continue
        gh = ges_of_map(h, gq, gp)
        ok = all(_compose_partial(counit, gh(e)) == f(e) for e in gq.events)
        if ok:
            found.append(h)
            if first_only:
                return found
    return found


def _compose_partial(outer: Mapping[str, str], v: Optional[str]) -> Optional[str]:
    return None if v is None else outer.get(v)


# ---------------------------------------------------------------------------
# Pr : stable equivalence families -> edc
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrResult:
    structure: Structure
    primes: tuple        # (prime-name, (config events tuple, defining event)) pairs

    def config_of(self, p: str) -> frozenset:
        return frozenset(dict(self.primes)[p][0])

    def defining_event(self, p: str) -> str:
        return dict(self.primes)[p][1]


def pr(f: Family, budget: int = DEFAULT_BUDGET) -> PrResult:
    """The right adjoint from stable equivalence families to edc's: events
    are prime configurations of unambiguous configurations, ordered by
    inclusion, consistent when their union is a member, equivalent when
    their defining events are."""
    fail = stability_failure(f)
    if fail is not None:
        raise UsageError(f"family is not a stable equivalence family ({fail})")
    prime_cfgs: dict[frozenset, str] = {}
    for x in f.sorted_configs():
        if not f.unambiguous(x):
            continue
        for a in sorted(x):
            members = [y for y in f.configs if a in y and y <= x]
            z = x
            for y in members:
                z = z & y
            z = frozenset(z)
            if z in prime_cfgs:
                if prime_cfgs[z] != a:
                    raise InternalError("prime configuration with ambiguous defining event")
                continue
            prime_cfgs[z] = a
    items = sorted(prime_cfgs.items(), key=lambda kv: config_key(kv[0]))
    names = [f"p{k}:{a}" for k, (_, a) in enumerate(items)]
    zs = {names[k]: z for k, (z, _) in enumerate(items)}
    defin = {names[k]: a for k, (_, a) in enumerate(items)}
    down = {n: frozenset(m for m in names if zs[m] <= zs[n]) for n in names}
    caus = transitive_reduction(names, down)

    def consistent(xs: frozenset) -> bool:
        u = frozenset()
        for n in xs:
            u |= zs[n]
        return u in f.configs

    confl = minimal_conflicts(names, consistent, budget)
    classes: dict[frozenset, set[str]] = {}
    for n in names:
        classes.setdefault(f.cls(defin[n]), set()).add(n)
    struct = Structure(kind="edc", events=tuple(sorted(names)), causality=caus,
                       enablings=frozenset(), conflicts=confl, consistent=None,
                       classes=frozenset(frozenset(v) for v in classes.values()),
                       polarity=None)
    primes = tuple(sorted((n, (tuple(sorted(zs[n])), defin[n])) for n in names))
    return PrResult(structure=struct, primes=primes)


# ---------------------------------------------------------------------------
# Coreflections
# ---------------------------------------------------------------------------

def coreflect_edc(s: Structure) -> Structure:
    """Cut an ese down to the events whose down-closure contains no two
    distinct equivalent events; the right adjoint into edc's."""
    if s.kind not in ("ese", "edc"):
        raise UsageError("coreflect_edc expects an ese")
    keep = []
    for p in s.events:
        strict = sorted(s.down(p))
        ok = True
        for a, b in itertools.combinations(strict, 2):
            if a != b and s.equiv(a, b):
                ok = False
                break
        if ok:
            keep.append(p)
    out = restrict_events(s, keep)
    return Structure(kind="edc", events=out.events, causality=out.causality,
                     enablings=out.enablings, conflicts=out.conflicts,
                     consistent=out.consistent, classes=out.classes,
                     polarity=out.polarity)


def forget_equiv(s: Structure, budget: int = DEFAULT_BUDGET) -> Structure:
    """Drop the equivalence of an edc, thinning consistency to equivalence-
    thin sets; the configurations become the unambiguous ones."""
    if s.kind not in ("edc", "ese"):
        raise UsageError("forget_equiv expects an edc")

    def consistent(xs: frozenset) -> bool:
        if not s.is_consistent(xs):
            return False
        return s.unambiguous(xs)

    if s.consistent is not None:
        cons = frozenset(x for x in s.consistent if s.unambiguous(x))
        confl, expl = None, cons
    else:
        confl, expl = minimal_conflicts(s.events, consistent, budget), None
    return Structure(kind="prime", events=s.events, causality=s.causality,
                     enablings=frozenset(), conflicts=confl, consistent=expl,
                     classes=identity_partition(s.events), polarity=s.polarity)
