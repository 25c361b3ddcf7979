"""Games with polarity: copycat, the Scott order, hiding and partial-map
factorisation, pullbacks of equivalence families and of edc's, strategy
composition (pullback then hiding), the strategy axioms, determinism and
isomorphism search.

Games are prime event structures with total polarity and identity
equivalence; strategies are total polarity-preserving maps from a
polarized edc into a game.  Composition works over games presented as a
parallel composition with `l:`/`r:` tagged sides.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .errors import BudgetError, InternalError, UsageError
from .realisations import PrResult, pr
from .structures import (DEFAULT_BUDGET, Family, FamilyMap, StructMap,
                         Structure, compose_maps, config_key, configs,
                         enabled_events, identity_map, identity_partition,
                         is_config, make_family, make_family_map, make_map,
                         make_report, minimal_conflicts, restrict_events,
                         sorted_configs, to_conflicts, transitive_reduction,
                         validate, validate_map)

POS, NEG = "+", "-"


def flip(p: str) -> str:
    return NEG if p == POS else POS


def tag(side: str, e: str) -> str:
    return f"{side}:{e}"


def untag(e: str) -> tuple[str, str]:
    side, _, rest = e.partition(":")
    return side, rest


def side_part(x: Iterable[str], side: str) -> frozenset:
    return frozenset(r for (s, r) in map(untag, x) if s == side)


# ---------------------------------------------------------------------------
# Games
# ---------------------------------------------------------------------------

def validate_game(a: Structure) -> None:
    if a.kind != "prime":
        raise UsageError("games are prime event structures")
    if a.polarity is None:
        raise UsageError("games carry a total polarity")
    if not a.has_identity_equivalence():
        raise UsageError("games carry the identity equivalence")


def dual(a: Structure) -> Structure:
    """Same structure, polarities reversed; an involution."""
    if a.polarity is None:
        raise UsageError("dual needs a polarized structure")
    pol = tuple((e, flip(p)) for (e, p) in a.polarity)
    return Structure(kind=a.kind, events=a.events, causality=a.causality,
                     enablings=a.enablings, conflicts=a.conflicts,
                     consistent=a.consistent, classes=a.classes, polarity=pol)


def par(a: Structure, b: Structure, budget: int = DEFAULT_BUDGET) -> Structure:
    """Juxtaposition with `l:`/`r:` tags; a finite set is consistent iff both
    side restrictions are."""
    a, b = to_conflicts(a, budget), to_conflicts(b, budget)
    events = tuple(sorted([tag("l", e) for e in a.events] +
                          [tag("r", e) for e in b.events]))
    caus = frozenset({(tag("l", x), tag("l", y)) for (x, y) in a.causality} |
                     {(tag("r", x), tag("r", y)) for (x, y) in b.causality})
    confl = frozenset({frozenset(tag("l", e) for e in c) for c in a.conflicts} |
                      {frozenset(tag("r", e) for e in c) for c in b.conflicts})
    classes = frozenset({frozenset(tag("l", e) for e in c) for c in a.classes} |
                        {frozenset(tag("r", e) for e in c) for c in b.classes})
    pol = None
    if a.polarity is not None and b.polarity is not None:
        pol = tuple(sorted([(tag("l", e), p) for (e, p) in a.polarity] +
                           [(tag("r", e), p) for (e, p) in b.polarity]))
    kind = a.kind
    if "edc" in (a.kind, b.kind):
        kind = "edc"
    elif "ese" in (a.kind, b.kind):
        kind = "ese"
    return Structure(kind=kind, events=events, causality=caus,
                     enablings=frozenset(), conflicts=confl, consistent=None,
                     classes=classes, polarity=pol)


def par3(a: Structure, b: Structure, c: Structure,
         budget: int = DEFAULT_BUDGET) -> Structure:
    """Three-way juxtaposition with flat l:/m:/r: tags (used as the pullback
    target in composition)."""
    a, b, c = (to_conflicts(s, budget) for s in (a, b, c))

    def retag(s: Structure, t: str):
        return ([(tag(t, e)) for e in s.events],
                {(tag(t, x), tag(t, y)) for (x, y) in s.causality},
                {frozenset(tag(t, e) for e in k) for k in s.conflicts})

    ea, ca, fa = retag(a, "l")
    eb, cb, fb = retag(b, "m")
    ec, cc, fc = retag(c, "r")
    events = tuple(sorted(ea + eb + ec))
    return Structure(kind="prime", events=events,
                     causality=frozenset(ca | cb | cc),
                     enablings=frozenset(), conflicts=frozenset(fa | fb | fc),
                     consistent=None, classes=identity_partition(events),
                     polarity=None)


def strip_polarity(s: Structure) -> Structure:
    return Structure(kind=s.kind, events=s.events, causality=s.causality,
                     enablings=s.enablings, conflicts=s.conflicts,
                     consistent=s.consistent, classes=s.classes, polarity=None)


def empty_game() -> Structure:
    return Structure(kind="prime", events=(), causality=frozenset(),
                     enablings=frozenset(), conflicts=frozenset(),
                     consistent=None, classes=frozenset(), polarity=())


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Strategy:
    """A total polarity-preserving map sigma : inner -> game."""

    inner: Structure
    game: Structure
    sigma: tuple

    def map(self) -> StructMap:
        return StructMap(source=self.inner, target=self.game, mapping=self.sigma)

    def apply(self, e: str) -> str:
        return dict(self.sigma)[e]

    def image(self, xs: Iterable[str]) -> frozenset:
        d = dict(self.sigma)
        return frozenset(d[e] for e in xs)


def make_strategy(inner: Structure, game: Structure,
                  sigma: Mapping[str, str]) -> Strategy:
    m = make_map(inner, game, dict(sigma))
    return Strategy(inner=inner, game=game, sigma=m.mapping)


def validate_strategy(s: Strategy, budget: int = DEFAULT_BUDGET):
    """Pre-strategy conditions: valid polarized edc over a valid game, sigma
    total and a valid polarity-preserving map."""
    violations = []
    try:
        validate_game(s.game)
    except UsageError as exc:
        violations.append({"axiom": "game-shape", "witness": str(exc)})
    rep = validate(s.inner, budget)
    if not rep.valid:
        violations.append({"axiom": "inner-valid", "witness": rep.to_json()["violations"]})
    if s.inner.kind != "edc":
        violations.append({"axiom": "inner-kind-edc", "witness": s.inner.kind})
    if s.inner.polarity is None:
        violations.append({"axiom": "inner-polarized", "witness": ()})
    d = dict(s.sigma)
    for e in s.inner.events:
        if d.get(e) is None:
            violations.append({"axiom": "sigma-total", "witness": e})
            break
    mrep = validate_map(s.map(), budget)
    if not mrep.valid:
        violations.append({"axiom": "sigma-valid-map",
                           "witness": mrep.to_json()["violations"]})
    return make_report(violations)


def copycat(a: Structure, budget: int = DEFAULT_BUDGET) -> Strategy:
    """CC_A over dual(A) || A: each Player move awaits its mirror copy; a set
    is consistent when its down-closure is consistent side by side."""
    validate_game(a)
    game = par(dual(a), a, budget)
    caus = set(game.causality)
    for e in a.events:
        if a.pol(e) == POS:
            caus.add((tag("l", e), tag("r", e)))
        else:
            caus.add((tag("r", e), tag("l", e)))
    events = game.events
    down = {}
    base = Structure(kind="prime", events=events, causality=frozenset(caus),
                     enablings=frozenset(), conflicts=frozenset(),
                     consistent=None, classes=identity_partition(events),
                     polarity=game.polarity)
    for e in events:
        down[e] = base.down(e)

    def consistent(xs: frozenset) -> bool:
        closure = frozenset().union(*(down[e] for e in xs)) if xs else frozenset()
        return game.is_consistent(closure)

    confl = minimal_conflicts(events, consistent, budget)
    inner = Structure(kind="edc", events=events, causality=frozenset(caus),
                      enablings=frozenset(), conflicts=confl, consistent=None,
                      classes=identity_partition(events), polarity=game.polarity)
    return make_strategy(inner, game, {e: e for e in events})


def scott_leq(x: Iterable[str], y: Iterable[str], a: Structure) -> bool:
    """x below y in the Scott order on configurations of the game a:
    dropping only Opponent moves from x and adding only Player moves
    reaches y."""
    x, y = frozenset(x), frozenset(y)
    if not is_config(a, x) or not is_config(a, y):
        raise UsageError("scott_leq expects configurations of the game")
    return (all(a.pol(e) == NEG for e in x - y) and
            all(a.pol(e) == POS for e in y - x))


def is_race_free(a: Structure) -> bool:
    """Enabled moves of opposing polarity are jointly consistent."""
    validate_game(a)
    for x in configs(a):
        en = enabled_events(a, x)
        for e1, e2 in itertools.combinations(en, 2):
            if a.pol(e1) != a.pol(e2) and not is_config(a, x | {e1, e2}):
                return False
    return True


# ---------------------------------------------------------------------------
# Hiding and partial-map factorisation
# ---------------------------------------------------------------------------

def hide_events(s: Structure, visible: Iterable[str]) -> Structure:
    """Projection on an equivalence-closed set of visible events."""
    v = frozenset(visible)
    for e in v:
        closed = s.cls(e) if e in s.events else frozenset()
        if not closed <= v:
            raise UsageError("visible set is not equivalence-closed")
    return restrict_events(s, v)


def factorise_partial(f: StructMap) -> tuple[StructMap, StructMap]:
    """f = defined_part o projection, hiding the undefined events."""
    v = f.domain()
    proj_target = hide_events(f.source, v)
    f0 = make_map(f.source, proj_target, {e: e if e in v else None
                                          for e in f.source.events})
    f1 = make_map(proj_target, f.target, {e: f(e) for e in proj_target.events})
    return f0, f1


def mediate(f: StructMap, g0: StructMap, g1: StructMap,
            budget: int = DEFAULT_BUDGET) -> StructMap:
    """The unique total map h with h o f0 = g0 and g1 o h = f1 for an
    alternative factorisation f = g1 o g0 through g0's target."""
    if g0.source != f.source or g1.target != f.target or g0.target != g1.source:
        raise UsageError("not a factorisation of f")
    for e in f.source.events:
        via = g1(g0(e)) if g0(e) is not None else None
        if via != f(e):
            raise UsageError("g1 o g0 differs from f")
    for e in g1.source.events:
        if g1(e) is None:
            raise UsageError("g1 must be total")
    f0, f1 = factorise_partial(f)
    v = f.domain()
    h = make_map(f0.target, g0.target, {e: g0(e) for e in sorted(v)})
    if any(h(e) is None for e in sorted(v)):
        raise InternalError("mediating map must be total on the projection")
    if not validate_map(h, budget).valid:
        raise InternalError("mediating map is not a valid map")
    return h


# ---------------------------------------------------------------------------
# Pullbacks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EfPullback:
    family: Family
    proj1: FamilyMap
    proj2: FamilyMap
    pairs: tuple  # (pair-name, (a-event, b-event))

    def pair(self, name: str) -> tuple[str, str]:
        return dict(self.pairs)[name]


def pseudo_pullback_ef(f: FamilyMap, g: FamilyMap,
                       budget: int = DEFAULT_BUDGET) -> EfPullback:
    """Pairs with equivalent images, componentwise equivalence, and the
    two-sided securing condition; a pullback when the target equivalence is
    the identity."""
    if f.target != g.target:
        raise UsageError("pseudo pullback needs a common target")
    for m in (f, g):
        if any(m(e) is None for e in m.source.carrier):
            raise UsageError("pseudo pullback requires total maps")
    fa, fb = f.source, g.source
    pairs = []
    for a in fa.carrier:
        for b in fb.carrier:
            if f.target.equiv(f(a), g(b)):
                pairs.append((f"({a},{b})", (a, b)))
    names = {n: ab for n, ab in pairs}

    def good(x: frozenset) -> bool:
        pa = frozenset(names[d][0] for d in x)
        pb = frozenset(names[d][1] for d in x)
        return pa in fa.configs and pb in fb.configs

    seen = {frozenset()}
    frontier = [frozenset()]
    work = 0
    while frontier:
        nxt = []
        for x in frontier:
            for n in names:
                if n in x:
                    continue
                work += 1
                if work > budget:
                    raise BudgetError("pseudo pullback enumeration exceeded budget")
                y = x | {n}
                if y not in seen and good(y):
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt

    classes: dict[tuple, set] = {}
    for n, (a, b) in pairs:
        classes.setdefault((config_key(fa.cls(a)), config_key(fb.cls(b))),
                           set()).add(n)
    fam = Family(carrier=tuple(sorted(names)), configs=frozenset(seen),
                 classes=frozenset(frozenset(v) for v in classes.values()))
    p1 = make_family_map(fam, fa, {n: names[n][0] for n in names})
    p2 = make_family_map(fam, fb, {n: names[n][1] for n in names})
    return EfPullback(family=fam, proj1=p1, proj2=p2,
                      pairs=tuple(sorted(pairs)))


def stable_restriction(f: Family) -> Family:
    """Keep the configurations that are unions of unambiguous members; this
    is how (pseudo) pullbacks of stable equivalence families arise."""
    unamb = [x for x in f.sorted_configs() if f.unambiguous(x)]
    keep = []
    for x in f.sorted_configs():
        if all(any(e in z and z <= x for z in unamb) for e in x):
            keep.append(x)
    return Family(carrier=f.carrier, configs=frozenset(keep), classes=f.classes)


@dataclass(frozen=True)
class EdcPullback:
    structure: Structure
    proj1: StructMap
    proj2: StructMap
    prres: PrResult
    ef: EfPullback

    def defining_pair(self, p: str) -> tuple[str, str]:
        return self.ef.pair(self.prres.defining_event(p))


def pullback_edc(f: StructMap, g: StructMap,
                 budget: int = DEFAULT_BUDGET) -> EdcPullback:
    """Pullback in edc's: the pseudo pullback of the configuration families,
    restricted to its stable part, then rebuilt from prime configurations."""
    if f.target != g.target:
        raise UsageError("pullback needs a common target")
    if not f.target.has_identity_equivalence():
        raise UsageError("pullback target must carry the identity equivalence")
    for m in (f, g):
        if any(m(e) is None for e in m.source.events):
            raise UsageError("pullback requires total maps")
    from .structures import family_of
    fa, fb, fc = (family_of(s, budget) for s in (f.source, g.source, f.target))
    fm = make_family_map(fa, fc, f.as_dict)
    gm = make_family_map(fb, fc, g.as_dict)
    efpb = pseudo_pullback_ef(fm, gm, budget)
    stable = stable_restriction(efpb.family)
    prres = pr(stable, budget)
    pair_of = dict(efpb.pairs)
    proj1 = make_map(prres.structure, f.source,
                     {p: pair_of[prres.defining_event(p)][0]
                      for p in prres.structure.events})
    proj2 = make_map(prres.structure, g.source,
                     {p: pair_of[prres.defining_event(p)][1]
                      for p in prres.structure.events})
    return EdcPullback(structure=prres.structure, proj1=proj1, proj2=proj2,
                       prres=prres, ef=efpb)


def enumerate_mediating_maps(cone_obj: Structure, ca: StructMap, cb: StructMap,
                             q: Structure, qa: StructMap, qb: StructMap,
                             budget: int = DEFAULT_BUDGET) -> list[StructMap]:
    """All total maps h : cone_obj -> q with qa o h = ca and qb o h = cb
    (the strict commutation demanded of a pullback's mediating map)."""
    cand = []
    for e in cone_obj.events:
        opts = [w for w in q.events
                if qa(w) == ca(e) and qb(w) == cb(e)]
        if not opts:
            return []
        cand.append(opts)
    out = []
    for assign in itertools.product(*cand):
        h = make_map(cone_obj, q, dict(zip(cone_obj.events, assign)))
        if validate_map(h, budget).valid:
            out.append(h)
    return out


# ---------------------------------------------------------------------------
# Composition: pullback then hiding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompositionResult:
    strategy: Strategy
    pullback: EdcPullback
    rename: tuple            # (pullback event, composite event) pairs
    parts: tuple             # (A, B, C) games

    def lift(self, x: Iterable[str]) -> frozenset:
        """Minimal pullback witness of a composite configuration: its
        down-closure among pullback events."""
        back = {v: k for k, v in self.rename}
        p = self.pullback.structure
        events = [back[e] for e in x]
        return p.down_set(events)

    def s_part(self, lifted: Iterable[str]) -> frozenset:
        """S-component of the proj to S || C."""
        img = self.pullback.proj2.image(lifted)
        return side_part(img, "l")

    def t_part(self, lifted: Iterable[str]) -> frozenset:
        """T-component of the proj to A || T."""
        img = self.pullback.proj1.image(lifted)
        return side_part(img, "r")


def split_game(game: Structure) -> tuple[Structure, Structure]:
    """Recover (left, right) components of a par-shaped game."""
    left = sorted(r for (s, r) in map(untag, game.events) if s == "l")
    right = sorted(r for (s, r) in map(untag, game.events) if s == "r")
    lstr = restrict_events(game, [tag("l", e) for e in left])
    rstr = restrict_events(game, [tag("r", e) for e in right])

    def strip(s: Structure) -> Structure:
        return rename_structure(s, {e: untag(e)[1] for e in s.events})

    return strip(lstr), strip(rstr)


def rename_structure(s: Structure, ren: Mapping[str, str]) -> Structure:
    events = tuple(sorted(ren[e] for e in s.events))
    if len(set(events)) != len(s.events):
        raise UsageError("renaming must be injective")
    caus = frozenset((ren[a], ren[b]) for (a, b) in s.causality)
    ena = frozenset((frozenset(ren[e] for e in y), ren[e2])
                    for (y, e2) in s.enablings)
    confl = None if s.conflicts is None else \
        frozenset(frozenset(ren[e] for e in c) for c in s.conflicts)
    cons = None if s.consistent is None else \
        frozenset(frozenset(ren[e] for e in c) for c in s.consistent)
    classes = frozenset(frozenset(ren[e] for e in c) for c in s.classes)
    pol = None if s.polarity is None else \
        tuple(sorted((ren[e], p) for (e, p) in s.polarity))
    return Structure(kind=s.kind, events=events, causality=caus, enablings=ena,
                     conflicts=confl, consistent=cons, classes=classes,
                     polarity=pol)


def from_empty(s: Strategy, budget: int = DEFAULT_BUDGET) -> Strategy:
    """Reframe a strategy in game A as a strategy from the empty game to A
    (game events pick up the `r:` tag)."""
    game = par(dual(empty_game()), s.game, budget)
    sigma = {e: tag("r", s.apply(e)) for e in s.inner.events}
    return make_strategy(s.inner, game, sigma)


def compose(sigma: Strategy, tau: Strategy,
            budget: int = DEFAULT_BUDGET) -> CompositionResult:
    """tau after sigma: synchronise over the middle game by pullback, then
    hide the middle moves and reinstate polarities over dual(A) || C."""
    a, b1 = split_game(sigma.game)
    b2, c = split_game(tau.game)
    if strip_polarity(dual(b1)) != strip_polarity(b2) or dual(b1) != b2:
        raise UsageError("middle games do not match")
    a_plain, b_plain, c_plain = (strip_polarity(x) for x in (dual(a), b2, c))
    s_in, t_in = strip_polarity(sigma.inner), strip_polarity(tau.inner)
    g3 = par3(a_plain, b_plain, c_plain, budget)

    x_struct = par(a_plain, t_in, budget)          # A || T

    def xmap(e: str) -> str:
        side, rest = untag(e)
        if side == "l":
            return tag("l", rest)
        ti = tau.apply(rest)
        ts, tr = untag(ti)
        return tag("m" if ts == "l" else "r", tr)

    y_struct = par(s_in, c_plain, budget)          # S || C

    def ymap(e: str) -> str:
        side, rest = untag(e)
        if side == "r":
            return tag("r", rest)
        si = sigma.apply(rest)
        ss, sr = untag(si)
        return tag("l" if ss == "l" else "m", sr)

    fx = make_map(x_struct, g3, {e: xmap(e) for e in x_struct.events})
    gy = make_map(y_struct, g3, {e: ymap(e) for e in y_struct.events})
    pb = pullback_edc(fx, gy, budget)

    nu = {p: fx(pb.proj1(p)) for p in pb.structure.events}
    visible = [p for p in pb.structure.events if untag(nu[p])[0] != "m"]
    hidden_struct = hide_events(pb.structure, visible)

    game = par(a, c, budget)
    order = sorted(hidden_struct.events,
                   key=lambda p: config_key(pb.prres.config_of(p)))
    rename = {p: f"p{k}:{nu[p]}" for k, p in enumerate(order)}
    inner0 = rename_structure(hidden_struct, rename)
    pol = {rename[p]: game.pol(nu[p]) for p in hidden_struct.events}
    inner = Structure(kind="edc", events=inner0.events, causality=inner0.causality,
                      enablings=frozenset(), conflicts=inner0.conflicts,
                      consistent=inner0.consistent, classes=inner0.classes,
                      polarity=tuple(sorted(pol.items())))
    strat = make_strategy(inner, game,
                          {rename[p]: nu[p] for p in hidden_struct.events})
    return CompositionResult(strategy=strat, pullback=pb,
                             rename=tuple(sorted(rename.items())),
                             parts=(a, b2, c))


# ---------------------------------------------------------------------------
# Strategy axioms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    axioms: tuple  # (name, holds, witness) triples

    @property
    def all_pass(self) -> bool:
        return all(h for (_, h, _) in self.axioms)

    def holds(self, name: str) -> bool:
        return {n: h for (n, h, _) in self.axioms}[name]

    def witness(self, name: str):
        return {n: w for (n, _, w) in self.axioms}[name]

    def failing(self) -> list[str]:
        return [n for (n, h, _) in self.axioms if not h]

    def to_json(self) -> dict:
        return {n: {"holds": h, "witness": w} for (n, h, w) in self.axioms}


def _covers_of(s: Structure) -> list[tuple[str, str]]:
    down = {e: s.down(e) - {e} for e in s.events}
    out = []
    for e2 in s.events:
        for e1 in down[e2]:
            if not any(e1 in down[m] for m in down[e2]):
                out.append((e1, e2))
    return sorted(out)


def check_strategy(strat: Strategy, budget: int = DEFAULT_BUDGET) -> AxiomReport:
    """The five axioms singling out the maps stable under copycat
    composition; each failure is reported with a minimal witness."""
    s, a = strat.inner, strat.game
    d = dict(strat.sigma)
    axioms = []

    witness = None
    game_covers = set(_covers_of(a))
    for (s1, s2) in _covers_of(s):
        if s.pol(s1) == POS or s.pol(s2) == NEG:
            if (d[s1], d[s2]) not in game_covers:
                witness = (s1, s2)
                break
    axioms.append(("innocence", witness is None, witness))

    witness = None
    for x in configs(s, None, budget):
        gx = strat.image(x)
        for ev in enabled_events(a, gx):
            if a.pol(ev) != NEG:
                continue
            if not any(d[t] == ev and t not in x and is_config(s, x | {t})
                       for t in s.events):
                witness = (tuple(sorted(x)), ev)
                break
        if witness:
            break
    axioms.append(("exists-receptivity", witness is None, witness))

    witness = None
    for x in _all_subsets(s.events, budget):
        if s.is_consistent(x):
            continue
        if not a.is_consistent(strat.image(x)):
            continue
        plus = frozenset(e for e in s.down_set(x) if s.pol(e) == POS)
        if s.is_consistent(plus):
            witness = tuple(sorted(x))
            break
    axioms.append(("plus-consistency", witness is None, witness))

    witness = None
    for s1, s2 in itertools.combinations(s.events, 2):
        if s.pol(s1) == NEG and s.pol(s2) == NEG and s.equiv(s1, s2) \
                and s.down(s1) - {s1} == s.down(s2) - {s2}:
            witness = (s1, s2)
            break
    axioms.append(("non-redundancy", witness is None, witness))

    witness = None
    for s1, s2 in itertools.combinations(s.events, 2):
        if d[s1] == d[s2] and not s.equiv(s1, s2):
            witness = (s1, s2)
            break
    axioms.append(("equivalence-saturation", witness is None, witness))

    return AxiomReport(axioms=tuple(axioms))


def _all_subsets(events: tuple, budget: int):
    if 2 ** len(events) > budget:
        raise UsageError("subset scan exceeds budget")
    for r in range(len(events) + 1):
        for combo in itertools.combinations(events, r):
            yield frozenset(combo)


def is_deterministic(s: Structure, budget: int = DEFAULT_BUDGET) -> bool:
    """Consistent Opponent behaviour implies consistent behaviour."""
    if s.polarity is None:
        raise UsageError("determinism needs a polarized structure")
    for x in _all_subsets(s.events, budget):
        if s.is_consistent(x):
            continue
        neg = frozenset(e for e in s.down_set(x) if s.pol(e) == NEG)
        if s.is_consistent(neg):
            return False
    return True


def deterministic_by_covers(s: Structure, budget: int = DEFAULT_BUDGET) -> bool:
    """Equivalent cover formulation: a Player move enabled alongside any
    other move extends jointly."""
    for x in configs(s, None, budget):
        en = enabled_events(s, x)
        for e1, e2 in itertools.combinations(en, 2):
            if POS in (s.pol(e1), s.pol(e2)) and not is_config(s, x | {e1, e2}):
                return False
    return True


# ---------------------------------------------------------------------------
# Isomorphism search
# ---------------------------------------------------------------------------

def find_iso(p: Structure, q: Structure,
             commute: Optional[tuple[Mapping[str, str], Mapping[str, str]]] = None,
             budget: int = DEFAULT_BUDGET) -> Optional[dict]:
    """A bijection respecting order, consistency, equivalence, polarity and
    (when `commute` supplies the two maps) the maps into a common game;
    None when there is none."""
    if p.kind != q.kind or len(p.events) != len(q.events):
        return None
    pc, qc = to_conflicts(p, budget), to_conflicts(q, budget)

    def signature(s: Structure, e: str, smap) -> tuple:
        return (s.pol(e) or "", len(s.cls(e)), len(s.down(e)) if s.kind != "general" else 0,
                smap.get(e, "") if smap else "")

    smap_p = dict(commute[0]) if commute else None
    smap_q = dict(commute[1]) if commute else None
    psig = {e: signature(pc, e, smap_p) for e in pc.events}
    qsig = {e: signature(qc, e, smap_q) for e in qc.events}
    if sorted(psig.values()) != sorted(qsig.values()):
        return None
    events = sorted(pc.events, key=lambda e: (psig[e], e))
    cand = {e: [w for w in qc.events if qsig[w] == psig[e]] for e in events}

    def ok_partial(assign: dict) -> bool:
        for e1, v1 in assign.items():
            for e2, v2 in assign.items():
                if pc.kind != "general":
                    if pc.leq(e1, e2) != qc.leq(v1, v2):
                        return False
                if pc.equiv(e1, e2) != qc.equiv(v1, v2):
                    return False
        return True

    def backtrack(i: int, assign: dict, used: set):
        if i == len(events):
            yield dict(assign)
            return
        e = events[i]
        for w in cand[e]:
            if w in used:
                continue
            assign[e] = w
            if ok_partial(assign):
                used.add(w)
                yield from backtrack(i + 1, assign, used)
                used.remove(w)
            del assign[e]

    for assign in backtrack(0, {}, set()):
        if frozenset(frozenset(assign[e] for e in c) for c in pc.conflicts) \
                != qc.conflicts:
            continue
        if pc.kind == "general":
            fwd = {frozenset(assign[e] for e in y) for y in
                   (set(c) for c in pc.consistent_sets(budget))}
            if fwd != set(qc.consistent_sets(budget)):
                continue
            good = True
            for x in pc.consistent_sets(budget):
                for e in pc.events:
                    if pc.enables(x, e) != qc.enables(frozenset(assign[i] for i in x),
                                                      assign[e]):
                        good = False
                        break
                if not good:
                    break
            if not good:
                continue
        return dict(sorted(assign.items()))
    return None


def iso_strategies(s1: Strategy, s2: Strategy,
                   game_rename: Optional[Mapping[str, str]] = None,
                   budget: int = DEFAULT_BUDGET) -> Optional[dict]:
    """Isomorphism of strategies: inner iso commuting with the maps to the
    game, after an optional renaming of s1's game into s2's."""
    m1 = dict(s1.sigma)
    if game_rename is not None:
        m1 = {e: game_rename[v] for e, v in m1.items()}
    return find_iso(s1.inner, s2.inner, commute=(m1, dict(s2.sigma)),
                    budget=budget)


# ---------------------------------------------------------------------------
# Bottom strategy
# ---------------------------------------------------------------------------

def bot_strategy(game: Structure, budget: int = DEFAULT_BUDGET) -> Strategy:
    """The minimum strategy: the Opponent-reachable part of the game (events
    whose causal history is purely Opponent) with the inclusion map."""
    validate_game(game)
    keep = [e for e in game.events
            if all(game.pol(c) == NEG for c in game.down(e))]
    sub = restrict_events(game, keep)
    inner = Structure(kind="edc", events=sub.events, causality=sub.causality,
                      enablings=frozenset(), conflicts=sub.conflicts,
                      consistent=sub.consistent,
                      classes=identity_partition(sub.events),
                      polarity=sub.polarity)
    return make_strategy(inner, game, {e: e for e in inner.events})


def par_strategies(s1: Strategy, s2: Strategy,
                   budget: int = DEFAULT_BUDGET) -> Strategy:
    """Juxtaposition of strategies: from A || C to B || D with the tags
    interleaved accordingly."""
    a, b = split_game(s1.game)
    c, d = split_game(s2.game)
    inner = par(s1.inner, s2.inner, budget)
    game = par(par(a, c, budget), par(b, d, budget), budget)

    def img(e: str) -> str:
        side, rest = untag(e)
        strat = s1 if side == "l" else s2
        gs, gr = untag(strat.apply(rest))
        return tag(gs, tag(side, gr))

    return make_strategy(inner, game, {e: img(e) for e in inner.events})
