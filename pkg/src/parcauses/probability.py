"""Configuration-valuations with exact rational arithmetic, drop-condition
validation, probabilistic composition and push-forward, probabilistic sum,
conjunction by pullback, and the duplication strategy.

No floating point anywhere: drop conditions are alternating sums where
rounding would create false verdicts, so every probability is a Fraction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (BudgetError, InternalError, UndefinedConditionalError,
                     UsageError)
from .games import (NEG, POS, CompositionResult, Strategy, bot_strategy,
                    compose, dual, empty_game, is_race_free, make_strategy,
                    par, pullback_edc, tag, untag, validate_game)
from .structures import (DEFAULT_BUDGET, Structure, StructMap, ValidationReport,
                         config_key, configs, is_config, make_map, make_report,
                         minimal_conflicts, sorted_configs, transitive_reduction,
                         validate_map)


def rational(x) -> Fraction:
    """Exact rational from int/Fraction/'num/den' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise UsageError(f"not an exact rational: {x!r}")


@dataclass(frozen=True)
class Valuation:
    """A total table from finite configurations to [0,1] rationals."""

    values: tuple  # ((sorted config tuple, Fraction), ...)

    def __call__(self, x: Iterable[str]) -> Fraction:
        key = tuple(sorted(x))
        table = dict(self.values)
        if key not in table:
            raise UsageError(f"valuation undefined on {key}")
        return table[key]

    def domain(self) -> list[frozenset]:
        return sorted_configs(frozenset(k) for k, _ in self.values)

    def to_json(self) -> dict:
        return {"complete_by_lmc": False,
                "values": [{"config": list(k), "value": f"{v.numerator}/{v.denominator}"}
                           for k, v in sorted(self.values)]}


def make_valuation(table: Mapping) -> Valuation:
    vals = tuple(sorted((tuple(sorted(k)), rational(v)) for k, v in table.items()))
    return Valuation(values=vals)


def constant_one(s: Structure, budget: int = DEFAULT_BUDGET) -> Valuation:
    return make_valuation({tuple(sorted(x)): Fraction(1)
                           for x in configs(s, None, budget)})


def complete_by_lmc(s: Structure, partial: Mapping,
                    budget: int = DEFAULT_BUDGET) -> Valuation:
    """Fill a partial table using the lmc completion v(y) := v(x) for
    x obtained from y by removing one Opponent event; the empty
    configuration gets 1.  Completion proceeds by ascending size with
    canonical tie-breaking so the result is deterministic."""
    table: dict[tuple, Fraction] = {tuple(sorted(k)): rational(v)
                                    for k, v in partial.items()}
    cfgs = configs(s, None, budget)
    table.setdefault((), Fraction(1))
    for x in cfgs:
        key = tuple(sorted(x))
        if key in table:
            continue
        for e in sorted(x):
            if s.pol(e) == NEG:
                y = x - {e}
                ykey = tuple(sorted(y))
                if is_config(s, y) and ykey in table:
                    table[key] = table[ykey]
                    break
        else:
            raise UsageError(f"cannot complete valuation at {key} by lmc")
    extra = set(table) - {tuple(sorted(x)) for x in cfgs}
    if extra:
        raise UsageError(f"valuation mentions non-configurations: {sorted(extra)}")
    return make_valuation(table)


# ---------------------------------------------------------------------------
# Drop functions
# ---------------------------------------------------------------------------

def drop(v: Valuation, y: Iterable[str], xs: Sequence[Iterable[str]]) -> Fraction:
    """Inclusion-exclusion drop across the generalized interval from y to
    the xs; index sets whose union is not a configuration contribute no
    term."""
    y = frozenset(y)
    xs = [frozenset(x) for x in xs]
    for x in xs:
        if not y <= x:
            raise UsageError("drop requires y contained in every x_i")
    dom = {frozenset(k) for k, _ in v.values}
    if y not in dom or any(x not in dom for x in xs):
        raise UsageError("drop arguments must be configurations in the domain")
    total = v(y)
    for r in range(1, len(xs) + 1):
        for combo in itertools.combinations(range(len(xs)), r):
            u = frozenset().union(*(xs[i] for i in combo))
            if u in dom:
                total -= (-1) ** (r + 1) * v(u)
    return total


def validate_valuation(s: Structure, v: Valuation,
                       budget: int = DEFAULT_BUDGET) -> ValidationReport:
    """Normalization, lmc and the +ve drop condition, with witnesses; also
    reports whether the one-step Markov reading of lmc holds (causally
    independent Player/Opponent moves are probabilistically independent)."""
    if s.polarity is None:
        raise UsageError("valuations live on polarized structures")
    cfgs = configs(s, None, budget)
    dom = {tuple(sorted(x)) for x in cfgs}
    have = {k for k, _ in v.values}
    if dom != have:
        raise UsageError("valuation must be total on the configurations "
                         f"(missing {sorted(dom - have)[:3]}, extra {sorted(have - dom)[:3]})")
    violations = []
    if v(frozenset()) != 1:
        violations.append({"axiom": "normalized", "witness": (),
                           "value": str(v(frozenset()))})
    for x in cfgs:
        val = v(x)
        if val < 0 or val > 1:
            violations.append({"axiom": "unit-interval", "witness": tuple(sorted(x)),
                               "value": f"{val.numerator}/{val.denominator}"})
            break
    for x in cfgs:
        for y in cfgs:
            if x < y and all(s.pol(e) == NEG for e in y - x) and v(x) != v(y):
                violations.append({"axiom": "lmc",
                                   "witness": (tuple(sorted(x)), tuple(sorted(y)))})
                break
        else:
            continue
        break

    done = False
    for y in cfgs:
        ups = [x for x in cfgs if y < x and all(s.pol(e) == POS for e in x - y)]
        if 2 ** len(ups) > budget:
            raise BudgetError("drop-condition search exceeded budget")
        for r in range(1, len(ups) + 1):
            for combo in itertools.combinations(ups, r):
                d = drop(v, y, list(combo))
                if d < 0:
                    violations.append({
                        "axiom": "positive-drop",
                        "witness": tuple(sorted(y)),
                        "intervals": tuple(tuple(sorted(x)) for x in combo),
                        "value": f"{d.numerator}/{d.denominator}"})
                    done = True
                    break
            if done:
                break
        if done:
            break

    markov = True
    for x in cfgs:
        for p in s.events:
            for o in s.events:
                if p == o or s.pol(p) != POS or s.pol(o) != NEG:
                    continue
                if p in x or o in x:
                    continue
                if not (is_config(s, x | {p}) and is_config(s, x | {o})
                        and is_config(s, x | {p, o})):
                    continue
                if v(x | {p, o}) * v(x) != v(x | {p}) * v(x | {o}):
                    markov = False
    return make_report(violations, {"lmc-markov": markov})


def validate_valuation_unpolarized(s: Structure, v: Valuation,
                                   budget: int = DEFAULT_BUDGET) -> ValidationReport:
    """The polarity-free special case: normalization plus nonnegative drops
    across all inclusions (an independent cross-check; coincides with
    validate_valuation when every event is positive)."""
    cfgs = configs(s, None, budget)
    violations = []
    if v(frozenset()) != 1:
        violations.append({"axiom": "normalized", "witness": ()})
    for y in cfgs:
        ups = [x for x in cfgs if y < x]
        if 2 ** len(ups) > budget:
            raise BudgetError("drop-condition search exceeded budget")
        for r in range(1, len(ups) + 1):
            for combo in itertools.combinations(ups, r):
                if drop(v, y, list(combo)) < 0:
                    violations.append({"axiom": "nonnegative-drop",
                                       "witness": tuple(sorted(y)),
                                       "intervals": tuple(tuple(sorted(x)) for x in combo)})
                    return make_report(violations)
    return make_report(violations)


def conditional(v: Valuation, x: Iterable[str], y: Iterable[str]) -> Fraction:
    """Prob(y | x) = v(y)/v(x) for x contained in y."""
    x, y = frozenset(x), frozenset(y)
    if not x <= y:
        raise UsageError("conditional requires x contained in y")
    vx = v(x)
    if vx == 0:
        raise UndefinedConditionalError("conditioning on probability zero")
    return v(y) / vx


# ---------------------------------------------------------------------------
# Probabilistic strategies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbStrategy:
    strategy: Strategy
    valuation: Valuation


def validate_prob_strategy(p: ProbStrategy, budget: int = DEFAULT_BUDGET
                           ) -> ValidationReport:
    violations = []
    if not is_race_free(p.strategy.game):
        violations.append({"axiom": "game-race-free", "witness": ()})
    rep = validate_valuation(p.strategy.inner, p.valuation, budget)
    if not rep.valid:
        violations.extend(dict(w) for w in
                          (dict(t) for t in rep.violations))
    return make_report(violations)


def compose_valuations(sp: ProbStrategy, tp: ProbStrategy,
                       budget: int = DEFAULT_BUDGET
                       ) -> tuple[ProbStrategy, CompositionResult]:
    """Compose the strategies and give each composite configuration the
    product of the branch valuations on its minimal pullback witness; the
    result is revalidated and must pass."""
    comp = compose(sp.strategy, tp.strategy, budget)
    inner = comp.strategy.inner
    table = {}
    for x in configs(inner, None, budget):
        lifted = comp.lift(x)
        table[tuple(sorted(x))] = (sp.valuation(comp.s_part(lifted))
                                   * tp.valuation(comp.t_part(lifted)))
    v = make_valuation(table)
    rep = validate_valuation(inner, v, budget)
    if not rep.valid:
        raise InternalError(f"composed valuation fails validation: {rep.to_json()}")
    return ProbStrategy(strategy=comp.strategy, valuation=v), comp


def pullback_config_valuation(comp: CompositionResult, vs: Valuation,
                              vt: Valuation, x: Iterable[str]) -> Fraction:
    """Product valuation on a configuration of the synchronisation pullback
    itself (before hiding)."""
    lifted = frozenset(x)
    return vs(comp.s_part(lifted)) * vt(comp.t_part(lifted))


# ---------------------------------------------------------------------------
# Rigid 2-cells and push-forward
# ---------------------------------------------------------------------------

def check_2cell(f: StructMap, src: Strategy, dst: Strategy,
                budget: int = DEFAULT_BUDGET) -> None:
    """A 2-cell that supports push-forward: total, rigid (preserves causal
    order), a map of the underlying plain event structures (so locally
    injective on configurations), polarity-preserving, commuting with the
    maps into the game."""
    if f.source != src.inner or f.target != dst.inner:
        raise UsageError("2-cell endpoints do not match the strategies")
    if src.game != dst.game:
        raise UsageError("2-cell requires a common game")
    for e in f.source.events:
        if f(e) is None:
            raise UsageError("2-cell must be total")
        if dst.apply(f(e)) != src.apply(e):
            raise UsageError("2-cell must commute with the strategy maps")
        if f.source.pol(e) != f.target.pol(f(e)):
            raise UsageError("2-cell must preserve polarity")
    for a in f.source.events:
        for b in f.source.events:
            if f.source.leq(a, b) and not f.target.leq(f(a), f(b)):
                raise UsageError("push-forward requires a rigid map")
    for x in configs(f.source, None, budget):
        if not is_config(f.target, f.image(x)):
            raise UsageError("2-cell must send configurations to configurations")
        pts = sorted(x)
        if len({f(e) for e in pts}) != len(pts):
            raise UsageError("push-forward requires a map of plain event "
                             "structures (injective on configurations)")


def push_forward(f: StructMap, src: Strategy, dst: Strategy, v: Valuation,
                 budget: int = DEFAULT_BUDGET) -> Valuation:
    """fv(y) = sum of v over the fibre of y; valid by the push-forward
    theorem for rigid 2-cells, and revalidated here."""
    check_2cell(f, src, dst, budget)
    table = {tuple(sorted(y)): Fraction(0)
             for y in configs(dst.inner, None, budget)}
    for x in configs(src.inner, None, budget):
        key = tuple(sorted(f.image(x)))
        table[key] += v(x)
    out = make_valuation(table)
    rep = validate_valuation(dst.inner, out, budget)
    if not rep.valid:
        raise InternalError(f"push-forward fails validation: {rep.to_json()}")
    return out


def is_prob_2cell(f: StructMap, src: ProbStrategy, dst: ProbStrategy,
                  budget: int = DEFAULT_BUDGET) -> bool:
    """2-cell of probabilistic strategies: push-forward dominated by the
    target valuation."""
    fv = push_forward(f, src.strategy, dst.strategy, src.valuation, budget)
    return all(fv(x) <= dst.valuation(x)
               for x in configs(dst.strategy.inner, None, budget))


# ---------------------------------------------------------------------------
# Probabilistic sum
# ---------------------------------------------------------------------------

def prob_sum(branches: Sequence[ProbStrategy], weights: Sequence,
             game: Optional[Structure] = None,
             budget: int = DEFAULT_BUDGET) -> ProbStrategy:
    """Sub-probability mixture of strategies over one game.

    Convention (the sum itself is inherited from earlier work): Opponent
    events with the same game move and the same (already merged) causal
    history are glued across branches, preserving receptivity and
    non-redundancy; Player moves of distinct branches are made mutually
    inconsistent; the valuation scales each branch's Player probabilities
    by its weight.  The empty sum is the minimum strategy.
    """
    ws = [rational(w) for w in weights]
    if len(ws) != len(branches):
        raise UsageError("one weight per branch")
    if sum(ws, Fraction(0)) > 1:
        raise UsageError("weights must sum to at most 1")
    if not branches:
        if game is None:
            raise UsageError("empty sum needs the game")
        bot = bot_strategy(game, budget)
        return ProbStrategy(strategy=bot, valuation=constant_one(bot.inner, budget))
    game = branches[0].strategy.game
    for b in branches:
        if b.strategy.game != game:
            raise UsageError("sum branches must share the game")

    events = [(i, e) for i, b in enumerate(branches)
              for e in b.strategy.inner.events]
    parent = {ev: ev for ev in events}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    def strat(i):
        return branches[i].strategy

    def causes(ev):
        i, e = ev
        inner = strat(i).inner
        return frozenset(find((i, c)) for c in inner.down(e) - {e})

    changed = True
    while changed:
        changed = False
        for ev1, ev2 in itertools.combinations(events, 2):
            i1, e1 = ev1
            i2, e2 = ev2
            if find(ev1) == find(ev2):
                continue
            if strat(i1).inner.pol(e1) != NEG or strat(i2).inner.pol(e2) != NEG:
                continue
            if strat(i1).apply(e1) != strat(i2).apply(e2):
                continue
            if causes(ev1) == causes(ev2):
                union(ev1, ev2)
                changed = True

    reps = sorted({find(ev) for ev in events})
    name = {r: f"b{r[0]}:{r[1]}" for r in reps}
    members: dict[tuple, list] = {r: [] for r in reps}
    for ev in events:
        members[find(ev)].append(ev)

    down = {}
    for r in reps:
        d = set()
        for (i, e) in members[r]:
            d |= {find((i, c)) for c in strat(i).inner.down(e) - {e}}
        down[r] = frozenset(name[c] for c in d) | {name[r]}
    caus = transitive_reduction([name[r] for r in reps],
                                {name[r]: down[r] for r in reps})
    pol = {name[r]: strat(r[0]).inner.pol(r[1]) for r in reps}
    img = {name[r]: strat(r[0]).apply(r[1]) for r in reps}
    by_name = {name[r]: r for r in reps}

    def branch_part(names_set, i):
        out = set()
        for n in names_set:
            for (j, e) in members[by_name[n]]:
                if j == i:
                    out.add(e)
        return frozenset(out)

    full_down = {}
    base = {name[r]: down[r] for r in reps}

    def closure(xs):
        out = set()
        for n in xs:
            out |= base[n]
        return frozenset(out)

    def consistent(xs: frozenset) -> bool:
        cl = closure(xs)
        pos_branches = {by_name[n][0] for n in cl if pol[n] == POS}
        if len(pos_branches) > 1:
            return False
        for i in range(len(branches)):
            if not strat(i).inner.is_consistent(branch_part(cl, i)):
                return False
        return True

    names_sorted = tuple(sorted(name[r] for r in reps))
    confl = minimal_conflicts(names_sorted, consistent, budget)

    cls_parent = {n: n for n in names_sorted}

    def cfind(x):
        while cls_parent[x] != x:
            cls_parent[x] = cls_parent[cls_parent[x]]
            x = cls_parent[x]
        return x

    for n1, n2 in itertools.combinations(names_sorted, 2):
        if img[n1] == img[n2]:
            cls_parent[cfind(n1)] = cfind(n2)
        else:
            (i1, e1), (i2, e2) = by_name[n1], by_name[n2]
            if i1 == i2 and strat(i1).inner.equiv(e1, e2):
                cls_parent[cfind(n1)] = cfind(n2)
    cls: dict[str, set] = {}
    for n in names_sorted:
        cls.setdefault(cfind(n), set()).add(n)

    inner = Structure(kind="edc", events=names_sorted, causality=caus,
                      enablings=frozenset(), conflicts=confl, consistent=None,
                      classes=frozenset(frozenset(v) for v in cls.values()),
                      polarity=tuple(sorted(pol.items())))
    strat_sum = make_strategy(inner, game, img)

    table = {}
    for x in configs(inner, None, budget):
        pos_b = {by_name[n][0] for n in x if pol[n] == POS}
        if not pos_b:
            table[tuple(sorted(x))] = Fraction(1)
        else:
            i = pos_b.pop()
            table[tuple(sorted(x))] = ws[i] * branches[i].valuation(branch_part(x, i))
    return ProbStrategy(strategy=strat_sum, valuation=make_valuation(table))


# ---------------------------------------------------------------------------
# Conjunction
# ---------------------------------------------------------------------------

def conjunction(s1: Strategy, s2: Strategy,
                budget: int = DEFAULT_BUDGET) -> Strategy:
    """Pullback of two strategies over the same game: plays only behaviour
    both strategies agree on."""
    if s1.game != s2.game:
        raise UsageError("conjunction needs a common game")
    if not s1.game.has_identity_equivalence():
        raise UsageError("conjunction needs a game with identity equivalence")
    pb = pullback_edc(s1.map(), s2.map(), budget)
    img = {p: s1.apply(pb.proj1(p)) for p in pb.structure.events}
    pol = tuple(sorted((p, s1.game.pol(img[p])) for p in pb.structure.events))
    inner = Structure(kind="edc", events=pb.structure.events,
                      causality=pb.structure.causality, enablings=frozenset(),
                      conflicts=pb.structure.conflicts,
                      consistent=pb.structure.consistent,
                      classes=pb.structure.classes, polarity=pol)
    return make_strategy(inner, s1.game, img)


# ---------------------------------------------------------------------------
# Duplication
# ---------------------------------------------------------------------------

def _component_structures(a: Structure):
    """(tagging, polarity) data for the three components of
    dual(A) || (A || A)."""
    tags = {0: lambda e: tag("l", e),
            1: lambda e: tag("r", tag("l", e)),
            2: lambda e: tag("r", tag("r", e))}
    return tags


def duplication(a: Structure, budget: int = DEFAULT_BUDGET) -> Strategy:
    """The strategy from A to A || A whose Player moves on the left may be
    caused in parallel by either right-hand copy: events are the prime
    orders of balanced triples with a choice function, ordered by rigid
    inclusion, consistent by image, equivalent when they share a top."""
    validate_game(a)
    if not is_race_free(a):
        raise UsageError("duplication requires a race-free game")
    cfgs = configs(a, None, budget)
    game = par(dual(a), par(a, a, budget), budget)
    tags = _component_structures(a)

    def build(x, y1, y2, chi):
        elems = sorted({(0, e) for e in x} | {(1, e) for e in y1}
                       | {(2, e) for e in y2})
        idx = {el: k for k, el in enumerate(elems)}
        n = len(elems)
        adj = [0] * n
        for (ci, e1) in elems:
            for (cj, e2) in elems:
                if ci == cj and e1 != e2 and a.leq(e1, e2):
                    adj[idx[(cj, e2)]] |= 1 << idx[(ci, e1)]
        for e in y1:
            if a.pol(e) == POS:
                adj[idx[(1, e)]] |= 1 << idx[(0, e)]
        for e in y2:
            if a.pol(e) == POS:
                adj[idx[(2, e)]] |= 1 << idx[(0, e)]
        for e in x:
            if a.pol(e) == NEG:
                adj[idx[(0, e)]] |= 1 << idx[(chi[e], e)]
        changed = True
        while changed:
            changed = False
            for j in range(n):
                for i in range(n):
                    if adj[j] & (1 << i) and adj[i] & ~adj[j]:
                        adj[j] |= adj[i]
                        changed = True
        for j in range(n):
            if adj[j] & (1 << j):
                return None
        return elems, tuple(adj)

    seen = {}
    for x in cfgs:
        neg_x = sorted(e for e in x if a.pol(e) == NEG)
        for y1 in cfgs:
            for y2 in cfgs:
                if any(a.pol(e) == POS and e not in x for e in y1 | y2):
                    continue
                if any(e not in y1 and e not in y2 for e in neg_x):
                    continue
                choices = []
                for e in neg_x:
                    opts = [i for i in (1, 2) if e in (y1 if i == 1 else y2)]
                    choices.append([(e, i) for i in opts])
                for assignment in itertools.product(*choices):
                    chi = dict(assignment)
                    built = build(x, y1, y2, chi)
                    if built is None:
                        continue
                    elems, adj = built
                    n = len(elems)
                    if n == 0:
                        continue
                    full = (1 << n) - 1
                    tops = [i for i in range(n) if adj[i] | (1 << i) == full]
                    if len(tops) != 1:
                        continue
                    order = frozenset((elems[i], elems[j])
                                      for j in range(n) for i in range(n)
                                      if adj[j] & (1 << i))
                    key = (frozenset(elems), order)
                    if key not in seen:
                        seen[key] = (elems, order, elems[tops[0]])

    items = sorted(seen.values(),
                   key=lambda t: (len(t[0]), sorted(t[0]), sorted(t[1])))
    names = []
    tops = []
    sets = []
    orders = []
    for k, (elems, order, top) in enumerate(items):
        ci, e = top
        names.append(f"p{k}:{tags[ci](e)}")
        tops.append(top)
        sets.append(frozenset(elems))
        orders.append(order)

    def rigid_incl(i, j) -> bool:
        if not sets[i] <= sets[j]:
            return False
        within = {(u, v) for (u, v) in orders[j] if u in sets[i] and v in sets[i]}
        if within != orders[i]:
            return False
        below = {u for (u, v) in orders[j] if v in sets[i]}
        return below <= sets[i]

    down = {}
    for i in range(len(items)):
        down[names[i]] = frozenset(names[j] for j in range(len(items))
                                   if rigid_incl(j, i))
    caus = transitive_reduction(names, down)

    def consistent(xs: frozenset) -> bool:
        cl = set()
        for nm in xs:
            cl |= down[nm]
        image = {tops[names.index(nm)] for nm in cl}
        for comp in (0, 1, 2):
            part = frozenset(e for (c, e) in image if c == comp)
            if not a.is_consistent(part):
                return False
        return True

    confl = minimal_conflicts(tuple(sorted(names)), consistent, budget)
    classes: dict[tuple, set] = {}
    for k, nm in enumerate(names):
        classes.setdefault(tops[k], set()).add(nm)
    pol = {}
    img = {}
    for k, nm in enumerate(names):
        ci, e = tops[k]
        img[nm] = tags[ci](e)
        pol[nm] = game.pol(img[nm])
    inner = Structure(kind="edc", events=tuple(sorted(names)), causality=caus,
                      enablings=frozenset(), conflicts=confl, consistent=None,
                      classes=frozenset(frozenset(v) for v in classes.values()),
                      polarity=tuple(sorted(pol.items())))
    return make_strategy(inner, game, img)


def duplication_prob(a: Structure, budget: int = DEFAULT_BUDGET
                     ) -> Optional[ProbStrategy]:
    """Wraps duplication with the constant-1 valuation when the game is
    deterministic for Opponent (so the strategy is deterministic); None
    otherwise."""
    from .games import is_deterministic
    strat = duplication(a, budget)
    if not is_deterministic(dual(a), budget):
        return None
    return ProbStrategy(strategy=strat, valuation=constant_one(strat.inner, budget))
