"""Stochastic analysis of digit automata: classes, payoffs, variances.

A digit automaton becomes a Markov chain by putting probability 1/d on each
of the d outgoing edges.  Everything here is exact rational: strongly
connected components, recurrent classes and their periods, stationary
distributions, the coboundary decision (spanning-tree potential plus cycle
verification), per-step asymptotic variances via the Poisson equation, the
composed multi-digit chains, absorption probabilities and the Dobrushin
ergodic coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from . import linalg
from .automata import State, TauAutomaton, build_tau_automaton
from .substitution import Substitution, WeightVector, Word, matrix_of


@dataclass(frozen=True)
class ChainEdge:
    target: int
    prob: Fraction
    payoff: Fraction
    label: str = ""


@dataclass(frozen=True)
class ChainGraph:
    """A finite payoff-labelled stochastic digraph."""

    states: tuple
    state_labels: tuple[str, ...]
    edges: tuple[tuple[ChainEdge, ...], ...]

    def __post_init__(self):
        for i, group in enumerate(self.edges):
            total = sum((e.prob for e in group), Fraction(0))
            if total != 1:
                raise ValueError(f"outgoing probabilities at state {i} sum to {total} != 1")

    @property
    def n(self) -> int:
        return len(self.states)

    def kernel(self) -> tuple:
        """Canonical (target, payoff) -> probability kernel, for equality."""
        out = []
        for group in self.edges:
            merged: dict[tuple[int, Fraction], Fraction] = {}
            for e in group:
                key = (e.target, e.payoff)
                merged[key] = merged.get(key, Fraction(0)) + e.prob
            out.append(tuple(sorted(merged.items())))
        return tuple(out)

    def transition_matrix(self) -> list[list[Fraction]]:
        p = [[Fraction(0)] * self.n for _ in range(self.n)]
        for i, group in enumerate(self.edges):
            for e in group:
                p[i][e.target] += e.prob
        return p

    def to_dot(self, classes: Sequence["RecurrentClass"] = ()) -> str:
        palette = ["lightblue", "palegreen", "lightsalmon", "plum", "khaki", "lightpink"]
        color: dict[int, str] = {}
        for k, cls in enumerate(classes):
            for s in cls.states:
                color[s] = palette[k % len(palette)]
        lines = ["digraph chain {", "  rankdir=LR;"]
        for i in range(self.n):
            style = f', style=filled, fillcolor="{color[i]}"' if i in color else ""
            lines.append(f'  s{i} [label="{self.state_labels[i]}"{style}];')
        for i, group in enumerate(self.edges):
            for e in group:
                label = f"{e.label}:{e.payoff}" if e.label else str(e.payoff)
                lines.append(f'  s{i} -> s{e.target} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "states": list(self.state_labels),
            "edges": [
                {
                    "source": i,
                    "target": e.target,
                    "prob": str(e.prob),
                    "payoff": str(e.payoff),
                    "label": e.label,
                }
                for i, group in enumerate(self.edges)
                for e in group
            ],
        }


def chain_of(automaton: TauAutomaton) -> ChainGraph:
    """Uniform probability 1/d on each of the d outgoing edges."""
    d = automaton.d
    p = Fraction(1, d)
    groups = tuple(
        tuple(ChainEdge(e.target, p, e.payoff, str(e.m)) for e in group)
        for group in automaton.edges
    )
    labels = tuple(automaton.state_label(i) for i in range(len(automaton.states)))
    return ChainGraph(tuple(automaton.states), labels, groups)


def compose(first: ChainGraph, second: ChainGraph) -> ChainGraph:
    """Two-layer composition; parallel edges merged by (target, payoff)."""
    if first.states != second.states:
        raise ValueError("layer composition requires identical state spaces")
    groups = []
    for i in range(first.n):
        merged: dict[tuple[int, Fraction], Fraction] = {}
        for e1 in first.edges[i]:
            for e2 in second.edges[e1.target]:
                key = (e2.target, e1.payoff + e2.payoff)
                merged[key] = merged.get(key, Fraction(0)) + e1.prob * e2.prob
        groups.append(
            tuple(
                ChainEdge(t, prob, payoff)
                for (t, payoff), prob in sorted(merged.items())
            )
        )
    return ChainGraph(first.states, first.state_labels, tuple(groups))


def product_chain(
    sub: Substitution,
    gamma: WeightVector,
    n_layers: int,
    digit_block: int | Sequence[int],
) -> ChainGraph:
    """The composed chain of ``n_layers`` digit automata.

    ``digit_block`` is either the digit list (outermost layer first) or an
    integer in 0..d**N - 1 whose base-d digits (most significant first) give
    the layers.  All composite transition probabilities are d**-N.
    """
    d = len(sub.images[0])
    if isinstance(digit_block, int):
        if not 0 <= digit_block < d**n_layers:
            raise ValueError("digit block out of range")
        digits = []
        x = digit_block
        for _ in range(n_layers):
            digits.append(x % d)
            x //= d
        digits.reverse()
    else:
        digits = list(digit_block)
        if len(digits) != n_layers:
            raise ValueError("digit block length must equal the number of layers")
    layers = {}
    chain = None
    for tau in digits:
        if tau not in layers:
            layers[tau] = chain_of(build_tau_automaton(sub, gamma, tau))
        chain = layers[tau] if chain is None else compose(chain, layers[tau])
    assert chain is not None
    return chain


# ---------------------------------------------------------------------------
# recurrent classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecurrentClass:
    """A closed strongly connected component with its exact invariants."""

    states: tuple[int, ...]
    period: int
    stationary: dict[int, Fraction]
    coboundary: bool
    witness: dict


def strongly_connected_components(chain: ChainGraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative to survive deep graphs."""
    n = chain.n
    adj = [sorted({e.target for e in group}) for group in chain.edges]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(adj[w])))
                    advanced = True
                    break
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
    return sccs


def is_strongly_connected(chain: ChainGraph) -> bool:
    return len(strongly_connected_components(chain)) == 1


def weakly_connected_components(chain: ChainGraph) -> list[list[int]]:
    n = chain.n
    und: list[set[int]] = [set() for _ in range(n)]
    for i, group in enumerate(chain.edges):
        for e in group:
            und[i].add(e.target)
            und[e.target].add(i)
    seen = [False] * n
    comps = []
    for root in range(n):
        if seen[root]:
            continue
        comp = []
        frontier = [root]
        seen[root] = True
        while frontier:
            v = frontier.pop()
            comp.append(v)
            for w in und[v]:
                if not seen[w]:
                    seen[w] = True
                    frontier.append(w)
        comps.append(sorted(comp))
    return comps


def class_period(chain: ChainGraph, states: Sequence[int]) -> int:
    """gcd of cycle lengths inside a strongly connected set of states."""
    members = set(states)
    root = states[0]
    level = {root: 0}
    frontier = [root]
    g = 0
    while frontier:
        nxt = []
        for v in frontier:
            for e in chain.edges[v]:
                if e.target not in members:
                    continue
                if e.target in level:
                    g = gcd(g, level[v] + 1 - level[e.target])
                else:
                    level[e.target] = level[v] + 1
                    nxt.append(e.target)
        frontier = nxt
    return abs(g) if g else 0


def recurrent_classes(chain: ChainGraph) -> list[RecurrentClass]:
    """Closed SCCs of the chain with period, stationary law and coboundary."""
    out = []
    for comp in strongly_connected_components(chain):
        members = set(comp)
        closed = all(
            e.target in members for v in comp for e in chain.edges[v]
        )
        if not closed:
            continue
        stationary = _stationary(chain, comp)
        cob, witness = coboundary_on_class(chain, comp)
        out.append(
            RecurrentClass(tuple(comp), class_period(chain, comp), stationary, cob, witness)
        )
    out.sort(key=lambda c: c.states[0])
    return out


def transient_states(chain: ChainGraph, classes: Sequence[RecurrentClass]) -> list[int]:
    recurrent = {s for cls in classes for s in cls.states}
    return [s for s in range(chain.n) if s not in recurrent]


def _stationary(chain: ChainGraph, states: Sequence[int]) -> dict[int, Fraction]:
    """Unique stationary distribution of a closed class, exact solve."""
    local = {s: i for i, s in enumerate(states)}
    k = len(states)
    # rows: (P^T - I) pi = 0 plus normalization sum(pi) = 1
    a = [[Fraction(0)] * k for _ in range(k + 1)]
    for s in states:
        for e in chain.edges[s]:
            a[local[e.target]][local[s]] += e.prob
    for i in range(k):
        a[i][i] -= 1
    b = [Fraction(0)] * k
    a[k] = [Fraction(1)] * k
    b.append(Fraction(1))
    x = linalg.solve_consistent(a, b)
    assert all(v > 0 for v in x), "stationary distribution of a class must be positive"
    return {s: x[local[s]] for s in states}


def stationary(chain: ChainGraph, cls: RecurrentClass) -> dict[int, Fraction]:
    return dict(cls.stationary)


def expected_payoff(chain: ChainGraph, cls: RecurrentClass) -> Fraction:
    """Stationary expectation of the edge payoff, exact."""
    total = Fraction(0)
    for s in cls.states:
        pi = cls.stationary[s]
        for e in chain.edges[s]:
            total += pi * e.prob * e.payoff
    return total


def coboundary_on_class(chain: ChainGraph, states: Sequence[int]) -> tuple[bool, dict]:
    """Decide whether the payoff is a potential difference on the class.

    Assigns a potential along a directed spanning tree and verifies every
    class edge; on failure returns a directed cycle with nonzero payoff sum
    (such a cycle can be iterated, so path sums are unbounded).
    """
    members = set(states)
    root = min(states)
    h: dict[int, Fraction] = {root: Fraction(0)}
    parent: dict[int, tuple[int, ChainEdge]] = {}
    order = [root]
    frontier = [root]
    while frontier:
        v = frontier.pop()
        for e in chain.edges[v]:
            if e.target in members and e.target not in h:
                h[e.target] = h[v] + e.payoff
                parent[e.target] = (v, e)
                order.append(e.target)
                frontier.append(e.target)
    assert len(h) == len(members), "class must be strongly connected"
    for v in states:
        for e in chain.edges[v]:
            if e.target not in members:
                continue
            if h[e.target] - h[v] != e.payoff:
                cycle, payoffs, total = _nonzero_cycle_through(chain, members, h, parent, v, e)
                return False, {"cycle": cycle, "payoffs": payoffs, "sum": total}
    return True, {"potential": h}


def _tree_path(
    parent: Mapping[int, tuple[int, ChainEdge]], root: int, node: int
) -> tuple[list[int], list[Fraction]]:
    path = [node]
    payoffs: list[Fraction] = []
    while node != root:
        node, edge = parent[node]
        path.append(node)
        payoffs.append(edge.payoff)
    path.reverse()
    payoffs.reverse()
    return path, payoffs


def _nonzero_cycle_through(
    chain: ChainGraph,
    members: set[int],
    h: Mapping[int, Fraction],
    parent: Mapping[int, tuple[int, ChainEdge]],
    v: int,
    bad: ChainEdge,
) -> tuple[list[int], list[Fraction], Fraction]:
    """Produce a directed cycle with nonzero payoff sum from a failed edge.

    The tree path root->v has payoff sum h(v) by construction, so with Q any
    directed path target->root, the cycles (root->v, bad edge, Q) and
    (root->target, Q) have sums h(v)+payoff+sum(Q) and h(target)+sum(Q);
    were both zero the bad edge would satisfy the potential.
    """
    root = min(members)
    # shortest directed return path target -> root inside the class
    prev: dict[int, tuple[int, ChainEdge]] = {}
    frontier = [bad.target]
    seen = {bad.target}
    while root not in seen:
        nxt = []
        for u in frontier:
            for e in chain.edges[u]:
                if e.target in members and e.target not in seen:
                    seen.add(e.target)
                    prev[e.target] = (u, e)
                    nxt.append(e.target)
        frontier = nxt
    back = [root]
    back_payoffs: list[Fraction] = []
    node = root
    while node != bad.target:
        u, e = prev[node]
        back_payoffs.append(e.payoff)
        back.append(u)
        node = u
    back.reverse()
    back_payoffs.reverse()
    sum_back = sum(back_payoffs, Fraction(0))
    to_v, to_v_payoffs = _tree_path(parent, root, v)
    total1 = h[v] + bad.payoff + sum_back
    if total1 != 0:
        return to_v + back, to_v_payoffs + [bad.payoff] + back_payoffs, total1
    to_t, to_t_payoffs = _tree_path(parent, root, bad.target)
    total2 = h[bad.target] + sum_back
    assert total2 != 0, "one of the two candidate cycles must have nonzero sum"
    return to_t + back[1:], to_t_payoffs + back_payoffs, total2


def asymptotic_variance(chain: ChainGraph, cls: RecurrentClass) -> Fraction:
    """Per-step variance of the accumulated payoff on a recurrent class.

    Solves the Poisson equation (I - P) h = mean payoff per state and returns
    sum_s pi(s) sum_e p(e) (v(e) + h(target) - h(source))^2, which is the
    martingale-increment second moment; zero exactly when the payoff is a
    coboundary.  Rejects classes with nonzero stationary mean.
    """
    mean = expected_payoff(chain, cls)
    if mean != 0:
        raise ValueError(f"class has nonzero stationary mean {mean}")
    states = cls.states
    local = {s: i for i, s in enumerate(states)}
    k = len(states)
    gbar = [Fraction(0)] * k
    for s in states:
        for e in chain.edges[s]:
            gbar[local[s]] += e.prob * e.payoff
    # (I - P) h = gbar with h(root) = 0 pinned; consistent since pi.gbar = 0
    a = [[Fraction(0)] * k for _ in range(k + 1)]
    for s in states:
        i = local[s]
        a[i][i] += 1
        for e in chain.edges[s]:
            a[i][local[e.target]] -= e.prob
    a[k][0] = Fraction(1)
    b = gbar + [Fraction(0)]
    h = linalg.solve_consistent(a, b)
    total = Fraction(0)
    for s in states:
        pi = cls.stationary[s]
        for e in chain.edges[s]:
            incr = e.payoff + h[local[e.target]] - h[local[s]]
            total += pi * e.prob * incr * incr
    return total


def absorption_probabilities(
    chain: ChainGraph,
    classes: Sequence[RecurrentClass],
    initial: Mapping[int, Fraction],
) -> list[Fraction]:
    """Exact probability of absorption into each class from ``initial``."""
    class_of: dict[int, int] = {}
    for k, cls in enumerate(classes):
        for s in cls.states:
            class_of[s] = k
    trans = transient_states(chain, classes)
    t_index = {s: i for i, s in enumerate(trans)}
    nt = len(trans)
    absorb: list[list[Fraction]] = [[Fraction(0)] * len(classes) for _ in range(nt)]
    if nt:
        # (I - Q) B = R, solved exactly column by column
        a = [[Fraction(0)] * nt for _ in range(nt)]
        r = [[Fraction(0)] * len(classes) for _ in range(nt)]
        for s in trans:
            i = t_index[s]
            a[i][i] += 1
            for e in chain.edges[s]:
                if e.target in t_index:
                    a[i][t_index[e.target]] -= e.prob
                else:
                    r[i][class_of[e.target]] += e.prob
        for k in range(len(classes)):
            col = linalg.solve_consistent(a, [row[k] for row in r])
            for i in range(nt):
                absorb[i][k] = col[i]
    out = [Fraction(0)] * len(classes)
    for s, p in initial.items():
        if p == 0:
            continue
        if s in class_of:
            out[class_of[s]] += p
        else:
            for k in range(len(classes)):
                out[k] += p * absorb[t_index[s]][k]
    return out


def ergodic_coefficient(p: Sequence[Sequence[Fraction]]) -> Fraction:
    """Dobrushin coefficient 1 - max_{a,b,c} |p(a,c) - p(b,c)|, exact."""
    n = len(p)
    delta = Fraction(0)
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(n):
                diff = abs(p[a][c] - p[b][c])
                if diff > delta:
                    delta = diff
    return 1 - delta


# ---------------------------------------------------------------------------
# letter, pair and block statistics of the subshift
# ---------------------------------------------------------------------------


def letter_frequencies(sub: Substitution) -> list[Fraction]:
    """Exact letter frequencies: the normalized left eigenvector at d."""
    d = len(sub.images[0])
    if set(sub.image_lengths()) != {d}:
        raise ValueError("letter frequencies require constant length")
    m = matrix_of(sub)
    n = sub.alphabet_size
    shifted = [
        [Fraction(m[j][i]) - (d if i == j else 0) for j in range(n)] for i in range(n)
    ]
    v = linalg.kernel_vector(shifted)
    assert v is not None, "d is always an eigenvalue for constant length d"
    total = sum(v)
    freqs = [x / total for x in v]
    if any(f <= 0 for f in freqs):
        raise ValueError("letter frequencies must be positive; is the substitution primitive?")
    return freqs


def factor_pairs(sub: Substitution) -> set[Word]:
    """All length-2 factors of the subshift language (closure computation)."""
    pairs: set[Word] = set()
    frontier: list[Word] = [bytes([a]) for a in range(sub.alphabet_size)]
    seen: set[Word] = set(frontier)
    while frontier:
        u = frontier.pop()
        image = sub.apply(u)
        for i in range(len(image) - 1):
            p = image[i : i + 2]
            if p not in pairs:
                pairs.add(p)
                if p not in seen:
                    seen.add(p)
                    frontier.append(p)
    return pairs


def factor_blocks(sub: Substitution, k: int) -> list[Word]:
    """All length-k factors of the language, sorted."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return [bytes([a]) for a in range(sub.alphabet_size)]
    if k == 2:
        return sorted(factor_pairs(sub))
    d = len(sub.images[0])
    if set(sub.image_lengths()) != {d}:
        raise ValueError("block enumeration implemented for constant length only")
    m = (k + d - 2) // d + 1  # span of a k-window over source blocks
    sources = factor_blocks(sub, m)
    blocks: set[Word] = set()
    for src in sources:
        image = sub.apply(src)
        for i in range(len(image) - k + 1):
            blocks.add(image[i : i + k])
    return sorted(blocks)


def block_frequencies(sub: Substitution, k: int) -> dict[Word, Fraction]:
    """Exact k-block frequencies via the induced block chain.

    Each block B moves to the d windows of sigma(B) starting at offsets
    0..d-1; the chain restricted to language blocks is irreducible for a
    primitive substitution and its stationary law gives the frequencies.
    """
    d = len(sub.images[0])
    blocks = factor_blocks(sub, k)
    index = {b: i for i, b in enumerate(blocks)}
    p = Fraction(1, d)
    groups = []
    for b in blocks:
        image = sub.apply(b)
        group = []
        for off in range(d):
            window = image[off : off + k]
            group.append(ChainEdge(index[window], p, Fraction(0), str(off)))
        groups.append(tuple(group))
    chain = ChainGraph(tuple(blocks), tuple(sub.render(b) for b in blocks), tuple(groups))
    classes = recurrent_classes(chain)
    if len(classes) != 1 or len(classes[0].states) != len(blocks):
        raise ValueError("block chain is not irreducible; substitution must be primitive")
    return {blocks[s]: q for s, q in classes[0].stationary.items()}


@dataclass(frozen=True)
class InitialDistribution:
    """Law of the initial automaton state (a, V) under the cylinder measure.

    Derived from exact (d+1)-block frequencies: a block W maps to the state
    (W[0], (W[tau0], W[tau0+1])) where tau0 is the leading digit of the time
    parameter.
    """

    tau0: int
    probs: dict[State, Fraction]
    block_probs: dict[Word, Fraction]

    def __post_init__(self):
        total = sum(self.probs.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"initial distribution has mass {total} != 1")


def initial_distribution(sub: Substitution, gamma: WeightVector, tau0: int) -> InitialDistribution:
    """Exact initial state law for a leading digit tau0 in 1..d-1."""
    d = len(sub.images[0])
    if set(sub.image_lengths()) != {d}:
        raise ValueError("initial distribution requires constant length")
    if not 1 <= tau0 <= d - 1:
        raise ValueError("leading digit must lie in 1..d-1")
    freqs = block_frequencies(sub, d + 1)
    probs: dict[State, Fraction] = {}
    for w, q in freqs.items():
        state: State = (w[0], (w[tau0], w[tau0 + 1]))
        probs[state] = probs.get(state, Fraction(0)) + q
    return InitialDistribution(tau0, probs, freqs)


def initial_state_indices(
    chain: ChainGraph, init: InitialDistribution
) -> dict[int, Fraction]:
    """Map an initial distribution onto chain state indices."""
    index = {s: i for i, s in enumerate(chain.states)}
    return {index[s]: p for s, p in init.probs.items()}


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def chain_report(
    chain: ChainGraph,
    initial: Mapping[int, Fraction] | None = None,
) -> dict:
    """Full JSON-ready classification of a chain."""
    classes = recurrent_classes(chain)
    report_classes = []
    for cls in classes:
        mean = expected_payoff(chain, cls)
        entry = {
            "states": [chain.state_labels[s] for s in cls.states],
            "period": cls.period,
            "coboundary": cls.coboundary,
            "stationary": {chain.state_labels[s]: str(q) for s, q in cls.stationary.items()},
            "expected_payoff": str(mean),
        }
        if mean == 0:
            entry["variance"] = str(asymptotic_variance(chain, cls))
        report_classes.append(entry)
    report = {
        "n_states": chain.n,
        "strongly_connected": is_strongly_connected(chain),
        "weak_components": len(weakly_connected_components(chain)),
        "classes": report_classes,
        "transient": [chain.state_labels[s] for s in transient_states(chain, classes)],
        "ergodic_coefficient": str(ergodic_coefficient(chain.transition_matrix())),
    }
    if initial is not None:
        probs = absorption_probabilities(chain, classes, initial)
        report["absorption_probabilities"] = [str(p) for p in probs]
    return report
