"""The family of digit automata driving ergodic-sum bookkeeping.

For a constant-length-d substitution, split every image at position m:

    sigma(w) = P(w, m) + c(w, m) + S(w, m),   |P(w, m)| = m - 1.

The automaton with shift digit tau lives on states (a, V) with V a pair of
letters; the edge with label m goes to

    ( c(a, m), c(V, m+tau) c(V, m+tau+1) )

carrying payoff gamma(S(a, m)) + gamma(P(V, m+tau)), where sigma acts on the
pair V by concatenation (length 2d, so both target letters always exist --
asserted, not assumed).  For tau = 0 the second letter of V is irrelevant
and a simplified automaton on states (a, b) is available.

The synchronization predicates classify which of these graphs can keep the
two tracked positions forever distinct.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .substitution import Substitution, WeightVector, Word, gamma_of_word, matrix_of

State = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class SplitDecomposition:
    """sigma(word) split at 1-based position m into prefix, center, suffix."""

    word: Word
    position: int
    prefix: Word
    center: int
    suffix: Word


def split_image(sub: Substitution, w: Word, m: int) -> SplitDecomposition:
    """Split sigma(w) at 1-based position m."""
    image = sub.apply(w)
    if not (1 <= m <= len(image)):
        raise ValueError(f"position {m} outside sigma(word) of length {len(image)}")
    return SplitDecomposition(w, m, image[: m - 1], image[m - 1], image[m:])


@dataclass(frozen=True)
class AutomatonEdge:
    source: int
    m: int
    target: int
    payoff: Fraction


@dataclass(frozen=True)
class TauAutomaton:
    """Complete digit automaton; out-degree d everywhere, one edge per m."""

    sub: Substitution
    gamma: WeightVector
    tau: int
    simplified: bool
    states: tuple[State, ...]
    edges: tuple[tuple[AutomatonEdge, ...], ...]

    @property
    def d(self) -> int:
        return len(self.sub.images[0])

    def state_index(self, state: State) -> int:
        return self._index[state]

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    def state_label(self, i: int) -> str:
        a, v = self.states[i]
        sym = self.sub.symbols
        return f"{sym[a]}|{''.join(sym[b] for b in v)}"

    def to_dot(self) -> str:
        lines = ["digraph automaton {", "  rankdir=LR;"]
        for i in range(len(self.states)):
            lines.append(f'  s{i} [label="{self.state_label(i)}"];')
        for group in self.edges:
            for e in group:
                lines.append(
                    f'  s{e.source} -> s{e.target} [label="{e.m}:{e.payoff}"];'
                )
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "simplified": self.simplified,
            "states": [self.state_label(i) for i in range(len(self.states))],
            "edges": [
                {
                    "source": e.source,
                    "m": e.m,
                    "target": e.target,
                    "payoff": str(e.payoff),
                }
                for group in self.edges
                for e in group
            ],
        }


def _require_constant_length(sub: Substitution) -> int:
    lengths = set(sub.image_lengths())
    if len(lengths) != 1:
        raise ValueError("digit automata require a constant-length substitution")
    return lengths.pop()


def build_tau_automaton(sub: Substitution, gamma: WeightVector, tau: int) -> TauAutomaton:
    """The automaton on states A x A^2 for shift digit tau in {0..d-1}."""
    d = _require_constant_length(sub)
    if not (0 <= tau <= d - 1):
        raise ValueError(f"tau must lie in 0..{d - 1}")
    n = sub.alphabet_size
    states: list[State] = [
        (a, (v1, v2)) for a in range(n) for v1 in range(n) for v2 in range(n)
    ]
    index = {s: i for i, s in enumerate(states)}
    groups = []
    pair_images = {
        (v1, v2): sub.images[v1] + sub.images[v2] for v1 in range(n) for v2 in range(n)
    }
    for a, v in states:
        img_a = sub.images[a]
        img_v = pair_images[v]
        out = []
        for m in range(1, d + 1):
            j = m + tau  # 1-based split of the pair image, j+1 <= 2d
            assert j + 1 <= 2 * d, "pair-image index must exist"
            target = (img_a[m - 1], (img_v[j - 1], img_v[j]))
            payoff = gamma_of_word(gamma, img_a[m:]) + gamma_of_word(gamma, img_v[: j - 1])
            out.append(AutomatonEdge(index[(a, v)], m, index[target], payoff))
        groups.append(tuple(out))
    return TauAutomaton(sub, gamma, tau, False, tuple(states), tuple(groups))


def build_simplified_automaton(sub: Substitution, gamma: WeightVector) -> TauAutomaton:
    """The tau = 0 automaton on states A x A (second pair letter dropped)."""
    d = _require_constant_length(sub)
    n = sub.alphabet_size
    states: list[State] = [(a, (b,)) for a in range(n) for b in range(n)]
    index = {s: i for i, s in enumerate(states)}
    groups = []
    for a, (b,) in states:
        img_a = sub.images[a]
        img_b = sub.images[b]
        out = []
        for m in range(1, d + 1):
            target = (img_a[m - 1], (img_b[m - 1],))
            payoff = gamma_of_word(gamma, img_a[m:]) + gamma_of_word(gamma, img_b[: m - 1])
            out.append(AutomatonEdge(index[(a, (b,))], m, index[target], payoff))
        groups.append(tuple(out))
    return TauAutomaton(sub, gamma, 0, True, tuple(states), tuple(groups))


# ---------------------------------------------------------------------------
# synchronization predicates
# ---------------------------------------------------------------------------


def synchronizable_letters(sub: Substitution) -> set[int]:
    """Letters occurring at the same position in two distinct images."""
    d = _require_constant_length(sub)
    n = sub.alphabet_size
    found: set[int] = set()
    for j in range(d):
        for b in range(n):
            for c in range(b + 1, n):
                if sub.images[b][j] == sub.images[c][j]:
                    found.add(sub.images[b][j])
    return found


def is_synchronizable(sub: Substitution) -> bool:
    """Every pair of distinct images shares a letter at some common position."""
    d = _require_constant_length(sub)
    n = sub.alphabet_size
    for b in range(n):
        for c in range(b + 1, n):
            if not any(sub.images[b][j] == sub.images[c][j] for j in range(d)):
                return False
    return True


def is_strongly_non_synchronizable(sub: Substitution) -> bool:
    """No letter ever repeats at a common position across distinct images."""
    return not synchronizable_letters(sub)


def nonsync_two_letter(sub: Substitution) -> tuple[int, int] | None:
    """Structure check for 2-letter strongly non-synchronizable substitutions.

    When the occurrence matrix has eigenvalue 1 the image of the second
    letter must be the letter-swapped image of the first and the matrix is
    [[k+1, k], [k, k+1]] with d = 2k+1; returns (k, d) or None.
    """
    if sub.alphabet_size != 2:
        return None
    d = _require_constant_length(sub)
    if not is_strongly_non_synchronizable(sub):
        return None
    img_a, img_b = sub.images
    swapped = bytes(1 - x for x in img_a)
    if img_b != swapped:
        return None
    k = img_a.count(1)
    if img_a.count(0) != k + 1:
        return None  # eigenvalue 1 forces one more fixed letter than swapped
    assert d == 2 * k + 1
    assert matrix_of(sub) == [[k + 1, k], [k, k + 1]]
    return k, d
