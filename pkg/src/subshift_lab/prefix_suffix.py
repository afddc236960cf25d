"""Prefix-suffix decompositions and sample points of the subshift.

A point of the subshift is encoded by a path of triples (p, c, s) with
``sigma(parent) = p + c + s``; the central window of the point is rebuilt
from a finite path as

    sigma^K(p_K) ... sigma(p_1) p_0 . c_0 s_0 sigma(s_1) ... sigma^K(s_K)

which equals sigma^{K+1}(parent of the top triple).  Points are only ever
materialized as finite windows.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .substitution import Substitution, Word


@dataclass(frozen=True)
class PSTriple:
    """One decomposition sigma(parent) = prefix + center + suffix."""

    parent: int
    prefix: Word
    center: int
    suffix: Word

    @property
    def position(self) -> int:
        """1-based position of the center inside sigma(parent)."""
        return len(self.prefix) + 1

    def check(self, sub: Substitution) -> None:
        img = sub.image(self.parent)
        if self.prefix + bytes([self.center]) + self.suffix != img:
            raise ValueError("triple does not decompose sigma(parent)")


@dataclass(frozen=True)
class PSAutomaton:
    """All prefix-suffix triples of a substitution, grouped by parent."""

    sub: Substitution
    edges: tuple[tuple[PSTriple, ...], ...]

    def triples_from(self, parent: int) -> tuple[PSTriple, ...]:
        return self.edges[parent]

    def all_triples(self) -> list[PSTriple]:
        return [t for group in self.edges for t in group]

    def suffixes(self) -> set[Word]:
        return {t.suffix for t in self.all_triples()}

    def prefixes(self) -> set[Word]:
        return {t.prefix for t in self.all_triples()}

    def to_dot(self) -> str:
        sub = self.sub
        lines = ["digraph prefix_suffix {", "  rankdir=LR;"]
        for a in range(sub.alphabet_size):
            lines.append(f'  s{a} [label="{sub.symbols[a]}"];')
        for t in self.all_triples():
            label = f"{sub.render(t.prefix)}|{sub.symbols[t.center]}|{sub.render(t.suffix)}"
            lines.append(f'  s{t.parent} -> s{t.center} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        sub = self.sub
        return {
            "states": list(sub.symbols),
            "edges": [
                {
                    "parent": sub.symbols[t.parent],
                    "prefix": sub.render(t.prefix),
                    "center": sub.symbols[t.center],
                    "suffix": sub.render(t.suffix),
                    "position": t.position,
                }
                for t in self.all_triples()
            ],
        }


def build_ps_automaton(sub: Substitution) -> PSAutomaton:
    """Enumerate every split sigma(parent) = p + c + s."""
    groups = []
    for a in range(sub.alphabet_size):
        img = sub.image(a)
        groups.append(
            tuple(
                PSTriple(a, img[:i], img[i], img[i + 1 :]) for i in range(len(img))
            )
        )
    return PSAutomaton(sub, tuple(groups))


@dataclass(frozen=True)
class SymbolicPoint:
    """A finite two-sided window of a subshift point plus its generating path.

    ``right`` holds x[0..] (starting with the center letter), ``left`` holds
    x[..-1]; ``left + right`` is a factor of sigma^depth(base).
    """

    sub: Substitution
    path: tuple[PSTriple, ...]
    left: Word
    right: Word
    depth: int
    base: int


def _check_path(sub: Substitution, path: tuple[PSTriple, ...]) -> None:
    if not path:
        raise ValueError("path must contain at least one triple")
    for t in path:
        t.check(sub)
    for lower, upper in zip(path, path[1:]):
        if lower.parent != upper.center:
            raise ValueError("inconsistent path: parent of level i must be center of level i+1")


def point_from_path(sub: Substitution, path, window: int) -> SymbolicPoint:
    """Materialize the window the finite path determines (capped per side).

    Builds c_0 s_0 sigma(s_1) ... on the right and ... sigma(p_1) p_0 on the
    left by lazy truncated expansion; never expands beyond the cap.
    """
    path = tuple(path)
    _check_path(sub, path)
    if window < 0:
        raise ValueError("window must be >= 0")
    right_parts: list[Word] = []
    left_parts: list[Word] = []
    if window > 0:
        right_parts.append(bytes([path[0].center]))
        need = window - 1
        level_suffix: list[Word] = [t.suffix for t in path]
        for k, s in enumerate(level_suffix):
            if need <= 0:
                break
            piece = _expand_prefix(sub, s, k, need)
            right_parts.append(piece)
            need -= len(piece)
        need = window
        for k, t in enumerate(path):
            if need <= 0:
                break
            piece = _expand_suffix(sub, t.prefix, k, need)
            left_parts.append(piece)
            need -= len(piece)
    right = b"".join(right_parts)
    left = b"".join(reversed(left_parts))
    return SymbolicPoint(sub, path, left, right, len(path), path[-1].parent)


def _expand_prefix(sub: Substitution, w: Word, k: int, cap: int) -> Word:
    """First min(cap, |sigma^k(w)|) letters of sigma^k(w)."""
    for _ in range(k):
        if not w:
            return b""
        w = sub.apply(w[:cap])[:cap]
    return w[:cap]


def _expand_suffix(sub: Substitution, w: Word, k: int, cap: int) -> Word:
    """Last min(cap, |sigma^k(w)|) letters of sigma^k(w)."""
    for _ in range(k):
        if not w:
            return b""
        w = sub.apply(w[-cap:])[-cap:]
    return w[-cap:]


def sample_point(
    sub: Substitution, depth: int, seed: int, window: int | None = None
) -> SymbolicPoint:
    """A point from a uniformly random consistent path of the given depth.

    The top parent letter is uniform and each level splits its image at a
    uniform position, so for constant length all paths below a given top
    letter are equally likely.  Deterministic per seed.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = random.Random(seed)
    # top-down: uniform top parent, then a uniform split position per level
    path_rev: list[PSTriple] = []
    parent = rng.randrange(sub.alphabet_size)
    for _ in range(depth):
        img = sub.image(parent)
        pos = rng.randrange(len(img))
        path_rev.append(PSTriple(parent, img[:pos], img[pos], img[pos + 1 :]))
        parent = path_rev[-1].center
    path = tuple(reversed(path_rev))
    if window is None:
        # full determined length on the larger side, computed without expansion
        lengths = [1] * sub.alphabet_size
        avail_right, avail_left = 1, 0
        for t in path:
            avail_right += sum(lengths[b] for b in t.suffix)
            avail_left += sum(lengths[b] for b in t.prefix)
            lengths = [sum(lengths[b] for b in img) for img in sub.images]
        window = max(avail_right, avail_left)
    return point_from_path(sub, path, window)


def periodic_tail_point(
    sub: Substitution,
    path,
    tail_letter: int,
    window: int,
    verify: bool = True,
) -> SymbolicPoint:
    """A point whose suffixes vanish above the given path: periodic tail.

    The forward window is c_0 s_0 sigma(s_1) ... sigma^K(s_K) followed by
    the fixed point of sigma^q at ``tail_letter`` expanded through
    sigma^{K+1}; q is the least power making the first letter return.  With
    ``verify`` the seam is checked to be a factor of the language.
    """
    path = tuple(path)
    _check_path(sub, path)
    # least q with sigma^q(tail_letter) starting at tail_letter again
    first = tail_letter
    q = 0
    seen = {}
    while first not in seen:
        seen[first] = q
        first = sub.image(first)[0]
        q += 1
    if first != tail_letter:
        raise ValueError(
            f"letter {tail_letter} is not on a first-letter cycle; no periodic tail"
        )
    determined = point_from_path(sub, path, window)
    need = window - len(determined.right)
    tail = b""
    if need > 0:
        # prefix of lim sigma^{nq}(tail_letter): expand q levels per round so
        # every intermediate word is a prefix of the limit
        tail = bytes([tail_letter])
        while len(tail) < need:
            new = tail
            for _ in range(q):
                new = sub.apply(new[:need])[:need]
            if len(new) == len(tail):
                raise ValueError(f"letter {tail_letter} does not grow; tail is finite")
            tail = new
        tail = tail[:need]
    right = (determined.right + tail)[:window]
    if verify and len(right) > len(determined.right):
        seam_lo = max(0, len(determined.right) - 8)
        seam = right[seam_lo : len(determined.right) + 8]
        if not _is_factor(sub, seam):
            raise ValueError("periodic tail seam is not a factor of the language")
    return SymbolicPoint(sub, path, determined.left, right, determined.depth, determined.base)


def _is_factor(sub: Substitution, w: Word) -> bool:
    """Substring search in a long one-sided fixed-point prefix."""
    from .substitution import iterate_prefix

    # a letter on a first-letter cycle generates the full language for a
    # primitive substitution
    letter = 0
    seen = {}
    while letter not in seen:
        seen[letter] = True
        letter = sub.image(letter)[0]
    budget = max(4096, 64 * len(w))
    for _ in range(6):
        prefix = iterate_prefix(sub, letter, budget)
        if w in prefix:
            return True
        budget *= 8
    return False


def sample_point_with_coverage(
    sub: Substitution,
    seed: int,
    min_right: int,
    min_left: int = 0,
    start_depth: int | None = None,
) -> SymbolicPoint:
    """Sample points of increasing depth until the window covers the request."""
    d = max(len(img) for img in sub.images)
    if start_depth is None:
        start_depth = 2
        need = max(min_right, min_left, 1)
        while d**start_depth < need:
            start_depth += 1
        start_depth += 1
    for attempt in range(64):
        pt = sample_point(
            sub, start_depth + 2 * attempt, seed * 1009 + attempt, window=max(min_right, min_left)
        )
        if len(pt.right) >= min_right and len(pt.left) >= min_left:
            return pt
    raise RuntimeError("could not sample a point covering the requested window")
