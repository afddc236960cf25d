"""Exact and Monte Carlo laws of accumulated payoffs along digit streams.

The time parameter t in [1, d) drives everything through its base-d digits:
the integer digit fixes the initial state law, each fractional digit selects
the automaton layer for one step.  The accumulated payoff after n steps
matches the ergodic sum S at time floor(d^n t) up to a boundary term of at
most 3 max|gamma|, which ``word_vs_chain_check`` verifies against words
built letter by letter.

Exact distributions evolve a (state, lattice sum) table with integer
numerators; Monte Carlo runs vectorized over numpy with integer-scaled
payoffs, so sample values are exact lattice points too.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

import numpy as np

from .automata import build_tau_automaton
from .markov import (
    ChainGraph,
    InitialDistribution,
    RecurrentClass,
    absorption_probabilities,
    asymptotic_variance,
    chain_of,
    initial_distribution,
    recurrent_classes,
)
from .prefix_suffix import sample_point_with_coverage
from .substitution import Substitution, WeightVector, gamma_of_word

DEFAULT_SUPPORT_CAP = 10**6


# ---------------------------------------------------------------------------
# digit streams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DigitStream:
    """Eventually periodic base-d expansion of a fractional part t in [0, 1)."""

    base: int
    preperiod: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        for digit in self.preperiod + self.period:
            if not 0 <= digit < self.base:
                raise ValueError(f"digit {digit} outside 0..{self.base - 1}")
        if not self.period:
            object.__setattr__(self, "period", (0,))

    @staticmethod
    def from_rational(t: Fraction, base: int) -> "DigitStream":
        """Exact long-division expansion of t in [0, 1)."""
        t = Fraction(t)
        if not 0 <= t < 1:
            raise ValueError("fractional part must lie in [0, 1)")
        digits: list[int] = []
        seen: dict[Fraction, int] = {}
        rem = t
        while rem not in seen:
            seen[rem] = len(digits)
            scaled = rem * base
            digit = int(scaled)
            digits.append(digit)
            rem = scaled - digit
        start = seen[rem]
        return DigitStream(base, tuple(digits[:start]), tuple(digits[start:]))

    def digit(self, i: int) -> int:
        """The i-th digit, 1-based: t = sum digit(i) * base**-i."""
        if i < 1:
            raise ValueError("digit index is 1-based")
        i -= 1
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def shifted(self, k: int) -> "DigitStream":
        """Drop the first k digits (multiply t by base**k, keep fraction)."""
        pre = list(self.preperiod)
        per = list(self.period)
        for _ in range(k):
            if pre:
                pre.pop(0)
            else:
                per = per[1:] + per[:1]
        return DigitStream(self.base, tuple(pre), tuple(per))

    def value(self) -> Fraction:
        total = Fraction(0)
        for i, digit in enumerate(self.preperiod, start=1):
            total += Fraction(digit, self.base**i)
        p = len(self.period)
        block = sum(d * self.base ** (p - j) for j, d in enumerate(self.period, start=1))
        total += Fraction(block, self.base ** len(self.preperiod) * (self.base**p - 1)) if block else 0
        return total


class RandomDigitStream:
    """Seeded uniform digits; prefix-stable and reproducible."""

    def __init__(self, base: int, seed: int):
        self.base = base
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self._cache = np.empty(0, dtype=np.int64)

    def digit(self, i: int) -> int:
        if i < 1:
            raise ValueError("digit index is 1-based")
        while i > len(self._cache):
            more = self._rng.integers(0, self.base, size=max(64, len(self._cache)), dtype=np.int64)
            self._cache = np.concatenate([self._cache, more])
        return int(self._cache[i - 1])


@dataclass(frozen=True)
class TimeExpansion:
    """Normalized time parameter:`t = tau0.digits` in base d with tau0 >= 1.

    The leading digit shapes the initial state; digit(k) selects the k-th
    automaton layer.
    """

    base: int
    tau0: int
    digits: DigitStream | RandomDigitStream

    def __post_init__(self):
        if not 1 <= self.tau0 <= self.base - 1:
            raise ValueError("leading digit must lie in 1..base-1")

    @property
    def eventually_periodic(self) -> bool:
        return isinstance(self.digits, DigitStream)

    def layer_digit(self, k: int) -> int:
        return self.digits.digit(k)

    def floor_dn_t(self, n: int) -> int:
        """floor(d^n t), exact from the digits."""
        total = self.tau0
        for k in range(1, n + 1):
            total = total * self.base + self.layer_digit(k)
        return total

    def value(self) -> Fraction | None:
        if not self.eventually_periodic:
            return None
        return self.tau0 + self.digits.value()

    def describe(self) -> dict:
        if self.eventually_periodic:
            return {
                "tau0": self.tau0,
                "preperiod": list(self.digits.preperiod),
                "period": list(self.digits.period),
            }
        return {"tau0": self.tau0, "random_seed": self.digits.seed}


def time_expansion(sub: Substitution, t) -> TimeExpansion:
    """Normalize a time parameter for a constant-length substitution.

    Accepts a TimeExpansion, a DigitStream for t in (0, 1) (shifted so the
    first layer consumes the first nonzero digit), or a rational t in (0, d).
    """
    d = len(sub.images[0])
    if isinstance(t, TimeExpansion):
        if t.base != d:
            raise ValueError("time expansion base does not match the substitution")
        return t
    if isinstance(t, RandomDigitStream):
        if t.base != d:
            raise ValueError("digit stream base does not match the substitution")
        shift = 1
        while t.digit(shift) == 0:
            shift += 1
        return TimeExpansion(d, t.digit(shift), _ShiftedRandom(t, shift))
    if isinstance(t, DigitStream):
        if t.base != d:
            raise ValueError("digit stream base does not match the substitution")
        stream = t
    else:
        t = Fraction(t)
        if not 0 < t < d:
            raise ValueError(f"t must lie in (0, {d})")
        if t >= 1:
            return TimeExpansion(d, int(t), DigitStream.from_rational(t - int(t), d))
        stream = DigitStream.from_rational(t, d)
    # t in (0,1): shift until the leading digit is nonzero
    shift = 0
    while stream.digit(shift + 1) == 0:
        shift += 1
        if shift > len(stream.preperiod) + len(stream.period):
            raise ValueError("t must be positive (all digits are zero)")
    tau0 = stream.digit(shift + 1)
    return TimeExpansion(d, tau0, stream.shifted(shift + 1))


class _ShiftedRandom:
    """Random digit stream with its first ``shift`` digits consumed."""

    def __init__(self, inner: RandomDigitStream, shift: int):
        self.inner = inner
        self.base = inner.base
        self.seed = inner.seed
        self.shift = shift

    def digit(self, i: int) -> int:
        return self.inner.digit(i + self.shift)


# ---------------------------------------------------------------------------
# layers
# ---------------------------------------------------------------------------


def layer_chains(
    sub: Substitution, gamma: WeightVector, plan: TimeExpansion, n: int
) -> list[ChainGraph]:
    """The chain layer for each of the first n steps (memoized per digit)."""
    memo: dict[int, ChainGraph] = {}
    layers = []
    for k in range(1, n + 1):
        tau = plan.layer_digit(k)
        if tau not in memo:
            memo[tau] = chain_of(build_tau_automaton(sub, gamma, tau))
        layers.append(memo[tau])
    return layers


def payoff_lattice(layers: Sequence[ChainGraph]) -> int:
    """lcm of payoff denominators across layers."""
    lattice = 1
    for chain in layers:
        for group in chain.edges:
            for e in group:
                den = e.payoff.denominator
                lattice = lattice * den // gcd(lattice, den)
    return lattice


def _initial_indices(
    layers: Sequence[ChainGraph], init: InitialDistribution | Mapping
) -> dict[int, Fraction]:
    if not layers:
        if isinstance(init, InitialDistribution):
            raise ValueError("at least one layer is needed to index initial states")
        return {k: Fraction(p) for k, p in init.items()}
    chain = layers[0]
    if isinstance(init, InitialDistribution):
        index = {s: i for i, s in enumerate(chain.states)}
        return {index[s]: p for s, p in init.probs.items()}
    out: dict[int, Fraction] = {}
    for key, p in init.items():
        if isinstance(key, int):
            out[key] = Fraction(p)
        else:
            out[chain.states.index(key)] = Fraction(p)
    return out


# ---------------------------------------------------------------------------
# exact distribution
# ---------------------------------------------------------------------------


class SupportCapExceeded(RuntimeError):
    def __init__(self, reached_n: int, size: int):
        super().__init__(f"support cap exceeded at step {reached_n} with {size} pairs")
        self.reached_n = reached_n
        self.size = size


@dataclass(frozen=True)
class SumDistribution:
    """Exact joint law of (state, accumulated payoff) on a lattice.

    Probabilities are integer numerators over a common denominator; sums are
    integer multiples of 1/lattice.
    """

    n: int
    lattice: int
    denominator: int
    table: dict[tuple[int, int], int]
    state_labels: tuple[str, ...]

    def mass(self) -> Fraction:
        return Fraction(sum(self.table.values()), self.denominator)

    def sum_marginal(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for (_, s), num in self.table.items():
            out[s] = out.get(s, Fraction(0)) + Fraction(num, self.denominator)
        return dict(sorted(out.items()))

    def state_marginal(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for (q, _), num in self.table.items():
            out[q] = out.get(q, Fraction(0)) + Fraction(num, self.denominator)
        return out

    def mean(self) -> Fraction:
        acc = 0
        for (_, s), num in self.table.items():
            acc += s * num
        return Fraction(acc, self.denominator * self.lattice)

    def variance(self) -> Fraction:
        mean = self.mean()
        acc = Fraction(0)
        for (_, s), num in self.table.items():
            acc += Fraction(num, self.denominator) * (Fraction(s, self.lattice) - mean) ** 2
        return acc

    def support_bounds(self) -> tuple[Fraction, Fraction]:
        lows = [s for (_, s) in self.table]
        return Fraction(min(lows), self.lattice), Fraction(max(lows), self.lattice)

    def support_diameter(self) -> Fraction:
        lo, hi = self.support_bounds()
        return hi - lo

    def mass_in(self, lo: Fraction, hi: Fraction) -> Fraction:
        lo_s = lo * self.lattice
        hi_s = hi * self.lattice
        total = 0
        for (_, s), num in self.table.items():
            if lo_s <= s <= hi_s:
                total += num
        return Fraction(total, self.denominator)

    def restricted_to_states(self, states: set[int]) -> "SumDistribution":
        table = {(q, s): num for (q, s), num in self.table.items() if q in states}
        return SumDistribution(self.n, self.lattice, self.denominator, table, self.state_labels)


def exact_sum_distribution(
    layers: Sequence[ChainGraph],
    init: InitialDistribution | Mapping,
    n: int,
    support_cap: int = DEFAULT_SUPPORT_CAP,
    checkpoints: Sequence[int] = (),
) -> SumDistribution | list[SumDistribution]:
    """Digit-by-digit convolution of the joint (state, sum) law.

    Sums start at 0; the law after step k uses layer k.  When ``checkpoints``
    is given, a list of snapshots at those step counts is returned instead.
    """
    if n > len(layers):
        raise ValueError("not enough layers for the requested horizon")
    lattice = payoff_lattice(layers[:n]) if n else 1
    init_idx = _initial_indices(layers, init)
    denom = 1
    for p in init_idx.values():
        denom = denom * p.denominator // gcd(denom, p.denominator)
    table: dict[tuple[int, int], int] = {
        (q, 0): int(p * denom) for q, p in init_idx.items() if p
    }
    want = sorted(set(checkpoints))
    snaps: list[SumDistribution] = []
    labels = layers[0].state_labels if layers else ()

    def snapshot(step: int) -> SumDistribution:
        return SumDistribution(step, lattice, denom, dict(table), labels)

    if 0 in want:
        snaps.append(snapshot(0))
    for k in range(1, n + 1):
        chain = layers[k - 1]
        step_denom = 1
        for group in chain.edges:
            for e in group:
                step_denom = step_denom * e.prob.denominator // gcd(
                    step_denom, e.prob.denominator
                )
        new: dict[tuple[int, int], int] = {}
        for (q, s), num in table.items():
            for e in chain.edges[q]:
                weight = num * int(e.prob * step_denom)
                key = (e.target, s + int(e.payoff * lattice))
                new[key] = new.get(key, 0) + weight
        denom *= step_denom
        table = new
        if len(table) > support_cap:
            raise SupportCapExceeded(k, len(table))
        if k in want:
            snaps.append(snapshot(k))
    if checkpoints:
        return snaps
    return snapshot(n)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@dataclass
class EmpiricalSample:
    """Reproducible Monte Carlo sample of accumulated payoffs."""

    values: np.ndarray  # float payoffs
    scaled: np.ndarray  # integer lattice values (values * lattice)
    final_states: np.ndarray
    lattice: int
    n: int
    seed: int
    t_digits: dict

    def __len__(self) -> int:
        return len(self.values)


class _CompiledLayer:
    """Padded cumulative-probability arrays for vectorized stepping."""

    def __init__(self, chain: ChainGraph, lattice: int):
        width = max(len(group) for group in chain.edges)
        n = chain.n
        self.cum = np.ones((n, width), dtype=np.float64)
        self.target = np.zeros((n, width), dtype=np.int64)
        self.pay = np.zeros((n, width), dtype=np.int64)
        for i, group in enumerate(chain.edges):
            acc = 0.0
            for j, e in enumerate(group):
                acc += float(e.prob)
                self.cum[i, j] = acc
                self.target[i, j] = e.target
                self.pay[i, j] = int(e.payoff * lattice)
            self.cum[i, len(group) - 1] = 1.0 + 1e-12  # guard the last edge

    def step(self, states: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        rows_cum = self.cum[states]
        idx = (u[:, None] >= rows_cum).sum(axis=1)
        return self.target[states, idx], self.pay[states, idx]


def monte_carlo(
    layers: Sequence[ChainGraph],
    init: InitialDistribution | Mapping,
    n: int,
    samples: int,
    seed: int,
    checkpoints: Sequence[int] = (),
    t_digits: dict | None = None,
) -> EmpiricalSample | list[EmpiricalSample]:
    """IID paths of the layered chain; deterministic per seed.

    Payoffs accumulate as scaled integers, so sample values are exact.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if n > len(layers):
        raise ValueError("not enough layers for the requested horizon")
    lattice = payoff_lattice(layers[:n]) if n else 1
    rng = np.random.default_rng(seed)
    init_idx = _initial_indices(layers, init)
    states_list = sorted(init_idx)
    probs = np.array([float(init_idx[s]) for s in states_list])
    probs /= probs.sum()
    cum = np.cumsum(probs)
    draws = rng.random(samples)
    states = np.array(states_list, dtype=np.int64)[np.searchsorted(cum, draws)]
    sums = np.zeros(samples, dtype=np.int64)
    compiled: dict[int, _CompiledLayer] = {}
    want = sorted(set(checkpoints))
    snaps: list[EmpiricalSample] = []
    meta = dict(t_digits or {})

    def snapshot(step: int) -> EmpiricalSample:
        return EmpiricalSample(
            values=sums / lattice,
            scaled=sums.copy(),
            final_states=states.copy(),
            lattice=lattice,
            n=step,
            seed=seed,
            t_digits=meta,
        )

    if 0 in want:
        snaps.append(snapshot(0))
    for k in range(1, n + 1):
        chain = layers[k - 1]
        key = id(chain)
        if key not in compiled:
            compiled[key] = _CompiledLayer(chain, lattice)
        u = rng.random(samples)
        states, pay = compiled[key].step(states, u)
        sums += pay
        if k in want:
            snaps.append(snapshot(k))
    if checkpoints:
        return snaps
    return snapshot(n)


# ---------------------------------------------------------------------------
# word vs chain identity
# ---------------------------------------------------------------------------


def word_vs_chain_check(
    sub: Substitution,
    gamma: WeightVector,
    t,
    n: int,
    seed: int,
    verify_window: bool = True,
) -> Fraction:
    """Compare the symbolic ergodic sum with the chain-accumulated sum.

    Builds the length floor(d^n t) window letter by letter alongside the
    automaton path and returns |word sum - chain sum|, asserted to be at
    most 3 max|gamma|.  With ``verify_window`` the window is rebuilt a second
    time from its closed-form decomposition and compared letter for letter.
    """
    plan = time_expansion(sub, t)
    d = plan.base
    rng = random.Random(seed)
    point = sample_point_with_coverage(sub, seed, min_right=plan.tau0 + 2)
    w = point.right[: plan.tau0 + 2]
    a = w[0]
    u_word = w[1 : plan.tau0]
    v_pair = (w[plan.tau0], w[plan.tau0 + 1])
    g0 = gamma_of_word(gamma, u_word)
    chain_sum = g0
    suffix_parts: list[bytes] = []
    for k in range(1, n + 1):
        kappa = plan.layer_digit(k)
        m = rng.randint(1, d)
        img_a = sub.images[a]
        pair_img = sub.images[v_pair[0]] + sub.images[v_pair[1]]
        s_part = img_a[m:]
        p_part = pair_img[: m + kappa - 1]
        chain_sum += gamma_of_word(gamma, s_part) + gamma_of_word(gamma, p_part)
        u_word = s_part + sub.apply(u_word) + p_part
        a = img_a[m - 1]
        v_pair = (pair_img[m + kappa - 1], pair_img[m + kappa])
        suffix_parts.append(s_part)
    count = plan.floor_dn_t(n)
    assert len(u_word) == count - 1, "window length must equal floor(d^n t) - 1"
    window = bytes([a]) + u_word
    if verify_window:
        # independent reconstruction: a_n, then the suffix tower, then the
        # n-fold image of the rest of the initial window
        parts = [bytes([a])]
        for k in range(n, 0, -1):
            parts.append(sub.apply_power(suffix_parts[k - 1], n - k))
        parts.append(sub.apply_power(w[1:], n))
        rebuilt = b"".join(parts)[:count]
        assert rebuilt == window, "window reconstruction mismatch"
    word_sum = gamma_of_word(gamma, window)
    assert gamma_of_word(gamma, u_word) == chain_sum, "chain sum must equal the window sum"
    discrepancy = abs(word_sum - chain_sum)
    assert discrepancy <= 3 * gamma.max_abs
    return discrepancy


# ---------------------------------------------------------------------------
# variance growth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    n_values: tuple[int, ...]
    variances: tuple[float, ...]
    slope: float
    method: str
    in_band: bool
    band: tuple[float, float]


def variance_growth(
    sub: Substitution,
    gamma: WeightVector,
    t,
    n_values: Sequence[int],
    samples: int = 10**5,
    seed: int = 0,
    support_cap: int = DEFAULT_SUPPORT_CAP,
    band: tuple[float, float] = (0.8, 1.05),
    method: str = "auto",
) -> GrowthReport:
    """V_n over a range of horizons with the fitted log-log growth exponent.

    ``method`` is "auto" (exact while the support stays under the cap, then
    Monte Carlo), "exact" or "mc".
    """
    plan = time_expansion(sub, t)
    n_values = tuple(sorted(set(int(x) for x in n_values)))
    n_max = n_values[-1]
    layers = layer_chains(sub, gamma, plan, n_max)
    init = initial_distribution(sub, gamma, plan.tau0)
    variances: tuple[float, ...] = ()
    if method in ("auto", "exact"):
        try:
            snaps = exact_sum_distribution(
                layers, init, n_max, support_cap=support_cap, checkpoints=n_values
            )
            variances = tuple(float(s.variance()) for s in snaps)
            method = "exact"
        except SupportCapExceeded as exc:
            if method == "exact":
                raise
            warnings.warn(
                f"exact support cap exceeded at step {exc.reached_n}; "
                f"falling back to Monte Carlo",
                stacklevel=2,
            )
            method = "mc"
    if method == "mc":
        snaps = monte_carlo(
            layers, init, n_max, samples, seed, checkpoints=n_values,
            t_digits=plan.describe(),
        )
        variances = tuple(float(np.var(s.values)) for s in snaps)
    positive = [(n, v) for n, v in zip(n_values, variances) if v > 0]
    if len(positive) >= 2:
        xs = np.log([n for n, _ in positive])
        ys = np.log([v for _, v in positive])
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = 0.0
    return GrowthReport(n_values, variances, slope, method, band[0] <= slope <= band[1], band)


# ---------------------------------------------------------------------------
# mixture law prediction and goodness of fit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixtureComponent:
    weight: Fraction
    variance_per_step: Fraction  # sigma_k^2; the law at step n is N(0, n sigma_k^2)
    states: frozenset[int]
    lattice_step: int  # payoff lattice inside the class, in 1/lattice units


@dataclass(frozen=True)
class MixturePrediction:
    """Limit law p0 * delta_0 + sum p_k N(0, sigma_k^2) for periodic digits."""

    plan: TimeExpansion
    p0: Fraction
    components: tuple[MixtureComponent, ...]
    dirac_states: frozenset[int]
    dirac_window: tuple[Fraction, Fraction] | None
    lattice: int

    def density_description(self) -> dict:
        return {
            "p0": str(self.p0),
            "components": [
                {"p": str(c.weight), "sigma2_per_step": str(c.variance_per_step)}
                for c in self.components
            ],
        }


def mixture_prediction(
    sub: Substitution,
    gamma: WeightVector,
    t,
    window_horizon: int = 64,
) -> MixturePrediction:
    """Exact limit-law parameters for an eventually periodic digit stream.

    Weights are absorption probabilities into the recurrent classes of the
    period-composed chain; coboundary classes pool into the atom at zero.
    Per-step variances divide the composed-class variance by the period
    length.  The bounded window of the atom part is measured from the exact
    law at a moderate horizon.
    """
    plan = time_expansion(sub, t)
    if not plan.eventually_periodic:
        raise ValueError("mixture prediction requires an eventually periodic digit stream")
    stream = plan.digits
    pre = list(stream.preperiod)
    per = list(stream.period)
    init = initial_distribution(sub, gamma, plan.tau0)
    pre_layers = layer_chains(sub, gamma, plan, len(pre))
    # composed chain over one period, aligned to start after the preperiod
    memo: dict[int, ChainGraph] = {}

    def layer(tau: int) -> ChainGraph:
        if tau not in memo:
            memo[tau] = chain_of(build_tau_automaton(sub, gamma, tau))
        return memo[tau]

    from .markov import compose

    block: ChainGraph | None = None
    for tau in per:
        block = layer(tau) if block is None else compose(block, layer(tau))
    assert block is not None
    classes = recurrent_classes(block)
    mu = _initial_indices([layer(per[0])] if not pre_layers else pre_layers, init)
    for chain in pre_layers:
        mu = _push(chain, mu)
    weights = absorption_probabilities(block, classes, mu)
    lattice = payoff_lattice([layer(tau) for tau in set(per)])
    p0 = Fraction(0)
    comps: list[MixtureComponent] = []
    dirac_states: set[int] = set()
    for cls, p in zip(classes, weights):
        if cls.coboundary:
            p0 += p
            dirac_states.update(cls.states)
        else:
            sigma2_block = asymptotic_variance(block, cls)
            step = 0
            for s in cls.states:
                for e in block.edges[s]:
                    step = gcd(step, int(e.payoff * lattice))
            comps.append(
                MixtureComponent(
                    p, sigma2_block / len(per), frozenset(cls.states), max(step, 1)
                )
            )
    window = None
    if dirac_states:
        horizon = len(pre) + max(1, window_horizon // max(1, len(per))) * len(per)
        layers = layer_chains(sub, gamma, plan, horizon)
        dist = exact_sum_distribution(layers, init, horizon)
        bounded = dist.restricted_to_states(dirac_states)
        if bounded.table:
            window = bounded.support_bounds()
    return MixturePrediction(
        plan, p0, tuple(comps), frozenset(dirac_states), window, lattice
    )


def _push(chain: ChainGraph, mu: Mapping[int, Fraction]) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for s, p in mu.items():
        if p == 0:
            continue
        for e in chain.edges[s]:
            out[e.target] = out.get(e.target, Fraction(0)) + p * e.prob
    return out


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def ks_distance(values: np.ndarray, cdf) -> float:
    """sup |empirical cdf - cdf| with correct handling of ties."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    n = len(values)
    uniq, counts = np.unique(values, return_counts=True)
    after = np.cumsum(counts) / n
    before = after - counts / n
    model = np.array([cdf(v) for v in uniq])
    return float(np.max(np.maximum(np.abs(after - model), np.abs(model - before))))


def ks_lattice_vs_normal(scaled: np.ndarray, step: int, mean: float, sd: float) -> float:
    """KS distance between a lattice sample and the discretized normal.

    The reference is the bona fide lattice CDF Phi((x + step/2 - mean)/sd),
    i.e. the normal law with half-step continuity correction; this measures
    convergence in law without charging for the unavoidable quantization of
    a lattice variable (whose raw sup-distance to the continuous normal is
    bounded below by half the central mass).
    """
    scaled = np.sort(np.asarray(scaled))
    n = len(scaled)
    lo = int(scaled[0]) - 2 * step
    hi = int(scaled[-1]) + 2 * step
    grid = np.arange(lo, hi + step, step, dtype=np.int64)
    emp = np.searchsorted(scaled, grid, side="right") / n
    z = (grid + step / 2.0 - mean) / sd
    model = 0.5 * (1.0 + np.vectorize(math.erf)(z / math.sqrt(2.0)))
    return float(np.max(np.abs(emp - model)))


def ks_exact_vs_sample(dist: SumDistribution, sample: EmpiricalSample) -> float:
    """KS distance between an exact lattice law and an empirical sample."""
    assert dist.lattice == sample.lattice
    marg = dist.sum_marginal()
    support = np.array(sorted(marg), dtype=np.int64)
    cdf = np.cumsum([float(marg[s]) for s in support])
    emp_sorted = np.sort(sample.scaled)
    n = len(emp_sorted)
    # evaluate both step functions at all jump points
    points = np.unique(np.concatenate([support, emp_sorted]))
    emp = np.searchsorted(emp_sorted, points, side="right") / n
    idx = np.searchsorted(support, points, side="right")
    model = np.where(idx == 0, 0.0, cdf[idx - 1])
    return float(np.max(np.abs(emp - model)))


@dataclass(frozen=True)
class GofResult:
    ks_continuous: float
    window_mass_empirical: float
    window_mass_predicted: float
    window: tuple[float, float] | None
    n: int

    @property
    def window_mass_gap(self) -> float:
        return abs(self.window_mass_empirical - self.window_mass_predicted)


def gof_test(sample: EmpiricalSample, prediction: MixturePrediction) -> GofResult:
    """Goodness of fit of a sample against the predicted mixture law.

    The continuous part is tested per class: samples whose final state lies
    in a non-coboundary class are scaled by sqrt(n sigma_k^2) and compared
    with the standard normal.  The atom is tested by comparing the mass in
    the bounded window against the mixture's own prediction for that window
    (atom weight plus the Gaussian classes' lattice-corrected contribution).
    """
    n = sample.n
    ks_cont = 0.0
    steps: dict[int, int] = {}  # observed sum-lattice step per component
    for ci, comp in enumerate(prediction.components):
        mask = np.isin(sample.final_states, np.fromiter(comp.states, dtype=np.int64))
        if not mask.any():
            continue
        sub_scaled = sample.scaled[mask]
        steps[ci] = _observed_step(sub_scaled)
        sd_scaled = math.sqrt(n * float(comp.variance_per_step)) * sample.lattice
        ks_cont = max(
            ks_cont, ks_lattice_vs_normal(sub_scaled, steps[ci], 0.0, sd_scaled)
        )
    if prediction.dirac_window is None:
        return GofResult(ks_cont, 0.0, 0.0, None, n)
    lo, hi = prediction.dirac_window
    lo_s = int(lo * sample.lattice)
    hi_s = int(hi * sample.lattice)
    emp = float(np.mean((sample.scaled >= lo_s) & (sample.scaled <= hi_s)))
    pred = float(prediction.p0)
    for ci, comp in enumerate(prediction.components):
        sd = math.sqrt(n * float(comp.variance_per_step))
        half = steps.get(ci, comp.lattice_step) / (2 * sample.lattice)
        pred += float(comp.weight) * (
            normal_cdf((float(hi) + half) / sd) - normal_cdf((float(lo) - half) / sd)
        )
    return GofResult(ks_cont, emp, pred, (float(lo), float(hi)), n)


def _observed_step(scaled: np.ndarray) -> int:
    """gcd spacing of the observed lattice values (1 for a single value)."""
    uniq = np.unique(scaled)
    if len(uniq) < 2:
        return 1
    return int(np.gcd.reduce(np.diff(uniq)))


def sample_moments(sample: EmpiricalSample) -> dict:
    """Mean, variance, skewness and excess kurtosis of a sample."""
    x = sample.values
    mean = float(np.mean(x))
    centered = x - mean
    var = float(np.mean(centered**2))
    if var == 0:
        return {"mean": mean, "variance": 0.0, "skewness": 0.0, "excess_kurtosis": 0.0}
    skew = float(np.mean(centered**3) / var**1.5)
    kurt = float(np.mean(centered**4) / var**2 - 3.0)
    return {"mean": mean, "variance": var, "skewness": skew, "excess_kurtosis": kurt}
