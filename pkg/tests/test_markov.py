import random
from fractions import Fraction

import pytest

from subshift_lab.automata import build_simplified_automaton, build_tau_automaton
from subshift_lab.markov import (
    ChainEdge,
    ChainGraph,
    absorption_probabilities,
    asymptotic_variance,
    block_frequencies,
    chain_of,
    chain_report,
    class_period,
    coboundary_on_class,
    compose,
    ergodic_coefficient,
    expected_payoff,
    factor_blocks,
    initial_distribution,
    initial_state_indices,
    is_strongly_connected,
    letter_frequencies,
    product_chain,
    recurrent_classes,
    transient_states,
    weakly_connected_components,
)
from subshift_lab.substitution import (
    Substitution,
    eigenvector_for,
    gamma_of_word,
    iterate_prefix,
    matrix_of,
    parse_substitution,
)


def small_chain(edges, n):
    """Helper: edges as {source: [(target, prob, payoff), ...]}."""
    groups = []
    for s in range(n):
        groups.append(
            tuple(ChainEdge(t, Fraction(p), Fraction(v)) for t, p, v in edges[s])
        )
    return ChainGraph(tuple(range(n)), tuple(str(i) for i in range(n)), groups)


def test_chain_probabilities(twist2):
    sub, g = twist2
    chain = chain_of(build_simplified_automaton(sub, g))
    for group in chain.edges:
        assert all(e.prob == Fraction(1, 3) for e in group)
        assert sum(e.prob for e in group) == 1


def test_chain_rejects_bad_rows():
    with pytest.raises(ValueError):
        small_chain({0: [(0, Fraction(1, 2), 0)]}, 1)


def test_single_state_chain():
    sub = Substitution.from_words([[0]])
    g = eigenvector_for(matrix_of(sub), 1)
    chain = chain_of(build_simplified_automaton(sub, g))
    assert chain.n == 1 and sum(e.prob for e in chain.edges[0]) == 1


def test_recurrent_classes_tau0(twist2):
    sub, g = twist2
    chain = chain_of(build_simplified_automaton(sub, g))
    classes = recurrent_classes(chain)
    assert len(classes) == 2
    sets = [set(chain.state_labels[s] for s in c.states) for c in classes]
    assert {"1|1", "2|2"} in sets and {"1|2", "2|1"} in sets


def test_recurrent_class_tau1(twist2):
    sub, g = twist2
    chain = chain_of(build_tau_automaton(sub, g, 1))
    classes = recurrent_classes(chain)
    assert len(classes) == 1
    assert classes[0].period == 1
    assert len(classes[0].states) == chain.n


def test_two_cycle_period():
    chain = small_chain({0: [(1, 1, 0)], 1: [(0, 1, 0)]}, 2)
    classes = recurrent_classes(chain)
    assert classes[0].period == 2
    assert class_period(chain, classes[0].states) == 2


def test_coboundary_examples(twist2):
    sub, g = twist2
    chain = chain_of(build_simplified_automaton(sub, g))
    classes = recurrent_classes(chain)
    diagonal = next(c for c in classes if chain.state_labels[c.states[0]] == "1|1")
    off = next(c for c in classes if c is not diagonal)
    assert diagonal.coboundary
    assert "potential" in diagonal.witness
    # the potential certificate actually works on every class edge
    h = diagonal.witness["potential"]
    for s in diagonal.states:
        for e in chain.edges[s]:
            assert h[e.target] - h[s] == e.payoff
    assert not off.coboundary
    cycle = off.witness["cycle"]
    payoffs = off.witness["payoffs"]
    total = off.witness["sum"]
    assert total != 0
    assert cycle[0] == cycle[-1]
    assert sum(payoffs) == total
    # every recorded step corresponds to an actual edge with that payoff
    for (u, v), p in zip(zip(cycle, cycle[1:]), payoffs):
        assert any(e.target == v and e.payoff == p for e in chain.edges[u])


def test_all_zero_payoffs_coboundary():
    chain = small_chain(
        {0: [(1, 1, 0)], 1: [(0, Fraction(1, 2), 0), (1, Fraction(1, 2), 0)]}, 2
    )
    ok, witness = coboundary_on_class(chain, [0, 1])
    assert ok
    assert set(witness["potential"].values()) == {0}


def test_stationary_and_payoff(twist2):
    sub, g = twist2
    chain = chain_of(build_simplified_automaton(sub, g))
    classes = recurrent_classes(chain)
    off = next(c for c in classes if chain.state_labels[c.states[0]] == "1|2")
    assert sorted(off.stationary.values()) == [Fraction(1, 2), Fraction(1, 2)]
    assert expected_payoff(chain, off) == 0
    diagonal = next(c for c in classes if c is not off)
    assert expected_payoff(chain, diagonal) == 0


def test_single_state_stationary():
    chain = small_chain(
        {0: [(0, Fraction(1, 2), 1), (0, Fraction(1, 2), -1)]}, 1
    )
    (cls,) = recurrent_classes(chain)
    assert cls.stationary == {0: Fraction(1)}


def test_variance_values(twist2):
    sub, g = twist2
    chain = chain_of(build_simplified_automaton(sub, g))
    classes = recurrent_classes(chain)
    diagonal = next(c for c in classes if chain.state_labels[c.states[0]] == "1|1")
    off = next(c for c in classes if c is not diagonal)
    assert asymptotic_variance(chain, diagonal) == 0
    assert asymptotic_variance(chain, off) == Fraction(8, 3)
    full = chain_of(build_tau_automaton(sub, g, 1))
    (cls,) = recurrent_classes(full)
    assert asymptotic_variance(full, cls) == Fraction(4, 3)


def test_variance_rejects_nonzero_mean():
    chain = small_chain({0: [(0, 1, 1)]}, 1)
    (cls,) = recurrent_classes(chain)
    with pytest.raises(ValueError):
        asymptotic_variance(chain, cls)


def test_variance_matches_exact_dp(twist2):
    # Var(S_n)/n converges to the Poisson-equation value on the class
    from subshift_lab.limitdist import exact_sum_distribution

    sub, g = twist2
    chain = chain_of(build_simplified_automaton(sub, g))
    classes = recurrent_classes(chain)
    off = next(c for c in classes if chain.state_labels[c.states[0]] == "1|2")
    init = {s: Fraction(1, len(off.states)) for s in off.states}
    v200, v400 = (
        exact_sum_distribution([chain] * 400, init, 400, checkpoints=(200, 400))
    )
    increment = (v400.variance() - v200.variance()) / 200
    assert abs(increment - Fraction(8, 3)) < Fraction(1, 100)


def test_variance_on_periodic_class():
    # two-state alternating chain with payoffs +1/-1: a coboundary
    chain = small_chain({0: [(1, 1, 1)], 1: [(0, 1, -1)]}, 2)
    (cls,) = recurrent_classes(chain)
    assert cls.period == 2
    assert cls.coboundary
    assert asymptotic_variance(chain, cls) == 0
    # a periodic class that is not a coboundary: 0 -> 1 with payoff +-1,
    # back with payoff 0; the Poisson solve must still work (period 2)
    chain2 = small_chain(
        {0: [(1, Fraction(1, 2), 1), (1, Fraction(1, 2), -1)], 1: [(0, 1, 0)]}, 2
    )
    (cls2,) = recurrent_classes(chain2)
    assert cls2.period == 2 and not cls2.coboundary
    assert asymptotic_variance(chain2, cls2) == Fraction(1, 2)


def test_product_chain(twist2):
    sub, g = twist2
    base = chain_of(build_tau_automaton(sub, g, 1))
    assert product_chain(sub, g, 1, [1]).kernel() == base.kernel()
    two = product_chain(sub, g, 2, [1, 1])
    assert two.kernel() == compose(base, base).kernel()
    assert all(e.prob.denominator == 9 for group in two.edges for e in group)
    assert is_strongly_connected(product_chain(sub, g, 1, 1))
    assert recurrent_classes(product_chain(sub, g, 1, 1))[0].period == 1


def test_compose_is_associative(twist2):
    sub, g = twist2
    rng = random.Random(3)
    layers = [chain_of(build_tau_automaton(sub, g, tau)) for tau in range(3)]
    for _ in range(4):
        a, b, c = (layers[rng.randrange(3)] for _ in range(3))
        assert compose(compose(a, b), c).kernel() == compose(a, compose(b, c)).kernel()


def test_product_chain_matches_power_substitution(twist2):
    """Layer composition equals the chain built directly from sigma^N splits."""
    sub, g = twist2
    d = 3
    rng = random.Random(0)
    n = sub.alphabet_size
    states = [(a, (v1, v2)) for a in range(n) for v1 in range(n) for v2 in range(n)]
    index = {st: i for i, st in enumerate(states)}
    for n_layers in (1, 2, 3):
        for _ in range(3):
            digits = [rng.randrange(d) for _ in range(n_layers)]
            offset = 0
            for k in digits:
                offset = offset * d + k
            img_n = {a: sub.apply_power(bytes([a]), n_layers) for a in range(n)}
            big_d = d**n_layers
            p = Fraction(1, big_d)
            groups = []
            for a, v in states:
                ia = img_n[a]
                iv = img_n[v[0]] + img_n[v[1]]
                merged: dict = {}
                for m in range(1, big_d + 1):
                    j = m + offset
                    tgt = index[(ia[m - 1], (iv[j - 1], iv[j]))]
                    pay = gamma_of_word(g, ia[m:]) + gamma_of_word(g, iv[: j - 1])
                    merged[(tgt, pay)] = merged.get((tgt, pay), Fraction(0)) + p
                groups.append(
                    tuple(ChainEdge(t, pr, pay) for (t, pay), pr in sorted(merged.items()))
                )
            direct = ChainGraph(tuple(states), tuple(map(str, states)), tuple(groups))
            assert product_chain(sub, g, n_layers, digits).kernel() == direct.kernel()


def test_letter_frequencies(twist2, sync3):
    assert letter_frequencies(twist2[0]) == [Fraction(1, 2), Fraction(1, 2)]
    freqs = letter_frequencies(sync3[0])
    assert sum(freqs) == 1 and all(f > 0 for f in freqs)


def test_block_frequencies_sum_to_one(twist2):
    freqs = block_frequencies(twist2[0], 4)
    assert sum(freqs.values()) == 1
    assert all(q > 0 for q in freqs.values())


def test_block_frequencies_match_empirical_counts(twist2):
    sub, _ = twist2
    freqs = block_frequencies(sub, 4)
    prefix = iterate_prefix(sub, 0, 3**9)
    counts: dict = {}
    for i in range(len(prefix) - 3):
        w = prefix[i : i + 4]
        counts[w] = counts.get(w, 0) + 1
    total = len(prefix) - 3
    assert set(counts) == set(freqs)
    for w, q in freqs.items():
        assert abs(counts[w] / total - float(q)) < 1e-3


def test_initial_distribution(twist2):
    sub, g = twist2
    init = initial_distribution(sub, g, 1)
    assert sum(init.probs.values()) == 1
    chain = chain_of(build_tau_automaton(sub, g, 0))
    idx = initial_state_indices(chain, init)
    assert sum(idx.values()) == 1
    with pytest.raises(ValueError):
        initial_distribution(sub, g, 0)
    with pytest.raises(ValueError):
        initial_distribution(parse_substitution("1: 11\n2: 22"), g, 1)


def test_factor_blocks(sync3):
    sub, _ = sync3
    pairs = factor_blocks(sub, 2)
    rendered = {sub.render(p) for p in pairs}
    # from the language of 1->12, 2->13, 3->23: "11" never occurs
    assert "11" not in rendered
    assert {"12", "13", "21", "23"} <= rendered


def test_ergodic_coefficient(twist2):
    ident = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    assert ergodic_coefficient(ident) == 0
    uniform = [[Fraction(1, 2)] * 2] * 2
    assert ergodic_coefficient(uniform) == 1
    sub, g = twist2
    three = product_chain(sub, g, 3, [1, 1, 1])
    alpha = ergodic_coefficient(three.transition_matrix())
    assert alpha > 0
    minimum = min(min(row) for row in three.transition_matrix())
    assert alpha >= minimum


def test_absorption_probabilities():
    # one transient state feeding two absorbing loops with probs 2/3, 1/3
    chain = small_chain(
        {
            0: [(1, Fraction(2, 3), 0), (2, Fraction(1, 3), 0)],
            1: [(1, 1, 0)],
            2: [(2, 1, 0)],
        },
        3,
    )
    classes = recurrent_classes(chain)
    assert transient_states(chain, classes) == [0]
    probs = absorption_probabilities(chain, classes, {0: Fraction(1)})
    assert sorted(probs) == [Fraction(1, 3), Fraction(2, 3)]
    # chained transients
    chain2 = small_chain(
        {
            0: [(1, Fraction(1, 2), 0), (3, Fraction(1, 2), 0)],
            1: [(0, Fraction(1, 2), 0), (2, Fraction(1, 2), 0)],
            2: [(2, 1, 0)],
            3: [(3, 1, 0)],
        },
        4,
    )
    classes2 = recurrent_classes(chain2)
    probs2 = absorption_probabilities(chain2, classes2, {0: Fraction(1)})
    # from 0: absorb at 2 with prob 1/3, at 3 with prob 2/3
    assert sorted(probs2) == [Fraction(1, 3), Fraction(2, 3)]


def test_chain_report(twist2):
    sub, g = twist2
    chain = chain_of(build_tau_automaton(sub, g, 1))
    init = initial_state_indices(chain, initial_distribution(sub, g, 1))
    report = chain_report(chain, init)
    assert report["strongly_connected"] is True
    assert report["classes"][0]["variance"] == "4/3"
    assert report["absorption_probabilities"] == ["1"]
    assert report["transient"] == []


def test_weak_components(twist2):
    sub, g = twist2
    chain = chain_of(build_tau_automaton(sub, g, 2))
    assert len(weakly_connected_components(chain)) == 2
    classes = recurrent_classes(chain)
    assert len(classes) == 2
    assert sum(1 for c in classes if c.coboundary) == 1


def test_dot_export_colors_classes(twist2):
    sub, g = twist2
    chain = chain_of(build_simplified_automaton(sub, g))
    dot = chain.to_dot(recurrent_classes(chain))
    assert "fillcolor" in dot and dot.count("->") == 12
