from fractions import Fraction

import numpy as np
import pytest

from treepoisson import (
    ClopenSet,
    CylinderFunction,
    build_regular,
    dirac,
    edge_flow,
    evaluate_clopen,
    evaluate_clopen_from,
    flow_away,
    from_leaf_masses,
    pair,
    random_measure,
    rotation_invariant,
)
from treepoisson.errors import DepthError, DomainError, MissingLeafError, NonRegularTreeError, NotAntichainError
from treepoisson.measure import EdgeCoefficients
from treepoisson.rng import SplitMix64
from treepoisson.tree import build_from_parents


def exact_random(tree, seed):
    rng = np.random.default_rng(seed)
    return from_leaf_masses(tree, [Fraction(int(a), int(b)) for a, b in
                                   zip(rng.integers(-20, 21, tree.leaves.size),
                                       rng.integers(1, 13, tree.leaves.size))])


class TestConstruction:
    def test_zero(self, t23):
        mu = from_leaf_masses(t23, [0] * t23.leaves.size)
        assert np.all(mu.cylinder == 0)

    def test_uniform_masses(self, t23):
        mu = from_leaf_masses(t23, [Fraction(1, 12)] * 12)
        assert mu.total == 1
        for v in t23.levels[1]:
            assert mu[v] == Fraction(1, 3)

    def test_single_leaf(self, t23):
        leaf = int(t23.leaves[5])
        mu = dirac(t23, leaf)
        on_path = set(t23.path_from_root(leaf))
        for v in range(t23.n):
            assert mu[v] == (1 if v in on_path else 0)
        assert mu.total == 1

    def test_mapping_input(self, t23):
        masses = {int(v): 1.0 for v in t23.leaves}
        assert from_leaf_masses(t23, masses).total == 12
        del masses[int(t23.leaves[0])]
        with pytest.raises(MissingLeafError):
            from_leaf_masses(t23, masses)
        with pytest.raises(DepthError):
            from_leaf_masses(t23, {**masses, 1: 0.0, int(t23.leaves[0]): 0.0})

    def test_dirac_depth(self, t23):
        with pytest.raises(DepthError):
            dirac(t23, 1)

    def test_exact_mode(self, t23):
        mu = exact_random(t23, 0)
        assert mu.exact and isinstance(mu.total, Fraction)


class TestEdgeFlow:
    def test_dirac_flows(self, t23):
        leaf = int(t23.leaves[7])
        mu = dirac(t23, leaf)
        path = t23.path_from_root(leaf)
        assert edge_flow(mu, (path[0], path[1])) == 1
        off = next(int(c) for c in t23.children[0] if c != path[1])
        assert edge_flow(mu, (0, off)) == 0
        assert edge_flow(mu, (path[1], path[0])) == 0

    def test_not_an_edge(self, t23):
        with pytest.raises(DomainError):
            edge_flow(dirac(t23, int(t23.leaves[0])), (1, 2))

    def test_comp_laws_exact(self, t25):
        mu = exact_random(t25, 3)
        for v in range(t25.n):
            out = [edge_flow(mu, (v, u)) for u in t25.neighbors(v)]
            if t25.depth[v] < t25.D:
                assert sum(out) == mu.total  # mass leaving any interior vertex
            for u in t25.neighbors(v):
                assert edge_flow(mu, (v, u)) + edge_flow(mu, (u, v)) == mu.total

    def test_flow_law_away(self, t25):
        mu = random_measure(t25, 11)
        coeffs = flow_away(mu)
        assert coeffs.max_violation() <= 1e-12 * abs(mu.total)
        for u, v in t25.edges():
            if t25.depth[v] < t25.D:
                want = sum(edge_flow(mu, (v, int(c))) for c in t25.children[v])
                assert edge_flow(mu, (u, v)) == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_validator_rejects(self, t23):
        vals = np.array(flow_away(random_measure(t23, 1)).values)
        vals[1] += 1
        bad = EdgeCoefficients(t23, vals)
        assert bad.max_violation() == pytest.approx(1.0)
        with pytest.raises(DomainError):
            bad.to_measure()

    def test_flow_roundtrip(self, t25):
        mu = random_measure(t25, 5)
        back = flow_away(mu).to_measure()
        np.testing.assert_allclose(back.cylinder, mu.cylinder, rtol=1e-13)


class TestRotationInvariant:
    def test_example_values(self):
        t = build_regular(2, 4)
        mu = rotation_invariant(t, exact=True)
        assert edge_flow(mu, (0, 1)) == Fraction(1, 3)
        c = int(t.children[1][0])
        assert edge_flow(mu, (1, c)) == Fraction(1, 6)
        assert mu.total == 1

    @pytest.mark.parametrize("q", [1, 2, 3])
    def test_flow_formula_any_center(self, q):
        t = build_regular(q, 4)
        for x in [0, 1, int(t.levels[2][0]), int(t.leaves[0])]:
            mu = rotation_invariant(t, x, exact=True)
            assert mu.total == 1
            for a in range(t.n):
                for b in t.neighbors(a):
                    away = t.distance(x, b) > t.distance(x, a)
                    if away:
                        want = Fraction(1, q + 1) / q ** t.distance(x, a)
                    else:
                        want = 1 - Fraction(1, q + 1) / q ** t.distance(x, b)
                    assert edge_flow(mu, (a, b)) == want

    def test_requires_regular(self):
        t = build_from_parents([(1, 0), (2, 0), (3, 1), (4, 1), (5, 2)])
        with pytest.raises(NonRegularTreeError):
            rotation_invariant(t)


class TestClopen:
    def test_canonical_merge(self, t23):
        kids = [int(c) for c in t23.children[1]]
        assert ClopenSet(t23, kids).antichain == (1,)
        everything = ClopenSet.from_leaves(t23, t23.leaves)
        assert everything == ClopenSet.whole(t23)
        assert everything.antichain == (0,)

    def test_not_antichain(self, t23):
        with pytest.raises(NotAntichainError):
            ClopenSet(t23, [1, int(t23.children[1][0])])

    def test_evaluate_examples(self, t23):
        mu = random_measure(t23, 2)
        assert evaluate_clopen(mu, ClopenSet.whole(t23)) == mu.total
        for v in range(t23.n):
            assert evaluate_clopen(mu, ClopenSet(t23, [v])) == mu[v]
        assert evaluate_clopen(mu, ClopenSet.empty(t23)) == 0

    def test_level_set(self, t23):
        U = ClopenSet(t23, [int(t23.children[1][0]), 2])
        assert list(U.level_set(0)) == [0]
        assert set(U.level_set(1).tolist()) == {1, 2}
        assert U.level_set(3).size == 2 + 4

    def test_additivity_exact(self, t25):
        mu = exact_random(t25, 9)
        rng = np.random.default_rng(9)
        leaves = t25.leaves
        for _ in range(50):
            labels = rng.integers(0, 3, leaves.size)
            A = ClopenSet.from_leaves(t25, leaves[labels == 0])
            B = ClopenSet.from_leaves(t25, leaves[labels == 1])
            assert A.isdisjoint(B)
            assert evaluate_clopen(mu, A | B) == evaluate_clopen(mu, A) + evaluate_clopen(mu, B)
            C = ClopenSet.from_leaves(t25, leaves[labels != 2])
            assert C == A | B


class TestPairing:
    def test_constant_and_indicator(self, t23):
        mu = random_measure(t23, 4)
        assert pair(mu, CylinderFunction.constant(t23)) == pytest.approx(mu.total)
        for v in range(t23.n):
            assert pair(mu, CylinderFunction.indicator(t23, v)) == pytest.approx(mu[v])
            assert pair(mu, CylinderFunction.indicator(t23, v, level=3)) == pytest.approx(mu[v])

    def test_value_grouped_sum(self, t23):
        # the sum over distinct values z of z * mu(p^-1(z))
        mu = random_measure(t23, 8)
        vals = np.array([1, 2, 1, 3, 2, 1], dtype=complex)
        p = CylinderFunction(t23, 2, vals)
        grouped = 0
        for z in set(vals.tolist()):
            U = ClopenSet(t23, t23.levels[2][vals == z])
            grouped += z * evaluate_clopen(mu, U)
        assert pair(mu, p) == pytest.approx(grouped, rel=1e-14)

    def test_bilinear(self, t25):
        rng = np.random.default_rng(0)
        for seed in range(10):
            mu, nu = random_measure(t25, seed), random_measure(t25, seed + 100)
            lvl_p, lvl_q = rng.integers(0, 6, 2)
            p = CylinderFunction(t25, int(lvl_p), rng.normal(size=t25.levels[lvl_p].size)
                                 + 1j * rng.normal(size=t25.levels[lvl_p].size))
            q = CylinderFunction(t25, int(lvl_q), rng.normal(size=t25.levels[lvl_q].size))
            a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            # oracle: expand over leaves directly
            leafwise = lambda m, f: sum(f.at(t25.leaves) * m.leaf_masses)
            assert pair(mu, a * p + b * q) == pytest.approx(a * pair(mu, p) + b * pair(mu, q), rel=1e-12)
            assert pair(a * mu + b * nu, p) == pytest.approx(a * pair(mu, p) + b * pair(nu, p), rel=1e-12)
            assert pair(mu, p) == pytest.approx(leafwise(mu, p), rel=1e-12)


class TestBasePoint:
    def test_reroot_exact_all_neighbors(self, t25):
        mu = exact_random(t25, 21)
        rng = np.random.default_rng(21)
        for base in t25.neighbors(0):
            for _ in range(40):
                U = ClopenSet.from_leaves(t25, t25.leaves[rng.random(t25.leaves.size) < 0.4])
                assert evaluate_clopen_from(mu, U, base) == evaluate_clopen(mu, U)

    def test_reroot_deeper_base(self, t25):
        mu = exact_random(t25, 22)
        U = ClopenSet(t25, [1, int(t25.levels[3][-1])])
        for base in [int(t25.levels[2][3]), int(t25.leaves[10])]:
            assert evaluate_clopen_from(mu, U, base) == evaluate_clopen(mu, U)


def test_splitmix_reference_values():
    # published SplitMix64 test vector for seed 1234567
    g = SplitMix64(1234567)
    assert [g.next_u64() for _ in range(3)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423,
    ]


def test_random_measure_reproducible(t23):
    a, b = random_measure(t23, 42), random_measure(t23, 42)
    assert np.array_equal(a.leaf_masses, b.leaf_masses)
    m = a.leaf_masses
    assert np.all((m.real >= 0) & (m.real < 1) & (m.imag >= 0) & (m.imag < 1))
    assert not np.array_equal(m, random_measure(t23, 43).leaf_masses)
