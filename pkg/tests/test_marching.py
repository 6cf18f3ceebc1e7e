import numpy as np
import pytest

from polyreach import (
    ActivationPattern,
    EmptyCellError,
    GeometryError,
    HPolyhedron,
    MarchBudgets,
    ReluNetwork,
    affine_map_from_ap,
    augment,
    cell_from_ap,
    chebyshev_center,
    compose,
    march,
    neighbor_ap,
    neuron_hyperplane,
)
from polyreach.marching import cell_from_record, cell_record

from conftest import facet_interior_point, membership_counts, random_net, sample_box


def scalar_relu_net():
    return ReluNetwork([(np.array([[1.0]]), np.array([0.0])),
                        (np.array([[1.0]]), np.array([0.0]))])


def arrangement_box(net, margin=2.0):
    """2D box containing all pairwise intersection points of first-layer lines."""
    W, b = net.layers[0]
    pts = []
    for i in range(W.shape[0]):
        for j in range(i + 1, W.shape[0]):
            M = np.array([W[i], W[j]])
            if abs(np.linalg.det(M)) < 1e-9:
                continue
            pts.append(np.linalg.solve(M, -np.array([b[i], b[j]])))
    pts = np.array(pts) if pts else np.zeros((1, 2))
    return pts.min(axis=0) - margin, pts.max(axis=0) + margin


class TestAffineMapFromAp:
    def test_scalar_relu_both_patterns(self):
        anet = augment(scalar_relu_net())
        on = affine_map_from_ap(anet, ActivationPattern([1]))
        off = affine_map_from_ap(anet, ActivationPattern([0]))
        assert on.C[0, 0] == 1.0 and on.d[0] == 0.0
        assert off.C[0, 0] == 0.0 and off.d[0] == 0.0

    def test_all_ones_equals_plain_product(self, rng):
        net = random_net(rng, [4, 3], in_dim=2, out_dim=2)
        anet = augment(net)
        m = affine_map_from_ap(anet, ActivationPattern(np.ones(7, dtype=np.uint8)))
        plain = anet.output
        for M in reversed(anet.hidden):
            plain = plain @ M
        assert np.allclose(np.column_stack([m.C, m.d]), plain, atol=1e-12)

    def test_matches_network_on_cell_interior(self, rng):
        net = random_net(rng, [6, 5], in_dim=2, out_dim=2)
        anet = augment(net)
        for _ in range(20):
            x = rng.uniform(-1.5, 1.5, 2)
            m = affine_map_from_ap(anet, net.activation_pattern(x))
            assert np.max(np.abs(m.apply(x) - net.evaluate(x))) < 1e-9

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            affine_map_from_ap(augment(scalar_relu_net()), ActivationPattern([1, 0]))


class TestNeuronHyperplane:
    def test_active_scalar_neuron_stores_flipped_sign(self):
        anet = augment(scalar_relu_net())
        c = neuron_hyperplane(anet, ActivationPattern([1]), 0, 0)
        assert np.allclose(c.a, [-1.0]) and c.b == 0.0
        assert c.provenance == ("neuron:0:0",)

    def test_dead_feed_gives_degenerate_row(self):
        # second neuron sees only the dead first neuron, with zero bias
        net = ReluNetwork([
            (np.array([[1.0]]), np.array([0.0])),
            (np.array([[1.0]]), np.array([0.0])),
            (np.array([[1.0]]), np.array([0.0])),
        ])
        anet = augment(net)
        c = neuron_hyperplane(anet, ActivationPattern([0, 0]), 1, 0)
        assert c.is_degenerate

    def test_sign_matches_preactivation_in_deep_net(self, rng):
        net = random_net(rng, [6, 5, 4], in_dim=3, out_dim=2)
        anet = augment(net)
        widths = net.hidden_widths
        for _ in range(100):
            x = rng.uniform(-1.5, 1.5, 3)
            ap = net.activation_pattern(x)
            pres = net.preactivations(x)
            layer = int(rng.integers(len(widths)))
            idx = int(rng.integers(widths[layer]))
            c = neuron_hyperplane(anet, ap, layer, idx)
            if c.is_constant:
                continue
            # stored as <=: active neurons satisfy it with a.x - b <= 0
            margin = float(c.a @ x - c.b)
            assert margin <= 1e-9
            if abs(pres[layer][idx]) > 1e-9:
                assert margin < 0

    def test_index_errors(self):
        anet = augment(scalar_relu_net())
        with pytest.raises(IndexError):
            neuron_hyperplane(anet, ActivationPattern([1]), 1, 0)


class TestCellFromAp:
    def test_scalar_relu_active_cell(self):
        anet = augment(scalar_relu_net())
        dom = HPolyhedron.from_box([-1.0], [1.0])
        cell = cell_from_ap(anet, ActivationPattern([1]), dom)
        rows = {(round(c.a[0], 9), round(c.b, 9)) for c in cell.hrep.constraints}
        assert rows == {(-1.0, 0.0), (1.0, 1.0)}

    def test_arrangement_cells_use_at_most_k_lines(self, rng):
        net = random_net(rng, [3], in_dim=2, out_dim=1)
        anet = augment(net)
        lo, hi = arrangement_box(net)
        res = march(anet, HPolyhedron.from_box(lo, hi))
        W = net.layers[0][0]
        lines = W / np.linalg.norm(W, axis=1, keepdims=True)
        for cell in res.cells:
            neuron_rows = [
                c for c in cell.hrep.constraints
                if any(t.startswith("neuron:") for t in c.provenance)
            ]
            assert len(neuron_rows) <= 3
            for c in neuron_rows:
                align = np.abs(lines @ c.a)
                assert np.max(align) == pytest.approx(1.0, abs=1e-9)

    def test_composed_relu_second_layer_adds_no_facet(self):
        net = compose(scalar_relu_net(), 2)
        anet = augment(net)
        dom = HPolyhedron.from_box([-1.0], [1.0])
        on = cell_from_ap(anet, ActivationPattern([1, 1]), dom)
        # duplicate: both neurons share the x >= 0 facet
        facet = [c for c in on.hrep.constraints if "neuron:0:0" in c.provenance][0]
        assert "neuron:1:0" in facet.provenance
        off = cell_from_ap(anet, ActivationPattern([0, 0]), dom)
        assert (1, 0) in off.degenerate_neurons  # dead second neuron: degenerate row

    def test_unrealizable_pattern_raises_empty(self):
        anet = augment(scalar_relu_net())
        dom = HPolyhedron.from_box([1.0], [2.0])  # domain forces the neuron active
        with pytest.raises(EmptyCellError):
            cell_from_ap(anet, ActivationPattern([0]), dom)

    def test_interior_samples_match_network_and_pattern(self, rng):
        net = random_net(rng, [5, 4], in_dim=2, out_dim=2)
        anet = augment(net)
        res = march(anet, HPolyhedron.from_box([-2, -2], [2, 2]))
        for cell in res.cells:
            center, radius = chebyshev_center(cell.hrep)
            for _ in range(10):
                u = rng.standard_normal(2)
                x = center + u / np.linalg.norm(u) * rng.uniform(0, 0.9) * radius
                assert np.max(np.abs(net.evaluate(x) - cell.map.apply(x))) < 1e-7
                assert net.activation_pattern(x) == cell.ap


class TestNeighborAp:
    def test_single_layer_crossing_flips_exactly_one_bit(self, rng):
        net = random_net(rng, [4], in_dim=2, out_dim=1)
        anet = augment(net)
        res = march(anet, HPolyhedron.from_box([-2, -2], [2, 2]))
        for cell in res.cells:
            for i, facet in enumerate(cell.hrep.constraints):
                if "domain" in facet.provenance:
                    continue
                nap = neighbor_ap(anet, cell, facet)
                assert int(np.sum(nap.bits != cell.ap.bits)) == 1

    def test_dead_neuron_transition_matches_sampling(self):
        # u = relu(w * relu(x)): u is dead for x < 0; across x = 0 it revives
        # with the sign of w
        for w, expected_bits in ((1.0, [1, 1]), (-1.0, [1, 0])):
            net = ReluNetwork([
                (np.array([[1.0]]), np.array([0.0])),
                (np.array([[w]]), np.array([0.0])),
                (np.array([[1.0]]), np.array([0.0])),
            ])
            anet = augment(net)
            dom = HPolyhedron.from_box([-1.0], [1.0])
            cell = cell_from_ap(anet, ActivationPattern([0, 0]), dom)
            assert cell.degenerate_neurons == {(1, 0)}
            facet = [c for c in cell.hrep.constraints if c.provenance == ("neuron:0:0",)][0]
            nap = neighbor_ap(anet, cell, facet)
            assert nap.bits.tolist() == expected_bits
            x_f = facet_interior_point(cell.hrep, list(cell.hrep.constraints).index(facet))
            x_prime = x_f + 1e-6 * facet.a
            assert net.activation_pattern(x_prime) == nap

    def test_duplicate_provenance_flips_all_bits(self):
        # relu(x) - relu(-x) = x: both neurons share the hyperplane x = 0
        net = ReluNetwork([
            (np.array([[1.0], [-1.0]]), np.zeros(2)),
            (np.array([[1.0, -1.0]]), np.zeros(1)),
        ])
        anet = augment(net)
        dom = HPolyhedron.from_box([-1.0], [1.0])
        cell = cell_from_ap(anet, ActivationPattern([1, 0]), dom)
        facet = [c for c in cell.hrep.constraints
                 if any(t.startswith("neuron:") for t in c.provenance)][0]
        assert set(facet.provenance) >= {"neuron:0:0", "neuron:0:1"}
        nap = neighbor_ap(anet, cell, facet)
        assert nap.bits.tolist() == [0, 1]
        x_f = facet_interior_point(cell.hrep, list(cell.hrep.constraints).index(facet))
        assert net.activation_pattern(x_f + 1e-6 * facet.a) == nap

    def test_domain_facet_is_rejected(self):
        anet = augment(scalar_relu_net())
        dom = HPolyhedron.from_box([-1.0], [1.0])
        cell = cell_from_ap(anet, ActivationPattern([1]), dom)
        domain_facet = [c for c in cell.hrep.constraints if "domain" in c.provenance][0]
        with pytest.raises(GeometryError):
            neighbor_ap(anet, cell, domain_facet)

    def test_cross_facet_sampling_oracle_deep_nets(self, rng):
        for widths, in_dim in ([[6], 2], [[5, 4], 2], [[4, 4, 3], 3]):
            net = random_net(rng, widths, in_dim=in_dim, out_dim=2)
            anet = augment(net)
            dom = HPolyhedron.from_box([-1.5] * in_dim, [1.5] * in_dim)
            res = march(anet, dom)
            for cell in res.cells:
                for i, facet in enumerate(cell.hrep.constraints):
                    if "domain" in facet.provenance:
                        continue
                    nap = neighbor_ap(anet, cell, facet)
                    x_f = facet_interior_point(cell.hrep, i)
                    assert net.activation_pattern(x_f + 1e-6 * facet.a) == nap


class TestMarch:
    def test_single_neuron_two_cells(self):
        anet = augment(scalar_relu_net())
        res = march(anet, HPolyhedron.from_box([-1.0], [1.0]))
        assert res.stats.cells == 2

    def test_arrangement_count_formula(self, rng):
        for k in (2, 3, 4):
            net = random_net(rng, [k], in_dim=2, out_dim=1)
            anet = augment(net)
            lo, hi = arrangement_box(net)
            res = march(anet, HPolyhedron.from_box(lo, hi))
            assert res.stats.cells == 1 + k + k * (k - 1) // 2

    def test_coverage_and_disjointness(self, rng):
        net = random_net(rng, [5, 4], in_dim=2, out_dim=2)
        anet = augment(net)
        dom = HPolyhedron.from_box([-2, -2], [2, 2])
        res = march(anet, dom)
        X = sample_box(rng, [-2, -2], [2, 2], 4000)
        counts = membership_counts(res.cells, X, tol=1e-8)
        assert np.all(counts >= 1)
        multi = X[counts > 1]
        for x in multi:
            dists = []
            for cell in res.cells:
                if cell.hrep.contains(x, tol=1e-8):
                    dists.extend(abs(float(c.a @ x - c.b)) for c in cell.hrep.constraints)
            assert min(dists) <= 1e-6

    def test_visited_guard_never_readmits(self, rng):
        net = random_net(rng, [5], in_dim=2, out_dim=1)
        anet = augment(net)
        seen = []
        march(anet, HPolyhedron.from_box([-2, -2], [2, 2]), visitor=lambda c: seen.append(c.ap.key) or True)
        assert len(seen) == len(set(seen))

    def test_anytime_abort_processes_fewer_cells(self, rng):
        net = random_net(rng, [6], in_dim=2, out_dim=1)
        anet = augment(net)
        dom = HPolyhedron.from_box([-2, -2], [2, 2])
        full = march(anet, dom)
        assert full.stats.cells > 2
        count = 0

        def stop_after_two(cell):
            nonlocal count
            count += 1
            return count < 2

        partial = march(anet, dom, visitor=stop_after_two)
        assert partial.stats.aborted and not partial.stats.complete
        assert partial.stats.cells == 2 < full.stats.cells

    def test_budget_flags_incomplete(self, rng):
        net = random_net(rng, [6], in_dim=2, out_dim=1)
        anet = augment(net)
        res = march(anet, HPolyhedron.from_box([-2, -2], [2, 2]),
                    budgets=MarchBudgets(max_cells=3))
        assert not res.stats.complete and res.stats.cells == 3

    def test_deterministic_cell_order(self, rng):
        net = random_net(rng, [6], in_dim=2, out_dim=1)
        anet = augment(net)
        dom = HPolyhedron.from_box([-2, -2], [2, 2])
        a = march(anet, dom, rng_seed=7)
        b = march(anet, dom, rng_seed=7)
        assert [c.ap.key for c in a.cells] == [c.ap.key for c in b.cells]

    def test_empty_domain_rejected(self):
        anet = augment(scalar_relu_net())
        with pytest.raises(GeometryError):
            march(anet, HPolyhedron.from_arrays([[1.0], [-1.0]], [0.0, -1.0]))

    def test_seed_on_cell_boundary_is_perturbed(self):
        # x = 0 lies exactly on the neuron hyperplane; marching must reseed
        anet = augment(scalar_relu_net())
        res = march(anet, HPolyhedron.from_box([-1.0], [1.0]), seed=np.array([0.0]))
        assert res.stats.cells == 2

    def test_seed_outside_domain_is_a_clean_error(self):
        anet = augment(scalar_relu_net())
        with pytest.raises(GeometryError, match="seed"):
            march(anet, HPolyhedron.from_box([-1.0], [1.0]), seed=np.array([50.0]))

    def test_discards_empty_neighbors_of_near_duplicate_planes(self):
        # two almost-coincident hyperplanes create a sliver cell the marcher
        # must drop (and count) without losing the fat cells around it
        net = ReluNetwork([
            (np.array([[1.0, 0.0], [1.0, 1e-7]]), np.array([0.0, 0.0])),
            (np.array([[1.0, 1.0]]), np.array([0.0])),
        ])
        anet = augment(net)
        res = march(anet, HPolyhedron.from_box([-1, -1], [1, 1]))
        X = sample_box(np.random.default_rng(0), [-1, -1], [1, 1], 2000)
        assert (membership_counts(res.cells, X, tol=1e-8) >= 1).all()


class TestCellRecord:
    def test_round_trip(self, rng):
        net = random_net(rng, [4], in_dim=2, out_dim=1)
        anet = augment(net)
        res = march(anet, HPolyhedron.from_box([-2, -2], [2, 2]))
        cell = res.cells[0]
        rec = cell_record(cell)
        back = cell_from_record(rec, net.hidden_neuron_count, 2)
        assert back.ap == cell.ap
        assert np.allclose(back.map.C, cell.map.C)
        assert np.allclose(back.hrep.A, cell.hrep.A)
        assert back.hrep.constraints[0].provenance == cell.hrep.constraints[0].provenance
