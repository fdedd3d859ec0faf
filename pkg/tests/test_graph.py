import numpy as np
import pytest

from bnrefine.errors import (
    CptError,
    CycleError,
    NetworkFormatError,
    NodeMismatchError,
    SelfLoopError,
    UnknownNodeError,
)
from bnrefine.graph import (
    Cpt,
    DagStructure,
    Network,
    Variable,
    is_acyclic,
    load_network,
    network_from_dict,
    network_to_dict,
    network_to_json,
    structural_diff,
    substitute_parents,
    topological_order,
)
from helpers import dag_from_arcs, random_dag


def dag(arcs, nodes):
    return dag_from_arcs(nodes, arcs)


class TestVariable:
    def test_needs_two_states(self):
        with pytest.raises(NetworkFormatError):
            Variable("X", ("only",))

    def test_rejects_duplicate_states(self):
        with pytest.raises(NetworkFormatError):
            Variable("X", ("a", "a"))

    def test_states_coerced_to_tuple(self):
        v = Variable("X", ["a", "b"])
        assert v.states == ("a", "b")
        assert v.n_states == 2


class TestDagStructure:
    def test_rejects_self_loop(self):
        with pytest.raises(SelfLoopError):
            DagStructure(("A",), {"A": frozenset({"A"})})

    def test_rejects_unknown_parent(self):
        with pytest.raises(UnknownNodeError):
            DagStructure(("A",), {"A": frozenset({"Z"})})

    def test_rejects_duplicate_nodes(self):
        with pytest.raises(NetworkFormatError):
            DagStructure(("A", "A"), {})

    def test_arcs_sorted(self):
        g = dag([("B", "C"), ("A", "C"), ("A", "B")], "ABC")
        assert g.arcs() == (("A", "B"), ("A", "C"), ("B", "C"))

    def test_equality_ignores_node_order(self):
        g1 = dag([("A", "B")], ("A", "B"))
        g2 = dag([("A", "B")], ("B", "A"))
        assert g1 == g2
        assert hash(g1) == hash(g2)

    def test_restrict(self):
        g = dag([("A", "B"), ("B", "C"), ("D", "C")], "ABCD")
        sub = g.restrict(["A", "B", "C"])
        assert sub.arcs() == (("A", "B"), ("B", "C"))


class TestAcyclicity:
    def test_empty_graph(self):
        assert is_acyclic(DagStructure((), {}))

    def test_chain(self):
        assert is_acyclic(dag([("A", "B"), ("B", "C")], "ABC"))

    def test_three_cycle(self):
        assert not is_acyclic(dag([("A", "B"), ("B", "C"), ("C", "A")], "ABC"))

    def test_two_cycle(self):
        assert not is_acyclic(dag([("A", "B"), ("B", "A")], "AB"))


class TestTopologicalOrder:
    def test_single_arc(self):
        assert topological_order(dag([("A", "B")], "AB")) == ["A", "B"]

    def test_lexicographic_tie_break(self):
        assert topological_order(dag([], ("B", "A"))) == ["A", "B"]

    def test_cycle_reported(self):
        with pytest.raises(CycleError) as exc:
            topological_order(dag([("A", "B"), ("B", "A")], "AB"))
        cycle = exc.value.cycle
        assert cycle[0] == cycle[-1] and set(cycle) == {"A", "B"}

    def test_respects_arcs_on_random_dags(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            g = random_dag(rng, [f"N{i}" for i in range(8)])
            order = topological_order(g)
            assert sorted(order) == sorted(g.nodes)
            pos = {n: i for i, n in enumerate(order)}
            for p, c in g.arcs():
                assert pos[p] < pos[c]


class TestSubstituteParents:
    def test_clear_parents(self):
        g = dag([("A", "B")], "AB")
        assert substitute_parents(g, {"B": set()}).arcs() == ()

    def test_redirect(self):
        g = dag([("A", "B"), ("B", "C")], "ABC")
        out = substitute_parents(g, {"C": {"A"}})
        assert out.arcs() == (("A", "B"), ("A", "C"))

    def test_cyclic_result_returned_as_is(self):
        g = dag([("A", "B")], "AB")
        out = substitute_parents(g, {"A": {"B"}})
        assert out.arcs() == (("A", "B"), ("B", "A"))
        assert not is_acyclic(out)

    def test_unknown_node(self):
        g = dag([("A", "B")], "AB")
        with pytest.raises(UnknownNodeError):
            substitute_parents(g, {"Z": set()})
        with pytest.raises(UnknownNodeError):
            substitute_parents(g, {"A": {"Z"}})

    def test_self_loop(self):
        g = dag([("A", "B")], "AB")
        with pytest.raises(SelfLoopError):
            substitute_parents(g, {"A": {"A"}})

    def test_original_untouched(self):
        g = dag([("A", "B")], "AB")
        substitute_parents(g, {"B": set()})
        assert g.arcs() == (("A", "B"),)


class TestStructuralDiff:
    def test_identical_structures(self):
        g = dag([("A", "B"), ("B", "C")], "ABC")
        d = structural_diff(g, g)
        assert d.is_empty()
        assert all(c.total == 0 for c in d.per_node.values())

    def test_mixed_edits(self):
        # five-node domain; the partial structure covers three of them
        h_n = dag([("1", "2"), ("2", "3"), ("4", "5")], ("1", "2", "3", "4", "5"))
        h_p = dag([("1", "2"), ("3", "2")], ("1", "2", "3"))
        d = structural_diff(h_n, h_p)
        assert d.reversed_arcs == (("2", "3"),)
        assert d.counts_at("3").reversed == 1
        assert d.additional_arcs == (("4", "5"),)
        assert d.counts_at("5").additional == 1
        assert d.missing_arcs == ()
        assert (d.n_reversed, d.n_additional, d.n_missing) == (1, 1, 0)

    def test_missing_arcs(self):
        h_n = dag([("A", "B")], "ABC")
        h_p = dag([("A", "B"), ("A", "C"), ("C", "B")], "ABC")
        d = structural_diff(h_n, h_p)
        assert d.additional_arcs == ()
        assert d.reversed_arcs == ()
        assert d.missing_arcs == (("A", "C"), ("C", "B"))
        assert d.counts_at("C").missing == 1
        assert d.counts_at("B").missing == 1

    def test_node_mismatch(self):
        with pytest.raises(NodeMismatchError):
            structural_diff(dag([], "AB"), dag([], "ABC"))

    def test_round_trip_on_random_pairs(self):
        # applying (reverse the reversed, add the additional, drop the missing)
        # to the partial structure must rebuild the reference arc set exactly
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 13))
            names = [f"N{i}" for i in range(n)]
            h_n = random_dag(rng, names)
            k = int(rng.integers(1, n + 1))
            observed = sorted(rng.choice(names, size=k, replace=False))
            h_p = random_dag(rng, observed)
            d = structural_diff(h_n, h_p)

            arcs = set(h_p.arcs())
            arcs -= {(v, u) for (u, v) in d.reversed_arcs}
            arcs |= set(d.reversed_arcs)
            arcs |= set(d.additional_arcs)
            arcs -= set(d.missing_arcs)
            assert arcs == set(h_n.arcs())

    def test_per_node_totals_match_arc_lists(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            names = [f"N{i}" for i in range(int(rng.integers(2, 13)))]
            h_n = random_dag(rng, names)
            observed = sorted(
                rng.choice(names, size=int(rng.integers(1, len(names) + 1)), replace=False)
            )
            h_p = random_dag(rng, observed)
            d = structural_diff(h_n, h_p)
            assert sum(c.reversed for c in d.per_node.values()) == d.n_reversed
            assert sum(c.additional for c in d.per_node.values()) == d.n_additional
            assert sum(c.missing for c in d.per_node.values()) == d.n_missing

    def test_diff_after_substitution_reports_only_edited_nodes(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            names = [f"N{i}" for i in range(8)]
            g = random_dag(rng, names)
            target = names[int(rng.integers(0, 8))]
            others = [n for n in names if n != target]
            new_parents = {
                n for n in others if rng.random() < 0.3
            }
            edited = substitute_parents(g, {target: new_parents})
            if not is_acyclic(edited):
                continue
            d = structural_diff(g, edited)
            touched = {target}
            for n, c in d.per_node.items():
                if c.total and n not in touched:
                    # reversed arcs may be charged at the counterpart node
                    assert any(
                        u == n or v == n
                        for u, v in d.reversed_arcs + d.additional_arcs + d.missing_arcs
                        if target in (u, v)
                    )


VARS = (Variable("A", ("f", "t")), Variable("B", ("f", "t")))


def tiny_network(with_cpts=True):
    structure = dag([("A", "B")], "AB")
    cpts = None
    if with_cpts:
        cpts = {
            "A": Cpt("A", (), (), np.array([[0.25, 0.75]])),
            "B": Cpt("B", ("A",), (2,), np.array([[1.0, 0.0], [0.1, 0.9]])),
        }
    return Network(variables=VARS, structure=structure, cpts=cpts)


class TestNetwork:
    def test_cyclic_structure_rejected(self):
        with pytest.raises(CycleError):
            Network(variables=VARS, structure=dag([("A", "B"), ("B", "A")], "AB"))

    def test_variables_must_match_nodes(self):
        with pytest.raises(NetworkFormatError):
            Network(variables=VARS, structure=dag([], "ABC"))

    def test_partial_cpts_rejected(self):
        with pytest.raises(NetworkFormatError):
            Network(
                variables=VARS,
                structure=dag([("A", "B")], "AB"),
                cpts={"A": Cpt("A", (), (), np.array([[0.5, 0.5]]))},
            )

    def test_unnormalized_row_rejected(self):
        with pytest.raises(CptError):
            Cpt("A", (), (), np.array([[0.5, 0.6]]))

    def test_normalization_tolerance(self):
        Cpt("A", (), (), np.array([[0.5, 0.5 + 5e-10]]))  # inside 1e-9

    def test_json_round_trip(self):
        net = tiny_network()
        doc = network_to_dict(net)
        back = network_from_dict(doc)
        assert back == net
        assert back.cpts is not None
        np.testing.assert_allclose(back.cpts["B"].table, net.cpts["B"].table)

    def test_json_byte_stable(self):
        assert network_to_json(tiny_network()) == network_to_json(tiny_network())

    def test_json_arcs_sorted(self):
        structure = dag([("B", "C"), ("A", "C")], "ABC")
        net = Network(
            variables=(Variable("C", ("x", "y")),) + VARS, structure=structure
        )
        doc = network_to_dict(net)
        assert doc["arcs"] == [["A", "C"], ["B", "C"]]
        assert "cpts" not in doc

    def test_load_from_path(self, tmp_path):
        path = tmp_path / "net.json"
        path.write_text(network_to_json(tiny_network()))
        assert load_network(path) == tiny_network()

    def test_cpt_row_coverage_enforced(self):
        doc = network_to_dict(tiny_network())
        del doc["cpts"]["B"][0]
        with pytest.raises(CptError):
            network_from_dict(doc)

    def test_duplicate_cpt_row_rejected(self):
        doc = network_to_dict(tiny_network())
        doc["cpts"]["B"].append(doc["cpts"]["B"][0])
        with pytest.raises(CptError):
            network_from_dict(doc)
