"""Smoke tests for the python bindings: tiny graphs end to end."""

import json

import pytest

import prafilter as pf


@pytest.fixture(scope="module")
def sibling_graph():
    return pf.KnowledgeGraph.load("P1\tparent\tX\nP1\tparent\tY\nX\tsibling\tY\n")


def test_graph_loading_and_neighbors(sibling_graph):
    g = sibling_graph
    assert g.triple_count == 3
    assert g.entity_count == 3
    assert g.neighbors("P1", "parent") == ["X", "Y"]
    assert g.neighbors("X", "_parent") == ["P1"]
    assert g.neighbors("X", "nope") == []
    assert g.has_triple("X", "sibling", "Y")
    assert "relation.parent: 2" in g.stats_text()


def test_rw_probability_uniform_split(sibling_graph):
    dist = pf.rw_probability(sibling_graph, "parent", "P1")
    assert dist == {"X": 0.5, "Y": 0.5}
    two_step = pf.rw_probability(sibling_graph, "_parent,parent", "X")
    assert two_step == {"X": 0.5, "Y": 0.5}


def test_path_existence_and_display(sibling_graph):
    assert pf.path_exists(sibling_graph, "_parent,parent", "X", "Y")
    assert not pf.path_exists(sibling_graph, "parent", "X", "Y")
    assert pf.path_display("_parent,parent") == "_parent(x,a) ∧ parent(a,y)"
    assert pf.reverse_and_invert("_parent,parent") == "_parent,parent"
    assert pf.reverse_and_invert("a,_b") == "b,_a"


def test_enumerate_paths_finds_the_sibling_path(sibling_graph):
    paths, truncated = pf.enumerate_paths(
        sibling_graph, [("X", "Y")], max_len=2, min_support=1
    )
    assert "_parent,parent" in paths
    assert truncated == 0


def test_remove_relation_edges(sibling_graph):
    g2 = sibling_graph.remove_relation_edges("sibling", [("X", "Y")])
    assert g2.triple_count == 2
    assert "sibling" not in g2.relation_catalog()


@pytest.fixture(scope="module")
def small_instance():
    spec = pf.SynthSpec.standard(3)
    spec.target_edges = 60
    spec.planted = 10
    spec.decoys = 20
    spec.filler_negatives = 90
    # shrink the pools to match
    spec = pf.SynthSpec.from_json(
        json.dumps(
            {
                **json.loads(spec.to_json()),
                "types": [
                    {"name": "proc", "count": 200},
                    {"name": "prod", "count": 200},
                    {"name": "gene", "count": 100},
                ],
            }
        )
    )
    return pf.generate_synth(spec)


def test_planted_recovery_end_to_end(small_instance):
    out = small_instance
    g = out.graph()
    model = pf.learn_path_model(g, "involves", seed=13)
    paths = model.positive_paths()
    assert paths, "the path learner must find positively weighted paths"

    truth = json.loads(out.truth_json())
    negatives = [tuple(p) for p in truth["planted"] + truth["decoys"] + truth["filler_negatives"]]
    report = pf.detect_false_negatives(g, paths, negatives)
    flagged = {tuple(pair) for pair, _ in report.flagged()}
    assert flagged == {tuple(p) for p in truth["planted"]}


def test_labeling_and_reduction_pipeline(small_instance):
    out = small_instance
    g = out.graph()
    positives = pf.extract_positive_pairs(g, "involves")
    # same derived seed the generator used, so the corpus realizes these pairs
    negatives = pf.generate_negative_pairs(positives, 120, pf.mix_seed(102, "involves"))
    ds = pf.filter_examples(
        pf.label_corpus(out.corpus_jsonl, positives, negatives, "involves"), 1000
    )
    assert ds.positive_count > 0
    assert ds.negative_count > ds.positive_count

    model = pf.learn_path_model(g, "involves", seed=13)
    report = pf.detect_false_negatives(g, model.positive_paths(), ds.pairs(positive=False))
    adjusted = pf.adjust_bias(ds, 2.0, 104)
    reduced = pf.pra_reduce(adjusted, report)
    assert reduced.negative_count <= adjusted.negative_count
    assert report.examples_removed == adjusted.negative_count - reduced.negative_count
    randomized = pf.random_reduce(adjusted, reduced, 105)
    assert randomized.negative_count == reduced.negative_count
    assert randomized.positive_count == reduced.positive_count

    extractor = pf.train_extractor(reduced, l2=1.0, seed=1)
    predictions = pf.predict_pairs(extractor, reduced)
    assert len(predictions) == len(set((a, b) for a, b, _, _ in predictions))


def test_metrics_and_curve():
    predictions = [("a", "x", 0.9), ("b", "x", 0.8), ("c", "x", 0.3)]
    gold = [("a", "x"), ("c", "x")]
    prf = pf.entity_prf(predictions, gold)
    assert prf["precision"] == 0.5
    assert prf["recall"] == 0.5
    curve = pf.pr_curve(predictions, gold)
    assert [round(r, 3) for _, r, _ in curve] == sorted(round(r, 3) for _, r, _ in curve)
    assert curve[0] == (0.9, 0.5, 1.0)


def test_model_file_round_trip(small_instance, tmp_path):
    g = small_instance.graph()
    model = pf.learn_path_model(g, "involves", seed=13)
    path = tmp_path / "model.txt"
    model.save(str(path))
    loaded = pf.PathModel.load_file(str(path))
    assert loaded.entries() == model.entries()
    assert loaded.bias == model.bias


def test_run_comparison_smoke(small_instance):
    out = small_instance
    config = pf.EvalConfig()
    config.neg_pair_count = 120
    config.neg_pair_seed = 102
    config.extractor_l2 = 1.0
    report = pf.run_comparison(out.graph(), out.corpus_jsonl, ["involves"], config)
    overall = report.overall()
    assert set(overall) == {"unfiltered", "random_reduced", "pra_reduced"}
    for metrics in overall.values():
        assert 0.0 <= metrics["precision"] <= 1.0
        assert 0.0 <= metrics["recall"] <= 1.0
    assert "Overall" in report.table_text()
    json.loads(report.to_json())
