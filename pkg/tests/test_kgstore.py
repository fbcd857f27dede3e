import random

import pytest
from hypothesis import given, strategies as st

from factgraph.errors import CsvFormatError, ParseError, SnapshotError, TermError
from factgraph.kgstore import (
    DegreeMode,
    GroundTruthGraph,
    Triple,
    ingest_csv,
    normalize_text,
    parse_ntriples,
    serialize_ntriples,
)


def test_normalize_basics():
    assert normalize_text("  CO2 ") == "co2"
    assert normalize_text("Sea\t Level\nRise") == "sea level rise"
    assert normalize_text("Äpfel") == "äpfel"


@given(st.text(max_size=80))
def test_normalize_idempotent(text):
    once = normalize_text(text)
    assert normalize_text(once) == once


def test_empty_term_rejected_with_location():
    with pytest.raises(TermError, match="subject"):
        Triple.of("   ", "causes", "warming")
    with pytest.raises(TermError, match="predicate"):
        Triple.of("co2", "\t", "warming")
    with pytest.raises(TermError, match="object"):
        Triple.of("co2", "causes", "")


def test_triple_identity_ignores_provenance():
    a = Triple.of("co2", "causes", "warming", {"m1"})
    b = Triple.of("CO2", "Causes", "Warming", {"m2"})
    assert a == b
    assert hash(a) == hash(b)


def test_add_single_edge_degrees():
    g = GroundTruthGraph()
    assert g.add_triple(Triple.of("co2", "causes", "warming", {"m1"}))
    assert len(g) == 1
    assert g.degree("co2", DegreeMode.OUT) == 1
    assert g.degree("co2", DegreeMode.IN) == 0
    assert g.degree("warming", DegreeMode.IN) == 1


def test_add_duplicate_merges_provenance():
    g = GroundTruthGraph()
    g.add_triple(Triple.of("co2", "causes", "warming", {"m1"}))
    added = g.add_triple(Triple.of("co2", "causes", "warming", {"m2"}))
    assert not added
    assert len(g) == 1
    stored = g.has_exact("co2", "causes", "warming")
    assert stored.provenance == {"m1", "m2"}


def test_provenance_union_order_independent():
    order_a = [("co2", "causes", "warming", {"m1"}), ("co2", "causes", "warming", {"m2"})]
    order_b = list(reversed(order_a))
    graphs = []
    for order in (order_a, order_b):
        g = GroundTruthGraph()
        for s, p, o, prov in order:
            g.add_triple(Triple.of(s, p, o, prov))
        graphs.append(g)
    assert (graphs[0].has_exact("co2", "causes", "warming").provenance
            == graphs[1].has_exact("co2", "causes", "warming").provenance)


def test_has_exact_hits_and_misses():
    g = GroundTruthGraph()
    g.add_triple(Triple.of("co2", "causes", "warming", {"m1"}))
    hit = g.has_exact("co2", "causes", "warming")
    assert hit is not None and hit.provenance == {"m1"}
    assert g.has_exact("co2", "reduces", "warming") is None
    # raw query strings are normalized before lookup
    assert g.has_exact("  CO2 ", "CAUSES", "Warming ") == hit


def test_degree_modes_and_absent_node():
    g = GroundTruthGraph()
    g.add_triple(Triple.of("x", "p", "a"))
    g.add_triple(Triple.of("x", "p", "b"))
    g.add_triple(Triple.of("c", "p", "x"))
    assert g.degree("x") == 3
    assert g.degree("x", DegreeMode.IN) == 1
    assert g.degree("x", DegreeMode.OUT) == 2
    assert g.degree("ghost") == 0


def _random_triples(rng, n):
    nodes = [f"n{i}" for i in range(12)]
    preds = ["causes", "reduces", "affects"]
    seen = set()
    triples = []
    while len(triples) < n:
        s, o = rng.sample(nodes, 2)
        p = rng.choice(preds)
        if (s, p, o) in seen:
            continue
        seen.add((s, p, o))
        triples.append(Triple.of(s, p, o, {f"m{rng.randrange(4)}"}))
    return triples


def test_degree_matches_brute_force_recount():
    rng = random.Random(7)
    triples = _random_triples(rng, 50)
    g = GroundTruthGraph()
    for t in triples:
        g.add_triple(t)
    # oracle: linear scan over the stored triple list
    for node in g.entities():
        n_out = sum(1 for t in g if t.subject.text == node)
        n_in = sum(1 for t in g if t.object.text == node)
        assert g.degree(node, DegreeMode.OUT) == n_out
        assert g.degree(node, DegreeMode.IN) == n_in
        assert g.degree(node) == n_in + n_out


def test_degree_sum_is_twice_triple_count():
    rng = random.Random(3)
    g = GroundTruthGraph()
    # ingest a multiset: every triple twice
    for t in _random_triples(rng, 40) * 2:
        g.add_triple(t)
    total = sum(g.degree(v) for v in g.entities())
    assert total == 2 * len(g)


# ---------------------------------------------------------------------------
# N-Triples subset
# ---------------------------------------------------------------------------

NT_SAMPLE = b"""# trusted statements
<http://ex.org/co2> <http://ex.org/causes> <http://ex.org/warming> .

<http://ex.org/ice#sheet> <http://ex.org/is> "Shrinking Fast" .
"""


def test_parse_ntriples_iri_reduction():
    triples = parse_ntriples(NT_SAMPLE)
    keys = {t.key for t in triples}
    assert ("co2", "causes", "warming") in keys
    assert ("sheet", "is", "shrinking fast") in keys


def test_parse_ntriples_empty_file():
    assert parse_ntriples(b"") == []
    assert parse_ntriples(b"# only a comment\n\n") == []


def test_parse_ntriples_malformed_line_number():
    bad = b"<http://a/x> <http://a/p> <http://a/y> .\n<http://a/x> <http://a/p>\n"
    with pytest.raises(ParseError, match="line 2"):
        parse_ntriples(bad)


def test_parse_ntriples_all_or_nothing():
    bad = b"<http://a/x> <http://a/p> <http://a/y>\n"
    with pytest.raises(ParseError):
        parse_ntriples(bad)


def test_ntriples_round_trip():
    triples = parse_ntriples(NT_SAMPLE)
    again = parse_ntriples(serialize_ntriples(triples))
    assert {t.key for t in again} == {t.key for t in triples}
    # second pass is a fixed point
    assert serialize_ntriples(again) == serialize_ntriples(triples)


def test_round_trip_awkward_terms():
    triples = [Triple.of("sea level rise", "leads to", "coastal flooding"),
               Triple.of("a|b", "has % share", "50% of c")]
    again = parse_ntriples(serialize_ntriples(triples))
    assert {t.key for t in again} == {t.key for t in triples}


# ---------------------------------------------------------------------------
# CSV ingest
# ---------------------------------------------------------------------------

def test_ingest_csv_dedup():
    data = ("subject,predicate,object\n"
            "CO2,causes,warming\n"
            "co2,causes,warming\n"
            "methane,causes,warming\n")
    report = ingest_csv(data, "gt")
    assert report.rows_total == 3 and report.rows_ok == 3
    assert len(report.triples) == 2


def test_ingest_csv_default_provenance():
    report = ingest_csv("subject,predicate,object\nco2,causes,warming\n", "gt1")
    assert report.triples[0].provenance == {"gt1"}


def test_ingest_csv_source_column_overrides():
    data = ("subject,predicate,object,source\n"
            "co2,causes,warming,ipcc\n"
            "co2,causes,warming,\n")
    report = ingest_csv(data, "gt")
    assert report.triples[0].provenance == {"ipcc", "gt"}


def test_ingest_csv_missing_column():
    with pytest.raises(CsvFormatError, match="object"):
        ingest_csv("subject,predicate\nco2,causes\n", "gt")


def test_ingest_csv_row_errors_do_not_stop_ingest():
    data = ("subject,predicate,object\n"
            "co2,causes,warming\n"
            ",causes,warming\n"
            "methane,causes,warming\n")
    report = ingest_csv(data, "gt")
    assert len(report.triples) == 2
    assert report.row_errors == [(3, report.row_errors[0][1])]
    assert "subject" in report.row_errors[0][1]


def test_ingest_csv_quoted_cells():
    data = 'subject,predicate,object\n"sea level, global",rises by,"2 ""mm"" a year"\n'
    report = ingest_csv(data, "gt")
    assert report.triples[0].key == ("sea level, global", "rises by", '2 "mm" a year')


# ---------------------------------------------------------------------------
# Snapshot round-trip
# ---------------------------------------------------------------------------

def test_snapshot_empty_graph(tmp_path):
    g = GroundTruthGraph()
    g.snapshot_to(tmp_path / "snap")
    loaded = GroundTruthGraph.load_from(tmp_path / "snap")
    assert len(loaded) == 0


def test_snapshot_round_trip_with_provenance(tmp_path):
    g = GroundTruthGraph()
    g.add_triple(Triple.of("co2", "causes", "warming", {"m1", "m2"}))
    g.snapshot_to(tmp_path / "snap")
    loaded = GroundTruthGraph.load_from(tmp_path / "snap")
    assert loaded.has_exact("co2", "causes", "warming").provenance == {"m1", "m2"}


def test_snapshot_byte_exact_on_second_pass(tmp_path):
    rng = random.Random(11)
    g = GroundTruthGraph()
    nodes = [f"node {i}" for i in range(60)]
    seen = set()
    while len(seen) < 1000:
        s, o = rng.sample(nodes, 2)
        p = rng.choice(["causes", "reduces", "supports"])
        if (s, p, o) in seen:
            continue
        seen.add((s, p, o))
        g.add_triple(Triple.of(s, p, o, {f"m{rng.randrange(9)}"}))
    g.snapshot_to(tmp_path / "one")
    loaded = GroundTruthGraph.load_from(tmp_path / "one")
    loaded.snapshot_to(tmp_path / "two")
    for name in ("graph.nt", "provenance.json", "META"):
        assert ((tmp_path / "one" / name).read_bytes()
                == (tmp_path / "two" / name).read_bytes())
    assert {t.key for t in loaded} == {t.key for t in g}


def test_snapshot_version_check(tmp_path):
    snap = tmp_path / "snap"
    snap.mkdir()
    (snap / "META").write_text("factgraph-snapshot 99\n")
    with pytest.raises(SnapshotError, match="format"):
        GroundTruthGraph.load_from(snap)
