"""factgraph: computational fact-checking engine and FAIR media registry.

Statements extracted from untrusted media are aligned onto canonical
(subject, predicate, object) triples and scored against a ground-truth
knowledge graph, first by exact match and otherwise by a degree-weighted
path search; per-statement verdicts aggregate into a weighted media-level
accuracy score with a human-in-the-loop review workflow on top.
"""

__version__ = "0.1.0"
