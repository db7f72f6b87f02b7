"""kbforge: materialize an LLM's latent factual knowledge into a knowledge base.

The pipeline elicits (subject, predicate, object) triples by breadth-first
graph expansion over named entities, consolidates the raw output (relation
and class clustering, taxonomy induction, entity deduplication), and ships
an evaluation harness for verifiability, overlap, bias, temporal cutoff,
and repeat-elicitation consistency.
"""

__version__ = "0.1.0"
