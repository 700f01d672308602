"""Offensive-speech classification and measurement pipeline.

Stages: ingest a JSON-lines comment dump, train a skip-gram embedding,
build the offensive-lexicon mean vector, transform texts to max-cosine
scalars, classify with an entropy-split random forest, and run the corpus
measurement suite.
"""

__version__ = "0.1.0"
