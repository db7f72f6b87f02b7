"""Breadth-first knowledge elicitation with NER-filtered expansion."""

from kbforge.crawler.crawl import Crawler, CrawlConfig, CrawlReport, LayerStats
from kbforge.crawler.labels import normalize_label, screens_as_literal
from kbforge.crawler.ner import NerClassifier

__all__ = [
    "Crawler",
    "CrawlConfig",
    "CrawlReport",
    "LayerStats",
    "NerClassifier",
    "normalize_label",
    "screens_as_literal",
]
