"""Python bindings for the docmt toolkit.

Documents are plain dicts with the JSONL record keys: doc_id, src_lang,
tgt_lang, domain, src_segments, tgt_segments.
"""

import json

from . import _core
from ._core import (
    BackendError,
    ScorerError,
    ValidationError,
    align_sentences,
    bleu,
    d_bleu,
    ltcr,
    mbr_select,
    slide_windows,
)

__all__ = [
    "BackendError",
    "ScorerError",
    "ValidationError",
    "align_sentences",
    "balance",
    "bleu",
    "capt_examples",
    "corpus_stats",
    "curate",
    "d_bleu",
    "deduplicate",
    "load_corpus",
    "ltcr",
    "mbr_select",
    "mrd2d_split",
    "render_prompt",
    "run_cli",
    "slide_windows",
    "training_config",
    "translate_mock",
]


def load_corpus(path):
    with open(path, encoding="utf-8") as f:
        return json.loads(_core.parse_corpus(f.read()))


def corpus_stats(docs):
    return json.loads(_core.corpus_stats(json.dumps(docs)))


def curate(docs, **config):
    return json.loads(_core.curate(json.dumps(docs), json.dumps(config)))


def deduplicate(docs):
    return json.loads(_core.deduplicate(json.dumps(docs)))


def balance(docs, seed=0):
    return json.loads(_core.balance(json.dumps(docs), seed))


def mrd2d_split(doc, k):
    return json.loads(_core.mrd2d_split(json.dumps(doc), k))


def capt_examples(doc, n=3, chunk_size=1):
    return json.loads(_core.capt_examples(json.dumps(doc), n, chunk_size))


def render_prompt(example, mode):
    """Returns (text, target_span) where target_span is (offset, length) or None."""
    return _core.render_prompt(json.dumps(example), mode)


def training_config():
    return json.loads(_core.training_config())


def translate_mock(doc, mode, behavior="identity", chunk_size=1, n=32, seed=0):
    return json.loads(_core.translate_mock(json.dumps(doc), mode, behavior, chunk_size, n, seed))


def run_cli(*args):
    """Runs the command-line tool in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
