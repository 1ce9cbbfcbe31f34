import json
import math
import os
from pathlib import Path

import pytest

import docmt

FIXTURES = Path(os.environ.get("DOCMT_FIXTURES_DIR", Path(__file__).resolve().parents[2] / "tests" / "fixtures"))
TOY = FIXTURES / "toy_corpus.jsonl"


def make_doc(doc_id, src, tgt, src_lang="en", tgt_lang="de"):
    return {
        "doc_id": doc_id,
        "src_lang": src_lang,
        "tgt_lang": tgt_lang,
        "domain": "test",
        "src_segments": src,
        "tgt_segments": tgt,
    }


def test_load_and_stats():
    docs = docmt.load_corpus(TOY)
    assert len(docs) == 8
    assert docmt.corpus_stats(docs)["total"]["n_docs"] == 8


def test_curate_defaults_keep_clean_docs():
    res = docmt.curate(docmt.load_corpus(TOY))
    assert len(res["docs"]) == 4
    assert {r["doc_id"] for r in res["log"]} == {"short-note", "copied", "truncated", "village-again"}


def test_curate_rejects_unknown_option():
    with pytest.raises(docmt.ValidationError):
        docmt.curate([], no_such_option=1)


def test_dedup_is_idempotent():
    docs = docmt.load_corpus(TOY)
    once = docmt.deduplicate(docs)
    assert docmt.deduplicate(once) == once
    assert len(once) == len(docs) - 1


def test_mrd2d_reconstructs():
    doc = make_doc("d", [f"s{i}" for i in range(5)], [f"t{i}" for i in range(7)])
    parts = docmt.mrd2d_split(doc, 2)
    assert [len(p["src_segments"]) for p in parts] == [3, 2]
    assert sum((p["tgt_segments"] for p in parts), []) == doc["tgt_segments"]


def test_capt_context_sizes():
    doc = make_doc("c", [f"s{i}" for i in range(5)], [f"t{i}" for i in range(5)])
    assert [len(e["context"]) for e in docmt.capt_examples(doc, 3)] == [0, 1, 2, 3, 3]


def test_render_prompt_matches_golden():
    example = {"src_lang": "en", "tgt_lang": "de", "context": [], "source": "Hello.", "target": "Hallo."}
    text, span = docmt.render_prompt(example, "sentence")
    assert text == (FIXTURES / "prompt_sentence_en_de.txt").read_text(encoding="utf-8")
    off, length = span
    assert text.encode()[off : off + length].decode() == "Hallo..<|im_end|>"


def test_training_config():
    cfg = docmt.training_config()
    assert cfg["lr"] == 7e-6 and cfg["batch_size"] == 32 and cfg["max_seq_len"] == 32768


def test_bleu_and_brevity():
    ref = ["the cat sat on the mat"]
    assert docmt.bleu(ref, ref)["score"] == 100.0
    assert docmt.d_bleu(ref, ref)["formatted"] == "100.00 (1.00)"
    half = docmt.bleu(["a b c d e"], ["a b c d e f g h i j"])
    assert math.isclose(half["bp"], math.exp(-1), abs_tol=1e-6)


def test_alignment_and_slide():
    links, null_hyp, null_ref = docmt.align_sentences(["a b", "c d"], ["a b", "c d"])
    assert [(l[0], l[2]) for l in links] == [(0, 0), (1, 1)]
    assert null_hyp == [] and null_ref == []
    assert docmt.slide_windows([100, 300, 50, 200, 124, 250], 512, 256) == [[0, 1, 2], [2, 3], [4, 5]]


def test_ltcr_four_of_six():
    a = [("network one", "netz one"), ("network two", "netz two"), ("network six", "netz six")]
    b = [("engine one", "engin one"), ("engine two", "engin two"), ("engine six", "ingen six")]
    consistent, total, ratio = docmt.ltcr([a, b])
    assert (consistent, total) == (4, 6)
    assert math.isclose(ratio, 4 / 6)


def test_mbr_with_python_utility():
    idx, means = docmt.mbr_select(["x", "x", "y"], lambda h, r: 1.0 if h == r else 0.0)
    assert idx == 0
    assert means == pytest.approx([2 / 3, 2 / 3, 1 / 3])


@pytest.mark.parametrize("mode", ["doc2doc", "chunk", "context_chunk", "quality_chunk"])
def test_identity_translation(mode):
    doc = make_doc("t", ["one two three", "four five", "six"], ["a", "b", "c"])
    run = docmt.translate_mock(doc, mode, n=4)
    assert run["merged"] == "one two three\nfour five\nsix"


def test_cli_roundtrip(tmp_path):
    out = tmp_path / "cur.jsonl"
    code, stdout, _ = docmt.run_cli("curate", TOY, out)
    assert code == 0 and "Post-filtering" in stdout
    assert len(out.read_text().splitlines()) == 4
    assert docmt.run_cli("nonsense")[0] == 1
