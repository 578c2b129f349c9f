"""Pins tests/data/golden_bleu/expected.json with sacrebleu (pip install sacrebleu)."""

import json
from pathlib import Path

import sacrebleu
from sacrebleu.metrics import BLEU

DIR = Path(__file__).resolve().parent / "golden_bleu"


def main():
    hyps = (DIR / "hyp.txt").read_text(encoding="utf-8").split("\n")[:-1]
    refs = (DIR / "ref.txt").read_text(encoding="utf-8").split("\n")[:-1]
    corpus = BLEU(tokenize="13a", smooth_method="exp").corpus_score(hyps, [refs])
    sent = BLEU(tokenize="13a", smooth_method="exp", effective_order=True)
    out = {
        "generator": f"sacrebleu {sacrebleu.__version__} BLEU(tokenize='13a', smooth_method='exp'); "
                     "sentences with effective_order=True",
        "corpus": {
            "score": corpus.score,
            "precisions": [p / 100 for p in corpus.precisions],
            "bp": corpus.bp,
            "hyp_len": corpus.sys_len,
            "ref_len": corpus.ref_len,
        },
        "identity_score": BLEU(tokenize="13a", smooth_method="exp").corpus_score(refs, [refs]).score,
        "sentences": [sent.sentence_score(h, [r]).score for h, r in zip(hyps, refs)],
    }
    (DIR / "expected.json").write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
