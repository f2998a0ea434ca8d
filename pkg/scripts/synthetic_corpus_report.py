#!/usr/bin/env python3
"""Generate a seeded synthetic corpus and print the corpus statistics report.

Writes paired <id>.nmt.fst / <id>.hiero.fst files plus the shared symbol
table, vocabulary, and parameter config, runs the combination over every
pair, and prints the same TSV report the `stats` subcommand emits; with
--check it also verifies each sentence against the brute-force oracle.
"""

import argparse
import random
import sys
import tempfile
import time
from pathlib import Path

from latcomb import ONE, SymbolTable, UNK, Arc, Wfst, combine, corpus_report, weight
from latcomb.lattice_io import read_params, write_lattice, write_symtab
from latcomb.oracle import brute_force_combine

WORDS = ["haus", "fluss", "stadt", "plan", "rot", "gross", "am", "der", "die", "und",
         "berg", "tal", "neu", "alt", "hier"]

PARAMS = """\
lambda_nmt=1
lambda_hiero=1
lambda_sub=1
lambda_edit=3
lambda_ins=0.5
max_unk_run=3
hiero_node_budget=100000
"""


def random_lattice(rng, syms, score_feature, max_branch, allow_unk):
    fst = Wfst(syms, syms)
    prev = fst.add_state()
    fst.set_initial(prev)
    for _ in range(rng.randint(2, 7)):
        nxt = fst.add_state()
        for _ in range(rng.randint(1, max_branch)):
            if allow_unk and rng.random() < 0.2:
                label = UNK
            else:
                label = syms.add(rng.choice(WORDS))
            w = weight({score_feature: rng.uniform(0.0, 2.0)})
            fst.add_arc(prev, Arc(label, label, w, nxt))
        prev = nxt
    fst.set_final(prev, ONE)
    return fst.freeze()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sentences", type=int, default=50)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out-dir", help="default: a temporary directory")
    parser.add_argument("--check", action="store_true",
                        help="verify every sentence against the brute-force oracle")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out_dir = Path(args.out_dir) if args.out_dir else Path(tempfile.mkdtemp(prefix="latcomb-corpus-"))
    nmt_dir = out_dir / "nmt"
    hiero_dir = out_dir / "hiero"
    nmt_dir.mkdir(parents=True, exist_ok=True)
    hiero_dir.mkdir(parents=True, exist_ok=True)

    syms = SymbolTable()
    vocab_words = sorted(rng.sample(WORDS, 8))
    vocab = frozenset(syms.add(w) for w in vocab_words)
    (out_dir / "vocab.txt").write_text("\n".join(vocab_words) + "\n")
    (out_dir / "params.cfg").write_text(PARAMS)
    params = read_params(str(out_dir / "params.cfg")).with_vocab(vocab)

    pairs = []
    for idx in range(args.sentences):
        nmt = random_lattice(rng, syms, 0, max_branch=2, allow_unk=True)
        hiero = random_lattice(rng, syms, 1, max_branch=3, allow_unk=False)
        write_lattice(nmt, str(nmt_dir / f"{idx:04d}.nmt.fst"))
        write_lattice(hiero, str(hiero_dir / f"{idx:04d}.hiero.fst"))
        pairs.append((f"{idx:04d}", nmt, hiero))
    write_symtab(syms, str(out_dir / "corpus.sym"))
    print(f"wrote {args.sentences} sentence pairs to {out_dir}")

    started = time.perf_counter()
    results = []
    for stem, nmt, hiero, in pairs:
        result = combine(nmt, hiero, params, source_id=stem)
        results.append(result)
        if args.check:
            expected = brute_force_combine(
                nmt, hiero, vocab=set(vocab_words),
                nmt_scale=params.lambda_nmt, hiero_scale=params.lambda_hiero,
                sub_cost=params.lambda_sub, edit_cost=params.lambda_edit,
                ins_cost=params.lambda_ins, max_unk_run=params.max_unk_run)
            if abs(result.total_cost - expected.cost) > 1e-9:
                print(f"MISMATCH at {stem}: {result.total_cost} vs {expected.cost}",
                      file=sys.stderr)
                return 1
    elapsed = time.perf_counter() - started
    checked = " (oracle-checked)" if args.check else ""
    print(f"combined {len(results)} sentences in {elapsed:.2f}s{checked}\n")

    report = corpus_report(results, [h for _, _, h in pairs], n_values=(1, 10, 100))
    for line in report.to_tsv_lines():
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
