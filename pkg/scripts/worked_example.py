#!/usr/bin/env python3
"""Build the two-lattice demonstration on disk and run the CLI over it.

The NMT side offers "die UNK Politik"; the hiero side offers
"die regionale Politik" and "der Plan".  With the free out-of-vocabulary
fill, the combination keeps the NMT hypothesis and takes "regionale"
from the hiero lattice.
"""

import argparse
import sys
import tempfile
from pathlib import Path

from latcomb import ONE, SymbolTable, UNK, Arc, Wfst, weight
from latcomb.cli import cli_main
from latcomb.lattice_io import write_lattice, write_symtab

PARAMS = """\
lambda_nmt=1
lambda_hiero=1
lambda_sub=2
lambda_edit=5
lambda_ins=1
"""


def chain(syms, sentence, score_feature, score):
    fst = Wfst(syms, syms)
    prev = fst.add_state()
    fst.set_initial(prev)
    for pos, word in enumerate(sentence.split()):
        label = UNK if word == "UNK" else syms.add(word)
        w = weight({score_feature: score}) if pos == 0 else ONE
        nxt = fst.add_state()
        fst.add_arc(prev, Arc(label, label, w, nxt))
        prev = nxt
    fst.set_final(prev, ONE)
    return fst.freeze()


def union(machines, syms):
    out = Wfst(syms, syms)
    start = out.add_state()
    out.set_initial(start)
    for m in machines:
        offset = out.num_states
        for _ in m.states():
            out.add_state()
        out.add_arc(start, Arc(0, 0, ONE, offset + m.initial))
        for s in m.states():
            for arc in m.arcs(s):
                out.add_arc(offset + s, Arc(arc.ilabel, arc.olabel, arc.weight,
                                            offset + arc.target))
        for s, fw in m.finals():
            out.set_final(offset + s, fw)
    return out.freeze()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", help="where to put the generated files "
                                          "(default: a temporary directory)")
    args = parser.parse_args()

    out_dir = Path(args.out_dir) if args.out_dir else Path(tempfile.mkdtemp(prefix="latcomb-"))
    out_dir.mkdir(parents=True, exist_ok=True)

    syms = SymbolTable()
    nmt = chain(syms, "die UNK Politik", 0, 1.0)
    hiero = union([chain(syms, "die regionale Politik", 1, 2.0),
                   chain(syms, "der Plan", 1, 1.0)], syms)

    files = {
        "nmt": out_dir / "example.nmt.fst",
        "hiero": out_dir / "example.hiero.fst",
        "symtab": out_dir / "example.sym",
        "vocab": out_dir / "vocab.txt",
        "params": out_dir / "params.cfg",
        "report": out_dir / "report.txt",
    }
    write_lattice(nmt, str(files["nmt"]))
    write_lattice(hiero, str(files["hiero"]))
    write_symtab(syms, str(files["symtab"]))
    files["vocab"].write_text("die\nPolitik\nder\nPlan\n")
    files["params"].write_text(PARAMS)
    print(f"wrote inputs to {out_dir}")

    base = ["--nmt-lattice", str(files["nmt"]), "--hiero-lattice", str(files["hiero"]),
            "--vocab", str(files["vocab"]), "--params", str(files["params"]),
            "--symtab", str(files["symtab"])]
    print("\n$ latcomb combine ... --report report.txt")
    code = cli_main(["combine", *base, "--report", str(files["report"])])
    if code != 0:
        return code
    print("\nreport.txt:")
    print(files["report"].read_text())
    print("$ latcomb oracle-combine ...")
    return cli_main(["oracle-combine", *base])


if __name__ == "__main__":
    sys.exit(main())
