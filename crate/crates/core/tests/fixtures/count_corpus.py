#!/usr/bin/env python3
"""Count clusters/documents/sentences/references of a corpus directory.

Independent of the Rust loader: sentences come from .sents files (non-blank
lines) or from a regex splitter. Prints a JSON manifest to stdout.
Usage: count_corpus.py <corpus_root>
"""
import json
import os
import re
import sys
import unicodedata

BOUNDARY = re.compile(r'(?<=[.!?…])["”]*(?=\s|$)')


def split(text):
    out = []
    for line in text.split("\n"):
        pos = 0
        for m in BOUNDARY.finditer(line):
            out.append(line[pos:m.end()])
            pos = m.end()
        out.append(line[pos:])
    return [s.strip() for s in out if s.strip()]


def visible(path, ext):
    return sorted(f[: -len(ext)] for f in os.listdir(path)
                  if not f.startswith(".") and f.endswith(ext) and len(f) > len(ext))


def main(root):
    manifest = {"clusters": {}, "totals": {}}
    totals = dict(clusters=0, documents=0, sentences=0, references=0)
    for cid in sorted(d for d in os.listdir(root)
                      if not d.startswith(".") and os.path.isdir(os.path.join(root, d))):
        base = os.path.join(root, cid)
        docs = {}
        for doc in visible(os.path.join(base, "docs"), ".txt"):
            sents = os.path.join(base, "sents", doc + ".sents")
            if os.path.isfile(sents):
                lines = open(sents, encoding="utf-8").read().split("\n")
                docs[doc] = sum(1 for l in lines if l.strip())
            else:
                raw = unicodedata.normalize("NFC", open(os.path.join(base, "docs", doc + ".txt"), encoding="utf-8").read())
                docs[doc] = len(split(raw))
        refs = visible(os.path.join(base, "refs"), ".txt")
        manifest["clusters"][cid] = {"documents": docs, "references": len(refs),
                                     "sentences": sum(docs.values())}
        totals["clusters"] += 1
        totals["documents"] += len(docs)
        totals["sentences"] += sum(docs.values())
        totals["references"] += len(refs)
    manifest["totals"] = totals
    json.dump(manifest, sys.stdout, indent=2, sort_keys=True)
    print()


if __name__ == "__main__":
    main(sys.argv[1])
