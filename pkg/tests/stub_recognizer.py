"""Stand-in external recognizer used by the tests.

usage: stub_recognizer.py MODE JOB OUT [TEXT]

MODE is one of: echo (every mixture gets TEXT), fail (exit 1), malformed,
partial (skip every second mixture), oracle (TEXT names a JSON file mapping
wav basename to hypothesis; missing names get TEXT's "default" entry).
"""
import json
import os
import sys

mode, job, out = sys.argv[1:4]
text = sys.argv[4] if len(sys.argv) > 4 else ""
items = [line.rstrip("\n").split("\t") for line in open(job, encoding="utf-8") if line.strip()]
if mode == "fail":
    print("decoder exploded", file=sys.stderr)
    sys.exit(1)
with open(out, "w", encoding="utf-8") as fh:
    if mode == "malformed":
        fh.write("this line has no tab\n")
    elif mode == "echo":
        for mid, _ in items:
            fh.write(f"{mid}\t{text}\n")
    elif mode == "partial":
        for i, (mid, _) in enumerate(items):
            if i % 2 == 0:
                fh.write(f"{mid}\t{text}\n")
    elif mode == "oracle":
        table = json.load(open(text, encoding="utf-8"))
        for mid, wav in items:
            fh.write(f"{mid}\t{table.get(os.path.basename(wav), table['default'])}\n")
