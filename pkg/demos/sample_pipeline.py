"""
End to end on the bundled sample corpus
=======================================

400 Android-style posts ship with the package. ``run_all`` goes from the
JSONL corpus to topics, a topic map and paired problem/solution summaries,
writing every intermediate file to ``out_dir``.
"""

import json
import tempfile
from importlib import resources
from pathlib import Path

from stacktopics.pipeline import PipelineConfig, load_json, run_all

corpus = resources.files("stacktopics").joinpath("data/sample_corpus.jsonl")
out = Path(tempfile.mkdtemp()) / "sample"

cfg = PipelineConfig.from_dict({"seed": 7, "corpus_path": str(corpus), "out_dir": str(out), "top_n": 10})
manifest = run_all(cfg)
print(json.dumps(manifest["stats"], indent=2))
print(sorted(p.name for p in out.iterdir()))

###############################################################################
# The topic table: id, size, name and the ten best terms (Porter stems).

for t in load_json(out / "topics.json"):
    print(f"{t['topic_id']:>2} {t['count']:>4}  {t['name']:<32} {', '.join(t['representation'])}")

###############################################################################
# The three most central problem sentences of each topic, each followed by
# the best sentence from that question's well-received answers.

for entry in load_json(out / "answer_summaries.json"):
    print(f"\ntopic {entry['topic_id']}")
    for p in entry["problems"]:
        print("  problem :", p["text"])
        for s in p["solutions"]:
            print("  solution:", s["text"])

###############################################################################
# Topic centroids projected to the unit square; circle area tracks size.

for point in load_json(out / "map.json"):
    print(point)
print("svg written to", out / "map.svg")
