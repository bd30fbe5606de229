#!/usr/bin/env python3
"""Convert a Geom-GCN-style benchmark release into this project's dataset layout.

The upstream release stores each network as two text files:

  out1_graph_edges.txt           header line, then "src\tdst" per line
  out1_node_feature_label.txt    header line, then "id\tf1,f2,...\tlabel"

This script rewrites one such directory into the meta.json / features.tsv /
labels.tsv / edges.tsv layout the loader expects. Directedness is not stored
upstream; pass --directed for the web/wiki networks (chameleon, squirrel,
actor) and omit it for the citation and WebKB networks, matching how the
benchmarks are normally evaluated.

Usage:
  python3 tools/convert_pei.py --name squirrel --in new_data/squirrel \
      --out data/squirrel --directed
"""

import argparse
import json
import pathlib


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--name", required=True)
    ap.add_argument("--in", dest="src", required=True, type=pathlib.Path)
    ap.add_argument("--out", dest="dst", required=True, type=pathlib.Path)
    ap.add_argument("--directed", action="store_true")
    args = ap.parse_args()

    node_lines = (args.src / "out1_node_feature_label.txt").read_text().splitlines()[1:]
    features, labels = {}, {}
    for line in node_lines:
        node_id, feat, label = line.split("\t")
        features[int(node_id)] = [float(x) for x in feat.split(",")]
        labels[int(node_id)] = int(label)

    n = len(features)
    assert sorted(features) == list(range(n)), "node ids must be 0..n-1"
    d = len(features[0])
    C = max(labels.values()) + 1

    edges = []
    for line in (args.src / "out1_graph_edges.txt").read_text().splitlines()[1:]:
        src, dst = line.split()
        edges.append((int(src), int(dst)))

    args.dst.mkdir(parents=True, exist_ok=True)
    (args.dst / "meta.json").write_text(
        json.dumps({"name": args.name, "n": n, "d": d, "C": C, "directed": args.directed},
                   indent=2) + "\n")
    with open(args.dst / "features.tsv", "w") as f:
        for i in range(n):
            f.write("\t".join(repr(x) for x in features[i]) + "\n")
    with open(args.dst / "labels.tsv", "w") as f:
        for i in range(n):
            f.write(f"{labels[i]}\n")
    with open(args.dst / "edges.tsv", "w") as f:
        for src, dst in edges:
            f.write(f"{src}\t{dst}\n")
    print(f"wrote {args.dst}: n={n} d={d} C={C} edges={len(edges)} directed={args.directed}")


if __name__ == "__main__":
    main()
