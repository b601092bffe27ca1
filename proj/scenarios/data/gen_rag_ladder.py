"""Regenerates rag_ladder_accuracy.csv and rag_ladder_latency.csv."""
import csv
import itertools
import math
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
Z95 = 1.6448536269514722
SAMPLES = 500

GENERATORS = ["llama3.2-3b", "llama3.1-8b", "gemma3-12b"]
RERANKERS = ["ms-marco", "bge-v2"]
TOP_K = ["10", "20"]
RERANK_K = ["1", "3"]

GEN_MS = {"llama3.2-3b": 85.0, "llama3.1-8b": 220.0, "gemma3-12b": 325.0}
GEN_TAIL = {"llama3.2-3b": 2.0, "llama3.1-8b": 1.875, "gemma3-12b": 1.75}
RERANKER_MS = {"ms-marco": 0.0, "bge-v2": 40.0}
TOP_K_MS = {"10": 0.0, "20": 15.0}
RERANK_K_MS = {"1": 0.0, "3": 20.0}

ACCURACY = {
    ("llama3.2-3b", "ms-marco", "10", "1"): 0.450,
    ("llama3.2-3b", "ms-marco", "10", "3"): 0.470,
    ("llama3.2-3b", "ms-marco", "20", "1"): 0.761,
    ("llama3.2-3b", "ms-marco", "20", "3"): 0.752,
    ("llama3.2-3b", "bge-v2", "10", "1"): 0.742,
    ("llama3.2-3b", "bge-v2", "10", "3"): 0.748,
    ("llama3.2-3b", "bge-v2", "20", "1"): 0.755,
    ("llama3.2-3b", "bge-v2", "20", "3"): 0.758,
    ("llama3.1-8b", "ms-marco", "10", "1"): 0.757,
    ("llama3.1-8b", "ms-marco", "10", "3"): 0.825,
    ("llama3.1-8b", "ms-marco", "20", "1"): 0.759,
    ("llama3.1-8b", "ms-marco", "20", "3"): 0.818,
    ("llama3.1-8b", "bge-v2", "10", "1"): 0.790,
    ("llama3.1-8b", "bge-v2", "10", "3"): 0.821,
    ("llama3.1-8b", "bge-v2", "20", "1"): 0.794,
    ("llama3.1-8b", "bge-v2", "20", "3"): 0.823,
    ("gemma3-12b", "ms-marco", "10", "1"): 0.801,
    ("gemma3-12b", "ms-marco", "10", "3"): 0.815,
    ("gemma3-12b", "ms-marco", "20", "1"): 0.806,
    ("gemma3-12b", "ms-marco", "20", "3"): 0.822,
    ("gemma3-12b", "bge-v2", "10", "1"): 0.812,
    ("gemma3-12b", "bge-v2", "10", "3"): 0.824,
    ("gemma3-12b", "bge-v2", "20", "1"): 0.819,
    ("gemma3-12b", "bge-v2", "20", "3"): 0.853,
}

HEADER = ["generator", "reranker", "top_k", "rerank_k"]


def lognormal_params(mean, p95):
    r = math.log(p95 / mean)
    sigma = Z95 - math.sqrt(Z95 * Z95 - 2.0 * r)
    return math.log(mean) - sigma * sigma / 2.0, sigma


def main():
    rng = np.random.default_rng(20250)
    configs = list(itertools.product(GENERATORS, RERANKERS, TOP_K, RERANK_K))
    with open(HERE / "rag_ladder_accuracy.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HEADER + ["accuracy"])
        for c in configs:
            w.writerow(list(c) + [f"{ACCURACY[c]:.3f}"])
    with open(HERE / "rag_ladder_latency.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HEADER + ["sample_ms"])
        for c in configs:
            g, rr, k, rk = c
            mean = GEN_MS[g] + RERANKER_MS[rr] + TOP_K_MS[k] + RERANK_K_MS[rk]
            mu, sigma = lognormal_params(mean, mean * GEN_TAIL[g])
            xs = rng.lognormal(mu, sigma, SAMPLES)
            xs *= mean / xs.mean()
            for x in xs:
                w.writerow(list(c) + [f"{x:.1f}"])


if __name__ == "__main__":
    main()
