"""Independent recursive upward-rank oracle.

Works directly on a raw job-profile JSON document (no simulator imports,
plain float arithmetic, naive recursion) so it can cross-check the
library's rank computation.  Also runnable as a script:

    python3 rank_oracle.py path/to/job_profile.json
"""

import json
import sys


def ranks_from_doc(doc):
    """task id -> float upward rank, computed by naive recursion."""
    tasks = {t["id"]: t for t in doc["tasks"]}
    successors = {tid: [] for tid in tasks}
    for t in doc["tasks"]:
        for edge in t.get("predecessors", []):
            successors[edge["task"]].append((t["id"], edge["comm"]))

    def mean_exec(tid):
        row = list(tasks[tid]["exec_time"].values())
        return sum(row) / len(row)

    def rank(tid):
        best = 0.0
        for succ_id, comm in successors[tid]:
            candidate = comm + rank(succ_id)
            if candidate > best:
                best = candidate
        return mean_exec(tid) + best

    return {tid: rank(tid) for tid in tasks}


def ranks_from_file(path):
    with open(path) as stream:
        return ranks_from_doc(json.load(stream))


if __name__ == "__main__":
    for tid, value in sorted(ranks_from_file(sys.argv[1]).items()):
        print(f"{tid}\t{value:.9f}")
