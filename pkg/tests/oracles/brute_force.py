"""Exhaustive-search scheduling oracles for tiny instances.

Works on raw job-profile JSON documents.  The optimal makespan is found by
enumerating every PE assignment and every topological dispatch order and
list-scheduling each combination; every realizable non-preemptive schedule
is dominated by one of these, so the minimum is the true optimum.  No
simulator imports.
"""

from itertools import product


def _parse(doc):
    tasks = {}
    for t in doc["tasks"]:
        preds = [(e["task"], e["comm"]) for e in t.get("predecessors", [])]
        execs = {int(pe): ticks for pe, ticks in t["exec_time"].items()}
        tasks[t["id"]] = (execs, preds)
    return tasks


def topological_orders(tasks):
    """Every topological order, by backtracking."""
    preds = {tid: {p for p, _ in entry[1]} for tid, entry in tasks.items()}
    order = []
    out = []

    def extend(remaining):
        if not remaining:
            out.append(list(order))
            return
        for tid in sorted(remaining):
            if preds[tid] <= set(order):
                order.append(tid)
                extend(remaining - {tid})
                order.pop()

    extend(set(tasks))
    return out


def list_schedule_makespan(tasks, order, assignment):
    """Makespan of greedy list scheduling for one (order, assignment) pair."""
    avail = {}
    finish = {}
    placed_pe = {}
    for tid in order:
        execs, preds = tasks[tid]
        pe = assignment[tid]
        ready = 0
        for pred_id, comm in preds:
            arrival = finish[pred_id] + (0 if placed_pe[pred_id] == pe else comm)
            ready = max(ready, arrival)
        start = max(ready, avail.get(pe, 0))
        finish[tid] = start + execs[pe]
        placed_pe[tid] = pe
        avail[pe] = finish[tid]
    return max(finish.values())


def optimal_makespan(doc, num_pes):
    """True optimal makespan over all assignments and dispatch orders."""
    tasks = _parse(doc)
    ids = sorted(tasks)
    orders = topological_orders(tasks)
    best = None
    for combo in product(range(num_pes), repeat=len(ids)):
        assignment = dict(zip(ids, combo))
        for order in orders:
            makespan = list_schedule_makespan(tasks, order, assignment)
            if best is None or makespan < best:
                best = makespan
    return best


def critical_path_bound(doc):
    """Largest root-to-sink sum of per-task best-case (min over PEs) exec."""
    tasks = _parse(doc)
    succs = {tid: [] for tid in tasks}
    for tid, (_, preds) in tasks.items():
        for pred_id, _ in preds:
            succs[pred_id].append(tid)
    memo = {}

    def longest(tid):
        if tid not in memo:
            best_tail = max((longest(s) for s in succs[tid]), default=0)
            memo[tid] = min(tasks[tid][0].values()) + best_tail
        return memo[tid]

    return max(longest(tid) for tid in tasks)
