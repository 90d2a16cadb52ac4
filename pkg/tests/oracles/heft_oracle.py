"""Independent static HEFT oracle over a raw job-profile JSON document.

A from-scratch re-derivation of list scheduling with insertion: descending
float upward rank (tie: ascending id), each task placed on the PE with the
earliest insertion-based finish (tie: lowest PE id).  No simulator imports.
"""

from .rank_oracle import ranks_from_doc


def insertion_slot(busy, ready, length):
    """Earliest start >= ready fitting in a gap of busy (sorted intervals)."""
    t = ready
    for s, f in busy:
        if t + length <= s:
            return t
        if f > t:
            t = f
    return t


def static_heft(doc, num_pes):
    """(makespan, {task id: (pe, start, finish)}) for one job document."""
    tasks = {t["id"]: t for t in doc["tasks"]}
    ranks = ranks_from_doc(doc)
    order = sorted(tasks, key=lambda tid: (-ranks[tid], tid))
    busy = {pe: [] for pe in range(num_pes)}
    placed = {}
    for tid in order:
        task = tasks[tid]
        choice = None
        for pe in range(num_pes):
            ready = 0
            for edge in task.get("predecessors", []):
                pred_pe, _, pred_finish = placed[edge["task"]]
                arrival = pred_finish + (0 if pred_pe == pe else edge["comm"])
                ready = max(ready, arrival)
            length = task["exec_time"][str(pe)]
            start = insertion_slot(busy[pe], ready, length)
            finish = start + length
            if choice is None or (finish, pe) < (choice[2], choice[0]):
                choice = (pe, start, finish)
        pe, start, finish = choice
        busy[pe].append((start, finish))
        busy[pe].sort()
        placed[tid] = (pe, start, finish)
    makespan = max(finish for _, _, finish in placed.values())
    return makespan, placed
