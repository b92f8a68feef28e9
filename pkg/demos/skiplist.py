"""Skiplist ring: a heap-shape guard crossed with a topology ghost.

proc_if_ring only calls proc_ring_values when h heads a four-node lvl0 ring
whose lvl1 links skip exactly one node and g sits two steps before h.  The
topology builder proposes five concrete shapes selected by xi; the engine
branches on xi and keeps node values symbolic.
"""

from ghostsym.harness import run_program


def main():
    for mode in ("baseline", "baseline-lazy", "ghost"):
        rep = run_program("skiplist_ring", mode)
        print(f"{mode:13s} bombs={rep.bombs_triggered} paths={rep.paths} "
              f"confirmed={rep.confirmed} ({rep.elapsed:.2f} s)")
        if mode == "ghost":
            for t in rep.tests:
                if "proc_ring_values#0:T" in t["new"]:
                    print("  ring witness:", t["input"])


if __name__ == "__main__":
    main()
