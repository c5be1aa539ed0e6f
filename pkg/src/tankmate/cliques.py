"""Maximal clique enumeration for the compatibility graph."""

from __future__ import annotations


class _Cap(Exception):
    pass


def max_cliques(
    vertices: list[str],
    neighbors: dict[str, set[str]],
    cap: int | None = None,
) -> tuple[list[frozenset[str]], bool]:
    """All maximal cliques, via pivoting branch-and-bound.

    Isolated vertices come out as singleton cliques. If ``cap`` is given
    and the graph holds more maximal cliques than that, enumeration stops
    early and the second return value is True.
    """
    order = {v: i for i, v in enumerate(sorted(vertices))}
    found: list[frozenset[str]] = []

    def expand(clique: list[str], candidates: set[str], excluded: set[str]) -> None:
        if not candidates and not excluded:
            if clique:
                found.append(frozenset(clique))
                if cap is not None and len(found) > cap:
                    raise _Cap()
            return
        pivot = max(
            candidates | excluded,
            key=lambda u: (len(candidates & neighbors[u]), -order[u]),
        )
        for v in sorted(candidates - neighbors[pivot], key=order.get):
            expand(clique + [v], candidates & neighbors[v], excluded & neighbors[v])
            candidates = candidates - {v}
            excluded = excluded | {v}

    try:
        expand([], set(vertices), set())
    except _Cap:
        return found[:cap], True
    return found, False


def greedy_groups(vertices: list[str], neighbors: dict[str, set[str]]) -> list[frozenset[str]]:
    """Fast degraded grouping: first-fit cliques in lexicographic order.

    Groups are cliques but not necessarily maximal ones; used only when
    full enumeration blows past the clique cap.
    """
    groups: list[set[str]] = []
    for v in sorted(vertices):
        for group in groups:
            if all(u in neighbors[v] for u in group):
                group.add(v)
                break
        else:
            groups.append({v})
    return [frozenset(g) for g in groups]
