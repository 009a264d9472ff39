"""Station-aware 2-OPT correction of per-UAV ROI visit orders."""
from __future__ import annotations

from ..charging import StopFinder
from ..energy_sim import Kind, Solution, Waypoint
from ..scenario import Scenario


def roi_orders(solution: Solution, scenario: Scenario) -> list[list[int]]:
    """Per-UAV ROI visit order as flat cell indices, starting at the start cell.

    A ROI belongs to the UAV that has a ROI_VISIT on it; ROIs only ever touched
    by a battery swap go to the lowest-numbered UAV that swapped there. With
    return_to_start the order also ends at the start cell.
    """
    grid = scenario.grid
    start = grid.index(scenario.start)
    rois = {grid.index(r) for r in scenario.rois}
    flat = [[grid.index(w.cell) for w in p] for p in solution.paths]
    owner: dict[int, int] = {}
    for u, path in enumerate(solution.paths):
        for w, i in zip(path[1:], flat[u][1:]):
            if w.kind is Kind.ROI_VISIT and i in rois and i != start:
                owner.setdefault(i, u)
    for u, idx in enumerate(flat):
        for i in idx[1:]:
            if i in rois and i != start:
                owner.setdefault(i, u)
    orders = []
    for u, idx in enumerate(flat):
        seen: list[int] = [start]
        for i in idx[1:]:
            if owner.get(i) == u and i not in seen:
                seen.append(i)
        if scenario.return_to_start and len(idx) > 1:
            seen.append(start)
        orders.append(seen)
    return orders


def _plan(finder: StopFinder, pos: int, energy: float, targets, shared: set[int]
          ) -> tuple[list[tuple[int, Kind]], float, set[int]]:
    """Fly through `targets` from (pos, energy), swapping only when forced."""
    Dl, fc, e_max = finder.Dl, finder.fly_cost, finder.e_max
    hops: list[tuple[int, Kind]] = []
    own: set[int] = set()
    length = 0.0
    for target in targets:
        while fc * Dl[pos][target] > energy - 1e-6:
            c = finder.next_stop(pos, target, energy, shared | own)
            if c is None:
                if energy >= e_max:
                    raise RuntimeError(f"cell {target} unreachable from {pos} on a full battery")
                c = pos
            hops.append((c, Kind.RECHARGE))
            length += Dl[pos][c]
            pos, energy = c, e_max
            if c not in shared:
                own.add(c)
        length += Dl[pos][target]
        energy -= fc * Dl[pos][target]
        pos = target
        hops.append((target, Kind.ROI_VISIT))
    return hops, length, own


def place_stations(scenario: Scenario, order: list[int], shared: set[int] = frozenset(),
                   slack_m: float | None = None, finder: StopFinder | None = None
                   ) -> tuple[list[Waypoint], set[int]]:
    """Fly `order` (flat indices) from a full battery, swapping only when forced.

    A swap first tries an existing shared station on a short detour toward the
    next ROI, else the reachable cell closest to that ROI. Returns the waypoints
    and the stations this path adds beyond `shared`.
    """
    finder = finder or StopFinder(scenario, slack_m)
    hops, _, own = _plan(finder, order[0], finder.e_max, order[1:], set(shared))
    cell = scenario.grid.cell
    return [Waypoint(cell(order[0]), Kind.START)] + [Waypoint(cell(i), k) for i, k in hops], own


def _checkpoints(finder: StopFinder, path: list[tuple[int, Kind]], order: list[int]):
    """(waypoint count, energy, length) when the path first reaches each order entry."""
    Dl, fc, e_max = finder.Dl, finder.fly_cost, finder.e_max
    states = [(1, e_max, 0.0)]
    k, energy, length = 1, e_max, 0.0
    for w in range(1, len(path)):
        i, kind = path[w]
        d = Dl[path[w - 1][0]][i]
        length += d
        energy = e_max if kind is Kind.RECHARGE else energy - fc * d
        if k < len(order) and i == order[k]:
            states.append((w + 1, energy, length))
            k += 1
    return states


def two_opt(solution: Solution, scenario: Scenario, slack_m: float | None = None,
            finder: StopFinder | None = None) -> Solution:
    """Remove crossings from each UAV's ROI order with segment reversals.

    A reversal of order[i..j] is tried only when it shortens the bare ROI
    polyline. The path up to order[i-1] is kept and the rest re-flown with
    fresh swap stops; the move is kept when that UAV's path gets strictly
    shorter and the total station count does not grow. Other UAVs' paths are
    never touched. Moves are scanned in lexicographic (i, j) order, first
    improvement, until none applies.
    """
    grid = scenario.grid
    finder = finder or StopFinder(scenario, slack_m)
    Dl = finder.Dl
    orders = roi_orders(solution, scenario)
    paths = [[(grid.index(w.cell), w.kind) for w in p] for p in solution.paths]
    lengths = [sum(Dl[a[0]][b[0]] for a, b in zip(p, p[1:])) for p in paths]
    own = [{i for i, k in p if k is Kind.RECHARGE} for p in paths]
    extra = {grid.index(s) for s in solution.stations} - set().union(*own)
    changed = False

    for u, order in enumerate(orders):
        last = len(order) - (2 if scenario.return_to_start else 1)
        if last < 2:
            continue
        improved = True
        while improved:
            improved = False
            others = extra.union(*(own[v] for v in range(len(paths)) if v != u))
            nc = len(others | own[u])
            states = _checkpoints(finder, paths[u], order)
            for i in range(1, last):
                a, b = order[i - 1], order[i]
                for j in range(i + 1, last + 1):
                    c = order[j]
                    delta = Dl[a][c] - Dl[a][b]
                    if j + 1 < len(order):
                        delta += Dl[b][order[j + 1]] - Dl[c][order[j + 1]]
                    if delta >= -1e-9:
                        continue
                    n_wp, energy, prefix_len = states[i - 1]
                    tail = order[i:j + 1][::-1] + order[j + 1:]
                    known = others | {k for k, kind in paths[u][:n_wp] if kind is Kind.RECHARGE}
                    hops, tail_len, new_own = _plan(finder, a, energy, tail, known)
                    if prefix_len + tail_len < lengths[u] - 1e-9:
                        new_path = paths[u][:n_wp] + hops
                        used = {k for k, kind in new_path if kind is Kind.RECHARGE}
                        if len(others | used) <= nc:
                            order[i:] = tail
                            paths[u] = new_path
                            lengths[u] = prefix_len + tail_len
                            own[u] = used
                            improved = changed = True
                            break
                if improved:
                    break

    if not changed:
        return solution
    cell = grid.cell
    wps = [[Waypoint(cell(i), k) for i, k in p] for p in paths]
    return Solution.build(grid, wps, [cell(i) for i in set().union(extra, *own)])
