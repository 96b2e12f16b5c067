"""Lattice search over (x, y, theta) with constant-twist primitives.

Stands in for a polynomial trajectory optimizer: a hybrid-A* style search finds a
collision-free geometric path made of straight moves, arcs and in-place turns,
short-cuts it with rotate-translate-rotate connections, and then time-parameterizes
it with trapezoidal speed profiles.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from ..errors import GoalInCollision, NoPathFound, StartInCollision
from ..geometry import MotionLimits, Pose2, angle_diff, wrap_angle
from .collision import CollisionModel, OccupancyMap, collision_check, collisions_along
from .trajectory import (
    Segment,
    Trajectory,
    profile_segments,
    sample_segments,
    segments_duration_estimate,
    segments_endpoint,
)

GOAL_POS_TOL = 0.05
GOAL_ANG_TOL = 0.05


@dataclass(frozen=True)
class PlannerSettings:
    resolution: float = 0.1  # m, closed-set cell size
    headings: int = 16
    allow_backward: bool = True
    heuristic_resolution: float = 0.25
    max_expansions: int = 30000
    check_epsilon: float = 0.005  # extra clearance for sampled checks
    backward_penalty: float = 1.2  # multiplies backward move time during search
    shot_interval: int = 5
    shortcut: bool = True
    heuristic_weight: float = 1.5  # weighted A*; 1.0 gives plain A* on the admissible heuristic


DEFAULT_SETTINGS = PlannerSettings()


def _path_free(start: Pose2, segments, model: CollisionModel, occ: OccupancyMap, settings: PlannerSettings) -> bool:
    pts = sample_segments(start, segments)
    return not collisions_along(pts, model, occ, occ.clearance_margin + settings.check_epsilon).any()


def rtr_candidates(start: Pose2, goal: Pose2, allow_backward: bool = True) -> list[list[Segment]]:
    """Rotate-translate-rotate connections from ``start`` to ``goal`` (forward, then backward)."""
    dx, dy = goal.x - start.x, goal.y - start.y
    dist = math.hypot(dx, dy)
    if dist < 1e-9:
        return [[Segment("turn", angle_diff(goal.theta, start.theta))]]
    bearing = math.atan2(dy, dx)
    out = []
    directions = (1.0, -1.0) if allow_backward else (1.0,)
    for sign in directions:
        heading = bearing if sign > 0 else wrap_angle(bearing + math.pi)
        out.append(
            [
                Segment("turn", angle_diff(heading, start.theta)),
                Segment("move", sign * dist),
                Segment("turn", angle_diff(goal.theta, heading)),
            ]
        )
    return out


def _clean(segments: list[Segment]) -> list[Segment]:
    """Drop empty pieces and merge adjacent turns / collinear moves."""
    out: list[Segment] = []
    for seg in segments:
        if abs(seg.amount) < 1e-12:
            continue
        if out and out[-1].kind == seg.kind == "turn":
            out[-1] = Segment("turn", out[-1].amount + seg.amount)
            if abs(out[-1].amount) < 1e-12:
                out.pop()
            continue
        if (
            out
            and out[-1].kind == seg.kind == "move"
            and out[-1].kappa == seg.kappa
            and (out[-1].amount > 0) == (seg.amount > 0)
        ):
            out[-1] = Segment("move", out[-1].amount + seg.amount, seg.kappa)
            continue
        out.append(seg)
    return out


def _best_direct(start, goal, model, occ, limits, settings):
    best, best_t = None, math.inf
    for cand in rtr_candidates(start, goal, settings.allow_backward):
        cand = _clean(cand)
        t = segments_duration_estimate(cand, limits)
        if t < best_t and _path_free(start, cand, model, occ, settings):
            best, best_t = cand, t
    return best


# --- heuristic -------------------------------------------------------------------


class HeuristicField:
    """Obstacle-aware 2D shortest distances to the goal on a coarse grid.

    Cells are blocked only when the robot origin cannot be anywhere inside them,
    so a pose whose cell is unreachable from the goal cell has no path at all.
    """

    def __init__(self, occ: OccupancyMap, goal_xy: tuple[float, float], inflation: float, res: float):
        b = occ.bounds
        self.res = res
        self.x0, self.y0 = b.xmin, b.ymin
        self.nx = max(1, math.ceil(b.width / res))
        self.ny = max(1, math.ceil(b.height / res))
        xs = self.x0 + (np.arange(self.nx) + 0.5) * res
        ys = self.y0 + (np.arange(self.ny) + 0.5) * res
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        half_diag = res * math.sqrt(0.5)
        shrink = inflation - half_diag
        blocked = np.zeros((self.nx, self.ny), dtype=bool)
        if shrink > 0:
            blocked |= (gx < b.xmin + shrink) | (gx > b.xmax - shrink) | (gy < b.ymin + shrink) | (gy > b.ymax - shrink)
        for ox, oy, r in occ.active_circles():
            lim = r + inflation + occ.clearance_margin - half_diag
            if lim > 0:
                blocked |= (gx - ox) ** 2 + (gy - oy) ** 2 < lim * lim
        self.blocked = blocked
        gi, gj = self.cell(*goal_xy)
        self.dist = np.full((self.nx, self.ny), np.inf)
        if blocked[gi, gj]:
            return
        free_idx = -np.ones((self.nx, self.ny), dtype=np.int64)
        free = np.argwhere(~blocked)
        free_idx[free[:, 0], free[:, 1]] = np.arange(len(free))
        rows, cols, wts = [], [], []
        for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
            w = res * math.hypot(di, dj)
            a, c = _shifted_pairs(free_idx, di, dj)
            ok = (a >= 0) & (c >= 0)
            rows.append(a[ok])
            cols.append(c[ok])
            wts.append(np.full(int(ok.sum()), w))
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        w = np.concatenate(wts)
        n = len(free)
        graph = coo_matrix((w, (r, c)), shape=(n, n)).tocsr()
        d = dijkstra(graph, directed=False, indices=int(free_idx[gi, gj]))
        self.dist[free[:, 0], free[:, 1]] = d

    def cell(self, x: float, y: float) -> tuple[int, int]:
        i = min(self.nx - 1, max(0, int((x - self.x0) / self.res)))
        j = min(self.ny - 1, max(0, int((y - self.y0) / self.res)))
        return i, j

    def distance(self, x: float, y: float) -> float:
        return float(self.dist[self.cell(x, y)])


def _shifted_pairs(idx: np.ndarray, di: int, dj: int) -> tuple[np.ndarray, np.ndarray]:
    nx, ny = idx.shape
    i0, i1 = max(0, -di), nx - max(0, di)
    j0, j1 = max(0, -dj), ny - max(0, dj)
    a = idx[i0:i1, j0:j1]
    c = idx[i0 + di : i1 + di, j0 + dj : j1 + dj]
    return a.ravel(), c.ravel()


@lru_cache(maxsize=256)
def _heuristic_field(occ: OccupancyMap, gx: float, gy: float, inflation: float, res: float) -> HeuristicField:
    return HeuristicField(occ, (gx, gy), inflation, res)


# --- search ----------------------------------------------------------------------------


def _primitives(limits: MotionLimits, settings: PlannerSettings) -> list[Segment]:
    kappa = limits.omega_max / limits.v_max
    dh = 2.0 * math.pi / settings.headings
    step = max(3.0 * settings.resolution, dh / kappa)
    step = min(step, 1.0)
    moves = []
    for sign in (1.0, -1.0) if settings.allow_backward else (1.0,):
        for k in (0.0, kappa, -kappa, 0.5 * kappa, -0.5 * kappa):
            moves.append(Segment("move", sign * step, k))
    moves.append(Segment("turn", dh))
    moves.append(Segment("turn", -dh))
    return moves


def _search_cost(seg: Segment, limits: MotionLimits, settings: PlannerSettings) -> float:
    if seg.kind == "turn":
        return abs(seg.amount) / limits.omega_max
    cap = limits.v_max if seg.kappa == 0 else min(limits.v_max, limits.omega_max / abs(seg.kappa))
    t = abs(seg.amount) / cap
    return t * settings.backward_penalty if seg.amount < 0 else t


def _search(start, goal, model, occ, limits, settings) -> list[Segment]:
    field = _heuristic_field(
        occ,
        round(goal.x, 9),
        round(goal.y, 9),
        round(model.center_inflation(), 9),
        settings.heuristic_resolution,
    )
    if not np.isfinite(field.distance(start.x, start.y)):
        raise NoPathFound("goal region is disconnected from the start")
    prims = _primitives(limits, settings)
    canon = [sample_segments(Pose2(), [seg])[1:] for seg in prims]
    counts = [len(c) for c in canon]
    splits = np.cumsum(counts)[:-1]
    canon_all = np.concatenate(canon)
    ends = [c[-1] for c in canon]
    res, dh = settings.resolution, 2.0 * math.pi / settings.headings
    margin = occ.clearance_margin + settings.check_epsilon

    def key(x, y, th):
        return (math.floor(x / res), math.floor(y / res), int(round(wrap_angle(th) / dh)) % settings.headings)

    def h(x, y):
        d = field.distance(x, y)
        return max(math.hypot(goal.x - x, goal.y - y), d - 1.5 * field.res) / limits.v_max

    def in_sight(x, y):
        # an 8-connected grid overestimates free-space distance by at most ~8.3%; a
        # larger detour means the straight line is blocked and a shot cannot succeed
        d = field.distance(x, y)
        return d <= 1.09 * math.hypot(goal.x - x, goal.y - y) + 2.0 * field.res

    w = settings.heuristic_weight
    # node: (x, y, th, g, parent, segment)
    nodes = [(start.x, start.y, start.theta, 0.0, -1, None)]
    heap = [(w * h(start.x, start.y), 0, 0)]
    closed = set()
    expansions = 0
    counter = 1
    while heap:
        _, _, ni = heapq.heappop(heap)
        x, y, th, g, _, _ = nodes[ni]
        k = key(x, y, th)
        if k in closed:
            continue
        closed.add(k)
        expansions += 1
        if expansions > settings.max_expansions:
            break
        here = Pose2(x, y, th)
        if here.distance(goal) <= GOAL_POS_TOL and here.heading_error(goal) <= GOAL_ANG_TOL:
            return _unwind(nodes, ni)
        if (expansions == 1 or expansions % settings.shot_interval == 0 or here.distance(goal) < 2.0) and in_sight(x, y):
            shot = _best_direct(here, goal, model, occ, limits, settings)
            if shot is not None:
                return _unwind(nodes, ni) + shot
        c, s = math.cos(th), math.sin(th)
        world = np.empty_like(canon_all)
        world[:, 0] = x + c * canon_all[:, 0] - s * canon_all[:, 1]
        world[:, 1] = y + s * canon_all[:, 0] + c * canon_all[:, 1]
        world[:, 2] = th + canon_all[:, 2]
        hits = collisions_along(world, model, occ, margin)
        blocked = [bool(b.any()) for b in np.split(hits, splits)]
        for seg, (ex, ey, eth), hit in zip(prims, ends, blocked):
            if hit:
                continue
            nx_, ny_, nth = x + c * ex - s * ey, y + s * ex + c * ey, th + eth
            nk = key(nx_, ny_, nth)
            if nk in closed:
                continue
            hv = h(nx_, ny_)
            if not math.isfinite(hv):
                continue
            ng = g + _search_cost(seg, limits, settings)
            nodes.append((nx_, ny_, nth, ng, ni, seg))
            heapq.heappush(heap, (ng + w * hv, counter, len(nodes) - 1))
            counter += 1
    raise NoPathFound(f"search exhausted after {expansions} expansions")


def _unwind(nodes, ni) -> list[Segment]:
    segs = []
    while ni > 0:
        segs.append(nodes[ni][5])
        ni = nodes[ni][4]
    return segs[::-1]


def _waypoints(start: Pose2, segments: list[Segment]) -> list[Pose2]:
    pts = [start]
    for seg in segments:
        pts.append(segments_endpoint(pts[-1], [seg]))
    return pts


def _shortcut(start: Pose2, segments: list[Segment], model, occ, limits, settings) -> list[Segment]:
    """Greedy farthest-reachable replacement of sub-paths by rotate-translate-rotate links."""
    wps = _waypoints(start, segments)
    n = len(segments)
    out: list[Segment] = []
    i = 0
    while i < n:
        # candidates: far end first, thinned so long paths stay cheap
        cands = sorted({n, *range(n - 1, i + 1, -max(1, (n - i) // 12))}, reverse=True)
        advanced = False
        for j in cands:
            if j <= i + 1:
                break
            orig = _clean(list(segments[i:j]))
            orig_t = segments_duration_estimate(orig, limits)
            link = _best_direct(wps[i], wps[j], model, occ, limits, settings)
            if link is not None and segments_duration_estimate(link, limits) <= orig_t:
                out.extend(link)
                i = j
                advanced = True
                break
        if not advanced:
            out.append(segments[i])
            i += 1
    return _clean(out)


def plan_se2(
    start: Pose2,
    goal: Pose2,
    model: CollisionModel,
    occ: OccupancyMap,
    limits: MotionLimits,
    settings: PlannerSettings = DEFAULT_SETTINGS,
) -> Trajectory:
    """Collision-free, time-parameterized trajectory from ``start`` to ``goal``.

    Raises GoalInCollision / StartInCollision for invalid endpoints and NoPathFound
    when the search is exhausted.
    """
    if collision_check(goal, model, occ):
        raise GoalInCollision(f"goal {goal} collides under {model.mode.value} footprint")
    if collision_check(start, model, occ):
        raise StartInCollision(f"start {start} collides under {model.mode.value} footprint")
    if start.distance(goal) < 1e-9 and start.heading_error(goal) < 1e-9:
        return Trajectory.stationary(start)

    segments = _best_direct(start, goal, model, occ, limits, settings)
    if segments is None:
        segments = _search(start, goal, model, occ, limits, settings)
        if settings.shortcut:
            segments = _shortcut(start, segments, model, occ, limits, settings)
    segments = _clean(segments)
    traj = profile_segments(start, segments, limits)
    if collisions_along(traj.data[:, 1:4], model, occ).any():
        raise NoPathFound("profiled trajectory failed the final collision sweep")
    return traj


def plan_direct(
    start: Pose2,
    goal: Pose2,
    model: CollisionModel,
    occ: OccupancyMap,
    limits: MotionLimits,
    settings: PlannerSettings = DEFAULT_SETTINGS,
) -> Trajectory:
    """Rotate-translate-rotate connection only; NoPathFound when both variants collide.

    A cheap stand-in for :func:`plan_se2` in open worlds and large randomized suites.
    """
    if collision_check(goal, model, occ):
        raise GoalInCollision(f"goal {goal} collides under {model.mode.value} footprint")
    if collision_check(start, model, occ):
        raise StartInCollision(f"start {start} collides under {model.mode.value} footprint")
    if start.distance(goal) < 1e-9 and start.heading_error(goal) < 1e-9:
        return Trajectory.stationary(start)
    segments = _best_direct(start, goal, model, occ, limits, settings)
    if segments is None:
        raise NoPathFound("no collision-free rotate-translate-rotate connection")
    traj = profile_segments(start, segments, limits)
    if collisions_along(traj.data[:, 1:4], model, occ).any():
        raise NoPathFound("profiled trajectory failed the final collision sweep")
    return traj
