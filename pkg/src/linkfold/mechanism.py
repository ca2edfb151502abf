"""General planar linkage kinematics.

Mobility counting, closed-loop position solving (damped Newton on stacked
loop-closure residuals, warm started, with a dyadic circle-circle cold
start), velocity/acceleration propagation, and transmission-angle audits.

Conventions: lengths in mm, angles in radians internally.  A link pose is
(x, y, theta): the rigid transform from link-local pivot coordinates to
world.  The ground link pose is pinned to the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry as geo
from .errors import (AssemblyError, ConvergenceError, GeometryError,
                     SingularityError, ValidationError)

POSITION_TOL = 1e-6          # mm, loop-closure residual for a valid solve
MAX_NEWTON_ITER = 100
LEVENBERG_DAMPING = 1e-10
COLD_CONTINUATION_STEP = math.radians(5.0)


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class LinkBody:
    id: str
    pivots: dict[str, np.ndarray]       # name -> local point (mm)
    is_ground: bool = False

    def pivot(self, name: str) -> np.ndarray:
        try:
            return self.pivots[name]
        except KeyError:
            raise ValidationError(f"link {self.id!r} has no pivot {name!r}")


@dataclass(frozen=True)
class RevoluteJoint:
    id: str
    link_a: str
    pivot_a: str
    link_b: str
    pivot_b: str


@dataclass(frozen=True)
class Driver:
    """Driven relative orientation: theta(link) - theta(relative_to).

    relative_to=None measures against the world (ground) frame.
    """
    name: str
    link: str
    relative_to: str | None = None


@dataclass(frozen=True)
class MechanismGraph:
    links: tuple[LinkBody, ...]
    joints: tuple[RevoluteJoint, ...]
    drivers: tuple[Driver, ...]
    branch_flags: dict[str, int] = field(default_factory=dict)
    # far-pivot overrides for transmission pairs on links with >2 pivots
    transmission_hints: dict[tuple[str, str], str] = field(default_factory=dict)
    # link id -> (x, y, theta) used to seed cold Newton starts
    reference_state: dict[str, tuple[float, float, float]] = field(default_factory=dict)
    reference_drivers: dict[str, float] = field(default_factory=dict)

    def link(self, link_id: str) -> LinkBody:
        for lk in self.links:
            if lk.id == link_id:
                return lk
        raise ValidationError(f"unknown link {link_id!r}")

    def joint(self, joint_id: str) -> RevoluteJoint:
        for j in self.joints:
            if j.id == joint_id:
                return j
        raise ValidationError(f"unknown joint {joint_id!r}")

    @property
    def ground(self) -> LinkBody:
        for lk in self.links:
            if lk.is_ground:
                return lk
        raise ValidationError("mechanism has no ground link")


@dataclass(frozen=True)
class MechanismState:
    poses: dict[str, tuple[float, float, float]]   # link id -> (x, y, theta)
    residual: float                                # mm

    def pose(self, link_id: str) -> tuple[float, float, float]:
        return self.poses[link_id]

    def orientation(self, link_id: str) -> float:
        return self.poses[link_id][2]

    def world_point(self, mech: MechanismGraph, link_id: str, pivot: str) -> np.ndarray:
        x, y, th = self.poses[link_id]
        local = mech.link(link_id).pivot(pivot)
        return geo.vec(x, y) + geo.rot(th) @ local


@dataclass(frozen=True)
class KinematicDerivatives:
    angular_velocity: dict[str, float]         # rad/s per link
    angular_acceleration: dict[str, float]     # rad/s^2 per link
    pivot_velocity: dict[tuple[str, str], np.ndarray]      # mm/s
    pivot_acceleration: dict[tuple[str, str], np.ndarray]  # mm/s^2


@dataclass(frozen=True)
class MobilityReport:
    L: int
    J: int
    H: int
    dof: int


@dataclass(frozen=True)
class SweepEntry:
    drivers: dict[str, float]
    state: MechanismState | None
    transmission_deg: tuple[float, ...]
    feasible: bool


# ---------------------------------------------------------------------------
# Validation and mobility


def validate(mech: MechanismGraph) -> None:
    if not mech.links:
        raise ValidationError("mechanism has no links")
    grounds = [lk for lk in mech.links if lk.is_ground]
    if len(grounds) != 1:
        raise ValidationError(f"expected exactly one ground link, got {len(grounds)}")
    ids = [lk.id for lk in mech.links]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate link ids")
    for lk in mech.links:
        if not lk.pivots:
            raise ValidationError(f"link {lk.id!r} has no pivots")
    adjacency: dict[str, set[str]] = {lk.id: set() for lk in mech.links}
    jids = set()
    for j in mech.joints:
        if j.id in jids:
            raise ValidationError(f"duplicate joint id {j.id!r}")
        jids.add(j.id)
        if j.link_a == j.link_b:
            raise ValidationError(f"joint {j.id!r} connects link {j.link_a!r} to itself")
        mech.link(j.link_a).pivot(j.pivot_a)
        mech.link(j.link_b).pivot(j.pivot_b)
        adjacency[j.link_a].add(j.link_b)
        adjacency[j.link_b].add(j.link_a)
    # every link must reach ground through the joint graph
    seen = {grounds[0].id}
    stack = [grounds[0].id]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    missing = set(ids) - seen
    if missing:
        raise ValidationError(f"links not connected to ground: {sorted(missing)}")
    for d in mech.drivers:
        mech.link(d.link)
        if d.relative_to is not None:
            mech.link(d.relative_to)


def mobility(mech: MechanismGraph) -> MobilityReport:
    """Kutzbach planar mobility: dof = 3(L-1) - 2J - H, H = 0 here."""
    validate(mech)
    L = len(mech.links)
    J = len(mech.joints)
    H = 0
    return MobilityReport(L=L, J=J, H=H, dof=3 * (L - 1) - 2 * J - H)


# ---------------------------------------------------------------------------
# Position solving


def _moving_links(mech: MechanismGraph) -> list[str]:
    return [lk.id for lk in mech.links if not lk.is_ground]


def _pack(poses: dict[str, tuple[float, float, float]], order: list[str]) -> np.ndarray:
    return np.array([v for lid in order for v in poses[lid]])


def _unpack(q: np.ndarray, order: list[str], ground_id: str) -> dict[str, tuple[float, float, float]]:
    poses = {ground_id: (0.0, 0.0, 0.0)}
    for i, lid in enumerate(order):
        poses[lid] = (float(q[3 * i]), float(q[3 * i + 1]), float(q[3 * i + 2]))
    return poses


def _residual_and_jacobian(mech: MechanismGraph, q: np.ndarray, order: list[str],
                           driven: dict[str, float]):
    idx = {lid: i for i, lid in enumerate(order)}
    ground_id = mech.ground.id
    n = 3 * len(order)
    m = 2 * len(mech.joints) + len(driven)
    r = np.zeros(m)
    Jm = np.zeros((m, n))

    def pose_of(lid):
        if lid == ground_id:
            return 0.0, 0.0, 0.0
        i = idx[lid]
        return q[3 * i], q[3 * i + 1], q[3 * i + 2]

    row = 0
    for j in mech.joints:
        for lid, pname, sign in ((j.link_a, j.pivot_a, 1.0), (j.link_b, j.pivot_b, -1.0)):
            x, y, th = pose_of(lid)
            s = mech.link(lid).pivot(pname)
            c, sn = math.cos(th), math.sin(th)
            wx = x + c * s[0] - sn * s[1]
            wy = y + sn * s[0] + c * s[1]
            r[row] += sign * wx
            r[row + 1] += sign * wy
            if lid != ground_id:
                i = idx[lid]
                Jm[row, 3 * i] += sign
                Jm[row + 1, 3 * i + 1] += sign
                Jm[row, 3 * i + 2] += sign * (-sn * s[0] - c * s[1])
                Jm[row + 1, 3 * i + 2] += sign * (c * s[0] - sn * s[1])
        row += 2
    for d in mech.drivers:
        if d.name not in driven:
            continue
        _, _, thb = pose_of(d.link)
        tha = 0.0 if d.relative_to is None else pose_of(d.relative_to)[2]
        r[row] = geo.wrap_pi((thb - tha) - driven[d.name])
        if d.link != ground_id:
            Jm[row, 3 * idx[d.link] + 2] = 1.0
        if d.relative_to is not None and d.relative_to != ground_id:
            Jm[row, 3 * idx[d.relative_to] + 2] = -1.0
        row += 1
    return r, Jm


def _worst_joint(mech: MechanismGraph, r: np.ndarray) -> str:
    worst, worst_id = -1.0, mech.joints[0].id
    for k, j in enumerate(mech.joints):
        e = math.hypot(r[2 * k], r[2 * k + 1])
        if e > worst:
            worst, worst_id = e, j.id
    return worst_id


def _newton(mech: MechanismGraph, q0: np.ndarray, order: list[str],
            driven: dict[str, float]) -> tuple[np.ndarray, float]:
    q = q0.copy()
    lam = LEVENBERG_DAMPING
    best_r = math.inf
    for _ in range(MAX_NEWTON_ITER):
        r, Jm = _residual_and_jacobian(mech, q, order, driven)
        rn = float(np.max(np.abs(r))) if len(r) else 0.0
        if rn <= POSITION_TOL * 0.1:
            return q, rn
        best_r = min(best_r, rn)
        A = Jm.T @ Jm + lam * np.eye(Jm.shape[1])
        try:
            step = np.linalg.solve(A, Jm.T @ r)
        except np.linalg.LinAlgError:
            lam = max(lam * 10.0, 1e-8)
            continue
        q_new = q - step
        r_new, _ = _residual_and_jacobian(mech, q_new, order, driven)
        rn_new = float(np.max(np.abs(r_new))) if len(r_new) else 0.0
        if rn_new < rn:
            q = q_new
            lam = max(lam * 0.25, LEVENBERG_DAMPING)
        else:
            lam *= 10.0
            if lam > 1e6:
                break
    r, _ = _residual_and_jacobian(mech, q, order, driven)
    return q, float(np.max(np.abs(r)))


def _weld_compounds(mech: MechanismGraph, driven: dict[str, float]):
    """Fold drivers between two non-ground links that share a joint into
    compound bodies so dyadic propagation can treat them as one link.

    Returns (members, pivots) where members maps compound root -> set of
    link ids and pivots maps (link, pivot) -> local point in the root frame.
    """
    ground_id = mech.ground.id
    parent = {lk.id: lk.id for lk in mech.links}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # local transform of each link within its compound root frame
    xf: dict[str, tuple[float, np.ndarray]] = {lk.id: (0.0, geo.vec(0, 0)) for lk in mech.links}

    for d in mech.drivers:
        if d.name not in driven or d.relative_to is None:
            continue
        if d.link == ground_id or d.relative_to == ground_id:
            continue
        shared = None
        for j in mech.joints:
            if {j.link_a, j.link_b} == {d.relative_to, d.link}:
                shared = j
                break
        if shared is None:
            continue
        ra, rb = find(d.relative_to), find(d.link)
        if ra == rb:
            continue
        # express link d.link in the frame of d.relative_to's compound
        th_a, t_a = xf[d.relative_to]
        ang = th_a + driven[d.name]
        if shared.link_a == d.relative_to:
            pa, pb = shared.pivot_a, shared.pivot_b
        else:
            pa, pb = shared.pivot_b, shared.pivot_a
        anchor = t_a + geo.rot(th_a) @ mech.link(d.relative_to).pivot(pa)
        trans = anchor - geo.rot(ang) @ mech.link(d.link).pivot(pb)
        # rebase everything in rb's tree onto ra
        delta_th = ang - xf[d.link][0]
        delta_t = trans - geo.rot(delta_th) @ xf[d.link][1]
        for lk in mech.links:
            if find(lk.id) == rb:
                th0, t0 = xf[lk.id]
                xf[lk.id] = (th0 + delta_th, delta_t + geo.rot(delta_th) @ t0)
        parent[rb] = ra

    members: dict[str, set[str]] = {}
    for lk in mech.links:
        members.setdefault(find(lk.id), set()).add(lk.id)
    return members, xf, find


def _propagate_dyadic(mech: MechanismGraph, driven: dict[str, float]):
    """Cold-start pose guess via driven-angle propagation and RR dyads.

    Returns poses dict or None when the topology cannot be fully resolved
    this way (caller then falls back to the stored reference state).
    """
    ground_id = mech.ground.id
    members, xf, find = _weld_compounds(mech, driven)
    placed: dict[str, tuple[float, np.ndarray]] = {}  # compound root -> (theta, translation)
    placed[find(ground_id)] = (-xf[ground_id][0],
                               -geo.rot(-xf[ground_id][0]) @ xf[ground_id][1])

    def link_pose(lid):
        root = find(lid)
        if root not in placed:
            return None
        th_r, t_r = placed[root]
        th_l, t_l = xf[lid]
        return th_r + th_l, t_r + geo.rot(th_r) @ t_l

    def world_pivot(lid, pname):
        p = link_pose(lid)
        if p is None:
            return None
        th, t = p
        return t + geo.rot(th) @ mech.link(lid).pivot(pname)

    def place_by_two_points(root, anchors):
        # anchors: [(lid, pname, world target), ...] with >= 2 entries
        (l0, p0, w0), (l1, p1, w1) = anchors[0], anchors[1]
        th0, t0 = xf[l0]
        a0 = t0 + geo.rot(th0) @ mech.link(l0).pivot(p0)
        th1, t1 = xf[l1]
        a1 = t1 + geo.rot(th1) @ mech.link(l1).pivot(p1)
        if geo.norm(a1 - a0) < 1e-12:
            return False
        th = geo.angle_of(w1 - w0) - geo.angle_of(a1 - a0)
        t = w0 - geo.rot(th) @ a0
        placed[root] = (th, t)
        return True

    progress = True
    while progress and len(placed) < len(members):
        progress = False
        # anchors from joints into placed compounds
        anchor_map: dict[str, list] = {root: [] for root in members if root not in placed}
        for j in mech.joints:
            for lid, pname, olid, opname in ((j.link_a, j.pivot_a, j.link_b, j.pivot_b),
                                             (j.link_b, j.pivot_b, j.link_a, j.pivot_a)):
                root = find(lid)
                if root in placed:
                    continue
                w = world_pivot(olid, opname)
                if w is not None:
                    anchor_map[root].append((j.id, lid, pname, w))
        # 1) two known anchors -> rigid placement
        for root, anchors in anchor_map.items():
            uniq = []
            seen_j = set()
            for jid, lid, pname, w in anchors:
                if jid not in seen_j:
                    uniq.append((lid, pname, w))
                    seen_j.add(jid)
            if len(uniq) >= 2 and place_by_two_points(root, uniq):
                progress = True
        if progress:
            continue
        # 2) ground-referenced drivers with a single anchor
        for d in mech.drivers:
            if d.name not in driven:
                continue
            base = ground_id if d.relative_to is None else d.relative_to
            base_pose = link_pose(base)
            root = find(d.link)
            if root in placed or base_pose is None:
                continue
            anchors = anchor_map.get(root, [])
            if not anchors:
                continue
            _, lid, pname, w = anchors[0]
            th_target = base_pose[0] + driven[d.name]
            th_l, t_l = xf[d.link]
            th_root = th_target - th_l
            # orient the compound, then pin the anchor pivot
            thp, tp = xf[lid]
            a = tp + geo.rot(thp) @ mech.link(lid).pivot(pname)
            placed[root] = (th_root, w - geo.rot(th_root) @ a)
            progress = True
            break
        if progress:
            continue
        # 3) RR dyad: two unplaced compounds joined to each other, each with
        #    exactly one known anchor
        for j in mech.joints:
            ra, rb = find(j.link_a), find(j.link_b)
            if ra in placed or rb in placed or ra == rb:
                continue
            aa = [a for a in anchor_map.get(ra, []) if a[0] != j.id]
            ab = [a for a in anchor_map.get(rb, []) if a[0] != j.id]
            if not aa or not ab:
                continue
            _, la, pa, wa = aa[0]
            _, lb, pb, wb = ab[0]
            tha, ta = xf[la]
            base_a = ta + geo.rot(tha) @ mech.link(la).pivot(pa)
            thja, tja = xf[j.link_a]
            ja = tja + geo.rot(thja) @ mech.link(j.link_a).pivot(j.pivot_a)
            r_a = geo.norm(ja - base_a)
            thb, tb = xf[lb]
            base_b = tb + geo.rot(thb) @ mech.link(lb).pivot(pb)
            thjb, tjb = xf[j.link_b]
            jb = tjb + geo.rot(thjb) @ mech.link(j.link_b).pivot(j.pivot_b)
            r_b = geo.norm(jb - base_b)
            sign = mech.branch_flags.get(j.id, +1)
            try:
                w_elbow = geo.circle_circle(wa, r_a, wb, r_b, sign)
            except GeometryError as exc:
                raise AssemblyError(
                    f"loop through joint {j.id!r} is not assemblable: {exc}",
                    loop=j.id) from exc
            place_by_two_points(ra, [(la, pa, wa), (j.link_a, j.pivot_a, w_elbow)])
            place_by_two_points(rb, [(lb, pb, wb), (j.link_b, j.pivot_b, w_elbow)])
            progress = True
            break

    if len(placed) < len(members):
        return None
    poses = {}
    for lk in mech.links:
        th, t = link_pose(lk.id)
        poses[lk.id] = (float(t[0]), float(t[1]), float(th))
    return poses


def solve_position(mech: MechanismGraph, driven_angles: dict[str, float],
                   warm_start: MechanismState | None = None) -> MechanismState:
    """Solve joint coincidence to <= 1e-6 mm for the given driven angles.

    Branch selection: the warm start's branch when given, otherwise the
    assembly encoded by the mechanism's branch flags (dyadic cold start).
    """
    validate(mech)
    dof = mobility(mech).dof
    names = {d.name for d in mech.drivers}
    unknown = set(driven_angles) - names
    if unknown:
        raise ValidationError(f"unknown driver names: {sorted(unknown)}")
    if len(driven_angles) != dof:
        raise ValidationError(
            f"mechanism has {dof} dof but {len(driven_angles)} driven angles given")
    order = _moving_links(mech)
    ground_id = mech.ground.id

    if warm_start is not None:
        if warm_start.residual > 1.0:
            raise ValidationError("warm start residual exceeds 1 mm")
        q0 = _pack(warm_start.poses, order)
        q, rn = _newton(mech, q0, order, driven_angles)
        if rn <= POSITION_TOL:
            return MechanismState(_unpack(q, order, ground_id), rn)
        r, _ = _residual_and_jacobian(mech, q, order, driven_angles)
        raise AssemblyError(
            f"no assembly near warm start; worst loop at joint "
            f"{_worst_joint(mech, r)!r} (residual {rn:.3g} mm)",
            loop=_worst_joint(mech, r))

    guess = _propagate_dyadic(mech, driven_angles)
    if guess is not None:
        q, rn = _newton(mech, _pack(guess, order), order, driven_angles)
        if rn <= POSITION_TOL:
            return MechanismState(_unpack(q, order, ground_id), rn)

    # continuation from the stored reference assembly
    if not mech.reference_state:
        if guess is None:
            raise ConvergenceError("no cold-start strategy available "
                                   "(no reference state, dyadic propagation failed)")
        r, _ = _residual_and_jacobian(mech, _pack(guess, order), order, driven_angles)
        raise AssemblyError(
            f"not assemblable at requested drivers; worst loop at joint "
            f"{_worst_joint(mech, r)!r}", loop=_worst_joint(mech, r))
    start = dict(mech.reference_drivers)
    target = dict(driven_angles)
    span = max((abs(geo.wrap_pi(target[k] - start.get(k, 0.0))) for k in target), default=0.0)
    steps = max(1, int(math.ceil(span / COLD_CONTINUATION_STEP)))
    poses = {lid: mech.reference_state.get(lid, (0.0, 0.0, 0.0)) for lid in order}
    q = _pack(poses, order)
    rn = math.inf
    for k in range(1, steps + 1):
        frac = k / steps
        mid = {name: start.get(name, 0.0) + frac * geo.wrap_pi(val - start.get(name, 0.0))
               for name, val in target.items()}
        q, rn = _newton(mech, q, order, mid)
        if rn > POSITION_TOL:
            r, _ = _residual_and_jacobian(mech, q, order, mid)
            raise AssemblyError(
                f"not assemblable at requested drivers; worst loop at joint "
                f"{_worst_joint(mech, r)!r} (residual {rn:.3g} mm)",
                loop=_worst_joint(mech, r))
    return MechanismState(_unpack(q, order, ground_id), rn)


# ---------------------------------------------------------------------------
# Derivatives


def _driver_rows(mech: MechanismGraph, driven_names: list[str]) -> list[Driver]:
    by_name = {d.name: d for d in mech.drivers}
    return [by_name[n] for n in driven_names]


def kinematic_derivatives(mech: MechanismGraph, state: MechanismState,
                          driver_rates: dict[str, float],
                          driver_accels: dict[str, float] | None = None) -> KinematicDerivatives:
    """Velocities/accelerations satisfying the differentiated loop closure."""
    if state.residual > POSITION_TOL:
        raise ValidationError("state residual exceeds the position tolerance")
    driver_accels = driver_accels or {name: 0.0 for name in driver_rates}
    order = _moving_links(mech)
    ground_id = mech.ground.id
    q = _pack(state.poses, order)
    _, Jm = _residual_and_jacobian(
        mech, q, order, {n: 0.0 for n in driver_rates})
    # RHS: joint rows are zero for velocity; driver rows equal driven rates
    njr = 2 * len(mech.joints)
    rhs_v = np.zeros(Jm.shape[0])
    for k, d in enumerate(_driver_rows(mech, list(driver_rates))):
        rhs_v[njr + k] = driver_rates[d.name]
    cond = np.linalg.cond(Jm)
    if not np.isfinite(cond) or cond > 1e12:
        # the joint whose rows align worst with the range space is the dead point
        _, _, vt = np.linalg.svd(Jm)
        null = vt[-1]
        scores = [float(np.abs(Jm[2 * k:2 * k + 2] @ null).sum())
                  for k in range(len(mech.joints))]
        jid = mech.joints[int(np.argmax(scores))].id
        raise SingularityError(f"dead-point configuration at joint {jid!r}", joint_id=jid)
    qdot = np.linalg.solve(Jm, rhs_v)

    # acceleration RHS: gamma terms from the rotating pivot arms
    idx = {lid: i for i, lid in enumerate(order)}
    rhs_a = np.zeros(Jm.shape[0])
    for k, d in enumerate(_driver_rows(mech, list(driver_rates))):
        rhs_a[njr + k] = driver_accels.get(d.name, 0.0)
    for k, j in enumerate(mech.joints):
        for lid, pname, sign in ((j.link_a, j.pivot_a, 1.0), (j.link_b, j.pivot_b, -1.0)):
            if lid == ground_id:
                continue
            i = idx[lid]
            th = q[3 * i + 2]
            w = qdot[3 * i + 2]
            s = mech.link(lid).pivot(pname)
            arm = geo.rot(th) @ s
            # d^2/dt^2 (R s) = alpha * R' s - w^2 * R s ; the alpha part lives in Jm
            rhs_a[2 * k] -= sign * (-(w ** 2) * arm[0])
            rhs_a[2 * k + 1] -= sign * (-(w ** 2) * arm[1])
    qddot = np.linalg.solve(Jm, rhs_a)

    omega = {ground_id: 0.0}
    alpha = {ground_id: 0.0}
    for i, lid in enumerate(order):
        omega[lid] = float(qdot[3 * i + 2])
        alpha[lid] = float(qddot[3 * i + 2])
    pv: dict[tuple[str, str], np.ndarray] = {}
    pa: dict[tuple[str, str], np.ndarray] = {}
    for lk in mech.links:
        for pname, s in lk.pivots.items():
            if lk.is_ground:
                pv[(lk.id, pname)] = geo.vec(0, 0)
                pa[(lk.id, pname)] = geo.vec(0, 0)
                continue
            i = idx[lk.id]
            th = q[3 * i + 2]
            w, al = omega[lk.id], alpha[lk.id]
            arm = geo.rot(th) @ s
            perp = geo.vec(-arm[1], arm[0])
            pv[(lk.id, pname)] = geo.vec(qdot[3 * i], qdot[3 * i + 1]) + w * perp
            pa[(lk.id, pname)] = (geo.vec(qddot[3 * i], qddot[3 * i + 1])
                                  + al * perp - w * w * arm)
    return KinematicDerivatives(omega, alpha, pv, pa)


# ---------------------------------------------------------------------------
# Transmission angles and sweeps


def _far_pivot(mech: MechanismGraph, link_id: str, joint: RevoluteJoint) -> str:
    near = joint.pivot_a if joint.link_a == link_id else joint.pivot_b
    hint = mech.transmission_hints.get((joint.id, link_id))
    if hint is not None:
        return hint
    others = [p for p in mech.link(link_id).pivots if p != near]
    if not others:
        raise GeometryError(f"link {link_id!r} has a single pivot; no direction")
    return others[0]


def transmission_angles(mech: MechanismGraph, state: MechanismState,
                        pairs: list[tuple[str, str, str]]) -> list[float]:
    """Unsigned angle in degrees, in [0, 180], between link directions at a joint."""
    out = []
    for joint_id, link_a, link_b in pairs:
        j = mech.joint(joint_id)
        if {link_a, link_b} != {j.link_a, j.link_b}:
            raise ValidationError(
                f"links {link_a!r}/{link_b!r} do not meet at joint {joint_id!r}")
        shared = state.world_point(mech, j.link_a, j.pivot_a)
        dirs = []
        for lid in (link_a, link_b):
            far = _far_pivot(mech, lid, j)
            v = state.world_point(mech, lid, far) - shared
            if geo.norm(v) < 1e-9:
                raise GeometryError(f"degenerate link {lid!r}: coincident pivots")
            dirs.append(v)
        out.append(math.degrees(geo.angle_between(dirs[0], dirs[1])))
    return out


def sweep(mech: MechanismGraph, driver_grid: list[dict[str, float]],
          pairs: list[tuple[str, str, str]] | None = None) -> list[SweepEntry]:
    """Warm-start-chained solve along a driver grid; failures are flagged."""
    if not driver_grid:
        raise ValidationError("empty driver grid")
    pairs = pairs or []
    entries: list[SweepEntry] = []
    warm: MechanismState | None = None
    for i, driven in enumerate(driver_grid):
        try:
            state = solve_position(mech, driven, warm_start=warm)
        except AssemblyError:
            if i == 0:
                raise
            entries.append(SweepEntry(dict(driven), None, (), False))
            continue
        warm = state
        tangles = tuple(transmission_angles(mech, state, pairs)) if pairs else ()
        entries.append(SweepEntry(dict(driven), state, tangles, True))
    return entries
