"""Underactuated two-joint finger: parameterization, forward kinematics,
spring-loaded underactuation, quasi-static grasping, and width estimation.

Topology: the proximal phalanx is the ground link.  A six-bar loop
A-B-C-D-E-F-A (intermediate phalanx AB, distal phalanx BC, pull bar CD,
ternary coupler DE, actuation crank EF, ground FA) plus a constraint bar
G-G' closing a four-bar F-E-G'-G gives seven links and eight revolute
joints: a two-dof mechanism.  The two generalized inputs are the crank
angle (motor) and the DIP deflection (torsion spring).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import mechanism as mc
from .errors import AssemblyError, DomainError, GeometryError

PHALANX_LENGTHS = (32.0, 23.0, 35.0)   # distal, intermediate, proximal (mm)
PAD_WIDTH = 24.0                       # mm, out-of-plane sensing width

# Transmission pairs audited on the reference finger (far pivots follow the
# six-bar loop; the two phalanx joints A and B are excluded on purpose: they
# sweep through folded alignments by design).
MONITORED_PAIRS = (
    ("j_c", "distal", "pull_cd"),
    ("j_d", "pull_cd", "coupler_de"),
    ("j_e", "coupler_de", "crank_ef"),
    ("j_gp", "coupler_de", "bar_gg"),
)

CONTACT_TOL = 0.02      # mm, pad-object gap treated as touching
PENETRATION_TOL = 1e-3  # mm


@dataclass(frozen=True)
class SpringParams:
    stiffness: float = 50.0       # N*mm/rad at the DIP joint
    rest_angle_deg: float = 0.0


@dataclass(frozen=True)
class LinkageDesign:
    """Free geometry of the transmission, in the straight-finger frame.

    The proximal pad runs from O=(0,0) to A=(35,0); B=(58,0); T'=(90,0).
    All points are mm in that frame; the mechanism occupies y < 0.
    """
    crank_pivot: tuple[float, float]       # F on ground
    base_pivot: tuple[float, float]        # G on ground
    crank_len: float                       # |FE|
    coupler_len: float                     # |E G'|
    base_rocker_len: float                 # |G G'|
    coupler_point: tuple[float, float]     # D in the coupler frame (origin E, x to G')
    crank_angle_open_deg: float            # crank orientation at the straight pose
    crank_dir: int                         # +1 CCW closes, -1 CW closes
    distal_drive_point: tuple[float, float]  # C in the distal frame (origin B, x to T')
    fourbar_elbow: int = +1
    drive_elbow: int = +1
    stroke_deg: float = 150.0              # usable actuator travel


@dataclass(frozen=True)
class FingerParams:
    phalanx_lengths: tuple[float, float, float] = PHALANX_LENGTHS
    pad_width: float = PAD_WIDTH
    design: LinkageDesign = None
    spring: SpringParams = field(default_factory=SpringParams)
    mechanism: mc.MechanismGraph = None
    labels: dict[str, tuple[str, str]] = None   # node label -> (link, pivot)

    @property
    def stroke_deg(self) -> float:
        return self.design.stroke_deg


@dataclass(frozen=True)
class FingerConfig:
    actuator_deg: float
    theta_pip_deg: float
    theta_dip_deg: float


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("circle radius must be positive")


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise DomainError("polygon needs at least 3 vertices")
        pts = np.array(self.vertices)
        n = len(pts)
        sign = 0.0
        for i in range(n):
            c = geo.cross2(pts[(i + 1) % n] - pts[i], pts[(i + 2) % n] - pts[(i + 1) % n])
            if sign == 0.0 and abs(c) > 1e-12:
                sign = c
            elif c * sign < -1e-9:
                raise DomainError("polygon is not convex")


GraspObject = Circle | ConvexPolygon


@dataclass(frozen=True)
class ContactEvent:
    step: int
    pad: str            # proximal | intermediate | distal
    actuator_deg: float


@dataclass(frozen=True)
class GraspTrace:
    steps: tuple[FingerConfig, ...]
    contacts: tuple[ContactEvent, ...]
    final: FingerConfig
    contact_flags: dict[str, bool]
    applied_torque: float        # N*mm at termination
    torque_limited: bool
    reached: bool                # any contact at all


@dataclass(frozen=True)
class FingerPose:
    pads: dict[str, tuple[np.ndarray, np.ndarray]]   # pad name -> (start, end)
    frames: dict[str, tuple[np.ndarray, float]]      # phalanx -> (origin, angle)


# ---------------------------------------------------------------------------
# Mechanism construction


def straight_points(design: LinkageDesign, lengths=PHALANX_LENGTHS):
    """All node positions in the straight-finger frame."""
    ld, li, lp = lengths
    O = geo.vec(0, 0)
    A = geo.vec(lp, 0)
    B = geo.vec(lp + li, 0)
    T = geo.vec(lp + li + ld, 0)
    F = geo.vec(*design.crank_pivot)
    G = geo.vec(*design.base_pivot)
    th0 = math.radians(design.crank_angle_open_deg)
    E = F + design.crank_len * geo.vec(math.cos(th0), math.sin(th0))
    Gp = geo.circle_circle(E, design.coupler_len, G, design.base_rocker_len,
                           design.fourbar_elbow)
    xhat = geo.unit(Gp - E)
    yhat = geo.vec(-xhat[1], xhat[0])
    D = E + design.coupler_point[0] * xhat + design.coupler_point[1] * yhat
    C = B + geo.vec(*design.distal_drive_point)
    return {"O": O, "A": A, "B": B, "T'": T, "C": C, "D": D, "E": E,
            "F": F, "G": G, "G'": Gp}


def build_finger_mechanism(design: LinkageDesign,
                           lengths=PHALANX_LENGTHS) -> mc.MechanismGraph:
    p = straight_points(design, lengths)
    links = (
        mc.LinkBody("proximal", {"O": p["O"], "A": p["A"], "F": p["F"], "G": p["G"]},
                    is_ground=True),
        mc.LinkBody("intermediate", {"A": p["A"], "B": p["B"]}),
        mc.LinkBody("distal", {"B": p["B"], "C": p["C"], "T'": p["T'"]}),
        mc.LinkBody("pull_cd", {"C": p["C"], "D": p["D"]}),
        mc.LinkBody("coupler_de", {"D": p["D"], "E": p["E"], "G'": p["G'"]}),
        mc.LinkBody("crank_ef", {"E": p["E"], "F": p["F"]}),
        mc.LinkBody("bar_gg", {"G": p["G"], "G'": p["G'"]}),
    )
    joints = (
        mc.RevoluteJoint("j_a", "proximal", "A", "intermediate", "A"),
        mc.RevoluteJoint("j_b", "intermediate", "B", "distal", "B"),
        mc.RevoluteJoint("j_c", "distal", "C", "pull_cd", "C"),
        mc.RevoluteJoint("j_d", "pull_cd", "D", "coupler_de", "D"),
        mc.RevoluteJoint("j_e", "coupler_de", "E", "crank_ef", "E"),
        mc.RevoluteJoint("j_f", "crank_ef", "F", "proximal", "F"),
        mc.RevoluteJoint("j_g", "proximal", "G", "bar_gg", "G"),
        mc.RevoluteJoint("j_gp", "coupler_de", "G'", "bar_gg", "G'"),
    )
    drivers = (
        mc.Driver("actuator", "crank_ef", None),
        mc.Driver("pip", "intermediate", None),
        mc.Driver("dip", "distal", "intermediate"),
    )
    A, C, D, E, G, Gp = p["A"], p["C"], p["D"], p["E"], p["G"], p["G'"]
    branch_flags = {
        "j_gp": +1 if geo.cross2(G - E, Gp - E) > 0 else -1,
        "j_c": +1 if geo.cross2(D - A, C - A) > 0 else -1,
    }
    hints = {
        ("j_c", "distal"): "B",
        ("j_d", "coupler_de"): "E",
        ("j_e", "coupler_de"): "D",
        ("j_gp", "coupler_de"): "E",
        ("j_e", "crank_ef"): "F",
        ("j_gp", "bar_gg"): "G",
    }
    reference_state = {lk.id: (0.0, 0.0, 0.0) for lk in links}
    reference_drivers = {"actuator": math.radians(design.crank_angle_open_deg),
                         "pip": 0.0, "dip": 0.0}
    return mc.MechanismGraph(links, joints, drivers, branch_flags, hints,
                             reference_state, reference_drivers)


NODE_LABELS = {
    "O": ("proximal", "O"), "A": ("proximal", "A"), "B": ("intermediate", "B"),
    "C": ("distal", "C"), "D": ("pull_cd", "D"), "E": ("coupler_de", "E"),
    "F": ("crank_ef", "F"), "G": ("bar_gg", "G"), "G'": ("bar_gg", "G'"),
    "T'": ("distal", "T'"),
}


def make_finger(design: LinkageDesign, spring: SpringParams | None = None,
                lengths=PHALANX_LENGTHS) -> FingerParams:
    return FingerParams(
        phalanx_lengths=tuple(lengths), pad_width=PAD_WIDTH, design=design,
        spring=spring or SpringParams(),
        mechanism=build_finger_mechanism(design, lengths),
        labels=dict(NODE_LABELS))


# The shipped reference transmission geometry, found with the linkage
# optimizer and audited over the full (PIP, DIP) operating grid: dof=2,
# >=90 deg travel on both joints, every monitored transmission angle
# inside [35, 145] deg with >5 deg of margin, actuator demand < 150 deg.
REFERENCE_DESIGN = LinkageDesign(
    crank_pivot=(22.25, -22.95),
    base_pivot=(25.0, -19.75),
    crank_len=16.1,
    coupler_len=15.8,
    base_rocker_len=17.85,
    coupler_point=(32.45, -22.3),
    crank_angle_open_deg=80.65,
    crank_dir=+1,
    distal_drive_point=(-3.85, -15.5),
    fourbar_elbow=-1,
    drive_elbow=+1,
    stroke_deg=160.0,
)


def reference_finger() -> FingerParams:
    """The repo's reference finger: standard phalanx dimensions plus the
    optimizer-produced transmission geometry."""
    return make_finger(REFERENCE_DESIGN)


# ---------------------------------------------------------------------------
# Actuation bookkeeping


def crank_angle(params: FingerParams, actuator_deg: float) -> float:
    """Crank orientation (rad) for a user-facing actuator angle (deg >= 0)."""
    d = params.design
    return math.radians(d.crank_angle_open_deg + d.crank_dir * actuator_deg)


def actuator_angle(params: FingerParams, crank_rad: float) -> float:
    d = params.design
    rel = geo.wrap_pi(crank_rad - math.radians(d.crank_angle_open_deg))
    return d.crank_dir * math.degrees(rel)


def solve_config(params: FingerParams, drivers: dict[str, float],
                 warm: mc.MechanismState | None = None) -> mc.MechanismState:
    return mc.solve_position(params.mechanism, drivers, warm_start=warm)


def state_config(params: FingerParams, state: mc.MechanismState) -> FingerConfig:
    pip = state.orientation("intermediate")
    dip = state.orientation("distal") - pip
    act = actuator_angle(params, state.orientation("crank_ef"))
    return FingerConfig(act, math.degrees(pip), math.degrees(dip))


def free_motion(params: FingerParams, actuator_deg: float,
                warm: mc.MechanismState | None = None) -> FingerConfig:
    """Configuration with the DIP spring at its energy minimum (rest angle)."""
    if not 0.0 <= actuator_deg <= params.stroke_deg:
        raise DomainError(
            f"actuator {actuator_deg} deg outside stroke [0, {params.stroke_deg}]")
    state = solve_config(params, {
        "actuator": crank_angle(params, actuator_deg),
        "dip": math.radians(params.spring.rest_angle_deg)}, warm)
    return state_config(params, state)


def closing_path(params: FingerParams, step_deg: float = 0.5,
                 monitored=MONITORED_PAIRS):
    """Free closing trajectory: the proximal joint flexes first with the
    distal spring at rest; once its 90 degree travel is spent the
    actuator keeps driving and the distal joint takes over until its
    own stop.

    Returns a list of (FingerConfig, transmission angles) sampled every
    step_deg of actuator travel.
    """
    if step_deg <= 0:
        raise DomainError("step must be positive")
    mech = params.mechanism
    pairs = list(monitored)
    rest = math.radians(params.spring.rest_angle_deg)
    rows = []
    state = None
    pip_frozen = None
    pip0 = None
    dip0 = None
    # continuation needs fine steps even when the report stride is coarse
    substeps = max(1, math.ceil(step_deg / 0.5))
    march = step_deg / substeps
    k = 0
    act = 0.0
    while act <= params.stroke_deg + 1e-9:
        crank = crank_angle(params, act)
        if pip_frozen is None:
            try:
                state = mc.solve_position(
                    mech, {"actuator": crank, "dip": rest}, warm_start=state)
            except (AssemblyError, mc.ConvergenceError):
                if state is None:
                    raise
                pip_frozen = state.orientation("intermediate")
            else:
                cfg = state_config(params, state)
                if pip0 is None:
                    pip0 = cfg.theta_pip_deg
                if cfg.theta_pip_deg - pip0 >= 90.0:
                    pip_frozen = state.orientation("intermediate")
        if pip_frozen is not None:
            try:
                state = mc.solve_position(
                    mech, {"actuator": crank, "pip": pip_frozen},
                    warm_start=state)
            except (AssemblyError, mc.ConvergenceError):
                break       # distal travel exhausted before full stroke
        cfg = state_config(params, state)
        if pip_frozen is not None:
            if dip0 is None:
                dip0 = cfg.theta_dip_deg
            if cfg.theta_dip_deg - dip0 > 90.0 + 1e-9:
                # land the final sample exactly on the distal hard stop
                state = mc.solve_position(
                    mech, {"pip": pip_frozen,
                           "dip": math.radians(dip0 + 90.0)},
                    warm_start=state)
                cfg = state_config(params, state)
                rows.append((cfg, mc.transmission_angles(mech, state, pairs)))
                break
        if k % substeps == 0:
            rows.append((cfg, mc.transmission_angles(mech, state, pairs)))
        k += 1
        act = k * march
    return rows


# ---------------------------------------------------------------------------
# Forward kinematics (pads only; pure serial chain)


def forward_kinematics(params: FingerParams, config: FingerConfig) -> FingerPose:
    ld, li, lp = params.phalanx_lengths
    pip = math.radians(config.theta_pip_deg)
    dip = math.radians(config.theta_dip_deg)
    if not (-1e-9 <= config.theta_pip_deg <= 90 + 1e-9) or \
       not (-1e-9 <= config.theta_dip_deg <= 90 + 1e-9):
        raise DomainError("configuration outside the [0, 90] deg operating range")
    O = geo.vec(0, 0)
    A = geo.vec(lp, 0)
    B = A + li * geo.vec(math.cos(pip), math.sin(pip))
    T = B + ld * geo.vec(math.cos(pip + dip), math.sin(pip + dip))
    return FingerPose(
        pads={"proximal": (O, A), "intermediate": (A, B), "distal": (B, T)},
        frames={"proximal": (O, 0.0), "intermediate": (A, pip),
                "distal": (B, pip + dip)})


# ---------------------------------------------------------------------------
# Contact helpers


def _object_segment_distance(obj: GraspObject, a: np.ndarray, b: np.ndarray) -> float:
    """Signed distance (negative = penetration) from object boundary to segment."""
    if isinstance(obj, Circle):
        c = geo.vec(*obj.center)
        return geo.point_segment_distance(c, a, b) - obj.radius
    pts = np.array(obj.vertices)
    n = len(pts)
    if geo.segments_intersect(a, b, pts[0], pts[1]):
        return -1.0
    best = math.inf
    inside_a = geo.point_in_polygon(a, pts)
    if inside_a:
        return -1.0
    for i in range(n):
        best = min(best, geo.segment_segment_distance(a, b, pts[i], pts[(i + 1) % n]))
    return best


def pad_distances(params: FingerParams, config: FingerConfig,
                  obj: GraspObject) -> dict[str, float]:
    pose = forward_kinematics(params, config)
    return {name: _object_segment_distance(obj, seg[0], seg[1])
            for name, seg in pose.pads.items()}


# ---------------------------------------------------------------------------
# Quasi-static grasping


def simulate_grasp(params: FingerParams, obj: GraspObject, torque_limit: float,
                   step_deg: float = 0.25,
                   start_actuator_deg: float = 0.0) -> GraspTrace:
    """Torque-limited quasi-static closing with kinematic-stop adaptation.

    The actuator advances by `step_deg`.  While the moving pads are clear
    of the object the finger follows free motion (DIP spring relaxed).
    Contact on the intermediate pad stops the PIP joint; from there
    actuation deflects the DIP spring until the distal pad contacts, a
    joint limit is hit, or the required torque reaches the limit.  Contact
    on the proximal pad is recorded (the object may rest on it from the
    start) but does not constrain motion: that pad is the ground link.
    Distal contact before intermediate contact ends the closing as a
    fingertip pinch.
    """
    if step_deg <= 0:
        raise DomainError("step must be positive")
    spring = params.spring
    rest = spring.rest_angle_deg

    state = solve_config(params, {
        "actuator": crank_angle(params, start_actuator_deg),
        "dip": math.radians(rest)})
    config = state_config(params, state)
    d0 = pad_distances(params, config, obj)
    if min(d0.values()) < -PENETRATION_TOL:
        raise DomainError("object penetrates the finger at the start config")

    steps = [config]
    contacts: list[ContactEvent] = []
    flags = {"proximal": False, "intermediate": False, "distal": False}
    torque = 0.0
    torque_limited = False
    pip_stopped = False
    act = start_actuator_deg
    k = 0

    def note_contacts(cfg):
        d = pad_distances(params, cfg, obj)
        loaded = flags["intermediate"] or flags["distal"] \
            or d["intermediate"] <= CONTACT_TOL or d["distal"] <= CONTACT_TOL
        # the proximal pad is ground: it bears force (and counts as a
        # contact) only once a moving pad presses the object against it
        if not flags["proximal"] and loaded and d["proximal"] <= CONTACT_TOL:
            flags["proximal"] = True
            contacts.append(ContactEvent(k, "proximal", cfg.actuator_deg))
        for pad in ("intermediate", "distal"):
            if not flags[pad] and d[pad] <= CONTACT_TOL:
                flags[pad] = True
                contacts.append(ContactEvent(k, pad, cfg.actuator_deg))
        return d

    note_contacts(config)
    pip_stopped = flags["intermediate"]

    while act + step_deg <= params.stroke_deg + 1e-9 and not flags["distal"]:
        k += 1
        act += step_deg
        if not pip_stopped:
            try:
                nxt = solve_config(params, {
                    "actuator": crank_angle(params, act),
                    "dip": math.radians(rest)}, warm=state)
            except AssemblyError:
                break
            cfg = state_config(params, nxt)
            if cfg.theta_pip_deg > 90.0 + 1e-6:
                break
            # do not step into penetration: bisect the advance on contact
            d = pad_distances(params, cfg, obj)
            if min(d.values()) < -PENETRATION_TOL:
                lo, hi = act - step_deg, act
                for _ in range(40):
                    mid = 0.5 * (lo + hi)
                    ns = solve_config(params, {
                        "actuator": crank_angle(params, mid),
                        "dip": math.radians(rest)}, warm=state)
                    cm = state_config(params, ns)
                    if min(pad_distances(params, cm, obj).values()) < 0.0:
                        hi = mid
                    else:
                        lo = mid
                        nxt, cfg = ns, cm
                act = lo
            state, config = nxt, cfg
            note_contacts(config)
            if flags["intermediate"]:
                pip_stopped = True
        else:
            pip0 = config.theta_pip_deg
            dip = config.theta_dip_deg + step_deg
            if dip > 90.0 + 1e-9:
                break
            try:
                nxt = solve_config(params, {
                    "pip": math.radians(pip0),
                    "dip": math.radians(dip)}, warm=state)
            except AssemblyError:
                break
            cfg = state_config(params, nxt)
            if cfg.actuator_deg > params.stroke_deg + 1e-9:
                break
            d = pad_distances(params, cfg, obj)
            if d["distal"] < 0.0:
                lo, hi = config.theta_dip_deg, dip
                for _ in range(40):
                    mid = 0.5 * (lo + hi)
                    ns = solve_config(params, {
                        "pip": math.radians(pip0),
                        "dip": math.radians(mid)}, warm=state)
                    cm = state_config(params, ns)
                    if pad_distances(params, cm, obj)["distal"] < 0.0:
                        hi = mid
                    else:
                        lo = mid
                        nxt, cfg = ns, cm
            state, config = nxt, cfg
            act = config.actuator_deg
            torque = _required_torque(params, state, config)
            if torque >= torque_limit:
                torque_limited = True
                note_contacts(config)
                break
            note_contacts(config)
            if flags["distal"]:
                break
        steps.append(config)

    if steps[-1] != config:
        steps.append(config)
    return GraspTrace(
        steps=tuple(steps), contacts=tuple(contacts), final=config,
        contact_flags=flags, applied_torque=torque,
        torque_limited=torque_limited, reached=any(flags.values()))


def _required_torque(params: FingerParams, state: mc.MechanismState,
                     config: FingerConfig) -> float:
    """Actuator torque balancing the DIP spring via the linkage Jacobian."""
    defl = math.radians(config.theta_dip_deg - params.spring.rest_angle_deg)
    tau_spring = params.spring.stiffness * defl
    der = mc.kinematic_derivatives(params.mechanism, state,
                                  {"actuator": 1.0, "pip": 0.0})
    ddip_dact = (der.angular_velocity["distal"]
                 - der.angular_velocity["intermediate"])
    return abs(tau_spring * ddip_dact)


# ---------------------------------------------------------------------------
# Width estimation


def estimate_width(params: FingerParams, config: FingerConfig) -> float:
    """Diameter of the largest circle tangent to the proximal and distal pad
    lines whose disk stays inside the aperture (it may touch, but not cross,
    the intermediate pad)."""
    pose = forward_kinematics(params, config)
    O, A = pose.pads["proximal"]
    B, T = pose.pads["distal"]
    d_prox = geo.unit(A - O)
    d_dist = geo.unit(T - B)
    if abs(geo.cross2(d_prox, d_dist)) < 1e-6:
        raise GeometryError("pad lines are parallel: degenerate aperture")
    P = geo.line_intersection(O, d_prox, B, d_dist)
    # centers equidistant from both pad lines lie on the wedge bisector
    # through P; the aperture side is the left of O->A and the left of B->T
    n_prox = geo.vec(-d_prox[1], d_prox[0])
    n_dist = geo.vec(-d_dist[1], d_dist[0])
    bisector = None
    for s1 in (+1, -1):
        for s2 in (+1, -1):
            b = s1 * d_prox + s2 * d_dist
            if geo.norm(b) < 1e-9:
                continue
            b = geo.unit(b)
            if np.dot(b, n_prox) > 1e-9 and np.dot(b, n_dist) > 1e-9:
                bisector = b
    if bisector is None:
        raise GeometryError("no inscribed circle fits the aperture")
    sin_a = abs(geo.cross2(bisector, d_prox))
    # center(s) = P + s * bisector, radius = s * sin_a; the estimate is the
    # member of that family that just touches the intermediate pad segment
    # A-B from the aperture side (the side where the palm origin O lies)
    ab = geo.unit(B - A)
    side = 1.0 if geo.cross2(ab, O - A) >= 0.0 else -1.0

    def gap(s):
        c = P + s * bisector
        sgn = side * (1.0 if geo.cross2(ab, c - A) >= 0.0 else -1.0)
        return sgn * geo.point_segment_distance(c, A, B) - s * sin_a

    s_max = 2.0 * sum(params.phalanx_lengths) / sin_a
    samples = np.linspace(0.0, s_max, 1024)
    gaps = [gap(s) for s in samples]
    lo = hi = None
    for i in range(1, len(samples)):
        if gaps[i - 1] < 0.0 <= gaps[i]:
            lo, hi = samples[i - 1], samples[i]
    if lo is None:
        raise GeometryError("no inscribed circle fits the aperture")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 2.0 * hi * sin_a


# ---------------------------------------------------------------------------
# Scenario helper


def seated_circle(params: FingerParams, diameter: float, seat_x: float = 20.0,
                  clearance: float = 0.01) -> tuple[Circle, float]:
    """Place a circle resting on the proximal pad, inboard of the PIP joint
    so the closing finger wraps around it.  Returns (object, start_actuator_deg)."""
    r = diameter / 2.0
    lp = params.phalanx_lengths[2]
    if not 0.0 <= seat_x <= lp:
        raise DomainError("seat position must lie on the proximal pad")
    obj = Circle(center=(seat_x, r + clearance), radius=r)
    # the intermediate pad first touches the circle at this PIP angle
    wrap_deg = math.degrees(2.0 * math.atan2(lp - seat_x, r))
    if wrap_deg > 90.0:
        raise DomainError(
            f"diameter {diameter} mm seated at x={seat_x} exceeds the PIP range")
    cfg = free_motion(params, 0.0)
    if min(pad_distances(params, cfg, obj).values()) < -PENETRATION_TOL:
        raise DomainError(f"diameter {diameter} mm does not fit the open aperture")
    return obj, 0.0
