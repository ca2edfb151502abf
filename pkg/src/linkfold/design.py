"""Automated search over transmission geometry and optics placement.

Two gradient-free optimizers share the same two-stage strategy: a
Latin-hypercube global sample over a bounded box, then coordinate
descent from the best feasible sample.  Feasibility boundaries are
nonsmooth (assembly failure, fov clipping), so no gradients are used.
Candidates are scored with a coarse sweep; the incumbent is re-verified
at full resolution before being reported, and every reported figure is
reproducible by re-running the matching evaluate_* on the returned
parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import qmc

from . import finger as fg
from . import mechanism as mc
from . import optics as op
from .errors import DomainError, ValidationError

TRANSMISSION_WINDOW_DEG = (35.0, 145.0)
LINKAGE_LENGTH_FIELDS = ("crank_len", "coupler_len", "base_rocker_len")


def _check_bounds(bounds: dict[str, tuple[float, float]], positive: bool):
    for name, (lo, hi) in bounds.items():
        if lo > hi:
            raise ValidationError(f"bound for {name!r} is inverted: {lo} > {hi}")
        if positive and lo <= 0.0:
            raise ValidationError(f"bound for {name!r} must be positive")


# ---------------------------------------------------------------------------
# Search spaces and results


@dataclass(frozen=True)
class LinkageDesignSpace:
    """Box of link lengths around a base design with fixed pivots."""
    base: fg.LinkageDesign
    length_bounds: dict[str, tuple[float, float]]
    rom_targets_deg: tuple[float, float] = (90.0, 90.0)
    transmission_window_deg: tuple[float, float] = TRANSMISSION_WINDOW_DEG

    def __post_init__(self):
        unknown = set(self.length_bounds) - set(LINKAGE_LENGTH_FIELDS)
        if unknown:
            raise ValidationError(f"unknown length fields: {sorted(unknown)}")
        if not self.length_bounds:
            raise ValidationError("empty design space")
        _check_bounds(self.length_bounds, positive=True)
        lo, hi = self.transmission_window_deg
        if not 0.0 < lo < hi < 180.0:
            raise ValidationError("transmission window must sit inside (0, 180)")


@dataclass(frozen=True)
class MirrorSlot:
    """Bounds for one mirror: center, length, and tilt in a phalanx frame.

    Tilt covers a full turn so the reflective face can point either way;
    endpoints are center +- (length/2) (cos tilt, sin tilt) and the
    reflective normal is the left normal of that direction.
    """
    phalanx: str
    center_x: tuple[float, float]
    center_y: tuple[float, float]
    length: tuple[float, float]
    tilt_deg: tuple[float, float]

    def __post_init__(self):
        if self.phalanx not in op.PAD_NAMES:
            raise ValidationError(f"unknown phalanx {self.phalanx!r}")
        _check_bounds({"center_x": self.center_x, "center_y": self.center_y,
                       "tilt_deg": self.tilt_deg}, positive=False)
        _check_bounds({"length": self.length}, positive=True)


@dataclass(frozen=True)
class OpticsDesignSpace:
    """Camera pose box on the intermediate phalanx plus mirror slots."""
    camera_x: tuple[float, float]
    camera_y: tuple[float, float]
    boresight_deg: tuple[float, float]
    mirrors: tuple[MirrorSlot, ...]
    coverage_target: float = 0.95
    fov_deg: float = 160.0
    pixels: int = 1440

    def __post_init__(self):
        _check_bounds({"camera_x": self.camera_x, "camera_y": self.camera_y,
                       "boresight_deg": self.boresight_deg}, positive=False)
        if not 0.0 < self.coverage_target <= 1.0:
            raise ValidationError("coverage target must be in (0, 1]")

    def parameter_bounds(self) -> dict[str, tuple[float, float]]:
        out = {"camera_x": self.camera_x, "camera_y": self.camera_y,
               "boresight_deg": self.boresight_deg}
        for i, slot in enumerate(self.mirrors):
            out[f"m{i}_x"] = slot.center_x
            out[f"m{i}_y"] = slot.center_y
            out[f"m{i}_len"] = slot.length
            out[f"m{i}_tilt"] = slot.tilt_deg
        return out


@dataclass(frozen=True)
class DesignResult:
    parameters: dict[str, float]
    objective: float
    margins: dict[str, float]
    evaluations: int
    feasible: bool
    exhausted: bool = False


# ---------------------------------------------------------------------------
# Linkage evaluation


@dataclass(frozen=True)
class LinkageAudit:
    feasible: bool
    rom_pip_deg: float
    rom_dip_deg: float
    margin_deg: float
    max_actuator_deg: float
    failure: str | None


def linkage_candidate(space: LinkageDesignSpace,
                      candidate: dict[str, float]) -> fg.LinkageDesign:
    if set(candidate) != set(space.length_bounds):
        raise DomainError("candidate fields do not match the design space")
    for name, v in candidate.items():
        lo, hi = space.length_bounds[name]
        if not lo <= v <= hi:
            raise DomainError(f"{name}={v} outside [{lo}, {hi}]")
    return replace(space.base, **candidate)


def evaluate_linkage(space: LinkageDesignSpace, candidate: dict[str, float],
                     act_step_deg: float = 0.5,
                     dip_step_deg: float = 0.5) -> LinkageAudit:
    """Audit one candidate: ROM of both joints and transmission margin.

    Phase one sweeps the actuator with the distal joint at rest until the
    proximal interphalangeal angle reaches its target; phase two freezes
    that angle at several anchors and sweeps the distal joint.  The
    margin is the distance of the worst monitored transmission angle
    from the window edges (negative when the window is violated).
    """
    design = linkage_candidate(space, candidate)
    lo, hi = space.transmission_window_deg
    pip_target, dip_target = space.rom_targets_deg
    try:
        params = fg.make_finger(design)
    except (ValidationError, DomainError) as e:
        return LinkageAudit(False, 0.0, 0.0, -math.inf, 0.0, f"build: {e}")
    mech = params.mechanism
    pairs = list(fg.MONITORED_PAIRS)

    def window_margin(state):
        angles = mc.transmission_angles(mech, state, pairs)
        return min(min(t - lo, hi - t) for t in angles)

    pips: list[float] = []
    acts: list[float] = []
    margin = math.inf
    state = None
    act = 0.0
    failure = None
    while act <= design.stroke_deg + 1e-9:
        try:
            state = mc.solve_position(
                mech, {"actuator": fg.crank_angle(params, act), "dip": 0.0},
                warm_start=state)
        except (mc.AssemblyError, mc.ConvergenceError) as e:
            failure = f"assembly at actuator {act:.1f} deg: {e}"
            break
        cfg = fg.state_config(params, state)
        pips.append(cfg.theta_pip_deg)
        acts.append(act)
        margin = min(margin, window_margin(state))
        # range achieved relative to the open pose, which need not be 0
        if cfg.theta_pip_deg - pips[0] >= pip_target:
            break
        act += act_step_deg
    rom_pip = max(pips) - min(pips) if pips else 0.0
    monotone = all(b >= a - 1e-6 for a, b in zip(pips, pips[1:]))
    if failure is None and rom_pip < pip_target:
        failure = f"proximal joint range {rom_pip:.1f} deg short of target"
    if failure is None and not monotone:
        failure = "proximal joint reverses along the stroke"
    if failure is not None:
        return LinkageAudit(False, rom_pip, 0.0,
                            margin if margin < math.inf else -math.inf,
                            acts[-1] if acts else 0.0, failure)

    max_act = acts[-1]
    rom_dip = math.inf
    for i in (0, len(pips) // 3, 2 * len(pips) // 3, len(pips) - 1):
        state = mc.solve_position(mech, {
            "actuator": fg.crank_angle(params, acts[i]), "dip": 0.0})
        pip0 = state.orientation("intermediate")
        reached = 0.0
        d = dip_step_deg
        while d <= dip_target + 1e-9:
            try:
                state = mc.solve_position(
                    mech, {"pip": pip0, "dip": math.radians(d)},
                    warm_start=state)
            except (mc.AssemblyError, mc.ConvergenceError) as e:
                failure = f"assembly in distal sweep at {d:.1f} deg: {e}"
                break
            cfg = fg.state_config(params, state)
            if not -1e-6 <= cfg.actuator_deg <= design.stroke_deg:
                failure = (f"actuator {cfg.actuator_deg:.1f} deg leaves the "
                           f"stroke during the distal sweep")
                break
            margin = min(margin, window_margin(state))
            max_act = max(max_act, cfg.actuator_deg)
            reached = d
            d += dip_step_deg
        rom_dip = min(rom_dip, reached)
        if failure is not None or reached < dip_target:
            failure = failure or (
                f"distal joint range {reached:.1f} deg short of target")
            return LinkageAudit(False, rom_pip, rom_dip, margin, max_act,
                                failure)
    feasible = margin > 0.0
    return LinkageAudit(feasible, rom_pip, rom_dip, margin, max_act,
                        None if feasible else "transmission window violated")


# ---------------------------------------------------------------------------
# Optics evaluation


def template_from_parameters(space: OpticsDesignSpace,
                             candidate: dict[str, float]) -> op.SceneTemplate:
    bounds = space.parameter_bounds()
    if set(candidate) != set(bounds):
        raise DomainError("candidate fields do not match the design space")
    for name, v in candidate.items():
        lo, hi = bounds[name]
        if not lo <= v <= hi:
            raise DomainError(f"{name}={v} outside [{lo}, {hi}]")
    mirrors = []
    for i, slot in enumerate(space.mirrors):
        c = np.array([candidate[f"m{i}_x"], candidate[f"m{i}_y"]])
        t = math.radians(candidate[f"m{i}_tilt"])
        h = 0.5 * candidate[f"m{i}_len"] * np.array([math.cos(t), math.sin(t)])
        mirrors.append(op.MountedMirror(slot.phalanx, tuple(c - h), tuple(c + h)))
    return op.SceneTemplate(
        camera_offset=(candidate["camera_x"], candidate["camera_y"]),
        camera_boresight_deg=candidate["boresight_deg"],
        mirrors=tuple(mirrors), fov_deg=space.fov_deg, pixels=space.pixels)


def evaluate_optics(params: fg.FingerParams, template: op.SceneTemplate,
                    grid_step_deg: float = 5.0,
                    pixels: int | None = None) -> op.CoverageReport:
    """Coverage of a template over the standard joint grid."""
    if pixels is not None:
        template = replace(template, pixels=pixels)
    return op.coverage_sweep(params, template, op.config_grid(grid_step_deg))


# ---------------------------------------------------------------------------
# Shared search driver


def _lhs_samples(bounds: dict[str, tuple[float, float]], n: int, seed: int):
    names = list(bounds)
    lo = np.array([bounds[k][0] for k in names])
    hi = np.array([bounds[k][1] for k in names])
    if n <= 0:
        return []
    unit = qmc.LatinHypercube(d=len(names), seed=seed).random(n)
    return [{k: float(v) for k, v in zip(names, lo + u * (hi - lo))}
            for u in unit]


def _coordinate_descent(best, score, bounds, budget_left, rel_step=0.10,
                        min_rel_step=0.005, tick=None):
    """Greedy per-axis refinement; returns (candidate, score, evals used).

    Never regresses: a move is kept only when it strictly improves the
    coarse objective.
    """
    names = list(bounds)
    spans = {k: bounds[k][1] - bounds[k][0] for k in names}
    cand, val = dict(best[0]), best[1]
    used = 0
    step = rel_step
    while step >= min_rel_step and used < budget_left:
        improved = False
        for k in names:
            if spans[k] == 0.0:
                continue
            for sign in (+1.0, -1.0):
                if used >= budget_left:
                    return cand, val, used
                x = cand[k] + sign * step * spans[k]
                x = min(bounds[k][1], max(bounds[k][0], x))
                if x == cand[k]:
                    continue
                trial = dict(cand)
                trial[k] = x
                v = score(trial)
                used += 1
                if tick is not None:
                    tick()
                if v > val:
                    cand, val = trial, v
                    improved = True
                    break
        if not improved:
            step /= 2.0
    return cand, val, used


def _search(bounds, center, coarse_score, fine_audit, budget, seed,
            n_global, progress=None):
    """LHS + coordinate descent; the incumbent is re-audited at full
    resolution and that audit is what the result reports.

    `progress`, when given, is called as progress(done, budget) after
    each evaluation; raising from it aborts the search."""
    if budget < 1:
        raise DomainError("budget must be at least 1")
    evals = 0
    done = [0]

    def tick():
        done[0] += 1
        if progress is not None:
            progress(done[0], budget)

    if budget == 1:
        audit, objective, feasible = fine_audit(center)
        tick()
        return DesignResult(dict(center), objective, audit, 1, feasible,
                            exhausted=not feasible)
    pool = [dict(center)] + _lhs_samples(bounds, min(n_global, budget - 2),
                                         seed)
    pool = pool[:budget - 1]
    best = None
    for cand in pool:
        v = coarse_score(cand)
        evals += 1
        tick()
        if best is None or v > best[1]:
            best = (cand, v)
    left = budget - 1 - evals
    if left > 0:
        cand, val, used = _coordinate_descent(best, coarse_score, bounds,
                                              left, tick=tick)
        evals += used
        if val > best[1]:
            best = (cand, val)
    audit, objective, feasible = fine_audit(best[0])
    evals += 1
    tick()
    return DesignResult(dict(best[0]), objective, audit, evals, feasible,
                        exhausted=not feasible)


# ---------------------------------------------------------------------------
# Optimizers


def default_linkage_space() -> LinkageDesignSpace:
    base = fg.REFERENCE_DESIGN
    bounds = {}
    for name in LINKAGE_LENGTH_FIELDS:
        v = getattr(base, name)
        bounds[name] = (round(v - 3.0, 9), round(v + 3.0, 9))
    return LinkageDesignSpace(base=base, length_bounds=bounds)


def default_optics_space() -> OpticsDesignSpace:
    """Camera and mirror boxes bracketing the reference scene layout."""
    prox = dict(center_x=(20.0, 55.0), center_y=(-30.0, -2.0),
                length=(6.0, 28.0), tilt_deg=(0.0, 180.0))
    inter = dict(center_x=(5.0, 80.0), center_y=(-45.0, -4.0),
                 length=(8.0, 40.0), tilt_deg=(0.0, 180.0))
    return OpticsDesignSpace(
        camera_x=(0.0, 20.0), camera_y=(-18.0, -4.0),
        boresight_deg=(55.0, 111.0),
        mirrors=(MirrorSlot("proximal", **prox),
                 MirrorSlot("proximal", **prox),
                 MirrorSlot("intermediate", **inter),
                 MirrorSlot("intermediate", **inter)))


def optimize_linkage(space: LinkageDesignSpace, budget: int,
                     seed: int, progress=None) -> DesignResult:
    """Maximize the transmission margin subject to the ROM targets."""
    def coarse_score(cand):
        a = evaluate_linkage(space, cand, act_step_deg=2.0, dip_step_deg=5.0)
        return a.margin_deg if a.feasible else a.margin_deg - 1000.0

    def fine_audit(cand):
        a = evaluate_linkage(space, cand)
        margins = {"transmission_margin_deg": a.margin_deg,
                   "rom_pip_deg": a.rom_pip_deg, "rom_dip_deg": a.rom_dip_deg,
                   "max_actuator_deg": a.max_actuator_deg}
        return margins, a.margin_deg, a.feasible

    center = {k: getattr(space.base, k) for k in space.length_bounds}
    center = {k: min(hi, max(lo, center[k]))
              for k, (lo, hi) in space.length_bounds.items()}
    return _search(space.length_bounds, center, coarse_score, fine_audit,
                   budget, seed, n_global=64, progress=progress)


def optimize_optics(space: OpticsDesignSpace, params: fg.FingerParams,
                    budget: int, seed: int, progress=None) -> DesignResult:
    """Maximize the worst per-pad visible fraction over the joint grid."""
    def coarse_score(cand):
        try:
            template = template_from_parameters(space, cand)
            rep = evaluate_optics(params, template, grid_step_deg=15.0,
                                  pixels=240)
        except (ValidationError, DomainError):
            return -1.0
        return rep.maximin

    def fine_audit(cand):
        try:
            template = template_from_parameters(space, cand)
            rep = evaluate_optics(params, template)
        except (ValidationError, DomainError):
            return {"maximin_fraction": -1.0}, -1.0, False
        margins = {"maximin_fraction": rep.maximin}
        for name in op.PAD_NAMES:
            margins[f"min_{name}"] = rep.min_fraction[name]
            margins[f"mean_{name}"] = rep.mean_fraction[name]
        return margins, rep.maximin, rep.maximin >= space.coverage_target

    bounds = space.parameter_bounds()
    center = {k: 0.5 * (lo + hi) for k, (lo, hi) in bounds.items()}
    return _search(bounds, center, coarse_score, fine_audit, budget, seed,
                   n_global=48, progress=progress)
