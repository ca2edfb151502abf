"""File schemas and figure emission: JSON, CSV, PGM, and SVG artifacts.

All schemas carry a `format` version field.  Floats are serialized with
12 significant digits; angles in files are always degrees.  Writers are
deterministic: identical inputs produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources
from dataclasses import asdict, dataclass, field

import numpy as np

from . import design as dg
from . import finger as fg
from . import optics as op
from . import perception as pc
from .errors import SchemaError, ValidationError, VersionError

FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# JSON plumbing


def _round12(obj):
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, (np.floating,)):
        return float(format(float(obj), ".12g"))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_round12(v) for v in obj.tolist()]
    return obj


def dumps(payload: dict) -> str:
    return json.dumps(_round12(payload), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}")
    if not isinstance(data, dict):
        raise SchemaError("top level must be an object")
    return data


def _field(data, path: str, typ, optional=False):
    """Fetch a nested field, raising a diagnostic naming the field path."""
    cur = data
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if optional:
                return None
            raise SchemaError(f"missing field {path!r}", path=path)
        cur = cur[part]
    if typ is float and isinstance(cur, int):
        cur = float(cur)
    if not isinstance(cur, typ):
        raise SchemaError(
            f"field {path!r}: expected {typ.__name__}, got "
            f"{type(cur).__name__}", path=path)
    return cur


def _check_version(data, kind: str):
    v = _field(data, "format", int)
    if v != FORMAT_VERSION:
        raise VersionError(f"unsupported {kind} format version {v}",
                           path="format")


def _pair(data, path):
    v = _field(data, path, list)
    if len(v) != 2 or not all(isinstance(x, (int, float)) for x in v):
        raise SchemaError(f"field {path!r}: expected [x, y]", path=path)
    return (float(v[0]), float(v[1]))


# ---------------------------------------------------------------------------
# Finger / mechanism schema


def finger_to_dict(params: fg.FingerParams) -> dict:
    d = params.design
    return {
        "format": FORMAT_VERSION,
        "kind": "finger",
        "phalanx_lengths": list(params.phalanx_lengths),
        "pad_width": params.pad_width,
        "spring": {"stiffness": params.spring.stiffness,
                   "rest_angle_deg": params.spring.rest_angle_deg},
        "design": {
            "crank_pivot": list(d.crank_pivot),
            "base_pivot": list(d.base_pivot),
            "crank_len": d.crank_len,
            "coupler_len": d.coupler_len,
            "base_rocker_len": d.base_rocker_len,
            "coupler_point": list(d.coupler_point),
            "crank_angle_open_deg": d.crank_angle_open_deg,
            "crank_dir": d.crank_dir,
            "distal_drive_point": list(d.distal_drive_point),
            "fourbar_elbow": d.fourbar_elbow,
            "drive_elbow": d.drive_elbow,
            "stroke_deg": d.stroke_deg,
        },
    }


def finger_from_dict(data: dict) -> fg.FingerParams:
    _check_version(data, "finger")
    design = fg.LinkageDesign(
        crank_pivot=_pair(data, "design.crank_pivot"),
        base_pivot=_pair(data, "design.base_pivot"),
        crank_len=_field(data, "design.crank_len", float),
        coupler_len=_field(data, "design.coupler_len", float),
        base_rocker_len=_field(data, "design.base_rocker_len", float),
        coupler_point=_pair(data, "design.coupler_point"),
        crank_angle_open_deg=_field(data, "design.crank_angle_open_deg", float),
        crank_dir=_field(data, "design.crank_dir", int),
        distal_drive_point=_pair(data, "design.distal_drive_point"),
        fourbar_elbow=_field(data, "design.fourbar_elbow", int),
        drive_elbow=_field(data, "design.drive_elbow", int),
        stroke_deg=_field(data, "design.stroke_deg", float),
    )
    spring = fg.SpringParams(
        stiffness=_field(data, "spring.stiffness", float),
        rest_angle_deg=_field(data, "spring.rest_angle_deg", float))
    lengths = _field(data, "phalanx_lengths", list)
    if len(lengths) != 3:
        raise SchemaError("field 'phalanx_lengths': expected 3 entries",
                          path="phalanx_lengths")
    return fg.make_finger(design, spring=spring,
                          lengths=tuple(float(x) for x in lengths))


# ---------------------------------------------------------------------------
# Scene template schema


def template_to_dict(template: op.SceneTemplate) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "scene_template",
        "camera": {
            "offset": list(template.camera_offset),
            "boresight_deg": template.camera_boresight_deg,
            "fov_deg": template.fov_deg,
            "pixels": template.pixels,
        },
        "mirrors": [
            {"phalanx": m.phalanx, "p0": list(m.p0), "p1": list(m.p1),
             "flipped": m.flipped}
            for m in template.mirrors
        ],
        "occluders": [
            {"phalanx": phal, "p0": list(p0), "p1": list(p1)}
            for phal, p0, p1 in template.occluders
        ],
    }


def template_from_dict(data: dict) -> op.SceneTemplate:
    _check_version(data, "scene template")
    mirrors = []
    for i, m in enumerate(_field(data, "mirrors", list)):
        if not isinstance(m, dict):
            raise SchemaError(f"field 'mirrors[{i}]': expected object",
                              path=f"mirrors[{i}]")
        mirrors.append(op.MountedMirror(
            phalanx=_field(m, "phalanx", str),
            p0=_pair(m, "p0"), p1=_pair(m, "p1"),
            flipped=bool(m.get("flipped", False))))
    occluders = []
    for i, o in enumerate(data.get("occluders", [])):
        occluders.append((_field(o, "phalanx", str),
                          _pair(o, "p0"), _pair(o, "p1")))
    return op.SceneTemplate(
        camera_offset=_pair(data, "camera.offset"),
        camera_boresight_deg=_field(data, "camera.boresight_deg", float),
        mirrors=tuple(mirrors), occluders=tuple(occluders),
        fov_deg=_field(data, "camera.fov_deg", float),
        pixels=_field(data, "camera.pixels", int))


# ---------------------------------------------------------------------------
# Design spaces and results


def linkage_space_to_dict(space: dg.LinkageDesignSpace) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "linkage_design_space",
        "base": finger_to_dict(fg.make_finger(space.base))["design"],
        "length_bounds": {k: list(v) for k, v in space.length_bounds.items()},
        "rom_targets_deg": list(space.rom_targets_deg),
        "transmission_window_deg": list(space.transmission_window_deg),
    }


def linkage_space_from_dict(data: dict) -> dg.LinkageDesignSpace:
    _check_version(data, "design space")
    shell = {"format": FORMAT_VERSION, "design": _field(data, "base", dict),
             "spring": {"stiffness": 50.0, "rest_angle_deg": 0.0},
             "phalanx_lengths": [32.0, 23.0, 35.0], "pad_width": 24.0}
    base = finger_from_dict(shell).design
    bounds = {k: (float(v[0]), float(v[1]))
              for k, v in _field(data, "length_bounds", dict).items()}
    return dg.LinkageDesignSpace(
        base=base, length_bounds=bounds,
        rom_targets_deg=_pair(data, "rom_targets_deg"),
        transmission_window_deg=_pair(data, "transmission_window_deg"))


def optics_space_to_dict(space: dg.OpticsDesignSpace) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "optics_design_space",
        "camera_x": list(space.camera_x),
        "camera_y": list(space.camera_y),
        "boresight_deg": list(space.boresight_deg),
        "coverage_target": space.coverage_target,
        "fov_deg": space.fov_deg,
        "pixels": space.pixels,
        "mirrors": [
            {"phalanx": s.phalanx, "center_x": list(s.center_x),
             "center_y": list(s.center_y), "length": list(s.length),
             "tilt_deg": list(s.tilt_deg)}
            for s in space.mirrors
        ],
    }


def optics_space_from_dict(data: dict) -> dg.OpticsDesignSpace:
    _check_version(data, "design space")
    slots = []
    for m in _field(data, "mirrors", list):
        slots.append(dg.MirrorSlot(
            phalanx=_field(m, "phalanx", str),
            center_x=_pair(m, "center_x"), center_y=_pair(m, "center_y"),
            length=_pair(m, "length"), tilt_deg=_pair(m, "tilt_deg")))
    return dg.OpticsDesignSpace(
        camera_x=_pair(data, "camera_x"), camera_y=_pair(data, "camera_y"),
        boresight_deg=_pair(data, "boresight_deg"), mirrors=tuple(slots),
        coverage_target=_field(data, "coverage_target", float),
        fov_deg=_field(data, "fov_deg", float),
        pixels=_field(data, "pixels", int))


def design_result_to_dict(result: dg.DesignResult) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "design_result",
        "parameters": dict(result.parameters),
        "objective": result.objective,
        "margins": dict(result.margins),
        "evaluations": result.evaluations,
        "feasible": result.feasible,
        "exhausted": result.exhausted,
    }


def design_result_from_dict(data: dict) -> dg.DesignResult:
    _check_version(data, "design result")
    return dg.DesignResult(
        parameters={k: float(v)
                    for k, v in _field(data, "parameters", dict).items()},
        objective=_field(data, "objective", float),
        margins={k: float(v)
                 for k, v in _field(data, "margins", dict).items()},
        evaluations=_field(data, "evaluations", int),
        feasible=_field(data, "feasible", bool),
        exhausted=_field(data, "exhausted", bool))


# ---------------------------------------------------------------------------
# Calibration table schema


def table_to_dict(table: pc.CalibrationTable) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "calibration_table",
        "pip_values": list(table.pip_values),
        "dip_values": list(table.dip_values),
        "vectors": [[list(v) for v in row] for row in table.vectors],
        "failures": [list(f) for f in table.failures],
    }


def table_from_dict(data: dict) -> pc.CalibrationTable:
    _check_version(data, "calibration table")
    vectors = np.asarray(_field(data, "vectors", list), float)
    if vectors.ndim != 3:
        raise SchemaError("field 'vectors': expected a 3-d array",
                          path="vectors")
    return pc.CalibrationTable(
        pip_values=tuple(float(x) for x in _field(data, "pip_values", list)),
        dip_values=tuple(float(x) for x in _field(data, "dip_values", list)),
        vectors=vectors,
        failures=tuple((float(a), float(b))
                       for a, b in data.get("failures", [])))


# ---------------------------------------------------------------------------
# Project file


@dataclass(frozen=True)
class Project:
    finger: fg.FingerParams
    template: op.SceneTemplate
    linkage_space: dg.LinkageDesignSpace | None = None
    optics_space: dg.OpticsDesignSpace | None = None


def project_to_dict(project: Project) -> dict:
    out = {
        "format": FORMAT_VERSION,
        "kind": "project",
        "finger": finger_to_dict(project.finger),
        "scene_template": template_to_dict(project.template),
    }
    if project.linkage_space is not None:
        out["linkage_space"] = linkage_space_to_dict(project.linkage_space)
    if project.optics_space is not None:
        out["optics_space"] = optics_space_to_dict(project.optics_space)
    return out


def project_from_dict(data: dict) -> Project:
    _check_version(data, "project")
    ls = data.get("linkage_space")
    os_ = data.get("optics_space")
    return Project(
        finger=finger_from_dict(_field(data, "finger", dict)),
        template=template_from_dict(_field(data, "scene_template", dict)),
        linkage_space=linkage_space_from_dict(ls) if ls else None,
        optics_space=optics_space_from_dict(os_) if os_ else None)


def reference_project() -> Project:
    """The bundled reference finger with its tuned optics scene."""
    blob = resources.files(__package__).joinpath(
        "data/reference_project.json").read_text("utf-8")
    return project_from_dict(loads(blob))


# ---------------------------------------------------------------------------
# Raster I/O: binary portable graymap


def write_pgm(img: pc.RasterImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.data.tobytes()


def read_pgm(blob: bytes) -> pc.RasterImage:
    if not blob.startswith(b"P5"):
        raise SchemaError("not a binary graymap (missing P5 magic)")
    # header: magic, width, height, maxval, single whitespace, then data
    fields = []
    i = 2
    while len(fields) < 3:
        while i < len(blob) and blob[i:i + 1].isspace():
            i += 1
        if blob[i:i + 1] == b"#":
            while i < len(blob) and blob[i:i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < len(blob) and not blob[j:j + 1].isspace():
            j += 1
        fields.append(blob[i:j])
        i = j
    i += 1
    try:
        w, h, maxval = (int(f) for f in fields)
    except ValueError:
        raise SchemaError("malformed graymap header")
    if maxval != 255:
        raise SchemaError(f"unsupported graymap maxval {maxval}")
    data = np.frombuffer(blob[i:i + w * h], dtype=np.uint8)
    if data.size != w * h:
        raise SchemaError("truncated graymap pixel data")
    return pc.RasterImage(data.reshape(h, w).copy())


# ---------------------------------------------------------------------------
# CSV traces


SWEEP_COLUMNS = ("actuator_deg", "theta_pip_deg", "theta_dip_deg",
                 "transmission_j_c_deg", "transmission_j_d_deg",
                 "transmission_j_e_deg", "transmission_j_gp_deg")

GRASP_COLUMNS = ("step", "actuator_deg", "theta_pip_deg", "theta_dip_deg",
                 "contact_proximal", "contact_intermediate", "contact_distal")


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format(v, ".12g") if isinstance(v, float) else v
                    for v in row])
    return buf.getvalue()


def sweep_csv(rows) -> str:
    """Rows: (actuator, pip, dip, four transmission angles), degrees."""
    return _csv(rows, SWEEP_COLUMNS)


def grasp_csv(trace: fg.GraspTrace) -> str:
    contact_steps = {}
    for ev in trace.contacts:
        contact_steps[ev.pad] = ev.step
    rows = []
    for k, cfg in enumerate(trace.steps):
        rows.append((
            k, cfg.actuator_deg, cfg.theta_pip_deg, cfg.theta_dip_deg,
            int(contact_steps.get("proximal", 1 << 30) <= k),
            int(contact_steps.get("intermediate", 1 << 30) <= k),
            int(contact_steps.get("distal", 1 << 30) <= k)))
    return _csv(rows, GRASP_COLUMNS)


# ---------------------------------------------------------------------------
# SVG figures


_PAD_COLORS = {"proximal": "#2ca02c",       # green
               "intermediate": "#1f77b4",   # blue
               "distal": "#d62728"}         # red
_RAY_COLORS = {"pad": "#ffb000", "occluded": "#888888", "escaped": "#cccccc"}


def _svg_header(xmin, ymin, w, h):
    # y axis flipped so +y in the model points up on screen
    return (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{xmin:.1f} {ymin:.1f} {w:.1f} {h:.1f}">\n'
            f'<g transform="scale(1,-1)">\n')


def _fmt_pt(p):
    return f"{float(p[0]):.4f},{float(p[1]):.4f}"


def emit_svg(params: fg.FingerParams, config: fg.FingerConfig,
             scene: op.OpticsScene | None = None,
             rays: tuple[op.RayPath, ...] = ()) -> str:
    """Schematic of a finger pose, optionally with a traced scene.

    Deterministic output: fixed element order, fixed float formatting.
    Pads are colored by phalanx; rays by their terminal kind.
    """
    pose = fg.forward_kinematics(params, config)
    pts = [p for seg in pose.pads.values() for p in seg]
    if scene is not None:
        for m in scene.mirrors:
            pts += [m.p0, m.p1]
        pts.append(scene.camera.position)
    xs = [float(p[0]) for p in pts]
    ys = [float(-p[1]) for p in pts]
    pad_ = 12.0
    xmin, xmax = min(xs) - pad_, max(xs) + pad_
    ymin, ymax = min(ys) - pad_, max(ys) + pad_
    out = [_svg_header(xmin, ymin, xmax - xmin, ymax - ymin)]
    for ray in rays:
        pts_attr = " ".join(_fmt_pt(v) for v in ray.vertices)
        color = _RAY_COLORS[ray.terminal]
        out.append(f'<polyline points="{pts_attr}" fill="none" '
                   f'stroke="{color}" stroke-width="0.3"/>\n')
    if scene is not None:
        for m in scene.mirrors:
            out.append(f'<line x1="{float(m.p0[0]):.4f}" '
                       f'y1="{float(m.p0[1]):.4f}" '
                       f'x2="{float(m.p1[0]):.4f}" '
                       f'y2="{float(m.p1[1]):.4f}" '
                       f'stroke="#555555" stroke-width="1.2"/>\n')
        for p0, p1 in scene.occluders:
            out.append(f'<line x1="{float(p0[0]):.4f}" '
                       f'y1="{float(p0[1]):.4f}" '
                       f'x2="{float(p1[0]):.4f}" y2="{float(p1[1]):.4f}" '
                       f'stroke="#000000" stroke-width="1.2" '
                       f'stroke-dasharray="2,1"/>\n')
        c = scene.camera.position
        out.append(f'<circle cx="{float(c[0]):.4f}" cy="{float(c[1]):.4f}" '
                   f'r="1.5" fill="#9467bd"/>\n')
    for name in ("proximal", "intermediate", "distal"):
        p0, p1 = pose.pads[name]
        out.append(f'<line x1="{float(p0[0]):.4f}" y1="{float(p0[1]):.4f}" '
                   f'x2="{float(p1[0]):.4f}" y2="{float(p1[1]):.4f}" '
                   f'stroke="{_PAD_COLORS[name]}" stroke-width="2"/>\n')
    out.append("</g>\n</svg>\n")
    return "".join(out)
