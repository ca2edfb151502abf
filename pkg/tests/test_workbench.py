"""Tests for file schemas, raster I/O, CSV traces, and SVG emission."""
import numpy as np
import pytest

from linkfold import design as dg, finger as fg
from linkfold import optics as op, perception as pc, workbench as wb
from linkfold.errors import SchemaError, VersionError


@pytest.fixture
def template():
    return op.SceneTemplate(
        camera_offset=(10.0, -8.0), camera_boresight_deg=95.0,
        mirrors=(op.MountedMirror("proximal", (20.0, -10.0), (30.0, -12.0)),
                 op.MountedMirror("distal", (2.0, -6.0), (9.0, -6.0),
                                  flipped=True)),
        occluders=(("intermediate", (1.0, -2.0), (5.0, -2.0)),))


# ---------------------------------------------------------------------------
# JSON round trips


def test_finger_roundtrip():
    params = fg.reference_finger()
    text = wb.dumps(wb.finger_to_dict(params))
    back = wb.finger_from_dict(wb.loads(text))
    assert wb.dumps(wb.finger_to_dict(back)) == text
    assert back.design == params.design
    assert back.spring == params.spring


def test_template_roundtrip(template):
    text = wb.dumps(wb.template_to_dict(template))
    assert wb.template_from_dict(wb.loads(text)) == template


def test_linkage_space_roundtrip():
    space = dg.default_linkage_space()
    text = wb.dumps(wb.linkage_space_to_dict(space))
    assert wb.linkage_space_from_dict(wb.loads(text)) == space


def test_optics_space_roundtrip():
    space = dg.OpticsDesignSpace(
        camera_x=(0.0, 12.0), camera_y=(-15.0, -4.0),
        boresight_deg=(70.0, 110.0),
        mirrors=(dg.MirrorSlot("proximal", (20.0, 50.0), (-25.0, -5.0),
                               (6.0, 25.0), (0.0, 180.0)),),
        coverage_target=0.9, pixels=480)
    text = wb.dumps(wb.optics_space_to_dict(space))
    assert wb.optics_space_from_dict(wb.loads(text)) == space


def test_design_result_roundtrip():
    result = dg.DesignResult(
        parameters={"crank_len": 16.25}, objective=5.5,
        margins={"rom_pip_deg": 90.5}, evaluations=42,
        feasible=True, exhausted=False)
    text = wb.dumps(wb.design_result_to_dict(result))
    assert wb.design_result_from_dict(wb.loads(text)) == result


def test_calibration_table_roundtrip():
    rng = np.random.default_rng(0)
    table = pc.CalibrationTable(
        pip_values=(0.0, 3.0), dip_values=(0.0, 3.0, 6.0),
        vectors=rng.random((2, 3, 24)), failures=((3.0, 6.0),))
    text = wb.dumps(wb.table_to_dict(table))
    back = wb.table_from_dict(wb.loads(text))
    assert back.pip_values == table.pip_values
    assert back.dip_values == table.dip_values
    assert back.failures == table.failures
    assert np.allclose(back.vectors, table.vectors, atol=1e-11)


def test_project_roundtrip(template):
    project = wb.Project(finger=fg.reference_finger(), template=template,
                         linkage_space=dg.default_linkage_space())
    text = wb.dumps(wb.project_to_dict(project))
    back = wb.project_from_dict(wb.loads(text))
    assert wb.dumps(wb.project_to_dict(back)) == text
    assert back.template == project.template
    assert back.linkage_space == project.linkage_space
    assert back.optics_space is None


# ---------------------------------------------------------------------------
# Schema diagnostics


def test_unsupported_version_rejected():
    data = wb.finger_to_dict(fg.reference_finger())
    data["format"] = 2
    with pytest.raises(VersionError):
        wb.finger_from_dict(data)


def test_missing_field_names_path():
    data = wb.finger_to_dict(fg.reference_finger())
    del data["design"]["crank_len"]
    with pytest.raises(SchemaError, match="design.crank_len"):
        wb.finger_from_dict(data)


def test_wrong_type_names_path():
    data = wb.finger_to_dict(fg.reference_finger())
    data["design"]["coupler_len"] = "long"
    with pytest.raises(SchemaError, match="design.coupler_len"):
        wb.finger_from_dict(data)


def test_loads_rejects_junk():
    with pytest.raises(SchemaError):
        wb.loads("{not json")
    with pytest.raises(SchemaError):
        wb.loads("[1, 2]")


def test_dumps_is_deterministic_and_rounded():
    payload = {"b": 1.0 / 3.0, "a": 2}
    text = wb.dumps(payload)
    assert text == wb.dumps({"a": 2, "b": 1.0 / 3.0})
    assert "0.333333333333" in text
    assert "0.3333333333333" not in text


# ---------------------------------------------------------------------------
# Raster graymap


def test_pgm_roundtrip():
    rng = np.random.default_rng(1)
    img = pc.RasterImage(rng.integers(0, 256, (17, 23), dtype=np.uint8))
    back = wb.read_pgm(wb.write_pgm(img))
    assert np.array_equal(back.data, img.data)


def test_pgm_reader_skips_comments():
    blob = b"P5\n# synthetic\n2 2\n255\n" + bytes([0, 1, 2, 3])
    img = wb.read_pgm(blob)
    assert img.data.shape == (2, 2)
    assert img.data[1, 1] == 3


def test_pgm_rejects_bad_input():
    with pytest.raises(SchemaError):
        wb.read_pgm(b"P2\n2 2\n255\n0 1 2 3")
    with pytest.raises(SchemaError):
        wb.read_pgm(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(SchemaError):
        wb.read_pgm(b"P5\n2 2\n65535\n" + bytes(8))


# ---------------------------------------------------------------------------
# CSV traces


def test_sweep_csv_shape():
    rows = [(0.0, 0.5, 0.0, 80.0, 85.0, 90.0, 95.0),
            (1.0, 1.5, 0.1, 80.1, 85.1, 90.1, 95.1)]
    text = wb.sweep_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(wb.SWEEP_COLUMNS)
    assert len(lines) == 3
    assert lines[1].startswith("0,0.5,0,80,")


def test_grasp_csv_contact_flags():
    params = fg.reference_finger()
    obj, start = fg.seated_circle(params, diameter=45.2)
    trace = fg.simulate_grasp(params, obj, torque_limit=500.0, step_deg=1.0,
                              start_actuator_deg=start)
    text = wb.grasp_csv(trace)
    lines = text.splitlines()
    assert lines[0] == ",".join(wb.GRASP_COLUMNS)
    assert len(lines) == len(trace.steps) + 1
    # contact flags latch on and never reset
    flags = [tuple(int(x) for x in ln.split(",")[4:7]) for ln in lines[1:]]
    for a, b in zip(flags, flags[1:]):
        assert all(y >= x for x, y in zip(a, b))
    assert flags[0] == (0, 0, 0)
    assert sum(flags[-1]) >= 2


# ---------------------------------------------------------------------------
# SVG figures


def test_svg_deterministic(template):
    params = fg.reference_finger()
    cfg = fg.FingerConfig(0.0, 30.0, 20.0)
    scene = op.build_scene(params, template, cfg)
    rays = tuple(op.trace_ray(scene, k) for k in range(0, 1440, 160))
    a = wb.emit_svg(params, cfg, scene=scene, rays=rays)
    b = wb.emit_svg(params, cfg, scene=scene, rays=rays)
    assert a == b
    assert a.startswith("<svg ")
    assert a.rstrip().endswith("</svg>")


def test_svg_contains_pads_and_mirrors(template):
    params = fg.reference_finger()
    cfg = fg.FingerConfig(0.0, 0.0, 0.0)
    scene = op.build_scene(params, template, cfg)
    svg = wb.emit_svg(params, cfg, scene=scene)
    for color in ("#2ca02c", "#1f77b4", "#d62728"):
        assert svg.count(color) == 1
    # two mirrors, one occluder, one camera marker
    assert svg.count('stroke="#555555"') == 2
    assert svg.count("stroke-dasharray") == 1
    assert svg.count("<circle") == 1


def test_svg_ray_vertices_match_trace(template):
    params = fg.reference_finger()
    cfg = fg.FingerConfig(0.0, 45.0, 45.0)
    scene = op.build_scene(params, template, cfg)
    ray = op.trace_ray(scene, 720)
    svg = wb.emit_svg(params, cfg, scene=scene, rays=(ray,))
    expected = " ".join(wb._fmt_pt(v) for v in ray.vertices)
    assert expected in svg
