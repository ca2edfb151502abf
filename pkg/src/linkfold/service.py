"""HTTP facade for the browser studio.

Stateless queries (solve, trace, coverage, render) answer immediately;
anything heavier runs as a polled Job on a bounded worker pool.  Every
response carries the session revision it was computed against, and
query endpoints are pure functions of that revision.
"""
from __future__ import annotations

import threading
import traceback
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from . import design as dg
from . import finger as fg
from . import optics as op
from . import perception as pc
from . import workbench as wb
from .errors import (AssemblyError, ConvergenceError, DomainError,
                     LinkfoldError, SingularityError, ValidationError,
                     VisibilityError)

JOB_CONCURRENCY = 2

_INFEASIBLE = (AssemblyError, ConvergenceError, SingularityError,
               VisibilityError, DomainError)


class JobCancelled(Exception):
    pass


@dataclass
class Session:
    id: str
    project: wb.Project
    revision: int = 1
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class Job:
    id: str
    kind: str
    session_id: str
    revision: int
    state: str = "queued"            # queued | running | done | failed
    progress: float = 0.0
    result: dict | None = None
    error: str | None = None
    cancel: threading.Event = field(default_factory=threading.Event)


class PatchScene(BaseModel):
    revision: int
    camera_offset: tuple[float, float] | None = None
    camera_boresight_deg: float | None = None
    fov_deg: float | None = None
    pixels: int | None = None
    mirrors: list[dict] | None = None


class GraspRequest(BaseModel):
    diameter: float
    torque_limit: float = 500.0
    step_deg: float = 0.25


class OptimizeRequest(BaseModel):
    budget: int = 60
    seed: int = 0


class CalibrateRequest(BaseModel):
    step_deg: float = 15.0
    height: int = 360


class SessionRequest(BaseModel):
    project: dict | None = None


def _config_payload(config: fg.FingerConfig) -> dict:
    return {"actuator_deg": config.actuator_deg,
            "theta_pip_deg": config.theta_pip_deg,
            "theta_dip_deg": config.theta_dip_deg}


def create_app(default_project: wb.Project | None = None) -> FastAPI:
    app = FastAPI(title="linkfold studio service")
    sessions: dict[str, Session] = {}
    jobs: dict[str, Job] = {}
    registry_lock = threading.Lock()
    pool = ThreadPoolExecutor(max_workers=JOB_CONCURRENCY)

    def _session(sid: str) -> Session:
        with registry_lock:
            s = sessions.get(sid)
        if s is None:
            raise HTTPException(404, f"unknown session {sid!r}")
        return s

    def _job(jid: str) -> Job:
        with registry_lock:
            j = jobs.get(jid)
        if j is None:
            raise HTTPException(404, f"unknown job {jid!r}")
        return j

    def _config(session: Session, pip: float, dip: float) -> fg.FingerConfig:
        return fg.FingerConfig(0.0, pip, dip)

    def _wrap(fn):
        try:
            return fn()
        except (ValidationError,) as e:
            raise HTTPException(400, str(e))
        except _INFEASIBLE as e:
            raise HTTPException(422, str(e))
        except LinkfoldError as e:
            raise HTTPException(400, str(e))

    def _submit(kind: str, session: Session, runner) -> dict:
        job = Job(id=uuid.uuid4().hex[:12], kind=kind,
                  session_id=session.id, revision=session.revision)
        with registry_lock:
            jobs[job.id] = job

        def run():
            job.state = "running"
            try:
                result = runner(job)
                job.result = result
                job.progress = 1.0
                job.state = "done"
            except JobCancelled:
                job.state = "failed"
                job.error = "cancelled"
            except Exception as e:       # worker panic must not kill the app
                job.state = "failed"
                job.error = f"{type(e).__name__}: {e}"
                traceback.print_exc()

        pool.submit(run)
        return {"job_id": job.id, "state": job.state,
                "revision": session.revision}

    # ------------------------------------------------------------------
    # Sessions

    @app.post("/sessions")
    def create_session(body: SessionRequest):
        def go():
            if body.project is not None:
                project = wb.project_from_dict(body.project)
            elif default_project is not None:
                project = default_project
            else:
                raise ValidationError("no project supplied and no default")
            session = Session(id=uuid.uuid4().hex[:12], project=project)
            with registry_lock:
                sessions[session.id] = session
            return {"session_id": session.id, "revision": session.revision}
        return _wrap(go)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        s = _session(sid)
        return {"session_id": s.id, "revision": s.revision,
                "project": wb.project_to_dict(s.project)}

    @app.patch("/sessions/{sid}/scene")
    def patch_scene(sid: str, body: PatchScene):
        s = _session(sid)

        def go():
            with s.lock:
                if body.revision != s.revision:
                    raise HTTPException(
                        409, f"stale revision {body.revision}, "
                             f"session is at {s.revision}")
                t = s.project.template
                kw = {}
                if body.camera_offset is not None:
                    kw["camera_offset"] = tuple(body.camera_offset)
                if body.camera_boresight_deg is not None:
                    kw["camera_boresight_deg"] = body.camera_boresight_deg
                if body.fov_deg is not None:
                    kw["fov_deg"] = body.fov_deg
                if body.pixels is not None:
                    kw["pixels"] = body.pixels
                if body.mirrors is not None:
                    kw["mirrors"] = tuple(
                        op.MountedMirror(
                            phalanx=m["phalanx"],
                            p0=tuple(m["p0"]), p1=tuple(m["p1"]),
                            flipped=bool(m.get("flipped", False)))
                        for m in body.mirrors)
                template = replace(t, **kw)
                s.project = wb.Project(
                    finger=s.project.finger, template=template,
                    linkage_space=s.project.linkage_space,
                    optics_space=s.project.optics_space)
                s.revision += 1
                return {"session_id": s.id, "revision": s.revision}
        return _wrap(go)

    # ------------------------------------------------------------------
    # Queries

    @app.get("/solve")
    def solve(session: str, actuator: float):
        s = _session(session)

        def go():
            config = fg.free_motion(s.project.finger, actuator)
            pose = fg.forward_kinematics(s.project.finger, config)
            return {
                "revision": s.revision,
                "config": _config_payload(config),
                "frames": {k: {"origin": list(map(float, o)),
                               "angle_rad": float(a)}
                           for k, (o, a) in pose.frames.items()},
                "pads": {k: [list(map(float, p)) for p in seg]
                         for k, seg in pose.pads.items()},
            }
        return _wrap(go)

    @app.get("/trace")
    def trace(session: str, pip: float, dip: float, step: int = 40):
        s = _session(session)

        def go():
            if step < 1:
                raise ValidationError("step must be >= 1")
            scene = op.build_scene(s.project.finger, s.project.template,
                                   _config(s, pip, dip))
            rays = []
            for k in range(0, scene.camera.pixels, step):
                r = op.trace_ray(scene, k)
                rays.append({
                    "pixel": k,
                    "vertices": [list(map(float, v)) for v in r.vertices],
                    "terminal": r.terminal,
                    "pad": r.pad_id,
                    "bounces": r.bounces,
                })
            return {"revision": s.revision, "rays": rays,
                    "camera": list(map(float, scene.camera.position)),
                    "mirrors": [[list(map(float, m.p0)),
                                 list(map(float, m.p1))]
                                for m in scene.mirrors]}
        return _wrap(go)

    @app.get("/coverage")
    def coverage(session: str, pip: float, dip: float):
        s = _session(session)

        def go():
            scene = op.build_scene(s.project.finger, s.project.template,
                                   _config(s, pip, dip))
            rep = op.visibility(scene)
            return {"revision": s.revision,
                    "fractions": dict(rep.fractions),
                    "intervals": {k: [list(i) for i in v]
                                  for k, v in rep.intervals.items()}}
        return _wrap(go)

    @app.get("/render")
    def render(session: str, pip: float, dip: float, height: int = 360):
        s = _session(session)

        def go():
            img = pc.synth_render(s.project.finger, _config(s, pip, dip),
                                  template=s.project.template, height=height)
            return Response(content=wb.write_pgm(img),
                            media_type="image/x-portable-graymap",
                            headers={"X-Revision": str(s.revision)})
        return _wrap(go)

    # ------------------------------------------------------------------
    # Jobs

    @app.post("/grasp")
    def grasp(session: str, body: GraspRequest):
        s = _session(session)
        project = s.project

        def runner(job: Job):
            if job.cancel.is_set():
                raise JobCancelled()
            obj, start = fg.seated_circle(project.finger, body.diameter)
            trace_ = fg.simulate_grasp(
                project.finger, obj, torque_limit=body.torque_limit,
                step_deg=body.step_deg, start_actuator_deg=start)
            return {
                "steps": [_config_payload(c) for c in trace_.steps],
                "contacts": [{"step": ev.step, "pad": ev.pad,
                              "actuator_deg": ev.actuator_deg}
                             for ev in trace_.contacts],
                "final": _config_payload(trace_.final),
                "contact_flags": dict(trace_.contact_flags),
                "applied_torque": trace_.applied_torque,
                "torque_limited": trace_.torque_limited,
                "reached": trace_.reached,
            }
        return _wrap(lambda: _submit("grasp", s, runner))

    def _progress_hook(job: Job):
        def hook(done, total):
            if job.cancel.is_set():
                raise JobCancelled()
            job.progress = max(job.progress, done / total)
        return hook

    @app.post("/optimize/linkage")
    def optimize_linkage(session: str, body: OptimizeRequest):
        s = _session(session)
        space = s.project.linkage_space or dg.default_linkage_space()

        def runner(job: Job):
            result = dg.optimize_linkage(space, budget=body.budget,
                                         seed=body.seed,
                                         progress=_progress_hook(job))
            return wb.design_result_to_dict(result)
        return _wrap(lambda: _submit("optimize-linkage", s, runner))

    @app.post("/optimize/optics")
    def optimize_optics(session: str, body: OptimizeRequest):
        s = _session(session)
        project = s.project
        space = project.optics_space or dg.default_optics_space()

        def runner(job: Job):
            result = dg.optimize_optics(space, project.finger,
                                        budget=body.budget, seed=body.seed,
                                        progress=_progress_hook(job))
            return wb.design_result_to_dict(result)
        return _wrap(lambda: _submit("optimize-optics", s, runner))

    @app.post("/calibrate")
    def calibrate(session: str, body: CalibrateRequest):
        s = _session(session)
        project = s.project

        def runner(job: Job):
            if body.step_deg <= 0:
                raise ValidationError("step must be positive")
            import numpy as np
            values = tuple(np.arange(0.0, 90.0 + 1e-9, body.step_deg))
            table = pc.build_calibration(
                project.finger, values, values, template=project.template,
                height=body.height, progress=_progress_hook(job))
            return wb.table_to_dict(table)
        return _wrap(lambda: _submit("calibrate", s, runner))

    @app.get("/jobs/{jid}")
    def get_job(jid: str):
        j = _job(jid)
        out = {"job_id": j.id, "kind": j.kind, "state": j.state,
               "progress": j.progress, "revision": j.revision}
        if j.result is not None:
            out["result"] = j.result
        if j.error is not None:
            out["error"] = j.error
        return out

    @app.post("/jobs/{jid}/cancel")
    def cancel_job(jid: str):
        j = _job(jid)
        j.cancel.set()
        return {"job_id": j.id, "state": j.state, "cancelling": True}

    return app


def main(argv=None) -> int:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="linkfold-studio")
    parser.add_argument("--port", type=int, default=8400)
    parser.add_argument("--project", default=None,
                        help="project file loaded as the default session "
                             "payload")
    args = parser.parse_args(argv)
    project = None
    if args.project is not None:
        with open(args.project, "r", encoding="utf-8") as f:
            project = wb.project_from_dict(wb.loads(f.read()))
    else:
        project = wb.reference_project()
    uvicorn.run(create_app(project), host="127.0.0.1", port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
