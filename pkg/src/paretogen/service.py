"""HTTP service for interactive preference exploration over frozen runs.

Serves a directory of snapshots read-only: list them, inspect the ranked
dataset ("the front"), and sample preference-conditioned designs with
classifier scores.  Designs from snapshots of registered built-in benchmarks
can be evaluated server-side on request; everything else returns scores only.

Model parameters are never mutated by requests.  Each sample request draws
from a fresh generator seeded by (session seed, request counter), so separate
service processes never correlate and repeated requests explore fresh draws.
"""

from __future__ import annotations

import logging
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .benchmarks import list_benchmarks, make_benchmark
from .pareto import pareto_rank
from .preferences import make_preference
from .snapshot import load_snapshot, normalize_preference
from .validation import SnapshotFormatError

log = logging.getLogger("paretogen.service")


class SampleRequest(BaseModel):
    u_star: list[float] | None = None
    y_star: list[float] | None = None
    n: int = Field(ge=1, le=1024)
    evaluate: bool = False


def _scan_snapshots(snapshot_dir) -> dict:
    snapshots = {}
    for path in sorted(Path(snapshot_dir).glob("*.json")):
        try:
            snapshots[path.stem] = load_snapshot(path)
        except (SnapshotFormatError, OSError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
    return snapshots


def create_app(snapshot_dir, session_seed: int = 0) -> FastAPI:
    """Build the service over every loadable snapshot in a directory."""
    snapshots = _scan_snapshots(snapshot_dir)
    history = {sid: [] for sid in snapshots}
    counter = {"next": 0}
    lock = threading.Lock()

    app = FastAPI(title="paretogen explorer service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.snapshots = snapshots

    def get_snap(sid: str):
        if sid not in snapshots:
            raise HTTPException(status_code=404,
                                detail=f"unknown snapshot id {sid!r}")
        return snapshots[sid]

    @app.get("/snapshots")
    def list_snaps():
        return [
            {
                "id": sid,
                "benchmark": (snap.benchmark or {}).get("name"),
                "n_objectives": snap.n_objectives,
                "domain": snap.domain.descriptor(),
                "rounds": snap.run_config.get("rounds"),
            }
            for sid, snap in sorted(snapshots.items())
        ]

    @app.get("/snapshots/{sid}/front")
    def front(sid: str):
        snap = get_snap(sid)
        ranks = pareto_rank(snap.Y)
        points = [
            {
                "x": snap.domain.to_jsonable(x),
                "y": [float(v) for v in y],
                "rank": int(rank),
            }
            for x, y, rank in zip(snap.X, snap.Y, ranks)
        ]
        return {
            "points": points,
            "reference_point": [float(v) for v in snap.reference_point],
            "preference_dist_summary": snap.preference_summary,
        }

    @app.post("/snapshots/{sid}/sample")
    def sample(sid: str, req: SampleRequest):
        snap = get_snap(sid)
        if (req.u_star is None) == (req.y_star is None):
            raise HTTPException(
                status_code=422,
                detail="provide exactly one of u_star or y_star")
        try:
            if req.y_star is not None:
                u = make_preference(np.asarray(req.y_star, dtype=float),
                                    snap.reference_point)
            else:
                u = normalize_preference(req.u_star)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        with lock:
            request_index = counter["next"]
            counter["next"] += 1
        rng = np.random.default_rng((session_seed, request_index))
        out = snap.sample_designs(u, req.n, rng)
        if req.evaluate:
            _maybe_evaluate(snap, out["designs"])
        with lock:
            history[sid].append({
                "u_used": out["u_used"],
                "n": req.n,
                "evaluate": req.evaluate,
                "designs": out["designs"],
            })
        return out

    @app.get("/snapshots/{sid}/history")
    def get_history(sid: str):
        get_snap(sid)
        with lock:
            return list(history[sid])

    return app


def _maybe_evaluate(snap, designs) -> None:
    """Attach true objectives when the snapshot's benchmark is built in."""
    name = (snap.benchmark or {}).get("name")
    if name not in list_benchmarks() or not designs:
        return
    bench = make_benchmark(name, **(snap.benchmark.get("params") or {}))
    X = np.stack([snap.domain.from_jsonable(d["x"]) for d in designs])
    Y = bench.evaluate(X)
    for d, y in zip(designs, Y):
        d["y"] = [float(v) for v in y]
