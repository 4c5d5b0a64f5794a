"""On-disk formats: state checkpoints and profile-set directories.

A checkpoint is one field-snapshot file per state variable plus a small JSON
manifest (time, scheme, parameters, grid, file map).  A profile directory
holds per-order snapshot sequences and a manifest binding them to the sample
times.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import SchemaError
from .fields import ScalarField, VectorField
from .grid import Grid
from .hierarchy import ProfileSet, Track
from .params import PhysParams
from .snapshot import read_snapshot, write_snapshot
from .state import FluidState

CHECKPOINT_MANIFEST = "manifest.json"
SCHEMA_VERSION = 1


def _params_dict(params: PhysParams):
    return {
        "eps": params.eps,
        "hbar": params.hbar,
        "mu": params.mu,
        "lam": params.lam,
        "kappa": params.kappa,
        "order": params.order,
    }


def write_checkpoint(out_dir, state: FluidState, params: PhysParams, scheme="rk4_explicit"):
    """Persist a state as snapshot files plus a manifest; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    g = state.grid
    files = {"n": "n.fld", "T": "T.fld", "phi": "phi.fld"}
    write_snapshot(os.path.join(out_dir, files["n"]), state.n)
    write_snapshot(os.path.join(out_dir, files["T"]), state.T)
    write_snapshot(os.path.join(out_dir, files["phi"]), state.phi)
    files["u"] = []
    for a, comp in enumerate(state.u):
        name = f"u{a}.fld"
        write_snapshot(os.path.join(out_dir, name), comp)
        files["u"].append(name)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "t": state.t,
        "scheme": scheme,
        "params": _params_dict(params),
        "grid": {"dim": g.dim, "points": g.n, "length": g.length},
        "fields": files,
    }
    path = os.path.join(out_dir, CHECKPOINT_MANIFEST)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_checkpoint(in_dir):
    """Load a checkpoint; returns (FluidState, PhysParams, scheme)."""
    path = os.path.join(in_dir, CHECKPOINT_MANIFEST)
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"no checkpoint manifest at {path}") from None
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported checkpoint schema {manifest.get('schema_version')}")
    files = manifest["fields"]
    n = read_snapshot(os.path.join(in_dir, files["n"]))
    T = read_snapshot(os.path.join(in_dir, files["T"]))
    phi = read_snapshot(os.path.join(in_dir, files["phi"]))
    u = VectorField(tuple(read_snapshot(os.path.join(in_dir, f)) for f in files["u"]))
    params = PhysParams(**manifest["params"])
    state = FluidState(manifest["t"], n, u, T, phi, params.eps)
    return state, params, manifest["scheme"]


# ---------------------------------------------------------------------------
# profile directories
# ---------------------------------------------------------------------------

def save_profiles(out_dir, pset: ProfileSet):
    """Write each order's sample sequence as snapshot files plus a manifest."""
    os.makedirs(out_dir, exist_ok=True)
    g = pset.grid
    orders = []
    for k, track in enumerate(pset.tracks):
        odir = os.path.join(out_dir, f"order_{k}")
        os.makedirs(odir, exist_ok=True)
        keys = {}
        for key, arr in track.data.items():
            is_vec = arr.ndim == g.dim + 2
            keys[key] = "vector" if is_vec else "scalar"
            for idx in range(arr.shape[0]):
                if is_vec:
                    for a in range(g.dim):
                        write_snapshot(
                            os.path.join(odir, f"{key}{a}_{idx:04d}.fld"),
                            ScalarField.from_values(g, arr[idx, a]),
                        )
                else:
                    write_snapshot(
                        os.path.join(odir, f"{key}_{idx:04d}.fld"),
                        ScalarField.from_values(g, arr[idx]),
                    )
        orders.append({"order": k, "keys": keys})
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "grid": {"dim": g.dim, "points": g.n, "length": g.length},
        "params": _params_dict(pset.params),
        "times": [float(t) for t in pset.times],
        "orders": orders,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_profiles(in_dir) -> ProfileSet:
    path = os.path.join(in_dir, "manifest.json")
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"no profile manifest at {path}") from None
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported profile schema {manifest.get('schema_version')}")
    gspec = manifest["grid"]
    grid = Grid(gspec["dim"], gspec["points"], gspec["length"])
    times = np.array(manifest["times"])
    params = PhysParams(**manifest["params"])

    tracks = []
    for entry in manifest["orders"]:
        k = entry["order"]
        odir = os.path.join(in_dir, f"order_{k}")
        data = {}
        for key, kind in entry["keys"].items():
            samples = []
            for idx in range(len(times)):
                if kind == "vector":
                    comps = [
                        read_snapshot(os.path.join(odir, f"{key}{a}_{idx:04d}.fld")).values
                        for a in range(grid.dim)
                    ]
                    samples.append(np.stack(comps))
                else:
                    samples.append(
                        read_snapshot(os.path.join(odir, f"{key}_{idx:04d}.fld")).values
                    )
            data[key] = np.stack(samples)
        tracks.append(Track(grid, times, data, order=k))
    return ProfileSet(tracks, params, grid)
