"""End-to-end workflow: volumes -> cubes -> SDT -> diagrams -> PIs -> NMF.

Each stage reads and writes plain files in the output directory, so any
stage can be rerun on its own from the previous stage's outputs and the
result is byte-identical to a full run.  The run manifest records every
parameter, seed and output path needed to reproduce a run.

Stage files:
    samples.csv                 sample registry (id, labels, origin, pores)
    sdt/sample_<id>.i32         signed distance transforms (raw int32)
    diagrams/sample_<id>.csv    persistence diagrams
    grids.yaml                  shared per-dimension PI grids and offsets
    pis.csv                     concatenated PI vectors, one row per sample
    coefficients.csv            NMF coefficients
    basis.csv                   NMF basis rows (concatenated feature dists)
    manifest.yaml               run manifest
"""

import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from voxtopo import cubical, distance, factorize, images, volumes


class PipelineError(Exception):
    """A stage failure, tagged with the stage and offending sample."""


_VOLUME_KEYS = {
    "path",
    "shape",
    "value_kind",
    "threshold",
    "specimen_label",
    "stage_label",
}
_PI_KEYS = {"sigma", "C", "p", "bins_per_axis"}
_NMF_KEYS = {"components", "seed", "max_iter", "rel_tol"}
_TOP_KEYS = {
    "volumes",
    "cube_edge",
    "pore_threshold",
    "pi",
    "nmf",
    "output_dir",
    "normalize_blocks",
}


@dataclass
class VolumeEntry:
    path: str
    meta: volumes.VolumeMeta
    stage_label: str = ""


@dataclass
class RunConfig:
    """Everything a run needs; parsed from a single YAML file."""

    volume_entries: list
    cube_edge: int = 150
    pore_threshold: float = 0.4
    pi_params: dict = field(default_factory=dict)  # dim -> PIParams
    components: int = 3
    seed: int = 0
    max_iter: int = 500
    rel_tol: float = 1e-6
    output_dir: str = "out"
    normalize_blocks: bool = False

    @staticmethod
    def from_yaml(path):
        with open(path) as fh:
            doc = yaml.safe_load(fh)
        base = os.path.dirname(os.path.abspath(path))
        _reject_unknown(doc, _TOP_KEYS, "config")
        entries = []
        for v in doc["volumes"]:
            _reject_unknown(v, _VOLUME_KEYS, "volume entry")
            meta = volumes.VolumeMeta(
                shape=tuple(v["shape"]),
                value_kind=v.get("value_kind", "unsigned-8-bit"),
                threshold=v.get("threshold"),
                specimen_label=v.get("specimen_label", ""),
            )
            vpath = v["path"]
            if not os.path.isabs(vpath):
                vpath = os.path.join(base, vpath)
            entries.append(
                VolumeEntry(path=vpath, meta=meta, stage_label=v.get("stage_label", ""))
            )
        pi_doc = doc.get("pi", {}) or {}
        if set(pi_doc) <= _PI_KEYS:
            shared = images.PIParams(**pi_doc)
            pi_params = {0: shared, 1: shared, 2: shared}
        elif set(pi_doc) <= {"dim0", "dim1", "dim2"}:
            pi_params = {}
            for k in (0, 1, 2):
                sub = pi_doc.get(f"dim{k}", {}) or {}
                _reject_unknown(sub, _PI_KEYS, f"pi.dim{k}")
                pi_params[k] = images.PIParams(**sub)
        else:
            raise PipelineError(f"unknown keys in pi section: {sorted(set(pi_doc) - _PI_KEYS)}")
        nmf_doc = doc.get("nmf", {}) or {}
        _reject_unknown(nmf_doc, _NMF_KEYS, "nmf")
        return RunConfig(
            volume_entries=entries,
            cube_edge=int(doc.get("cube_edge", 150)),
            pore_threshold=float(doc.get("pore_threshold", 0.4)),
            pi_params=pi_params,
            components=int(nmf_doc.get("components", 3)),
            seed=int(nmf_doc.get("seed", 0)),
            max_iter=int(nmf_doc.get("max_iter", 500)),
            rel_tol=float(nmf_doc.get("rel_tol", 1e-6)),
            output_dir=doc.get("output_dir", "out"),
            normalize_blocks=bool(doc.get("normalize_blocks", False)),
        )


def _reject_unknown(doc, allowed, where):
    unknown = set(doc) - allowed
    if unknown:
        raise PipelineError(f"unknown keys in {where}: {sorted(unknown)}")


def _fmt(v):
    return repr(float(v))


# ---------------------------------------------------------------------------
# stage: sdt (load, partition, filter, transform)


def stage_sdt(config, out_dir):
    os.makedirs(os.path.join(out_dir, "sdt"), exist_ok=True)
    kept = []
    next_id = 0
    for entry in config.volume_entries:
        try:
            mask = volumes.load_volume(entry.path, entry.meta)
        except Exception as exc:
            raise PipelineError(f"stage sdt, volume {entry.path}: {exc}") from exc
        cubes = volumes.partition_cubes(
            mask,
            config.cube_edge,
            specimen_label=entry.meta.specimen_label,
            stage_label=entry.stage_label,
            id_start=next_id,
        )
        next_id += len(cubes)
        kept.extend(volumes.filter_cubes(cubes, config.pore_threshold))
    rows = ["sample_id,specimen_label,stage_label,ox,oy,oz,edge,pore_fraction"]
    for cube in kept:
        try:
            sdt = distance.signed_manhattan_sdt(cube.mask)
        except Exception as exc:
            raise PipelineError(f"stage sdt, sample {cube.id}: {exc}") from exc
        distance.save_sdt(os.path.join(out_dir, "sdt", f"sample_{cube.id}.i32"), sdt)
        rows.append(
            f"{cube.id},{cube.specimen_label},{cube.stage_label},"
            f"{cube.origin[0]},{cube.origin[1]},{cube.origin[2]},"
            f"{cube.edge},{_fmt(cube.pore_fraction)}"
        )
    with open(os.path.join(out_dir, "samples.csv"), "w") as fh:
        fh.write("\n".join(rows) + "\n")
    return [c.id for c in kept]


def read_samples(out_dir):
    """Sample registry rows as dicts, in file order."""
    path = os.path.join(out_dir, "samples.csv")
    out = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            out.append(dict(zip(header, parts)))
    return out


# ---------------------------------------------------------------------------
# stage: pd


def stage_pd(config, out_dir):
    os.makedirs(os.path.join(out_dir, "diagrams"), exist_ok=True)
    for row in read_samples(out_dir):
        sid = int(row["sample_id"])
        edge = int(row["edge"])
        sdt = distance.load_sdt(
            os.path.join(out_dir, "sdt", f"sample_{sid}.i32"), (edge, edge, edge)
        )
        try:
            fc = cubical.build_filtration(sdt)
            pd = cubical.compute_persistence(fc, sample_id=sid)
        except Exception as exc:
            raise PipelineError(f"stage pd, sample {sid}: {exc}") from exc
        cubical.write_diagram_csv(
            os.path.join(out_dir, "diagrams", f"sample_{sid}.csv"), pd
        )


def read_diagrams(out_dir):
    out = []
    for row in read_samples(out_dir):
        sid = int(row["sample_id"])
        out.append(
            cubical.read_diagram_csv(
                os.path.join(out_dir, "diagrams", f"sample_{sid}.csv"), sample_id=sid
            )
        )
    return out


# ---------------------------------------------------------------------------
# stage: pi


def stage_pi(config, out_dir):
    diagrams = read_diagrams(out_dir)
    grids = {}
    for k in (0, 1, 2):
        try:
            grids[k] = images.fit_grid(diagrams, k, config.pi_params[k])
        except images.VectorizeError as exc:
            raise PipelineError(f"stage pi, dimension {k}: {exc}") from exc
    offsets = (
        0,
        config.pi_params[0].bins_per_axis ** 2,
        config.pi_params[0].bins_per_axis ** 2 + config.pi_params[1].bins_per_axis ** 2,
    )
    rows = []
    for pd in diagrams:
        blocks = []
        for k in (0, 1, 2):
            pi = images.persistence_image(pd, k, grids[k], config.pi_params[k])
            if config.normalize_blocks:
                s = pi.sum()
                if s > 0:
                    pi = pi / s
            blocks.append(pi)
        cv = images.concatenate(*blocks, sample_id=pd.sample_id)
        rows.append((pd.sample_id, cv.values))
    with open(os.path.join(out_dir, "pis.csv"), "w") as fh:
        for sid, vals in rows:
            fh.write(",".join([str(sid)] + [_fmt(v) for v in vals]) + "\n")
    grid_doc = {
        "offsets": list(offsets),
        "dims": {
            k: {
                "x_min": float(g.x_min),
                "x_max": float(g.x_max),
                "y_min": float(g.y_min),
                "y_max": float(g.y_max),
                "bins_per_axis": g.bins_per_axis,
            }
            for k, g in grids.items()
        },
    }
    with open(os.path.join(out_dir, "grids.yaml"), "w") as fh:
        yaml.safe_dump(grid_doc, fh, sort_keys=True)
    return grids, offsets


def read_grids(out_dir):
    with open(os.path.join(out_dir, "grids.yaml")) as fh:
        doc = yaml.safe_load(fh)
    grids = {
        int(k): images.Grid(
            x_min=g["x_min"],
            x_max=g["x_max"],
            y_min=g["y_min"],
            y_max=g["y_max"],
            bins_per_axis=g["bins_per_axis"],
        )
        for k, g in doc["dims"].items()
    }
    return grids, tuple(doc["offsets"])


def read_pis(out_dir):
    ids = []
    rows = []
    with open(os.path.join(out_dir, "pis.csv")) as fh:
        for line in fh:
            parts = line.rstrip("\n").split(",")
            ids.append(int(parts[0]))
            rows.append([float(v) for v in parts[1:]])
    return ids, np.array(rows)


# ---------------------------------------------------------------------------
# stage: nmf


def stage_nmf(config, out_dir):
    ids, V = read_pis(out_dir)
    try:
        model = factorize.nmf(
            V,
            config.components,
            seed=config.seed,
            max_iter=config.max_iter,
            rel_tol=config.rel_tol,
        )
    except factorize.FactorizeError as exc:
        raise PipelineError(f"stage nmf: {exc}") from exc
    specimen = {int(r["sample_id"]): r["specimen_label"] for r in read_samples(out_dir)}
    with open(os.path.join(out_dir, "coefficients.csv"), "w") as fh:
        header = ["sample_id", "specimen_label"] + [
            f"lambda_{m}" for m in range(config.components)
        ]
        fh.write(",".join(header) + "\n")
        for n, sid in enumerate(ids):
            row = [str(sid), specimen.get(sid, "")] + [
                _fmt(v) for v in model.coefficients[n]
            ]
            fh.write(",".join(row) + "\n")
    with open(os.path.join(out_dir, "basis.csv"), "w") as fh:
        for row in model.basis:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return model


def read_coefficients(out_dir):
    ids, labels, rows = [], [], []
    with open(os.path.join(out_dir, "coefficients.csv")) as fh:
        fh.readline()
        for line in fh:
            parts = line.rstrip("\n").split(",")
            ids.append(int(parts[0]))
            labels.append(parts[1])
            rows.append([float(v) for v in parts[2:]])
    return ids, labels, np.array(rows)


def read_basis(out_dir):
    with open(os.path.join(out_dir, "basis.csv")) as fh:
        return np.array([[float(v) for v in line.rstrip("\n").split(",")] for line in fh])


# ---------------------------------------------------------------------------
# full run


def run_pipeline(config, out_dir=None):
    """Run every stage and write the manifest.  Returns the manifest dict."""
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    sample_ids = stage_sdt(config, out_dir)
    stage_pd(config, out_dir)
    grids, offsets = stage_pi(config, out_dir)
    model = stage_nmf(config, out_dir)
    manifest = {
        "config": {
            "cube_edge": config.cube_edge,
            "pore_threshold": config.pore_threshold,
            "normalize_blocks": config.normalize_blocks,
            "pi": {
                f"dim{k}": {
                    "sigma": p.sigma,
                    "C": p.C,
                    "p": p.p,
                    "bins_per_axis": p.bins_per_axis,
                }
                for k, p in config.pi_params.items()
            },
            "nmf": {
                "components": config.components,
                "seed": config.seed,
                "max_iter": config.max_iter,
                "rel_tol": config.rel_tol,
            },
            "volumes": [
                {
                    "path": e.path,
                    "shape": list(e.meta.shape),
                    "specimen_label": e.meta.specimen_label,
                    "stage_label": e.stage_label,
                }
                for e in config.volume_entries
            ],
        },
        "samples": len(sample_ids),
        "offsets": list(offsets),
        "grids": {
            f"dim{k}": {
                "x_min": float(g.x_min),
                "x_max": float(g.x_max),
                "y_min": float(g.y_min),
                "y_max": float(g.y_max),
                "bins_per_axis": g.bins_per_axis,
            }
            for k, g in grids.items()
        },
        "nmf_result": {
            "final_error": model.final_error,
            "iterations": model.iterations,
            "objective_trace_length": int(model.objective_trace.size),
            "seed": model.seed,
        },
        "essential_pairs": "excluded from vectorization, kept in diagram files",
        "outputs": {
            "samples": "samples.csv",
            "sdt": "sdt/",
            "diagrams": "diagrams/",
            "grids": "grids.yaml",
            "pis": "pis.csv",
            "coefficients": "coefficients.csv",
            "basis": "basis.csv",
        },
    }
    with open(os.path.join(out_dir, "manifest.yaml"), "w") as fh:
        yaml.safe_dump(manifest, fh, sort_keys=True)
    return manifest
