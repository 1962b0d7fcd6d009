"""Command line interface: per-stage subcommands plus the full pipeline."""

import itertools
import os
import sys

import click

from voxtopo import cubical, distance, images, origins, pipeline, plots


def _load(config_path, out, seed):
    config = pipeline.RunConfig.from_yaml(config_path)
    if out is not None:
        config.output_dir = out
    if seed is not None:
        config.seed = seed
    return config


def _common(f):
    f = click.option("--config", "config_path", required=True, type=click.Path(exists=True))(f)
    f = click.option("--out", default=None, type=click.Path())(f)
    f = click.option("--seed", default=None, type=int)(f)
    return f


@click.group()
def main():
    """Topological decomposition of 3D voxel microstructures."""


def _run_stage(name, fn):
    try:
        fn()
    except Exception as exc:
        click.echo(f"[{name}] error: {exc}", err=True)
        sys.exit(1)


@main.command()
@_common
def sdt(config_path, out, seed):
    """Partition volumes into cubes and write signed distance transforms."""
    config = _load(config_path, out, seed)
    os.makedirs(config.output_dir, exist_ok=True)
    _run_stage("sdt", lambda: pipeline.stage_sdt(config, config.output_dir))


@main.command()
@_common
def pd(config_path, out, seed):
    """Compute persistence diagrams from the SDT stage files."""
    config = _load(config_path, out, seed)
    _run_stage("pd", lambda: pipeline.stage_pd(config, config.output_dir))


@main.command()
@_common
def pi(config_path, out, seed):
    """Vectorize diagrams into concatenated persistence images."""
    config = _load(config_path, out, seed)
    _run_stage("pi", lambda: pipeline.stage_pi(config, config.output_dir))


@main.command()
@_common
def nmf(config_path, out, seed):
    """Factor the concatenated vectors into coefficients and basis."""
    config = _load(config_path, out, seed)
    _run_stage("nmf", lambda: pipeline.stage_nmf(config, config.output_dir))


@main.command()
@_common
@click.option("--component", "-m", default=0, type=int)
@click.option("--dim", "-k", default=1, type=int)
@click.option("--q", default=0.8, type=float)
def invert(config_path, out, seed, component, dim, q):
    """Locate the geometric origins of one component's feature distribution."""
    config = _load(config_path, out, seed)

    def run():
        out_dir = config.output_dir
        grids, offsets = pipeline.read_grids(out_dir)
        basis = pipeline.read_basis(out_dir)
        if not 0 <= component < basis.shape[0]:
            raise origins.OriginError(f"component {component} out of range")
        block = images.split_vector(basis[component], offsets)[dim]
        region = origins.feature_region(block, dim, grids[dim], q=q)
        rows = ["sample_id,component,dim,birth,death,bx,by,bz,bex,bey,bez,dx,dy,dz,dex,dey,dez"]
        cycle_rows = ["sample_id,component,dim,birth,death,cx,cy,cz,cex,cey,cez"]
        for srow in pipeline.read_samples(out_dir):
            sid = int(srow["sample_id"])
            edge = int(srow["edge"])
            diag = cubical.read_diagram_csv(
                os.path.join(out_dir, "diagrams", f"sample_{sid}.csv"), sample_id=sid
            )
            hits = origins.select_pairs(diag, region, grids[dim])
            if not hits:
                continue
            sdt_vol = distance.load_sdt(
                os.path.join(out_dir, "sdt", f"sample_{sid}.i32"), (edge, edge, edge)
            )
            fc = cubical.build_filtration(sdt_vol)
            for pair in hits:
                rep = origins.locate_origin(sid, fc, diag, pair, component=component)
                bc, dc = rep.birth_cell, rep.death_cell
                row = [str(sid), str(component), str(pair.dim),
                       cubical._fmt_value(pair.birth), cubical._fmt_value(pair.death)]
                row += [str(v) for v in bc.anchor] + [str(v) for v in bc.extent]
                row += [str(v) for v in dc.anchor] + [str(v) for v in dc.extent]
                rows.append(",".join(row))
                for cell in rep.cycle:
                    crow = [str(sid), str(component), str(pair.dim),
                            cubical._fmt_value(pair.birth), cubical._fmt_value(pair.death)]
                    crow += [str(v) for v in cell.anchor] + [str(v) for v in cell.extent]
                    cycle_rows.append(",".join(crow))
        with open(os.path.join(out_dir, f"origins_m{component}_k{dim}.csv"), "w") as fh:
            fh.write("\n".join(rows) + "\n")
        with open(os.path.join(out_dir, f"origin_cycles_m{component}_k{dim}.csv"), "w") as fh:
            fh.write("\n".join(cycle_rows) + "\n")

    _run_stage("invert", run)


@main.command()
@_common
def plot(config_path, out, seed):
    """Emit coefficient scatters (SVG) and feature heatmaps (PGM)."""
    config = _load(config_path, out, seed)

    def run():
        out_dir = config.output_dir
        ids, _, coeffs = pipeline.read_coefficients(out_dir)
        stage_of = {int(r["sample_id"]): r["stage_label"] for r in pipeline.read_samples(out_dir)}
        labels = [stage_of.get(sid, "") for sid in ids]
        M = coeffs.shape[1]
        for i, j in itertools.combinations(range(M), 2):
            plots.emit_scatter(
                os.path.join(out_dir, f"scatter_{i}_{j}.svg"), coeffs, labels, i, j
            )
        grids, offsets = pipeline.read_grids(out_dir)
        basis = pipeline.read_basis(out_dir)
        for m, row in enumerate(basis):
            for k, block in enumerate(images.split_vector(row, offsets)):
                plots.emit_feature_heatmap(
                    os.path.join(out_dir, f"cfd_{m}_dim{k}.pgm"), block, grids[k]
                )

    _run_stage("plot", run)


@main.command(name="pipeline")
@_common
def pipeline_cmd(config_path, out, seed):
    """Run every stage end to end and write the run manifest."""
    config = _load(config_path, out, seed)
    _run_stage("pipeline", lambda: pipeline.run_pipeline(config, config.output_dir))
    click.echo(f"pipeline complete: {config.output_dir}/manifest.yaml")


if __name__ == "__main__":
    main()
