"""Command-line interface."""

from __future__ import annotations

import sys
import time

import click

from . import config, grafting
from .dynamics import method_correlation, sort_correlation_rows
from .loops import TriageState
from .session import Phase, SessionManager


def _split_target(value: str) -> tuple[str, str]:
    try:
        pdb_id, chain = value.split(":")
    except ValueError:
        raise click.BadParameter(f"expected PDBID:CHAIN, got {value!r}")
    return pdb_id, chain


@click.group()
def main():
    """Protein loop-grafting pipeline."""


@main.command()
@click.argument("pdb_id")
def fetch(pdb_id):
    """Download a PDB entry into the local cache."""
    from .structure import fetch_structure

    structure = fetch_structure(pdb_id, cache_dir=config.cache_dir(),
                                base_url=config.archive_url(),
                                retries=config.fetch_retries())
    n_res = sum(len(c.residues) for c in structure.chains)
    click.echo(f"{structure.pdb_id}: {len(structure.chains)} chains, {n_res} residues")


@main.command()
@click.argument("target")
def geometry(target):
    """Print loop descriptors for PDBID:CHAIN."""
    pdb_id, chain = _split_target(target)
    manager = SessionManager()
    session = manager.create_session(pdb_id, chain, pdb_id, chain)
    descriptors = session.loop_geometry("scaffold")
    click.echo(f"{'loop':<16}{'D (A)':>8}{'delta':>8}{'theta':>8}{'rho':>8}")
    for loop in session.loop_lists["scaffold"].all_loops():
        g = descriptors.get(loop.id)
        if g is None:
            click.echo(f"{loop.id:<16}{'degenerate':>8}")
            continue
        click.echo(f"{loop.id:<16}{g.D:8.2f}{g.delta:8.1f}{g.theta:8.1f}{g.rho:8.1f}")


@main.command()
@click.argument("target")
@click.option("--methods", default="PDB_B,GNM,ANM", show_default=True)
def flex(target, methods):
    """Per-residue flexibility profiles and their agreement."""
    pdb_id, chain = _split_target(target)
    manager = SessionManager()
    session = manager.create_session(pdb_id, chain, pdb_id, chain)
    names = [m.strip() for m in methods.split(",") if m.strip()]
    profiles = {m: session.flexibility("scaffold", m) for m in names}
    trace = session.trace("scaffold")
    header = "residue " + "".join(f"{m:>10}" for m in names)
    click.echo(header)
    for i, key in enumerate(trace.residue_keys):
        row = "".join(f"{profiles[m].normalized[i]:10.3f}" for m in names)
        click.echo(f"{key[0]:>7} {row}")
    if len(names) > 1:
        corr = method_correlation([profiles[m] for m in names])
        click.echo("\nmethod correlation (Pearson r / p):")
        for i, a in enumerate(corr.methods):
            for j, b in enumerate(corr.methods):
                if j <= i:
                    continue
                flag = " (low significance)" if corr.low_significance[i][j] else ""
                click.echo(f"  {a} vs {b}: r={corr.r[i][j]:+.3f} p={corr.p[i][j]:.3g}{flag}")


@main.command()
@click.argument("target")
@click.option("--sort", "metric", default="ss_to_coil", show_default=True,
              type=click.Choice(["ss_corr", "loop_corr", "ss_to_coil", "position", "id"]))
def xcorr(target, metric):
    """Motion cross-correlation aggregates between loops."""
    pdb_id, chain = _split_target(target)
    manager = SessionManager()
    session = manager.create_session(pdb_id, chain, pdb_id, chain)
    corr = session.xcorr()
    loops = session.loop_lists["scaffold"].all_loops()
    ids = [loop.id for loop in loops]
    rows = sort_correlation_rows(corr, loops, metric=metric) if loops else []
    click.echo(f"{'pair':<34}{'ss':>8}{'loop':>8}{'ss->coil':>10}")
    for row_id in rows or ids:
        for col_id in ids:
            if col_id == row_id:
                continue
            pair = corr.pairs.get((row_id, col_id))
            if pair is None:
                continue
            click.echo(f"{row_id + ' / ' + col_id:<34}"
                       f"{pair.ss_corr:8.3f}{pair.loop_corr:8.3f}{pair.ss_to_coil:10.3f}")


@main.command()
@click.option("--scaffold", required=True, help="PDBID:CHAIN of the scaffold")
@click.option("--insert", "insert_", required=True, help="PDBID:CHAIN of the insert")
@click.option("--auto", is_flag=True, help="accept default suggested pairings")
@click.option("--window", default=0, show_default=True,
              help="boundary-variant window for grafting")
@click.option("--out", type=click.Path(), default=None,
              help="write the best chimera PDB here")
def run(scaffold, insert_, auto, window, out):
    """Headless end-to-end pipeline: fetch, assign, pair, graft, rank."""
    s_id, s_chain = _split_target(scaffold)
    i_id, i_chain = _split_target(insert_)
    manager = SessionManager()
    session = manager.create_session(s_id, s_chain, i_id, i_chain)
    click.echo(f"session {session.id}: scaffold {s_id}:{s_chain}, insert {i_id}:{i_chain}")

    if not auto:
        click.echo("nothing further to do without --auto (interactive pairing "
                   "is the web UI's job)")
        return

    # mark every extractable scaffold loop as a candidate, then accept the
    # default geometric pairing
    scaffold_list = session.loop_lists["scaffold"]
    for loop in scaffold_list.all_loops():
        session.set_triage(loop.id, TriageState.CANDIDATE)
    suggestions = [s for s in session.pair_suggestions() if s.is_default]
    if not suggestions:
        click.echo("no pairing suggestions could be computed", err=True)
        sys.exit(1)
    best = min(suggestions, key=lambda s: s.score)
    session.set_pairings([{"scaffold_loop_id": best.scaffold_loop_id,
                           "insert_loop_id": best.insert_loop_id}])
    click.echo(f"paired {best.scaffold_loop_id} with {best.insert_loop_id} "
               f"(score {best.score:.3f})")

    session.advance_phase(Phase.P6)
    specs = session.default_graft_specs(window=window)
    job = manager.submit_graft(session, specs)
    while job.state in ("queued", "running"):
        time.sleep(0.1)
    if job.state == "failed":
        click.echo(f"graft job failed: {job.error}", err=True)
        sys.exit(1)

    models = [session.models[m] for m in job.model_ids]
    if not models:
        click.echo("no chimeric model survived splicing", err=True)
        sys.exit(1)
    ranked = grafting.rank_models(models)
    click.echo(f"{len(ranked)} chimeric models, best first:")
    for model in ranked[: min(10, len(ranked))]:
        report = grafting.surrogate_score(model)
        click.echo(f"  composite={report.composite:.3f} "
                   f"anchor_rmsd={report.anchor_rmsd:.3f} clashes={report.clash_count} "
                   f"residues={model.length}")
    if out:
        with open(out, "w") as fh:
            fh.write(grafting.export_pdb(ranked[0]))
        click.echo(f"wrote best model to {out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
