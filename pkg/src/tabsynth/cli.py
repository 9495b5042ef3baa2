"""Command-line interface.

Subcommands mirror the pipeline: ``describe`` (CSV -> description JSON),
``generate`` (description -> CSV), ``compare`` (two CSVs + description ->
report JSON, text summary, figures), ``link`` (two providers -> linkable
CSV pair), ``probe`` (adversarial datasets) and ``serve`` (local HTTP API).
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import linker, probegen
from .describer import DatasetDescription, Mode, PrivacyParams, describe
from .generator import GenerationRequest, generate
from .ingest import AttributeOverride, CsvFormatError, DataType, load_csv
from .inspector import ComparisonReport, compare


def _fail_cleanly(fn):
    """Map pipeline errors to a one-line diagnostic and nonzero exit."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, KeyError, OSError, CsvFormatError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _load_overrides(path: str | None) -> list[AttributeOverride]:
    if path is None:
        return []
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    overrides = []
    for entry in doc:
        overrides.append(
            AttributeOverride(
                name=entry["name"],
                data_type=DataType(entry["data_type"]) if entry.get("data_type") else None,
                categorical=entry.get("categorical"),
            )
        )
    return overrides


@click.group()
@click.version_option()
def main() -> None:
    """Privacy-preserving synthetic data for tabular datasets."""


# --------------------------------------------------------------------------
# describe
# --------------------------------------------------------------------------


@main.command("describe")
@click.argument("input_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["random", "independent", "correlated"]), default="correlated")
@click.option("--epsilon", type=float, default=0.1, show_default=True)
@click.option("--k", "max_parents", type=int, default=4, show_default=True, help="Maximum network parents per attribute.")
@click.option("--histogram-size", type=int, default=20, show_default=True)
@click.option("--categorical-threshold", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--overrides", "overrides_file", type=click.Path(exists=True, dir_okay=False), help="JSON list of per-attribute type/categorical overrides.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@_fail_cleanly
def describe_cmd(input_csv, mode, epsilon, max_parents, histogram_size, categorical_threshold, seed, overrides_file, output):
    """Profile INPUT_CSV into a dataset description file."""
    table = load_csv(
        input_csv,
        _load_overrides(overrides_file),
        categorical_threshold=categorical_threshold,
    )
    privacy = PrivacyParams(
        epsilon=epsilon,
        histogram_size=histogram_size,
        categorical_threshold=categorical_threshold,
    )
    description = describe(table, Mode.parse(mode), privacy, seed, max_parents=max_parents)
    description.save(output)
    for warning in description.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(f"wrote {output} ({len(description.attributes)} attributes, mode {description.mode.value})")


# --------------------------------------------------------------------------
# generate
# --------------------------------------------------------------------------


@main.command("generate")
@click.argument("description_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--num-tuples", type=int, default=None, help="Output rows; defaults to the described row count.")
@click.option("--uniform", "uniform_attrs", multiple=True, help="Attribute to sample uniformly from its domain (repeatable).")
@click.option("--mode", type=click.Choice(["random", "independent", "correlated"]), default=None, help="Downgrade the generation mode.")
@click.option("--no-missing-injection", is_flag=True, help="Do not re-inject missing cells.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@_fail_cleanly
def generate_cmd(description_file, seed, num_tuples, uniform_attrs, mode, no_missing_injection, threads, output):
    """Sample a synthetic CSV from DESCRIPTION_FILE."""
    description = DatasetDescription.load(description_file)
    request = GenerationRequest(
        description=description,
        size=num_tuples,
        seed=seed,
        uniform_attributes=frozenset(uniform_attrs),
        mode_override=Mode.parse(mode) if mode else None,
        inject_missing=not no_missing_injection,
    )
    table = generate(request, threads=threads)
    table.write_csv(output)
    click.echo(f"wrote {output} ({table.row_count} rows)")


# --------------------------------------------------------------------------
# compare
# --------------------------------------------------------------------------


def _text_summary(report: ComparisonReport) -> str:
    lines = ["attribute comparison", "--------------------"]
    for attr in report.attributes:
        if attr.kl_divergence_bits is None:
            lines.append(f"{attr.name:24s} ({attr.data_type}) no distribution recorded")
        else:
            lines.append(
                f"{attr.name:24s} ({attr.data_type}) KL={attr.kl_divergence_bits:.5f} bits"
                f"  corr={attr.distribution_correlation:.3f}"
            )
    lines.append("")
    for title, matrix in (("input", report.mi_input), ("synthetic", report.mi_synthetic)):
        lines.append(f"normalized pairwise MI ({title})")
        header = " " * 16 + " ".join(f"{n[:9]:>9s}" for n in report.columns)
        lines.append(header)
        for name, row in zip(report.columns, matrix):
            lines.append(f"{name[:15]:15s} " + " ".join(f"{v:9.3f}" for v in row))
        lines.append("")
    if report.input_network_edges is not None:
        lines.append("network edges (input):     " + ", ".join(f"{p}->{c}" for p, c in report.input_network_edges))
        lines.append("network edges (synthetic): " + ", ".join(f"{p}->{c}" for p, c in report.synthetic_network_edges or ()))
    return "\n".join(lines) + "\n"


@main.command("compare")
@click.argument("input_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("synthetic_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("description_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--categorical-threshold", type=int, default=None, help="Override; defaults to the description's threshold.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True, help="Report JSON path.")
@click.option("--figures-dir", type=click.Path(file_okay=False), default=None, help="Figure directory; defaults to '<output stem>_figures'.")
@click.option("--no-figures", is_flag=True)
@_fail_cleanly
def compare_cmd(input_csv, synthetic_csv, description_file, categorical_threshold, output, figures_dir, no_figures):
    """Compare INPUT_CSV and SYNTHETIC_CSV under DESCRIPTION_FILE.

    Writes the report JSON, a text summary alongside it, and renders the
    histogram/heatmap/network figures.
    """
    description = DatasetDescription.load(description_file)
    threshold = categorical_threshold or description.privacy.categorical_threshold
    input_table = load_csv(input_csv, categorical_threshold=threshold)
    synthetic = load_csv(synthetic_csv, categorical_threshold=threshold)
    report = compare(input_table, synthetic, description)

    out_path = Path(output)
    report.save(out_path)
    summary = _text_summary(report)
    text_path = out_path.with_suffix(".txt")
    text_path.write_text(summary, encoding="utf-8")
    click.echo(summary, nl=False)

    if not no_figures:
        from . import plots

        target = Path(figures_dir) if figures_dir else out_path.parent / f"{out_path.stem}_figures"
        written = plots.render_report(report, target)
        click.echo(f"wrote {out_path}, {text_path} and {len(written)} figures in {target}")
    else:
        click.echo(f"wrote {out_path} and {text_path}")


# --------------------------------------------------------------------------
# link
# --------------------------------------------------------------------------


@main.command("link")
@click.option("--left-desc", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--right-desc", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--left-csv", type=click.Path(exists=True, dir_okay=False), help="Left provider's private CSV (signatures computed locally).")
@click.option("--right-csv", type=click.Path(exists=True, dir_okay=False), help="Right provider's private CSV.")
@click.option("--left-sigs", type=click.Path(exists=True, dir_okay=False), help="Pre-exchanged left signatures (one JSON gram list per line).")
@click.option("--right-sigs", type=click.Path(exists=True, dir_okay=False), help="Pre-exchanged right signatures.")
@click.option("--tau", type=float, default=linker.DEFAULT_MATCH_THRESHOLD, show_default=True, help="Jaccard match threshold.")
@click.option("--ngram", type=int, default=linker.DEFAULT_NGRAM, show_default=True)
@click.option("--max-grams", type=int, default=linker.DEFAULT_MAX_GRAMS, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--write-sigs", is_flag=True, help="Also write each side's signatures for exchange.")
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@_fail_cleanly
def link_cmd(left_desc, right_desc, left_csv, right_csv, left_sigs, right_sigs, tau, ngram, max_grams, seed, write_sigs, out_dir):
    """Generate a linkable pair of synthetic CSVs plus the join estimate."""

    def side_signatures(csv_path, sigs_path, side):
        if sigs_path:
            return linker.read_signatures(sigs_path)
        if csv_path:
            table = load_csv(csv_path)
            return linker.signatures_for_table(table, ngram, max_grams)
        raise click.ClickException(f"provide --{side}-csv or --{side}-sigs")

    sigs_left = side_signatures(left_csv, left_sigs, "left")
    sigs_right = side_signatures(right_csv, right_sigs, "right")
    estimate = linker.estimate_join(sigs_left, sigs_right, tau)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if write_sigs:
        linker.write_signatures(sigs_left, out / "left_signatures.txt")
        linker.write_signatures(sigs_right, out / "right_signatures.txt")

    left, right = linker.generate_linked(
        DatasetDescription.load(left_desc),
        DatasetDescription.load(right_desc),
        estimate,
        seed,
    )
    left.write_csv(out / "left.csv")
    right.write_csv(out / "right.csv")
    (out / "estimate.json").write_text(json.dumps(estimate.to_json(), indent=2) + "\n", encoding="utf-8")
    click.echo(
        f"estimate: left_only={estimate.left_only} right_only={estimate.right_only} "
        f"linked={estimate.linked}; wrote left.csv ({left.row_count} rows), "
        f"right.csv ({right.row_count} rows) in {out}"
    )


# --------------------------------------------------------------------------
# probe
# --------------------------------------------------------------------------


@main.command("probe")
@click.argument("description_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--spec", "spec_file", type=click.Path(exists=True, dir_okay=False), help="ProbeSpec JSON document.")
@click.option("--preset", type=click.Choice(sorted(probegen.PRESETS)), default=None, help="Named pathological distribution.")
@click.option("--attribute", default=None, help="Attribute the preset applies to.")
@click.option("--num-tuples", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--clusters-out", type=click.Path(dir_okay=False), default=None, help="Where cluster rows go (default '<output stem>_clusters.csv').")
@_fail_cleanly
def probe_cmd(description_file, spec_file, preset, attribute, num_tuples, seed, output, clusters_out):
    """Generate an adversarial probe dataset from DESCRIPTION_FILE."""
    description = DatasetDescription.load(description_file)
    spec = probegen.ProbeSpec.load(spec_file) if spec_file else probegen.ProbeSpec()
    if preset:
        if not attribute:
            raise click.ClickException("--preset requires --attribute")
        description = probegen.preset_override(description, attribute, preset)
    description = probegen.apply_probe_spec(description, spec)

    table = generate(GenerationRequest(description, size=num_tuples, seed=seed))
    if spec.pathology_rules:
        table = probegen.inject_pathology(table, spec.pathology_rules, seed)
    table.write_csv(output)
    message = f"wrote {output} ({table.row_count} rows)"

    if spec.cluster_specs:
        clusters = probegen.generate_fairness_clusters(spec.cluster_specs, seed)
        target = Path(clusters_out) if clusters_out else Path(output).with_name(f"{Path(output).stem}_clusters.csv")
        clusters.write_csv(target)
        message += f"; wrote {target} ({clusters.row_count} cluster rows)"
    click.echo(message)


# --------------------------------------------------------------------------
# serve
# --------------------------------------------------------------------------


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8357, show_default=True)
@click.option("--max-upload-bytes", type=int, default=64 * 1024 * 1024, show_default=True)
@_fail_cleanly
def serve_cmd(host, port, max_upload_bytes):
    """Run the local data-owner HTTP service (and web UI, when built)."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(max_upload_bytes=max_upload_bytes), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
