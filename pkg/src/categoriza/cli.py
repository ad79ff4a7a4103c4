"""Command line interface: train, evaluate, predict, serve.

Training and evaluation share one deterministic pipeline: the data file
is read in order, split by the seed recorded in the model, and every
stage downstream is seeded, so rerunning a command reproduces its output
exactly (model files byte for byte).

Evaluation against the test split is guarded: once a model has consumed
its test split the command refuses to run again for the same model bytes
unless --force is given. The guard is a sidecar JSON file next to the
model keyed by the model digest, so retraining (which changes the bytes)
resets it naturally.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .evaluate import EvaluationError, evaluate_model, split
from .model import train_model
from .persist import PersistError, file_digest, load_model, save_model
from .records import IngestError, load_labeled
from .report import format_table, render_figures, write_per_class_csv, write_report_json
from .svm import DegenerateProblemError, TrainConfig

CONFIG_DEFAULTS = {
    "C": 1.0,
    "max_epochs": 1000,
    "dual_gap_tol": 1e-8,
    "seed": 0,
    "min_class_count": 10,
    "folds": 5,
}


def _read_config(path: Path | None, seed_override: int | None) -> dict:
    merged = dict(CONFIG_DEFAULTS)
    if path is not None:
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise click.ClickException(f"cannot read config {path}: {e}")
        if not isinstance(loaded, dict):
            raise click.ClickException("config must be a JSON object")
        unknown = sorted(set(loaded) - set(CONFIG_DEFAULTS))
        if unknown:
            raise click.ClickException(f"unknown config key(s): {', '.join(unknown)}")
        merged.update(loaded)
    if seed_override is not None:
        merged["seed"] = seed_override
    for key in ("max_epochs", "seed", "min_class_count", "folds"):
        if not isinstance(merged[key], int) or isinstance(merged[key], bool):
            raise click.ClickException(f"config key {key} must be an integer")
    for key in ("C", "dual_gap_tol"):
        if isinstance(merged[key], bool) or not isinstance(merged[key], (int, float)):
            raise click.ClickException(f"config key {key} must be a number")
    return merged


def _train_config(merged: dict) -> TrainConfig:
    try:
        return TrainConfig(
            C=float(merged["C"]),
            max_epochs=merged["max_epochs"],
            dual_gap_tol=float(merged["dual_gap_tol"]),
            seed=merged["seed"],
        )
    except ValueError as e:
        raise click.ClickException(f"invalid config: {e}")


def _load_data(data: Path, data_format: str):
    errors: list[str] = []

    def on_error(err) -> None:
        if len(errors) < 5:
            errors.append(str(err))

    try:
        docs, stats = load_labeled(data, data_format, on_error=on_error)
    except IngestError as e:
        raise click.ClickException(f"ingest: {e}")
    click.echo(
        f"read {stats.read} records: {stats.labeled} labeled, "
        f"{stats.discarded} discarded, {stats.errors} malformed",
        err=True,
    )
    for reason, count in sorted(stats.discard_reasons.items()):
        click.echo(f"  discarded ({reason}): {count}", err=True)
    for message in errors:
        click.echo(f"  malformed: {message}", err=True)
    return docs


@click.group()
def main() -> None:
    """Suggest classification codes for free-text purchase descriptions."""
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )


@main.command()
@click.argument("data", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "data_format", type=click.Choice(["jsonl", "csv"]), default="jsonl")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "-o", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--seed", type=int, default=None, help="Overrides the seed from the config file.")
def train(data: Path, data_format: str, config_path: Path | None, out_path: Path, seed: int | None) -> None:
    """Train a model on DATA and report validation accuracy."""
    merged = _read_config(config_path, seed)
    cfg = _train_config(merged)
    docs = _load_data(data, data_format)
    try:
        parts = split(docs, cfg.seed)
    except EvaluationError as e:
        raise click.ClickException(f"split: {e}")
    try:
        model = train_model(
            list(parts.train),
            cfg,
            min_class_count=merged["min_class_count"],
            folds=merged["folds"],
        )
    except (DegenerateProblemError, ValueError) as e:
        raise click.ClickException(f"train: {e}")
    try:
        save_model(model, out_path)
    except PersistError as e:
        raise click.ClickException(f"save: {e}")
    click.echo(f"model written to {out_path} ({len(model.classes)} classes)", err=True)

    report = evaluate_model(model, list(parts.validation), max_k=3)
    click.echo(f"validation top-1 accuracy: {report.accuracies[1]:.4f}")
    click.echo(f"validation top-3 accuracy: {report.accuracies.get(3, report.accuracies[max(report.accuracies)]):.4f}")


def _guard_path(model_path: Path) -> Path:
    return model_path.with_name(model_path.name + ".testlog.json")


@main.command()
@click.argument("model_path", metavar="MODEL", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("data", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "data_format", type=click.Choice(["jsonl", "csv"]), default="jsonl")
@click.option("--split", "split_name", type=click.Choice(["test", "validation"]), default="test")
@click.option("--k", type=click.IntRange(min=1), default=5, help="Report top-1 through top-k accuracy.")
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), default=Path("reports"))
@click.option("--force", is_flag=True, help="Evaluate the test split again for the same model.")
def evaluate(
    model_path: Path,
    data: Path,
    data_format: str,
    split_name: str,
    k: int,
    out_dir: Path,
    force: bool,
) -> None:
    """Evaluate MODEL on its held-out split of DATA and write reports.

    The split is recomputed from the seed stored in the model, so DATA
    must be the same file the model was trained from.
    """
    try:
        model = load_model(model_path)
    except PersistError as e:
        raise click.ClickException(str(e))
    digest = file_digest(model_path)

    guard = _guard_path(model_path)
    if split_name == "test" and not force and guard.exists():
        try:
            stamp = json.loads(guard.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            stamp = {}
        if stamp.get("model_digest") == digest:
            raise click.ClickException(
                "the test split has already been evaluated for this model; "
                "pass --force to evaluate it again"
            )

    seed = model.config.get("seed")
    if not isinstance(seed, int):
        raise click.ClickException("model carries no training seed; cannot reproduce the split")
    docs = _load_data(data, data_format)
    try:
        parts = split(docs, seed)
        subset = parts.test if split_name == "test" else parts.validation
        report = evaluate_model(model, list(subset), max_k=k)
    except EvaluationError as e:
        raise click.ClickException(str(e))

    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    write_report_json(
        report,
        report_path,
        extra={"model_version": digest[:12], "split": split_name, "data": str(data)},
    )
    csv_path = out_dir / "per_class.csv"
    write_per_class_csv(report, csv_path)
    figure_paths = render_figures(report, out_dir)

    if split_name == "test":
        guard.write_text(
            json.dumps({"model_digest": digest, "split": "test"}, indent=2) + "\n",
            encoding="utf-8",
        )

    click.echo(format_table(report))
    for path in [report_path, csv_path, *figure_paths]:
        click.echo(f"wrote {path}", err=True)


@main.command()
@click.argument("model_path", metavar="MODEL", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--k", type=click.IntRange(min=1, max=25), default=3)
def predict(model_path: Path, k: int) -> None:
    """Read descriptions from stdin (one per line), write suggestions as JSON lines."""
    try:
        model = load_model(model_path)
    except PersistError as e:
        raise click.ClickException(str(e))
    stdin = click.get_text_stream("stdin")
    stdout = click.get_text_stream("stdout")
    for line in stdin:
        text = line.strip()
        if not text:
            continue
        result = model.suggest(text, k)
        stdout.write(
            json.dumps(
                {
                    "description": text,
                    "suggestions": [
                        {"class_code": s.class_code, "probability": round(s.probability, 4)}
                        for s in result.suggestions
                    ],
                    "fallback": result.fallback,
                },
                ensure_ascii=False,
            )
            + "\n"
        )


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--labels", "labels_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(model_path: Path | None, labels_path: Path | None, host: str, port: int) -> None:
    """Serve the classification API over HTTP."""
    import uvicorn

    from .service import create_app

    app = create_app(model_path, labels_path)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
