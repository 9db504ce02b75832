"""Harness command line: train on an augmented corpus, then export score
and prediction files for the quadkit pipeline."""

from __future__ import annotations

import json
import sys

import click

from .config import HarnessConfig
from .export import export_predictions, export_scores
from .model import load_checkpoint
from .train import dump_per_instance_losses, train


def _config_from(config_path, **overrides) -> HarnessConfig:
    cfg = HarnessConfig.load(config_path) if config_path else HarnessConfig()
    return cfg.override(**overrides)


@click.group()
def cli() -> None:
    """Text-to-text training harness for the quad prediction pipeline."""


@cli.command("train")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--corpus", type=click.Path(exists=True), default=None)
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--loss-mode", type=click.Choice(["bcl", "pooled"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--dump-losses", type=click.Path(), default=None,
              help="After training, dump grouped per-instance losses to this file.")
def train_cmd(config_path, corpus, out_dir, epochs, batch_size, learning_rate,
              loss_mode, seed, dump_losses):
    """Fit the model and write a checkpoint plus the loss-curve log."""
    cfg = _config_from(
        config_path, corpus=corpus, out_dir=out_dir, epochs=epochs,
        batch_size=batch_size, learning_rate=learning_rate,
        loss_mode=loss_mode, seed=seed,
    )
    try:
        result = train(cfg)
    except (ValueError, RuntimeError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for record in result["history"]:
        click.echo(json.dumps(record), err=True)
    click.echo(f"checkpoint written to {result['checkpoint']}", err=True)
    if dump_losses:
        model, vocab, _ = load_checkpoint(result["checkpoint"])
        payload = dump_per_instance_losses(model, vocab, cfg.corpus, dump_losses)
        click.echo(
            f"losses dumped: bcl={payload.get('bcl'):.6f} pooled={payload['pooled']:.6f}",
            err=True,
        )


@cli.command("export-scores")
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--corpus", type=click.Path(exists=True), required=True,
              help="Augmented corpus whose quad-task rows are scored.")
@click.option("--out", type=click.Path(), required=True)
def export_scores_cmd(checkpoint, corpus, out):
    """Write the scores JSONL consumed by quadkit select-orders."""
    model, vocab, _ = load_checkpoint(checkpoint)
    try:
        n = export_scores(model, vocab, corpus, out)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"{n} score rows -> {out}", err=True)


@cli.command("export-predictions")
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--corpus", type=click.Path(exists=True), required=True,
              help="Corpus providing the (sentence, order) prompts to decode.")
@click.option("--data", type=click.Path(exists=True), required=True,
              help="Canonical JSONL with the sentence texts.")
@click.option("--out", type=click.Path(), required=True)
@click.option("--taxonomy", type=click.Path(exists=True), default=None)
@click.option("--orders", default=None, help="Comma-separated order surfaces to keep.")
@click.option("--max-steps", type=int, default=64)
def export_predictions_cmd(checkpoint, corpus, data, out, taxonomy, orders, max_steps):
    """Write the predictions JSONL consumed by quadkit vote."""
    model, vocab, _ = load_checkpoint(checkpoint)
    order_list = [s for s in orders.split(",") if s] if orders else None
    try:
        n, diagnostics = export_predictions(
            model, vocab, corpus, data, out,
            taxonomy_path=taxonomy, orders=order_list, max_steps=max_steps,
        )
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for diag in diagnostics:
        click.echo(f"diagnostic: {diag}", err=True)
    click.echo(f"{n} sequences -> {out} ({len(diagnostics)} diagnostics)", err=True)
    if diagnostics:
        sys.exit(1)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
