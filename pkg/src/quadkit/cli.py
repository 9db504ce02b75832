"""Batch command-line frontend: ingest, augment, score, select-orders,
decode, vote, eval and loss-check, composing through files only."""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import augmentation, dataset_io, inference, objective, order_selection
from .config import ConfigError, RunConfig
from .core import MARKERS
from .decoding import (
    DecodingSchema,
    GoldGreedyProvider,
    RandomProposalProvider,
    constrained_generate,
)
from .evaluation import element_breakdown, score_exact_match


def _fail2(fn):
    """Map domain/input errors to exit code 2; unexpected errors exit 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError, KeyError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _load_config(config_path: str | None) -> RunConfig:
    return RunConfig.load(config_path) if config_path else RunConfig()


def _resolve_orders(selector: str) -> list[augmentation.OrderTemplate]:
    """Order list from 'all', a comma-separated surface list, or '@file'
    pointing at a ranked-orders report."""
    if selector == "all":
        return augmentation.enumerate_quad_orders()
    if selector.startswith("@"):
        with open(selector[1:], encoding="utf-8") as fh:
            report = json.load(fh)
        surfaces = [row["order"] for row in report]
    else:
        surfaces = [s for s in selector.split(",") if s]
    if not surfaces:
        raise ConfigError(f"no orders resolved from {selector!r}")
    return [augmentation.OrderTemplate.from_surface(s) for s in surfaces]


def _schema_categories(cfg: RunConfig, dataset: dataset_io.Dataset) -> tuple[str, ...]:
    if cfg.taxonomy:
        cats = dataset_io.load_taxonomy(cfg.taxonomy)
        if not cats:
            raise ConfigError(f"taxonomy file {cfg.taxonomy} is empty")
        return cats
    return dataset.categories()


@click.group()
def cli() -> None:
    """Aspect sentiment quad prediction toolkit."""


@cli.command()
@click.argument("raw", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--element-order", default=None, help="Permutation of 'acos' used in the raw file.")
@click.option("--name", default="dataset")
@click.option("--split", default="train")
@click.option("--out", type=click.Path(), required=True, help="Canonical JSONL output path.")
@click.option("--taxonomy-out", type=click.Path(), default=None,
              help="Also write the observed category taxonomy, one per line.")
@click.option("--json", "as_json", is_flag=True, help="Print stats as JSON.")
@_fail2
def ingest(raw, config_path, element_order, name, split, out, taxonomy_out, as_json):
    """Parse a ####-separated dataset file into canonical JSONL and report
    sentence/quad counts."""
    cfg = _load_config(config_path).override(element_order=element_order, data=raw)
    dataset = dataset_io.parse_dataset_file(
        raw, element_order=cfg.element_order, name=name, split=split
    )
    with open(out, "w", encoding="utf-8") as fh:
        dataset_io.write_canonical_jsonl(dataset, fh)
    if taxonomy_out:
        Path(taxonomy_out).write_text(
            "".join(c + "\n" for c in dataset.categories()), encoding="utf-8"
        )
    cfg.write_snapshot(out, "ingest")
    stats = dataset_io.compute_stats(dataset)
    if as_json:
        click.echo(json.dumps({"n_sentences": stats.n_sentences, "n_quads": stats.n_quads}))
    else:
        click.echo(f"{stats.n_sentences} sentences, {stats.n_quads} quads")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--data", type=click.Path(exists=True), default=None, help="Canonical JSONL.")
@click.option("--out", type=click.Path(), required=True)
@click.option("--orders", default=None, help="'all', comma-separated surfaces, or @ranked.json.")
@click.option("--pps-k", type=int, default=None,
              help="Sample this many pairwise candidates (4 base + k-4 composites).")
@click.option("--pps-seed", type=int, default=None)
@click.option("--pairwise/--no-pairwise", "include_pairwise", default=None)
@click.option("--overall/--no-overall", "include_overall", default=None)
@_fail2
def augment(config_path, data, out, orders, pps_k, pps_seed, include_pairwise, include_overall):
    """Build the multi-task training corpus JSONL."""
    cfg = _load_config(config_path).override(
        data=data, orders=orders, pps_k=pps_k, pps_seed=pps_seed,
        include_pairwise=include_pairwise, include_overall=include_overall,
    )
    cfg.validate()
    if cfg.data is None:
        raise ConfigError("augment requires --data (or 'data' in the config file)")
    dataset = dataset_io.load_canonical(cfg.data)
    templates = _resolve_orders(cfg.orders)
    if cfg.include_pairwise:
        if cfg.pps_k is not None:
            pairwise = augmentation.pps_sample(cfg.pps_k, cfg.pps_seed)
        else:
            pairwise = augmentation.enumerate_pairwise_candidates()
    else:
        pairwise = []
    instances = augmentation.build_training_corpus(
        dataset.sentences, templates, pairwise, include_overall=cfg.include_overall
    )
    with open(out, "w", encoding="utf-8") as fh:
        augmentation.write_corpus_jsonl(instances, fh)
    cfg.write_snapshot(out, "augment")
    counts = {t: 0 for t in ("quad", "pairwise", "overall")}
    for inst in instances:
        counts[inst.task] += 1
    for task in ("quad", "pairwise", "overall"):
        click.echo(f"{task} {counts[task]}")
    click.echo(f"total {len(instances)}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--data", type=click.Path(exists=True), default=None, help="Canonical JSONL.")
@click.option("--out", type=click.Path(), required=True, help="Scores JSONL output.")
@click.option("--orders", default=None)
@click.option("--salt", default="", help="Salt for the deterministic toy scorer.")
@_fail2
def score(config_path, data, out, orders, salt):
    """Score every (order, sentence) pair with the built-in toy provider and
    write per-sentence score rows."""
    cfg = _load_config(config_path).override(data=data, orders=orders)
    if cfg.data is None:
        raise ConfigError("score requires --data (or 'data' in the config file)")
    dataset = dataset_io.load_canonical(cfg.data)
    templates = _resolve_orders(cfg.orders)
    provider = order_selection.ToyScoreProvider(salt=salt)
    rows = []
    for template in templates:
        for sentence, quads in dataset.sentences:
            if not quads:
                continue
            inst = augmentation.render_quad_instance(sentence, quads, template)
            rows.append((template.surface, sentence.id, provider.score(inst.input, inst.target)))
    with open(out, "w", encoding="utf-8") as fh:
        order_selection.write_scores_jsonl(rows, fh)
    cfg.write_snapshot(out, "score")
    click.echo(f"{len(rows)} score rows", err=True)


@cli.command("select-orders")
@click.argument("scores_path", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("-k", type=int, default=None)
@click.option("--out", type=click.Path(), default=None, help="Ranked report JSON (stdout if omitted).")
@_fail2
def select_orders(scores_path, config_path, k, out):
    """Aggregate a scores JSONL into mean scores per order and emit the
    top-k ranking report."""
    cfg = _load_config(config_path).override(k=k)
    cfg.validate()
    with open(scores_path, encoding="utf-8") as fh:
        rows = order_selection.read_scores_jsonl(fh)
    if not rows:
        raise ConfigError(f"no score rows in {scores_path}")
    aggregated = order_selection.aggregate_scores(rows)
    if cfg.k > len(aggregated):
        raise ConfigError(f"k={cfg.k} exceeds the {len(aggregated)} scored orders")
    report = order_selection.ranking_report(aggregated, cfg.k)
    payload = json.dumps(report, indent=2)
    if out:
        Path(out).write_text(payload + "\n", encoding="utf-8")
        cfg.write_snapshot(out, "select-orders")
        click.echo(f"top-{cfg.k} of {len(aggregated)} orders -> {out}", err=True)
    else:
        click.echo(payload)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--data", type=click.Path(exists=True), default=None, help="Canonical JSONL.")
@click.option("--out", type=click.Path(), required=True, help="Predictions JSONL output.")
@click.option("--orders", default=None)
@click.option("--provider", type=click.Choice(["gold", "random"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--beam", type=int, default=None)
@click.option("--step-cap", type=int, default=None)
@click.option("--taxonomy", type=click.Path(exists=True), default=None)
@click.option("--strict-spans", is_flag=True, default=None)
@_fail2
def decode(config_path, data, out, orders, provider, seed, beam, step_cap, taxonomy, strict_spans):
    """Generate one constrained sequence per (sentence, order) with a mock
    provider; external models submit the same predictions JSONL instead."""
    cfg = _load_config(config_path).override(
        data=data, orders=orders, provider=provider, seed=seed,
        beam=beam, step_cap=step_cap, taxonomy=taxonomy, strict_spans=strict_spans,
    )
    cfg.validate()
    if cfg.data is None:
        raise ConfigError("decode requires --data (or 'data' in the config file)")
    dataset = dataset_io.load_canonical(cfg.data)
    templates = _resolve_orders(cfg.orders)
    categories = _schema_categories(cfg, dataset)
    if not categories:
        raise ConfigError("empty category taxonomy; pass --taxonomy")

    rows = []
    for template in templates:
        schema = DecodingSchema(
            categories=categories, order=template, strict_spans=cfg.strict_spans
        )
        gen_provider = _build_provider(cfg, dataset, template, categories)
        for sentence, quads in dataset.sentences:
            inst_input = f"{augmentation.QUAD_PREFIX}{sentence.text} {template.surface}"
            sequence = constrained_generate(
                inst_input, sentence, schema, gen_provider,
                beam=cfg.beam, step_cap=cfg.step_cap,
            )
            rows.append((sentence.id, template.surface, sequence))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(out, "w", encoding="utf-8") as fh:
        inference.write_predictions_jsonl(rows, fh)
    cfg.write_snapshot(out, "decode")
    click.echo(f"{len(rows)} sequences ({len(templates)} orders)", err=True)


def _build_provider(cfg, dataset, template, categories):
    if cfg.provider == "gold":
        gold_by_input = {}
        for sentence, quads in dataset.sentences:
            if not quads:
                continue
            inst = augmentation.render_quad_instance(sentence, quads, template)
            gold_by_input[inst.input] = inst.target
        return GoldGreedyProvider(gold_by_input)
    vocab: set[str] = set()
    for sentence, _ in dataset.sentences:
        vocab.update(sentence.tokens())
    vocab.update(w for cat in categories for w in cat.split())
    vocab.update(("great", "bad", "ok", "it", "[SSEP]"))
    vocab.update(m.surface for m in MARKERS)
    return RandomProposalProvider(seed=cfg.seed, vocabulary=vocab)


@cli.command()
@click.argument("predictions", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), required=True, help="Final predictions JSONL.")
@click.option("--k", type=int, default=None, help="View count; default: distinct orders in the file.")
@click.option("--tau", type=float, default=None, help="Voting threshold; default k/2.")
@_fail2
def vote(predictions, config_path, out, k, tau):
    """Parse per-order sequences and keep quads predicted by at least tau of
    the k order views."""
    with open(predictions, encoding="utf-8") as fh:
        rows = inference.read_predictions_jsonl(fh)
    if not rows:
        raise ConfigError(f"no prediction rows in {predictions}")
    order_surfaces = sorted({r[1] for r in rows})
    cfg = _load_config(config_path).override(k=k, tau=tau)
    effective_k = k if k is not None else (cfg.k if config_path else len(order_surfaces))
    effective_tau = tau if tau is not None else (
        cfg.tau if cfg.tau is not None else effective_k / 2
    )
    if effective_tau <= 0:
        raise ConfigError(f"tau must be positive, got {effective_tau}")

    templates = {s: augmentation.OrderTemplate.from_surface(s) for s in order_surfaces}
    by_sentence: dict[str, list[inference.OrderView]] = {}
    n_diagnostics = 0
    for source_id, surface, sequence in rows:
        parsed = inference.parse_target(sequence, templates[surface])
        for diag in parsed.diagnostics:
            n_diagnostics += 1
            click.echo(
                f"diagnostic: {source_id} {surface}: {diag.reason} in {diag.segment!r}",
                err=True,
            )
        view = inference.OrderView(order_surface=surface, quads=frozenset(parsed.quads))
        by_sentence.setdefault(source_id, []).append(view)

    final = []
    for source_id in sorted(by_sentence):
        views = by_sentence[source_id]
        # views absent from the file still count toward k as empty sets
        missing = effective_k - len(views)
        padded = views + [
            inference.OrderView(order_surface="", quads=frozenset())
            for _ in range(max(0, missing))
        ]
        kept = inference.aggregate_votes(padded, effective_tau)
        final.append((source_id, kept))
    with open(out, "w", encoding="utf-8") as fh:
        inference.write_final_jsonl(final, fh)
    cfg.override(k=effective_k, tau=effective_tau).write_snapshot(out, "vote")
    click.echo(
        f"voted {len(final)} sentences, k={effective_k}, tau={effective_tau}, "
        f"{n_diagnostics} parse diagnostics",
        err=True,
    )


@cli.command("eval")
@click.argument("predictions", type=click.Path(exists=True))
@click.argument("gold", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
@click.option("--breakdown", is_flag=True, help="Also print per-element hit rates (debug only).")
@_fail2
def eval_cmd(predictions, gold, as_json, breakdown):
    """Exact-match precision/recall/F1 of final predictions against gold."""
    with open(predictions, encoding="utf-8") as fh:
        pred = inference.read_final_jsonl(fh)
    gold_dataset = dataset_io.load_canonical(gold)
    gold_map = {s.id: quads for s, quads in gold_dataset.sentences}
    report = score_exact_match(pred, gold_map)
    if as_json:
        click.echo(json.dumps(report.to_json(), indent=2))
    else:
        click.echo(f"precision {report.precision:.4f}")
        click.echo(f"recall    {report.recall:.4f}")
        click.echo(f"f1        {report.f1:.4f}")
        click.echo(f"tp/pred/gold {report.tp}/{report.n_pred}/{report.n_gold}")
    if breakdown:
        rates = element_breakdown(pred, gold_map)
        for slot, rate in rates.items():
            click.echo(f"breakdown {slot} {rate:.4f}", err=True)


@cli.command("loss-check")
@click.argument("losses", type=click.Path(exists=True))
@click.option("--tol", type=float, default=1e-9, help="Tolerance for claimed totals.")
@click.option("--json", "as_json", is_flag=True)
@_fail2
def loss_check(losses, tol, as_json):
    """Recompute the balanced and pooled losses from dumped per-instance
    values and verify any claimed totals."""
    with open(losses, encoding="utf-8") as fh:
        payload = json.load(fh)
    groups = {name: [float(v) for v in payload.get(name, [])]
              for name in ("quad", "pairwise", "overall")}
    bcl = objective.balanced_contribution_loss(
        groups["quad"], groups["pairwise"], groups["overall"]
    ).total
    pooled = objective.pooled_sum_loss(
        groups["quad"], groups["pairwise"], groups["overall"]
    )
    result = {"bcl": bcl, "pooled": pooled}
    mismatches = []
    for name, computed in result.items():
        claimed = payload.get(name)
        if claimed is not None and abs(float(claimed) - computed) > tol:
            mismatches.append(f"{name}: claimed {claimed}, computed {computed}")
    if as_json:
        click.echo(json.dumps(result))
    else:
        click.echo(f"bcl    {bcl!r}")
        click.echo(f"pooled {pooled!r}")
    if mismatches:
        raise ConfigError("loss mismatch beyond tolerance: " + "; ".join(mismatches))


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
