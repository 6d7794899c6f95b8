# lib/cli.py
"""
Command-line entry point: python -m lib.cli <subcommand> [options]

    ingest  normalize a dataset and report dropped records
    index   build the corpus index (document frequencies)
    graph   build the social graph from an edge list
    target  rank users against a brand page and select the top fraction
    report  group match table, term clouds, optional SVG chart
    synth   generate a seeded synthetic fixture
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from lib.artifacts import RunManifest, write_json, write_text
from lib.campaign import (
    CampaignConfig,
    Workspace,
    group_match_table,
    load_class_map,
    rank_users,
    term_clouds,
)
from lib.config import (
    CORPUS_SCOPES,
    TF_MODES,
    Settings,
    load_category_vocabulary,
    load_gender_map,
    read_json_file,
    resolve_settings,
)
from lib.errors import BrandMatchError, ConfigError, EmptyDataset, InputError
from lib.ingestion import Dataset, dataset_summary, load_dataset, save_dataset
from lib.matching import POSTS_ONLY_SPEC, SimilaritySpec
from lib.network import build_graph, degree_summary, save_graph
from lib.schemas import TargetReportModel
from lib.synth import SynthSpec, generate, write_fixture
from lib.textindex import TokenizerConfig, load_index

logger = logging.getLogger("brandmatch")


# ---------------------------
# Parser
# ---------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, required=True, help="output directory")
    common.add_argument("--config", type=Path, default=None, help="JSON config file")
    common.add_argument("--jobs", type=int, default=None, help="worker processes")
    common.add_argument("--tf-mode", choices=TF_MODES, default=None)
    common.add_argument("--log-base", choices=("e",), default=None, help="IDF log base (fixed)")
    common.add_argument("--stopwords", type=Path, default=None, help="stopword file, one term per line")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="brandmatch", description="Profile matching for campaign targeting")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="Normalize a dataset")
    p.add_argument("--dataset", type=Path, required=True)

    p = sub.add_parser("index", parents=[common], help="Build the corpus index")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--scope", choices=CORPUS_SCOPES, default=None)

    p = sub.add_parser("graph", parents=[common], help="Build the social graph")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--edges", type=Path, default=None, help="JSON-lines edge list")

    p = sub.add_parser("target", parents=[common], help="Rank users against a brand")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--brand", default=None, help="brand page owner_id (overrides config)")
    p.add_argument("--fraction", type=float, default=None, help="target fraction p in (0, 1]")
    p.add_argument("--scope", choices=CORPUS_SCOPES, default=None)
    p.add_argument("--index", type=Path, default=None, help="reuse a saved corpus index")
    p.add_argument("--clusters", type=Path, default=None, help="owner_id -> cluster map for separation AUC")

    p = sub.add_parser("report", parents=[common], help="Group match table and term clouds")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--classes", type=Path, required=True, help="page_id -> topic class map")
    p.add_argument("--spec", type=Path, default=None, help="JSON with a 'categories' similarity spec")
    p.add_argument("--scope", choices=CORPUS_SCOPES, default=None)
    p.add_argument("--index", type=Path, default=None)
    p.add_argument("--top-terms", type=int, default=100)
    p.add_argument("--plots", action="store_true", help="also write group_match.svg")

    p = sub.add_parser("synth", parents=[common], help="Generate a synthetic fixture")
    p.add_argument("--spec", type=Path, default=None, help="synth spec JSON")
    p.add_argument("--seed", type=int, default=0)
    return parser


# ---------------------------
# Shared setup
# ---------------------------

def _settings(args: argparse.Namespace) -> tuple[Settings, Dict[str, Any]]:
    file_values = read_json_file(args.config, "config") if args.config else {}
    if not isinstance(file_values, dict):
        raise ConfigError("config file must be a JSON object")
    flags = {
        "jobs": args.jobs,
        "tf_mode": args.tf_mode,
        "log_base": args.log_base,
        "stopwords_path": str(args.stopwords) if args.stopwords else None,
        "corpus_scope": getattr(args, "scope", None),
    }
    return resolve_settings(flags, file_values), file_values


def _load(args, settings: Settings, manifest: RunManifest) -> tuple[Dataset, TokenizerConfig, list]:
    tokenizer = TokenizerConfig.from_settings(settings)
    vocabulary = load_category_vocabulary(settings.categories_path)
    gender_map = load_gender_map(settings.gender_map_path)
    manifest.add_input("dataset", args.dataset)
    manifest.add_input("stopwords", settings.stopwords_path)
    manifest.add_input("categories", settings.categories_path)
    manifest.add_input("gender_map", settings.gender_map_path)
    return load_dataset(args.dataset, gender_map, tokenizer), tokenizer, vocabulary


def _workspace(args, settings: Settings, manifest: RunManifest) -> Workspace:
    dataset, tokenizer, vocabulary = _load(args, settings, manifest)
    index = None
    if getattr(args, "index", None):
        manifest.add_input("index", args.index)
        index = load_index(args.index)
    return Workspace.build(dataset, vocabulary, tokenizer, settings, index=index)


# ---------------------------
# Subcommands
# ---------------------------

def cmd_ingest(args, settings: Settings, manifest: RunManifest) -> List[Path]:
    dataset, _, _ = _load(args, settings, manifest)
    if not dataset.records:
        raise EmptyDataset(f"no usable records in {args.dataset}")
    report = {
        "summary": dataset_summary(dataset),
        "drops": [d.to_dict() for d in dataset.drops],
    }
    return [
        save_dataset(dataset, args.out / "dataset.json"),
        write_json(args.out / "ingest_report.json", report),
    ]


def cmd_index(args, settings: Settings, manifest: RunManifest) -> List[Path]:
    ws = _workspace(args, settings, manifest)
    corpus = ws.corpus(settings.corpus_scope)
    return [write_json(args.out / "index.json", corpus.to_dict())]


def cmd_graph(args, settings: Settings, manifest: RunManifest) -> List[Path]:
    dataset, _, _ = _load(args, settings, manifest)
    manifest.add_input("edges", args.edges)
    g = build_graph(dataset, args.edges)
    report = {"summary": degree_summary(g), "drops": [d.to_dict() for d in g.drops]}
    return [
        save_graph(g, args.out / "graph.json"),
        write_json(args.out / "graph_report.json", report),
    ]


def _positives(path: Path, brand_id: str, manifest: RunManifest) -> set:
    manifest.add_input("clusters", path)
    clusters = read_json_file(path, "cluster map")
    if not isinstance(clusters, dict):
        raise ConfigError("cluster map must be a JSON object")
    if brand_id not in clusters:
        raise ConfigError(f"brand {brand_id!r} has no cluster in {path}")
    return {oid for oid, c in clusters.items() if c == clusters[brand_id]}


def cmd_target(args, settings: Settings, manifest: RunManifest, file_values: Dict[str, Any]) -> List[Path]:
    overrides = {"brand_id": args.brand, "target_fraction": args.fraction, "corpus_scope": args.scope}
    if "corpus_scope" not in file_values and args.scope is None:
        overrides["corpus_scope"] = settings.corpus_scope
    cfg = CampaignConfig.from_dict(file_values, overrides)
    manifest.config = cfg.to_dict()

    ws = _workspace(args, settings, manifest)
    positives = _positives(args.clusters, cfg.brand_id, manifest) if args.clusters else None
    report = rank_users(ws, cfg, positives)
    payload = report.to_dict()
    TargetReportModel.model_validate(payload)
    return [
        write_json(args.out / "target_report.json", payload),
        write_text(args.out / "target_report.txt", report.summary_text()),
    ]


def _report_text(summary: dict, table, clouds, top: int = 20) -> str:
    lines = ["Dataset summary"]
    lines.extend(f"  {k}: {v}" for k, v in summary.items())
    lines += ["", "Average match (user group x page topic class)", table.frame().round(6).to_string()]
    for name, cloud in clouds.items():
        head = ", ".join(f"{t} ({c})" for t, c in cloud.terms[:top])
        lines += ["", f"Top terms: {name}", f"  {head or '(empty)'}"]
    return "\n".join(lines) + "\n"


def cmd_report(args, settings: Settings, manifest: RunManifest) -> List[Path]:
    spec = POSTS_ONLY_SPEC
    if args.spec:
        manifest.add_input("spec", args.spec)
        raw = read_json_file(args.spec, "similarity spec")
        if not isinstance(raw, dict) or not isinstance(raw.get("categories"), dict):
            raise ConfigError("similarity spec must be an object with a 'categories' object")
        spec = SimilaritySpec.from_dict(raw["categories"])
    manifest.add_input("classes", args.classes)
    classes = load_class_map(args.classes)
    manifest.config = {"categories": spec.to_dict(), "top_terms": args.top_terms}

    ws = _workspace(args, settings, manifest)
    table = group_match_table(ws, classes, spec, settings.corpus_scope)
    clouds = term_clouds(ws, args.top_terms)
    summary = dataset_summary(ws.dataset)
    for d in table.drops:
        logger.warning("group table: %s: %s", d.item, d.reason)

    written = [
        write_json(args.out / "group_match.json", table.to_dict()),
        write_json(args.out / "term_clouds.json", {k: v.to_list() for k, v in clouds.items()}),
        write_text(args.out / "report.txt", _report_text(summary, table, clouds)),
    ]
    if args.plots:
        from lib.plots import group_match_svg
        written.append(group_match_svg(table, args.out / "group_match.svg"))
    return written


def cmd_synth(args, settings: Settings, manifest: RunManifest) -> List[Path]:
    manifest.add_input("spec", args.spec)
    spec = SynthSpec.load(args.spec)
    manifest.config = {"seed": args.seed, "spec": spec.model_dump(mode="json")}
    return write_fixture(generate(spec, args.seed), args.out)


# ---------------------------
# Main
# ---------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s", force=True)
    try:
        settings, file_values = _settings(args)
        if not args.verbose:
            logging.getLogger().setLevel(settings.log_level)
        manifest = RunManifest(subcommand=args.command, settings=settings.to_dict())
        if args.command == "target":
            written = cmd_target(args, settings, manifest, file_values)
        else:
            written = {
                "ingest": cmd_ingest,
                "index": cmd_index,
                "graph": cmd_graph,
                "report": cmd_report,
                "synth": cmd_synth,
            }[args.command](args, settings, manifest)
        for p in written:
            manifest.record(p)
        manifest.finish(args.out)
        return 0
    except InputError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except BrandMatchError as e:
        logger.error("%s: %s", type(e).__name__, e)
        logger.debug("traceback", exc_info=True)
        return e.exit_code
    except Exception as e:
        logger.error("internal error: %s", e)
        logger.debug("traceback", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
