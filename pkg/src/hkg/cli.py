"""Command-line driver: build, degrade, score, metrics, serve.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Statistics go to
stdout, diagnostics to stderr; every subcommand is deterministic given its
flags and seeds.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import analytics, store
from .corpus import CorpusError, load_corpus
from .extraction import ExtractionError, TupleSet, load_gazetteer, run_pipeline
from .graph import CentralConceptParams, GraphError, build_hkg
from .quality import (
    DegradationSpec,
    MatchCriterion,
    QualityError,
    degrade,
    score,
)
from .store import HkgArtifact, StoreError, TupleSetArtifact


class StageError(Exception):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(message)
        self.stage = stage


def _require_file(parser: argparse.ArgumentParser, flag: str, path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        parser.error(f"{flag}: file not found: {path}")
    return p


def _require_dir(parser: argparse.ArgumentParser, flag: str, path: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        parser.error(f"{flag}: directory not found: {path}")
    return p


def _load_tuples(path: Path, stage: str) -> tuple[TupleSet, store.Artifact]:
    try:
        artifact = store.load(path)
    except StoreError as exc:
        raise StageError(stage, str(exc)) from exc
    if isinstance(artifact, HkgArtifact):
        return artifact.hkg.detail.tuples(), artifact
    if isinstance(artifact, TupleSetArtifact):
        return artifact.tuples, artifact
    raise StageError(stage, f"artifact {path} holds no tuples (kind mismatch)")


def cmd_build(args: argparse.Namespace) -> int:
    try:
        corpus = load_corpus(args.manifest)
    except CorpusError as exc:
        raise StageError("corpus", str(exc)) from exc
    try:
        gazetteer, aliases = load_gazetteer(args.gazetteer)
        tuples = run_pipeline(corpus, gazetteer, aliases)
    except (ExtractionError, OSError, json.JSONDecodeError) as exc:
        raise StageError("extraction", str(exc)) from exc
    try:
        params = CentralConceptParams(
            min_degree=args.min_degree, max_count=args.max_count, relax_ties=args.relax_ties
        )
        hkg = build_hkg(corpus, tuples, params)
    except GraphError as exc:
        raise StageError("hkg", str(exc)) from exc
    try:
        digest = store.save(HkgArtifact(corpus=corpus, hkg=hkg), args.out)
    except StoreError as exc:
        raise StageError("store", str(exc)) from exc
    print(f"content_hash {digest}")
    print(
        f"nodes {len(hkg.detail.nodes)} edges {len(hkg.detail.edges)} "
        f"tuples {len(tuples)} documents {len(corpus)}"
    )
    for doc in corpus.ordered_documents():
        print(f"minimap {doc.doc_id} {len(hkg.minimaps[doc.doc_id])}")
    return 0


def cmd_degrade(args: argparse.Namespace) -> int:
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
            spec = DegradationSpec.from_dict(raw)
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise StageError("config", f"cannot read degradation config: {exc}") from exc
        except QualityError as exc:
            raise StageError("config", str(exc)) from exc
    else:
        try:
            spec = DegradationSpec(
                target_precision=args.precision, target_recall=args.recall, seed=args.seed
            )
        except QualityError as exc:
            raise StageError("config", str(exc)) from exc
    gold_tuples, gold_artifact = _load_tuples(args.gold, "load")
    try:
        degraded = degrade(gold_tuples, spec)
        report = score(degraded, gold_tuples, MatchCriterion(theta=1.0))
    except QualityError as exc:
        raise StageError("degrade", str(exc)) from exc
    try:
        if isinstance(gold_artifact, HkgArtifact):
            rebuilt = build_hkg(gold_artifact.corpus, degraded, gold_artifact.hkg.params)
            artifact: store.Artifact = HkgArtifact(
                corpus=gold_artifact.corpus, hkg=rebuilt, quality=report, degradation=spec
            )
        else:
            artifact = TupleSetArtifact(tuples=degraded)
        digest = store.save(artifact, args.out)
    except (StoreError, GraphError) as exc:
        raise StageError("store", str(exc)) from exc
    print(f"content_hash {digest}")
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    system_tuples, _ = _load_tuples(args.system, "load")
    gold_tuples, _ = _load_tuples(args.gold, "load")
    try:
        report = score(system_tuples, gold_tuples, MatchCriterion(theta=args.theta))
    except QualityError as exc:
        raise StageError("score", str(exc)) from exc
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def _session_report(metrics: analytics.SessionMetrics) -> dict:
    d = metrics.to_dict()
    # The full matrix is served by the API; the CLI reports column sums.
    matrix = metrics.heatmap
    d["heatmap_column_sums"] = {
        view: float(matrix[:, i].sum()) / matrix.shape[0] for i, view in enumerate(analytics.VIEWS)
    }
    del d["heatmap"]
    return d


def cmd_metrics(args: argparse.Namespace) -> int:
    try:
        events = store.read_events(args.log)
    except StoreError as exc:
        raise StageError("log", str(exc)) from exc
    by_session: dict[str, list[analytics.InteractionEvent]] = {}
    for event in events:
        by_session.setdefault(event.session, []).append(event)
    session_metrics: dict[str, analytics.SessionMetrics] = {}
    try:
        for session_id in sorted(by_session):
            ordered = sorted(by_session[session_id], key=lambda e: e.t_ms)
            session_metrics[session_id] = analytics.session_metrics(ordered)
        report = {
            "sessions": {sid: _session_report(m) for sid, m in session_metrics.items()},
            "aggregate": analytics.aggregate(list(session_metrics.values())).to_dict(),
        }
    except analytics.AnalysisError as exc:
        raise StageError("analytics", str(exc)) from exc
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.csv is not None:
        _write_csv(args.csv, session_metrics)
    return 0


def _write_csv(path: str, session_metrics: dict[str, analytics.SessionMetrics]) -> None:
    fields = ["session", "nc", "ec", "v", "vt_s", "duration_s"] + [
        f"frac_{view.lower()}" for view in analytics.VIEWS
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for sid in sorted(session_metrics):
            m = session_metrics[sid]
            writer.writerow(
                [sid, m.nc, m.ec, m.v, m.vt_s, m.duration_s]
                + [m.view_fractions.get(view, 0.0) for view in analytics.VIEWS]
            )


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import ServerConfig, ServerError, serve

    config = ServerConfig(
        artifacts_dir=Path(args.artifacts),
        port=args.port,
        log_path=Path(args.log),
        host=args.host,
        hide_threshold=args.hide_threshold,
        ui_dir=Path(args.ui) if args.ui else None,
    )
    try:
        serve(config)
    except ServerError as exc:
        raise StageError("serve", str(exc)) from exc
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hkg", description="Hierarchical knowledge graph pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="corpus -> extraction -> layered graph artifact")
    p_build.add_argument("--manifest", required=True, help="corpus manifest JSON")
    p_build.add_argument("--gazetteer", required=True, help="gazetteer/alias JSON")
    p_build.add_argument("--out", required=True, help="output artifact path")
    p_build.add_argument("--min-degree", type=int, default=3)
    p_build.add_argument("--max-count", type=int, default=15)
    p_build.add_argument("--relax-ties", action="store_true")
    p_build.set_defaults(func=cmd_build)

    p_degrade = sub.add_parser("degrade", help="synthesize a lower-quality variant of a gold artifact")
    p_degrade.add_argument("--gold", required=True, help="gold artifact path")
    p_degrade.add_argument("--out", required=True, help="output artifact path")
    p_degrade.add_argument("--config", help='JSON config {"precision","recall","seed"}')
    p_degrade.add_argument("--precision", type=float, default=None)
    p_degrade.add_argument("--recall", type=float, default=None)
    p_degrade.add_argument("--seed", type=int, default=0)
    p_degrade.set_defaults(func=cmd_degrade)

    p_score = sub.add_parser("score", help="precision/recall of a system artifact against gold")
    p_score.add_argument("--system", required=True)
    p_score.add_argument("--gold", required=True)
    p_score.add_argument("--theta", type=float, default=0.5, help="relation Jaccard threshold")
    p_score.set_defaults(func=cmd_score)

    p_metrics = sub.add_parser("metrics", help="per-session and aggregate log measures")
    p_metrics.add_argument("--log", required=True, help="event log (JSON Lines)")
    p_metrics.add_argument("--csv", help="also write one CSV row per session")
    p_metrics.set_defaults(func=cmd_metrics)

    p_serve = sub.add_parser("serve", help="serve graph artifacts over HTTP")
    p_serve.add_argument("--artifacts", required=True, help="directory of artifact JSON files")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--log", default="events.jsonl", help="event log path")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--hide-threshold", type=int, default=2)
    p_serve.add_argument("--ui", help="static UI directory to mount at /")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command == "build":
        _require_file(parser, "--manifest", args.manifest)
        _require_file(parser, "--gazetteer", args.gazetteer)
    elif args.command == "degrade":
        _require_file(parser, "--gold", args.gold)
        if args.config is not None:
            _require_file(parser, "--config", args.config)
        elif args.precision is None or args.recall is None:
            parser.error("degrade requires --config or both --precision and --recall")
    elif args.command == "score":
        _require_file(parser, "--system", args.system)
        _require_file(parser, "--gold", args.gold)
    elif args.command == "metrics":
        _require_file(parser, "--log", args.log)
    elif args.command == "serve":
        _require_dir(parser, "--artifacts", args.artifacts)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
