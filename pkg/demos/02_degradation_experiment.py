"""Synthesize lower-quality tuple sets at target precision/recall points.

The degradation operator drops gold tuples (recall) and injects spurious
tuples over unused entity pairs (precision), deterministically in the
seed. The grid below includes the two operating points measured for the
hand-corrected vs automatic graphs: history (P=0.7, R=0.31) and politics
(P=0.56, R=0.33).
"""

from pathlib import Path

from hkg import (
    DegradationSpec,
    MatchCriterion,
    degrade,
    load_corpus,
    load_gazetteer,
    run_pipeline,
    score,
)
from hkg.quality import degradation_counts

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    corpus = load_corpus(FIXTURES / "manifest.json")
    gazetteer, aliases = load_gazetteer(FIXTURES / "gazetteer.json")
    gold = run_pipeline(corpus, gazetteer, aliases)
    print(f"gold tuple set: {len(gold)} tuples\n")

    exact = MatchCriterion(theta=1.0)
    print(f"{'target P':>9} {'target R':>9} {'kept':>6} {'spurious':>9} {'meas P':>8} {'meas R':>8}")
    grid = [(0.9, 0.8), (0.7, 0.5), (0.7, 0.31), (0.56, 0.33), (0.5, 0.2)]
    for p, r in grid:
        spec = DegradationSpec(p, r, seed=42)
        kept, spurious = degradation_counts(len(gold), spec)
        degraded = degrade(gold, spec)
        report = score(degraded, gold, exact)
        print(
            f"{p:>9.2f} {r:>9.2f} {kept:>6} {spurious:>9} "
            f"{report.precision:>8.3f} {report.recall:>8.3f}"
        )

    print("\nsame seed, same output:")
    spec = DegradationSpec(0.7, 0.31, seed=42)
    a, b = degrade(gold, spec), degrade(gold, spec)
    print(f"  hashes equal: {a.content_hash() == b.content_hash()}")

    print("\nat reference scale (2,957 gold tuples, P=0.7, R=0.31):")
    kept, spurious = degradation_counts(2957, spec)
    print(f"  kept {kept}, injected {spurious}, system size {kept + spurious}")
    print(f"  realized P = {kept / (kept + spurious):.4f}, R = {kept / 2957:.4f}")


if __name__ == "__main__":
    main()
