"""Replay an interaction log and derive the behavioral measures.

Computes node/edge clicks, article views and view time, per-view dwell
fractions, and the 100-bin usage heatmap, then formats them next to the
reference percentages from the original user study (display only).
"""

import json
from pathlib import Path

from hkg.analytics import VIEWS, aggregate, session_metrics
from hkg.store import read_events

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def ascii_heatmap(matrix, width: int = 50) -> list[str]:
    shades = " .:-=+*#%@"
    lines = []
    step = matrix.shape[0] // width
    for col, view in enumerate(VIEWS):
        cells = [
            matrix[i * step : (i + 1) * step, col].mean() for i in range(width)
        ]
        row = "".join(shades[min(int(c * (len(shades) - 1)), len(shades) - 1)] for c in cells)
        lines.append(f"  {view:<9} |{row}|")
    return lines


def main() -> None:
    events = read_events(FIXTURES / "session_log.jsonl")
    by_session: dict[str, list] = {}
    for event in events:
        by_session.setdefault(event.session, []).append(event)

    metrics = [session_metrics(evs) for evs in by_session.values()]
    for m in metrics:
        print(f"session {m.session}: nc={m.nc} ec={m.ec} v={m.v} vt={m.vt_s:.0f}s "
              f"duration={m.duration_s:.0f}s")
        for view in VIEWS:
            print(f"  {view:<9} {m.view_fractions.get(view, 0.0):6.1%}")
        print("\nusage over task time (1% bins):")
        print("\n".join(ascii_heatmap(m.heatmap)))

    report = aggregate(metrics)
    print(f"\naggregate over {report.n} session(s)"
          + (" [single session: std forced to 0]" if report.single_session else ""))
    for field, stats in report.fields.items():
        print(f"  {field:<10} mean={stats.mean:8.2f}  std={stats.std:6.2f}")

    reference = json.loads(
        (FIXTURES / "reference_study_metrics.json").read_text(encoding="utf-8")
    )
    print("\nreference view-time percentages (study values, for comparison only):")
    for task, row in reference["view_time_percentages"].items():
        cells = "  ".join(f"{view}={row[view]:.2f}%" for view in VIEWS)
        print(f"  {task:<8} {cells}")


if __name__ == "__main__":
    main()
