"""Evaluation reports: per-instance primal-gap tables and method summaries.

The summary follows the mean (SE) presentation: one row per method with
its mean primal gap, standard error, and the diversity index of its gap
distribution across instances.
"""

from __future__ import annotations

import csv
import io

from .errors import IoError
from .metrics import diversity_index, summarize
from .storage import atomic_write_text

PER_INSTANCE_COLUMNS = ("method", "instance", "objective", "z_ref", "primal_gap")
SUMMARY_COLUMNS = ("method", "mean_primal_gap", "std_error", "diversity_index")


def per_instance_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=PER_INSTANCE_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in PER_INSTANCE_COLUMNS})
    return buf.getvalue()


def read_per_instance_csv(path: str) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            missing = set(PER_INSTANCE_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise IoError(f"{path}: missing columns {sorted(missing)}")
            rows = []
            for raw in reader:
                rows.append({
                    "method": raw["method"],
                    "instance": raw["instance"],
                    "objective": float(raw["objective"]),
                    "z_ref": float(raw["z_ref"]),
                    "primal_gap": float(raw["primal_gap"]),
                })
            return rows
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}")


def summarize_rows(rows: list[dict]) -> list[dict]:
    """One summary row per method, in first-appearance order."""
    methods: dict[str, list[float]] = {}
    for row in rows:
        methods.setdefault(row["method"], []).append(row["primal_gap"])
    out = []
    for method, gaps in methods.items():
        stats = summarize(gaps)
        out.append({
            "method": method,
            "mean_primal_gap": stats["mean"],
            "std_error": stats["std_error"],
            "diversity_index": diversity_index(gaps) if len(gaps) > 1 else 0.0,
        })
    return out


def summary_csv(summary: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS)
    writer.writeheader()
    for row in summary:
        writer.writerow({
            "method": row["method"],
            "mean_primal_gap": repr(row["mean_primal_gap"]),
            "std_error": repr(row["std_error"]),
            "diversity_index": repr(row["diversity_index"]),
        })
    return buf.getvalue()


def summary_markdown(summary: list[dict]) -> str:
    """Aligned mean (SE) table."""
    header = ("Method", "Mean primal gap (SE)", "DI")
    body = [
        (row["method"],
         f"{row['mean_primal_gap']:.4f} ({row['std_error']:.4f})",
         f"{row['diversity_index']:.3f}")
        for row in summary
    ]
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
              for i in range(3)]
    def fmt(cells):
        return "| " + " | ".join(c.ljust(widths[i]) for i, c in enumerate(cells)) + " |"
    lines = [fmt(header),
             "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines += [fmt(r) for r in body]
    return "\n".join(lines) + "\n"


def write_report(out_dir: str, rows: list[dict]) -> dict:
    """Write per-instance CSV, summary CSV, and summary markdown."""
    import os
    summary = summarize_rows(rows)
    paths = {
        "per_instance": os.path.join(out_dir, "per_instance.csv"),
        "summary_csv": os.path.join(out_dir, "summary.csv"),
        "summary_md": os.path.join(out_dir, "summary.md"),
    }
    atomic_write_text(paths["per_instance"], per_instance_csv(rows))
    atomic_write_text(paths["summary_csv"], summary_csv(summary))
    atomic_write_text(paths["summary_md"], summary_markdown(summary))
    return paths
