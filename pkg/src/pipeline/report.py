"""
Markdown rendering of run reports.

Every CLI run writes ``report.md`` next to its manifest: a stage table, the
certificates found and, for ``normalize``, the multiplicative basis. The
``witness`` command gets a parameter table and its pairwise comparisons.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.pipeline.runner import RunReport
from src.pipeline.witnesses import WitnessReport


_NUMBER = re.compile(r"-?\d+(/\d+)?")


def _format_table(rows: List[List[str]], headers: List[str]) -> str:
    """
    Markdown table padded to column width.

    Columns whose cells are all integers or ``a/b`` fractions are right
    aligned, so matrix entries line up under their ``e<k>`` header.
    """
    cells = [[cell.replace("|", "\\|") for cell in row] for row in rows]
    widths = [max([3, len(h)] + [len(row[k]) for row in cells]) for k, h in enumerate(headers)]
    right = [bool(cells) and all(_NUMBER.fullmatch(row[k]) for row in cells) for k in range(len(headers))]

    def line(values: List[str]) -> str:
        padded = [v.rjust(w) if r else v.ljust(w) for v, w, r in zip(values, widths, right)]
        return "| " + " | ".join(padded) + " |"

    rule = ["-" * (w - 1) + ":" if r else "-" * w for w, r in zip(widths, right)]
    return "\n".join([line(headers), "| " + " | ".join(rule) + " |"] + [line(row) for row in cells])


def _basis_section(final: Dict[str, Any]) -> List[str]:
    basis = final.get("basis", {})
    lines = [f"## Multiplicative basis (rank {final.get('rank', 0)})", ""]
    vectors = basis.get("vectors", {})
    if vectors:
        lines.append(_format_table([[k, str(v)] for k, v in vectors.items()], ["vector", "scale"]))
        lines.append("")
    rows = []
    for m in basis.get("morphisms", []):
        positions = ", ".join(f"e{i}{j}" for i, j in m.get("positions", []))
        rows.append([m["label"], m["kind"], positions, str(m.get("scale", ""))])
    if rows:
        lines.append(_format_table(rows, ["morphism", "kind", "positions", "scale"]))
        lines.append("")
    return lines


def render_markdown(report: RunReport, title: Optional[str] = None) -> str:
    """Human-readable summary of a pipeline run."""
    md_lines: List[str] = []
    md_lines.append(f"# {title or report.command.capitalize() + ' report'}")
    md_lines.append("")
    md_lines.append(f"- Input: {report.input or '-'}")
    md_lines.append(f"- Field: {report.field or '-'}")
    if report.mode:
        md_lines.append(f"- Mode: {report.mode}")
    md_lines.append(f"- Started: {report.started_at}")
    md_lines.append(f"- Exit code: {report.exit_code}")
    md_lines.append("")
    md_lines.append("## Stages")
    md_lines.append("")
    rows = [[s.name, s.status, str(len(s.certificates)), s.message] for s in report.stages]
    md_lines.append(_format_table(rows, ["stage", "status", "certificates", "note"]))
    md_lines.append("")

    certs = report.certificates
    md_lines.append("## Certificates")
    md_lines.append("")
    if certs:
        rows = []
        for c in certs:
            handle = ""
            if c.witness_handle is not None:
                handle = c.witness_handle.family
                if c.witness_handle.layers:
                    handle += " " + ",".join(str(x) for x in c.witness_handle.layers)
            rows.append([c.check, ", ".join(c.elements), c.message, handle])
        md_lines.append(_format_table(rows, ["check", "elements", "message", "witness"]))
    else:
        md_lines.append("No violations found.")
    md_lines.append("")

    if report.final and "basis" in report.final:
        md_lines.extend(_basis_section(report.final))
    elif report.final and "weight_functions" in report.final:
        md_lines.append("## Weight functions")
        md_lines.append("")
        functions = report.final["weight_functions"]
        if functions:
            rows = [[" ".join(str(x) for x in w["kernel"]), w["residual"]] for w in functions]
            md_lines.append(_format_table(rows, ["kernel vector", "residual"]))
        else:
            md_lines.append("The exponent system has trivial left kernel.")
        md_lines.append("")
    return "\n".join(md_lines)


def render_witness_markdown(report: WitnessReport) -> str:
    md_lines = [f"# Witness family {report.family}", ""]
    md_lines.append(f"- Objects: {', '.join(report.objects)}")
    if report.layers:
        md_lines.append(f"- Layers: {', '.join(str(x) for x in report.layers)}")
    md_lines.append(f"- Field: {report.field}")
    md_lines.append("")
    for space in report.spaces:
        md_lines.append(f"## Parameter {space.parameter}")
        md_lines.append("")
        headers = ["row"] + [f"e{k + 1}" for k in range(len(space.h[0]) if space.h else 0)]
        rows = [[label] + [str(x) for x in row] for label, row in zip(space.rows, space.h)]
        md_lines.append(_format_table(rows, headers))
        md_lines.append("")
    md_lines.append("## Comparisons")
    md_lines.append("")
    rows = [[c.left, c.right, "isomorphic" if c.isomorphic else "not isomorphic"] for c in report.comparisons]
    md_lines.append(_format_table(rows, ["left", "right", "result"]))
    md_lines.append("")
    return "\n".join(md_lines)


def write_report(text: str, output_path: Path) -> None:
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(text, encoding="utf-8")
