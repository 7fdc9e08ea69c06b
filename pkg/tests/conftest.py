"""Shared fixtures: corpus presentations, matrix builders and a scratch settings directory."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.algebra import linalg  # noqa: E402
from src.algebra.scalars import FieldSpec  # noqa: E402
from src.pipeline.presentation import (  # noqa: E402
    PresentationDoc,
    SpacedModulePresentation,
    from_document,
    generate_closure,
    parse,
)

FIXTURES = ROOT / "tests" / "fixtures"
CORPUS = FIXTURES / "corpus"
GOLDEN = FIXTURES / "golden"

CORPUS_ENTRIES = [
    "singleton",
    "double",
    "triple",
    "two_step",
    "one_double",
    "three_doubles",
]


def units(n_rows: int, n_cols: int, *terms: Tuple[int, int, object]) -> List[List[object]]:
    """Matrix rows with ``value`` at each 1-based ``(i, j, value)``."""
    rows: List[List[object]] = [[0] * n_cols for _ in range(n_rows)]
    for i, j, value in terms:
        rows[i - 1][j - 1] = value
    return rows


def strictly_lower(d: int) -> List[List[List[object]]]:
    return [units(d, d, (i, j, 1)) for i in range(2, d + 1) for j in range(1, i)]


def presentation(
    dims: Dict[str, int],
    rad: Dict[Tuple[str, str], Sequence[List[List[object]]]],
    field: object = "Q",
    close: bool = True,
) -> SpacedModulePresentation:
    """Presentation from plain nested lists; closed under composition unless ``close`` is False."""
    doc = {
        "field": field,
        "objects": [{"name": k, "dim": d} for k, d in dims.items()],
        "rad": [{"from": a, "to": b, "matrices": [list(m) for m in mats]} for (a, b), mats in rad.items()],
    }
    p = from_document(PresentationDoc.model_validate(doc))
    return generate_closure(p) if close else p


def as_matrix(p: SpacedModulePresentation, rows: Sequence[Sequence[object]]):
    return linalg.matrix([[p.field.element(x) for x in r] for r in rows], len(rows), len(rows[0]), p.domain)


def load_corpus(name: str, field: FieldSpec | None = None) -> SpacedModulePresentation:
    text = (CORPUS / f"{name}.json").read_text(encoding="utf-8")
    if field is not None:
        doc = json.loads(text)
        doc["field"] = field.to_json()
        text = json.dumps(doc)
    return parse(text)


@pytest.fixture
def corpus_path():
    return lambda name: CORPUS / f"{name}.json"


@pytest.fixture
def config_dir(tmp_path: Path) -> Path:
    cfg = tmp_path / "config"
    cfg.mkdir()
    (cfg / "settings.json").write_text(
        json.dumps({"log_level": "DEBUG", "seed": 0, "mode": "numeric"}), encoding="utf-8"
    )
    return cfg


@pytest.fixture
def logs_dir(tmp_path: Path) -> Path:
    return tmp_path / "logs"


@pytest.fixture
def two_step_context() -> SpacedModulePresentation:
    """Triples ``a``, ``b`` with ``M(a, b)`` everything but ``e13`` and no maps back."""
    everything = [units(3, 3, (i, j, 1)) for i in range(1, 4) for j in range(1, 4) if (i, j) != (1, 3)]
    return presentation(
        {"a": 3, "b": 3},
        {("a", "a"): strictly_lower(3), ("b", "b"): strictly_lower(3), ("a", "b"): everything},
    )


@pytest.fixture
def obstruction_square() -> SpacedModulePresentation:
    """Four doubles in a commuting square whose doubles multiply to 2 around the cycle."""
    e21 = units(2, 2, (2, 1, 1))

    def pencil(lam):
        return [units(2, 2, (1, 1, 1), (2, 2, lam)), e21]

    return presentation(
        {"a": 2, "b": 2, "c": 2, "d": 2},
        {
            ("a", "a"): [e21],
            ("b", "b"): [e21],
            ("c", "c"): [e21],
            ("d", "d"): [e21],
            ("a", "b"): pencil(2),
            ("a", "c"): pencil(1),
            ("b", "d"): pencil(1),
            ("c", "d"): pencil(1),
        },
    )
