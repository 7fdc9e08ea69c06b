"""
Stage runner shared by the ``analyze``, ``normalize`` and ``certify`` commands.

A run is a fixed sequence of stages; each produces a ``StageResult`` with a
status, a JSON payload and the certificates it found. Certified violations
do not stop the independent checks that follow them, but they do stop the
synthesis of a multiplicative basis.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any, Dict, List, Literal, Mapping, Optional

from pydantic import BaseModel, Field

from src.algebra import linalg
from src.algebra.monomials import MonomialFormatError, RadMonomial, UnsolvableRoot
from src.algebra.scalars import ExactScalar, ScalarFormatError
from src.common.certificates import Certificate, certificate, now_iso
from src.pipeline.classifier import (
    ClassifiedBasis,
    ConditionReport,
    basis_from_matrices,
    build_reduced_basis,
    check_basis_conditions,
)
from src.pipeline.poset_graph import (
    build_gamma,
    build_poset,
    check_gamma_conditions,
    check_poset_conditions,
    gamma_to_dot,
)
from src.pipeline.presentation import (
    PresentationDoc,
    SpacedModulePresentation,
    conjugate,
    from_document,
    to_document,
    validate,
)
from src.pipeline.rescaler import (
    RescalingError,
    apply_rescaling,
    exponent_system,
    solve_rescaling,
    verify_multiplicative,
    weight_kernel,
)
from src.pipeline.triangular import triangulate

logger = logging.getLogger(__name__)

STAGES = ("validate", "triangular", "classification", "basis", "poset", "arrow_graph", "weights", "rescaling")
CLASSIFICATION_CHECKS = {
    "endomorphism_form",
    "two_step_back_map",
    "full_endomorphism_radical",
    "single_direction_diagonal",
    "lower_set_containment",
    "hom_form",
}
COMMAND_STAGES = {
    "analyze": STAGES[:6],
    "certify": STAGES[:7],
    "normalize": STAGES,
}

Status = Literal["ok", "certified-violation", "error", "skipped"]


class StageResult(BaseModel):
    name: str
    status: Status = "ok"
    message: str = ""
    payload: Dict[str, Any] = Field(default_factory=dict)
    certificates: List[Certificate] = Field(default_factory=list)


class RunReport(BaseModel):
    """Everything a command prints: stages in pipeline order and the final result."""

    command: str
    input: Optional[str] = None
    field: Optional[str] = None
    mode: Optional[str] = None
    started_at: str = Field(default_factory=now_iso)
    stages: List[StageResult] = Field(default_factory=list)
    final: Optional[Dict[str, Any]] = None

    @property
    def certificates(self) -> List[Certificate]:
        return [c for s in self.stages for c in s.certificates]

    @property
    def exit_code(self) -> int:
        statuses = {s.status for s in self.stages}
        if "error" in statuses:
            return 1
        if "certified-violation" in statuses:
            return 2
        return 0

    def stage(self, name: str) -> StageResult:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)


def _result(name: str, certs: List[Certificate], payload: Dict[str, Any], message: str = "") -> StageResult:
    status: Status = "certified-violation" if certs else "ok"
    return StageResult(name=name, status=status, message=message, payload=payload, certificates=certs)


def _basis_payload(b: ClassifiedBasis) -> Dict[str, Any]:
    return {
        "morphisms": [m.to_json(b.field_spec) for m in b.morphisms],
        "excluded": [m.label for m in b.excluded],
        "double_counts": {f"{a}->{c}": n for (a, c), n in sorted(b.double_counts.items()) if n},
        "long_double_factors": {k: list(v) for k, v in b.long_double_factors.items()},
        "unfactored_long_doubles": list(b.unfactored_long_doubles),
        "conditions": b.conditions.model_dump(mode="json") if b.conditions else None,
        "rank": b.rank,
    }


def _condition_certificates(report: Optional[ConditionReport]) -> List[Certificate]:
    if report is None or report.accepted:
        return []
    failed = [k for k in "abcde" if not getattr(report, k).passed]
    if failed == ["e"] and report.char2_exemption:
        return []
    return [
        certificate(
            "basis_conditions",
            failed,
            f"basis fails condition(s) {', '.join(failed)}",
            witnesses={k: getattr(report, k).witness for k in failed},
        )
    ]


def run_pipeline(
    p: SpacedModulePresentation,
    command: str = "analyze",
    mode: Optional[str] = None,
    max_product_length: int = 4,
    input_path: Optional[str] = None,
    logger_: Optional[logging.Logger] = None,
) -> RunReport:
    """
    Run the stages of ``command`` on a presentation.

    Parameters
    ----------
    p : SpacedModulePresentation
        Parsed input, already moved to the requested field.
    command : str
        ``"analyze"``, ``"certify"`` or ``"normalize"``.
    mode : str, optional
        Rescaling mode; ``None`` picks ``prime`` over F_p and ``numeric`` over Q.
    max_product_length : int
        Longest path multiplied by the rank-additivity condition.

    Returns
    -------
    RunReport
        Stages in pipeline order; the ``final`` entry holds the basis
        (``normalize``) or the weight functions (``certify``).
    """
    log = logger_ or logger
    wanted = COMMAND_STAGES[command]
    report = RunReport(command=command, input=input_path, field=p.field.label, mode=mode)

    def skip(name: str, why: str) -> None:
        if name in wanted:
            report.stages.append(StageResult(name=name, status="skipped", message=why))

    log.info("stage validate")
    issues = validate(p)
    if not issues.valid:
        report.stages.append(
            StageResult(
                name="validate",
                status="error",
                message=f"{len(issues.issues)} validation issue(s)",
                payload=issues.model_dump(mode="json"),
            )
        )
        for issue in issues.issues:
            log.error("%s: %s", issue.kind, issue.message)
        for name in wanted[1:]:
            skip(name, "invalid presentation")
        return report
    report.stages.append(
        StageResult(
            name="validate",
            payload={"objects": {o.name: d for o, d in zip(p.objects, p.dims)}, "pairs": len(p.rad)},
        )
    )

    log.info("stage triangular")
    tri = triangulate(p, log)
    report.stages.append(
        _result(
            "triangular",
            tri.certificates,
            {
                "filtrations": {k: list(f.dims) for k, f in tri.filtrations.items()},
                "bases": {
                    k: [[p.field.scalar(x).to_json() for x in v] for v in b.vectors] for k, b in tri.bases.items()
                },
            },
        )
    )
    if not tri.complete:
        for name in wanted[2:]:
            skip(name, "no triangular basis")
        return report

    log.info("stage classification")
    b = build_reduced_basis(tri.presentation, tri.bases, max_product_length, log)
    cls_certs = [c for c in b.certificates if c.check in CLASSIFICATION_CHECKS]
    report.stages.append(
        _result(
            "classification",
            cls_certs,
            {
                "endomorphisms": {k: v.to_json() for k, v in b.endo.items()},
                "pairs": {
                    f"{a}->{c}": hc.to_json()
                    for (a, c), hc in sorted(b.classifications.items())
                    if a != c and hc.steps
                },
            },
        )
    )
    basis_certs = [c for c in b.certificates if c.check not in CLASSIFICATION_CHECKS]
    basis_certs.extend(_condition_certificates(b.conditions))
    report.stages.append(_result("basis", basis_certs, _basis_payload(b)))

    log.info("stage poset")
    poset = build_poset(b, log)
    report.stages.append(_result("poset", check_poset_conditions(poset), poset.to_json()))

    log.info("stage arrow_graph")
    gamma = build_gamma(b, log)
    payload = gamma.to_json()
    payload["dot"] = gamma_to_dot(gamma)
    report.stages.append(_result("arrow_graph", check_gamma_conditions(gamma, poset), payload))

    for cert in report.stage("poset").certificates + report.stage("arrow_graph").certificates:
        log.warning("%s: %s", cert.check, cert.message)
    if "weights" not in wanted:
        return report

    log.info("stage weights")
    try:
        system = exponent_system(b, gamma, mode, log)
    except ValueError as exc:
        report.stages.append(StageResult(name="weights", status="error", message=str(exc)))
        skip("rescaling", "no exponent system")
        return report
    report.mode = system.mode
    functions, obstructions = weight_kernel(system)
    weights = _result(
        "weights",
        obstructions,
        {
            "system": system.to_json(),
            "weight_functions": [w.model_dump(mode="json") for w in functions],
        },
        "; ".join(system.notices),
    )
    report.stages.append(weights)
    for cert in obstructions:
        log.warning("%s: %s", cert.check, cert.message)
    if command == "certify":
        report.final = {
            "weight_functions": weights.payload["weight_functions"],
            "obstructions": [c.model_dump(mode="json") for c in obstructions],
        }
        return report

    log.info("stage rescaling")
    if any(s.status != "ok" for s in report.stages):
        skip("rescaling", "certified violations halt synthesis")
        return report
    try:
        solution = solve_rescaling(system)
    except UnsolvableRoot as exc:
        cert = certificate("root_existence", [], str(exc), congruence=exc.congruence)
        report.stages.append(_result("rescaling", [cert], {}))
        return report
    except RescalingError as exc:
        report.stages.append(StageResult(name="rescaling", status="error", message=str(exc)))
        return report
    if isinstance(solution, Certificate):
        report.stages.append(_result("rescaling", [solution], {}))
        return report
    rescaled = apply_rescaling(b, solution, system)
    multiplicative, rank = verify_multiplicative(rescaled)
    if not multiplicative:
        report.stages.append(
            StageResult(
                name="rescaling",
                status="error",
                message=f"rescaled basis is not multiplicative (rank {rank})",
                payload=rescaled.to_json(),
            )
        )
        return report
    report.stages.append(StageResult(name="rescaling", payload=solution.to_json()))
    report.final = {
        "presentation": to_document(tri.presentation),
        "basis": rescaled.to_json(),
        "rank": rank,
    }
    log.info("multiplicative basis of rank %d", rank)
    return report


# ---------------------------------------------------------------------------
# verification-only path
# ---------------------------------------------------------------------------


class VerificationResult(BaseModel):
    multiplicative: bool
    rank: int
    exact: bool = Field(..., description="Conditions were re-checked on rescaled matrices")
    in_radical: bool = True
    conditions: Optional[ConditionReport] = None
    problems: List[str] = Field(default_factory=list)

    @property
    def accepted(self) -> bool:
        if not self.multiplicative or not self.in_radical:
            return False
        return self.conditions.accepted if self.conditions is not None else True


def _parse_value(text: Any, mode: str, p: SpacedModulePresentation):
    if mode == "prime":
        return ExactScalar.parse(str(text), p.field)
    return RadMonomial.parse(str(text))


def _as_rational(value: Any, mode: str) -> Optional[Any]:
    if mode == "prime":
        return value
    q = value.to_rational()
    return Fraction(q) if q is not None else None


def verify_normalized(document: Mapping[str, Any], max_product_length: int = 4) -> VerificationResult:
    """
    Re-check a ``normalize`` result from its JSON form alone.

    Every coefficient must be one and the rank at most 2. When every vector
    scale is a field element, the presentation is moved into the rescaled
    coordinates and conditions a) to e) are evaluated on the emitted
    morphism matrices, which must lie in the radical spaces.

    Raises
    ------
    ValueError
        When the document is not a ``normalize`` result.
    """
    final = document.get("final", document) or {}
    if "presentation" not in final or "basis" not in final:
        raise ValueError("document carries no normalized basis")
    p = from_document(PresentationDoc.model_validate(final["presentation"]))
    basis = final["basis"]
    mode = basis.get("mode", "numeric")
    problems: List[str] = []
    try:
        scales = {key: _parse_value(v, mode, p) for key, v in basis.get("vectors", {}).items()}
        morphisms = [
            (m, [(int(i), int(j), _parse_value(c, mode, p)) for i, j, c in m["entries"]])
            for m in basis.get("morphisms", [])
        ]
    except (KeyError, ScalarFormatError, MonomialFormatError) as exc:
        raise ValueError(f"malformed basis: {exc}") from exc

    all_units = True
    for m, entries in morphisms:
        for i, j, c in entries:
            if not c.is_one:
                all_units = False
                problems.append(f"{m['label']}: coefficient {c} at ({i},{j})")
    domain = p.domain
    matrices: Dict[tuple, list] = {}
    for m, entries in morphisms:
        rows, cols = p.dim(m["to"]), p.dim(m["from"])
        data = [[domain.zero] * cols for _ in range(rows)]
        for i, j, _ in entries:
            data[i - 1][j - 1] = domain.one
        matrices.setdefault((m["from"], m["to"]), []).append(linalg.matrix(data, rows, cols, domain))
    rank = max((linalg.rank(x) for mats in matrices.values() for x in mats), default=0)
    multiplicative = all_units and rank <= 2

    rational = {k: _as_rational(v, mode) for k, v in scales.items()}
    if any(v is None for v in rational.values()):
        problems.append("vector scales leave the field; conditions a)-e) not re-checked")
        return VerificationResult(multiplicative=multiplicative, rank=rank, exact=False, problems=problems)

    changes = {}
    for o, d in zip(p.objects, p.dims):
        diag = [[domain.zero] * d for _ in range(d)]
        for i in range(d):
            diag[i][i] = p.field.element(rational.get(f"{o.name}_{i + 1}", 1))
        changes[o.name] = linalg.matrix(diag, d, d, domain)
    rescaled = conjugate(p, changes)
    in_radical = True
    for (a, c), mats in matrices.items():
        space = rescaled.rad_space(a, c)
        for x in mats:
            if not space.contains(x):
                in_radical = False
                problems.append(f"a morphism {a}->{c} is not in rad({a},{c})")
    conditions = check_basis_conditions(basis_from_matrices(rescaled, matrices), max_product_length)
    return VerificationResult(
        multiplicative=multiplicative,
        rank=rank,
        exact=True,
        in_radical=in_radical,
        conditions=conditions,
        problems=problems,
    )


__all__ = [
    "COMMAND_STAGES",
    "RunReport",
    "STAGES",
    "StageResult",
    "VerificationResult",
    "run_pipeline",
    "verify_normalized",
]
