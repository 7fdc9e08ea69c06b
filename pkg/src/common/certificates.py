"""
Certificate records shared by every pipeline stage.

A certificate is the data form of a failed necessary condition: it names
the check, the offending elements (objects, poset vertices, positions) and,
where an explicit infinite family explains the failure, a handle that the
``witness`` command can build. Stages collect certificates instead of
raising, so a single run reports everything it found.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, Field


class WitnessHandle(BaseModel):
    """Pointer to a witness family together with the data to instantiate it."""

    family: str = Field(..., description="Family kind understood by build_family")
    objects: List[str] = Field(default_factory=list, description="Context objects, in family order")
    layers: List[int] = Field(default_factory=list, description="Layer indices the family uses")


class Certificate(BaseModel):
    """A certified violation of one necessary condition."""

    check: str
    elements: List[str] = Field(default_factory=list)
    message: str = ""
    witness_handle: Optional[WitnessHandle] = None
    details: Dict[str, Any] = Field(default_factory=dict)


def certificate(
    check: str,
    elements: Sequence[Any],
    message: str,
    family: Optional[str] = None,
    objects: Sequence[str] = (),
    layers: Sequence[int] = (),
    **details: Any,
) -> Certificate:
    handle = None
    if family is not None:
        handle = WitnessHandle(family=family, objects=list(objects), layers=list(layers))
    return Certificate(
        check=check,
        elements=[str(e) for e in elements],
        message=message,
        witness_handle=handle,
        details=details,
    )


@dataclass
class Outcome:
    value: Any = None
    certificate: Optional[Certificate] = None
    flagged: bool = False
    flag_reason: Optional[str] = None


def now_iso() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0, tzinfo=None).isoformat() + "Z"


def flag(reason: str, cert: Optional[Certificate] = None, value: Any = None) -> Outcome:
    return Outcome(value=value, certificate=cert, flagged=True, flag_reason=reason)


def ok(value: Any) -> Outcome:
    return Outcome(value=value)


__all__ = ["Certificate", "Outcome", "WitnessHandle", "certificate", "flag", "now_iso", "ok"]
