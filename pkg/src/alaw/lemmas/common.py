"""Verdict records and the assumption context shared by every checker."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from alaw.entropy import entropy_of
from alaw.qstate import ChainState, Region

VERDICT_TOL = -1e-9


@dataclass(frozen=True)
class Assumption:
    """Decay assumption ``|<XY> - <X><Y>| <= P 2^{-l/xi}`` under which a check runs.

    ``certified`` says whether the pair came out of a passing correlation
    certificate; a bare length given by the caller is recorded as asserted.
    """

    xi: float
    certified: bool = True
    prefactor: float = 1.0
    source: str = "asserted"

    @classmethod
    def from_certificate(cls, cert) -> Assumption:
        return cls(cert.xi, cert.certified, cert.prefactor, "certificate")

    def to_dict(self) -> dict:
        return {"xi": _jsonable(self.xi), "prefactor": self.prefactor,
                "xi_source": self.source, "scope": "supports of at most 2 sites"}


def as_assumption(xi: float | Assumption) -> Assumption:
    if isinstance(xi, Assumption):
        return xi
    return Assumption(float(xi))


NO_ASSUMPTION = "not used"


@dataclass(frozen=True)
class LemmaVerdict:
    lemma_id: str
    lhs: float
    rhs: float
    preconditions_met: bool
    certified: bool
    context: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        if math.isinf(self.rhs) and self.rhs > 0:
            return math.inf
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.preconditions_met and self.certified and self.margin >= VERDICT_TOL

    @property
    def violated(self) -> bool:
        """A counted failure: hypotheses and certificate hold, inequality does not."""
        return self.preconditions_met and self.certified and self.margin < VERDICT_TOL

    def sort_key(self) -> str:
        return self.lemma_id + "|" + json.dumps(self.context, sort_keys=True, default=str)

    def to_dict(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "context": self.context,
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "margin": _jsonable(self.margin),
            "preconditions_met": self.preconditions_met,
            "certified": self.certified,
            "pass": self.passed,
        }


def _jsonable(x: float):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def exact(lemma_id: str, residual: float, context: dict) -> LemmaVerdict:
    """Verdict for an identity: ``|residual| <= 0`` within the verdict tolerance."""
    return LemmaVerdict(lemma_id, abs(residual), 0.0, True, True,
                        {**context, "assumption": NO_ASSUMPTION})


def max_block_entropy(state: ChainState, length: int) -> float:
    """In-chain maximum of ``S`` over contiguous blocks of ``length`` sites."""
    if length <= 0:
        return 0.0
    if length >= state.num_sites:
        return 0.0
    key = ("Smax", length)
    if key not in state._cache:
        state._cache[key] = max(entropy_of(state, Region.block(s, length))
                                for s in range(state.num_sites - length + 1))
    return state._cache[key]
