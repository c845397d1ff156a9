"""Executable checkers for the entropic inequalities and identities."""

from alaw.lemmas.common import Assumption, LemmaVerdict, as_assumption, max_block_entropy
from alaw.lemmas.partition import (
    check_lemma1,
    check_lemma2,
    check_lemma3,
    check_lemma4,
    check_lemma5,
    check_lemma6,
    check_lemma6_dual,
    check_modified_fannes,
    check_partition_identity,
    check_ssa,
    check_subadditivity,
    lemma6_constructions,
)
from alaw.lemmas.suite import SuiteConfig, run_suite, summarize
from alaw.lemmas.telescope import (
    EtaEstimate,
    TelescopeLayout,
    check_lemma7,
    check_telescope,
    eta,
    telescope_identity,
)

__all__ = [
    "Assumption",
    "EtaEstimate",
    "LemmaVerdict",
    "SuiteConfig",
    "TelescopeLayout",
    "as_assumption",
    "check_lemma1",
    "check_lemma2",
    "check_lemma3",
    "check_lemma4",
    "check_lemma5",
    "check_lemma6",
    "check_lemma6_dual",
    "check_lemma7",
    "check_modified_fannes",
    "check_partition_identity",
    "check_ssa",
    "check_subadditivity",
    "check_telescope",
    "eta",
    "lemma6_constructions",
    "max_block_entropy",
    "run_suite",
    "summarize",
    "telescope_identity",
]
