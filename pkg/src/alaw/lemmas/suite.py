"""Batch runner: every applicable checker over every partition within size caps."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from alaw.lemmas.common import Assumption, LemmaVerdict
from alaw.lemmas.partition import (
    check_lemma1,
    check_lemma2,
    check_lemma3,
    check_lemma4,
    check_lemma5,
    check_lemma6,
    check_lemma6_dual,
    check_partition_identity,
    check_ssa,
    check_subadditivity,
    lemma6_constructions,
)
from alaw.qstate import ChainState, Partition, placements
from alaw.schmidt import schmidt_cut


@dataclass(frozen=True)
class SuiteConfig:
    alphas: tuple[float, ...] = (0.25, 0.5)
    max_b: int = 4
    max_a: int = 4
    window_max_a: int = 3
    min_window_mass: float = 1e-12


def partition_verdicts(state: ChainState, partition: Partition, assume: Assumption,
                       config: SuiteConfig) -> list[LemmaVerdict]:
    p = partition
    out = [check_partition_identity(state, p), check_ssa(state, p), check_subadditivity(state, p)]
    spec = schmidt_cut(state, p.a)
    windows = []
    if p.l_a <= config.window_max_a:
        windows = [(m, n) for m in range(1, spec.M + 1) for n in range(m, spec.M + 1)
                   if spec.window_mass(m, n) > config.min_window_mass]
    for m, n in windows:
        out.append(check_lemma1(state, p, m, n, assume))
    for alpha in config.alphas:
        for m, n in windows:
            out.append(check_lemma2(state, p, m, n, alpha, assume))
        out += check_lemma3(state, p, alpha, assume)
        out.append(check_lemma4(state, p, alpha, assume))
        out += check_lemma5(state, p, alpha, assume)
        out += check_lemma6(state, p, alpha, assume)
        out.append(check_lemma6_dual(state, p, alpha, assume))
        out += lemma6_constructions(state, p, alpha, assume)["verdicts"]
    return out


_WORKER: dict = {}


def _init(state, assume, config) -> None:
    _WORKER.update(state=state, assume=assume, config=config)


def _work(partition: Partition) -> list[LemmaVerdict]:
    return partition_verdicts(_WORKER["state"], partition, _WORKER["assume"], _WORKER["config"])


def run_suite(state: ChainState, assume: Assumption, config: SuiteConfig = SuiteConfig(),
              jobs: int = 1) -> list[LemmaVerdict]:
    """All verdicts, sorted by lemma id and context so output is independent of ``jobs``."""
    parts = list(placements(state.num_sites, config.max_b, config.max_a))
    if jobs > 1:
        with ProcessPoolExecutor(jobs, initializer=_init,
                                 initargs=(state, assume, config)) as pool:
            chunks = list(pool.map(_work, parts, chunksize=max(1, len(parts) // (4 * jobs))))
    else:
        chunks = [partition_verdicts(state, p, assume, config) for p in parts]
    verdicts = [v for chunk in chunks for v in chunk]
    return sorted(verdicts, key=LemmaVerdict.sort_key)


def summarize(verdicts: list[LemmaVerdict]) -> dict:
    """Per-lemma counts of total, counted (certified with hypotheses met), passed and violated."""
    total, counted, passed, violated = Counter(), Counter(), Counter(), Counter()
    for v in verdicts:
        total[v.lemma_id] += 1
        if v.preconditions_met and v.certified:
            counted[v.lemma_id] += 1
        passed[v.lemma_id] += v.passed
        violated[v.lemma_id] += v.violated
    return {k: {"total": total[k], "counted": counted[k], "passed": passed[k],
                "violated": violated[k]} for k in sorted(total)}
