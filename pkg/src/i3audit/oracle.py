"""
oracle: Brute-Force Reference Implementations

Slow, straight-line re-implementations of the scoring paths, written independently of :mod:`i3audit.scoring`
(no bisection, no interval-overlap helper, no shared group code) so that tests can check the production paths
against them: class membership by integer cross-multiplication, fractional weights by cumulative class
integrals or by discretizing the percentage interval into slices, and rankings by pairwise counting.
"""
import random
import logging
import numpy as np

from fractions import Fraction
from typing import Dict, Tuple
from pydantic import BaseModel, ConfigDict, Field

from . import ClassScheme, Dataset, Paper, UNATTRIBUTED, config
from .scoring import (CountingRule, IndicatorReport, OwnerIndicators, RankBasis, ScoringPolicy, TiePolicy,
                      rank_basis, weigh)

logger = logging.getLogger(__name__)


class OracleConfig(BaseModel):
    """
    Parameters of the oracles (defaults from `config["oracle"]`).

    :ivar slices_per_paper: Slices each paper's percentage interval is cut into by the fractional oracle.
    :ivar permutations: Number of random id permutations tried by the tie order oracle.
    :ivar seed: Random seed of the permutations.
    """
    model_config = ConfigDict(frozen=True)

    slices_per_paper: int = Field(default_factory=lambda: config.config["oracle"]["slices_per_paper"], ge=1)
    permutations: int = Field(default_factory=lambda: config.config["oracle"]["permutations"], ge=1)
    seed: int = Field(default_factory=lambda: config.config["oracle"]["seed"])


def fractional_weight_bruteforce(rank: int, n_tot: int, scheme: ClassScheme = None,
                                 oracle_config: OracleConfig = None) -> float:
    """
    Approximate fractional weight of the rank-`rank` paper of `n_tot`, by slicing its percentage interval.

    The interval ((rank - 1) * 100 / n_tot, rank * 100 / n_tot] is cut into `slices_per_paper` slices, each slice
    takes the weight of the class its midpoint falls in, and the slice weights are averaged. The result is within
    (max weight - min weight) / slices_per_paper of the exact weight.

    :param rank: 1-based rank by increasing citations.
    :type rank: int
    :param n_tot: Number of papers.
    :type n_tot: int
    :param scheme: The class scheme (default from configuration).
    :type scheme: ClassScheme
    :param oracle_config: Oracle parameters.
    :type oracle_config: OracleConfig
    :return: The approximate weight.
    :rtype: float
    """
    scheme = scheme or ClassScheme.default()
    oracle_config = oracle_config or OracleConfig()
    slices = oracle_config.slices_per_paper
    lo, hi = (rank - 1) * 100 / n_tot, rank * 100 / n_tot
    midpoints = lo + (np.arange(slices) + 0.5) * (hi - lo) / slices
    boundaries = np.array([float(b) for b in scheme.boundaries])
    classes = np.minimum(np.searchsorted(boundaries, midpoints, side="right"), len(boundaries) - 1)
    weights = np.array([float(w) for w in scheme.weights])
    return float(weights[classes].mean())


def _count(q: int, counting: CountingRule) -> Tuple[int, int]:
    # position count as an integer fraction (numerator, denominator)
    if counting == CountingRule.INCLUSIVE_RANK:
        return q + 1, 1
    if counting == CountingRule.PLUS_POINT_NINE:
        return 10 * q + 9, 10
    return q, 1


def _class_by_cross_multiplication(num: int, den: int, scheme: ClassScheme, inclusive: bool) -> int:
    # percentage = 100 * num / den
    for k, boundary in enumerate(scheme.boundaries, start=1):
        lhs, rhs = 100 * num * boundary.denominator, boundary.numerator * den
        if lhs < rhs or (inclusive and lhs == rhs):
            return k
    return len(scheme.boundaries)


def _cumulative_integral(x: Fraction, scheme: ClassScheme) -> Fraction:
    total, start = Fraction(0), Fraction(0)
    for boundary, weight in zip(scheme.boundaries, scheme.weights):
        if x <= start:
            break
        total += (min(x, boundary) - start) * weight
        start = boundary
    return total


def _paper_weight(below: int, tied: int, n_tot: int, scheme: ClassScheme, policy: ScoringPolicy) -> Fraction:
    if policy.fractional:
        weights = []
        for rank in range(below + 1, below + tied + 1):
            lo, hi = Fraction((rank - 1) * 100, n_tot), Fraction(rank * 100, n_tot)
            weights.append((_cumulative_integral(hi, scheme) - _cumulative_integral(lo, scheme)) * n_tot / 100)
        return sum(weights) / tied

    inclusive = policy.counting == CountingRule.INCLUSIVE_RANK
    if policy.ties == TiePolicy.LOWEST_RANK:
        num, den = _count(below, policy.counting)
        return scheme.weights[_class_by_cross_multiplication(num, den * n_tot, scheme, inclusive) - 1]
    if policy.ties == TiePolicy.HIGHEST_RANK:
        num, den = _count(below + tied - 1, policy.counting)
        return scheme.weights[_class_by_cross_multiplication(num, den * n_tot, scheme, inclusive) - 1]
    if policy.ties == TiePolicy.AVERAGE_RANK:
        floors = 0
        for q in range(below, below + tied):
            num, den = _count(q, policy.counting)
            floors += (100 * num) // (den * n_tot)
        # mean floored percentage = floors / tied = 100 * floors / (100 * tied)
        return scheme.weights[_class_by_cross_multiplication(floors, 100 * tied, scheme, inclusive) - 1]

    total = Fraction(0)
    for q in range(below, below + tied):
        num, den = _count(q, policy.counting)
        total += scheme.weights[_class_by_cross_multiplication(num, den * n_tot, scheme, inclusive) - 1]
    return total / tied


def weights_oracle(dataset: Dataset, scheme: ClassScheme = None, policy: ScoringPolicy = None) -> Dict[int, Fraction]:
    """
    Weight of every paper, computed paper by paper by direct counting.

    :return: Paper id to weight.
    :rtype: Dict[int, Fraction]
    """
    scheme = scheme or ClassScheme.default()
    policy = policy or ScoringPolicy.default()
    n_tot = len(dataset.papers)
    weights = {}
    for paper in dataset.papers:
        below = sum(1 for other in dataset.papers if other.citations < paper.citations)
        tied = sum(1 for other in dataset.papers if other.citations == paper.citations)
        weights[paper.id] = _paper_weight(below, tied, n_tot, scheme, policy)
    return weights


def tie_order_oracle(dataset: Dataset,
                     scheme: ClassScheme = None,
                     policy: ScoringPolicy = None,
                     oracle_config: OracleConfig = None) -> bool:
    """
    Checks that permuting ids within tied groups (and the order of papers) leaves every paper's weight unchanged.

    :return: True if all sampled permutations give the same weight per paper id.
    :rtype: bool
    """
    oracle_config = oracle_config or OracleConfig()
    rng = random.Random(oracle_config.seed)
    baseline = {wp.paper.id: wp.weight for wp in weigh(dataset, scheme, policy)}

    groups: Dict[int, list] = {}
    for paper in dataset.papers:
        groups.setdefault(paper.citations, []).append(paper)

    for _ in range(oracle_config.permutations):
        papers = []
        for group in groups.values():
            ids = [paper.id for paper in group]
            rng.shuffle(ids)
            papers.extend(Paper(id=pid, owner=paper.owner, citations=paper.citations)
                          for pid, paper in zip(ids, group))
        rng.shuffle(papers)
        permuted = Dataset(label=dataset.label, papers=tuple(papers))
        if {wp.paper.id: wp.weight for wp in weigh(permuted, scheme, policy)} != baseline:
            logger.debug(f"Tie order changed the weights of '{dataset.label}' under {policy}")
            return False
    return True


def report_oracle(dataset: Dataset,
                  scheme: ClassScheme = None,
                  policy: ScoringPolicy = None,
                  rank_by: str = None) -> IndicatorReport:
    """
    Independent re-implementation of :func:`i3audit.scoring.per_owner_report`.

    :return: The report, which must equal the production one exactly.
    :rtype: IndicatorReport
    """
    scheme = scheme or ClassScheme.default()
    policy = policy or ScoringPolicy.default()
    basis = rank_basis(rank_by)
    weights = weights_oracle(dataset, scheme, policy)
    n_tot = len(dataset.papers)

    owners = sorted(set(paper.owner for paper in dataset.papers))
    sums = {}
    for owner in owners:
        papers = [paper for paper in dataset.papers if paper.owner == owner]
        i3 = sum((weights[paper.id] for paper in papers), Fraction(0))
        sums[owner] = (len(papers), sum(paper.citations for paper in papers), i3)

    values = {owner: (i3 / papers if basis == RankBasis.R else i3)
              for owner, (papers, _, i3) in sums.items() if owner != UNATTRIBUTED}
    ranks = {}
    for owner, value in values.items():
        greater = sum(1 for other in values.values() if other > value)
        equal = sum(1 for other in values.values() if other == value)
        ranks[owner] = greater + Fraction(equal + 1, 2)

    total_i3 = sum(weights.values(), Fraction(0))
    return IndicatorReport(label=dataset.label,
                           scheme=scheme.label,
                           policy=policy.label,
                           rank_by=basis,
                           n_tot=n_tot,
                           n_citations=sum(paper.citations for paper in dataset.papers),
                           total_i3=total_i3,
                           total_r=total_i3 / n_tot,
                           per_owner={owner: OwnerIndicators(papers=papers, citations=citations, i3=i3,
                                                             r=i3 / papers, share=i3 / n_tot, rank=ranks.get(owner))
                                      for owner, (papers, citations, i3) in sums.items()})
