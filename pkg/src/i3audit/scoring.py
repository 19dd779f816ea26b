"""
scoring: Percentile Rank Class Weights and Citation Impact Indicators

Every paper of a dataset gets a percentage position within the full dataset (the reference set), which decides
its percentile rank class and so its weight. The sum of the weights is the integrated impact indicator I3 and
the mean weight is R. The counting rule and the tie policy of a :class:`ScoringPolicy` decide how positions are
computed; the fractional rule instead spreads every paper over its exact 1/n_tot percentage interval.
"""
import json
import math
import logging

from enum import Enum
from fractions import Fraction
from collections import Counter
from print_color import print as cprint
from typing import Dict, List, Optional
from pydantic import BaseModel, ConfigDict, model_validator

from . import Dataset, Paper, ClassScheme, UNATTRIBUTED, histogram, config
from .util import dict_to_table, format_rational, model_to_dict

logger = logging.getLogger(__name__)


class PolicyError(ValueError):
    """Raised for unknown or incompatible scoring policy settings."""


class CountingRule(str, Enum):
    """How the percentage position of a paper is derived from its count of papers below."""
    STRICT_LESS = "strict-less"
    INCLUSIVE_RANK = "inclusive"
    PLUS_POINT_NINE = "plus-0.9"


class TiePolicy(str, Enum):
    """How papers with exactly equal citation counts are classed."""
    LOWEST_RANK = "lowest"
    HIGHEST_RANK = "highest"
    AVERAGE_RANK = "average-rank"
    AVERAGE_WEIGHT = "average-weight"


class PolicyKind(str, Enum):
    DISCRETE = "discrete"
    FRACTIONAL = "fractional"


class RankBasis(str, Enum):
    """Quantity owners are ranked by: their R (i3 / own papers) or their i3 contribution."""
    R = "r"
    I3 = "i3"


FRACTIONAL_RULE = "fractional"


class ScoringPolicy(BaseModel):
    """
    A counting rule combined with a tie policy, or the fractional rule.

    :ivar kind: Discrete (counting rule and tie policy) or fractional.
    :vartype kind: PolicyKind
    :ivar counting: Counting rule (None when fractional).
    :vartype counting: Optional[CountingRule]
    :ivar ties: Tie policy (None when fractional).
    :vartype ties: Optional[TiePolicy]
    """
    model_config = ConfigDict(frozen=True)

    kind: PolicyKind = PolicyKind.DISCRETE
    counting: Optional[CountingRule] = CountingRule.STRICT_LESS
    ties: Optional[TiePolicy] = TiePolicy.LOWEST_RANK

    @model_validator(mode="before")
    @classmethod
    def _fractional_has_no_rule(cls, data):
        if isinstance(data, dict) and data.get("kind") in (PolicyKind.FRACTIONAL, FRACTIONAL_RULE):
            data = dict(data, counting=None, ties=None)
        return data

    @model_validator(mode="after")
    def _discrete_needs_rule(self) -> "ScoringPolicy":
        if self.kind == PolicyKind.DISCRETE and (self.counting is None or self.ties is None):
            raise ValueError("a discrete scoring policy needs both a counting rule and a tie policy")
        return self

    @property
    def fractional(self) -> bool:
        return self.kind == PolicyKind.FRACTIONAL

    @property
    def label(self) -> str:
        """Compact text form, e.g. "strict-less/average-weight" or "fractional"."""
        if self.fractional:
            return FRACTIONAL_RULE
        return f"{self.counting.value}/{self.ties.value}"

    def __str__(self):
        return self.label

    @staticmethod
    def from_names(rule: str = None, ties: str = None) -> "ScoringPolicy":
        """
        Builds a policy from its command-line names, missing values taken from `config["scoring"]`.

        :param rule: "strict-less", "inclusive", "plus-0.9" or "fractional".
        :type rule: str
        :param ties: "lowest", "highest", "average-rank" or "average-weight" (not allowed with "fractional").
        :type ties: str
        :return: The policy.
        :rtype: ScoringPolicy
        :raises PolicyError: On unknown names or a tie policy given with the fractional rule.
        """
        rule = rule or config.config["scoring"]["rule"]
        if rule == FRACTIONAL_RULE:
            if ties is not None:
                raise PolicyError(f"The fractional rule does not take a tie policy (got ties='{ties}')")
            return ScoringPolicy(kind=PolicyKind.FRACTIONAL)
        ties = ties or config.config["scoring"]["ties"]
        try:
            counting = CountingRule(rule)
        except ValueError:
            valid = [r.value for r in CountingRule] + [FRACTIONAL_RULE]
            raise PolicyError(f"Unknown counting rule '{rule}', expected one of {valid}")
        try:
            tie_policy = TiePolicy(ties)
        except ValueError:
            raise PolicyError(f"Unknown tie policy '{ties}', expected one of {[t.value for t in TiePolicy]}")
        return ScoringPolicy(counting=counting, ties=tie_policy)

    @staticmethod
    def default() -> "ScoringPolicy":
        """The policy configured in `config["scoring"]` (strict-less/lowest unless changed)."""
        return ScoringPolicy.from_names()


def rank_basis(rank_by: str = None) -> RankBasis:
    """Parses a ranking basis name ("r" or "i3"), defaulting to `config["scoring"]["rank_by"]`."""
    rank_by = rank_by or config.config["scoring"]["rank_by"]
    try:
        return RankBasis(rank_by)
    except ValueError:
        raise PolicyError(f"Unknown ranking basis '{rank_by}', expected one of {[b.value for b in RankBasis]}")


class WeightedPaper(BaseModel):
    """
    A paper with its position in the reference set and its weight.

    :ivar paper: The paper.
    :vartype paper: Paper
    :ivar percentage: Percentage position used for classing (for tie averaging policies, the group average).
    :vartype percentage: Fraction
    :ivar class_index: 1-based percentile rank class, None when the weight is not the weight of a single class.
    :vartype class_index: Optional[int]
    :ivar weight: The weight.
    :vartype weight: Fraction
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    paper: Paper
    percentage: Fraction
    class_index: Optional[int] = None
    weight: Fraction


class _GroupWeight(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    percentage: Fraction
    class_index: Optional[int]
    weight: Fraction


def _percentage(count: Fraction, n_tot: int, counting: CountingRule) -> Fraction:
    if counting == CountingRule.INCLUSIVE_RANK:
        count += 1
    elif counting == CountingRule.PLUS_POINT_NINE:
        count += Fraction(9, 10)
    return Fraction(count) * 100 / n_tot


def _discrete_group(below: int, tied: int, n_tot: int, scheme: ClassScheme, policy: ScoringPolicy) -> _GroupWeight:
    inclusive = policy.counting == CountingRule.INCLUSIVE_RANK

    def classed(count):
        percentage = _percentage(Fraction(count), n_tot, policy.counting)
        class_index = scheme.class_of(percentage, inclusive)
        return percentage, class_index

    if policy.ties in (TiePolicy.LOWEST_RANK, TiePolicy.HIGHEST_RANK):
        count = below if policy.ties == TiePolicy.LOWEST_RANK else below + tied - 1
        percentage, class_index = classed(count)
        return _GroupWeight(percentage=percentage, class_index=class_index, weight=scheme.weight_of(class_index))

    positions = [classed(count) for count in range(below, below + tied)]
    if policy.ties == TiePolicy.AVERAGE_RANK:
        percentage = Fraction(sum(math.floor(p) for p, _ in positions), tied)
        class_index = scheme.class_of(percentage, inclusive)
        return _GroupWeight(percentage=percentage, class_index=class_index, weight=scheme.weight_of(class_index))

    # average weight: each provisional rank is classed on its own
    classes = {class_index for _, class_index in positions}
    return _GroupWeight(percentage=sum(p for p, _ in positions) / tied,
                        class_index=classes.pop() if len(classes) == 1 else None,
                        weight=sum(scheme.weight_of(k) for _, k in positions) / tied)


def fractional_weight(rank: int, n_tot: int, scheme: ClassScheme) -> Fraction:
    """
    Width-weighted mean class weight over the percentage interval ((rank - 1) * 100 / n_tot, rank * 100 / n_tot].

    :param rank: 1-based rank by increasing citations.
    :type rank: int
    :param n_tot: Number of papers in the reference set.
    :type n_tot: int
    :param scheme: The class scheme.
    :type scheme: ClassScheme
    :return: The exact fractional weight (27/5 for the top paper of 40 under 6PR).
    :rtype: Fraction
    """
    if not 1 <= rank <= n_tot:
        raise ValueError(f"rank {rank} out of range 1..{n_tot}")
    width = Fraction(100, n_tot)
    return scheme.integral((rank - 1) * width, rank * width) / width


def _fractional_group(below: int, tied: int, n_tot: int, scheme: ClassScheme) -> _GroupWeight:
    ranks = range(below + 1, below + tied + 1)
    return _GroupWeight(percentage=sum(Fraction(r * 100, n_tot) for r in ranks) / tied,
                        class_index=None,
                        weight=sum(fractional_weight(r, n_tot, scheme) for r in ranks) / tied)


def group_weights(dataset: Dataset,
                  scheme: ClassScheme = None,
                  policy: ScoringPolicy = None) -> Dict[int, _GroupWeight]:
    """Weight of each group of tied papers, keyed by citation count."""
    scheme = scheme or ClassScheme.default()
    policy = policy or ScoringPolicy.default()
    hist = histogram(dataset)
    n_tot = hist.n_tot
    groups = {}
    below = 0
    for citations, tied in hist.bins.items():
        if policy.fractional:
            groups[citations] = _fractional_group(below, tied, n_tot, scheme)
        else:
            groups[citations] = _discrete_group(below, tied, n_tot, scheme, policy)
        below += tied
    return groups


def weigh(dataset: Dataset, scheme: ClassScheme = None, policy: ScoringPolicy = None) -> List[WeightedPaper]:
    """
    Assigns a percentage position, class and weight to every paper of the dataset.

    Papers with equal citation counts always get identical weights, so weights depend only on the citation
    multiset and not on paper ids or order.

    :param dataset: The reference set, must not be empty.
    :type dataset: Dataset
    :param scheme: The class scheme (default from configuration).
    :type scheme: ClassScheme
    :param policy: The scoring policy (default from configuration).
    :type policy: ScoringPolicy
    :return: One weighted paper per paper, in dataset order.
    :rtype: List[WeightedPaper]
    :raises EmptyReferenceSetError: If the dataset has no papers.
    """
    groups = group_weights(dataset, scheme, policy)
    return [WeightedPaper(paper=paper,
                          percentage=groups[paper.citations].percentage,
                          class_index=groups[paper.citations].class_index,
                          weight=groups[paper.citations].weight)
            for paper in dataset.papers]


def i3(dataset: Dataset, scheme: ClassScheme = None, policy: ScoringPolicy = None) -> Fraction:
    """
    Integrated impact indicator: the sum of the weights of all papers.

    :return: I3 of the dataset (76 for case A1 under strict-less/lowest).
    :rtype: Fraction
    """
    groups = group_weights(dataset, scheme, policy)
    return sum((groups[c].weight * n for c, n in Counter(p.citations for p in dataset.papers).items()),
               Fraction(0))


def r_indicator(dataset: Dataset, scheme: ClassScheme = None, policy: ScoringPolicy = None) -> Fraction:
    """R = I3 / n_tot, the mean weight of the dataset's papers."""
    return i3(dataset, scheme, policy) / dataset.n_tot


def weights_table(dataset: Dataset, scheme: ClassScheme = None, policy: ScoringPolicy = None) -> Dict[int, dict]:
    """
    Per citation count row with n(c), c*n(c), n_<, percentage, class, weight and w*n(c).

    :return: Rows keyed by citation count, in increasing order.
    :rtype: Dict[int, dict]
    """
    hist = histogram(dataset)
    groups = group_weights(dataset, scheme, policy)
    rows = {}
    below = 0
    for citations, count in hist.bins.items():
        group = groups[citations]
        rows[citations] = {"n": count,
                           "c_n": citations * count,
                           "n_less": below,
                           "percentage": group.percentage,
                           "class": group.class_index,
                           "weight": group.weight,
                           "w_n": group.weight * count}
        below += count
    return rows


def rank_owners(values: Dict[str, Fraction]) -> Dict[str, Fraction]:
    """
    Ranks owners by descending value, tied owners sharing the average of the positions they span.

    :param values: Owner to ranking value.
    :type values: Dict[str, Fraction]
    :return: Owner to rank (1 is best; e.g. two owners tied for 2nd and 3rd both get 5/2).
    :rtype: Dict[str, Fraction]
    """
    ordered = sorted(values.values(), reverse=True)
    ranks = {}
    for owner, value in values.items():
        first = ordered.index(value) + 1
        tied = ordered.count(value)
        ranks[owner] = Fraction(2 * first + tied - 1, 2)
    return ranks


class OwnerIndicators(BaseModel):
    """
    Indicators of one owner's papers, measured against the full reference set.

    :ivar papers: Number of papers of the owner.
    :ivar citations: Number of citations of the owner's papers.
    :ivar i3: Sum of the owner's paper weights.
    :ivar r: i3 / papers.
    :ivar share: i3 / n_tot of the reference set (the owner's contribution to the total R).
    :ivar rank: Rank among owners (None for the unattributed owner "_").
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    papers: int
    citations: int
    i3: Fraction
    r: Fraction
    share: Fraction
    rank: Optional[Fraction] = None


class IndicatorReport(BaseModel):
    """
    Total and per-owner indicators of one dataset.

    :ivar label: Case name.
    :vartype label: str
    :ivar scheme: Name of the class scheme.
    :vartype scheme: str
    :ivar policy: Label of the scoring policy.
    :vartype policy: str
    :ivar rank_by: Quantity owners are ranked by.
    :vartype rank_by: RankBasis
    :ivar n_tot: Number of papers.
    :vartype n_tot: int
    :ivar n_citations: Number of citations.
    :vartype n_citations: int
    :ivar total_i3: I3 of the dataset.
    :vartype total_i3: Fraction
    :ivar total_r: R of the dataset.
    :vartype total_r: Fraction
    :ivar per_owner: Indicators per owner label, sorted by label.
    :vartype per_owner: Dict[str, OwnerIndicators]
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label: str
    scheme: str
    policy: str
    rank_by: RankBasis = RankBasis.R
    n_tot: int
    n_citations: int
    total_i3: Fraction
    total_r: Fraction
    per_owner: Dict[str, OwnerIndicators]

    def ranked_owners(self) -> List[str]:
        """Owners that take part in the ranking (all but "_"), best first."""
        ranked = [owner for owner, ind in self.per_owner.items() if ind.rank is not None]
        return sorted(ranked, key=lambda owner: (self.per_owner[owner].rank, owner))

    def value(self, owner: str) -> Fraction:
        """The value `owner` is ranked by (its r or its i3)."""
        indicators = self.per_owner[owner]
        return indicators.r if self.rank_by == RankBasis.R else indicators.i3

    def table_rows(self, digits: int = None) -> Dict[str, dict]:
        """Per-owner rows (plus a "total" row) with all values rendered as strings."""
        rows = {owner: {"papers": str(ind.papers),
                        "citations": str(ind.citations),
                        "i3": format_rational(ind.i3, digits),
                        "r": format_rational(ind.r, digits, fixed=True),
                        "share": format_rational(ind.share, digits, fixed=True),
                        "rank": "-" if ind.rank is None else format_rational(ind.rank, digits)}
                for owner, ind in self.per_owner.items()}
        rows["total"] = {"papers": str(self.n_tot),
                         "citations": str(self.n_citations),
                         "i3": format_rational(self.total_i3, digits),
                         "r": format_rational(self.total_r, digits, fixed=True),
                         "share": format_rational(self.total_r, digits, fixed=True),
                         "rank": "-"}
        return rows

    def json(self, string: bool = False, indent: int = 2, digits: int = None):
        """
        Serializes the report, exact values as `{"num", "den", "decimal"}` objects.

        :param string: If True, returns a JSON string; otherwise, returns a dict.
        :type string: bool
        :param indent: Indentation level for pretty-printing.
        :type indent: int
        :param digits: Decimals of the decimal renderings.
        :type digits: int
        :return: The serialized report.
        :rtype: Union[str, dict]
        """
        data = model_to_dict(self, digits)
        return json.dumps(data, indent=indent) if string else data

    def print(self, digits: int = None, markdown: bool = False):
        """Pretty-prints the report to the console."""
        cprint(self.label or "(unlabeled)", tag="case", tag_color="purple", color="magenta", format="bold")
        cprint(f"{self.scheme}, {self.policy}, ranked by {self.rank_by.value}",
               tag="policy", tag_color="purple", color="magenta")
        total_r = format_rational(self.total_r, digits, fixed=True)
        cprint(f"I3 = {format_rational(self.total_i3, digits)}, R = {total_r}",
               tag="total", tag_color="purple", color="magenta", format="bold")
        if self.per_owner:
            dict_to_table(self.table_rows(digits), markdown=markdown)


def per_owner_report(dataset: Dataset,
                     scheme: ClassScheme = None,
                     policy: ScoringPolicy = None,
                     rank_by: str = None) -> IndicatorReport:
    """
    Computes total and per-owner indicators, with the full dataset as the reference set.

    Owners are ranked by descending r (or i3 with `rank_by="i3"`); tied owners share the average of the
    positions they span. Papers of the unattributed owner "_" count for the totals but are not ranked.

    :param dataset: The reference set, must not be empty.
    :type dataset: Dataset
    :param scheme: The class scheme (default from configuration).
    :type scheme: ClassScheme
    :param policy: The scoring policy (default from configuration).
    :type policy: ScoringPolicy
    :param rank_by: "r" or "i3" (default from configuration).
    :type rank_by: str
    :return: The report.
    :rtype: IndicatorReport
    """
    scheme = scheme or ClassScheme.default()
    policy = policy or ScoringPolicy.default()
    basis = rank_basis(rank_by)
    weighted = weigh(dataset, scheme, policy)

    totals = {}
    for wp in weighted:
        papers, citations, weight = totals.get(wp.paper.owner, (0, 0, Fraction(0)))
        totals[wp.paper.owner] = (papers + 1, citations + wp.paper.citations, weight + wp.weight)

    ranked = {owner: (weight / papers if basis == RankBasis.R else weight)
              for owner, (papers, _, weight) in totals.items() if owner != UNATTRIBUTED}
    ranks = rank_owners(ranked)

    total_i3 = sum((wp.weight for wp in weighted), Fraction(0))
    per_owner = {owner: OwnerIndicators(papers=papers,
                                        citations=citations,
                                        i3=weight,
                                        r=weight / papers,
                                        share=weight / dataset.n_tot,
                                        rank=ranks.get(owner))
                 for owner, (papers, citations, weight) in sorted(totals.items())}
    logger.debug(f"{dataset.label}: I3 = {total_i3} under {policy.label} ({scheme.label})")
    return IndicatorReport(label=dataset.label,
                           scheme=scheme.label,
                           policy=policy.label,
                           rank_by=basis,
                           n_tot=dataset.n_tot,
                           n_citations=dataset.total_citations,
                           total_i3=total_i3,
                           total_r=total_i3 / dataset.n_tot,
                           per_owner=per_owner)
