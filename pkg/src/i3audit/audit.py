"""
audit: Ranking Consistency Checks over Scenarios

Two properties of per-owner rankings are checked across the snapshots of a replayed scenario:

    - same improvement: if two owners achieve exactly the same improvement (and nobody else changes), their
      relative order must not change;
    - strict independence: an improvement of a third owner must not change the relative order of two others.

Relative order is the sign of the difference of the two ranking values (R, or i3 contribution), compared
exactly. Going from a tie to an order, from an order to a tie, or reversing the order all count as a change.
"""
import json
import logging

from enum import Enum
from fractions import Fraction
from itertools import combinations
from tqdm.auto import tqdm
from print_color import print as cprint
from typing import Dict, List, Tuple
from pydantic import BaseModel, ConfigDict

from . import ClassScheme, UNATTRIBUTED
from .evolution import Scenario, DeltaKind, replay
from .scoring import IndicatorReport, RankBasis, ScoringPolicy, per_owner_report, rank_basis
from .util import dict_to_table, format_rational, model_to_dict

logger = logging.getLogger(__name__)


class ViolationKind(str, Enum):
    SAME_IMPROVEMENT = "same-improvement"
    STRICT_INDEPENDENCE = "strict-independence"


class ViolationDetail(BaseModel):
    """Ranking values and ranks of the two owners in both snapshots."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x_before: Fraction
    y_before: Fraction
    x_after: Fraction
    y_after: Fraction
    rank_x_before: Fraction
    rank_y_before: Fraction
    rank_x_after: Fraction
    rank_y_after: Fraction


class Violation(BaseModel):
    """
    A change of the relative order of two owners that the checked property forbids.

    :ivar kind: The violated property.
    :vartype kind: ViolationKind
    :ivar from_case: Label of the earlier snapshot.
    :vartype from_case: str
    :ivar to_case: Label of the later snapshot.
    :vartype to_case: str
    :ivar from_index: Index of the earlier snapshot.
    :vartype from_index: int
    :ivar to_index: Index of the later snapshot.
    :vartype to_index: int
    :ivar pair: The two owners (sorted labels).
    :vartype pair: Tuple[str, str]
    :ivar changed: Owners whose record changed between the two snapshots.
    :vartype changed: Tuple[str, ...]
    :ivar detail: Values and ranks before and after.
    :vartype detail: ViolationDetail
    """
    model_config = ConfigDict(frozen=True)

    kind: ViolationKind
    from_case: str
    to_case: str
    from_index: int
    to_index: int
    pair: Tuple[str, str]
    changed: Tuple[str, ...]
    detail: ViolationDetail

    def __str__(self):
        x, y = self.pair
        d = self.detail
        return (f"{self.from_case} -> {self.to_case}: {x} vs {y} "
                f"({format_rational(d.x_before)} vs {format_rational(d.y_before)} -> "
                f"{format_rational(d.x_after)} vs {format_rational(d.y_after)}), changed: {', '.join(self.changed)}")


class ViolationReport(BaseModel):
    """
    The violations of one property found in one scenario.

    :ivar kind: The checked property.
    :vartype kind: ViolationKind
    :ivar scenario: Scenario name.
    :vartype scenario: str
    :ivar scheme: Class scheme name.
    :vartype scheme: str
    :ivar policy: Scoring policy label.
    :vartype policy: str
    :ivar rank_by: Ranking basis.
    :vartype rank_by: RankBasis
    :ivar violations: The violations, ordered by snapshot indices then owner pair.
    :vartype violations: List[Violation]
    :ivar warnings: Reasons why the check could not be (fully) performed.
    :vartype warnings: List[str]
    """
    kind: ViolationKind
    scenario: str
    scheme: str
    policy: str
    rank_by: RankBasis
    violations: List[Violation] = []
    warnings: List[str] = []

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __getitem__(self, index):
        return self.violations[index]

    def table_rows(self, digits: int = None) -> Dict[str, dict]:
        """One row per violation with all values rendered as strings."""
        rows = {}
        for ix, v in enumerate(self.violations, start=1):
            d = v.detail
            rows[str(ix)] = {"from": v.from_case,
                             "to": v.to_case,
                             "x": v.pair[0],
                             "y": v.pair[1],
                             "x before": format_rational(d.x_before, digits),
                             "y before": format_rational(d.y_before, digits),
                             "x after": format_rational(d.x_after, digits),
                             "y after": format_rational(d.y_after, digits),
                             "changed": " ".join(v.changed)}
        return rows

    def json(self, string: bool = False, indent: int = 2, digits: int = None):
        """
        Serializes the report, exact values as `{"num", "den", "decimal"}` objects.

        :param string: If True, returns a JSON string; otherwise, returns a dict.
        :type string: bool
        :param indent: Indentation level for pretty-printing.
        :type indent: int
        :return: The serialized report.
        :rtype: Union[str, dict]
        """
        data = model_to_dict(self, digits)
        data["count"] = len(self.violations)
        return json.dumps(data, indent=indent) if string else data

    def print(self, digits: int = None, markdown: bool = False):
        """Pretty-prints the report to the console."""
        cprint(f"{self.kind.value} audit of '{self.scenario}'", tag="audit", tag_color="purple", color="magenta",
               format="bold")
        cprint(f"{self.scheme}, {self.policy}, ranked by {self.rank_by.value}",
               tag="policy", tag_color="purple", color="magenta")
        cprint(f"{len(self)} violation(s)", tag="result", tag_color="purple",
               color="red" if self.violations else "green", format="bold")
        for warning in self.warnings:
            cprint(warning, tag="warning", tag_color="yellow", color="yellow")
        if self.violations:
            dict_to_table(self.table_rows(digits), markdown=markdown, index_name="#")


def _sign(a: Fraction, b: Fraction) -> int:
    return (a > b) - (a < b)


def _ranked(report: IndicatorReport) -> set:
    return {owner for owner, ind in report.per_owner.items() if ind.rank is not None}


def snapshot_reports(scenario: Scenario,
                     scheme: ClassScheme = None,
                     policy: ScoringPolicy = None,
                     rank_by: str = None) -> List[IndicatorReport]:
    """
    Replays a scenario and computes the indicator report of every snapshot.

    :return: One report per snapshot, in case order.
    :rtype: List[IndicatorReport]
    """
    snapshots = replay(scenario)
    return [per_owner_report(snapshot, scheme, policy, rank_by)
            for snapshot in tqdm(snapshots, desc=f"Scoring '{scenario.name}'", leave=False)]


def _compare(kind: ViolationKind,
             reports: List[IndicatorReport],
             i: int,
             j: int,
             pairs,
             changed: Tuple[str, ...]) -> List[Violation]:
    before, after = reports[i], reports[j]
    violations = []
    for x, y in pairs:
        if _sign(before.value(x), before.value(y)) == _sign(after.value(x), after.value(y)):
            continue
        detail = ViolationDetail(x_before=before.value(x), y_before=before.value(y),
                                 x_after=after.value(x), y_after=after.value(y),
                                 rank_x_before=before.per_owner[x].rank, rank_y_before=before.per_owner[y].rank,
                                 rank_x_after=after.per_owner[x].rank, rank_y_after=after.per_owner[y].rank)
        violations.append(Violation(kind=kind, from_case=before.label, to_case=after.label,
                                    from_index=i, to_index=j, pair=(x, y), changed=changed, detail=detail))
    return violations


def _new_report(kind: ViolationKind, scenario: Scenario, scheme: ClassScheme, policy: ScoringPolicy,
                rank_by: RankBasis) -> ViolationReport:
    return ViolationReport(kind=kind, scenario=scenario.name, scheme=scheme.label, policy=policy.label,
                           rank_by=rank_by)


def strict_independence_violations(scenario: Scenario,
                                   scheme: ClassScheme = None,
                                   policy: ScoringPolicy = None,
                                   rank_by: str = None) -> ViolationReport:
    """
    Checks that no step changes the relative order of two owners it does not touch.

    For every pair of consecutive snapshots, all pairs of ranked owners other than the step's owner that are
    present in both snapshots are compared. Scenarios with fewer than 3 ranked owners give an empty report with a
    warning.

    :param scenario: The scenario to audit.
    :type scenario: Scenario
    :param scheme: The class scheme (default from configuration).
    :type scheme: ClassScheme
    :param policy: The scoring policy (default from configuration).
    :type policy: ScoringPolicy
    :param rank_by: "r" or "i3" (default from configuration).
    :type rank_by: str
    :return: The violations found.
    :rtype: ViolationReport
    """
    scheme = scheme or ClassScheme.default()
    policy = policy or ScoringPolicy.default()
    basis = rank_basis(rank_by)
    report = _new_report(ViolationKind.STRICT_INDEPENDENCE, scenario, scheme, policy, basis)

    owners = set()
    for snapshot in replay(scenario):
        owners.update(owner for owner in snapshot.owners() if owner != UNATTRIBUTED)
    if len(owners) < 3:
        warning = f"strict independence needs at least 3 owners, scenario '{scenario.name}' has {len(owners)}"
        logger.warning(warning)
        report.warnings.append(warning)
        return report

    reports = snapshot_reports(scenario, scheme, policy, basis)
    for k, step in enumerate(scenario.steps, start=1):
        changer = step.delta.owner
        others = sorted((_ranked(reports[k - 1]) & _ranked(reports[k])) - {changer})
        report.violations.extend(_compare(ViolationKind.STRICT_INDEPENDENCE, reports, k - 1, k,
                                          combinations(others, 2), (changer,)))
    logger.info(f"Strict independence audit of '{scenario.name}' under {policy.label}: "
                f"{len(report)} violation(s)")
    return report


def same_improvement_violations(scenario: Scenario,
                                scheme: ClassScheme = None,
                                policy: ScoringPolicy = None,
                                rank_by: str = None) -> ViolationReport:
    """
    Checks that two owners with the same improvement keep their relative order.

    Every snapshot pair i < j is considered (quadratic in the number of snapshots): when the cumulative changes
    between them touch exactly two ranked owners, with identical paper and citation additions, and both owners
    are present in the two snapshots, their relative order must be the same in both.

    :param scenario: The scenario to audit.
    :type scenario: Scenario
    :param scheme: The class scheme (default from configuration).
    :type scheme: ClassScheme
    :param policy: The scoring policy (default from configuration).
    :type policy: ScoringPolicy
    :param rank_by: "r" or "i3" (default from configuration).
    :type rank_by: str
    :return: The violations found.
    :rtype: ViolationReport
    """
    scheme = scheme or ClassScheme.default()
    policy = policy or ScoringPolicy.default()
    basis = rank_basis(rank_by)
    report = _new_report(ViolationKind.SAME_IMPROVEMENT, scenario, scheme, policy, basis)
    reports = snapshot_reports(scenario, scheme, policy, basis)

    for i in range(len(reports)):
        papers: Dict[str, int] = {}
        citations: Dict[str, List[int]] = {}
        for j in range(i + 1, len(reports)):
            delta = scenario.steps[j - 1].delta
            if delta.kind == DeltaKind.ADD_PAPER:
                papers[delta.owner] = papers.get(delta.owner, 0) + 1
            else:
                citations.setdefault(delta.owner, []).append(delta.from_count)

            changed = sorted(set(papers) | set(citations))
            if len(changed) != 2 or UNATTRIBUTED in changed:
                continue
            x, y = changed
            if (papers.get(x, 0) != papers.get(y, 0)
                    or sorted(citations.get(x, [])) != sorted(citations.get(y, []))):
                continue
            if not {x, y} <= (_ranked(reports[i]) & _ranked(reports[j])):
                continue
            report.violations.extend(_compare(ViolationKind.SAME_IMPROVEMENT, reports, i, j, [(x, y)], (x, y)))
    logger.info(f"Same improvement audit of '{scenario.name}' under {policy.label}: {len(report)} violation(s)")
    return report


def verify_violation(scenario: Scenario,
                     violation: Violation,
                     scheme: ClassScheme = None,
                     policy: ScoringPolicy = None,
                     rank_by: str = None) -> bool:
    """
    Recomputes the two snapshot reports of a violation and checks the recorded values and ranks.

    :return: True if the violation is reproduced exactly.
    :rtype: bool
    """
    snapshots = replay(scenario)
    before = per_owner_report(snapshots[violation.from_index], scheme, policy, rank_by)
    after = per_owner_report(snapshots[violation.to_index], scheme, policy, rank_by)
    x, y = violation.pair
    d = violation.detail
    return (before.label == violation.from_case and after.label == violation.to_case
            and (before.value(x), before.value(y), after.value(x), after.value(y))
            == (d.x_before, d.y_before, d.x_after, d.y_after)
            and (before.per_owner[x].rank, before.per_owner[y].rank, after.per_owner[x].rank, after.per_owner[y].rank)
            == (d.rank_x_before, d.rank_y_before, d.rank_x_after, d.rank_y_after)
            and _sign(d.x_before, d.y_before) != _sign(d.x_after, d.y_after))


def audit(scenario: Scenario,
          kind: str,
          scheme: ClassScheme = None,
          policy: ScoringPolicy = None,
          rank_by: str = None) -> ViolationReport:
    """Runs the audit named `kind` ("same-improvement" or "strict-independence")."""
    check = {ViolationKind.SAME_IMPROVEMENT: same_improvement_violations,
             ViolationKind.STRICT_INDEPENDENCE: strict_independence_violations}[ViolationKind(kind)]
    return check(scenario, scheme, policy, rank_by)
