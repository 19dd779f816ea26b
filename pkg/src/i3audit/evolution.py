"""
evolution: Dataset-Evolution Scenarios

A scenario is an initial dataset followed by an ordered list of steps, each step applying exactly one additive
delta (a new uncited paper, or one more citation to a paper) and producing the next labeled snapshot. This module
replays scenarios and ships the builtin examples: example A (one paper collecting citations one by one), the
endpoints of example B and a B-like scenario connecting them, plus a seeded generator of synthetic scenarios.
"""
import json
import random
import logging

from enum import Enum
from collections import Counter
from typing import Dict, List, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import Dataset, UNATTRIBUTED, config
from .util import make_serializable

logger = logging.getLogger(__name__)

EXAMPLE_A1 = {0: 20, 1: 10, 3: 6, 5: 2, 7: 2}
EXAMPLE_B_OWNERS = {"H": "highly cited scientist, the 4 triply cited papers",
                    "M": "medium cited scientist, the 4 doubly cited papers",
                    "L": "lowly cited scientist, the 7 singly cited papers",
                    "N": "newcomer, every paper added after B1"}
SYNTH_OWNERS = ["H", "L", "M", "N"]


class ReplayError(ValueError):
    """Raised when a delta cannot be applied, e.g. a citation without a matching target paper."""


class DeltaKind(str, Enum):
    ADD_PAPER = "add_paper"
    ADD_CITATION = "add_citation"


class Delta(BaseModel):
    """
    One additive change of a dataset.

    :ivar kind: "add_paper" (a new uncited paper of `owner`) or "add_citation" (one more citation to a paper of
                `owner` currently cited exactly `from_count` times).
    :vartype kind: DeltaKind
    :ivar owner: Owner whose record changes.
    :vartype owner: str
    :ivar from_count: Current citation count of the cited paper (only for "add_citation").
    :vartype from_count: Optional[int]
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: DeltaKind
    owner: str = UNATTRIBUTED
    from_count: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _from_count_iff_citation(self) -> "Delta":
        if self.kind == DeltaKind.ADD_CITATION and self.from_count is None:
            raise ValueError("from_count is required for add_citation deltas")
        if self.kind == DeltaKind.ADD_PAPER and self.from_count is not None:
            raise ValueError("from_count is only allowed for add_citation deltas")
        return self

    def __str__(self):
        if self.kind == DeltaKind.ADD_PAPER:
            return f"add_paper({self.owner})"
        return f"add_citation({self.owner}, {self.from_count})"

    @staticmethod
    def add_paper(owner: str = UNATTRIBUTED) -> "Delta":
        return Delta(kind=DeltaKind.ADD_PAPER, owner=owner)

    @staticmethod
    def add_citation(owner: str, from_count: int) -> "Delta":
        return Delta(kind=DeltaKind.ADD_CITATION, owner=owner, from_count=from_count)


class Step(BaseModel):
    """A delta together with the label of the case it produces."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    case: str
    delta: Delta


class Scenario(BaseModel):
    """
    An initial dataset and the ordered steps leading from it to the following cases.

    :ivar name: Scenario name.
    :vartype name: str
    :ivar initial: The first snapshot (its label is the first case label).
    :vartype initial: Dataset
    :ivar steps: One step per following case.
    :vartype steps: Tuple[Step, ...]
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    initial: Dataset
    steps: Tuple[Step, ...] = ()

    @model_validator(mode="after")
    def _unique_cases(self) -> "Scenario":
        repeated = [case for case, n in Counter(self.case_labels()).items() if n > 1]
        if repeated:
            raise ValueError(f"case labels must be unique, repeated: {repeated}")
        return self

    def __len__(self):
        return len(self.steps) + 1

    def case_labels(self) -> List[str]:
        """Labels of all snapshots, the initial one first."""
        return [self.initial.label] + [step.case for step in self.steps]

    def json(self, string: bool = False, indent: int = 2):
        """
        Serializes the scenario (steps as flat `{case, op, owner, from_count?}` records).

        :param string: If True, returns a JSON string; otherwise, returns a dict.
        :type string: bool
        :param indent: Indentation level for pretty-printing.
        :type indent: int
        :return: The serialized scenario.
        :rtype: Union[str, dict]
        """
        steps = []
        for step in self.steps:
            record = {"case": step.case, "op": step.delta.kind.value, "owner": step.delta.owner}
            if step.delta.from_count is not None:
                record["from_count"] = step.delta.from_count
            steps.append(record)
        data = make_serializable({"name": self.name, "initial": self.initial.json(), "steps": steps})
        return json.dumps(data, indent=indent) if string else data

    @staticmethod
    def from_dict(data: dict) -> "Scenario":
        """Inverse of :meth:`json`, `initial` may be a serialized dataset or a list of paper records."""
        initial = data["initial"]
        if isinstance(initial, list):
            initial = {"label": data.get("initial_case", ""), "papers": initial}
        steps = []
        for record in data.get("steps", []):
            record = dict(record)
            case = record.pop("case")
            kind = record.pop("op", None)
            steps.append(Step(case=case, delta=Delta(kind=kind, **record)))
        return Scenario(name=data.get("name", ""), initial=Dataset.model_validate(initial), steps=steps)


def apply_delta(dataset: Dataset, delta: Delta, label: str = None) -> Dataset:
    """
    Applies one delta, returning the next snapshot.

    A new paper gets id max id + 1 and no citations. A citation goes to the lowest-id paper of the owner holding
    exactly `from_count` citations.

    :param dataset: The current snapshot.
    :type dataset: Dataset
    :param delta: The change.
    :type delta: Delta
    :param label: Label of the new snapshot.
    :type label: str
    :return: The new snapshot.
    :rtype: Dataset
    :raises ReplayError: If no paper matches a citation delta.
    """
    if delta.kind == DeltaKind.ADD_PAPER:
        return dataset.add_paper(owner=delta.owner, label=label)

    targets = [paper.id for paper in dataset.papers
               if paper.owner == delta.owner and paper.citations == delta.from_count]
    if not targets:
        raise ReplayError(f"Owner '{delta.owner}' has no paper with {delta.from_count} citations to cite")
    return dataset.add_citation(min(targets), label=label)


def replay(scenario: Scenario) -> List[Dataset]:
    """
    Replays a scenario into its snapshots.

    :param scenario: The scenario.
    :type scenario: Scenario
    :return: One snapshot per case, the initial dataset first.
    :rtype: List[Dataset]
    :raises ReplayError: If a step cannot be applied (the message names the step, case and owner).
    """
    snapshots = [scenario.initial]
    for ix, step in enumerate(scenario.steps, start=1):
        try:
            snapshots.append(apply_delta(snapshots[-1], step.delta, label=step.case))
        except ReplayError as e:
            raise ReplayError(f"Scenario '{scenario.name}', step {ix} (case {step.case}, {step.delta}): {e}")
    logger.debug(f"Replayed scenario '{scenario.name}' into {len(snapshots)} snapshots")
    return snapshots


class OwnerDelta(BaseModel):
    """
    Cumulative change of one owner's record between two snapshots.

    :ivar owner: Owner label.
    :vartype owner: str
    :ivar papers_added: Number of new papers.
    :vartype papers_added: int
    :ivar citations_added: Sorted `from_count` values of the received citations.
    :vartype citations_added: Tuple[int, ...]
    """
    model_config = ConfigDict(frozen=True)

    owner: str
    papers_added: int = 0
    citations_added: Tuple[int, ...] = ()

    def is_empty(self) -> bool:
        return self.papers_added == 0 and not self.citations_added

    def same_improvement(self, other: "OwnerDelta") -> bool:
        """Whether both owners changed by exactly the same additions."""
        return self.papers_added == other.papers_added and self.citations_added == other.citations_added


def owner_deltas(scenario: Scenario, i: int, j: int) -> Dict[str, OwnerDelta]:
    """
    Cumulative owner deltas from snapshot `i` to snapshot `j` (indices into :func:`replay`'s output).

    :return: Delta of every owner that changed, keyed by owner.
    :rtype: Dict[str, OwnerDelta]
    """
    if not 0 <= i <= j < len(scenario):
        raise ValueError(f"Invalid snapshot interval ({i}, {j}) for a scenario with {len(scenario)} snapshots")
    papers = Counter()
    citations = {}
    for step in scenario.steps[i:j]:
        if step.delta.kind == DeltaKind.ADD_PAPER:
            papers[step.delta.owner] += 1
        else:
            citations.setdefault(step.delta.owner, []).append(step.delta.from_count)
    return {owner: OwnerDelta(owner=owner,
                              papers_added=papers[owner],
                              citations_added=tuple(sorted(citations.get(owner, []))))
            for owner in sorted(set(papers) | set(citations))}


def example_a() -> Scenario:
    """
    Example A: 40 unattributed papers (A1), then one uncited paper receives eight citations one by one (A2..A9).

    :return: The scenario with cases A1..A9.
    :rtype: Scenario
    """
    steps = [Step(case=f"A{k + 2}", delta=Delta.add_citation(UNATTRIBUTED, k)) for k in range(8)]
    return Scenario(name="A", initial=Dataset.from_histogram("A1", EXAMPLE_A1), steps=steps)


def example_a_variant(uncited: int, singly: int) -> Dataset:
    """
    Case A1 with a different split between uncited and singly cited papers (e.g. 21/9 or 12/18).

    :param uncited: Number of uncited papers.
    :type uncited: int
    :param singly: Number of singly cited papers.
    :type singly: int
    :return: The dataset, labeled "A1-<uncited>/<singly>".
    :rtype: Dataset
    """
    bins = dict(EXAMPLE_A1)
    bins[0], bins[1] = uncited, singly
    return Dataset.from_histogram(f"A1-{uncited}/{singly}", {c: n for c, n in bins.items() if n})


def _example_b1() -> Dataset:
    papers = ()
    for owner, (citations, count) in (("H", (3, 4)), ("M", (2, 4)), ("L", (1, 7))):
        papers += Dataset.from_histogram("", {citations: count}, owner=owner, start_id=len(papers) + 1).papers
    return Dataset(label="B1", papers=papers)


def example_b_endpoints() -> Tuple[Dataset, Dataset, Dict[str, str]]:
    """
    First and last case of example B, and the role of each owner.

    B1 has 15 papers with 27 citations: H owns the 4 triply, M the 4 doubly and L the 7 singly cited papers.
    B73 adds 45 papers of N with 27 citations, for 60 papers with 54 citations in total.

    :return: (B1, B73, owner to role description).
    :rtype: Tuple[Dataset, Dataset, Dict[str, str]]
    """
    b1 = _example_b1()
    newcomer = Dataset.from_histogram("", {3: 3, 2: 5, 1: 8, 0: 29}, owner="N", start_id=b1.next_id())
    b73 = Dataset(label="B73", papers=b1.papers + newcomer.papers)
    return b1, b73, dict(EXAMPLE_B_OWNERS)


def example_b_like() -> Scenario:
    """
    A B-like scenario from B1 to B73 where only N changes: 45 new papers, then 16 citations to uncited,
    8 to singly and 3 to doubly cited papers of N. The first step is the B1 to B2 anchor.

    :return: The scenario with cases B1..B73.
    :rtype: Scenario
    """
    deltas = ([Delta.add_paper("N")] * 45
              + [Delta.add_citation("N", 0)] * 16
              + [Delta.add_citation("N", 1)] * 8
              + [Delta.add_citation("N", 2)] * 3)
    steps = [Step(case=f"B{k + 2}", delta=delta) for k, delta in enumerate(deltas)]
    return Scenario(name="b-like", initial=_example_b1(), steps=steps)


class SynthConfig(BaseModel):
    """
    Parameters of :func:`synth_scenario` (defaults from `config["synth"]`).

    :ivar owners: Number of owners.
    :ivar steps: Number of steps.
    :ivar initial_papers: Papers of the initial dataset (at least one per owner).
    :ivar max_citations: Citation count a paper can reach at most (also bounds initial counts).
    :ivar paper_probability: Probability that a step adds a paper rather than a citation.
    """
    model_config = ConfigDict(frozen=True)

    owners: int = Field(default_factory=lambda: config.config["synth"]["owners"], ge=1)
    steps: int = Field(default_factory=lambda: config.config["synth"]["steps"], ge=0)
    initial_papers: int = Field(default_factory=lambda: config.config["synth"]["initial_papers"], ge=1)
    max_citations: int = Field(default_factory=lambda: config.config["synth"]["max_citations"], ge=0)
    paper_probability: float = Field(default_factory=lambda: config.config["synth"]["paper_probability"],
                                     ge=0, le=1)

    @model_validator(mode="after")
    def _satisfiable(self) -> "SynthConfig":
        if self.initial_papers < self.owners:
            raise ValueError(f"Cannot give each of {self.owners} owners a paper with only "
                             f"{self.initial_papers} initial papers")
        return self


def synth_owner_labels(n: int) -> List[str]:
    """H, L, M, N, then O5, O6, ..."""
    return SYNTH_OWNERS[:n] + [f"O{k}" for k in range(len(SYNTH_OWNERS) + 1, n + 1)]


def synth_scenario(seed: int, synth_config: SynthConfig = None) -> Scenario:
    """
    Reproducible pseudo-random scenario, every citation step being valid when it is applied.

    Each owner gets one initial paper and the remaining ones go to random owners, with random citation counts up
    to `max_citations`. Each step picks a random owner and adds a paper (with `paper_probability`) or cites one of
    its papers below `max_citations`; an owner with no such paper gets a new paper instead.

    :param seed: Random seed.
    :type seed: int
    :param synth_config: Generator parameters.
    :type synth_config: SynthConfig
    :return: The scenario, cases S1..S<steps + 1>.
    :rtype: Scenario
    """
    synth_config = synth_config or SynthConfig()
    rng = random.Random(seed)
    owners = synth_owner_labels(synth_config.owners)

    records = []
    for ix in range(synth_config.initial_papers):
        owner = owners[ix] if ix < len(owners) else rng.choice(owners)
        records.append({"id": ix + 1, "owner": owner, "citations": rng.randint(0, synth_config.max_citations)})
    current = initial = Dataset.from_records(records, label="S1")

    steps = []
    for k in range(synth_config.steps):
        owner = rng.choice(owners)
        citable = sorted(set(p.citations for p in current.by_owner(owner) if p.citations < synth_config.max_citations))
        if rng.random() < synth_config.paper_probability or not citable:
            delta = Delta.add_paper(owner)
        else:
            delta = Delta.add_citation(owner, rng.choice(citable))
        steps.append(Step(case=f"S{k + 2}", delta=delta))
        current = apply_delta(current, delta)
    return Scenario(name=f"synth-{seed}", initial=initial, steps=steps)
