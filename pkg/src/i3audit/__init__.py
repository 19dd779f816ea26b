"""
i3audit: Percentile Rank Class Citation Indicators and Ranking Consistency Audits

This package computes percentile-rank-class citation impact indicators (I3 and its size-normalized
counterpart R) over citation datasets under different counting, tie-breaking and fractional scoring rules,
replays dataset-evolution scenarios and audits the resulting per-scientist rankings for consistency.
All percentages and weights are exact rationals (`fractions.Fraction`); decimals only appear when printing.

Main components:

    - Paper, Dataset, CitationHistogram, ClassScheme: the core data structures (this module).
    - scoring: weights, I3, R and per-owner reports under a ScoringPolicy.
    - evolution: scenarios of additive deltas, replay and the builtin examples.
    - audit: same-improvement and strict-independence consistency checks.
    - oracle: independent brute-force reference implementations.
    - cli: the `i3audit` command-line interface.
"""
import json
import bisect
import logging
import importlib

from fractions import Fraction
from collections import Counter
from typing import Dict, List, Optional, Tuple, Union
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .util import make_serializable, to_rational

__version__ = "0.1.0"

logging.basicConfig(
    level=logging.INFO,
    format='[%(asctime)s] %(levelname)s:%(name)s:%(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)

# import config sumbodule as "config" attribute of the package
config = importlib.import_module("i3audit.config")

UNATTRIBUTED = "_"

# Exact rational values used throughout the package
Rational = Fraction


class EmptyReferenceSetError(ValueError):
    """Raised when an indicator is requested for a dataset without papers."""


class UnknownCitationBinError(ValueError):
    """Raised when a citation count is looked up that no paper of the dataset has."""


class Paper(BaseModel):
    """
    A single publication.

    :ivar id: Identifier, unique within a dataset.
    :vartype id: int
    :ivar owner: Label of the scientist the paper is attributed to ("_" if unattributed).
    :vartype owner: str
    :ivar citations: Number of citations received.
    :vartype citations: int
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: int
    owner: str = UNATTRIBUTED
    citations: int = Field(default=0, ge=0)

    @field_validator("owner")
    @classmethod
    def _non_empty_owner(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("owner label must be a non-empty string")
        return value

    def __str__(self):
        return f"#{self.id} ({self.owner}): {self.citations}"


class Dataset(BaseModel):
    """
    A snapshot of the reference set: all papers of one case (e.g. "A1" or "B2").

    Datasets are immutable, operations like :meth:`add_paper` return a new dataset.

    :ivar label: Case name.
    :vartype label: str
    :ivar papers: The papers, in insertion order.
    :vartype papers: Tuple[Paper, ...]
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    label: str = ""
    papers: Tuple[Paper, ...] = ()

    @field_validator("papers")
    @classmethod
    def _unique_ids(cls, papers: Tuple[Paper, ...]) -> Tuple[Paper, ...]:
        ids = Counter(paper.id for paper in papers)
        duplicated = sorted(pid for pid, count in ids.items() if count > 1)
        if duplicated:
            raise ValueError(f"paper ids must be unique, duplicated: {duplicated}")
        return papers

    def __len__(self):
        return len(self.papers)

    def __iter__(self):
        return iter(self.papers)

    @property
    def n_tot(self) -> int:
        """Total number of papers."""
        return len(self.papers)

    @property
    def total_citations(self) -> int:
        """Total number of citations."""
        return sum(paper.citations for paper in self.papers)

    def owners(self) -> List[str]:
        """
        Returns the sorted list of distinct owner labels (including "_" if present).

        :return: Owner labels.
        :rtype: List[str]
        """
        return sorted(set(paper.owner for paper in self.papers))

    def by_owner(self, owner: str) -> List[Paper]:
        """Returns the papers attributed to `owner`."""
        return [paper for paper in self.papers if paper.owner == owner]

    def get(self, paper_id: int) -> Paper:
        """Returns the paper with the given id."""
        for paper in self.papers:
            if paper.id == paper_id:
                return paper
        raise KeyError(f"No paper with id {paper_id} in dataset '{self.label}'")

    def next_id(self) -> int:
        """Id that the next added paper will get (max id + 1, or 1 for an empty dataset)."""
        return max((paper.id for paper in self.papers), default=0) + 1

    def relabel(self, label: str) -> "Dataset":
        """Returns the same papers under a new case label."""
        return self.model_copy(update={"label": label})

    def add_paper(self, owner: str = UNATTRIBUTED, citations: int = 0, label: str = None) -> "Dataset":
        """
        Returns a new dataset with one more paper appended.

        :param owner: Owner of the new paper.
        :type owner: str
        :param citations: Citations of the new paper.
        :type citations: int
        :param label: Label of the new dataset (defaults to the current one).
        :type label: str
        :return: The new dataset.
        :rtype: Dataset
        """
        paper = Paper(id=self.next_id(), owner=owner, citations=citations)
        return Dataset(label=self.label if label is None else label, papers=self.papers + (paper,))

    def add_citation(self, paper_id: int, label: str = None) -> "Dataset":
        """
        Returns a new dataset where the paper `paper_id` has one more citation.

        :param paper_id: Id of the cited paper.
        :type paper_id: int
        :param label: Label of the new dataset (defaults to the current one).
        :type label: str
        :return: The new dataset.
        :rtype: Dataset
        """
        self.get(paper_id)
        papers = tuple(paper.model_copy(update={"citations": paper.citations + 1}) if paper.id == paper_id
                       else paper
                       for paper in self.papers)
        return Dataset(label=self.label if label is None else label, papers=papers)

    def description(self) -> str:
        """Human-readable one line per owner summary."""
        lines = [f"{self.label or '(unlabeled)'}: {self.n_tot} papers, {self.total_citations} citations"]
        for owner in self.owners():
            papers = self.by_owner(owner)
            counts = ", ".join(f"c{c}x{n}" for c, n in sorted(Counter(p.citations for p in papers).items()))
            lines.append(f"  {owner}: {len(papers)} papers ({counts})")
        return "\n".join(lines)

    def json(self, string: bool = False, indent: int = 2):
        """
        Serializes the dataset to JSON.

        :param string: If True, returns a JSON string; otherwise, returns a dict.
        :type string: bool
        :param indent: Indentation level for pretty-printing.
        :type indent: int
        :return: The serialized dataset.
        :rtype: Union[str, dict]
        """
        data = self.model_dump()
        make_serializable(data)
        return json.dumps(data, indent=indent) if string else data

    @staticmethod
    def from_records(records: List[dict], label: str = "") -> "Dataset":
        """
        Builds a dataset from a list of `{id, owner, citations}` records.

        :param records: The paper records.
        :type records: List[dict]
        :param label: Case name.
        :type label: str
        :return: The dataset.
        :rtype: Dataset
        """
        return Dataset(label=label, papers=tuple(Paper.model_validate(record) for record in records))

    @staticmethod
    def from_histogram(label: str, bins: Dict[int, int], owner: str = UNATTRIBUTED, start_id: int = 1) -> "Dataset":
        """
        Builds a dataset with `bins[c]` papers cited `c` times each, ids assigned in the order of `bins`.

        :param label: Case name.
        :type label: str
        :param bins: Citation count to number of papers.
        :type bins: Dict[int, int]
        :param owner: Owner of all the papers.
        :type owner: str
        :param start_id: Id of the first paper.
        :type start_id: int
        :return: The dataset.
        :rtype: Dataset
        """
        papers = []
        for citations, count in bins.items():
            if count < 0:
                raise ValueError(f"Negative number of papers ({count}) for citation count {citations}")
            for _ in range(count):
                papers.append(Paper(id=start_id + len(papers), owner=owner, citations=citations))
        return Dataset(label=label, papers=tuple(papers))


class CitationHistogram(BaseModel):
    """
    Number of papers n(c) per distinct citation count c, sorted by c.

    :ivar bins: Citation count to number of papers.
    :vartype bins: Dict[int, int]
    """
    model_config = ConfigDict(frozen=True)

    bins: Dict[int, int]

    @field_validator("bins")
    @classmethod
    def _sorted_positive(cls, bins: Dict[int, int]) -> Dict[int, int]:
        if any(c < 0 or n < 1 for c, n in bins.items()):
            raise ValueError("citation counts must be non-negative and bin sizes positive")
        return dict(sorted(bins.items()))

    @property
    def n_tot(self) -> int:
        return sum(self.bins.values())

    @property
    def total_citations(self) -> int:
        return sum(c * n for c, n in self.bins.items())

    def fewer_than(self, c: int) -> int:
        """
        Number of papers n_<(c) with strictly fewer citations than `c` (tied papers are not counted).

        :param c: A citation count present in the histogram.
        :type c: int
        :return: n_<(c).
        :rtype: int
        :raises UnknownCitationBinError: If no paper has exactly `c` citations.
        """
        if c not in self.bins:
            raise UnknownCitationBinError(f"No paper with {c} citations (bins: {list(self.bins)})")
        return sum(n for c_other, n in self.bins.items() if c_other < c)

    def counts(self, max_c: int = None) -> List[int]:
        """Dense row n(0), n(1), ..., n(max_c) (zeros for absent counts)."""
        max_c = max(self.bins, default=0) if max_c is None else max_c
        return [self.bins.get(c, 0) for c in range(max_c + 1)]


class ClassScheme(BaseModel):
    """
    Percentile rank classes: cumulative percentage boundaries with one weight per class.

    Class `k` (1-based) spans percentages from `boundaries[k - 2]` (0 for the first class) to `boundaries[k - 1]`.

    :ivar boundaries: Strictly increasing cumulative percentages, the last one being 100.
    :vartype boundaries: Tuple[Fraction, ...]
    :ivar weights: Positive weight of each class.
    :vartype weights: Tuple[Fraction, ...]
    :ivar name: Display name.
    :vartype name: Optional[str]
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    boundaries: Tuple[Fraction, ...]
    weights: Tuple[Fraction, ...]
    name: Optional[str] = None

    @field_validator("boundaries", "weights", mode="before")
    @classmethod
    def _to_rationals(cls, values) -> Tuple[Fraction, ...]:
        if not isinstance(values, (list, tuple)):
            raise ValueError(f"expected a list of numbers, got {values!r}")
        return tuple(to_rational(value) for value in values)

    @model_validator(mode="after")
    def _check(self) -> "ClassScheme":
        if not self.boundaries:
            raise ValueError("a class scheme needs at least one class")
        if len(self.boundaries) != len(self.weights):
            raise ValueError(f"got {len(self.boundaries)} boundaries but {len(self.weights)} weights")
        if any(lo >= hi for lo, hi in zip((0,) + self.boundaries, self.boundaries)):
            raise ValueError(f"boundaries must be positive and strictly increasing, got {self.boundaries}")
        if self.boundaries[-1] != 100:
            raise ValueError(f"the last boundary must be 100, got {self.boundaries[-1]}")
        if any(weight <= 0 for weight in self.weights):
            raise ValueError("class weights must be positive")
        return self

    def __len__(self):
        return len(self.boundaries)

    @property
    def widths(self) -> Tuple[Fraction, ...]:
        """Percentage width of each class."""
        return tuple(hi - lo for lo, hi in zip((Fraction(0),) + self.boundaries, self.boundaries))

    @property
    def min_weight(self) -> Fraction:
        return min(self.weights)

    @property
    def max_weight(self) -> Fraction:
        return max(self.weights)

    @property
    def label(self) -> str:
        return self.name or f"{len(self)}PR"

    def class_of(self, percentage: Fraction, inclusive: bool = False) -> int:
        """
        1-based class of a percentage position.

        With `inclusive=False` the class is the first one with `percentage < boundary` (strict comparison),
        otherwise the first one with `percentage <= boundary`. Positions past the last boundary fall in the
        top class.

        :param percentage: The exact percentage.
        :type percentage: Fraction
        :param inclusive: Whether a boundary belongs to the class it closes.
        :type inclusive: bool
        :return: The class number.
        :rtype: int
        """
        if inclusive:
            index = bisect.bisect_left(self.boundaries, percentage)
        else:
            index = bisect.bisect_right(self.boundaries, percentage)
        return min(index, len(self.boundaries) - 1) + 1

    def weight_of(self, class_index: int) -> Fraction:
        """Weight of the 1-based class `class_index`."""
        if not 1 <= class_index <= len(self.weights):
            raise ValueError(f"class {class_index} out of range 1..{len(self.weights)}")
        return self.weights[class_index - 1]

    def integral(self, lo: Fraction, hi: Fraction) -> Fraction:
        """
        Integral of the class weight over the percentage interval (lo, hi].

        :param lo: Lower end (percentage).
        :type lo: Fraction
        :param hi: Upper end (percentage).
        :type hi: Fraction
        :return: Sum over classes of overlap width times class weight.
        :rtype: Fraction
        """
        total = Fraction(0)
        for start, end, weight in zip((Fraction(0),) + self.boundaries, self.boundaries, self.weights):
            overlap = min(hi, end) - max(lo, start)
            if overlap > 0:
                total += overlap * weight
        return total

    @staticmethod
    def six_pr() -> "ClassScheme":
        """The 6PR scheme: bottom 50%, 50-75%, 75-90%, 90-95%, 95-99% and top 1%, weighted 1 to 6."""
        return ClassScheme(boundaries=[50, 75, 90, 95, 99, 100], weights=[1, 2, 3, 4, 5, 6], name="6PR")

    @staticmethod
    def uniform(k: int) -> "ClassScheme":
        """
        `k` classes of equal width weighted 1..k (k = 100 gives percentiles as weights).

        :param k: Number of classes, must divide into exact rational widths (any positive integer works).
        :type k: int
        :return: The scheme.
        :rtype: ClassScheme
        """
        if k < 1:
            raise ValueError("k must be a positive integer")
        return ClassScheme(boundaries=[Fraction(100 * i, k) for i in range(1, k + 1)],
                           weights=list(range(1, k + 1)),
                           name=f"{k}PR")

    @staticmethod
    def default() -> "ClassScheme":
        """The scheme configured in `config["scheme"]` (6PR unless changed)."""
        scheme = config.config["scheme"]
        return ClassScheme(boundaries=scheme["boundaries"], weights=scheme["weights"], name=scheme.get("name"))


def histogram(dataset: Dataset) -> CitationHistogram:
    """
    Counts the papers per distinct citation count.

    :param dataset: A non-empty dataset.
    :type dataset: Dataset
    :return: The citation histogram.
    :rtype: CitationHistogram
    :raises EmptyReferenceSetError: If the dataset has no papers.
    """
    if not dataset.papers:
        raise EmptyReferenceSetError(f"Empty reference set: dataset '{dataset.label}' has no papers")
    return CitationHistogram(bins=Counter(paper.citations for paper in dataset.papers))


def fewer_than(hist: CitationHistogram, c: int) -> int:
    """Number of papers in `hist` with strictly fewer than `c` citations, see :meth:`CitationHistogram.fewer_than`."""
    return hist.fewer_than(c)


def theoretical_mean(scheme: ClassScheme) -> Fraction:
    """
    Mean class weight of a continuous distribution: sum of width times weight over 100.

    :param scheme: The class scheme.
    :type scheme: ClassScheme
    :return: The exact mean weight (191/100 for 6PR).
    :rtype: Fraction
    """
    return scheme.integral(Fraction(0), Fraction(100)) / 100


def as_dataset(data: Union[Dataset, dict, List[dict]], label: str = "") -> Dataset:
    """Coerces a dataset, a serialized dataset or a list of paper records into a :class:`Dataset`."""
    if isinstance(data, Dataset):
        return data
    if isinstance(data, dict):
        return Dataset.model_validate(data)
    return Dataset.from_records(data, label=label)
