"""Edge-list ingestion and adjacency structure for directed networks."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, TextIO

import numpy as np
from scipy import sparse

logger = logging.getLogger(__name__)

HEADER = ("src", "dst")


class NetworkParseError(ValueError):
    """Raised for malformed edge-list or metadata input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Network:
    """A directed network with densely indexed nodes.

    Edges are ``(src, dst)`` index pairs. ``coords`` holds one
    ``(lon, lat)`` tuple per node (``None`` where unknown) when metadata
    was attached; it is carried for reporting and never enters the math.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[str, ...]
    coords: tuple[tuple[float, float] | None, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("network must have at least one node")
        if len(self.labels) != self.n:
            raise ValueError(f"expected {self.n} labels, got {len(self.labels)}")
        if len(set(self.labels)) != self.n:
            raise ValueError("node labels must be distinct")
        if self.coords is not None and len(self.coords) != self.n:
            raise ValueError("coords must have one entry per node")
        seen = set()
        for src, dst in self.edges:
            if not (0 <= src < self.n and 0 <= dst < self.n):
                raise ValueError(f"edge ({src}, {dst}) out of range for n={self.n}")
            if src == dst:
                raise ValueError(f"self-loop on node {src}")
            if (src, dst) in seen:
                raise ValueError(f"duplicate edge ({src}, {dst})")
            seen.add((src, dst))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   labels: Iterable[str] | None = None) -> "Network":
        labels = tuple(str(i) for i in range(n)) if labels is None else tuple(labels)
        return cls(n=n, edges=tuple((int(s), int(d)) for s, d in edges), labels=labels)


@dataclass(frozen=True)
class LoadReport:
    nodes: int = 0
    edges: int = 0
    duplicates: int = 0
    self_loops: int = 0
    isolated: int = 0
    comments: int = 0
    header: bool = False
    metadata_added: int = 0

    def as_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": self.edges,
            "duplicates": self.duplicates,
            "self_loops": self.self_loops,
            "isolated": self.isolated,
            "comments": self.comments,
            "header": self.header,
            "metadata_added": self.metadata_added,
        }


@dataclass
class _Indexer:
    labels: list[str] = field(default_factory=list)
    index: dict[str, int] = field(default_factory=dict)

    def __call__(self, label: str) -> int:
        idx = self.index.get(label)
        if idx is None:
            idx = self.index[label] = len(self.labels)
            self.labels.append(label)
        return idx


def _is_header(fields: list[str]) -> bool:
    return tuple(f.strip().lower() for f in fields) == HEADER


def _data_rows(source: TextIO):
    """Yield ``(line_number, fields)`` for non-blank, non-comment lines."""
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            yield lineno, None
            continue
        fields = next(csv.reader([stripped], skipinitialspace=True))
        yield lineno, [f.strip() for f in fields]


def load_edge_list(source: TextIO | str) -> tuple[Network, LoadReport]:
    """Parse a ``src,dst`` edge list into a :class:`Network`.

    Nodes are indexed in order of first appearance over all endpoints,
    including endpoints of dropped self-loops. Duplicate edges collapse
    to one and self-loops are dropped; both are counted in the report.
    A leading ``src,dst`` header line is skipped and ``#`` lines are
    comments.
    """
    if isinstance(source, str):
        source = io.StringIO(source)

    indexer = _Indexer()
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    duplicates = self_loops = comments = 0
    header = False
    first_data = True

    for lineno, fields in _data_rows(source):
        if fields is None:
            comments += 1
            continue
        if first_data:
            first_data = False
            if _is_header(fields):
                header = True
                continue
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise NetworkParseError(
                f"expected two fields 'src,dst', got {len(fields)}", line=lineno)
        src, dst = indexer(fields[0]), indexer(fields[1])
        if src == dst:
            self_loops += 1
            continue
        if (src, dst) in seen:
            duplicates += 1
            continue
        seen.add((src, dst))
        edges.append((src, dst))

    if not indexer.labels:
        raise NetworkParseError("empty network")

    net = Network(n=len(indexer.labels), edges=tuple(edges), labels=tuple(indexer.labels))
    report = LoadReport(
        nodes=net.n,
        edges=len(edges),
        duplicates=duplicates,
        self_loops=self_loops,
        isolated=count_isolated(net),
        comments=comments,
        header=header,
    )
    logger.info("load_edge_list %s", " ".join(f"{k}={v}" for k, v in report.as_dict().items()))
    return net, report


def load_edge_list_file(path, encoding: str = "utf-8") -> tuple[Network, LoadReport]:
    with open(path, encoding=encoding, newline="") as fh:
        return load_edge_list(fh)


def attach_metadata(net: Network, source: TextIO | str) -> tuple[Network, int]:
    """Attach ``label,lon,lat`` rows to a network.

    Labels absent from the edge list are appended as isolated nodes so a
    full node roster (including nodes without edges) is retained. Returns
    the new network and the number of nodes added.
    """
    if isinstance(source, str):
        source = io.StringIO(source)

    labels = list(net.labels)
    index = {lab: i for i, lab in enumerate(labels)}
    coords: dict[int, tuple[float, float]] = {}
    first_data = True
    for lineno, fields in _data_rows(source):
        if fields is None:
            continue
        if first_data:
            first_data = False
            if [f.lower() for f in fields] in (["label", "lon", "lat"],
                                               ["label", "longitude", "latitude"]):
                continue
        if len(fields) != 3:
            raise NetworkParseError(
                f"expected three fields 'label,lon,lat', got {len(fields)}", line=lineno)
        label = fields[0]
        try:
            lon, lat = float(fields[1]), float(fields[2])
        except ValueError:
            raise NetworkParseError("longitude/latitude must be numeric", line=lineno) from None
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        coords[index[label]] = (lon, lat)

    added = len(labels) - net.n
    out = replace(net, n=len(labels), labels=tuple(labels),
                  coords=tuple(coords.get(i) for i in range(len(labels))))
    return out, added


def render(net: Network) -> str:
    """Render a network back to edge-list text (header included)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for src, dst in net.edges:
        writer.writerow((net.labels[src], net.labels[dst]))
    return buf.getvalue()


def adjacency(net: Network) -> sparse.csr_array:
    """Binary adjacency with the column-source convention: ``A[dst, src] = 1``."""
    n = net.n
    if net.edges:
        src, dst = np.array(net.edges, dtype=np.int64).T
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    data = np.ones(len(src), dtype=np.int8)
    A = sparse.csr_array((data, (dst, src)), shape=(n, n))
    A.sum_duplicates()
    return A


def out_degrees(A) -> np.ndarray:
    """Column sums of the adjacency matrix: ``outDeg[j] = sum_i A[i, j]``."""
    return np.asarray(A.sum(axis=0), dtype=np.int64).ravel()


def count_isolated(net: Network) -> int:
    touched = np.zeros(net.n, dtype=bool)
    for src, dst in net.edges:
        touched[src] = touched[dst] = True
    return int((~touched).sum())
