"""
Readers and writers for run artifacts.

Graphs use ``n m`` followed by one ``u v`` line per edge (u < v). Per-node
vectors, trees, DE traces and curves are headed CSV files; floats are
written with 17 significant digits so they read back bit-exactly. All
writes go through ``FileHandler.atomic_write_text``.
"""
import io
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import FileProcessingError
from app.core.file_handler import FileHandler
from app.models.analysis_models import ExitCurve
from app.models.channel_models import SideInfoChannel
from app.models.graph_models import Graph, LabeledTree

FLOAT_FMT = "%.17g"
INT_FMT = "%d"


def _write_csv(path: Path, header: Sequence[str], columns: Sequence[np.ndarray], fmts: Sequence[str]) -> Path:
    buffer = io.StringIO()
    buffer.write(",".join(header) + "\n")
    if columns and np.asarray(columns[0]).size:
        table = np.column_stack([np.asarray(c, dtype=float if f == FLOAT_FMT else np.int64) for c, f in zip(columns, fmts)])
        np.savetxt(buffer, table, fmt=list(fmts), delimiter=",")
    return FileHandler.atomic_write_text(path, buffer.getvalue())


def _read_csv(path: Path, header: Sequence[str]) -> np.ndarray:
    """Rows of a headed CSV as a float array of shape (rows, len(header))."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FileProcessingError(f"Cannot read {path}", details={"path": str(path), "reason": str(e)}) from e
    if not lines or lines[0].strip() != ",".join(header):
        raise FileProcessingError(
            f"Unexpected header in {path}",
            details={"path": str(path), "expected": ",".join(header), "found": lines[0] if lines else ""}
        )
    body = [line for line in lines[1:] if line.strip()]
    if not body:
        return np.empty((0, len(header)))
    try:
        return np.loadtxt(io.StringIO("\n".join(body)), delimiter=",", ndmin=2)
    except ValueError as e:
        raise FileProcessingError(f"Malformed rows in {path}", details={"path": str(path), "reason": str(e)}) from e


def _node_column(path: Path, header: Tuple[str, str], dtype) -> np.ndarray:
    rows = _read_csv(path, header)
    ids = rows[:, 0].astype(np.int64)
    if not np.array_equal(ids, np.arange(ids.size)):
        raise FileProcessingError(f"node ids in {path} must be 0..n-1 in order", details={"path": str(path)})
    return rows[:, 1].astype(dtype)


def write_graph(path: Path, graph: Graph) -> Path:
    edges = graph.edge_list()
    buffer = io.StringIO()
    buffer.write(f"{graph.n} {edges.shape[0]}\n")
    if edges.size:
        np.savetxt(buffer, edges, fmt=INT_FMT, delimiter=" ")
    return FileHandler.atomic_write_text(path, buffer.getvalue())


def read_graph(path: Path) -> Graph:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        n, m = (int(x) for x in lines[0].split())
        body = [line for line in lines[1:] if line.strip()]
        edges = np.loadtxt(io.StringIO("\n".join(body)), dtype=np.int64, ndmin=2) if body else np.empty((0, 2), dtype=np.int64)
    except (OSError, ValueError, IndexError) as e:
        raise FileProcessingError(f"Cannot read graph file {path}", details={"path": str(path), "reason": str(e)}) from e
    if edges.shape[0] != m:
        raise FileProcessingError(
            f"Graph file {path} declares {m} edges but lists {edges.shape[0]}",
            details={"path": str(path)}
        )
    if m and (edges.min() < 0 or edges.max() >= n):
        raise FileProcessingError(f"Graph file {path} has node ids outside [0, n)", details={"path": str(path)})
    return Graph.from_edges(n, edges[:, 0], edges[:, 1])


def write_labels(path: Path, labels: np.ndarray) -> Path:
    labels = np.asarray(labels)
    return _write_csv(path, ("node_id", "label"), (np.arange(labels.size), labels), (INT_FMT, INT_FMT))


def read_labels(path: Path) -> np.ndarray:
    return _node_column(path, ("node_id", "label"), np.int8)


def write_side_info(path: Path, symbols: np.ndarray) -> Path:
    symbols = np.asarray(symbols)
    return _write_csv(path, ("node_id", "symbol_index"), (np.arange(symbols.size), symbols), (INT_FMT, INT_FMT))


def read_side_info(path: Path) -> np.ndarray:
    return _node_column(path, ("node_id", "symbol_index"), np.int64)


def write_channel(path: Path, channel: SideInfoChannel) -> Path:
    return FileHandler.write_json(path, channel.to_json_dict())


def read_channel(path: Path) -> SideInfoChannel:
    payload = FileHandler.read_json(path)
    try:
        return SideInfoChannel.from_json_dict(payload)
    except (KeyError, ValueError) as e:
        raise FileProcessingError(f"Invalid channel file {path}", details={"path": str(path), "reason": str(e)}) from e


def write_tree(path: Path, tree: LabeledTree) -> Path:
    return _write_csv(
        path,
        ("node_id", "parent_id", "depth", "label", "symbol"),
        (np.arange(tree.size), tree.parent, tree.depth, tree.label, tree.symbol),
        (INT_FMT,) * 5,
    )


def read_tree(path: Path, max_depth: Optional[int] = None) -> LabeledTree:
    """Read a tree; ``max_depth`` defaults to the deepest node present."""
    rows = _read_csv(path, ("node_id", "parent_id", "depth", "label", "symbol")).astype(np.int64)
    if rows.shape[0] == 0:
        raise FileProcessingError(f"Tree file {path} has no root", details={"path": str(path)})
    depth = rows[:, 2]
    return LabeledTree(
        parent=rows[:, 1],
        depth=depth,
        label=rows[:, 3].astype(np.int8),
        symbol=rows[:, 4],
        max_depth=int(depth.max()) if max_depth is None else int(max_depth),
    )


def write_beliefs(path: Path, beliefs: np.ndarray) -> Path:
    beliefs = np.asarray(beliefs, dtype=float)
    return _write_csv(path, ("node_id", "belief"), (np.arange(beliefs.size), beliefs), (INT_FMT, FLOAT_FMT))


def read_beliefs(path: Path) -> np.ndarray:
    return _node_column(path, ("node_id", "belief"), float)


def write_estimates(path: Path, estimates: np.ndarray) -> Path:
    """±1 labels for the symmetric model, 1/0 membership for the single model."""
    estimates = np.asarray(estimates)
    return _write_csv(path, ("node_id", "estimate"), (np.arange(estimates.size), estimates), (INT_FMT, INT_FMT))


def read_estimates(path: Path) -> np.ndarray:
    return _node_column(path, ("node_id", "estimate"), np.int8)


def write_de_trace(path: Path, states: Sequence[float], errors: Sequence[float]) -> Path:
    states = np.asarray(states, dtype=float)
    return _write_csv(
        path, ("t", "state", "predicted_error"),
        (np.arange(states.size), states, np.asarray(errors, dtype=float)),
        (INT_FMT, FLOAT_FMT, FLOAT_FMT),
    )


def read_de_trace(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    rows = _read_csv(path, ("t", "state", "predicted_error"))
    return rows[:, 1], rows[:, 2]


def write_curve(path: Path, curve: ExitCurve) -> Tuple[Path, Path]:
    """CSV ``i_in,i_out`` plus a companion JSON with crossings, staircase and parameters."""
    csv_path = _write_csv(path, ("i_in", "i_out"), (curve.i_in, curve.i_out), (FLOAT_FMT, FLOAT_FMT))
    json_path = FileHandler.write_json(Path(path).with_suffix(".json"), curve.model_dump(mode="json"))
    return csv_path, json_path


def read_curve(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    rows = _read_csv(path, ("i_in", "i_out"))
    return rows[:, 0], rows[:, 1]


def read_curve_summary(path: Path) -> ExitCurve:
    return ExitCurve.model_validate(FileHandler.read_json(Path(path).with_suffix(".json")))


def write_records(path: Path, header: Sequence[str], records: List[Dict[str, float]]) -> Path:
    """Generic float table, used for scan evaluations."""
    columns = [np.array([r[h] for r in records], dtype=float) for h in header]
    return _write_csv(path, header, columns, (FLOAT_FMT,) * len(header))
