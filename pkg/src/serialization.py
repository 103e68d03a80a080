"""
JSON codecs for pairs, channels, families and results, plus the curve CSV writer.

JSON floats use Python's shortest round-trip repr, so parse(emit(x)) == x
bit for bit. CSV floats are written with 17 significant digits.
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, TextIO, Tuple, Union

from src.channels.ldp import LpFamily
from src.channels.threshold import ThresholdPartition
from src.constructions.complexity import SampleComplexityEstimate
from src.errors import DimensionMismatchError, SerializationError
from src.models.distributions import Channel, Distribution
from src.optimization.optimizer import Certificate, OptResult
from src.simulation.protocol_simulator import ErrorReport

PathLike = Union[str, Path]

CURVE_HEADER = ("eps", "e_eps", "n_hat", "certificate")


def parse_json(text: str) -> Dict[str, Any]:
    """
    Parse a JSON object.

    Raises:
        SerializationError: If the text is not valid JSON or not an object
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SerializationError(f"invalid JSON: {e}") from e
    if not isinstance(data, dict):
        raise SerializationError(f"expected a JSON object, got {type(data).__name__}")
    return data


def to_json(data: Dict[str, Any]) -> str:
    return json.dumps(data, indent=2)


def _field(data: Dict[str, Any], key: str) -> Any:
    if key not in data:
        raise SerializationError(f"missing field {key!r}")
    return data[key]


def _float_list(value: Any, what: str) -> List[float]:
    if not isinstance(value, list) or not value:
        raise SerializationError(f"{what} must be a non-empty list of numbers")
    if any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in value):
        raise SerializationError(f"{what} must contain only numbers")
    return [float(x) for x in value]


# ============================================================================
# PAIRS AND CHANNELS
# ============================================================================

def pair_to_dict(p: Distribution, q: Distribution) -> Dict[str, Any]:
    return {"p": p.to_list(), "q": q.to_list()}


def pair_from_dict(data: Dict[str, Any]) -> Tuple[Distribution, Distribution]:
    """
    Build (p, q) from {"p": [...], "q": [...]}.

    Raises:
        SerializationError: On missing or non-numeric fields
        DimensionMismatchError: If p and q have different lengths
        InvalidDistributionError: If either side is not a distribution
    """
    p = _float_list(_field(data, "p"), "p")
    q = _float_list(_field(data, "q"), "q")
    if len(p) != len(q):
        raise DimensionMismatchError(f"p has {len(p)} entries, q has {len(q)}")
    return Distribution(p), Distribution(q)


def channel_to_dict(channel: Channel) -> Dict[str, Any]:
    return {"matrix": channel.to_rows()}


def channel_from_dict(data: Dict[str, Any]) -> Channel:
    """
    Build a channel from {"matrix": [[...], ...]} (row-major, l rows of k entries).

    Raises:
        SerializationError: On a missing, ragged or non-numeric matrix
    """
    rows = _field(data, "matrix")
    if not isinstance(rows, list) or not rows:
        raise SerializationError("matrix must be a non-empty list of rows")
    matrix = [_float_list(row, f"matrix row {index}") for index, row in enumerate(rows)]
    if len({len(row) for row in matrix}) != 1:
        raise SerializationError("matrix rows have different lengths")
    return Channel(matrix)


def family_from_dict(data: Dict[str, Any]) -> LpFamily:
    """Build an LpFamily from {"gamma": [...], "nu": [...], "k": int, "l": int}."""
    gamma = _float_list(_field(data, "gamma"), "gamma")
    nu = _float_list(_field(data, "nu"), "nu")
    k = _field(data, "k")
    if isinstance(k, bool) or not isinstance(k, int):
        raise SerializationError("k must be an integer")
    payload = {"gamma": gamma, "nu": nu, "k": k}
    if "l" in data:
        payload["l"] = data["l"]
    return LpFamily.from_dict(payload)


# ============================================================================
# RESULTS
# ============================================================================

def partition_to_dict(partition: ThresholdPartition) -> Dict[str, Any]:
    return {
        "k": partition.k,
        "l": partition.l,
        "cuts": list(partition.cuts),
        "labeling": list(partition.labeling),
    }


def certificate_to_dict(certificate: Certificate) -> Dict[str, Any]:
    data = {
        "kind": certificate.kind,
        "partition": partition_to_dict(certificate.partition),
        "inner": certificate.inner.to_rows(),
    }
    if certificate.outer is not None:
        data["outer"] = certificate.outer.to_rows()
        data["pattern_index"] = certificate.pattern_index
    return data


def result_to_dict(result: OptResult) -> Dict[str, Any]:
    return {
        "objective": str(result.objective),
        "value": result.value,
        "matrix": result.channel.to_rows(),
        "certificate": certificate_to_dict(result.certificate),
    }


def estimate_to_dict(estimate: SampleComplexityEstimate) -> Dict[str, Any]:
    return {
        "eps": estimate.eps,
        "e_eps": estimate.e_eps,
        "l": estimate.l,
        "value": estimate.value,
        "n_hat": estimate.n_hat,
        "certificate": estimate.certificate,
    }


def error_report_to_dict(report: ErrorReport) -> Dict[str, Any]:
    return {
        "n": report.n,
        "trials": report.trials,
        "type_one": report.type_one,
        "type_two": report.type_two,
        "error_sum": report.error_sum,
        "half_width": report.half_width,
    }


# ============================================================================
# FILES
# ============================================================================

def read_json(path: PathLike) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SerializationError(f"cannot read {path}: {e}") from e
    return parse_json(text)


def load_pair(path: PathLike) -> Tuple[Distribution, Distribution]:
    return pair_from_dict(read_json(path))


def load_channel(path: PathLike) -> Channel:
    return channel_from_dict(read_json(path))


def write_json(path: Optional[PathLike], data: Dict[str, Any], stream: Optional[TextIO] = None) -> None:
    """Write data as JSON to path, or to stream when path is None."""
    text = to_json(data) + "\n"
    if path is None:
        if stream is not None:
            stream.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")


def write_curve_csv(stream: TextIO, curve: Iterable[SampleComplexityEstimate]) -> int:
    """
    Write curve rows as `eps,e_eps,n_hat,certificate` with .17g floats.

    Returns:
        Number of data rows written
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CURVE_HEADER)
    rows = 0
    for point in curve:
        writer.writerow([
            format(point.eps, ".17g"),
            format(point.e_eps, ".17g"),
            format(point.n_hat, ".17g"),
            point.certificate,
        ])
        rows += 1
    return rows


def read_curve_csv(stream: TextIO) -> List[Dict[str, Any]]:
    """
    Read rows written by write_curve_csv.

    Raises:
        SerializationError: On a wrong header or unparsable number
    """
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(header) != CURVE_HEADER:
        raise SerializationError(f"curve CSV must start with {','.join(CURVE_HEADER)}")
    rows = []
    for line, row in enumerate(reader, start=2):
        if len(row) != len(CURVE_HEADER):
            raise SerializationError(f"line {line}: expected {len(CURVE_HEADER)} fields, got {len(row)}")
        try:
            rows.append({
                "eps": float(row[0]),
                "e_eps": float(row[1]),
                "n_hat": float(row[2]),
                "certificate": row[3],
            })
        except ValueError as e:
            raise SerializationError(f"line {line}: {e}") from e
    return rows
