"""Data ingestion and model/trace serialization."""
import json

import numpy as np

from .core import Dataset, check_labels
from .mkl import FitTrace, MKLModel

FORMAT_VERSION = 1

_LABELS = {"+1": 1, "1": 1, "-1": -1}


class FormatError(ValueError):
    pass


def _records(stream):
    for lineno, line in enumerate(stream, 1):
        if isinstance(line, bytes):
            line = line.decode()
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_libsvm(stream, expected_dim=None):
    """Read LIBSVM sparse text into a dense Dataset.

    Feature indices are 1-based and must be strictly increasing on each
    line; absent features are 0.  The dimension is the largest index seen
    unless ``expected_dim`` is given, in which case larger indices are an
    error.
    """
    labels, rows = [], []
    dim = 0
    for lineno, line in _records(stream):
        tokens = line.split()
        if tokens[0] not in _LABELS:
            raise FormatError("line %d: label %r is not one of +1, 1, -1" % (lineno, tokens[0]))
        labels.append(_LABELS[tokens[0]])
        feats = []
        last = 0
        for tok in tokens[1:]:
            idx, sep, val = tok.partition(":")
            try:
                if not sep:
                    raise ValueError
                idx, val = int(idx), float(val)
            except ValueError:
                raise FormatError("line %d: malformed pair %r" % (lineno, tok)) from None
            if idx <= last:
                raise FormatError("line %d: feature indices must be >= 1 and strictly "
                                  "increasing (%d after %d)" % (lineno, idx, last))
            if expected_dim is not None and idx > expected_dim:
                raise FormatError("line %d: index %d exceeds dimension %d"
                                  % (lineno, idx, expected_dim))
            last = idx
            feats.append((idx, val))
        dim = max(dim, last)
        rows.append(feats)
    if expected_dim is not None:
        dim = expected_dim
    X = np.zeros((len(rows), dim))
    for i, feats in enumerate(rows):
        for idx, val in feats:
            X[i, idx - 1] = val
    kind = "binary" if np.all((X == 0) | (X == 1)) else "real"
    return Dataset(X, np.array(labels, dtype=np.int64), kind)


def format_libsvm(dataset):
    lines = []
    for x, label in zip(dataset.X, dataset.y):
        parts = ["+1" if label == 1 else "-1"]
        parts.extend("%d:%r" % (j + 1, float(v)) for j, v in enumerate(x) if v != 0)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n" if lines else ""


def parse_strings(stream):
    """One string per line; a tab separates an optional leading label.

    Strings are kept as raw bytes.
    """
    labels, strings = [], []
    for lineno, raw in enumerate(stream, 1):
        if isinstance(raw, str):
            raw = raw.encode()
        raw = raw.rstrip(b"\r\n")
        if not raw:
            continue
        if b"\t" in raw:
            label, _, s = raw.partition(b"\t")
            label = label.decode().strip()
            if label not in _LABELS:
                raise FormatError("line %d: label %r is not one of +1, 1, -1" % (lineno, label))
            labels.append(_LABELS[label])
        else:
            s = raw
        strings.append(s)
    if labels and len(labels) != len(strings):
        raise FormatError("either every line or no line must carry a label")
    return Dataset(tuple(strings), np.array(labels) if labels else None, "string")


def load_dataset(path, fmt="libsvm", expected_dim=None):
    with open(path, "rb") as f:
        if fmt == "strings":
            return parse_strings(f)
        return parse_libsvm(f, expected_dim)


# ---------------------------------------------------------------- models

def _floats(a):
    return [float(v) for v in a]


def model_to_dict(model, data=None, extra=None):
    specs = model.specs
    doc = {
        "format_version": FORMAT_VERSION,
        "algorithm": model.algorithm,
        "hyperparameters": dict(model.hyperparameters),
        "kernels": "precomputed" if specs is None else [str(s) for s in specs],
        "eta": _floats(model.eta),
        "gamma": _floats(model.gamma),
        "bias": float(model.bias),
        "labels": [int(v) for v in model.labels],
        "objective": float(model.objective),
        "iterations": int(model.iterations),
    }
    if model.relevances is not None:
        doc["relevances"] = _floats(model.relevances)
    if data is not None:
        if data.kind == "string":
            X = [s.decode("latin-1") for s in data.X]
        else:
            X = [_floats(row) for row in data.X]
        doc["data"] = {"kind": data.kind, "X": X}
    if extra:
        doc.update(extra)
    return doc


def dumps_model(model, data=None, extra=None):
    return json.dumps(model_to_dict(model, data, extra), indent=1, sort_keys=True) + "\n"


def loads_model(text):
    """Return ``(model, training Dataset or None, raw document)``."""
    from .kernels import parse_specs

    doc = json.loads(text)
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError("unsupported model format version %r" % doc.get("format_version"))
    kernels = doc["kernels"]
    specs = None if kernels == "precomputed" else tuple(
        s for k in kernels for s in parse_specs(k))
    labels = check_labels(doc["labels"])
    model = MKLModel(
        eta=np.array(doc["eta"], dtype=np.float64),
        gamma=np.array(doc["gamma"], dtype=np.float64),
        bias=float(doc["bias"]),
        labels=labels,
        algorithm=doc["algorithm"],
        hyperparameters=doc["hyperparameters"],
        specs=specs,
        objective=float(doc["objective"]),
        relevances=None if "relevances" not in doc else np.array(doc["relevances"]),
        iterations=doc.get("iterations", 1),
        trace=FitTrace(),
    )
    data = None
    if "data" in doc:
        d = doc["data"]
        if d["kind"] == "string":
            X = tuple(s.encode("latin-1") for s in d["X"])
        else:
            X = np.array(d["X"], dtype=np.float64).reshape(len(d["X"]), -1)
        data = Dataset(X, labels, d["kind"])
    return model, data, doc


def save_model(path, model, data=None, extra=None):
    with open(path, "w") as f:
        f.write(dumps_model(model, data, extra))


def load_model(path):
    with open(path) as f:
        return loads_model(f.read())


def format_trace(trace):
    lines = []
    for rec in trace:
        fields = [str(rec.iteration), repr(float(rec.objective))]
        fields.extend(repr(float(e)) for e in rec.eta)
        lines.append("\t".join(fields))
    return "\n".join(lines) + "\n" if lines else ""


def format_predictions(scores, labels):
    return "".join("%r\t%d\n" % (float(s), int(l)) for s, l in zip(scores, labels))
