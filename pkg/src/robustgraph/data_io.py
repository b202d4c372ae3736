"""Data ingestion, synthetic instances, and persistence.

Formats: CSV (comma-separated; header row for labels and histories, none
for raw matrices), MatrixMarket array (dense) and coordinate (sparse,
1-based, general symmetry), and 8-bit grayscale PGM/PNG image stacks.
All floats are rendered with 17 significant digits so every writer/loader
pair round-trips values bit-identically. Writes are atomic (temp file plus
rename).
"""

import math
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import InvalidInputError
from .graph import AffinityGraph
from .prox import as_matrix
from .solver import ConvergenceRecord

FLOAT_FMT = "%.17g"

HISTORY_HEADER = "iter,objective,res_x,res_z,rank_D,nnz_E"
LABELS_HEADER = "index,label"

IMAGE_SUFFIXES = (".png", ".pgm")


def _atomic_write_text(path, text):
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _fail(path, lineno, message):
    raise InvalidInputError(f"{path}:{lineno}: {message}")


# ---------------------------------------------------------------------------
# dense matrices: MatrixMarket array and CSV


def save_matrix(path, a):
    """Write a dense matrix in MatrixMarket array format (column-major)."""
    a = as_matrix(a, "matrix")
    lines = ["%%MatrixMarket matrix array real general", f"{a.shape[0]} {a.shape[1]}"]
    for j in range(a.shape[1]):
        for i in range(a.shape[0]):
            lines.append(FLOAT_FMT % a[i, j])
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _parse_mm_header(path, line):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket":
        _fail(path, 1, "not a MatrixMarket file")
    _, obj, fmt, field, symmetry = parts
    if obj != "matrix" or field != "real":
        _fail(path, 1, f"unsupported MatrixMarket type {obj}/{field}")
    if fmt not in ("array", "coordinate"):
        _fail(path, 1, f"unsupported MatrixMarket format {fmt!r}")
    if symmetry != "general":
        _fail(path, 1, f"only general symmetry is supported, got {symmetry!r}")
    return fmt


def _mm_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if not lines:
        _fail(path, 1, "empty file")
    fmt = _parse_mm_header(path, lines[0])
    body = [
        (no, ln.strip())
        for no, ln in enumerate(lines[1:], start=2)
        if ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        _fail(path, 1, "missing size line")
    return fmt, body


def _parse_float(path, lineno, token):
    try:
        value = float(token)
    except ValueError:
        _fail(path, lineno, f"cannot parse {token!r} as a number")
    if not math.isfinite(value):
        _fail(path, lineno, f"non-finite value {token!r}")
    return value


def load_mm_matrix(path):
    """Read a MatrixMarket file (array or coordinate) as a dense matrix."""
    fmt, body = _mm_lines(path)
    lineno, size_line = body[0]
    dims = size_line.split()
    if fmt == "array":
        if len(dims) != 2:
            _fail(path, lineno, "array size line must be 'rows cols'")
        rows, cols = (int(t) for t in dims)
        want = rows * cols
        if len(body) - 1 != want:
            _fail(path, lineno, f"expected {want} values, found {len(body) - 1}")
        values = [_parse_float(path, no, ln) for no, ln in body[1:]]
        return np.asarray(values).reshape((cols, rows)).T
    if len(dims) != 3:
        _fail(path, lineno, "coordinate size line must be 'rows cols nnz'")
    rows, cols, nnz = (int(t) for t in dims)
    if len(body) - 1 != nnz:
        _fail(path, lineno, f"expected {nnz} entries, found {len(body) - 1}")
    out = np.zeros((rows, cols))
    for no, ln in body[1:]:
        parts = ln.split()
        if len(parts) != 3:
            _fail(path, no, "coordinate entry must be 'row col value'")
        i, j = int(parts[0]) - 1, int(parts[1]) - 1
        if not (0 <= i < rows and 0 <= j < cols):
            _fail(path, no, f"index ({parts[0]}, {parts[1]}) out of range")
        out[i, j] = _parse_float(path, no, parts[2])
    return out


def load_csv_matrix(path):
    """Read a headerless CSV of numbers as a dense matrix."""
    rows = []
    ncols = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if ncols is None:
                ncols = len(parts)
            elif len(parts) != ncols:
                _fail(path, lineno, f"expected {ncols} columns, found {len(parts)}")
            values = []
            for col, token in enumerate(parts, start=1):
                try:
                    value = float(token)
                except ValueError:
                    _fail(path, lineno, f"column {col}: cannot parse {token!r} as a number")
                if not math.isfinite(value):
                    _fail(path, lineno, f"column {col}: non-finite value {token!r}")
                values.append(value)
            rows.append(values)
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    return np.asarray(rows)


def load_matrix(source, orientation="columns", labels_path=None):
    """Load a data matrix oriented features x samples, plus optional labels.

    ``source`` may be a CSV file, a MatrixMarket file, or a directory of
    grayscale images (one sample per image). ``orientation`` says how the
    on-disk table is laid out: "columns" (samples are columns, the default)
    or "rows" (samples are rows, transposed on load). Labels, when given,
    must cover every sample.
    """
    if orientation not in ("columns", "rows"):
        raise InvalidInputError(f"unknown orientation {orientation!r}")
    source = os.fspath(source)
    if os.path.isdir(source):
        if orientation == "rows":
            raise InvalidInputError("image directories are always samples-as-columns")
        x = load_image_stack(source).matrix
    else:
        if source.endswith(".mtx"):
            x = load_mm_matrix(source)
        else:
            x = load_csv_matrix(source)
        if orientation == "rows":
            x = x.T
    labels = None
    if labels_path is not None:
        indices, values = load_labels(labels_path)
        labels = full_assignment(indices, values, x.shape[1])
    return x, labels


# ---------------------------------------------------------------------------
# affinity graphs: MatrixMarket coordinate


def save_graph(path, s):
    """Write an affinity graph in MatrixMarket coordinate format (1-based)."""
    entries = [(i, j, w) for i, row in enumerate(s.rows) for j, w in row]
    entries.sort()
    lines = ["%%MatrixMarket matrix coordinate real general", f"{s.n} {s.n} {len(entries)}"]
    for i, j, w in entries:
        lines.append(f"{i + 1} {j + 1} " + FLOAT_FMT % w)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def load_graph(path):
    """Read a MatrixMarket coordinate file as an affinity graph.

    Structural checks only (square, in-range, no duplicates, finite): fixed
    graphs fed to the solver are not required to satisfy the learned-graph
    invariants.
    """
    fmt, body = _mm_lines(path)
    lineno, size_line = body[0]
    if fmt != "coordinate":
        _fail(path, lineno, "affinity graphs use coordinate format")
    dims = size_line.split()
    if len(dims) != 3:
        _fail(path, lineno, "coordinate size line must be 'rows cols nnz'")
    rows, cols, nnz = (int(t) for t in dims)
    if rows != cols:
        _fail(path, lineno, f"affinity graph must be square, got {rows} x {cols}")
    if len(body) - 1 != nnz:
        _fail(path, lineno, f"expected {nnz} entries, found {len(body) - 1}")
    graph_rows = [[] for _ in range(rows)]
    seen = set()
    for no, ln in body[1:]:
        parts = ln.split()
        if len(parts) != 3:
            _fail(path, no, "coordinate entry must be 'row col value'")
        i, j = int(parts[0]) - 1, int(parts[1]) - 1
        if not (0 <= i < rows and 0 <= j < cols):
            _fail(path, no, f"index ({parts[0]}, {parts[1]}) out of range")
        if (i, j) in seen:
            _fail(path, no, f"duplicate entry ({parts[0]}, {parts[1]})")
        seen.add((i, j))
        graph_rows[i].append((j, _parse_float(path, no, parts[2])))
    for row in graph_rows:
        row.sort()
    return AffinityGraph(n=rows, rows=graph_rows)


# ---------------------------------------------------------------------------
# labels and solver history: CSV with header


def save_labels(path, labels, indices=None):
    """Write labels as 'index,label' rows; indices default to 0..n-1."""
    labels = np.asarray(labels, dtype=np.int64)
    if indices is None:
        indices = np.arange(labels.size)
    indices = np.asarray(indices, dtype=np.int64)
    if indices.shape != labels.shape or labels.ndim != 1:
        raise InvalidInputError("labels and indices must be equal-length 1-D")
    lines = [LABELS_HEADER]
    lines.extend(f"{i},{v}" for i, v in zip(indices, labels))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def load_labels(path):
    """Read a label CSV; returns (indices, labels) as int arrays."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != LABELS_HEADER:
        raise InvalidInputError(f"{path}: expected header {LABELS_HEADER!r}")
    if len(lines) == 1:
        raise InvalidInputError(f"{path}: no label rows")
    indices, labels = [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 2:
            _fail(path, lineno, f"expected 'index,label', got {ln!r}")
        try:
            i, v = int(parts[0]), int(parts[1])
        except ValueError:
            _fail(path, lineno, f"cannot parse {ln!r} as integers")
        if i < 0 or v < 0:
            _fail(path, lineno, "indices and labels must be nonnegative")
        indices.append(i)
        labels.append(v)
    indices = np.asarray(indices, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if np.unique(indices).size != indices.size:
        raise InvalidInputError(f"{path}: duplicate sample index")
    return indices, labels


def full_assignment(indices, labels, n):
    """Order a complete label table by sample index; every index required."""
    if indices.size != n or not np.array_equal(np.sort(indices), np.arange(n)):
        raise InvalidInputError(
            f"labels must cover samples 0..{n - 1} exactly, got {indices.size} rows"
        )
    out = np.empty(n, dtype=np.int64)
    out[indices] = labels
    return out


def save_history(path, records):
    """Write the solver's convergence records under the pinned header."""
    lines = [HISTORY_HEADER]
    for r in records:
        lines.append(
            f"{r.iteration},{FLOAT_FMT % r.objective},{FLOAT_FMT % r.res_x},"
            f"{FLOAT_FMT % r.res_z},{r.rank_d},{r.nnz_e}"
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")


def load_history(path):
    """Read a convergence CSV back into records."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != HISTORY_HEADER:
        raise InvalidInputError(f"{path}: expected header {HISTORY_HEADER!r}")
    records = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 6:
            _fail(path, lineno, f"expected 6 fields, got {len(parts)}")
        records.append(
            ConvergenceRecord(
                iteration=int(parts[0]),
                objective=_parse_float(path, lineno, parts[1]),
                res_x=_parse_float(path, lineno, parts[2]),
                res_z=_parse_float(path, lineno, parts[3]),
                rank_d=int(parts[4]),
                nnz_e=int(parts[5]),
            )
        )
    return records


def save_soft_labels(path, f):
    """Write a score matrix as headerless CSV (one sample per row)."""
    f = as_matrix(f, "score matrix")
    lines = [",".join(FLOAT_FMT % v for v in row) for row in f]
    _atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# image stacks


@dataclass
class ImageStack:
    """Vectorized grayscale images: column i of ``matrix`` is image i."""

    matrix: np.ndarray
    height: int
    width: int
    names: list


def load_image_stack(directory):
    """Stack a directory of equal-size 8-bit grayscale images as columns.

    Files are taken in lexicographic order; pixel values are scaled to
    [0, 1]; each image is flattened row-major. Color images and size
    mismatches are rejected by filename.
    """
    directory = os.fspath(directory)
    names = sorted(
        f for f in os.listdir(directory) if f.lower().endswith(IMAGE_SUFFIXES)
    )
    if not names:
        raise InvalidInputError(f"{directory}: no .png or .pgm images found")
    columns = []
    shape = None
    for name in names:
        with Image.open(os.path.join(directory, name)) as img:
            if img.mode != "L":
                raise InvalidInputError(
                    f"{name}: only 8-bit grayscale images are supported, got mode {img.mode!r}"
                )
            pixels = np.asarray(img, dtype=np.float64)
        if shape is None:
            shape = pixels.shape
        elif pixels.shape != shape:
            raise InvalidInputError(
                f"{name}: size {pixels.shape} differs from {names[0]}: {shape}"
            )
        columns.append(pixels.ravel() / 255.0)
    matrix = np.stack(columns, axis=1)
    return ImageStack(matrix=matrix, height=shape[0], width=shape[1], names=names)


def reconstruct_image(column, height, width):
    """Undo the row-major vectorization of one stack column."""
    column = np.asarray(column, dtype=np.float64)
    if column.size != height * width:
        raise InvalidInputError(
            f"column has {column.size} pixels, expected {height}x{width}"
        )
    return column.reshape((height, width))


def save_image(path, image):
    """Write a [0, 1] float image as 8-bit grayscale (format by suffix)."""
    image = np.asarray(image, dtype=np.float64)
    quantized = np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        Image.fromarray(quantized, mode="L").save(
            tmp, format="PGM" if path.lower().endswith(".pgm") else "PNG"
        )
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


# ---------------------------------------------------------------------------
# synthetic recovery instances


def make_synthetic(m, n, rank, sparsity, magnitude, seed):
    """Low-rank plus sparse test instance.

    The clean part is A B^T with standard normal factors (m x rank and
    n x rank); the corruption has exactly round(sparsity * m * n) nonzeros
    at uniformly drawn positions with values uniform in
    [-magnitude, magnitude]. Returns (X, D_true, E_true) with
    X = D_true + E_true; a fixed seed fixes all three.
    """
    if m < 1 or n < 1:
        raise InvalidInputError(f"dimensions must be positive, got {m} x {n}")
    if not 0 <= rank <= min(m, n):
        raise InvalidInputError(f"rank {rank} out of range [0, {min(m, n)}]")
    if not 0.0 <= sparsity <= 1.0:
        raise InvalidInputError(f"sparsity {sparsity} out of range [0, 1]")
    if magnitude < 0:
        raise InvalidInputError(f"magnitude must be nonnegative, got {magnitude}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, rank))
    b = rng.standard_normal((n, rank))
    d_true = a @ b.T
    e_true = np.zeros((m, n))
    nnz = int(round(sparsity * m * n))
    if nnz:
        positions = rng.choice(m * n, size=nnz, replace=False)
        e_true.flat[positions] = rng.uniform(-magnitude, magnitude, size=nnz)
    return d_true + e_true, d_true, e_true
