"""Bundle persistence: a self-describing, versioned text format.

One header line carries format version, family, levels, feature names,
training bounds, seed, and hyperparameters; the body is family-specific
(coefficients, pre-order tree records, or layer shapes plus row-major
weights). Floats are printed with 17 significant digits, so a load
reproduces the saved model bit for bit. Trees serialize as pre-order
records: 's <feature> <threshold>' followed by the left then the right
subtree, and 'l <value> [count targets...]' for leaves.
"""

from __future__ import annotations

import numpy as np

from .bundle import QuantileModelBundle
from .forest import RfModel
from .gbm import GbmModel
from .linear import LinearModel
from .mlp import MlpModel
from .tree import LEAF, RegressionTree

FORMAT_MAGIC = "vitalsqr-bundle"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


class VersionMismatchError(ModelFormatError):
    pass


class CorruptModelError(ModelFormatError):
    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (at byte {byte_offset})")
        self.byte_offset = byte_offset


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_list(values) -> str:
    return ",".join(_fmt(v) for v in values)


class _LineReader:
    """Sequential line access that remembers the byte offset of each line."""

    def __init__(self, text: str):
        self._lines = text.split("\n")
        self._offsets = []
        pos = 0
        for line in self._lines:
            self._offsets.append(pos)
            pos += len(line.encode("utf-8")) + 1
        self._end = pos - 1
        self._i = 0

    @property
    def offset(self) -> int:
        if self._i < len(self._lines):
            return self._offsets[self._i]
        return self._end

    def next(self, what: str) -> str:
        while self._i < len(self._lines):
            line = self._lines[self._i]
            self._i += 1
            if line.strip():
                return line
        raise CorruptModelError(f"file ends before {what}", self._end)


def _tree_preorder_lines(tree: RegressionTree, leaf_targets=None) -> list[str]:
    lines: list[str] = []

    def emit(node: int) -> None:
        if tree.feature[node] == LEAF:
            if leaf_targets is not None:
                targets = leaf_targets[int(node)]
                lines.append(
                    f"l {_fmt(tree.value[node])} {targets.size} "
                    + " ".join(_fmt(t) for t in targets)
                )
            else:
                lines.append(f"l {_fmt(tree.value[node])}")
        else:
            lines.append(
                f"s {int(tree.feature[node])} {_fmt(tree.threshold[node])}"
            )
            emit(int(tree.left[node]))
            emit(int(tree.right[node]))

    emit(0)
    return lines


def _read_tree(reader: _LineReader, with_targets: bool):
    """Rebuild one tree from pre-order records."""
    header = reader.next("tree header")
    if not header.startswith("tree nodes="):
        raise CorruptModelError(f"expected tree header, got {header!r}", reader.offset)
    n_nodes = int(header.split("=", 1)[1])
    feature = np.empty(n_nodes, dtype=np.int32)
    threshold = np.zeros(n_nodes, dtype=np.float64)
    left = np.full(n_nodes, LEAF, dtype=np.int32)
    right = np.full(n_nodes, LEAF, dtype=np.int32)
    value = np.zeros(n_nodes, dtype=np.float64)
    targets: dict[int, np.ndarray] = {}
    next_id = 0

    def read_node() -> int:
        nonlocal next_id
        if next_id >= n_nodes:
            raise CorruptModelError("tree has more records than declared", reader.offset)
        node = next_id
        next_id += 1
        line = reader.next("tree node record")
        parts = line.split()
        try:
            if parts[0] == "l":
                feature[node] = LEAF
                value[node] = float(parts[1])
                if with_targets:
                    count = int(parts[2])
                    vals = np.asarray([float(v) for v in parts[3 : 3 + count]])
                    if vals.size != count:
                        raise CorruptModelError(
                            "leaf target count mismatch", reader.offset
                        )
                    targets[node] = vals
            elif parts[0] == "s":
                feature[node] = int(parts[1])
                threshold[node] = float(parts[2])
                left[node] = read_node()
                right[node] = read_node()
            else:
                raise CorruptModelError(
                    f"unknown tree record {parts[0]!r}", reader.offset
                )
        except (IndexError, ValueError) as exc:
            raise CorruptModelError(f"malformed tree record: {exc}", reader.offset)
        return node

    read_node()
    if next_id != n_nodes:
        raise CorruptModelError(
            f"tree declared {n_nodes} nodes but encoded {next_id}", reader.offset
        )
    tree = RegressionTree(
        feature=feature, threshold=threshold, left=left, right=right, value=value
    )
    return tree, targets


def _header_line(bundle: QuantileModelBundle, feature_names) -> str:
    params = ";".join(
        f"{key}:{bundle.params[key]}" for key in sorted(bundle.params)
    )
    fields = [
        f"{FORMAT_MAGIC}",
        f"v={FORMAT_VERSION}",
        f"family={bundle.family}",
        f"levels={_fmt_list(bundle.levels)}",
        f"features={','.join(feature_names)}",
        f"feature_set={bundle.feature_set}",
        f"age_bounds={_fmt_list(bundle.age_bounds)}",
        f"bt_bounds={_fmt_list(bundle.bt_bounds)}",
        f"seed={bundle.seed}",
        f"params={params}",
    ]
    return " ".join(fields)


def save_model(bundle: QuantileModelBundle, path: str) -> None:
    from .features import FEATURE_SETS

    names = FEATURE_SETS[bundle.feature_set]
    lines = [_header_line(bundle, names)]

    if bundle.family == "ols":
        model: LinearModel = bundle.shared_model
        lines.append(
            f"linear shared intercept={_fmt(model.intercept)} "
            f"coefs={_fmt_list(model.coefficients)}"
        )
    elif bundle.family in ("qr", "statistical"):
        for tau in bundle.levels:
            model = bundle.models[tau]
            lines.append(
                f"linear level={_fmt(tau)} intercept={_fmt(model.intercept)} "
                f"coefs={_fmt_list(model.coefficients)} "
                f"converged={int(model.converged)}"
            )
    elif bundle.family == "gbm":
        for tau in bundle.levels:
            model: GbmModel = bundle.models[tau]
            lines.append(
                f"gbm level={_fmt(tau)} base={_fmt(model.base_score)} "
                f"lr={_fmt(model.learning_rate)} n_trees={len(model.trees)}"
            )
            for tree in model.trees:
                lines.append(f"tree nodes={tree.n_nodes}")
                lines.extend(_tree_preorder_lines(tree))
    elif bundle.family == "rf":
        model: RfModel = bundle.shared_model
        lines.append(f"forest n_trees={len(model.trees)} seed={model.seed}")
        for tree, targets in zip(model.trees, model.leaf_targets):
            lines.append(f"tree nodes={tree.n_nodes}")
            lines.extend(_tree_preorder_lines(tree, leaf_targets=targets))
    elif bundle.family == "mlp":
        model: MlpModel = bundle.shared_model
        lines.append(
            f"mlp hidden={model.w1.shape[0]} inputs={model.w1.shape[1]} "
            f"heads={model.w2.shape[0]} seed={model.seed}"
        )
        lines.append(f"xstats {_fmt_list(model.x_mean)} {_fmt_list(model.x_sd)}")
        lines.append(f"ystats {_fmt(model.y_mean)} {_fmt(model.y_sd)}")
        for name, mat in (("w1", model.w1), ("w2", model.w2)):
            lines.append(f"matrix {name} {mat.shape[0]} {mat.shape[1]}")
            for row in mat:
                lines.append(" ".join(_fmt(v) for v in row))
        for name, vec in (("b1", model.b1), ("b2", model.b2)):
            lines.append(f"vector {name} {vec.shape[0]}")
            lines.append(" ".join(_fmt(v) for v in vec))
    else:
        raise ModelFormatError(f"family {bundle.family!r} is not persistable")

    lines.append("end")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_header(path: str) -> dict[str, str]:
    """Parse just the header line into its fields."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
    return _parse_header(header)


def _parse_header(header: str) -> dict[str, str]:
    parts = header.split(" ")
    if not parts or parts[0] != FORMAT_MAGIC:
        raise VersionMismatchError(
            f"not a {FORMAT_MAGIC} file (got {parts[0][:40]!r})"
        )
    fields: dict[str, str] = {"magic": parts[0]}
    for part in parts[1:]:
        key, _, val = part.partition("=")
        fields[key] = val
    if fields.get("v") != str(FORMAT_VERSION):
        raise VersionMismatchError(
            f"format version {fields.get('v')!r} unsupported "
            f"(expected {FORMAT_VERSION})"
        )
    return fields


def load_model(path: str) -> QuantileModelBundle:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    reader = _LineReader(text)
    header = reader.next("header")
    fields = _parse_header(header)

    try:
        family = fields["family"]
        levels = tuple(float(v) for v in fields["levels"].split(","))
        feature_set = fields["feature_set"]
        age_bounds = tuple(float(v) for v in fields["age_bounds"].split(","))
        bt_bounds = tuple(float(v) for v in fields["bt_bounds"].split(","))
        seed = int(fields["seed"])
        params: dict[str, float | int] = {}
        if fields.get("params"):
            for item in fields["params"].split(";"):
                key, _, val = item.partition(":")
                try:
                    params[key] = int(val)
                except ValueError:
                    try:
                        params[key] = float(val)
                    except ValueError:
                        params[key] = val
    except (KeyError, ValueError) as exc:
        raise CorruptModelError(f"bad header field: {exc}", 0)

    models: dict[float, object] | None = None
    shared: object | None = None
    names = None
    from .features import FEATURE_SETS

    if feature_set not in FEATURE_SETS:
        raise CorruptModelError(f"unknown feature set {feature_set!r}", 0)
    names = FEATURE_SETS[feature_set]

    def parse_kv(line: str, prefix: str) -> dict[str, str]:
        parts = line.split(" ")
        if parts[0] != prefix:
            raise CorruptModelError(
                f"expected {prefix!r} record, got {parts[0]!r}", reader.offset
            )
        out = {}
        for part in parts[1:]:
            key, _, val = part.partition("=")
            out[key] = val
        return out

    try:
        if family == "ols":
            kv = parse_kv(reader.next("linear record"), "linear")
            coefs = tuple(float(v) for v in kv["coefs"].split(","))
            shared = LinearModel(names, coefs, float(kv["intercept"]))
        elif family in ("qr", "statistical"):
            models = {}
            for tau in levels:
                kv = parse_kv(reader.next("linear record"), "linear")
                coefs = tuple(float(v) for v in kv["coefs"].split(","))
                models[tau] = LinearModel(
                    names,
                    coefs,
                    float(kv["intercept"]),
                    tau=tau,
                    converged=kv.get("converged", "1") == "1",
                )
        elif family == "gbm":
            models = {}
            for tau in levels:
                kv = parse_kv(reader.next("gbm record"), "gbm")
                model = GbmModel(
                    tau=tau,
                    base_score=float(kv["base"]),
                    learning_rate=float(kv["lr"]),
                )
                for _ in range(int(kv["n_trees"])):
                    tree, _targets = _read_tree(reader, with_targets=False)
                    model.trees.append(tree)
                models[tau] = model
        elif family == "rf":
            kv = parse_kv(reader.next("forest record"), "forest")
            trees = []
            leaf_targets = []
            for _ in range(int(kv["n_trees"])):
                tree, targets = _read_tree(reader, with_targets=True)
                trees.append(tree)
                leaf_targets.append(targets)
            shared = RfModel(
                trees=trees, leaf_targets=leaf_targets, seed=int(kv["seed"])
            )
        elif family == "mlp":
            kv = parse_kv(reader.next("mlp record"), "mlp")
            xline = reader.next("xstats").split(" ")
            if xline[0] != "xstats" or len(xline) != 3:
                raise CorruptModelError("malformed xstats", reader.offset)
            x_mean = np.asarray([float(v) for v in xline[1].split(",")])
            x_sd = np.asarray([float(v) for v in xline[2].split(",")])
            yline = reader.next("ystats").split(" ")
            if yline[0] != "ystats" or len(yline) != 3:
                raise CorruptModelError("malformed ystats", reader.offset)

            def read_matrix(name: str) -> np.ndarray:
                head = reader.next(f"matrix {name}").split(" ")
                if head[:2] != ["matrix", name]:
                    raise CorruptModelError(
                        f"expected matrix {name}", reader.offset
                    )
                rows, cols = int(head[2]), int(head[3])
                mat = np.empty((rows, cols))
                for r in range(rows):
                    vals = reader.next("matrix row").split(" ")
                    if len(vals) != cols:
                        raise CorruptModelError(
                            f"matrix {name} row {r} has {len(vals)} values, "
                            f"expected {cols}",
                            reader.offset,
                        )
                    mat[r] = [float(v) for v in vals]
                return mat

            def read_vector(name: str) -> np.ndarray:
                head = reader.next(f"vector {name}").split(" ")
                if head[:2] != ["vector", name]:
                    raise CorruptModelError(
                        f"expected vector {name}", reader.offset
                    )
                length = int(head[2])
                vals = reader.next("vector values").split(" ")
                if len(vals) != length:
                    raise CorruptModelError(
                        f"vector {name} has {len(vals)} values, expected {length}",
                        reader.offset,
                    )
                return np.asarray([float(v) for v in vals])

            w1 = read_matrix("w1")
            w2 = read_matrix("w2")
            b1 = read_vector("b1")
            b2 = read_vector("b2")
            shared = MlpModel(
                levels=levels,
                w1=w1,
                b1=b1,
                w2=w2,
                b2=b2,
                x_mean=x_mean,
                x_sd=x_sd,
                y_mean=float(yline[1]),
                y_sd=float(yline[2]),
                seed=int(kv.get("seed", "0")),
            )
        else:
            raise CorruptModelError(f"unknown family {family!r}", reader.offset)

        trailer = reader.next("end marker")
        if trailer != "end":
            raise CorruptModelError(
                f"expected end marker, got {trailer!r}", reader.offset
            )
    except (ValueError, KeyError, IndexError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise CorruptModelError(f"malformed body: {exc}", reader.offset)

    return QuantileModelBundle(
        family=family,
        levels=levels,
        feature_set=feature_set,
        models=models,
        shared_model=shared,
        age_bounds=(age_bounds[0], age_bounds[1]),
        bt_bounds=(bt_bounds[0], bt_bounds[1]),
        seed=seed,
        params=params,
    )
