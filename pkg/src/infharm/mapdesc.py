"""Declarative map descriptions (YAML) for the command line.

Example::

    source: {dim: 3}                 # metric defaults to euclidean
    target: {dim: 2, metric: euclidean}
    map: ["x1", "x2"]
    region:
      lower: [-1, -1, -1]
      upper: [1, 1, 1]
      counts: 5                      # per axis, or one count per axis
      exclude_near_zero: ["x3"]      # drop points where |expr| < margin
      margin: 0.05

A metric is ``euclidean``, ``{diagonal: [...]}`` or a full matrix of
expression strings.  Expressions use the coordinates of their own chart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ParseError
from .expr import parse
from .geometry import Chart, Metric, SmoothMap

_ROOT_KEYS = {"source", "target", "map", "region", "label"}


@dataclass
class MapDescription:
    map: SmoothMap
    source_metric: Metric
    target_metric: Metric
    lower: np.ndarray
    upper: np.ndarray
    counts: list
    exclusions: list
    margin: float

    def grid(self, per_axis=None):
        counts = self.counts if per_axis is None else [per_axis] * len(self.counts)
        axes = [np.linspace(lo, hi, n) for lo, hi, n in zip(self.lower, self.upper, counts)]
        pts = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
        return self.filter(pts)

    def random(self, count, seed):
        rng = np.random.default_rng(seed)
        return self.filter(rng.uniform(self.lower, self.upper, size=(count, len(self.lower))))

    def filter(self, pts):
        keep = np.ones(len(pts), dtype=bool)
        cols = [pts[:, i] for i in range(pts.shape[1])]
        for ex in self.exclusions:
            keep &= np.abs(np.broadcast_to(ex(cols), keep.shape)) >= self.margin
        return pts[keep]


class _Loader:
    def __init__(self, text, source):
        self.source = source
        try:
            self.root = yaml.compose(text)
        except yaml.YAMLError as err:
            mark = getattr(err, "problem_mark", None)
            raise ParseError(
                f"invalid YAML: {getattr(err, 'problem', err)}",
                line=mark.line + 1 if mark else None,
                column=mark.column + 1 if mark else None,
                source=source,
            ) from None

    def error(self, msg, node):
        mark = node.start_mark if node is not None else None
        return ParseError(msg, line=mark.line + 1 if mark else None,
                          column=mark.column + 1 if mark else None, source=self.source)

    def mapping(self, node, what):
        if not isinstance(node, yaml.MappingNode):
            raise self.error(f"{what} must be a mapping", node)
        return {k.value: v for k, v in node.value}

    def seq(self, node, what):
        if not isinstance(node, yaml.SequenceNode):
            raise self.error(f"{what} must be a list", node)
        return node.value

    def number(self, node, what, kind=float):
        if not isinstance(node, yaml.ScalarNode):
            raise self.error(f"{what} must be a number", node)
        try:
            value = float(node.value)
        except ValueError:
            raise self.error(f"{what} must be a number, got {node.value!r}", node) from None
        if kind is int and not value.is_integer():
            raise self.error(f"{what} must be an integer, got {node.value!r}", node)
        return kind(value)

    def expression(self, node, dim):
        if not isinstance(node, yaml.ScalarNode):
            raise self.error("expression must be a string", node)
        try:
            return parse(node.value, dim)
        except ParseError as err:
            mark = node.start_mark
            quoted = 1 if node.style in ("'", '"') else 0
            col = mark.column + quoted + (err.column or 1)
            raise ParseError(f"{err.message} in {node.value!r}", line=mark.line + 1, column=col,
                             source=self.source) from None

    def chart(self, node, what):
        fields = self.mapping(node, what)
        if "dim" not in fields:
            raise self.error(f"{what} needs 'dim'", node)
        dim = self.number(fields["dim"], f"{what}.dim", int)
        if dim < 1:
            raise self.error(f"{what}.dim must be positive", fields["dim"])
        chart = Chart(dim, what)
        metric = self.metric(fields.get("metric"), chart, what)
        manifold_dim = None
        if "manifold_dim" in fields:
            manifold_dim = self.number(fields["manifold_dim"], f"{what}.manifold_dim", int)
        return chart, metric, manifold_dim

    def metric(self, node, chart, what):
        n = chart.dim
        if node is None or (isinstance(node, yaml.ScalarNode) and node.value == "euclidean"):
            return Metric.euclidean(chart)
        if isinstance(node, yaml.MappingNode):
            fields = self.mapping(node, f"{what}.metric")
            if set(fields) != {"diagonal"}:
                raise self.error("metric mapping must have the single key 'diagonal'", node)
            diag = [self.expression(e, n) for e in self.seq(fields["diagonal"], "diagonal")]
            if len(diag) != n:
                raise self.error(f"diagonal needs {n} entries", fields["diagonal"])

            def entries(X):
                d = [f(X) for f in diag]
                return [[d[i] if i == j else 0.0 for j in range(n)] for i in range(n)]

            return Metric(chart, entries, f"{what} metric")
        rows = self.seq(node, f"{what}.metric")
        if len(rows) != n:
            raise self.error(f"metric needs {n} rows", node)
        mat = []
        for r in rows:
            row = [self.expression(e, n) for e in self.seq(r, "metric row")]
            if len(row) != n:
                raise self.error(f"metric rows need {n} entries", r)
            mat.append(row)
        return Metric(chart, lambda X: [[f(X) for f in row] for row in mat], f"{what} metric")

    def load(self):
        if self.root is None:
            raise ParseError("empty map description", source=self.source)
        top = self.mapping(self.root, "map description")
        unknown = set(top) - _ROOT_KEYS
        if unknown:
            key = sorted(unknown)[0]
            raise self.error(f"unknown key {key!r}", next(k for k, _ in self.root.value if k.value == key))
        for key in ("source", "target", "map"):
            if key not in top:
                raise self.error(f"missing '{key}'", self.root)
        src, g, _ = self.chart(top["source"], "source")
        tgt, h, manifold_dim = self.chart(top["target"], "target")
        comps = [self.expression(e, src.dim) for e in self.seq(top["map"], "map")]
        if len(comps) != tgt.dim:
            raise self.error(f"map has {len(comps)} components, target dim is {tgt.dim}", top["map"])
        label = top["label"].value if "label" in top else "user map"
        phi = SmoothMap(src, tgt, lambda X: [c(X) for c in comps], label, manifold_dim)
        lower, upper, counts, exclusions, margin = self.region(top.get("region"), src.dim)
        return MapDescription(phi, g, h, lower, upper, counts, exclusions, margin)

    def region(self, node, dim):
        if node is None:
            return np.full(dim, -1.0), np.full(dim, 1.0), [5] * dim, [], 0.05
        fields = self.mapping(node, "region")

        def vec(key, default):
            if key not in fields:
                return np.full(dim, default)
            vals = [self.number(v, f"region.{key}") for v in self.seq(fields[key], f"region.{key}")]
            if len(vals) != dim:
                raise self.error(f"region.{key} needs {dim} entries", fields[key])
            return np.array(vals)

        lower, upper = vec("lower", -1.0), vec("upper", 1.0)
        if np.any(lower >= upper):
            raise self.error("region.lower must be below region.upper", node)
        counts = [5] * dim
        if "counts" in fields:
            c = fields["counts"]
            if isinstance(c, yaml.SequenceNode):
                counts = [self.number(v, "region.counts", int) for v in c.value]
                if len(counts) != dim:
                    raise self.error(f"region.counts needs {dim} entries", c)
            else:
                counts = [self.number(c, "region.counts", int)] * dim
        if any(k < 1 for k in counts):
            raise self.error("region.counts must be positive", fields["counts"])
        exclusions = [self.expression(e, dim) for e in self.seq(fields["exclude_near_zero"], "exclude_near_zero")] \
            if "exclude_near_zero" in fields else []
        margin = self.number(fields["margin"], "region.margin") if "margin" in fields else 0.05
        return lower, upper, counts, exclusions, margin


def load_map_description(text, source="<string>"):
    return _Loader(text, source).load()


def load_map_description_file(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ParseError(f"cannot read map description: {err.strerror}", source=str(path)) from None
    return load_map_description(text, str(path))
