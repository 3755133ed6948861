"""Plain-text persistence for fitted models.

A file starts with a magic line carrying the format version, followed by one
record. A record is delimited by ``begin <tag>`` / ``end <tag>`` lines; inside
are ``key value...`` lines and nested records. Floats are written with
``repr`` so a save/load round trip is bit-exact. Example::

    pickpoint-model 1
    begin linear
      coef 0.5 -0.25
      intercept 12.0
    end linear

Ensembles nest their members (and meta learner) as child records. A bundle
groups the three per-axis models of one method.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .ensembles import EnsembleModel
from .errors import ModelFormatError
from .learners import ElasticNetModel, LinearModel, MLPModel, MLPParams, Regressor, SVRModel, TreeModel

MAGIC = "pickpoint-model"
FORMAT_VERSION = 1


@dataclass
class _Record:
    tag: str
    fields: dict[str, list[str]] = field(default_factory=dict)
    children: list[_Record] = field(default_factory=list)

    def get(self, key: str) -> list[str]:
        try:
            return self.fields[key]
        except KeyError:
            raise ModelFormatError(f"record {self.tag!r} lacks field {key!r}") from None

    def floats(self, key: str) -> np.ndarray:
        try:
            return np.array([float(v) for v in self.get(key)], dtype=float)
        except ValueError as exc:
            raise ModelFormatError(f"field {key!r} of {self.tag!r}: {exc}") from None

    def float(self, key: str) -> float:
        v = self.floats(key)
        if v.shape != (1,):
            raise ModelFormatError(f"field {key!r} of {self.tag!r} must hold one value")
        return float(v[0])

    def ints(self, key: str) -> np.ndarray:
        try:
            return np.array([int(v) for v in self.get(key)], dtype=np.int64)
        except ValueError as exc:
            raise ModelFormatError(f"field {key!r} of {self.tag!r}: {exc}") from None

    def int(self, key: str) -> int:
        v = self.get(key)
        if len(v) != 1:
            raise ModelFormatError(f"field {key!r} of {self.tag!r} must hold one value")
        try:
            return int(v[0])
        except ValueError as exc:
            raise ModelFormatError(f"field {key!r} of {self.tag!r}: {exc}") from None

    def child(self, tag: str) -> _Record:
        found = [c for c in self.children if c.tag == tag]
        if len(found) != 1:
            raise ModelFormatError(f"record {self.tag!r} needs exactly one {tag!r} child, found {len(found)}")
        return found[0]


def _f(values) -> list[str]:
    return [repr(float(v)) for v in np.atleast_1d(np.asarray(values, dtype=float))]


def _i(values) -> list[str]:
    if isinstance(values, (int, np.integer)):
        return [str(int(values))]
    return [str(int(v)) for v in np.atleast_1d(np.asarray(values))]


# encoders ------------------------------------------------------------------

def _encode(model: Regressor) -> _Record:
    if isinstance(model, EnsembleModel):
        return _encode_ensemble(model)
    if isinstance(model, ElasticNetModel):
        return _Record("elasticnet", {"coef": _f(model.coef), "intercept": _f(model.intercept),
                                      "alpha": _f(model.alpha), "l1_ratio": _f(model.l1_ratio),
                                      "n_iter": _i(model.n_iter)})
    if isinstance(model, LinearModel):
        return _Record("linear", {"coef": _f(model.coef), "intercept": _f(model.intercept)})
    if isinstance(model, SVRModel):
        return _Record("svr", {
            "coef": _f(model.coef), "intercept": _f(model.intercept), "dual_coef": _f(model.dual_coef),
            "c": _f(model.c), "epsilon": _f(model.epsilon), "kkt_gap": _f(model.kkt_gap),
            "n_iter": _i(model.n_iter), "converged": _i(int(model.converged)),
        })
    if isinstance(model, TreeModel):
        return _Record("tree", {
            "n_features": _i(model.n_features), "feature": _i(model.feature), "threshold": _f(model.threshold),
            "left": _i(model.left), "right": _i(model.right), "value": _f(model.value),
        })
    if isinstance(model, MLPModel):
        p = model.params
        d, h = p.w1.shape
        return _Record("mlp", {
            "inputs": _i(d), "hidden": _i(h), "w1": _f(p.w1.ravel()), "b1": _f(p.b1), "w2": _f(p.w2),
            "b2": _f(p.b2), "x_mean": _f(model.x_mean), "x_scale": _f(model.x_scale),
            "y_mean": _f(model.y_mean), "y_scale": _f(model.y_scale),
            "loss_history": _f(model.loss_history) if len(model.loss_history) else [],
            "diverged": _i(int(model.diverged)),
        })
    raise ModelFormatError(f"cannot serialise {type(model).__name__}")


def _encode_ensemble(m: EnsembleModel) -> _Record:
    fields = {
        "kind": [m.kind], "n_features": _i(m.n_features), "seed": _i(m.seed), "weights": _f(m.weights),
        "init": _f(m.init), "learning_rate": _f(m.learning_rate), "member_names": list(m.member_names),
    }
    if m.meta is not None:
        fields["meta_shift"] = _f(m.meta_shift)
        fields["meta_scale"] = _f(m.meta_scale)
    base = m.info.get("base")
    if base is not None:
        fields["base"] = [base]
    rec = _Record("ensemble", fields)
    rec.children.append(_Record("members", children=[_encode(x) for x in m.members]))
    if m.meta is not None:
        rec.children.append(_Record("meta", children=[_encode(m.meta)]))
    return rec


# decoders ------------------------------------------------------------------

def _decode(rec: _Record) -> Regressor:
    t = rec.tag
    if t == "linear":
        return LinearModel(rec.floats("coef"), rec.float("intercept"))
    if t == "elasticnet":
        return ElasticNetModel(rec.floats("coef"), rec.float("intercept"), rec.float("alpha"),
                               rec.float("l1_ratio"), rec.int("n_iter"))
    if t == "svr":
        return SVRModel(rec.floats("coef"), rec.float("intercept"), rec.floats("dual_coef"), rec.float("c"),
                        rec.float("epsilon"), rec.float("kkt_gap"), rec.int("n_iter"), bool(rec.int("converged")))
    if t == "tree":
        arrays = [rec.ints("feature"), rec.floats("threshold"), rec.ints("left"), rec.ints("right"),
                  rec.floats("value")]
        if len({len(a) for a in arrays}) != 1 or len(arrays[0]) == 0:
            raise ModelFormatError("tree node arrays must be non-empty and equally long")
        return TreeModel(*arrays, rec.int("n_features"))
    if t == "mlp":
        d, h = rec.int("inputs"), rec.int("hidden")
        w1 = rec.floats("w1")
        if w1.size != d * h:
            raise ModelFormatError(f"w1 holds {w1.size} values, expected {d * h}")
        params = MLPParams(w1.reshape(d, h), rec.floats("b1"), rec.floats("w2"), rec.float("b2"))
        return MLPModel(params, rec.floats("x_mean"), rec.floats("x_scale"), rec.float("y_mean"),
                        rec.float("y_scale"), rec.floats("loss_history"), bool(rec.int("diverged")))
    if t == "ensemble":
        members = tuple(_decode(c) for c in rec.child("members").children)
        meta = None
        shift = scale = None
        if any(c.tag == "meta" for c in rec.children):
            inner = rec.child("meta").children
            if len(inner) != 1:
                raise ModelFormatError("meta record must hold exactly one model")
            meta = _decode(inner[0])
            shift, scale = rec.floats("meta_shift"), rec.floats("meta_scale")
        info = {"base": rec.get("base")[0]} if "base" in rec.fields else {}
        return EnsembleModel(rec.get("kind")[0], members, rec.floats("weights"), rec.int("n_features"),
                             rec.int("seed"), meta=meta, meta_shift=shift, meta_scale=scale,
                             init=rec.float("init"), learning_rate=rec.float("learning_rate"),
                             member_names=tuple(rec.fields.get("member_names", [])), info=info)
    raise ModelFormatError(f"unknown model record {t!r}")


# text layer ----------------------------------------------------------------

def _emit(rec: _Record, depth: int, out: list[str]) -> None:
    pad = "  " * depth
    out.append(f"{pad}begin {rec.tag}")
    for key, values in rec.fields.items():
        out.append(" ".join([f"{pad}  {key}", *values]).rstrip())
    for c in rec.children:
        _emit(c, depth + 1, out)
    out.append(f"{pad}end {rec.tag}")


def _parse(lines: Sequence[str]) -> _Record:
    root = _Record("<root>")
    stack = [root]
    for lineno, raw in enumerate(lines, start=2):
        tokens = raw.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        head = tokens[0]
        if head == "begin":
            if len(tokens) != 2:
                raise ModelFormatError(f"line {lineno}: 'begin' takes one tag")
            rec = _Record(tokens[1])
            stack[-1].children.append(rec)
            stack.append(rec)
        elif head == "end":
            if len(stack) == 1 or len(tokens) != 2 or tokens[1] != stack[-1].tag:
                raise ModelFormatError(f"line {lineno}: unmatched {raw.strip()!r}")
            stack.pop()
        else:
            if len(stack) == 1:
                raise ModelFormatError(f"line {lineno}: field outside any record")
            if head in stack[-1].fields:
                raise ModelFormatError(f"line {lineno}: duplicate field {head!r}")
            stack[-1].fields[head] = tokens[1:]
    if len(stack) != 1:
        raise ModelFormatError(f"unterminated record {stack[-1].tag!r}")
    if len(root.children) != 1:
        raise ModelFormatError(f"expected one top-level record, found {len(root.children)}")
    return root.children[0]


def _header_and_body(text: str) -> list[str]:
    lines = text.splitlines()
    if not lines:
        raise ModelFormatError("empty model file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != MAGIC:
        raise ModelFormatError(f"missing '{MAGIC} <version>' header")
    if head[1] != str(FORMAT_VERSION):
        raise ModelFormatError(f"unsupported format version {head[1]!r} (this build reads {FORMAT_VERSION})")
    return lines[1:]


def _render(rec: _Record) -> str:
    out = [f"{MAGIC} {FORMAT_VERSION}"]
    _emit(rec, 0, out)
    return "\n".join(out) + "\n"


def dumps(model: Regressor) -> str:
    """Serialise one fitted model (learner or ensemble) to text."""
    return _render(_encode(model))


def loads(text: str) -> Regressor:
    """Inverse of :func:`dumps`; raises :class:`ModelFormatError` on malformed input."""
    return _decode(_parse(_header_and_body(text)))


@dataclass(frozen=True)
class ModelBundle:
    """The three per-axis models of one method, in x, y, z order."""

    method: str
    models: tuple[Regressor, Regressor, Regressor]
    seed: int = 0
    config_digest: str = ""


def dumps_bundle(bundle: ModelBundle) -> str:
    if len(bundle.models) != 3:
        raise ModelFormatError("a bundle holds exactly three axis models")
    rec = _Record("bundle", {"method": [bundle.method], "seed": _i(bundle.seed),
                             "config_digest": [bundle.config_digest] if bundle.config_digest else []})
    for axis, m in zip("xyz", bundle.models):
        rec.children.append(_Record(f"axis_{axis}", children=[_encode(m)]))
    return _render(rec)


def loads_bundle(text: str) -> ModelBundle:
    rec = _parse(_header_and_body(text))
    if rec.tag != "bundle":
        raise ModelFormatError(f"expected a bundle record, found {rec.tag!r}")
    models = []
    for axis in "xyz":
        inner = rec.child(f"axis_{axis}").children
        if len(inner) != 1:
            raise ModelFormatError(f"axis_{axis} must hold exactly one model")
        models.append(_decode(inner[0]))
    digest = rec.fields.get("config_digest", [])
    return ModelBundle(rec.get("method")[0], tuple(models), rec.int("seed"), digest[0] if digest else "")


def save_model(model: Regressor, path: str | Path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8", newline="\n")


def load_model(path: str | Path) -> Regressor:
    return loads(Path(path).read_text(encoding="utf-8"))


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    Path(path).write_text(dumps_bundle(bundle), encoding="utf-8", newline="\n")


def load_bundle(path: str | Path) -> ModelBundle:
    return loads_bundle(Path(path).read_text(encoding="utf-8"))
