"""Binary model files.

Layout: magic "MLMDL", version byte, algorithm tag, schema block,
preprocessing stats, algorithm parameters, then a trailing CRC32 (big
endian) over everything before it. All integers big-endian, all floats
IEEE-754 big-endian doubles, so a round trip reproduces predictions bit
for bit.
"""

from __future__ import annotations

import zlib

import numpy as np

from ..encoding import DecodeError, Reader, enc_f64, enc_str, enc_u8, enc_u32
from .boost import BoostEnsemble
from .forest import Forest
from .models import BoostParams, ForestParams, KnnParams, SvmParams, TrainedModel
from .preprocess import FeatureStats, PreprocessStats
from .schemas import get_schema
from .trees import TreeNode

MAGIC = b"MLMDL"
VERSION = 1

_ALGO_TAGS = {"knn": 0, "svm": 1, "forest": 2, "boost": 3}
_TAG_ALGOS = {v: k for k, v in _ALGO_TAGS.items()}


class BadMagic(ValueError):
    pass


class UnsupportedVersion(ValueError):
    pass


class CorruptModel(ValueError):
    pass


def _enc_vector(v: np.ndarray) -> bytes:
    v = np.asarray(v, dtype=np.float64).ravel()
    return enc_u32(len(v)) + b"".join(enc_f64(float(x)) for x in v)


def _dec_vector(r: Reader) -> np.ndarray:
    n = r.u32()
    return np.array([r.f64() for _ in range(n)], dtype=np.float64)


def _enc_tree(node: TreeNode) -> bytes:
    if node.is_leaf:
        return enc_u8(0) + enc_f64(node.value)
    return (
        enc_u8(1) + enc_u32(node.feature) + enc_f64(node.threshold)
        + _enc_tree(node.left) + _enc_tree(node.right)
    )


def _dec_tree(r: Reader) -> TreeNode:
    tag = r.u8()
    if tag == 0:
        return TreeNode(value=r.f64())
    if tag != 1:
        raise DecodeError(f"bad tree node tag {tag}")
    feature = r.u32()
    threshold = r.f64()
    left = _dec_tree(r)
    right = _dec_tree(r)
    return TreeNode(feature=feature, threshold=threshold, left=left, right=right)


def _enc_stats(stats: PreprocessStats) -> bytes:
    out = enc_u32(len(stats.features))
    for st in stats.features:
        out += enc_f64(st.impute) + enc_f64(st.lo) + enc_f64(st.hi)
        out += enc_f64(st.mean) + enc_f64(st.std)
    return out


def _dec_stats(r: Reader) -> PreprocessStats:
    n = r.u32()
    feats = tuple(
        FeatureStats(impute=r.f64(), lo=r.f64(), hi=r.f64(), mean=r.f64(), std=r.f64())
        for _ in range(n)
    )
    return PreprocessStats(features=feats)


def save_model(model: TrainedModel) -> bytes:
    body = MAGIC + enc_u8(VERSION) + enc_u8(_ALGO_TAGS[model.algorithm])
    body += enc_str(model.schema.disease)
    body += _enc_stats(model.stats)
    p = model.params
    if isinstance(p, KnnParams):
        body += enc_u32(p.k) + enc_u32(p.train_X.shape[0]) + enc_u32(p.train_X.shape[1])
        body += b"".join(enc_f64(float(x)) for x in p.train_X.ravel())
        body += b"".join(enc_u32(int(c)) for c in p.train_y)
    elif isinstance(p, SvmParams):
        body += enc_u32(len(p.boundaries))
        for W, b in p.boundaries:
            body += _enc_vector(W) + enc_f64(float(b))
    elif isinstance(p, ForestParams):
        body += enc_u32(p.forest.n_classes) + enc_u32(len(p.forest.trees))
        for tree in p.forest.trees:
            body += _enc_tree(tree)
    elif isinstance(p, BoostParams):
        body += enc_u32(len(p.selected)) + b"".join(enc_u32(i) for i in p.selected)
        body += _enc_vector(np.array(p.importance))
        body += enc_f64(p.learning_rate)
        body += enc_u32(len(p.ensembles))
        for e in p.ensembles:
            body += enc_f64(e.base_score) + enc_u32(len(e.trees))
            for tree in e.trees:
                body += _enc_tree(tree)
    else:
        raise TypeError(f"unknown params {type(p)}")
    return body + zlib.crc32(body).to_bytes(4, "big")


def load_model(blob: bytes) -> TrainedModel:
    if len(blob) < len(MAGIC) + 2 + 4:
        raise CorruptModel("file too short")
    if blob[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"not a model file (magic {blob[:5]!r})")
    body, checksum = blob[:-4], int.from_bytes(blob[-4:], "big")
    if zlib.crc32(body) != checksum:
        raise CorruptModel("checksum mismatch")
    version = blob[len(MAGIC)]
    if version != VERSION:
        raise UnsupportedVersion(f"model format version {version}, supported {VERSION}")
    r = Reader(body[len(MAGIC) + 1:])
    try:
        algorithm = _TAG_ALGOS[r.u8()]
        schema = get_schema(r.str_())
        stats = _dec_stats(r)
        if algorithm == "knn":
            k = r.u32()
            n, d = r.u32(), r.u32()
            X = np.array([r.f64() for _ in range(n * d)]).reshape(n, d)
            y = np.array([r.u32() for _ in range(n)], dtype=np.int64)
            params = KnnParams(k=k, train_X=X, train_y=y)
        elif algorithm == "svm":
            boundaries = []
            for _ in range(r.u32()):
                W = _dec_vector(r)
                boundaries.append((W, r.f64()))
            params = SvmParams(boundaries=boundaries)
        elif algorithm == "forest":
            n_classes = r.u32()
            trees = tuple(_dec_tree(r) for _ in range(r.u32()))
            params = ForestParams(forest=Forest(trees=trees, n_classes=n_classes))
        elif algorithm == "boost":
            selected = tuple(r.u32() for _ in range(r.u32()))
            importance = tuple(float(x) for x in _dec_vector(r))
            learning_rate = r.f64()
            ensembles = []
            for _ in range(r.u32()):
                base = r.f64()
                trees = tuple(_dec_tree(r) for _ in range(r.u32()))
                ensembles.append(
                    BoostEnsemble(base_score=base, trees=trees, learning_rate=learning_rate)
                )
            params = BoostParams(
                selected=selected, ensembles=ensembles,
                importance=importance, learning_rate=learning_rate,
            )
        else:  # pragma: no cover
            raise CorruptModel(f"unhandled algorithm {algorithm}")
        r.expect_end()
    except KeyError as e:
        raise CorruptModel(f"unknown algorithm tag {e}") from e
    except DecodeError as e:
        raise CorruptModel(str(e)) from e
    return TrainedModel(algorithm=algorithm, schema=schema, stats=stats, params=params)
