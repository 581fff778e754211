"""JSON exchange formats for matrices, polynomials, systems, and tuples.

Complex scalars travel as [re, im] pairs. Matrices are row-major:

    {"rows": 2, "cols": 2, "data": [[1,0],[0,0],[0,0],[1,0]]}

A polynomial is a list of terms {"coeff": [re, im], "word": [i1, ..., ik]};
the empty word is []. A system description picks a construction and carries
its payload (the "depth" field is a default, overridable at build time):

    {"d": 2, "depth": 6, "kind": "subshift", "forbidden": [[2,2]]}
    {"d": 2, "depth": 6, "kind": "ideal", "generators": [[...terms...]]}
    {"d": 3, "depth": 6, "kind": "qmatrix", "q": {...matrix...}}
    {"d": 2, "depth": 6, "kind": "quadratic", "A": {...matrix...}}
    {"d": 2, "depth": 6, "kind": "fibers", "fibers": [{...matrix...}, ...]}
    {"d": 2, "depth": 6, "kind": "full"}

An operator tuple is {"d": 2, "h": 3, "matrices": [{...}, {...}]}; a Kraus
channel is {"h": 3, "kraus": [{...}, ...]}.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from spsys import linalg, subproduct
from spsys.ncpoly import IdealGens, NCPoly
from spsys.subproduct import SubproductSystem, SubshiftSpec
from spsys.reps import RepTuple


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    re, im = pair
    return complex(re, im)


def encode_matrix(m: np.ndarray) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [encode_complex(z) for z in m.ravel()],
    }


def decode_matrix(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = [decode_complex(p) for p in obj["data"]]
    if len(data) != rows * cols:
        raise ValueError(f"matrix data length {len(data)} != {rows}x{cols}")
    return np.array(data, dtype=complex).reshape(rows, cols)


def encode_vector(v: np.ndarray) -> dict:
    v = np.asarray(v, dtype=complex).ravel()
    return {"rows": int(v.size), "cols": 1,
            "data": [encode_complex(z) for z in v]}


def decode_vector(obj: dict) -> np.ndarray:
    return decode_matrix(obj).ravel()


def encode_poly(p: NCPoly) -> list[dict]:
    return [
        {"coeff": encode_complex(c), "word": list(w)}
        for w, c in sorted(p.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]


def decode_poly(term_list: list, d: int) -> NCPoly:
    terms: dict[tuple[int, ...], complex] = {}
    for t in term_list:
        w = tuple(int(x) for x in t["word"])
        terms[w] = terms.get(w, 0.0) + decode_complex(t["coeff"])
    return NCPoly(d, terms)


def encode_subspace(s: linalg.Subspace) -> dict:
    return encode_matrix(s.frame)


def decode_subspace(obj: dict, ambient_dim: int | None = None) -> linalg.Subspace:
    frame = decode_matrix(obj)
    if ambient_dim is not None and frame.shape[0] != ambient_dim:
        raise ValueError(
            f"fiber frame has ambient dimension {frame.shape[0]}, expected {ambient_dim}"
        )
    return linalg.span(frame, ambient_dim=frame.shape[0])


def encode_system_spec(system: SubproductSystem) -> dict:
    """Re-encode a system from its construction data when available."""
    prov = system.provenance or {}
    kind = prov.get("kind")
    base = {"d": system.d, "depth": system.depth}
    if kind == "subshift":
        spec: SubshiftSpec = prov["spec"]
        return {**base, "kind": "subshift",
                "forbidden": [list(w) for w in spec.forbidden]}
    if kind == "ideal":
        gens: IdealGens = prov["gens"]
        return {**base, "kind": "ideal",
                "generators": [encode_poly(g) for g in gens.gens]}
    if kind == "qmatrix":
        return {**base, "kind": "qmatrix", "q": encode_matrix(prov["q"])}
    if kind == "quadratic":
        return {**base, "kind": "quadratic", "A": encode_matrix(prov["a"])}
    if kind == "full":
        return {**base, "kind": "full"}
    return {**base, "kind": "fibers",
            "fibers": [encode_matrix(system.fiber(n).frame)
                       for n in range(1, system.depth + 1)]}


def build_system(obj: dict, depth: int | None = None,
                 budget_bytes: int | None = None) -> SubproductSystem:
    """Materialize a system description to the requested depth."""
    kind = obj.get("kind")
    if depth is None:
        if "depth" not in obj:
            raise ValueError("no depth: pass one or put a 'depth' field in the spec")
        depth = int(obj["depth"])
    kwargs = {} if budget_bytes is None else {"budget": budget_bytes}
    if kind == "subshift":
        d = int(obj["d"])
        forbidden = [tuple(int(x) for x in w) for w in obj["forbidden"]]
        return subproduct.from_subshift(SubshiftSpec(d, tuple(forbidden)),
                                        depth, **kwargs)
    if kind == "ideal":
        d = int(obj["d"])
        polys = [decode_poly(t, d) for t in obj["generators"]]
        return subproduct.from_ideal(IdealGens(d, polys), depth, **kwargs)
    if kind == "qmatrix":
        return subproduct.from_qmatrix(decode_matrix(obj["q"]), depth, **kwargs)
    if kind == "quadratic":
        key = "A" if "A" in obj else "a"
        return subproduct.from_quadratic(decode_matrix(obj[key]), depth, **kwargs)
    if kind == "full":
        return subproduct.from_full(int(obj["d"]), depth)
    if kind == "fibers":
        d = int(obj["d"])
        fibers = [decode_subspace(f, d ** (n + 1))
                  for n, f in enumerate(obj["fibers"])]
        return subproduct.maximal_with_fibers(d, fibers, depth, **kwargs)
    raise ValueError(f"unknown system kind {kind!r}")


def encode_rep(rep: RepTuple) -> dict:
    return {"d": rep.d, "h": rep.h,
            "matrices": [encode_matrix(m) for m in rep.matrices]}


def decode_rep(obj: dict) -> RepTuple:
    mats = [decode_matrix(m) for m in obj["matrices"]]
    rep = RepTuple(tuple(mats))
    if "d" in obj and rep.d != int(obj["d"]):
        raise ValueError("tuple length does not match declared d")
    if "h" in obj and rep.h != int(obj["h"]):
        raise ValueError("matrix size does not match declared h")
    return rep


def encode_kraus(kraus) -> dict:
    ops = getattr(kraus, "kraus", kraus)
    mats = [np.asarray(k, dtype=complex) for k in ops]
    return {"h": int(mats[0].shape[0]), "kraus": [encode_matrix(k) for k in mats]}


def decode_kraus(obj: dict) -> tuple[np.ndarray, ...]:
    mats = tuple(decode_matrix(m) for m in obj["kraus"])
    if not mats:
        raise ValueError("channel needs at least one Kraus operator")
    h = int(obj.get("h", mats[0].shape[0]))
    for m in mats:
        if m.shape != (h, h):
            raise ValueError(f"Kraus operator shape {m.shape} != ({h}, {h})")
    return mats


def load_stochastic(path: str | Path) -> np.ndarray:
    """Load a stochastic matrix from .json (matrix object) or .csv."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        m = np.loadtxt(path, delimiter=",", dtype=float)
        return np.atleast_2d(m)
    obj = json.loads(path.read_text())
    m = decode_matrix(obj)
    if np.max(np.abs(m.imag)) > 1e-14:
        raise ValueError("stochastic matrix must be real")
    return m.real


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def dump_json(obj: dict, path: str | Path | None = None) -> str:
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
