"""Plain-text serialization.

Complex format, one record per line, ids dense from 0 in file order:

    v <id> [x y z]
    e <id> <v1> <v2> [length]
    t <id> <e1> <e2> <e3>
    b <edge-id>

If an edge omits its length the vertices must carry coordinates.  Separator
files list closed sub-segments of edges:

    z <edge-id> [t0 t1]

and cover patches append sheet records to the complex format:

    sheet <cell> <word>

where <cell> is v<i>/e<i>/t<i> of the lifted complex and <word> is the deck
word of its sheet (letters a, A, b, B, ...; "-" for the identity).
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from .complexes import MetricComplex, build_complex
from .errors import BadParam


def dumps_complex(c: MetricComplex) -> str:
    lines: List[str] = []
    for v in range(c.n_vertices):
        if c.coords is not None:
            x, y, z = c.coords[v]
            lines.append(f"v {v} {x:.12g} {y:.12g} {z:.12g}")
        else:
            lines.append(f"v {v}")
    for e in range(c.n_edges):
        u, v = map(int, c.edges[e])
        lines.append(f"e {e} {u} {v} {float(c.lengths[e]):.12g}")
    for t in range(len(c.triangles)):
        e0, e1, e2 = map(int, c.triangles[t])
        lines.append(f"t {t} {e0} {e1} {e2}")
    for e in sorted(c.boundary_edges):
        lines.append(f"b {e}")
    return "\n".join(lines) + "\n"


def loads_complex(text: str, name: str = "") -> MetricComplex:
    verts: List[Optional[np.ndarray]] = []
    edges: List[Tuple[int, int, Optional[float]]] = []
    tris: List[Tuple[int, int, int]] = []
    boundary: List[int] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "v":
                if int(parts[1]) != len(verts):
                    raise BadParam(f"line {ln}: vertex ids must be dense")
                verts.append(
                    np.array(list(map(float, parts[2:5]))) if len(parts) >= 5 else None
                )
            elif tag == "e":
                if int(parts[1]) != len(edges):
                    raise BadParam(f"line {ln}: edge ids must be dense")
                u, v = int(parts[2]), int(parts[3])
                ln_val = float(parts[4]) if len(parts) >= 5 else None
                edges.append((u, v, ln_val))
            elif tag == "t":
                if int(parts[1]) != len(tris):
                    raise BadParam(f"line {ln}: triangle ids must be dense")
                tris.append((int(parts[2]), int(parts[3]), int(parts[4])))
            elif tag == "b":
                boundary.append(int(parts[1]))
            elif tag == "sheet":
                continue  # cover payload, parsed by the cover reader
            else:
                raise BadParam(f"line {ln}: unknown record {tag!r}")
        except (ValueError, IndexError) as exc:
            raise BadParam(f"line {ln}: malformed record {raw!r}") from exc

    coords = None
    if verts and all(v is not None for v in verts):
        coords = np.vstack(verts)
    full_edges = []
    for i, (u, v, l) in enumerate(edges):
        if l is None:
            if coords is None:
                raise BadParam(f"edge {i} has no length and no coordinates")
            l = float(np.linalg.norm(coords[v] - coords[u]))
        full_edges.append((u, v, l))
    return build_complex(
        n_vertices=len(verts),
        edges=full_edges,
        triangles=tris,
        boundary=boundary if boundary else None,
        coords=coords,
        name=name,
    )


def save_complex(c: MetricComplex, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_complex(c))


def load_complex(path: str) -> MetricComplex:
    with open(path) as fh:
        return loads_complex(fh.read(), name=path)


# ---------------------------------------------------------------- separators


def dumps_separator(edge_ids) -> str:
    return "".join(f"z {int(e)}\n" for e in sorted(set(map(int, edge_ids))))


def loads_separator(text: str) -> List[int]:
    out = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "z":
            raise BadParam(f"line {ln}: expected a z record")
        out.append(int(parts[1]))
    return sorted(set(out))
