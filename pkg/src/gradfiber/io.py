"""Result emission: VTK unstructured-grid snapshots, CSV trace and event log."""
import csv
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TRACE_COLUMNS = ("t", "u", "F", "max_s", "max_sL", "max_sM", "max_alpha", "theta_min", "theta_max")
INITIATION = 0.5
RUPTURE = 0.95
MATERIALS = (("matrix", "s"), ("fiber_L", "sL"), ("fiber_M", "sM"))

# companion lattice order (a + 2 b + 4 d) to VTK hexahedron order
_VTK_HEX = np.array([0, 1, 3, 2, 4, 5, 7, 6])
_VTK_HEXAHEDRON = 12


def trace_row(t, u, force, state, sim):
    """One trace row in :data:`TRACE_COLUMNS` order."""
    return (float(t), float(u), float(force), float(state.s.max()), float(state.sL.max()),
            float(state.sM.max()), float(state.alpha.max()), float(state.theta.min()),
            float(state.theta.max()))


def _data_array(parent, name, values):
    values = np.asarray(values, float)
    ncomp = 1 if values.ndim == 1 else values.shape[1]
    node = ET.SubElement(parent, "DataArray", type="Float64", Name=name,
                         NumberOfComponents=str(ncomp), format="ascii")
    node.text = " ".join(repr(float(v)) for v in values.ravel())
    return node


def node_fields(sim, state):
    """Fields sampled at the companion-mesh nodes.

    The placement ``phi`` and the control-point fields are evaluated with the
    spline basis; ``alpha`` lives on the nodes already and the void fraction is
    projected from the quadrature points.
    """
    X = sim.comp.nodes
    u = sim.sample_nodes(state.u)
    return {
        "phi": X + u,
        "displacement": u,
        "theta": sim.sample_nodes(state.theta),
        "alpha": state.alpha,
        "f": sim.project_companion(state.f.reshape(sim.ne, sim.nq)),
        "s": sim.sample_nodes(state.s),
        "sL": sim.sample_nodes(state.sL),
        "sM": sim.sample_nodes(state.sM),
    }


def write_vtu(path, sim, state):
    """Write one snapshot on the reference companion mesh as ASCII ``.vtu``."""
    fields = node_fields(sim, state)
    nodes = sim.comp.nodes
    cells = sim.comp.conn[:, _VTK_HEX]
    root = ET.Element("VTKFile", type="UnstructuredGrid", version="0.1", byte_order="LittleEndian")
    grid = ET.SubElement(root, "UnstructuredGrid")
    piece = ET.SubElement(grid, "Piece", NumberOfPoints=str(len(nodes)), NumberOfCells=str(len(cells)))
    pts = ET.SubElement(piece, "Points")
    _data_array(pts, "Points", nodes)
    pdata = ET.SubElement(piece, "PointData", Scalars="s")
    for name, vals in fields.items():
        _data_array(pdata, name, vals)
    cdata = ET.SubElement(piece, "Cells")
    conn = ET.SubElement(cdata, "DataArray", type="Int64", Name="connectivity", format="ascii")
    conn.text = " ".join(map(str, cells.ravel()))
    off = ET.SubElement(cdata, "DataArray", type="Int64", Name="offsets", format="ascii")
    off.text = " ".join(map(str, 8 * np.arange(1, len(cells) + 1)))
    typ = ET.SubElement(cdata, "DataArray", type="UInt8", Name="types", format="ascii")
    typ.text = " ".join([str(_VTK_HEXAHEDRON)] * len(cells))
    ET.ElementTree(root).write(path, xml_declaration=True, encoding="utf-8")
    return Path(path)


def read_vtu(path):
    """Minimal reader for files written by :func:`write_vtu`.

    Returns ``(points, cells, point_data)``.
    """
    root = ET.parse(path).getroot()
    piece = root.find("UnstructuredGrid/Piece")

    def array(node):
        vals = np.array(node.text.split(), float)
        ncomp = int(node.get("NumberOfComponents", "1"))
        return vals.reshape(-1, ncomp) if ncomp > 1 else vals

    points = array(piece.find("Points/DataArray"))
    cells = np.array(piece.find("Cells/DataArray[@Name='connectivity']").text.split(), int).reshape(-1, 8)
    data = {node.get("Name"): array(node) for node in piece.findall("PointData/DataArray")}
    return points, cells, data


@dataclass
class EventTracker:
    """Crack initiation and final rupture per material, each logged once."""

    initiation: float = INITIATION
    rupture: float = RUPTURE
    events: list = field(default_factory=list)
    _seen: set = field(default_factory=set)

    def update(self, t, u, state):
        new = []
        for material, attr in MATERIALS:
            peak = float(getattr(state, attr).max())
            for kind, level in (("initiation", self.initiation), ("rupture", self.rupture)):
                if peak >= level and (material, kind) not in self._seen:
                    self._seen.add((material, kind))
                    new.append((float(t), float(u), material, kind, peak))
        self.events.extend(new)
        return new

    def first(self, material, kind):
        """``(t, u)`` of an event or ``None``."""
        for t, u, mat, k, _ in self.events:
            if mat == material and k == kind:
                return t, u
        return None


class RunWriter:
    """Streams trace rows, events and snapshots into an output directory."""

    def __init__(self, output_dir, sim, cadence=1, fields=True):
        self.dir = Path(output_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.sim = sim
        self.cadence = max(int(cadence), 1)
        self.fields = fields
        self._csv = open(self.dir / "run.csv", "w", newline="")
        self._writer = csv.writer(self._csv, lineterminator="\n")
        self._writer.writerow(TRACE_COLUMNS)
        self._events = open(self.dir / "events.log", "w")

    def row(self, values):
        self._writer.writerow([repr(v) for v in values])
        self._csv.flush()

    def event(self, ev):
        t, u, material, kind, peak = ev
        self._events.write(f"t={t!r} u={u!r} {material} {kind} max={peak!r}\n")
        self._events.flush()

    def note(self, t, u, text):
        self._events.write(f"t={t!r} u={u!r} {text}\n")
        self._events.flush()

    def snapshot(self, step, state, force=False):
        if self.fields and (force or step % self.cadence == 0):
            return write_vtu(self.dir / f"fields_{step:05d}.vtu", self.sim, state)
        return None

    def close(self):
        self._csv.close()
        self._events.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trace(path):
    """Load ``run.csv`` as a dict of column arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], float).reshape(-1, len(rows[0]))
    return {name: body[:, k] for k, name in enumerate(header)}
