"""Synthetic particle assemblies and the particle CSV format."""

from __future__ import annotations

import contextlib
import csv
import io
import itertools
import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, DimensionMismatchError, ParseError, ValidationError
from .graph import Particle

GRAIN_GAP = 0.95  # in diameters


# ------------------------------------------------------------------ 2D

def _triangular_lattice(origin, angle_deg, spacing, reach):
    """Triangular lattice points within ``reach`` of ``origin`` (bounding square)."""
    n = int(math.ceil(2.0 * reach / spacing)) + 2
    i, j = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1), indexing="ij")
    i, j = i.ravel().astype(float), j.ravel().astype(float)
    x = (i + 0.5 * j) * spacing
    y = (j * math.sqrt(3.0) / 2.0) * spacing
    t = math.radians(angle_deg)
    c, s = math.cos(t), math.sin(t)
    pts = np.column_stack([c * x - s * y, s * x + c * y]) + np.asarray(origin, dtype=float)
    keep = np.all(np.abs(pts - origin) <= reach, axis=1)
    return pts[keep]


def _particles(points, radius):
    return [Particle(i, tuple(float(v) for v in p), radius) for i, p in enumerate(points)]


def gen_hex_patch(width: float, height: float, spacing: float = 1.0, angle: float = 0.0):
    """A single ordered rectangular patch of a triangular lattice."""
    if width <= 0 or height <= 0 or spacing <= 0:
        raise ConfigError("patch extent and spacing must be positive")
    centre = np.array([width / 2.0, height / 2.0])
    pts = _triangular_lattice(centre, angle, spacing, max(width, height))
    eps = 1e-9 * spacing
    inside = (pts[:, 0] >= -eps) & (pts[:, 0] <= width + eps) & (pts[:, 1] >= -eps) & (pts[:, 1] <= height + eps)
    pts = pts[inside]
    pts = pts[np.lexsort((pts[:, 0], pts[:, 1]))]
    return _particles(pts, spacing / 2.0)


@dataclass(frozen=True)
class TriGrainConfig:
    orientations: tuple = (0.0, 19.0, 41.0)
    seeds: tuple = ((20.0, 32.0), (9.6, 14.0), (30.4, 14.0))
    width: float = 40.0
    height: float = 40.0
    spacing: float = 1.0
    min_grain_size: int = 50

    def validate(self):
        if len(self.orientations) != 3 or len(self.seeds) != 3:
            raise ConfigError("tri-grain needs exactly three orientations and three seeds")
        for a, b in itertools.combinations(self.orientations, 2):
            diff = (a - b) % 60.0
            if min(diff, 60.0 - diff) < 1e-6:
                raise ConfigError(f"orientations {a} and {b} coincide modulo 60 degrees")
        s = np.asarray(self.seeds, dtype=float)
        if s.shape != (3, 2):
            raise ConfigError("seeds must be three planar points")
        for p, q in itertools.combinations(s, 2):
            if np.allclose(p, q):
                raise ConfigError("seed points coincide")
        area = (s[1, 0] - s[0, 0]) * (s[2, 1] - s[0, 1]) - (s[2, 0] - s[0, 0]) * (s[1, 1] - s[0, 1])
        if abs(area) < 1e-9 * max(self.width, self.height) ** 2:
            raise ConfigError("seed points are collinear")
        if self.width <= 0 or self.height <= 0 or self.spacing <= 0:
            raise ConfigError("extent and spacing must be positive")


def grain_of(cfg: TriGrainConfig, positions) -> np.ndarray:
    """Index of the nearest seed for each position."""
    pos = np.asarray(positions, dtype=float)
    seeds = np.asarray(cfg.seeds, dtype=float)
    d2 = ((pos[:, None, :] - seeds[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def grain_boundary_distance(cfg: TriGrainConfig, positions) -> np.ndarray:
    """Distance to the nearest grain boundary or box edge."""
    pos = np.asarray(positions, dtype=float)
    seeds = np.asarray(cfg.seeds, dtype=float)
    own = grain_of(cfg, pos)
    out = np.minimum.reduce([pos[:, 0], cfg.width - pos[:, 0], pos[:, 1], cfg.height - pos[:, 1]])
    for h in range(len(seeds)):
        sg = seeds[own]
        sh = seeds[h]
        gap = np.linalg.norm(sh - sg, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            dist = (((pos - sh) ** 2).sum(1) - ((pos - sg) ** 2).sum(1)) / (2.0 * gap)
        dist = np.where(own == h, np.inf, dist)
        out = np.minimum(out, dist)
    return out


def grain_interior(cfg: TriGrainConfig, positions, margin: float = 2.0) -> np.ndarray:
    return grain_boundary_distance(cfg, positions) >= margin * cfg.spacing


def gen_tri_grain(cfg: TriGrainConfig | None = None):
    """Three differently oriented triangular-lattice grains in a rectangle.

    Each grain fills the Voronoi cell of its seed. Grains are laid down in
    order; a particle closer than ``0.95 d`` to an already placed particle of
    another grain is dropped, which leaves irregular boundaries.
    """
    cfg = cfg or TriGrainConfig()
    cfg.validate()
    d = cfg.spacing
    reach = math.hypot(cfg.width, cfg.height)
    eps = 1e-9 * d
    placed = []
    for g, (seed, angle) in enumerate(zip(cfg.seeds, cfg.orientations)):
        pts = _triangular_lattice(seed, angle, d, reach)
        inside = (pts[:, 0] >= -eps) & (pts[:, 0] <= cfg.width + eps) & (pts[:, 1] >= -eps) & (pts[:, 1] <= cfg.height + eps)
        pts = pts[inside]
        pts = pts[grain_of(cfg, pts) == g]
        if placed:
            others = np.vstack(placed)
            near = cKDTree(others).query(pts, k=1)[0]
            pts = pts[near >= GRAIN_GAP * d]
        pts = pts[np.lexsort((pts[:, 0], pts[:, 1]))]
        if len(pts) < cfg.min_grain_size:
            raise ConfigError(f"grain {g} holds only {len(pts)} particles; enlarge the extent")
        placed.append(pts)
    return _particles(np.vstack(placed), d / 2.0)


# ------------------------------------------------------------------ 3D

@dataclass(frozen=True)
class FourBlockConfig:
    nx: int = 8
    ny: int = 8
    nz: int = 8
    spacing: float = 1.0

    def validate(self):
        for name in ("nx", "ny", "nz"):
            v = getattr(self, name)
            if v < 4 or v % 2:
                raise ConfigError(f"{name} must be even and at least 4, got {v}")
        if self.spacing <= 0:
            raise ConfigError("spacing must be positive")

    @property
    def central_z(self):
        return (self.nz // 2 - 1, self.nz // 2)

    @property
    def central_y(self):
        return (self.ny // 2 - 1, self.ny // 2)


def _four_block_sites(cfg: FourBlockConfig):
    """Lattice sites with a flag for membership in the central planes."""
    cz, cy = cfg.central_z, cfg.central_y
    sites = []
    for z, y, x in itertools.product(range(cfg.nz), range(cfg.ny), range(cfg.nx)):
        sites.append((x, y, z, z in cz or y in cy))
    return sites


def _removed(x, y, z, cfg: FourBlockConfig) -> bool:
    # checkerboard within each plane: the XY pair uses x+y parity, the XZ pair x+z
    if z in cfg.central_z:
        return (x + y) % 2 == 0
    return (x + z) % 2 == 0


def gen_four_block(cfg: FourBlockConfig | None = None):
    """Simple-cubic block with half of the central XY and XZ plane pairs removed.

    What remains is four equal cuboids joined through the surviving plane
    sites.
    """
    cfg = cfg or FourBlockConfig()
    cfg.validate()
    pts = [
        (x * cfg.spacing, y * cfg.spacing, z * cfg.spacing)
        for x, y, z, plane in _four_block_sites(cfg)
        if not (plane and _removed(x, y, z, cfg))
    ]
    return _particles(np.array(pts, dtype=float), cfg.spacing / 2.0)


def four_block_region(cfg: FourBlockConfig, positions) -> np.ndarray:
    """Block index 0..3 for block sites, -1 for surviving central-plane sites."""
    idx = np.rint(np.asarray(positions, dtype=float) / cfg.spacing).astype(int)
    y, z = idx[:, 1], idx[:, 2]
    plane = np.isin(z, cfg.central_z) | np.isin(y, cfg.central_y)
    region = (z > cfg.central_z[1]).astype(int) * 2 + (y > cfg.central_y[1]).astype(int)
    return np.where(plane, -1, region)


def four_block_plane_sites(cfg: FourBlockConfig) -> int:
    return sum(1 for *_, plane in _four_block_sites(cfg) if plane)


# ----------------------------------------------------------------- CSV

@contextlib.contextmanager
def _open(path_or_file, mode):
    if path_or_file is None or path_or_file == "-":
        yield sys.stdin if "r" in mode else sys.stdout
    elif isinstance(path_or_file, io.IOBase) or hasattr(path_or_file, "read" if "r" in mode else "write"):
        yield path_or_file
    else:
        with open(path_or_file, mode, encoding="utf-8", newline="") as fh:
            yield fh


def read_particles(path, return_mapping: bool = False):
    """Read ``id,x,y[,z],radius`` rows; ``#`` lines are comments.

    Arbitrary integer ids are remapped to ``0..N-1`` in ascending id order;
    ``return_mapping=True`` also returns ``{original_id: new_id}``.
    """
    rows = []
    with _open(path, "r") as fh:
        header = None
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = next(csv.reader([stripped]))
            fields = [f.strip() for f in fields]
            if header is None:
                header = fields
                if header not in (["id", "x", "y", "radius"], ["id", "x", "y", "z", "radius"]):
                    raise ParseError(f"unexpected header {','.join(header)}", lineno)
                continue
            if len(fields) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(fields)}", lineno)
            try:
                pid = int(fields[0])
                coords = tuple(float(v) for v in fields[1:-1])
                radius = float(fields[-1])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if pid < 0:
                raise ParseError(f"negative id {pid}", lineno)
            if not radius > 0:
                raise ParseError(f"radius must be positive, got {radius}", lineno)
            if not all(math.isfinite(v) for v in coords):
                raise ParseError("non-finite coordinate", lineno)
            rows.append((pid, coords, radius, lineno))
    if header is None:
        raise ParseError("missing header")

    seen = {}
    for pid, _, _, lineno in rows:
        if pid in seen:
            raise ValidationError(f"duplicate id {pid} on lines {seen[pid]} and {lineno}")
        seen[pid] = lineno
    mapping = {pid: new for new, pid in enumerate(sorted(seen))}
    particles = [Particle(mapping[pid], coords, radius) for pid, coords, radius, _ in rows]
    return (particles, mapping) if return_mapping else particles


def write_particles(particles, path):
    particles = sorted(particles, key=lambda p: p.id)
    dims = {p.dimension for p in particles}
    if len(dims) > 1:
        raise DimensionMismatchError("particles have mixed dimensions")
    dim = dims.pop() if dims else 2
    header = "id,x,y,radius" if dim == 2 else "id,x,y,z,radius"
    with _open(path, "w") as fh:
        fh.write(header + "\n")
        for p in particles:
            coords = ",".join(f"{float(v):.17g}" for v in p.position)
            fh.write(f"{p.id},{coords},{float(p.radius):.17g}\n")
