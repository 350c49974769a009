"""Grid-discretized domains and scalar fields on them.

A domain is a uniform Cartesian grid (2D or 3D) with an interior-cell mask.
Cell-center membership defines the mask; the grid always keeps at least one
layer of exterior cells around the interior so five/seven-point stencils
never index out of bounds.

Mask file format (plain text, language neutral)::

    dim h n0 n1 [n2]
    <0/1 tokens for all n0*n1[*n2] cells in C order, any line breaks>

The writer emits one row per leading index (n0 rows of n1 tokens in 2D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage


class DegenerateDomainError(ValueError):
    """Raised when a shape discretizes to an empty interior."""


class DisconnectedDomainError(ValueError):
    """Raised when the interior mask is not face-connected."""


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit ball in R^dim (pi, 4*pi/3, ...)."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


_FACE_STRUCTURES = {
    2: ndimage.generate_binary_structure(2, 1),
    3: ndimage.generate_binary_structure(3, 1),
}


class GridDomain:
    """Immutable uniform grid with an interior mask.

    Interior cells are numbered 0..n_cells-1 in C (row-major) scan order of
    the full extent; ``index_map`` holds that number per cell (-1 outside).
    Instances are immutable after construction and safe to share across
    threads; solver state is cached lazily on the instance.
    """

    def __init__(self, mask: np.ndarray, spacing: float, origin=None, name: str = ""):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got mask of dim {mask.ndim}")
        if spacing <= 0 or not math.isfinite(spacing):
            raise ValueError(f"spacing must be positive, got {spacing}")
        if origin is None:
            origin = np.zeros(mask.ndim)
        origin = np.asarray(origin, dtype=float).copy()

        # guarantee one exterior layer per side (pad rather than reject)
        pad = []
        for ax in range(mask.ndim):
            first = bool(mask.take(0, axis=ax).any())
            last = bool(mask.take(-1, axis=ax).any())
            pad.append((1 if first else 0, 1 if last else 0))
        if any(p != (0, 0) for p in pad):
            mask = np.pad(mask, pad)
            origin -= spacing * np.array([p[0] for p in pad], dtype=float)

        n_cells = int(mask.sum())
        if n_cells == 0:
            raise DegenerateDomainError("degenerate domain: empty interior")
        _, n_components = ndimage.label(mask, structure=_FACE_STRUCTURES[mask.ndim])
        if n_components != 1:
            raise DisconnectedDomainError(
                f"disconnected domain: {n_components} components"
            )

        mask.flags.writeable = False
        origin.flags.writeable = False
        index_map = np.full(mask.shape, -1, dtype=np.int64)
        index_map[mask] = np.arange(n_cells)
        index_map.flags.writeable = False

        self.dim = mask.ndim
        self.spacing = float(spacing)
        self.extent = mask.shape
        self.interior_mask = mask
        self.origin = origin
        self.index_map = index_map
        self.n_cells = n_cells
        self.cell_volume = self.spacing ** self.dim
        self.measure = n_cells * self.cell_volume
        self.name = name or f"mask{mask.shape}"
        self._centers = None
        self._ctx = None  # lazy solver context, see solver.py
        self._rank_order = None  # lazy radial rank order, see rank_ball_domain

    def __repr__(self):
        return (
            f"GridDomain({self.name}, dim={self.dim}, h={self.spacing:g}, "
            f"cells={self.n_cells}, measure={self.measure:.6g})"
        )

    def cell_centers(self) -> np.ndarray:
        """(n_cells, dim) physical coordinates of interior cell centers."""
        if self._centers is None:
            multi = np.transpose(np.nonzero(self.interior_mask)).astype(float)
            centers = self.origin + (multi + 0.5) * self.spacing
            centers.flags.writeable = False
            self._centers = centers
        return self._centers

    def embed(self, values: np.ndarray) -> np.ndarray:
        """Scatter per-cell values onto the full extent, zeros outside."""
        full = np.zeros(self.extent)
        full[self.interior_mask] = values
        return full

    def restrict(self, full: np.ndarray) -> np.ndarray:
        """Gather interior-cell values from a full-extent array."""
        return np.ascontiguousarray(full[self.interior_mask], dtype=float)

    def cell_of_multi_index(self, multi) -> int:
        idx = int(self.index_map[tuple(multi)])
        if idx < 0:
            raise ValueError(f"cell {tuple(multi)} is exterior")
        return idx

    def multi_index_of(self, cell: int) -> tuple:
        flat = np.flatnonzero(self.interior_mask.ravel())[cell]
        return tuple(int(v) for v in np.unravel_index(flat, self.extent))

    def center_of(self, cell: int) -> np.ndarray:
        return self.cell_centers()[cell]

    def centermost_cell(self) -> int:
        """Interior cell whose center is closest to the centroid (ties: lowest index)."""
        centers = self.cell_centers()
        centroid = centers.mean(axis=0)
        d2 = ((centers - centroid) ** 2).sum(axis=1)
        return int(np.argmin(d2))


@dataclass
class ScalarField:
    """Real values on the interior cells of a GridDomain."""

    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.domain.n_cells,):
            raise ValueError(
                f"field has {self.values.shape} values, domain has {self.domain.n_cells} cells"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @classmethod
    def zeros(cls, domain: GridDomain) -> "ScalarField":
        return cls(domain, np.zeros(domain.n_cells))

    @classmethod
    def ones(cls, domain: GridDomain) -> "ScalarField":
        return cls(domain, np.ones(domain.n_cells))

    @property
    def norm_l1(self) -> float:
        return float(np.abs(self.values).sum() * self.domain.cell_volume)

    @property
    def norm_l2(self) -> float:
        return float(math.sqrt((self.values ** 2).sum() * self.domain.cell_volume))

    @property
    def norm_linf(self) -> float:
        return float(np.abs(self.values).max())

    def embed(self) -> np.ndarray:
        return self.domain.embed(self.values)

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.domain, values)


# ----------------------------------------------------------------------
# shape constructors


def parse_shape(spec: str):
    """Parse a CLI shape spec like ``disk:1.0`` or ``annulus:0.5,1.0``.

    Returns (kind, params tuple).  Known kinds: disk, ball, square, cube,
    annulus, l_shape, mask_file.
    """
    if ":" in spec:
        kind, _, rest = spec.partition(":")
    else:
        kind, rest = spec, ""
    kind = kind.strip().lower()
    if kind == "mask_file":
        if not rest:
            raise ValueError("mask_file shape needs a path, e.g. mask_file:dom.mask")
        return kind, (rest,)
    try:
        params = tuple(float(tok) for tok in rest.split(",")) if rest else ()
    except ValueError as exc:
        raise ValueError(f"bad shape parameters in {spec!r}") from exc
    if kind in ("disk", "ball", "square", "cube", "l_shape"):
        if len(params) != 1 or params[0] <= 0:
            raise ValueError(f"{kind} takes one positive parameter, got {spec!r}")
    elif kind == "annulus":
        if len(params) != 2 or not 0 < params[0] < params[1]:
            raise ValueError(f"annulus takes 0 < R_in < R_out, got {spec!r}")
    else:
        raise ValueError(f"unknown shape {kind!r}")
    return kind, params


def _centered_grid(radius: float, h: float):
    """Odd-extent symmetric grid per axis with the middle cell centered at 0."""
    m = int(math.ceil(radius / h)) + 2
    n = 2 * m + 1
    coords = (np.arange(n) - m) * h
    origin = -(m + 0.5) * h
    return coords, origin


def _corner_grid(length: float, h: float):
    """Grid whose cells tile [0, length] exactly when length/h is integral."""
    n_in = int(round(length / h))
    if abs(n_in * h - length) > 1e-9 * max(1.0, length):
        n_in = int(math.ceil(length / h - 0.5))
    n = n_in + 2
    coords = (np.arange(n) - 0.5) * h  # cell centers; border cells outside (0, length)
    origin = -h
    return coords, origin


def make_domain(shape, resolution: float) -> GridDomain:
    """Build a GridDomain for a shape spec at ``resolution`` cells per unit length.

    ``shape`` is either a spec string (see parse_shape) or a pre-parsed
    (kind, params) pair.  Cell centers strictly inside the shape become
    interior cells.
    """
    if isinstance(shape, str):
        kind, params = parse_shape(shape)
    else:
        kind, params = shape
    if kind == "mask_file":
        return read_mask_file(params[0])
    if resolution <= 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    h = 1.0 / float(resolution)
    name = f"{kind}:{','.join(f'{p:g}' for p in params)}"

    if kind in ("disk", "ball", "annulus"):
        radius = params[-1]
        dim = 3 if kind == "ball" else 2
        coords, orig = _centered_grid(radius, h)
        grids = np.meshgrid(*([coords] * dim), indexing="ij")
        r2 = sum(g ** 2 for g in grids)
        if kind == "annulus":
            mask = (params[0] ** 2 < r2) & (r2 < params[1] ** 2)
        else:
            mask = r2 < radius ** 2
        origin = np.full(dim, orig)
    elif kind in ("square", "cube", "l_shape"):
        length = params[0]
        dim = 3 if kind == "cube" else 2
        coords, orig = _corner_grid(length, h)
        grids = np.meshgrid(*([coords] * dim), indexing="ij")
        mask = np.ones(grids[0].shape, dtype=bool)
        for g in grids:
            mask &= (g > 0) & (g < length)
        if kind == "l_shape":
            cut = np.ones_like(mask)
            for g in grids[:2]:
                cut &= g > length / 2.0
            mask &= ~cut
        origin = np.full(dim, orig)
    else:  # pragma: no cover - parse_shape already rejects
        raise ValueError(f"unknown shape {kind!r}")

    if not mask.any():
        raise DegenerateDomainError(f"degenerate domain: {name} empty at h={h:g}")
    return GridDomain(mask, h, origin=origin, name=name)


def equivalent_ball_radius(domain: GridDomain) -> float:
    """Radius of the ball with the same measure: (|D| / omega_n)^(1/n)."""
    return (domain.measure / unit_ball_volume(domain.dim)) ** (1.0 / domain.dim)


def rank_ball_domain(n_cells: int, spacing: float, dim: int, name: str = "") -> GridDomain:
    """Centered ball-like domain with exactly ``n_cells`` interior cells.

    Cells of a centered grid are ranked by (distance from origin, C index)
    and the first n_cells are selected, so the result has exactly the same
    measure as any domain with n_cells cells at this spacing.  The radial
    rank order is cached on the returned domain.
    """
    if n_cells < 1:
        raise ValueError("n_cells must be positive")
    radius_cells = (n_cells / unit_ball_volume(dim)) ** (1.0 / dim)
    coords, orig = _centered_grid((radius_cells + 1.0) * spacing, spacing)
    grids = np.meshgrid(*([coords] * dim), indexing="ij")
    d2 = sum(g ** 2 for g in grids).ravel()
    if n_cells > d2.size:  # pragma: no cover - _centered_grid always large enough
        raise ValueError("internal: rank ball grid too small")
    order = np.lexsort((np.arange(d2.size), d2))
    flat_mask = np.zeros(d2.size, dtype=bool)
    flat_mask[order[:n_cells]] = True
    mask = flat_mask.reshape(grids[0].shape)
    dom = GridDomain(
        mask, spacing, origin=np.full(dim, orig),
        name=name or f"rank_ball[{n_cells}]",
    )
    # rank order in interior numbering: position r holds the r-th most central cell
    centers = dom.cell_centers()
    dc2 = (centers ** 2).sum(axis=1)
    rank = np.lexsort((np.arange(dom.n_cells), dc2))
    rank.flags.writeable = False
    dom._rank_order = rank
    return dom


def ball_rank_order(domain: GridDomain) -> np.ndarray:
    """Interior indices sorted by (distance from the origin, index)."""
    if domain._rank_order is None:
        centers = domain.cell_centers()
        d2 = (centers ** 2).sum(axis=1)
        rank = np.lexsort((np.arange(domain.n_cells), d2))
        rank.flags.writeable = False
        domain._rank_order = rank
    return domain._rank_order


# ----------------------------------------------------------------------
# mask file I/O


def write_mask_file(path, domain: GridDomain) -> None:
    with open(path, "w", encoding="ascii") as fh:
        dims = " ".join(str(n) for n in domain.extent)
        fh.write(f"{domain.dim} {domain.spacing:.17g} {dims}\n")
        flat = domain.interior_mask.reshape(-1, domain.extent[-1])
        for row in flat:
            fh.write(" ".join("1" if v else "0" for v in row) + "\n")


def read_mask_file(path) -> GridDomain:
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    if len(tokens) < 4:
        raise ValueError(f"mask file {path}: truncated header")
    dim = int(tokens[0])
    if dim not in (2, 3):
        raise ValueError(f"mask file {path}: dim must be 2 or 3, got {dim}")
    h = float(tokens[1])
    extent = tuple(int(t) for t in tokens[2 : 2 + dim])
    body = tokens[2 + dim :]
    n_total = int(np.prod(extent))
    if len(body) != n_total:
        raise ValueError(
            f"mask file {path}: expected {n_total} cell tokens, got {len(body)}"
        )
    cells = np.array([int(t) for t in body], dtype=bool).reshape(extent)
    return GridDomain(cells, h, name=f"mask_file:{path}")


# ----------------------------------------------------------------------
# cell-set geometry diagnostics


def cellset_circularity(domain: GridDomain, member: np.ndarray) -> float:
    """Circularity 4*pi*area/perimeter^2 of a set of interior cells (2D).

    The perimeter uses the 4-direction Crofton estimator, which converges to
    the true boundary length for digitized smooth shapes (raw face counting
    converges to the taxicab perimeter instead).
    """
    if domain.dim != 2:
        raise NotImplementedError("circularity is defined for 2D domains")
    from skimage.measure import perimeter_crofton

    member = np.asarray(member, dtype=bool)
    if member.shape != (domain.n_cells,):
        raise ValueError("member mask must cover interior cells")
    if not member.any():
        raise ValueError("empty cell set")
    full = np.zeros(domain.extent, dtype=bool)
    full[domain.interior_mask] = member
    area = member.sum() * domain.cell_volume
    perim = perimeter_crofton(full, directions=4) * domain.spacing
    return float(4.0 * math.pi * area / perim ** 2)


def cellset_centroid(domain: GridDomain, member: np.ndarray) -> np.ndarray:
    """Physical centroid of a set of interior cells."""
    member = np.asarray(member, dtype=bool)
    if not member.any():
        raise ValueError("empty cell set")
    return domain.cell_centers()[member].mean(axis=0)
