"""Discrete geometry: image grid, known region, boundaries and unknown numbering.

Grid convention
---------------
Values live on the nodes of a uniform grid. Node ``(i, j)`` sits at
``x = x0 + j*h``, ``y = y0 + i*h`` (row ``i`` is the y index). Each node owns a
dual cell of area ``h**2``, halved on the frame and quartered at the corners,
so the frame nodes are the discrete ``∂Ω`` on which Neumann conditions hold.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ScalarField:
    """Real values sampled on a uniform node grid.

    ``values`` has shape ``(height, width)`` and is stored row-major.
    """

    values: np.ndarray
    spacing: float = 1.0
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError(f"field values must be 2-D, got shape {v.shape}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "values", _readonly(v))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def flat(self):
        return self.values.ravel()

    def coords(self):
        """Return ``(X, Y)`` node coordinate arrays."""
        return grid_coords(self.shape, self.spacing, self.origin)

    def with_values(self, values):
        return ScalarField(np.asarray(values, dtype=float).reshape(self.shape), self.spacing, self.origin)

    @classmethod
    def from_function(cls, func, shape, spacing, origin=(0.0, 0.0)):
        X, Y = grid_coords(shape, spacing, origin)
        return cls(np.broadcast_to(func(X, Y), shape), spacing, origin)


def grid_coords(shape, spacing, origin=(0.0, 0.0)):
    ny, nx = shape
    x = origin[0] + spacing * np.arange(nx)
    y = origin[1] + spacing * np.arange(ny)
    return np.meshgrid(x, y)


def cell_volumes(shape, spacing):
    """Dual-cell areas: ``h**2`` inside, half on edges, a quarter at corners."""
    ny, nx = shape
    wy = np.ones(ny)
    wy[[0, -1]] = 0.5
    wx = np.ones(nx)
    wx[[0, -1]] = 0.5
    return spacing**2 * np.outer(wy, wx)


def frame_mask(shape):
    m = np.zeros(shape, dtype=bool)
    m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
    return m


def neighbor_any(mask):
    """True where at least one 4-neighbour of a node is set in ``mask``."""
    out = np.zeros_like(mask, dtype=bool)
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


class PixelKind(str, enum.Enum):
    INTERIOR_UNKNOWN = "interior-unknown"
    OUTER_BOUNDARY = "outer-boundary"
    KNOWN_INTERIOR = "known-interior"
    KNOWN_BOUNDARY = "known-boundary"


@dataclass(frozen=True)
class DomainSpec:
    """Geometry of an inpainting problem.

    Attributes
    ----------
    shape, spacing, origin
        Grid description.
    known : ndarray of bool
        ``True`` on Ω_K.
    outer_boundary : ndarray of int
        Flat indices of the frame nodes (∂Ω).
    known_boundary : ndarray of int
        Flat indices of known nodes with an unknown 4-neighbour (∂Ω_K).
    unknown_index : ndarray of int
        Full-grid map node -> dense unknown number, ``-1`` on known nodes.
    unknowns : ndarray of int
        Flat indices of the unknown nodes in row-major order.
    """

    shape: tuple
    spacing: float
    known: np.ndarray
    outer_boundary: np.ndarray
    known_boundary: np.ndarray
    unknown_index: np.ndarray
    unknowns: np.ndarray
    origin: tuple = (0.0, 0.0)
    flags: tuple = field(default=())

    @property
    def n_unknowns(self):
        return self.unknowns.size

    @property
    def size(self):
        return self.shape[0] * self.shape[1]

    @property
    def has_dirichlet(self):
        return self.known_boundary.size > 0

    def volumes(self):
        return cell_volumes(self.shape, self.spacing)

    def coords(self):
        return grid_coords(self.shape, self.spacing, self.origin)


def build_domain(known_mask, spacing=1.0, origin=(0.0, 0.0)):
    """Classify the nodes of a grid given the known-data mask.

    Parameters
    ----------
    known_mask : array_like of bool, shape (height, width)
        ``True`` where image data is kept (Ω_K).
    spacing : float
        Grid step ``h``.

    Returns
    -------
    DomainSpec

    Raises
    ------
    DomainError
        If the grid is smaller than 3x3, ``spacing`` is not positive, or a
        known node lies on the frame (the Dirichlet and Neumann boundaries
        would meet).
    """
    known = np.asarray(known_mask, dtype=bool)
    if known.ndim != 2 or min(known.shape) < 3:
        raise DomainError(f"mask must be at least 3x3, got shape {known.shape}")
    if not spacing > 0:
        raise DomainError(f"spacing must be positive, got {spacing}")

    frame = frame_mask(known.shape)
    clash = np.argwhere(known & frame)
    if clash.size:
        i, j = clash[0]
        raise DomainError(
            f"known pixel on the image frame at (row={i}, col={j}); "
            f"{len(clash)} such pixel(s): Dirichlet and Neumann boundaries must not meet"
        )

    unknown = ~known
    known_boundary = known & neighbor_any(unknown)
    index = np.full(known.shape, -1, dtype=np.int64)
    unknowns = np.flatnonzero(unknown.ravel())
    index.ravel()[unknowns] = np.arange(unknowns.size)

    flags = []
    if not known_boundary.any():
        flags.append("no Dirichlet data")
    if unknowns.size == 0:
        flags.append("no unknowns")

    return DomainSpec(
        shape=known.shape,
        spacing=float(spacing),
        known=_readonly(known),
        outer_boundary=_readonly(np.flatnonzero(frame.ravel())),
        known_boundary=_readonly(np.flatnonzero(known_boundary.ravel())),
        unknown_index=_readonly(index),
        unknowns=_readonly(unknowns),
        origin=(float(origin[0]), float(origin[1])),
        flags=tuple(flags),
    )


def full_domain(shape, spacing=1.0, origin=(0.0, 0.0)):
    """Domain without known data: every node is an unknown."""
    return build_domain(np.zeros(shape, dtype=bool), spacing, origin)


def classify_pixel(domain, pixel):
    """Kind of a node, given as ``(row, col)`` or a flat index."""
    ny, nx = domain.shape
    if np.ndim(pixel) == 0:
        p = int(pixel)
        if not 0 <= p < ny * nx:
            raise IndexError(f"pixel index {p} outside grid of {ny * nx} nodes")
        i, j = divmod(p, nx)
    else:
        i, j = (int(v) for v in pixel)
        if not (0 <= i < ny and 0 <= j < nx):
            raise IndexError(f"pixel ({i}, {j}) outside grid of shape {domain.shape}")
    if domain.known[i, j]:
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            a, b = i + di, j + dj
            if 0 <= a < ny and 0 <= b < nx and not domain.known[a, b]:
                return PixelKind.KNOWN_BOUNDARY
        return PixelKind.KNOWN_INTERIOR
    if i in (0, ny - 1) or j in (0, nx - 1):
        return PixelKind.OUTER_BOUNDARY
    return PixelKind.INTERIOR_UNKNOWN


def classify_all(domain):
    """Vectorised :func:`classify_pixel` over the whole grid (array of str)."""
    kinds = np.full(domain.shape, PixelKind.INTERIOR_UNKNOWN.value, dtype=object)
    frame = frame_mask(domain.shape)
    kb = np.zeros(domain.size, dtype=bool)
    kb[domain.known_boundary] = True
    kb = kb.reshape(domain.shape)
    kinds[frame & ~domain.known] = PixelKind.OUTER_BOUNDARY.value
    kinds[domain.known & ~kb] = PixelKind.KNOWN_INTERIOR.value
    kinds[kb] = PixelKind.KNOWN_BOUNDARY.value
    return kinds
