"""Domains inside the unit box, masked sampling grids, and boundary index sets.

Membership is decided purely by the indicator evaluated on the oversampled
cartesian grid; boundary detection uses the discrete supports of the basis
functions (the nonzero samples of the primal scaling sequence), so arbitrary
indicator predicates are supported.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dual import dual_pair
from .dwt import idwt_column_filters
from .filters import FilterBank


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class DomainMask:
    """Indicator-defined subset of [0,1]^d.

    ``indicator`` maps an array of points with shape (npoints, d) to booleans.
    Built-in constructors produce closed domains (boundary points included).
    """

    dimension: int
    indicator: object
    description: str = "predicate"

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.asarray(self.indicator(pts), dtype=bool)


def interval(a, b):
    if not 0.0 <= a < b <= 1.0:
        raise DomainError("interval must satisfy 0 <= a < b <= 1")
    if a == 0.0 and b == 1.0:
        warnings.warn("domain touches the box boundary; periodization may leak")
    return DomainMask(1, lambda p: (p[:, 0] >= a) & (p[:, 0] <= b),
                      description=f"interval:{a},{b}")


def disk(cx, cy, r):
    if r <= 0:
        raise DomainError("radius must be positive")
    return DomainMask(
        2, lambda p: (p[:, 0] - cx) ** 2 + (p[:, 1] - cy) ** 2 <= r * r,
        description=f"disk:{cx},{cy},{r}")


def ball(cx, cy, cz, r):
    if r <= 0:
        raise DomainError("radius must be positive")
    return DomainMask(
        3,
        lambda p: (p[:, 0] - cx) ** 2 + (p[:, 1] - cy) ** 2 + (p[:, 2] - cz) ** 2 <= r * r,
        description=f"ball:{cx},{cy},{cz},{r}")


def whole_box(d):
    return DomainMask(d, lambda p: np.ones(p.shape[0], dtype=bool), description="box")


def _as_tuple(x, d):
    if np.isscalar(x):
        return (int(x),) * d
    t = tuple(int(v) for v in x)
    if len(t) != d:
        raise DomainError(f"expected {d} entries, got {len(t)}")
    return t


@dataclass(frozen=True)
class MaskedGrid:
    """Oversampled cartesian grid restricted to the domain."""

    mask: DomainMask
    N: tuple
    q: tuple
    inside: np.ndarray = field(repr=False)      # sorted linear indices into the full grid
    inside_bool: np.ndarray = field(repr=False)  # boolean over the full grid, C order

    @property
    def dimension(self):
        return self.mask.dimension

    @property
    def grid_shape(self):
        return tuple(n * q for n, q in zip(self.N, self.q))

    @property
    def M(self):
        return int(self.inside.size)

    @property
    def n_basis(self):
        return int(np.prod(self.N))

    def points(self, linear_idx=None):
        """Physical coordinates of (selected) full-grid points."""
        idx = self.inside if linear_idx is None else np.asarray(linear_idx)
        coords = np.unravel_index(idx, self.grid_shape)
        return np.column_stack([c / g for c, g in zip(coords, self.grid_shape)])


def masked_grid(mask: DomainMask, N, q) -> MaskedGrid:
    d = mask.dimension
    N = _as_tuple(N, d)
    q = _as_tuple(q, d)
    for n in N:
        if n & (n - 1) or n < 2:
            raise DomainError(f"N must be powers of two >= 2, got {N}")
    for qi in q:
        if qi < 2:
            raise DomainError("oversampling q must be >= 2 in every dimension")
    shape = tuple(n * qi for n, qi in zip(N, q))
    axes = [np.arange(g) / g for g in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    inside_bool = mask.contains(pts).reshape(shape)
    inside = np.flatnonzero(inside_bool.ravel())
    if inside.size <= np.prod(N):
        raise DomainError(
            f"oversampling too low: {inside.size} sample points for {np.prod(N)} dof")
    return MaskedGrid(mask=mask, N=N, q=q, inside=inside, inside_bool=inside_bool)


def _support_offsets(bank: FilterBank, grid: MaskedGrid):
    """Per-dimension grid offsets of the discrete support of phi_{kN}."""
    outs = []
    for n, q in zip(grid.N, grid.q):
        b, _ = dual_pair(bank, q)
        outs.append((b.offset + np.nonzero(b.b)[0]) % (n * q))
    return outs


def _separable_any(flags, offsets_per_dim, steps):
    """any over the product support: OR of rolls per axis, then subsample.

    flags has the full grid shape; offsets give the support pattern of basis
    element 0 per dimension, steps the grid step per basis index (q_i).
    """
    acc = flags
    for ax, offs in enumerate(offsets_per_dim):
        nxt = np.zeros_like(acc)
        for o in offs:
            nxt |= np.roll(acc, -int(o), axis=ax)
        acc = nxt
    slices = tuple(slice(0, None, s) for s in steps)
    return acc[slices]


def scaling_boundary_set(mask_or_grid, bank: FilterBank, N=None, q=None):
    """Multi-indices of scaling functions meeting both the domain and its complement."""
    grid = mask_or_grid if isinstance(mask_or_grid, MaskedGrid) else \
        masked_grid(mask_or_grid, N, q)
    offsets = _support_offsets(bank, grid)
    touches_in = _separable_any(grid.inside_bool, offsets, grid.q)
    touches_out = _separable_any(~grid.inside_bool, offsets, grid.q)
    kflags = touches_in & touches_out
    return np.flatnonzero(kflags.ravel()), kflags


def _wavelet_column_supports(bank: FilterBank, J: int):
    """Scaling-index support interval (start, length) of each column filter."""
    sup = []
    for off, taps in idwt_column_filters(bank, J):
        n = 2**J
        length = min(taps.size, n)
        sup.append((off % n, length))
    return sup


def wavelet_boundary_set(kflags_1d_list, bank: FilterBank, N):
    """Wavelet-layout indices whose synthesis footprint meets the boundary set.

    A wavelet index is included when some scaling function in its iDWT
    synthesis footprint belongs to the boundary set K.  Computed per dimension
    by poison-marker propagation through the inverse transform pattern; the
    support-arithmetic route is in ``wavelet_boundary_set_intervals``.
    """
    return _wavelet_boundary(kflags_1d_list, bank, N, mode="poison")


def wavelet_boundary_set_intervals(kflags_1d_list, bank: FilterBank, N):
    """Support-arithmetic route of ``wavelet_boundary_set`` (must agree)."""
    return _wavelet_boundary(kflags_1d_list, bank, N, mode="intervals")


def _wavelet_flags_axis(flags, bank, n, mode):
    """Wavelet-layout boundary flags along the last axis from scaling flags."""
    J = n.bit_length() - 1
    out = np.zeros_like(flags)
    if mode == "poison":
        # propagate markers through analysis steps: a coarse coefficient is
        # marked when any fine coefficient in its filter footprint is marked.
        ha, ga = bank.h_dual, bank.g_dual
        hs, gs = bank.h, bank.g
        cur = flags
        for j in range(J, 0, -1):
            m = cur.shape[-1]
            half = m // 2
            vpois = np.zeros(cur.shape[:-1] + (half,), dtype=bool)
            wpois = np.zeros_like(vpois)
            base = 2 * np.arange(half)
            # footprint of the *synthesis* filters defines overlap with K
            for mask_, out_ in ((hs, vpois), (gs, wpois)):
                for ti in range(len(mask_)):
                    t = mask_.offset + ti
                    out_ |= cur[..., (base + t) % m]
            out[..., 2 ** (j - 1): 2 ** j] = wpois
            cur = vpois
        out[..., 0] = cur[..., 0]
        return out
    # interval mode: circular support interval of each column vs. flag counts
    sup = _wavelet_column_supports(bank, J)
    csum = np.concatenate(
        [np.zeros(flags.shape[:-1] + (1,), dtype=int),
         np.cumsum(np.concatenate([flags, flags], axis=-1), axis=-1)], axis=-1)
    for idx in range(n):
        if idx == 0:
            start, length = sup[J]
        else:
            l = idx.bit_length() - 1
            mshift = (idx - 2**l) * 2 ** (J - l)
            start, length = sup[l]
            start = (start + mshift) % n
        length = min(length, n)
        out[..., idx] = (csum[..., start + length] - csum[..., start]) > 0
    return out


def _wavelet_boundary(kflags, bank, N, mode):
    flags = np.asarray(kflags, dtype=bool).reshape(N)
    for ax, n in enumerate(N):
        flags = np.moveaxis(
            _wavelet_flags_axis(np.moveaxis(flags, ax, -1), bank, n, mode), -1, ax)
    return np.flatnonzero(flags.ravel()), flags


def plunge_row_set(kflags, bank: FilterBank, grid: MaskedGrid):
    """Masked-grid row indices that can carry nonzero rows of the plunge matrix.

    A grid point qualifies when some primal scaling function that is nonzero
    there has a discrete dual overlapping a boundary element of K.
    """
    flags = np.asarray(kflags, dtype=bool).reshape(grid.N)
    # step 1: dilate K to I1 = K plus duals overlapping a K element, per axis
    i1 = flags.copy()
    for ax, (n, q) in enumerate(zip(grid.N, grid.q)):
        b, d = dual_pair(bank, q)
        bsup = b.offset + np.nonzero(b.b)[0]
        dsup = d.offset + np.nonzero(d.b_dual)[0]
        # index differences delta = i - l with overlapping supports:
        # [i q + dsup] meets [l q + bsup]  <=>  delta*q in bsup - dsup range
        lo = int(np.ceil((bsup[0] - dsup[-1]) / q))
        hi = int(np.floor((bsup[-1] - dsup[0]) / q))
        acc = np.zeros_like(i1)
        cur = np.moveaxis(i1, ax, -1)
        accv = np.moveaxis(acc, ax, -1)
        for delta in range(lo, hi + 1):
            accv |= np.roll(cur, delta, axis=-1)
        i1 = np.moveaxis(accv, -1, ax) | flags
    # step 2: dilate I1 into the sampling grid through the primal supports
    gflags = i1
    for ax, (n, q) in enumerate(zip(grid.N, grid.q)):
        b, _ = dual_pair(bank, q)
        bsup = b.offset + np.nonzero(b.b)[0]
        cur = np.moveaxis(gflags, ax, -1)
        g = n * q
        up = np.zeros(cur.shape[:-1] + (g,), dtype=bool)
        up[..., ::q] = cur
        out = np.zeros_like(up)
        for o in bsup:
            out |= np.roll(up, int(o), axis=-1)
        gflags = np.moveaxis(out, -1, ax)
    linear = np.flatnonzero(gflags.ravel() & grid.inside_bool.ravel())
    return np.searchsorted(grid.inside, linear)
