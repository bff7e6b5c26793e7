"""Fast periodic discrete wavelet transforms and their sparse matrix forms.

The transform always runs the full J levels, producing the coefficient layout

    [v00, w00, w10, w11, ..., w_{J-1,0}, ..., w_{J-1, 2^{J-1}-1}]

with scale blocks of sizes 1, 1, 2, 4, ..., 2^{J-1}.  Periodic boundary
conditions are realized by index arithmetic modulo the block length.

The primal transform analyzes with the dual masks (h~, g~) and synthesizes
with the primal masks (h, g); the dual transform swaps the roles, so that
W* = W~^{-1} and (W^{-1})* = W~ hold.
"""

from dataclasses import dataclass

import numpy as np
import scipy.signal
import scipy.sparse

from .filters import FilterBank, Mask

DENSE_J_GUARD = 12


class TransformError(ValueError):
    pass


def _check_len(v, J):
    if v.shape[-1] != 2**J:
        raise TransformError(f"vector length {v.shape[-1]} != 2^{J}")


def _analysis_step(v, h: Mask, g: Mask):
    """One filter-bank analysis step with periodic wrap-around.

    Operates on the last axis; leading axes are batched.
    """
    n = v.shape[-1]
    half = n // 2
    vc = np.zeros(v.shape[:-1] + (half,), dtype=v.dtype)
    wc = np.zeros_like(vc)
    base = 2 * np.arange(half)
    for mask, out in ((h, vc), (g, wc)):
        for ti, c in enumerate(mask.taps):
            t = mask.offset + ti
            out += c * v[..., (base + t) % n]
    return vc, wc


def _synthesis_step(v, w, h: Mask, g: Mask):
    """One filter-bank synthesis step with periodic wrap-around (last axis)."""
    half = v.shape[-1]
    n = 2 * half
    out = np.zeros(v.shape[:-1] + (n,), dtype=np.result_type(v, w))
    idx = 2 * np.arange(half)
    for mask, coarse in ((h, v), (g, w)):
        for ti, c in enumerate(mask.taps):
            t = mask.offset + ti
            # indices 2l + t are pairwise distinct mod n for fixed t
            out[..., (idx + t) % n] += c * coarse
    return out


@dataclass(frozen=True)
class TransformPlan:
    """Filter choice for one transform direction/side."""

    bank: FilterBank
    J: int
    side: str = "primal"   # primal | dual

    def __post_init__(self):
        if self.J < 1:
            raise TransformError("J must be >= 1")
        if self.side not in ("primal", "dual"):
            raise TransformError(f"bad side {self.side!r}")

    @property
    def analysis_masks(self):
        b = self.bank
        return (b.h_dual, b.g_dual) if self.side == "primal" else (b.h, b.g)

    @property
    def synthesis_masks(self):
        b = self.bank
        return (b.h, b.g) if self.side == "primal" else (b.h_dual, b.g_dual)


def dwt(v, plan: TransformPlan):
    """Full J-level forward transform along the last axis, O(N) per vector."""
    v = np.asarray(v, dtype=float)
    _check_len(v, plan.J)
    h, g = plan.analysis_masks
    out = np.empty_like(v)
    cur = v
    for j in range(plan.J, 0, -1):
        cur, w = _analysis_step(cur, h, g)
        out[..., 2 ** (j - 1): 2**j] = w
    out[..., 0] = cur[..., 0]
    return out


def idwt(w, plan: TransformPlan):
    """Full J-level inverse transform along the last axis, O(N) per vector."""
    w = np.asarray(w, dtype=float)
    _check_len(w, plan.J)
    h, g = plan.synthesis_masks
    cur = w[..., :1].copy()
    for j in range(1, plan.J + 1):
        cur = _synthesis_step(cur, w[..., 2 ** (j - 1): 2**j], h, g)
    return cur


def dual_dwt(v, bank: FilterBank, J: int):
    return dwt(v, TransformPlan(bank, J, side="dual"))


def dual_idwt(w, bank: FilterBank, J: int):
    return idwt(w, TransformPlan(bank, J, side="dual"))


def dwt_axis(a, plan: TransformPlan, axis: int):
    """Apply the forward transform along one axis of an nd array."""
    return np.moveaxis(dwt(np.moveaxis(a, axis, -1), plan), -1, axis)


def idwt_axis(a, plan: TransformPlan, axis: int):
    return np.moveaxis(idwt(np.moveaxis(a, axis, -1), plan), -1, axis)


def dense_matrix(plan: TransformPlan, inverse: bool = False):
    """Explicit transform matrix, assembled by applying the fast transform."""
    if plan.J > DENSE_J_GUARD:
        raise TransformError(f"dense assembly limited to J <= {DENSE_J_GUARD}")
    n = 2**plan.J
    fn = idwt if inverse else dwt
    # batched over rows: row k of the result is the image of e_k, i.e. column k
    return fn(np.eye(n), plan).T


def _periodize(taps, offset, n):
    """Wrap a compact sequence onto Z_n."""
    out = np.zeros(n)
    idx = (offset + np.arange(taps.size)) % n
    np.add.at(out, idx, taps)
    return out


def _upsample(taps, q):
    out = np.zeros((taps.size - 1) * q + 1)
    out[::q] = taps
    return out


def _conv(a, b):
    if a.size * b.size > 1 << 14:
        return scipy.signal.fftconvolve(a, b)
    return np.convolve(a, b)


def idwt_column_filters(bank: FilterBank, J: int, side: str = "primal"):
    """The J+1 cascade filters whose shifts make up the columns of W^-1.

    Returns a list ``[f_0, ..., f_{J-1}, f_scaling]`` of (offset, taps) pairs
    in compact (non-periodized) form; the column of W^-1 for wavelet (l, m) is
    the circular shift by m * 2^(J-l) of f_l periodized to length 2^J, and the
    first column is the periodization of f_scaling.
    """
    if J < 1:
        raise TransformError("J must be >= 1")
    plan = TransformPlan(bank, J, side)
    h, g = plan.synthesis_masks
    # P_k = h(z) h(z^2) ... h(z^{2^{k-1}}): synthesis cascade of k h-steps.
    P = [(0, np.array([1.0]))]
    off, taps = 0, np.array([1.0])
    for k in range(J):
        up = _upsample(h.taps, 2**k)
        taps = _conv(taps, up)
        off = off + h.offset * 2**k
        P.append((off, taps))
    filters = []
    for l in range(J):
        # wavelet at scale l: g(z^{2^{J-1-l}}) * P_{J-1-l}
        k = J - 1 - l
        goff, gtaps = g.offset * 2**k, _upsample(g.taps, 2**k)
        poff, ptaps = P[k]
        filters.append((goff + poff, _conv(gtaps, ptaps)))
    filters.append(P[J])
    return filters


def column_filters_periodized(bank: FilterBank, J: int, side: str = "primal"):
    """Same filters periodized to length 2^J (scale order as above)."""
    n = 2**J
    return [_periodize(t, o, n) for o, t in idwt_column_filters(bank, J, side)]


def column_scale(idx, J):
    """Scale block of a coefficient index in the standard layout.

    Returns (l, m): the scale l in 0..J-1 and translation m for wavelet
    indices, and (J, 0) for the leading scaling coefficient.
    """
    if idx == 0:
        return J, 0
    l = int(idx).bit_length() - 1
    return l, idx - 2**l


def sparse_idwt_rows(rows, bank: FilterBank, J: int, side: str = "primal"):
    """Selected rows of W^-1 as a sparse matrix, built from the column filters.

    Each row has O(J) nonzeros; the dense matrix is never formed.
    """
    n = 2**J
    rows = np.asarray(rows, dtype=int)
    filters = idwt_column_filters(bank, J, side)
    data, ri, ci = [], [], []
    for l in range(J + 1):
        off, taps = filters[l]
        if l == J:      # scaling column: single column, index 0
            shift_step, nshift, base_col = n, 1, 0
        else:
            shift_step, nshift, base_col = 2 ** (J - l), 2**l, 2**l if l else 1
        nz = np.nonzero(taps)[0]
        for r_pos, r in enumerate(rows):
            # need off + i + m*shift_step == r (mod n) with taps[i] != 0
            rem = (r - off) % shift_step
            i = nz[(nz - rem) % shift_step == 0]
            if i.size == 0:
                continue
            m = ((r - off - i) // shift_step) % nshift
            data.append(taps[i])
            ri.append(np.full(i.size, r_pos))
            ci.append(base_col + m if l < J else np.zeros(i.size, dtype=int))
    if not data:
        return scipy.sparse.csr_matrix((rows.size, n))
    mat = scipy.sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(ri), np.concatenate(ci))),
        shape=(rows.size, n),
    )
    return mat.tocsr()


def operator_norms(bank: FilterBank, J: int, iters: int = 200, seed: int = 0):
    """2-norms of W, W^-1, W~ and W~^-1 by power iteration on the fast paths."""
    rng = np.random.default_rng(seed)
    out = {}
    for name, side, inverse in (
        ("W", "primal", False), ("Winv", "primal", True),
        ("Wdual", "dual", False), ("Wdualinv", "dual", True),
    ):
        plan = TransformPlan(bank, J, side)
        fwd = idwt if inverse else dwt
        # adjoint of dwt(side) is idwt of the other side by W* = W~^{-1}
        other = TransformPlan(bank, J, "dual" if side == "primal" else "primal")
        adj = dwt if inverse else idwt
        v = rng.standard_normal(2**J)
        v /= np.linalg.norm(v)
        s = 0.0
        for _ in range(iters):
            u = adj(fwd(v, plan), other)
            s_new = np.linalg.norm(u)
            v = u / s_new
            if abs(s_new - s) < 1e-12 * s_new:
                s = s_new
                break
            s = s_new
        out[name] = float(np.sqrt(s))
    return out
