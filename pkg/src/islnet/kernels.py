"""Hot numeric kernels, each in a jitted loop form and a vectorized numpy form.

The two forms perform the same floating-point operations in the same order
(squared distances as ``dx*dx + dy*dy + dz*dz``, relaxations as
``dist[u] + w``), so they return bit-identical results. Which one the rest of
the package calls is decided by :data:`islnet._accel.USE_NUMBA`.
"""
import heapq

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, try_njit

__all__ = [
    "cutoff_pairs",
    "nearest_hop_pairs",
    "sssp",
    "cutoff_pairs_numpy",
    "nearest_hop_pairs_numpy",
    "sssp_numpy",
]


# --------------------------------------------------------------------------
# cutoff topology: all pairs within d_max
# --------------------------------------------------------------------------

def _cutoff_pairs_loop(pos, d_max):
    n = pos.shape[0]
    cap = n * (n - 1) // 2
    ii = np.empty(cap, dtype=np.int64)
    jj = np.empty(cap, dtype=np.int64)
    ww = np.empty(cap, dtype=np.float64)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            dz = pos[i, 2] - pos[j, 2]
            d = np.sqrt(dx * dx + dy * dy + dz * dz)
            if d <= d_max:
                ii[k] = i
                jj[k] = j
                ww[k] = d
                k += 1
    return ii[:k], jj[:k], ww[:k]


def _sq_dist_matrix(a, b):
    dx = a[:, None, 0] - b[None, :, 0]
    dy = a[:, None, 1] - b[None, :, 1]
    dz = a[:, None, 2] - b[None, :, 2]
    return dx * dx + dy * dy + dz * dz


def cutoff_pairs_numpy(pos, d_max):
    """Pairs ``i < j`` with Euclidean distance ``<= d_max``, lexicographic order."""
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    d = np.sqrt(_sq_dist_matrix(pos, pos))
    ii, jj = np.nonzero(np.triu(d <= d_max, k=1))
    return ii.astype(np.int64), jj.astype(np.int64), d[ii, jj]


# --------------------------------------------------------------------------
# nearest-hop topology: candidate lists + closed diameter-ball blocking
# --------------------------------------------------------------------------

def _nearest_hop_loop(pos, n_cand):
    n = pos.shape[0]
    adm_i = np.empty(n * n_cand, dtype=np.int64)
    adm_p = np.empty(n * n_cand, dtype=np.int64)
    rej = np.empty((n * n_cand, 3), dtype=np.int64)
    na = 0
    nr = 0
    d2 = np.empty(n, dtype=np.float64)
    cand = np.empty(n_cand, dtype=np.int64)
    for i in range(n):
        # bounded insertion keeps the n_cand nearest in (distance, index) order,
        # the same prefix a stable argsort would give
        m = 0
        for j in range(n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            dz = pos[i, 2] - pos[j, 2]
            dj = dx * dx + dy * dy + dz * dz
            d2[j] = dj
            if j == i or (m == n_cand and dj >= d2[cand[m - 1]]):
                continue
            k = m if m < n_cand else n_cand - 1
            while k > 0 and d2[cand[k - 1]] > dj:
                cand[k] = cand[k - 1]
                k -= 1
            cand[k] = j
            if m < n_cand:
                m += 1
        d2[i] = np.inf
        for a in range(n_cand):
            p = cand[a]
            dip = d2[p]
            blocker = -1
            for b in range(n_cand):
                x = cand[b]
                if x == p:
                    continue
                dx = pos[x, 0] - pos[p, 0]
                dy = pos[x, 1] - pos[p, 1]
                dz = pos[x, 2] - pos[p, 2]
                if d2[x] + (dx * dx + dy * dy + dz * dz) <= dip:
                    blocker = x
                    break
            if blocker < 0:
                adm_i[na] = i
                adm_p[na] = p
                na += 1
            else:
                rej[nr, 0] = i
                rej[nr, 1] = p
                rej[nr, 2] = blocker
                nr += 1
    return adm_i[:na], adm_p[:na], rej[:nr]


def nearest_hop_pairs_numpy(pos, n_cand, chunk=64):
    """Directed admissions ``(i, p)`` and rejections ``(i, p, blocker)``.

    Each satellite examines its ``n_cand`` nearest neighbours (distance ties
    broken by index); candidate ``p`` is rejected when another candidate ``x``
    of ``i`` satisfies ``|ix|^2 + |xp|^2 <= |ip|^2``. The reported blocker is
    the nearest such ``x``.
    """
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    n = pos.shape[0]
    adm_i, adm_p, rejected = [], [], []
    eye = np.eye(n_cand, dtype=bool)
    for start in range(0, n, chunk):
        rows = np.arange(start, min(start + chunk, n))
        d2 = _sq_dist_matrix(pos[rows], pos)
        d2[np.arange(rows.size), rows] = np.inf
        cand = np.argsort(d2, axis=1, kind="stable")[:, :n_cand]
        a = np.take_along_axis(d2, cand, axis=1)  # |i x| ** 2, shape (r, n_cand)
        cp = pos[cand]
        dx = cp[:, :, None, 0] - cp[:, None, :, 0]
        dy = cp[:, :, None, 1] - cp[:, None, :, 1]
        dz = cp[:, :, None, 2] - cp[:, None, :, 2]
        # axis 1 indexes p, axis 2 indexes the would-be blocker x
        through = a[:, None, :] + (dx * dx + dy * dy + dz * dz)
        blocked = (through <= a[:, :, None]) & ~eye
        hit = blocked.any(axis=2)
        first = blocked.argmax(axis=2)
        r, c = np.nonzero(~hit)
        adm_i.append(rows[r])
        adm_p.append(cand[r, c])
        r, c = np.nonzero(hit)
        rejected.append(np.column_stack([rows[r], cand[r, c], cand[r, first[r, c]]]))
    if not adm_i:
        return np.empty(0, np.int64), np.empty(0, np.int64), np.empty((0, 3), np.int64)
    return (
        np.concatenate(adm_i).astype(np.int64),
        np.concatenate(adm_p).astype(np.int64),
        np.concatenate(rejected).astype(np.int64).reshape(-1, 3),
    )


# --------------------------------------------------------------------------
# single-source shortest distances on a CSR adjacency
# --------------------------------------------------------------------------

def _sssp_heap(indptr, indices, weights, src):
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    done = np.zeros(n, dtype=np.bool_)
    dist[src] = 0.0
    heap = [(0.0, src)]
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def sssp_numpy(indptr, indices, weights, src):
    """Shortest distances from ``src``; ``inf`` weights act as removed arcs."""
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    dist[src] = 0.0
    open_ = np.full(n, np.inf)
    open_[src] = 0.0
    for _ in range(n):
        u = int(np.argmin(open_))
        if open_[u] == np.inf:
            break
        open_[u] = np.inf  # settled; positive weights never improve it again
        lo, hi = indptr[u], indptr[u + 1]
        nb = indices[lo:hi]
        nd = dist[u] + weights[lo:hi]
        better = nd < dist[nb]
        if better.any():
            nb, nd = nb[better], nd[better]
            dist[nb] = nd
            open_[nb] = nd
    return dist


if HAVE_NUMBA:
    cutoff_pairs_jit = try_njit(cache=True)(_cutoff_pairs_loop)
    nearest_hop_pairs_jit = try_njit(cache=True)(_nearest_hop_loop)
    sssp_jit = try_njit(cache=True)(_sssp_heap)
else:  # pragma: no cover
    cutoff_pairs_jit = nearest_hop_pairs_jit = sssp_jit = None


if USE_NUMBA:
    def cutoff_pairs(pos, d_max):
        return cutoff_pairs_jit(np.ascontiguousarray(pos, dtype=np.float64), float(d_max))

    def nearest_hop_pairs(pos, n_cand):
        return nearest_hop_pairs_jit(np.ascontiguousarray(pos, dtype=np.float64), int(n_cand))

    def sssp(indptr, indices, weights, src):
        return sssp_jit(indptr, indices, weights, np.int64(src))
else:
    cutoff_pairs = cutoff_pairs_numpy
    nearest_hop_pairs = nearest_hop_pairs_numpy
    sssp = sssp_numpy
