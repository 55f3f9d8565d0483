"""Bounded integer search over unit-coefficient equality rows.

Variables take integer values in [lo, hi]; every row asks that the sum of
its variables equals a right-hand side. Optional pairs (u, v) demand
x_v <= x_u. The search propagates row bounds to a fixpoint, branches on
one variable at a time (values high to low) and records complete
assignments.

All search state lives in numpy arrays owned by :class:`Search`, so a run
can stop on a node limit or a full solution buffer and later resume from
exactly the same point.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ctl slots
_PHASE, _DEPTH, _NODES, _NSOL, _TRAIL, _NFRONT, _RQN, _PQN = range(8)
# phases
_START, _PROPAGATE, _BACKTRACK, _DONE, _SELECT = 0, 1, 2, 3, 4

DONE, PAUSED_BUFFER, PAUSED_NODES = 0, 1, 2


@njit(cache=True)
def _set(v, nl, nh, lo, hi, sumlo, sumhi, var_ptr, var_row, rq, inq,
         vp_ptr, vp, pq, pinq, tr_v, tr_lo, tr_hi, ctl):
    if nl > nh:
        return False
    t = ctl[_TRAIL]
    tr_v[t] = v
    tr_lo[t] = lo[v]
    tr_hi[t] = hi[v]
    ctl[_TRAIL] = t + 1
    dl = nl - lo[v]
    dh = nh - hi[v]
    for k in range(var_ptr[v], var_ptr[v + 1]):
        r = var_row[k]
        sumlo[r] += dl
        sumhi[r] += dh
        if not inq[r]:
            inq[r] = True
            rq[ctl[_RQN]] = r
            ctl[_RQN] += 1
    for k in range(vp_ptr[v], vp_ptr[v + 1]):
        p = vp[k]
        if not pinq[p]:
            pinq[p] = True
            pq[ctl[_PQN]] = p
            ctl[_PQN] += 1
    lo[v] = nl
    hi[v] = nh
    return True


@njit(cache=True)
def _clear(rq, inq, pq, pinq, ctl):
    for i in range(ctl[_RQN]):
        inq[rq[i]] = False
    for i in range(ctl[_PQN]):
        pinq[pq[i]] = False
    ctl[_RQN] = 0
    ctl[_PQN] = 0


@njit(cache=True)
def _propagate(row_ptr, row_var, var_ptr, var_row, rhs, pbig, psmall, vp_ptr, vp,
               lo, hi, sumlo, sumhi, rq, inq, pq, pinq, tr_v, tr_lo, tr_hi, ctl):
    while ctl[_RQN] > 0 or ctl[_PQN] > 0:
        if ctl[_PQN] > 0:
            ctl[_PQN] -= 1
            p = pq[ctl[_PQN]]
            pinq[p] = False
            b = pbig[p]
            s = psmall[p]
            if hi[s] > hi[b]:
                if not _set(s, lo[s], hi[b], lo, hi, sumlo, sumhi, var_ptr, var_row, rq, inq,
                            vp_ptr, vp, pq, pinq, tr_v, tr_lo, tr_hi, ctl):
                    _clear(rq, inq, pq, pinq, ctl)
                    return False
            if lo[b] < lo[s]:
                if not _set(b, lo[s], hi[b], lo, hi, sumlo, sumhi, var_ptr, var_row, rq, inq,
                            vp_ptr, vp, pq, pinq, tr_v, tr_lo, tr_hi, ctl):
                    _clear(rq, inq, pq, pinq, ctl)
                    return False
            continue
        ctl[_RQN] -= 1
        r = rq[ctl[_RQN]]
        inq[r] = False
        if sumlo[r] > rhs[r] or sumhi[r] < rhs[r]:
            _clear(rq, inq, pq, pinq, ctl)
            return False
        for k in range(row_ptr[r], row_ptr[r + 1]):
            v = row_var[k]
            if lo[v] == hi[v]:
                continue
            mx = lo[v] + rhs[r] - sumlo[r]
            mn = hi[v] - (sumhi[r] - rhs[r])
            nl = lo[v] if lo[v] >= mn else mn
            nh = hi[v] if hi[v] <= mx else mx
            if nl != lo[v] or nh != hi[v]:
                if not _set(v, nl, nh, lo, hi, sumlo, sumhi, var_ptr, var_row, rq, inq,
                            vp_ptr, vp, pq, pinq, tr_v, tr_lo, tr_hi, ctl):
                    _clear(rq, inq, pq, pinq, ctl)
                    return False
    return True


@njit(cache=True)
def _undo(mark, lo, hi, sumlo, sumhi, var_ptr, var_row, tr_v, tr_lo, tr_hi, ctl):
    for i in range(ctl[_TRAIL] - 1, mark - 1, -1):
        v = tr_v[i]
        dl = tr_lo[i] - lo[v]
        dh = tr_hi[i] - hi[v]
        for k in range(var_ptr[v], var_ptr[v + 1]):
            r = var_row[k]
            sumlo[r] += dl
            sumhi[r] += dh
        lo[v] = tr_lo[i]
        hi[v] = tr_hi[i]
    ctl[_TRAIL] = mark


@njit(cache=True)
def _lex_ok(lo, hi, order, sym_src, sym_comp, cval):
    """False if some symmetry maps the fixed prefix to a lex-smaller one.

    ``sym_src[h, i]`` is the variable whose value lands on variable ``i``
    under symmetry ``h``; with ``sym_comp[h]`` the value v becomes
    ``cval[i] - v``. Comparison runs along ``order`` and stops at the first
    position where either side is still open.
    """
    H = sym_src.shape[0]
    for h in range(H):
        comp = sym_comp[h]
        for k in range(order.shape[0]):
            i = order[k]
            if lo[i] != hi[i]:
                break
            j = sym_src[h, i]
            if lo[j] != hi[j]:
                break
            b = cval[i] - lo[j] if comp else lo[j]
            a = lo[i]
            if a < b:
                break
            if a > b:
                return False
    return True


@njit(cache=True)
def _select(lo, hi, order, mode):
    best = -1
    best_size = 1 << 30
    for k in range(order.shape[0]):
        v = order[k]
        size = hi[v] - lo[v]
        if size == 0:
            continue
        if mode == 0:
            return v
        if size < best_size:
            best = v
            best_size = size
            if size == 1:
                break
    return best


@njit(cache=True)
def _run(row_ptr, row_var, var_ptr, var_row, rhs, pbig, psmall, vp_ptr, vp,
         lo, hi, sumlo, sumhi, rq, inq, pq, pinq, tr_v, tr_lo, tr_hi,
         bv, bval, blo, bmark, order, mode, max_depth, sols, fr_lo, fr_hi, ctl, node_limit,
         sym_src, sym_comp, cval):
    R = rhs.shape[0]
    P = pbig.shape[0]
    while True:
        phase = ctl[_PHASE]
        if phase == _DONE:
            return 0
        if ctl[_NODES] >= node_limit:
            return 2
        if phase == _START:
            for r in range(R):
                if not inq[r]:
                    inq[r] = True
                    rq[ctl[_RQN]] = r
                    ctl[_RQN] += 1
            for p in range(P):
                if not pinq[p]:
                    pinq[p] = True
                    pq[ctl[_PQN]] = p
                    ctl[_PQN] += 1
            if _propagate(row_ptr, row_var, var_ptr, var_row, rhs, pbig, psmall, vp_ptr, vp,
                          lo, hi, sumlo, sumhi, rq, inq, pq, pinq, tr_v, tr_lo, tr_hi, ctl) \
                    and _lex_ok(lo, hi, order, sym_src, sym_comp, cval):
                ctl[_PHASE] = _SELECT
            else:
                ctl[_PHASE] = _DONE
                return 0
        elif phase == _PROPAGATE:
            if _propagate(row_ptr, row_var, var_ptr, var_row, rhs, pbig, psmall, vp_ptr, vp,
                          lo, hi, sumlo, sumhi, rq, inq, pq, pinq, tr_v, tr_lo, tr_hi, ctl) \
                    and _lex_ok(lo, hi, order, sym_src, sym_comp, cval):
                ctl[_PHASE] = _SELECT
            else:
                ctl[_PHASE] = _BACKTRACK
        elif phase == _SELECT:
            v = _select(lo, hi, order, mode)
            if v < 0:
                i = ctl[_NSOL]
                sols[i, :] = lo
                ctl[_NSOL] = i + 1
                ctl[_PHASE] = _BACKTRACK
                if i + 1 >= sols.shape[0]:
                    return 1
            elif max_depth >= 0 and ctl[_DEPTH] >= max_depth:
                i = ctl[_NFRONT]
                fr_lo[i, :] = lo
                fr_hi[i, :] = hi
                ctl[_NFRONT] = i + 1
                ctl[_PHASE] = _BACKTRACK
                if i + 1 >= fr_lo.shape[0]:
                    return 1
            else:
                d = ctl[_DEPTH]
                bv[d] = v
                blo[d] = lo[v]
                bval[d] = hi[v]
                bmark[d] = ctl[_TRAIL]
                ctl[_DEPTH] = d + 1
                _set(v, hi[v], hi[v], lo, hi, sumlo, sumhi, var_ptr, var_row, rq, inq,
                     vp_ptr, vp, pq, pinq, tr_v, tr_lo, tr_hi, ctl)
                ctl[_NODES] += 1
                ctl[_PHASE] = _PROPAGATE
        else:  # backtrack
            d = ctl[_DEPTH]
            if d == 0:
                ctl[_PHASE] = _DONE
                return 0
            d -= 1
            _undo(bmark[d], lo, hi, sumlo, sumhi, var_ptr, var_row, tr_v, tr_lo, tr_hi, ctl)
            val = bval[d] - 1
            if val < blo[d]:
                ctl[_DEPTH] = d
                continue
            bval[d] = val
            v = bv[d]
            _set(v, val, val, lo, hi, sumlo, sumhi, var_ptr, var_row, rq, inq,
                 vp_ptr, vp, pq, pinq, tr_v, tr_lo, tr_hi, ctl)
            ctl[_NODES] += 1
            ctl[_PHASE] = _PROPAGATE


def _csr(lists, width):
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    for i, l in enumerate(lists):
        ptr[i + 1] = ptr[i] + len(l)
    flat = np.zeros(ptr[-1], dtype=np.int64)
    for i, l in enumerate(lists):
        flat[ptr[i]:ptr[i + 1]] = l
    # transpose
    owners = [[] for _ in range(width)]
    for i, l in enumerate(lists):
        for v in l:
            owners[int(v)].append(i)
    tptr = np.zeros(width + 1, dtype=np.int64)
    for v, o in enumerate(owners):
        tptr[v + 1] = tptr[v] + len(o)
    tflat = np.zeros(tptr[-1], dtype=np.int64)
    for v, o in enumerate(owners):
        tflat[tptr[v]:tptr[v + 1]] = o
    return ptr, flat, tptr, tflat


class Search:
    """A resumable depth-first search over one bounded equality system.

    Parameters
    ----------
    rows : list of int arrays
        Variable indices of each equality row.
    rhs : int array
        Required sum of each row.
    lo, hi : int arrays
        Initial variable bounds.
    pairs : list of (u, v), optional
        Dominance constraints x_v <= x_u.
    order : int array, optional
        Variable priority; defaults to ascending index.
    first_fail : bool
        Branch on the smallest domain (ties by ``order``) instead of the
        first unfixed variable in ``order``.
    max_depth : int
        If >= 0, nodes at this depth are emitted as frontier subproblems
        instead of being explored.
    symmetries : (int array (H, V), bool array (H,)), optional
        Variable maps of the problem's symmetry group (any subset is
        sound): only assignments that are lex-minimal along ``order``
        among their images are kept. See ``_lex_ok``.
    complement : int array, optional
        ``cval`` used by complementing symmetries.
    """

    def __init__(self, rows, rhs, lo, hi, pairs=(), order=None, first_fail=True,
                 max_depth=-1, buffer=4096, symmetries=None, complement=None):
        lo = np.array(lo, dtype=np.int64)
        hi = np.array(hi, dtype=np.int64)
        V = lo.size
        self.V = V
        self.row_ptr, self.row_var, self.var_ptr, self.var_row = _csr([np.asarray(r) for r in rows], V)
        self.rhs = np.array(rhs, dtype=np.int64)
        pairs = list(pairs)
        self.pbig = np.array([u for u, _ in pairs], dtype=np.int64)
        self.psmall = np.array([v for _, v in pairs], dtype=np.int64)
        plists = [[] for _ in range(V)]
        for p, (u, v) in enumerate(pairs):
            plists[u].append(p)
            plists[v].append(p)
        self.vp_ptr = np.zeros(V + 1, dtype=np.int64)
        for v in range(V):
            self.vp_ptr[v + 1] = self.vp_ptr[v] + len(plists[v])
        self.vp = np.array([p for l in plists for p in l], dtype=np.int64)
        self.lo, self.hi = lo, hi
        R = self.rhs.size
        self.sumlo = np.zeros(R, dtype=np.int64)
        self.sumhi = np.zeros(R, dtype=np.int64)
        for r in range(R):
            vs = self.row_var[self.row_ptr[r]:self.row_ptr[r + 1]]
            self.sumlo[r] = lo[vs].sum()
            self.sumhi[r] = hi[vs].sum()
        self.rq = np.zeros(R + 1, dtype=np.int64)
        self.inq = np.zeros(R + 1, dtype=np.bool_)
        self.pq = np.zeros(len(pairs) + 1, dtype=np.int64)
        self.pinq = np.zeros(len(pairs) + 1, dtype=np.bool_)
        cap = int((hi - lo).clip(min=0).sum()) + V + 2
        self.tr_v = np.zeros(cap, dtype=np.int64)
        self.tr_lo = np.zeros(cap, dtype=np.int64)
        self.tr_hi = np.zeros(cap, dtype=np.int64)
        self.bv = np.zeros(V + 1, dtype=np.int64)
        self.bval = np.zeros(V + 1, dtype=np.int64)
        self.blo = np.zeros(V + 1, dtype=np.int64)
        self.bmark = np.zeros(V + 1, dtype=np.int64)
        self.order = np.arange(V, dtype=np.int64) if order is None else np.array(order, dtype=np.int64)
        self.mode = 1 if first_fail else 0
        self.max_depth = int(max_depth)
        self.sols = np.zeros((buffer, V), dtype=np.int64)
        fcap = buffer if max_depth >= 0 else 1
        self.fr_lo = np.zeros((fcap, V), dtype=np.int64)
        self.fr_hi = np.zeros((fcap, V), dtype=np.int64)
        if symmetries is None:
            self.sym_src = np.zeros((0, V), dtype=np.int64)
            self.sym_comp = np.zeros(0, dtype=np.bool_)
        else:
            self.sym_src = np.ascontiguousarray(symmetries[0], dtype=np.int64)
            self.sym_comp = np.ascontiguousarray(symmetries[1], dtype=np.bool_)
        self.cval = np.zeros(V, dtype=np.int64) if complement is None else np.array(complement, dtype=np.int64)
        self.ctl = np.zeros(8, dtype=np.int64)
        if (lo > hi).any():
            self.ctl[_PHASE] = _DONE

    @property
    def nodes(self) -> int:
        return int(self.ctl[_NODES])

    @property
    def done(self) -> bool:
        return self.ctl[_PHASE] == _DONE

    def step(self, node_limit: int):
        """Advance until done, buffer full or ``node_limit`` more nodes.

        Returns (status, solutions, frontier) where solutions and frontier
        are the items produced by this call.
        """
        limit = self.ctl[_NODES] + node_limit
        status = _run(self.row_ptr, self.row_var, self.var_ptr, self.var_row, self.rhs,
                      self.pbig, self.psmall, self.vp_ptr, self.vp,
                      self.lo, self.hi, self.sumlo, self.sumhi, self.rq, self.inq, self.pq, self.pinq,
                      self.tr_v, self.tr_lo, self.tr_hi, self.bv, self.bval, self.blo, self.bmark,
                      self.order, self.mode, self.max_depth, self.sols, self.fr_lo, self.fr_hi,
                      self.ctl, limit, self.sym_src, self.sym_comp, self.cval)
        k = int(self.ctl[_NSOL])
        sols = self.sols[:k].copy()
        self.ctl[_NSOL] = 0
        f = int(self.ctl[_NFRONT])
        front = (self.fr_lo[:f].copy(), self.fr_hi[:f].copy())
        self.ctl[_NFRONT] = 0
        return int(status), sols, front

    def run(self, node_limit: int = 1 << 62):
        """Iterate over all solutions (and frontier nodes) until done or out of nodes."""
        remaining = node_limit
        while not self.done and remaining > 0:
            before = self.nodes
            status, sols, front = self.step(min(remaining, 1 << 20))
            remaining -= self.nodes - before
            yield status, sols, front
