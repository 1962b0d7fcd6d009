"""Cubical persistent homology of sublevel filtrations on voxel grids.

The complex uses the vertex construction: voxels are vertices carrying the
filtration value (here, the signed distance transform), and every grid
edge/square/cube is present with value equal to the max over its vertices.
A volume of shape (nx, ny, nz) therefore has (2nx-1)(2ny-1)(2nz-1) cells,
laid out on a half-integer grid where the parity of each coordinate says
whether the cell spans that axis.

Persistence is computed over the field of two elements by boundary-matrix
reduction with the twist/clearing optimization: dimension-3 columns are
reduced first, their pivots clear dimension-2 columns, and dimension-0
pairs come from a union-find pass over the edges.  Representative cycles
are read from reduced destroyer columns on demand.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

INF = math.inf


class PersistenceError(Exception):
    """Raised for invalid persistence queries (e.g. cycles of essential pairs)."""


@dataclass(frozen=True)
class Cell:
    """A cell of the cubical grid.

    ``anchor`` is the lowest vertex coordinate, ``extent`` has a 1 flag for
    every axis the cell spans: () extent -> vertex, one axis -> edge, two
    -> square, three -> cube.
    """

    anchor: tuple
    extent: tuple

    @property
    def dim(self):
        return sum(self.extent)


@dataclass(frozen=True)
class Pair:
    """A birth-death pair with its creator and destroyer cells."""

    dim: int
    birth: float
    death: float
    birth_cell: Cell
    death_cell: Cell | None

    @property
    def essential(self):
        return math.isinf(self.death)

    @property
    def persistence(self):
        return self.death - self.birth


@dataclass
class PersistenceDiagram:
    """Birth-death pairs of one sample, partitioned by dimension 0..2.

    Zero-persistence pairs are dropped; essential classes are kept with
    death = inf.
    """

    sample_id: int | str
    pairs: list

    def in_dim(self, k):
        return [p for p in self.pairs if p.dim == k]

    def finite_in_dim(self, k):
        return [p for p in self.pairs if p.dim == k and not p.essential]


@dataclass
class FilteredComplex:
    """Sorted cubical filtration of a scalar volume.

    Cells are addressed by their flat position on the doubled grid; rank is
    the position in the total order (value, dim, flat position).
    """

    shape: tuple
    gshape: tuple
    values: np.ndarray = field(repr=False)  # flat, per cell
    dims: np.ndarray = field(repr=False)  # flat, per cell
    order: np.ndarray = field(repr=False)  # rank -> pos
    rank: np.ndarray = field(repr=False)  # pos -> rank

    @property
    def cell_count(self):
        return self.values.size

    def cell_from_pos(self, pos):
        gx, gy, gz = self.gshape
        a, rem = divmod(int(pos), gy * gz)
        b, c = divmod(rem, gz)
        return Cell(anchor=(a // 2, b // 2, c // 2), extent=(a % 2, b % 2, c % 2))

    def pos_from_cell(self, cell):
        gx, gy, gz = self.gshape
        a = 2 * cell.anchor[0] + cell.extent[0]
        b = 2 * cell.anchor[1] + cell.extent[1]
        c = 2 * cell.anchor[2] + cell.extent[2]
        if not (0 <= a < gx and 0 <= b < gy and 0 <= c < gz):
            raise PersistenceError(f"cell {cell} outside grid {self.gshape}")
        return (a * gy + b) * gz + c

    def cell_value(self, cell):
        return int(self.values[self.pos_from_cell(cell)])


def _expand_max(arr, axis):
    """Interleave an axis with pairwise maxima: n values -> 2n-1 cells."""
    n = arr.shape[axis]
    shape = list(arr.shape)
    shape[axis] = 2 * n - 1
    out = np.empty(shape, dtype=arr.dtype)
    even = [slice(None)] * 3
    odd = [slice(None)] * 3
    even[axis] = slice(0, None, 2)
    out[tuple(even)] = arr
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[axis] = slice(0, n - 1)
    hi[axis] = slice(1, n)
    odd[axis] = slice(1, None, 2)
    out[tuple(odd)] = np.maximum(arr[tuple(lo)], arr[tuple(hi)])
    return out


def build_filtration(sv):
    """Build the sorted sublevel cubical filtration of a scalar volume."""
    sv = np.asarray(sv)
    if sv.ndim != 3 or sv.size == 0:
        raise ValueError("scalar volume must be a nonempty 3D array")
    vals = sv.astype(np.int32)
    for axis in range(3):
        vals = _expand_max(vals, axis)
    gx, gy, gz = vals.shape
    par = [(np.arange(g) % 2).astype(np.int8) for g in (gx, gy, gz)]
    dims = (
        par[0][:, None, None] + par[1][None, :, None] + par[2][None, None, :]
    ).astype(np.int8)
    vflat = vals.reshape(-1)
    dflat = dims.reshape(-1)
    order = np.lexsort((dflat, vflat)).astype(np.int64)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size, dtype=np.int64)
    return FilteredComplex(
        shape=tuple((g + 1) // 2 for g in vals.shape),
        gshape=vals.shape,
        values=vflat,
        dims=dflat,
        order=order,
        rank=rank,
    )


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True, inline="always")
def _heap_push(heap, n, v):
    if n >= heap.shape[0]:
        bigger = np.empty(heap.shape[0] * 2, np.int64)
        bigger[:n] = heap[:n]
        heap = bigger
    heap[n] = v
    i = n
    n += 1
    while i > 0:
        p = (i - 1) >> 1
        if heap[p] < heap[i]:
            heap[p], heap[i] = heap[i], heap[p]
            i = p
        else:
            break
    return heap, n


@njit(cache=True, inline="always")
def _heap_pop(heap, n):
    v = heap[0]
    n -= 1
    heap[0] = heap[n]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= n:
            break
        r = l + 1
        big = l
        if r < n and heap[r] > heap[l]:
            big = r
        if heap[big] > heap[i]:
            heap[big], heap[i] = heap[i], heap[big]
            i = big
        else:
            break
    return v, n


@njit(cache=True)
def _reduce_columns(col_ranks, order, rank, gy, gz, owner, stop_rank):
    """Left-to-right mod-2 reduction of one dimension's boundary columns.

    ``col_ranks`` are the global ranks of the columns in ascending order;
    columns whose rank is already claimed in ``owner`` are skipped
    (clearing).  ``owner`` maps a pivot rank to the local id of the stored
    reduced column that owns it, and is updated in place.  If ``stop_rank``
    is nonnegative, reduction stops after that column.

    Returns (birth_ranks, death_ranks, column_starts, column_buffer): pair i
    pairs birth_ranks[i] with death_ranks[i], and its reduced column (pivot
    first, then the rest in descending rank) occupies
    column_buffer[column_starts[i]:column_starts[i+1]].
    """
    syz = gy * gz
    ncols = col_ranks.shape[0]
    heap = np.empty(64, np.int64)
    colbuf = np.empty(1024, np.int64)
    buflen = 0
    starts = np.empty(ncols + 1, np.int64)
    starts[0] = 0
    births = np.empty(ncols, np.int64)
    deaths = np.empty(ncols, np.int64)
    npairs = 0
    for jj in range(ncols):
        r = col_ranks[jj]
        if stop_rank >= 0 and r > stop_rank:
            break
        if owner[r] != -1:  # cleared: this cell is a pivot of the next dim up
            continue
        p = order[r]
        a = p // syz
        rem = p % syz
        b = rem // gz
        c = rem % gz
        hn = 0
        if a & 1:
            heap, hn = _heap_push(heap, hn, rank[p - syz])
            heap, hn = _heap_push(heap, hn, rank[p + syz])
        if b & 1:
            heap, hn = _heap_push(heap, hn, rank[p - gz])
            heap, hn = _heap_push(heap, hn, rank[p + gz])
        if c & 1:
            heap, hn = _heap_push(heap, hn, rank[p - 1])
            heap, hn = _heap_push(heap, hn, rank[p + 1])
        while True:
            # pop the pivot, cancelling duplicate entries mod 2
            piv = np.int64(-1)
            while hn > 0:
                v, hn = _heap_pop(heap, hn)
                cnt = 1
                while hn > 0 and heap[0] == v:
                    _, hn = _heap_pop(heap, hn)
                    cnt += 1
                if cnt & 1:
                    piv = v
                    break
            if piv == -1:
                break  # column reduced to zero: creator cell
            o = owner[piv]
            if o == -1:
                owner[piv] = npairs
                births[npairs] = piv
                deaths[npairs] = r
                # drain the heap into storage, pivot first
                if buflen + hn + 1 > colbuf.shape[0]:
                    newcap = colbuf.shape[0] * 2
                    while newcap < buflen + hn + 1:
                        newcap *= 2
                    bigger = np.empty(newcap, np.int64)
                    bigger[:buflen] = colbuf[:buflen]
                    colbuf = bigger
                colbuf[buflen] = piv
                buflen += 1
                while hn > 0:
                    v, hn = _heap_pop(heap, hn)
                    cnt = 1
                    while hn > 0 and heap[0] == v:
                        _, hn = _heap_pop(heap, hn)
                        cnt += 1
                    if cnt & 1:
                        colbuf[buflen] = v
                        buflen += 1
                npairs += 1
                starts[npairs] = buflen
                break
            else:
                # add the owning column (skip its pivot, which cancels)
                s = starts[o]
                e = starts[o + 1]
                for t in range(s + 1, e):
                    heap, hn = _heap_push(heap, hn, colbuf[t])
    return births[:npairs], deaths[:npairs], starts[: npairs + 1], colbuf[:buflen]


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def _union_find_pairs(edge_ranks, order, rank, gx, gy, gz):
    """Dimension-0 pairing: merge vertex components over edges in order.

    When an edge merges two components the younger component's creating
    vertex dies (elder rule), matching standard column reduction.  Returns
    (birth_ranks, death_ranks) over vertex/edge ranks.
    """
    nx = (gx + 1) // 2
    ny = (gy + 1) // 2
    nz = (gz + 1) // 2
    syz = gy * gz
    nvert = nx * ny * nz
    parent = np.arange(nvert)
    creator = np.empty(nvert, np.int64)  # rank of the root's creating vertex
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                pos = (2 * x * gy + 2 * y) * gz + 2 * z
                creator[(x * ny + y) * nz + z] = rank[pos]
    births = np.empty(edge_ranks.shape[0], np.int64)
    deaths = np.empty(edge_ranks.shape[0], np.int64)
    npairs = 0
    for jj in range(edge_ranks.shape[0]):
        r = edge_ranks[jj]
        p = order[r]
        a = p // syz
        rem = p % syz
        b = rem // gz
        c = rem % gz
        if a & 1:
            p0 = p - syz
            p1 = p + syz
        elif b & 1:
            p0 = p - gz
            p1 = p + gz
        else:
            p0 = p - 1
            p1 = p + 1
        a0 = p0 // syz
        rem0 = p0 % syz
        u = ((a0 // 2) * ny + (rem0 // gz) // 2) * nz + (rem0 % gz) // 2
        a1 = p1 // syz
        rem1 = p1 % syz
        v = ((a1 // 2) * ny + (rem1 // gz) // 2) * nz + (rem1 % gz) // 2
        ru = _find(parent, u)
        rv = _find(parent, v)
        if ru == rv:
            continue  # positive edge: creates a 1-cycle
        if creator[ru] < creator[rv]:
            elder, younger = ru, rv
        else:
            elder, younger = rv, ru
        births[npairs] = creator[younger]
        deaths[npairs] = r
        npairs += 1
        parent[younger] = elder
    return births[:npairs], deaths[:npairs]


# ---------------------------------------------------------------------------
# public API


def _dim_ranks(fc, d):
    dims_by_rank = fc.dims[fc.order]
    return np.nonzero(dims_by_rank == d)[0].astype(np.int64)


def _pairing(fc):
    """Raw pairing over all dimensions, including zero-persistence pairs.

    Returns a dict: dim k -> (birth_ranks, death_ranks), plus the essential
    dimension-0 vertex rank under key "essential0".
    """
    gx, gy, gz = fc.gshape
    owner = np.full(fc.cell_count, -1, dtype=np.int64)
    b3, d3, _, _ = _reduce_columns(
        _dim_ranks(fc, 3), fc.order, fc.rank, gy, gz, owner, np.int64(-1)
    )
    b2, d2, _, _ = _reduce_columns(
        _dim_ranks(fc, 2), fc.order, fc.rank, gy, gz, owner, np.int64(-1)
    )
    b0, d0 = _union_find_pairs(_dim_ranks(fc, 1), fc.order, fc.rank, gx, gy, gz)
    return {0: (b0, d0), 1: (b2, d2), 2: (b3, d3)}


def compute_persistence(fc, sample_id=0):
    """Persistence diagram of the sublevel filtration for k = 0, 1, 2.

    Zero-persistence pairs (birth value = death value) are dropped.  The
    single essential class is the dimension-0 component of the earliest
    vertex, reported with death = inf; the full grid is contractible, so no
    other essential class exists.
    """
    raw = _pairing(fc)
    pairs = []
    for k in (0, 1, 2):
        births, deaths = raw[k]
        bvals = fc.values[fc.order[births]]
        dvals = fc.values[fc.order[deaths]]
        keep = dvals > bvals
        for br, dr in zip(births[keep], deaths[keep]):
            pairs.append(
                Pair(
                    dim=k,
                    birth=float(fc.values[fc.order[br]]),
                    death=float(fc.values[fc.order[dr]]),
                    birth_cell=fc.cell_from_pos(fc.order[br]),
                    death_cell=fc.cell_from_pos(fc.order[dr]),
                )
            )
    first = fc.order[0]  # globally earliest cell is a vertex
    pairs.append(
        Pair(
            dim=0,
            birth=float(fc.values[first]),
            death=INF,
            birth_cell=fc.cell_from_pos(first),
            death_cell=None,
        )
    )
    pairs.sort(key=lambda p: (p.dim, p.birth, p.death, p.birth_cell.anchor))
    return PersistenceDiagram(sample_id=sample_id, pairs=pairs)


def betti_curve(pd, k, t):
    """Number of dimension-k classes alive at threshold t (birth <= t < death)."""
    if k not in (0, 1, 2):
        raise ValueError(f"dimension must be 0, 1 or 2, got {k}")
    return sum(1 for p in pd.in_dim(k) if p.birth <= t < p.death)


def representative_cycle(fc, pair):
    """Cells of the dying cycle, from the reduced column of the death cell.

    The returned chain is a mod-2 cycle of dimension pair.dim whose latest
    cell enters the filtration at the pair's birth value.  Only finite
    pairs are supported.
    """
    if pair.death_cell is None or math.isinf(pair.death):
        raise PersistenceError("essential pairs have no destroyer column")
    death_rank = np.int64(fc.rank[fc.pos_from_cell(pair.death_cell)])
    d = pair.dim + 1
    owner = np.full(fc.cell_count, -1, dtype=np.int64)
    _, deaths, starts, colbuf = _reduce_columns(
        _dim_ranks(fc, d), fc.order, fc.rank, fc.gshape[1], fc.gshape[2], owner, death_rank
    )
    hits = np.nonzero(deaths == death_rank)[0]
    if hits.size != 1:
        raise PersistenceError(f"pair {pair} not found in the sample's reduction")
    i = int(hits[0])
    ranks = colbuf[starts[i] : starts[i + 1]]
    return [fc.cell_from_pos(fc.order[r]) for r in ranks]


# ---------------------------------------------------------------------------
# diagram files

DIAGRAM_HEADER = "dim,birth,death,bx,by,bz,bex,bey,bez,dx,dy,dz,dex,dey,dez"


def _fmt_value(v):
    if math.isinf(v):
        return "inf"
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def write_diagram_csv(path, pd):
    """Write a diagram as CSV; essential rows use "inf" and empty cell fields."""
    lines = [DIAGRAM_HEADER]
    for p in pd.pairs:
        bc = p.birth_cell
        row = [str(p.dim), _fmt_value(p.birth), _fmt_value(p.death)]
        row += [str(v) for v in bc.anchor] + [str(v) for v in bc.extent]
        if p.death_cell is None:
            row += [""] * 6
        else:
            dc = p.death_cell
            row += [str(v) for v in dc.anchor] + [str(v) for v in dc.extent]
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_diagram_csv(path, sample_id=0):
    pairs = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != DIAGRAM_HEADER:
            raise ValueError(f"{path}: unexpected diagram header {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            dim = int(parts[0])
            birth = float(parts[1])
            death = INF if parts[2] == "inf" else float(parts[2])
            bc = Cell(
                anchor=tuple(int(v) for v in parts[3:6]),
                extent=tuple(int(v) for v in parts[6:9]),
            )
            if parts[9] == "":
                dc = None
            else:
                dc = Cell(
                    anchor=tuple(int(v) for v in parts[9:12]),
                    extent=tuple(int(v) for v in parts[12:15]),
                )
            pairs.append(Pair(dim=dim, birth=birth, death=death, birth_cell=bc, death_cell=dc))
    return PersistenceDiagram(sample_id=sample_id, pairs=pairs)
