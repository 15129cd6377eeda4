"""Exact integer linear algebra and cellular (co)homology.

Everything here runs on plain Python integers (arbitrary precision); no
modular shortcuts, so unimodular witnesses stay valid for the lattice
membership tests built on top.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DimensionMismatch


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    n, m = len(A), len(B[0]) if B else 0
    k = len(B)
    C = [[0] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        Ci = C[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(m):
                    Ci[j] += a * Bt[j]
    return C


def mat_vec(A, v):
    if A and len(A[0]) != len(v):
        raise DimensionMismatch("matrix is %dx%d, vector has length %d" % (len(A), len(A[0]), len(v)))
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def mat_transpose(A):
    if not A:
        return []
    return [list(col) for col in zip(*A)]


def mat_pow(A, k):
    n = len(A)
    R = _identity(n)
    P = [row[:] for row in A]
    while k:
        if k & 1:
            R = mat_mul(R, P)
        k >>= 1
        if k:
            P = mat_mul(P, P)
    return R


@dataclass
class SNFResult:
    """U * M * V = S with U, V unimodular and S diagonal with s1 | s2 | ..."""

    U: list[list[int]]
    S: list[list[int]]
    V: list[list[int]]

    def diagonal(self) -> list[int]:
        return [self.S[i][i] for i in range(min(len(self.S), len(self.S[0]) if self.S else 0))]

    def rank(self) -> int:
        return sum(1 for s in self.diagonal() if s != 0)


def smith_normal_form(M: list[list[int]]) -> SNFResult:
    """Smith normal form with both transformation matrices.

    Pivoting picks the minimal nonzero |entry| in the working block, which
    keeps coefficient growth tame on the sparse boundary matrices produced
    by the complex builder.
    """
    m = len(M)
    n = len(M[0]) if m else 0
    S = [row[:] for row in M]
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, f):
        # row dst += f * row src
        S[dst] = [a + f * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a + f * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, f):
        for row in S:
            row[dst] += f * row[src]
        for row in V:
            row[dst] += f * row[src]

    def negate_row(i):
        S[i] = [-a for a in S[i]]
        U[i] = [-a for a in U[i]]

    t = 0
    while t < min(m, n):
        # locate minimal-absolute-value nonzero pivot in the trailing block
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                a = S[i][j]
                if a != 0 and (best is None or abs(a) < best):
                    best = abs(a)
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])

        # clear row and column t; restart if a reduction creates a smaller entry
        while True:
            dirty = False
            for i in range(t + 1, m):
                if S[i][t]:
                    q = S[i][t] // S[t][t]
                    add_row(t, i, -q)
                    if S[i][t]:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, n):
                if S[t][j]:
                    q = S[t][j] // S[t][t]
                    add_col(t, j, -q)
                    if S[t][j]:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                break
        if S[t][t] < 0:
            negate_row(t)
        t += 1

    # enforce the divisibility chain s1 | s2 | ... on the nonzero diagonal
    r = t
    changed = True
    while changed:
        changed = False
        for i in range(r - 1):
            a, b = S[i][i], S[i + 1][i + 1]
            if a == 0 or b % a == 0:
                continue
            changed = True
            # fold b below a, then Euclid on rows restores a diagonal
            # 2x2 block diag(gcd, lcm)
            add_col(i + 1, i, 1)
            while S[i + 1][i]:
                q = S[i][i] // S[i + 1][i]
                add_row(i + 1, i, -q)
                swap_rows(i, i + 1)
            if S[i][i] < 0:
                negate_row(i)
            # gcd divides b, so the stray entry clears exactly
            add_col(i, i + 1, -(S[i][i + 1] // S[i][i]))
            if S[i + 1][i + 1] < 0:
                negate_row(i + 1)
    return SNFResult(U, S, V)


def kernel_basis(M: list[list[int]]) -> list[list[int]]:
    """Integer basis of ker M (a saturated sublattice, via SNF columns)."""
    m = len(M)
    n = len(M[0]) if m else 0
    if n == 0:
        return []
    if m == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    snf = smith_normal_form(M)
    r = snf.rank()
    return [[snf.V[i][j] for i in range(n)] for j in range(r, n)]


def invariant_factors(M: list[list[int]]) -> list[int]:
    snf = smith_normal_form(M)
    return [s for s in snf.diagonal() if s != 0]


def hermite_row_basis(rows: list[list[int]]) -> list[list[int]]:
    """Hermite-form basis (row style) of the Z-span of the given rows.

    Pivots are positive, entries above each pivot are reduced into
    ``[0, pivot)``, so equal lattices get identical bases.
    """
    if not rows:
        return []
    n = len(rows[0])
    work = [row[:] for row in rows if any(row)]
    basis: list[list[int]] = []
    for col in range(n):
        if not work:
            break
        live = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0]
        if not live:
            continue
        # Euclid in this column: reduce everything modulo the smallest entry
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            head = live[0]
            survivors = [head]
            for r in live[1:]:
                q = r[col] // head[col]
                reduced = [a - q * b for a, b in zip(r, head)]
                if reduced[col] != 0:
                    survivors.append(reduced)
                elif any(reduced):
                    rest.append(reduced)
            if len(survivors) == 1:
                live = survivors
                break
            live = survivors
        head = live[0]
        if head[col] < 0:
            head = [-a for a in head]
        basis.append(head)
        work = rest

    # reduce entries above each pivot into [0, pivot)
    for i in range(len(basis) - 1, -1, -1):
        p = next(j for j, a in enumerate(basis[i]) if a != 0)
        for k in range(i):
            q = basis[k][p] // basis[i][p]
            if q:
                basis[k] = [a - q * b for a, b in zip(basis[k], basis[i])]
    return basis


def in_row_span(basis: list[list[int]], target: list[int]) -> list[int] | None:
    """Integer coefficients expressing target over a Hermite row basis, or None."""
    rem = list(target)
    coeffs = []
    for row in basis:
        p = next(j for j, a in enumerate(row) if a != 0)
        if rem[p] % row[p] != 0:
            return None
        q = rem[p] // row[p]
        coeffs.append(q)
        rem = [a - q * b for a, b in zip(rem, row)]
    if any(rem):
        return None
    return coeffs


@dataclass(frozen=True)
class FGAbelianGroup:
    """Finitely generated abelian group in invariant-factor form."""

    rank: int
    torsion: tuple[int, ...]

    def __post_init__(self):
        if any(t < 2 for t in self.torsion):
            raise ValueError("torsion coefficients must be >= 2")

    def __str__(self) -> str:
        parts = []
        if self.rank:
            parts.append("Z^%d" % self.rank if self.rank > 1 else "Z")
        parts.extend("Z/%d" % t for t in self.torsion)
        return " + ".join(parts) if parts else "0"


def _group_from_maps(n_cells: int, d_in: list[list[int]] | None, d_out: list[list[int]] | None) -> FGAbelianGroup:
    """ker(d_out) / im(d_in) inside a free module of rank n_cells."""
    rank_out = smith_normal_form(d_out).rank() if d_out else 0
    if d_in:
        factors = invariant_factors(d_in)
        rank_in = len(factors)
        torsion = tuple(t for t in factors if t > 1)
    else:
        rank_in, torsion = 0, ()
    return FGAbelianGroup(n_cells - rank_out - rank_in, torsion)


def homology_group(complex_, i: int) -> FGAbelianGroup:
    """H_i = ker d_i / im d_{i+1} of a cell complex."""
    if not 0 <= i <= complex_.dimension:
        raise DimensionMismatch("degree %d out of range 0..%d" % (i, complex_.dimension))
    n = len(complex_.cells[i])
    d_i = complex_.boundary_matrix(i) if i >= 1 else None
    d_up = complex_.boundary_matrix(i + 1) if i < complex_.dimension else None
    return _group_from_maps(n, d_up, d_i)


def cohomology_group(complex_, i: int) -> FGAbelianGroup:
    """H^i via the transposed boundary maps (dual presentation)."""
    if not 0 <= i <= complex_.dimension:
        raise DimensionMismatch("degree %d out of range 0..%d" % (i, complex_.dimension))
    n = len(complex_.cells[i])
    delta_i = mat_transpose(complex_.boundary_matrix(i + 1)) if i < complex_.dimension else None
    delta_down = mat_transpose(complex_.boundary_matrix(i)) if i >= 1 else None
    return _group_from_maps(n, delta_down, delta_i)


def cycle_space_basis(complex_) -> list[list[int]]:
    """Integer basis of the top cycle space ker d_d."""
    d = complex_.dimension
    n = len(complex_.cells[d])
    bd = complex_.boundary_matrix(d)
    if not bd or not bd[0]:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    return kernel_basis(bd)
