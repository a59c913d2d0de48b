"""Coadjoint-orbit bookkeeping for the positive semidefinite part of sp(2m).

The isotropy algebra of a normal form splits along its pieces: each group of
k equal frequencies contributes u(k) (written SO(2) when k = 1), and the
nilpotent part with q blocks and r = m - p - q free pairs contributes

    (so(q) + sp(2r)) x| (symm(q) + P_{q,r})

which specializes to sp(2r) x| heis_r when q = 1.  Every descriptor is checked
against the dimension of {S symmetric : [JS, JG] = 0} computed numerically.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from galilax.errors import InvalidInputError
from galilax.normal_form import InvariantSignature, normal_form_matrix
from galilax.reduction import symplectic_form

FREQ_RTOL = 1e-9


def group_dim(name: str, k: int, k2: int = 0) -> int:
    """Dimension of the named factor (P takes the pair a, b)."""
    dims = {
        "SO": k * (k - 1) // 2,
        "U": k * k,
        "Sp": k * (2 * k + 1),     # Sp(2k)
        "symm": k * (k + 1) // 2,
        "Heis": 2 * k + 1,
        "R": k,
        "T": k,
        "P": 2 * k * k2,
    }
    return dims[name]


@dataclass(frozen=True)
class OrbitDescriptor:
    signature: InvariantSignature
    m: int
    dimension: int
    isotropy_dim: int
    isotropy_name: str
    multiplicities: tuple
    numeric_isotropy_dim: int = field(compare=False, default=-1)

    @property
    def closed(self) -> bool:
        return self.signature.q == 0

    @property
    def motion_dim(self) -> int:
        return self.signature.motion_rank

    @property
    def generic(self) -> bool:
        return self.dimension == 2 * self.m * self.m


def frequency_multiplicities(omega_sq, rtol=FREQ_RTOL) -> tuple:
    """Sizes of the groups of equal spectral invariants, in descending order of value."""
    om = sorted(omega_sq, reverse=True)
    groups = []
    for w in om:
        if groups and abs(w - groups[-1][0]) <= rtol * max(abs(w), abs(groups[-1][0])):
            groups[-1][1] += 1
        else:
            groups.append([w, 1])
    return tuple(k for _, k in groups)


def _nilpotent_factor(q, r):
    """Name and dimension of the isotropy factor of 1/2 sum_{j<=q} y_j^2 on R^{2(q+r)}."""
    dim = q * q + group_dim("Sp", r) + 2 * q * r
    if q == 0:
        return (f"Sp({2 * r})" if r else ""), dim
    if q == 1:
        return (f"Sp({2 * r}) ⋉ Heis_{r}" if r else "ℝ"), dim
    if r == 0:
        return f"SO({q}) ⋉ symm({q})", dim
    return f"(SO({q}) × Sp({2 * r})) ⋉ (symm({q}) × P_{{{q},{r}}})", dim


def isotropy(sig: InvariantSignature, m: int, multiplicities=None):
    """(name, dimension) of the identity component of the isotropy group."""
    if multiplicities is None:
        multiplicities = frequency_multiplicities(sig.omega_sq)
    if sum(multiplicities) != sig.p:
        raise InvalidInputError(f"multiplicities {multiplicities} do not add up to p = {sig.p}")
    parts, dim = [], 0
    for k in multiplicities:
        parts.append("SO(2)" if k == 1 else f"U({k})")
        dim += k * k
    r = m - sig.p - sig.q
    nil, nd = _nilpotent_factor(sig.q, r)
    dim += nd
    if nil:
        parts.append(nil)
    return (" × ".join(parts) if parts else "{e}"), dim


def isotropy_dim_numeric(G, tol=1e-9) -> int:
    """dim {S symmetric : [J S, J G] = 0}, by rank of the linear map on a basis."""
    G = np.asarray(G.G if hasattr(G, "G") else G, dtype=float)
    n = G.shape[0]
    J = symplectic_form(n // 2)
    K = J @ G
    cols = []
    for i in range(n):
        for j in range(i, n):
            S = np.zeros((n, n))
            S[i, j] = S[j, i] = 1.0
            A = J @ S
            cols.append((A @ K - K @ A).ravel())
    M = np.array(cols).T
    s = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(s > tol * max(s.max(initial=0.0), 1e-300)))
    return M.shape[1] - rank


def _plant(sig, m, multiplicities):
    """Normal form with frequency groups realized by distinct well-separated values."""
    om = []
    for g, k in enumerate(multiplicities):
        om += [1.0 + g] * k
    return normal_form_matrix(InvariantSignature(sig.p, sig.q, tuple(om), m), m)


def orbit_dimension(sig: InvariantSignature, m: int, multiplicities=None,
                    check: bool = True) -> OrbitDescriptor:
    if sig.p + sig.q > m:
        raise InvalidInputError(f"p + q = {sig.p + sig.q} exceeds m = {m}")
    if multiplicities is None:
        multiplicities = frequency_multiplicities(sig.omega_sq)
    multiplicities = tuple(int(k) for k in multiplicities)
    name, idim = isotropy(sig, m, multiplicities)
    numeric = -1
    if check:
        numeric = isotropy_dim_numeric(_plant(sig, m, multiplicities))
        if numeric != idim:
            name, idim = "unclassified", numeric
    return OrbitDescriptor(sig, m, m * (2 * m + 1) - idim, idim, name, multiplicities, numeric)


def closure_strata(sig: InvariantSignature) -> list:
    """The q+1 orbits in the closure, q' = q down to 0, same spectral invariants."""
    return [InvariantSignature(sig.p, qq, sig.omega_sq, sig.m) for qq in range(sig.q, -1, -1)]


@dataclass(frozen=True)
class SpatialReductionReport:
    n: int
    reduced_dim: int
    planar_codim: int      # l + 1 = 2(n - 2)
    smooth_factor_dim: int  # s = 4n - 6
    cone_link: str         # "RP^l"
    link_dim: int          # l = 2n - 5
    zero_momentum_strata: tuple
    so3_cover: str

    @property
    def ell(self) -> int:
        return self.link_dim


def spatial_reduction_report(n: int) -> SpatialReductionReport:
    n = int(n)
    if n < 3:
        raise InvalidInputError("the spatial reduction report needs n >= 3")
    ell = 2 * n - 5
    zero = (
        (0, "0"),
        (1, "1/2 y1^2"),
        (2, "1/2 (y1^2 + y2^2)"),
        (3, "1/2 (y1^2 + y2^2 + y3^2)"),
    )
    return SpatialReductionReport(
        n=n, reduced_dim=6 * n - 10, planar_codim=2 * (n - 2), smooth_factor_dim=4 * n - 6,
        cone_link=f"RP^{ell}", link_dim=ell, zero_momentum_strata=zero,
        so3_cover="SO(3) reduced space: smooth 2:1 branched cover branched over the planar locus",
    )


# -- catalog tables --------------------------------------------------------

# (p label, signature, multiplicities)
_TABLE_ROWS = {
    3: [
        ("2 (nondeg.)", InvariantSignature(2, 0, (2.0, 1.0), 2), (1, 1)),
        ("2 (deg.)", InvariantSignature(2, 0, (1.0, 1.0), 2), (2,)),
        ("1", InvariantSignature(1, 1, (1.0,), 2), (1,)),
        ("1", InvariantSignature(1, 0, (1.0,), 2), (1,)),
        ("0", InvariantSignature(0, 2, (), 2), ()),
        ("0", InvariantSignature(0, 1, (), 2), ()),
    ],
    4: [
        ("1", InvariantSignature(1, 1, (1.0,), 3), (1,)),
        ("1", InvariantSignature(1, 0, (1.0,), 3), (1,)),
        ("0", InvariantSignature(0, 3, (), 3), ()),
        ("0", InvariantSignature(0, 2, (), 3), ()),
        ("0", InvariantSignature(0, 1, (), 3), ()),
    ],
}

TABLE_VERSION = 1


@dataclass(frozen=True)
class TableRow:
    p_label: str
    p: int
    q: int
    isotropy_name: str
    dimension: int
    d: int
    isotropy_dim: int


def table_rows(n: int) -> list:
    if n not in _TABLE_ROWS:
        raise InvalidInputError(f"tables are available for n = 3 and n = 4, not {n}")
    m = n - 1
    rows = []
    for label, sig, mult in _TABLE_ROWS[n]:
        od = orbit_dimension(sig, m, mult)
        rows.append(TableRow(label, sig.p, sig.q, od.isotropy_name, od.dimension,
                             sig.motion_rank, od.isotropy_dim))
    return rows


def emit_tables() -> dict:
    return {n: table_rows(n) for n in (3, 4)}


def format_table(n: int) -> str:
    rows = table_rows(n)
    head = ["p", "q", "(G_lambda)^0", "dim O_lambda", "d"]
    body = [[r.p_label, str(r.q), r.isotropy_name, str(r.dimension), str(r.d)] for r in rows]
    w = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(head)]
    fmt = lambda cells: " | ".join(c.ljust(w[i]) for i, c in enumerate(cells)).rstrip()  # noqa: E731
    lines = [f"# galilax orbit table v{TABLE_VERSION}: n = {n}, sp({2 * (n - 1)}), "
             f"generic orbit dimension {2 * (n - 1) ** 2}",
             fmt(head), "-+-".join("-" * x for x in w)]
    lines += [fmt(b) for b in body]
    return "\n".join(lines) + "\n"
