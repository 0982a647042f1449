"""Dense spectral computations on finite windows.

Eigenvalues and singular values come from LAPACK through :mod:`scipy.linalg`.
Pseudospectra pick the cheapest exact route per matrix: nearest-eigenvalue
distance for normal matrices, compiled Sturm bisection for bidiagonal ones,
and a dense SVD per node otherwise.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

from . import _kernels
from .dynsys import Periodic, SubshiftPoint
from .errors import ModeError, NumericalError, ResourceError
from .opfamily import BandFamily, BandWindow, window_matrix

MAX_DENSE = 4096
MAX_NODES = 10**6
RESIDUAL_TOL = 1e-10
DEFAULT_EPS = (1e-1, 10**-1.5, 1e-2)
DEFAULT_STEP = 0.02
DEFAULT_PAD = 0.5
DEFAULT_NTHETA = 256


def _as_matrix(M, limit: int | None = MAX_DENSE) -> np.ndarray:
    if isinstance(M, BandWindow):
        M = M.entries
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {M.shape}")
    if limit is not None and M.shape[0] > limit:
        raise ResourceError(f"dense size {M.shape[0]} exceeds {limit}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


@dataclass(frozen=True, eq=False)
class SpectrumSet:
    """Finite multiset of complex points, each tagged with where it came from."""

    points: np.ndarray
    sources: tuple = ()
    label: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        object.__setattr__(self, "points", pts)
        src = tuple(self.sources)
        if len(src) == 1 and pts.size != 1:
            src = src * pts.size
        if len(src) != pts.size:
            raise ValueError("need one source tag per point")
        object.__setattr__(self, "sources", src)

    def __len__(self):
        return self.points.size

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re", "im", "source"])
            for z, s in zip(self.points, self.sources):
                w.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", s])


def spectrum_union(sets) -> SpectrumSet:
    sets = list(sets)
    if not sets:
        raise ValueError("need at least one spectrum set")
    pts = np.concatenate([s.points for s in sets])
    src = tuple(t for s in sets for t in s.sources)
    return SpectrumSet(pts, src, " + ".join(s.label for s in sets if s.label))


# -- eigenvalues and singular values ------------------------------------------------

def _is_triangular(M):
    return not np.any(np.tril(M, -1)) or not np.any(np.triu(M, 1))


def eig_dense(M, source: str = "dense") -> SpectrumSet:
    """All ``m`` eigenvalues of ``M`` with a verified residual.

    Each returned eigenvalue ``lam`` comes with a unit vector ``v`` such that
    ``|M v - lam v| <= 1e-10 * max(1, |M|)``.  Triangular input returns its
    diagonal, whose entries are exact eigenvalues.
    """
    M = _as_matrix(M)
    if _is_triangular(M):
        return SpectrumSet(np.diag(M).copy(), (source,))
    try:
        w, V = sla.eig(M, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigenvalue iteration failed for size {M.shape[0]}: {exc}") from exc
    V = V / np.linalg.norm(V, axis=0)
    res = np.linalg.norm(M @ V - V * w, axis=0)
    scale = max(1.0, float(np.linalg.norm(M, 2)) if M.shape[0] <= 512 else float(np.linalg.norm(M, "fro")))
    worst = int(np.argmax(res))
    if res[worst] > RESIDUAL_TOL * scale:
        raise NumericalError(f"eigenpair residual {res[worst]:.3e} at lambda={w[worst]:.6g} "
                             f"exceeds {RESIDUAL_TOL:g} * {scale:.3g}")
    return SpectrumSet(w, (source,))


def sigma_min(M) -> float:
    """Smallest singular value of ``M``."""
    M = _as_matrix(M)
    try:
        return float(sla.svdvals(M, check_finite=False)[-1])
    except np.linalg.LinAlgError:
        return float(sla.svd(M, compute_uv=False, lapack_driver="gesvd", check_finite=False)[-1])


def match_multisets(a, b) -> float:
    """Largest distance under the optimal one-to-one matching of two equal-size multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError("multisets differ in size")
    if a.size == 0:
        return 0.0
    D = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(D)
    return float(D[r, c].max())


def hausdorff(S1, S2) -> float:
    """Hausdorff distance between two nonempty finite subsets of the plane."""
    a = _points(S1)
    b = _points(S2)
    if a.size == 0 or b.size == 0:
        raise ValueError("Hausdorff distance needs nonempty sets")
    A = np.column_stack([a.real, a.imag])
    B = np.column_stack([b.real, b.imag])
    d_ab = cKDTree(B).query(A)[0].max()
    d_ba = cKDTree(A).query(B)[0].max()
    return float(max(d_ab, d_ba))


def _points(S):
    if isinstance(S, SpectrumSet):
        return S.points
    return np.asarray(list(S) if isinstance(S, (set, frozenset)) else S, dtype=complex).ravel()


# -- pseudospectra ---------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Nodes ``re_lo + k*step`` and ``im_lo + k*step`` up to the upper bounds."""

    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float
    step: float = DEFAULT_STEP

    def __post_init__(self):
        if not (self.step > 0 and self.re_hi >= self.re_lo and self.im_hi >= self.im_lo):
            raise ValueError("grid needs step > 0 and lo <= hi")

    @classmethod
    def around_disc(cls, radius: float, step: float = DEFAULT_STEP, pad: float = DEFAULT_PAD) -> "GridSpec":
        r = radius + pad
        return cls(-r, r, -r, r, step)

    def _axis(self, lo, hi):
        count = int(np.floor((hi - lo) / self.step + 1e-9)) + 1
        return lo + self.step * np.arange(count)

    @property
    def re_nodes(self) -> np.ndarray:
        return self._axis(self.re_lo, self.re_hi)

    @property
    def im_nodes(self) -> np.ndarray:
        return self._axis(self.im_lo, self.im_hi)

    @property
    def shape(self) -> tuple[int, int]:
        return self.im_nodes.size, self.re_nodes.size

    def nodes(self) -> np.ndarray:
        """Complex nodes, shape ``(n_im, n_re)``."""
        return self.re_nodes[None, :] + 1j * self.im_nodes[:, None]

    def to_dict(self) -> dict:
        return {"re": [self.re_lo, self.re_hi], "im": [self.im_lo, self.im_hi], "step": self.step}


@dataclass(frozen=True, eq=False)
class PseudospecGrid:
    grid: GridSpec
    sigma: np.ndarray
    eps: tuple = DEFAULT_EPS
    method: str = field(default="", compare=False)

    def indicator(self, eps: float) -> np.ndarray:
        return self.sigma <= eps

    def points(self, eps: float) -> np.ndarray:
        return self.grid.nodes()[self.indicator(eps)]

    def indicators(self) -> dict:
        return {e: self.indicator(e) for e in self.eps}

    def header(self) -> dict:
        return {"rectangle": self.grid.to_dict(), "step": self.grid.step, "eps": list(self.eps),
                "shape": list(self.sigma.shape), "method": self.method}

    def to_csv(self, path, header_path=None):
        Z = self.grid.nodes()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z_re", "z_im", "sigma_min"])
            for z, s in zip(Z.ravel(), self.sigma.ravel()):
                w.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", f"{s:.17g}"])
        if header_path is not None:
            with open(header_path, "w") as fh:
                json.dump(self.header(), fh, indent=2, sort_keys=True)


def _bidiagonal_parts(M):
    """``(diag, offdiag)`` if ``M`` is lower or upper bidiagonal, else ``None``."""
    n = M.shape[0]
    if n == 1:
        return np.diag(M).copy(), np.zeros(0, dtype=complex)
    sub, sup = np.diag(M, -1), np.diag(M, 1)
    rest = M.copy()
    idx = np.arange(n)
    rest[idx, idx] = 0
    rest[idx[1:], idx[:-1]] = 0
    rest[idx[:-1], idx[1:]] = 0
    if np.any(rest):
        return None
    if not np.any(sup):
        return np.diag(M).copy(), sub.copy()
    if not np.any(sub):
        return np.diag(M).copy(), sup.copy()
    return None


def _is_normal(M, rtol=1e-12):
    if np.array_equal(M, M.conj().T):
        return True
    scale = np.linalg.norm(M, "fro") ** 2
    C = M @ M.conj().T - M.conj().T @ M
    return float(np.linalg.norm(C, "fro")) <= rtol * max(scale, 1.0)


def sigma_min_grid(M, zs) -> tuple[np.ndarray, str]:
    """``sigma_min(M - z)`` for an array of nodes; returns values and the route taken.

    Only the dense routes are subject to the dense size limit.
    """
    M = _as_matrix(M, limit=None)
    zs = np.asarray(zs, dtype=complex)
    flat = zs.ravel()
    parts = _bidiagonal_parts(M)
    if parts is not None:
        _kernels.configure_threads()
        out = _kernels.bidiag_sigma_min_grid(parts[0], parts[1], flat)
        method = "bidiagonal-bisection"
    elif M.shape[0] > MAX_DENSE:
        raise ResourceError(f"dense size {M.shape[0]} exceeds {MAX_DENSE}")
    elif _is_normal(M):
        lam = sla.eigvalsh(M) + 0j if np.array_equal(M, M.conj().T) else sla.eigvals(M)
        tree = cKDTree(np.column_stack([lam.real, lam.imag]))
        out = tree.query(np.column_stack([flat.real, flat.imag]))[0]
        method = "normal-eigendistance"
    else:
        T, _ = sla.schur(M, output="complex")
        eye = np.eye(M.shape[0])
        out = np.array([sla.svdvals(T - z * eye, check_finite=False)[-1] for z in flat])
        method = "dense-svd"
    return np.asarray(out, dtype=float).reshape(zs.shape), method


def pseudospectrum(M, grid: GridSpec, eps=DEFAULT_EPS) -> PseudospecGrid:
    """Sample ``sigma_min(M - z)`` at every grid node."""
    n_im, n_re = grid.shape
    if n_im * n_re > MAX_NODES:
        raise ResourceError(f"grid has {n_im * n_re} nodes, limit is {MAX_NODES}")
    sigma, method = sigma_min_grid(M, grid.nodes())
    return PseudospecGrid(grid, sigma, tuple(sorted(eps, reverse=True)), method)


def section_pseudospectrum(F: BandFamily, x, N: int, grid: GridSpec | None = None, eps=DEFAULT_EPS,
                           mode: str = "zero") -> PseudospecGrid:
    """Pseudospectrum of a finite section, on the Wiener-disc grid unless one is given."""
    if grid is None:
        grid = GridSpec.around_disc(F.bound())
    W = window_matrix(F, x, N, mode=mode)
    return pseudospectrum(W, grid, eps)


# -- Floquet-Bloch -------------------------------------------------------------------

def floquet_blocks(F: BandFamily, x: SubshiftPoint, q: int | None = None) -> dict:
    """Coefficients ``C_m`` with ``A_q(theta) = sum_m C_m exp(i m theta)``.

    ``A_q(theta)[i, j] = sum_m A(x)[i, j + m q] exp(i m theta)`` for
    ``0 <= i, j < q``.
    """
    F.check_point(x)
    if not (isinstance(x, SubshiftPoint) and isinstance(x.rule, Periodic)):
        raise ModeError("Floquet-Bloch reduction needs a periodic subshift point")
    q = x.rule.period if q is None else q
    if q < 1 or q % x.rule.period:
        raise ModeError(f"period {x.rule.period} does not divide q={q}")
    blocks = {}
    for rule in F.rules:
        d = rule.diagonal
        vals = F.diagonal_values(x, d, 0, q - 1)
        for i in range(q):
            col = i - d
            j = col % q
            m = (col - j) // q
            C = blocks.setdefault(m, np.zeros((q, q), dtype=complex))
            C[i, j] += vals[i]
    return blocks


def floquet_spectrum(F: BandFamily, x: SubshiftPoint, n_theta: int = DEFAULT_NTHETA,
                     q: int | None = None) -> SpectrumSet:
    """Union over ``theta_k = 2 pi k / n_theta`` of the eigenvalues of the symbol ``A_q(theta_k)``."""
    if n_theta < 8:
        raise ValueError("n_theta must be at least 8")
    blocks = floquet_blocks(F, x, q)
    q = next(iter(blocks.values())).shape[0] if blocks else (x.rule.period if q is None else q)
    tag = f"floquet(q={q},n_theta={n_theta})"
    pts = []
    for k in range(n_theta):
        theta = 2 * np.pi * k / n_theta
        A = np.zeros((q, q), dtype=complex)
        for m, C in blocks.items():
            A += C * np.exp(1j * m * theta)
        pts.append(eig_dense(A).points)
    return SpectrumSet(np.concatenate(pts), (tag,), label=F.name)


def section_spectrum(F: BandFamily, x, N: int, mode: str = "zero") -> SpectrumSet:
    W = window_matrix(F, x, N, mode=mode)
    return eig_dense(W, source=f"finite-section(N={N},mode={mode})")
