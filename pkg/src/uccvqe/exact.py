"""Exact diagonalisation in the active space (CASCI-equivalent).

Determinants are pairs of alpha/beta occupation bitmasks. Vectors in a
sector are stored as ``(n_alpha_strings, n_beta_strings)`` arrays. Signs
follow the ordering "all alpha creators ascending, then all beta
creators ascending"; :func:`sector_to_statevector` converts to the
interleaved Jordan-Wigner qubit ordering.

Two independent Hamiltonian routes exist: :class:`SectorHamiltonian`
(matrix-free, built from spin-summed one-body excitation tables) for
Krylov solves and :func:`slater_condon_matrix` (explicit spin-orbital
Slater-Condon rules) for dense solves.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from uccvqe.integrals import ActiveSpaceProblem

log = logging.getLogger(__name__)

BASIS_CAP = 10_000_000
DENSE_LIMIT = 2000


class BasisTooLargeError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _popcount(a):
    return np.bitwise_count(a)


@lru_cache(maxsize=64)
def string_masks(n_orb: int, n_elec: int) -> np.ndarray:
    masks = np.array(
        sorted(sum(1 << i for i in c) for c in itertools.combinations(range(n_orb), n_elec)),
        dtype=np.int64,
    )
    masks.setflags(write=False)
    return masks


class StringTables:
    """Occupation strings of one spin and their one-body excitation maps.

    ``excitation(p, q)`` gives ``(src, dst, sign)`` with
    ``a+_p a_q |src> = sign |dst>`` (string indices).
    """

    def __init__(self, n_orb: int, n_elec: int):
        self.n_orb, self.n_elec = n_orb, n_elec
        self.masks = string_masks(n_orb, n_elec)
        self.lookup = {int(m): i for i, m in enumerate(self.masks)}
        self._index = np.full(1 << n_orb, -1, dtype=np.int64)
        self._index[self.masks] = np.arange(len(self.masks))
        self._cache: dict = {}

    def __len__(self):
        return len(self.masks)

    def index_of(self, masks: np.ndarray) -> np.ndarray:
        return self._index[masks]

    def occupations(self) -> np.ndarray:
        return ((self.masks[:, None] >> np.arange(self.n_orb)) & 1).astype(float)

    def excitation(self, p: int, q: int):
        key = (p, q)
        if key in self._cache:
            return self._cache[key]
        s = self.masks
        has_q = (s >> q) & 1 == 1
        if p == q:
            src = np.flatnonzero(has_q)
            out = (src, src, np.ones(len(src)))
        else:
            ok = has_q & ((s >> p) & 1 == 0)
            src = np.flatnonzero(ok)
            m = s[src]
            below_q = (1 << q) - 1
            below_p = (1 << p) - 1
            removed = m ^ (1 << q)
            parity = _popcount(m & below_q) + _popcount(removed & below_p)
            sign = 1.0 - 2.0 * (parity & 1)
            dst = self._index[removed | (1 << p)]
            out = (src, dst, sign)
        self._cache[key] = out
        return out


@lru_cache(maxsize=32)
def string_tables(n_orb: int, n_elec: int) -> StringTables:
    return StringTables(n_orb, n_elec)


@dataclass(frozen=True)
class DeterminantBasis:
    n_orb: int
    n_alpha: int
    n_beta: int

    @property
    def alpha(self) -> StringTables:
        return string_tables(self.n_orb, self.n_alpha)

    @property
    def beta(self) -> StringTables:
        return string_tables(self.n_orb, self.n_beta)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.alpha), len(self.beta)

    def __len__(self):
        return len(self.alpha) * len(self.beta)

    def determinants(self) -> list[tuple[int, int]]:
        """(alpha mask, beta mask) in storage order."""
        return [(int(a), int(b)) for a in self.alpha.masks for b in self.beta.masks]


def build_basis(n_orb: int, n_alpha: int, n_beta: int, cap: int = BASIS_CAP) -> DeterminantBasis:
    if not (0 <= n_alpha <= n_orb and 0 <= n_beta <= n_orb):
        raise ValueError("electron counts out of range")
    size = comb(n_orb, n_alpha) * comb(n_orb, n_beta)
    if size > cap:
        raise BasisTooLargeError(f"{size} determinants exceed the cap of {cap}")
    return DeterminantBasis(n_orb, n_alpha, n_beta)


def reference_sector_vector(basis: DeterminantBasis, dtype=float) -> np.ndarray:
    """Lowest orbitals filled in each spin."""
    v = np.zeros(basis.shape, dtype=dtype)
    v[0, 0] = 1.0
    return v


class SectorHamiltonian:
    """Matrix-free H on one (n_alpha, n_beta) sector, e_core included.

    sigma = sum_pq k_pq E_pq psi + 1/2 sum_pqrs (pq|rs) E_pq (E_rs psi),
    k_pq = h_pq - 1/2 sum_r (pr|rq).
    """

    def __init__(self, problem: ActiveSpaceProblem, basis: DeterminantBasis):
        ints = problem.active_integrals
        self.basis = basis
        self.e_core = ints.e_core
        m = ints.n_orb
        self.n_orb = m
        self.h = ints.h_one
        self.eri = ints.eri
        self.k = ints.h_one - 0.5 * np.einsum("prrq->pq", ints.eri)
        self.g = 0.5 * ints.eri.reshape(m * m, m * m)
        self.pairs = [(p, q) for p in range(m) for q in range(m)]
        self._diag = None

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _one_body(self, psi: np.ndarray, p: int, q: int, out: np.ndarray):
        """out += E_pq applied to psi (alpha and beta parts)."""
        src, dst, sg = self.basis.alpha.excitation(p, q)
        if len(src):
            out[dst, :] += sg[:, None] * psi[src, :]
        src, dst, sg = self.basis.beta.excitation(p, q)
        if len(src):
            out[:, dst] += psi[:, src] * sg[None, :]

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        psi = psi.reshape(self.basis.shape)
        m = self.n_orb
        if m == 0:
            return self.e_core * psi
        d = np.zeros((m * m,) + psi.shape, dtype=psi.dtype)
        for idx, (p, q) in enumerate(self.pairs):
            self._one_body(psi, p, q, d[idx])
        w = (self.g @ d.reshape(m * m, -1)).reshape(d.shape)
        w += self.k.reshape(-1)[:, None, None] * psi[None]
        sigma = self.e_core * psi
        for idx, (p, q) in enumerate(self.pairs):
            self._one_body(w[idx], p, q, sigma)
        return sigma

    def diagonal(self) -> np.ndarray:
        if self._diag is None:
            na = self.basis.alpha.occupations()
            nb = self.basis.beta.occupations()
            h = np.diag(self.h)
            j = np.einsum("ppqq->pq", self.eri)
            kx = np.einsum("pqqp->pq", self.eri)
            n = na[:, None, :] + nb[None, :, :]
            e1 = n @ h
            e2 = 0.5 * np.einsum("abp,pq,abq->ab", n, j, n)
            ex_a = 0.5 * np.einsum("ap,pq,aq->a", na, kx, na)
            ex_b = 0.5 * np.einsum("bp,pq,bq->b", nb, kx, nb)
            self._diag = self.e_core + e1 + e2 - ex_a[:, None] - ex_b[None, :]
        return self._diag

    def to_dense(self) -> np.ndarray:
        dim = self.dim
        out = np.empty((dim, dim))
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = 1.0
            out[:, i] = self.matvec(e).reshape(-1)
        return out


# --- Slater-Condon ------------------------------------------------------------

def _apply_ops(mask: int, ops) -> tuple[int, int]:
    """Apply ladder operators right-to-left; ops = [(orbital, is_creator), ...]."""
    sign = 1
    for orb, create in reversed(ops):
        occ = mask >> orb & 1
        if occ == create:
            return 0, 0
        if bin(mask & ((1 << orb) - 1)).count("1") % 2:
            sign = -sign
        mask ^= 1 << orb
    return sign, mask


def slater_condon_matrix(problem: ActiveSpaceProblem, basis: DeterminantBasis) -> np.ndarray:
    """Dense H in the determinant basis from Slater-Condon rules (e_core included).

    Spin orbitals are numbered alpha 0..M-1, beta M..2M-1.
    """
    ints = problem.active_integrals
    m = ints.n_orb
    h, g = ints.h_one, ints.eri

    def h_so(p, q):
        return h[p % m, q % m] if p // m == q // m else 0.0

    def v_so(p, q, r, s):  # <pq|rs> = (pr|qs)
        if p // m != r // m or q // m != s // m:
            return 0.0
        return g[p % m, r % m, q % m, s % m]

    def anti(p, q, r, s):
        return v_so(p, q, r, s) - v_so(p, q, s, r)

    dets = [a | (b << m) for a, b in basis.determinants()]
    masks = np.array(dets, dtype=np.int64)
    dim = len(dets)
    out = np.zeros((dim, dim))
    level = _popcount(masks[:, None] ^ masks[None, :]) // 2
    for i, j in zip(*np.nonzero(level <= 2)):
        if j < i:
            continue
        di, dj = dets[i], dets[j]
        occ_j = [p for p in range(2 * m) if dj >> p & 1]
        if i == j:
            val = sum(h_so(p, p) for p in occ_j)
            val += 0.5 * sum(anti(p, q, p, q) for p in occ_j for q in occ_j)
            val += ints.e_core
        else:
            removed = [p for p in range(2 * m) if (dj & ~di) >> p & 1]
            added = [p for p in range(2 * m) if (di & ~dj) >> p & 1]
            if len(removed) == 1:
                (a,), (r,) = removed, added
                sign, res = _apply_ops(dj, [(r, 1), (a, 0)])
                assert res == di
                common = [p for p in occ_j if p != a]
                val = sign * (h_so(r, a) + sum(anti(r, n, a, n) for n in common))
            else:
                a, b = removed
                r, s = added
                sign, res = _apply_ops(dj, [(r, 1), (s, 1), (b, 0), (a, 0)])
                assert res == di
                val = sign * anti(r, s, a, b)
        out[i, j] = out[j, i] = val
    return out


# --- Davidson -----------------------------------------------------------------

def davidson(
    matvec,
    diag: np.ndarray,
    n_roots: int = 1,
    tol: float = 1e-9,
    max_iter: int = 500,
    max_space: int = 40,
):
    """Lowest eigenpairs of a real symmetric operator.

    Start space: the normalised uniform vector plus unit vectors on the
    lowest diagonal entries. Two-pass Gram-Schmidt against the whole space;
    when the space is full it collapses onto the lowest few Ritz vectors.
    """
    dim = len(diag)
    n_guess = min(dim, max(n_roots + 2, 2 * n_roots))
    start = [np.full(dim, 1.0 / np.sqrt(dim))]
    for i in np.argsort(diag, kind="stable")[:n_guess]:
        e = np.zeros(dim)
        e[i] = 1.0
        start.append(e)
    basis: list[np.ndarray] = []
    images: list[np.ndarray] = []

    def add(v):
        for _ in range(2):
            for b in basis:
                v = v - (b @ v) * b
        nrm = np.linalg.norm(v)
        if nrm < 1e-10:
            return False
        v = v / nrm
        basis.append(v)
        images.append(matvec(v))
        return True

    for v in start:
        add(v)
    residual = np.inf
    n_keep = max(2 * n_roots, 8)
    for it in range(max_iter):
        vmat = np.array(basis)
        imat = np.array(images)
        hsub = vmat @ imat.T
        hsub = 0.5 * (hsub + hsub.T)
        w_all, c_all = np.linalg.eigh(hsub)
        w, c = w_all[:n_roots], c_all[:, :n_roots]
        x = c.T @ vmat
        hx = c.T @ imat
        res = hx - w[:, None] * x
        norms = np.linalg.norm(res, axis=1)
        residual = float(norms.max())
        if residual < tol:
            return w, x
        if len(basis) + n_roots > max_space:
            # thick restart: keep the lowest Ritz vectors, rotate their images
            keep = c_all[:, :min(n_keep, len(basis) - n_roots)]
            basis[:] = list(keep.T @ vmat)
            images[:] = list(keep.T @ imat)
        added = False
        for k in range(n_roots):
            if norms[k] < tol:
                continue
            denom = w[k] - diag
            denom[np.abs(denom) < 1e-8] = 1e-8
            added |= add(res[k] / denom)
        if not added:
            for k in range(n_roots):
                added |= add(res[k])
        if not added:
            break
    raise ConvergenceError(
        f"Davidson did not converge (residual {residual:.3g})", residual=residual
    )


def _sector(problem: ActiveSpaceProblem, n_alpha=None, n_beta=None):
    na = problem.n_alpha if n_alpha is None else n_alpha
    nb = problem.n_beta if n_beta is None else n_beta
    return na, nb


def sector_spectrum(
    problem: ActiveSpaceProblem,
    n_lowest: int = 1,
    n_alpha: int | None = None,
    n_beta: int | None = None,
    cap: int = BASIS_CAP,
    method: str = "auto",
    return_vectors: bool = False,
):
    """Lowest ``n_lowest`` eigenvalues (ascending) of H in one (n_alpha, n_beta) sector.

    ``method`` is "dense" (Slater-Condon matrix), "krylov" (Davidson on the
    matrix-free sigma build) or "auto" (dense up to 2000 determinants).
    """
    na, nb = _sector(problem, n_alpha, n_beta)
    basis = build_basis(problem.n_active, na, nb, cap=cap)
    dim = len(basis)
    n_lowest = min(n_lowest, dim)
    if method == "auto":
        method = "dense" if dim <= DENSE_LIMIT else "krylov"
    if method == "dense":
        w, v = np.linalg.eigh(slater_condon_matrix(problem, basis))
        w, v = w[:n_lowest], v[:, :n_lowest].T
    elif method == "krylov":
        op = SectorHamiltonian(problem, basis)
        w, v = davidson(lambda x: op.matvec(x).reshape(-1), op.diagonal().reshape(-1), n_lowest)
    else:
        raise ValueError(f"unknown method {method!r}")
    if return_vectors:
        return list(map(float, w)), v
    return [float(e) for e in w]


def ground_energy(problem: ActiveSpaceProblem, cap: int = BASIS_CAP, method: str = "auto"):
    """(E0, ground-state vector) in the reference (n_alpha, n_beta) sector."""
    w, v = sector_spectrum(problem, 1, cap=cap, method=method, return_vectors=True)
    return w[0], v[0]


# --- conversion to qubit ordering ---------------------------------------------

def interleaved_index(alpha_mask: int, beta_mask: int, n_orb: int) -> tuple[int, int]:
    """JW basis index (alpha m -> qubit 2m, beta m -> 2m + 1) and the block->interleaved sign."""
    idx = 0
    inversions = 0
    for m in range(n_orb):
        if alpha_mask >> m & 1:
            idx |= 1 << (2 * m)
            inversions += bin(beta_mask & ((1 << m) - 1)).count("1")
        if beta_mask >> m & 1:
            idx |= 1 << (2 * m + 1)
    return idx, (-1) ** inversions


def sector_to_statevector(vec: np.ndarray, basis: DeterminantBasis) -> np.ndarray:
    flat = np.asarray(vec).reshape(-1)
    out = np.zeros(1 << (2 * basis.n_orb), dtype=complex)
    for amp, (a, b) in zip(flat, basis.determinants()):
        idx, sign = interleaved_index(a, b, basis.n_orb)
        out[idx] = sign * amp
    return out


def qubit_sector_indices(n_orb: int, n_alpha: int, n_beta: int) -> np.ndarray:
    """JW basis indices of a sector, in determinant storage order."""
    basis = DeterminantBasis(n_orb, n_alpha, n_beta)
    return np.array([interleaved_index(a, b, n_orb)[0] for a, b in basis.determinants()])
