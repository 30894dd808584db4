"""Spatial-orbital integrals, FCIDUMP I/O and the active-space Hamiltonian."""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

SYMMETRY_TOL = 1e-12
DUPLICATE_TOL = 1e-10


class FcidumpError(ValueError):
    """Base class for FCIDUMP parse failures; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FcidumpHeaderError(FcidumpError):
    pass


class FcidumpIndexError(FcidumpError):
    pass


class FcidumpConflictError(FcidumpError):
    pass


class ActiveSpaceError(ValueError):
    pass


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpatialIntegrals:
    """Real integrals over spatial orbitals, two-electron part in chemists' notation.

    ``eri[p, q, r, s]`` is (pq|rs). ``orbital_basis`` is a free-form label
    ("canonical", "natural", ...) carried along for bookkeeping only.
    """

    n_orb: int
    n_elec: int
    ms2: int
    e_core: float
    h_one: np.ndarray
    eri: np.ndarray
    orb_energies: np.ndarray | None = None
    orbital_basis: str = "unspecified"

    def __post_init__(self):
        n = self.n_orb
        object.__setattr__(self, "e_core", float(self.e_core))
        object.__setattr__(self, "h_one", _frozen(self.h_one))
        object.__setattr__(self, "eri", _frozen(self.eri))
        if self.orb_energies is not None:
            object.__setattr__(self, "orb_energies", _frozen(self.orb_energies))
        if self.h_one.shape != (n, n) or self.eri.shape != (n, n, n, n):
            raise ValueError(f"integral shapes do not match n_orb={n}")
        if self.orb_energies is not None and self.orb_energies.shape != (n,):
            raise ValueError("orb_energies must have length n_orb")
        if not np.allclose(self.h_one, self.h_one.T, rtol=0, atol=SYMMETRY_TOL):
            raise ValueError("h_one is not symmetric")
        g = self.eri
        for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
            if not np.allclose(g, g.transpose(perm), rtol=0, atol=SYMMETRY_TOL):
                raise ValueError(f"eri lacks permutational symmetry {perm}")
        if self.n_elec < 0 or self.n_elec > 2 * n:
            raise ValueError(f"n_elec={self.n_elec} out of range for {n} orbitals")
        if (self.n_elec - self.ms2) % 2:
            raise ValueError("n_elec and ms2 must have the same parity")

    def allclose(self, other: SpatialIntegrals, atol: float = 1e-12) -> bool:
        if (self.n_orb, self.n_elec, self.ms2) != (other.n_orb, other.n_elec, other.ms2):
            return False
        if (self.orb_energies is None) != (other.orb_energies is None):
            return False
        ok = abs(self.e_core - other.e_core) <= atol
        ok &= np.allclose(self.h_one, other.h_one, rtol=0, atol=atol)
        ok &= np.allclose(self.eri, other.eri, rtol=0, atol=atol)
        if self.orb_energies is not None:
            ok &= np.allclose(self.orb_energies, other.orb_energies, rtol=0, atol=atol)
        return bool(ok)


def _eri_orbit(i, j, k, l):
    return {
        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
    }


_HEADER_FIELD = re.compile(r"([A-Za-z_]\w*)\s*=\s*(.*?)\s*(?=[A-Za-z_]\w*\s*=|$)", re.S)


def _parse_header(text: str, line_no: int) -> dict[str, list[str]]:
    body = re.sub(r"^\s*&FCI", "", text, flags=re.I)
    body = re.sub(r"(&END|/)\s*$", "", body.strip(), flags=re.I)
    fields = {}
    for key, value in _HEADER_FIELD.findall(body):
        fields[key.upper()] = [v for v in re.split(r"[,\s]+", value) if v]
    for key in ("NORB", "NELEC"):
        if not fields.get(key):
            raise FcidumpHeaderError(f"header is missing {key}", line_no)
    return fields


def parse_fcidump(source: str | TextIO) -> SpatialIntegrals:
    """Parse FCIDUMP text (1-based indices) into 0-based :class:`SpatialIntegrals`.

    Entries not listed are zero; listed entries are expanded over their
    permutational orbit. A repeated entry must agree with the earlier one to
    within 1e-10, otherwise :class:`FcidumpConflictError` is raised.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    lines = stream.read().splitlines()

    header_lines = []
    pos = 0
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    if pos == len(lines) or not lines[pos].strip().upper().startswith("&FCI"):
        raise FcidumpHeaderError("expected '&FCI' namelist header", pos + 1)
    start = pos
    while pos < len(lines):
        header_lines.append(lines[pos])
        stripped = lines[pos].strip()
        pos += 1
        if re.search(r"(&END|/)\s*$", stripped, flags=re.I):
            break
    else:
        raise FcidumpHeaderError("header is not terminated by '&END' or '/'", start + 1)
    hdr = _parse_header(" ".join(header_lines), start + 1)
    try:
        n = int(hdr["NORB"][0])
        nelec = int(hdr["NELEC"][0])
        ms2 = int(hdr["MS2"][0]) if hdr.get("MS2") else 0
    except ValueError as exc:
        raise FcidumpHeaderError(f"non-integer header value ({exc})", start + 1) from None

    if n < 1 or not 0 < nelec <= 2 * n:
        raise FcidumpHeaderError(f"NORB={n}, NELEC={nelec} is not a valid system", start + 1)
    h = np.zeros((n, n))
    g = np.zeros((n, n, n, n))
    eps = np.zeros(n)
    have_eps = False
    e_core = 0.0
    seen: dict[tuple, float] = {}

    def store(key, value, line_no):
        old = seen.get(key)
        if old is not None and abs(old - value) > DUPLICATE_TOL:
            raise FcidumpConflictError(
                f"entry {key} given as {old!r} and {value!r}", line_no
            )
        seen[key] = value

    for line_no, raw in enumerate(lines[pos:], start=pos + 1):
        parts = raw.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FcidumpError(f"expected 5 fields, got {len(parts)}", line_no)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError:
            raise FcidumpError(f"cannot parse {raw.strip()!r}", line_no) from None
        if not all(0 <= x <= n for x in (i, j, k, l)):
            raise FcidumpIndexError(f"index out of range [0, {n}]", line_no)
        if i and j and k and l:
            store(("g",) + tuple(sorted(_eri_orbit(i, j, k, l))[0]), value, line_no)
            for p, q, r, s in _eri_orbit(i - 1, j - 1, k - 1, l - 1):
                g[p, q, r, s] = value
        elif i and j and not k and not l:
            store(("h", min(i, j), max(i, j)), value, line_no)
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        elif i and not j and not k and not l:
            store(("e", i), value, line_no)
            eps[i - 1] = value
            have_eps = True
        elif not (i or j or k or l):
            store(("c",), value, line_no)
            e_core = value
        else:
            raise FcidumpIndexError(
                f"unrecognised index pattern {(i, j, k, l)}", line_no
            )
    return SpatialIntegrals(
        n_orb=n, n_elec=nelec, ms2=ms2, e_core=e_core, h_one=h, eri=g,
        orb_energies=eps if have_eps else None,
    )


def read_fcidump(path) -> SpatialIntegrals:
    with open(path) as f:
        return parse_fcidump(f)


def _fmt(x: float) -> str:
    return f"{x: .16e}"


def write_fcidump(ints: SpatialIntegrals) -> str:
    """Serialise to FCIDUMP text; exact zeros are not written."""
    n = ints.n_orb
    out = [
        f"&FCI NORB={n},NELEC={ints.n_elec},MS2={ints.ms2},",
        " ORBSYM=" + "".join("1," for _ in range(n)),
        " ISYM=1,",
        "&END",
    ]
    g = ints.eri
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    if g[i, j, k, l] != 0.0:
                        out.append(f"{_fmt(g[i, j, k, l])} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(n):
        for j in range(i + 1):
            if ints.h_one[i, j] != 0.0:
                out.append(f"{_fmt(ints.h_one[i, j])} {i + 1} {j + 1} 0 0")
    if ints.orb_energies is not None:
        for i, e in enumerate(ints.orb_energies):
            out.append(f"{_fmt(e)} {i + 1} 0 0 0")
    out.append(f"{_fmt(ints.e_core)} 0 0 0 0")
    return "\n".join(out) + "\n"


@dataclass(frozen=True, eq=False)
class ActiveSpaceProblem:
    """Integrals restricted to the active orbitals plus the frozen-core scalar.

    ``active_integrals.e_core`` holds the inactive energy E_I (nuclear
    repulsion included). ``reference_occupation`` is indexed by spin orbital
    with alpha of active orbital m on 2m and beta on 2m + 1.
    """

    active_integrals: SpatialIntegrals
    n_active_elec: int
    inactive_list: tuple[int, ...]
    active_list: tuple[int, ...]
    reference_occupation: tuple[int, ...] = field(default=())

    @property
    def n_active(self) -> int:
        return len(self.active_list)

    @property
    def n_qubits(self) -> int:
        return 2 * len(self.active_list)

    @property
    def n_alpha(self) -> int:
        return (self.n_active_elec + 1) // 2

    @property
    def n_beta(self) -> int:
        return self.n_active_elec // 2

    @property
    def inactive_energy(self) -> float:
        return self.active_integrals.e_core


def closed_shell_occupation(n_spatial: int, n_elec: int) -> tuple[int, ...]:
    """Lowest spatial orbitals filled; interleaved alpha/beta spin orbitals."""
    n_a, n_b = (n_elec + 1) // 2, n_elec // 2
    occ = [0] * (2 * n_spatial)
    for m in range(n_a):
        occ[2 * m] = 1
    for m in range(n_b):
        occ[2 * m + 1] = 1
    return tuple(occ)


def build_active_space(
    parent: SpatialIntegrals,
    active_list: Sequence[int],
    n_active_elec: int,
    inactive_list: Iterable[int] | None = None,
) -> ActiveSpaceProblem:
    """Fold doubly occupied inactive orbitals into a scalar and a Fock-like term.

    Without an explicit ``inactive_list`` the lowest-index orbitals outside
    the active set are frozen, as many as ``(n_elec - n_active_elec) / 2``.
    """
    active = tuple(int(t) for t in active_list)
    n_frozen2 = parent.n_elec - n_active_elec
    if n_active_elec < 0 or n_frozen2 < 0:
        raise ActiveSpaceError("active electron count outside [0, n_elec]")
    if n_frozen2 % 2:
        raise ActiveSpaceError("n_elec - n_active_elec must be even")
    if len(set(active)) != len(active):
        raise ActiveSpaceError("active_list contains duplicates")
    if any(t < 0 or t >= parent.n_orb for t in active):
        raise ActiveSpaceError("active orbital index out of range")
    if n_active_elec > 2 * len(active):
        raise ActiveSpaceError(
            f"{n_active_elec} electrons do not fit in {len(active)} active orbitals"
        )
    n_inactive = n_frozen2 // 2
    if inactive_list is None:
        inactive = tuple(p for p in range(parent.n_orb) if p not in active)[:n_inactive]
    else:
        inactive = tuple(int(i) for i in inactive_list)
    if len(inactive) != n_inactive:
        raise ActiveSpaceError(
            f"need {n_inactive} inactive orbitals, have {len(inactive)}"
        )
    if set(inactive) & set(active) or any(i < 0 or i >= parent.n_orb for i in inactive):
        raise ActiveSpaceError("inactive_list overlaps active_list or is out of range")

    h, g = parent.h_one, parent.eri
    ii = np.array(inactive, dtype=int)
    aa = np.array(active, dtype=int)
    e_inactive = parent.e_core
    h_eff = h[np.ix_(aa, aa)].copy()
    if len(ii):
        jj = g[np.ix_(ii, ii, ii, ii)]
        coul = np.einsum("iijj->", jj)
        exch = np.einsum("ijji->", jj)
        e_inactive += 2.0 * np.trace(h[np.ix_(ii, ii)]) + 2.0 * coul - exch
        h_eff += 2.0 * np.einsum("tuii->tu", g[np.ix_(aa, aa, ii, ii)])
        h_eff -= np.einsum("tiui->tu", g[np.ix_(aa, ii, aa, ii)])
        h_eff = 0.5 * (h_eff + h_eff.T)
    eps = parent.orb_energies[aa] if parent.orb_energies is not None else None
    active_ints = SpatialIntegrals(
        n_orb=len(active),
        n_elec=n_active_elec,
        ms2=parent.ms2 if n_active_elec else 0,
        e_core=e_inactive,
        h_one=h_eff,
        eri=g[np.ix_(aa, aa, aa, aa)],
        orb_energies=eps,
        orbital_basis=parent.orbital_basis,
    ) if active else SpatialIntegrals(
        n_orb=0, n_elec=0, ms2=0, e_core=e_inactive,
        h_one=np.zeros((0, 0)), eri=np.zeros((0, 0, 0, 0)),
        orbital_basis=parent.orbital_basis,
    )
    return ActiveSpaceProblem(
        active_integrals=active_ints,
        n_active_elec=n_active_elec,
        inactive_list=inactive,
        active_list=active,
        reference_occupation=closed_shell_occupation(len(active), n_active_elec),
    )


def full_space(ints: SpatialIntegrals) -> ActiveSpaceProblem:
    return build_active_space(ints, range(ints.n_orb), ints.n_elec)


def reference_energy(problem: ActiveSpaceProblem) -> float:
    """Energy of the closed-shell reference determinant (no SCF)."""
    if problem.n_active_elec % 2:
        raise ActiveSpaceError("open-shell reference determinants are not supported")
    ints = problem.active_integrals
    occ = np.arange(problem.n_active_elec // 2)
    if not len(occ):
        return ints.e_core
    f = ints.h_one[np.ix_(occ, occ)]
    g = ints.eri[np.ix_(occ, occ, occ, occ)]
    return float(
        ints.e_core
        + 2.0 * np.trace(f)
        + 2.0 * np.einsum("ttuu->", g)
        - np.einsum("tuut->", g)
    )
