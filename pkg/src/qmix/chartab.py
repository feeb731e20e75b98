"""Conjugacy classes and complex character tables.

Characters are recovered by the class-sum eigenvector method: the
integer class-multiplication matrices M_i commute and are jointly
diagonalized by the vectors v_rho(j) = h_j chi_rho(j) / d_rho, so a
random real combination of the M_i has those vectors as its
eigenvectors with probability 1.  The result is certified against both
orthogonality relations and the exact degree identity before it is
returned; a failed certificate is an error, never a silent answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, PreconditionError, SizeGuardError
from .groups import GroupTable, is_abelian

MAX_CLASSES = 200


@dataclass(eq=False)
class ConjugacyData:
    """Partition of a group into conjugacy classes.

    Classes are ordered by smallest member index, so class 0 is the
    identity singleton; ``representatives[c]`` is that smallest member.
    """

    group: GroupTable
    k: int
    class_of: np.ndarray
    representatives: np.ndarray
    sizes: np.ndarray
    class_elements: tuple


@dataclass(eq=False)
class CharacterTable:
    """Certified character table.

    Row 0 is the trivial character; rows are sorted by degree, then by
    rounded entry values, so equal inputs give identical tables across
    seeds.  ``residual`` is the worst deviation found in either
    orthogonality relation at certification time.
    """

    n: int
    k: int
    chi: np.ndarray
    degrees: np.ndarray
    D: int
    tol: float
    residual: float


def conjugacy_classes(G: GroupTable) -> ConjugacyData:
    """Partition G by conjugation orbits.

    With generators available the orbit of x under conjugation by
    generators equals its full class, so a flood fill over per-generator
    conjugation maps suffices; a dense group without generators (loaded
    from a file) falls back to conjugating by all elements at once.
    """
    n = G.n
    class_of = np.full(n, -1, dtype=np.int32)
    reps: list[int] = []
    elems: list[np.ndarray] = []
    gens = [int(g) for g in G.generator_indices if int(g) != 0]

    if gens:
        if G.is_dense:
            t = G.mul
            maps = [t[t[G.inv[g]], g] for g in gens]
        else:
            maps = []
            for g in gens:
                ig = int(G.inv[g])
                maps.append(
                    np.array(
                        [G.product(G.product(ig, x), g) for x in range(n)],
                        dtype=np.int32,
                    )
                )
        for x0 in range(n):
            if class_of[x0] >= 0:
                continue
            c = len(reps)
            class_of[x0] = c
            members = [x0]
            stack = [x0]
            while stack:
                x = stack.pop()
                for m in maps:
                    y = int(m[x])
                    if class_of[y] < 0:
                        class_of[y] = c
                        members.append(y)
                        stack.append(y)
            reps.append(x0)
            elems.append(np.sort(np.asarray(members, dtype=np.int32)))
    else:
        t = G.require_table("conjugacy enumeration without generators")
        ar = np.arange(n)
        for x0 in range(n):
            if class_of[x0] >= 0:
                continue
            c = len(reps)
            orbit = np.unique(t[t[G.inv, x0], ar])
            class_of[orbit] = c
            reps.append(x0)
            elems.append(orbit.astype(np.int32))

    sizes = np.array([len(e) for e in elems], dtype=np.int64)
    k = len(reps)
    if int(sizes.sum()) != n or sizes[0] != 1 or reps[0] != 0:
        raise CertificationError("conjugacy partition is inconsistent")
    if any(n % int(h) for h in sizes):
        raise CertificationError("a class size fails to divide the group order")
    return ConjugacyData(
        group=G,
        k=k,
        class_of=class_of,
        representatives=np.array(reps, dtype=np.int32),
        sizes=sizes,
        class_elements=tuple(elems),
    )


def class_mult_coefficients(G: GroupTable, C: ConjugacyData, i: int) -> np.ndarray:
    """Integer matrix M_i with M_i[j][l] = #{(a,b) in C_i x C_j : ab = rep_l}.

    Counted as: for a in C_i, b is forced to a^{-1} rep_l, so count the
    a whose forced b lands in C_j.
    """
    if not 0 <= i < C.k:
        raise PreconditionError(f"class index {i} out of range 0..{C.k - 1}")
    reps = C.representatives
    Ei = C.class_elements[i]
    k = C.k
    if G.is_dense:
        B = G.mul[np.ix_(G.inv[Ei], reps)]
    else:
        B = np.empty((len(Ei), k), dtype=np.int32)
        for ai, a in enumerate(Ei):
            ia = int(G.inv[a])
            for l in range(k):
                B[ai, l] = G.product(ia, int(reps[l]))
    cls = C.class_of[B].astype(np.int64)
    flat = cls * k + np.arange(k, dtype=np.int64)[None, :]
    return np.bincount(flat.ravel(), minlength=k * k).reshape(k, k)


def _orthogonality_residual(
    chi: np.ndarray, sizes: np.ndarray, n: int
) -> float:
    k = chi.shape[0]
    row_gram = (chi * sizes[None, :]) @ chi.conj().T / n
    row_res = float(np.abs(row_gram - np.eye(k)).max())
    col_gram = chi.T @ chi.conj()
    col_res = float(np.abs(col_gram - np.diag(n / sizes.astype(np.float64))).max())
    return max(row_res, col_res)


def _canonical_order(chi: np.ndarray, degrees: np.ndarray) -> np.ndarray:
    keys = []
    for r in range(chi.shape[0]):
        re = tuple(-round(float(v), 6) for v in chi[r].real)
        im = tuple(-round(float(v), 6) for v in chi[r].imag)
        keys.append((int(degrees[r]), re, im))
    return np.array(sorted(range(chi.shape[0]), key=lambda r: keys[r]), dtype=np.int64)


def compute_character_table(
    G: GroupTable,
    C: ConjugacyData | None = None,
    *,
    seed: int = 42,
    tol: float = 1e-8,
    degree_tol: float = 1e-6,
    retries: int = 5,
) -> CharacterTable:
    """Compute and certify the full character table of G.

    Raises CertificationError if no attempt yields a table passing all
    of: eigenvalue separation, integral degrees (pre-rounding deviation
    below degree_tol), sum of squared degrees equal to n exactly, both
    orthogonality relations within tol, trivial row all ones, and
    agreement of the all-degrees-one test with abelianness.
    """
    if C is None:
        C = conjugacy_classes(G)
    if C.group is not G:
        raise PreconditionError("class data belongs to a different group")
    n, k = G.n, C.k
    if k > MAX_CLASSES:
        raise SizeGuardError(f"{k} classes exceeds the {MAX_CLASSES} cap")
    sizes_f = C.sizes.astype(np.float64)

    M_all = np.empty((k, k, k), dtype=np.float64)
    for i in range(k):
        M_all[i] = class_mult_coefficients(G, C, i)

    abelian = is_abelian(G)
    last_error = "no attempt made"
    for attempt in range(retries):
        rng = np.random.default_rng((seed, attempt))
        r = rng.uniform(1.0, 2.0, size=k)
        M = np.tensordot(r, M_all, axes=1)
        w, V = np.linalg.eig(M)
        gap_scale = max(1.0, float(np.abs(w).max()))
        if k > 1:
            min_gap = float(np.abs(np.subtract.outer(w, w))[~np.eye(k, dtype=bool)].min())
            if min_gap < 10.0 * tol * gap_scale:
                last_error = f"eigenvalue collision (gap {min_gap:.3e})"
                continue

        # Per-class eigenvalues via Rayleigh quotients on each M_i.
        T = (M_all.reshape(k * k, k) @ V).reshape(k, k, k)
        num = np.einsum("jr,ijr->ir", V.conj(), T)
        norms = (V.conj() * V).sum(axis=0).real
        omega = num / norms[None, :]

        s = (np.abs(omega) ** 2 / sizes_f[:, None]).sum(axis=0)
        degrees_f = np.sqrt(n / s)
        degrees = np.rint(degrees_f).astype(np.int64)
        if np.any(degrees < 1) or float(np.abs(degrees_f - degrees).max()) > degree_tol:
            last_error = "non-integral degree before rounding"
            continue
        if int((degrees**2).sum()) != n:
            last_error = "squared degrees do not sum to the group order"
            continue

        chi = (omega.T * degrees[:, None].astype(np.float64)) / sizes_f[None, :]
        order = _canonical_order(chi, degrees)
        chi = chi[order]
        degrees = degrees[order]

        if float(np.abs(chi[0] - 1.0).max()) > tol:
            last_error = "canonical first row is not the trivial character"
            continue
        residual = _orthogonality_residual(chi, sizes_f, n)
        if residual > tol:
            last_error = f"orthogonality residual {residual:.3e} above tol"
            continue
        if bool(np.all(degrees == 1)) != abelian:
            last_error = "degree pattern contradicts abelianness"
            continue

        D = int(degrees[1]) if k > 1 else 1
        return CharacterTable(
            n=n, k=k, chi=chi, degrees=degrees, D=D, tol=tol, residual=residual
        )

    raise CertificationError(
        f"character table failed certification after {retries} attempts: {last_error}"
    )


def quasirandom_degree(T: CharacterTable) -> int:
    """Smallest degree among nontrivial irreducibles; 1 means the bound
    downstream is vacuous."""
    return T.D


def witten_zeta(T: CharacterTable, s: float) -> float:
    """Sum of degrees^(-s) over nontrivial irreducibles."""
    if not s > 0:
        raise PreconditionError(f"exponent must be positive, got {s}")
    return float((T.degrees[1:].astype(np.float64) ** (-float(s))).sum())


def character_table_csv(T: CharacterTable, C: ConjugacyData) -> str:
    """Render the table as CSV.

    Two header rows give class representatives and class sizes; each
    following row is one irreducible: its degree, then one complex cell
    per class with 17 significant digits.
    """
    lines = [
        "class_rep," + ",".join(str(int(r)) for r in C.representatives),
        "class_size," + ",".join(str(int(h)) for h in C.sizes),
    ]
    for r in range(T.k):
        cells = [
            f"{v.real:.16e}{v.imag:+.16e}j" for v in T.chi[r]
        ]
        lines.append(f"{int(T.degrees[r])}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def character_table_report(T: CharacterTable) -> dict:
    """JSON-ready summary of the certified table."""
    return {
        "n": T.n,
        "k": T.k,
        "degrees": [int(d) for d in T.degrees],
        "D": T.D,
        "zeta1": witten_zeta(T, 1.0),
        "orthogonality_residual": T.residual,
    }
