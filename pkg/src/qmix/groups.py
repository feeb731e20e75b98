"""Finite groups as dense multiplication tables built by generator closure.

A group is described by a small text spec ("cyclic:6", "sl2:7",
"prod:cyclic:2+alt:5"), realized as an indexed element set with the
identity at index 0 and the remaining elements in breadth-first
discovery order from a fixed generator list.  Groups of order at most
DENSE_CAP carry the full n x n multiplication table; larger ones keep a
composition callback and disable table-dependent operations.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Hashable, Sequence

import numpy as np

from .errors import (
    GroupFormatError,
    PreconditionError,
    SizeGuardError,
    SpecError,
)

MAX_ORDER = 50000
DENSE_CAP = 8192

_FAMILIES = ("cyclic", "dihedral", "sym", "alt", "sl2", "psl2", "prod")

_MAGIC = b"QMG1"


@dataclass(frozen=True)
class GroupSpec:
    """Parsed group description: a family tag plus integer parameters,
    or a flat list of factor specs for direct products."""

    family: str
    params: tuple[int, ...] = ()
    factors: tuple["GroupSpec", ...] = ()

    def order(self) -> int:
        """Group order implied by the spec, without building anything."""
        if self.family == "cyclic":
            return self.params[0]
        if self.family == "dihedral":
            return 2 * self.params[0]
        if self.family == "sym":
            return math.factorial(self.params[0])
        if self.family == "alt":
            return math.factorial(self.params[0]) // 2
        if self.family == "sl2":
            p = self.params[0]
            return p * (p * p - 1)
        if self.family == "psl2":
            p = self.params[0]
            return p * (p * p - 1) // 2
        if self.family == "prod":
            out = 1
            for f in self.factors:
                out *= f.order()
            return out
        raise SpecError(f"unknown family {self.family!r}")

    def text(self) -> str:
        """Canonical spec string that parses back to this value."""
        if self.family == "prod":
            return "prod:" + "+".join(f.text() for f in self.factors)
        return f"{self.family}:{','.join(str(v) for v in self.params)}"


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _check_param(family: str, value: int, position: int) -> None:
    if family in ("cyclic", "dihedral"):
        if value < 2:
            raise SpecError(f"{family} requires n >= 2, got {value}", position)
        if family == "cyclic" and value > MAX_ORDER:
            raise SpecError(f"cyclic order {value} exceeds the {MAX_ORDER} cap", position)
        if family == "dihedral" and 2 * value > MAX_ORDER:
            raise SpecError(
                f"dihedral order {2 * value} exceeds the {MAX_ORDER} cap", position
            )
    elif family in ("sym", "alt"):
        if not 3 <= value <= 8:
            raise SpecError(f"{family} requires 3 <= n <= 8, got {value}", position)
    elif family in ("sl2", "psl2"):
        if value == 2 or not _is_prime(value):
            raise SpecError(f"{family} requires an odd prime, got {value}", position)
        if value * (value * value - 1) > MAX_ORDER:
            raise SpecError(
                f"{family}:{value} exceeds the p(p^2-1) <= {MAX_ORDER} guard", position
            )
    else:
        raise SpecError(f"unknown family {family!r}", position)


def validate_spec(spec: GroupSpec) -> None:
    """Re-check guard ranges on a spec built by hand rather than parsed."""
    if spec.family == "prod":
        if len(spec.factors) < 2:
            raise SpecError("product needs at least 2 factors")
        for f in spec.factors:
            if f.family == "prod":
                raise SpecError("nested products are not supported")
            validate_spec(f)
        if spec.order() > MAX_ORDER:
            raise SpecError(
                f"product order {spec.order()} exceeds the {MAX_ORDER} cap"
            )
        return
    if len(spec.params) != 1:
        raise SpecError(f"{spec.family} takes exactly one parameter")
    _check_param(spec.family, spec.params[0], 0)


def _parse_one(s: str, base: int, allow_prod: bool) -> GroupSpec:
    colon = s.find(":")
    if colon < 0:
        raise SpecError("expected 'family:params'", base + len(s))
    if colon == 0:
        raise SpecError("missing family name", base)
    family = s[:colon]
    if family not in _FAMILIES:
        raise SpecError(f"unknown family {family!r}", base)
    body = s[colon + 1 :]
    body_base = base + colon + 1
    if family == "prod":
        if not allow_prod:
            raise SpecError("nested products are not supported", base)
        if not body:
            raise SpecError("product needs factors", body_base)
        factors: list[GroupSpec] = []
        off = 0
        for part in body.split("+"):
            if not part:
                raise SpecError("empty product factor", body_base + off)
            factors.append(_parse_one(part, body_base + off, allow_prod=False))
            off += len(part) + 1
        if len(factors) < 2:
            raise SpecError("product needs at least 2 factors", body_base)
        order = 1
        for f in factors:
            order *= f.order()
        if order > MAX_ORDER:
            raise SpecError(f"product order {order} exceeds the {MAX_ORDER} cap", base)
        return GroupSpec("prod", (), tuple(factors))
    if not body:
        raise SpecError(f"{family} needs an integer parameter", body_base)
    params: list[int] = []
    off = 0
    for part in body.split(","):
        if not (part.isascii() and part.isdigit()):
            raise SpecError(
                f"expected a positive integer, got {part!r}", body_base + off
            )
        params.append(int(part))
        off += len(part) + 1
    if len(params) != 1:
        raise SpecError(f"{family} takes exactly one parameter", body_base)
    _check_param(family, params[0], body_base)
    return GroupSpec(family, tuple(params))


def parse_spec(text: str) -> GroupSpec:
    """Parse a group spec string.

    Grammar: ``family ":" int`` for the built-in families, and
    ``"prod:" spec "+" spec {"+" spec}`` for direct products (factors may
    not themselves be products).  Errors report the character position.
    """
    if not isinstance(text, str):
        raise SpecError("group spec must be a string")
    stripped = text.strip()
    if not stripped:
        raise SpecError("empty group spec", 0)
    return _parse_one(stripped, text.index(stripped[0]), allow_prod=True)


@dataclass(eq=False)
class GroupTable:
    """A finite group over element indices 0..n-1 with identity at 0.

    ``mul`` is the dense n x n table when n <= DENSE_CAP, else None; in
    the latter case ``mul_fn`` performs on-demand composition and any
    operation needing the full table raises SizeGuardError.
    """

    n: int
    mul: np.ndarray | None
    inv: np.ndarray
    spec: GroupSpec | None
    generator_indices: tuple[int, ...]
    identity: int = 0
    elements: tuple | None = field(default=None, repr=False)
    mul_fn: Callable[[int, int], int] | None = field(default=None, repr=False)

    @property
    def is_dense(self) -> bool:
        return self.mul is not None

    def require_table(self, operation: str = "this operation") -> np.ndarray:
        if self.mul is None:
            raise SizeGuardError(
                f"{operation} needs the dense multiplication table, "
                f"which is only kept for n <= {DENSE_CAP} (group has n={self.n})"
            )
        return self.mul

    def _check_index(self, a: int) -> int:
        a = int(a)
        if not 0 <= a < self.n:
            raise PreconditionError(f"element index {a} out of range 0..{self.n - 1}")
        return a

    def product(self, a: int, b: int) -> int:
        a = self._check_index(a)
        b = self._check_index(b)
        if self.mul is not None:
            return int(self.mul[a, b])
        assert self.mul_fn is not None
        return self.mul_fn(a, b)

    def inverse(self, a: int) -> int:
        return int(self.inv[self._check_index(a)])

    def text(self) -> str:
        return self.spec.text() if self.spec is not None else f"<file group n={self.n}>"


def mul(G: GroupTable, a: int, b: int) -> int:
    """Compose two elements by index."""
    return G.product(a, b)


def inverse(G: GroupTable, a: int) -> int:
    return G.inverse(a)


def build_closure(
    generators: Sequence[Hashable],
    compose: Callable,
    identity: Hashable,
    inv_elem: Callable | None = None,
    *,
    spec: GroupSpec | None = None,
    expected_order: int | None = None,
    max_order: int = MAX_ORDER,
    dense_cap: int = DENSE_CAP,
) -> GroupTable:
    """Enumerate the closure of ``generators`` under ``compose`` by BFS.

    Indexing is deterministic: identity first, then discovery order with
    generators applied in listed order (right multiplication).  The dense
    table, when kept, is filled column by column: each element b was first
    seen as parent*g, so column b is a re-index of column parent.
    """
    index: dict = {identity: 0}
    elements: list = [identity]
    parents: list[tuple[int, int]] = [(-1, -1)]
    gens = list(generators)
    if not gens:
        raise PreconditionError("at least one generator is required")
    i = 0
    while i < len(elements):
        x = elements[i]
        for s, g in enumerate(gens):
            y = compose(x, g)
            if y not in index:
                index[y] = len(elements)
                elements.append(y)
                parents.append((i, s))
                if len(elements) > max_order:
                    raise SizeGuardError(
                        f"closure exceeded the {max_order} element cap"
                    )
        i += 1
    n = len(elements)
    if n == 1:
        raise PreconditionError("trivial group rejected (n must exceed 1)")
    if expected_order is not None and n != expected_order:
        raise GroupFormatError(
            f"closure produced {n} elements, expected {expected_order}; "
            "generator set does not match the family model"
        )
    generator_indices = tuple(index[g] for g in gens if g in index)

    if n <= dense_cap:
        right = np.empty((len(gens), n), dtype=np.int32)
        for s, g in enumerate(gens):
            right[s] = [index[compose(x, g)] for x in elements]
        table = np.empty((n, n), dtype=np.int32)
        table[:, 0] = np.arange(n, dtype=np.int32)
        for b in range(1, n):
            p, s = parents[b]
            table[:, b] = right[s][table[:, p]]
        inv = np.argmin(table, axis=1).astype(np.int32)
        return GroupTable(
            n=n,
            mul=table,
            inv=inv,
            spec=spec,
            generator_indices=generator_indices,
            elements=tuple(elements),
        )

    if inv_elem is None:
        raise SizeGuardError(
            f"group of order {n} exceeds the dense cap {dense_cap} and no "
            "inverse callback was supplied"
        )
    inv = np.empty(n, dtype=np.int32)
    for j, x in enumerate(elements):
        inv[j] = index[inv_elem(x)]

    def mul_fn(a: int, b: int) -> int:
        return index[compose(elements[a], elements[b])]

    return GroupTable(
        n=n,
        mul=None,
        inv=inv,
        spec=spec,
        generator_indices=generator_indices,
        elements=tuple(elements),
        mul_fn=mul_fn,
    )


def _cycle(n: int, points: tuple[int, ...]) -> tuple[int, ...]:
    perm = list(range(n))
    for a, b in zip(points, points[1:]):
        perm[a] = b
    perm[points[-1]] = points[0]
    return tuple(perm)


def _perm_compose(sigma: tuple, tau: tuple) -> tuple:
    # (sigma . tau)(i) = sigma(tau(i)): tau acts first.
    return tuple(sigma[t] for t in tau)


def _perm_inverse(sigma: tuple) -> tuple:
    out = [0] * len(sigma)
    for i, s in enumerate(sigma):
        out[s] = i
    return tuple(out)


def _model(spec: GroupSpec):
    """Generators, composition, identity and inverse for one family."""
    family = spec.family
    if family == "cyclic":
        n = spec.params[0]
        return [1], (lambda a, b: (a + b) % n), 0, (lambda a: (-a) % n), n
    if family == "dihedral":
        n = spec.params[0]

        def compose(x, y):
            k1, f1 = x
            k2, f2 = y
            return ((k1 + (k2 if f1 == 0 else -k2)) % n, f1 ^ f2)

        def inv_elem(x):
            k, f = x
            return ((-k) % n, 0) if f == 0 else x

        return [(1, 0), (0, 1)], compose, (0, 0), inv_elem, 2 * n
    if family in ("sym", "alt"):
        n = spec.params[0]
        identity = tuple(range(n))
        if family == "sym":
            gens = [_cycle(n, (0, 1)), _cycle(n, tuple(range(n)))]
            order = math.factorial(n)
        else:
            long_cycle = tuple(range(n)) if n % 2 == 1 else tuple(range(1, n))
            gens = [_cycle(n, (0, 1, 2)), _cycle(n, long_cycle)]
            order = math.factorial(n) // 2
        return gens, _perm_compose, identity, _perm_inverse, order
    if family in ("sl2", "psl2"):
        p = spec.params[0]

        def matmul(x, y):
            a, b, c, d = x
            e, f, g, h = y
            return (
                (a * e + b * g) % p,
                (a * f + b * h) % p,
                (c * e + d * g) % p,
                (c * f + d * h) % p,
            )

        def matinv(x):
            a, b, c, d = x
            return (d, (-b) % p, (-c) % p, a)

        gens = [(1, 1, 0, 1), (0, 1, p - 1, 0)]
        identity = (1, 0, 0, 1)
        if family == "sl2":
            return gens, matmul, identity, matinv, p * (p * p - 1)

        half = (p - 1) // 2

        def canon(m):
            # Unique coset representative of {m, -m}: first nonzero entry
            # in row-major order lies in 1..(p-1)/2.
            for v in m:
                if v:
                    if v > half:
                        return ((-m[0]) % p, (-m[1]) % p, (-m[2]) % p, (-m[3]) % p)
                    return m
            return m

        return (
            [canon(g) for g in gens],
            (lambda x, y: canon(matmul(x, y))),
            identity,
            (lambda x: canon(matinv(x))),
            p * (p * p - 1) // 2,
        )
    raise SpecError(f"unknown family {family!r}")


def construct_group(spec: GroupSpec) -> GroupTable:
    """Build the group a spec describes; deterministic per spec."""
    validate_spec(spec)
    if spec.family == "prod":
        out = construct_group(spec.factors[0])
        for f in spec.factors[1:]:
            out = direct_product(out, construct_group(f))
        return out
    gens, compose, identity, inv_elem, order = _model(spec)
    return build_closure(
        gens, compose, identity, inv_elem, spec=spec, expected_order=order
    )


def build_group(text: str) -> GroupTable:
    """Parse a spec string and construct the group."""
    return construct_group(parse_spec(text))


def direct_product(G1: GroupTable, G2: GroupTable) -> GroupTable:
    """Componentwise product; index of the pair (a, b) is a*n2 + b."""
    n1, n2 = G1.n, G2.n
    n = n1 * n2
    if n > MAX_ORDER:
        raise SizeGuardError(f"product order {n} exceeds the {MAX_ORDER} cap")

    def spec_factors(G: GroupTable) -> tuple[GroupSpec, ...]:
        if G.spec is None:
            raise PreconditionError("direct_product needs spec-built factors")
        return G.spec.factors if G.spec.family == "prod" else (G.spec,)

    spec = GroupSpec("prod", (), spec_factors(G1) + spec_factors(G2))
    inv = (np.add.outer(G1.inv.astype(np.int64) * n2, G2.inv)).ravel().astype(np.int32)
    gens = tuple(int(g) * n2 for g in G1.generator_indices) + tuple(
        int(g) for g in G2.generator_indices
    )

    if n <= DENSE_CAP and G1.is_dense and G2.is_dense:
        m1 = G1.mul.astype(np.int64)
        m2 = G2.mul.astype(np.int64)
        table = np.empty((n, n), dtype=np.int32)
        for a1 in range(n1):
            # Rows a1*n2 .. a1*n2+n2-1, laid out (b1, (a2, b2)).
            block = m1[a1][None, :, None] * n2 + m2[:, None, :]
            table[a1 * n2 : (a1 + 1) * n2] = block.reshape(n2, n)
        return GroupTable(
            n=n, mul=table, inv=inv, spec=spec, generator_indices=gens
        )

    def mul_fn(a: int, b: int) -> int:
        return G1.product(a // n2, b // n2) * n2 + G2.product(a % n2, b % n2)

    return GroupTable(
        n=n, mul=None, inv=inv, spec=spec, generator_indices=gens, mul_fn=mul_fn
    )


def is_abelian(G: GroupTable) -> bool:
    if G.mul is not None:
        return bool(np.array_equal(G.mul, G.mul.T))
    # Generators commute iff the whole group does.
    gens = G.generator_indices
    if not gens:
        raise PreconditionError("cannot decide abelianness without a table or generators")
    return all(
        G.product(a, b) == G.product(b, a) for a in gens for b in gens
    )


def validate_group(G: GroupTable, seed: int = 0) -> None:
    """Check the group laws on the dense table; raises GroupFormatError.

    Identity, inverses and the Latin-square property are checked in full.
    Associativity is checked on all triples for n <= 256 and on 10*n*n
    seeded random triples above that.
    """
    table = G.require_table("validation")
    n = G.n
    ar = np.arange(n, dtype=np.int32)
    if not (np.array_equal(table[0], ar) and np.array_equal(table[:, 0], ar)):
        raise GroupFormatError("identity law fails: row or column 0 is not the identity")
    if G.inv.shape != (n,) or G.inv.min() < 0 or G.inv.max() >= n:
        raise GroupFormatError("inverse table out of range")
    if not np.all(table[ar, G.inv] == 0):
        raise GroupFormatError("inverse law fails: a * inv[a] != identity")
    if not np.array_equal(np.sort(table, axis=1), np.broadcast_to(ar, (n, n))):
        raise GroupFormatError("Latin square violated in a row")
    if not np.array_equal(np.sort(table, axis=0), np.broadcast_to(ar[:, None], (n, n))):
        raise GroupFormatError("Latin square violated in a column")
    if n <= 256:
        left = table[table]          # [a,b,c] = table[table[a,b], c]
        right = table[:, table]      # [a,b,c] = table[a, table[b,c]]
        if not np.array_equal(left, right):
            raise GroupFormatError("associativity fails on some triple")
        return
    rng = np.random.default_rng(seed)
    remaining = 10 * n * n
    chunk = 1 << 20
    while remaining > 0:
        m = min(chunk, remaining)
        a = rng.integers(0, n, size=m)
        b = rng.integers(0, n, size=m)
        c = rng.integers(0, n, size=m)
        if not np.array_equal(table[table[a, b], c], table[a, table[b, c]]):
            raise GroupFormatError("associativity fails on a sampled triple")
        remaining -= m


def write_group(G: GroupTable, path) -> None:
    """Serialize the dense table to the QMG1 binary format."""
    table = G.require_table("serialization")
    payload = (
        _MAGIC
        + struct.pack("<I", G.n)
        + np.ascontiguousarray(table, dtype="<u4").tobytes()
        + np.ascontiguousarray(G.inv, dtype="<u4").tobytes()
    )
    Path(path).write_bytes(payload)


def read_group(path) -> GroupTable:
    """Load and fully validate a QMG1 group file."""
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:4] != _MAGIC:
        raise GroupFormatError("not a QMG1 group file")
    n = struct.unpack_from("<I", data, 4)[0]
    if n < 2 or n > DENSE_CAP:
        raise GroupFormatError(f"group order {n} outside the supported range 2..{DENSE_CAP}")
    expected = 8 + 4 * n * n + 4 * n
    if len(data) != expected:
        raise GroupFormatError(
            f"file length {len(data)} does not match order {n} (expected {expected})"
        )
    raw = np.frombuffer(data, dtype="<u4", count=n * n, offset=8)
    if raw.max() >= n:
        raise GroupFormatError("multiplication entry out of range")
    table = raw.reshape(n, n).astype(np.int32)
    raw_inv = np.frombuffer(data, dtype="<u4", count=n, offset=8 + 4 * n * n)
    if raw_inv.max() >= n:
        raise GroupFormatError("inverse entry out of range")
    G = GroupTable(
        n=n,
        mul=table,
        inv=raw_inv.astype(np.int32),
        spec=None,
        generator_indices=(),
    )
    validate_group(G)
    return G
