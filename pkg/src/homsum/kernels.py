"""Discrete coefficient kernels f: [n]^d -> R and their contraction calculus.

Kernels are stored as immutable maps from 1-based index tuples to scalars;
absent tuples are zero.  Exact mode keeps every value a Fraction so that
contraction identities and norms can be asserted with ==; float mode is for
simulation-facing code.  Norms are reported squared in exact mode.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional

Scalar = Fraction | float

FLAG_CHECK_LIMIT = 10**6


class KernelError(ValueError):
    pass


def _as_scalar(v, mode: str) -> Scalar:
    if mode == "exact":
        if isinstance(v, float):
            raise KernelError("float value in exact mode; pass Fraction, int or 'p/q' string")
        return Fraction(v)
    return float(v)


@dataclass(frozen=True)
class Kernel:
    n: int
    d: int
    values: Mapping[tuple[int, ...], Scalar]
    mode: str = "exact"

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise KernelError("mode must be 'exact' or 'float'")
        if self.n < 1 or self.d < 0:
            raise KernelError("need n >= 1 and d >= 0")

    def __call__(self, idx: tuple[int, ...]) -> Scalar:
        return self.values.get(tuple(idx), self._zero)

    @property
    def _zero(self) -> Scalar:
        return Fraction(0) if self.mode == "exact" else 0.0

    def support(self):
        return self.values.items()

    @cached_property
    def is_symmetric(self) -> Optional[bool]:
        if self.d <= 1:
            return True
        if self._flag_cost() > FLAG_CHECK_LIMIT:
            return None
        for idx, v in self.values.items():
            for perm in itertools.permutations(idx):
                if self.values.get(perm, self._zero) != v:
                    return False
        return True

    @cached_property
    def is_mirror_symmetric(self) -> Optional[bool]:
        if self.d <= 1:
            return True
        if self._flag_cost() > FLAG_CHECK_LIMIT:
            return None
        for idx, v in self.values.items():
            if self.values.get(idx[::-1], self._zero) != v:
                return False
        return True

    @cached_property
    def vanishes_on_diagonals(self) -> bool:
        return all(len(set(idx)) == len(idx) for idx in self.values)

    def _flag_cost(self) -> int:
        return len(self.values) * max(math.factorial(min(self.d, 10)), 1)

    def norm_sq(self) -> Scalar:
        return sum((v * v for v in self.values.values()), self._zero)

    def scaled(self, c: Scalar) -> "Kernel":
        c = _as_scalar(c, self.mode)
        return Kernel(self.n, self.d, {k: v * c for k, v in self.values.items()}, self.mode)

    def __sub__(self, other: "Kernel") -> "Kernel":
        if (self.n, self.d, self.mode) != (other.n, other.d, other.mode):
            raise KernelError("kernel shape/mode mismatch in subtraction")
        out = dict(self.values)
        for k, v in other.values.items():
            w = out.get(k, self._zero) - v
            if w:
                out[k] = w
            else:
                out.pop(k, None)
        return Kernel(self.n, self.d, out, self.mode)

    def to_float(self) -> "Kernel":
        if self.mode == "float":
            return self
        return Kernel(self.n, self.d, {k: float(v) for k, v in self.values.items()}, "float")


def build_kernel(
    n: int,
    d: int,
    entries: Iterable[tuple[tuple[int, ...], Scalar]],
    symmetrize: bool = False,
    mode: str = "exact",
) -> Kernel:
    """Assemble a kernel from (index, value) pairs.

    Duplicate indices are allowed only when the values agree; with
    ``symmetrize`` the result is the average of the input over all index
    permutations (the standard symmetrization).
    """
    raw: dict[tuple[int, ...], Scalar] = {}
    for idx, val in entries:
        idx = tuple(int(i) for i in idx)
        if len(idx) != d:
            raise KernelError(f"index {idx} has arity {len(idx)}, expected {d}")
        if any(not (1 <= i <= n) for i in idx):
            raise KernelError(f"index {idx} out of range [1, {n}]")
        if isinstance(val, str):
            val = Fraction(val)
        val = _as_scalar(val, mode)
        if idx in raw and raw[idx] != val:
            raise KernelError(f"conflicting duplicate entries at {idx}")
        raw[idx] = val
    if symmetrize and d >= 2:
        # entries name orbit representatives: average the provided values in
        # each permutation orbit and replicate (a single given entry keeps its
        # value on the whole orbit; a fully specified f gets the standard
        # symmetrization average)
        zero = Fraction(0) if mode == "exact" else 0.0
        orbit_sum: dict[tuple[int, ...], Scalar] = {}
        orbit_count: dict[tuple[int, ...], int] = {}
        for idx, v in raw.items():
            key = tuple(sorted(idx))
            orbit_sum[key] = orbit_sum.get(key, zero) + v
            orbit_count[key] = orbit_count.get(key, 0) + 1
        sym: dict[tuple[int, ...], Scalar] = {}
        for key, s in orbit_sum.items():
            cnt = orbit_count[key]
            avg = s / cnt if mode == "float" else s * Fraction(1, cnt)
            if avg:
                for perm in set(itertools.permutations(key)):
                    sym[perm] = avg
        raw = sym
    raw = {k: v for k, v in raw.items() if v}
    return Kernel(n, d, raw, mode)


def validate(f: Kernel, flavor: str) -> dict:
    """Admissibility report for one of the three flavors.

    classical: symmetric, diagonal-vanishing, d! * sum f^2 == 1
    free:      symmetric, diagonal-vanishing, sum f^2 == 1
    mirror:    mirror-symmetric, diagonal-vanishing, sum f^2 == 1
    """
    if flavor not in ("classical", "free", "mirror"):
        raise KernelError("flavor must be classical, free or mirror")
    nsq = f.norm_sq()
    if flavor == "classical":
        variance = nsq * math.factorial(f.d)
        sym_ok = f.is_symmetric
        sym_clause = "symmetric"
    elif flavor == "free":
        variance = nsq
        sym_ok = f.is_symmetric
        sym_clause = "symmetric"
    else:
        variance = nsq
        sym_ok = f.is_mirror_symmetric
        sym_clause = "mirror_symmetric"
    one = Fraction(1) if f.mode == "exact" else 1.0
    clauses = {
        sym_clause: sym_ok,
        "vanishes_on_diagonals": f.vanishes_on_diagonals,
        "unit_variance": variance == one,
    }
    return {
        "flavor": flavor,
        "clauses": clauses,
        "variance": variance,
        "passed": all(v is True for v in clauses.values()),
    }


def contraction(f: Kernel, g: Kernel, q: int) -> Kernel:
    """Contraction of order q: sums q inner indices of f against the reversed
    leading indices of g; q = 0 is the outer product."""
    if f.n != g.n or f.mode != g.mode:
        raise KernelError("alphabet/mode mismatch")
    if not (0 <= q <= min(f.d, g.d)):
        raise KernelError(f"q={q} out of range for degrees {f.d}, {g.d}")
    out_d = f.d + g.d - 2 * q
    acc: dict[tuple[int, ...], Scalar] = {}
    zero = f._zero
    for fi, fv in f.values.items():
        t, inner = fi[: f.d - q], fi[f.d - q:]
        rev = inner[::-1]
        for gi, gv in g.values.items():
            if gi[:q] != rev:
                continue
            key = t + gi[q:]
            acc[key] = acc.get(key, zero) + fv * gv
    acc = {k: v for k, v in acc.items() if v}
    return Kernel(f.n, out_d, acc, f.mode)


def star_contraction(f: Kernel, g: Kernel, r: int) -> Kernel:
    """Star contraction f *_r^{r-1} g: r-1 summed indices plus one shared
    free index gamma sitting between the two argument groups."""
    if f.n != g.n or f.mode != g.mode:
        raise KernelError("alphabet/mode mismatch")
    if not (1 <= r <= min(f.d, g.d)):
        raise KernelError(f"r={r} out of range for degrees {f.d}, {g.d}")
    out_d = f.d + g.d - 2 * r + 1
    acc: dict[tuple[int, ...], Scalar] = {}
    zero = f._zero
    for fi, fv in f.values.items():
        t, gamma, inner = fi[: f.d - r], fi[f.d - r], fi[f.d - r + 1:]
        rev = inner[::-1]
        for gi, gv in g.values.items():
            if gi[: r - 1] != rev or gi[r - 1] != gamma:
                continue
            key = t + (gamma,) + gi[r:]
            acc[key] = acc.get(key, zero) + fv * gv
    acc = {k: v for k, v in acc.items() if v}
    return Kernel(f.n, out_d, acc, f.mode)


def influence(f: Kernel) -> list[Scalar]:
    """Slot-summed influence profile: Inf_i(f) = sum over slots l and free
    indices of f(..., i at slot l, ...)^2, for i = 1..n.

    Under this normalization sum_i Inf_i = d * sum f^2 (for diagonal-vanishing
    kernels); for fully symmetric f each value equals d * sum_j f(i, j, ...)^2.
    See :func:`influence_first_slot` for the other normalization in use.
    """
    out = [f._zero] * f.n
    for idx, v in f.values.items():
        sq = v * v
        for i in idx:
            out[i - 1] += sq
    return out


def influence_first_slot(f: Kernel) -> list[Scalar]:
    """First-slot influence profile: Inf_i(f) = sum over the remaining indices
    of f(i, j_2, ..., j_d)^2, so that sum_i Inf_i = sum f^2 exactly.

    This is the normalization under which admissible (unit-variance) kernels
    have total influence 1; reports always state which profile they carry.
    """
    out = [f._zero] * f.n
    for idx, v in f.values.items():
        out[idx[0] - 1] += v * v
    return out


def tau_max(f: Kernel) -> Scalar:
    return max(influence(f), default=f._zero)


def slice_kernel(f: Kernel, prefix: tuple[int, ...]) -> Kernel:
    """Fix the first len(prefix) arguments; the result has degree d - len(prefix)."""
    m = len(prefix)
    if m > f.d:
        raise KernelError("prefix longer than kernel degree")
    if any(not (1 <= i <= f.n) for i in prefix):
        raise KernelError("prefix index out of range")
    prefix = tuple(prefix)
    out = {
        idx[m:]: v
        for idx, v in f.values.items()
        if idx[:m] == prefix
    }
    return Kernel(f.n, f.d - m, out, f.mode)


@dataclass(frozen=True)
class LiftedKernel:
    """A kernel lifted to tensor degree m = sum(orders); orders must be palindromic."""

    base: Kernel
    orders: tuple[int, ...]

    def __post_init__(self):
        if len(self.orders) != self.base.d:
            raise KernelError("orders length must equal the kernel degree")
        if any(h < 1 for h in self.orders):
            raise KernelError("orders must be positive")
        if tuple(self.orders) != tuple(reversed(self.orders)):
            raise KernelError("orders must be palindromic (h_i = h_{d-i+1})")

    @property
    def total_degree(self) -> int:
        return sum(self.orders)


def lift(f: Kernel, orders: Iterable[int]) -> LiftedKernel:
    return LiftedKernel(f, tuple(int(h) for h in orders))


def lifted_contraction_norms_sq(lk: LiftedKernel) -> dict[int, dict]:
    """Squared norms ||k (x)_r k||^2 for r = 1..m-1 of the lifted tensor,
    expressed through contractions and star contractions of the base kernel."""
    f = lk.base
    m = lk.total_degree
    prefix = [0]
    for h in lk.orders:
        prefix.append(prefix[-1] + h)
    out: dict[int, dict] = {}
    for r in range(1, m):
        if r in prefix:
            q = prefix.index(r)
            val = contraction(f, f, q).norm_sq()
            out[r] = {"kind": "contraction", "order": q, "norm_sq": val}
        else:
            q = next(j for j in range(1, f.d + 1) if prefix[j - 1] < r < prefix[j])
            val = star_contraction(f, f, q).norm_sq()
            out[r] = {"kind": "star", "order": q, "norm_sq": val}
    return out


def lifted_midpoint_norm_sq(lk: LiftedKernel) -> dict:
    """Squared norm ||k (x)_{m/2} k - k||^2 via the base kernel (m must be even)."""
    f = lk.base
    m = lk.total_degree
    if m % 2 != 0:
        raise KernelError("total lifted degree must be even for the midpoint norm")
    if f.d % 2 == 0:
        diff = contraction(f, f, f.d // 2) - f
        return {"kind": "contraction", "order": f.d // 2, "norm_sq": diff.norm_sq()}
    diff = star_contraction(f, f, (f.d + 1) // 2) - f
    return {"kind": "star", "order": (f.d + 1) // 2, "norm_sq": diff.norm_sq()}


def _scalar_to_json(v: Scalar) -> str | float:
    return f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else v


def kernel_to_json(f: Kernel) -> str:
    entries = [
        {"idx": list(idx), "val": _scalar_to_json(v)}
        for idx, v in sorted(f.values.items())
    ]
    return json.dumps(
        {"n": f.n, "d": f.d, "mode": f.mode, "symmetrize": False, "entries": entries},
        indent=2,
    )


def kernel_from_json(text: str) -> Kernel:
    obj = json.loads(text)
    entries = [(tuple(e["idx"]), e["val"]) for e in obj["entries"]]
    return build_kernel(
        int(obj["n"]),
        int(obj["d"]),
        entries,
        symmetrize=bool(obj.get("symmetrize", False)),
        mode=obj.get("mode", "exact"),
    )


def offdiag_kernel(n: int, value: Scalar = Fraction(1), mode: str = "exact") -> Kernel:
    """Constant off-diagonal quadratic kernel: f(i, j) = value for i != j.

    With value 1/sqrt(2n(n-1)) (classical) or 1/sqrt(n(n-1)) (free) this is
    the fully spread, vanishing-influence family; exact tests keep value = 1
    and rescale results by the rational squared normalization.
    """
    entries = [((i, j), value) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    return build_kernel(n, 2, entries, mode=mode)


def star_kernel(n: int, value: Scalar = Fraction(1), mode: str = "exact") -> Kernel:
    """Star-shaped quadratic kernel: f(i, j) = value when i != j and 1 in {i, j}.

    Its maximal influence does not vanish with n, so it is the canonical
    counterexample family for universality diagnostics.
    """
    entries = [((1, j), value) for j in range(2, n + 1)]
    entries += [((j, 1), value) for j in range(2, n + 1)]
    return build_kernel(n, 2, entries, mode=mode)


def avoid_first_kernel(n: int, value: Scalar = Fraction(1), mode: str = "exact") -> Kernel:
    """Off-diagonal quadratic kernel supported away from index 1."""
    entries = [
        ((i, j), value) for i in range(2, n + 1) for j in range(2, n + 1) if i != j
    ]
    return build_kernel(n, 2, entries, mode=mode)


def scale_to_unit_variance(f: Kernel, flavor: str) -> Kernel:
    """Float copy of f rescaled so the flavor's variance clause holds
    (d! sum f^2 = 1 classically, sum f^2 = 1 for free/mirror)."""
    nsq = float(f.norm_sq())
    if nsq == 0.0:
        raise KernelError("cannot normalize the zero kernel")
    target = 1.0 / math.factorial(f.d) if flavor == "classical" else 1.0
    c = math.sqrt(target / nsq)
    return f.to_float().scaled(c)
