"""Generalized orthogonal polynomials, Gauss quadrature, random-discriminant
moments and Sylvester power-sum decompositions.

Polynomials are coefficient tuples of Fractions, lowest degree first.
Determinants stay exact (fraction-free Bareiss on a cleared-denominator
integer core); roots are extracted in float via the companion matrix, and
everything past root extraction is float with verified residuals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .laws import LawSpec

Poly = tuple[Fraction, ...]

EXPECTATION_GUARD = 10**7
MONOMIAL_GUARD = 2 * 10**6


class OrthopolyError(ValueError):
    pass


class DegenerateError(OrthopolyError):
    """A Hankel minor or leading coefficient that must be nonzero vanished."""


# ---------------------------------------------------------------------------
# exact polynomial helpers


def poly_trim(p: Sequence[Fraction]) -> Poly:
    q = list(p)
    while q and q[-1] == 0:
        q.pop()
    return tuple(q) if q else (Fraction(0),)


def poly_deg(p: Sequence[Fraction]) -> int:
    p = poly_trim(p)
    return len(p) - 1


def poly_add(p, q) -> Poly:
    out = [Fraction(0)] * max(len(p), len(q))
    for i, c in enumerate(p):
        out[i] += c
    for i, c in enumerate(q):
        out[i] += c
    return poly_trim(out)


def poly_scale(p, c) -> Poly:
    c = Fraction(c)
    return poly_trim([c * x for x in p])


def poly_mul(p, q) -> Poly:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return poly_trim(out)


def poly_eval(p, x):
    acc = x * 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_to_strings(p) -> list[str]:
    return [f"{c.numerator}/{c.denominator}" for c in p]


def poly_from_strings(items) -> Poly:
    return poly_trim([Fraction(s) for s in items])


# ---------------------------------------------------------------------------
# exact determinants


def exact_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant of a square Fraction matrix: denominators are cleared per
    row, the integer core goes through fraction-free Bareiss elimination, and
    the scaling is divided back out."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    m: list[list[int]] = []
    for row in rows:
        row = [Fraction(x) for x in row]
        den = 1
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
        scale *= den
        m.append([int(x * den) for x in row])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return Fraction(sign * m[n - 1][n - 1]) / scale


# ---------------------------------------------------------------------------
# moment functionals


@dataclass(frozen=True)
class MomentFunctional:
    """Per-group exact moment sequences a_{jk} (group j, order k).

    Group 0 is the main law; the default single-group functional uses it for
    every row of the generalized determinant.  a_{j0} must be 1.
    """

    groups: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        for g in self.groups:
            if not g or g[0] != 1:
                raise OrthopolyError("every moment sequence must start at a_0 = 1")

    @staticmethod
    def from_moments(*seqs) -> "MomentFunctional":
        return MomentFunctional(tuple(tuple(Fraction(x) for x in s) for s in seqs))

    @staticmethod
    def from_law(law: LawSpec, *extra_laws: LawSpec) -> "MomentFunctional":
        return MomentFunctional(tuple(l.moments for l in (law, *extra_laws)))

    def moment(self, j: int, k: int) -> Fraction:
        seq = self.groups[j if j < len(self.groups) else 0]
        if k >= len(seq):
            raise OrthopolyError(
                f"group {j} holds moments only to order {len(seq) - 1}, need {k}"
            )
        return seq[k]

    @property
    def max_order(self) -> int:
        return min(len(g) - 1 for g in self.groups)

    def shifted(self, t) -> "MomentFunctional":
        """Moments of X + t for every group (binomial transform); exact."""
        t = Fraction(t)
        out = []
        for g in self.groups:
            shifted = []
            for k in range(len(g)):
                acc = Fraction(0)
                for j in range(k + 1):
                    acc += math.comb(k, j) * g[j] * t ** (k - j)
                shifted.append(acc)
            out.append(tuple(shifted))
        return MomentFunctional(tuple(out))


def hankel_det(F: MomentFunctional, n: int) -> dict:
    """det(a_{i+j})_{i,j=0..n-1} plus the squared-Vandermonde expectation
    E[Delta(X_1, ..., X_n)^2] = n! det."""
    if n < 1:
        raise OrthopolyError("n must be >= 1")
    if F.max_order < 2 * n - 2:
        raise OrthopolyError(f"need moments to order {2 * n - 2}")
    rows = [[F.moment(0, i + j) for j in range(n)] for i in range(n)]
    det = exact_det(rows)
    return {"det": det, "vandermonde_sq_expectation": math.factorial(n) * det}


# ---------------------------------------------------------------------------
# generalized orthogonal polynomials (univariate)


def gops_determinant(F: MomentFunctional, n: int, m: int) -> Poly:
    """Generalized orthogonal polynomial p_{nm} by cofactor expansion of the
    moment determinant: one symbolic monomial row, the main group's moments
    shifted 0..n-m, then one unshifted row per extra group 2..m.

    Raises DegenerateError when the leading coefficient vanishes.
    """
    if not (1 <= m <= n):
        raise OrthopolyError("need 1 <= m <= n")
    if F.max_order < 2 * n - m:
        raise OrthopolyError(f"need main-group moments to order {2 * n - m}")
    rows: list[list[Fraction]] = []
    for shift in range(n - m + 1):
        rows.append([F.moment(0, shift + j) for j in range(n + 1)])
    for g in range(2, m + 1):
        rows.append([F.moment(g - 1 if g - 1 < len(F.groups) else 0, j) for j in range(n + 1)])
    coeffs = []
    for j in range(n + 1):
        minor = [[row[c] for c in range(n + 1) if c != j] for row in rows]
        coeffs.append((-1) ** j * exact_det(minor))
    p = poly_trim(coeffs)
    if poly_deg(p) != n:
        raise DegenerateError(
            f"leading coefficient of p_{{{n},{m}}} vanishes (degenerate moment data)"
        )
    return p


def gops_expectation(F: MomentFunctional, n: int, m: int, guard: int = EXPECTATION_GUARD) -> Poly:
    """The same polynomial through the conditional-expectation form
    E_0[Delta(X_1..X_{n-m+1}) Delta(x_0, X_1..X_n)], expanded over
    permutations and factorized by independence.

    X_1..X_{n-m+1} follow the main group; X_{n-m+1+t} follows group t+1.
    """
    if not (1 <= m <= n):
        raise OrthopolyError("need 1 <= m <= n")
    r = n - m + 1
    if math.factorial(r) * math.factorial(n + 1) > guard:
        raise OrthopolyError("permutation expansion exceeds the feasibility guard")

    def group_of(j: int) -> int:
        # variables X_1..X_r share group 0; X_{r+t} (t >= 1) uses group t+1 when present
        if j <= r:
            return 0
        g = j - r + 1
        return g - 1 if g - 1 < len(F.groups) else 0

    coeffs = [Fraction(0)] * (n + 1)
    small = list(itertools.permutations(range(r)))
    for tau in itertools.permutations(range(n + 1)):
        sgn_tau = _perm_sign(tau)
        # exponent of X_j (j = 0..n) from the big Vandermonde
        for sigma in small:
            sgn = sgn_tau * _perm_sign(sigma)
            term = Fraction(sgn)
            for j in range(1, n + 1):
                e = tau[j] + (sigma[j - 1] if j <= r else 0)
                term *= F.moment(group_of(j), e)
                if term == 0:
                    break
            else:
                coeffs[tau[0]] += term
    p = poly_trim(coeffs)
    if poly_deg(p) != n:
        raise DegenerateError(
            f"expectation route gives degree {poly_deg(p)} != {n} (degenerate moment data)"
        )
    return p


@lru_cache(maxsize=100000)
def _perm_sign(perm: tuple[int, ...]) -> int:
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def gops_route_ratio(F: MomentFunctional, n: int, m: int) -> Fraction:
    """Exact ratio expectation-route / determinant-route, verified constant
    across coefficients (the proportionality constant is empirical per (n, m))."""
    pd = gops_determinant(F, n, m)
    pe = gops_expectation(F, n, m)
    ratio = pe[-1] / pd[-1]
    for a, b in zip(pe, pd):
        if a != ratio * b:
            raise OrthopolyError("routes disagree beyond a constant factor")
    if ratio == 0:
        raise DegenerateError("zero ratio between GOPs routes")
    return ratio


def orthogonality_check(F: MomentFunctional, p: Poly, n: int, m: int) -> dict:
    """E[x^k p(x)] for k = 0..n-m+1 against the defining relations."""
    vals = {}
    for k in range(n - m + 2):
        acc = Fraction(0)
        for h, c in enumerate(p):
            acc += c * F.moment(0, k + h)
        vals[k] = acc
    return {
        "values": vals,
        "orthogonal": all(vals[k] == 0 for k in range(n - m + 1)),
        "nonvanishing_next": vals[n - m + 1] != 0,
    }


def recurrence_coeffs(F: MomentFunctional, N: int) -> dict:
    """Monic orthogonal polynomials with their Jacobi-Szego coefficients:
    p_{k+1} = (x - alpha_{k+1}) p_k - beta_{k+1} p_{k-1}."""
    if F.max_order < 2 * N:
        raise OrthopolyError(f"need moments to order {2 * N}")

    def inner(p: Poly, q: Poly) -> Fraction:
        prod = poly_mul(p, q)
        return sum((c * F.moment(0, k) for k, c in enumerate(prod)), Fraction(0))

    polys: list[Poly] = [(Fraction(1),)]
    alphas: list[Fraction] = []
    betas: list[Fraction] = []
    norms: list[Fraction] = [inner(polys[0], polys[0])]
    for k in range(N):
        pk = polys[k]
        nk = norms[k]
        if nk == 0:
            raise DegenerateError(f"Hankel degeneracy at step {k}: <p_k, p_k> = 0")
        xpk = poly_mul((Fraction(0), Fraction(1)), pk)
        alpha = inner(xpk, pk) / nk
        beta = nk / norms[k - 1] if k >= 1 else Fraction(0)
        nxt = poly_add(xpk, poly_scale(pk, -alpha))
        if k >= 1:
            nxt = poly_add(nxt, poly_scale(polys[k - 1], -beta))
        alphas.append(alpha)
        betas.append(beta)
        polys.append(nxt)
        norms.append(inner(nxt, nxt))
    return {"alphas": tuple(alphas), "betas": tuple(betas), "polys": tuple(polys)}


# ---------------------------------------------------------------------------
# multivariate generalized orthogonal polynomials


def multi_indices_upto(n: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """All multi-indices 0 <= k <= n (componentwise), in graded lexicographic order."""
    ranges = [range(x + 1) for x in n]
    idx = [tuple(k) for k in itertools.product(*ranges)]
    return tuple(sorted(idx, key=lambda k: (sum(k), k)))


@dataclass(frozen=True)
class MultiMomentFunctional:
    """Joint-moment tables per group: a maps a multi-index to E[X^k] exactly."""

    nvars: int
    groups: tuple[dict[tuple[int, ...], Fraction], ...]

    @staticmethod
    def from_product_laws(
        laws: Sequence[LawSpec],
        up_to: tuple[int, ...],
        shifts: Sequence = (),
    ) -> "MultiMomentFunctional":
        """Product functional of independent coordinate laws: a_k = prod_j m_{k_j}.

        Each entry of ``shifts`` adds an auxiliary group whose coordinates are
        the main laws translated by that amount (distinct rows keep the
        generalized determinants nonsingular).
        """
        def shifted_moments(law: LawSpec, t: Fraction) -> list[Fraction]:
            out = []
            for k in range(law.max_order + 1):
                acc = Fraction(0)
                for j in range(k + 1):
                    acc += math.comb(k, j) * law.moments[j] * t ** (k - j)
                out.append(acc)
            return out

        def table(per_coord_moments):
            out = {}
            for k in itertools.product(*[range(2 * u + 1) for u in up_to]):
                v = Fraction(1)
                for seq, e in zip(per_coord_moments, k):
                    v *= seq[e]
                out[tuple(k)] = v
            return out

        groups = [table([list(l.moments) for l in laws])]
        for t in shifts:
            per = tuple(t) if isinstance(t, (tuple, list)) else (t,) * len(laws)
            groups.append(
                table([shifted_moments(l, Fraction(ti)) for l, ti in zip(laws, per)])
            )
        return MultiMomentFunctional(len(laws), tuple(groups))

    def moment(self, j: int, k: tuple[int, ...]) -> Fraction:
        g = self.groups[j if j < len(self.groups) else 0]
        try:
            return g[tuple(k)]
        except KeyError:
            raise OrthopolyError(f"multivariate moment {k} not available in group {j}") from None


def multi_gops_determinant(
    F: MultiMomentFunctional, n: tuple[int, ...], m: tuple[int, ...]
) -> MultiPoly:
    """Multivariate generalized orthogonal polynomial by cofactor expansion.

    Columns run over the graded-lex multi-indices k <= n; after the symbolic
    monomial row come the main group's rows shifted by every h <= n - m, then
    one unshifted row per extra group to square the matrix.
    """
    if len(n) != F.nvars or len(m) != F.nvars:
        raise OrthopolyError("multi-index arity mismatch")
    if any(mi < 0 or mi > ni for mi, ni in zip(m, n)):
        raise OrthopolyError("need 0 <= m <= n componentwise")
    if all(mi == 0 for mi in m):
        raise OrthopolyError("m must be nonzero")
    ks = multi_indices_upto(n)
    hs = multi_indices_upto(tuple(ni - mi for ni, mi in zip(n, m)))
    s = len(ks) - 1
    r = len(hs) - 1
    rows: list[list[Fraction]] = []
    for h in hs:
        rows.append([F.moment(0, tuple(a + b for a, b in zip(k, h))) for k in ks])
    for g in range(2, s - r + 1):
        rows.append([F.moment(g - 1, k) for k in ks])
    if len(rows) != s:
        raise OrthopolyError("row count mismatch in the multivariate determinant")
    coeffs: MultiPoly = {}
    for j, k in enumerate(ks):
        minor = [[row[c] for c in range(s + 1) if c != j] for row in rows]
        v = (-1) ** j * exact_det(minor)
        if v:
            coeffs[k] = v
    if coeffs.get(tuple(n), Fraction(0)) == 0:
        raise DegenerateError("leading multivariate coefficient vanishes")
    return coeffs


def multi_orthogonality_check(
    F: MultiMomentFunctional, p: MultiPoly, n: tuple[int, ...], m: tuple[int, ...]
) -> dict:
    """E[X^k p(X)] = 0 for every k <= n - m, and nonvanishing at every
    multi-index a <= n covering n - m (one coordinate bumped by 1)."""
    nm = tuple(ni - mi for ni, mi in zip(n, m))
    vals = {}
    for k in multi_indices_upto(nm):
        acc = Fraction(0)
        for h, c in p.items():
            acc += c * F.moment(0, tuple(a + b for a, b in zip(k, h)))
        vals[k] = acc
    covers = []
    for i in range(len(n)):
        a = list(nm)
        a[i] += 1
        if a[i] <= n[i]:
            covers.append(tuple(a))
    cover_vals = {}
    for a in covers:
        acc = Fraction(0)
        for h, c in p.items():
            acc += c * F.moment(0, tuple(x + y for x, y in zip(a, h)))
        cover_vals[a] = acc
    return {
        "values": vals,
        "orthogonal": all(v == 0 for v in vals.values()),
        "cover_values": cover_vals,
        "nonvanishing_covers": all(v != 0 for v in cover_vals.values()),
    }


# ---------------------------------------------------------------------------
# roots and quadrature


def poly_roots(p: Sequence[Fraction], tol: float = 1e-8) -> dict:
    """Roots via the (balanced) companion matrix, ordered by (Re, Im);
    simplicity means pairwise distance > tol."""
    p = poly_trim(p)
    if poly_deg(p) < 1:
        raise OrthopolyError("degree must be >= 1")
    arr = np.array([float(c) for c in reversed(p)], dtype=float)
    roots = np.roots(arr)
    roots = sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag))
    simple = all(
        abs(a - b) > tol for a, b in itertools.combinations(roots, 2)
    )
    return {"roots": tuple(roots), "all_simple": simple, "tol": tol}


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple[complex, ...]
    weights: tuple[complex, ...]
    exactness_degree: int
    node_kind: str  # 'real-simple' | 'complex'
    max_residual: float

    @property
    def n(self) -> int:
        return len(self.nodes)


def quadrature_rule(
    F: MomentFunctional,
    n: int,
    tol: float = 1e-9,
    root_tol: float = 1e-8,
) -> QuadratureRule:
    """Gauss rule with n nodes: nodes are the roots of the degree-n monic
    orthogonal polynomial, weights solve the first n Vandermonde moment
    equations, and exactness is verified through degree 2n - 1."""
    rec = recurrence_coeffs(F, n)
    pn = rec["polys"][n]
    rt = poly_roots(pn, root_tol)
    if not rt["all_simple"]:
        raise DegenerateError("p_n has (numerically) multiple roots; no Gauss rule")
    nodes = rt["roots"]
    V = np.array([[node**k for node in nodes] for k in range(n)], dtype=complex)
    b = np.array([float(F.moment(0, k)) for k in range(n)], dtype=complex)
    weights = np.linalg.solve(V, b)
    max_resid = 0.0
    for k in range(2 * n):
        got = sum(w * node**k for w, node in zip(weights, nodes))
        want = float(F.moment(0, k))
        scale = max(1.0, abs(want))
        max_resid = max(max_resid, abs(got - want) / scale)
    if max_resid > tol:
        raise OrthopolyError(
            f"quadrature exactness residual {max_resid:.3e} exceeds tolerance {tol:.1e}"
        )
    kind = "real-simple" if all(abs(z.imag) < root_tol for z in nodes) else "complex"
    if kind == "real-simple":
        nodes = tuple(complex(z.real, 0.0) for z in nodes)
        weights = np.real(weights).astype(complex)
    return QuadratureRule(tuple(nodes), tuple(weights), 2 * n - 1, kind, max_resid)


def quadrature_apply(
    rule: QuadratureRule,
    P: Callable[..., complex],
    N: int,
    per_variable_degree: int,
) -> complex:
    """Tensorized Gauss rule: sum over node tuples of prod(weights) * P(nodes).
    Exact for polynomials of per-variable degree <= 2n - 1."""
    if per_variable_degree > rule.exactness_degree:
        raise OrthopolyError(
            f"per-variable degree {per_variable_degree} exceeds rule exactness "
            f"{rule.exactness_degree}"
        )
    total = 0j
    for combo in itertools.product(range(rule.n), repeat=N):
        w = 1.0 + 0j
        for i in combo:
            w *= rule.weights[i]
        total += w * P(*(rule.nodes[i] for i in combo))
    return total


# ---------------------------------------------------------------------------
# random discriminants


def _vandermonde_callable(N: int, power: int) -> Callable[..., complex]:
    def P(*xs):
        acc = 1.0 + 0j
        for i in range(N):
            for j in range(i + 1, N):
                acc *= xs[j] - xs[i]
        return acc**power

    return P


MultiPoly = dict[tuple[int, ...], Fraction]


def _mp_mul(a: MultiPoly, b: MultiPoly, guard: int = MONOMIAL_GUARD) -> MultiPoly:
    out: MultiPoly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            v = out.get(key, Fraction(0)) + ca * cb
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        if len(out) > guard:
            raise OrthopolyError("monomial expansion exceeds the feasibility guard")
    return out


def _vandermonde_power(N: int, power: int, extra_vars: int = 0) -> MultiPoly:
    """(prod_{i<j} (x_j - x_i))^power over N variables (indices 0..N-1),
    carried in exponent tuples of length N + extra_vars."""
    width = N + extra_vars
    acc: MultiPoly = {tuple([0] * width): Fraction(1)}
    one = Fraction(1)
    for i in range(N):
        for j in range(i + 1, N):
            ej = [0] * width
            ej[j] = 1
            ei = [0] * width
            ei[i] = 1
            lin = {tuple(ej): one, tuple(ei): -one}
            for _ in range(power):
                acc = _mp_mul(acc, lin)
    return acc


def discriminant_moment(
    F: MomentFunctional,
    N: int,
    k: int,
    method: str = "expansion",
    sigma2=None,
    tol: float = 1e-9,
):
    """E[Delta(X_1, ..., X_N)^(2k)] for an i.i.d. sample of the main law.

    method='expansion' (exact oracle): expand the Vandermonde power and
    factorize by independence.  method='quadrature': tensorized Gauss rule
    with n = k(N-1)+1 nodes (2k(N-1) <= 2n-1).  method='lu_gaussian':
    the Gaussian closed form sigma^(N(N-1)k) prod_j j^(jk)
    prod_{i<j} Gamma(k + i/j)/Gamma(i/j), exact for integer k; sigma^2
    defaults to the functional's second moment.
    """
    if N < 1 or k < 1:
        raise OrthopolyError("need N >= 1 and k >= 1")
    if method == "expansion":
        poly = _vandermonde_power(N, 2 * k)
        total = Fraction(0)
        for exps, coeff in poly.items():
            term = coeff
            for e in exps:
                term *= F.moment(0, e)
                if term == 0:
                    break
            total += term
        return total
    if method == "quadrature":
        n = k * (N - 1) + 1
        rule = quadrature_rule(F, n, tol=tol)
        val = quadrature_apply(rule, _vandermonde_callable(N, 2 * k), N, 2 * k * (N - 1))
        return val.real if abs(val.imag) < max(tol, 1e-9) * max(1.0, abs(val)) else val
    if method == "lu_gaussian":
        s2 = Fraction(sigma2) if sigma2 is not None else F.moment(0, 2)
        # sigma^{N(N-1)k} with N(N-1) even, so an integer power of sigma^2
        out = s2 ** (N * (N - 1) * k // 2)
        for j in range(1, N + 1):
            out *= Fraction(j) ** (j * k)
        for i in range(1, N + 1):
            for j in range(i + 1, N + 1):
                frac = Fraction(i, j)
                for l in range(k):
                    out *= frac + l
        return out
    raise OrthopolyError("method must be 'expansion', 'quadrature' or 'lu_gaussian'")


# ---------------------------------------------------------------------------
# Sylvester decompositions


def translated_moment_poly(F: MomentFunctional, m: int) -> Poly:
    """A_m(x) = E[(X - x)^m] as an exact polynomial in x (lowest degree first)."""
    coeffs = []
    for h in range(m + 1):
        coeffs.append(Fraction(math.comb(m, h) * (-1) ** h) * F.moment(0, m - h))
    return poly_trim(coeffs)


def discriminant_product_poly(F: MomentFunctional, n: int, k: int) -> Poly:
    """p_{n,k}(x) = E[(X_1-x)^{2k-1} ... (X_n-x)^{2k-1} Delta(X_1..X_n)^{2k}]
    by sparse monomial expansion and independence factorization."""
    width = n + 1  # variables X_1..X_n plus x at slot n
    acc = _vandermonde_power(n, 2 * k, extra_vars=1)
    one = Fraction(1)
    for i in range(n):
        ei = [0] * width
        ei[i] = 1
        ex = [0] * width
        ex[n] = 1
        lin = {tuple(ei): one, tuple(ex): -one}
        for _ in range(2 * k - 1):
            acc = _mp_mul(acc, lin)
    m = n * (2 * k - 1)
    coeffs = [Fraction(0)] * (m + 1)
    for exps, coeff in acc.items():
        term = coeff
        for e in exps[:n]:
            term *= F.moment(0, e)
            if term == 0:
                break
        coeffs[exps[n]] += term
    return poly_trim(coeffs)


@dataclass(frozen=True)
class SylvesterDecomposition:
    """A power-sum decomposition p(x) ~ sum_j weights[j] (nodes[j] - x)^degree.

    ``residual`` is the absolute error on the held-out top power-sum
    equation; ``weight_sum`` should match ``target`` (E[Delta^{2k}] for the
    discriminant mode, exact reproduction for the translated-moment mode).
    A large residual is a reported outcome (complex-node systems can be
    inconsistent beyond the leading coefficient), not an exception.
    """

    mode: str
    degree: int
    poly: Poly
    nodes: tuple[complex, ...]
    weights: tuple[complex, ...]
    weight_sum: complex
    target: Optional[Fraction]
    residual: float
    consistent: bool


def sylvester_decompose(
    F: MomentFunctional,
    n: int,
    k: int = 1,
    mode: str = "discriminant",
    tol: float = 1e-8,
    residual_tol: float = 1e-6,
) -> SylvesterDecomposition:
    """Sylvester-style decompositions attached to the main law.

    mode='discriminant': decompose p_{n,k} over the roots of the translated
    moment polynomial A_m, m = n(2k-1): solve the power sums
    sum_j c_j r_j^p = b_p for p = 0..m-1 and verify the held-out p = m
    equation; the weight sum equals E[Delta(X_1..X_n)^{2k}] (cross-checked
    against the expansion oracle).

    mode='appel' (the k' = 1 classical case): decompose A_{2n-1} over the
    roots of the degree-n orthogonal polynomial with Christoffel-number
    weights; this decomposition is exact and reproduces Gauss quadrature.
    """
    if mode == "appel":
        m = 2 * n - 1
        rec = recurrence_coeffs(F, n)
        pn = rec["polys"][n]
        rt = poly_roots(pn, tol)
        if not rt["all_simple"]:
            raise DegenerateError("orthogonal polynomial has multiple roots")
        nodes = rt["roots"]
        V = np.array([[node**p for node in nodes] for p in range(n)], dtype=complex)
        rhs = np.array([float(F.moment(0, p)) for p in range(n)], dtype=complex)
        weights = np.linalg.solve(V, rhs)
        a_poly = translated_moment_poly(F, m)
        # residual: worst coefficient error of A_{2n-1}(x) - sum c_j (r_j - x)^{2n-1}
        resid = 0.0
        for h in range(m + 1):
            decomp_coeff = sum(
                w * math.comb(m, h) * (-1) ** h * node ** (m - h)
                for w, node in zip(weights, nodes)
            )
            want = float(a_poly[h]) if h < len(a_poly) else 0.0
            resid = max(resid, abs(decomp_coeff - want))
        wsum = complex(sum(weights))
        return SylvesterDecomposition(
            "appel", m, a_poly, tuple(nodes), tuple(complex(w) for w in weights),
            wsum, Fraction(1), resid, resid <= residual_tol,
        )

    if mode != "discriminant":
        raise OrthopolyError("mode must be 'discriminant' or 'appel'")
    m = n * (2 * k - 1)
    pnk = discriminant_product_poly(F, n, k)
    a_m = translated_moment_poly(F, m)
    rt = poly_roots(a_m, tol)
    if not rt["all_simple"]:
        raise DegenerateError("A_m has (numerically) multiple roots")
    nodes = rt["roots"]
    # b_p from the binomial coefficient convention p(x) = sum_h C(m,h)(-1)^h b_{m-h} x^h
    b = [Fraction(0)] * (m + 1)
    for h in range(m + 1):
        c_h = pnk[h] if h < len(pnk) else Fraction(0)
        b[m - h] = c_h * (-1) ** h / math.comb(m, h)
    M = np.array([[node**p for node in nodes] for p in range(m)], dtype=complex)
    rhs = np.array([float(x) for x in b[:m]], dtype=complex)
    weights = np.linalg.solve(M, rhs)
    top = sum(w * node**m for w, node in zip(weights, nodes))
    residual = abs(top - float(b[m]))
    target = discriminant_moment(F, n, k, method="expansion")
    wsum = complex(sum(weights))
    return SylvesterDecomposition(
        "discriminant", m, pnk, tuple(nodes), tuple(complex(w) for w in weights),
        wsum, target, residual, residual <= residual_tol,
    )
