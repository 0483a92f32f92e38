"""Numeric grounding: realizations, controllability matrices, the
Gordan-alternative feasibility test and preimage construction.

The feasibility core decides between a vector x with Cx >= 1 (normalized
strict positivity, scale invariant) and a dual certificate y >= 0 with
C^T y = 0 and sum(y) = 1.  Exactly one branch is returned; both carry a
residual check at the requested tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .system import InputMode, Sign, StructuredSystem

DEFAULT_SCHEME = (1.0, 10.0, 0.1)
FEASIBILITY_TOL = 1e-9
PIVOT_TOL = 1e-12


class NumericError(RuntimeError):
    """Conditioning or iteration failure, distinct from infeasibility."""


@dataclass(frozen=True)
class Realization:
    A: np.ndarray
    B: np.ndarray
    scheme: tuple[float, float, float]  # (d, hi, lo) with lo < d < hi


@dataclass(frozen=True)
class HerdabilityResult:
    feasible: bool
    x: np.ndarray | None  # preimage with Cx >= 1 - tol, when feasible
    v: np.ndarray | None  # image Cx
    y: np.ndarray | None  # dual certificate, when infeasible
    tol: float

    @property
    def outcome(self) -> str:
        return "Feasible" if self.feasible else "Infeasible"


@dataclass(frozen=True)
class DeltaVector:
    delta: np.ndarray
    construction: str  # Layered | ZeroPadded | LpFallback
    image: np.ndarray  # C @ delta


def _check_scheme(scheme: tuple[float, float, float]) -> tuple[float, float, float]:
    d, hi, lo = scheme
    if not (0 < lo < d < hi):
        raise ValueError(f"scheme requires 0 < lo < d < hi, got (d={d}, hi={hi}, lo={lo})")
    return (float(d), float(hi), float(lo))


def matching_edge_set(cert) -> frozenset[tuple[int, int]]:
    """Graph edges lying on some kept walk that realizes a matched node.

    Backward closure from every node's matched occurrence through the kept
    per-layer edges down to the root.
    """
    kept_by_dst: dict[tuple[int, int], list[int]] = {}
    for src, dst, layer in cert.kept_edges:
        kept_by_dst.setdefault((dst, layer), []).append(src)
    needed: set[tuple[int, int]] = set()  # (node, layer) occurrences on match walks
    stack = [(node, layer) for node, layer in cert.matched_at.items()]
    seen = set(stack)
    while stack:
        node, layer = stack.pop()
        for src in kept_by_dst.get((node, layer), ()):
            if src != 0:
                needed.add((src, node))
                prev = (src, layer - 1)
                if prev not in seen:
                    seen.add(prev)
                    stack.append(prev)
    return frozenset(needed)


def realize(system: StructuredSystem, cert=None,
            scheme: tuple[float, float, float] = DEFAULT_SCHEME) -> Realization:
    """Weight the sign pattern; matching edges dominate when a certificate
    is given, otherwise explicit weights (default 1) are used."""
    d, hi, lo = _check_scheme(scheme)
    n, m = system.n, system.m
    A = np.zeros((n, n))
    if cert is not None:
        certs = cert if isinstance(cert, (list, tuple)) else [cert]
        matching: set[tuple[int, int]] = set()
        for c in certs:
            matching |= matching_edge_set(c)
        for e in system.edges:
            mag = hi if (e.src, e.dst) in matching else lo
            A[e.dst - 1, e.src - 1] = e.sign.value * mag
    else:
        for e in system.edges:
            mag = e.weight if e.weight is not None else 1.0
            A[e.dst - 1, e.src - 1] = e.sign.value * mag
    B = np.zeros((n, m))
    for idx, a in enumerate(system.inputs):
        col = idx if system.mode is InputMode.MULTI_DRIVER else 0
        strength = a.strength if a.strength is not None else 1.0
        B[a.node - 1, col] = a.sign.value * strength
    return Realization(A, B, (d, hi, lo))


def controllability_matrix(r: Realization) -> np.ndarray:
    """[Psi_0 | Psi_1 | ... | Psi_{n-1}] with Psi_k = A^k B, blocks m wide."""
    n, m = r.B.shape
    cols = np.empty((n, n * m))
    block = r.B
    for k in range(n):
        cols[:, k * m:(k + 1) * m] = block
        if k < n - 1:
            block = r.A @ block
    return cols


def _bland_simplex(A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: list[int],
                   max_iter: int = 20000) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Maximize c.x subject to A x = b, x >= 0 from the given feasible basis.

    Bland's smallest-index rule on both the entering and leaving choices
    guarantees termination despite heavy degeneracy.  Returns (x, duals,
    basis).  Raises NumericError on conditioning trouble.
    """
    m_rows, n_cols = A.shape
    basis = list(basis)
    for _ in range(max_iter):
        Bmat = A[:, basis]
        try:
            xb = np.linalg.solve(Bmat, b)
            duals = np.linalg.solve(Bmat.T, c[basis])
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"singular basis: {exc}") from exc
        reduced = c - duals @ A
        entering = -1
        for j in range(n_cols):
            if j not in basis and reduced[j] > FEASIBILITY_TOL:
                entering = j
                break
        if entering < 0:
            x = np.zeros(n_cols)
            x[basis] = xb
            return x, duals, basis
        direction = np.linalg.solve(Bmat, A[:, entering])
        leaving = -1
        best_ratio = np.inf
        for i in range(m_rows):
            if direction[i] > PIVOT_TOL:
                ratio = max(xb[i], 0.0) / direction[i]
                if ratio < best_ratio - PIVOT_TOL or (
                        abs(ratio - best_ratio) <= PIVOT_TOL
                        and (leaving < 0 or basis[i] < basis[leaving])):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            raise NumericError("unbounded direction in feasibility program")
        basis[leaving] = entering
    raise NumericError("simplex iteration limit reached")


def _equilibrate(C: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row and column scaling to unit max magnitude (powers of 2)."""
    row_norm = np.max(np.abs(C), axis=1)
    row_scale = np.where(row_norm > 0, 2.0 ** np.round(np.log2(row_norm)), 1.0)
    Cs = C / row_scale[:, None]
    col_norm = np.max(np.abs(Cs), axis=0)
    col_scale = np.where(col_norm > 0, 2.0 ** np.round(np.log2(col_norm)), 1.0)
    Cs = Cs / col_scale[None, :]
    return Cs, row_scale, col_scale


def _margin_program(Cs: np.ndarray, signed_cols: np.ndarray | None = None
                    ) -> tuple[float, np.ndarray, np.ndarray]:
    """Solve max t s.t. Cs x >= t 1, t <= 1 (x free, or sign-restricted).

    The optimum is 0 or 1 by scale invariance.  Returns (t, x, duals of the
    n cone rows).  When ``signed_cols`` is given, x is restricted to the
    orthant x_j * signed_cols_j >= 0 (entries 0 pin x_j = 0).
    """
    n, p = Cs.shape
    if signed_cols is None:
        var_blocks = [Cs, -Cs]
    else:
        D = np.diag(signed_cols.astype(float))
        var_blocks = [Cs @ D]
    width = sum(blk.shape[1] for blk in var_blocks)
    # Rows i (negated for an identity on the surplus block): -Cx + t 1 + s = 0
    # Row n: t + w = 1
    top = np.hstack([-blk for blk in var_blocks] + [np.ones((n, 1)), np.eye(n),
                                                    np.zeros((n, 1))])
    bottom = np.hstack([np.zeros((1, width)), np.ones((1, 1)), np.zeros((1, n)),
                        np.ones((1, 1))])
    A = np.vstack([top, bottom])
    b = np.zeros(n + 1)
    b[n] = 1.0
    c = np.zeros(width + 1 + n + 1)
    c[width] = 1.0  # maximize t
    basis = list(range(width + 1, width + 1 + n)) + [width + 1 + n]
    x_all, duals, _ = _bland_simplex(A, b, c, basis)
    t = x_all[width]
    if signed_cols is None:
        x = x_all[:p] - x_all[p:2 * p]
    else:
        x = signed_cols * x_all[:p]
    return t, x, duals[:n]


def herdable_numeric(C: np.ndarray, tol: float = FEASIBILITY_TOL) -> HerdabilityResult:
    """Gordan-alternative test: a preimage with Cx >= 1, or y >= 0 in the
    left null space with sum(y) = 1."""
    C = np.asarray(C, dtype=float)
    if not np.all(np.isfinite(C)):
        raise NumericError("controllability matrix has non-finite entries")
    Cs, row_scale, col_scale = _equilibrate(C)
    t, xs, duals = _margin_program(Cs)
    if t > 0.5:
        x = xs / col_scale
        v = C @ x
        lowest = float(np.min(v))
        if lowest <= 0:
            raise NumericError("feasible branch failed validation")
        x = x / lowest  # normalize so min(Cx) is 1 up to roundoff
        v = C @ x
        if np.min(v) < 1.0 - tol:
            raise NumericError("feasible branch failed validation")
        return HerdabilityResult(True, x, v, None, tol)
    y = np.maximum(duals, 0.0)
    total = float(np.sum(y))
    if total <= tol:
        raise NumericError("degenerate dual certificate")
    y = y / total
    residual = float(np.max(np.abs(Cs.T @ y)))
    if residual > tol:
        raise NumericError(f"dual certificate residual {residual:.3e} above tolerance")
    y_orig = np.maximum(y / row_scale, 0.0)
    y_orig = y_orig / np.sum(y_orig)
    return HerdabilityResult(False, None, None, y_orig, tol)


def _designated_columns(cert, m: int) -> dict[int, tuple[int, float]]:
    """node -> (0-based flat column, sign) from a certificate's matches."""
    out: dict[int, tuple[int, float]] = {}
    sigma_signs = []
    product = 1.0
    for s in cert.sigma:
        product *= s.value
        sigma_signs.append(product)
    for node, layer in cert.matched_at.items():
        col = (layer - 1) * m + (cert.driver - 1)
        out[node] = (col, sigma_signs[layer - 1])
    return out


def delta_construct(C: np.ndarray, cert, m: int = 1,
                    tol: float = FEASIBILITY_TOL, max_sweeps: int = 64) -> DeltaVector:
    """Preimage from a certificate: signs follow the per-layer matched sign,
    magnitudes by layer-ordered amplification with an LP fallback.

    Designated entries start at 1, undesignated at 0 (zero padding).  Any
    designated magnitude whose row-dominance inequality fails is doubled, up
    to ``max_sweeps`` sweeps; on stall the feasibility program restricted to
    the certificate's sign orthant decides.  The result is scaled so the
    image has minimum entry 1.
    """
    C = np.asarray(C, dtype=float)
    certs = cert if isinstance(cert, (list, tuple)) else [cert]
    n, total_cols = C.shape
    designation: dict[int, tuple[int, float]] = {}
    for c in certs:
        designation.update(_designated_columns(c, m))
    col_sign = np.zeros(total_cols)
    for node, (col, sign) in designation.items():
        if col_sign[col] not in (0.0, sign):
            col_sign[col] = 0.0  # conflicting designations: leave to the fallback
        else:
            col_sign[col] = sign
    delta = col_sign.copy()

    construction = "ZeroPadded" if np.any(col_sign == 0.0) else "Layered"
    converged = False
    if all(col_sign[col] == sign for _, (col, sign) in designation.items()):
        for _ in range(max_sweeps):
            stable = True
            for node, (col, _) in designation.items():
                row = C[node - 1]
                own = abs(delta[col] * row[col])
                rest = float(np.sum(np.abs(delta * row))) - own
                if own <= rest + tol:
                    delta[col] *= 2.0
                    stable = False
            if stable:
                converged = True
                break
        if converged:
            image = C @ delta
            if np.min(image) <= tol:
                converged = False
    if not converged:
        # Sign-orthant feasibility: columns with a designated sign keep it,
        # the rest stay at zero.
        Cs, row_scale, col_scale = _equilibrate(C)
        t, xs, _ = _margin_program(Cs, signed_cols=col_sign)
        if t <= 0.5:
            raise NumericError("certificate sign orthant numerically infeasible")
        delta = xs / col_scale
        construction = "LpFallback"
    image = C @ delta
    lowest = float(np.min(image))
    if lowest <= 0:
        raise NumericError("delta construction failed to produce a positive image")
    delta = delta / lowest
    image = C @ delta
    if np.min(image) < 1.0 - tol:
        raise NumericError("delta construction failed validation")
    return DeltaVector(delta, construction, image)


def iterative_herdable_set(C: np.ndarray, tol: float = FEASIBILITY_TOL) -> frozenset[int]:
    """Fixed point of single-column herding: a row joins once some column
    supports it with every other supported row already in the set."""
    C = np.asarray(C, dtype=float)
    scale = max(1.0, float(np.max(np.abs(C)))) if C.size else 1.0
    support = [set(np.nonzero(np.abs(C[:, j]) > tol * scale)[0] + 1)
               for j in range(C.shape[1])]
    herdable: set[int] = set()
    changed = True
    while changed:
        changed = False
        for sup in support:
            for i in sup:
                if i not in herdable and sup - {i} <= herdable:
                    herdable.add(i)
                    changed = True
    return frozenset(herdable)


def dilation_subvector_check(C: np.ndarray, rows: tuple[int, ...], p: int, p_plus_m: int,
                             m: int = 1, driver: int = 1,
                             tol: float = FEASIBILITY_TOL) -> bool:
    """Is the rows-indexed subvector of the column for layer p+m+1 a scalar
    multiple of the one for layer p+1?

    ``p`` and ``p_plus_m`` are occurrence layers of the dilation node itself;
    its out-neighbors sit one layer deeper, hence the +1 shift into column
    space.  ``rows`` must come from the layered graph (members of the
    dilation set reached solely through the node at both layers).
    """
    C = np.asarray(C, dtype=float)
    idx = [r - 1 for r in rows]
    col_a = p * m + (driver - 1)          # 0-based column of layer p+1
    col_b = p_plus_m * m + (driver - 1)   # 0-based column of layer p+m+1
    u = C[idx, col_a]
    v = C[idx, col_b]
    nu, nv = float(np.max(np.abs(u), initial=0.0)), float(np.max(np.abs(v), initial=0.0))
    if nv <= tol * max(1.0, nu):
        return True  # zero vector is 0 * u
    if nu <= tol * max(1.0, nv):
        return False
    k = int(np.argmax(np.abs(u)))
    alpha = v[k] / u[k]
    return bool(np.max(np.abs(v - alpha * u)) <= tol * max(1.0, abs(alpha)) * max(1.0, nu))


def random_realization(system: StructuredSystem, rng: np.random.Generator,
                       low: float = 1e-3, high: float = 1e3) -> Realization:
    """Log-uniform magnitudes on the fixed sign pattern."""
    n, m = system.n, system.m
    lo_exp, hi_exp = np.log10(low), np.log10(high)
    A = np.zeros((n, n))
    for e in system.edges:
        A[e.dst - 1, e.src - 1] = e.sign.value * 10.0 ** rng.uniform(lo_exp, hi_exp)
    B = np.zeros((n, m))
    for idx, a in enumerate(system.inputs):
        col = idx if system.mode is InputMode.MULTI_DRIVER else 0
        B[a.node - 1, col] = a.sign.value * 10.0 ** rng.uniform(lo_exp, hi_exp)
    return Realization(A, B, DEFAULT_SCHEME)


def oracle_ss_herdable(system: StructuredSystem, samples: int = 200, seed: int = 0,
                       certificates=()) -> str:
    """Empirical verdict: 'EmpiricallyHerdable' if any tested realization is
    feasible, else 'NoWitnessFound'.

    Tested realizations: the dominance-weighted one for each supplied
    certificate candidate (plus scheme escalations), the all-ones pattern,
    and ``samples`` log-uniform random-magnitude draws.  Deterministic given
    the seed.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    candidates: list[Realization] = []
    for cert in certificates:
        hi = DEFAULT_SCHEME[1]
        while hi <= 1e6:
            candidates.append(realize(system, cert, (DEFAULT_SCHEME[0], hi, 1.0 / hi)))
            hi *= 100
    candidates.append(realize(system))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        candidates.append(random_realization(system, rng))
    for r in candidates:
        try:
            result = herdable_numeric(controllability_matrix(r))
        except NumericError:
            continue  # an unverifiable sample is not a witness
        if result.feasible:
            return "EmpiricallyHerdable"
    return "NoWitnessFound"
