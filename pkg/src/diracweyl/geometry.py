"""Geometry encoded in 2x2 elliptic principal symbols on the 3-torus.

A trace-free Hermitian symbol that is linear in the covector determines,
pointwise, an orthonormal frame, a Riemannian metric, an orientation
sign, and a metric-compatible flat connection whose torsion carries all
the remaining local information.  This module decodes those objects
from grid samples of the symbol and provides the associated tensor
calculus (connection coefficients, torsion in several equivalent
computational routes, Hodge duality).

Index conventions: frames are stored as e[..., j, alpha] with j the
orthonormal-leg label and alpha the coordinate index (vectors);
coframes as c[..., k, beta] (covectors).  Torsion T[..., a, b, c]
means T^a_{bc}; the dual torsion star_T[..., a, b] means (*T)^a_b.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, EllipticityError, InputError
from .fields import (
    TrigInterpolant,
    chart_of,
    derivative_stack,
    hermitian_residual,
    spectral_derivative,
)

# Standard Pauli matrices; the fixed fibre basis for all 2x2 symbols.
PAULI = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)

# Totally antisymmetric symbol, eps[0,1,2] = +1.
EPSILON = np.zeros((3, 3, 3))
for _i, _j, _k, _s in [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1),
                       (0, 2, 1, -1), (2, 1, 0, -1), (1, 0, 2, -1)]:
    EPSILON[_i, _j, _k] = _s

_FRAME_CONDITION_LIMIT = 1e8


def _det2(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


@dataclass(eq=False)
class PrincipalSymbolField:
    """Grid samples sigma[..., alpha, :, :] of the three symbol matrices.

    Validated on construction: each matrix Hermitian and trace-free,
    and the induced quadratic form elliptic at every grid point.
    """

    sigma: np.ndarray
    _interp: TrigInterpolant | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=complex)
        if s.ndim != 6 or s.shape[3:] != (3, 2, 2):
            raise InputError(f"symbol field must have shape (n, n, n, 3, 2, 2), got {s.shape}")
        chart_of(s)
        scale = max(1.0, float(np.abs(s).max()))
        if hermitian_residual(s) > 1e-13 * scale:
            raise InputError("symbol matrices must be Hermitian")
        if float(np.abs(s[..., 0, 0] + s[..., 1, 1]).max()) > 1e-13 * scale:
            raise InputError("symbol matrices must be trace-free")
        self.sigma = s
        _check_ellipticity(_metric_from_sigma(s))

    @property
    def chart(self):
        return chart_of(self.sigma)

    def interpolant(self) -> TrigInterpolant:
        """Band-limited evaluator for off-grid points (cached)."""
        if self._interp is None:
            self._interp = TrigInterpolant(self.sigma)
        return self._interp

    def at(self, point: np.ndarray) -> np.ndarray:
        """The three symbol matrices at an arbitrary point, shape (3, 2, 2)."""
        out = self.interpolant()(np.asarray(point, dtype=float))
        return out


@dataclass(eq=False)
class FrameField:
    """Orthonormal frame samples e[..., j, alpha] (rows = legs)."""

    e: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.e, dtype=float)
        if e.ndim != 5 or e.shape[3:] != (3, 3):
            raise InputError(f"frame field must have shape (n, n, n, 3, 3), got {e.shape}")
        chart_of(e)
        if not np.all(np.isfinite(e)):
            raise InputError("frame field contains non-finite entries")
        self.e = e

    @property
    def chart(self):
        return chart_of(self.e)

    def orientation(self) -> int:
        """Sign of det e, checked to be uniform across the grid."""
        d = np.linalg.det(self.e)
        if np.any(np.abs(d) < 1e-14):
            idx = np.unravel_index(np.argmin(np.abs(d)), d.shape)
            raise EllipticityError(f"frame degenerates at grid point {idx}")
        signs = np.sign(d)
        if signs.min() != signs.max():
            raise ConsistencyError("frame orientation changes sign across the grid")
        return int(signs.flat[0])


@dataclass(eq=False)
class CoframeField:
    """Dual coframe samples c[..., k, beta] with <e_j, c^k> = delta."""

    c: np.ndarray


@dataclass(eq=False)
class MetricField:
    """Contravariant/covariant metric samples plus the Riemannian density."""

    g_contra: np.ndarray
    g_cov: np.ndarray = None
    vol: np.ndarray = None  # sqrt(det g_cov)

    def __post_init__(self):
        g = np.asarray(self.g_contra, dtype=float)
        if g.ndim != 5 or g.shape[3:] != (3, 3):
            raise InputError(f"metric field must have shape (n, n, n, 3, 3), got {g.shape}")
        if float(np.abs(g - np.swapaxes(g, -1, -2)).max()) > 1e-12:
            raise InputError("metric must be symmetric")
        _check_ellipticity(g)
        self.g_contra = g
        if self.g_cov is None:
            self.g_cov = np.linalg.inv(g)
        if self.vol is None:
            self.vol = np.sqrt(np.linalg.det(self.g_cov))


@dataclass(eq=False)
class TorsionBundle:
    """Torsion of the frame connection and its duals.

    T[..., a, b, c] = T^a_{bc}; star_T[..., a, b] = (*T)^a_b;
    axial_dual is the scalar *T_ax = (1/3) (*T)^g_g; charge is the
    orientation sign of the generating frame.  route_residuals records
    the largest disagreement between the independent computation routes
    that were cross-checked while building the bundle.
    """

    T: np.ndarray
    star_T: np.ndarray
    axial_dual: np.ndarray
    charge: int
    route_residuals: dict = field(default_factory=dict)


def _metric_from_sigma(sigma: np.ndarray) -> np.ndarray:
    """Contravariant metric from the symbol determinant, by polarisation.

    det(sigma . xi) = -g(xi, xi) fixes g; polarising in the three basis
    covectors gives g^{ab} = -(det(s^a + s^b) - det s^a - det s^b)/2.
    """
    d = _det2(sigma)  # (..., 3)
    pair = _det2(sigma[..., :, None, :, :] + sigma[..., None, :, :, :])  # (..., 3, 3)
    g = -0.5 * (pair - d[..., :, None] - d[..., None, :])
    if float(np.abs(g.imag).max()) > 1e-11:
        raise ConsistencyError("decoded metric has a non-real part; symbol is not Hermitian enough")
    return g.real


def _check_ellipticity(g_contra: np.ndarray):
    w = np.linalg.eigvalsh(g_contra)
    if np.any(w[..., 0] <= 0.0):
        idx = np.unravel_index(np.argmin(w[..., 0]), w[..., 0].shape)
        raise EllipticityError(f"symbol fails ellipticity at grid point {idx}")
    cond = np.sqrt(float((w[..., 2] / w[..., 0]).max()))
    if cond > _FRAME_CONDITION_LIMIT:
        raise EllipticityError(
            f"frame condition number {cond:.3e} exceeds limit {_FRAME_CONDITION_LIMIT:.0e}"
        )


def symbol_from_frame(frame: FrameField | np.ndarray) -> PrincipalSymbolField:
    """Assemble sigma^alpha = s^j e_j^alpha from an orthonormal frame."""
    e = frame.e if isinstance(frame, FrameField) else np.asarray(frame, dtype=float)
    sigma = np.einsum("jpq,...ja->...apq", PAULI, e)
    return PrincipalSymbolField(sigma)


def decode_frame(sym: PrincipalSymbolField) -> FrameField:
    """Read the frame off the symbol entries.

    Leg 1 and 2 are the real and negated imaginary parts of the
    off-diagonal entry, leg 3 the upper diagonal entry; this inverts
    symbol_from_frame exactly.
    """
    s = sym.sigma
    e = np.empty(s.shape[:4] + (3,), dtype=float)
    e[..., 0, :] = s[..., :, 0, 1].real
    e[..., 1, :] = -s[..., :, 0, 1].imag
    e[..., 2, :] = s[..., :, 0, 0].real
    fr = FrameField(e)
    fr.orientation()  # force the degeneracy check
    return fr


def decode_metric(sym: PrincipalSymbolField) -> MetricField:
    """Riemannian metric defined by the symbol determinant."""
    return MetricField(_metric_from_sigma(sym.sigma))


def metric_from_frame(frame: FrameField) -> MetricField:
    """g^{ab} = delta^{jk} e_j^a e_k^b; equals decode_metric on the
    corresponding symbol up to rounding."""
    g = np.einsum("...ja,...jb->...ab", frame.e, frame.e)
    return MetricField(g)


def topological_charge(sym: PrincipalSymbolField) -> int:
    """Orientation invariant of the symbol, +1 or -1.

    Computed two ways and cross-checked: as the normalised fibre
    determinant -(i/2) sqrt(det g_cov) tr(s^1 s^2 s^3), and as the sign
    of the frame determinant.  Both must be constant across the grid.
    """
    frame = decode_frame(sym)
    metric = decode_metric(sym)
    s = sym.sigma
    trip = np.einsum(
        "...pq,...qr,...rp->...", s[..., 0, :, :], s[..., 1, :, :], s[..., 2, :, :]
    )
    c_field = (-0.5j * metric.vol * trip).real
    c_imag = float(np.abs((-0.5j * metric.vol * trip).imag).max())
    if c_imag > 1e-10:
        raise ConsistencyError(f"charge formula gave a non-real value (imag {c_imag:.2e})")
    c0 = int(np.rint(c_field.flat[0]))
    if c0 not in (-1, 1):
        raise ConsistencyError(f"charge {c_field.flat[0]!r} is not a unit")
    if float(np.abs(c_field - c0).max()) > 1e-6:
        idx = np.unravel_index(np.argmax(np.abs(c_field - c0)), c_field.shape)
        raise ConsistencyError(f"charge is not constant across the grid (worst point {idx})")
    if frame.orientation() != c0:
        raise ConsistencyError("fibre-determinant charge disagrees with frame orientation")
    return c0


def orthonormalize_frame(e: np.ndarray, g_cov: np.ndarray | None = None) -> FrameField:
    """Gram-Schmidt the frame legs, in the given metric (Euclidean default).

    Explicitly opt-in: decoding never orthonormalises behind the
    caller's back.  Rows are processed in order 1, 2, 3.
    """
    e = np.asarray(e, dtype=float).copy()
    if g_cov is None:
        def dot(a, b):
            return np.einsum("...a,...a->...", a, b)
    else:
        def dot(a, b):
            return np.einsum("...a,...ab,...b->...", a, g_cov, b)
    for j in range(3):
        v = e[..., j, :]
        for k in range(j):
            v = v - dot(v, e[..., k, :])[..., None] * e[..., k, :]
        nrm = np.sqrt(dot(v, v))
        if np.any(nrm < 1e-12):
            raise EllipticityError("frame legs are linearly dependent; cannot orthonormalise")
        e[..., j, :] = v / nrm[..., None]
    return FrameField(e)


def coframe(frame: FrameField, metric: MetricField) -> CoframeField:
    """Metric-dual coframe c^k_b = delta^{kj} g_{bc} e_j^c."""
    c = np.einsum("...bc,...kc->...kb", metric.g_cov, frame.e)
    gap = np.abs(np.einsum("...ja,...ka->...jk", frame.e, c) - np.eye(3)).max()
    if gap > 1e-10:
        raise ConsistencyError(f"frame/coframe duality violated by {gap:.2e}")
    return CoframeField(c)


def christoffel_symbols(metric: MetricField) -> np.ndarray:
    """Levi-Civita connection coefficients G[..., b, a, c] (upper, lower, lower)."""
    dg = derivative_stack(metric.g_cov)  # [..., mu, alpha, beta]
    s = dg + dg.transpose(0, 1, 2, 4, 3, 5) - dg.transpose(0, 1, 2, 5, 3, 4)
    return 0.5 * np.einsum("...bd,...acd->...bac", metric.g_contra, s)


def teleparallel_coefficients(frame: FrameField, metric: MetricField) -> np.ndarray:
    """Connection G[..., a, mu, b] = e_k^a d_mu c^k_b making the frame parallel.

    The defining property nabla_mu e_j = 0 holds by duality; the
    connection is metric compatible with vanishing curvature.
    """
    cof = coframe(frame, metric).c
    dcof = derivative_stack(cof)  # [..., mu, k, b]
    return np.einsum("...ka,...mkb->...amb", frame.e, dcof)


def torsion_from_connection(gamma: np.ndarray) -> np.ndarray:
    """T^a_{bc} as the antisymmetric part of the connection coefficients."""
    return gamma - gamma.transpose(0, 1, 2, 3, 5, 4)


def torsion_from_coframe(frame: FrameField, metric: MetricField) -> np.ndarray:
    """T^a_{bc} = e_j^a (d_b c^j_c - d_c c^j_b), bypassing the connection."""
    cof = coframe(frame, metric).c
    dcof = derivative_stack(cof)
    return np.einsum("...ja,...bjc->...abc", frame.e, dcof) - np.einsum(
        "...ja,...cjb->...abc", frame.e, dcof
    )


def star_torsion_from_curl(frame: FrameField, metric: MetricField) -> np.ndarray:
    """(*T)^a_b as sum_j e_j (x) curl c^j, with the metric curl of a covector."""
    cof = coframe(frame, metric).c
    dcof = derivative_stack(cof)
    dform = np.einsum("...cjd->...jcd", dcof) - np.einsum("...djc->...jcd", dcof)
    raised = np.einsum("...jcd,...ce,...df->...jef", dform, metric.g_contra, metric.g_contra)
    curl = 0.5 * np.einsum("...jef,efb->...jb", raised, EPSILON) * metric.vol[..., None, None]
    return np.einsum("...ja,...jb->...ab", frame.e, curl)


def axial_dual_from_coframe(frame: FrameField, metric: MetricField) -> np.ndarray:
    """Scalar dual of the axial torsion part, directly from coframe derivatives.

    *T_ax = (1/3) sqrt(det g_contra) * eps^{bmc} sum_k c^k_b d_mu c^k_c
    written out; an independent check on the trace of (*T)^a_b.
    """
    cof = coframe(frame, metric).c
    dcof = derivative_stack(cof)
    contraction = np.einsum("bmc,...kb,...mkc->...", EPSILON, cof, dcof)
    return contraction / (3.0 * metric.vol)


def torsion(frame: FrameField, metric: MetricField) -> TorsionBundle:
    """Torsion of the frame connection, with all routes cross-checked.

    Computes the tensor from the connection and from coframe exterior
    derivatives, the dual from the Hodge definition and from the curl
    formula, and the axial scalar from the dual trace and from the
    explicit coframe expression.  Any disagreement beyond 1e-10 (on
    O(1) fields) raises ConsistencyError.
    """
    gamma = teleparallel_coefficients(frame, metric)
    t1 = torsion_from_connection(gamma)
    t2 = torsion_from_coframe(frame, metric)
    scale = max(1.0, float(np.abs(t1).max()))
    gap_t = float(np.abs(t1 - t2).max())
    if gap_t > 1e-10 * scale:
        raise ConsistencyError("torsion routes (connection vs coframe) disagree")

    raised = np.einsum("...acd,...ce,...df->...aef", t1, metric.g_contra, metric.g_contra)
    star1 = 0.5 * np.einsum("...aef,efb->...ab", raised, EPSILON) * metric.vol[..., None, None]
    star2 = star_torsion_from_curl(frame, metric)
    gap_star = float(np.abs(star1 - star2).max())
    if gap_star > 1e-10 * scale:
        raise ConsistencyError("dual torsion routes (Hodge vs curl) disagree")

    ax1 = np.einsum("...aa->...", star1) / 3.0
    ax2 = axial_dual_from_coframe(frame, metric)
    gap_ax = float(np.abs(ax1 - ax2).max())
    if gap_ax > 1e-10 * scale:
        raise ConsistencyError("axial dual routes (trace vs coframe formula) disagree")

    residuals = {
        "connection_vs_coframe": gap_t,
        "hodge_vs_curl": gap_star,
        "trace_vs_coframe_axial": gap_ax,
    }
    return TorsionBundle(
        T=t1,
        star_T=star1,
        axial_dual=ax1,
        charge=frame.orientation(),
        route_residuals=residuals,
    )


def hodge_star(metric: MetricField, values: np.ndarray, q: int) -> np.ndarray:
    """Hodge dual of an antisymmetric covariant q-tensor field, q in 0..3.

    Indices are raised with the metric before contraction with the
    permutation symbol; the output carries the complementary (3-q)
    covariant indices.  On a 3-torus the double dual is the identity on
    every rank.
    """
    if q not in (0, 1, 2, 3):
        raise InputError(f"form degree must be 0..3, got {q}")
    vol = metric.vol
    g = metric.g_contra
    expected = values.ndim - 3
    if expected != q:
        raise InputError(f"rank-{q} form must carry {q} component axes, got {expected}")
    if q == 0:
        return np.einsum("...,abc->...abc", values * vol, EPSILON)
    if q == 1:
        vr = np.einsum("...ab,...b->...a", g, values)
        return np.einsum("...a,abc->...bc", vr, EPSILON) * vol[..., None, None]
    _check_antisymmetric(values, q)
    if q == 2:
        vr = np.einsum("...ac,...bd,...cd->...ab", g, g, values)
        return 0.5 * np.einsum("...ab,abc->...c", vr, EPSILON) * vol[..., None]
    vr = np.einsum("...ad,...be,...cf,...def->...abc", g, g, g, values)
    return np.einsum("...abc,abc->...", vr, EPSILON) * vol / 6.0


def _check_antisymmetric(values: np.ndarray, q: int):
    if q == 2:
        gap = float(np.abs(values + np.swapaxes(values, -1, -2)).max())
    else:
        gap = max(
            float(np.abs(values + values.transpose(0, 1, 2, 3, 5, 4)).max()),
            float(np.abs(values + values.transpose(0, 1, 2, 4, 3, 5)).max()),
        )
    scale = max(1.0, float(np.abs(values).max()))
    if gap > 1e-12 * scale:
        raise InputError("form field is not antisymmetric")


def parallel_transport(
    sym: PrincipalSymbolField,
    xi: np.ndarray,
    from_point: np.ndarray,
    to_point: np.ndarray,
) -> np.ndarray:
    """Transport a covector so the symbol matrix is preserved exactly.

    Solves sigma(to) . xi_new = sigma(from) . xi for xi_new; in frame
    components this is one 3x3 linear solve, and the result is
    path independent because the transporting connection is flat.
    """
    xi = np.asarray(xi, dtype=float)
    s_from = sym.at(from_point)
    s_to = sym.at(to_point)

    def frame_rows(smat):
        e = np.empty((3, 3))
        e[0] = smat[:, 0, 1].real
        e[1] = -smat[:, 0, 1].imag
        e[2] = smat[:, 0, 0].real
        return e

    m_from = frame_rows(s_from)
    m_to = frame_rows(s_to)
    if np.linalg.cond(m_to) > _FRAME_CONDITION_LIMIT:
        raise EllipticityError("frame at the target point is too ill-conditioned to invert")
    return np.linalg.solve(m_to, m_from @ xi)
