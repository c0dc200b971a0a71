"""Spectral calculus on uniform periodic grids over the unit 3-torus.

All fields live on an n x n x n uniform grid covering [0, 2*pi)^3, with
grid point (i1, i2, i3) at x = 2*pi/n * (i1, i2, i3).  Arrays carry the
three grid axes first; any remaining trailing axes hold tensor/matrix
components.  Differentiation is FFT-based and therefore exact (to
rounding) for trigonometric polynomials of per-axis degree < n/2.

The module also provides the momentum-space quadrature used by the
asymptotic coefficient routines: integration over the unit ball of a
covariantly defined quadratic form, normalised by (2*pi)^-3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EllipticityError, InputError

TWO_PI = 2.0 * np.pi
VOLUME = TWO_PI**3


@dataclass(frozen=True)
class PeriodicChart:
    """Uniform n^3 sampling of the torus [0, 2*pi)^3.

    n must be even (so mode pairing under conjugation is clean) and at
    least 4 (anything smaller cannot carry a nontrivial band-limited
    field).
    """

    n: int

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise InputError(f"grid size must be even and >= 4, got {self.n}")

    def axis_coordinates(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    def mesh(self):
        """Return the three coordinate arrays, each of shape (n, n, n)."""
        x = self.axis_coordinates()
        return np.meshgrid(x, x, x, indexing="ij")

    def spacing(self) -> float:
        return TWO_PI / self.n


def chart_of(values: np.ndarray) -> PeriodicChart:
    """Recover the chart from the leading three axes of a field array."""
    if values.ndim < 3 or len({values.shape[0], values.shape[1], values.shape[2]}) != 1:
        raise InputError(f"field must have three equal leading grid axes, got shape {values.shape}")
    return PeriodicChart(values.shape[0])


def _integer_modes(n: int) -> np.ndarray:
    # FFT bin -> signed integer mode, in FFT storage order.
    return np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)


def spectral_derivative(values: np.ndarray, axis: int) -> np.ndarray:
    """Differentiate a periodic grid field along coordinate axis 1, 2 or 3.

    Parameters
    ----------
    values : ndarray
        Field samples, grid axes first.  Real or complex; trailing
        component axes are differentiated entrywise.
    axis : int
        Coordinate direction, 1-based.

    Returns
    -------
    ndarray of the same shape.  Real input yields real output.  The
    Nyquist mode is annihilated, the standard choice that keeps the
    derivative of a real field real; band-limited fields never populate
    it so the derivative is exact for them.
    """
    if axis not in (1, 2, 3):
        raise InputError(f"axis must be 1, 2 or 3, got {axis}")
    n = chart_of(values).n
    ax = axis - 1
    fh = np.fft.fft(values, axis=ax)
    mult = 1j * _integer_modes(n)
    mult[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[ax] = n
    out = np.fft.ifft(fh * mult.reshape(shape), axis=ax)
    if np.isrealobj(values):
        return out.real
    return out


def derivative_stack(values: np.ndarray) -> np.ndarray:
    """All three coordinate derivatives, stacked on a new axis at position 3.

    Output shape: (n, n, n, 3, *component_shape); index 3 is the
    differentiation direction.
    """
    return np.stack([spectral_derivative(values, ax) for ax in (1, 2, 3)], axis=3)


def fourier_modes(values: np.ndarray, drop_tol: float = 0.0) -> dict:
    """Fourier coefficients of a scalar grid field.

    Returns a map from integer mode vector (m1, m2, m3) to the complex
    coefficient c_m in f(x) = sum_m c_m exp(i m.x).  Coefficients with
    modulus <= drop_tol are omitted (drop_tol=0 keeps the full set).
    """
    if values.ndim != 3:
        raise InputError("fourier_modes expects a scalar field (three grid axes)")
    n = chart_of(values).n
    coefs = np.fft.fftn(values) / values.size
    modes = _integer_modes(n)
    out = {}
    for i1 in range(n):
        for i2 in range(n):
            for i3 in range(n):
                c = coefs[i1, i2, i3]
                if abs(c) > drop_tol or drop_tol == 0.0:
                    out[(int(modes[i1]), int(modes[i2]), int(modes[i3]))] = complex(c)
    return out


def field_from_modes(modes: dict, n: int) -> np.ndarray:
    """Inverse of fourier_modes: synthesise grid samples from a mode map."""
    chart = PeriodicChart(n)
    coefs = np.zeros((n, n, n), dtype=complex)
    half = n // 2
    for m, c in modes.items():
        if any(not (-half <= mi < half) and not (mi == half) for mi in m):
            raise InputError(f"mode {m} is not representable on an n={n} grid")
        coefs[m[0] % n, m[1] % n, m[2] % n] += c
    del chart
    return np.fft.ifftn(coefs) * n**3


def grid_integral(values: np.ndarray):
    """Integral over the torus: periodic trapezoid = grid mean * (2*pi)^3.

    Scalar fields give a scalar; trailing component axes are kept.
    """
    n3 = values.shape[0] * values.shape[1] * values.shape[2]
    total = values.reshape(n3, *values.shape[3:]).mean(axis=0) * VOLUME
    return total


class TrigInterpolant:
    """Evaluate a grid field anywhere on the torus by trigonometric mode sum.

    The interpolant agrees with the samples at grid points and is the
    unique band-limited representative (Nyquist content split evenly
    between +n/2 and -n/2 so real fields interpolate to real values).
    Small coefficients are pruned for speed; prune_tol=0 keeps all.
    """

    def __init__(self, values: np.ndarray, prune_tol: float = 1e-15):
        n = chart_of(values).n
        self.value_shape = values.shape[3:]
        self.real_input = np.isrealobj(values)
        coefs = np.fft.fftn(values, axes=(0, 1, 2)) / n**3
        modes = _integer_modes(n)
        m1, m2, m3 = np.meshgrid(modes, modes, modes, indexing="ij")
        mvec = np.stack([m1.ravel(), m2.ravel(), m3.ravel()], axis=1).astype(float)
        cflat = coefs.reshape(n**3, *self.value_shape)
        mags = np.abs(cflat).reshape(n**3, -1).max(axis=1)
        keep = mags > prune_tol
        mvec, cflat = mvec[keep], cflat[keep]
        # Split Nyquist-bin content between the two aliased partners.
        nyq = np.any(mvec == -(n // 2), axis=1)
        if np.any(nyq):
            extra_m, extra_c = [], []
            for m, c in zip(mvec[nyq], cflat[nyq]):
                partners = [m.copy()]
                for ax in range(3):
                    if m[ax] == -(n // 2):
                        partners = [p for q in partners for p in (q, _flip(q, ax, n))]
                w = 1.0 / len(partners)
                for p in partners:
                    extra_m.append(p)
                    extra_c.append(c * w)
            mvec = np.concatenate([mvec[~nyq], np.array(extra_m)], axis=0)
            cflat = np.concatenate([cflat[~nyq], np.array(extra_c)], axis=0)
        self.modes = mvec
        self.coefs = cflat

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        pts = np.atleast_2d(points)
        phases = np.exp(1j * pts @ self.modes.T)  # (npts, nmodes)
        vals = np.tensordot(phases, self.coefs, axes=(1, 0))
        if self.real_input:
            vals = vals.real
        if single:
            return vals[0]
        return vals.reshape(points.shape[:-1] + self.value_shape)


def _flip(m: np.ndarray, ax: int, n: int) -> np.ndarray:
    out = m.copy()
    out[ax] = n // 2
    return out


# ---------------------------------------------------------------------------
# momentum-space quadrature
# ---------------------------------------------------------------------------

def sphere_rule(degree: int = 17):
    """Quadrature on the unit sphere exact for harmonics up to `degree`.

    Product construction: Gauss-Legendre in cos(theta) times uniform
    angles in phi.  Returns (points, weights) with weights summing to
    4*pi.
    """
    if degree < 1:
        raise InputError("sphere rule degree must be positive")
    n_theta = (degree + 2) // 2
    n_phi = degree + 1
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    phi = TWO_PI * np.arange(n_phi) / n_phi
    s = np.sqrt(1.0 - u**2)
    pts = np.empty((n_theta * n_phi, 3))
    pts[:, 0] = np.outer(s, np.cos(phi)).ravel()
    pts[:, 1] = np.outer(s, np.sin(phi)).ravel()
    pts[:, 2] = np.outer(u, np.ones(n_phi)).ravel()
    w = np.outer(wu, np.full(n_phi, TWO_PI / n_phi)).ravel()
    return pts, w


def radial_rule(n_nodes: int = 32):
    """Gauss-Legendre nodes/weights for integrals over [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def sphere_design_14():
    """Weighted 14-point rule on the sphere, exact through degree 5.

    Octahedron vertices carry 2/5 of the total weight, cube vertices
    the remaining 3/5; weights sum to 4*pi.  A cheap rule for smooth
    integrands with low angular degree.
    """
    oct_pts = np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float
    )
    c = 1.0 / np.sqrt(3.0)
    cube_pts = c * np.array(
        [[sx, sy, sz] for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)], dtype=float
    )
    pts = np.concatenate([oct_pts, cube_pts], axis=0)
    w = np.concatenate(
        [np.full(6, 0.4 * 2.0 * TWO_PI / 6.0), np.full(8, 0.6 * 2.0 * TWO_PI / 8.0)]
    )
    return pts, w


def metric_ball_map(g_contra: np.ndarray) -> tuple[np.ndarray, float]:
    """Linear map sending the Euclidean unit ball onto {xi : g(xi, xi) <= 1}.

    Returns (A, jac) where xi = A @ u and jac = det A = sqrt(det g_cov)
    is the constant Jacobian.  A is the principal (symmetric positive)
    square root of the covariant metric.
    """
    g = np.asarray(g_contra, dtype=float)
    w, v = np.linalg.eigh(g)
    if np.any(w <= 0.0):
        raise EllipticityError(f"metric is not positive definite, eigenvalues {w}")
    a = (v * (1.0 / np.sqrt(w))) @ v.T  # g_contra^(-1/2) = sqrt(g_cov)
    return a, float(1.0 / np.sqrt(np.prod(w)))


def fiber_ball_quadrature(
    g_contra: np.ndarray,
    integrand,
    n_radial: int = 32,
    sphere_degree: int = 17,
    rule=None,
):
    """Integrate over the covector ball g(xi, xi) < 1 against (2*pi)^-3 dxi.

    Parameters
    ----------
    g_contra : (3, 3) ndarray
        Contravariant metric at the base point; must be symmetric
        positive definite.
    integrand : callable
        Vectorised map taking an (N, 3) array of covectors to an (N,)
        array of values.
    n_radial, sphere_degree : int
        Resolution of the radial Gauss-Legendre rule and the spherical
        rule.  The defaults integrate p(xi) * (g(xi,xi))^(-k/2) exactly
        for polynomial degree <= 6 and k <= 3 (continuous integrands).
    rule : (points, weights), optional
        Explicit spherical rule overriding sphere_degree, e.g.
        sphere_design_14() for cheap low-degree integrands.

    Returns the quadrature value (float for real integrands).
    """
    amap, jac = metric_ball_map(g_contra)
    upts, uw = rule if rule is not None else sphere_rule(sphere_degree)
    r, rw = radial_rule(n_radial)
    dirs = upts @ amap.T  # rows: A @ u
    xi = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    vals = np.asarray(integrand(xi)).reshape(len(r), len(upts))
    weights = (rw * r**2)[:, None] * uw[None, :]
    return (weights * vals).sum() * jac / VOLUME


# ---------------------------------------------------------------------------
# small matrix-field helpers used across modules
# ---------------------------------------------------------------------------

def hermitian_residual(field: np.ndarray) -> float:
    """Max entrywise deviation of a (..., k, k) matrix field from Hermitian."""
    return float(np.abs(field - np.conj(np.swapaxes(field, -1, -2))).max())


def frobenius_max(field: np.ndarray) -> float:
    """Max over the grid of the entrywise modulus."""
    return float(np.abs(field).max())
