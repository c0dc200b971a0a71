"""Ready-made frames and operators used by the CLI and the test suite.

Each builder returns plain library objects (FrameField,
FirstOrderOperator, ...) on an n^3 periodic grid.  The named scenarios
are the ones the command-line tool accepts.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .fields import PeriodicChart
from .geometry import PAULI, FrameField, orthonormalize_frame
from .operators import FirstOrderOperator, GaugeField, dirac_operator

_DEFAULT_GRID = 16

# Largest perturbation for which Gram-Schmidt overtones still decay
# below the operator's 1e-10 self-adjointness gate on a 16^3 grid
# (overtone amplitude scales like the fourth power of this number).
_DEFAULT_AMPLITUDE = 0.003

SCENARIO_NAMES = (
    "standard-torus",
    "twisted-torus",
    "dirac-plus-scalar",
    "dirac-plus-traceless",
    "random-band-limited",
    "sphere",
)


def standard_frame(n: int = _DEFAULT_GRID) -> FrameField:
    """The constant coordinate frame on the flat torus."""
    e = np.zeros((n, n, n, 3, 3))
    for j in range(3):
        e[..., j, j] = 1.0
    return FrameField(e)


def twisted_frame(k3: int, n: int = _DEFAULT_GRID) -> FrameField:
    """Frame rotating k3 times about the third axis along x^3.

    The metric is still flat Euclidean but the frame is topologically
    twisted: for odd k3 the induced rotation field admits no global
    spin lift.
    """
    if int(k3) != k3:
        raise InputError("twist number k3 must be an integer")
    _, _, x3 = PeriodicChart(n).mesh()
    c, s = np.cos(k3 * x3), np.sin(k3 * x3)
    e = np.zeros((n, n, n, 3, 3))
    e[..., 0, 0] = c
    e[..., 0, 1] = s
    e[..., 1, 0] = -s
    e[..., 1, 1] = c
    e[..., 2, 2] = 1.0
    return FrameField(e)


def random_band_limited_frame(
    seed: int,
    n: int = _DEFAULT_GRID,
    amplitude: float = _DEFAULT_AMPLITUDE,
    max_mode: int = 2,
) -> FrameField:
    """Random orientation-preserving orthonormal frame, g = identity.

    Perturbs the identity by a random trigonometric polynomial with
    modes up to max_mode, then Gram-Schmidts the rows in the Euclidean
    inner product.  The rows stay exactly orthonormal pointwise (so the
    decoded metric is the identity); the frame itself is analytic but
    no longer strictly band-limited, so keep the amplitude moderate for
    spectrally-accurate derivatives on coarse grids.
    """
    if amplitude < 0.0 or amplitude >= 0.5:
        raise InputError("amplitude must lie in [0, 0.5) to keep the frame nondegenerate")
    rng = np.random.default_rng(seed)
    x1, x2, x3 = PeriodicChart(n).mesh()
    ms = [
        (m1, m2, m3)
        for m1 in range(-max_mode, max_mode + 1)
        for m2 in range(-max_mode, max_mode + 1)
        for m3 in range(-max_mode, max_mode + 1)
        if (m1, m2, m3) != (0, 0, 0)
    ]
    pert = np.zeros((n, n, n, 3, 3))
    for m in ms:
        phase = m[0] * x1 + m[1] * x2 + m[2] * x3
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3))
        pert += np.cos(phase)[..., None, None] * a + np.sin(phase)[..., None, None] * b
    peak = np.abs(pert).max()
    if peak > 0:
        pert *= amplitude / peak
    e = standard_frame(n).e + pert
    return orthonormalize_frame(e)


def random_gauge_field(seed: int, n: int = _DEFAULT_GRID, amplitude: float = 0.04) -> GaugeField:
    """Smooth random SU(2) field R = cos(t) - i sin(t) (u . s).

    The angle t and axis u are low-mode trigonometric polynomials, so R
    is analytic and pointwise exactly special unitary.  The axis is a
    perturbed constant direction to keep it nonvanishing.  Composing
    trigonometric functions leaves the analytic tail, not the grid, as
    the accuracy limit; the default amplitude keeps gauge-transformed
    operators inside the 1e-10 self-adjointness gate on a 16^3 grid.
    """
    rng = np.random.default_rng(seed)
    x1, x2, x3 = PeriodicChart(n).mesh()

    def scalar(scale):
        f = np.zeros((n, n, n))
        for m in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (0, 1, 1), (1, 0, 1)]:
            phase = m[0] * x1 + m[1] * x2 + m[2] * x3
            f += rng.standard_normal() * np.cos(phase) + rng.standard_normal() * np.sin(phase)
        peak = np.abs(f).max()
        return scale * f / peak if peak > 0 else f

    theta = scalar(amplitude)
    axis = np.stack(
        [1.0 + scalar(amplitude), scalar(amplitude), scalar(amplitude)], axis=-1
    )
    axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
    n_dot_s = np.einsum("...j,jpq->...pq", axis, PAULI)
    r = (
        np.cos(theta)[..., None, None] * np.eye(2)
        - 1j * np.sin(theta)[..., None, None] * n_dot_s
    )
    return GaugeField(r)


def dirac_plus_scalar(frame: FrameField, q: float) -> FirstOrderOperator:
    """The Dirac operator of the frame shifted by a constant scalar potential."""
    op = dirac_operator(frame)
    a0 = op.a0 + q * np.eye(2)
    return FirstOrderOperator(op.sigma, a0)


def dirac_plus_traceless(frame: FrameField, epsilon: float) -> FirstOrderOperator:
    """The Dirac operator plus a constant traceless Hermitian perturbation."""
    op = dirac_operator(frame)
    a0 = op.a0 + epsilon * PAULI[2]
    return FirstOrderOperator(op.sigma, a0)


def build_scenario(name: str, grid: int = _DEFAULT_GRID, **params):
    """Construct the named scenario; returns a dict of library objects.

    Parameters: k3 (twisted-torus), q (dirac-plus-scalar), epsilon
    (dirac-plus-traceless), seed and amplitude (random-band-limited).
    The sphere scenario carries no operator, only its exact spectrum,
    and is rejected here.
    """
    if name == "standard-torus":
        frame = standard_frame(grid)
    elif name == "twisted-torus":
        frame = twisted_frame(int(params.get("k3", 1)), grid)
    elif name in ("dirac-plus-scalar", "dirac-plus-traceless"):
        frame = standard_frame(grid)
    elif name == "random-band-limited":
        frame = random_band_limited_frame(
            int(params.get("seed", 0)),
            grid,
            amplitude=float(params.get("amplitude", _DEFAULT_AMPLITUDE)),
        )
    elif name == "sphere":
        raise InputError(
            "the sphere scenario only provides an exact spectrum; "
            "it has no operator on the torus grid"
        )
    else:
        raise InputError(f"unknown scenario {name!r}; choose one of {SCENARIO_NAMES}")

    if name == "dirac-plus-scalar":
        op = dirac_plus_scalar(frame, float(params.get("q", 0.3)))
    elif name == "dirac-plus-traceless":
        op = dirac_plus_traceless(frame, float(params.get("epsilon", 0.1)))
    else:
        op = dirac_operator(frame)
    return {"frame": frame, "operator": op, "symbol": op.sigma, "name": name}
