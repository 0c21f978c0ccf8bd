"""Stability matrix, Gaussian fluctuation formulas and second moments.

The curvature of the potential in the intensive directions carries the
fluctuation content: C = -(d2 phi / dy dy) is the covariance matrix of
the conjugate extensive variables, its inverse G is the stability
matrix of the extensive-side expansion, and the deformed statistics
rescale both by 1 + (q - 1) * phi0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .squeeze import SqueezeFamily
from .thermo import PhiSurface

__all__ = [
    "StabilityWarning",
    "FluctuationReport",
    "stability_matrix",
    "moments",
    "einstein_log_probability",
]

_HESS_STEP = 5e-4  # second differences need a larger step than gradients
# finite-difference curvatures carry ~8 meaningful digits, so condition
# numbers beyond this are indistinguishable from exact singularity
_SINGULAR_COND = 1e8
_FLAT_TOL = 1e-8


class StabilityWarning(UserWarning):
    """Raised (as a warning) when a Hessian is indefinite or a state
    looks outside the macroscopic fluctuation regime."""


@dataclass(frozen=True)
class FluctuationReport:
    """Second-moment summary around one equilibrium state.

    variances / covariances are for the extensive (fluctuating)
    variables; intensive_variances for their conjugates.  The deformed
    scale multiplies all of them and equals 1 for the identity family.
    """

    variable_names: tuple[str, ...]
    G: np.ndarray
    G_inv: np.ndarray
    variances: dict[str, float]
    intensive_variances: dict[str, float]
    covariances: dict[tuple[str, str], float]
    tsallis_scale: float
    phi0: float
    condition_number: float
    singular: bool = False

    def to_json_dict(self) -> dict:
        return {
            "variables": list(self.variable_names),
            "G": [[float(v) for v in row] for row in self.G],
            "G_inv": [[float(v) for v in row] for row in self.G_inv],
            "variances": dict(self.variances),
            "intensive_variances": dict(self.intensive_variances),
            "covariances": {f"{a},{b}": v for (a, b), v in self.covariances.items()},
            "tsallis_scale": self.tsallis_scale,
            "phi0": self.phi0,
            "condition_number": self.condition_number,
            "singular": self.singular,
        }


def _hessian_once(phi_surface: PhiSurface, point: Mapping[str, float], names: Sequence[str], steps: np.ndarray) -> np.ndarray:
    base = dict(point)
    n = len(names)

    def at(deltas: dict[str, float]) -> float:
        vals = dict(base)
        for k, d in deltas.items():
            vals[k] = vals[k] + d
        return phi_surface(vals)

    f0 = at({})
    H = np.empty((n, n))
    for i, ni in enumerate(names):
        hi = steps[i]
        H[i, i] = (at({ni: hi}) - 2.0 * f0 + at({ni: -hi})) / (hi * hi)
        for j in range(i + 1, n):
            nj = names[j]
            hj = steps[j]
            cross = (
                at({ni: hi, nj: hj})
                - at({ni: hi, nj: -hj})
                - at({ni: -hi, nj: hj})
                + at({ni: -hi, nj: -hj})
            ) / (4.0 * hi * hj)
            H[i, j] = H[j, i] = cross
    return H


def stability_matrix(
    phi_surface: PhiSurface,
    point: Mapping[str, float],
    variables: Sequence[str],
    rel_step: float = _HESS_STEP,
) -> np.ndarray:
    """Central-difference Hessian of the surface, symmetrized.

    One Richardson refinement (h and h/2) cancels the leading h**2
    error.  An indefinite result triggers a StabilityWarning."""
    names = list(variables)
    steps = np.array([rel_step * max(1.0, abs(point[n])) for n in names])
    h1 = _hessian_once(phi_surface, point, names, steps)
    h2 = _hessian_once(phi_surface, point, names, steps / 2.0)
    H = (4.0 * h2 - h1) / 3.0
    H = 0.5 * (H + H.T)
    eig = np.linalg.eigvalsh(H)
    scale = max(1.0, float(np.max(np.abs(eig))))
    if np.any(eig > 1e-8 * scale) and np.any(eig < -1e-8 * scale):
        warnings.warn("indefinite curvature: state is not a one-sided extremum", StabilityWarning)
    return H


def moments(
    phi_surface: PhiSurface,
    point: Mapping[str, float],
    variables: Sequence[str],
    family: SqueezeFamily,
    phi0: float | None = None,
    theta: float | None = None,
    rel_step: float = _HESS_STEP,
) -> FluctuationReport:
    """Variances and covariances of the fluctuating extensive variables.

    ``variables`` are the intensive environment names conjugate to the
    fluctuating set; ``phi0`` defaults to the potential of this very
    ensemble (the one in which the fluctuating variables are exchanged).
    Passing the subdivision entropy ``theta`` arms a small-system check:
    the quadratic fluctuation formulas assume a macroscopic state, so a
    non-negligible theta draws a StabilityWarning (not an error)."""
    names = tuple(variables)
    H = stability_matrix(phi_surface, point, names, rel_step=rel_step)
    C = -H  # extensive covariance matrix in the undeformed case
    if phi0 is None:
        phi0 = phi_surface(dict(point))
    if theta is not None and abs(theta) > 0.01 * max(1.0, abs(phi0)):
        warnings.warn(
            f"subdivision entropy {theta:g} is not negligible: "
            "macroscopic fluctuation formulas are approximate here",
            StabilityWarning,
        )
    if family.kind == "tsallis" and not family.is_identity:
        scale = 1.0 + (family.q - 1.0) * phi0
    else:
        scale = 1.0
    n = len(names)
    cond = float(np.linalg.cond(C)) if n else 0.0
    singular = not math.isfinite(cond) or cond > _SINGULAR_COND
    if singular:
        warnings.warn("covariance matrix is numerically singular", StabilityWarning)
        G = np.linalg.pinv(C)
    elif n == 1:
        G = np.array([[1.0 / C[0, 0]]])
    else:
        G = np.linalg.inv(C)
    variances = {ni: scale * float(C[i, i]) for i, ni in enumerate(names)}
    intensive = {}
    flat_scale = max(1.0, float(np.max(np.abs(C)))) if n else 1.0
    for i, ni in enumerate(names):
        if singular and abs(C[i, i]) <= _FLAT_TOL * flat_scale:
            intensive[ni] = math.inf
        else:
            intensive[ni] = scale * float(G[i, i])
    covariances = {
        (names[i], names[j]): scale * float(C[i, j])
        for i in range(n)
        for j in range(i + 1, n)
    }
    return FluctuationReport(
        variable_names=names,
        G=G,
        G_inv=C,
        variances=variances,
        intensive_variances=intensive,
        covariances=covariances,
        tsallis_scale=scale,
        phi0=phi0,
        condition_number=cond,
        singular=singular,
    )


def einstein_log_probability(
    alpha: "np.ndarray | Sequence[float]", G: np.ndarray, tsallis_scale: float = 1.0
) -> float:
    """Unnormalized log of the Gaussian fluctuation density at deviation
    alpha from the most probable state: -alpha' (G / scale) alpha / 2."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    Gm = np.atleast_2d(np.asarray(G, dtype=float))
    return float(-0.5 * a @ (Gm / tsallis_scale) @ a)
