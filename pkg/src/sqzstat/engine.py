"""Ensemble engine: characteristic classes, probabilities and means.

The engine turns a microcanonical degeneracy table into the squeezed
characteristic class of an ensemble.  Per subclass (row) the pipeline is

    ln u   = ln h(g_row) - sum_i y_i X_i,row
    ln c   = ln H(exp(ln u))          (excluded rows get the cutoff flag)
    total  = log-sum-exp over live rows

and the dimensionless potential is phi = -ln h(total).  The identity
family collapses every step, recovering the ordinary weighted sum of
degeneracies.  All reductions are ordered (max-shift log-sum-exp over
row order), so repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateEnsembleError, ModelValidationError, SqueezeDomainError
from .squeeze import SqueezeFamily
from .thermo import EnvironmentSplit, ThermoPoint

__all__ = [
    "DegeneracySpectrum",
    "EnsembleSpec",
    "ClassTable",
    "ProbabilityTable",
    "ThermoReport",
    "characteristic_class",
    "phi_of",
    "phi_and_entropies",
    "probabilities",
    "generalized_boltzmann_factor",
    "observed_mean",
    "entropy_from_probabilities",
    "combine_independent",
    "phi_surface_from_spectrum",
    "report_for",
]

_ROW_MATCH_ATOL = 1e-9
_ROW_MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class DegeneracySpectrum:
    """Finite table of microcanonical subclasses.

    ``variable_names`` orders the exchanged extensive variables; row r
    has values ``x[r, :]`` and log-degeneracy ``ln_g[r]``.
    """

    variable_names: tuple[str, ...]
    x: np.ndarray
    ln_g: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        ln_g = np.asarray(self.ln_g, dtype=float)
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "ln_g", ln_g)
        if x.shape[0] == 0:
            raise ModelValidationError("spectrum needs at least one row")
        if x.shape[1] != len(self.variable_names):
            raise ModelValidationError(
                f"{x.shape[1]} columns for {len(self.variable_names)} variable names"
            )
        if ln_g.shape != (x.shape[0],):
            raise ModelValidationError("ln_g length must match the number of rows")
        if not np.all(np.isfinite(ln_g)):
            raise ModelValidationError("all ln_g must be finite")
        if not np.all(np.isfinite(x)):
            raise ModelValidationError("all row values must be finite")
        if len({tuple(row) for row in x}) != x.shape[0]:
            raise ModelValidationError("rows must have distinct variable vectors")

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    def ln_total_class(self) -> float:
        """ln of the unweighted class total (sum of all degeneracies)."""
        return float(logsumexp(self.ln_g))

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.variable_names.index(name)
        except ValueError:
            raise ModelValidationError(f"no variable {name!r} in spectrum") from None
        return self.x[:, j]

    def restrict(self, fixed: Mapping[str, float]) -> "DegeneracySpectrum":
        """Drop pinned columns, keeping only rows that match the values."""
        if not fixed:
            return self
        mask = np.ones(self.n_rows, dtype=bool)
        for name, value in fixed.items():
            mask &= np.isclose(self.column(name), value, rtol=_ROW_MATCH_RTOL, atol=_ROW_MATCH_ATOL)
        if not mask.any():
            raise ModelValidationError(f"no spectrum rows match fixed values {dict(fixed)!r}")
        keep = [n for n in self.variable_names if n not in fixed]
        idx = [self.variable_names.index(n) for n in keep]
        return DegeneracySpectrum(
            variable_names=tuple(keep),
            x=self.x[mask][:, idx] if keep else np.zeros((int(mask.sum()), 0)),
            ln_g=self.ln_g[mask],
        )


@dataclass(frozen=True)
class EnsembleSpec:
    """Environment values: which variables are exchanged at fixed
    intensive value (y) and which are pinned extensively (X)."""

    fixed_intensive: Mapping[str, float] = field(default_factory=dict)
    fixed_extensive: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "fixed_intensive", dict(self.fixed_intensive))
        object.__setattr__(self, "fixed_extensive", dict(self.fixed_extensive))
        overlap = set(self.fixed_intensive) & set(self.fixed_extensive)
        if overlap:
            raise ModelValidationError(f"variables in both environment sets: {sorted(overlap)}")

    @property
    def split(self) -> EnvironmentSplit:
        return EnvironmentSplit(
            fixed_extensive=tuple(self.fixed_extensive),
            fixed_intensive=tuple(self.fixed_intensive),
        )

    def values(self) -> dict[str, float]:
        out = dict(self.fixed_extensive)
        out.update(self.fixed_intensive)
        return out

    def validate_against(self, spectrum: DegeneracySpectrum) -> None:
        names = set(spectrum.variable_names)
        declared = set(self.fixed_intensive) | set(self.fixed_extensive)
        missing = names - declared
        if missing:
            raise ModelValidationError(f"no environment value for spectrum variables {sorted(missing)}")
        extra = declared - names
        if extra:
            raise ModelValidationError(f"environment names not in spectrum: {sorted(extra)}")


@dataclass(frozen=True)
class ClassTable:
    """Per-subclass squeezed classes for one ensemble evaluation.

    Rows follow the restricted spectrum.  ``ln_row_class`` is -inf on
    excluded rows; ``ln_total`` is the log characteristic class over the
    surviving rows.
    """

    spectrum: DegeneracySpectrum
    env: EnsembleSpec
    family: SqueezeFamily
    exchanged_names: tuple[str, ...]
    x_exchanged: np.ndarray
    ln_g: np.ndarray
    ln_weight: np.ndarray
    ln_row_class: np.ndarray
    excluded: np.ndarray
    ln_total: float

    @property
    def n_rows(self) -> int:
        return self.ln_g.shape[0]

    @property
    def n_excluded(self) -> int:
        return int(self.excluded.sum())

    @property
    def phi(self) -> float:
        return -self.family.ln_squeeze(self.ln_total)


@dataclass(frozen=True)
class ProbabilityTable:
    """Normalized macro (per subclass) and configuration probabilities."""

    macro_probs: np.ndarray
    config_probs: np.ndarray
    ln_macro: np.ndarray
    ln_config: np.ndarray
    excluded: np.ndarray
    ln_g: np.ndarray


@dataclass(frozen=True)
class ThermoReport:
    """A thermodynamic point plus the per-subclass table behind it."""

    point: ThermoPoint
    table: ClassTable
    environment: dict[str, float]
    squeeze: dict

    def to_json_dict(self) -> dict:
        out = self.point.to_json_dict()
        out["environment"] = dict(self.environment)
        out["squeeze"] = dict(self.squeeze)
        out["excluded_rows"] = int(self.table.n_excluded)
        return out

    def rows(self) -> list[dict]:
        """Per-row projection (the CSV payload)."""
        probs = probabilities(self.table)
        out = []
        for r in range(self.table.n_rows):
            row = {}
            for j, name in enumerate(self.table.exchanged_names):
                row[f"x_{name}"] = float(self.table.x_exchanged[r, j])
            row["ln_g"] = float(self.table.ln_g[r])
            row["ln_class"] = float(self.table.ln_row_class[r])
            row["macro_prob"] = float(probs.macro_probs[r])
            row["config_prob"] = float(probs.config_probs[r])
            row["boltzmann_factor"] = boltzmann_factor_from_table(self.table, r)
            row["excluded"] = bool(self.table.excluded[r])
            out.append(row)
        return out


def characteristic_class(
    spectrum: DegeneracySpectrum, env: EnsembleSpec, family: SqueezeFamily
) -> ClassTable:
    """Squeeze-and-rearrange pass producing the per-row class table."""
    env.validate_against(spectrum)
    working = spectrum.restrict(env.fixed_extensive) if env.fixed_extensive else spectrum
    exchanged = tuple(n for n in working.variable_names if n in env.fixed_intensive)
    cols = [working.variable_names.index(n) for n in exchanged]
    x_ex = working.x[:, cols] if cols else np.zeros((working.n_rows, 0))
    y = np.array([env.fixed_intensive[n] for n in exchanged])
    ln_h_g = family.ln_squeeze_arr(working.ln_g)
    if not np.all(np.isfinite(ln_h_g)):
        raise SqueezeDomainError(
            "squeezed log-degeneracy exceeds the float range "
            f"(largest ln g = {float(working.ln_g.max()):g} at {family.label()})"
        )
    ln_weight = ln_h_g - (x_ex @ y if cols else 0.0)
    ln_row_class, excluded = family.ln_unsqueeze_arr(ln_weight)
    if excluded.all():
        raise DegenerateEnsembleError("every subclass is excluded by the cutoff")
    live = ln_row_class[~excluded]
    ln_total = float(logsumexp(live))
    return ClassTable(
        spectrum=working,
        env=env,
        family=family,
        exchanged_names=exchanged,
        x_exchanged=x_ex,
        ln_g=working.ln_g.copy(),
        ln_weight=ln_weight,
        ln_row_class=ln_row_class,
        excluded=excluded,
        ln_total=ln_total,
    )


def phi_of(spectrum: DegeneracySpectrum, env: EnsembleSpec, family: SqueezeFamily) -> float:
    """Dimensionless characteristic potential of the ensemble."""
    return characteristic_class(spectrum, env, family).phi


def observed_mean(
    spectrum: DegeneracySpectrum,
    env: EnsembleSpec,
    family: SqueezeFamily,
    observable: "str | np.ndarray | Sequence[float]",
    table: ClassTable | None = None,
) -> float:
    """Weighted mean of a per-row observable.

    The weights are the ratio of logarithmic squeeze slopes evaluated at
    the total class and at each row class; this makes the mean equal the
    derivative of phi with respect to the conjugate intensive variable.
    For the identity family the weights reduce to the macro
    probabilities (plain ensemble average); for the power-law family to
    P_row**q.
    """
    if table is None:
        table = characteristic_class(spectrum, env, family)
    if isinstance(observable, str):
        values = table.spectrum.column(observable)
    else:
        values = np.asarray(observable, dtype=float)
        if values.shape != (table.n_rows,):
            raise ModelValidationError(
                f"observable has {values.shape} values for {table.n_rows} rows"
            )
    live = ~table.excluded
    # ln w = ln l(total) - ln l(c_row), with l = d(ln h)/dx
    ln_l_total = family.ln_log_slope(table.ln_total)
    ln_w = ln_l_total - family.ln_log_slope_arr(table.ln_row_class[live])
    return float(np.sum(np.exp(ln_w) * values[live]))


def phi_and_entropies(table: ClassTable) -> ThermoPoint:
    """Potential, entropy and subdivision entropy for one class table.

    The entropy is the Legendre combination J = sum_i y_i <X_i> - phi,
    which coincides with ln h(total degeneracy) for isolated systems.
    The subdivision entropy theta is the fully-open potential with the
    opposite sign; it is exact (-phi) when no extensive variable is
    pinned and reported as None otherwise (the open second pass would
    need conjugates of the pinned variables, which a bare spectrum does
    not determine).
    """
    env = table.env
    family = table.family
    phi = table.phi
    observed: dict[str, float] = {}
    j_val = -phi
    for name in table.exchanged_names:
        mean = observed_mean(table.spectrum, env, family, name, table=table)
        observed[name] = mean
        j_val += env.fixed_intensive[name] * mean
    theta = -phi if not env.fixed_extensive else None
    return ThermoPoint(phi=phi, entropy_J=j_val, entropy_theta=theta, observed=observed)


def probabilities(table: ClassTable) -> ProbabilityTable:
    """Macro and per-configuration probabilities from a class table.

    Degeneracies that are exactly representable integers are divided out
    exactly, so uniform microcanonical distributions come out as literal
    1/Omega.
    """
    if table.excluded.all():
        raise DegenerateEnsembleError("no live rows to normalize")
    ln_macro = table.ln_row_class - table.ln_total
    macro = np.where(table.excluded, 0.0, np.exp(ln_macro))
    ln_config = ln_macro - table.ln_g
    config = np.empty_like(macro)
    for r in range(table.n_rows):
        if table.excluded[r]:
            config[r] = 0.0
        else:
            config[r] = macro[r] / _linear_count(table.ln_g[r])
    return ProbabilityTable(
        macro_probs=macro,
        config_probs=config,
        ln_macro=ln_macro,
        ln_config=ln_config,
        excluded=table.excluded.copy(),
        ln_g=table.ln_g.copy(),
    )


def _linear_count(ln_g: float) -> float:
    """exp(ln_g), snapped to the exact integer when one is plainly meant.

    Degeneracies are integer counts; gammaln pipelines return them with
    ~1 ulp noise.  Snapping keeps divisions by small counts exact."""
    g = math.exp(ln_g)
    if g < 2**53:
        near = round(g)
        if near > 0 and abs(g - near) <= 1e-9 * near:
            return float(near)
    return g


def generalized_boltzmann_factor(
    spectrum: DegeneracySpectrum,
    env: EnsembleSpec,
    family: SqueezeFamily,
    row: int,
    table: ClassTable | None = None,
) -> float:
    """Ratio of the row's squeezed class to its bare degeneracy.

    Identity family: exp(-sum y X) exactly.  Excluded rows give 0.0."""
    if table is None:
        table = characteristic_class(spectrum, env, family)
    return boltzmann_factor_from_table(table, row)


def boltzmann_factor_from_table(table: ClassTable, row: int) -> float:
    if not 0 <= row < table.n_rows:
        raise ModelValidationError(f"row {row} out of range (n_rows={table.n_rows})")
    if table.excluded[row]:
        return 0.0
    return math.exp(table.ln_row_class[row]) / _linear_count(table.ln_g[row])


def entropy_from_probabilities(probs: ProbabilityTable, family: SqueezeFamily) -> float:
    """Entropy functional of the configuration probabilities.

    Identity: Gibbs-Shannon -sum_k p_k ln p_k; power-law family:
    (sum_k p_k**q - 1)/(1-q).  Sums run over configurations, each row
    contributing g_row identical terms.  No closed probability-space
    form exists for custom hooks."""
    live = ~probs.excluded
    lng = probs.ln_g[live]
    ln_p = probs.ln_config[live]
    if family.is_identity:
        # -sum_rows g p ln p, with g p = macro prob
        return float(-np.sum(np.exp(lng + ln_p) * ln_p))
    if family.kind == "tsallis":
        q = family.q
        lse = logsumexp(lng + q * ln_p)
        return float(math.expm1(lse) / (1.0 - q))
    raise ModelValidationError("no closed probability-space entropy for custom families")


def combine_independent(
    a: DegeneracySpectrum, b: DegeneracySpectrum, prefix: tuple[str, str] = ("A.", "B.")
) -> DegeneracySpectrum:
    """Product spectrum of two independent systems.

    Variable names are prefixed to stay distinct; degeneracies multiply
    (log-add) over the cartesian product of subclasses."""
    names = tuple(prefix[0] + n for n in a.variable_names) + tuple(
        prefix[1] + n for n in b.variable_names
    )
    na, nb = a.n_rows, b.n_rows
    xa = np.repeat(a.x, nb, axis=0)
    xb = np.tile(b.x, (na, 1))
    lng = np.repeat(a.ln_g, nb) + np.tile(b.ln_g, na)
    return DegeneracySpectrum(variable_names=names, x=np.hstack([xa, xb]), ln_g=lng)


def phi_surface_from_spectrum(
    spectrum: DegeneracySpectrum, env: EnsembleSpec, family: SqueezeFamily
) -> Callable[[Mapping[str, float]], float]:
    """Phi as a function of environment values over a fixed spectrum.

    The returned callable accepts a full {pair name: value} mapping and
    is smooth in the intensive values; pinned extensive values select
    rows and are only meaningful at spectrum support points.
    """

    intensive = tuple(env.fixed_intensive)
    extensive = tuple(env.fixed_extensive)

    def surface(values: Mapping[str, float]) -> float:
        e = EnsembleSpec(
            fixed_intensive={n: values[n] for n in intensive},
            fixed_extensive={n: values[n] for n in extensive},
        )
        return phi_of(spectrum, e, family)

    return surface


def report_for(
    spectrum: DegeneracySpectrum, env: EnsembleSpec, family: SqueezeFamily
) -> ThermoReport:
    """One-stop evaluation used by the CLI."""
    table = characteristic_class(spectrum, env, family)
    point = phi_and_entropies(table)
    return ThermoReport(
        point=point,
        table=table,
        environment=env.values(),
        squeeze=family.to_config(),
    )


# ---------------------------------------------------------------------------
# model-file round trip (the JSON wire format for spectra + environments)

def model_to_json_dict(
    spectrum: DegeneracySpectrum, env: EnsembleSpec, family: SqueezeFamily
) -> dict:
    variables = []
    for n in spectrum.variable_names:
        kind = "exchanged" if n in env.fixed_intensive else "fixed"
        variables.append({"name": n, "kind": kind})
    rows = [
        {"x": [float(v) for v in spectrum.x[r]], "ln_g": float(spectrum.ln_g[r])}
        for r in range(spectrum.n_rows)
    ]
    return {
        "variables": variables,
        "rows": rows,
        "environment": {"y": dict(env.fixed_intensive), "X": dict(env.fixed_extensive)},
        "squeeze": family.to_config(),
    }


def model_from_json_dict(doc: dict) -> tuple[DegeneracySpectrum, EnsembleSpec, SqueezeFamily]:
    try:
        names = tuple(v["name"] for v in doc["variables"])
        kinds = {v["name"]: v["kind"] for v in doc["variables"]}
        x = np.array([row["x"] for row in doc["rows"]], dtype=float)
        ln_g = np.array([row["ln_g"] for row in doc["rows"]], dtype=float)
        envdoc = doc.get("environment", {})
        y = {k: float(v) for k, v in envdoc.get("y", {}).items()}
        X = {k: float(v) for k, v in envdoc.get("X", {}).items()}
    except (KeyError, TypeError) as exc:
        raise ModelValidationError(f"malformed model document: {exc}") from exc
    for n in names:
        if kinds[n] not in ("exchanged", "fixed"):
            raise ModelValidationError(f"variable {n!r} has unknown kind {kinds[n]!r}")
        if kinds[n] == "exchanged" and n not in y:
            raise ModelValidationError(f"exchanged variable {n!r} missing a y value")
        if kinds[n] == "fixed" and n not in X:
            raise ModelValidationError(f"fixed variable {n!r} missing an X value")
    spectrum = DegeneracySpectrum(variable_names=names, x=x, ln_g=ln_g)
    env = EnsembleSpec(fixed_intensive=y, fixed_extensive=X)
    family = SqueezeFamily.from_config(doc.get("squeeze", {"family": "identity"}))
    return spectrum, env, family
