"""
Butterworth-Van Dyke (BVD) equivalent circuit of ME/US transducers.

The model is a series R_M-L_M-C_M motional branch, driven by an internal
source of amplitude ``v_s_amp``, in parallel with the intrinsic capacitance
C_P.  This module evaluates the circuit, derives its coupling factor and
resonances, and fits it to measured impedance sweeps.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .errors import DomainError, FitError, InputError

__all__ = [
    "BvdModel",
    "ImpedanceSample",
    "CouplingReport",
    "FitResult",
    "TRILAYER",
    "BILAYER",
    "motional_impedance",
    "terminal_impedance",
    "coupling_factor",
    "resonance_frequencies",
    "synthesize_samples",
    "fit_bvd",
    "read_impedance_csv",
    "write_impedance_csv",
    "model_to_dict",
    "model_from_dict",
    "load_model_json",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BvdModel:
    """BVD circuit parameters (SI units).

    Parameters
    ----------
    v_s_amp : float
        Amplitude of the internal source [V]; proportional to the field or
        pressure reaching the transducer.
    r_m, l_m, c_m : float
        Motional resistance [ohm], inductance [H] and capacitance [F].
    c_p : float
        Parallel (intrinsic) capacitance [F].
    """

    v_s_amp: float
    r_m: float
    l_m: float
    c_m: float
    c_p: float

    def __post_init__(self):
        for name in ("r_m", "l_m", "c_m", "c_p"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.v_s_amp) and self.v_s_amp >= 0):
            raise DomainError(f"v_s_amp must be non-negative, got {self.v_s_amp!r}")

    def with_source(self, v_s_amp: float) -> "BvdModel":
        return replace(self, v_s_amp=v_s_amp)

    def scaled_source(self, factor: float) -> "BvdModel":
        return replace(self, v_s_amp=self.v_s_amp * factor)


@dataclass(frozen=True)
class ImpedanceSample:
    freq: float
    z_re: float
    z_im: float

    def __post_init__(self):
        if not (math.isfinite(self.freq) and self.freq > 0):
            raise InputError(f"frequency must be positive, got {self.freq!r}")
        if not (math.isfinite(self.z_re) and math.isfinite(self.z_im)):
            raise InputError(f"non-finite impedance at {self.freq} Hz")

    @property
    def z(self) -> complex:
        return complex(self.z_re, self.z_im)


@dataclass(frozen=True)
class CouplingReport:
    """Coupling parameter k_e^2/zeta and its qualitative regime."""

    coupling: float
    regime: str


# Anchored approximations of the fitted tri-layer and bi-layer films.  See
# demos/derive_default_models.py for the constrained solve that produced them.
TRILAYER = BvdModel(
    v_s_amp=2.14,
    r_m=310.1705331276,
    l_m=9.132588918421e-4,
    c_m=2.471477948379e-10,
    c_p=1.225363035162e-9,
)

BILAYER = BvdModel(
    v_s_amp=2.14,
    r_m=253.76481612546817,
    l_m=4.513079234196574e-3,
    c_m=5.0012399411166466e-11,
    c_p=4.353870034555564e-10,
)


def _check_omega(omega):
    arr = np.asarray(omega, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("omega must be positive")
    return arr


def motional_impedance(model: BvdModel, omega):
    """Impedance of the motional branch, ``R_M + j(wL_M - 1/(wC_M))``.

    Accepts scalar or array ``omega`` [rad/s]; returns complex of the same
    shape.
    """
    w = _check_omega(omega)
    z = model.r_m + 1j * (w * model.l_m - 1.0 / (w * model.c_m))
    return complex(z) if np.ndim(z) == 0 else z


def terminal_impedance(model: BvdModel, omega):
    """Impedance seen at the transducer terminals: Z_M parallel with C_P."""
    w = _check_omega(omega)
    zm = model.r_m + 1j * (w * model.l_m - 1.0 / (w * model.c_m))
    z = zm / (1.0 + 1j * w * model.c_p * zm)
    return complex(z) if np.ndim(z) == 0 else z


def coupling_factor(model: BvdModel, thresholds: tuple[float, float] = (0.3, 10.0)) -> CouplingReport:
    """Return k_e^2/zeta = 2*sqrt(L_M C_M)/(C_P R_M) and its regime.

    ``thresholds`` = (weak/moderate, moderate/strong) boundaries.
    """
    lo, hi = thresholds
    k = 2.0 * math.sqrt(model.l_m * model.c_m) / (model.c_p * model.r_m)
    if k < lo:
        regime = "weak"
    elif k < hi:
        regime = "moderate"
    else:
        regime = "strong"
    return CouplingReport(coupling=k, regime=regime)


def resonance_frequencies(model: BvdModel) -> dict[str, float]:
    """Short-circuit (series) and open-circuit (parallel) resonance in Hz."""
    c_eff = model.c_m * model.c_p / (model.c_m + model.c_p)
    f_short = 1.0 / (TWO_PI * math.sqrt(model.l_m * model.c_m))
    f_open = 1.0 / (TWO_PI * math.sqrt(model.l_m * c_eff))
    return {"f_short": f_short, "f_open": f_open}


def synthesize_samples(model: BvdModel, freqs: Iterable[float], noise: float = 0.0,
                       rng: np.random.Generator | None = None) -> list[ImpedanceSample]:
    """Impedance samples of ``model`` with optional multiplicative noise.

    ``noise`` is the half-width of a uniform relative perturbation applied
    independently to the real and imaginary parts.
    """
    f = np.asarray(list(freqs), dtype=float)
    z = np.atleast_1d(terminal_impedance(model, TWO_PI * f))
    if noise:
        rng = np.random.default_rng() if rng is None else rng
        re = z.real * (1.0 + rng.uniform(-noise, noise, f.size))
        im = z.imag * (1.0 + rng.uniform(-noise, noise, f.size))
        z = re + 1j * im
    return [ImpedanceSample(float(fi), float(zi.real), float(zi.imag)) for fi, zi in zip(f, z)]


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

_PARAMS = ("r_m", "l_m", "c_m", "c_p")


@dataclass
class FitResult:
    """Fitted model plus diagnostics."""

    model: BvdModel
    residual: float
    iterations: int
    converged: bool
    message: str
    rel_std: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def parameters(self) -> dict[str, float]:
        return {name: getattr(self.model, name) for name in _PARAMS}


def _model_z(x, w):
    r, l, cm, cp = np.exp(x)
    zm = r + 1j * (w * l - 1.0 / (w * cm))
    return zm, zm / (1.0 + 1j * w * cp * zm), (r, l, cm, cp)


def _residuals(x, w, z_meas, scale):
    _, z, _ = _model_z(x, w)
    d = (z - z_meas) / scale
    return np.concatenate([d.real, d.imag])


def _jacobian(x, w, z_meas, scale):
    zm, z, (r, l, cm, cp) = _model_z(x, w)
    # dZ/dZm = Z^2/Zm^2 ; dZ/dCp = -jw Z^2 ; derivatives w.r.t. log-parameters
    g = (z / zm) ** 2
    cols = [
        g * r,
        g * (1j * w * l),
        g * (1j / (w * cm)),
        -1j * w * z**2 * cp,
    ]
    jz = np.stack(cols, axis=1) / scale[:, None]
    return np.concatenate([jz.real, jz.imag], axis=0)


def _heuristic_init(f, z):
    """Initial guess from the |Z| extrema and the low-frequency capacitance."""
    mag = np.abs(z)
    i_min = int(np.argmin(mag))
    i_max = int(np.argmax(mag))
    f_s = f[i_min]
    f_p = f[i_max]
    if f_p <= f_s * 1.0001:
        f_p = f_s * 1.05
    ratio = (f_p / f_s) ** 2
    c_tot = 1.0 / (TWO_PI * f[0] * mag[0])
    c_p = c_tot / ratio
    c_m = c_p * (ratio - 1.0)
    l_m = 1.0 / ((TWO_PI * f_s) ** 2 * c_m)
    r_m = max(mag[i_min], 1e-3)
    return np.log([r_m, l_m, c_m, c_p])


def _project(w, z_meas, scale, c_p):
    """Best (R, L, C_M) for a fixed C_P by linear least squares on Z_M."""
    zm = 1.0 / (1.0 / z_meas - 1j * w * c_p)
    # first-order map of a Z_M error onto the relative error in Z
    wt = np.abs(z_meas) / np.abs(zm) ** 2
    r = np.sum(wt**2 * zm.real) / np.sum(wt**2)
    w0 = math.sqrt(w[0] * w[-1])
    # columns scaled to O(1); unscaled they differ by ~w0^2 and lstsq drops one
    a = np.stack([w / w0, -w0 / w], axis=1) * wt[:, None]
    (l, s), *_ = np.linalg.lstsq(a, zm.imag * wt, rcond=None)
    l, s = l / w0, s * w0
    if r <= 0 or l <= 0 or s <= 0:
        return None
    return np.log([r, l, 1.0 / s, c_p])


def _refine_init(x0, w, z_meas, scale):
    """Variable-projection search over C_P around the heuristic guess."""
    cp0 = math.exp(x0[3])

    def cost(log_cp):
        x = _project(w, z_meas, scale, math.exp(log_cp))
        if x is None:
            return 1e30
        return float(np.sum(_residuals(x, w, z_meas, scale) ** 2))

    grid = np.log(cp0) + np.linspace(math.log(0.1), math.log(10.0), 61)
    costs = [cost(g) for g in grid]
    k = int(np.argmin(costs))
    if costs[k] >= 1e30:
        return x0
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(cost, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    best = res.x if res.fun <= costs[k] else grid[k]
    x = _project(w, z_meas, scale, math.exp(best))
    if x is None:
        return x0
    base = float(np.sum(_residuals(x0, w, z_meas, scale) ** 2))
    return x if cost(best) < base else x0


def fit_bvd(samples: Sequence[ImpedanceSample], init: BvdModel | None = None,
            max_iter: int = 200, xtol: float = 1e-9) -> FitResult:
    """Fit the BVD parameters to measured impedance.

    Minimizes the summed squared relative error of both the real and the
    imaginary part with a damped (Levenberg-Marquardt) least-squares solver
    working on log-parameters.  Without ``init``, the starting point is
    derived from the data: resonances from the |Z| minimum and maximum, C_P
    from the low-frequency capacitance, R_M from the minimum |Z|; C_P is then
    refined by variable projection (R, L, 1/C_M enter Z_M linearly).

    ``v_s_amp`` is not observable from impedance and is copied from ``init``
    (1 V if absent).

    Raises
    ------
    InputError
        Fewer than 8 samples or frequencies not strictly increasing.
    FitError
        No convergence within ``max_iter`` iterations; ``err.best`` carries
        the best-so-far :class:`FitResult`.
    """
    if len(samples) < 8:
        raise InputError(f"need at least 8 impedance samples, got {len(samples)}")
    f = np.array([s.freq for s in samples], dtype=float)
    if np.any(np.diff(f) <= 0):
        raise InputError("sample frequencies must be strictly increasing")
    z_meas = np.array([s.z for s in samples])
    w = TWO_PI * f
    scale = np.abs(z_meas)

    warnings = []
    mag = np.abs(z_meas)
    i_min, i_max = int(np.argmin(mag)), int(np.argmax(mag))
    if i_min in (0, len(f) - 1):
        warnings.append("|Z| minimum at sweep edge: short-circuit resonance may lie outside the data")
    if i_max in (0, len(f) - 1) or i_max <= i_min:
        warnings.append("|Z| maximum at sweep edge: open-circuit resonance may lie outside the data")

    if init is None:
        x0 = _refine_init(_heuristic_init(f, z_meas), w, z_meas, scale)
        v_s = 1.0
    else:
        x0 = np.log([init.r_m, init.l_m, init.c_m, init.c_p])
        v_s = init.v_s_amp

    # wild trial steps can overflow; the solver rejects them
    with np.errstate(over="ignore", invalid="ignore"):
        sol = least_squares(
            _residuals, x0, jac=_jacobian, method="lm",
            xtol=xtol, ftol=1e-15, gtol=1e-15, max_nfev=max_iter,
            args=(w, z_meas, scale),
        )
    r, l, cm, cp = np.exp(sol.x)
    n = z_meas.size
    rms = float(np.sqrt(np.sum(sol.fun**2) / (2 * n)))

    rel_std = {}
    dof = 2 * n - 4
    try:
        cov = np.linalg.inv(sol.jac.T @ sol.jac) * (np.sum(sol.fun**2) / max(dof, 1))
        rel_std = {name: float(math.sqrt(max(cov[i, i], 0.0))) for i, name in enumerate(_PARAMS)}
    except np.linalg.LinAlgError:
        rel_std = {name: math.inf for name in _PARAMS}
    wide = [k for k, v in rel_std.items() if not v < 0.1]
    if wide:
        warnings.append("wide confidence on " + ", ".join(wide))

    try:
        model = BvdModel(v_s_amp=v_s, r_m=float(r), l_m=float(l), c_m=float(cm), c_p=float(cp))
    except DomainError as exc:  # pragma: no cover - exp() keeps parameters positive
        raise FitError(str(exc)) from exc
    result = FitResult(
        model=model, residual=rms, iterations=int(sol.nfev), converged=sol.status > 0,
        message=sol.message, rel_std=rel_std, warnings=warnings,
    )
    if sol.status <= 0:
        raise FitError(f"impedance fit did not converge: {sol.message}", best=result)
    return result


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

_RECT_HEADER = ["freq_hz", "z_re_ohm", "z_im_ohm"]
_POLAR_HEADER = ["freq_hz", "z_mag_ohm", "z_phase_deg"]


def read_impedance_csv(path) -> list[ImpedanceSample]:
    """Read an impedance sweep.

    Two header layouts are recognised: ``freq_hz,z_re_ohm,z_im_ohm`` and
    ``freq_hz,z_mag_ohm,z_phase_deg`` (converted to rectangular form).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError("empty file", path=path) from None
        if header == _RECT_HEADER:
            polar = False
        elif header == _POLAR_HEADER:
            polar = True
        else:
            raise InputError(f"unrecognised header {header!r}", line=1, path=path)
        samples = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise InputError(f"expected 3 fields, got {len(row)}", line=lineno, path=path)
            try:
                a, b, c = (float(v) for v in row)
            except ValueError:
                raise InputError(f"non-numeric field in {row!r}", line=lineno, path=path) from None
            if polar:
                phi = math.radians(c)
                b, c = b * math.cos(phi), b * math.sin(phi)
            try:
                samples.append(ImpedanceSample(a, b, c))
            except InputError as exc:
                raise InputError(str(exc), line=lineno, path=path) from None
    return samples


def write_impedance_csv(path, samples: Sequence[ImpedanceSample], digits: int = 9) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_RECT_HEADER)
        for s in samples:
            w.writerow([f"{s.freq:.{digits}g}", f"{s.z_re:.{digits}g}", f"{s.z_im:.{digits}g}"])


def model_to_dict(model: BvdModel, residual: float | None = None) -> dict:
    """Fitted-model JSON object (keys carry their units)."""
    res = resonance_frequencies(model)
    return {
        "v_s_amp_v": model.v_s_amp,
        "r_m_ohm": model.r_m,
        "l_m_h": model.l_m,
        "c_m_f": model.c_m,
        "c_p_f": model.c_p,
        "coupling": coupling_factor(model).coupling,
        "f_short_hz": res["f_short"],
        "f_open_hz": res["f_open"],
        "residual": residual,
    }


def model_from_dict(data: dict) -> BvdModel:
    """Inverse of :func:`model_to_dict`; derived keys are ignored."""
    missing = [k for k in ("r_m_ohm", "l_m_h", "c_m_f", "c_p_f") if k not in data]
    if missing:
        raise InputError(f"model is missing keys {missing}")
    try:
        return BvdModel(
            v_s_amp=float(data.get("v_s_amp_v", 1.0)),
            r_m=float(data["r_m_ohm"]),
            l_m=float(data["l_m_h"]),
            c_m=float(data["c_m_f"]),
            c_p=float(data["c_p_f"]),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid model: {exc}") from exc


def load_model_json(path) -> BvdModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model: {exc}", path=path) from exc
    if isinstance(data, dict) and "model" in data and isinstance(data["model"], dict):
        data = data["model"]
    if not isinstance(data, dict):
        raise InputError("model JSON must be an object", path=path)
    return model_from_dict(data)


def as_dict(model: BvdModel) -> dict:
    return asdict(model)
