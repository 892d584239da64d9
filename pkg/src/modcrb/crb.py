"""Closed-form Cramer-Rao bounds for range and angle of a near-field target.

The observation model is a single narrowband snapshot batch with an unknown
complex path gain: the bounds below already account for that nuisance
parameter. Every bound shares the same structure

    crb = numerator / (information - coupling**2 / other_information)

where the information terms are quadratic forms of the steering-vector
derivatives. For the subarray-wise models these collapse to sums over
subarrays; for the exact spherical model they are sums over antennas.

Information denominators that vanish (to a relative tolerance of 1e-12)
mark a singular Fisher matrix; the affected bound is reported as +inf and
flagged rather than returned as a huge or negative number.

Units: range bounds in meters squared, angle bounds in radians squared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidConfigurationError
from .geometry import ModularLayout, TargetPolar, radial_terms
from .wavefront import WavefrontModel

__all__ = [
    "SensingSnr",
    "CrbPair",
    "HspmIntermediates",
    "SwmIntermediates",
    "intermediates_hspm",
    "intermediates_swm",
    "crb_hspm_dist",
    "crb_hspm_shared",
    "crb_pwm",
    "crb_swm",
    "crb_bounds",
    "crb_boresight",
    "crb_boresight_far",
    "boresight_far_range_bound",
    "optimal_spread",
]

#: Relative tolerance below which an information denominator counts as zero.
DEGENERATE_RTOL = 1e-12

#: Tolerance on cos(theta) below which the geometry counts as endfire.
ENDFIRE_TOL = 1e-12

FLAG_DEGENERATE = "degenerate"
FLAG_ENDFIRE = "endfire"


@dataclass(frozen=True)
class SensingSnr:
    """Sensing signal-to-noise ratio gamma = |gain|^2 / noise power."""

    gamma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidConfigurationError(
                f"snr gamma must be finite and positive, got {self.gamma}"
            )

    @classmethod
    def from_db(cls, snr_db: float) -> "SensingSnr":
        """Build from a decibel value."""
        return cls(gamma=10.0 ** (snr_db / 10.0))

    @property
    def db(self) -> float:
        """Decibel representation."""
        return 10.0 * math.log10(self.gamma)


@dataclass(frozen=True)
class CrbPair:
    """Range and angle bounds for one wavefront model at one target.

    Attributes:
        crb_r: Range bound, meters squared; +inf when range is
            unidentifiable under the model.
        crb_theta: Angle bound, radians squared; +inf at endfire or when
            the angle information vanishes.
        model: Wavefront model the pair belongs to, or None when the pair
            was computed from raw steering data without a model label.
        flags: Subset of {"degenerate", "endfire"}.
        diagnostics: Intermediate quantities used by the computation.
    """

    crb_r: float
    crb_theta: float
    model: WavefrontModel | None
    flags: tuple[str, ...] = ()
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        for name, value in (("crb_r", self.crb_r), ("crb_theta", self.crb_theta)):
            if math.isnan(value) or value <= 0:
                raise InvalidConfigurationError(
                    f"{name} must be positive or +inf, got {value}"
                )


@dataclass(frozen=True)
class HspmIntermediates:
    """Subarray-level sums feeding the subarray-wise bounds.

    p/q families aggregate range derivatives of the subarray ranges,
    z families aggregate derivatives of the subarray arrival sines:

        p       sum_k d r_k / d r
        p_tilde sum_k d r_k / d theta
        q       sum_k (d r_k / d r)^2
        q_tilde sum_k (d r_k / d theta)^2
        q_hat   sum_k (d r_k / d r)(d r_k / d theta)
        z       sum_k (d sin_k / d r)^2
        z_tilde sum_k (d sin_k / d theta)^2
        z_hat   sum_k (d sin_k / d r)(d sin_k / d theta)
    """

    p: float
    p_tilde: float
    q: float
    q_tilde: float
    q_hat: float
    z: float
    z_tilde: float
    z_hat: float


@dataclass(frozen=True)
class SwmIntermediates:
    """Antenna-level sums feeding the exact spherical-wave bounds.

        w_r          sum over antennas of d range / d r
        w_theta      sum of d range / d theta
        w_rr         sum of (d range / d r)^2
        w_rtheta     sum of (d range / d r)(d range / d theta)
        w_thetatheta sum of (d range / d theta)^2
    """

    w_r: float
    w_theta: float
    w_rr: float
    w_rtheta: float
    w_thetatheta: float


def _num_scale(wavelength: float, snr: SensingSnr) -> float:
    """Common numerator factor (wavelength / 2 pi)^2 / gamma."""
    if wavelength <= 0:
        raise InvalidConfigurationError(f"wavelength must be positive, got {wavelength}")
    return (wavelength / (2.0 * math.pi)) ** 2 / snr.gamma


@dataclass(frozen=True)
class _Quadratic:
    """Information quadratic form with cancellation-free pieces.

    info_r / info_theta / info_cross are the Fisher-information surrogates
    entering the bounds; scale_r / scale_theta are the same expressions
    with every term taken positive, used for the degeneracy test.
    """

    info_r: float
    info_theta: float
    info_cross: float
    scale_r: float
    scale_theta: float


def _centered_power(values: np.ndarray) -> float:
    """Sum of squared deviations from the mean."""
    delta = values - values.mean()
    return float((delta * delta).sum())


def _centered_cross(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of products of deviations from the means."""
    return float(((a - a.mean()) * (b - b.mean())).sum())


def _pair_from_quadratic(
    model: WavefrontModel,
    num: float,
    quad: _Quadratic,
    cos_theta: float,
    diagnostics: dict[str, Any],
) -> CrbPair:
    """Apply the shared denominator / degeneracy logic and build the pair."""
    flags: set[str] = set()
    inf = math.inf
    d_r, d_t, d_c = quad.info_r, quad.info_theta, quad.info_cross
    deg_r = not (d_r > DEGENERATE_RTOL * quad.scale_r)
    deg_t = not (d_t > DEGENERATE_RTOL * quad.scale_theta)

    diagnostics = dict(diagnostics)
    diagnostics.update(
        info_range=d_r, info_angle=d_t, info_cross=d_c,
        scale_range=quad.scale_r, scale_angle=quad.scale_theta,
    )

    if deg_r and deg_t:
        crb_r, crb_t = inf, inf
        flags.add(FLAG_DEGENERATE)
    elif deg_r:
        crb_r, crb_t = inf, num / d_t
        flags.add(FLAG_DEGENERATE)
    elif deg_t:
        crb_r, crb_t = num / d_r, inf
        flags.add(FLAG_DEGENERATE)
    else:
        det2 = d_r * d_t - d_c * d_c
        diagnostics.update(
            determinant=det2,
            denominator_range=det2 / d_t,
            denominator_angle=det2 / d_r,
        )
        if not (det2 > DEGENERATE_RTOL * (d_r * d_t)):
            crb_r, crb_t = inf, inf
            flags.add(FLAG_DEGENERATE)
        else:
            crb_r = num * d_t / det2
            crb_t = num * d_r / det2

    if crb_t == inf and abs(cos_theta) < ENDFIRE_TOL:
        flags.add(FLAG_ENDFIRE)
    return CrbPair(
        crb_r=crb_r,
        crb_theta=crb_t,
        model=model,
        flags=tuple(sorted(flags)),
        diagnostics=diagnostics,
    )


def _hspm_arrays(layout: ModularLayout, target: TargetPolar, shared_angle: bool):
    """Subarray derivative arrays for the two subarray-wise models."""
    terms = radial_terms(layout.subarray_x, target.r, target.theta)
    if shared_angle:
        k = layout.num_subarrays
        cos_t = math.cos(target.theta)
        terms = dict(terms)
        terms["ds_dr"] = np.zeros(k)
        terms["ds_dt"] = np.full(k, cos_t)
    return terms


def _hspm_intermediates_from(terms: dict[str, np.ndarray]) -> HspmIntermediates:
    a, at = terms["dr_dr"], terms["dr_dt"]
    sr, st = terms["ds_dr"], terms["ds_dt"]
    return HspmIntermediates(
        p=float(a.sum()),
        p_tilde=float(at.sum()),
        q=float((a * a).sum()),
        q_tilde=float((at * at).sum()),
        q_hat=float((a * at).sum()),
        z=float((sr * sr).sum()),
        z_tilde=float((st * st).sum()),
        z_hat=float((sr * st).sum()),
    )


def intermediates_hspm(layout: ModularLayout, target: TargetPolar) -> HspmIntermediates:
    """Subarray-level sums for the distinct-arrival-angle model.

    Args:
        layout: Array layout.
        target: Target position.

    Returns:
        HspmIntermediates of the eight sums over subarrays.
    """
    return _hspm_intermediates_from(_hspm_arrays(layout, target, shared_angle=False))


def intermediates_swm(layout: ModularLayout, target: TargetPolar) -> SwmIntermediates:
    """Antenna-level sums for the exact spherical-wave model."""
    terms = radial_terms(layout.element_x, target.r, target.theta)
    a, at = terms["dr_dr"], terms["dr_dt"]
    return SwmIntermediates(
        w_r=float(a.sum()),
        w_theta=float(at.sum()),
        w_rr=float((a * a).sum()),
        w_rtheta=float((a * at).sum()),
        w_thetatheta=float((at * at).sum()),
    )


def _hspm_quadratic(layout: ModularLayout, terms: dict[str, np.ndarray]) -> _Quadratic:
    """Subarray-wise information pieces.

    The raw form of the range information is
        K (M^2 - 1) d^2 z + 12 (K q - p^2)
    and K q - p^2 is evaluated as K * sum((a - mean(a))^2) through the
    cancellation-free dr_dr_m1 values, which keeps the result accurate when
    every dr_dr is within rounding of 1.
    """
    k = layout.num_subarrays
    m = layout.subarray_size
    cm = (m * m - 1) * layout.pitch**2
    a_m1, at = terms["dr_dr_m1"], terms["dr_dt"]
    a = terms["dr_dr"]
    sr, st = terms["ds_dr"], terms["ds_dt"]

    z = float((sr * sr).sum())
    z_tilde = float((st * st).sum())
    z_hat = float((sr * st).sum())
    q = float((a * a).sum())
    q_tilde = float((at * at).sum())

    info_r = k * cm * z + 12.0 * k * _centered_power(a_m1)
    info_t = k * cm * z_tilde + 12.0 * k * _centered_power(at)
    info_c = k * cm * z_hat + 12.0 * k * _centered_cross(a_m1, at)
    scale_r = k * cm * z + 12.0 * k * q
    scale_t = k * cm * z_tilde + 12.0 * k * q_tilde
    return _Quadratic(info_r, info_t, info_c, scale_r, scale_t)


def _crb_hspm(
    layout: ModularLayout,
    target: TargetPolar,
    wavelength: float,
    snr: SensingSnr,
    shared_angle: bool,
) -> CrbPair:
    terms = _hspm_arrays(layout, target, shared_angle)
    quad = _hspm_quadratic(layout, terms)
    k = layout.num_subarrays
    m = layout.subarray_size
    num = 6.0 * k / m * _num_scale(wavelength, snr)
    model = WavefrontModel.HSPM_SHARED if shared_angle else WavefrontModel.HSPM_DIST
    diagnostics = {"intermediates": _hspm_intermediates_from(terms)}
    return _pair_from_quadratic(model, num, quad, math.cos(target.theta), diagnostics)


def crb_hspm_dist(
    layout: ModularLayout,
    target: TargetPolar,
    wavelength: float,
    snr: SensingSnr,
) -> CrbPair:
    """Bounds under the subarray-wise model with distinct arrival angles.

    Args:
        layout: Array layout.
        target: Target position.
        wavelength: Carrier wavelength, meters.
        snr: Sensing SNR.

    Returns:
        CrbPair; crb_r is +inf when the range information degenerates
        (e.g. a single subarray).
    """
    return _crb_hspm(layout, target, wavelength, snr, shared_angle=False)


def crb_hspm_shared(
    layout: ModularLayout,
    target: TargetPolar,
    wavelength: float,
    snr: SensingSnr,
) -> CrbPair:
    """Bounds under the subarray-wise model with one shared arrival angle.

    Identical to crb_hspm_dist except that the per-subarray arrival-sine
    derivatives are replaced by those of the global angle: the sine varies
    only through theta, at rate cos(theta), for every subarray.
    """
    return _crb_hspm(layout, target, wavelength, snr, shared_angle=True)


def crb_pwm(
    layout: ModularLayout,
    target: TargetPolar,
    wavelength: float,
    snr: SensingSnr,
) -> CrbPair:
    """Bounds under the fully planar model.

    Range does not enter the planar steering vector, so crb_r is +inf by
    construction. The angle bound is finite away from endfire provided the
    layout has angle information (more than one antenna).
    """
    k = layout.num_subarrays
    m = layout.subarray_size
    cm = (m * m - 1) * layout.pitch**2
    cos_t = math.cos(target.theta)
    x = layout.subarray_x

    # 12 K M sum(x^2) + K^2 M (M^2-1) d^2 - 12 M sum(x)^2, in centered form.
    info = k * k * m * cm + 12.0 * m * k * _centered_power(x)
    scale = k * k * m * cm + 12.0 * m * k * float((x * x).sum())

    diagnostics = {
        "info_angle": info,
        "scale_angle": scale,
        "offset_spread": float((x * x).sum()),
    }
    flags: set[str] = set()
    if not (info > DEGENERATE_RTOL * scale) or scale == 0.0:
        crb_t = math.inf
        flags.add(FLAG_DEGENERATE)
    elif abs(cos_t) < ENDFIRE_TOL:
        crb_t = math.inf
    else:
        num = 6.0 * k / (cos_t * cos_t) * _num_scale(wavelength, snr)
        crb_t = num / info
    if crb_t == math.inf and abs(cos_t) < ENDFIRE_TOL:
        flags.add(FLAG_ENDFIRE)
    return CrbPair(
        crb_r=math.inf,
        crb_theta=crb_t,
        model=WavefrontModel.PWM,
        flags=tuple(sorted(flags)),
        diagnostics=diagnostics,
    )


def crb_swm(
    layout: ModularLayout,
    target: TargetPolar,
    wavelength: float,
    snr: SensingSnr,
) -> CrbPair:
    """Bounds under the exact spherical-wave model.

    The information terms sum over every antenna rather than every
    subarray; no small-subarray expansion is involved.
    """
    terms = radial_terms(layout.element_x, target.r, target.theta)
    n = layout.num_elements
    a_m1, at = terms["dr_dr_m1"], terms["dr_dt"]
    a = terms["dr_dr"]

    info_r = n * _centered_power(a_m1)
    info_t = n * _centered_power(at)
    info_c = n * _centered_cross(a_m1, at)
    scale_r = n * float((a * a).sum())
    scale_t = n * float((at * at).sum())
    quad = _Quadratic(info_r, info_t, info_c, scale_r, scale_t)

    num = 0.5 * n * _num_scale(wavelength, snr)
    diagnostics = {"intermediates": intermediates_swm(layout, target)}
    return _pair_from_quadratic(
        WavefrontModel.SWM, num, quad, math.cos(target.theta), diagnostics
    )


def crb_bounds(
    model: WavefrontModel,
    layout: ModularLayout,
    target: TargetPolar,
    wavelength: float,
    snr: SensingSnr,
) -> CrbPair:
    """Dispatch to the closed form matching a wavefront model."""
    fn = {
        WavefrontModel.HSPM_DIST: crb_hspm_dist,
        WavefrontModel.HSPM_SHARED: crb_hspm_shared,
        WavefrontModel.PWM: crb_pwm,
        WavefrontModel.SWM: crb_swm,
    }[model]
    return fn(layout, target, wavelength, snr)


def _require_boresight_symmetric(layout: ModularLayout, target: TargetPolar) -> None:
    if target.theta != 0.0:
        raise InvalidConfigurationError(
            f"boresight form requires theta = 0, got {target.theta}"
        )
    if not layout.is_centro_symmetric:
        raise InvalidConfigurationError(
            f"boresight form requires a centro-symmetric layout, got spacings {layout.spacings}"
        )


def crb_boresight(
    layout: ModularLayout,
    target: TargetPolar,
    wavelength: float,
    snr: SensingSnr,
) -> CrbPair:
    """Exact subarray-wise bounds at boresight for symmetric layouts.

    At theta = 0 over a centro-symmetric layout the cross information
    vanishes and the general subarray-wise bounds reduce to single-ratio
    expressions in r_k = sqrt(r^2 + x_k^2).

    Args:
        layout: Centro-symmetric array layout.
        target: Target with theta == 0.
        wavelength: Carrier wavelength, meters.
        snr: Sensing SNR.

    Returns:
        CrbPair under the distinct-arrival-angle subarray-wise model.

    Raises:
        InvalidConfigurationError: If theta != 0 or the layout is not
            centro-symmetric.
    """
    _require_boresight_symmetric(layout, target)
    k = layout.num_subarrays
    m = layout.subarray_size
    cm = (m * m - 1) * layout.pitch**2
    r = target.r
    x = layout.subarray_x
    rk = np.hypot(np.full_like(x, r), x)

    b = r / rk
    # b - 1 without cancellation: r - rk = -x^2 / (r + rk).
    b_m1 = -(x * x) / (rk * (r + rk))
    z_p = float(((r * x) ** 2 / rk**6).sum())
    q_p = float((b * b).sum())
    zt_p = float((r**6 / rk**6).sum())
    qt_p = float(((r * x) ** 2 / rk**2).sum())

    info_r = k * cm * z_p + 12.0 * k * _centered_power(b_m1)
    scale_r = k * cm * z_p + 12.0 * k * q_p
    info_t = m * cm * zt_p + 12.0 * m * qt_p

    num_r = 6.0 * k / m * _num_scale(wavelength, snr)
    num_t = 6.0 * _num_scale(wavelength, snr)

    flags: set[str] = set()
    if info_r > DEGENERATE_RTOL * scale_r:
        crb_r = num_r / info_r
    else:
        crb_r = math.inf
        flags.add(FLAG_DEGENERATE)
    crb_t = num_t / info_t

    diagnostics = {
        "z_prime": z_p, "q_prime": q_p,
        "z_tilde_prime": zt_p, "q_tilde_prime": qt_p,
        "info_range": info_r, "info_angle": info_t, "scale_range": scale_r,
    }
    return CrbPair(
        crb_r=crb_r,
        crb_theta=crb_t,
        model=WavefrontModel.HSPM_DIST,
        flags=tuple(sorted(flags)),
        diagnostics=diagnostics,
    )


def _far_range_denominator(k: int, cm: float, spread: float) -> tuple[float, float]:
    """Denominator of the asymptotic range bound and its degeneracy scale."""
    denom = k * cm * spread - 3.0 * spread * spread
    scale = k * cm * spread + 3.0 * spread * spread
    return denom, scale


def boresight_far_range_bound(
    spread: float,
    num_subarrays: int,
    subarray_size: int,
    pitch: float,
    r: float,
    wavelength: float,
    snr: SensingSnr,
) -> float:
    """Asymptotic boresight range bound as a function of the offset spread.

    The range bound of crb_boresight_far depends on the subarray offsets
    only through their spread sum(x_k^2); this evaluates it directly from
    that number so the spread can be treated as a free design variable.

    Args:
        spread: Sum of squared subarray offsets, meters squared.
        num_subarrays: Subarray count K.
        subarray_size: Antennas per subarray M.
        pitch: Antenna spacing, meters.
        r: Target range, meters.
        wavelength: Carrier wavelength, meters.
        snr: Sensing SNR.

    Returns:
        Range bound in meters squared; +inf when the information
        denominator is not positive, which happens outside the admissible
        interval (0, K (M^2 - 1) d^2 / 3). The minimizing spread is
        optimal_spread(num_subarrays, subarray_size, pitch).
    """
    k = num_subarrays
    m = subarray_size
    cm = (m * m - 1) * pitch**2
    denom, scale = _far_range_denominator(k, cm, spread)
    if not (denom > DEGENERATE_RTOL * scale):
        return math.inf
    num_r = 6.0 * k / m * _num_scale(wavelength, snr)
    return num_r * r**4 / denom


def crb_boresight_far(
    layout: ModularLayout,
    target: TargetPolar,
    wavelength: float,
    snr: SensingSnr,
) -> CrbPair:
    """Asymptotic boresight bounds for ranges far beyond the aperture.

    Second-order expansion of crb_boresight in (aperture / range): with
    spread = sum(x_k^2),

        crb_r     ~ num_r * r^4 / (K (M^2-1) d^2 spread - 3 spread^2)
        crb_theta ~ num_t / (K (M^2-1) d^2 + 12 spread - correction / r^2)

    where correction = (M^2-1) d^2 spread + 12 sum(x_k^4). The range bound
    grows as r^4 and is +inf when the spread term cannot support range
    estimation (single subarray, or spread beyond the admissible region).
    """
    _require_boresight_symmetric(layout, target)
    k = layout.num_subarrays
    m = layout.subarray_size
    cm = (m * m - 1) * layout.pitch**2
    r = target.r
    x = layout.subarray_x
    spread = float((x * x).sum())
    fourth = float((x**4).sum())

    num_r = 6.0 * k / m * _num_scale(wavelength, snr)
    num_t = 6.0 / m * _num_scale(wavelength, snr)

    denom_r, scale_r = _far_range_denominator(k, cm, spread)
    correction = cm * spread + 12.0 * fourth
    denom_t = k * cm + 12.0 * spread - correction / r**2

    flags: set[str] = set()
    if denom_r > DEGENERATE_RTOL * scale_r:
        crb_r = num_r * r**4 / denom_r
    else:
        crb_r = math.inf
        flags.add(FLAG_DEGENERATE)
    scale_t = k * cm + 12.0 * spread + correction / r**2
    if denom_t > DEGENERATE_RTOL * scale_t:
        crb_t = num_t / denom_t
    else:
        crb_t = math.inf
        flags.add(FLAG_DEGENERATE)

    diagnostics = {
        "offset_spread": spread,
        "offset_fourth_moment": fourth,
        "denominator_range": denom_r,
        "denominator_angle": denom_t,
        "regime_ratio": layout.aperture / r,
    }
    return CrbPair(
        crb_r=crb_r,
        crb_theta=crb_t,
        model=WavefrontModel.HSPM_DIST,
        flags=tuple(sorted(flags)),
        diagnostics=diagnostics,
    )


def optimal_spread(num_subarrays: int, subarray_size: int, pitch: float) -> float:
    """Offset spread minimizing the asymptotic boresight range bound.

    The denominator of the asymptotic range bound is quadratic in the
    spread sum(x_k^2); its maximum sits at K (M^2 - 1) d^2 / 6.

    Args:
        num_subarrays: Subarray count K.
        subarray_size: Antennas per subarray M.
        pitch: Antenna spacing, meters.

    Returns:
        The optimizing spread, meters squared.
    """
    return num_subarrays * (subarray_size**2 - 1) * pitch**2 / 6.0
