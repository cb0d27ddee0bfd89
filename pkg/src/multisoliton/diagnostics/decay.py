"""Region-wise pointwise decay fits of ``|d^s u|``.

Regions follow the geometry of a multi-soliton: ``left`` is ``x <= alpha t``,
``right`` is ``x > beta t`` and ``soliton_j`` is the window between the
midpoints to the neighbouring crests, split into a left and right flank
at the crest. Only samples with amplitude in ``[floor, cap]`` enter the
least-squares fit: below the floor roundoff dominates, above the cap the
profile is not yet in its tail regime.
"""

import re
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameterError, WindowEmptyError
from ..grid import Field
from .functionals import Samples, field_samples

FLOOR = 1e-12
CAP = 1e-3
MIN_SAMPLES = 8


@dataclass(frozen=True)
class DecayFitResult:
    """Fit of ``log|d^s u|``.

    ``model="exponential"``: ``log|f| = a - rate * d`` with ``d`` the
    distance from the crest side of the window (``rate > 0`` means decay
    away from the solitons). ``model="algebraic"``: ``log|f| = a - rate *
    log(d)``; ``rate`` is then the exponent.
    """

    region: str
    s: int
    model: str
    rate: float
    x_lo: float
    x_hi: float
    r2: float
    rms: float
    floor: float
    cap: float
    t: float
    n_samples: int
    flank: str = ""


def _region_bounds(region, t, params, x, crests):
    # returns (x_lo, x_hi, direction): direction +1 when |f| decays as x grows
    speeds = np.asarray(params.speeds)
    if region == "left":
        return x[0], params.alpha * t, -1, params.alpha * t
    if region == "right":
        return params.beta * t, x[-1], +1, params.beta * t
    m = re.fullmatch(r"soliton_(\d+)", region)
    if not m:
        raise InvalidParameterError(f"unknown region {region!r}")
    j = int(m.group(1))
    if not 1 <= j <= speeds.size:
        raise InvalidParameterError(f"region {region!r}: soliton index out of range")
    lo = x[0] if j == 1 else 0.5 * (crests[j - 2] + crests[j - 1])
    hi = x[-1] if j == speeds.size else 0.5 * (crests[j - 1] + crests[j])
    return lo, hi, 0, crests[j - 1]


def _crest_positions(u_abs, x, t, params):
    # locate each crest by the maximum near its nominal position c_j t
    speeds = np.asarray(params.speeds)
    nominal = speeds * t
    out = []
    for j, c in enumerate(nominal):
        lo = -np.inf if j == 0 else 0.5 * (nominal[j - 1] + c)
        hi = np.inf if j == speeds.size - 1 else 0.5 * (c + nominal[j + 1])
        m = (x > lo) & (x <= hi)
        out.append(x[m][np.argmax(u_abs[m])] if m.any() else c)
    return np.array(out)


def _fit(xs, ys, model, ref, direction):
    d = direction * (xs - ref)
    lv = np.log(ys)
    if model == "exponential":
        feat = d
    elif model == "algebraic":
        if np.any(d <= 0):
            keep = d > 0
            d, lv = d[keep], lv[keep]
        feat = np.log(d)
    else:
        raise InvalidParameterError(f"unknown model {model!r}")
    if feat.size < MIN_SAMPLES:
        raise WindowEmptyError(f"{feat.size} usable samples; need {MIN_SAMPLES}")
    slope, icpt = np.polyfit(feat, lv, 1)
    pred = icpt + slope * feat
    ss_res = float(np.sum((lv - pred) ** 2))
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), r2, float(np.sqrt(ss_res / feat.size)), feat.size


def pointwise_decay_fit(u, t, params, region, s=0, model="exponential", floor=FLOOR,
                        cap=CAP, flank="right"):
    """Least-squares decay fit of ``|d^s u|`` in one region.

    ``u`` is a snapshot :class:`Field` (spectral derivatives) or
    :class:`Samples` holding the needed derivative. ``flank`` selects the
    side of a soliton window and is ignored for ``left``/``right``.
    Raises :class:`WindowEmptyError` when fewer than 8 samples fall in
    the amplitude band.
    """
    if not 0 < floor < cap:
        raise InvalidParameterError("need 0 < floor < cap")
    smp = u if isinstance(u, Samples) else field_samples(u, s, t) if isinstance(u, Field) \
        else None
    if smp is None:
        raise InvalidParameterError("u must be a Field or Samples")
    if smp.s_max < s:
        raise InvalidParameterError(f"samples hold derivatives up to {smp.s_max}, need {s}")
    x = smp.x
    f = np.abs(smp.derivs[s])
    crests = _crest_positions(np.abs(smp.derivs[0]), x, t, params)
    lo, hi, direction, ref = _region_bounds(region, t, params, x, crests)
    if direction == 0:
        if flank == "left":
            hi, direction = ref, -1
        elif flank == "right":
            lo, direction = ref, +1
        else:
            raise InvalidParameterError(f"flank must be 'left' or 'right', got {flank!r}")
    in_region = (x >= lo) & (x <= hi) if region != "right" else (x > lo) & (x <= hi)
    band = in_region & (f >= floor) & (f <= cap)
    if band.sum() < MIN_SAMPLES:
        raise WindowEmptyError(
            f"{region} (t={t}, s={s}): {int(band.sum())} samples in [{floor:.0e}, {cap:.0e}]")
    xs, ys = x[band], f[band]
    rate, r2, rms, n = _fit(xs, ys, model, ref, direction)
    return DecayFitResult(region, int(s), model, rate, float(xs.min()), float(xs.max()),
                          r2, rms, floor, cap, float(t), n,
                          flank if region.startswith("soliton") else "")


def weighted_sup(u, t, beta, s, n):
    """``sup_{x > beta t} |d^s u| (x - beta t)^n`` over the samples."""
    smp = u if isinstance(u, Samples) else field_samples(u, s, t)
    keep = smp.x > beta * t
    if not keep.any():
        raise WindowEmptyError(f"no samples beyond x = {beta * t}")
    d = smp.x[keep] - beta * t
    return float(np.max(np.abs(smp.derivs[s][keep]) * d ** n))


__all__ = ["DecayFitResult", "pointwise_decay_fit", "weighted_sup", "FLOOR", "CAP"]
