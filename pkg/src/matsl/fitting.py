"""Log-log slope fits for asymptotic-rate verification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RegimeError


def loglog_slope(xs, ys):
    """Least-squares slope of log ys against log xs.

    Zero or non-finite ys are rejected: a decay measurement that hits the
    noise floor carries no rate information.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    good = np.isfinite(ys) & (ys > 0)
    if good.sum() < 2:
        raise RegimeError("not enough positive data points for a slope fit")
    return float(np.polyfit(np.log(xs[good]), np.log(ys[good]), 1)[0])


def intercept_vs_rate(xs, ys, rate):
    """Intercept of a linear fit ys ~ a + b * xs^(-rate), elementwise.

    Extrapolates a measured sequence to its limit assuming the known decay
    rate; ys may have trailing matrix dimensions.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys)
    t = xs ** (-rate)
    A = np.stack([np.ones_like(t), t], axis=1)
    flat = ys.reshape(len(xs), -1)
    coef, *_ = np.linalg.lstsq(A, flat, rcond=None)
    return coef[0].reshape(ys.shape[1:])


@dataclass
class FitRecord:
    """One measured deviation at one ladder point."""

    scale: float           # |rho| or n
    label: str
    deviation: float

    def as_dict(self):
        return {"scale": self.scale, "label": self.label,
                "deviation": self.deviation}


@dataclass
class FitReport:
    """Ladder measurements plus fitted slopes, JSON-serializable."""

    kind: str
    beta_exp: float
    records: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def add(self, scale, label, deviation):
        self.records.append(FitRecord(scale, label, float(deviation)))

    def fit_slopes(self):
        """Slope per label; None when the data sits at the numerical floor
        (identically tiny deviations carry no rate information)."""
        labels = sorted({r.label for r in self.records})
        for lab in labels:
            pts = [(r.scale, r.deviation) for r in self.records if r.label == lab]
            xs, ys = zip(*pts)
            try:
                self.slopes[lab] = loglog_slope(xs, ys)
            except RegimeError:
                self.slopes[lab] = None
        return self.slopes

    def max_deviation(self, label):
        return max(r.deviation for r in self.records if r.label == label)

    def rate_satisfied(self, required_slope, floor=1e-9):
        """True when every label decays at least as fast as required, where
        deviations at the floor count as (trivially) satisfied."""
        for lab, slope in self.slopes.items():
            if self.max_deviation(lab) <= floor:
                continue
            if slope is None or slope > required_slope:
                return False
        return True

    def as_dict(self):
        return {
            "kind": self.kind,
            "beta_exp": self.beta_exp,
            "records": [r.as_dict() for r in self.records],
            "slopes": dict(self.slopes),
            "extra": self.extra,
        }
