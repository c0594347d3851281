"""Interference visibility on lossless beam splitters and the purity it bounds.

A splitter with amplitude transmittivity ``t`` and reflectivity ``r`` maps
``|0> -> t|0'> + i r|1'>`` and ``|1> -> t|1'> + i r|0'>``. A pure balanced
superposition sent through an unbalanced splitter shows visibility below one;
the mixed state with the same visibility on a balanced splitter has purity
``1/2 + V^2/2``, which is therefore an upper bound on what the apparatus can
report.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

LOSSLESS_TOL = 1e-12
SWEEP_SAMPLES = 4096


@dataclass(frozen=True)
class BeamSplitter:
    r: float
    t: float

    def __post_init__(self):
        if self.r < 0 or self.t < 0:
            raise ValueError("amplitudes must be non-negative")
        if abs(self.r**2 + self.t**2 - 1.0) > LOSSLESS_TOL:
            raise ValueError(f"splitter is not lossless: r^2 + t^2 = {self.r**2 + self.t**2!r}")

    @classmethod
    def from_intensities(cls, r2: float, t2: float) -> "BeamSplitter":
        return cls(float(np.sqrt(r2)), float(np.sqrt(t2)))

    @classmethod
    def balanced(cls) -> "BeamSplitter":
        return cls(np.sqrt(0.5), np.sqrt(0.5))

    def unitary(self) -> np.ndarray:
        # Columns are the images of |0> and |1>.
        return np.array([[self.t, 1j * self.r], [1j * self.r, self.t]])


# Intensity values (r^2, t^2) of the splitter used for the path measurements,
# per wavelength label and polarization.
MEASURED_BS_INTENSITIES = {
    ("lambda1", "H"): (0.42, 0.58),
    ("lambda2", "H"): (0.45, 0.55),
    ("lambda1", "V"): (0.36, 0.64),
    ("lambda2", "V"): (0.43, 0.57),
}


def bs_table(intensities=None) -> dict[tuple[str, str], BeamSplitter]:
    """Map ``(wavelength, polarization) -> BeamSplitter`` from ``(r^2, t^2)`` pairs."""
    intensities = MEASURED_BS_INTENSITIES if intensities is None else intensities
    return {key: BeamSplitter.from_intensities(*rt) for key, rt in intensities.items()}


def visibility_1q(bs: BeamSplitter) -> float:
    return 2 * bs.r * bs.t


def visibility_2q(bs1: BeamSplitter, bs2: BeamSplitter) -> float:
    tt, rr = bs1.t * bs2.t, bs1.r * bs2.r
    return 1.0 - (tt - rr) ** 2 / (tt**2 + rr**2)


def purity_bound(v: float) -> float:
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v!r}")
    return 0.5 + 0.5 * v**2


def table_bounds(table=None) -> dict[str, dict[str, float]]:
    """Visibility and purity ceiling per polarization for a two-wavelength table."""
    table = bs_table() if table is None else table
    out = {}
    for pol in sorted({p for _, p in table}):
        bs1, bs2 = table[("lambda1", pol)], table[("lambda2", pol)]
        v = visibility_2q(bs1, bs2)
        out[pol] = {"visibility": v, "purity_bound": purity_bound(v)}
    return out


def check_purity_consistency(measured_purity: float, bound: float, sigma: float = 0.0) -> dict:
    """Flag a violation when the measurement exceeds the bound by more than 2 sigma."""
    excess = measured_purity - 2 * sigma - bound
    return {
        "measured_purity": float(measured_purity),
        "sigma": float(sigma),
        "bound": float(bound),
        "compatible": bool(excess <= 0),
        "margin": float(-excess),
    }


# Phase-sweep oracle: propagate the state through the splitters numerically and
# read visibility off the extrema of one output probability.

def _golden_min(f, a, b, tol=1e-12):
    """Golden-section search for the minimum value of ``f`` on ``[a, b]``."""
    g = (np.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return min(fc, fd)


def _sweep_extrema(prob, samples: int = SWEEP_SAMPLES) -> tuple[float, float]:
    """Max and min of ``prob`` over one period: grid scan, then golden-section refinement."""
    phases = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    values = prob(phases)
    step = phases[1] - phases[0]

    def refine(f, i):
        return _golden_min(lambda p: float(f(p)), phases[i] - step, phases[i] + step)

    hi = max(values.max(), -refine(lambda p: -prob(p), int(values.argmax())))
    lo = min(values.min(), refine(prob, int(values.argmin())))
    return float(hi), float(lo)


def _visibility(hi, lo):
    return (hi - lo) / (hi + lo)


def sweep_visibility_1q(bs: BeamSplitter, samples: int = SWEEP_SAMPLES) -> float:
    """Visibility of ``(|0> + e^{i phi}|1>)/sqrt(2)`` at output port 0, by phase sweep."""
    U = bs.unitary()

    u0, u1 = complex(U[0, 0]), complex(U[0, 1])

    def prob(phi):
        if np.ndim(phi) == 0:
            return abs(u0 + u1 * cmath.exp(1j * phi)) ** 2 / 2
        return np.abs(u0 + u1 * np.exp(1j * np.asarray(phi))) ** 2 / 2

    return _visibility(*_sweep_extrema(prob, samples))


def sweep_visibility_2q(bs1: BeamSplitter, bs2: BeamSplitter, samples: int = SWEEP_SAMPLES) -> float:
    """Visibility of ``(|01> + e^{i phi}|10>)/sqrt(2)`` at output ``|01'>``, by phase sweep."""
    U = np.kron(bs1.unitary(), bs2.unitary())

    # Row of U giving the |01'> amplitude; input support is |01>, |10>.
    u01, u10 = complex(U[1, 1]), complex(U[1, 2])

    def prob(phi):
        if np.ndim(phi) == 0:
            return abs(u01 + u10 * cmath.exp(1j * phi)) ** 2 / 2
        return np.abs(u01 + u10 * np.exp(1j * np.asarray(phi))) ** 2 / 2

    return _visibility(*_sweep_extrema(prob, samples))


def sweep_visibility_mixed(state_at_phase, bs1: BeamSplitter | None = None, bs2: BeamSplitter | None = None,
                           samples: int = SWEEP_SAMPLES) -> float:
    """Visibility at output ``|01'>`` for a two-qubit density matrix family.

    ``state_at_phase(phi)`` returns the 4x4 input density matrix for phase
    ``phi``; splitters default to balanced.
    """
    bs1 = bs1 or BeamSplitter.balanced()
    bs2 = bs2 or BeamSplitter.balanced()
    U = np.kron(bs1.unitary(), bs2.unitary())

    u = U[1]

    def prob(phi):
        if np.ndim(phi):
            return np.array([prob(p) for p in phi])
        rho = np.asarray(state_at_phase(float(phi)))
        return float((u @ rho @ u.conj()).real)

    return _visibility(*_sweep_extrema(prob, samples))
