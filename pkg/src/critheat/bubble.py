"""The 4D ground-state bubble, its constants, scalings, and small data.

W(x) = 1 / (1 + |x|^2 / 8) is the stationary solution of the 4D
energy-critical heat equation (Delta W + W^3 = 0) and the extremizer of
the Sobolev embedding Hdot^1 subset L^4. Its integrals reduce under
s = rho^2 / 8 to Beta integrals:

    ||grad W||_{L^2}^2 = ||W||_{L^4}^4 = 32 pi^2 / 3,
    E(W) = 8 pi^2 / 3 = (1/4) ||W||_{Hdot^1}^2,
    C_Sobolev = ||grad W||_{L^2}^{-1/2} = (3 / (32 pi^2))^{1/4}.

This module evaluates them by radial quadrature (composite Gauss-Legendre
in log rho, truncated at r_max = 1e6 with a recorded truncation estimate)
so the hard-coded Beta values stay independent test oracles.

W is never placed on the torus as solver initial data: it is not in
L^2(R^4) (truncated mass grows logarithmically), so torus truncation of
its |x|^{-2} tail is uncontrolled. Torus work uses the localized bump
from `subcritical_datum`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.fft as _fft
from scipy.special import gamma as _gamma
from numpy.polynomial.legendre import leggauss

from .spectral import (
    PhysicalField,
    TorusGrid,
    get_fft_workers,
    lebesgue_norm,
    sobolev_norm_sq,
    transform_forward,
)


@dataclass(frozen=True)
class BubbleSpec:
    """Scaling lambda and center of a bubble W_lambda(x) = lambda W(lambda (x - center))."""

    scale: float = 1.0
    center: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")


def bubble_radial(rho: np.ndarray) -> np.ndarray:
    """W as a function of radius, 1 / (1 + rho^2 / 8)."""
    return 1.0 / (1.0 + np.asarray(rho, dtype=float) ** 2 / 8.0)


def bubble_radial_derivative(rho: np.ndarray) -> np.ndarray:
    """dW/drho = -(rho/4) (1 + rho^2/8)^{-2}."""
    rho = np.asarray(rho, dtype=float)
    return -(rho / 4.0) / (1.0 + rho**2 / 8.0) ** 2


def evaluate_bubble(spec: BubbleSpec, x: Sequence[float] | np.ndarray) -> float | np.ndarray:
    """W_lambda at one point or an array of points (last axis = 4 coordinates)."""
    pts = np.asarray(x, dtype=float)
    rel = pts - np.asarray(spec.center)
    rho = np.sqrt(np.sum(rel**2, axis=-1))
    out = spec.scale * bubble_radial(spec.scale * rho)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RadialQuadrature:
    """Nodes and positive weights for int_0^infty f(rho) 2 pi^2 rho^3 drho.

    Composite Gauss-Legendre panels in log rho on [r_min, r_max]; the
    weights absorb the 4D volume element. `head_volume` is the exact
    volume of the untreated ball below r_min (multiply by sup|f| for a
    head bound); tails must decay fast enough for r_max to be negligible.
    """

    r_min: float
    r_max: float
    nodes: np.ndarray
    weights: np.ndarray
    head_volume: float

    @classmethod
    def build(
        cls,
        r_min: float = 1e-6,
        r_max: float = 1e6,
        panels_per_decade: int = 4,
        gauss_order: int = 16,
    ) -> "RadialQuadrature":
        if not 0 < r_min < r_max:
            raise ValueError("need 0 < r_min < r_max")
        u_lo, u_hi = np.log(r_min), np.log(r_max)
        n_panels = int(np.ceil(panels_per_decade * (u_hi - u_lo) / np.log(10.0)))
        edges = np.linspace(u_lo, u_hi, n_panels + 1)
        gx, gw = leggauss(gauss_order)
        nodes, weights = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            u = mid + half * gx
            rho = np.exp(u)
            nodes.append(rho)
            # d rho = rho d u, volume element 2 pi^2 rho^3
            weights.append(half * gw * 2.0 * np.pi**2 * rho**4)
        nodes = np.concatenate(nodes)
        weights = np.concatenate(weights)
        head_volume = np.pi**2 * r_min**4 / 2.0
        return cls(r_min, r_max, nodes, weights, head_volume)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.sum(self.weights * f(self.nodes)))

    def truncation_estimate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Head bound plus a tail estimate from the observed end slope."""
        head = abs(float(f(np.array([self.r_min]))[0])) * self.head_volume
        r1, r2 = self.nodes[-2], self.nodes[-1]
        g1 = abs(float(f(np.array([r1]))[0])) * 2.0 * np.pi**2 * r1**3
        g2 = abs(float(f(np.array([r2]))[0])) * 2.0 * np.pi**2 * r2**3
        tail = np.inf
        if g2 == 0:
            tail = 0.0
        elif g1 > 0:
            slope = np.log(g2 / g1) / np.log(r2 / r1)
            if slope < -1:
                tail = g2 * r2 / (-slope - 1.0)
        return head + tail


@dataclass(frozen=True)
class BubbleConstants:
    grad_l2_sq: float
    l4_fourth: float
    energy: float
    sobolev_constant: float
    quadrature_truncation: float


def sobolev_constant_general(n: int) -> float:
    """Best constant of Hdot^1(R^n) subset L^{2n/(n-2)}:
    sqrt(1/(pi n (n-2))) (Gamma(n)/Gamma(n/2))^{1/n}."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    return float(
        np.sqrt(1.0 / (np.pi * n * (n - 2))) * (_gamma(n) / _gamma(n / 2.0)) ** (1.0 / n)
    )


def bubble_constants(quadrature: RadialQuadrature | None = None) -> BubbleConstants:
    """Gradient, L^4, energy and Sobolev constants of W by radial quadrature."""
    quad = quadrature if quadrature is not None else RadialQuadrature.build()

    def grad_sq(rho):
        return bubble_radial_derivative(rho) ** 2

    def w4(rho):
        return bubble_radial(rho) ** 4

    grad_l2_sq = quad.integrate(grad_sq)
    l4_fourth = quad.integrate(w4)
    energy = 0.5 * grad_l2_sq - 0.25 * l4_fourth
    trunc = quad.truncation_estimate(grad_sq) + quad.truncation_estimate(w4)
    return BubbleConstants(
        grad_l2_sq=grad_l2_sq,
        l4_fourth=l4_fourth,
        energy=energy,
        sobolev_constant=grad_l2_sq**-0.25,
        quadrature_truncation=trunc,
    )


def stationarity_residual(
    points: Sequence[Sequence[float]] | np.ndarray, h_fd: float = 1e-2
) -> list[float]:
    """|Delta W + W^3| at each point via second-order central differences."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 4:
        raise ValueError("points must have 4 coordinates")
    spec = BubbleSpec()
    out = []
    for x in pts:
        lap = 0.0
        for i in range(4):
            e = np.zeros(4)
            e[i] = h_fd
            lap += (
                evaluate_bubble(spec, x + e)
                - 2.0 * evaluate_bubble(spec, x)
                + evaluate_bubble(spec, x - e)
            ) / h_fd**2
        w = evaluate_bubble(spec, x)
        out.append(abs(lap + w**3))
    return out


def truncated_l2_growth(
    r_values: Sequence[float], panels_per_decade: int = 8, gauss_order: int = 16
) -> list[float]:
    """Truncated mass int_{|x| <= R} W^2 dx for increasing radii R.

    Grows logarithmically in R (W^2 ~ 64 |x|^{-4}), witnessing W not in L^2.
    """
    rs = np.asarray(r_values, dtype=float)
    if np.any(rs <= 0) or np.any(np.diff(rs) <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    out = []
    for r in rs:
        quad = RadialQuadrature.build(
            r_min=1e-6, r_max=r, panels_per_decade=panels_per_decade, gauss_order=gauss_order
        )
        # head below r_min: W ~ 1 there, add the exact small-ball volume
        out.append(quad.integrate(lambda rho: bubble_radial(rho) ** 2) + quad.head_volume)
    return out


def _as_power_of_int(lam: float) -> tuple[int, int]:
    """Decompose lambda as m/1 or 1/m; reject anything else."""
    frac = Fraction(lam).limit_denominator(10**6)
    if abs(float(frac) - lam) > 1e-12 * max(1.0, abs(lam)):
        raise ValueError(f"incompatible rescale factor {lam}")
    if frac.numerator >= 1 and frac.denominator == 1:
        return frac.numerator, 1
    if frac.numerator == 1 and frac.denominator >= 1:
        return 1, frac.denominator
    raise ValueError(f"rescale factor must be an integer or 1/integer, got {lam}")


def _refine_axis(coeffs: np.ndarray, axis: int, m: int) -> np.ndarray:
    """Zero-pad FFT coefficients along one axis, splitting the Nyquist mode."""
    n = coeffs.shape[axis]
    big = n * m
    moved = np.moveaxis(coeffs, axis, 0)
    out = np.zeros((big,) + moved.shape[1:], dtype=complex)
    half = n // 2
    out[:half] = moved[:half]
    out[big - half + 1 :] = moved[half + 1 :]
    out[half] = 0.5 * moved[half]
    out[big - half] = 0.5 * moved[half]
    return np.moveaxis(out, 0, axis)


def rescale_field(field: PhysicalField, lam: float) -> PhysicalField:
    """Critical rescaling u_lambda(x) = lambda u(lambda x) on a compatible lattice.

    The lattice spacing is preserved: lambda = m maps (N, L) to (N/m, L/m)
    by subsampling, lambda = 1/m maps to (mN, mL) by exact spectral
    refinement. Hdot^1 and L^4 norms are preserved for fields band-limited
    below the target Nyquist.
    """
    num, den = _as_power_of_int(lam)
    grid = field.grid
    if num == 1 and den == 1:
        return PhysicalField(grid, field.values.copy())
    if den == 1:
        m = num
        if grid.points_per_dim % m != 0:
            raise ValueError(f"lambda={lam} does not divide N={grid.points_per_dim}")
        target = TorusGrid(grid.points_per_dim // m, grid.side_length / m)
        values = m * field.values[::m, ::m, ::m, ::m]
        return PhysicalField(target, values.copy())
    m = den
    target = TorusGrid(grid.points_per_dim * m, grid.side_length * m)
    coeffs = _fft.fftn(field.values, workers=get_fft_workers())
    for ax in range(4):
        coeffs = _refine_axis(coeffs, ax, m)
    fine = _fft.ifftn(coeffs, workers=get_fft_workers()).real * m**4
    return PhysicalField(target, fine / m)


@dataclass(frozen=True)
class SubcriticalDatum:
    """A localized bump scaled into the small-data regime, with its checks."""

    field: PhysicalField
    delta: float
    grad_l2: float
    energy: float
    grad_condition: bool    # ||grad u0|| <= ||grad W||
    energy_condition: bool  # E(u0) <= E(W)


def subcritical_datum(grid: TorusGrid, delta: float) -> SubcriticalDatum:
    """Gaussian bump (width L/8, zero mean) with ||grad u0|| = delta ||grad W||.

    Both admissibility conditions are evaluated numerically; delta below
    1/sqrt(2) guarantees them, larger delta is checked, delta > 1 is
    rejected outright.
    """
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    if delta > 1:
        raise ValueError(
            f"delta={delta} > 1 would violate ||grad u0|| <= ||grad W||"
        )
    length = grid.side_length
    width = length / 8.0
    x = grid.x_axis - length / 2.0
    sq = x**2
    r2 = (
        sq[:, None, None, None]
        + sq[None, :, None, None]
        + sq[None, None, :, None]
        + sq[None, None, None, :]
    )
    bump = np.exp(-r2 / (2.0 * width**2))
    bump -= bump.mean()
    consts = bubble_constants()
    grad_w = np.sqrt(consts.grad_l2_sq)
    if delta == 0:
        field = PhysicalField(grid, np.zeros(grid.shape))
        return SubcriticalDatum(field, 0.0, 0.0, 0.0, True, True)
    raw = PhysicalField(grid, bump)
    raw_grad = np.sqrt(sobolev_norm_sq(transform_forward(raw), 1.0))
    scale = delta * grad_w / raw_grad
    field = PhysicalField(grid, scale * bump)
    grad_l2 = np.sqrt(sobolev_norm_sq(transform_forward(field), 1.0))
    energy = 0.5 * grad_l2**2 - 0.25 * lebesgue_norm(field, 4) ** 4
    return SubcriticalDatum(
        field=field,
        delta=delta,
        grad_l2=grad_l2,
        energy=energy,
        grad_condition=bool(grad_l2 <= grad_w * (1 + 1e-12)),
        energy_condition=bool(energy <= consts.energy),
    )
