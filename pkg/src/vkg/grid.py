"""Periodic frequency grids and two-component spectral fields."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-L, L)`` with ``n_modes`` Fourier modes.

    Frequencies are stored in FFT order, ``k[n] = n * dk`` with ``dk = pi / L``.
    The physical grid uses the same wrapped ordering, so no phase factors are
    needed between the two representations.
    """

    half_length: float
    n_modes: int

    def __post_init__(self):
        n = self.n_modes
        if n < 64 or n & (n - 1):
            raise ValidationError("n_modes", f"must be a power of two >= 64, got {n}")
        if not self.half_length >= 20:
            raise ValidationError("L", f"half length must be >= 20, got {self.half_length}")

    @property
    def dk(self) -> float:
        return np.pi / self.half_length

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_modes

    @property
    def k(self) -> np.ndarray:
        return np.fft.fftfreq(self.n_modes, d=1.0 / self.n_modes) * self.dk

    @property
    def x(self) -> np.ndarray:
        return np.fft.fftfreq(self.n_modes, d=1.0 / self.n_modes) * self.dx

    @property
    def nyquist(self) -> float:
        return 0.5 * self.n_modes * self.dk

    def forward(self, f: np.ndarray) -> np.ndarray:
        """Samples on ``x`` -> approximation of ``(1/2pi) int f(x) e^{-ikx} dx``."""
        return np.fft.fft(f, axis=0) * (self.dx / (2.0 * np.pi))

    def inverse(self, fhat: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`forward`; ``f(x) = sum_k dk fhat(k) e^{ikx}``."""
        return np.fft.ifft(fhat, axis=0) * (self.n_modes * self.dk)


@dataclass
class SpectralField:
    """Two-component complex field ``U^(k)`` sampled on ``grid.k``.

    ``values`` has shape ``(n_modes, 2)``; column 0 is ``u``, column 1 the
    diffusive variable ``v``.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n_modes, 2):
            raise ValueError(
                f"values must have shape ({self.grid.n_modes}, 2), got {self.values.shape}"
            )

    @property
    def k(self) -> np.ndarray:
        return self.grid.k

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.values.copy())

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.values + other.values)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.values - other.values)

    def pointwise_norm(self) -> np.ndarray:
        """Euclidean norm of the 2-vector at each frequency."""
        return np.sqrt(np.abs(self.values[:, 0]) ** 2 + np.abs(self.values[:, 1]) ** 2)

    def conjugate_defect(self) -> float:
        """``max |U^(-k) - conj U^(k)|``; zero for real physical fields."""
        n = self.grid.n_modes
        mirror = self.values[(-np.arange(n)) % n]
        return float(np.max(np.abs(mirror - np.conj(self.values))))

    def physical(self) -> np.ndarray:
        """Complex physical samples, shape ``(n_modes, 2)`` in wrapped order."""
        return self.grid.inverse(self.values)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid, np.zeros((grid.n_modes, 2), dtype=complex))
