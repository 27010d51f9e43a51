"""Half-strip discretization: tensor lattice on [-L, L]^n x [0, A]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["StripGrid"]


@dataclass(frozen=True)
class StripGrid:
    """Uniform node lattice; y_0 = 0 carries the trace, y_{my-1} = A the data.

    n is the lateral dimension (1 or 2; for n=2 both lateral axes share mx
    and hx).  Lateral boundary nodes are clamped to zero by the solver, so
    mx, my >= 3 keeps at least one free trace node and one interior row.
    """

    n: int
    L: float
    A: float
    mx: int
    my: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("lateral dimension n must be 1 or 2")
        if self.L <= 0 or self.A <= 0:
            raise ValueError("L and A must be positive")
        if self.mx < 3 or self.my < 3:
            raise ValueError("mx and my must be at least 3")

    @property
    def hx(self) -> float:
        return 2.0 * self.L / (self.mx - 1)

    @property
    def hy(self) -> float:
        return self.A / (self.my - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.mx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(0.0, self.A, self.my)

    @property
    def n_nodes(self) -> int:
        return self.mx**self.n * self.my

    @property
    def trace_shape(self) -> tuple:
        """Shape of the free trace lattice (lateral interior nodes)."""
        return (self.mx - 2,) * self.n

    def lateral_mesh(self):
        """Interior + boundary lateral coordinates as meshgrid arrays."""
        if self.n == 1:
            return (self.xs,)
        return np.meshgrid(self.xs, self.xs, indexing="ij")

    def refined(self, factor: int = 2) -> "StripGrid":
        """Same domain with every cell split ``factor`` times per axis."""
        return StripGrid(self.n, self.L, self.A,
                         (self.mx - 1) * factor + 1, (self.my - 1) * factor + 1)

    def with_extent(self, L: float) -> "StripGrid":
        """Same spacing hx, new lateral half-extent (rounded to whole cells)."""
        mx = int(round(2.0 * L / self.hx)) + 1
        return StripGrid(self.n, (mx - 1) * self.hx / 2.0, self.A, mx, self.my)
