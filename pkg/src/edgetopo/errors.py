"""Exception and warning types shared across the package."""


class EdgeTopoError(Exception):
    """Base class for all package errors."""


class ModelError(EdgeTopoError, ValueError):
    """Invalid model parameters or matrices."""


class ModelWarning(UserWarning):
    """A model was built but violates a standing hypothesis somewhere."""


class SingularFiberError(EdgeTopoError):
    """The fiber block A2(k1) is not invertible, so no transfer matrix exists."""

    def __init__(self, k1, cond):
        self.k1 = float(k1)
        self.cond = float(cond)
        super().__init__(f"A2(k1) singular at k1={self.k1:.12g} (cond={self.cond:.3g})")


class NonHyperbolicError(EdgeTopoError):
    """The energy lies in the spectrum of the fiber Hamiltonian at this k1."""

    def __init__(self, E, k1, unimodular=()):
        self.E = float(E)
        self.k1 = float(k1)
        self.unimodular = tuple(unimodular)
        super().__init__(
            f"E={self.E:.12g} is in the spectrum at k1={self.k1:.12g} "
            f"({len(self.unimodular)} unimodular transfer eigenvalues)"
        )


class GapClosedError(EdgeTopoError):
    """A spectral gap required by a computation closes on the sampling grid."""

    def __init__(self, message, node=None, gap=None):
        self.node = node
        self.gap = gap
        super().__init__(message)


class ConvergenceError(EdgeTopoError):
    """An adaptive numerical procedure did not reach its tolerance."""


class KramersError(EdgeTopoError):
    """Odd multiplicity found where odd time reversal forces even multiplicity."""


class FrameError(EdgeTopoError):
    """A frame is numerically not Lagrangian (a + ib ill-conditioned)."""
