"""Exception hierarchy shared by the library and the CLI."""


class HyperaffineError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(HyperaffineError, ValueError):
    pass


class ShapeError(HyperaffineError, ValueError):
    """A matrix does not have the block shape an inverse embedding needs."""


class NotAbelian(HyperaffineError):
    def __init__(self, pair: tuple[int, int], deviation: float | None = None):
        i, j = pair
        msg = f"generators {i} and {j} do not commute"
        if deviation is not None:
            msg += f" (max deviation {deviation:.3g})"
        super().__init__(msg)
        self.pair = pair
        self.deviation = deviation


class NotInvertible(HyperaffineError):
    def __init__(self, index: int):
        super().__init__(
            f"generator {index} is not invertible; the decision needs generators of "
            "the invertible part of the semigroup (the simulator still accepts it)"
        )
        self.index = index


class NumericalFailure(HyperaffineError):
    def __init__(self, message: str, gap: float | None = None):
        if gap is not None:
            message = f"{message} (offending gap {gap:.3g})"
        super().__init__(message)
        self.gap = gap


class MembershipError(HyperaffineError, ValueError):
    """A matrix is not in the required block-triangular cone."""


class BranchError(HyperaffineError, ValueError):
    """The (1,1) entry of a logarithm is not an integer multiple of 2*pi*i."""


class WitnessError(HyperaffineError):
    def __init__(self, index: int, deviation: float, reason: str = "exp(Psi(f')) != Phi(f)"):
        super().__init__(f"witness {index}: {reason}, max entry deviation {deviation:.3g}")
        self.index = index
        self.deviation = deviation
