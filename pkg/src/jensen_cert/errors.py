"""Exception hierarchy shared by all modules."""


class JensenCertError(Exception):
    """Base class for every error raised by this package."""


class DegenerateInput(JensenCertError):
    """Points do not span a full-dimensional body, or a facet collapses."""


class TooLarge(JensenCertError):
    """Input exceeds the brute-force hull budget."""


class NonExtremeVertex(JensenCertError):
    """An input vertex lies inside the hull of the others."""

    def __init__(self, indices):
        self.indices = tuple(int(i) for i in indices)
        super().__init__(f"non-extreme input vertices at indices {list(self.indices)}")


class DimensionMismatch(JensenCertError, ValueError):
    pass


class OriginNotInterior(JensenCertError):
    """The chosen origin is not strictly inside the body."""


class LPFailure(JensenCertError):
    """The simplex solver reported infeasibility, unboundedness or stalled."""


class InvalidSpec(JensenCertError, ValueError):
    pass
