"""Exception types shared across the package."""


class CacheCoderError(Exception):
    """Base class for all package errors."""


class InvalidParams(CacheCoderError):
    """Scheme parameters violate a structural invariant (divisibility, range)."""


class ZeroInverse(CacheCoderError):
    """Multiplicative inverse of zero requested."""


class Singular(CacheCoderError):
    """A matrix that must be invertible is rank deficient."""


class SingularDecode(CacheCoderError):
    """The per-block decode system is singular; retry with new coefficients."""


class MissingKey(CacheCoderError):
    """A user cache lacks the key stream a block requires (placement bug)."""


class NonOrthogonalityFailure(CacheCoderError):
    """No null-space vector avoids orthogonality with a target channel row."""


class DegenerateField(CacheCoderError):
    """Channel resampling failed; the field is too small for the topology."""


class CounterExhausted(CacheCoderError):
    """A fragment freshness counter exceeded its budget (delivery bug)."""


class OutOfRegion(CacheCoderError):
    """Formula parameters fall outside the scheme's validity region."""


class NoRoot(CacheCoderError):
    """Numerical root search failed to bracket a solution."""


class DecodeFailure(CacheCoderError):
    """A user failed to reconstruct its requested file."""
