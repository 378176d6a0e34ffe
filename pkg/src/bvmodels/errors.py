"""Exception types shared across the package."""


class BvError(Exception):
    """Base class for all package errors."""


# -- boolean algebras -------------------------------------------------------

class MixedAlgebras(BvError):
    """Operands belong to distinct algebras."""


class ZeroElement(BvError):
    """A nonzero element was required."""


class NotMaximal(BvError):
    """An antichain was required to be maximal."""


class NoFIP(BvError):
    """A family of elements has empty meet where the finite intersection
    property was required.  ``args`` carries a concrete witness when one
    is available."""


class SizeOverflow(BvError):
    """A construction would exceed the configured atom / element cap."""


class BadIndexing(BvError):
    """An indexed antichain is not keyed as required."""


# -- logic ------------------------------------------------------------------

class ParseError(BvError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownSymbol(BvError):
    """A parsed symbol is absent from the provided signature."""


class CaptureError(BvError):
    """Substitution would capture a bound variable."""


class CapExceeded(BvError):
    """An enumeration or search exceeded its configured budget."""


# -- model finder -----------------------------------------------------------

class UnboundVariable(BvError):
    """Evaluation met a variable or parameter with no assignment."""


# -- B-valued structures ----------------------------------------------------

class FiberCountMismatch(BvError):
    pass


class InvalidTuple(BvError):
    """An element tuple has the wrong length or out-of-domain entries."""


class ForeignParameter(BvError):
    """A formula parameter does not refer to an element of the structure."""


class NotUltrafilter(BvError):
    pass


class AxiomViolation(BvError):
    """An abstract evaluation table violates a structure axiom.

    ``clause`` identifies the failing axiom (3 or 7)."""

    def __init__(self, clause, detail=""):
        super().__init__(f"axiom ({clause}) violated{': ' + detail if detail else ''}")
        self.clause = clause


class BadConstraint(BvError):
    """A value constraint has F0 > F1 somewhere."""


class NotElementary(BvError):
    """A map required to be elementary failed verification."""


# -- distributions ----------------------------------------------------------

class EmptyJoin(BvError):
    """A would-be distribution takes the value 0 somewhere."""


class IndexMismatch(BvError):
    """Two distributions do not share an index set and algebra."""


class NotInFilter(BvError):
    pass


class PreconditionFailed(BvError):
    pass


class NotRealized(BvError):
    """The given tuple does not realize the type at the ultrafilter."""


class FiberWitnessMissing(BvError):
    """Some fiber has no element realizing its finite subtype."""


class NotDownwardClosed(BvError):
    pass


# -- transfer ---------------------------------------------------------------

class ZeroImage(BvError):
    """A pushed-forward distribution value is 0."""


class NotSurjective(BvError):
    pass


class NotInjective(BvError):
    """An atom map collides, so the induced homomorphism is not surjective."""


class NotPregood(BvError):
    pass


# -- I/O --------------------------------------------------------------------

class FormatError(BvError):
    """A JSON document does not match its schema.

    ``pointer`` is a JSON pointer to the offending field."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{message} (at {pointer or '/'})")
        self.pointer = pointer
