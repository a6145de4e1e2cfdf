"""Exception types shared across the engine.

Every error raised deliberately by the engine derives from EngineError, so
callers can catch one type at API boundaries (the CLI maps them to exit
code 2 unless they represent a negative verdict).
"""


class EngineError(Exception):
    """Base class for all engine-raised errors."""


class TypeMismatch(EngineError):
    """Wire endpoints or composed interfaces carry different system types."""


class CycleDetected(EngineError):
    """The wiring of a diagram is not acyclic."""


class DanglingPort(EngineError):
    """A port is neither wired nor declared open, or is declared twice."""


class SignatureMismatch(EngineError):
    """Two objects were compared or combined across different signatures."""


class DimensionMismatch(EngineError):
    """Matrix shapes or carriers do not line up for the requested operation."""


class CarrierMismatch(EngineError):
    """A proposition or state was paired with the wrong carrier."""


class WeightError(EngineError):
    """Mixing weights are negative or do not sum to one."""


class CapExceeded(EngineError):
    """An enumeration would exceed the configured cap."""


class NotCausallyClosed(EngineError):
    """The operation needs a diagram with no open causal ports."""


class UnresolvedProcedure(EngineError):
    """A prediction map has no entry for a named procedure."""


class PropositionOnNonclassical(EngineError):
    """A proposition was attached to a system without a classical carrier."""


class MissingXi(EngineError):
    """A realist representation lacks the map for a required hom-pair."""


class PairNotEquivalent(EngineError):
    """A claimed operational equivalence fails under the prediction map."""


class WrongScenario(EngineError):
    """The correlation or operation does not fit the given scenario."""


class ConfigError(EngineError):
    """An ill-formed request, such as an empty verdict bundle."""


class ValidationError(EngineError):
    """Numerical validation of a model failed (for instance Kraus bounds)."""


class NotPositive(EngineError):
    """A matrix that must be positive semidefinite is not."""


class Degenerate(EngineError):
    """A linear program step left its guarded domain.

    With Bland's pivoting rule this is unreachable; it exists so the
    solver fails loudly instead of looping if an invariant is ever broken.
    """


class ParseError(EngineError):
    """Syntax error in the textual format, with position information."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
