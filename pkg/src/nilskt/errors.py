"""Exception taxonomy shared by every module.

All engine errors derive from EngineError so the CLI can map them to exit
code 1 with a machine-readable code.
"""


class EngineError(Exception):
    """Base class; `code` is the stable machine-readable identifier."""

    code = "engine-error"


class DivisionByZero(EngineError, ZeroDivisionError):
    code = "division-by-zero"


class UnassignedVariable(EngineError):
    code = "unassigned-variable"


class UnknownParameter(EngineError):
    code = "unknown-parameter"


class DegreeOverflow(EngineError):
    code = "degree-overflow"


class BidegreeMismatch(EngineError):
    code = "bidegree-mismatch"


class DimensionMismatch(EngineError):
    code = "dimension-mismatch"


class JacobiFailure(EngineError):
    code = "jacobi-failure"

    def __init__(self, residues):
        self.residues = residues
        super().__init__(f"d*d != 0 on {len(residues)} generator(s)")


class IntegrabilityFailure(EngineError):
    code = "integrability-failure"

    def __init__(self, residues):
        self.residues = residues
        super().__init__(f"(0,2)-part of d is nonzero on {len(residues)} generator(s)")


class NonReducibleConstraint(EngineError):
    code = "non-reducible-constraint"


class SingularMetric(EngineError):
    code = "singular-metric"


class RankAmbiguous(EngineError):
    code = "rank-ambiguous"


class PreconditionFailure(EngineError):
    code = "precondition-failure"

    def __init__(self, msg, residues=None):
        self.residues = residues or {}
        super().__init__(msg)


class NonInvertibleFrame(EngineError):
    code = "non-invertible-frame"


class SingularEndomorphism(EngineError):
    code = "singular-endomorphism"


class ParseError(EngineError):
    code = "parse-error"

    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        loc = "" if line is None else f" (line {line}" + ("" if col is None else f", col {col}") + ")"
        super().__init__(msg + loc)
