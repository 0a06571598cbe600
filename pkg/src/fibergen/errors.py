"""Exception hierarchy.

Errors are grouped by the CLI exit code they map to: parameter problems (1),
mesh and I/O problems (2) and solver problems (3).
"""


class FiberGenError(Exception):
    exit_code = 1


# parameters ---------------------------------------------------------------

class ParameterError(FiberGenError):
    """Base class for parameter declaration and parsing failures.

    ``path`` is the subsection path plus entry name, joined with ``/``.
    """

    exit_code = 1

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class DuplicateEntry(ParameterError):
    pass


class EmptyName(ParameterError):
    pass


class UnknownEntry(ParameterError):
    pass


class UnknownSubsection(ParameterError):
    pass


class PatternMismatch(ParameterError):
    def __init__(self, value, description, path=None):
        self.value = value
        self.description = description
        super().__init__(
            f"value {value!r} does not match the pattern {description}", path
        )


class ParamSyntaxError(ParameterError):
    pass


class UnsupportedDegree(ParameterError):
    pass


class LabelRoleMissing(ParameterError):
    pass


class MissingApex(ParameterError):
    pass


class ZeroVector(ParameterError):
    pass


class CliError(ParameterError):
    pass


class UnknownFlag(CliError):
    pass


class MissingFlagArgument(CliError):
    pass


# mesh / io ----------------------------------------------------------------

class MeshError(FiberGenError):
    exit_code = 2


class UnsupportedVersion(MeshError):
    pass


class BinaryFormatUnsupported(MeshError):
    pass


class MixedElementKinds(MeshError):
    pass


class DanglingIndex(MeshError):
    pass


class UnsupportedElementType(MeshError):
    pass


class MeshFormatError(MeshError):
    pass


class InvalidMesh(MeshError):
    pass


class EmptyMesh(MeshError):
    pass


class NonPositiveFactor(MeshError):
    pass


class NotHexMesh(MeshError):
    pass


class EmptyBoundarySet(MeshError):
    def __init__(self, role):
        self.role = role
        super().__init__(f"no boundary vertex carries a label of role {role!r}")


class OverlappingRings(MeshError):
    pass


class IoError(MeshError):
    """A file could not be read or written."""


class OutputError(IoError):
    pass


class DisabledOutput(OutputError):
    pass


class LengthMismatch(FiberGenError):
    exit_code = 2


# solver -------------------------------------------------------------------

class SolverError(FiberGenError):
    exit_code = 3


class DegenerateCell(SolverError):
    pass


class NoDirichlet(SolverError):
    pass


class ConflictingDirichlet(SolverError):
    pass


class NoConvergence(SolverError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"CG did not converge in {iterations} iterations "
            f"(final residual {residual:.3e})"
        )
