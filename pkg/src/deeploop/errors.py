"""Exception hierarchy.

Everything a caller might reasonably want to catch derives from
:class:`DeepLoopError`.  :class:`DataError` marks problems with input data or
files (the CLI maps these to exit status 2).
"""


class DeepLoopError(Exception):
    pass


class DataError(DeepLoopError):
    pass


# -- PGM ---------------------------------------------------------------------

class PgmError(DataError):
    pass


class PgmMissingFileError(PgmError, FileNotFoundError):
    pass


class PgmHeaderError(PgmError):
    pass


class PgmMaxvalError(PgmError):
    pass


class PgmTruncatedError(PgmError):
    pass


# -- geometry ----------------------------------------------------------------

class GeometryError(DeepLoopError, ValueError):
    pass


class DegeneratePointsError(GeometryError):
    pass


class PointAtInfinityError(GeometryError):
    pass


class NonInvertibleHomographyError(GeometryError):
    pass


# -- binary containers (dataset / model / database) ---------------------------

class ContainerError(DataError):
    pass


class ContainerFormatError(ContainerError):
    """Wrong magic bytes or unsupported version."""


class BadMagicError(ContainerFormatError):
    pass


class UnsupportedVersionError(ContainerFormatError):
    pass


class TruncatedContainerError(ContainerError):
    pass


# -- misc ----------------------------------------------------------------------

class ShapeError(DeepLoopError, ValueError):
    pass


class InvalidDescriptorError(DeepLoopError, ValueError):
    pass


class DatabaseError(DeepLoopError, ValueError):
    pass


class FrameOrderError(DeepLoopError, ValueError):
    pass
