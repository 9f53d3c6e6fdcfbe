"""Exception hierarchy.

Everything raised on bad *data* derives from :class:`BRIError` so the CLI can
map it onto exit code 2 in one place.
"""


class BRIError(Exception):
    """Base class for data errors."""


class DegenerateResidue(BRIError):
    """Residue atoms are coincident or collinear, so no frame exists."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"residue {index}: {message}")
        self.index = index


class DegenerateRow(BRIError):
    """A BRI row produced a residue whose frame cannot be built."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"row {index}: {message}")
        self.index = index


class MalformedMatrix(BRIError):
    pass


class InvalidStats(BRIError):
    pass


class LengthMismatch(BRIError):
    pass


class TooShort(BRIError):
    pass


class IndexOutOfRange(BRIError):
    pass


class EmptyCorpus(BRIError):
    pass


class EmptyData(BRIError):
    pass


class DegenerateRange(BRIError):
    pass


class ParseError(BRIError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


class MissingCategory(ParseError):
    pass
