"""Exception hierarchy shared by all modules."""


class GwaError(Exception):
    """Base class for all library errors."""


class ArityMismatch(GwaError):
    pass


class IndexOutOfRange(GwaError):
    pass


class NotFredholm(GwaError):
    pass


class NoStabilization(GwaError):
    pass


class NotInvertible(GwaError):
    pass


class NotUnit(GwaError):
    def __init__(self, reason, detail=""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class NonIntegerRoots(NotUnit):
    def __init__(self, detail=""):
        super().__init__("NonIntegerRoots", detail)


class NotDegreeZero(GwaError):
    pass


class NotAutomorphism(GwaError):
    pass


class NotInShape(GwaError):
    pass


class NonInvertiblePower(GwaError):
    pass


class ParseError(GwaError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class Unprintable(GwaError):
    pass
