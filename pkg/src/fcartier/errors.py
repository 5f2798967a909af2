"""Exception hierarchy shared by all modules."""


class CartierError(Exception):
    """Base class; ``code`` is the stable name surfaced in CLI reports."""

    code = "Error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class PolySyntaxError(CartierError):
    code = "SyntaxError"

    def __init__(self, position, expected, text=""):
        self.position = position
        self.expected = expected
        super().__init__(f"at position {position}: expected {expected} in {text!r}")

    def to_dict(self):
        d = super().to_dict()
        d.update(position=self.position, expected=self.expected)
        return d


class UnknownVariable(CartierError):
    code = "UnknownVariable"


class BadPrime(CartierError):
    code = "BadPrime"


class SessionMismatch(CartierError):
    code = "SessionMismatch"


class DegreeBlowup(CartierError):
    code = "DegreeBlowup"


class NotHomogeneous(CartierError):
    code = "NotHomogeneous"


class NotDomain(CartierError):
    code = "NotDomain"


class NotIso(CartierError):
    code = "NotIso"


class NotIsolated(CartierError):
    code = "NotIsolated"


class Indeterminate(CartierError):
    code = "Indeterminate"


class NotReflexive(CartierError):
    code = "NotReflexive"

    def __init__(self, i, detail=""):
        self.i = i
        msg = (f"Omega^{i} is not reflexive; the reflexive-forms construction does not apply "
               "(variants along resolutions or eh-sheaves are not supported)")
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class CartierNotSurjective(CartierError):
    code = "CartierNotSurjective"

    def __init__(self, msg, cokernel=None):
        self.cokernel = cokernel
        super().__init__(msg)


class BadSupport(CartierError):
    code = "BadSupport"


class DenominatorOverflow(CartierError):
    code = "DenominatorOverflow"


class IllDefined(CartierError):
    code = "IllDefined"
