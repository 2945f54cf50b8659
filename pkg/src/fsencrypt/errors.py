"""Exception hierarchy shared by the codecs, schemes and verifiers."""


class FSEError(Exception):
    """Base class for all library errors."""


class AlphabetError(FSEError, ValueError):
    """A symbol lies outside the declared alphabet."""


class MalformedStreamError(FSEError, ValueError):
    """A bit stream or container cannot be decoded."""


class KeyExhaustedError(FSEError):
    """A finite key tape ran out of bits."""


class RateOverflowError(FSEError, ValueError):
    """The compressed payload does not fit in the fixed-rate frame."""


class GuardExceededError(FSEError):
    """An exhaustive enumeration would exceed its feasibility guard."""
