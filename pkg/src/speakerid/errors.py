"""Exception hierarchy. Every error the CLI maps to a non-zero exit."""


class SpeakerIDError(Exception):
    """Base class for all package errors."""


class MalformedRecord(SpeakerIDError):
    """An interview record is missing fields or has unequal arrays."""


class EmptyDescriptor(SpeakerIDError):
    pass


class ExternalDetectorUnavailable(SpeakerIDError):
    pass


class SpanOutOfRange(SpeakerIDError):
    pass


class EncoderFailure(SpeakerIDError):
    pass


class DimensionMismatch(SpeakerIDError, ValueError):
    pass


class DivergedLoss(SpeakerIDError):
    """Training produced a non-finite loss."""


class UnknownSpeaker(SpeakerIDError):
    pass


class InsufficientCorpus(SpeakerIDError):
    pass
