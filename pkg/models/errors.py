'''
Exceptions raised across the package. Everything derives from WebRankError so
that the command line can map failures onto its exit codes in one place.
'''


class WebRankError(Exception):
    '''Base class for every failure the package reports on purpose.'''


class ParseError(WebRankError):
    def __init__(self, message, line=1, column=1):
        super().__init__('{}:{}: {}'.format(line, column, message))
        self.line = line
        self.column = column
        self.reason = message


class WebFormatError(WebRankError):
    '''A web file is readable but does not describe a valid web.'''


class RelationFormatError(WebRankError):
    '''A relation file does not fit the web it is checked against.'''


class InvalidParameters(WebRankError):
    pass


class NotDivisible(InvalidParameters):
    pass


class DivisionByZero(WebRankError):
    def __init__(self, subexpression):
        super().__init__('division by zero: {} vanishes'.format(subexpression))
        self.subexpression = subexpression


class DomainError(WebRankError):
    def __init__(self, subexpression, reason='argument out of domain'):
        super().__init__('{}: {}'.format(reason, subexpression))
        self.subexpression = subexpression


class ExactUnsupported(WebRankError):
    pass


class Inconsistent(WebRankError):
    pass


class Singular(WebRankError):
    pass


class NonSquare(WebRankError):
    pass


class WrongCodimension(WebRankError):
    pass


class CompositionDomainError(WebRankError):
    pass


class PointSelectionFailed(WebRankError):
    pass


class NotCalibrated(WebRankError):
    pass


class NotOrdinary(WebRankError):
    pass


class TranscendentalUnsupported(WebRankError):
    pass


class TemplateMismatch(WebRankError):
    pass
