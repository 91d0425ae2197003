'''
Errors raised by sgnpy.

Everything derives from SGNError so callers can catch the whole family; the
builtin mixins keep `except ValueError` style handling working.
'''


class SGNError(Exception):
    pass


class InvalidArgument(SGNError, ValueError):
    pass


class StateInvalid(SGNError, ValueError):

    def __init__(self, message, node=None, value=None):
        super().__init__(message)
        self.node = node
        self.value = value


class NumericalFailure(SGNError, RuntimeError):

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class RelaxationFailure(NumericalFailure):
    pass


class FitFailed(SGNError, RuntimeError):

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NotFound(SGNError, LookupError):
    pass


class ConfigError(SGNError, ValueError):
    pass


def check_positive_height(h, what='h'):
    '''
    Hard floor check on the water height. Raises StateInvalid naming the
    first node where the height is not strictly positive.
    '''
    bad = ~(h > 0)
    if bad.any():
        node = int(bad.argmax())
        raise StateInvalid('non-positive water height {}[{}] = {!r}'.format(
            what, node, float(h[node])), node=node, value=float(h[node]))
