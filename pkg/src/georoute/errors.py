"""Exception types raised by the routing library."""


class RoutingError(Exception):
    """Base class for domain errors (unreachable pairs, uncovered nodes...)."""


class InvalidArgument(RoutingError, ValueError):
    pass


class NotInTree(RoutingError, LookupError):
    """A node is not spanned by the tree it was looked up in."""


class NotCovered(RoutingError, LookupError):
    """An arc endpoint lies outside the component covered by the forest."""


class Unreachable(RoutingError):
    pass


class MalformedAddress(RoutingError, ValueError):
    pass
