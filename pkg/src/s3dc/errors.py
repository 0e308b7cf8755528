"""Exception types shared across the toolchain."""


class FabricError(Exception):
    """Base class for all toolchain errors."""

    exit_code = 1

    def record(self) -> dict:
        """Machine-readable error record for CLI output."""
        return {"error": type(self).__name__, "detail": str(self)}


class InvalidConfig(FabricError):
    def __init__(self, key, message=None):
        super().__init__(message or f"invalid config value for {key}")
        self.key = key

    def record(self):
        rec = super().record()
        rec["key"] = self.key
        return rec


class UnknownCell(FabricError):
    def __init__(self, kind):
        super().__init__(f"unknown cell kind: {kind}")
        self.kind = kind


class OutOfBounds(FabricError):
    pass


class Overlap(FabricError):
    def __init__(self, coord, message=None):
        super().__init__(message or f"resource already occupied at {coord}")
        self.coord = coord


class NetlistSyntaxError(FabricError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line

    def record(self):
        rec = super().record()
        rec["line"] = self.line
        return rec


class DuplicateDriver(FabricError):
    def __init__(self, net):
        super().__init__(f"net has more than one driver: {net}")
        self.net = net


class UndrivenNet(FabricError):
    def __init__(self, net):
        super().__init__(f"net has no driver: {net}")
        self.net = net


class CombinationalCycle(FabricError):
    def __init__(self, path):
        super().__init__("combinational cycle: " + " -> ".join(path))
        self.path = list(path)


class CapacityExceeded(FabricError):
    def __init__(self, needed, available):
        super().__init__(f"placement needs {needed} slots, grid has {available}")
        self.needed = needed
        self.available = available


class Unroutable(FabricError):
    def __init__(self, failing_nets, hot_spots):
        super().__init__(
            f"{len(failing_nets)} nets unroutable; "
            f"worst congestion at {hot_spots[:3]}")
        self.failing_nets = list(failing_nets)
        self.hot_spots = list(hot_spots)

    def record(self):
        rec = super().record()
        rec["failing_nets"] = self.failing_nets
        rec["hot_spots"] = [str(h) for h in self.hot_spots]
        return rec


class StateElementPresent(FabricError):
    pass


class ProtocolViolation(FabricError):
    pass


class ExtractionFailure(FabricError):
    pass


class NoExtractionPath(FabricError):
    pass


class DisconnectedNode(FabricError):
    pass


class SingularSystem(FabricError):
    pass


class InternalCheckFailed(FabricError):
    """A pipeline-internal invariant (route check, equivalence) failed."""

    exit_code = 2
