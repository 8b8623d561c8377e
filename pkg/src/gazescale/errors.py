"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class PointBehindViewPlane(EngineError):
    """A point to be projected lies on or behind the eye's view plane."""


class SphereEnclosesViewer(EngineError):
    """The viewer sits inside (or on) the sphere being projected."""


class DegenerateVector(EngineError):
    """A direction needed for an angle is too short to normalize."""


class DegenerateRegion(EngineError):
    """A rect or disc has no area, so coverage ratios are undefined."""


class NonMonotonicTimestamp(EngineError):
    """A sample arrived with a timestamp not later than the previous one."""


class KindMismatch(EngineError):
    """A control input of one kind was fed to a session of another kind."""


class MissingTrackingData(EngineError):
    """A required hand or gaze stream is absent from the frame."""


class ParseError(EngineError):
    """A trace or config file failed to parse.

    line is 1-based; 0 means the file as a whole (for example, empty input).
    """

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class SchemaVersionMismatch(ParseError):
    """The file declares a schema version this build does not speak."""


class EmptyInput(EngineError):
    """An aggregate was requested over zero trial results."""


class InfeasibleTarget(EngineError):
    """The target scale is unreachable within the technique's clamp range."""

    def __init__(self, technique: str, target_scale: float,
                 i_0: float, i_required: float, clamp_min: float, clamp_max: float):
        super().__init__(
            f"{technique}: x{target_scale:g} needs control value "
            f"{i_required:g} from start {i_0:g}, outside clamp "
            f"[{clamp_min:g}, {clamp_max:g}]")
        self.technique = technique
        self.target_scale = target_scale
        self.i_0 = i_0
        self.i_required = i_required
        self.clamp_min = clamp_min
        self.clamp_max = clamp_max
