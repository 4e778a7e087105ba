class ModelError(ValueError):
    """The physical model is invalid (negative rate eigenvalue, CP violation, bad parameter)."""


class ScenarioError(ValueError):
    """The scenario request cannot be honoured as written (unknown key, bad init, bad solver choice)."""


class BasisError(ValueError):
    """A density matrix was handed to an operation expecting the other basis."""


class IntegrationError(RuntimeError):
    """Numerical propagation aborted; the message carries the time and the diagnostic."""


class CalibrationError(RuntimeError):
    """Pulse calibration could not find a duration that improves on the initial state."""
