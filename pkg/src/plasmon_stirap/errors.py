"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Emitter placed inside the sphere or otherwise invalid geometry."""


class SingularityError(ArithmeticError):
    """Evaluation exactly on a lossless pole of the sphere response."""


class FitError(RuntimeError):
    """Lorentzian resonance fit failed to converge."""


class FitWindowError(FitError):
    """Spectrum window does not bracket the resonance peak."""


class DegenerateSetError(ValueError):
    """All overlap-matrix eigenvalues fall below the rank tolerance."""


class AssemblyError(ValueError):
    """Inconsistent inputs while assembling the effective Hamiltonian."""


class EliminationError(ArithmeticError):
    """Plasmonic block cannot be inverted during adiabatic elimination."""


class PropagationError(RuntimeError):
    """Time propagation failed; carries stiffness diagnostics."""

    def __init__(self, message, max_detuning=None, suggested_frame_shift=None):
        super().__init__(message)
        self.max_detuning = max_detuning
        self.suggested_frame_shift = suggested_frame_shift


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
