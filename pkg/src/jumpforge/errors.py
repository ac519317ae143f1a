"""Exception hierarchy shared across the package."""


class JumpforgeError(Exception):
    """Base class for all package errors."""


class ConfigurationError(JumpforgeError):
    """Invalid construction parameters (sizes, rates, labels, file syntax)."""


class ErasureMismatchError(ConfigurationError):
    """Channels with unequal rates cannot be interferometrically erased."""


class AnnihilationError(JumpforgeError):
    """An operator annihilated the state (norm below threshold).

    Distinct from a configuration error: a correct sampler never selects a
    zero-rate channel, so hitting this mid-trajectory indicates a sampler bug.
    """


class SamplerConsistencyError(JumpforgeError):
    """A jump was applied to a state on which its rate vanishes."""


class UnsupportedConfigurationError(JumpforgeError):
    """Channel set whose total decay operator is neither uniform nor diagonal."""


class ProtocolIncompleteError(JumpforgeError):
    """Click log is missing events required by the correction bookkeeping."""


class LogCorruptionError(JumpforgeError):
    """Click log contains records the correction bookkeeping cannot interpret."""


class AccuracyError(JumpforgeError):
    """A numerical oracle exceeded its accuracy budget (e.g. trace drift)."""


class IntegrityError(JumpforgeError):
    """Internal invariant violated (e.g. invalid stabilizer tableau)."""
