"""Exception types shared across the package."""


class RankAttackError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(RankAttackError):
    """A data file failed to parse or violated its format contract."""


class ConfigError(RankAttackError):
    """An invalid campaign or CLI configuration."""


class NoCenterError(RankAttackError):
    """No query token is in the embedding vocabulary, so no center exists."""


class NoCandidateError(RankAttackError):
    """An attack found no eligible token to perturb."""


class CapabilityError(RankAttackError):
    """The ranker does not expose a capability required by the caller."""
