"""Exception hierarchy shared by every treepursuit module."""


class TreePursuitError(Exception):
    """Base class; the CLI prints ``code`` in its machine-readable error line."""

    code = "error"


class DimensionMismatch(TreePursuitError, ValueError):
    code = "dimension_mismatch"


class RankDeficient(TreePursuitError, ValueError):
    code = "rank_deficient"


class InsufficientCandidates(TreePursuitError, ValueError):
    code = "insufficient_candidates"


class ZeroSignal(TreePursuitError, ValueError):
    code = "zero_signal"


class EmptyBatch(TreePursuitError, ValueError):
    code = "empty_batch"


class EmptyPreselection(TreePursuitError, ValueError):
    code = "empty_preselection"


class TooLarge(TreePursuitError, ValueError):
    """Raised when an enumeration would visit more than the allowed number of supports."""

    code = "too_large"


class CausalNotTrue(TreePursuitError, ValueError):
    code = "causal_not_true"


class MissingRicOrder(TreePursuitError, KeyError):
    code = "missing_ric_order"

    def __str__(self):
        return Exception.__str__(self)


class ConfigError(TreePursuitError, ValueError):
    code = "config_error"
