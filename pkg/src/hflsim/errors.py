"""Exception hierarchy shared by all simulator modules."""

from __future__ import annotations


class HflSimError(Exception):
    """Base class for every error raised by hflsim."""


# --- topology ---------------------------------------------------------------

class InvalidTopology(HflSimError):
    """A topology or node definition violates a structural invariant."""


class DuplicateNode(HflSimError):
    """Attempt to add a node whose id already exists."""


class UnknownNode(HflSimError):
    """A referenced node id is not part of the topology."""


class CannotRemoveArtifactServer(HflSimError):
    """The artifact server node must stay in the topology."""


# --- configuration ----------------------------------------------------------

class InvalidConfiguration(HflSimError):
    """A pipeline configuration violates its invariants or the topology."""


class InsufficientAggregators(HflSimError):
    """Fewer aggregation-capable nodes than requested local aggregators."""


class NoTrainableNodes(HflSimError):
    """The topology contains no node that can act as a client."""


class UnknownStrategy(HflSimError):
    """A strategy name does not resolve to a registered strategy."""


class StrategyFailure(HflSimError):
    """A configuration strategy raised an unexpected error."""


# --- cost model -------------------------------------------------------------

class NonPositivePerRoundCost(HflSimError):
    """Final-round prediction needs a strictly positive per-round cost."""


class NegativeCharge(HflSimError):
    """Ledger charges must be non-negative."""


class MonotonicityViolation(HflSimError):
    """Ledger entries must be non-decreasing in round."""


# --- learning ---------------------------------------------------------------

class DimensionMismatch(HflSimError):
    """Model vectors or datasets with incompatible dimensions."""


class EmptyInput(HflSimError):
    """An aggregation or evaluation input that must be non-empty is empty."""


class EmptyCluster(HflSimError):
    """A cluster without clients cannot run a training round."""


class LearnerFailure(HflSimError):
    """Local training produced non-finite values."""


# --- regression / validation -------------------------------------------------

class InsufficientPoints(HflSimError):
    """A regression fit needs at least two observations."""


class DegenerateDesign(HflSimError):
    """All observations share the same round; the fit is undetermined."""


# --- scenarios / CLI ----------------------------------------------------------

class ParseError(HflSimError):
    """A scenario file could not be read or parsed."""


class ValidationError(HflSimError):
    """A scenario parsed but failed validation; lists every violation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ScenarioMismatch(HflSimError):
    """Runs being compared come from different scenarios or seeds."""
