"""Optimal real-time transmission thresholds for energy-harvesting sensors."""

from .channel import ChannelModel
from .dp import DpConfig, PolicyTables, compute_tables, threshold_for
from .errors import (InvalidState, NonConvergence, OutOfRange, ParseError, TooLarge,
                     TxPolicyError, ValidationError)
from .oracle import OracleInstance, oracle_policy_value, oracle_value
from .policies import (Action, DecisionContext, Greedy, Optimal, Periodic, StaticThreshold,
                       decide)
from .simulator import SensorState, SimConfig, SimOutcome, run_campaign, run_slot, summarize
from .valuation import UtilityMap, ValuationModel

__version__ = "0.1.0"
