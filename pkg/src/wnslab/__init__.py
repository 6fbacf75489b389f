"""One-hop wireless segment laboratory.

Simulates a single broadcast segment under injected omission, channel
failure, and inaccessibility faults; runs the channel-switching and
reliable-broadcast protocols on top; and checks the seven abstract-channel
properties (WnS1..WnS7) over the produced traces.
"""

from .channels import (OmissionCounter, SwitchConfig, channel_failed,
                       next_channel, observe)
from .codec import (Frame, FrameKind, OmissionSignal, compute_fcs, decode,
                    encode)
from .engine import SegmentFailure, SimulationError, Simulator, airtime
from .faults import (ChannelFailure, FaultScript, Interval, Move,
                     OmissionDirective)
from .harness import RunResult, run_scenario
from .inaccess import InaPeriod, InaScenario, MacParams, account, beacon_interval, worst_case
from .mediator import DeliveryRecord, Message, XmitState, round_limit, wc_bound
from .model import (CommRange, Join, Leave, Node, WnS, WnSParams,
                    broadcast_domain_contains, commit_membership, is_member,
                    point_in_range, validate)
from .scenario import Scenario, ScenarioError, WorkloadEntry, parse_file, parse_obj
from .stack import NodeStack, build_stacks

__version__ = "0.1.0"
