"""Scenario execution: wire a scenario into an engine, run, collect results."""

from dataclasses import dataclass

from .engine import Simulator
from .mediator import DeliveryRecord, XmitState
from .scenario import Scenario
from .stack import NodeStack, build_stacks
from .trace import TraceRecord


@dataclass
class RunResult:
    scenario: Scenario
    records: list[TraceRecord]
    outcomes: list[XmitState]
    deliveries: list[DeliveryRecord]
    final_channels: dict[int, int]
    final_modes: dict[int, str]
    failure_diagnosis: str | None
    stacks: dict[int, NodeStack]
    sim: Simulator


def run_scenario(scenario: Scenario, seed: int | None = None,
                 until: int | None = None) -> RunResult:
    sim = Simulator(scenario.wns, scenario.faults,
                    seed=scenario.seed if seed is None else seed)
    stacks = build_stacks(sim, scenario.switch)
    for entry in scenario.workload:
        sim.schedule(entry.send_time,
                     lambda e=entry: stacks[e.sender].send_message(e.payload(), e.deadline))
    sim.run_until(scenario.horizon if until is None else until)
    outcomes = []
    deliveries = []
    for stack in stacks.values():
        outcomes.extend(stack.outcomes)
        deliveries.extend(stack.deliveries)
    outcomes.sort(key=lambda x: (x.requested, x.message.src))
    deliveries.sort(key=lambda d: (d.time, d.receiver))
    return RunResult(
        scenario=scenario,
        records=sim.records,
        outcomes=outcomes,
        deliveries=deliveries,
        final_channels={nid: st.channel for nid, st in stacks.items()},
        final_modes={nid: st.mode for nid, st in stacks.items()},
        failure_diagnosis=sim.failure_diagnosis,
        stacks=stacks,
        sim=sim,
    )
