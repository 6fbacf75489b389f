"""Randomized scenario generation that stays inside the fault budget.

Every generated scenario must pass all seven property checks: omission
directives never exceed the per-window bound, inaccessibility windows and
switch blackouts together stay within the period budget, and workload sends
are spaced so protocol executions never overlap.
"""

import math
import random

from wnslab.mediator import wc_bound
from wnslab.model import WnSParams

TX_DELAY = 1000
WINDOW = 20000


def random_scenario(seed: int) -> dict:
    rng = random.Random(seed)
    n_nodes = rng.randrange(3, 7)
    f = rng.choice([0, 1, 2])
    channels = [11, 12, 13][: f + 1]
    k = rng.randrange(1, 4)
    i = rng.randrange(0, 3)
    tau_ina = 2000 + f * 2012 + 1000
    params = WnSParams(omission_bound=k, max_inaccess=i, failed_channels=f,
                       consecutive_bound=k, observation_window=WINDOW,
                       tx_delay=TX_DELAY, inaccess_budget=tau_ina)
    bound = wc_bound(params)

    nodes = []
    for idx in range(n_nodes):
        angle = rng.uniform(0, 2 * math.pi)
        radius = rng.uniform(0, 40)
        pos = [round(radius * math.cos(angle), 3), round(radius * math.sin(angle), 3)]
        nodes.append({
            "id": idx + 1,
            "position": pos,
            "range": {
                "center": pos,
                "semi_major": round(rng.uniform(180, 260), 3),
                "semi_minor": round(rng.uniform(150, 180), 3),
                "rotation": round(rng.uniform(0, math.pi), 4),
            },
        })
    member_ids = [n["id"] for n in nodes]

    use_omissions = rng.random() < 0.6
    use_failure = f >= 1 and i >= 1 and rng.random() < 0.3

    workload = []
    t = rng.randrange(1200, 3000)
    first_sender = rng.choice(member_ids)
    for _ in range(rng.randrange(1, 3)):
        # directives match (seq, round, sender): a second sender would reuse
        # seq 0 and its frames could collide with the injected matches, so
        # all entries share one sender whenever omissions are scripted
        sender = first_sender if use_omissions else rng.choice(member_ids)
        workload.append({
            "sender": sender,
            "payload_size": rng.randrange(0, 60),
            "send_time": t,
            "deadline": t + bound,
        })
        t += bound + rng.randrange(500, 2000)

    faults: dict = {}

    if use_omissions and workload:
        target = workload[0]
        receivers = [m for m in member_ids if m != target["sender"]]
        n_omissions = rng.randrange(1, k + 1)
        omissions = []
        positions = set()
        for _ in range(n_omissions):
            rnd = rng.randrange(1, 3)
            if rng.random() < 0.5:
                victim = rng.choice(receivers)
                key = ("data", rnd, victim)
                directive = {"seq": 0, "round": rnd, "sender": target["sender"],
                             "victims": [victim],
                             "mode": rng.choice(["destroy", "corrupt"])}
            else:
                confirmer = rng.choice(receivers)
                key = ("confirm", rnd, confirmer)
                directive = {"seq": 0, "round": rnd, "sender": confirmer,
                             "victims": "all", "mode": "destroy"}
            if key in positions:
                continue
            positions.add(key)
            omissions.append(directive)
        if omissions:
            faults["omissions"] = omissions

    window_budget = i - (1 if use_failure else 0)
    if window_budget > 0 and rng.random() < 0.5:
        windows = []
        wt = rng.randrange(500, 2500)
        for _ in range(rng.randrange(1, window_budget + 1)):
            dur = rng.randrange(150, 450)
            windows.append({"start": wt, "end": wt + dur})
            wt += dur + rng.randrange(600, 1500)
        faults["inaccessibility"] = windows

    last_send_done = workload[-1]["send_time"] + bound if workload else 3000
    horizon = last_send_done + 3000
    if use_failure:
        failure_start = last_send_done + 500
        horizon = failure_start + tau_ina + 3000
        faults["channel_failures"] = [
            {"channel": channels[0], "start": failure_start, "end": horizon}]
        if rng.random() < 0.5:
            post = failure_start + tau_ina + 1500
            workload.append({
                "sender": first_sender if use_omissions else rng.choice(member_ids),
                "payload_size": rng.randrange(0, 40),
                "send_time": post,
                "deadline": post + bound,
            })
            horizon = post + bound + 3000

    if rng.random() < 0.3:
        mover = rng.choice(nodes)
        dx, dy = rng.uniform(-12, 12), rng.uniform(-12, 12)
        faults.setdefault("moves", []).append({
            "node": mover["id"],
            "time": rng.randrange(200, max(300, horizon - 1000)),
            "position": [round(mover["position"][0] + dx, 3),
                         round(mover["position"][1] + dy, 3)],
        })

    return {
        "wns": {
            "id": 1 + seed % 60000,
            "coordinator": 1,
            "channels": channels,
            "params": {
                "omission_bound": k, "max_inaccess": i, "failed_channels": f,
                "consecutive_bound": k, "observation_window": WINDOW,
                "tx_delay": TX_DELAY, "inaccess_budget": tau_ina,
            },
            "nodes": nodes,
        },
        "faults": faults,
        "workload": workload,
        "seed": seed,
        "horizon": horizon,
    }
