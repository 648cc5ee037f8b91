"""Golden-trace regression pins: any semantic drift in the update rules,
parameter derivation, or engine scheduling changes these digests."""

import hashlib
import json

from colorsim.engine import gen_graph, run_li, run_ss
from colorsim.params import derive
from colorsim.ss_rules import AdversarySchedule


def _digest(trace) -> str:
    blob = json.dumps(trace, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def test_li_k17_trace_digest():
    g = gen_graph("complete", 17, 16, 0)
    p = derive(17, 16)
    rep = run_li(p, g, record_trace=True)
    assert rep.ok
    assert _digest(rep.trace) == (
        "0f5c79971d4c7f81d0592fd74e4bb53a886dc28bb321cfd7333747389828aa2a"
    )


def test_li_gnp_trace_digest():
    g = gen_graph("gnp_capped", 60, 16, 3)
    p = derive(60, g.delta)
    rep = run_li(p, g, record_trace=True)
    assert rep.ok
    assert _digest(rep.trace) == (
        "4b731483aa79ee994b02983d0a464ac82446e3ed0c606aa5bc606bf4db70f006"
    )


def test_ss_trace_digest():
    g = gen_graph("cycle", 30, 2, 0)
    p = derive(30, 2)
    sched = AdversarySchedule.from_json({"seed": 2, "intensity": 2, "horizon": 5})
    rep = run_ss(p, g, sched, record_trace=True)
    assert rep.ok
    assert _digest(rep.trace) == (
        "d218e538506a9b4caf0309e975f24bebefbf9282368920886ccb1f8dc0918c64"
    )
