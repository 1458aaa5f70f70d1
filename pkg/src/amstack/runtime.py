"""Discrete-event simulation of a mapped computation graph.

Execution model
---------------
Every node is released periodically at its required frequency with phase 0
(all first activations at t = 0, the conservative simultaneous release).
An activation reads the latest sample on each input port (sample-and-hold;
a port that has never produced is read as absent), then queues one job on
the node's assigned device. Devices run core_count FIFO lanes without
preemption: the job takes the lane that frees up earliest, at enqueue
time. Service time comes from the assigned variant profile, either the
mean (deterministic mode) or a truncated normal sample from a per-node
seeded stream (stochastic mode), times any disturbance factor active at
the activation instant.

A job's deadline is its activation plus one period. Jobs that have not
finished by their deadline log a miss at the deadline instant (so stalls
longer than the run still show up) and their output is still delivered
when they do finish, overwriting the newest buffer slot.

Sink nodes additionally emit one command per period, at the deadline,
no matter what: the emission carries the freshest buffered inputs with a
per-port staleness reading (flagged stale past 2 producer periods). This
is what keeps actuation cadence independent of upstream stalls.

Samples carry provenance: an output's origin is the oldest origin among
the inputs its producing job consumed. End-to-end latency is measured at
sink job completion as finish time minus that origin, i.e. the age of the
oldest sensor data that influenced the command.

Adaptation
----------
When enabled, per-node latency budgets (from contract decomposition, or
per-operator latency contracts directly) drive a windowed detector invoked
at every completion: the last W response times are kept per node, and once
their p95 exceeds budget x (1 + theta) for k consecutive completions the
node is moved - first to the fastest variant on its current device, else
to the compatible device with the lowest observed busy utilization
(require_map is honored; with nowhere to go the deviation is logged
unresolved). Every decision starts a cooldown of C periods during which
the node cannot change again.

Metrics are a pure function of the trace: simulate() computes them by
replaying its own trace, and replay() reproduces them from a stored one.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .dsl import ContractStmt
from .errors import StackError
from .graph import ComputationGraph, buffer_sizing
from .scheduler import Mapping, analytic_latency, decompose_contract
from .substrate import SubstrateModel, query

# event priorities at equal timestamps: finishes publish and free lanes
# first, sensor data lands before consumers activate, misses are checked
# before the deadline emission goes out
_FINISH, _START, _SOURCE_EMIT, _ACTIVATE, _DEADLINE, _SINK_EMIT = range(6)

STALE_PERIODS = 2.0  # a sample older than this many producer periods is stale


@dataclass(frozen=True)
class AdaptationParams:
    window: int = 20  # W completions per evaluation window
    threshold: float = 0.10  # theta, tolerated fraction over budget
    confirm: int = 2  # k consecutive breaches before acting
    cooldown_periods: int = 50  # C periods between changes of one node


@dataclass(frozen=True)
class SimConfig:
    duration_s: float
    seed: int = 0
    mode: str = "deterministic"  # or "stochastic"
    adaptation: bool = False
    adaptation_params: AdaptationParams = field(default_factory=AdaptationParams)


@dataclass(frozen=True)
class Disturbance:
    operator: str
    factor: float  # multiplier on sampled service time
    t_start: float
    t_end: float


@dataclass(frozen=True)
class TraceEvent:
    t: float
    node: str
    kind: str  # activate | start | finish | miss | emit | remap | variant_switch
    detail: dict


@dataclass(frozen=True)
class SimTrace:
    duration_s: float
    events: tuple[TraceEvent, ...]


@dataclass(frozen=True)
class MetricsReport:
    duration_s: float
    per_node: dict[str, dict]
    per_device: dict[str, dict]
    end_to_end: dict
    contracts: list[dict]

    def to_json_dict(self) -> dict:
        return {
            "duration_s": self.duration_s,
            "per_node": self.per_node,
            "per_device": self.per_device,
            "end_to_end": self.end_to_end,
            "contracts": self.contracts,
        }

    def all_contracts_held(self) -> bool:
        return all(c["held"] for c in self.contracts)


def load_disturbances(path: str) -> list[Disturbance]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise StackError("E-IO", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StackError("E-SCHEMA", f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise StackError("E-SCHEMA", "disturbance file must be a JSON array", "/")
    out = []
    for i, row in enumerate(doc):
        if not isinstance(row, dict) or set(row) != {"op", "factor", "t0", "t1"}:
            raise StackError("E-SCHEMA", "disturbance rows need exactly op, factor, t0, t1", f"/{i}")
        out.append(Disturbance(row["op"], float(row["factor"]), float(row["t0"]), float(row["t1"])))
    return out


def percentile(values: list[float], q: float) -> float | None:
    """Nearest-rank percentile; None on empty input."""
    if not values:
        return None
    ordered = sorted(values)
    rank = max(1, math.ceil(q / 100.0 * len(ordered)))
    return ordered[rank - 1]


@dataclass
class _Sample:
    produced_t: float
    origin_t: float


@dataclass
class _Job:
    job_id: int
    node_id: int
    activation_t: float
    deadline_t: float
    service_s: float
    device_id: str
    lane: int
    start_t: float
    finish_t: float
    origin_t: float | None
    energy_mj: float
    finished: bool = False


class _Adaptation:
    """Windowed-p95 deviation detector and remapping policy."""

    def __init__(self, graph, model, params: AdaptationParams, budgets: dict[int, float]):
        self.graph = graph
        self.model = model
        self.params = params
        self.budgets = budgets
        self.window: dict[int, deque] = {nid: deque(maxlen=params.window) for nid in budgets}
        self.consec: dict[int, int] = {nid: 0 for nid in budgets}
        self.cooldown_until: dict[int, float] = {nid: 0.0 for nid in budgets}

    def on_completion(self, sim: "_Simulator", nid: int, t: float, response_ms: float):
        if nid not in self.budgets:
            return
        win = self.window[nid]
        win.append(response_ms)
        if t < self.cooldown_until[nid] or len(win) < self.params.window:
            return
        budget = self.budgets[nid]
        p95 = percentile(list(win), 95.0)
        if p95 > budget * (1.0 + self.params.threshold):
            self.consec[nid] += 1
        else:
            self.consec[nid] = 0
            return
        if self.consec[nid] < self.params.confirm:
            return
        self._act(sim, nid, t, p95, budget)
        node = self.graph.node(nid)
        self.cooldown_until[nid] = t + self.params.cooldown_periods / node.required_freq_hz
        win.clear()
        self.consec[nid] = 0

    def _act(self, sim: "_Simulator", nid: int, t: float, p95: float, budget: float):
        node = self.graph.node(nid)
        dev_id, variant = sim.assignment[nid]
        dev = self.model.device(dev_id)
        base = {"p95_ms": p95, "budget_ms": budget}
        profiles = query(self.model, node.name, dev.device_class)
        if profiles and profiles[0].variant != variant:
            sim.assignment[nid] = (dev_id, profiles[0].variant)
            sim.log(t, node.name, "variant_switch", dict(base, device=dev_id, from_variant=variant, to_variant=profiles[0].variant))
            return
        allowed_class = None
        if node.mapping_constraint is not None and node.mapping_constraint[1] == "requirement":
            allowed_class = node.mapping_constraint[0]
        targets = [
            d
            for d in self.model.devices
            if query(self.model, node.name, d.device_class)
            and (allowed_class is None or d.device_class == allowed_class)
        ]
        target = min(targets, key=lambda d: (sim.busy_utilization(d.id, t), d.id))
        if target.id == dev_id:
            sim.log(t, node.name, "remap", dict(base, unresolved=True, device=dev_id))
            return
        new_variant = query(self.model, node.name, target.device_class)[0].variant
        sim.assignment[nid] = (target.id, new_variant)
        sim.log(
            t,
            node.name,
            "remap",
            dict(base, from_device=dev_id, to_device=target.id, from_variant=variant, to_variant=new_variant),
        )


class _Simulator:
    def __init__(
        self,
        graph: ComputationGraph,
        model: SubstrateModel,
        mapping: Mapping,
        contracts: list[ContractStmt],
        config: SimConfig,
        disturbances: list[Disturbance],
    ):
        if any(e.buffer_capacity is None for e in graph.edges):
            graph = buffer_sizing(graph)
        self.graph = graph
        self.model = model
        self.config = config
        self.contracts = contracts
        self.assignment = dict(mapping.assignment)  # mutable under adaptation
        for n in graph.operator_nodes():
            if n.id not in self.assignment:
                raise StackError("E-NOMAPPING", f"operator '{n.name}' has no assignment")
        for d in disturbances:
            if not (d.factor > 0):
                raise StackError("E-SCHEMA", f"disturbance factor must be positive, got {d.factor}")
            if not (0.0 <= d.t_start < d.t_end <= config.duration_s):
                raise StackError(
                    "E-SCHEMA",
                    f"disturbance interval [{d.t_start}, {d.t_end}) must lie within the {config.duration_s} s run",
                )
        self.disturbances = disturbances

        self.buffers: dict[tuple[int, int, int], deque] = {
            (e.producer, e.consumer, e.port): deque(maxlen=e.buffer_capacity) for e in graph.edges
        }
        self.lane_free: dict[str, list[float]] = {d.id: [0.0] * d.core_count for d in model.devices}
        self.busy_done_s: dict[str, float] = {d.id: 0.0 for d in model.devices}
        self.rng: dict[int, random.Random] = {
            n.id: random.Random(f"{config.seed}/{n.name}") for n in graph.operator_nodes()
        }
        self.events: list[TraceEvent] = []
        self.heap: list = []
        self.seq = 0
        self.jobs: dict[int, _Job] = {}
        self.next_job_id = 0

        budgets: dict[int, float] = {}
        if config.adaptation:
            name_to_id = {n.name: n.id for n in graph.nodes}
            for c in contracts:
                if c.scope == "end_to_end" and c.latency_bound_ms is not None:
                    _, _, path = analytic_latency(graph, model, self.assignment)
                    if path:
                        for sc in decompose_contract(c.latency_bound_ms, path, graph, model, self.assignment):
                            budgets.setdefault(sc.node_id, sc.latency_budget_ms)
            for c in contracts:
                if c.scope != "end_to_end" and c.latency_bound_ms is not None and c.scope in name_to_id:
                    budgets[name_to_id[c.scope]] = c.latency_bound_ms
        self.adaptation = _Adaptation(graph, model, config.adaptation_params, budgets) if config.adaptation else None

    # -- plumbing --------------------------------------------------------

    def push(self, t: float, prio: int, kind: str, payload):
        heapq.heappush(self.heap, (t, prio, self.seq, kind, payload))
        self.seq += 1

    def log(self, t: float, node: str, kind: str, detail: dict):
        self.events.append(TraceEvent(t, node, kind, detail))

    def busy_utilization(self, device_id: str, t: float) -> float:
        if t <= 0.0:
            return 0.0
        dev = self.model.device(device_id)
        return self.busy_done_s[device_id] / (t * dev.core_count)

    def disturbance_factor(self, name: str, t: float) -> float:
        f = 1.0
        for d in self.disturbances:
            if d.operator == name and d.t_start <= t < d.t_end:
                f *= d.factor
        return f

    def draw_service(self, node, t: float) -> tuple[float, float]:
        """(service seconds, energy mJ) for one invocation released at t."""
        dev_id, variant = self.assignment[node.id]
        prof = self.model.profile(node.name, variant, self.model.device(dev_id).device_class)
        if self.config.mode == "stochastic":
            drawn = self.rng[node.id].gauss(prof.latency_mean_ms, prof.latency_std_ms)
            lat_ms = max(0.1 * prof.latency_mean_ms, drawn)
        else:
            lat_ms = prof.latency_mean_ms
        return lat_ms * self.disturbance_factor(node.name, t) / 1000.0, prof.energy_per_invocation_mj

    def read_inputs(self, nid: int, t: float):
        """Latest sample per port: (staleness map, stale flags, oldest origin)."""
        staleness: dict[str, float | None] = {}
        flags: dict[str, bool] = {}
        origin: float | None = None
        for e in sorted(self.graph.in_edges(nid), key=lambda e: e.port):
            buf = self.buffers[(e.producer, e.consumer, e.port)]
            key = str(e.port)
            if not buf:
                staleness[key] = None
                flags[key] = False
                continue
            sample = buf[-1]
            age_s = t - sample.produced_t
            staleness[key] = age_s * 1000.0
            producer_period = 1.0 / self.graph.node(e.producer).required_freq_hz
            flags[key] = age_s > STALE_PERIODS * producer_period
            origin = sample.origin_t if origin is None else min(origin, sample.origin_t)
        return staleness, flags, origin

    # -- event handlers ----------------------------------------------------

    def run(self) -> SimTrace:
        duration = self.config.duration_s
        if duration <= 0:
            raise StackError("E-SCHEMA", "simulation duration must be positive")
        eps = 1e-9
        for n in sorted(self.graph.nodes, key=lambda n: n.id):
            period = 1.0 / n.required_freq_hz
            k = 0
            while (t := k / n.required_freq_hz) < duration - eps:
                if n.kind == "source":
                    self.push(t, _SOURCE_EMIT, "source_emit", n.id)
                else:
                    self.push(t, _ACTIVATE, "activate", (n.id, k))
                    if n.id in self.graph.sink_ids and t + period <= duration + eps:
                        self.push(t + period, _SINK_EMIT, "sink_emit", (n.id, t))
                k += 1

        while self.heap:
            t, prio, _, kind, payload = heapq.heappop(self.heap)
            if t > self.config.duration_s + eps:
                break
            getattr(self, "_on_" + kind)(t, payload)
        return SimTrace(duration, tuple(self.events))

    def _on_source_emit(self, t: float, nid: int):
        node = self.graph.node(nid)
        for e in self.graph.out_edges(nid):
            self.buffers[(e.producer, e.consumer, e.port)].append(_Sample(t, t))
        self.log(t, node.name, "emit", {"produced_t": t})

    def _on_activate(self, t: float, payload):
        nid, _k = payload
        node = self.graph.node(nid)
        staleness, _flags, origin = self.read_inputs(nid, t)
        service, energy = self.draw_service(node, t)
        dev_id, _variant = self.assignment[nid]
        lanes = self.lane_free[dev_id]
        lane = min(range(len(lanes)), key=lambda i: lanes[i])
        start = max(t, lanes[lane])
        finish = start + service
        lanes[lane] = finish
        job = _Job(
            self.next_job_id, nid, t, t + 1.0 / node.required_freq_hz, service, dev_id, lane, start, finish, origin, energy
        )
        self.next_job_id += 1
        self.jobs[job.job_id] = job
        self.log(t, node.name, "activate", {"job": job.job_id, "staleness_ms": staleness})
        dur = self.config.duration_s
        if start <= dur + 1e-9:
            self.push(start, _START, "job_start", job.job_id)
        if finish <= dur + 1e-9:
            self.push(finish, _FINISH, "job_finish", job.job_id)
        self.push(job.deadline_t, _DEADLINE, "deadline", job.job_id)

    def _on_job_start(self, t: float, job_id: int):
        job = self.jobs[job_id]
        dev = self.model.device(job.device_id)
        self.log(
            t,
            self.graph.node(job.node_id).name,
            "start",
            {"job": job_id, "device": job.device_id, "lane": job.lane, "cores": dev.core_count},
        )

    def _on_job_finish(self, t: float, job_id: int):
        job = self.jobs[job_id]
        job.finished = True
        node = self.graph.node(job.node_id)
        self.busy_done_s[job.device_id] += job.service_s
        for e in self.graph.out_edges(job.node_id):
            self.buffers[(e.producer, e.consumer, e.port)].append(
                _Sample(t, job.origin_t if job.origin_t is not None else job.activation_t)
            )
        response_ms = (t - job.activation_t) * 1000.0
        detail = {
            "job": job_id,
            "device": job.device_id,
            "lane": job.lane,
            "activation_t": job.activation_t,
            "service_ms": job.service_s * 1000.0,
            "response_ms": response_ms,
            "late": t > job.deadline_t + 1e-9,
            "energy_mj": job.energy_mj,
            "e2e_ms": None if job.origin_t is None else (t - job.origin_t) * 1000.0,
            "sink": job.node_id in self.graph.sink_ids,
        }
        self.log(t, node.name, "finish", detail)
        if self.adaptation is not None:
            self.adaptation.on_completion(self, job.node_id, t, response_ms)

    def _on_deadline(self, t: float, job_id: int):
        job = self.jobs[job_id]
        if not job.finished:
            self.log(t, self.graph.node(job.node_id).name, "miss", {"job": job_id, "deadline_t": t})

    def _on_sink_emit(self, t: float, payload):
        nid, activation_t = payload
        node = self.graph.node(nid)
        staleness, flags, origin = self.read_inputs(nid, t)
        self.log(
            t,
            node.name,
            "emit",
            {
                "activation_t": activation_t,
                "staleness_ms": staleness,
                "stale": flags,
                "age_ms": None if origin is None else (t - origin) * 1000.0,
            },
        )


def simulate(
    graph: ComputationGraph,
    model: SubstrateModel,
    mapping: Mapping,
    contracts: list[ContractStmt] | None = None,
    config: SimConfig | None = None,
    disturbances: list[Disturbance] | None = None,
) -> tuple[SimTrace, MetricsReport]:
    if config is None:
        config = SimConfig(duration_s=1.0)
    contracts = list(contracts or [])
    sim = _Simulator(graph, model, mapping, contracts, config, list(disturbances or []))
    trace = sim.run()
    return trace, replay(trace, contracts=contracts, model=model)


# ---------------------------------------------------------------------------
# Replay: metrics as a pure function of the trace


def replay(
    trace: SimTrace, contracts: list[ContractStmt] | None = None, model: SubstrateModel | None = None
) -> MetricsReport:
    """Recompute the metrics report from a trace.

    simulate() itself computes its report through this function, so replay
    equality is structural. Contracts (and the model, for energy bounds)
    are needed only to reproduce contract verdicts; a malformed trace
    raises E-MALFORMED.
    """
    contracts = list(contracts or [])
    duration = trace.duration_s
    last_t = None
    for e in trace.events:
        if last_t is not None and e.t < last_t - 1e-12:
            raise StackError("E-MALFORMED", "trace timestamps must be nondecreasing")
        last_t = e.t

    activates: dict[str, int] = {}
    responses: dict[str, list[float]] = {}
    misses: dict[str, int] = {}
    emits: dict[str, list[float]] = {}
    max_stale: dict[str, float] = {}
    sink_names: set[str] = set()
    e2e_samples: dict[str, list[float]] = {}
    stale_emits: dict[str, int] = {}
    busy_ms: dict[str, float] = {}
    cores: dict[str, int] = {}
    open_starts: dict[int, tuple[str, float]] = {}
    energy_mj_total = 0.0

    def _touch(name):
        activates.setdefault(name, 0)
        responses.setdefault(name, [])
        misses.setdefault(name, 0)
        emits.setdefault(name, [])

    for e in trace.events:
        _touch(e.node)
        if e.kind == "activate":
            activates[e.node] += 1
            for v in e.detail.get("staleness_ms", {}).values():
                if v is not None:
                    max_stale[e.node] = max(max_stale.get(e.node, 0.0), v)
        elif e.kind == "start":
            d = e.detail
            open_starts[d["job"]] = (d["device"], e.t)
            cores[d["device"]] = d["cores"]
            busy_ms.setdefault(d["device"], 0.0)
        elif e.kind == "finish":
            d = e.detail
            responses[e.node].append(d["response_ms"])
            energy_mj_total += d.get("energy_mj", 0.0)
            if d["job"] in open_starts:
                dev, start_t = open_starts.pop(d["job"])
                busy_ms[dev] = busy_ms.get(dev, 0.0) + (e.t - start_t) * 1000.0
            if d.get("sink") and d.get("e2e_ms") is not None:
                sink_names.add(e.node)
                e2e_samples.setdefault(e.node, []).append(d["e2e_ms"])
        elif e.kind == "miss":
            misses[e.node] += 1
        elif e.kind == "emit":
            emits[e.node].append(e.t)
            if "stale" in e.detail:
                sink_names.add(e.node)
                stale_emits.setdefault(e.node, 0)
                if any(e.detail["stale"].values()):
                    stale_emits[e.node] += 1
                for v in e.detail.get("staleness_ms", {}).values():
                    if v is not None:
                        max_stale[e.node] = max(max_stale.get(e.node, 0.0), v)

    # jobs still running when the window closed count as busy to the end
    for job_id, (dev, start_t) in open_starts.items():
        busy_ms[dev] = busy_ms.get(dev, 0.0) + (duration - start_t) * 1000.0

    per_node = {}
    for name in sorted(activates):
        rs = responses[name]
        n_emits = len(emits[name])
        completions = len(rs)
        achieved = (n_emits if n_emits else completions) / duration
        per_node[name] = {
            "achieved_hz": achieved,
            "completions": completions,
            "emits": n_emits,
            "p50_ms": percentile(rs, 50.0),
            "p95_ms": percentile(rs, 95.0),
            "p99_ms": percentile(rs, 99.0),
            "misses": misses[name],
            "max_staleness_ms": max_stale.get(name),
        }

    per_device = {}
    for dev in sorted(busy_ms):
        per_device[dev] = {"busy_utilization": busy_ms[dev] / (duration * 1000.0 * cores[dev])}

    primary_sink = min(sink_names) if sink_names else None
    sink_emit_times = emits.get(primary_sink, []) if primary_sink else []
    inter = np.diff(sorted(sink_emit_times)) if len(sink_emit_times) > 1 else []
    e2e = e2e_samples.get(primary_sink, []) if primary_sink else []
    end_to_end = {
        "sink": primary_sink,
        "emits": len(sink_emit_times),
        "jitter_ms": float(np.std(inter) * 1000.0) if len(sink_emit_times) > 1 else None,
        "p50_ms": percentile(e2e, 50.0),
        "p95_ms": percentile(e2e, 95.0),
        "p99_ms": percentile(e2e, 99.0),
        "stale_emits": stale_emits.get(primary_sink, 0) if primary_sink else 0,
    }

    verdicts = []

    def _verdict(scope, metric, bound, observed, held):
        verdicts.append(
            {"scope": scope, "metric": metric, "bound": bound, "observed": observed, "held": bool(held)}
        )

    for c in contracts:
        if c.scope == "end_to_end":
            if c.latency_bound_ms is not None:
                obs = end_to_end["p95_ms"]
                _verdict("end_to_end", "latency_p95_ms", c.latency_bound_ms, obs, obs is not None and obs <= c.latency_bound_ms)
            if c.min_frequency_hz is not None:
                obs = len(sink_emit_times) / duration
                _verdict("end_to_end", "frequency_hz", c.min_frequency_hz, obs, obs >= c.min_frequency_hz - 1.0 / duration)
            if c.max_latency_std_ms is not None:
                obs = float(np.std(e2e)) if e2e else None
                _verdict("end_to_end", "latency_std_ms", c.max_latency_std_ms, obs, obs is not None and obs <= c.max_latency_std_ms)
            if c.energy_bound_w is not None and model is not None:
                obs = energy_mj_total / 1000.0 / duration + sum(d.idle_power_w for d in model.devices)
                _verdict("end_to_end", "energy_w", c.energy_bound_w, obs, obs <= c.energy_bound_w)
        else:
            rs = responses.get(c.scope, [])
            if c.latency_bound_ms is not None:
                obs = percentile(rs, 95.0)
                _verdict(c.scope, "latency_p95_ms", c.latency_bound_ms, obs, obs is not None and obs <= c.latency_bound_ms)
            if c.min_frequency_hz is not None:
                obs = len(rs) / duration
                _verdict(c.scope, "frequency_hz", c.min_frequency_hz, obs, obs >= c.min_frequency_hz - 1.0 / duration)
            if c.max_latency_std_ms is not None:
                obs = float(np.std(rs)) if rs else None
                _verdict(c.scope, "latency_std_ms", c.max_latency_std_ms, obs, obs is not None and obs <= c.max_latency_std_ms)

    return MetricsReport(duration, per_node, per_device, end_to_end, verdicts)


# ---------------------------------------------------------------------------
# Trace persistence


def trace_to_jsonl(trace: SimTrace) -> str:
    lines = [
        json.dumps({"t": e.t, "node": e.node, "kind": e.kind, "detail": e.detail}, sort_keys=True)
        for e in trace.events
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def trace_from_jsonl(text: str, duration_s: float | None = None) -> SimTrace:
    events = []
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            events.append(TraceEvent(row["t"], row["node"], row["kind"], row["detail"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise StackError("E-MALFORMED", f"bad trace line {i + 1}: {exc}") from exc
    if duration_s is None:
        duration_s = max((e.t for e in events), default=0.0)
    return SimTrace(duration_s, tuple(events))


def metrics_to_json(report: MetricsReport) -> str:
    return json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
