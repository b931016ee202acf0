"""Deterministic simulated P2P data grid.

One event loop owns all state: integer-tick clock, per-node task queues with
capacity limits, and an append-only event log.  Resource discovery is
decentralized TTL flooding with duplicate suppression; a node's forwarding
decision uses only its own neighbor list and seen correlation ids, never a
global index.  Every message put "on the wire" is round-tripped through the
binary codec so the frame format stays load-bearing.
"""

import heapq
import math
from dataclasses import dataclass, field

from .codec import Message, MsgType, decode_message, encode_message
from .errors import AdmireError, GridError, TaskFailure

# Replication speed for dataset transfers, in table rows per simulated tick.
TRANSFER_ROWS_PER_TICK = 100

DATA = "data"
RESOURCE = "resource"


@dataclass(frozen=True)
class Entity:
    id: str
    kind: str  # DATA or RESOURCE
    payload: dict
    home_node: str


class Topology:
    """Undirected P2P graph with per-edge latencies (ticks >= 0)."""

    def __init__(self, nodes, edges):
        self.nodes = tuple(sorted(set(nodes)))
        node_set = set(self.nodes)
        self._latency: dict = {}
        self._neighbors: dict = {n: set() for n in self.nodes}
        for a, b, latency in edges:
            if a == b:
                raise GridError("bad-topology", f"self-loop at {a}")
            if a not in node_set or b not in node_set:
                raise GridError("bad-topology", f"edge {a}-{b} references unknown node")
            if latency < 0:
                raise GridError("bad-topology", f"edge {a}-{b} has negative latency")
            key = (min(a, b), max(a, b))
            self._latency[key] = latency
            self._neighbors[a].add(b)
            self._neighbors[b].add(a)

    @classmethod
    def from_dict(cls, d: dict) -> "Topology":
        edges = [(e["a"], e["b"], e["latency"]) for e in d.get("edges", ())]
        return cls(d.get("nodes", ()), edges)

    @classmethod
    def complete(cls, nodes, latency=1) -> "Topology":
        nodes = sorted(set(nodes))
        edges = [
            (a, b, latency) for i, a in enumerate(nodes) for b in nodes[i + 1 :]
        ]
        return cls(nodes, edges)

    def neighbors(self, node: str):
        return sorted(self._neighbors[node])

    def latency(self, a: str, b: str) -> int:
        return self._latency[(min(a, b), max(a, b))]

    def shortest_latency(self, src: str, dst: str):
        """Dijkstra distance in ticks, or None when dst is unreachable."""
        dist = {src: 0}
        heap = [(0, src)]
        while heap:
            d, node = heapq.heappop(heap)
            if d > dist.get(node, math.inf):
                continue
            if node == dst:
                return d
            for nb in self.neighbors(node):
                nd = d + self.latency(node, nb)
                if nd < dist.get(nb, math.inf):
                    dist[nb] = nd
                    heapq.heappush(heap, (nd, nb))
        return dist.get(dst)


@dataclass
class _Submission:
    node: str
    submit_tick: int
    dispatch_tick: int
    completion_tick: int
    arrival_tick: int
    result: object = None
    error: AdmireError | None = None
    consumed: bool = False


def _default_executor(payload):
    return payload, 1


class SimGrid:
    """The virtual data grid realized as a single-threaded simulation."""

    def __init__(self, topology: Topology):
        self.topology = topology
        self.clock = 0
        self.log: list[dict] = []
        self.entities: dict[str, Entity] = {}
        self.hosted: dict[str, set] = {n: set() for n in topology.nodes}
        self.dataset_rows: dict[str, int] = {}
        self.capacity: dict[str, int] = {n: 1 for n in topology.nodes}
        self._executors: dict = {}
        self._busy: dict[str, list] = {n: [] for n in topology.nodes}
        self._submissions: dict[int, _Submission] = {}
        self._next_correlation = 1

    # -- plumbing -------------------------------------------------------------

    def _correlate(self) -> int:
        cid = self._next_correlation
        self._next_correlation += 1
        return cid

    def _record(self, tick: int, event: str, **fields) -> None:
        entry = {"tick": tick, "event": event}
        entry.update(fields)
        self.log.append(entry)

    def _send(self, msg: Message, tick: int) -> Message:
        """Round-trip a message through the wire codec and log it."""
        received = decode_message(encode_message(msg))
        self._record(
            tick,
            "message",
            msg_type=received.msg_type.name,
            src=received.src,
            dst=received.dst,
            correlation_id=received.correlation_id,
            ttl=received.ttl,
        )
        return received

    def _require_node(self, node: str) -> None:
        if node not in self.hosted:
            raise GridError("unknown-node", f"no node {node!r} in topology")

    def set_executor(self, node: str, fn) -> None:
        self._require_node(node)
        self._executors[node] = fn

    # -- entities -------------------------------------------------------------

    def register_entity(self, entity: Entity) -> None:
        if entity.id in self.entities:
            raise GridError("duplicate-entity", f"entity {entity.id!r} already registered")
        self._require_node(entity.home_node)
        if entity.kind not in (DATA, RESOURCE):
            raise GridError("bad-entity", f"unknown entity kind {entity.kind!r}")
        self.entities[entity.id] = entity
        if entity.kind == DATA:
            dataset = entity.payload.get("dataset_id", entity.id)
            self.hosted[entity.home_node].add(dataset)
            self.dataset_rows[dataset] = int(entity.payload.get("row_count", 0))
        else:
            self.capacity[entity.home_node] = max(
                1, int(entity.payload.get("capacity", 1))
            )
        self._record(self.clock, "register", entity=entity.id, node=entity.home_node)

    # -- discovery ------------------------------------------------------------

    def discover(self, origin: str, kind=None, capabilities=(), ttl=0):
        """TTL flooding: matching entities homed within ttl hops of origin.

        Flooding proceeds in hop rounds; a node forwards a correlation id at
        most once (the round it is first reached, which is its hop distance,
        so its remaining ttl is maximal and hop-reachability is exact).
        """
        self._require_node(origin)
        if ttl < 0:
            raise GridError("bad-ttl", "ttl must be >= 0")
        correlation = self._correlate()
        required = set(capabilities)
        start = self.clock
        arrival = {origin: start}
        dist = {origin: 0}
        frontier = [origin]
        hops = 0
        while frontier and hops < ttl:
            reached: dict[str, int] = {}
            for node in sorted(frontier):
                msg = Message(
                    msg_type=MsgType.DISCOVER,
                    src=node,
                    dst="*",
                    correlation_id=correlation,
                    ttl=ttl - hops,
                    payload=b"",
                )
                self._send(msg, arrival[node])
                for nb in self.topology.neighbors(node):
                    tick = arrival[node] + self.topology.latency(node, nb)
                    if nb in dist:
                        continue  # duplicate suppression: already reached
                    if nb not in reached or tick < reached[nb]:
                        reached[nb] = tick
            for nb, tick in sorted(reached.items()):
                dist[nb] = hops + 1
                arrival[nb] = tick
            frontier = sorted(reached)
            hops += 1

        matches = []
        end = max(arrival.values())
        for eid in sorted(self.entities):
            entity = self.entities[eid]
            if entity.home_node not in dist:
                continue
            if kind is not None and entity.kind != kind:
                continue
            if required and not required <= set(entity.payload.get("capabilities", ())):
                continue
            matches.append(entity)
            hit_tick = arrival[entity.home_node] + (arrival[entity.home_node] - start)
            self._send(
                Message(
                    msg_type=MsgType.DISCOVER_HIT,
                    src=entity.home_node,
                    dst=origin,
                    correlation_id=correlation,
                    ttl=0,
                    payload=eid.encode("utf-8"),
                ),
                arrival[entity.home_node],
            )
            end = max(end, hit_tick)
        self.clock = max(self.clock, end)
        return matches

    def discovery_forwards(self, correlation_id: int) -> int:
        return sum(
            1
            for e in self.log
            if e.get("event") == "message"
            and e.get("msg_type") == "DISCOVER"
            and e.get("correlation_id") == correlation_id
        )

    # -- task submission ------------------------------------------------------

    def submit_task(self, src: str, dst: str, payload) -> int:
        """Dispatch a task to dst's executor; returns a correlation id.

        The task starts after transit latency, queuing behind earlier tasks
        when the node is at capacity; the result message travels back over the
        same latency.  The clock does not advance until await_result.
        """
        self._require_node(src)
        self._require_node(dst)
        transit = self.topology.shortest_latency(src, dst)
        if transit is None:
            raise GridError("unreachable-node", f"{dst!r} not reachable from {src!r}")
        correlation = self._correlate()
        arrival = self.clock + transit
        executor = self._executors.get(dst, _default_executor)
        result, error, duration = None, None, 1
        try:
            result, duration = executor(payload)
        except AdmireError as exc:
            error = exc
        dispatch = self._reserve(dst, arrival, duration)
        completion = dispatch + duration
        back = completion + transit
        self._submissions[correlation] = _Submission(
            node=dst,
            submit_tick=self.clock,
            dispatch_tick=dispatch,
            completion_tick=completion,
            arrival_tick=back,
            result=result,
            error=error,
        )
        self._send(
            Message(MsgType.TASK_SUBMIT, src, dst, correlation, 0, b""), self.clock
        )
        self._send(
            Message(MsgType.TASK_RESULT, dst, src, correlation, 0, b""), completion
        )
        return correlation

    def _reserve(self, node: str, arrival: int, duration: int) -> int:
        """Earliest start >= arrival keeping concurrent tasks <= capacity."""
        busy = self._busy[node]
        cap = self.capacity[node]
        start = arrival
        while True:
            active = [e for (s, e) in busy if s <= start < e]
            if len(active) < cap:
                break
            start = min(active)
        busy.append((start, start + duration))
        return start

    def await_result(self, correlation_id: int):
        """Block simulated time until the result message arrives."""
        sub = self._submissions.get(correlation_id)
        if sub is None:
            raise GridError("unknown-correlation", f"no submission {correlation_id}")
        self.clock = max(self.clock, sub.arrival_tick)
        sub.consumed = True
        if sub.error is not None:
            raise TaskFailure(str(sub.error))
        return sub.result

    def submission_info(self, correlation_id: int) -> _Submission:
        sub = self._submissions.get(correlation_id)
        if sub is None:
            raise GridError("unknown-correlation", f"no submission {correlation_id}")
        return sub

    # -- dataset transfer -----------------------------------------------------

    def transfer_dataset(self, dataset_id: str, from_node: str, to_node: str) -> None:
        """Replicate a dataset (the source keeps its copy); latency grows with
        row count.  Idempotent: re-transferring leaves the hosted sets equal."""
        self._require_node(from_node)
        self._require_node(to_node)
        if dataset_id not in self.hosted[from_node]:
            raise GridError(
                "unknown-dataset", f"dataset {dataset_id!r} not hosted at {from_node!r}"
            )
        transit = self.topology.shortest_latency(from_node, to_node)
        if transit is None:
            raise GridError(
                "unreachable-node", f"{to_node!r} not reachable from {from_node!r}"
            )
        rows = self.dataset_rows.get(dataset_id, 0)
        duration = transit + math.ceil(rows / TRANSFER_ROWS_PER_TICK)
        correlation = self._correlate()
        self._send(
            Message(
                MsgType.DATA_TRANSFER,
                from_node,
                to_node,
                correlation,
                0,
                dataset_id.encode("utf-8"),
            ),
            self.clock,
        )
        self.clock += duration
        self.hosted[to_node].add(dataset_id)
        self._record(self.clock, "transfer-complete", dataset=dataset_id, node=to_node)
