"""Discrete-event simulation of sources sharing a chain of routers.

Topology for ``hops = m`` intermediate nodes and ``n`` connections::

    src_c -> tx_c -> [cpu_1 -> fwd_1] -> ... -> [cpu_m -> fwd_m] -> dst_c
    src_c <-------- [rev_1 <- cpu_1] <- ... <- [rev_m <- cpu_m] <- dst_c

Each source host has its own transmit queue onto the LAN. Each
intermediate node owns a CPU (receive) queue shared by data and acks, a
forward transmit queue for data and a reverse transmit queue for acks; all
three draw from one pool of ``buffer_capacity`` packet buffers. Hosts
process arrivals without queueing and the destination acks every data
packet. A one-connection path thus has 3m + 1 queues. Links between
routers run at WAN speed, the host-side links at LAN speed.
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Optional

from .analysis import ClosedNetworkModel, optimal_population, terrestrial_pipe_size
from .config import Distribution, NetworkConfig, PipeSizeRule, Service
from .window import PathInfo, WindowController, new_controller


class PacketKind(Enum):
    DATA = "data"
    ACK = "ack"


@dataclass(slots=True)
class Packet:
    connection: int
    kind: PacketKind
    number: int          # sequence number, or cumulative ack number
    created: float
    transmission: int = 1


class Verdict(Enum):
    ACCEPTED = "accepted"
    DROPPED = "dropped"


class Receipt(Enum):
    DELIVERED = "delivered"
    CACHED = "cached"
    DISCARDED = "discarded"
    DUPLICATE = "duplicate"


class TraceRecord(NamedTuple):
    time: float
    kind: str
    connection: int
    ws: int
    seq: int


class SimulationStalled(RuntimeError):
    pass


_SERVICE, _TIMEOUT, _WAKEUP = 0, 1, 2


@dataclass
class ConnectionStats:
    # measured over (warmup, duration]
    sent: int = 0
    retransmissions: int = 0
    delivered: int = 0
    dropped: int = 0
    timeouts: int = 0
    rtt_sum: float = 0.0
    rtt_count: int = 0
    # whole run, for conservation checks
    transmissions_total: int = 0
    delivered_total: int = 0
    node_drops_total: int = 0
    discards_total: int = 0
    duplicates_total: int = 0
    timeouts_total: int = 0
    in_flight_end: int = 0
    cached_end: int = 0
    highest_delivered: int = 0
    max_timeout_run: int = 0


@dataclass
class NodeStats:
    arrivals: int = 0
    drops: int = 0
    ack_drops: int = 0
    peak_occupancy: int = 0


@dataclass
class RunStats:
    connections: list[ConnectionStats]
    nodes: list[NodeStats]
    interval: float

    def throughputs(self) -> list[float]:
        return [c.delivered / self.interval for c in self.connections]


class Node:
    def __init__(self, index: int, capacity: int):
        self.index = index
        self.capacity = capacity
        self.occupancy = 0
        self.stats = NodeStats()


class Queue:
    __slots__ = ("name", "role", "index", "service", "node", "items", "busy")

    def __init__(self, name: str, role: str, index: int, service: Service,
                 node: Optional[Node]):
        self.name = name
        self.role = role
        self.index = index
        self.service = service
        self.node = node
        self.items: deque[Packet] = deque()
        self.busy = False


class Destination:
    """Receiver with optional out-of-order caching and cumulative acks."""

    def __init__(self, caching: bool, credits: int):
        self.caching = caching
        self.credits = credits
        self.expected = 1
        # seq -> transmission number of the copy that was cached
        self.cache: dict[int, int] = {}

    def receive(self, seq: int,
                transmission: int = 1) -> tuple[Receipt, int, list[tuple[int, int]]]:
        """Return (receipt, cumulative ack number, delivered (seq, tx) pairs)."""
        if seq < self.expected or seq in self.cache:
            return Receipt.DUPLICATE, self.expected - 1, []
        if seq > self.expected:
            if self.caching and len(self.cache) < self.credits:
                self.cache[seq] = transmission
                return Receipt.CACHED, self.expected - 1, []
            return Receipt.DISCARDED, self.expected - 1, []
        delivered = [(seq, transmission)]
        self.expected += 1
        while self.expected in self.cache:
            delivered.append((self.expected, self.cache.pop(self.expected)))
            self.expected += 1
        return Receipt.DELIVERED, self.expected - 1, delivered


class Connection:
    def __init__(self, index: int, credits: int,
                 ctrl: Optional[WindowController]):
        self.index = index
        self.credits = credits
        self.ctrl = ctrl
        self.next_seq = 1
        self.una = 1
        self.first_sent: dict[int, float] = {}
        self.tx_count: dict[int, int] = {}
        self.timer_gen = 0
        self.timer_armed = False
        self.timeout_run = 0
        self.stats = ConnectionStats()

    @property
    def ws(self) -> int:
        return self.ctrl.ws if self.ctrl is not None else self.credits

    @property
    def outstanding(self) -> int:
        return self.next_seq - self.una


def path_service_demands(config: NetworkConfig) -> list[float]:
    """Mean service demand per queue for one connection's cycle.

    Router CPUs see every packet twice (data out, ack back).
    """
    m = config.hops
    s = config.service
    fwd = [s.wan_link.mean if i < m - 1 else s.lan_link.mean for i in range(m)]
    rev = [s.wan_link.mean if i > 0 else s.lan_link.mean for i in range(m)]
    return [s.lan_link.mean] + [2 * s.cpu.mean] * m + fwd + rev


def pipe_size_for(config: NetworkConfig) -> Optional[int]:
    if config.pipe_size_rule is PipeSizeRule.NONE:
        return None
    if config.pipe_size_rule is PipeSizeRule.TERRESTRIAL:
        return terrestrial_pipe_size(config.hops)
    demands = path_service_demands(config)
    best = optimal_population(ClosedNetworkModel(demands), 4 * len(demands))
    return max(1, best // config.sources)


class Network:
    """Mutable simulation state built from a :class:`NetworkConfig`."""

    def __init__(self, config: NetworkConfig,
                 trace: Optional[Callable[[TraceRecord], None]] = None):
        self.config = config
        self.trace = trace
        self.rng = random.Random(config.seed)
        self.clock = 0.0
        self._events: list[tuple] = []
        self._tiebreak = 0

        m, svc = config.hops, config.service
        self.nodes = [Node(i, config.buffer_capacity) for i in range(m)]
        self.cpu = [Queue(f"cpu{i + 1}", "cpu", i, svc.cpu, self.nodes[i])
                    for i in range(m)]
        self.fwd = [Queue(f"fwd{i + 1}", "fwd", i,
                          svc.wan_link if i < m - 1 else svc.lan_link,
                          self.nodes[i]) for i in range(m)]
        self.rev = [Queue(f"rev{i + 1}", "rev", i,
                          svc.wan_link if i > 0 else svc.lan_link,
                          self.nodes[i]) for i in range(m)]
        self.host_tx = [Queue(f"tx{c}", "host", c, svc.lan_link, None)
                        for c in range(config.sources)]
        self.queues = self.host_tx + self.cpu + self.fwd + self.rev
        self._queue_ids = {id(q): k for k, q in enumerate(self.queues)}

        self.timeout = config.timeout_factor * sum(path_service_demands(config))
        self.path = PathInfo(hops=m, credits=config.credits,
                             pipe_size=pipe_size_for(config))
        self.connections = []
        for c in range(config.sources):
            ctrl = (new_controller(config.policy, self.path)
                    if config.window_control_enabled else None)
            self.connections.append(Connection(c, config.credits, ctrl))
        self.destinations = [Destination(config.ooc_caching, config.credits)
                             for _ in range(config.sources)]
        self.faults = {(f.connection, f.seq) for f in config.fault_schedule}

    # -- event list -----------------------------------------------------

    def _schedule(self, time: float, kind: int, target: int, gen: int = 0):
        self._tiebreak += 1
        heapq.heappush(self._events, (time, self._tiebreak, kind, target, gen))

    def _measuring(self) -> bool:
        return self.clock > self.config.warmup

    def _record(self, kind: str, conn: Connection, seq: int) -> None:
        if self.trace is not None:
            self.trace(TraceRecord(self.clock, kind, conn.index, conn.ws, seq))

    # -- queues ---------------------------------------------------------

    def _draw(self, service: Service) -> float:
        if service.distribution is Distribution.EXPONENTIAL:
            return self.rng.expovariate(1.0 / service.mean)
        return service.mean

    def _join(self, queue: Queue, packet: Packet) -> None:
        queue.items.append(packet)
        if not queue.busy:
            queue.busy = True
            self._schedule(self.clock + self._draw(queue.service), _SERVICE,
                           self._queue_ids[id(queue)])

    def router_enqueue(self, node: Node, packet: Packet) -> Verdict:
        """Admit ``packet`` to ``node``'s CPU queue if a buffer is free."""
        measuring = self._measuring()
        if measuring:
            node.stats.arrivals += 1
        forced = (node.index == 0 and packet.kind is PacketKind.DATA
                  and packet.transmission == 1
                  and (packet.connection, packet.number) in self.faults)
        if forced or node.occupancy >= node.capacity:
            if packet.kind is PacketKind.DATA:
                conn = self.connections[packet.connection]
                conn.stats.node_drops_total += 1
                if measuring:
                    node.stats.drops += 1
                    conn.stats.dropped += 1
                self._record("drop", conn, packet.number)
            elif measuring:
                node.stats.ack_drops += 1
            return Verdict.DROPPED
        node.occupancy += 1
        if node.occupancy > node.stats.peak_occupancy and measuring:
            node.stats.peak_occupancy = node.occupancy
        self._join(self.cpu[node.index], packet)
        return Verdict.ACCEPTED

    def _service_complete(self, queue: Queue) -> None:
        packet = queue.items.popleft()
        if queue.items:
            self._schedule(self.clock + self._draw(queue.service), _SERVICE,
                           self._queue_ids[id(queue)])
        else:
            queue.busy = False

        role, i = queue.role, queue.index
        if role == "host":
            self.router_enqueue(self.nodes[0], packet)
        elif role == "cpu":
            nxt = self.fwd[i] if packet.kind is PacketKind.DATA else self.rev[i]
            self._join(nxt, packet)
        elif role == "fwd":
            self.nodes[i].occupancy -= 1
            if i + 1 < len(self.nodes):
                self.router_enqueue(self.nodes[i + 1], packet)
            else:
                ack = self.destination_receive(packet)
                self.router_enqueue(self.nodes[-1], ack)
        else:
            self.nodes[i].occupancy -= 1
            if i > 0:
                self.router_enqueue(self.nodes[i - 1], packet)
            else:
                self.receive_ack(self.connections[packet.connection],
                                 packet.number)

    # -- endpoints ------------------------------------------------------

    def destination_receive(self, packet: Packet) -> Packet:
        """Hand a data packet to its destination; return the ack to send."""
        conn = self.connections[packet.connection]
        dst = self.destinations[packet.connection]
        receipt, ack_no, delivered = dst.receive(packet.number,
                                                 packet.transmission)
        stats = conn.stats
        if receipt is Receipt.DISCARDED:
            stats.discards_total += 1
        elif receipt is Receipt.DUPLICATE:
            stats.duplicates_total += 1
        measuring = self._measuring()
        for seq, transmission in delivered:
            stats.delivered_total += 1
            stats.highest_delivered = seq
            if measuring:
                stats.delivered += 1
            if transmission == 1:
                conn.timeout_run = 0
            self._record("deliver", conn, seq)
        if receipt is not Receipt.DELIVERED:
            self._record(receipt.value, conn, packet.number)
        return Packet(packet.connection, PacketKind.ACK, ack_no, self.clock)

    def _arm_timer(self, conn: Connection) -> None:
        conn.timer_gen += 1
        conn.timer_armed = True
        self._schedule(self.clock + self.timeout, _TIMEOUT, conn.index,
                       conn.timer_gen)

    def _cancel_timer(self, conn: Connection) -> None:
        conn.timer_gen += 1
        conn.timer_armed = False

    def _transmit(self, conn: Connection, seq: int) -> None:
        count = conn.tx_count.get(seq, 0) + 1
        conn.tx_count[seq] = count
        if count == 1:
            conn.first_sent[seq] = self.clock
        stats = conn.stats
        stats.transmissions_total += 1
        if self._measuring():
            stats.sent += 1
            if count > 1:
                stats.retransmissions += 1
        self._record("send" if count == 1 else "retransmit", conn, seq)
        packet = Packet(conn.index, PacketKind.DATA, seq, self.clock, count)
        self._join(self.host_tx[conn.index], packet)
        if not conn.timer_armed:
            self._arm_timer(conn)

    def source_step(self, conn: Connection) -> int:
        """Send new packets while the window allows; return how many."""
        sent = 0
        while conn.outstanding < conn.ws:
            seq = conn.next_seq
            conn.next_seq += 1
            self._transmit(conn, seq)
            sent += 1
        return sent

    def receive_ack(self, conn: Connection, ack_no: int) -> None:
        """Process a cumulative ack arriving back at the source."""
        if ack_no < conn.una:
            return
        # acks covering retransmitted packets are ambiguous and do not
        # count toward window growth
        fresh = 0
        measuring = self._measuring()
        stats = conn.stats
        for seq in range(conn.una, ack_no + 1):
            if conn.tx_count.pop(seq) == 1:
                fresh += 1
            sent_at = conn.first_sent.pop(seq)
            if measuring:
                stats.rtt_sum += self.clock - sent_at
                stats.rtt_count += 1
        conn.una = ack_no + 1
        if conn.ctrl is not None and fresh:
            conn.ctrl.on_ack(fresh)
        self._record("ack", conn, ack_no)
        if conn.outstanding:
            self._arm_timer(conn)
        else:
            self._cancel_timer(conn)
        self.source_step(conn)

    def timeout_fire(self, conn: Connection) -> bool:
        """Collapse the window and resend the oldest unacked packet."""
        if not conn.outstanding:
            self._cancel_timer(conn)
            return False
        if conn.ctrl is not None:
            conn.ctrl.on_timeout()
        stats = conn.stats
        stats.timeouts_total += 1
        if self._measuring():
            stats.timeouts += 1
        conn.timeout_run += 1
        stats.max_timeout_run = max(stats.max_timeout_run, conn.timeout_run)
        self._record("timeout", conn, conn.una)
        conn.timer_armed = False
        self._transmit(conn, conn.una)
        self.source_step(conn)
        return True

    # -- driver ---------------------------------------------------------

    def run(self) -> RunStats:
        duration = self.config.duration
        for conn in self.connections:
            self._schedule(0.0, _WAKEUP, conn.index)
        events = self._events
        while events and events[0][0] <= duration:
            time, _, kind, target, gen = heapq.heappop(events)
            self.clock = time
            if kind == _SERVICE:
                self._service_complete(self.queues[target])
            elif kind == _TIMEOUT:
                conn = self.connections[target]
                if gen == conn.timer_gen:
                    self.timeout_fire(conn)
            else:
                self.source_step(self.connections[target])
        if not events and any(c.outstanding for c in self.connections):
            raise SimulationStalled(
                f"no events left at t={self.clock} with outstanding "
                f"packets {[c.outstanding for c in self.connections]}")
        return self._finish()

    def _finish(self) -> RunStats:
        in_flight = [0] * len(self.connections)
        for queue in self.queues:
            for packet in queue.items:
                if packet.kind is PacketKind.DATA:
                    in_flight[packet.connection] += 1
        for conn, dst, count in zip(self.connections, self.destinations,
                                    in_flight):
            conn.stats.in_flight_end = count
            conn.stats.cached_end = len(dst.cache)
        return RunStats(
            connections=[c.stats for c in self.connections],
            nodes=[n.stats for n in self.nodes],
            interval=self.config.duration - self.config.warmup,
        )


def build_network(config: NetworkConfig,
                  trace: Optional[Callable[[TraceRecord], None]] = None) -> Network:
    return Network(config, trace=trace)


def run(network: Network) -> RunStats:
    return network.run()


def simulate(config: NetworkConfig,
             trace: Optional[Callable[[TraceRecord], None]] = None) -> RunStats:
    return build_network(config, trace).run()
