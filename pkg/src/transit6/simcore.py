"""Deterministic discrete-event simulation of frames crossing a topology.

The engine moves real wire bytes between nodes. Every hop re-parses the
frame, applies the node's forwarding rules (family filter, local delivery,
hop decrement, longest-prefix routing, tunnel entry and exit) and re-emits
exact bytes. Events sit in a heap ordered by (time, seq) where seq is a
monotonically increasing insertion counter, so identical inputs always yield
identical outputs. A packet never aborts the run: whatever happens to it is
recorded as data on its MetricsRecord.

Timing model per hop: a node that forwards a frame spends its
``processing_delay``, then the frame waits for the outgoing link direction to
go idle (FIFO), is serialized for ``bytes * 8 / bandwidth`` seconds and
propagates for the link's ``propagation_delay``. Delivery is recorded at the
moment the last bit arrives; the receiving host adds nothing.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence, Union

from .addressing import Ipv4Prefix, Ipv6Prefix, prefix_matches
from .codec import (
    FrameKind,
    Ipv4Address,
    Ipv4Header,
    Ipv6Address,
    Ipv6Header,
    Packet,
    frame_packet,
    ipv4_header_checksum,
    parse_frame,
)
from .transition import (
    NoEndpointError,
    PathKind,
    TunnelConfig,
    TunnelKind,
    decapsulate_6in4,
    dual_stack_dispatch,
    encapsulate_6in4,
    resolve_tunnel_endpoint,
)


class SimError(ValueError):
    """Base class for simulation setup errors."""


class NoRouteError(SimError):
    """No routing entry matches the destination."""


class InvalidTopologyError(SimError):
    """Topology violates a structural rule."""


class InvalidTrafficError(SimError):
    """Traffic specification violates a structural rule."""


class NodeKind(Enum):
    IPV4_ONLY = "ipv4-only"
    IPV6_ONLY = "ipv6-only"
    DUAL_STACK = "dual-stack"


class Role(Enum):
    HOST = "host"
    ROUTER = "router"


@dataclass
class Interface:
    name: str
    v4: Optional[Ipv4Address] = None
    v6: list[Ipv6Address] = field(default_factory=list)


@dataclass
class RouteEntry4:
    prefix: Ipv4Prefix
    out_if: str
    next_hop: Optional[Ipv4Address] = None


@dataclass
class RouteEntry6:
    prefix: Ipv6Prefix
    out_if: str
    next_hop: Optional[Ipv6Address] = None


@dataclass
class Node:
    """A host or router. Tunnels are keyed by their pseudo-interface name."""

    id: str
    kind: NodeKind
    role: Role
    interfaces: list[Interface] = field(default_factory=list)
    v4_routes: list[RouteEntry4] = field(default_factory=list)
    v6_routes: list[RouteEntry6] = field(default_factory=list)
    tunnels: dict[str, TunnelConfig] = field(default_factory=dict)
    processing_delay: float = 0.0


@dataclass
class Link:
    """Point-to-point link between two (node, interface) ports."""

    id: str
    a: tuple[str, str]
    b: tuple[str, str]
    bandwidth: float = 100e6
    propagation_delay: float = 1e-3
    mtu: int = 1500


@dataclass
class Topology:
    nodes: list[Node] = field(default_factory=list)
    links: list[Link] = field(default_factory=list)


@dataclass
class TrafficSpec:
    """One one-way constant-rate flow of fixed-size packets."""

    flow_id: str
    src: str
    dst: str
    payload_bytes: int = 1000
    count: int = 10
    gap: float = 1e-3
    start: float = 0.0
    family: str = "v6"
    hop_limit: int = 64
    jitter: float = 0.0


@dataclass
class Scenario:
    name: str
    topology: Topology
    traffic: list[TrafficSpec]
    horizon: Optional[float] = None


class DropReason(Enum):
    WRONG_FAMILY = "dropped-wrong-family"
    TTL_EXPIRED = "ttl-expired"
    NO_ROUTE = "no-route"
    MTU_EXCEEDED = "mtu-exceeded"
    NO_ENDPOINT = "no-endpoint"
    HOST_NOT_ROUTER = "host-not-router"
    HORIZON_EXPIRED = "horizon-expired"


@dataclass
class MetricsRecord:
    """Everything the simulator knows about one injected packet."""

    packet_id: int
    flow_id: str
    src_node: str
    dst_node: str
    payload_bytes: int
    send_time: float
    receive_time: Optional[float] = None
    drop_reason: Optional[DropReason] = None
    wire_bytes_per_hop: list[tuple[str, int]] = field(default_factory=list)


RouteEntry = Union[RouteEntry4, RouteEntry6]


def route_lookup(routes: Sequence[RouteEntry], dst: Union[Ipv4Address, Ipv6Address]) -> RouteEntry:
    """Longest-prefix match over ``routes``; first entry wins equal lengths."""
    best: Optional[RouteEntry] = None
    for entry in routes:
        if prefix_matches(entry.prefix, dst):
            if best is None or entry.prefix.length > best.prefix.length:
                best = entry
    if best is None:
        raise NoRouteError(f"no route for {dst}")
    return best


class ForwardAction(Enum):
    DELIVER = "deliver"
    FORWARD = "forward"
    DROP = "drop"


@dataclass
class ForwardResult:
    action: ForwardAction
    out_if: Optional[str] = None
    frame: bytes = b""
    drop_reason: Optional[DropReason] = None
    packet: Optional[Packet] = None


_V6_UNSPECIFIED = Ipv6Address(bytes(16))
_V6_LOOPBACK = Ipv6Address(bytes(15) + b"\x01")


def node_v4_addresses(node: Node) -> set[Ipv4Address]:
    return {i.v4 for i in node.interfaces if i.v4 is not None}


def node_v6_addresses(node: Node) -> set[Ipv6Address]:
    addrs = {a for i in node.interfaces for a in i.v6}
    for cfg in node.tunnels.values():
        if cfg.tunnel_if_addr is not None:
            addrs.add(cfg.tunnel_if_addr)
    return addrs


def _drop(reason: DropReason) -> ForwardResult:
    return ForwardResult(ForwardAction.DROP, drop_reason=reason)


def forward(node: Node, frame: bytes, in_if: Optional[str], now: float) -> ForwardResult:
    """Decide what ``node`` does with ``frame``.

    ``in_if`` is the interface the frame arrived on, or None for a frame the
    node originates itself. Arriving frames spend one hop (ttl or hop_limit
    decrement) unless they are delivered locally; originated frames do not.
    A frame leaving through a tunnel is decremented as usual, encapsulated
    with the outer ttl copied from the inner hop_limit, and then routed as a
    locally originated IPv4 frame, so intermediate IPv4 hops only ever touch
    the outer header. The reverse happens on decapsulation, which re-enters
    forwarding as an arriving IPv6 frame and is decremented there once.
    """
    path = dual_stack_dispatch(frame)
    if path is PathKind.V4_PATH and node.kind is NodeKind.IPV6_ONLY:
        return _drop(DropReason.WRONG_FAMILY)
    if path is PathKind.V6_PATH and node.kind is NodeKind.IPV4_ONLY:
        return _drop(DropReason.WRONG_FAMILY)

    p = parse_frame(frame)

    if p.frame_kind is FrameKind.V6_IN_V4 and p.outer_v4.dst in node_v4_addresses(node):
        inner = decapsulate_6in4(p)
        return forward(node, frame_packet(inner), in_if, now)
    if p.frame_kind is FrameKind.V4 and p.outer_v4.dst in node_v4_addresses(node):
        return ForwardResult(ForwardAction.DELIVER, packet=p)
    if p.frame_kind is FrameKind.V6 and p.v6.dst in node_v6_addresses(node):
        return ForwardResult(ForwardAction.DELIVER, packet=p)

    if node.role is Role.HOST and in_if is not None:
        # Hosts never forward traffic that is not addressed to them, but a
        # host does route the packets it originates itself.
        return _drop(DropReason.HOST_NOT_ROUTER)

    if in_if is not None:
        if p.frame_kind is FrameKind.V6:
            if p.v6.hop_limit <= 1:
                return _drop(DropReason.TTL_EXPIRED)
            p = replace(p, v6=replace(p.v6, hop_limit=p.v6.hop_limit - 1))
        else:
            if p.outer_v4.ttl <= 1:
                return _drop(DropReason.TTL_EXPIRED)
            h = replace(p.outer_v4, ttl=p.outer_v4.ttl - 1)
            h = replace(h, checksum=ipv4_header_checksum(h))
            p = replace(p, outer_v4=h)

    if p.frame_kind is FrameKind.V6:
        dst: Union[Ipv4Address, Ipv6Address] = p.v6.dst
        routes: Sequence[RouteEntry] = node.v6_routes
    else:
        dst = p.outer_v4.dst
        routes = node.v4_routes
    try:
        entry = route_lookup(routes, dst)
    except NoRouteError:
        return _drop(DropReason.NO_ROUTE)

    if entry.out_if in node.tunnels:
        # Topology validation guarantees only v6 routes reference tunnels.
        cfg = node.tunnels[entry.out_if]
        if cfg.kind is TunnelKind.AUTOMATIC_COMPATIBLE and dst in (_V6_UNSPECIFIED, _V6_LOOPBACK):
            return _drop(DropReason.NO_ENDPOINT)
        try:
            remote = resolve_tunnel_endpoint(cfg, dst)
        except NoEndpointError:
            return _drop(DropReason.NO_ENDPOINT)
        encapsulated = encapsulate_6in4(p, cfg.local_v4, remote, ttl=p.v6.hop_limit)
        return forward(node, frame_packet(encapsulated), None, now)

    return ForwardResult(ForwardAction.FORWARD, out_if=entry.out_if, frame=frame_packet(p))


def validate_topology(topology: Topology) -> None:
    """Raise InvalidTopologyError on the first structural rule violation."""
    seen_nodes: set[str] = set()
    for node in topology.nodes:
        if node.id in seen_nodes:
            raise InvalidTopologyError(f"duplicate node id {node.id!r}")
        seen_nodes.add(node.id)
        if node.processing_delay < 0:
            raise InvalidTopologyError(f"{node.id}: negative processing_delay")
        if_names: set[str] = set()
        for iface in node.interfaces:
            if iface.name in if_names:
                raise InvalidTopologyError(f"{node.id}: duplicate interface {iface.name!r}")
            if_names.add(iface.name)
            if node.kind is NodeKind.IPV4_ONLY and iface.v6:
                raise InvalidTopologyError(f"{node.id}: IPv4-only node holds IPv6 addresses")
            if node.kind is NodeKind.IPV6_ONLY and iface.v4 is not None:
                raise InvalidTopologyError(f"{node.id}: IPv6-only node holds an IPv4 address")
        if node.tunnels:
            if node.kind is not NodeKind.DUAL_STACK:
                raise InvalidTopologyError(f"{node.id}: tunnels require a dual-stack node")
            for name, cfg in node.tunnels.items():
                if name in if_names:
                    raise InvalidTopologyError(
                        f"{node.id}: tunnel {name!r} clashes with an interface name"
                    )
                if cfg.local_v4 not in node_v4_addresses(node):
                    raise InvalidTopologyError(
                        f"{node.id}: tunnel {name!r} local endpoint {cfg.local_v4} "
                        "is not one of the node's interface addresses"
                    )
        if node.kind is NodeKind.IPV4_ONLY and node.v6_routes:
            raise InvalidTopologyError(f"{node.id}: IPv4-only node holds IPv6 routes")
        if node.kind is NodeKind.IPV6_ONLY and node.v4_routes:
            raise InvalidTopologyError(f"{node.id}: IPv6-only node holds IPv4 routes")
        for entry in node.v4_routes:
            if entry.out_if not in if_names:
                raise InvalidTopologyError(
                    f"{node.id}: IPv4 route {entry.prefix} leaves through "
                    f"unknown interface {entry.out_if!r}"
                )
        for entry in node.v6_routes:
            if entry.out_if not in if_names and entry.out_if not in node.tunnels:
                raise InvalidTopologyError(
                    f"{node.id}: IPv6 route {entry.prefix} leaves through "
                    f"unknown interface {entry.out_if!r}"
                )

    nodes_by_id = {n.id: n for n in topology.nodes}
    used_ports: set[tuple[str, str]] = set()
    link_ids: set[str] = set()
    for link in topology.links:
        if link.id in link_ids:
            raise InvalidTopologyError(f"duplicate link id {link.id!r}")
        link_ids.add(link.id)
        if link.bandwidth <= 0:
            raise InvalidTopologyError(f"link {link.id}: bandwidth must be positive")
        if link.propagation_delay < 0:
            raise InvalidTopologyError(f"link {link.id}: negative propagation delay")
        if link.mtu < 60:
            raise InvalidTopologyError(f"link {link.id}: mtu below 60 bytes")
        if link.a == link.b:
            raise InvalidTopologyError(f"link {link.id}: both ends are the same port")
        for node_id, if_name in (link.a, link.b):
            node = nodes_by_id.get(node_id)
            if node is None or if_name not in {i.name for i in node.interfaces}:
                raise InvalidTopologyError(
                    f"link {link.id}: no such port {node_id}:{if_name}"
                )
            if (node_id, if_name) in used_ports:
                raise InvalidTopologyError(
                    f"link {link.id}: port {node_id}:{if_name} already linked"
                )
            used_ports.add((node_id, if_name))

    for node in topology.nodes:
        for iface in node.interfaces:
            if (node.id, iface.name) not in used_ports:
                raise InvalidTopologyError(
                    f"{node.id}: interface {iface.name!r} is not attached to any link"
                )


def _primary_address(node: Node, family: str) -> Union[Ipv4Address, Ipv6Address]:
    for iface in node.interfaces:
        if family == "v4" and iface.v4 is not None:
            return iface.v4
        if family == "v6" and iface.v6:
            return iface.v6[0]
    raise InvalidTrafficError(f"{node.id} has no {family} address")


def validate_traffic(topology: Topology, traffic: Sequence[TrafficSpec]) -> None:
    """Raise InvalidTrafficError on the first flow rule violation."""
    nodes_by_id = {n.id: n for n in topology.nodes}
    seen: set[str] = set()
    for flow in traffic:
        if flow.flow_id in seen:
            raise InvalidTrafficError(f"duplicate flow id {flow.flow_id!r}")
        seen.add(flow.flow_id)
        if flow.family not in ("v4", "v6"):
            raise InvalidTrafficError(f"{flow.flow_id}: family must be v4 or v6")
        for end in (flow.src, flow.dst):
            if end not in nodes_by_id:
                raise InvalidTrafficError(f"{flow.flow_id}: unknown node {end!r}")
            _primary_address(nodes_by_id[end], flow.family)
        if flow.payload_bytes < 0:
            raise InvalidTrafficError(f"{flow.flow_id}: negative payload_bytes")
        # Leave room for one level of 6in4 encapsulation in the outer
        # 16-bit total_length field.
        if flow.payload_bytes > 65475:
            raise InvalidTrafficError(f"{flow.flow_id}: payload_bytes over 65475")
        if flow.count < 1:
            raise InvalidTrafficError(f"{flow.flow_id}: count must be at least 1")
        if flow.gap < 0 or flow.start < 0:
            raise InvalidTrafficError(f"{flow.flow_id}: negative start or gap")
        if not 1 <= flow.hop_limit <= 255:
            raise InvalidTrafficError(f"{flow.flow_id}: hop_limit outside 1..255")
        if not 0 <= flow.jitter < 1:
            raise InvalidTrafficError(f"{flow.flow_id}: jitter must be in [0, 1)")


class _Action(Enum):
    TRAFFIC_SEND = "traffic-send"
    PROCESSING_DONE = "processing-done"
    TRANSMIT = "transmit"
    ARRIVE = "arrive"


@dataclass
class SimEvent:
    time: float
    seq: int
    action: _Action
    node_id: str = ""
    port: str = ""
    frame: bytes = b""
    packet_id: int = -1
    flow_index: int = -1
    flow_seq: int = -1


class _Engine:
    def __init__(
        self,
        topology: Topology,
        traffic: Sequence[TrafficSpec],
        seed: int,
        trace: Optional[list[str]],
    ) -> None:
        self.nodes = {n.id: n for n in topology.nodes}
        self.traffic = list(traffic)
        self.trace = trace
        self.rng = random.Random(seed)
        self.port_map: dict[tuple[str, str], tuple[Link, str, str]] = {}
        for link in topology.links:
            self.port_map[link.a] = (link, link.b[0], link.b[1])
            self.port_map[link.b] = (link, link.a[0], link.a[1])
        self.heap: list[tuple[float, int, SimEvent]] = []
        self.seq = 0
        self.next_packet_id = 0
        self.records: dict[int, MetricsRecord] = {}
        self.link_free: dict[tuple[str, str], float] = {}

    def schedule(self, ev: SimEvent) -> None:
        heapq.heappush(self.heap, (ev.time, ev.seq, ev))

    def new_event(self, time: float, action: _Action, **kw) -> SimEvent:
        ev = SimEvent(time=time, seq=self.seq, action=action, **kw)
        self.seq += 1
        return ev

    def prime(self) -> None:
        for fi, flow in enumerate(self.traffic):
            for i in range(flow.count):
                t = flow.start + i * flow.gap
                if flow.jitter > 0:
                    t += self.rng.uniform(0.0, flow.jitter * flow.gap)
                self.schedule(
                    self.new_event(t, _Action.TRAFFIC_SEND, flow_index=fi, flow_seq=i)
                )

    def _flow_frame(self, flow: TrafficSpec) -> bytes:
        payload = bytes(flow.payload_bytes)
        src_node = self.nodes[flow.src]
        dst_node = self.nodes[flow.dst]
        if flow.family == "v6":
            h6 = Ipv6Header(
                src=_primary_address(src_node, "v6"),
                dst=_primary_address(dst_node, "v6"),
                payload_length=len(payload),
                next_header=58,
                hop_limit=flow.hop_limit,
            )
            return frame_packet(Packet(FrameKind.V6, payload=payload, v6=h6))
        h4 = Ipv4Header(
            src=_primary_address(src_node, "v4"),
            dst=_primary_address(dst_node, "v4"),
            total_length=20 + len(payload),
            ttl=flow.hop_limit,
            protocol=1,
        )
        h4 = replace(h4, checksum=ipv4_header_checksum(h4))
        return frame_packet(Packet(FrameKind.V4, payload=payload, outer_v4=h4))

    def apply_forward(self, node: Node, res: ForwardResult, packet_id: int, now: float) -> None:
        rec = self.records[packet_id]
        if res.action is ForwardAction.DELIVER:
            rec.receive_time = now
        elif res.action is ForwardAction.DROP:
            rec.drop_reason = res.drop_reason
        else:
            self.schedule(
                self.new_event(
                    now + node.processing_delay,
                    _Action.PROCESSING_DONE,
                    node_id=node.id,
                    port=res.out_if or "",
                    frame=res.frame,
                    packet_id=packet_id,
                )
            )

    def on_traffic_send(self, ev: SimEvent) -> None:
        flow = self.traffic[ev.flow_index]
        packet_id = self.next_packet_id
        self.next_packet_id += 1
        self.records[packet_id] = MetricsRecord(
            packet_id=packet_id,
            flow_id=flow.flow_id,
            src_node=flow.src,
            dst_node=flow.dst,
            payload_bytes=flow.payload_bytes,
            send_time=ev.time,
        )
        node = self.nodes[flow.src]
        res = forward(node, self._flow_frame(flow), None, ev.time)
        self.apply_forward(node, res, packet_id, ev.time)

    def on_processing_done(self, ev: SimEvent) -> None:
        link, _, _ = self.port_map[(ev.node_id, ev.port)]
        if len(ev.frame) > link.mtu:
            self.records[ev.packet_id].drop_reason = DropReason.MTU_EXCEEDED
            return
        key = (link.id, ev.node_id)
        start = max(ev.time, self.link_free.get(key, 0.0))
        self.link_free[key] = start + len(ev.frame) * 8 / link.bandwidth
        self.schedule(
            self.new_event(
                start,
                _Action.TRANSMIT,
                node_id=ev.node_id,
                port=ev.port,
                frame=ev.frame,
                packet_id=ev.packet_id,
            )
        )

    def on_transmit(self, ev: SimEvent) -> None:
        link, peer_id, peer_if = self.port_map[(ev.node_id, ev.port)]
        self.records[ev.packet_id].wire_bytes_per_hop.append((link.id, len(ev.frame)))
        if self.trace is not None:
            self.trace.append(
                f"{ev.time!r} {link.id} {ev.node_id}->{peer_id} pkt={ev.packet_id} {ev.frame.hex()}"
            )
        arrival = ev.time + len(ev.frame) * 8 / link.bandwidth + link.propagation_delay
        self.schedule(
            self.new_event(
                arrival,
                _Action.ARRIVE,
                node_id=peer_id,
                port=peer_if,
                frame=ev.frame,
                packet_id=ev.packet_id,
            )
        )

    def on_arrive(self, ev: SimEvent) -> None:
        node = self.nodes[ev.node_id]
        res = forward(node, ev.frame, ev.port, ev.time)
        self.apply_forward(node, res, ev.packet_id, ev.time)

    def run(self, horizon: Optional[float]) -> list[MetricsRecord]:
        self.prime()
        handlers = {
            _Action.TRAFFIC_SEND: self.on_traffic_send,
            _Action.PROCESSING_DONE: self.on_processing_done,
            _Action.TRANSMIT: self.on_transmit,
            _Action.ARRIVE: self.on_arrive,
        }
        while self.heap:
            if horizon is not None and self.heap[0][0] > horizon:
                break
            _, _, ev = heapq.heappop(self.heap)
            handlers[ev.action](ev)
        # A horizon can stop the run with frames mid-flight; close their
        # records so every injected packet terminates exactly once.
        for rec in self.records.values():
            if rec.receive_time is None and rec.drop_reason is None:
                rec.drop_reason = DropReason.HORIZON_EXPIRED
        return list(self.records.values())


def run_simulation(
    topology: Topology,
    traffic: Sequence[TrafficSpec],
    horizon: Optional[float] = None,
    *,
    seed: int = 0,
    trace: Optional[list[str]] = None,
) -> list[MetricsRecord]:
    """Validate, then run to quiescence (or ``horizon``) and return records.

    ``seed`` only matters for flows with a nonzero ``jitter``; without jitter
    the schedule is fully determined by the flow specs. ``trace``, if given,
    receives one line of hex per frame transmission.
    """
    validate_topology(topology)
    validate_traffic(topology, traffic)
    if horizon is not None and horizon < 0:
        raise InvalidTrafficError("horizon must not be negative")
    engine = _Engine(topology, traffic, seed, trace)
    return engine.run(horizon)
