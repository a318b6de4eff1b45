import random
from dataclasses import replace

import pytest

from transit6.addressing import Ipv4Prefix, Ipv6Prefix
from transit6.codec import (
    FrameKind,
    Ipv4Address,
    Ipv4Header,
    Ipv6Address,
    Ipv6Header,
    Packet,
    frame_packet,
    ipv4_header_checksum,
    parse_frame,
    verify_ipv4_checksum,
)
from transit6.simcore import (
    DropReason,
    ForwardAction,
    Interface,
    InvalidTopologyError,
    InvalidTrafficError,
    Link,
    Node,
    NodeKind,
    NoRouteError,
    Role,
    RouteEntry4,
    RouteEntry6,
    Topology,
    TrafficSpec,
    forward,
    route_lookup,
    run_simulation,
    validate_topology,
    validate_traffic,
)
from transit6.transition import TunnelConfig, TunnelKind

A4 = Ipv4Address.parse
A6 = Ipv6Address.parse
P4 = Ipv4Prefix.parse
P6 = Ipv6Prefix.parse


# ---------------------------------------------------------------- route_lookup


def oracle_lookup(routes, dst):
    # Brute force: compare bit strings, keep the longest match, first wins.
    width = 32 if isinstance(dst, Ipv4Address) else 128
    dst_bits = format(dst.to_int(), f"0{width}b")
    best = None
    for entry in routes:
        bits = format(entry.prefix.address.to_int(), f"0{width}b")
        if dst_bits[: entry.prefix.length] == bits[: entry.prefix.length]:
            if best is None or entry.prefix.length > best.prefix.length:
                best = entry
    return best


def _random_route_table(rng: random.Random, v6: bool):
    if v6:
        width, addr_cls, pfx_cls, entry_cls = 128, Ipv6Address, Ipv6Prefix, RouteEntry6
    else:
        width, addr_cls, pfx_cls, entry_cls = 32, Ipv4Address, Ipv4Prefix, RouteEntry4
    table = []
    for i in range(rng.randrange(1, 11)):
        length = rng.choice([0, 8, 16, 24, 32, 48, 64, 128] if v6 else [0, 8, 16, 24, 32])
        value = int.from_bytes(rng.randbytes(width // 8), "big")
        if length < width:
            value &= ~((1 << (width - length)) - 1)
        prefix = pfx_cls(addr_cls(value.to_bytes(width // 8, "big")), length)
        table.append(entry_cls(prefix, out_if=f"if{i}"))
    return table, width, addr_cls


def test_route_lookup_matches_oracle_10000_lookups():
    rng = random.Random(80)
    lookups = 0
    while lookups < 10_000:
        v6 = rng.random() < 0.5
        table, width, addr_cls = _random_route_table(rng, v6)
        for _ in range(20):
            if rng.random() < 0.5:
                base = rng.choice(table).prefix
                host = (
                    rng.getrandbits(width - base.length) if base.length < width else 0
                )
                dst = addr_cls((base.address.to_int() | host).to_bytes(width // 8, "big"))
            else:
                dst = addr_cls(rng.randbytes(width // 8))
            expected = oracle_lookup(table, dst)
            if expected is None:
                with pytest.raises(NoRouteError):
                    route_lookup(table, dst)
            else:
                assert route_lookup(table, dst) is expected
            lookups += 1
    assert lookups >= 10_000


def test_route_lookup_prefers_longest():
    table = [
        RouteEntry6(P6("::/0"), "default"),
        RouteEntry6(P6("2001::/16"), "mid"),
        RouteEntry6(P6("2001:db8::/32"), "long"),
    ]
    assert route_lookup(table, A6("2001:db8::1")).out_if == "long"
    assert route_lookup(table, A6("2001:1::1")).out_if == "mid"
    assert route_lookup(table, A6("9999::1")).out_if == "default"


def test_route_lookup_first_wins_on_equal_length():
    first = RouteEntry6(P6("2001::/16"), "first")
    second = RouteEntry6(P6("2001::/16"), "second")
    assert route_lookup([first, second], A6("2001::9")) is first
    assert route_lookup([second, first], A6("2001::9")) is second


def test_route_lookup_empty_table():
    with pytest.raises(NoRouteError):
        route_lookup([], A6("::1"))


# ------------------------------------------------------------------ forward()


def _v6_frame(src, dst, hop_limit=64, payload=8):
    h = Ipv6Header(src=A6(src), dst=A6(dst), payload_length=payload, next_header=58,
                   hop_limit=hop_limit)
    return frame_packet(Packet(FrameKind.V6, payload=bytes(payload), v6=h))


def _v4_frame(src, dst, ttl=64, payload=8, protocol=1):
    h = Ipv4Header(src=A4(src), dst=A4(dst), total_length=20 + payload, ttl=ttl,
                   protocol=protocol)
    h = replace(h, checksum=ipv4_header_checksum(h))
    return frame_packet(Packet(FrameKind.V4, payload=bytes(payload), outer_v4=h))


def _dual_router(tunnels=None, v6_routes=None, v4_routes=None):
    return Node(
        id="R",
        kind=NodeKind.DUAL_STACK,
        role=Role.ROUTER,
        interfaces=[
            Interface("eth0", v4=A4("10.0.0.1"), v6=[A6("2001:a::1")]),
            Interface("eth1", v4=A4("10.0.1.1"), v6=[A6("2001:b::1")]),
        ],
        v4_routes=v4_routes or [RouteEntry4(P4("0.0.0.0/0"), "eth1")],
        v6_routes=v6_routes or [RouteEntry6(P6("::/0"), "eth1")],
        tunnels=tunnels or {},
    )


def test_forward_drops_wrong_family():
    v4only = Node("n", NodeKind.IPV4_ONLY, Role.ROUTER,
                  interfaces=[Interface("eth0", v4=A4("10.0.0.1"))],
                  v4_routes=[RouteEntry4(P4("0.0.0.0/0"), "eth0")])
    res = forward(v4only, _v6_frame("2001::1", "2001::2"), "eth0", 0.0)
    assert (res.action, res.drop_reason) == (ForwardAction.DROP, DropReason.WRONG_FAMILY)

    v6only = Node("n", NodeKind.IPV6_ONLY, Role.ROUTER,
                  interfaces=[Interface("eth0", v6=[A6("2001::1")])],
                  v6_routes=[RouteEntry6(P6("::/0"), "eth0")])
    res = forward(v6only, _v4_frame("10.0.0.1", "10.0.0.2"), "eth0", 0.0)
    assert (res.action, res.drop_reason) == (ForwardAction.DROP, DropReason.WRONG_FAMILY)
    # An encapsulated frame is an IPv4 frame on the wire.
    inner = _v6_frame("2001::1", "2001::2")
    outer = Ipv4Header(src=A4("10.0.0.1"), dst=A4("10.0.0.2"), total_length=20 + len(inner),
                       protocol=41)
    outer = replace(outer, total_length=60 + 8)
    outer = replace(outer, checksum=ipv4_header_checksum(outer))
    res = forward(v6only, frame_packet(
        Packet(FrameKind.V6_IN_V4, payload=bytes(8),
               outer_v4=outer, v6=parse_frame(inner).v6)), "eth0", 0.0)
    assert (res.action, res.drop_reason) == (ForwardAction.DROP, DropReason.WRONG_FAMILY)


def test_forward_local_delivery_v6():
    host = Node("h", NodeKind.IPV6_ONLY, Role.HOST,
                interfaces=[Interface("eth0", v6=[A6("2001::2")])],
                v6_routes=[RouteEntry6(P6("::/0"), "eth0")])
    # hop_limit 1 still delivers: local delivery happens before the decrement.
    res = forward(host, _v6_frame("2001::1", "2001::2", hop_limit=1), "eth0", 0.0)
    assert res.action is ForwardAction.DELIVER
    assert res.packet.v6.hop_limit == 1


def test_forward_local_delivery_v4():
    host = Node("h", NodeKind.IPV4_ONLY, Role.HOST,
                interfaces=[Interface("eth0", v4=A4("10.0.0.2"))],
                v4_routes=[RouteEntry4(P4("0.0.0.0/0"), "eth0")])
    res = forward(host, _v4_frame("10.0.0.1", "10.0.0.2", ttl=1), "eth0", 0.0)
    assert res.action is ForwardAction.DELIVER


def test_forward_local_delivery_on_tunnel_address():
    cfg = TunnelConfig(TunnelKind.CONFIGURED, A4("10.0.0.1"), remote_v4=A4("10.0.1.2"),
                       tunnel_if_addr=A6("2001:7::7"))
    node = _dual_router(tunnels={"tun0": cfg})
    res = forward(node, _v6_frame("2001::1", "2001:7::7"), "eth0", 0.0)
    assert res.action is ForwardAction.DELIVER


def test_forward_host_does_not_route_others_traffic():
    host = Node("h", NodeKind.IPV6_ONLY, Role.HOST,
                interfaces=[Interface("eth0", v6=[A6("2001::2")])],
                v6_routes=[RouteEntry6(P6("::/0"), "eth0")])
    res = forward(host, _v6_frame("2001::1", "2001::9"), "eth0", 0.0)
    assert (res.action, res.drop_reason) == (ForwardAction.DROP, DropReason.HOST_NOT_ROUTER)


def test_forward_host_routes_its_own_packets():
    host = Node("h", NodeKind.IPV6_ONLY, Role.HOST,
                interfaces=[Interface("eth0", v6=[A6("2001::2")])],
                v6_routes=[RouteEntry6(P6("::/0"), "eth0")])
    res = forward(host, _v6_frame("2001::2", "2001::9", hop_limit=64), None, 0.0)
    assert (res.action, res.out_if) == (ForwardAction.FORWARD, "eth0")
    # Origination spends no hop.
    assert parse_frame(res.frame).v6.hop_limit == 64


def test_forward_router_decrements_hop_limit():
    node = _dual_router()
    res = forward(node, _v6_frame("2001::1", "2001:ff::9", hop_limit=5), "eth0", 0.0)
    assert (res.action, res.out_if) == (ForwardAction.FORWARD, "eth1")
    assert parse_frame(res.frame).v6.hop_limit == 4


def test_forward_router_expires_hop_limit():
    node = _dual_router()
    res = forward(node, _v6_frame("2001::1", "2001:ff::9", hop_limit=1), "eth0", 0.0)
    assert (res.action, res.drop_reason) == (ForwardAction.DROP, DropReason.TTL_EXPIRED)


def test_forward_router_decrements_ttl_and_recomputes_checksum():
    node = _dual_router()
    res = forward(node, _v4_frame("10.0.0.9", "10.9.0.9", ttl=5), "eth0", 0.0)
    assert res.action is ForwardAction.FORWARD
    out = parse_frame(res.frame)
    assert out.outer_v4.ttl == 4
    assert verify_ipv4_checksum(res.frame[:20])

    res = forward(node, _v4_frame("10.0.0.9", "10.9.0.9", ttl=1), "eth0", 0.0)
    assert (res.action, res.drop_reason) == (ForwardAction.DROP, DropReason.TTL_EXPIRED)


def test_forward_no_route():
    node = _dual_router(v6_routes=[RouteEntry6(P6("2001:a::/32"), "eth0")])
    res = forward(node, _v6_frame("2001:a::9", "2001:ff::9"), "eth0", 0.0)
    assert (res.action, res.drop_reason) == (ForwardAction.DROP, DropReason.NO_ROUTE)


def test_forward_tunnel_entry_configured():
    cfg = TunnelConfig(TunnelKind.CONFIGURED, A4("10.0.0.1"), remote_v4=A4("10.9.9.9"))
    node = _dual_router(
        tunnels={"tun0": cfg},
        v6_routes=[RouteEntry6(P6("2001:ff::/32"), "tun0")],
        v4_routes=[RouteEntry4(P4("0.0.0.0/0"), "eth1")],
    )
    res = forward(node, _v6_frame("2001:a::9", "2001:ff::9", hop_limit=64), "eth0", 0.0)
    assert (res.action, res.out_if) == (ForwardAction.FORWARD, "eth1")
    out = parse_frame(res.frame)
    assert out.frame_kind is FrameKind.V6_IN_V4
    assert out.outer_v4.src == A4("10.0.0.1")
    assert out.outer_v4.dst == A4("10.9.9.9")
    # Inner header spent its hop at this router; outer ttl starts from it.
    assert out.v6.hop_limit == 63
    assert out.outer_v4.ttl == 63
    assert len(res.frame) == len(_v6_frame("2001:a::9", "2001:ff::9")) + 20


def test_forward_tunnel_entry_6to4_derives_endpoint():
    cfg = TunnelConfig(TunnelKind.AUTO_6TO4, A4("10.0.0.1"))
    node = _dual_router(
        tunnels={"tun0": cfg},
        v6_routes=[RouteEntry6(P6("2002::/16"), "tun0")],
    )
    res = forward(node, _v6_frame("2002:a00:1::9", "2002:a0a:1703::9"), "eth0", 0.0)
    assert res.action is ForwardAction.FORWARD
    assert parse_frame(res.frame).outer_v4.dst == A4("10.10.23.3")


def test_forward_tunnel_entry_compatible_guards():
    cfg = TunnelConfig(TunnelKind.AUTOMATIC_COMPATIBLE, A4("10.0.0.1"))
    node = _dual_router(
        tunnels={"tun0": cfg},
        v6_routes=[RouteEntry6(P6("::/0"), "tun0")],
    )
    res = forward(node, _v6_frame("::a00:1", "::a0a:1703"), "eth0", 0.0)
    assert res.action is ForwardAction.FORWARD
    assert parse_frame(res.frame).outer_v4.dst == A4("10.10.23.3")
    for dst in ("::", "::1"):
        res = forward(node, _v6_frame("::a00:1", dst), "eth0", 0.0)
        assert (res.action, res.drop_reason) == (ForwardAction.DROP, DropReason.NO_ENDPOINT)


def test_forward_tunnel_no_endpoint():
    cfg = TunnelConfig(TunnelKind.AUTO_6TO4, A4("10.0.0.1"))
    node = _dual_router(
        tunnels={"tun0": cfg},
        v6_routes=[RouteEntry6(P6("::/0"), "tun0")],
    )
    res = forward(node, _v6_frame("2002:a00:1::9", "2001::9"), "eth0", 0.0)
    assert (res.action, res.drop_reason) == (ForwardAction.DROP, DropReason.NO_ENDPOINT)


def test_forward_decapsulates_at_endpoint_and_keeps_forwarding():
    node = _dual_router(v6_routes=[RouteEntry6(P6("2001:ff::/32"), "eth1")])
    inner = Packet(FrameKind.V6, payload=bytes(8),
                   v6=Ipv6Header(src=A6("2001:a::9"), dst=A6("2001:ff::9"),
                                 payload_length=8, next_header=58, hop_limit=63))
    from transit6.transition import encapsulate_6in4

    tunneled = encapsulate_6in4(inner, A4("10.9.9.9"), A4("10.0.0.1"), ttl=60)
    res = forward(node, frame_packet(tunneled), "eth0", 0.0)
    assert (res.action, res.out_if) == (ForwardAction.FORWARD, "eth1")
    out = parse_frame(res.frame)
    assert out.frame_kind is FrameKind.V6
    # One hop spent at the decapsulating router, outer header gone.
    assert out.v6.hop_limit == 62


def test_forward_decapsulates_then_delivers_locally():
    node = _dual_router()
    inner = Packet(FrameKind.V6, payload=bytes(8),
                   v6=Ipv6Header(src=A6("2001:a::9"), dst=A6("2001:b::1"),
                                 payload_length=8, next_header=58, hop_limit=7))
    from transit6.transition import encapsulate_6in4

    tunneled = encapsulate_6in4(inner, A4("10.9.9.9"), A4("10.0.0.1"), ttl=9)
    res = forward(node, frame_packet(tunneled), "eth0", 0.0)
    assert res.action is ForwardAction.DELIVER
    assert res.packet.v6.hop_limit == 7


# ------------------------------------------------------------------- engine


def _two_hosts(bandwidth=100e6, prop=1e-3, mtu=1500):
    h1 = Node("h1", NodeKind.IPV6_ONLY, Role.HOST,
              interfaces=[Interface("eth0", v6=[A6("2001::1")])],
              v6_routes=[RouteEntry6(P6("::/0"), "eth0")])
    h2 = Node("h2", NodeKind.IPV6_ONLY, Role.HOST,
              interfaces=[Interface("eth0", v6=[A6("2001::2")])],
              v6_routes=[RouteEntry6(P6("::/0"), "eth0")])
    link = Link("l0", ("h1", "eth0"), ("h2", "eth0"),
                bandwidth=bandwidth, propagation_delay=prop, mtu=mtu)
    return Topology(nodes=[h1, h2], links=[link])


def test_single_link_delay_closed_form():
    topo = _two_hosts()
    flow = TrafficSpec("f", "h1", "h2", payload_bytes=1000, count=3, gap=1e-3)
    records = run_simulation(topo, [flow])
    assert len(records) == 3
    for i, rec in enumerate(sorted(records, key=lambda r: r.send_time)):
        send = i * 1e-3
        # Same float operations the engine performs, in the same order.
        expected_arrival = (send + 1040 * 8 / 100e6) + 1e-3
        assert rec.send_time == send
        assert rec.receive_time == expected_arrival
        assert rec.drop_reason is None
        assert rec.wire_bytes_per_hop == [("l0", 1040)]


def test_fifo_queueing_when_sends_collide():
    topo = _two_hosts()
    flow = TrafficSpec("f", "h1", "h2", payload_bytes=1000, count=3, gap=0.0)
    records = sorted(run_simulation(topo, [flow]), key=lambda r: r.packet_id)
    ser = 1040 * 8 / 100e6
    start = 0.0
    for rec in records:
        assert rec.send_time == 0.0
        assert rec.receive_time == (start + ser) + 1e-3
        start = start + ser


def test_mtu_drop_at_first_link():
    topo = _two_hosts(mtu=1024)
    flow = TrafficSpec("f", "h1", "h2", payload_bytes=1000, count=2)
    records = run_simulation(topo, [flow])
    for rec in records:
        assert rec.drop_reason is DropReason.MTU_EXCEEDED
        assert rec.receive_time is None
        assert rec.wire_bytes_per_hop == []


def _chain_topology():
    h1 = Node("h1", NodeKind.IPV6_ONLY, Role.HOST,
              interfaces=[Interface("eth0", v6=[A6("2001:a::1")])],
              v6_routes=[RouteEntry6(P6("::/0"), "eth0")])
    r1 = Node("r1", NodeKind.IPV6_ONLY, Role.ROUTER,
              interfaces=[Interface("eth0", v6=[A6("2001:a::2")]),
                          Interface("eth1", v6=[A6("2001:b::1")])],
              v6_routes=[RouteEntry6(P6("2001:c::/48"), "eth1"),
                         RouteEntry6(P6("2001:a::/48"), "eth0")])
    r2 = Node("r2", NodeKind.IPV6_ONLY, Role.ROUTER,
              interfaces=[Interface("eth0", v6=[A6("2001:b::2")]),
                          Interface("eth1", v6=[A6("2001:c::1")])],
              v6_routes=[RouteEntry6(P6("2001:c::/48"), "eth1"),
                         RouteEntry6(P6("2001:a::/48"), "eth0")])
    h2 = Node("h2", NodeKind.IPV6_ONLY, Role.HOST,
              interfaces=[Interface("eth0", v6=[A6("2001:c::2")])],
              v6_routes=[RouteEntry6(P6("::/0"), "eth0")])
    links = [
        Link("l0", ("h1", "eth0"), ("r1", "eth0")),
        Link("l1", ("r1", "eth1"), ("r2", "eth0")),
        Link("l2", ("r2", "eth1"), ("h2", "eth0")),
    ]
    return Topology(nodes=[h1, r1, r2, h2], links=links)


def test_hop_limit_budget_over_chain():
    topo = _chain_topology()
    short = TrafficSpec("f", "h1", "h2", count=1, hop_limit=2)
    records = run_simulation(topo, [short])
    assert records[0].drop_reason is DropReason.TTL_EXPIRED
    # The drop happened at the second router: only two links were crossed.
    assert [link for link, _ in records[0].wire_bytes_per_hop] == ["l0", "l1"]

    enough = TrafficSpec("f", "h1", "h2", count=1, hop_limit=3)
    records = run_simulation(topo, [enough])
    assert records[0].receive_time is not None
    assert [link for link, _ in records[0].wire_bytes_per_hop] == ["l0", "l1", "l2"]


def test_v4_flow_end_to_end():
    h1 = Node("h1", NodeKind.IPV4_ONLY, Role.HOST,
              interfaces=[Interface("eth0", v4=A4("10.0.0.2"))],
              v4_routes=[RouteEntry4(P4("0.0.0.0/0"), "eth0")])
    r = Node("r", NodeKind.IPV4_ONLY, Role.ROUTER,
             interfaces=[Interface("eth0", v4=A4("10.0.0.1")),
                         Interface("eth1", v4=A4("10.0.1.1"))],
             v4_routes=[RouteEntry4(P4("10.0.0.0/24"), "eth0"),
                        RouteEntry4(P4("10.0.1.0/24"), "eth1")])
    h2 = Node("h2", NodeKind.IPV4_ONLY, Role.HOST,
              interfaces=[Interface("eth0", v4=A4("10.0.1.2"))],
              v4_routes=[RouteEntry4(P4("0.0.0.0/0"), "eth0")])
    topo = Topology(nodes=[h1, r, h2],
                    links=[Link("l0", ("h1", "eth0"), ("r", "eth0")),
                           Link("l1", ("r", "eth1"), ("h2", "eth0"))])
    flow = TrafficSpec("f4", "h1", "h2", payload_bytes=100, count=2, family="v4")
    records = run_simulation(topo, [flow])
    assert all(r.receive_time is not None for r in records)
    assert all(r.wire_bytes_per_hop == [("l0", 120), ("l1", 120)] for r in records)


def test_every_packet_terminates_exactly_once():
    topo = _chain_topology()
    flows = [
        TrafficSpec("ok", "h1", "h2", count=5, gap=1e-4),
        TrafficSpec("dead", "h1", "h2", count=4, hop_limit=1, gap=1e-4),
        TrafficSpec("tiny", "h2", "h1", count=3, payload_bytes=0),
    ]
    records = run_simulation(topo, flows)
    assert len(records) == 12
    for rec in records:
        delivered = rec.receive_time is not None
        dropped = rec.drop_reason is not None
        assert delivered != dropped, rec


def test_run_is_deterministic():
    topo = _chain_topology()
    flows = [TrafficSpec("f", "h1", "h2", count=10, gap=1e-4, jitter=0.5)]
    a = run_simulation(topo, flows, seed=7)
    b = run_simulation(topo, flows, seed=7)
    assert a == b
    c = run_simulation(topo, flows, seed=8)
    assert [r.send_time for r in c] != [r.send_time for r in a]


def test_jitter_stays_inside_one_gap():
    topo = _chain_topology()
    flows = [TrafficSpec("f", "h1", "h2", count=50, gap=1e-3, jitter=0.5)]
    records = run_simulation(topo, flows, seed=3)
    for rec in sorted(records, key=lambda r: r.packet_id):
        base = rec.packet_id * 1e-3
        assert base <= rec.send_time <= base + 0.5 * 1e-3


def test_horizon_closes_in_flight_packets():
    topo = _two_hosts()
    flow = TrafficSpec("f", "h1", "h2", count=3, gap=1e-3)
    records = run_simulation(topo, [flow], horizon=0.0005)
    # The first send happens at t=0, but nothing arrives by t=0.0005.
    assert all(r.receive_time is None for r in records)
    assert all(r.drop_reason is DropReason.HORIZON_EXPIRED for r in records)
    with pytest.raises(InvalidTrafficError):
        run_simulation(topo, [flow], horizon=-1.0)


def test_trace_lists_every_transmission():
    topo = _chain_topology()
    flow = TrafficSpec("f", "h1", "h2", count=2)
    trace: list[str] = []
    records = run_simulation(topo, [flow], trace=trace)
    hops = sum(len(r.wire_bytes_per_hop) for r in records)
    assert len(trace) == hops == 6
    assert all("pkt=" in line for line in trace)


# -------------------------------------------------------------- validation


def _valid_topology():
    return _two_hosts()


def test_validate_topology_accepts_valid():
    validate_topology(_valid_topology())


def _expect_invalid(topo, needle):
    with pytest.raises(InvalidTopologyError, match=needle):
        validate_topology(topo)


def test_validate_topology_rejections():
    t = _valid_topology()
    t.nodes.append(t.nodes[0])
    _expect_invalid(t, "duplicate node")

    t = _valid_topology()
    t.nodes[0].interfaces.append(Interface("eth0"))
    _expect_invalid(t, "duplicate interface")

    t = _valid_topology()
    t.nodes[0].processing_delay = -1e-6
    _expect_invalid(t, "negative processing_delay")

    t = _valid_topology()
    t.nodes[0].kind = NodeKind.IPV4_ONLY
    _expect_invalid(t, "IPv4-only node holds IPv6")

    t = _valid_topology()
    t.nodes[0].interfaces[0].v4 = A4("10.0.0.1")
    _expect_invalid(t, "IPv6-only node holds an IPv4")

    t = _valid_topology()
    t.nodes[0].tunnels["tun0"] = TunnelConfig(TunnelKind.AUTO_6TO4, A4("10.0.0.1"))
    _expect_invalid(t, "tunnels require a dual-stack")

    t = _valid_topology()
    t.nodes[0].kind = NodeKind.DUAL_STACK
    t.nodes[0].interfaces[0].v4 = A4("10.0.0.1")
    t.nodes[0].tunnels["eth0"] = TunnelConfig(TunnelKind.AUTO_6TO4, A4("10.0.0.1"))
    _expect_invalid(t, "clashes with an interface")

    t = _valid_topology()
    t.nodes[0].kind = NodeKind.DUAL_STACK
    t.nodes[0].interfaces[0].v4 = A4("10.0.0.1")
    t.nodes[0].tunnels["tun0"] = TunnelConfig(TunnelKind.AUTO_6TO4, A4("10.99.0.1"))
    _expect_invalid(t, "not one of the node's interface addresses")

    t = _valid_topology()
    t.nodes[0].kind = NodeKind.IPV4_ONLY
    t.nodes[0].interfaces[0].v6 = []
    t.nodes[0].interfaces[0].v4 = A4("10.0.0.1")
    _expect_invalid(t, "IPv4-only node holds IPv6 routes")

    t = _valid_topology()
    t.nodes[0].v6_routes.append(RouteEntry6(P6("2001::/16"), "nope"))
    _expect_invalid(t, "unknown interface")

    t = _valid_topology()
    t.links.append(Link("l0", ("h1", "eth0"), ("h2", "eth0")))
    _expect_invalid(t, "duplicate link")

    t = _valid_topology()
    t.links[0].bandwidth = 0.0
    _expect_invalid(t, "bandwidth")

    t = _valid_topology()
    t.links[0].propagation_delay = -0.1
    _expect_invalid(t, "negative propagation")

    t = _valid_topology()
    t.links[0].mtu = 59
    _expect_invalid(t, "mtu below")

    t = _valid_topology()
    t.links[0].b = ("h1", "eth0")
    _expect_invalid(t, "both ends are the same port")

    t = _valid_topology()
    t.links[0].b = ("h2", "nope")
    _expect_invalid(t, "no such port")

    t = _valid_topology()
    t.nodes[1].interfaces.append(Interface("eth1", v6=[A6("2001::9")]))
    _expect_invalid(t, "not attached to any link")

    t = _valid_topology()
    t.nodes[0].interfaces.append(Interface("eth1", v6=[A6("2001::8")]))
    t.links.append(Link("l1", ("h1", "eth1"), ("h2", "eth0")))
    _expect_invalid(t, "already linked")


def test_validate_traffic_rejections():
    topo = _valid_topology()

    def expect(flow, needle):
        with pytest.raises(InvalidTrafficError, match=needle):
            validate_traffic(topo, [flow])

    ok = TrafficSpec("f", "h1", "h2")
    validate_traffic(topo, [ok])
    with pytest.raises(InvalidTrafficError, match="duplicate flow"):
        validate_traffic(topo, [ok, TrafficSpec("f", "h2", "h1")])
    expect(TrafficSpec("f", "h1", "h2", family="v5"), "family")
    expect(TrafficSpec("f", "h1", "nope"), "unknown node")
    expect(TrafficSpec("f", "h1", "h2", family="v4"), "has no v4 address")
    expect(TrafficSpec("f", "h1", "h2", payload_bytes=-1), "negative payload")
    expect(TrafficSpec("f", "h1", "h2", payload_bytes=65476), "over 65475")
    expect(TrafficSpec("f", "h1", "h2", count=0), "count")
    expect(TrafficSpec("f", "h1", "h2", gap=-1.0), "negative start or gap")
    expect(TrafficSpec("f", "h1", "h2", start=-1.0), "negative start or gap")
    expect(TrafficSpec("f", "h1", "h2", hop_limit=0), "hop_limit")
    expect(TrafficSpec("f", "h1", "h2", hop_limit=256), "hop_limit")
    expect(TrafficSpec("f", "h1", "h2", jitter=1.0), "jitter")
    # The biggest legal payload still fits after one encapsulation.
    validate_traffic(topo, [TrafficSpec("g", "h1", "h2", payload_bytes=65475)])
