"""Transition mechanisms: 6in4 encapsulation, dual-stack dispatch, translation.

Encapsulation wraps a native IPv6 frame in an IPv4 header with protocol 41 so
it can cross IPv4-only infrastructure; decapsulation strips that header after
checking it. Dispatch picks the protocol path a dual-stack node uses, from the
version nibble of the first byte alone. Translation rewrites a packet from one
family to the other using an explicit address map with an embedded-address
fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .addressing import (
    Not6to4Error,
    NotCompatibleError,
    extract_6to4_ipv4,
    extract_compatible_ipv4,
    make_ipv4_compatible,
)
from .codec import (
    IPV6_HEADER_LEN,
    PROTO_IPV6_IN_IPV4,
    FrameKind,
    Ipv4Address,
    Ipv4Header,
    Ipv6Address,
    Ipv6Header,
    Packet,
    TooShortError,
    ipv4_header_checksum,
    serialize_ipv4_header,
    verify_ipv4_checksum,
)


class TransitionError(ValueError):
    """Base class for tunneling and translation errors."""


class InvalidInnerError(TransitionError):
    """Only native IPv6 frames can be encapsulated."""


class NotTunneledError(TransitionError):
    """Frame is not an IPv6-in-IPv4 encapsulation."""


class BadChecksumError(TransitionError):
    """Outer IPv4 header fails checksum verification."""


class UnknownVersionError(TransitionError):
    """First nibble is neither 4 nor 6."""


class NoEndpointError(TransitionError):
    """No IPv4 tunnel endpoint can be determined for the destination."""


class UnmappableAddressError(TransitionError):
    """Translation cannot resolve an address in the target family."""


class BadConfigError(TransitionError):
    """Tunnel or translation configuration violates its own rules."""


class TunnelKind(Enum):
    CONFIGURED = "configured"
    AUTOMATIC_COMPATIBLE = "automatic-compatible"
    AUTO_6TO4 = "6to4"


@dataclass(frozen=True)
class TunnelConfig:
    """One tunnel interface on a dual-stack node.

    Configured tunnels know both IPv4 endpoints up front. Automatic kinds
    derive the remote endpoint per packet from the destination address, so
    they must not carry a fixed remote.
    """

    kind: TunnelKind
    local_v4: Ipv4Address
    remote_v4: Optional[Ipv4Address] = None
    tunnel_if_addr: Optional[Ipv6Address] = None

    def __post_init__(self) -> None:
        if self.kind is TunnelKind.CONFIGURED and self.remote_v4 is None:
            raise BadConfigError("configured tunnel needs remote_v4")
        if self.kind is not TunnelKind.CONFIGURED and self.remote_v4 is not None:
            raise BadConfigError(f"{self.kind.value} tunnel derives its remote, drop remote_v4")


class PathKind(Enum):
    V4_PATH = "v4"
    V6_PATH = "v6"


def dual_stack_dispatch(frame: bytes) -> PathKind:
    """Pick the protocol path from the version nibble of the first byte."""
    if not frame:
        raise TooShortError("empty frame")
    version = frame[0] >> 4
    if version == 4:
        return PathKind.V4_PATH
    if version == 6:
        return PathKind.V6_PATH
    raise UnknownVersionError(f"version nibble {version} is neither 4 nor 6")


def encapsulate_6in4(
    inner: Packet, src_v4: Ipv4Address, dst_v4: Ipv4Address, ttl: int
) -> Packet:
    """Wrap a native IPv6 packet in an IPv4 header with protocol 41.

    The outer header is minimal (ihl 5, no options), carries the given ttl,
    and gets a valid checksum. Encapsulation adds exactly 20 bytes to the
    frame. The inner header and payload are not touched.
    """
    if inner.frame_kind is not FrameKind.V6 or inner.v6 is None:
        raise InvalidInnerError(f"can only encapsulate native V6 frames, got {inner.frame_kind}")
    outer = Ipv4Header(
        src=src_v4,
        dst=dst_v4,
        total_length=20 + IPV6_HEADER_LEN + len(inner.payload),
        ttl=ttl,
        protocol=PROTO_IPV6_IN_IPV4,
    )
    outer = replace(outer, checksum=ipv4_header_checksum(outer))
    return Packet(
        frame_kind=FrameKind.V6_IN_V4,
        outer_v4=outer,
        v6=inner.v6,
        payload=inner.payload,
        packet_id=inner.packet_id,
    )


def decapsulate_6in4(p: Packet) -> Packet:
    """Strip the outer IPv4 header from a 6in4 frame, checking it first.

    The outer checksum must verify and the outer total_length must account
    for exactly the inner header plus payload.
    """
    if p.frame_kind is not FrameKind.V6_IN_V4 or p.outer_v4 is None or p.v6 is None:
        raise NotTunneledError(f"frame kind {p.frame_kind} is not an encapsulation")
    if p.outer_v4.protocol != PROTO_IPV6_IN_IPV4:
        raise NotTunneledError(f"outer protocol {p.outer_v4.protocol} is not 41")
    if not verify_ipv4_checksum(serialize_ipv4_header(p.outer_v4)):
        raise BadChecksumError("outer IPv4 checksum does not verify")
    expect = p.outer_v4.header_len() + IPV6_HEADER_LEN + len(p.payload)
    if p.outer_v4.total_length != expect:
        raise NotTunneledError(
            f"outer total_length {p.outer_v4.total_length}, expected {expect}"
        )
    return Packet(
        frame_kind=FrameKind.V6,
        v6=p.v6,
        payload=p.payload,
        packet_id=p.packet_id,
    )


def resolve_tunnel_endpoint(cfg: TunnelConfig, dst: Ipv6Address) -> Ipv4Address:
    """IPv4 address the outer header should be sent to for ``dst``."""
    if cfg.kind is TunnelKind.CONFIGURED:
        assert cfg.remote_v4 is not None
        return cfg.remote_v4
    if cfg.kind is TunnelKind.AUTOMATIC_COMPATIBLE:
        try:
            return extract_compatible_ipv4(dst)
        except NotCompatibleError as exc:
            raise NoEndpointError(str(exc)) from None
    try:
        return extract_6to4_ipv4(dst)
    except Not6to4Error as exc:
        raise NoEndpointError(str(exc)) from None


@dataclass(frozen=True)
class TranslationMap:
    """Bijective IPv4/IPv6 address pairs for stateless translation.

    Addresses not covered by a pair fall back to the ::/96 embedding: a v6
    destination like ::a.b.c.d translates to a.b.c.d and back.
    """

    pairs: tuple[tuple[Ipv4Address, Ipv6Address], ...] = ()

    def __post_init__(self) -> None:
        v4s = [p[0] for p in self.pairs]
        v6s = [p[1] for p in self.pairs]
        if len(set(v4s)) != len(v4s) or len(set(v6s)) != len(v6s):
            raise BadConfigError("translation map must be bijective")

    def to_v4(self, addr: Ipv6Address) -> Ipv4Address:
        for v4, v6 in self.pairs:
            if v6 == addr:
                return v4
        try:
            return extract_compatible_ipv4(addr)
        except NotCompatibleError:
            raise UnmappableAddressError(f"no IPv4 mapping for {addr}") from None

    def to_v6(self, addr: Ipv4Address) -> Ipv6Address:
        for v4, v6 in self.pairs:
            if v4 == addr:
                return v6
        return make_ipv4_compatible(addr)


def translate_v6_to_v4(p: Packet, tmap: TranslationMap) -> Packet:
    """Rewrite a native IPv6 packet as IPv4, payload untouched.

    hop_limit becomes ttl, traffic_class becomes dscp_ecn, next_header
    becomes protocol. The new header is minimal, gets identification 0 with
    the don't-fragment flag, and a freshly computed checksum.
    """
    if p.frame_kind is not FrameKind.V6 or p.v6 is None:
        raise InvalidInnerError(f"can only translate native V6 frames, got {p.frame_kind}")
    h = Ipv4Header(
        src=tmap.to_v4(p.v6.src),
        dst=tmap.to_v4(p.v6.dst),
        dscp_ecn=p.v6.traffic_class,
        total_length=20 + len(p.payload),
        identification=0,
        flags=0b010,
        ttl=p.v6.hop_limit,
        protocol=p.v6.next_header,
    )
    h = replace(h, checksum=ipv4_header_checksum(h))
    return Packet(frame_kind=FrameKind.V4, outer_v4=h, payload=p.payload, packet_id=p.packet_id)


def translate_v4_to_v6(p: Packet, tmap: TranslationMap) -> Packet:
    """Rewrite a native IPv4 packet as IPv6, payload untouched.

    ttl becomes hop_limit, dscp_ecn becomes traffic_class, protocol becomes
    next_header, and the flow label starts at zero.
    """
    if p.frame_kind is not FrameKind.V4 or p.outer_v4 is None:
        raise InvalidInnerError(f"can only translate native V4 frames, got {p.frame_kind}")
    h = Ipv6Header(
        src=tmap.to_v6(p.outer_v4.src),
        dst=tmap.to_v6(p.outer_v4.dst),
        traffic_class=p.outer_v4.dscp_ecn,
        flow_label=0,
        payload_length=len(p.payload),
        next_header=p.outer_v4.protocol,
        hop_limit=p.outer_v4.ttl,
    )
    return Packet(frame_kind=FrameKind.V6, v6=h, payload=p.payload, packet_id=p.packet_id)
