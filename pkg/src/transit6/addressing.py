"""Address derivations for the tunneling mechanisms, plus prefix matching.

The derivations embed an IPv4 address into well-known IPv6 layouts:

* 6to4: ``2002::/16`` followed by the 32-bit IPv4 address, giving a /48 site
  prefix (bits 16..47 carry the IPv4 address).
* ISATAP: the 96-bit prefix ``fe80::5efe`` followed by the IPv4 address.
* IPv4-compatible: 96 zero bits followed by the IPv4 address (``::a.b.c.d``).

Each embedding has an exact inverse, used by automatic tunnels to recover the
IPv4 tunnel endpoint from a destination address.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .codec import Ipv4Address, Ipv6Address

SIX_TO_FOUR_PREFIX_BYTES = bytes((0x20, 0x02))
ISATAP_PREFIX_BYTES = bytes.fromhex("fe8000000000000000005efe")


class AddressingError(ValueError):
    """Base class for derivation and prefix errors."""


class Not6to4Error(AddressingError):
    """Address does not start with the 2002::/16 prefix."""


class NotCompatibleError(AddressingError):
    """Address does not have 96 zero bits in front."""


class FamilyMismatchError(AddressingError):
    """Prefix and address belong to different IP families."""


@dataclass(frozen=True)
class Ipv4Prefix:
    """An IPv4 routing prefix. Bits past ``length`` must be zero."""

    address: Ipv4Address
    length: int

    def __post_init__(self) -> None:
        if not 0 <= self.length <= 32:
            raise AddressingError(f"IPv4 prefix length out of range: {self.length}")
        if self.address.to_int() & _host_mask(32, self.length):
            raise AddressingError(f"host bits set below /{self.length}: {self.address}")

    @classmethod
    def parse(cls, text: str) -> "Ipv4Prefix":
        addr, length = _split_prefix(text)
        return cls(Ipv4Address.parse(addr), length)

    def __str__(self) -> str:
        return f"{self.address}/{self.length}"


@dataclass(frozen=True)
class Ipv6Prefix:
    """An IPv6 routing prefix. Bits past ``length`` must be zero."""

    address: Ipv6Address
    length: int

    def __post_init__(self) -> None:
        if not 0 <= self.length <= 128:
            raise AddressingError(f"IPv6 prefix length out of range: {self.length}")
        if self.address.to_int() & _host_mask(128, self.length):
            raise AddressingError(f"host bits set below /{self.length}: {self.address}")

    @classmethod
    def parse(cls, text: str) -> "Ipv6Prefix":
        addr, length = _split_prefix(text)
        return cls(Ipv6Address.parse(addr), length)

    def __str__(self) -> str:
        return f"{self.address}/{self.length}"


def _split_prefix(text: str) -> tuple[str, int]:
    addr, sep, length = text.strip().partition("/")
    if not sep or not length.isdigit():
        raise AddressingError(f"prefix must look like addr/len: {text!r}")
    return addr, int(length)


def _host_mask(width: int, length: int) -> int:
    return (1 << (width - length)) - 1


def prefix_matches(prefix: Union[Ipv4Prefix, Ipv6Prefix], addr: Union[Ipv4Address, Ipv6Address]) -> bool:
    """True iff the top ``prefix.length`` bits of ``addr`` equal the prefix's."""
    if isinstance(prefix, Ipv4Prefix) != isinstance(addr, Ipv4Address):
        raise FamilyMismatchError(f"cannot match {prefix} against {addr}")
    width = 32 if isinstance(prefix, Ipv4Prefix) else 128
    if prefix.length == 0:
        return True
    shift = width - prefix.length
    return addr.to_int() >> shift == prefix.address.to_int() >> shift


def derive_6to4_prefix(v4: Ipv4Address) -> Ipv6Prefix:
    """Site /48 prefix for a 6to4 router numbered ``v4``."""
    return Ipv6Prefix(Ipv6Address(SIX_TO_FOUR_PREFIX_BYTES + v4.octets + bytes(10)), 48)


def extract_6to4_ipv4(addr: Ipv6Address) -> Ipv4Address:
    """Recover the embedded IPv4 address from a 6to4 address."""
    if addr.octets[:2] != SIX_TO_FOUR_PREFIX_BYTES:
        raise Not6to4Error(f"{addr} is not under 2002::/16")
    return Ipv4Address(addr.octets[2:6])


def derive_isatap_address(v4: Ipv4Address) -> Ipv6Address:
    """Link-local ISATAP address: fe80::5efe with the IPv4 address appended."""
    return Ipv6Address(ISATAP_PREFIX_BYTES + v4.octets)


def make_ipv4_compatible(v4: Ipv4Address) -> Ipv6Address:
    """IPv4-compatible IPv6 address: 96 zero bits then the IPv4 address."""
    return Ipv6Address(bytes(12) + v4.octets)


def extract_compatible_ipv4(addr: Ipv6Address) -> Ipv4Address:
    """Recover the IPv4 address from an IPv4-compatible IPv6 address."""
    if addr.octets[:12] != bytes(12):
        raise NotCompatibleError(f"{addr} does not embed an IPv4 address under ::/96")
    return Ipv4Address(addr.octets[12:])
