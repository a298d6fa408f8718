"""Cellular-layer simulation: SIMs, bearers, attribution and the SMS channel.

The whole vulnerability hinges on one carrier behaviour: traffic arriving
over a SIM's mobile-data bearer is attributed to that SIM's MSISDN, and a
hotspot extends the same attribution to every guest device. Wi-Fi traffic
carries no identity. Timestamps come from an integer logical clock so every
run is deterministic.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    ConstructionError,
    DuplicateMsisdn,
    HostNotMobile,
    SimInUse,
    UnknownConnection,
    UnknownMsisdn,
    UnknownSim,
    WrongKey,
)
from .msisdn import Msisdn
from .subscribers import SubscriberRecord


class LogicalClock:
    """Integer tick counter; the only notion of time inside a world."""

    def __init__(self) -> None:
        self._tick = 0

    def now(self) -> int:
        return self._tick

    def advance(self, ticks: int = 1) -> int:
        if ticks < 1:
            raise ValueError("clock only moves forward")
        self._tick += ticks
        return self._tick


@dataclass(frozen=True)
class MobileData:
    sim_id: str


@dataclass(frozen=True)
class Wifi:
    pass


@dataclass(frozen=True)
class HotspotGuest:
    host_connection_id: str


Bearer = MobileData | Wifi | HotspotGuest


@dataclass(frozen=True)
class Connection:
    connection_id: str
    bearer: Bearer
    device_id: str


class SmsKind(str, Enum):
    USER = "user"
    OTP = "otp"
    OWNER_NOTIFICATION = "owner_notification"


@dataclass(frozen=True)
class SmsMessage:
    to: Msisdn
    body: str
    timestamp: int
    kind: SmsKind

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError("sms body must be nonempty")


@dataclass
class _Hotspot:
    hotspot_id: str
    host_connection_id: str
    key: str
    guest_connection_ids: list[str] = field(default_factory=list)


class Carrier:
    """Single logical carrier store; every operation is atomic under a lock."""

    def __init__(self, clock: LogicalClock | None = None):
        self.clock = clock or LogicalClock()
        self._lock = threading.RLock()
        self._records: dict[str, SubscriberRecord] = {}          # sim_id -> record
        self._sim_by_msisdn: dict[str, str] = {}                 # rendered msisdn -> sim_id
        self._connections: dict[str, Connection] = {}
        self._live_mobile_sim: dict[str, str] = {}               # sim_id -> connection_id
        self._hotspots: dict[str, _Hotspot] = {}
        self._inboxes: dict[str, list[SmsMessage]] = {}          # sim_id -> messages
        self._unavailable: set[str] = set()                      # rendered msisdns
        self._counters = {"sim": 0, "conn": 0, "hs": 0, "sms": 0}

    def _next_id(self, kind: str) -> str:
        self._counters[kind] += 1
        return f"{kind}-{self._counters[kind]:04d}"

    # --- registration ---

    def register_sim(self, record: SubscriberRecord) -> str:
        with self._lock:
            rendered = record.msisdn.render()
            if rendered in self._sim_by_msisdn:
                raise DuplicateMsisdn(rendered)
            try:
                record.validate()
            except ConstructionError:
                raise
            sim_id = self._next_id("sim")
            self._records[sim_id] = record
            self._sim_by_msisdn[rendered] = sim_id
            self._inboxes[sim_id] = []
            return sim_id

    def record_for_sim(self, sim_id: str) -> SubscriberRecord:
        try:
            return self._records[sim_id]
        except KeyError:
            raise UnknownSim(sim_id) from None

    def record_for_msisdn(self, msisdn: Msisdn) -> SubscriberRecord:
        sim_id = self._sim_by_msisdn.get(msisdn.render())
        if sim_id is None:
            raise UnknownMsisdn(msisdn.render())
        return self._records[sim_id]

    # --- connections ---

    def connect(self, sim_id: str, device_id: str) -> Connection:
        with self._lock:
            if sim_id not in self._records:
                raise UnknownSim(sim_id)
            if sim_id in self._live_mobile_sim:
                raise SimInUse(sim_id)
            conn = Connection(self._next_id("conn"), MobileData(sim_id), device_id)
            self._connections[conn.connection_id] = conn
            self._live_mobile_sim[sim_id] = conn.connection_id
            return conn

    def connect_wifi(self, device_id: str) -> Connection:
        with self._lock:
            conn = Connection(self._next_id("conn"), Wifi(), device_id)
            self._connections[conn.connection_id] = conn
            return conn

    def disconnect(self, connection: Connection | str) -> None:
        """Drop a connection. Guests of a dropped hotspot host stay live but
        lose attribution (the dangling-bearer rule)."""
        conn_id = connection if isinstance(connection, str) else connection.connection_id
        with self._lock:
            conn = self._connections.pop(conn_id, None)
            if conn is None:
                raise UnknownConnection(conn_id)
            if isinstance(conn.bearer, MobileData):
                self._live_mobile_sim.pop(conn.bearer.sim_id, None)

    def enable_hotspot(self, host: Connection, key: str) -> str:
        with self._lock:
            if host.connection_id not in self._connections:
                raise UnknownConnection(host.connection_id)
            if not isinstance(host.bearer, MobileData):
                raise HostNotMobile(host.connection_id)
            hotspot_id = self._next_id("hs")
            self._hotspots[hotspot_id] = _Hotspot(hotspot_id, host.connection_id, key)
            return hotspot_id

    def join_hotspot(self, hotspot_id: str, key: str, device_id: str) -> Connection:
        with self._lock:
            hotspot = self._hotspots.get(hotspot_id)
            if hotspot is None:
                raise UnknownConnection(hotspot_id)
            if key != hotspot.key:
                raise WrongKey(hotspot_id)
            conn = Connection(self._next_id("conn"),
                              HotspotGuest(hotspot.host_connection_id), device_id)
            self._connections[conn.connection_id] = conn
            hotspot.guest_connection_ids.append(conn.connection_id)
            return conn

    def attribute(self, connection: Connection | str) -> Msisdn | None:
        """MSISDN generating this connection's traffic, or None for Wi-Fi and
        for guests whose hotspot host is gone."""
        conn_id = connection if isinstance(connection, str) else connection.connection_id
        conn = self._connections.get(conn_id)
        if conn is None:
            raise UnknownConnection(conn_id)
        if isinstance(conn.bearer, MobileData):
            return self._records[conn.bearer.sim_id].msisdn
        if isinstance(conn.bearer, HotspotGuest):
            host = self._connections.get(conn.bearer.host_connection_id)
            if host is None:
                return None
            return self.attribute(host)
        return None

    # --- SMS / notification channel ---

    def send_sms(self, to: Msisdn, body: str, kind: SmsKind = SmsKind.USER) -> dict:
        with self._lock:
            sim_id = self._sim_by_msisdn.get(to.render())
            if sim_id is None:
                raise UnknownMsisdn(to.render())
            message = SmsMessage(to, body, self.clock.advance(), kind)
            self._inboxes[sim_id].append(message)
            self._counters["sms"] += 1
            return {"message_id": f"sms-{self._counters['sms']:04d}",
                    "timestamp": message.timestamp}

    def read_inbox(self, sim_id: str) -> list[SmsMessage]:
        if sim_id not in self._inboxes:
            raise UnknownSim(sim_id)
        return list(self._inboxes[sim_id])

    def sim_for_msisdn(self, msisdn: Msisdn) -> str:
        sim_id = self._sim_by_msisdn.get(msisdn.render())
        if sim_id is None:
            raise UnknownMsisdn(msisdn.render())
        return sim_id

    # --- call availability (used by the set-unavailable active op) ---

    def set_unavailable(self, msisdn: Msisdn, flag: bool) -> None:
        with self._lock:
            if msisdn.render() not in self._sim_by_msisdn:
                raise UnknownMsisdn(msisdn.render())
            if flag:
                self._unavailable.add(msisdn.render())
            else:
                self._unavailable.discard(msisdn.render())

    def simulate_incoming_call(self, to: Msisdn) -> str:
        if to.render() not in self._sim_by_msisdn:
            raise UnknownMsisdn(to.render())
        return "rejected" if to.render() in self._unavailable else "delivered"

    # --- determinism support ---

    def state_fingerprint(self) -> str:
        """Stable serialisation of the full carrier state."""
        with self._lock:
            state = {
                "tick": self.clock.now(),
                "sims": {
                    sim_id: {
                        "msisdn": rec.msisdn.render(),
                        "tax_code": rec.tax_code,
                        "credit": rec.credit,
                        "offers": list(rec.active_offers),
                        "pin": rec.pin,
                        "puk": rec.puk,
                    }
                    for sim_id, rec in sorted(self._records.items())
                },
                "connections": {
                    cid: repr(conn.bearer)
                    for cid, conn in sorted(self._connections.items())
                },
                "inboxes": {
                    sim_id: [(m.body, m.timestamp, m.kind.value) for m in msgs]
                    for sim_id, msgs in sorted(self._inboxes.items())
                },
                "unavailable": sorted(self._unavailable),
            }
        return json.dumps(state, sort_keys=True)
