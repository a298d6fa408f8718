"""Carrier-layer behaviour: registration, attribution, hotspots, SMS."""

from __future__ import annotations

import random
from datetime import date

import pytest

from selflog.carrier import Carrier, HotspotGuest, MobileData, SmsKind, Wifi
from selflog.errors import (
    ConstructionError,
    DuplicateMsisdn,
    HostNotMobile,
    SimInUse,
    UnknownConnection,
    UnknownMsisdn,
    UnknownSim,
    WrongKey,
)
from selflog.subscribers import SubscriberGenerator


@pytest.fixture()
def carrier_with_sims():
    carrier = Carrier()
    generator = SubscriberGenerator(99)
    records = generator.batch(4)
    sim_ids = [carrier.register_sim(record) for record in records]
    return carrier, records, sim_ids


def test_register_two_records_distinct_sim_ids(carrier_with_sims):
    _, _, sim_ids = carrier_with_sims
    assert len(set(sim_ids)) == len(sim_ids)


def test_duplicate_msisdn_rejected(carrier_with_sims):
    carrier, records, _ = carrier_with_sims
    with pytest.raises(DuplicateMsisdn):
        carrier.register_sim(records[0])


def test_inconsistent_tax_code_rejected():
    carrier = Carrier()
    record = SubscriberGenerator(5).generate()
    record.tax_code = "RSSMRA80A01H501U"
    with pytest.raises(ConstructionError):
        carrier.register_sim(record)


def test_negative_credit_rejected():
    carrier = Carrier()
    record = SubscriberGenerator(5).generate()
    record.credit = -1
    with pytest.raises(ConstructionError):
        carrier.register_sim(record)


def test_mobile_connection_attributes_to_owner(carrier_with_sims):
    carrier, records, sim_ids = carrier_with_sims
    conn = carrier.connect(sim_ids[0], "phone-1")
    assert carrier.attribute(conn) == records[0].msisdn


def test_wifi_attributes_to_none(carrier_with_sims):
    carrier, _, _ = carrier_with_sims
    conn = carrier.connect_wifi("laptop-1")
    assert carrier.attribute(conn) is None


def test_one_live_mobile_connection_per_sim(carrier_with_sims):
    carrier, _, sim_ids = carrier_with_sims
    carrier.connect(sim_ids[0], "phone-1")
    with pytest.raises(SimInUse):
        carrier.connect(sim_ids[0], "phone-2")


def test_reconnect_after_disconnect(carrier_with_sims):
    carrier, _, sim_ids = carrier_with_sims
    conn = carrier.connect(sim_ids[0], "phone-1")
    carrier.disconnect(conn)
    carrier.connect(sim_ids[0], "phone-2")


def test_unknown_sim_rejected(carrier_with_sims):
    carrier, _, _ = carrier_with_sims
    with pytest.raises(UnknownSim):
        carrier.connect("sim-9999", "phone-x")


def test_hotspot_guest_inherits_host_attribution(carrier_with_sims):
    carrier, records, sim_ids = carrier_with_sims
    host = carrier.connect(sim_ids[0], "phone-1")
    hotspot = carrier.enable_hotspot(host, "sesame")
    guest = carrier.join_hotspot(hotspot, "sesame", "laptop-1")
    assert isinstance(guest.bearer, HotspotGuest)
    assert carrier.attribute(guest) == carrier.attribute(host) == records[0].msisdn


def test_wrong_hotspot_key(carrier_with_sims):
    carrier, _, sim_ids = carrier_with_sims
    host = carrier.connect(sim_ids[0], "phone-1")
    hotspot = carrier.enable_hotspot(host, "sesame")
    with pytest.raises(WrongKey):
        carrier.join_hotspot(hotspot, "open says me", "laptop-1")


def test_hotspot_requires_mobile_host(carrier_with_sims):
    carrier, _, _ = carrier_with_sims
    wifi = carrier.connect_wifi("laptop-1")
    with pytest.raises(HostNotMobile):
        carrier.enable_hotspot(wifi, "sesame")


def test_host_disconnect_orphans_guest(carrier_with_sims):
    carrier, _, sim_ids = carrier_with_sims
    host = carrier.connect(sim_ids[0], "phone-1")
    hotspot = carrier.enable_hotspot(host, "sesame")
    guest = carrier.join_hotspot(hotspot, "sesame", "laptop-1")
    carrier.disconnect(host)
    assert carrier.attribute(guest) is None


def test_unknown_connection(carrier_with_sims):
    carrier, _, _ = carrier_with_sims
    with pytest.raises(UnknownConnection):
        carrier.attribute("conn-9999")


def test_attribution_transitivity_over_random_topologies():
    """attribute(guest) == attribute(host) over random hotspot trees."""
    rng = random.Random(31337)
    for trial in range(20):
        carrier = Carrier()
        generator = SubscriberGenerator(f"topology:{trial}")
        sims = [carrier.register_sim(generator.generate()) for _ in range(rng.randint(2, 5))]
        hosts = []
        for i, sim in enumerate(sims):
            if rng.random() < 0.8:
                conn = carrier.connect(sim, f"phone-{i}")
                hosts.append(carrier.enable_hotspot(conn, "key"))
        pairs = []
        for h_index, hotspot in enumerate(hosts):
            for g in range(rng.randint(0, 3)):
                guest = carrier.join_hotspot(hotspot, "key", f"guest-{h_index}-{g}")
                pairs.append((guest, hotspot))
        for guest, hotspot in pairs:
            host_conn = carrier._hotspots[hotspot].host_connection_id
            assert carrier.attribute(guest) == carrier.attribute(host_conn)


def test_wifi_opacity_under_any_operation_sequence():
    """No operation sequence makes a plain Wi-Fi connection attributable."""
    rng = random.Random(2718)
    carrier = Carrier()
    generator = SubscriberGenerator("wifi-opacity")
    sims = [carrier.register_sim(generator.generate()) for _ in range(3)]
    wifi_conns = [carrier.connect_wifi(f"wifi-dev-{i}") for i in range(3)]
    for step in range(60):
        action = rng.choice(("connect", "disconnect", "hotspot", "sms", "wifi"))
        try:
            if action == "connect":
                carrier.connect(rng.choice(sims), f"dev-{step}")
            elif action == "disconnect":
                live = sorted(carrier._connections)
                if live:
                    carrier.disconnect(rng.choice(live))
            elif action == "hotspot":
                live = [c for c in carrier._connections.values()
                        if isinstance(c.bearer, MobileData)]
                if live:
                    hotspot = carrier.enable_hotspot(rng.choice(live), "k")
                    carrier.join_hotspot(hotspot, "k", f"guest-{step}")
            elif action == "sms":
                record = carrier.record_for_sim(rng.choice(sims))
                carrier.send_sms(record.msisdn, "ping")
            else:
                wifi_conns.append(carrier.connect_wifi(f"wifi-{step}"))
        except (SimInUse, UnknownConnection):
            pass
        for conn in wifi_conns:
            if conn.connection_id in carrier._connections:
                assert carrier.attribute(conn) is None


def test_inbox_is_fifo_with_strictly_increasing_timestamps(carrier_with_sims):
    carrier, records, sim_ids = carrier_with_sims
    for i in range(5):
        carrier.send_sms(records[0].msisdn, f"message {i}")
    inbox = carrier.read_inbox(sim_ids[0])
    assert [m.body for m in inbox] == [f"message {i}" for i in range(5)]
    timestamps = [m.timestamp for m in inbox]
    assert all(a < b for a, b in zip(timestamps, timestamps[1:]))


def test_send_to_unregistered_number(carrier_with_sims):
    carrier, _, _ = carrier_with_sims
    from selflog.msisdn import Msisdn
    with pytest.raises(UnknownMsisdn):
        carrier.send_sms(Msisdn("39", "333", "0000000"), "hello")


def test_otp_kind_is_inbox_only(carrier_with_sims):
    carrier, records, sim_ids = carrier_with_sims
    carrier.send_sms(records[1].msisdn, "Your verification code is 123456", SmsKind.OTP)
    inbox = carrier.read_inbox(sim_ids[1])
    assert inbox[-1].kind is SmsKind.OTP
    for other_sim in (sim_ids[0], sim_ids[2], sim_ids[3]):
        assert all(m.kind is not SmsKind.OTP for m in carrier.read_inbox(other_sim))


def test_unavailable_flag_rejects_incoming_calls(carrier_with_sims):
    carrier, records, _ = carrier_with_sims
    assert carrier.simulate_incoming_call(records[0].msisdn) == "delivered"
    carrier.set_unavailable(records[0].msisdn, True)
    assert carrier.simulate_incoming_call(records[0].msisdn) == "rejected"
    carrier.set_unavailable(records[0].msisdn, False)
    assert carrier.simulate_incoming_call(records[0].msisdn) == "delivered"


def test_identical_op_sequences_same_seed_identical_state():
    def build(seed):
        carrier = Carrier()
        generator = SubscriberGenerator(seed)
        sims = [carrier.register_sim(generator.generate()) for _ in range(3)]
        conn = carrier.connect(sims[0], "phone-0")
        hotspot = carrier.enable_hotspot(conn, "key")
        carrier.join_hotspot(hotspot, "key", "guest-0")
        for sim in sims:
            record = carrier.record_for_sim(sim)
            carrier.send_sms(record.msisdn, f"hello {sim}")
        return carrier.state_fingerprint()

    assert build(777) == build(777)
    assert build(777) != build(778)


def test_subscriber_generator_is_deterministic():
    first = [r.tax_code for r in SubscriberGenerator(11).batch(10)]
    second = [r.tax_code for r in SubscriberGenerator(11).batch(10)]
    assert first == second


def test_generated_birth_dates_are_valid():
    for record in SubscriberGenerator(3).batch(50):
        assert isinstance(record.birth_date, date)
        assert 1950 <= record.birth_date.year <= 2004
