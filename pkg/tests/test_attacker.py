"""Attack vectors: enumeration, capability gating, derivation, sealed surface."""

from __future__ import annotations

import random

import pytest

from selflog.attacker import (
    NO_CAPABILITIES,
    AttackerCapabilities,
    infer_sex_from_name,
    mo4_cookie_attack,
    plan_attack,
    run_app_attack,
    run_hotspot_attack,
)
from selflog.carrier import SmsKind
from selflog.errors import CapabilityError
from selflog.profiles import load_packaged_profile
from selflog.world import World

from conftest import make_world

MO1_EXPECTED_FIELDS = frozenset({
    "name", "surname", "msisdn", "birth_date", "birth_place", "address",
    "pin", "puk", "active_offers", "credit", "calls", "sms_senders",
})


# --- planning -------------------------------------------------------------------


def test_plan_is_deterministic(shipped_profiles):
    for profile in shipped_profiles:
        assert plan_attack(profile) == plan_attack(profile)


def test_mo4_plan_begins_with_landing_then_auth(shipped_profiles):
    plan = plan_attack(load_packaged_profile("mo4"))
    assert plan[0].route == "personal-data"
    assert plan[1].route == "auth"
    assert plan[2].step == "field"


def test_mo6_plan_is_empty():
    assert plan_attack(load_packaged_profile("mo6_mo7")) == []


def test_plan_enumerates_every_field_and_op(shipped_profiles):
    plan = plan_attack(load_packaged_profile("mo1"))
    assert sum(1 for s in plan if s.step == "field") == 14
    assert sum(1 for s in plan if s.step == "op") == 6


def test_mo5_plan_tags_endpoint_groups():
    plan = plan_attack(load_packaged_profile("mo5"))
    groups = {step.target: step.group for step in plan if step.step == "field"}
    assert groups["puk"] == "app_api"
    assert groups["msisdn"] == "browser"


def test_mo2_plan_uses_post():
    plan = plan_attack(load_packaged_profile("mo2"))
    assert all(step.method == "POST" for step in plan if step.step == "field")


# --- app vector -----------------------------------------------------------------


def test_app_attack_mo1_harvests_expected_fields(small_world):
    harvest = run_app_attack(small_world, small_world.operator("MO1"), NO_CAPABILITIES)
    assert harvest.field_set() == MO1_EXPECTED_FIELDS
    assert harvest.obfuscated == {"calls", "sms_senders"}
    assert "tax_code" in harvest.derived


def test_app_attack_mo6_harvests_nothing(small_world):
    harvest = run_app_attack(small_world, small_world.operator("MO6"), NO_CAPABILITIES)
    assert not harvest.fields_obtained
    assert harvest.trace, "the denial itself must be logged"
    assert harvest.auth_ref == harvest.trace[0].trace_id


def test_harvest_values_match_ground_truth(small_world):
    victim = small_world.victim_record("MO2")
    harvest = run_app_attack(small_world, small_world.operator("MO2"), NO_CAPABILITIES)
    assert harvest.fields_obtained["name"] == victim.name
    assert harvest.fields_obtained["tax_code"] == victim.tax_code
    assert harvest.fields_obtained["credit"] == victim.credit
    assert harvest.fields_obtained["msisdn"] == victim.msisdn.render()


def test_every_obtained_field_is_backed_by_a_trace_entry(small_world):
    harvest = run_app_attack(small_world, small_world.operator("MO1"), NO_CAPABILITIES)
    trace_ids = {entry.trace_id for entry in harvest.trace}
    for field_name in harvest.fields_obtained:
        assert harvest.field_refs[field_name] in trace_ids


def test_header_guard_blocks_without_spoofing(shipped_profiles):
    world = make_world("hdr", shipped_profiles)
    endpoint = world.guarded("MO2", [{"kind": "header_control",
                                      "user_agent": "OperatorApp/2.4"}])
    blocked = run_app_attack(world, endpoint, NO_CAPABILITIES)
    assert not blocked.fields_obtained
    spoofing = run_app_attack(world, endpoint,
                              AttackerCapabilities(spoof_headers=True))
    assert spoofing.field_set() == run_app_attack(
        world, world.operator("MO2"), NO_CAPABILITIES).field_set()


def test_certificate_guard_defeated_only_from_the_app(shipped_profiles):
    world = make_world("cert", shipped_profiles)
    endpoint = world.guarded("MO2", ["in_app_certificate"])
    caps = AttackerCapabilities(extract_certificate=True, knows_hotspot_key=True)
    from_app = run_app_attack(world, endpoint, caps)
    assert from_app.fields_obtained
    from_hotspot = run_hotspot_attack(world, endpoint, caps)
    assert not from_hotspot.fields_obtained


def test_sms_guard_defeated_with_read_permission_on_both_vectors(shipped_profiles):
    world = make_world("sms", shipped_profiles)
    endpoint = world.guarded("MO2", ["sms_authentication"])
    denied = run_app_attack(world, endpoint, NO_CAPABILITIES)
    assert not denied.fields_obtained
    caps = AttackerCapabilities(read_sms=True, knows_hotspot_key=True)
    assert run_app_attack(world, endpoint, caps).fields_obtained
    assert run_hotspot_attack(world, endpoint, caps).fields_obtained


def test_password_guard_never_defeated(shipped_profiles):
    world = make_world("pw", shipped_profiles)
    endpoint = world.guarded("MO2", ["password_authentication"])
    caps = AttackerCapabilities(spoof_headers=True, extract_certificate=True,
                                read_sms=True, human_in_loop=True,
                                knows_hotspot_key=True)
    assert not run_app_attack(world, endpoint, caps).fields_obtained
    assert not run_hotspot_attack(world, endpoint, caps).fields_obtained


# --- hotspot vector ---------------------------------------------------------------


def test_hotspot_attack_mo3_equals_app_vector(shipped_profiles):
    world = make_world("hot", shipped_profiles)
    app = run_app_attack(world, world.operator("MO3"), NO_CAPABILITIES)
    hotspot = run_hotspot_attack(world, world.operator("MO3"),
                                 AttackerCapabilities(knows_hotspot_key=True))
    assert hotspot.field_set() == app.field_set()


def test_hotspot_wrong_key_yields_empty_harvest_with_trace(small_world):
    harvest = run_hotspot_attack(small_world, small_world.operator("MO3"),
                                 NO_CAPABILITIES)
    assert not harvest.fields_obtained
    assert harvest.trace[0].note == "hotspot join failed: wrong key"


def test_captcha_defeated_by_human_on_hotspot(shipped_profiles):
    world = make_world("cap", shipped_profiles)
    endpoint = world.guarded("MO5", ["captcha"])
    human = AttackerCapabilities(human_in_loop=True, knows_hotspot_key=True)
    harvest = run_hotspot_attack(world, endpoint, human)
    assert harvest.field_set() == {"msisdn", "active_offers", "credit", "puk"}


def test_captcha_blocks_automation_everywhere(shipped_profiles):
    world = make_world("cap2", shipped_profiles)
    endpoint = world.guarded("MO5", ["captcha"])
    bot = AttackerCapabilities(knows_hotspot_key=True)
    assert not run_hotspot_attack(world, endpoint, bot).fields_obtained
    assert not run_app_attack(world, endpoint, bot).fields_obtained
    # a human helper is useless to an on-device app
    app_human = AttackerCapabilities(human_in_loop=True)
    assert not run_app_attack(world, endpoint, app_human).fields_obtained


# --- MO4 cookie attack ---------------------------------------------------------------


def test_mo4_cookie_attack_full_flow(shipped_profiles):
    world = make_world("mo4", shipped_profiles)
    cookie, harvest = mo4_cookie_attack(world)
    assert cookie
    assert harvest.trace[0].route == "personal-data"
    assert harvest.trace[0].status == "redirect"
    assert harvest.trace[1].route == "auth"
    assert harvest.trace[1].status == "ok"
    assert harvest.field_set() == {"name", "surname", "msisdn", "address",
                                   "active_offers", "credit", "puk", "calls",
                                   "sms_senders", "voicemail"}
    assert harvest.notified == {"puk"}


def test_mo4_puk_notification_lands_in_victim_inbox(shipped_profiles):
    world = make_world("mo4b", shipped_profiles)
    mo4_cookie_attack(world)
    inbox = world.carrier.read_inbox(world.victim_sim("MO4"))
    notices = [m for m in inbox if m.kind is SmsKind.OWNER_NOTIFICATION]
    assert len(notices) == 1
    assert "PUK" in notices[0].body


def test_mo4_skipping_handshake_yields_redirects_only(small_world):
    from selflog.transport import Request, Status
    service = small_world.operator("MO4")
    conn = small_world.victim_connection("MO4")
    for route in ("personal-data", "personal-data/name", "sim/puk", "history/calls"):
        response = service.handle(Request(route=route,
                                          connection_id=conn.connection_id))
        assert response.status is Status.REDIRECT
        assert set(response.body) == {"location"}


# --- derivation --------------------------------------------------------------------


def test_sex_inference_from_corpora_names():
    assert infer_sex_from_name("MARIO") == "M"
    assert infer_sex_from_name("Giulia") == "F"
    assert infer_sex_from_name("XYZZY") is None


def test_derivation_soundness_across_seeds(shipped_profiles):
    for seed in range(8):
        world = make_world(f"derive:{seed}", shipped_profiles)
        victim = world.victim_record("MO1")
        harvest = run_app_attack(world, world.operator("MO1"), NO_CAPABILITIES)
        assert harvest.derived["tax_code"] == victim.tax_code


def test_no_derivation_without_all_inputs(shipped_profiles):
    world = make_world("noderive", shipped_profiles)
    harvest = run_app_attack(world, world.operator("MO4"), NO_CAPABILITIES)
    assert "tax_code" not in harvest.derived, "MO4 withholds birth data"
    mo5 = run_app_attack(world, world.operator("MO5"), NO_CAPABILITIES)
    assert "tax_code" not in mo5.derived


def test_direct_exposure_skips_derivation(small_world):
    harvest = run_app_attack(small_world, small_world.operator("MO2"), NO_CAPABILITIES)
    assert "tax_code" in harvest.fields_obtained
    assert "tax_code" not in harvest.derived


# --- capability monotonicity ----------------------------------------------------------


def _subset_pairs(rng, count):
    flags = ("spoof_headers", "extract_certificate", "read_sms", "human_in_loop")
    for _ in range(count):
        small = {f: rng.random() < 0.4 for f in flags}
        large = {f: small[f] or rng.random() < 0.5 for f in flags}
        yield (AttackerCapabilities(**small, knows_hotspot_key=True),
               AttackerCapabilities(**large, knows_hotspot_key=True))


def test_capability_monotonicity(shipped_profiles):
    rng = random.Random(606)
    stacks = ([], ["header_control"], ["sms_authentication"], ["captcha"])
    for index, (small, large) in enumerate(_subset_pairs(rng, 12)):
        stack = stacks[index % len(stacks)]
        operator = ("MO1", "MO2", "MO5")[index % 3]
        vector = ("app", "hotspot")[index % 2]
        attack = run_app_attack if vector == "app" else run_hotspot_attack
        world_a = make_world(f"mono:{index}", shipped_profiles)
        world_b = make_world(f"mono:{index}", shipped_profiles)
        smaller = attack(world_a, world_a.guarded(operator, stack), small)
        larger = attack(world_b, world_b.guarded(operator, stack), large)
        assert smaller.field_set() <= larger.field_set()


# --- sealed surface -------------------------------------------------------------------


def test_surface_public_api_is_a_closed_whitelist(small_world):
    surface = small_world.attack_surface("MO1", NO_CAPABILITIES, "app")
    public = {name for name in dir(surface) if not name.startswith("_")}
    assert public == {"capabilities", "vector", "profile", "mule_msisdn", "send",
                      "user_agent", "can_sign", "sign", "read_victim_inbox",
                      "solve_captcha"}


def test_surface_rejects_inbox_access_without_permission(small_world):
    surface = small_world.attack_surface("MO1", NO_CAPABILITIES, "app")
    with pytest.raises(CapabilityError):
        surface.read_victim_inbox()


def test_surface_rejects_captcha_solving_without_human(small_world):
    surface = small_world.attack_surface(
        "MO5", AttackerCapabilities(knows_hotspot_key=True), "hotspot")
    with pytest.raises(CapabilityError):
        surface.solve_captcha("cap-whatever")


def test_surface_rejects_signing_off_device(small_world):
    surface = small_world.attack_surface(
        "MO2", AttackerCapabilities(extract_certificate=True, knows_hotspot_key=True),
        "hotspot")
    with pytest.raises(CapabilityError):
        surface.sign("GET", "sim/credit", {})


def test_surface_has_no_expandable_state(small_world):
    surface = small_world.attack_surface("MO1", NO_CAPABILITIES, "app")
    with pytest.raises(AttributeError):
        surface.world = "smuggled"
