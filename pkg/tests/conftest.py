"""Shared fixtures: shipped profiles and small deterministic worlds."""

from __future__ import annotations

import pytest

from selflog.profiles import load_shipped_profiles
from selflog.world import World


@pytest.fixture(scope="session")
def shipped_profiles():
    return load_shipped_profiles()


@pytest.fixture()
def small_world(shipped_profiles):
    return World(42, shipped_profiles, subscribers_per_operator=5)


def make_world(seed, profiles, subscribers=4, variant="table"):
    return World(seed, profiles, subscribers_per_operator=subscribers,
                 activate_services_variant=variant)
