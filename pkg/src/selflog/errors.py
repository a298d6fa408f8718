"""Exception hierarchy shared across the testbed."""


class SelflogError(Exception):
    """Base class for all testbed errors."""


# --- carrier layer ---

class DuplicateMsisdn(SelflogError):
    """A SIM with this MSISDN is already registered."""


class ConstructionError(SelflogError):
    """A subscriber record violates its internal consistency rules."""


class UnknownSim(SelflogError):
    """No SIM registered under this id."""


class SimInUse(SelflogError):
    """The SIM already holds a live mobile-data connection."""


class UnknownConnection(SelflogError):
    """No live connection with this id."""


class UnknownMsisdn(SelflogError):
    """No registered subscriber owns this number."""


class WrongKey(SelflogError):
    """Hotspot join attempted with a non-matching key."""


class HostNotMobile(SelflogError):
    """Hotspot can only be enabled on a mobile-data connection."""


class MalformedNumber(SelflogError):
    """Text does not parse as a phone number."""


class UnknownCountryCode(SelflogError):
    """No country-code table entry matches the number prefix."""


# --- operator layer ---

class UnknownField(SelflogError):
    """Field name outside the passive-data vocabulary."""


class InvalidSession(SelflogError):
    """Session or cookie token not recognised by the operator."""


class InsufficientCredit(SelflogError):
    """Transfer amount exceeds the sender's balance."""


class UnknownRecipient(SelflogError):
    """Transfer recipient is not a customer of this operator."""


class TooShort(SelflogError):
    """Number too short to obfuscate."""


class ProfileError(SelflogError):
    """Operator profile file is missing fields or breaks an invariant."""


# --- countermeasure layer ---

class ExpiredOtp(SelflogError):
    """One-time code echoed back after its validity window."""


class ReplayedCaptcha(SelflogError):
    """Captcha token presented a second time."""


class IncompleteTraces(SelflogError):
    """Rating requested without full capability-lattice coverage."""


# --- attacker layer ---

class UntransliterableName(SelflogError):
    """Name has no A-Z representation after transliteration."""


class InvalidDate(SelflogError):
    """Birth date outside the calendar."""


class CapabilityError(SelflogError):
    """Attack surface access attempted without the required capability."""


# --- harness layer ---

class ConfigError(SelflogError):
    """Scenario configuration is invalid."""


class GoldenFormatError(SelflogError):
    """Golden file does not parse or misses required keys."""
