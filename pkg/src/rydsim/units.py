"""Unit conventions shared across the package.

All internal quantities are stored in angular frequency units (rad/us,
i.e. 2*pi times a frequency in MHz), lengths in micrometres, times in
microseconds and electric fields in V/cm.  Configuration and data files
quote plain MHz; conversion happens at load time.
"""

import math

TWO_PI = 2.0 * math.pi

# Speed of light in um/us.
C_LIGHT = 2.99792458e8


def from_mhz(value_mhz: float) -> float:
    """Convert a plain frequency in MHz to angular units (rad/us)."""
    return TWO_PI * value_mhz


def to_mhz(value_angular: float) -> float:
    """Convert an angular frequency (rad/us) back to plain MHz."""
    return value_angular / TWO_PI
