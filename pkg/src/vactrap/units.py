"""Unit conventions and frequency parsing.

All rates and frequencies in this package are angular frequencies in rad/s.
Quantities quoted as "x 2pi MHz" convert as x * 2*pi * 1e6.

One deliberate quirk, documented here because every downstream number depends
on it: bare "kHz" trap/recoil figures (trap depth ~ 10 kHz, recoil ~ 4 kHz)
are interpreted as 1e3 rad/s, NOT 2*pi*1e3 rad/s.  With that reading the
optical design chain closes exactly: the Eq.-for-depth evaluation of the
optical parameters gives 1.02e4 rad/s ("10 kHz") and an effective decay time
of 0.176 ms ("0.18 ms").  Interpreting those bare-kHz figures as 2*pi kHz
breaks the chain.  The recoil default 4e3 rad/s keeps the quoted
recoil-to-depth ratio 4/10.

Positions are measured in units of 1/k (inverse optical wavevector), momenta
in hbar*k, so a photon recoil is a unit momentum shift and kinetic energy is
recoil_energy * p**2.
"""

import math

TWO_PI = 2.0 * math.pi

# multipliers to rad/s for each accepted unit suffix
UNIT_SUFFIXES = {
    "rad/s": 1.0,
    "krad/s": 1e3,
    "2pi.Hz": TWO_PI,
    "2pi.kHz": TWO_PI * 1e3,
    "2pi.MHz": TWO_PI * 1e6,
}


def parse_frequency(text):
    """Parse ``"<number> [unit]"`` into rad/s.

    Accepted units: rad/s (default), krad/s, 2pi.Hz, 2pi.kHz, 2pi.MHz.

    >>> parse_frequency("16 2pi.MHz") == 16 * 2 * math.pi * 1e6
    True
    >>> parse_frequency("4e3")
    4000.0
    """
    parts = text.strip().split()
    if not parts or len(parts) > 2:
        raise ValueError(f"cannot parse frequency {text!r}")
    try:
        value = float(parts[0])
    except ValueError as exc:
        raise ValueError(f"cannot parse frequency {text!r}") from exc
    if len(parts) == 1:
        return value
    try:
        return value * UNIT_SUFFIXES[parts[1]]
    except KeyError as exc:
        raise ValueError(
            f"unknown unit {parts[1]!r}; accepted: {sorted(UNIT_SUFFIXES)}"
        ) from exc


def format_frequency(value):
    """Format a rad/s value so that it reparses to the identical float."""
    return f"{value:.17g} rad/s"
