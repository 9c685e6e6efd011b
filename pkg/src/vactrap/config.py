"""Plain-text run configuration.

INI-style ``key = value`` lines in four sections: [atom], [cavity], [laser],
[numerics].  Frequencies accept unit suffixes (rad/s, krad/s, 2pi.Hz,
2pi.kHz, 2pi.MHz); bare numbers are rad/s.  Resolution order: preset
defaults, then a config file, then ``--set section.key=value`` overrides.
The resolved configuration is emitted back in canonical form that reparses
to identical floats.
"""

import configparser
import io
from dataclasses import dataclass, fields

from .errors import ConfigError
from .params import ModeProfile, PhysicalParams, get_preset
from .units import format_frequency, parse_frequency

__all__ = ["Numerics", "RunSetup", "resolve", "emit_resolved"]

FREQ_KEYS = {
    ("atom", "gamma"), ("atom", "recoil_energy"),
    ("cavity", "g0"), ("cavity", "kappa"),
    ("laser", "omega"), ("laser", "delta"),
}


@dataclass
class Numerics:
    n: int = 4096
    half_extent: float | None = None   # default 4 * cavity_width
    dt: float | None = None            # default 0.04 / |delta|
    seed: int = 1
    t_max: float = 3e-3
    trajectories: int = 20
    sample_interval: int = 1000
    absorb: bool = False
    criterion_length: float | None = None  # default 10 wavelengths = 20 pi
    workers: int = 0                   # 0 = auto


@dataclass
class RunSetup:
    params: PhysicalParams
    numerics: Numerics
    preset: str = "optical"

    def resolved_half_extent(self):
        if self.numerics.half_extent is not None:
            return self.numerics.half_extent
        return 4.0 * self.params.cavity_width

    def resolved_dt(self):
        if self.numerics.dt is not None:
            return self.numerics.dt
        return 0.04 / abs(self.params.delta)

    def resolved_criterion_length(self):
        if self.numerics.criterion_length is not None:
            return self.numerics.criterion_length
        import math
        return 20.0 * math.pi


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


_NUMERICS_PARSERS = {
    "n": int,
    "half_extent": float,
    "dt": float,
    "seed": int,
    "t_max": float,
    "trajectories": int,
    "sample_interval": int,
    "absorb": _parse_bool,
    "criterion_length": float,
    "workers": int,
}


def _read_ini(text):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config syntax: {exc}") from exc
    return cp


def _apply_kv(pdict, num, section, key, value):
    sec = section.lower()
    key = key.lower()
    if sec == "numerics":
        if key not in _NUMERICS_PARSERS:
            raise ConfigError(f"unknown numerics key {key!r}")
        try:
            setattr(num, key, _NUMERICS_PARSERS[key](value))
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"bad value for numerics.{key}: {value!r}") from exc
        return
    if sec not in ("atom", "cavity", "laser"):
        raise ConfigError(f"unknown config section {section!r}")
    if (sec, key) in FREQ_KEYS:
        try:
            pdict[key] = parse_frequency(value)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    elif (sec, key) == ("cavity", "width"):
        pdict["cavity_width"] = float(value)
    elif (sec, key) == ("cavity", "mode_profile"):
        try:
            pdict["mode_profile"] = ModeProfile(value.strip().lower())
        except ValueError as exc:
            raise ConfigError(f"unknown mode_profile {value!r}") from exc
    else:
        raise ConfigError(f"unknown config key {section}.{key}")


def resolve(preset="optical", config_text=None, overrides=()):
    """Build a RunSetup from preset defaults, a config file, and overrides.

    ``overrides`` are "section.key=value" strings (last one wins).
    """
    try:
        base = get_preset(preset)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    pdict = {f.name: getattr(base.params, f.name)
             for f in fields(PhysicalParams)}
    num = Numerics()

    if config_text is not None:
        cp = _read_ini(config_text)
        for section in cp.sections():
            for key, value in cp.items(section):
                _apply_kv(pdict, num, section, key, value)

    for ov in overrides:
        if "=" not in ov or "." not in ov.split("=", 1)[0]:
            raise ConfigError(
                f"override {ov!r} must look like section.key=value")
        target, value = ov.split("=", 1)
        section, key = target.split(".", 1)
        _apply_kv(pdict, num, section.strip(), key.strip(), value.strip())

    try:
        params = PhysicalParams(**pdict)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunSetup(params=params, numerics=num, preset=preset)


def emit_resolved(setup):
    """Canonical config text for a RunSetup (reparses to identical values)."""
    p = setup.params
    num = setup.numerics
    out = io.StringIO()
    out.write("[atom]\n")
    out.write(f"gamma = {format_frequency(p.gamma)}\n")
    out.write(f"recoil_energy = {format_frequency(p.recoil_energy)}\n\n")
    out.write("[cavity]\n")
    out.write(f"g0 = {format_frequency(p.g0)}\n")
    out.write(f"kappa = {format_frequency(p.kappa)}\n")
    out.write(f"width = {p.cavity_width:.17g}\n")
    out.write(f"mode_profile = {p.mode_profile.value}\n\n")
    out.write("[laser]\n")
    out.write(f"omega = {format_frequency(p.omega)}\n")
    out.write(f"delta = {format_frequency(p.delta)}\n\n")
    out.write("[numerics]\n")
    out.write(f"n = {num.n}\n")
    out.write(f"half_extent = {setup.resolved_half_extent():.17g}\n")
    out.write(f"dt = {setup.resolved_dt():.17g}\n")
    out.write(f"seed = {num.seed}\n")
    out.write(f"t_max = {num.t_max:.17g}\n")
    out.write(f"trajectories = {num.trajectories}\n")
    out.write(f"sample_interval = {num.sample_interval}\n")
    out.write(f"absorb = {'true' if num.absorb else 'false'}\n")
    out.write(f"criterion_length = {setup.resolved_criterion_length():.17g}\n")
    out.write(f"workers = {num.workers}\n")
    return out.getvalue()
