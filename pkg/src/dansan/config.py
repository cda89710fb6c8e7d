"""Scenario parameters and the flat ``key = value`` configuration format."""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Optional

CHI_CONVENTIONS = ("paper", "unit")


class ConfigError(ValueError):
    """Raised when a configuration document cannot be parsed or validated.

    ``errors`` holds one message per problem; each message starts with the
    offending key (or the line number for syntax problems).
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class SystemParams:
    """All inputs of one scenario. Powers in watts, distances in meters.

    Defaults are the reference simulation setup:
    4 antennas everywhere, unit channel variances, noise 4e-14 W, path loss
    0.1 * r**-3, Alice-Bob distance 2 km and mean Eve distances of 1 km.
    """

    n_a: int = 4
    n_b: int = 4
    n_e: int = 4
    sigma2_b: float = 4e-14
    sigma2_e: float = 4e-14
    sigma2_hab: float = 1.0
    sigma2_hae: float = 1.0
    sigma2_hbe: float = 1.0
    lambda0: float = 0.1
    kappa: float = 3.0
    gamma_b: float = 0.5
    gamma_e: float = 0.5
    beta: float = 0.6
    r_ab: float = 2000.0
    rbar_ae: float = 1000.0
    rbar_be: float = 1000.0
    chi_convention: str = "paper"
    dan_cap: Optional[float] = None

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


_INT_FIELDS = {"n_a", "n_b", "n_e"}
_STR_FIELDS = {"chi_convention"}
_OPTIONAL_FIELDS = {"dan_cap"}
FIELD_NAMES = tuple(f.name for f in dataclasses.fields(SystemParams))


def validate(p: SystemParams) -> list[str]:
    """Return every hard invariant violation of ``p``; empty means valid."""
    errors = []

    def bad(key, msg):
        errors.append(f"{key}: {msg}")

    for key, lo in (("n_a", 2), ("n_b", 2), ("n_e", 1)):
        v = getattr(p, key)
        if isinstance(v, bool) or not isinstance(v, int):
            bad(key, f"must be an integer, got {v!r}")
        elif v < lo:
            bad(key, f"must be >= {lo}, got {v}")

    positive = ("sigma2_b", "sigma2_e", "sigma2_hab", "sigma2_hae", "sigma2_hbe",
                "lambda0", "gamma_b", "gamma_e", "r_ab", "rbar_ae", "rbar_be")
    for key in positive:
        v = getattr(p, key)
        if not _is_real(v) or not math.isfinite(v) or v <= 0:
            bad(key, f"must be a finite positive number, got {v!r}")

    if not _is_real(p.kappa) or not math.isfinite(p.kappa) or p.kappa <= 0:
        bad("kappa", f"must be a finite positive number, got {p.kappa!r}")

    if not _is_real(p.beta) or not (0.0 <= p.beta < 1.0):
        bad("beta", f"must lie in [0, 1), got {p.beta!r}")

    if p.chi_convention not in CHI_CONVENTIONS:
        bad("chi_convention", f"must be one of {CHI_CONVENTIONS}, got {p.chi_convention!r}")

    if p.dan_cap is not None and (not _is_real(p.dan_cap) or not p.dan_cap >= 0):
        bad("dan_cap", f"must be >= 0 when given, got {p.dan_cap!r}")
    return errors


def soft_warnings(p: SystemParams) -> list[str]:
    """Non-fatal remarks, e.g. a path-loss exponent outside the usual 2..6."""
    out = []
    if _is_real(p.kappa) and not (2.0 <= p.kappa <= 6.0):
        out.append(f"kappa: {p.kappa} is outside the typical range [2, 6]")
    return out


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _parse_value(key: str, raw: str):
    if key in _OPTIONAL_FIELDS and raw.lower() in ("", "none"):
        return None
    if key in _STR_FIELDS:
        return raw
    if key in _INT_FIELDS:
        return int(raw)
    return float(raw)


def load_params(text: str, base: Optional[SystemParams] = None) -> SystemParams:
    """Parse a ``key = value`` document into validated :class:`SystemParams`.

    Blank lines and ``#`` comments are ignored. Keys missing from the
    document keep the value from ``base`` (the defaults when omitted).
    """
    base = base or SystemParams()
    values = {}
    errors = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in FIELD_NAMES:
            errors.append(f"{key}: unknown key (line {lineno})")
            continue
        if key in values:
            errors.append(f"{key}: duplicate key (line {lineno})")
            continue
        try:
            values[key] = _parse_value(key, raw)
        except ValueError:
            errors.append(f"{key}: cannot parse {raw!r} (line {lineno})")
    if errors:
        raise ConfigError(errors)

    params = base.replace(**values)
    errors = validate(params)
    if errors:
        raise ConfigError(errors)
    for msg in soft_warnings(params):
        warnings.warn(msg, stacklevel=2)
    return params


def render(p: SystemParams) -> str:
    """Inverse of :func:`load_params`; floats use ``repr`` so they round-trip."""
    lines = []
    for key in FIELD_NAMES:
        v = getattr(p, key)
        if v is None:
            lines.append(f"{key} = none")
        elif isinstance(v, float):
            lines.append(f"{key} = {v!r}")
        else:
            lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"
