"""Named tolerances with the default ladder.

Identity-level checks sit near rounding noise (1e-10 .. 1e-8); conditions
with one horizontal derivative get 1e-7; chains with two derivative layers
(parallel-curvature residuals on non-quadratic norms, the commutation check,
the D-tensor conditions) accumulate more rounding and get 1e-5.  Every value
can be overridden by name from a run config or the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError


@dataclass(frozen=True)
class Tolerances:
    # norm axioms
    positivity: float = 1e-12
    homogeneity: float = 1e-9
    euler: float = 1e-9
    cartan_annihilation: float = 1e-9
    # connection-level identities
    metricity: float = 1e-8
    vertical_compat: float = 1e-9
    horizontal_F: float = 1e-8
    connection_homogeneity: float = 1e-8
    classification: float = 1e-7
    # curvature
    antisymmetry: float = 1e-10
    reconstruction: float = 1e-5
    flag_fit: float = 1e-6
    flag_coherence: float = 1e-6
    # symmetry ladder
    defn1: float = 1e-5
    eq1: float = 1e-7
    eq2: float = 1e-5
    eq3: float = 1e-5
    eq4: float = 1e-7

    def override(self, updates: dict) -> "Tolerances":
        known = {f.name for f in fields(self)}
        for key, value in updates.items():
            if key not in known:
                raise ConfigError(
                    f"unknown tolerance {key!r}; known: {sorted(known)}"
                )
            if not (isinstance(value, (int, float)) and value > 0):
                raise ConfigError(f"tolerance {key!r} must be a positive number")
        return replace(self, **{k: float(v) for k, v in updates.items()})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
