"""Run configuration: dataclasses, sectioned key=value parser, and presets.

The config format is plain text with ``[section]`` headers and ``key = value``
lines; units are spelled out in the key names.  Unknown sections or keys are
rejected with the offending line number.  ``render_config`` writes the
canonical echo that round-trips through the parser.
"""

import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .greens import EmitterSpec, NanoparticleModel


@dataclass(frozen=True)
class PulseConfig:
    area: float = 60.0
    tau_over_t: float = 0.7
    t_ns: float = 10.0

    def __post_init__(self):
        if self.area <= 0 or self.t_ns <= 0:
            raise ValueError("pulse area and width must be positive")
        if self.tau_over_t < 0:
            raise ValueError("tau_over_t must be non-negative")


@dataclass(frozen=True)
class TruncationConfig:
    n_max: int = 40
    threshold: float = 0.002

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")


@dataclass(frozen=True)
class NumericsConfig:
    rtol: float = 1e-8
    rank_tol: float = 1e-10
    omega_window_halfwidths: float = 6.0
    omega_points: int = 1201
    span_widths: float = 3.0
    engine: str = "auto"
    model_path: str = "reduced"
    full_model_t: float = 5.0e4       # rescaled pulse width for the full path, hbar/eV
    loss_half: bool = True
    coupling_scale: float = 1.0       # overall Green-normalization scale on g_n

    def __post_init__(self):
        if self.engine not in ("auto", "split", "ivp", "expm"):
            raise ValueError(f"engine must be auto, split, ivp, or expm, got {self.engine!r}")
        if self.model_path not in ("reduced", "full"):
            raise ValueError(f"model_path must be reduced or full, got {self.model_path!r}")
        if self.rtol <= 0 or self.rank_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.full_model_t <= 0:
            raise ValueError("full_model_t must be positive")
        if self.coupling_scale <= 0:
            raise ValueError("coupling_scale must be positive")


@dataclass(frozen=True)
class ScanConfig:
    phi_min: float = 0.0
    phi_max: float = math.pi
    phi_count: int = 11
    area_min: float = 10.0
    area_max: float = 100.0
    area_count: int = 7
    mode_counts: tuple = (1, 2, 3, 25)
    distances_nm: tuple = (2.0, 7.0)

    def phi_grid(self):
        return [
            self.phi_min + (self.phi_max - self.phi_min) * i / max(self.phi_count - 1, 1)
            for i in range(self.phi_count)
        ]

    def area_grid(self):
        return [
            self.area_min + (self.area_max - self.area_min) * i / max(self.area_count - 1, 1)
            for i in range(self.area_count)
        ]


@dataclass(frozen=True)
class RunConfig:
    nanoparticle: NanoparticleModel
    emitters: tuple
    pulses: PulseConfig = field(default_factory=PulseConfig)
    truncation: TruncationConfig = field(default_factory=TruncationConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    output_dir: str = "out"

    def __post_init__(self):
        if not self.emitters:
            raise ValueError("at least one emitter is required")


_NANOPARTICLE_KEYS = {
    "radius_nm": float,
    "eps_inf": float,
    "omega_p_ev": float,
    "gamma_p_ev": float,
    "eps_background": float,
}
_EMITTER_KEYS = {
    "distance_nm": float,
    "polar_angle_rad": float,
    "dipole_debye": float,
    "omega_eg_ev": float,
    "omega_fg_ev": float,
}
_PULSE_KEYS = {"area": float, "tau_over_t": float, "t_ns": float}
_TRUNCATION_KEYS = {"n_max": int, "threshold": float}
_NUMERICS_KEYS = {
    "rtol": float,
    "rank_tol": float,
    "omega_window_halfwidths": float,
    "omega_points": int,
    "span_widths": float,
    "engine": str,
    "model_path": str,
    "full_model_t": float,
    "loss_half": bool,
    "coupling_scale": float,
}
_SCAN_KEYS = {
    "phi_min": float,
    "phi_max": float,
    "phi_count": int,
    "area_min": float,
    "area_max": float,
    "area_count": int,
    "mode_counts": "int_list",
    "distances_nm": "float_list",
}
_OUTPUT_KEYS = {"dir": str}

_SECTION_KEYS = {
    "nanoparticle": _NANOPARTICLE_KEYS,
    "pulses": _PULSE_KEYS,
    "truncation": _TRUNCATION_KEYS,
    "numerics": _NUMERICS_KEYS,
    "scan": _SCAN_KEYS,
    "output": _OUTPUT_KEYS,
}


def parse_config(text: str) -> RunConfig:
    """Parse sectioned key=value text into a validated RunConfig."""
    sections, emitter_sections = _split_sections(text)

    if "nanoparticle" not in sections:
        raise ConfigError("missing [nanoparticle] section")
    if not emitter_sections:
        raise ConfigError("at least one [emitter.N] section is required")
    if "radius_nm" not in sections["nanoparticle"]:
        raise ConfigError("nanoparticle.radius_nm is required")

    try:
        nanoparticle = NanoparticleModel(**sections["nanoparticle"])
        emitters = []
        for index in sorted(emitter_sections):
            body = emitter_sections[index]
            if "distance_nm" not in body:
                raise ConfigError(f"emitter.{index}.distance_nm is required")
            emitters.append(EmitterSpec(**body))
        pulses = PulseConfig(**sections.get("pulses", {}))
        truncation = TruncationConfig(**sections.get("truncation", {}))
        numerics = NumericsConfig(**sections.get("numerics", {}))
        scan = ScanConfig(**sections.get("scan", {}))
        output_dir = sections.get("output", {}).get("dir", "out")
        return RunConfig(
            nanoparticle=nanoparticle,
            emitters=tuple(emitters),
            pulses=pulses,
            truncation=truncation,
            numerics=numerics,
            scan=scan,
            output_dir=output_dir,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _split_sections(text):
    sections = {}
    emitter_sections = {}
    current = None
    current_name = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name.startswith("emitter."):
                suffix = name.split(".", 1)[1]
                if not suffix.isdigit():
                    raise ConfigError(f"bad emitter section [{name}]", line=lineno)
                index = int(suffix)
                if index in emitter_sections:
                    raise ConfigError(f"duplicate section [{name}]", line=lineno)
                current = emitter_sections.setdefault(index, {})
                current_name = "emitter"
            elif name in _SECTION_KEYS:
                if name in sections:
                    raise ConfigError(f"duplicate section [{name}]", line=lineno)
                current = sections.setdefault(name, {})
                current_name = name
            else:
                raise ConfigError(f"unknown section [{name}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", line=lineno)
        if current is None:
            raise ConfigError("key outside of any section", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        schema = _EMITTER_KEYS if current_name == "emitter" else _SECTION_KEYS[current_name]
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in section [{current_name}]", line=lineno)
        if key in current:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        current[key] = _convert(value, schema[key], key, lineno)
    return sections, emitter_sections


def _convert(value, kind, key, lineno):
    try:
        if kind is float:
            return float(value)
        if kind is int:
            out = int(value)
            return out
        if kind is bool:
            lowered = value.lower()
            if lowered in ("true", "yes", "1"):
                return True
            if lowered in ("false", "no", "0"):
                return False
            raise ValueError(f"expected boolean, got {value!r}")
        if kind == "int_list":
            return tuple(int(item.strip()) for item in value.split(",") if item.strip())
        if kind == "float_list":
            return tuple(float(item.strip()) for item in value.split(",") if item.strip())
        return value
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno) from exc


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def render_config(config: RunConfig) -> str:
    """Canonical text form of a config; parses back to an equal RunConfig."""
    np_ = config.nanoparticle
    lines = ["[nanoparticle]"]
    for key in _NANOPARTICLE_KEYS:
        lines.append(f"{key} = {_fmt(getattr(np_, key))}")
    for i, emitter in enumerate(config.emitters, start=1):
        lines.append("")
        lines.append(f"[emitter.{i}]")
        for key in _EMITTER_KEYS:
            lines.append(f"{key} = {_fmt(getattr(emitter, key))}")
    for section, keys, obj in (
        ("pulses", _PULSE_KEYS, config.pulses),
        ("truncation", _TRUNCATION_KEYS, config.truncation),
        ("numerics", _NUMERICS_KEYS, config.numerics),
        ("scan", _SCAN_KEYS, config.scan),
    ):
        lines.append("")
        lines.append(f"[{section}]")
        for key in keys:
            lines.append(f"{key} = {_fmt(getattr(obj, key))}")
    lines.append("")
    lines.append("[output]")
    lines.append(f"dir = {config.output_dir}")
    lines.append("")
    return "\n".join(lines)


def with_phi(config: RunConfig, phi: float) -> RunConfig:
    """Copy of the config with the second emitter moved to angle phi."""
    if len(config.emitters) < 2:
        raise ValueError("need two emitters to set an angular separation")
    emitters = list(config.emitters)
    emitters[1] = replace(emitters[1], polar_angle_rad=phi)
    return replace(config, emitters=tuple(emitters))


def with_distances(config: RunConfig, distance_nm: float) -> RunConfig:
    """Copy of the config with every emitter moved to the given surface distance."""
    emitters = tuple(replace(e, distance_nm=distance_nm) for e in config.emitters)
    return replace(config, emitters=emitters)
