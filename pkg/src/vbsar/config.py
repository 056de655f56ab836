"""Run configuration: flat key-value text files, validation, canonical hashing.

The configuration format is one `key = value` pair per line with dotted
section prefixes (for example ``radar.baseline = 0.6``). Blank lines and
``#`` comments are ignored. Unknown or duplicate keys are rejected with
the offending key name and line number. The canonical serialization
(sorted keys, 17-significant-digit floats) feeds a SHA-256 content hash
that is embedded in every output artifact so grids can be traced back to
the exact configuration that produced them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace

SOLVER_TAGS = ("nl", "fm", "dfm", "ati")


class ConfigError(ValueError):
    """Raised for unparseable, unknown, or invalid configuration input."""


@dataclass(frozen=True)
class SpectrumConfig:
    alpha: float = 0.212e-3
    peak_wavelength: float = 100.0
    enhancement: float = 10.0
    spread_exponent: float = 2.0
    wave_direction_deg: float = 0.0


@dataclass(frozen=True)
class GeometryConfig:
    grid_n: int = 128
    domain: float = 1280.0
    incidence_deg: float = 45.0
    look_azimuth_deg: float = 0.0
    gravity: float = 9.81


@dataclass(frozen=True)
class RadarSection:
    velocity: float = 120.0
    baseline: float = 0.6
    slant_range: float = 14400.0
    integration_time: float = 0.026
    coherence_time: float = 0.08
    wavelength: float = 0.032


@dataclass(frozen=True)
class NoiseConfig:
    snr_db: float = 174.0


@dataclass(frozen=True)
class SolverOptions:
    """Per-solver iteration budget and tolerances.

    ``regularization`` = 0 means automatic (the damped least-squares
    parameter defaults to the squared largest singular value).
    ``fd_step`` = 0 means automatic (square root of machine epsilon,
    scaled per coordinate); only the finite-difference solver reads it.
    """

    max_iterations: int = 50
    step_tolerance: float = 1e-8
    residual_tolerance: float = 1e-10
    regularization: float = 0.0
    fd_step: float = 0.0


@dataclass(frozen=True)
class RunSection:
    seed: int = 20260819
    parallelism: int = 1
    solvers: str = "nl,fm,ati"
    output_dir: str = "vbsar-out"


@dataclass(frozen=True)
class ForwardSection:
    # log of the integrand's Gaussian factor below which quadrature
    # contributions are dropped; exp(-36) is below double roundoff
    gaussian_cutoff_log: float = -36.0
    mass_warning_fraction: float = 1e-12


@dataclass(frozen=True)
class Config:
    spectrum: SpectrumConfig = SpectrumConfig()
    geometry: GeometryConfig = GeometryConfig()
    radar: RadarSection = RadarSection()
    noise: NoiseConfig = NoiseConfig()
    run: RunSection = RunSection()
    solver_nl: SolverOptions = SolverOptions(max_iterations=75)
    solver_fm: SolverOptions = SolverOptions(max_iterations=100)
    solver_dfm: SolverOptions = SolverOptions(max_iterations=1200)
    forward: ForwardSection = ForwardSection()

    def solver_options(self, tag: str) -> SolverOptions:
        if tag == "nl":
            return self.solver_nl
        if tag == "fm":
            return self.solver_fm
        if tag == "dfm":
            return self.solver_dfm
        raise ConfigError(f"no solver options for tag {tag!r}")

    def solver_list(self) -> list[str]:
        tags = [t.strip() for t in self.run.solvers.split(",") if t.strip()]
        for t in tags:
            if t not in SOLVER_TAGS:
                raise ConfigError(f"unknown solver tag {t!r} in run.solvers")
        return tags


# key -> (section attribute, field name). Sections group related keys so the
# text file reads top to bottom in the order physics flows through the code.
_KEY_MAP = {}
_SECTIONS = {
    "spectrum": ("spectrum", SpectrumConfig),
    "geometry": ("geometry", GeometryConfig),
    "radar": ("radar", RadarSection),
    "noise": ("noise", NoiseConfig),
    "run": ("run", RunSection),
    "solver.nl": ("solver_nl", SolverOptions),
    "solver.fm": ("solver_fm", SolverOptions),
    "solver.dfm": ("solver_dfm", SolverOptions),
    "forward": ("forward", ForwardSection),
}
for _prefix, (_attr, _cls) in _SECTIONS.items():
    for _f in fields(_cls):
        _KEY_MAP[f"{_prefix}.{_f.name}"] = (_attr, _f.name, _f.type)


def _parse_value(key: str, raw: str, typ: str, line_no: int):
    raw = raw.strip()
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(
            f"line {line_no}: value {raw!r} for key {key!r} is not a valid {typ}"
        ) from None


def _validate(cfg: Config) -> None:
    positive = [
        ("spectrum.alpha", cfg.spectrum.alpha),
        ("spectrum.peak_wavelength", cfg.spectrum.peak_wavelength),
        ("spectrum.enhancement", cfg.spectrum.enhancement),
        ("spectrum.spread_exponent", cfg.spectrum.spread_exponent),
        ("geometry.domain", cfg.geometry.domain),
        ("geometry.gravity", cfg.geometry.gravity),
        ("radar.velocity", cfg.radar.velocity),
        ("radar.baseline", cfg.radar.baseline),
        ("radar.slant_range", cfg.radar.slant_range),
        ("radar.integration_time", cfg.radar.integration_time),
        ("radar.coherence_time", cfg.radar.coherence_time),
        ("radar.wavelength", cfg.radar.wavelength),
    ]
    for key, val in positive:
        if not val > 0:
            raise ConfigError(f"key {key!r} must be positive, got {val}")
    if cfg.geometry.grid_n < 8 or cfg.geometry.grid_n % 2 != 0:
        raise ConfigError(
            f"key 'geometry.grid_n' must be an even integer >= 8, got {cfg.geometry.grid_n}"
        )
    if not 0.0 < cfg.geometry.incidence_deg < 90.0:
        raise ConfigError(
            f"key 'geometry.incidence_deg' must lie in (0, 90), got {cfg.geometry.incidence_deg}"
        )
    if cfg.run.parallelism < 1:
        raise ConfigError(
            f"key 'run.parallelism' must be >= 1, got {cfg.run.parallelism}"
        )
    cfg.solver_list()
    for tag in ("nl", "fm", "dfm"):
        opts = cfg.solver_options(tag)
        if opts.max_iterations < 1:
            raise ConfigError(
                f"key 'solver.{tag}.max_iterations' must be >= 1, got {opts.max_iterations}"
            )
        for name in ("step_tolerance", "residual_tolerance"):
            if not getattr(opts, name) > 0:
                raise ConfigError(
                    f"key 'solver.{tag}.{name}' must be positive, got {getattr(opts, name)}"
                )
        if opts.regularization < 0 or opts.fd_step < 0:
            raise ConfigError(
                f"solver.{tag}: regularization and fd_step must be >= 0 (0 = automatic)"
            )
    if cfg.forward.gaussian_cutoff_log >= 0:
        raise ConfigError(
            f"key 'forward.gaussian_cutoff_log' must be negative, got {cfg.forward.gaussian_cutoff_log}"
        )


def default_config() -> Config:
    cfg = Config()
    _validate(cfg)
    return cfg


def parse_config_text(text: str) -> Config:
    """Parse configuration text, fill defaults, validate."""
    overrides: dict[str, tuple] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _KEY_MAP:
            raise ConfigError(f"line {line_no}: unknown configuration key {key!r}")
        if key in overrides:
            raise ConfigError(
                f"line {line_no}: duplicate key {key!r} (first set on line {overrides[key][0]})"
            )
        attr, field_name, typ = _KEY_MAP[key]
        overrides[key] = (line_no, attr, field_name, _parse_value(key, raw, typ, line_no))

    cfg = Config()
    by_section: dict[str, dict] = {}
    for _line_no, attr, field_name, value in overrides.values():
        by_section.setdefault(attr, {})[field_name] = value
    for attr, kwargs in by_section.items():
        cfg = replace(cfg, **{attr: replace(getattr(cfg, attr), **kwargs)})
    _validate(cfg)
    return cfg


def load_config(path) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _format_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def config_text(cfg: Config) -> str:
    """Canonical serialization: sorted keys, lossless float formatting."""
    lines = []
    for key in sorted(_KEY_MAP):
        attr, field_name, _typ = _KEY_MAP[key]
        lines.append(f"{key} = {_format_value(getattr(getattr(cfg, attr), field_name))}")
    return "\n".join(lines) + "\n"


def save_config(cfg: Config, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config_text(cfg))


def config_hash(cfg: Config) -> bytes:
    """SHA-256 digest (32 bytes) of the result-determining configuration.

    Scheduling fields (worker pool size, output directory) cannot change a
    single output byte, so they are normalized out: the same physics run
    carries the same hash at any parallelism degree.
    """
    normalized = replace(cfg, run=replace(cfg.run, parallelism=1,
                                          output_dir=RunSection.output_dir))
    return hashlib.sha256(config_text(normalized).encode("utf-8")).digest()
