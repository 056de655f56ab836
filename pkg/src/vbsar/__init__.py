"""Sea-surface radar imaging and radial-velocity inversion toolkit.

Synthesizes random swell surfaces from a directional wave spectrum,
computes line-of-sight orbital velocity and acceleration fields, forms
the complex along-track interferometric radar image through a
velocity-bunching integral, and recovers per-row radial velocities from
noisy images with Newton, quasi-Newton, finite-difference, and
closed-form phase estimators.
"""

__version__ = "0.1.0"

from .config import (Config, ConfigError, config_hash, default_config,
                     load_config, save_config)
from .forward import (ImagingGeometry, RowOperator, SceneRealization,
                      add_noise, simulate_image, synthesize_scene, vb_image_row)
from .gridio import GridFormatError, read_grid, write_grid
from .inverse import (InversionResult, SolverError, bfgs_solve, dfm_solve,
                      newton_solve, tikhonov_step)
from .kinematics import (LookGeometry, interferometric_velocity,
                         orbital_fields, radial_velocity_field)
from .metrics import ke_relative_error, kinetic_energy, rmse, timed
from .pipeline import PipelineResult, run_pipeline
from .spectra import (SpectralGrid, directional_spectrum_grid,
                      significant_wave_height, synthesize_surface)

__all__ = [
    "Config", "ConfigError", "config_hash", "default_config", "load_config",
    "save_config", "ImagingGeometry", "RowOperator", "SceneRealization",
    "add_noise", "simulate_image", "synthesize_scene", "vb_image_row",
    "GridFormatError", "read_grid", "write_grid", "InversionResult",
    "SolverError", "bfgs_solve", "dfm_solve", "newton_solve", "tikhonov_step",
    "LookGeometry", "interferometric_velocity", "orbital_fields",
    "radial_velocity_field", "ke_relative_error", "kinetic_energy", "rmse",
    "timed", "PipelineResult", "run_pipeline", "SpectralGrid",
    "directional_spectrum_grid", "significant_wave_height",
    "synthesize_surface", "__version__",
]
