"""
Application settings and numerical defaults

Uses pydantic-settings for type-safe configuration via environment variables.
All settings use SOBOLEVLAB_ prefix (e.g., SOBOLEVLAB_GRID_N=4096).

Settings can also be loaded from a .env file in the project root. Values set
here are defaults only: a run configuration file or explicit CLI flags take
precedence for a single run.
"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppSettings(BaseSettings):
    """
    Application configuration via environment variables.

    Environment variables use SOBOLEVLAB_ prefix.

    Examples:
        SOBOLEVLAB_GRID_N=4096
        SOBOLEVLAB_STRICT_MODE=true
        SOBOLEVLAB_TOUCHES_TOLERANCE=1e-5
    """

    model_config = SettingsConfigDict(
        env_prefix="SOBOLEVLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # Radial discretization
    grid_n: int = Field(
        default=2048,
        ge=16,
        multiple_of=2,
        description="Number of radial grid intervals (even, >= 16)",
    )

    euclidean_r_max: float = Field(
        default=1.0e4,
        description="Outer radius of Euclidean model grids",
    )

    a0_r_cut: float = Field(
        default=200.0,
        description=(
            "Truncation radius for the bubble quotient; the remainder is "
            "added as an analytic tail series"
        ),
    )

    # Direction sphere
    lattice_circle: int = Field(
        default=4096,
        description="Uniform angular lattice size on the unit circle (k=2)",
    )

    lattice_sphere: int = Field(
        default=20000,
        description="Fibonacci lattice size on the unit 2-sphere (k=3)",
    )

    lattice_high: int = Field(
        default=100000,
        description="Quasi-random direction count for k >= 4",
    )

    maximizer_tolerance: float = Field(
        default=1.0e-6,
        description="Relative membership band of the maximizer set",
    )

    # Smoothing
    smoothing_start_width: float = Field(
        default=0.5,
        description="Initial mollifier width on the direction sphere (rad)",
    )

    smoothing_circle_samples: int = Field(
        default=16384,
        description="Sample count of the circle used by the mollifier",
    )

    # Constants and classification
    touches_tolerance: float = Field(
        default=1.0e-4,
        description="Relative tolerance of the TouchesWithin verdict",
    )

    # Solver
    solver_max_iters: int = Field(
        default=400,
        description="Iteration cap for constrained descent",
    )

    solver_el_tol: float = Field(
        default=1.0e-7,
        description="Euler-Lagrange residual tolerance",
    )

    solver_step: float = Field(
        default=1.0,
        description="Initial descent step (preconditioned units)",
    )

    # Concentration diagnostics
    delta_ladder: list[float] = Field(
        default=[0.05, 0.1, 0.2, 0.4, 0.8],
        description="Ball radii used by mass profiles",
    )

    asymptotic_ratio: float = Field(
        default=4.0,
        description=(
            "Minimum ratio delta / concentration scale for a ball to enter "
            "the atom extrapolation"
        ),
    )

    beta_sweep_points: int = Field(
        default=40,
        description="Number of members in the default extremal beta sweep",
    )

    # Reporting
    report_digits: int = Field(
        default=12,
        description="Significant digits of floats in emitted reports",
    )

    strict_mode: bool = Field(
        default=False,
        description="Strict mode: treat solver non-convergence as an error",
    )


# Singleton instance - import this in your code
appsettings = AppSettings()
