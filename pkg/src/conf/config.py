"""Env variables for the lab."""
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Configuration settings for the lab.

    Numeric tolerances, size caps and optimiser parameters shared by every
    service module, plus the run ledger database and the HTTP server address.
    Values are read from ``ORLICZ_*`` environment variables or a .env file.

    Attributes:
        luxemburg_rtol (float): Relative bisection tolerance of the Luxemburg norm.
        luxemburg_max_steps (int): Bisection step cap before NonConvergence.
        conjugate_rtol (float): Relative bracket width of the conjugate search.
        conjugate_t_max (float): Bracket ceiling before BracketOverflow.
        fd_relative_step (float): Central difference step for custom derivatives.
        doubling_explosion (float): Ratio above which φ is flagged not doubling.
        besov_tail_rtol (float): Tail size treated as negligible by the Besov heuristic.
        besov_growth (float): Stable tail factor that decides the Besov heuristic.
        metric_slack (float): Allowed triangle inequality defect.
        kernel_row_tol (float): Allowed deviation of kernel rows from mass one.
        cocycle_tol (float): Allowed cocycle defect.
        young_identity_tol (float): Allowed relative Young identity residual.
        max_points (int): Cap on enumerated Cayley ball points.
        max_dense_points (int): Cap on points carrying a dense distance matrix.
        max_simplices (int): Cap on enumerated tuples of a simplex set.
        dense_tuple_threshold (int): Tuples above which cochains go sparse or lazy.
        max_exhaustive_triples (int): Triples above which cocycle checks sample.
        descent_max_iter (int): Iteration cap of the descent routine.
        armijo_slope (float): Sufficient decrease factor of the line search.
        armijo_contraction (float): Backtracking contraction factor.
        descent_step_tol (float): Sup-norm of the step that stops descent.
        harmonic_tol (float): Default tolerance on the φ-Laplacian residual.
        database_url (str): SQLAlchemy URL of the run ledger.
        log_level (str): Root log level.
        artifact_version (str): Version string stamped on every report.
        app_host (str): The host address for the application (default is "localhost").
        app_port (int): The port for the application (default is 8000).

    Config:
        Load settings from a .env file and allow extra fields.
    """
    luxemburg_rtol: float = 1e-12
    luxemburg_max_steps: int = 200
    conjugate_rtol: float = 1e-10
    conjugate_t_max: float = 1e300
    fd_relative_step: float = 1e-6
    doubling_explosion: float = 1e12
    besov_tail_rtol: float = 1e-6
    besov_growth: float = 1.01
    metric_slack: float = 1e-9
    kernel_row_tol: float = 1e-12
    cocycle_tol: float = 1e-10
    young_identity_tol: float = 1e-8
    max_points: int = 200_000
    max_dense_points: int = 4_000
    max_simplices: int = 5_000_000
    dense_tuple_threshold: int = 1_000_000
    max_exhaustive_triples: int = 8_000_000
    descent_max_iter: int = 100_000
    armijo_slope: float = 1e-4
    armijo_contraction: float = 0.5
    descent_step_tol: float = 1e-9
    harmonic_tol: float = 1e-8
    database_url: str = "sqlite:///./orlicz_lab.db"
    log_level: str = "INFO"
    artifact_version: str = "0.1.0"
    app_host: str = "localhost"
    app_port: int = 8000

    class Config:
        """Pydantic configuration settings."""
        env_prefix = "ORLICZ_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "allow"


settings = Settings()
