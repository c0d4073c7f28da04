from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    app_env: str = Field(default="dev", alias="APP_ENV")

    # Уровень логирования задается переменной QRV_LOG
    log_level: str = Field(default="WARNING", alias="QRV_LOG")
    # Отдельный файл для строк SOLVER_CALL; пустая строка отключает запись в файл
    solver_log_file: str = Field(default="solver_usage.log", alias="QRV_SOLVER_LOG")

    # Допуски
    psd_tol: float = Field(default=1e-9, gt=0, alias="QRV_PSD_TOL")
    lp_tol: float = Field(default=1e-8, gt=0, alias="QRV_LP_TOL")
    sdp_tol: float = Field(default=1e-6, gt=0, alias="QRV_SDP_TOL")

    sdp_solver: str = Field(default="CLARABEL", alias="QRV_SDP_SOLVER")
    eigensolver: str = Field(default="lapack", alias="QRV_EIGENSOLVER")

    seed: int = Field(default=42, alias="QRV_SEED")

    # Ограничение на перебор k-подмножеств в точных проверках ≺_T / ≺_S
    subset_cap: int = Field(default=12, ge=1, alias="QRV_SUBSET_CAP")
    state_samples: int = Field(default=10_000, ge=0, alias="QRV_STATE_SAMPLES")
    t_samples: int = Field(default=10_000, ge=0, alias="QRV_T_SAMPLES")
    separation_trials: int = Field(default=50, ge=0, alias="QRV_SEPARATION_TRIALS")

    debug_dump: bool = Field(default=False, alias="QRV_DEBUG_DUMP")

    PROJECT_NAME: str = "qrv-majorization"

    model_config = SettingsConfigDict(
        env_file=(".env.local", ".env"),
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(_cls, v: str) -> str:
        """Допускаются только стандартные имена уровней logging."""
        level = v.strip().upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Неизвестный уровень логирования: {v}")
        return level

    @field_validator("eigensolver")
    @classmethod
    def validate_eigensolver(_cls, v: str) -> str:
        if v not in ("lapack", "jacobi"):
            raise ValueError("eigensolver должен быть 'lapack' или 'jacobi'")
        return v


settings = Settings()
