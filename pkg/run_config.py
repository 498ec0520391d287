"""
Run Config - key = value 실행 설정
pydantic 모델로 검증 (알 수 없는 키는 에러), 기본값은 기준표 냉동기 구성
"""
import hashlib
import json
import logging
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config import Config
from gaussian_core import TeleportError
from microwave_circuit import AdcConfig, AmplifierChain, CircuitBudget, CircuitSetup, GainConfig
from freespace_channel import BathParams
from teleport_protocol import HomodyneConfig, InputSpec, ResourceSpec

logger = logging.getLogger('teleport.config')

# g_J 와 r_J 를 둘 다 줄 때 허용하는 상대 오차 (기준표의 r_J = 2.30 은 반올림 값)
GAIN_CONSISTENCY = 1e-2


class ConfigError(TeleportError):
    """알 수 없는 키, 해석 불가 값, 범위 밖 값"""


def parse_grid(value) -> List[float]:
    """
    '0,0.5,1' 목록 또는 'start:stop:count' (양 끝 포함) 을 float 리스트로

    >>> parse_grid("0:1:3")
    [0.0, 0.5, 1.0]
    """
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, (int, float)):
        return [float(value)]
    text = str(value).strip()
    if not text:
        raise ValueError("grid must not be empty")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range grid must be start:stop:count, got '{text}'")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError(f"grid count must be >= 1, got {count}")
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(v) for v in text.split(",") if v.strip()]


class RunConfig(BaseModel):
    """실행 설정 (기준표 냉동기 기본값)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    # 손실 단계
    epsilon: float = Field(0.95, description="T1 stage transfer efficiency")
    eta: float = Field(0.90, description="T2 stage transfer efficiency (fridge link / free space)")
    kappa: float = Field(0.65, description="T3 stage transfer efficiency")
    nu: float = Field(0.75, description="T4 stage transfer efficiency")
    T1: float = 0.040
    T2: float = 4.0
    T3: float = 4.0
    T4: float = 0.100

    # 증폭
    gJ: float = 1e2
    rJ: Optional[float] = None
    gH: float = 1e4
    chain: AmplifierChain = AmplifierChain.HEMT
    hemt_added_photons: float = 0.0

    # ADC / LO
    omega_hz: float = 5e9
    omega_is_angular: bool = False
    bandwidth_hz: float = 420e3
    resistance_ohm: float = 50.0
    lo_amplitude: float = 1e6

    # Λ 결정
    lambda_value: Optional[float] = None
    lambda_mode: str = "coupler"
    tau_rule: str = "half"

    # 자원 / 입력
    r: float = 1.32
    n: float = 0.0
    y: float = 0.0
    x_in: float = 0.0
    p_in: float = 0.0
    input_orientation: str = "standard"

    # 실행
    shots: int = 1000
    seed: int = Field(default_factory=lambda: Config.DEFAULT_SEED, ge=0)
    deterministic: bool = False
    workers: int = Field(default_factory=lambda: Config.SWEEP_WORKERS)
    output_path: Optional[str] = None

    # 스윕 격자
    sweep_y: List[float] = [0.0]
    sweep_r: List[float] = Field(default_factory=lambda: parse_grid("0:3:31"))
    sweep_eta: List[float] = [1.0, 0.9, 0.5]
    sweep_N: List[float] = [0.0]

    @field_validator('epsilon', 'eta', 'kappa', 'nu')
    @classmethod
    def validate_efficiency(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {v}")
        return v

    @field_validator('T1', 'T2', 'T3', 'T4', 'n', 'hemt_added_photons')
    @classmethod
    def validate_nonnegative(cls, v):
        if not v >= 0:
            raise ValueError(f"must be >= 0, got {v}")
        return v

    @field_validator('gJ', 'gH')
    @classmethod
    def validate_gain(cls, v):
        if v < 1:
            raise ValueError(f"gain must be >= 1, got {v}")
        return v

    @field_validator('omega_hz', 'bandwidth_hz', 'resistance_ohm', 'lo_amplitude')
    @classmethod
    def validate_positive(cls, v):
        if not v > 0:
            raise ValueError(f"must be positive, got {v}")
        return v

    @field_validator('lambda_value')
    @classmethod
    def validate_lambda(cls, v):
        if v is not None and not v > 0:
            raise ValueError(f"lambda_value must be positive, got {v}")
        return v

    @field_validator('lambda_mode')
    @classmethod
    def validate_lambda_mode(cls, v):
        if v not in ("coupler", "adc"):
            raise ValueError("lambda_mode must be 'coupler' or 'adc'")
        return v

    @field_validator('tau_rule')
    @classmethod
    def validate_tau_rule(cls, v):
        if v not in ("half", "full"):
            raise ValueError("tau_rule must be 'half' or 'full'")
        return v

    @field_validator('input_orientation')
    @classmethod
    def validate_orientation(cls, v):
        if v not in ("standard", "inverse"):
            raise ValueError("input_orientation must be 'standard' or 'inverse'")
        return v

    @field_validator('shots', 'workers')
    @classmethod
    def validate_count(cls, v):
        if v < 1:
            raise ValueError(f"must be >= 1, got {v}")
        return v

    @field_validator('sweep_y', 'sweep_r', 'sweep_eta', 'sweep_N', mode='before')
    @classmethod
    def validate_grid(cls, v):
        return parse_grid(v)

    @field_validator('sweep_eta')
    @classmethod
    def validate_eta_grid(cls, v):
        if any(not 0.0 < e <= 1.0 for e in v):
            raise ValueError("sweep_eta values must lie in (0, 1]")
        return v

    @field_validator('sweep_N')
    @classmethod
    def validate_n_grid(cls, v):
        if any(not n >= 0 for n in v):
            raise ValueError("sweep_N values must be >= 0")
        return v

    @model_validator(mode='after')
    def validate_jpa_gain(self):
        if self.rJ is not None and abs(self.gJ - np.exp(2 * self.rJ)) > GAIN_CONSISTENCY * self.gJ:
            raise ValueError(f"gJ={self.gJ} and rJ={self.rJ} disagree (gJ = e^(2 rJ))")
        return self

    # ===== 도메인 객체 =====

    def budget(self) -> CircuitBudget:
        return CircuitBudget(self.epsilon, self.eta, self.kappa, self.nu,
                             temps=(self.T1, self.T2, self.T3, self.T4))

    def gains(self) -> GainConfig:
        # g_J 기준 (r_J 는 검증용)
        return GainConfig.from_gain(self.gJ, self.gH, self.chain)

    def adc(self) -> AdcConfig:
        return AdcConfig(omega_hz=self.omega_hz, bandwidth_B=self.bandwidth_hz,
                         resistance_R=self.resistance_ohm, lo_amplitude=self.lo_amplitude,
                         omega_is_angular=self.omega_is_angular)

    def setup(self) -> CircuitSetup:
        return CircuitSetup(
            budget=self.budget(), gains=self.gains(), adc=self.adc(),
            cfg=HomodyneConfig(lo_amplitude=self.lo_amplitude),
            lambda_value=self.lambda_value, lambda_mode=self.lambda_mode,
            tau_rule=self.tau_rule, hemt_added_photons=self.hemt_added_photons,
        )

    def input_spec(self) -> InputSpec:
        return InputSpec(y=self.y, x_in=self.x_in, p_in=self.p_in)

    def resource_spec(self) -> ResourceSpec:
        return ResourceSpec(r=self.r, n=self.n)

    def baths(self) -> List[BathParams]:
        return [BathParams(eta=eta, N=N) for eta in self.sweep_eta for N in self.sweep_N]

    def config_hash(self) -> str:
        """출력 경로를 제외한 설정의 sha256 앞 16자리"""
        payload = self.model_dump(mode="json", exclude={"output_path"})
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _split_lines(text: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        values[key] = value
    return values


def build_config(values: Dict[str, object]) -> RunConfig:
    """dict → RunConfig (pydantic 에러는 ConfigError 로)"""
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from e


def parse_config(text: str, overrides: Optional[Dict[str, str]] = None) -> RunConfig:
    """
    `key = value` 텍스트 → RunConfig

    Args:
        text: 설정 파일 내용 (`#` 주석 허용)
        overrides: --set key=value 값 (파일보다 우선)
    """
    values = _split_lines(text)
    if overrides:
        values.update(overrides)
    config = build_config(values)
    logger.debug(f"parsed config with {len(values)} explicit keys, hash={config.config_hash()}")
    return config
