"""
Microwave Circuit - 손실 있는 마이크로파 텔레포테이션 회로
전달 효율 ε, η, κ, ν + 열잡음 주입, JPA/HEMT 증폭, ADC I/Q 변환,
directional coupler feed-forward (Λ, τ, β), 재구성 및 zero-input 캘리브레이션
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import constants

from config import Config
from gaussian_core import TeleportError
from teleport_protocol import HomodyneConfig, InputSpec, ResourceSpec, chunk_generator, chunk_sizes

logger = logging.getLogger('teleport.microwave')

HBAR = constants.hbar
K_B = constants.k


# ===== 데이터 구조 =====

class AmplifierChain(str, Enum):
    """증폭 체인: JPA + HEMT 또는 HEMT 대신 JPA 두 개"""
    HEMT = "HEMT"
    JPA_CHAIN = "JPA_CHAIN"


@dataclass(frozen=True)
class CircuitBudget:
    """
    손실 단계별 전달 효율 (반사율) 과 온도

    epsilon: T₁ (JPA 출력), eta: T₂ (자유공간 / 냉동기),
    kappa: T₃, nu: T₄
    """
    epsilon: float
    eta: float
    kappa: float
    nu: float
    temps: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("epsilon", "eta", "kappa", "nu"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise TeleportError(f"{name} must lie in (0, 1], got {value}")
        if len(self.temps) != 4 or any(not t >= 0 for t in self.temps):
            raise TeleportError(f"temps must be four nonnegative kelvin values, got {self.temps}")

    @property
    def efficiencies(self) -> np.ndarray:
        return np.array([self.epsilon, self.eta, self.kappa, self.nu])

    @property
    def total_efficiency(self) -> float:
        return self.nu * self.kappa * self.eta * self.epsilon

    @classmethod
    def lossless(cls) -> "CircuitBudget":
        return cls(1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class GainConfig:
    """JPA 이득 g_J = e^{2r_J}, HEMT 이득 g_H"""
    g_J: float
    r_J: float
    g_H: float
    chain: AmplifierChain = AmplifierChain.HEMT
    tol: float = field(default=1e-6, repr=False)

    def __post_init__(self):
        if self.g_J < 1 or self.g_H < 1:
            raise TeleportError(f"gains must be >= 1, got g_J={self.g_J}, g_H={self.g_H}")
        # 상대 오차 기준
        if abs(self.g_J - np.exp(2 * self.r_J)) > self.tol * self.g_J:
            raise TeleportError(f"g_J={self.g_J} is inconsistent with r_J={self.r_J} (g_J = e^(2 r_J))")
        object.__setattr__(self, "chain", AmplifierChain(self.chain))

    @classmethod
    def from_gain(cls, g_J: float, g_H: float, chain: AmplifierChain = AmplifierChain.HEMT) -> "GainConfig":
        return cls(g_J=g_J, r_J=0.5 * np.log(g_J), g_H=g_H, chain=chain)

    @classmethod
    def from_squeezing(cls, r_J: float, g_H: float, chain: AmplifierChain = AmplifierChain.HEMT) -> "GainConfig":
        return cls(g_J=float(np.exp(2 * r_J)), r_J=r_J, g_H=g_H, chain=chain)

    @property
    def post_gain(self) -> float:
        """ADC 앞 증폭: HEMT 는 g_H, JPA 체인은 (g_J)²"""
        if self.chain is AmplifierChain.JPA_CHAIN:
            return self.g_J ** 2
        return self.g_H


@dataclass(frozen=True)
class AdcConfig:
    """
    ADC / 헤테로다인 상수

    omega_hz 가 각주파수인지 여부는 omega_is_angular 로 지정
    (기본: 일반 주파수 → ω = 2π·f)
    """
    omega_hz: float
    bandwidth_B: float
    resistance_R: float
    lo_amplitude: float
    omega_is_angular: bool = False

    def __post_init__(self):
        for name in ("omega_hz", "bandwidth_B", "resistance_R", "lo_amplitude"):
            if not getattr(self, name) > 0:
                raise TeleportError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def omega(self) -> float:
        """각주파수 (rad/s)"""
        return self.omega_hz if self.omega_is_angular else 2 * np.pi * self.omega_hz

    @property
    def scale(self) -> float:
        """√(ħωBR) (g_H 제외)"""
        return float(np.sqrt(HBAR * self.omega * self.bandwidth_B * self.resistance_R))


@dataclass(frozen=True, eq=False)
class NoiseEnvironment:
    """
    단계별 열 quadrature (x_th-i, p_th-i), i = 1..4

    x_th / p_th 는 shape (4,) 또는 샷 단위 (4, k).
    variances 는 2n̄+1 (vacuum floor 1)
    """
    x_th: np.ndarray
    p_th: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.variances) < 1.0 - Config.TOLERANCE):
            raise TeleportError("thermal quadrature variances must be >= 1 (vacuum floor)")

    @classmethod
    def from_temperatures(cls, budget: CircuitBudget, omega: float) -> "NoiseEnvironment":
        """평균값 환경: 열 quadrature = 0, 분산 = 2n̄+1"""
        occupations = np.array([thermal_occupation(t, omega) for t in budget.temps])
        return cls(np.zeros(4), np.zeros(4), 2 * occupations + 1)

    @classmethod
    def quiet(cls) -> "NoiseEnvironment":
        return cls(np.zeros(4), np.zeros(4), np.ones(4))

    @property
    def occupations(self) -> np.ndarray:
        return (np.asarray(self.variances) - 1) / 2

    def sample(self, rng: np.random.Generator, size: int) -> "NoiseEnvironment":
        std = np.sqrt(np.asarray(self.variances))[:, None]
        x_th = std * rng.standard_normal((4, size))
        p_th = std * rng.standard_normal((4, size))
        return NoiseEnvironment(x_th, p_th, self.variances)


@dataclass(frozen=True)
class CouplerSettings:
    """Bob 의 directional coupler 설정"""
    lambda_: float
    tau: float
    beta_db: float
    feasible: bool
    tau_residual: float = 0.0

    @property
    def inverse_sqrt_lambda(self) -> float:
        return float(1.0 / np.sqrt(self.lambda_))

    @property
    def sqrt_tau(self) -> float:
        # Λ < 1 (τ < 0) 은 비물리적 → 0 으로 잘라서 계속 진행
        return float(np.sqrt(min(max(self.tau, 0.0), 1.0)))


@dataclass(frozen=True)
class AdcRecord:
    """ADC I/Q 출력과 사용한 스케일 √(ħωBRg_H)"""
    I1: Union[float, np.ndarray]
    Q2: Union[float, np.ndarray]
    scale: float


# ===== 열잡음 =====

def thermal_occupation(T: float, omega: float) -> float:
    """
    Planck 점유수 n̄ = 1/(e^{ħω/kT} − 1)

    Args:
        T: 온도 (K), T = 0 이면 0
        omega: 각주파수 (rad/s)
    """
    if T < 0 or omega <= 0:
        raise TeleportError(f"need T >= 0 and omega > 0, got T={T}, omega={omega}")
    if T == 0:
        return 0.0
    return float(1.0 / np.expm1(HBAR * omega / (K_B * T)))


def noise_weights(budget: CircuitBudget) -> np.ndarray:
    """ζ 가중치 (√(νκη(1−ε)), √(νκ(1−η)), √(ν(1−κ)), √(1−ν))"""
    e, h, k, v = budget.efficiencies
    return np.sqrt([v * k * h * (1 - e), v * k * (1 - h), v * (1 - k), 1 - v])


def noise_terms(budget: CircuitBudget, env: NoiseEnvironment):
    """(ζ_x, ζ_p) = 단계별 열 quadrature 의 가중합"""
    weights = noise_weights(budget)
    zeta_x = np.tensordot(weights, np.asarray(env.x_th, dtype=float), axes=(0, 0))
    zeta_p = np.tensordot(weights, np.asarray(env.p_th, dtype=float), axes=(0, 0))
    if np.ndim(zeta_x) == 0:
        return float(zeta_x), float(zeta_p)
    return zeta_x, zeta_p


def transfer_efficiency_summary(budget: CircuitBudget) -> Dict[str, float]:
    weights = noise_weights(budget)
    return {
        "total_efficiency": budget.total_efficiency,
        "weight_T1": float(weights[0]),
        "weight_T2": float(weights[1]),
        "weight_T3": float(weights[2]),
        "weight_T4": float(weights[3]),
        "noise_weight_sq_sum": float(np.sum(weights ** 2)),
    }


# ===== 헤테로다인 / ADC =====

def heterodyne_currents(input: InputSpec, resource_draw, r: float, budget: CircuitBudget,
                        gains: GainConfig, cfg: Optional[HomodyneConfig] = None,
                        env: Optional[NoiseEnvironment] = None):
    """
    증폭/손실을 포함한 Alice 의 헤테로다인 출력 (X_u, P_v)

    X_u = |α_LO|(√(νκg_J)(e^r x₁√(ηε) + e^{-y}x_in) + ζ_x)
    P_v = |α_LO|(√(νκg_J)(e^y p_in − e^{-r}p₁√(ηε)) + ζ_p)

    θ_x, θ_p 가 표준 위상이 아니면 cos θ_x, sin θ_p 가 곱해진다.
    """
    cfg = cfg or HomodyneConfig()
    env = env or NoiseEnvironment.quiet()
    x1, p1 = (np.asarray(v, dtype=float) for v in resource_draw)
    zeta_x, zeta_p = noise_terms(budget, env)
    arm = np.sqrt(budget.nu * budget.kappa * gains.g_J)
    loss = np.sqrt(budget.eta * budget.epsilon)
    y = input.y
    X_u = cfg.lo_amplitude * (arm * (np.exp(r) * x1 * loss + np.exp(-y) * input.x_in) + zeta_x) * np.cos(cfg.theta_x)
    P_v = cfg.lo_amplitude * (arm * (np.exp(y) * input.p_in - np.exp(-r) * p1 * loss) + zeta_p) * np.sin(cfg.theta_p)
    if np.ndim(X_u) == 0:
        return float(X_u), float(P_v)
    return X_u, P_v


def adc_quadratures(X_u, P_v, adc: AdcConfig, g_H: float) -> AdcRecord:
    """I₁ = √(ħωBRg_H)·X_u, Q₂ = √(ħωBRg_H)·P_v"""
    scale = adc.scale * float(np.sqrt(g_H))
    logger.debug(f"ADC scale √(ħωBRg_H) = {scale:.6e} (ω = {adc.omega:.6e} rad/s)")
    return AdcRecord(I1=scale * X_u, Q2=scale * P_v, scale=scale)


# ===== Λ / τ / β =====

def lambda_coefficient(adc: AdcConfig, budget: CircuitBudget, gains: GainConfig) -> float:
    """
    Λ = |α_LO|²ħωBRνκ g_J g_H  (HEMT)
    Λ'_J = |α_LO|²ħωBRνκ (g_J)³  (JPA_CHAIN)
    """
    return float(adc.lo_amplitude ** 2 * adc.scale ** 2 * budget.nu * budget.kappa * gains.g_J * gains.post_gain)


def lambda_from_transmissivity(tau: float) -> float:
    """τ = 1 − 1/Λ 의 역: Λ = 1/(1 − τ)"""
    if not 0 <= tau < 1:
        raise TeleportError(f"transmissivity must lie in [0, 1), got {tau}")
    return 1.0 / (1.0 - tau)


def coupler_transmissivity(budget: CircuitBudget, tau_rule: str = "half") -> float:
    """τ = εη/2 (half, 냉동기 행) 또는 εη (full, 자유공간 행)"""
    product = budget.epsilon * budget.eta
    if tau_rule == "half":
        return product / 2
    if tau_rule == "full":
        return product
    raise TeleportError(f"unknown tau rule '{tau_rule}' (expected 'half' or 'full')")


def calibrated_lo_amplitude(lambda_: float, adc: AdcConfig, budget: CircuitBudget, gains: GainConfig) -> float:
    """주어진 Λ 를 실현하는 |α_LO|"""
    if lambda_ <= 0:
        raise TeleportError(f"lambda must be positive, got {lambda_}")
    unit = lambda_coefficient(replace(adc, lo_amplitude=1.0), budget, gains)
    return float(np.sqrt(lambda_ / unit))


def coupler_settings(lambda_: float, budget: CircuitBudget) -> CouplerSettings:
    """
    τ = 1 − 1/Λ, β = 10·log10(1/Λ) dB, 1 < Λ ≤ 2 이면 feasible

    εη/2 와의 차이는 진단용 residual 로만 기록
    """
    if not lambda_ > 0:
        raise TeleportError(f"lambda must be positive, got {lambda_}")
    tau = 1.0 - 1.0 / lambda_
    beta_db = 10.0 * np.log10(1.0 / lambda_)
    feasible = 1.0 < lambda_ <= 2.0
    residual = abs(budget.epsilon * budget.eta / 2 - tau)
    if not feasible:
        logger.warning(f"⚠️ Λ = {lambda_:.4f} is outside (1, 2]; coupler setting is infeasible")
    return CouplerSettings(lambda_=float(lambda_), tau=float(tau), beta_db=float(beta_db),
                           feasible=feasible, tau_residual=float(residual))


def noise_coefficients(settings: CouplerSettings, r: float) -> Dict[str, float]:
    """zero-input 잡음 계수: ζ'_x = a⟨I₁⟩ + b_x⟨x₂⟩, ζ'_p = a⟨Q₂⟩ + b_p⟨p₂⟩"""
    return {
        "coef_I": settings.inverse_sqrt_lambda,
        "coef_x2": settings.sqrt_tau * float(np.exp(r)),
        "coef_p2": settings.sqrt_tau * float(np.exp(-r)),
    }


# ===== 재구성 =====

def reconstruct(I1, Q2, bob_mode, r: float, settings: CouplerSettings, lambda_: Optional[float] = None):
    """
    Bob 쪽 재구성 (위쪽 팔)

    e^{-y}x_in + ζ'_x = I₁/√Λ + √τ e^r x₂
    e^{y}p_in + ζ'_p = Q₂/√Λ + √τ e^{-r} p₂

    JPA 체인이면 Λ 대신 Λ'_J 를 넘긴다.
    """
    lambda_ = settings.lambda_ if lambda_ is None else lambda_
    if not lambda_ > 0:
        raise TeleportError(f"lambda must be positive, got {lambda_}")
    if not settings.feasible:
        logger.warning(f"⚠️ reconstructing with infeasible coupler (Λ = {settings.lambda_:.4f})")
    x2, p2 = (np.asarray(v, dtype=float) for v in bob_mode)
    root = np.sqrt(lambda_)
    x_out = I1 / root + settings.sqrt_tau * np.exp(r) * x2
    p_out = Q2 / root + settings.sqrt_tau * np.exp(-r) * p2
    if np.ndim(x_out) == 0:
        return float(x_out), float(p_out)
    return x_out, p_out


# ===== 파이프라인 =====

@dataclass(frozen=True)
class CircuitSetup:
    """한 번의 실행에 필요한 회로 파라미터 묶음"""
    budget: CircuitBudget
    gains: GainConfig
    adc: AdcConfig
    cfg: HomodyneConfig = HomodyneConfig()
    lambda_value: Optional[float] = None
    lambda_mode: str = "coupler"
    tau_rule: str = "half"
    hemt_added_photons: float = 0.0

    def resolve(self) -> Tuple[float, AdcConfig, CouplerSettings]:
        """
        사용할 Λ 결정

        lambda_value 가 있으면 그대로, lambda_mode='coupler' 면 1/(1−τ_rule),
        'adc' 면 ADC 상수로 계산. coupler/직접 지정이면 |α_LO| 를 Λ 에 맞춰 보정.
        """
        if self.lambda_value is not None:
            lambda_ = float(self.lambda_value)
        elif self.lambda_mode == "coupler":
            lambda_ = lambda_from_transmissivity(coupler_transmissivity(self.budget, self.tau_rule))
        elif self.lambda_mode == "adc":
            lambda_ = lambda_coefficient(self.adc, self.budget, self.gains)
        else:
            raise TeleportError(f"unknown lambda mode '{self.lambda_mode}'")

        adc = self.adc
        if self.lambda_value is not None or self.lambda_mode == "coupler":
            adc = replace(adc, lo_amplitude=calibrated_lo_amplitude(lambda_, adc, self.budget, self.gains))
        settings = coupler_settings(lambda_, self.budget)
        logger.info(
            f"Λ = {lambda_:.6g} ({self.lambda_mode}, chain={self.gains.chain.value}), τ = {settings.tau:.6g}, "
            f"β = {settings.beta_db:.4g} dB, feasible={settings.feasible}, ω = {adc.omega:.6e} rad/s "
            f"({'angular' if adc.omega_is_angular else '2π·f'})"
        )
        return lambda_, adc, settings


@dataclass(frozen=True, eq=False)
class RunReport:
    """end_to_end_run 결과"""
    seed: int
    shots: int
    deterministic: bool
    target: np.ndarray
    output_mean: np.ndarray
    residual_mean: np.ndarray
    residual_var: np.ndarray
    residual_max: np.ndarray
    lambda_: float
    tau: float
    beta_db: float
    feasible: bool
    tau_residual: float
    mismatch: float
    lo_amplitude: float
    adc_scale: float

    def to_row(self) -> Dict:
        return {
            "seed": self.seed,
            "shots": self.shots,
            "deterministic": self.deterministic,
            "target_x": float(self.target[0]),
            "target_p": float(self.target[1]),
            "mean_x_out": float(self.output_mean[0]),
            "mean_p_out": float(self.output_mean[1]),
            "residual_mean_x": float(self.residual_mean[0]),
            "residual_mean_p": float(self.residual_mean[1]),
            "residual_var_x": float(self.residual_var[0]),
            "residual_var_p": float(self.residual_var[1]),
            "residual_max_abs": float(np.max(self.residual_max)),
            "lambda": self.lambda_,
            "tau": self.tau,
            "beta_db": self.beta_db,
            "feasible": self.feasible,
            "tau_residual": self.tau_residual,
            "mismatch": self.mismatch,
            "lo_amplitude": self.lo_amplitude,
            "adc_scale": self.adc_scale,
        }


def _pipeline_chunk(seed: int, chunk_index: int, size: int, input: InputSpec, resource: ResourceSpec,
                    setup: CircuitSetup, adc: AdcConfig, settings: CouplerSettings,
                    base_env: NoiseEnvironment, deterministic: bool = False,
                    zero_resource: bool = False) -> Tuple[Dict[str, np.ndarray], float]:
    """
    한 청크의 샷 파이프라인 (run / calibrate 공용)

    Returns:
        (x_out, p_out, I1, Q2, x2, p2, 샷별 입력 x_in, p_in 컬럼, ADC 스케일)
    """
    r = resource.r
    if deterministic:
        draws = np.zeros((size, 4))
        in_noise = np.zeros((size, 2))
        env = NoiseEnvironment(np.zeros((4, size)), np.zeros((4, size)), base_env.variances)
        hemt = np.zeros((2, size))
    else:
        rng = chunk_generator(seed, chunk_index)
        if zero_resource:
            draws = np.zeros((size, 4))
        else:
            draws = rng.multivariate_normal(np.zeros(4), resource.state().cov.entries, size=size, method="cholesky")
        # 입력 코히런트 상태의 vacuum 요동 (J_in 앞)
        in_noise = rng.standard_normal((size, 2))
        env = base_env.sample(rng, size)
        hemt = np.sqrt(2 * setup.hemt_added_photons) * rng.standard_normal((2, size))

    x_in = input.x_in + in_noise[:, 0]
    p_in = input.p_in + in_noise[:, 1]
    x1, p1 = draws[:, 0] * np.exp(-r), draws[:, 1] * np.exp(r)
    # Bob 팔 π 위상 기준 (teleport_protocol 과 동일 규약)
    x2, p2 = -draws[:, 2] * np.exp(-r), -draws[:, 3] * np.exp(r)

    cfg = replace(setup.cfg, lo_amplitude=adc.lo_amplitude)
    shot_input = InputSpec(y=input.y)
    arm = np.sqrt(setup.budget.nu * setup.budget.kappa * setup.gains.g_J)
    # x_in / p_in 은 샷마다 다르므로 InputSpec 대신 직접 더한다
    X_u, P_v = heterodyne_currents(shot_input, (x1, p1), r, setup.budget, setup.gains, cfg, env)
    X_u = X_u + cfg.lo_amplitude * arm * (np.exp(-input.y) * x_in + hemt[0]) * np.cos(cfg.theta_x)
    P_v = P_v + cfg.lo_amplitude * arm * (np.exp(input.y) * p_in + hemt[1]) * np.sin(cfg.theta_p)
    record = adc_quadratures(X_u, P_v, adc, setup.gains.post_gain)
    x_out, p_out = reconstruct(record.I1, record.Q2, (x2, p2), r, settings)
    columns = {"x_out": x_out, "p_out": p_out, "I1": record.I1, "Q2": record.Q2, "x2": x2, "p2": p2,
               "x_in": x_in, "p_in": p_in}
    return {key: np.broadcast_to(value, (size,)) for key, value in columns.items()}, record.scale


def _run_pipeline(input: InputSpec, resource: ResourceSpec, setup: CircuitSetup, seed: int, shots: int,
                  adc: AdcConfig, settings: CouplerSettings, deterministic: bool = False,
                  zero_resource: bool = False, workers: int = 1,
                  chunk: Optional[int] = None) -> Tuple[Dict[str, np.ndarray], float]:
    base_env = NoiseEnvironment.from_temperatures(setup.budget, adc.omega)
    sizes = chunk_sizes(shots, chunk or Config.MC_CHUNK)

    def run(job):
        index, size = job
        return _pipeline_chunk(seed, index, size, input, resource, setup, adc, settings, base_env,
                               deterministic=deterministic, zero_resource=zero_resource)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, enumerate(sizes)))
    else:
        parts = [run(job) for job in enumerate(sizes)]
    data = {key: np.concatenate([part[0][key] for part in parts]) for key in parts[0][0]}
    return data, parts[0][1]


def end_to_end_run(input: InputSpec, resource: ResourceSpec, setup: CircuitSetup, seed: int,
                   shots: int = 1, deterministic: bool = False, workers: int = 1,
                   chunk: Optional[int] = None) -> RunReport:
    """
    회로 전체를 샷 단위로 실행 (heterodyne → ADC → coupler 재구성)

    deterministic=True: 열/자원/입력 요동을 평균값(0)으로 두는 1차 모멘트 파이프라인
    """
    if shots < 1:
        raise TeleportError(f"shots must be >= 1, got {shots}")
    lambda_, adc, settings = setup.resolve()
    data, scale = _run_pipeline(input, resource, setup, seed, shots, adc, settings,
                                deterministic=deterministic, workers=workers, chunk=chunk)
    outputs = np.column_stack([data["x_out"], data["p_out"]])

    target = np.array([np.exp(-input.y) * input.x_in, np.exp(input.y) * input.p_in])
    residuals = outputs - target
    mismatch = float(np.sqrt(setup.budget.eta * setup.budget.epsilon) - settings.sqrt_tau)
    logger.info(f"✅ end_to_end_run: shots={shots} seed={seed} feasible={settings.feasible} mismatch={mismatch:.4g}")
    return RunReport(
        seed=seed,
        shots=shots,
        deterministic=deterministic,
        target=target,
        output_mean=outputs.mean(axis=0),
        residual_mean=residuals.mean(axis=0),
        residual_var=residuals.var(axis=0, ddof=1) if shots > 1 else np.zeros(2),
        residual_max=np.max(np.abs(residuals), axis=0),
        lambda_=lambda_,
        tau=settings.tau,
        beta_db=settings.beta_db,
        feasible=settings.feasible,
        tau_residual=settings.tau_residual,
        mismatch=mismatch,
        lo_amplitude=adc.lo_amplitude,
        adc_scale=scale,
    )


@dataclass(frozen=True, eq=False)
class CalibrationReport:
    """zero-input 캘리브레이션 결과"""
    seed: int
    shots: int
    zeta_x_mean: float
    zeta_x_var: float
    zeta_x_stderr: float
    zeta_p_mean: float
    zeta_p_var: float
    zeta_p_stderr: float
    analytic: Dict[str, float]
    # 재구성 배선 확인: 출력을 (I₁, x₂), (Q₂, p₂) 에 회귀한 최소제곱 계수
    wiring_check: Dict[str, float]
    settings: CouplerSettings

    def to_row(self) -> Dict:
        row = {
            "seed": self.seed,
            "shots": self.shots,
            "zeta_x_mean": self.zeta_x_mean,
            "zeta_x_var": self.zeta_x_var,
            "zeta_x_stderr": self.zeta_x_stderr,
            "zeta_p_mean": self.zeta_p_mean,
            "zeta_p_var": self.zeta_p_var,
            "zeta_p_stderr": self.zeta_p_stderr,
        }
        row.update({f"analytic_{k}": v for k, v in self.analytic.items()})
        row.update({f"wiring_check_{k}": v for k, v in self.wiring_check.items()})
        row.update({"lambda": self.settings.lambda_, "tau": self.settings.tau,
                    "beta_db": self.settings.beta_db, "feasible": self.settings.feasible})
        return row


def calibrate_noise(setup: CircuitSetup, r: float, shots: int, seed: int, n: float = 0.0,
                    zero_resource: bool = False, chunk: Optional[int] = None) -> CalibrationReport:
    """
    zero-input 캘리브레이션

    x_in = p_in = 0 으로 end_to_end_run 과 같은 파이프라인을 돌린다 (입력 vacuum 요동,
    열 잡음, HEMT 추가 잡음 포함). ζ' 는 재구성 출력에서 샷별 입력 (x_in, p_in) 을 뺀
    나머지이고, 그 경험적 평균/분산과 해석적 계수, 재구성 출력을 (I₁, x₂), (Q₂, p₂) 에
    회귀한 배선 확인 계수 (wiring_check) 를 반환.
    """
    if shots < 1:
        raise TeleportError(f"shots must be >= 1, got {shots}")
    _, adc, settings = setup.resolve()
    data, _ = _run_pipeline(InputSpec(), ResourceSpec(r=r, n=n), setup, seed, shots, adc, settings,
                            zero_resource=zero_resource, chunk=chunk)
    zx = data["x_out"] - data["x_in"]
    zp = data["p_out"] - data["p_in"]

    analytic = noise_coefficients(settings, r)
    wiring_check = {"coef_I": float("nan"), "coef_x2": float("nan"), "coef_p2": float("nan")}
    if shots >= 2 and not zero_resource:
        sol_x, *_ = np.linalg.lstsq(np.column_stack([data["I1"], data["x2"]]), data["x_out"], rcond=None)
        sol_p, *_ = np.linalg.lstsq(np.column_stack([data["Q2"], data["p2"]]), data["p_out"], rcond=None)
        wiring_check = {"coef_I": float(sol_x[0]), "coef_x2": float(sol_x[1]), "coef_p2": float(sol_p[1])}

    def stats(values):
        var = float(values.var(ddof=1)) if shots > 1 else 0.0
        return float(values.mean()), var, float(np.sqrt(var / shots))

    zx_mean, zx_var, zx_err = stats(zx)
    zp_mean, zp_var, zp_err = stats(zp)
    logger.info(f"✅ calibrate_noise: shots={shots} ζ'_x = {zx_mean:.4g} ± {zx_err:.2g}, ζ'_p = {zp_mean:.4g} ± {zp_err:.2g}")
    return CalibrationReport(
        seed=seed, shots=shots,
        zeta_x_mean=zx_mean, zeta_x_var=zx_var, zeta_x_stderr=zx_err,
        zeta_p_mean=zp_mean, zeta_p_var=zp_var, zeta_p_stderr=zp_err,
        analytic=analytic, wiring_check=wiring_check, settings=settings,
    )


# ===== 기준표 프리셋 =====

TABLE1_R = 1.32
TABLE1_GAINS = GainConfig.from_gain(1e2, 1e4)
TABLE1_ADC = AdcConfig(omega_hz=5e9, bandwidth_B=420e3, resistance_R=50.0, lo_amplitude=1e6)
TABLE1_FRIDGE = CircuitBudget(0.95, 0.90, 0.65, 0.75, temps=(0.040, 4.0, 4.0, 0.100))
TABLE1_FREE_SPACE = CircuitBudget(0.95, 0.10, 0.65, 0.75, temps=(0.040, 300.0, 4.0, 0.100))
