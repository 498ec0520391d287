"""
Teleport Protocol - Braunstein-Kimble CV 텔레포테이션
double-homodyne 측정 → 고전 feed-forward → Bob 변위 → fidelity
"""
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate, optimize

from config import Config
from gaussian_core import (
    CovarianceMatrix, DimensionError, GaussianState, PhysicalityError, QuadratureVector,
    TeleportError, Z, beamsplitter, coherent, direct_sum, displace, identity_transform,
    partition_blocks, physicality, tmst,
)

logger = logging.getLogger('teleport.protocol')

# 고전 한계 (코히런트 입력)
CLASSICAL_FIDELITY = 0.5


class QuadratureError(TeleportError):
    """average_fidelity 적분 수렴 실패"""


# ===== 데이터 구조 =====

@dataclass(frozen=True)
class HomodyneConfig:
    """국소 발진기(LO) 설정 - 두 LO는 같은 진폭 |α_LO|"""
    lo_amplitude: float = 1.0
    theta_x: float = 0.0
    theta_p: float = np.pi / 2

    def __post_init__(self):
        if not self.lo_amplitude > 0:
            raise TeleportError(f"LO amplitude must be positive, got {self.lo_amplitude}")


@dataclass(frozen=True)
class ResourceSpec:
    """공유 얽힘 자원 TMST(r, n); σ = e^{-2r}"""
    r: float
    n: float = 0.0

    def __post_init__(self):
        if not self.n >= 0:
            raise TeleportError(f"resource thermal photons must be >= 0, got {self.n}")

    @property
    def sigma(self) -> float:
        return float(np.exp(-2 * self.r))

    def state(self) -> GaussianState:
        return tmst(self.r, self.n)


@dataclass(frozen=True)
class InputSpec:
    """텔레포트할 스퀴즈드 코히런트 입력 (y, x_in, p_in)"""
    y: float = 0.0
    x_in: float = 0.0
    p_in: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.y, self.x_in, self.p_in])):
            raise TeleportError("input parameters must be finite")

    @property
    def mean(self) -> QuadratureVector:
        return QuadratureVector([self.x_in, self.p_in])

    def covariance(self, orientation: str = "standard") -> np.ndarray:
        """V'_in = diag(e^{2y}, e^{-2y}); orientation='inverse' 이면 diag(e^{-2y}, e^{2y})"""
        return input_covariance(self.y, orientation)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """
    Alice → Bob 고전 채널로 보내는 측정 결과

    X_u, P_v, currents 는 스칼라 또는 샷 단위 배열
    """
    X_u: Union[float, np.ndarray]
    P_v: Union[float, np.ndarray]
    currents: Tuple[Union[float, np.ndarray], Union[float, np.ndarray]]

    @property
    def delta(self) -> Union[complex, np.ndarray]:
        """δ = X_u + iP_v"""
        return self.X_u + 1j * self.P_v


def input_covariance(y: float, orientation: str = "standard") -> np.ndarray:
    if orientation == "standard":
        return np.diag([np.exp(2 * y), np.exp(-2 * y)])
    if orientation == "inverse":
        return np.diag([np.exp(-2 * y), np.exp(2 * y)])
    raise TeleportError(f"unknown input orientation '{orientation}'")


# ===== double-homodyne 측정 =====

def homodyne_network():
    """
    S_h2 · S_h1 (8×8)

    S_h1 = 𝕀₂ ⊕ B_S(1/2)₄ ⊕ 𝕀₂, S_h2 = B_S(1/2)₄ ⊕ B_S(1/2)₄
    """
    bs = beamsplitter(0.5)
    s_h1 = direct_sum([identity_transform(1), bs, identity_transform(1)])
    s_h2 = direct_sum([bs, bs])
    return s_h2.matrix @ s_h1.matrix


def double_homodyne_propagate(moments_in: Union[QuadratureVector, np.ndarray]) -> np.ndarray:
    """
    검출기 직전 1차 모멘트 x̄'_out = S_h2 S_h1 x̄'_in

    Args:
        moments_in: (x_LOx, p_LOx, x_in, p_in, e^r x₁, e^{-r} p₁, x_LOp, p_LOp),
                    shape (8,) 또는 샷 단위 (k, 8)

    Returns:
        (x_u', p_u', x_u'', p_u'', x_v', p_v', x_v'', p_v'') 같은 shape
    """
    moments = np.asarray(moments_in.values if isinstance(moments_in, QuadratureVector) else moments_in, dtype=float)
    if moments.shape[-1] != 8:
        raise DimensionError(f"double homodyne needs 8 moment entries, got {moments.shape[-1]}")
    return moments @ homodyne_network().T


def detector_current(x, p):
    """이상적인 검출기 전류 i = ½(x² + p²) − ½"""
    return 0.5 * (np.square(x) + np.square(p)) - 0.5


def _lo_moments(cfg: HomodyneConfig) -> Tuple[float, float, float, float]:
    root2 = np.sqrt(2.0) * cfg.lo_amplitude
    return (
        root2 * np.cos(cfg.theta_x), root2 * np.sin(cfg.theta_x),
        root2 * np.cos(cfg.theta_p), root2 * np.sin(cfg.theta_p),
    )


def alice_measure(input: InputSpec, resource_mode1, r: float, cfg: Optional[HomodyneConfig] = None) -> MeasurementRecord:
    """
    Alice 의 heterodyne 측정

    θ_x = 0, θ_p = π/2 에서 X_u = x_in + e^r x₁, P_v = p_in − e^{-r} p₁.
    다른 위상은 일반화된 전류를 그대로 돌려준다.

    Args:
        input: 입력 상태 (x_in, p_in 사용)
        resource_mode1: Alice 쪽 자원 모드 (x₁, p₁), 스칼라 또는 배열
        r: TMSS 스퀴징
        cfg: LO 설정
    """
    cfg = cfg or HomodyneConfig()
    x1, p1 = (np.asarray(v, dtype=float) for v in resource_mode1)
    x_in = np.asarray(input.x_in, dtype=float)
    p_in = np.asarray(input.p_in, dtype=float)
    return _measure(x_in, p_in, x1, p1, r, cfg)


def _measure(x_in, p_in, x1, p1, r: float, cfg: HomodyneConfig) -> MeasurementRecord:
    x_lox, p_lox, x_lop, p_lop = _lo_moments(cfg)
    shape = np.broadcast(x_in, p_in, x1, p1).shape
    moments = np.stack([
        np.full(shape, x_lox), np.full(shape, p_lox),
        np.broadcast_to(x_in, shape), np.broadcast_to(p_in, shape),
        np.broadcast_to(np.exp(r) * x1, shape), np.broadcast_to(np.exp(-r) * p1, shape),
        np.full(shape, x_lop), np.full(shape, p_lop),
    ], axis=-1)
    out = double_homodyne_propagate(moments)
    u1, u2, v1, v2 = out[..., 0:2], out[..., 2:4], out[..., 4:6], out[..., 6:8]
    i1 = detector_current(u1[..., 0], u1[..., 1]) - detector_current(u2[..., 0], u2[..., 1])
    # v'' − v' : i₂ = |α_LO|(p_in − e^{-r}p₁) 부호 규약
    i2 = detector_current(v2[..., 0], v2[..., 1]) - detector_current(v1[..., 0], v1[..., 1])
    if not shape:
        i1, i2 = float(i1), float(i2)
    return MeasurementRecord(
        X_u=i1 / cfg.lo_amplitude,
        P_v=i2 / cfg.lo_amplitude,
        currents=(i1, i2),
    )


def bob_reconstruct(bob_mode, r: float, record: MeasurementRecord) -> QuadratureVector:
    """
    Bob 변위 x̄₂ → x̄₂ + Δ, Δ = (X_u, P_v)

    측정 후 Bob 모드는 (e^r x₂, e^{-r} p₂), x₂ = −x₁, p₂ = p₁.
    """
    x2, p2 = bob_mode
    bob = coherent([np.exp(r) * x2, np.exp(-r) * p2])
    return displace(bob, [record.X_u, record.P_v], mode=0).mean


# ===== Fidelity =====

def fidelity_gamma(v_in, resource: GaussianState) -> float:
    """
    F = 2/√det Γ,  Γ = 2V'_in + ℤAℤ + B − Cℤ − ℤᵀCᵀ

    Args:
        v_in: 입력 공분산 (2×2)
        resource: 2-모드 자원 상태 (블록 A, B, C)
    """
    v_in = v_in.entries if isinstance(v_in, CovarianceMatrix) else np.asarray(v_in, dtype=float)
    if v_in.shape != (2, 2):
        raise DimensionError(f"input covariance must be 2x2, got {v_in.shape}")
    block_a, block_b, block_c = partition_blocks(resource.cov)
    return gamma_fidelity_from_blocks(v_in, block_a, block_b, block_c)


def gamma_fidelity_from_blocks(v_in: np.ndarray, block_a: np.ndarray, block_b: np.ndarray, block_c: np.ndarray) -> float:
    """V_in 이 물리적이고 Γ ≻ 0 일 때만 F 를 돌려준다 (F ∈ (0, 1])"""
    ok, spectrum = physicality(v_in)
    if not ok:
        raise PhysicalityError(f"input covariance violates the uncertainty principle (spectrum {spectrum})")
    gamma = 2 * v_in + Z @ block_a @ Z + block_b - block_c @ Z - Z.T @ block_c.T
    eigenvalues = np.linalg.eigvalsh(0.5 * (gamma + gamma.T))
    if not np.all(eigenvalues > 0):
        raise PhysicalityError(f"Γ is not positive definite (eigenvalues {eigenvalues}); inputs are unphysical")
    return float(2.0 / np.sqrt(np.linalg.det(gamma)))


def output_state(input: InputSpec, resource: GaussianState, orientation: str = "standard") -> GaussianState:
    """
    이상적 프로토콜의 Bob 출력 상태

    평균은 입력 그대로, 공분산 V_out = V'_in + ℤAℤ + B − Cℤ − ℤCᵀ
    """
    block_a, block_b, block_c = partition_blocks(resource.cov)
    noise = Z @ block_a @ Z + block_b - block_c @ Z - Z.T @ block_c.T
    cov = input_covariance(input.y, orientation) + noise
    return GaussianState(input.mean, CovarianceMatrix(0.5 * (cov + cov.T)))


def fidelity_closed_form(y: float, r: float, n: float = 0.0) -> float:
    """F = 1/√((e^{-2y} + (2n+1)σ)(e^{2y} + (2n+1)σ)), σ = e^{-2r}"""
    if not n >= 0:
        raise TeleportError(f"thermal photons must be >= 0, got {n}")
    noise = (2 * n + 1) * np.exp(-2 * r)
    return float(1.0 / np.sqrt((np.exp(-2 * y) + noise) * (np.exp(2 * y) + noise)))


def average_fidelity(r: float, n: float = 0.0, y_low: float = 0.0, y_high: float = 1.0) -> float:
    """
    입력 스퀴징 y 에 대한 균일 평균 fidelity

    (1/(y_high − y_low)) ∫ F(y) dy, 절대 허용오차 1e-9.
    y_low == y_high 이면 F(y_low).
    """
    if y_high < y_low:
        raise TeleportError(f"y_low must not exceed y_high ({y_low} > {y_high})")
    if y_high == y_low:
        return fidelity_closed_form(y_low, r, n)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(lambda y: fidelity_closed_form(y, r, n), y_low, y_high, epsabs=1e-9)
        except integrate.IntegrationWarning as e:
            raise QuadratureError(f"average fidelity integral did not converge: {e}") from e
    return float(value / (y_high - y_low))


def is_quantum(fidelity: float) -> bool:
    """F > 0.5 이면 고전 한계를 넘는 텔레포테이션"""
    return fidelity > CLASSICAL_FIDELITY


def fidelity_threshold_squeezing(y: float = 0.0, n: float = 0.0, r_max: float = 10.0) -> Optional[float]:
    """F(y, r, n) = 0.5 가 되는 최소 r. r_max 까지 넘지 못하면 None"""
    def excess(r):
        return fidelity_closed_form(y, r, n) - CLASSICAL_FIDELITY

    if excess(0.0) > 0:
        return 0.0
    if excess(r_max) <= 0:
        return None
    return float(optimize.brentq(excess, 0.0, r_max, xtol=1e-12))


def fidelity_grid(y_values: Sequence[float], r_values: Sequence[float], n_values: Sequence[float]) -> pd.DataFrame:
    """(y, r, n) 격자의 closed-form / Γ fidelity 비교표"""
    rows = []
    for n in n_values:
        for y in y_values:
            v_in = input_covariance(y)
            for r in r_values:
                f_closed = fidelity_closed_form(y, r, n)
                f_gamma = fidelity_gamma(v_in, tmst(r, n))
                rows.append({
                    "y": y, "r": r, "n": n,
                    "fidelity_closed": f_closed,
                    "fidelity_gamma": f_gamma,
                    "quantum": is_quantum(f_closed),
                })
    return pd.DataFrame(rows, columns=["y", "r", "n", "fidelity_closed", "fidelity_gamma", "quantum"])


# ===== 몬테카를로 =====

@dataclass(frozen=True, eq=False)
class ShotStatistics:
    """simulate_shots 결과"""
    seed: int
    shots: int
    input_mean: np.ndarray
    output_mean: np.ndarray
    output_cov: np.ndarray
    standard_error: np.ndarray
    fidelity_estimate: float
    fidelity_expected: float

    def to_row(self) -> Dict:
        return {
            "seed": self.seed,
            "shots": self.shots,
            "x_in": float(self.input_mean[0]),
            "p_in": float(self.input_mean[1]),
            "mean_x_out": float(self.output_mean[0]),
            "mean_p_out": float(self.output_mean[1]),
            "var_x_out": float(self.output_cov[0, 0]),
            "cov_xp_out": float(self.output_cov[0, 1]),
            "var_p_out": float(self.output_cov[1, 1]),
            "stderr_x": float(self.standard_error[0]),
            "stderr_p": float(self.standard_error[1]),
            "fidelity_estimate": self.fidelity_estimate,
            "fidelity_expected": self.fidelity_expected,
        }


def chunk_generator(seed: int, chunk_index: int) -> np.random.Generator:
    """
    카운터 기반 RNG 스트림

    (seed, chunk_index) 마다 독립된 Philox 카운터 블록 → 워커 수와 무관하게 동일한 샘플
    """
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, chunk_index]))


def chunk_sizes(shots: int, chunk: int) -> List[int]:
    full, rest = divmod(shots, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _teleport_chunk(seed: int, chunk_index: int, size: int, input: InputSpec, resource: ResourceSpec,
                    orientation: str, deterministic: bool) -> np.ndarray:
    if deterministic:
        # 평균값 모드: 모든 요동 = 0
        inputs = np.tile([input.x_in, input.p_in], (size, 1))
        draws = np.zeros((size, 4))
    else:
        rng = chunk_generator(seed, chunk_index)
        v_in = input_covariance(input.y, orientation)
        inputs = rng.multivariate_normal([input.x_in, input.p_in], v_in, size=size, method="cholesky")
        # (q_A, p_A, q_B, p_B) ~ TMST(r, n)
        draws = rng.multivariate_normal(np.zeros(4), resource.state().cov.entries, size=size, method="cholesky")
    r = resource.r
    x1, p1 = draws[:, 0] * np.exp(-r), draws[:, 1] * np.exp(r)
    # Bob 팔의 π 위상 기준: (e^r x₂, e^{-r} p₂) = (−q_B, −p_B)
    x2, p2 = -draws[:, 2] * np.exp(-r), -draws[:, 3] * np.exp(r)
    record = _measure(inputs[:, 0], inputs[:, 1], x1, p1, r, HomodyneConfig())
    return np.column_stack([np.exp(r) * x2 + record.X_u, np.exp(-r) * p2 + record.P_v])


def simulate_shots(input: InputSpec, resource: ResourceSpec, shots: int, seed: int,
                   workers: int = 1, chunk: Optional[int] = None, orientation: str = "standard",
                   deterministic: bool = False) -> ShotStatistics:
    """
    가우시안 프로토콜의 몬테카를로 실현

    입력 요동은 V'_in, 자원은 TMST 결합 분포에서 추출 →
    alice_measure + bob_reconstruct 를 샷마다 적용.
    같은 seed 면 워커 수와 상관없이 비트 단위로 같은 결과.
    deterministic=True 면 분산을 0으로 두고 평균값만 전파한다.
    """
    if shots < 1:
        raise TeleportError(f"shots must be >= 1, got {shots}")
    chunk = chunk or Config.MC_CHUNK
    sizes = chunk_sizes(shots, chunk)

    def run(job):
        index, size = job
        return _teleport_chunk(seed, index, size, input, resource, orientation, deterministic)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, enumerate(sizes)))
    else:
        parts = [run(job) for job in enumerate(sizes)]
    outputs = np.concatenate(parts, axis=0)

    mean = outputs.mean(axis=0)
    cov = np.cov(outputs, rowvar=False) if shots > 1 else np.zeros((2, 2))
    stderr = np.sqrt(np.diag(cov) / shots)
    v_in = input_covariance(input.y, orientation)
    # 표본 공분산이 없으면 (평균값 모드, 단일 샷) 추정치도 없다
    fidelity_estimate = float("nan")
    if shots > 1 and not deterministic:
        det = np.linalg.det(v_in + cov)
        if det > 0:
            fidelity_estimate = float(2.0 / np.sqrt(det))

    logger.debug(f"simulate_shots: seed={seed} shots={shots} chunks={len(sizes)} workers={workers}")
    return ShotStatistics(
        seed=seed,
        shots=shots,
        input_mean=np.array([input.x_in, input.p_in]),
        output_mean=mean,
        output_cov=cov,
        standard_error=stderr,
        fidelity_estimate=fidelity_estimate,
        fidelity_expected=fidelity_gamma(v_in, resource.state()),
    )
