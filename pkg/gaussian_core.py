"""
Gaussian Core - N-모드 가우시안 상태의 symplectic 표현
1차 모멘트 벡터 + 공분산 행렬 (ħ=2, vacuum = 𝕀)
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from config import Config

logger = logging.getLogger('teleport.core')

ArrayLike = Union[Sequence[float], np.ndarray]


# ===== 예외 =====

class TeleportError(ValueError):
    """시뮬레이터 공통 예외"""


class DimensionError(TeleportError):
    """행렬/벡터 차원 불일치"""


class PhysicalityError(TeleportError):
    """불확정성 원리 위반 또는 비물리적 입력"""


class SingularCovarianceError(TeleportError):
    """det V ≤ tol 인 공분산 (Wigner 함수 정의 불가)"""


# ===== 상수 =====

# ω = [[0, 1], [-1, 0]]
OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])

# ℤ = diag(1, -1)
Z = np.diag([1.0, -1.0])

I2 = np.eye(2)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Ω = ⊕ω (2N×2N, 블록 대각)"""
    if n_modes < 1:
        raise DimensionError(f"n_modes must be >= 1, got {n_modes}")
    return np.kron(np.eye(n_modes), OMEGA_1)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


# ===== 데이터 구조 =====

@dataclass(frozen=True, eq=False)
class QuadratureVector:
    """(x₁, p₁, …, x_N, p_N) 순서의 quadrature 벡터"""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.size == 0 or values.size % 2:
            raise DimensionError(f"quadrature vector needs an even, nonzero length, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise TeleportError("quadrature vector entries must be finite")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def mode_count(self) -> int:
        return self.values.size // 2

    def mode(self, index: int) -> Tuple[float, float]:
        """index 번째 모드의 (x, p)"""
        return float(self.values[2 * index]), float(self.values[2 * index + 1])

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """대칭 2N×2N 공분산 행렬. 물리성 검사는 physicality()로 별도 수행"""
    entries: np.ndarray
    tol: float = field(default=Config.TOLERANCE, repr=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] % 2:
            raise DimensionError(f"covariance must be square with even size, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise TeleportError("covariance entries must be finite")
        if np.max(np.abs(entries - entries.T)) > self.tol:
            raise DimensionError("covariance matrix is not symmetric")
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def mode_count(self) -> int:
        return self.entries.shape[0] // 2


@dataclass(frozen=True, eq=False)
class GaussianState:
    """가우시안 상태 ρ(x̄, V)"""
    mean: QuadratureVector
    cov: CovarianceMatrix

    def __post_init__(self):
        if self.mean.mode_count != self.cov.mode_count:
            raise DimensionError(
                f"mean has {self.mean.mode_count} modes but covariance has {self.cov.mode_count}"
            )

    @property
    def mode_count(self) -> int:
        return self.mean.mode_count

    def allclose(self, other: "GaussianState", atol: float = 1e-12) -> bool:
        return (
            self.mode_count == other.mode_count
            and np.allclose(self.mean.values, other.mean.values, atol=atol, rtol=0)
            and np.allclose(self.cov.entries, other.cov.entries, atol=atol, rtol=0)
        )


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    """가우시안 유니터리: x̄ → Sx̄ + d, V → SVSᵀ"""
    matrix: np.ndarray
    displacement: QuadratureVector

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
            raise DimensionError(f"transform matrix must be square with even size, got {matrix.shape}")
        if matrix.shape[0] != len(self.displacement):
            raise DimensionError("displacement length does not match transform size")
        object.__setattr__(self, "matrix", _frozen(matrix))

    @property
    def mode_count(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def linear(cls, matrix: ArrayLike) -> "SymplecticTransform":
        """d = 0 인 선형 변환"""
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix, QuadratureVector(np.zeros(matrix.shape[0])))


# ===== 상태 팩토리 =====

def _state(mean: ArrayLike, cov: ArrayLike) -> GaussianState:
    return GaussianState(QuadratureVector(mean), CovarianceMatrix(cov))


def _as_mean(mean: Optional[ArrayLike], size: int = 2) -> np.ndarray:
    if mean is None:
        return np.zeros(size)
    if isinstance(mean, QuadratureVector):
        return np.array(mean.values)
    mean = np.asarray(mean, dtype=float).reshape(-1)
    if mean.size != size:
        raise DimensionError(f"expected {size} mean entries, got {mean.size}")
    return mean


def _require_photons(n: float) -> None:
    if not np.isfinite(n) or n < 0:
        raise TeleportError(f"thermal photon number must be >= 0, got {n}")


def vacuum(n_modes: int = 1) -> GaussianState:
    """N-모드 진공 상태: x̄ = 0, V = 𝕀"""
    if n_modes < 1:
        raise DimensionError(f"n_modes must be >= 1, got {n_modes}")
    return _state(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def coherent(mean: ArrayLike) -> GaussianState:
    """코히런트 상태: V = 𝕀₂"""
    values = QuadratureVector(mean).values
    return _state(values, np.eye(values.size))


def thermal(n: float) -> GaussianState:
    """열 상태: V = (2n+1)𝕀₂"""
    _require_photons(n)
    return _state(np.zeros(2), (2 * n + 1) * I2)


def squeezed(r: float, mean: Optional[ArrayLike] = None) -> GaussianState:
    """
    스퀴즈드 (코히런트) 상태: V = diag(e^{-2r}, e^{2r})

    r의 부호로 V_r / V_{-r} 두 방향을 모두 표현
    """
    return _state(_as_mean(mean), np.diag([np.exp(-2 * r), np.exp(2 * r)]))


def general_single_mode(n: float, r: float, theta: float, mean: Optional[ArrayLike] = None) -> GaussianState:
    """V_G = (2n+1) R(θ) S(2r) R(θ)ᵀ"""
    _require_photons(n)
    rot = rotation(theta).matrix
    cov = (2 * n + 1) * rot @ squeezer(2 * r).matrix @ rot.T
    # 수치 대칭화
    return _state(_as_mean(mean), 0.5 * (cov + cov.T))


def tmst(r: float, n: float = 0.0) -> GaussianState:
    """
    대칭 two-mode squeezed thermal 상태

    A = B = (2n+1)cosh(2r)𝕀₂, C = (2n+1)sinh(2r)ℤ
    """
    _require_photons(n)
    scale = 2 * n + 1
    block_a = scale * np.cosh(2 * r) * I2
    block_c = scale * np.sinh(2 * r) * Z
    return _state(np.zeros(4), assemble_blocks(block_a, block_a, block_c))


def tmsv(r: float) -> GaussianState:
    """TMSV: tmst(r, 0)"""
    return tmst(r, 0.0)


# ===== 블록 연산 =====

def partition_blocks(cov: Union[CovarianceMatrix, np.ndarray]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """2-모드 공분산 V = [A, C; Cᵀ, B] → (A, B, C)"""
    entries = cov.entries if isinstance(cov, CovarianceMatrix) else np.asarray(cov, dtype=float)
    if entries.shape != (4, 4):
        raise DimensionError(f"block partition needs a 4x4 covariance, got {entries.shape}")
    return entries[:2, :2].copy(), entries[2:, 2:].copy(), entries[:2, 2:].copy()


def assemble_blocks(block_a: np.ndarray, block_b: np.ndarray, block_c: np.ndarray) -> np.ndarray:
    return np.block([[block_a, block_c], [block_c.T, block_b]])


# ===== 변환 빌더 =====

def identity_transform(n_modes: int = 1) -> SymplecticTransform:
    return SymplecticTransform.linear(np.eye(2 * n_modes))


def rotation(theta: float) -> SymplecticTransform:
    """R(θ) = [[cos θ, sin θ], [-sin θ, cos θ]]"""
    c, s = np.cos(theta), np.sin(theta)
    return SymplecticTransform.linear([[c, s], [-s, c]])


def squeezer(r: float) -> SymplecticTransform:
    """S(r) = diag(e^{-r}, e^{r})"""
    return SymplecticTransform.linear(np.diag([np.exp(-r), np.exp(r)]))


def input_squeezer(y: float) -> SymplecticTransform:
    """입력 스퀴저 J_in = diag(e^{-y}, e^{y})"""
    return squeezer(y)


def two_mode_squeezer(r: float) -> SymplecticTransform:
    """
    S₂(r) = [cosh r 𝕀₂, sinh r ℤ; sinh r ℤ, cosh r 𝕀₂]

    vacuum(2)에 적용하면 tmsv(r)과 같은 공분산을 만든다
    """
    ch, sh = np.cosh(r), np.sinh(r)
    return SymplecticTransform.linear(np.block([[ch * I2, sh * Z], [sh * Z, ch * I2]]))


def beamsplitter(tau: float) -> SymplecticTransform:
    """
    비대칭 빔스플리터 B_S(τ)₄

    Args:
        tau: 투과율 τ ∈ [0, 1]

    Returns:
        [√(1-τ)𝕀₂, √τ𝕀₂; -√τ𝕀₂, √(1-τ)𝕀₂]
    """
    if not 0.0 <= tau <= 1.0:
        raise TeleportError(f"beamsplitter transmissivity must lie in [0, 1], got {tau}")
    t, s = np.sqrt(1.0 - tau), np.sqrt(tau)
    return SymplecticTransform.linear(np.block([[t * I2, s * I2], [-s * I2, t * I2]]))


def direct_sum(parts: Sequence[SymplecticTransform]) -> SymplecticTransform:
    """블록 대각 직합 ⊕; displacement는 순서대로 이어붙임"""
    if not parts:
        raise DimensionError("direct_sum needs at least one transform")
    matrix = linalg.block_diag(*(p.matrix for p in parts))
    displacement = np.concatenate([p.displacement.values for p in parts])
    return SymplecticTransform(matrix, QuadratureVector(displacement))


def compose(*transforms: SymplecticTransform) -> SymplecticTransform:
    """
    compose(T₁, T₂, …, T_k): T₁을 먼저 적용하고 T_k를 마지막에 적용

    x̄ → S_k(…(S₁x̄ + d₁)…) + d_k
    """
    if not transforms:
        raise DimensionError("compose needs at least one transform")
    matrix = np.array(transforms[0].matrix)
    displacement = np.array(transforms[0].displacement.values)
    for t in transforms[1:]:
        if t.matrix.shape != matrix.shape:
            raise DimensionError("cannot compose transforms of different sizes")
        matrix = t.matrix @ matrix
        displacement = t.matrix @ displacement + t.displacement.values
    return SymplecticTransform(matrix, QuadratureVector(displacement))


# ===== 상태 연산 =====

def apply(state: GaussianState, t: SymplecticTransform) -> GaussianState:
    """x̄ → Sx̄ + d, V → SVSᵀ"""
    if state.mode_count != t.mode_count:
        raise DimensionError(
            f"transform acts on {t.mode_count} modes but the state has {state.mode_count}"
        )
    s = t.matrix
    mean = s @ state.mean.values + t.displacement.values
    cov = s @ state.cov.entries @ s.T
    return _state(mean, 0.5 * (cov + cov.T))


def displace(state: GaussianState, delta: ArrayLike, mode: int = 0) -> GaussianState:
    """선택한 모드의 1차 모멘트만 Δ만큼 이동 (공분산은 그대로)"""
    delta = _as_mean(delta)
    if not 0 <= mode < state.mode_count:
        raise DimensionError(f"mode {mode} out of range for a {state.mode_count}-mode state")
    mean = np.array(state.mean.values)
    mean[2 * mode:2 * mode + 2] += delta
    return GaussianState(QuadratureVector(mean), state.cov)


def is_symplectic(matrix: ArrayLike, tol: float = Config.TOLERANCE) -> bool:
    """max|SΩSᵀ − Ω| ≤ tol"""
    matrix = np.asarray(matrix.matrix if isinstance(matrix, SymplecticTransform) else matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"symplectic check needs a square matrix, got {matrix.shape}")
    if matrix.shape[0] % 2:
        raise DimensionError(f"symplectic check needs an even dimension, got {matrix.shape[0]}")
    omega = symplectic_form(matrix.shape[0] // 2)
    return bool(np.max(np.abs(matrix @ omega @ matrix.T - omega)) <= tol)


def symplectic_spectrum(cov: Union[CovarianceMatrix, np.ndarray]) -> np.ndarray:
    """iΩV 고유값의 절댓값 (모드당 하나, 오름차순)"""
    entries = cov.entries if isinstance(cov, CovarianceMatrix) else np.asarray(cov, dtype=float)
    omega = symplectic_form(entries.shape[0] // 2)
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * omega @ entries)))
    # ±ν 쌍 → 하나씩
    return moduli[::2]


def physicality(cov: Union[CovarianceMatrix, np.ndarray], tol: float = Config.TOLERANCE) -> Tuple[bool, np.ndarray]:
    """
    불확정성 원리 V − iΩ ⪰ 0 검사

    |iΩV| 고유값은 V 의 부호를 보지 않으므로 V ≻ 0 도 함께 요구한다.

    Returns:
        (V ≻ 0 이고 모든 symplectic 고유값 ≥ 1 − tol 인지 여부, 고유값 배열)
    """
    if not isinstance(cov, CovarianceMatrix):
        cov = CovarianceMatrix(cov, tol=tol)
    spectrum = symplectic_spectrum(cov)
    positive = bool(np.all(np.linalg.eigvalsh(cov.entries) > 0))
    return positive and bool(np.all(spectrum >= 1.0 - tol)), spectrum


def purity(state: GaussianState) -> float:
    """μ = 1/√det V (ħ=2)"""
    return float(1.0 / np.sqrt(np.linalg.det(state.cov.entries)))


def wigner(state: GaussianState, x: ArrayLike, tol: float = Config.TOLERANCE) -> float:
    """
    W(x) = exp{-½(x-x̄)ᵀV⁻¹(x-x̄)} / ((2π)^N √det V)

    det V ≤ tol 이면 극한값 대신 SingularCovarianceError
    """
    point = QuadratureVector(x).values
    if point.size != len(state.mean):
        raise DimensionError(f"evaluation point has {point.size} entries, state needs {len(state.mean)}")
    cov = state.cov.entries
    det = np.linalg.det(cov)
    if det <= tol:
        raise SingularCovarianceError(f"det V = {det:.3e} is not positive; Wigner function undefined")
    d = point - state.mean.values
    exponent = -0.5 * d @ np.linalg.solve(cov, d)
    return float(np.exp(exponent) / ((2 * np.pi) ** state.mode_count * np.sqrt(det)))


# ===== CSV 직렬화 =====

def row_header(n_modes: int) -> List[str]:
    """state_to_row 컬럼명: mean 다음 공분산 (row-major)"""
    labels = [f"{q}{k + 1}" for k in range(n_modes) for q in ("x", "p")]
    return [f"mean_{label}" for label in labels] + [
        f"cov_{i}_{j}" for i in range(2 * n_modes) for j in range(2 * n_modes)
    ]


def state_to_row(state: GaussianState) -> List[float]:
    return list(state.mean.values) + list(state.cov.entries.reshape(-1))
