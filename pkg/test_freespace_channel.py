"""
Free-space Channel 테스트
손실 블록, 등가 TMST round trip, margin, 자유공간 fidelity, 스윕
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from freespace_channel import (
    SWEEP_COLUMNS, BathParams, ConstraintViolation, equivalence_margin, equivalent_tmst,
    fidelity_sweep, freespace_fidelity, lossy_resource_blocks, margin_root, quantum_threshold,
)
from gaussian_core import Z, TeleportError, assemble_blocks, partition_blocks, physicality, tmsv
from teleport_protocol import fidelity_closed_form


def _random_valid_points(count, seed=2024):
    """margin 이 충분히 양수인 (r, η, N) 표본"""
    rng = np.random.default_rng(seed)
    points = []
    while len(points) < count:
        r = rng.uniform(0, 2)
        bath = BathParams(eta=rng.uniform(0.05, 1.0), N=rng.uniform(0, 3))
        if equivalence_margin(r, bath) > 0.05:
            points.append((r, bath))
    return points


# ===== 데이터 구조 =====

@pytest.mark.parametrize("eta, N", [(0.0, 0.0), (1.2, 0.0), (0.5, -1.0)])
def test_bath_params_range(eta, N):
    with pytest.raises(TeleportError):
        BathParams(eta=eta, N=N)


# ===== 손실 블록 =====

@pytest.mark.parametrize("N", [0.0, 0.7, 5.0])
def test_lossy_blocks_no_mixing(N):
    block_a, block_b, block_c = lossy_resource_blocks(1.1, BathParams(eta=1.0, N=N))
    expected = partition_blocks(tmsv(1.1).cov)
    assert_allclose(block_a, expected[0])
    assert_allclose(block_b, expected[1])
    assert_allclose(block_c, expected[2])


def test_lossy_blocks_worked_example():
    block_a, block_b, block_c = lossy_resource_blocks(0.0, BathParams(eta=0.5, N=1.0))
    assert_allclose(block_a, 2 * np.eye(2))
    assert_allclose(block_b, np.eye(2))
    assert_allclose(block_c, np.zeros((2, 2)))


def test_lossy_blocks_are_physical():
    rng = np.random.default_rng(31)
    for _ in range(300):
        bath = BathParams(eta=rng.uniform(0.01, 1.0), N=rng.uniform(0, 4))
        cov = assemble_blocks(*lossy_resource_blocks(rng.uniform(0, 2.5), bath))
        ok, _ = physicality(cov, tol=1e-9)
        assert ok


# ===== 등가 TMST =====

@pytest.mark.parametrize("r", np.round(np.arange(0.1, 2.01, 0.1), 1))
def test_equivalent_tmst_lossless(r):
    eq = equivalent_tmst(r, BathParams(eta=1.0, N=0.0))
    assert eq.s_prime == pytest.approx(r, abs=1e-12)
    assert eq.x1 == pytest.approx(0.0, abs=1e-12)
    assert eq.x2 == pytest.approx(0.0, abs=1e-12)
    assert eq.n == pytest.approx(0.0, abs=1e-12)


def test_equivalent_tmst_worked_example():
    eq = equivalent_tmst(0.0, BathParams(eta=0.5, N=1.0))
    assert eq.s_prime == pytest.approx(0.0, abs=1e-15)
    assert eq.x1 == pytest.approx(np.log(2) / 8)
    assert eq.x2 == pytest.approx(-3 * np.log(2) / 8)
    assert eq.n == pytest.approx((2 ** 1.5 - 1) / 2)
    assert eq.is_thermal


def test_equivalent_tmst_round_trip():
    """등가 블록 재조립 = 손실 블록 (1000 점, 1e-10)"""
    for r, bath in _random_valid_points(1000):
        direct = assemble_blocks(*lossy_resource_blocks(r, bath))
        rebuilt = equivalent_tmst(r, bath).covariance()
        assert np.max(np.abs(rebuilt - direct)) <= 1e-10


def test_equivalent_tmst_keeps_z_structure():
    _, _, block_c = equivalent_tmst(0.6, BathParams(eta=0.8, N=0.3)).blocks()
    assert block_c[0, 0] > 0
    assert_allclose(block_c, block_c[0, 0] * Z)


@pytest.mark.parametrize("eta, N", [(1.0, 0.0), (1.0, 2.0)])
def test_equivalent_tmst_thermal_when_lossless(eta, N):
    for r in np.linspace(0, 2, 11):
        eq = equivalent_tmst(r, BathParams(eta=eta, N=N))
        assert eq.is_thermal or eq.n == pytest.approx(0.0, abs=1e-12)
        assert np.isfinite(eq.s_prime)


def test_equivalent_tmst_thermal_at_zero_squeezing():
    rng = np.random.default_rng(8)
    for _ in range(100):
        eq = equivalent_tmst(0.0, BathParams(eta=rng.uniform(0.01, 1.0), N=rng.uniform(0, 5)))
        assert eq.n >= -1e-15


def test_equivalent_tmst_constraint_violation():
    bath = BathParams(eta=0.5, N=0.0)
    with pytest.raises(ConstraintViolation) as excinfo:
        equivalent_tmst(1.0, bath)
    assert excinfo.value.margin == pytest.approx(equivalence_margin(1.0, bath))
    assert excinfo.value.margin < 0


# ===== margin =====

def test_margin_at_zero_squeezing():
    for eta, N in [(0.1, 0.0), (0.5, 2.0), (1.0, 0.0)]:
        assert equivalence_margin(0.0, BathParams(eta=eta, N=N)) == pytest.approx(1.0)


def test_margin_lossless():
    for r in np.linspace(0, 3, 13):
        assert equivalence_margin(r, BathParams(eta=1.0)) == pytest.approx(1 - np.tanh(2 * r) ** 2, abs=1e-12)


def test_margin_root_boundary():
    """η=0.5, N=0: margin 근 = artanh(1/√2)"""
    root = margin_root(BathParams(eta=0.5, N=0.0))
    assert root == pytest.approx(np.arctanh(1 / np.sqrt(2)), abs=1e-3)
    assert root == pytest.approx(0.8814, abs=1e-3)


def test_margin_root_none_when_always_valid():
    assert margin_root(BathParams(eta=0.5, N=20.0), r_max=2.0) is None


@pytest.mark.parametrize("eta, N", [(0.3, 0.0), (0.5, 1.0), (0.9, 0.5), (0.99, 3.0)])
def test_margin_nonincreasing(eta, N):
    bath = BathParams(eta=eta, N=N)
    margins = np.array([equivalence_margin(r, bath) for r in np.linspace(0, 4, 200)])
    assert np.all(np.diff(margins) <= 1e-12)


# ===== fidelity =====

def test_freespace_fidelity_classical_limit():
    assert freespace_fidelity(0.0, 0.0, BathParams(eta=1.0)) == pytest.approx(0.5)


def test_freespace_fidelity_worked_example():
    expected = 1 / np.sqrt((np.exp(-1) + np.exp(-2)) * (np.e + np.exp(-2)))
    value = freespace_fidelity(0.5, 1.0, BathParams(eta=1.0))
    assert value == pytest.approx(expected, abs=1e-12)
    assert value == pytest.approx(0.8345, abs=1e-4)


def test_freespace_fidelity_reduces_to_closed_form():
    bath = BathParams(eta=1.0, N=0.0)
    for y in np.linspace(-1, 1, 9):
        for r in np.linspace(0.1, 2, 20):
            assert freespace_fidelity(y, r, bath) == pytest.approx(fidelity_closed_form(y, r, 0), abs=1e-12)


def test_freespace_fidelity_orientation():
    bath = BathParams(eta=0.8, N=0.2)
    standard = freespace_fidelity(0.3, 0.5, bath)
    inverse = freespace_fidelity(0.3, 0.5, bath, orientation="inverse")
    # A″, B″ 가 등방이라 방향을 바꿔도 같은 값
    assert inverse == pytest.approx(standard, abs=1e-12)
    assert freespace_fidelity(-0.3, 0.5, bath) == pytest.approx(standard, abs=1e-12)


def test_freespace_fidelity_propagates_violation():
    with pytest.raises(ConstraintViolation):
        freespace_fidelity(0.0, 1.5, BathParams(eta=0.5, N=0.0))


@pytest.mark.parametrize("eta, N", [(0.9, 0.0), (0.9, 0.5), (0.5, 0.0)])
def test_fidelity_nondecreasing_on_valid_region(eta, N):
    bath = BathParams(eta=eta, N=N)
    frame = fidelity_sweep([0.0], np.linspace(0, 3, 121), [bath])
    curve = frame.loc[frame["feasible"], "fidelity"].to_numpy()
    assert len(curve) > 10
    assert np.all(np.diff(curve) >= -1e-12)
    assert np.all(curve <= 1.0)


def test_quantum_threshold():
    bath = BathParams(eta=0.9, N=0.5)
    r_star = quantum_threshold(0.0, bath)
    assert r_star is not None and r_star > 0
    assert freespace_fidelity(0.0, r_star, bath) == pytest.approx(0.5, abs=1e-9)
    assert freespace_fidelity(0.0, r_star + 0.01, bath) > 0.5
    assert freespace_fidelity(0.0, max(r_star - 0.01, 0.0), bath) < 0.5


def test_quantum_threshold_none_for_noisy_bath():
    """N 이 크면 유효 영역 전체에서 고전"""
    assert quantum_threshold(0.0, BathParams(eta=0.5, N=5.0), r_max=3.0) is None


# ===== 스윕 =====

def test_sweep_single_point():
    bath = BathParams(eta=0.8, N=0.1)
    frame = fidelity_sweep([0.2], [0.4], [bath])
    assert list(frame.columns) == SWEEP_COLUMNS
    assert len(frame) == 1
    assert frame.loc[0, "fidelity"] == pytest.approx(freespace_fidelity(0.2, 0.4, bath))


def test_sweep_lossless_approaches_one():
    frame = fidelity_sweep([0.0], np.linspace(0, 5, 11), [BathParams(eta=1.0)])
    assert frame["feasible"].all()
    assert frame["fidelity"].iloc[-1] >= 0.999


def test_sweep_marks_infeasible_rows():
    baths = [BathParams(eta=0.5, N=0.0), BathParams(eta=0.9, N=1.0)]
    frame = fidelity_sweep([0.0, 0.5], np.linspace(0, 3, 31), baths)
    assert len(frame) == 2 * 2 * 31
    for _, row in frame.iterrows():
        margin = equivalence_margin(row["r"], BathParams(eta=row["eta"], N=row["N"]))
        assert row["feasible"] == (margin > 1e-12)
        assert np.isnan(row["fidelity"]) == (not row["feasible"])


def test_sweep_row_order_independent_of_workers():
    baths = [BathParams(eta=e, N=0.2) for e in (1.0, 0.9, 0.6)]
    serial = fidelity_sweep([0.0, 0.3], np.linspace(0, 2, 21), baths, workers=1)
    parallel = fidelity_sweep([0.0, 0.3], np.linspace(0, 2, 21), baths, workers=4)
    assert serial.equals(parallel)


def test_sweep_rejects_empty_grid():
    with pytest.raises(TeleportError):
        fidelity_sweep([], [0.1], [BathParams(eta=1.0)])
