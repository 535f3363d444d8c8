import math

import pytest
from pydantic import ValidationError

from app.exceptions import DomainError
from app.schemas.substances import (
    Coordinate,
    CoupledPair,
    PairModel,
    SpinHalf,
    ThermalPoint,
)
from app.services.numerics import central_diff
from app.services.substance import (
    energies,
    entropy,
    excited_weight_rates,
    excited_weights,
    force_moment,
    free_energy,
    generalized_force,
    gibbs,
    internal_energy,
    level_slopes,
    local_energy,
    reduced_local_state,
    single_spin_force,
    spectrum,
    thermal_point,
)

ANISOTROPIC = CoupledPair(
    B=1.0, J=0.5, model=PairModel.GENERAL_XY, gamma=0.3, delta=0.2
)


def test_xx_spectrum():
    levels = spectrum(CoupledPair(B=1.0, J=0.5))
    assert levels.energies == (-1.0, -0.5, 0.5, 1.0)
    assert [level.label for level in levels.levels] == [
        "psi1", "psi2", "psi3", "psi4"
    ]


def test_general_xy_spectrum():
    radius = math.hypot(1.0, 0.5 * 0.3)
    expected = (0.1 - radius, -0.6, 0.4, 0.1 + radius)
    for got, want in zip(energies(ANISOTROPIC), expected):
        assert got == pytest.approx(want, abs=1e-15)


def test_spin_half_spectrum():
    assert energies(SpinHalf(B=2.0)) == (-1.0, 1.0)


def test_xx_model_rejects_anisotropy():
    with pytest.raises(ValidationError):
        CoupledPair(B=1.0, J=0.5, gamma=0.3)


def test_substance_domains():
    with pytest.raises(ValidationError):
        CoupledPair(B=1.0, J=-0.1)
    with pytest.raises(ValidationError):
        SpinHalf(B=0.0)
    with pytest.raises(DomainError):
        thermal_point(CoupledPair(B=1.0, J=0.5), 0.0)
    with pytest.raises(DomainError):
        CoupledPair(B=1.0, J=0.0).Y


def test_internal_energy_reference_point(xx_point):
    assert internal_energy(xx_point) == pytest.approx(-0.7943905, abs=1e-6)
    sinh_ratio = math.sinh(2.0) / (math.cosh(2.0) + math.cosh(1.0))
    half_ratio = math.sinh(1.0) / (math.cosh(2.0) + math.cosh(1.0))
    assert internal_energy(xx_point) == pytest.approx(
        -sinh_ratio - 0.5 * half_ratio, abs=1e-14
    )


def test_force_reference_point():
    s = CoupledPair(B=1.0, J=0.5)
    assert generalized_force(s, 2.0) == pytest.approx(-0.6836327, abs=1e-6)


def test_energy_is_sum_of_force_moments():
    for B, J, beta in ((1.0, 0.5, 2.0), (0.4, 2.5, 7.0), (3.0, 0.0, 0.3)):
        s = CoupledPair(B=B, J=J)
        tp = thermal_point(s, beta)
        moments = force_moment(s, beta, Coordinate.X) + force_moment(
            s, beta, Coordinate.Y
        )
        assert internal_energy(tp) == pytest.approx(moments, abs=1e-13)


def test_single_spin_reference_point():
    tp = thermal_point(SpinHalf(B=1.0), 2.0)
    assert entropy(tp) == pytest.approx(
        math.log(2.0 * math.cosh(1.0)) - math.tanh(1.0), abs=1e-14
    )
    assert entropy(tp) == pytest.approx(0.365334, abs=1e-6)
    assert free_energy(SpinHalf(B=1.0), 2.0) == pytest.approx(
        -0.563464, abs=1e-6
    )
    assert internal_energy(tp) == pytest.approx(
        single_spin_force(1.0, 2.0) * 1.0, abs=1e-15
    )


def test_entropy_is_symmetric_in_b_and_j():
    a = thermal_point(CoupledPair(B=0.7, J=1.9), 1.3)
    b = thermal_point(CoupledPair(B=1.9, J=0.7), 1.3)
    assert entropy(a) == pytest.approx(entropy(b), abs=1e-14)


def test_xx_forces_are_negative():
    for s in (CoupledPair(B=1.0, J=0.5), CoupledPair(B=0.5, J=2.0)):
        for which in Coordinate:
            for beta in (0.01, 1.0, 50.0):
                assert generalized_force(s, beta, which) < 0.0


def test_force_at_low_temperature_does_not_overflow():
    s = CoupledPair(B=1.0, J=0.5)
    assert generalized_force(s, 1e4) == pytest.approx(-1.0, abs=1e-12)
    assert free_energy(s, 1e4) == pytest.approx(-1.0, abs=1e-12)


def test_force_undefined_cases():
    with pytest.raises(DomainError):
        generalized_force(CoupledPair(B=1.0, J=0.0), 1.0, Coordinate.Y)
    with pytest.raises(DomainError):
        generalized_force(SpinHalf(B=1.0), 1.0, Coordinate.Y)
    with pytest.raises(DomainError):
        single_spin_force(0.0, 1.0)
    assert force_moment(CoupledPair(B=1.0, J=0.0), 1.0, Coordinate.Y) == 0.0


def test_general_xy_force_against_level_slopes():
    beta = 2.0
    tp = thermal_point(ANISOTROPIC, beta)
    slopes = level_slopes(ANISOTROPIC, "J")
    expected = 0.5**2 * math.fsum(
        p * d for p, d in zip(tp.probs, slopes)
    )
    assert generalized_force(
        ANISOTROPIC, beta, Coordinate.Y
    ) == pytest.approx(expected, abs=1e-15)


def test_local_state_reference_point():
    s = CoupledPair(B=1.0, J=0.5)
    local = reduced_local_state(s, 2.0)
    F_x = generalized_force(s, 2.0)
    assert local.F_loc == pytest.approx(0.5 * F_x, abs=1e-13)
    assert local.beta_loc == pytest.approx(
        2.0 * math.atanh(-F_x), rel=1e-12
    )
    assert local.beta_loc == pytest.approx(1.671805, abs=1e-6)
    assert local_energy(s, 2.0) == pytest.approx(
        local.F_loc * s.X, abs=1e-13
    )


def test_local_state_of_general_xy_pair():
    local = reduced_local_state(ANISOTROPIC, 2.0)
    assert local.F_loc == pytest.approx(
        0.5 * generalized_force(ANISOTROPIC, 2.0), abs=1e-13
    )


def test_local_state_at_zero_excitation():
    local = reduced_local_state(CoupledPair(B=1.0, J=0.5), 1e4)
    assert local.p_e == 0.0
    assert local.beta_loc == math.inf
    assert local.T_loc == 0.0
    assert local.F_loc == -0.5


def test_uncoupled_pair_spins_are_thermal():
    local = reduced_local_state(CoupledPair(B=1.3, J=0.0), 0.8)
    assert local.beta_loc == pytest.approx(0.8, rel=1e-12)


def test_excited_weights():
    assert excited_weights(CoupledPair(B=1.0, J=0.5)) == (0.0, 0.5, 0.5, 1.0)
    weights = excited_weights(ANISOTROPIC)
    assert weights[0] + weights[3] == pytest.approx(1.0, abs=1e-15)


def test_excited_weight_rates_match_finite_differences():
    for dB, dJ in ((1.0, 0.0), (0.0, 1.0)):
        rates = excited_weight_rates(ANISOTROPIC, dB, dJ)

        def moved(t: float, n: int) -> float:
            s = ANISOTROPIC.with_params(
                B=ANISOTROPIC.B + dB * t, J=ANISOTROPIC.J + dJ * t
            )
            return excited_weights(s)[n]

        for n in range(4):
            assert rates[n] == pytest.approx(
                central_diff(lambda t: moved(t, n), 0.0), abs=1e-8
            )


@pytest.mark.parametrize(
    "substance",
    [SpinHalf(B=1.0), CoupledPair(B=1.0, J=0.5), CoupledPair(B=0.3, J=2.5)]
    + [ANISOTROPIC],
)
def test_probabilities_are_normalized(substance):
    ratio = math.log(50.0 / 1e-3)
    for k in range(40):
        beta = 1e-3 * math.exp(ratio * k / 39)
        tp = thermal_point(substance, beta)
        assert abs(math.fsum(tp.probs) - 1.0) <= 1e-14


def test_high_temperature_populations_are_uniform():
    tp = gibbs(spectrum(CoupledPair(B=1.0, J=0.5)), 1e-12)
    assert tp.probs == pytest.approx((0.25,) * 4, abs=1e-12)


@pytest.mark.parametrize("B", [0.3, 1.0, 2.5])
@pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
def test_uncoupled_pair_is_two_single_spins(B, beta):
    pair = thermal_point(CoupledPair(B=B, J=0.0), beta)
    spin = thermal_point(SpinHalf(B=B), beta)
    F_x = generalized_force(pair.substance, beta, Coordinate.X)
    assert F_x == pytest.approx(
        2.0 * single_spin_force(1.0 / B, beta), rel=1e-12, abs=1e-15
    )
    assert internal_energy(pair) == pytest.approx(
        2.0 * internal_energy(spin), rel=1e-12, abs=1e-15
    )
    assert entropy(pair) == pytest.approx(
        2.0 * entropy(spin), rel=1e-12, abs=1e-13
    )


def test_thermal_point_rejects_unnormalized_probabilities():
    with pytest.raises(ValidationError):
        ThermalPoint(
            substance=SpinHalf(B=1.0),
            beta=1.0,
            energies=(-0.5, 0.5),
            probs=(0.5, 0.5 + 1e-13),
            log_z=0.0,
        )
