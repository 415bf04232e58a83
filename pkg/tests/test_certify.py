import dataclasses
import itertools
import math

import numpy as np
import pytest

from cdplift.certify import (
    CertificateIntegrityError,
    DualCertificate,
    GolfingFailure,
    GolfingParams,
    InjectivityReport,
    certify_optimality,
    check_near_isotropy_exact,
    check_two_design_exact,
    format_construction_log,
    golfing_construct,
    injectivity_spectrum,
    symmetric_projector,
    truncation_statistics,
    validate_moments,
    variance_bound_check,
    verify_certificate,
)
from cdplift.diffraction import (
    MaskSet,
    MeasurementFrame,
    apply_A,
    apply_A_adjoint,
    apply_R,
    sample_masks,
    ternary_mask_distribution,
)
from cdplift.hermitian import TangentSpace, norm
from test_diffraction import five_point_distribution
from util import dense_frame_element, random_hermitian, random_tangent, unit_signal


# ---------------------------------------------------------------------------
# moment validation


def test_moments_ternary_all_conditions_hold():
    report = validate_moments(ternary_mask_distribution())
    assert report.ok
    assert all(report.conditions.values())
    assert report.moments == pytest.approx((0.0, 1.0, 0.0, 2.0), abs=1e-14)


def test_moments_rademacher_fails_fourth_condition():
    # plain +-1 signs: E[eps^4] = 1 but 2 E[eps^2]^2 = 2
    report = validate_moments((1.0, -1.0), (0.5, 0.5))
    assert not report.ok
    assert report.conditions["mean_zero"]
    assert report.conditions["variance_positive"]
    assert not report.conditions["fourth_moment_condition"]


def test_moments_point_mass_zero_has_no_variance():
    report = validate_moments((0.0,), (1.0,))
    assert not report.ok
    assert not report.conditions["variance_positive"]


def test_moments_flag_unnormalized_probabilities():
    report = validate_moments((1.0, -1.0), (0.4, 0.4))
    assert not report.conditions["probabilities_normalized"]


def test_moments_raw_sequences_require_probabilities():
    with pytest.raises(ValueError):
        validate_moments((1.0, -1.0))


# ---------------------------------------------------------------------------
# exact isotropy / 2-design, with fully independent oracles


def expected_R_analytic(dist, d, i, j):
    """E[R](E_ij) from the factored fourth-moment formula.

    Independence across coordinates gives
    E[R](E_ij)[a,b] = (1/nu^2) E[eps_a eps_b eps_i eps_j] [a - b = i - j mod d],
    with the expectation multiplying one moment per distinct index.
    """
    out = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            if (a - b) % d != (i - j) % d:
                continue
            counts = {}
            for idx in (a, b, i, j):
                counts[idx] = counts.get(idx, 0) + 1
            val = 1.0
            for c in counts.values():
                val *= dist.moment(c)
            out[a, b] = val / dist.nu**2
    return out


def enumerated_R_dense(dist, d, i, j):
    """Probability-weighted average of R(E_ij) by brute-force dense frames."""
    E = np.zeros((d, d), dtype=complex)
    E[i, j] = 1.0
    probs = dict(zip(dist.support, dist.probabilities))
    acc = np.zeros((d, d), dtype=complex)
    for combo in itertools.product(dist.support, repeat=d):
        p = np.prod([probs[v] for v in combo])
        eps = np.asarray(combo)
        for k in range(1, d + 1):
            F = dense_frame_element(eps, k)
            acc += p * np.trace(F @ E) * F
    return acc / (dist.nu**2 * d)


@pytest.mark.parametrize("d", [3, 4])
def test_analytic_formula_matches_dense_enumeration(d):
    dist = ternary_mask_distribution()
    for i in range(d):
        for j in range(d):
            dense = enumerated_R_dense(dist, d, i, j)
            analytic = expected_R_analytic(dist, d, i, j)
            assert np.allclose(dense, analytic, atol=1e-13)


def test_near_isotropy_exact_small_odd_dimensions():
    dist = ternary_mask_distribution()
    assert check_near_isotropy_exact(dist, 3) <= 1e-13
    assert check_near_isotropy_exact(five_point_distribution(), 3) <= 1e-12


def test_near_isotropy_deviation_agrees_with_analytic_worst_case():
    # the implementation's enumeration and the moment formula must report the
    # same worst deviation from E_ij + delta_ij Id — including at even d,
    # where both see the exact failure of the identity
    dist = ternary_mask_distribution()
    for d in (3, 4):
        worst = 0.0
        for i in range(d):
            for j in range(d):
                target = expected_R_analytic(dist, d, i, j)
                ref = np.zeros((d, d))
                ref[i, j] += 1.0
                if i == j:
                    ref += np.eye(d)
                worst = max(worst, np.max(np.abs(target - ref)))
        impl = check_near_isotropy_exact(dist, d)
        assert impl == pytest.approx(worst, abs=1e-12)


def test_near_isotropy_even_dimension_fails():
    assert check_near_isotropy_exact(ternary_mask_distribution(), 4) > 1e-6


def test_enumeration_budget_enforced():
    dist = ternary_mask_distribution()
    with pytest.raises(ValueError, match="budget"):
        check_near_isotropy_exact(dist, 31, budget=1000)
    with pytest.raises(ValueError, match="budget"):
        check_two_design_exact(dist, 31, budget=1000)


def test_symmetric_projector_properties():
    for d in (2, 3, 4):
        P = symmetric_projector(d)
        assert np.allclose(P @ P, P, atol=1e-12)
        assert np.allclose(P, P.conj().T)
        assert np.trace(P) == pytest.approx(d * (d + 1) / 2)


def test_two_design_identity_odd_and_even():
    dist = ternary_mask_distribution()
    assert check_two_design_exact(dist, 3) <= 1e-13
    assert check_two_design_exact(dist, 4) > 1e-6


# ---------------------------------------------------------------------------
# robust injectivity


def test_injectivity_passes_at_comfortable_mask_count():
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(0)
    x = unit_signal(rng, 7)
    frame = MeasurementFrame(sample_masks(dist, 7, 200, seed=1))
    report = injectivity_spectrum(frame, x, seed=0)
    assert report.passes_quarter_bound
    assert 1 + report.lambda_min_restricted > 0.25
    assert report.upper_bound_margin >= 0.0


def test_injectivity_quadratic_form_identity():
    # tr(Z R Z) = (1/nu^2 d L) ||A(Z)||^2 ties the restricted spectrum to the
    # measurement energy; holds for every realization, not just on average
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(2)
    x = unit_signal(rng, 5)
    frame = MeasurementFrame(sample_masks(dist, 5, 12, seed=3))
    for _ in range(25):
        Z = random_tangent(rng, x)
        lhs = float(np.trace(Z @ apply_R(frame, Z)).real)
        energy = float(np.sum(apply_A(frame, Z) ** 2))
        rhs = energy / (dist.nu**2 * 5 * 12)
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_injectivity_empty_frame_fails_quarter_bound():
    # with no masks R = 0 and the deviation operator is -E[R] restricted to
    # T, whose smallest eigenvalue is -2 (attained on the X component, where
    # E[R](X) = X + P_T(Id) = 2X); the quarter bound cannot hold
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(4)
    x = unit_signal(rng, 5)
    frame = MeasurementFrame(MaskSet(epsilon=np.zeros((0, 5)), distribution=dist))
    report = injectivity_spectrum(frame, x, seed=0)
    assert not report.passes_quarter_bound
    assert 1 + report.lambda_min_restricted <= 0.0
    assert report.lambda_min_restricted == pytest.approx(-2.0, abs=1e-10)
    assert report.upper_bound_margin >= 0.0  # 0 <= b^4 d ||Z||^2 trivially


def test_injectivity_upper_bound_margin_never_negative():
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(5)
    for seed in range(5):
        d = int(rng.integers(3, 9))
        x = unit_signal(rng, d)
        frame = MeasurementFrame(sample_masks(dist, d, 20, seed=seed))
        report = injectivity_spectrum(frame, x, seed=seed)
        assert report.upper_bound_margin >= 0.0


# ---------------------------------------------------------------------------
# truncation statistics


def test_truncation_zero_anchor_never_triggers():
    frame = MeasurementFrame(sample_masks(ternary_mask_distribution(), 5, 10, seed=6))
    st = truncation_statistics(frame, np.zeros((5, 5)), gamma=1.0)
    assert st.exceed_count == 0
    assert st.empirical_prob == 0.0


def test_truncation_counts_match_naive_loop():
    dist = ternary_mask_distribution()
    d, L = 31, 30
    eps = sample_masks(dist, d, L, seed=7).epsilon.copy()
    eps[0] = np.sqrt(2.0)
    masks = MaskSet(epsilon=eps, distribution=dist)
    frame = MeasurementFrame(masks)
    u = eps[0] * np.exp(2j * np.pi * np.arange(1, d + 1) * d / d)
    v = u / np.linalg.norm(u)
    Z = np.outer(v, v.conj())
    st = truncation_statistics(frame, Z, gamma=1.0)
    thr = 2**1.5 * dist.b**2 * 1.0 * math.log(d) * np.linalg.norm(Z)
    count = 0
    for l in range(L):
        for k in range(1, d + 1):
            if abs(np.trace(dense_frame_element(eps[l], k) @ Z).real) > thr:
                count += 1
    assert st.exceed_count == count > 0
    assert st.total_terms == L * d
    assert st.empirical_prob == pytest.approx(count / (L * d))
    assert st.bound == pytest.approx(4 / 31)


def test_truncation_monotone_in_gamma():
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(8)
    d = 31
    eps = sample_masks(dist, d, 50, seed=9).epsilon.copy()
    eps[:5] = np.sqrt(2.0)
    frame = MeasurementFrame(MaskSet(epsilon=eps, distribution=dist))
    x = unit_signal(rng, d)
    Z = np.outer(x, x.conj())
    counts = [truncation_statistics(frame, Z, g).exceed_count for g in (1.0, 1.5, 2.0, 4.0)]
    assert counts == sorted(counts, reverse=True)
    assert truncation_statistics(frame, Z, 10.0**6).exceed_count == 0


def test_truncation_validates_inputs():
    frame = MeasurementFrame(sample_masks(ternary_mask_distribution(), 5, 3, seed=10))
    with pytest.raises(ValueError):
        truncation_statistics(frame, np.zeros((5, 5)), gamma=0.5)
    with pytest.raises(ValueError):
        truncation_statistics(frame, np.eye(5), gamma=1.0)  # rank 5, not tangent


# ---------------------------------------------------------------------------
# variance bounds


def test_variance_bounds_exact_ternary():
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(11)
    for trial in range(5):
        x = unit_signal(rng, 3)
        Z = random_tangent(rng, x)
        chk = variance_bound_check(dist, x, Z)
        assert chk.method == "exact_enumeration"
        assert chk.n_terms == 27
        assert chk.satisfied
        assert chk.lhs_operator <= chk.rhs_operator
        assert chk.lhs_trace <= chk.rhs_trace
        assert chk.lhs_operator > 0


def test_variance_bounds_exact_five_point():
    dist = five_point_distribution()
    rng = np.random.default_rng(12)
    x = unit_signal(rng, 3)
    chk = variance_bound_check(dist, x, random_tangent(rng, x))
    assert chk.method == "exact_enumeration"
    assert chk.n_terms == 125
    assert chk.satisfied


def test_variance_bounds_monte_carlo_fallback():
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(13)
    x = unit_signal(rng, 3)
    Z = random_tangent(rng, x)
    chk = variance_bound_check(dist, x, Z, budget=1, mc_samples=2000, seed=0)
    assert chk.method == "monte_carlo"
    assert chk.n_terms == 2000
    assert chk.satisfied  # constants have ~30x slack; MC noise cannot break them


def test_variance_requires_tangent_argument():
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(14)
    x = unit_signal(rng, 3)
    with pytest.raises(ValueError):
        variance_bound_check(dist, x, np.eye(3))


# ---------------------------------------------------------------------------
# golfing parameters


def test_golfing_schedule_resolution_at_d15():
    p = GolfingParams().resolve(15, ternary_mask_distribution())
    assert p.gamma == 9.0
    assert p.r == 4  # ceil(log2(15)/2) + ceil(log2(2)) + 1
    assert p.w == 40
    assert p.t_first == 0.125
    assert p.c_first == pytest.approx(1 / math.sqrt(2 * math.log(15)))
    assert p.t_later == pytest.approx(math.log(15) / 4)
    assert p.c_later == 0.5


def test_golfing_params_overrides_and_validation():
    p = GolfingParams(r=7, w=11, gamma=3.0, L1=50).resolve(15, ternary_mask_distribution())
    assert (p.r, p.w, p.gamma, p.L1) == (7, 11, 3.0, 50)
    with pytest.raises(ValueError):
        GolfingParams(omega=0.5)
    with pytest.raises(ValueError):
        GolfingParams(gamma=0.5)


# ---------------------------------------------------------------------------
# golfing construction


@pytest.fixture(scope="module")
def certificate():
    rng = np.random.default_rng(100)
    x = unit_signal(rng, 15)
    out = golfing_construct(x, ternary_mask_distribution(), GolfingParams(), seed=0)
    assert isinstance(out, DualCertificate)
    return x, out


def test_golfing_produces_valid_certificate(certificate):
    x, cert = certificate
    assert cert.valid
    assert cert.tangent_residual <= cert.tangent_bound
    assert cert.complement_norm <= 0.5
    assert cert.gamma == 9.0


def test_golfing_log_contraction_and_partial_sums(certificate):
    _, cert = certificate
    log = cert.construction_log
    assert log[0].phase == "fine" and log[1].phase == "fine"
    assert all(rec.phase == "coarse" for rec in log[2:])
    assert sum(rec.xi for rec in log[2:]) == 4  # r coarse successes

    q_prev, comp_bound = 1.0, 0.0
    for rec in log:
        if rec.xi:
            # accepted: ||Q_new||_2 <= c ||Q_prev||_2 and the complement grows
            # by at most t ||Q_prev||_2 (triangle inequality over iterations)
            assert rec.q_norm <= rec.c * q_prev + 1e-12
            comp_bound += rec.t * q_prev
            assert rec.complement_norm <= comp_bound + 1e-12
            q_prev = rec.q_norm
        else:
            assert rec.q_norm == pytest.approx(q_prev)


def test_golfing_telescoped_tangent_residual(certificate):
    # two fine contractions (1/sqrt(2 log d) each) then r halvings
    _, cert = certificate
    r = GolfingParams().resolve(15, ternary_mask_distribution()).r
    assert cert.tangent_residual <= (1 / (2 * math.log(15))) * 2.0**-r + 1e-12


def test_golfing_witness_reconstructs_Y(certificate):
    _, cert = certificate
    frame = MeasurementFrame(cert.masks)
    Y_rec = apply_A_adjoint(frame, cert.in_range_witness)
    assert np.linalg.norm(Y_rec - cert.Y) <= 1e-9 * np.linalg.norm(cert.Y)


def test_golfing_deterministic(certificate):
    x, cert = certificate
    again = golfing_construct(x, ternary_mask_distribution(), GolfingParams(), seed=0)
    assert isinstance(again, DualCertificate)
    assert np.array_equal(again.Y, cert.Y)
    assert np.array_equal(again.in_range_witness, cert.in_range_witness)


def test_golfing_zero_batch_fails_immediately():
    rng = np.random.default_rng(101)
    x = unit_signal(rng, 15)
    out = golfing_construct(x, ternary_mask_distribution(), GolfingParams(L1=0), seed=0)
    assert isinstance(out, GolfingFailure)
    assert "first fine" in out.reason
    assert len(out.construction_log) == 1
    assert out.masks_sampled == 0
    assert not out.construction_log[0].xi


def test_golfing_starved_batches_fail():
    rng = np.random.default_rng(102)
    x = unit_signal(rng, 15)
    out = golfing_construct(
        x, ternary_mask_distribution(), GolfingParams(L1=1, L2=1, L_later=1), seed=0
    )
    assert isinstance(out, GolfingFailure)


def test_golfing_needs_odd_dimension_and_unit_anchor():
    dist = ternary_mask_distribution()
    with pytest.raises(ValueError):
        golfing_construct(np.ones(4) / 2.0, dist, seed=0)
    with pytest.raises(ValueError):
        golfing_construct(np.ones(5), dist, seed=0)  # norm sqrt(5)


def test_format_construction_log(certificate):
    _, cert = certificate
    text = format_construction_log(cert.construction_log)
    lines = text.splitlines()
    assert lines[0].startswith("i phase L")
    assert len(lines) == len(cert.construction_log) + 1


# ---------------------------------------------------------------------------
# certificate verification


def lstsq_witness(frame, Y):
    """Coefficients c with A*(c) = Y, via dense least squares over the frame."""
    eps = frame.masks.epsilon
    L, d = eps.shape
    cols = np.empty((2 * d * d, L * d))
    for l in range(L):
        for k in range(1, d + 1):
            F = dense_frame_element(eps[l], k)
            cols[:, l * d + k - 1] = np.concatenate([F.real.ravel(), F.imag.ravel()])
    target = np.concatenate([Y.real.ravel(), Y.imag.ravel()])
    c, *_ = np.linalg.lstsq(cols, target, rcond=None)
    assert np.linalg.norm(cols @ c - target) <= 1e-9 * max(np.linalg.norm(Y), 1.0)
    return c


def synthetic_certificate(Y, masks, x):
    frame = MeasurementFrame(masks)
    T = TangentSpace(x)
    X = np.outer(x, x.conj())
    return DualCertificate(
        Y=Y,
        tangent_residual=float(np.linalg.norm(T.project(Y) - X)),
        complement_norm=norm(T.project_complement(Y), "operator"),
        construction_log=(),
        in_range_witness=lstsq_witness(frame, Y),
        masks=masks,
        anchor=x,
        gamma=9.0,
    )


def test_verify_certificate_exact_X():
    x = np.zeros(3, dtype=complex)
    x[0] = 1.0
    masks = sample_masks(ternary_mask_distribution(), 3, 5, seed=20)
    cert = synthetic_certificate(np.outer(x, x.conj()), masks, x)
    check = verify_certificate(cert, x)
    assert check.passed
    assert check.tangent_residual <= 1e-9
    assert check.complement_norm <= 1e-9


def test_verify_certificate_identity_shift_breaks_tangent_bound():
    # Y = X + Id/4: P_T(Y) - X = X/4 (norm 1/4 > nu/(4 b^2 sqrt(3)) ~ 0.072)
    # while ||P_Tperp(Y)||_inf = 1/4 still clears the 1/2 complement bound
    x = np.zeros(3, dtype=complex)
    x[0] = 1.0
    masks = sample_masks(ternary_mask_distribution(), 3, 5, seed=21)
    Y = np.outer(x, x.conj()) + np.eye(3) / 4
    cert = synthetic_certificate(Y, masks, x)
    check = verify_certificate(cert, x)
    assert check.tangent_residual == pytest.approx(0.25, abs=1e-9)
    assert check.complement_norm == pytest.approx(0.25, abs=1e-9)
    assert check.tangent_bound == pytest.approx(1 / (4 * 2 * np.sqrt(3)))
    assert not check.tangent_ok
    assert check.complement_ok
    assert not check.passed


def test_verify_certificate_detects_tampered_witness(certificate):
    x, cert = certificate
    witness = cert.in_range_witness.copy()
    witness[3] += 0.1
    bad = dataclasses.replace(cert, in_range_witness=witness)
    with pytest.raises(CertificateIntegrityError):
        verify_certificate(bad, x)


def test_verify_certificate_detects_tampered_matrix(certificate):
    x, cert = certificate
    Y = cert.Y.copy()
    Y[0, 0] += 0.5
    with pytest.raises(CertificateIntegrityError):
        verify_certificate(dataclasses.replace(cert, Y=Y), x)


# ---------------------------------------------------------------------------
# optimality verdict


def test_certify_optimality_happy_path(certificate):
    x, cert = certificate
    frame = MeasurementFrame(cert.masks)
    inj = injectivity_spectrum(frame, x, seed=0, probes=10)
    verdict = certify_optimality(x, frame, cert, inj)
    assert verdict.certified
    assert verdict.failing_hypotheses == ()


def test_certify_optimality_names_failures(certificate):
    x, cert = certificate
    frame = MeasurementFrame(cert.masks)
    inj_bad = InjectivityReport(
        lambda_min_restricted=-0.9, passes_quarter_bound=False, upper_bound_margin=1.0
    )
    cert_bad = dataclasses.replace(cert, complement_norm=0.9, tangent_residual=1.0)
    verdict = certify_optimality(x, frame, cert_bad, inj_bad)
    assert not verdict.certified
    joined = " ".join(verdict.failing_hypotheses)
    assert "tangent" in joined
    assert "complement" in joined
    assert "injectivity" in joined
    assert len(verdict.failing_hypotheses) == 3
