"""Tests for kernel-function spaces and conjugation eigenchecks."""

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from hyperlab.hardy import (
    AnalyticSymbol,
    BetaSpace,
    CertificateKind,
    adjoint_kernel_eigencheck,
    conjugation_eigencheck,
    converse_certificate,
    eval_function,
    kernel_vector,
    mult_op_matrix,
    nuclear_eigencheck,
    span_density_residual,
    unimodular_locus_sample,
)
from hyperlab.matops import MatOp
from hyperlab.seqspace import Domain, SeqVector, WeightSeq, hermitian_inner

ONE = AnalyticSymbol.from_coeffs([1.0])
Z = AnalyticSymbol.from_coeffs([0.0, 1.0])
Z_PLUS_1 = AnalyticSymbol.from_coeffs([1.0, 1.0])


def coeff_vec(pairs) -> SeqVector:
    return SeqVector(dict(pairs), Domain.NATURALS, 2.0)


# -- spaces and kernels -----------------------------------------------------

def test_beta_space_validation():
    with pytest.raises(ValueError):
        BetaSpace.hardy(0)
    with pytest.raises(ValueError):
        BetaSpace(WeightSeq.constant(1.0, domain=Domain.INTEGERS), 8)
    with pytest.raises(ValueError):
        BetaSpace(WeightSeq.table((1.0, -2.0), start=0, default=1.0), 8)
    sp = BetaSpace.inv_linear(8)
    assert sp.beta(3) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        sp.beta(9)


def test_kernel_at_origin_is_first_basis_vector():
    k = kernel_vector(BetaSpace.hardy(16), 0.0)
    assert k.coeffs.support() == (0,)
    assert k.coeffs.coeff(0) == 1.0
    assert k.tail_bound == 0.0


def test_kernel_reproduces_monomial_hardy():
    sp = BetaSpace.hardy(16)
    k = kernel_vector(sp, 0.5)
    e3 = coeff_vec({3: 1.0})
    assert hermitian_inner(e3, k.coeffs) == pytest.approx(0.125, abs=1e-15)


def test_kernel_reproduces_in_weighted_space():
    sp = BetaSpace.inv_linear(16)
    k = kernel_vector(sp, 0.5)
    f = coeff_vec({0: 1.0, 1: 1.0})
    value = eval_function(sp, f, 0.5)
    assert value == pytest.approx(1.25)
    assert abs(hermitian_inner(f, k.coeffs) - value) < 1e-10


def test_kernel_rejects_boundary_points():
    sp = BetaSpace.hardy(8)
    for z in (1.0, -1.0, 1.0 + 0.0j, 0.8 + 0.8j):
        with pytest.raises(ValueError):
            kernel_vector(sp, z)


@seed(90217)
@settings(max_examples=50, deadline=None)
@given(
    coeffs=st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)),
                    min_size=1, max_size=8),
    radius=st.floats(min_value=0.0, max_value=0.9),
    angle=st.floats(min_value=0.0, max_value=2.0 * math.pi),
)
def test_reproducing_property_for_polynomials(coeffs, radius, angle):
    sp = BetaSpace.inv_linear(16)
    z = radius * complex(math.cos(angle), math.sin(angle))
    f = coeff_vec({n: complex(re, im) for n, (re, im) in enumerate(coeffs)})
    k = kernel_vector(sp, z)
    lhs = hermitian_inner(f, k.coeffs)
    rhs = eval_function(sp, f, z)
    assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(rhs))


# -- multiplication matrices ------------------------------------------------

def test_mult_matrix_hardy_shift():
    m = mult_op_matrix(Z, BetaSpace.hardy(5))
    expect = np.diag(np.ones(5), -1)
    assert np.allclose(m.data, expect)


def test_mult_matrix_weighted_subdiagonal():
    m = mult_op_matrix(Z, BetaSpace.inv_linear(5))
    sub = np.diag(m.data, -1)
    assert np.allclose(sub, [(n + 2) / (n + 1) for n in range(5)])


def test_mult_matrix_constant_symbol():
    c = AnalyticSymbol.from_coeffs([2.5 - 1.0j])
    m = mult_op_matrix(c, BetaSpace.inv_linear(6))
    assert np.allclose(m.data, (2.5 - 1.0j) * np.eye(7))


def test_mult_matrix_algebra_morphism():
    sp = BetaSpace.inv_linear(16)
    a = AnalyticSymbol.from_coeffs([1.0, 2.0])
    b = AnalyticSymbol.from_coeffs([3.0, 0.0, 1.0])
    prod_coeffs = np.polymul([2.0, 1.0], [1.0, 0.0, 3.0])[::-1]
    ab = AnalyticSymbol.from_coeffs(list(prod_coeffs))
    lhs = mult_op_matrix(ab, sp).data
    rhs = mult_op_matrix(a, sp).data @ mult_op_matrix(b, sp).data
    keep = sp.dim + 1 - a.degree - b.degree
    assert np.max(np.abs(lhs[:, :keep] - rhs[:, :keep])) < 1e-10


# -- adjoint kernel eigenchecks ---------------------------------------------

def test_adjoint_eigencheck_geometric_scale():
    rep = adjoint_kernel_eigencheck(Z, BetaSpace.hardy(128), 0.6)
    # the truncated identity fails only in the top coefficient, which for
    # the coordinate symbol is exactly |z|^(N+1)
    assert rep.residual == pytest.approx(0.6 ** 129, rel=1e-12)
    assert rep.residual <= 0.6 ** 127
    assert rep.passed
    assert rep.eigenvalue == pytest.approx(0.6)


def test_adjoint_eigencheck_constant_symbol():
    c = AnalyticSymbol.from_coeffs([0.7 + 0.2j])
    rep = adjoint_kernel_eigencheck(c, BetaSpace.inv_linear(32), 0.4 + 0.3j)
    assert rep.residual == 0.0
    assert rep.eigenvalue == pytest.approx(0.7 - 0.2j)
    assert rep.passed


def test_adjoint_eigencheck_at_origin():
    rep = adjoint_kernel_eigencheck(AnalyticSymbol.from_coeffs([2.0, 3.0]),
                                    BetaSpace.hardy(32), 0.0)
    assert rep.residual == 0.0
    assert rep.passed


# -- conjugation eigenchecks ------------------------------------------------

def test_conjugation_eigencheck_quarter():
    rep = conjugation_eigencheck(Z, Z, BetaSpace.hardy(64), 0.5, 0.5)
    assert rep.eigenvalue == pytest.approx(0.25)
    assert rep.op_residual <= rep.s1_residual
    assert rep.passed


def test_conjugation_eigencheck_at_origin():
    phi = AnalyticSymbol.from_coeffs([1.0 + 2.0j, 1.0])
    psi = AnalyticSymbol.from_coeffs([0.5 - 1.0j, 0.0, 2.0])
    rep = conjugation_eigencheck(phi, psi, BetaSpace.hardy(24), 0.0, 0.0)
    assert rep.eigenvalue == pytest.approx((1.0 - 2.0j) * (0.5 - 1.0j))
    assert rep.s1_residual == 0.0
    assert rep.passed


def test_conjugation_with_constant_right_factor_is_rank_one():
    sp = BetaSpace.hardy(48)
    z, w = 0.45 + 0.2j, -0.3 + 0.5j
    conj_rep = conjugation_eigencheck(Z, ONE, sp, z, w)
    adj_rep = adjoint_kernel_eigencheck(Z, sp, z)
    norm_w = math.sqrt(sum(abs(w) ** (2 * n) for n in range(sp.dim + 1)))
    assert conj_rep.s1_residual == pytest.approx(adj_rep.residual * norm_w, rel=1e-10)
    assert conj_rep.op_residual == pytest.approx(conj_rep.s1_residual, rel=1e-10)


def test_eigencheck_residuals_decay_geometrically():
    # rate max(|z|, |w|) = 0.6: each doubling of the truncation shrinks the
    # residual by 0.6^N, checked to two orders of magnitude either way
    res = {n: conjugation_eigencheck(Z, Z, BetaSpace.hardy(n), 0.6, 0.6).s1_residual
           for n in (32, 64, 128)}
    for small, big in ((32, 64), (64, 128)):
        ratio = res[big] / res[small]
        assert 0.6 ** small / 100.0 <= ratio <= 0.6 ** small * 100.0


# -- unimodular locus -------------------------------------------------------

def test_locus_arc_through_disc():
    pts = unimodular_locus_sample(Z_PLUS_1, ONE, 16, 1e-3)
    assert pts
    for p in pts:
        assert abs(p.z) < 1.0 and abs(p.w) < 1.0
        assert abs(abs(p.z + 1.0) - 1.0) < 2e-3


def test_locus_empty_for_small_product():
    phi = AnalyticSymbol.from_coeffs([0.3])
    assert unimodular_locus_sample(phi, phi, 8, 1e-3) == []


def test_locus_half_radius_circle():
    pts = unimodular_locus_sample(AnalyticSymbol.from_coeffs([0.0, 2.0]), ONE,
                                  8, 1e-3)
    assert pts
    assert all(abs(abs(p.z) - 0.5) < 1e-3 for p in pts)


def test_locus_empty_for_coordinate_pair():
    # |z w| < 1 strictly inside the bidisc, so no crossing can exist
    assert unimodular_locus_sample(Z, Z, 8, 1e-3) == []
    assert unimodular_locus_sample(Z, Z, 16, 1e-3) == []


def test_locus_respects_exclusion_list():
    sym = AnalyticSymbol.from_coeffs([0.0, 2.0])
    pts = unimodular_locus_sample(sym, ONE, 8, 1e-3)
    banned = pts[0].eigenvalue(sym, ONE)
    kept = unimodular_locus_sample(sym, ONE, 8, 1e-3,
                                   exclude=(banned,), exclude_radius=1e-6)
    assert len(kept) < len(pts)
    for p in kept:
        assert abs(p.eigenvalue(sym, ONE) - banned) > 1e-6


def test_locus_rejects_sparse_grid():
    with pytest.raises(ValueError):
        unimodular_locus_sample(Z, Z, 4, 1e-3)


# -- span density -----------------------------------------------------------

def test_span_residual_of_own_kernel_tensor():
    sp = BetaSpace.hardy(16)
    z, w = 0.3 + 0.1j, -0.2 + 0.4j
    kz = kernel_vector(sp, z)
    kw = kernel_vector(sp, w)
    u = np.array([kz.coeffs.coeff(n) for n in range(17)])
    v = np.array([kw.coeffs.coeff(n) for n in range(17)])
    rep = span_density_residual([(z, w)], MatOp(np.outer(u, v.conj())), sp)
    assert rep.residual < 1e-10
    assert rep.metric == "frobenius"


def test_span_residual_single_sample_partial_fit():
    sp = BetaSpace.hardy(16)
    e00 = np.zeros((17, 17), dtype=complex)
    e00[0, 0] = 1.0
    rep = span_density_residual([(0.5, 0.5)], MatOp(e00), sp)
    # one kernel direction leaves most of the rank-one target unexplained;
    # the projection formula gives the residual in closed form
    n = np.arange(17)
    u = 0.5 ** n
    g = float(u @ u)
    want = math.sqrt(1.0 - (u[0] * u[0] / g) ** 2)
    assert rep.residual == pytest.approx(want, rel=1e-9)
    assert rep.residual > 0.5


def test_span_enrichment_decreases_residual():
    sp = BetaSpace.hardy(32)
    pts = unimodular_locus_sample(Z_PLUS_1, ONE, 16, 1e-3)
    pts = sorted(pts, key=lambda p: (round(p.z.real, 12), round(p.z.imag, 12),
                                     round(p.w.real, 12), round(p.w.imag, 12)))
    step = max(1, len(pts) // 64)
    s64 = pts[::step][:64]
    s8 = s64[::8]
    e00 = np.zeros((33, 33), dtype=complex)
    e00[0, 0] = 1.0
    r8 = span_density_residual(s8, MatOp(e00), sp)
    r64 = span_density_residual(s64, MatOp(e00), sp)
    assert r64.residual < r8.residual
    assert r8.residual == pytest.approx(0.030129, abs=0.006)
    assert r64.residual == pytest.approx(0.000572, abs=0.0003)


def test_span_requires_samples_and_matching_dim():
    sp = BetaSpace.hardy(8)
    tgt = MatOp(np.eye(9, dtype=complex))
    with pytest.raises(ValueError):
        span_density_residual([], tgt, sp)
    with pytest.raises(ValueError):
        span_density_residual([(0.1, 0.1)], MatOp(np.eye(4, dtype=complex)), sp)


# -- converse certificates --------------------------------------------------

def test_certificate_contraction():
    cert = converse_certificate(AnalyticSymbol.from_coeffs([0.5]), ONE)
    assert cert.kind is CertificateKind.NOT_HYPERCYCLIC_CONTRACTION
    assert cert.orbit_monotone
    assert len(cert.orbit_norms) == 51
    assert cert.orbit_norms[0] == pytest.approx(1.0)
    assert all(b <= a + 1e-9 for a, b in zip(cert.orbit_norms,
                                             cert.orbit_norms[1:]))


def test_certificate_inverse_contraction():
    cert = converse_certificate(AnalyticSymbol.from_coeffs([3.0, 1.0]), ONE)
    assert cert.kind is CertificateKind.NOT_HYPERCYCLIC_INVERSE_CONTRACTION
    assert cert.inf_phi >= 2.0
    assert cert.orbit_monotone
    assert all(b >= a - 1e-9 for a, b in zip(cert.orbit_norms,
                                             cert.orbit_norms[1:]))


def test_certificate_inconclusive_for_crossing_symbol():
    cert = converse_certificate(Z_PLUS_1, ONE)
    assert cert.kind is CertificateKind.INCONCLUSIVE


def test_certificate_uses_supplied_sup_bounds():
    phi = AnalyticSymbol.from_coeffs([0.5], sup_bound=0.5)
    psi = AnalyticSymbol.from_coeffs([1.0], sup_bound=1.0)
    cert = converse_certificate(phi, psi)
    assert not cert.sup_estimated
    assert cert.kind is CertificateKind.NOT_HYPERCYCLIC_CONTRACTION


# -- nuclear analogue -------------------------------------------------------

def test_nuclear_backward_geometric_eigenvector():
    rep = nuclear_eigencheck(Z, ONE, 0.5, 0.0, 1.0, dim=64)
    assert rep.eigenvalue == pytest.approx(0.5)
    # the only truncation defect is the clipped top coefficient 0.5^65
    assert rep.op_residual == pytest.approx(0.5 ** 65, rel=1e-12)
    assert rep.passed


def test_nuclear_origin_is_exact():
    phi = AnalyticSymbol.from_coeffs([0.7, 2.0])
    psi = AnalyticSymbol.from_coeffs([-0.2, 1.0, 1.0])
    rep = nuclear_eigencheck(phi, psi, 0.0, 0.0, 2.0, dim=16)
    assert rep.eigenvalue == pytest.approx(0.7 * -0.2)
    assert rep.op_residual == 0.0
    assert rep.passed


def test_nuclear_trace_pairing_identity():
    rep = nuclear_eigencheck(Z, Z, 0.3, 0.3, 1.0, dim=48, seed=7)
    assert rep.trace_gap <= 1e-10


def test_nuclear_validation():
    with pytest.raises(ValueError):
        nuclear_eigencheck(Z, ONE, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        nuclear_eigencheck(Z, ONE, 0.5, 0.0, 0.5)
