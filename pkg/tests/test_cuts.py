import math
from dataclasses import dataclass

import numpy as np
import pytest

from conftest import wedge_canonical, wedge_constraint
from quadfree import oracle, spectral
from quadfree.cuts import CutCertificate, SimplicialCone, intersection_cut, separate
from quadfree.errors import AllRaysRecessionError, EmptySError
from quadfree.freesets import (
    CLambda,
    CPhiLambda,
    CylinderLift,
    FreeSetDescriptor,
    build_free_set,
)

S2 = math.sqrt(2.0)


@dataclass(frozen=True)
class _BoxSet(FreeSetDescriptor):
    """Unit box on the first two coordinates; free coordinates ignored."""

    def margin(self, w):
        w = np.asarray(w, dtype=float)
        return np.max(np.abs(w[..., :2]), axis=-1) - 1.0


def _identity_cf(p):
    k = p + 1
    return spectral.CanonicalForm(
        n=k,
        m=0,
        l=0,
        M=np.eye(k),
        Minv=np.eye(k),
        a=np.zeros(k),
        d=np.zeros(0),
        h=np.zeros(0),
        mapped_point=np.zeros(k),
        lam=np.eye(k)[0],
        case=spectral.CASE_EMPTY_S,
    )


def test_simplicial_cone_rejects_degenerate_rays():
    with pytest.raises(ValueError):
        SimplicialCone(apex=np.zeros(2), R=np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_unit_steps_give_unit_sum_cut():
    cf = _identity_cf(2)
    fs = _BoxSet(3, 0, 0)
    cone = SimplicialCone(apex=np.zeros(2), R=np.eye(2))
    cert = intersection_cut(cone, cf, fs)
    assert all(st.value == pytest.approx(1.0, abs=1e-8) for st in cert.steps)
    # Σ s_j ≥ 1 under the ≤ convention: coef = −1, rhs = −1
    assert np.allclose(cert.coef, [-1.0, -1.0], atol=1e-8)
    assert cert.rhs == pytest.approx(-1.0, abs=1e-8)
    assert cert.apex_violation == pytest.approx(1.0, abs=1e-9)


def test_infinite_step_zeroes_coefficient():
    cf = _identity_cf(2)
    fs = _BoxSet(3, 0, 0)

    # rotate one ray into the third (ignored) coordinate: such a ray
    # never reaches the box boundary, so its weight is zero
    cone = SimplicialCone(apex=np.zeros(2), R=np.array([[1.0, 0.0], [0.0, 1.0]]))
    cert = intersection_cut(cone, cf, fs)

    @dataclass(frozen=True)
    class _Slab(FreeSetDescriptor):
        def margin(self, w):
            w = np.asarray(w, dtype=float)
            return np.abs(w[..., 0]) - 1.0

    slab = _Slab(3, 0, 0)
    cert = intersection_cut(cone, cf, slab)
    assert cert.steps[0].value == pytest.approx(1.0, abs=1e-8)
    assert cert.steps[1].value == math.inf
    assert cert.coef[1] == pytest.approx(0.0, abs=1e-12)


def test_all_rays_recession_raises():
    cf = _identity_cf(2)

    @dataclass(frozen=True)
    class _Everything(FreeSetDescriptor):
        def margin(self, w):
            w = np.asarray(w, dtype=float)
            return np.full(w.shape[:-1], -1.0)

    with pytest.raises(AllRaysRecessionError):
        intersection_cut(
            SimplicialCone(apex=np.zeros(2), R=np.eye(2)), cf, _Everything(3, 0, 0)
        )


def test_homogeneous_two_variable_instance():
    # S = {s₁² ≤ s₂²}, apex (3, 0), rays (−1, 1) and (−1, −1)
    qc = spectral.QuadraticConstraint(
        Q=np.diag([1.0, -1.0]), b=np.zeros(2), c=0.0, point=np.array([3.0, 0.0])
    )
    cone = SimplicialCone(apex=np.array([3.0, 0.0]), R=np.array([[-1.0, -1.0], [1.0, -1.0]]))
    cert = separate(qc, cone)
    assert isinstance(cert.free_set, CylinderLift)
    assert float(cert.coef @ qc.point) - cert.rhs >= 1e-9
    rep = oracle.check_cut_validity(qc, cert, count=10**4, seed=0)
    assert rep.passed, rep.worst_residual


def test_wedge_end_to_end_cut():
    qc = wedge_constraint()
    cone = SimplicialCone(apex=qc.point, R=np.eye(2))
    cert = separate(qc, cone)
    assert cert.canonical_form.case == spectral.CASE_CASE2_CR
    assert cert.apex_violation == pytest.approx(1.0, abs=1e-9)
    assert float(cert.coef @ qc.point) - cert.rhs >= 1e-9
    rep = oracle.check_cut_validity(qc, cert, count=10**4, seed=1)
    assert rep.passed, rep.worst_residual


def test_convex_instance_matches_gradient_cut():
    # S = unit disk, apex (3, 0): the supporting-hyperplane cut is s₁ ≤ 1
    qc = spectral.QuadraticConstraint(
        Q=np.eye(2), b=np.zeros(2), c=-1.0, point=np.array([3.0, 0.0])
    )
    cone = SimplicialCone(
        apex=np.array([3.0, 0.0]), R=np.array([[-1.0, -1.0], [0.0, 1.0]])
    )
    cert = separate(qc, cone)
    scale = cert.coef[0]
    assert scale > 0.0
    assert cert.coef[1] / scale == pytest.approx(0.0, abs=1e-8)
    assert cert.rhs / scale == pytest.approx(1.0, abs=1e-8)


def test_empty_s_signalled():
    qc = spectral.QuadraticConstraint(
        Q=np.eye(2), b=np.zeros(2), c=1.0, point=np.array([3.0, 0.0])
    )
    with pytest.raises(EmptySError):
        separate(qc, SimplicialCone(apex=qc.point, R=np.eye(2)))


def test_scale_equivariance_of_cut():
    qc = wedge_constraint()
    base = separate(qc, SimplicialCone(apex=qc.point, R=np.eye(2)))
    mu = 3.0
    scaled = separate(qc, SimplicialCone(apex=qc.point, R=mu * np.eye(2)))
    for st_b, st_s in zip(base.steps, scaled.steps):
        assert st_s.value == pytest.approx(st_b.value / mu, rel=1e-8)
    # the s-space cut is the same inequality
    assert np.allclose(scaled.coef, base.coef, atol=1e-10)
    assert scaled.rhs == pytest.approx(base.rhs, abs=1e-10)


def test_step_monotonicity_under_set_enlargement():
    # CLambda ⊆ CPhiLambda on the same canonical data: every step can
    # only grow when the set is enlarged.
    rng = np.random.default_rng(2)
    cf = wedge_canonical()
    from quadfree.corefns import CaseData

    cd = CaseData(cf.lam, cf.a, cf.d, unit_a=True)
    small = CLambda(cf.n, cf.m, cf.l, lam=cf.lam)
    big = CPhiLambda(cf.n, cf.m, cf.l, cd=cd)
    apex = cf.mapped_point
    assert small.margin(apex) < 0.0 and big.margin(apex) < 0.0
    cone = SimplicialCone(apex=np.array([-2.0, -2.0]), R=np.eye(2))
    cert_small = intersection_cut(cone, cf, small)
    cert_big = intersection_cut(cone, cf, big)
    for st_s, st_b in zip(cert_small.steps, cert_big.steps):
        assert st_b.value >= st_s.value - 1e-8


def test_certificate_records_context():
    qc = wedge_constraint()
    cone = SimplicialCone(apex=qc.point, R=np.eye(2))
    cert = separate(qc, cone)
    assert isinstance(cert, CutCertificate)
    assert cert.cone is cone
    assert cert.canonical_form.case == spectral.CASE_CASE2_CR
    assert len(cert.steps) == 2
    assert np.allclose(
        cert.weights,
        [1.0 / st.value if math.isfinite(st.value) else 0.0 for st in cert.steps],
    )
