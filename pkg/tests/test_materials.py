"""Material, interface-law and loading construction tests.

Derived-constant references were recomputed independently with mpmath at 30
significant digits from the defining compliance expressions.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from interfrac import materials as mat
from interfrac.errors import ValidationError


def test_compliance_from_shear_moduli():
    a = mat.compliance_from_shear_moduli(1.0, 2.0 / 3.0)
    assert a.s44 == pytest.approx(1.0) and a.s55 == pytest.approx(1.5)
    c = mat.compliance_from_shear_moduli(0.5, 2.0 / 3.0)
    assert c.s44 == pytest.approx(2.0) and c.s55 == pytest.approx(1.5)
    iso = mat.compliance_from_shear_moduli(1.0, 1.0)
    assert iso.s44 == 1.0 and iso.s55 == 1.0
    assert not a.has_in_plane
    with pytest.raises(ValidationError):
        mat.compliance_from_shear_moduli(-1.0, 1.0)
    with pytest.raises(ValidationError):
        mat.compliance_from_shear_moduli(1.0, 0.0)


def test_presets_match_orientation_table():
    a = mat.material_preset("A")
    b = mat.material_preset("B")
    c = mat.material_preset("C")
    assert (a.s44, a.s55) == (1.0, 1.5)
    assert (b.s44, b.s55) == (1.0, 2.0)
    assert (c.s44, c.s55) == (2.0, 1.5)
    with pytest.raises(ValidationError):
        mat.material_preset("nope")


def test_compliance_from_incompressible():
    p = mat.IncompressibleOrthotropicParams(e1=20.0, e2=10.0, e3=10.0, mu12=5.0)
    m = mat.compliance_from_incompressible(p)
    assert m.s11 == pytest.approx(0.05)
    assert m.s22 == pytest.approx(0.1)
    assert m.s66 == pytest.approx(0.2)
    assert m.s12 == pytest.approx(-0.025)

    p2 = mat.IncompressibleOrthotropicParams(e1=20.0, e2=10.0, e3=15.0, mu12=5.0)
    m2 = mat.compliance_from_incompressible(p2)
    assert m2.s12 == pytest.approx(0.5 * (1.0 / 15.0 - 0.05 - 0.1), rel=1e-14)
    assert m2.s12 == pytest.approx(-1.0 / 24.0, rel=1e-14)

    e, mu = 7.0, 2.0
    sym = mat.compliance_from_incompressible(
        mat.IncompressibleOrthotropicParams(e1=e, e2=e, e3=e, mu12=mu)
    )
    assert sym.s12 == pytest.approx(-1.0 / (2.0 * e), rel=1e-14)

    with pytest.raises(ValidationError):
        mat.IncompressibleOrthotropicParams(e1=-1.0, e2=1.0, e3=1.0, mu12=1.0)


def test_out_of_plane_constants():
    A = mat.material_preset("A")
    B = mat.material_preset("B")
    C = mat.material_preset("C")

    same = mat.bimaterial_constants(A, A)
    assert same.h33 == pytest.approx(2.0 * np.sqrt(1.5), rel=1e-15)
    assert same.delta3 == 0.0
    assert not same.has_in_plane

    ac = mat.bimaterial_constants(A, C)
    assert ac.h33 == pytest.approx(2.9567956789604663, rel=1e-14)
    assert ac.delta3 == pytest.approx(-0.1715728752538099, rel=1e-14)

    ab = mat.bimaterial_constants(A, B)
    assert ab.h33 == pytest.approx(2.6389584337646841, rel=1e-14)
    assert ab.delta3 == pytest.approx(-0.071796769724490826, rel=1e-13)


def test_in_plane_constants_incompressible_pair():
    m1 = mat.material_preset("incompressible-I")
    m2 = mat.material_preset("incompressible-II")
    bc = mat.bimaterial_constants(m1, m2)
    assert not bc.has_out_of_plane
    assert bc.h11 == pytest.approx(0.23430821834377938, rel=1e-14)
    assert bc.h22 == pytest.approx(0.33136186015724922, rel=1e-14)
    assert bc.beta == pytest.approx(-0.059814121558748374, rel=1e-13)
    assert bc.gamma == pytest.approx(0.2682831653438958, rel=1e-13)
    assert bc.delta1 == pytest.approx(0.030358038415424481, rel=1e-12)
    assert bc.delta2 == pytest.approx(0.030358038415424481, rel=1e-12)
    assert bc.rhoI == pytest.approx(1.0606601717798213, rel=1e-14)
    assert bc.nII == pytest.approx(0.95523764356946943, rel=1e-14)
    assert bc.lambdaI == pytest.approx(0.5, rel=1e-15)


def test_missing_blocks_are_errors():
    A = mat.material_preset("A")  # no in-plane data
    inc = mat.material_preset("incompressible-I")  # no out-of-plane data
    with pytest.raises(ValidationError):
        mat.bimaterial_constants(A, inc)
    bc = mat.bimaterial_constants(A, A)
    with pytest.raises(ValidationError):
        bc.require_in_plane()
    bc2 = mat.bimaterial_constants(inc, inc)
    with pytest.raises(ValidationError):
        bc2.require_out_of_plane()
    with pytest.raises(ValidationError):
        mat.OrthotropicCompliance(s44=1.0)  # incomplete block
    with pytest.raises(ValidationError):
        mat.OrthotropicCompliance(s11=1.0, s12=2.0, s22=1.0, s66=1.0)  # indefinite


valid_oop = st.floats(0.05, 20.0)


@st.composite
def in_plane_compliances(draw):
    s11 = draw(st.floats(0.01, 10.0))
    s22 = draw(st.floats(0.01, 10.0))
    root = np.sqrt(s11 * s22)
    s12 = draw(st.floats(-0.95, 0.95)) * root
    s66 = draw(st.floats(0.01, 10.0))
    return mat.OrthotropicCompliance(
        s44=draw(valid_oop), s55=draw(valid_oop), s11=s11, s12=s12, s22=s22, s66=s66
    )


@settings(max_examples=60, deadline=None)
@given(m1=in_plane_compliances(), m2=in_plane_compliances())
def test_swap_symmetry(m1, m2):
    fwd = mat.bimaterial_constants(m1, m2)
    rev = mat.bimaterial_constants(m2, m1)
    assert rev.h33 == pytest.approx(fwd.h33, rel=1e-13)
    assert rev.h11 == pytest.approx(fwd.h11, rel=1e-13)
    assert rev.h22 == pytest.approx(fwd.h22, rel=1e-13)
    assert rev.gamma == pytest.approx(fwd.gamma, rel=1e-12, abs=1e-15)
    assert rev.delta3 == pytest.approx(-fwd.delta3, rel=1e-12, abs=1e-15)
    assert rev.delta1 == pytest.approx(-fwd.delta1, rel=1e-12, abs=1e-15)
    assert rev.delta2 == pytest.approx(-fwd.delta2, rel=1e-12, abs=1e-15)
    assert rev.beta == pytest.approx(-fwd.beta, rel=1e-12, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(m1=in_plane_compliances(), m2=in_plane_compliances(), c=st.floats(0.01, 100.0))
def test_uniform_scaling_homogeneity(m1, m2, c):
    # S -> cS multiplies every H entry by c and leaves the dimensionless
    # constants untouched
    def scaled(m):
        return mat.OrthotropicCompliance(
            s44=c * m.s44, s55=c * m.s55,
            s11=c * m.s11, s12=c * m.s12, s22=c * m.s22, s66=c * m.s66,
        )

    base = mat.bimaterial_constants(m1, m2)
    scal = mat.bimaterial_constants(scaled(m1), scaled(m2))
    assert scal.h33 == pytest.approx(c * base.h33, rel=1e-12)
    assert scal.h11 == pytest.approx(c * base.h11, rel=1e-12)
    assert scal.h22 == pytest.approx(c * base.h22, rel=1e-12)
    for name in ("beta", "gamma", "delta1", "delta2", "delta3"):
        assert getattr(scal, name) == pytest.approx(
            getattr(base, name), rel=1e-11, abs=1e-14
        )


@settings(max_examples=40, deadline=None)
@given(m=in_plane_compliances())
def test_identical_pair_is_symmetric(m):
    bc = mat.bimaterial_constants(m, m)
    assert bc.delta1 == 0.0 and bc.delta2 == 0.0 and bc.delta3 == 0.0
    assert bc.beta == 0.0


def test_interface_law_validation():
    law = mat.InterfaceLaw(kappa=2.0)
    assert law.has_mode3 and not law.has_in_plane
    with pytest.raises(ValidationError):
        law.in_plane_matrix()
    full = mat.InterfaceLaw(kappa=1.0, k11=10.0, k12=2.0, k22=3.0)
    assert np.allclose(full.in_plane_matrix(), [[10.0, 2.0], [2.0, 3.0]])
    with pytest.raises(ValidationError):
        mat.InterfaceLaw(kappa=-1.0)
    with pytest.raises(ValidationError):
        mat.InterfaceLaw(k11=1.0, k12=2.0, k22=1.0)  # indefinite
    with pytest.raises(ValidationError):
        mat.InterfaceLaw(k11=1.0, k22=1.0)  # incomplete block
    with pytest.raises(ValidationError):
        mat.InterfaceLaw()


def symmetric_exponential_loading(F=1.0, l=1.0):
    return mat.Loading(
        terms=(
            mat.LoadTerm(face="upper", c=(-F / l,), l=l, n=0),
            mat.LoadTerm(face="lower", c=(-F / l,), l=l, n=0),
        )
    )


def asymmetric_loading(F=1.0, l=1.0):
    return mat.Loading(
        terms=(
            mat.LoadTerm(face="upper", c=(-F / l,), l=l, n=0),
            mat.LoadTerm(face="lower", c=(F / l,), l=l, n=1),
        )
    )


def test_self_balance_symmetric():
    balanced, res = mat.validate_self_balance(symmetric_exponential_loading())
    assert balanced and np.allclose(res, 0.0)


def test_self_balance_asymmetric_pair():
    load = asymmetric_loading(F=2.5, l=0.7)
    # each face integrates to -F
    assert np.allclose(load.terms[0].integral(), -2.5)
    assert np.allclose(load.terms[1].integral(), -2.5)
    balanced, res = mat.validate_self_balance(load)
    assert balanced and abs(res[0]) < 1e-12


def test_self_balance_single_face_fails():
    load = mat.Loading(terms=(mat.LoadTerm(face="upper", c=(-1.0,), l=1.0, n=0),))
    balanced, res = mat.validate_self_balance(load)
    assert not balanced
    assert res[0] == pytest.approx(-1.0)
    with pytest.raises(ValidationError):
        mat.require_self_balanced(load)


def test_loading_pointwise_and_derivatives():
    load = asymmetric_loading()
    x = np.array([-3.0, -1.0, -0.25, 0.0, 0.5])
    avg = load.average(x)[:, 0]
    expect = 0.5 * (-np.exp(x) + x * np.exp(x))
    expect[x > 0] = 0.0
    assert np.allclose(avg, expect, atol=1e-14)
    # derivative against central differences away from 0
    h = 1e-6
    xs = np.array([-2.0, -0.5, -0.1])
    fd = (load.jump(xs + h) - load.jump(xs - h))[:, 0] / (2 * h)
    assert np.allclose(load.jump_deriv(xs)[:, 0], fd, rtol=1e-7, atol=1e-9)
    # values vanish off the crack
    assert np.all(load.upper(np.array([0.1, 2.0])) == 0.0)


def test_loading_fourier_against_quadrature():
    load = asymmetric_loading(F=1.3, l=0.8)
    for xi in (0.0, 0.37, 2.1, -1.4):
        ref = quad(
            lambda x: load.jump(np.array([x]))[0, 0] * np.cos(xi * x), -60.0, 0.0,
            limit=400,
        )[0] + 1j * quad(
            lambda x: load.jump(np.array([x]))[0, 0] * np.sin(xi * x), -60.0, 0.0,
            limit=400,
        )[0]
        got = load.fourier_jump(np.array([xi]))[0, 0]
        assert got == pytest.approx(ref, rel=1e-8, abs=1e-10)


def test_tabulated_loading_roundtrip():
    # range and density chosen so truncated-tail and trapezoid errors sit
    # below the 1e-6 quadrature-limited balance tolerance
    x = np.linspace(-25.0, 0.0, 20001)
    para = asymmetric_loading()
    tab = mat.TabulatedLoading(
        x=x, p_plus=para.upper(x)[:, 0], p_minus=para.lower(x)[:, 0]
    )
    balanced, res = mat.validate_self_balance(tab)
    assert balanced
    xs = np.array([-5.0, -1.0, -0.3])
    assert np.allclose(tab.average(xs), para.average(xs), atol=1e-6)
    assert np.allclose(
        tab.fourier_jump(np.array([0.5])), para.fourier_jump(np.array([0.5])), atol=1e-5
    )


def test_load_term_validation():
    with pytest.raises(ValidationError):
        mat.LoadTerm(face="side", c=(1.0,), l=1.0, n=0)
    with pytest.raises(ValidationError):
        mat.LoadTerm(face="upper", c=(1.0,), l=-1.0, n=0)
    with pytest.raises(ValidationError):
        mat.LoadTerm(face="upper", c=(1.0,), l=1.0, n=-2)
    with pytest.raises(ValidationError):
        mat.LoadTerm(face="upper", c=(1.0, 2.0, 3.0), l=1.0, n=0)
    with pytest.raises(ValidationError):
        mat.Loading(
            terms=(
                mat.LoadTerm(face="upper", c=(1.0,), l=1.0, n=0),
                mat.LoadTerm(face="lower", c=(1.0, 0.0), l=1.0, n=0),
            )
        )
