import math

import numpy as np
import pytest

from flatband.model import (ModelParams, ParameterError, Site, as_int_site, build_lattice,
                            derive_constants, f_coeff, f_envelope, params_from_mapping, read_config)

# 50-digit mpmath evaluation, frozen
EPS_REF = 3.5708160441856091
R_REF = 3.2644894280178944
PLATEAU_REF = 0.52819946006377387


def test_constants_reference_point():
    c = derive_constants(ModelParams(lam=1.25, q_abs=1.2))
    assert c.epsilon == pytest.approx(EPS_REF, rel=1e-15)
    assert c.r == pytest.approx(R_REF, rel=1e-15)
    assert c.plateau_integer == pytest.approx(PLATEAU_REF, rel=1e-14)
    assert c.plateau_half == pytest.approx(1 - PLATEAU_REF, rel=1e-14)
    assert c.p == 1.2
    assert c.z == pytest.approx(0.0)


def test_r_is_root_of_characteristic_polynomial():
    c = derive_constants(ModelParams(lam=0.6, q_abs=0.8))
    assert c.r ** 2 - c.epsilon * c.r + 1 == pytest.approx(0, abs=1e-13)
    assert c.sqrt_disc == pytest.approx(math.sqrt(c.epsilon ** 2 - 4), rel=1e-14)


def test_p_is_min_of_r_and_folded_q():
    assert derive_constants(ModelParams(lam=0.1, q_abs=5.0)).p == pytest.approx(
        derive_constants(ModelParams(lam=0.1, q_abs=5.0)).r)
    assert derive_constants(ModelParams(lam=2.0, q_abs=0.5)).p == pytest.approx(2.0)


def test_wall_centre():
    p = ModelParams(q_abs=1.2, zeta_abs=1.2 ** -20)
    assert derive_constants(p).z == pytest.approx(20.0)
    assert derive_constants(p.with_(zeta_abs=0.0)).z == math.inf
    assert derive_constants(p.with_(q_abs=0.8, zeta_abs=0.0)).z == -math.inf
    assert derive_constants(p.with_(q_abs=1.0)).z is None


def test_degenerate_epsilon_rejected():
    # lambda = 0, |q| = 1 gives eps = 2 and r = 1
    with pytest.raises(ParameterError):
        derive_constants(ModelParams(lam=0.0, q_abs=1.0))


@pytest.mark.parametrize("kw", [dict(t=0), dict(U=-1), dict(lam=-0.1), dict(q_abs=0), dict(zeta_abs=-1)])
def test_invalid_params(kw):
    with pytest.raises(ParameterError):
        ModelParams(**kw)


def test_f_against_unsimplified_form():
    q = 1.7
    for u in (-3.2, -0.5, 0.0, 0.25, 4.0):
        direct = (q ** 0.5 - q ** -0.5) ** 2 / ((q ** (-u + 0.5) + q ** (u - 0.5)) * (q ** (-u - 0.5) + q ** (u + 0.5)))
        assert f_coeff(u, q) == pytest.approx(direct, rel=1e-14)
    assert f_coeff(0.0, q) == pytest.approx(((q ** 0.5 - q ** -0.5) / (q ** 0.5 + q ** -0.5)) ** 2)


def test_f_envelope_dominates_and_underflows():
    u = np.linspace(-40, 40, 321)
    assert np.all(f_coeff(u, 1.3) <= f_envelope(u, 1.3) * (1 + 1e-12))
    assert f_coeff(1e4, 1.3) == 0.0
    assert np.all(f_coeff(u, 1.0) == 0.0)


def test_lattice_shape():
    lat = build_lattice(101)
    assert len(lat.sites) == 203
    assert len(lat.integer_sites) == 101 and len(lat.half_sites) == 102
    assert lat.sites[0] == Site.from_coord(-50.5) and lat.sites[-1] == Site.from_coord(50.5)
    assert Site.from_coord(50.5) in lat and Site.from_coord(51) not in lat
    with pytest.raises(ParameterError):
        build_lattice(4)


def test_site_encoding():
    s = Site.from_coord(-2.5)
    assert s.half_units == -5 and not s.is_integer and s.x == -2.5
    assert as_int_site(Site(6)) == 3 and as_int_site(np.int64(4)) == 4
    with pytest.raises(ValueError):
        Site.from_coord(0.3)
    with pytest.raises(TypeError):
        as_int_site(s)


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("lambda = 2.0  # strong\nq_abs = 1.5\nL = 7\n")
    vals = read_config(cfg)
    assert vals == {"lambda": 2.0, "q_abs": 1.5, "L": 7}
    p = params_from_mapping(vals)
    assert p.lam == 2.0 and p.q_abs == 1.5
    cfg.write_text("colour = red\n")
    with pytest.raises(ParameterError):
        read_config(cfg)
