import csv
import math

import pytest

from maslovmono import exact_int as ei
from maslovmono.dynamics import SystemSpec, effective_minimum, r_star
from maslovmono.errors import NearCriticalError
from maslovmono.monodromy import (
    LoopSpec,
    actions,
    caustic_count,
    continue_loop,
    first_return,
    maslov_winding,
)
from maslovmono.normal_forms import Form, Verdict, change_basis

SYS = SystemSpec()

# (j, h) -> (T_rad, Theta, I2) from an independent quadrature in r:
# T = 2 int dr / p_r, Theta = 2 int j / r^2 dr / p_r, I2 = (1/pi) int p_r dr
ORACLE = {
    (0.1, 0.0): (3.350798568560733, 1.6680683126634905, 0.12414079985826303),
    (0.0, -0.1): (3.7025265418356343, 0.0, 0.08060758414326628),
    (0.3, 0.2): (2.467756860629434, 2.147752920262364, 0.15036824083464911),
    (-0.05, 0.15): (3.1466790000377816, -2.728193150315808, 0.22094263080516977),
}


@pytest.mark.parametrize("v", list(ORACLE))
def test_first_return_matches_quadrature(v):
    t_rad, theta, _ = ORACLE[v]
    got_t, got_theta = first_return(v, SYS)
    assert got_t == pytest.approx(t_rad, abs=1e-9)
    assert got_theta == pytest.approx(theta, abs=1e-9)


@pytest.mark.parametrize("v", list(ORACLE))
def test_actions_match_quadrature(v):
    i1, i2 = actions(v, SYS)
    assert i1 == v[0]
    assert i2 == pytest.approx(ORACLE[v][2], abs=1e-9)


def test_orbit_through_origin_rotates_by_pi():
    # j = 0 above the hump: the particle crosses the origin once per radial period
    t_rad, theta = first_return((0.0, 0.1), SYS)
    assert t_rad == pytest.approx(3.509151289856637, abs=1e-9)
    assert abs(abs(theta) - math.pi) < 1e-9
    assert actions((0.0, 0.1), SYS)[1] == pytest.approx(0.21756577600463986, abs=1e-9)


@pytest.mark.parametrize("tol", [1e-10, 5e-11, 1e-11])
def test_grazing_orbits_are_continuous_in_j(tol):
    # orbits with tiny j pass within ~j/|p| of the origin; the angle must tend
    # to +-pi and the action must stay smooth, at any tolerance
    sys_ = SystemSpec(tol=tol)
    j_loop = 0.1 * math.cos(math.pi / 2)  # the s = 1/4 sample of the default loop
    for j in (j_loop, 1e-12, 1e-6, 1e-3):
        for sgn in (1, -1):
            _, theta = first_return((sgn * j, 0.1), sys_)
            assert 0 < sgn * theta <= math.pi
            assert abs(abs(theta) - math.pi) < 2 * j / 0.1 + 1e-9
            if j <= 1e-6:  # first order in j: dI2/dj = -Theta / 2pi
                i2 = actions((sgn * j, 0.1), sys_)[1]
                assert i2 == pytest.approx(0.21756577600463986 - j / 2, abs=1e-9)


def test_period_near_well_bottom():
    # harmonic limit: omega = sqrt(V_eff'') = 2
    t_rad, theta = first_return((0.0, -0.25 + 1e-6), SYS)
    assert t_rad == pytest.approx(math.pi, rel=1e-4)
    assert theta == 0.0


@pytest.mark.parametrize("v", [(0.1, 0.0), (0.3, 0.2), (0.05, -0.05)])
def test_reflection_flips_rotation(v):
    _, th = first_return(v, SYS)
    _, th_mirror = first_return((-v[0], v[1]), SYS)
    assert th_mirror == pytest.approx(-th, abs=1e-10)


@pytest.mark.parametrize("h", [-0.24, -0.245, -0.2499])
def test_harmonic_action_oracle(h):
    oracle = (h - effective_minimum(0.0, SYS)) / 2
    assert actions((0.0, h), SYS)[1] == pytest.approx(oracle, rel=0.01)


def test_harmonic_action_oracle_nonzero_j():
    j = 0.05
    rs = r_star(j, SYS)
    omega = math.sqrt(SYS.V_eff_dd(rs, j))
    h = effective_minimum(j, SYS) + 0.005
    oracle = (h - effective_minimum(j, SYS)) / omega
    assert actions((j, h), SYS)[1] == pytest.approx(oracle, rel=0.01)


@pytest.mark.parametrize("v", [(0.1, 0.0), (0.0, -0.1), (0.0, 0.1)])
def test_tolerance_halving_changes_action_little(v):
    a = actions(v, SystemSpec(tol=1e-10))[1]
    b = actions(v, SystemSpec(tol=5e-11))[1]
    assert abs(a - b) < 1e-8


@pytest.mark.parametrize("v", [(0.1, 0.0), (0.0, 0.1), (-0.1, 0.0), (0.0, -0.1), (0.07, -0.07)])
def test_maslov_windings(v):
    w1 = maslov_winding(v, 1, SYS)
    w2 = maslov_winding(v, 2, SYS)
    assert abs(w1) < 0.05
    assert abs(w2 - 2) < 0.05
    assert caustic_count(v, SYS) == 2


@pytest.mark.parametrize("v", [(0.1, 0.0), (0.0, 0.1), (-0.05, -0.08)])
def test_reversed_cycle_negates_winding(v):
    for cycle in (1, 2):
        fwd = maslov_winding(v, cycle, SYS)
        rev = maslov_winding(v, cycle, SYS, reverse=True)
        assert rev == pytest.approx(-fwd, abs=1e-6)


def test_maslov_winding_rejects_bad_cycle():
    with pytest.raises(ValueError):
        maslov_winding((0.1, 0.0), 3, SYS)


# -- loops -----------------------------------------------------------------------

def test_loop_spec_validation():
    with pytest.raises(ValueError):
        LoopSpec(samples=15)
    with pytest.raises(ValueError):
        LoopSpec(orientation="up")
    with pytest.raises(ValueError):
        LoopSpec(radii=(0.0, 0.1))
    loop = LoopSpec(samples=16)
    assert len(loop.parameters()) == 17
    assert loop.point(0.0) == pytest.approx(loop.point(1.0), abs=1e-15)


@pytest.fixture(scope="module")
def default_report():
    return continue_loop(LoopSpec(), SYS)


def test_default_loop(default_report):
    r = default_report
    assert abs(r.winding_k) == 1
    assert r.maslov == [0, 2]
    assert r.theorem is Verdict.HOLDS
    assert ei.det_exact(r.monodromy) == 1
    assert r.classification.form is Form.TRIANGULAR2
    assert abs(r.winding_residual) < 0.05
    assert r.action_residual < 1e-6


def test_action_continuation(default_report):
    r = default_report
    i0, i1 = r.actions_start, r.actions_end
    m = r.monodromy
    mi0 = [m[0][0] * i0[0] + m[0][1] * i0[1], m[1][0] * i0[0] + m[1][1] * i0[1]]
    assert max(abs(a - b) for a, b in zip(i1, mi0)) < 1e-6


def test_windings_constant_along_loop(default_report):
    for c in default_report.cycles:
        assert abs(c.w1 - 0) < 0.05 and abs(c.w2 - 2) < 0.05


def test_theta_continuous_along_loop(default_report):
    th = [c.theta_unwrapped for c in default_report.cycles]
    assert max(abs(b - a) for a, b in zip(th, th[1:])) < 1.0


def test_maslov_is_eigenvector(default_report):
    r = default_report
    mu = r.maslov
    assert ei.matvec(r.monodromy, mu) == mu
    g = ei.content(mu)
    prim = [x // g for x in mu]
    assert ei.matvec(r.monodromy, prim) == prim


def test_swap_basis_gives_upper_triangular(default_report):
    r = default_report
    swap = [[0, 1], [1, 0]]
    m2, mu2, _ = change_basis(r.monodromy, r.maslov, r.actions_start, swap)
    assert m2 in ([[1, 1], [0, 1]], [[1, -1], [0, 1]])
    assert mu2 == [2, 0]


def test_clockwise_negates_k(default_report):
    r = continue_loop(LoopSpec(orientation="cw"), SYS)
    assert r.winding_k == -default_report.winding_k
    assert r.maslov == default_report.maslov
    assert r.theorem is Verdict.HOLDS


def test_workers_give_identical_results(default_report):
    r = continue_loop(LoopSpec(samples=16), SYS, workers=2)
    s = continue_loop(LoopSpec(samples=16), SYS)
    assert r.to_dict() == s.to_dict()
    assert [tuple(c) for c in r.cycles] == [tuple(c) for c in s.cycles]


@pytest.mark.slow
@pytest.mark.parametrize("radii", [(0.05, 0.05), (0.2, 0.2), (0.05, 0.2), (0.2, 0.05)])
def test_loop_homotopy_invariance(default_report, radii):
    r = continue_loop(LoopSpec(radii=radii), SYS)
    assert r.monodromy == default_report.monodromy
    assert r.maslov == default_report.maslov


def test_non_enclosing_loop():
    r = continue_loop(LoopSpec(center=(0.5, 0.5), radii=(0.05, 0.05)), SYS)
    assert r.winding_k == 0
    assert r.monodromy == ei.identity(2)
    assert r.theorem is Verdict.HOLDS


def test_loop_crossing_elliptic_line_fails_with_sample():
    with pytest.raises(NearCriticalError) as info:
        continue_loop(LoopSpec(center=(0.0, -0.2), radii=(0.1, 0.1)), SYS)
    assert info.value.s is not None and 0 < info.value.s < 1


def test_report_csv(default_report, tmp_path):
    path = tmp_path / "loop.csv"
    default_report.write_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["s", "j", "h", "theta_unwrapped", "I1", "I2", "w1", "w2"]
    assert len(rows) - 1 == default_report.loop.samples + 1
    assert float(rows[-1][0]) == 1.0


def test_report_document_keys(default_report):
    assert set(default_report.to_dict()) == {
        "loop", "monodromy", "maslov", "winding_k", "action_residual", "theorem",
        "classification"}
