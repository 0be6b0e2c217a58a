import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import hankel_quadrature
from shellentropy.bound_states import enumerate_bound_levels, fill_shells
from shellentropy.constants import EUR_UNIT_BOUND
from shellentropy.density import (
    DensityPair,
    Direction,
    Normalization,
    build_density,
    convert_normalization,
    entropy_report,
    ingest_external_density,
    report_to_csv,
    shannon_entropy,
    write_density_table,
)
from shellentropy.errors import (
    DataIntegrityError,
    DensityParseError,
    InvalidArgumentError,
    InvalidDensityError,
)
from shellentropy.grid import build_grid
from shellentropy.momentum import default_k_grid, transform_orbitals
from shellentropy.pipeline import RunConfig, compute_system, system_spec

GAUSS_S = 1.5 * (1 + math.log(math.pi))


def test_gaussian_entropy():
    g = build_grid(12.0, 4001)
    rho = math.pi**-1.5 * np.exp(-g.points**2)
    assert shannon_entropy(rho, g) == pytest.approx(GAUSS_S, abs=1e-5)
    assert GAUSS_S == pytest.approx(3.2170948, abs=1e-7)


def test_uniform_sphere_entropy():
    # the jump costs O(h): fine grid
    g = build_grid(2.0, 40001)
    rho = np.where(g.points <= 1.0, 3 / (4 * math.pi), 0.0)
    assert shannon_entropy(rho, g) == pytest.approx(math.log(4 * math.pi / 3), abs=1e-4)


def test_exponential_entropy():
    g = build_grid(80.0, 8001)
    rho = np.exp(-g.points) / (8 * math.pi)
    assert shannon_entropy(rho, g) == pytest.approx(3 + math.log(8 * math.pi), abs=1e-5)
    assert 3 + math.log(8 * math.pi) == pytest.approx(6.2241714, abs=1e-7)


def test_negative_density_rejected():
    g = build_grid(1.0, 11)
    rho = np.full(11, 0.1)
    rho[4] = -1e-6
    with pytest.raises(InvalidDensityError):
        shannon_entropy(rho, g)
    rho[4] = -1e-13
    shannon_entropy(rho, g)


def test_zero_log_zero():
    g = build_grid(1.0, 11)
    rho = np.zeros(11)
    rho[:3] = 1e-320
    assert shannon_entropy(rho, g) == 0.0


def _ho_system(A=4, length_scale=1.0, n_points=4001):
    config = RunConfig(mode="nucleus_ho", particle_counts=[A], length_scale=length_scale,
                       n_points=n_points)
    return compute_system(system_spec(config, A), config)


def test_single_s_shell_density_is_gaussian():
    res = _ho_system(4)
    b = res.spec.oscillator_length
    r = res.density.r_grid.points
    expected = np.exp(-(r**2) / b**2) / (math.pi**1.5 * b**3)
    assert np.max(np.abs(res.density.rho - expected)) < 1e-8 * expected[0]
    assert res.entropy.S_sum == pytest.approx(EUR_UNIT_BOUND, abs=1e-3)
    assert res.entropy.eur_margin >= -1e-6


def test_scale_invariance():
    base, scaled = _ho_system(16), _ho_system(16, length_scale=2.0)
    assert scaled.entropy.S_r - base.entropy.S_r == pytest.approx(3 * math.log(2), abs=1e-5)
    assert scaled.entropy.S_k - base.entropy.S_k == pytest.approx(-3 * math.log(2), abs=1e-5)
    assert abs(scaled.entropy.S_sum - base.entropy.S_sum) < 1e-5


@pytest.fixture(scope="module")
def ws20():
    config = RunConfig(mode="cluster_ws", particle_counts=[20])
    return compute_system(system_spec(config, 20), config)


def test_ws20_density_matches_recomputation(ws20):
    r = ws20.density.r_grid.points
    total = np.zeros_like(r)
    for orb, occ in ws20.filling.occupied:
        with np.errstate(divide="ignore", invalid="ignore"):
            total += occ * np.where(r > 0, orb.u / r, 0.0) ** 2
    total /= 4 * math.pi * 20
    assert np.max(np.abs(ws20.density.rho[1:] - total[1:])) < 1e-10
    k = ws20.density.k_grid.points
    nk = sum(occ * hankel_quadrature(orb.u, r, orb.l, k[:400]) ** 2
             for orb, occ in ws20.filling.occupied) / (4 * math.pi * 20)
    assert np.max(np.abs(ws20.density.nk[:400] - nk)) < 1e-8


def test_normalisation_and_order_independence(ws20):
    rho_norm, nk_norm = ws20.density.norms()
    assert rho_norm == pytest.approx(1.0, abs=1e-6)
    assert nk_norm == pytest.approx(1.0, abs=1e-6)
    filling = ws20.filling
    rev = type(filling)(list(reversed(filling.occupied)), filling.N)
    again = build_density(rev, list(reversed(ws20.momentum)))
    assert np.max(np.abs(again.rho - ws20.density.rho)) <= 1e-12 * ws20.density.rho.max()


def test_build_density_mismatch(ws20):
    with pytest.raises(InvalidArgumentError):
        build_density(ws20.filling, ws20.momentum[:-1])


def test_gaussian_is_entropy_maximum(ws20):
    rho, g = ws20.density.rho, ws20.density.r_grid
    r2 = 4 * math.pi * g.integrate(rho * g.points**4)
    s_gauss = 1.5 * (1 + math.log(2 * math.pi * r2 / 3))
    assert ws20.entropy.S_r <= s_gauss + 1e-6


def test_ws40_sum_near_published_line():
    config = RunConfig(mode="cluster_ws", particle_counts=[40])
    res = compute_system(system_spec(config, 40), config)
    assert res.entropy.S_sum == pytest.approx(5.695 + 0.907 * math.log(40), abs=0.15)
    assert res.entropy.eur_margin >= 0


def test_particle_number_report(ws20):
    unit = entropy_report(ws20.density)
    pn = entropy_report(ws20.density.to(Normalization.PARTICLE_NUMBER))
    N = 20
    assert pn.S_r == pytest.approx(N * (unit.S_r - math.log(N)), rel=1e-12)
    assert pn.eur_bound == pytest.approx(6.434189657547 * N - 2 * N * math.log(N), rel=1e-9)
    assert pn.eur_margin > 0
    assert ws20.density.to("particle_number").norms()[0] == pytest.approx(20, rel=1e-6)


# --- normalisation conversion -------------------------------------------


def test_convert_identity_at_one():
    assert convert_normalization(3.7, 1, Direction.TO_UNIT) == 3.7
    assert convert_normalization(3.7, 1, Direction.TO_PARTICLE_NUMBER, 2) == 3.7


def test_convert_thomas_fermi_sum():
    N = 10
    s_n = 6.65 * N - N * math.log(N)
    assert convert_normalization(s_n, N, "to_unit", 2) == pytest.approx(6.65 + math.log(N), abs=1e-12)


@given(st.floats(-50, 50), st.integers(1, 10_000), st.sampled_from([1, 2]))
def test_convert_roundtrip(S, N, spaces):
    there = convert_normalization(S, N, Direction.TO_PARTICLE_NUMBER, spaces)
    back = convert_normalization(there, N, Direction.TO_UNIT, spaces)
    assert back == pytest.approx(S, abs=1e-12 * max(1.0, abs(S), N))


def test_convert_rejects_zero():
    with pytest.raises(InvalidArgumentError):
        convert_normalization(1.0, 0, Direction.TO_UNIT)


# --- external densities ---------------------------------------------------


def gaussian_table(b=1.0, n=200, x_max=6.0, space="position", unit="angstrom", N=None,
                   norm="1", scale=1.0):
    x = np.linspace(0, x_max, n)
    y = scale * np.exp(-(x**2) / b**2) / (math.pi**1.5 * b**3)
    head = f"# N: {N}\n" if N else ""
    head += f"# space: {space}\n# unit: {unit}\n# norm: {norm}\n"
    return head + "".join(f"{a:.12e} {c:.12e}\n" for a, c in zip(x, y))


def test_ingest_gaussian(tmp_path):
    path = tmp_path / "gauss.dat"
    path.write_text(
        gaussian_table(1.0, N=2)
        + gaussian_table(1.0, space="momentum", unit="inverse_angstrom")
    )
    pair = ingest_external_density(path)
    res = entropy_report(pair)
    assert res.S_r == pytest.approx(GAUSS_S, abs=1e-4)
    assert res.S_k == pytest.approx(GAUSS_S, abs=1e-4)
    assert pair.N == 2


def test_ingest_two_files_and_widths(tmp_path):
    p, k = tmp_path / "pos.dat", tmp_path / "mom.dat"
    p.write_text(gaussian_table(2.0, x_max=12.0))
    k.write_text(gaussian_table(0.5, x_max=3.0, space="momentum", unit="inverse_angstrom"))
    res = entropy_report(ingest_external_density(p, k))
    assert res.S_r == pytest.approx(GAUSS_S + 3 * math.log(2), abs=1e-4)
    assert res.S_sum == pytest.approx(2 * GAUSS_S, abs=1e-4)


def test_ingest_particle_norm_and_renormalisation():
    text = (gaussian_table(1.0, N=8, norm="N", scale=8 * 1.005)
            + gaussian_table(1.0, space="momentum", unit="inverse_angstrom"))
    pair = ingest_external_density(text)
    assert pair.norms()[0] == pytest.approx(1.0, abs=1e-12)
    bad = (gaussian_table(1.0, N=8, norm="N", scale=8 * 1.02)
           + gaussian_table(1.0, space="momentum", unit="inverse_angstrom"))
    with pytest.raises(DataIntegrityError):
        ingest_external_density(bad)


def test_ingest_unit_mismatch_converted():
    # position in fm, momentum in inverse Angstrom: momentum rescaled to fm^-1
    text = gaussian_table(1.0, unit="fm") + gaussian_table(
        1.0e5, x_max=6e5, space="momentum", unit="inverse_angstrom")
    pair = ingest_external_density(text)
    assert pair.length_unit == "fm"
    assert entropy_report(pair).S_sum == pytest.approx(2 * GAUSS_S, abs=1e-4)


def test_ingest_negative_row():
    text = gaussian_table().replace("\n0.000000000000e+00 ", "\n0.000000000000e+00 -")
    text = text + gaussian_table(space="momentum", unit="inverse_angstrom")
    with pytest.raises(DataIntegrityError):
        ingest_external_density(text)


def test_ingest_columns_out_of_order():
    lines = gaussian_table().splitlines()
    swapped = lines[:4] + [" ".join(reversed(line.split())) for line in lines[4:]]
    text = "\n".join(swapped) + "\n" + gaussian_table(space="momentum", unit="inverse_angstrom")
    with pytest.raises(DensityParseError) as info:
        ingest_external_density(text)
    assert info.value.line is not None


@pytest.mark.parametrize(
    "mutate, line",
    [
        (lambda t: t.replace("# unit: angstrom\n", ""), None),
        (lambda t: t.replace("# space: position\n", "", 1), 3),
        (lambda t: t.replace("0.000000000000e+00 ", "abc ", 1), 4),
        (lambda t: t + "1.0 2.0 3.0\n", None),
    ],
)
def test_ingest_malformed(mutate, line):
    text = mutate(gaussian_table()) + gaussian_table(space="momentum", unit="inverse_angstrom")
    with pytest.raises(DensityParseError) as info:
        ingest_external_density(text)
    if line is not None:
        assert info.value.line == line


def test_missing_space():
    with pytest.raises(DensityParseError):
        ingest_external_density(gaussian_table())


def test_table_roundtrip(tmp_path, ws20):
    path = tmp_path / "ws20.dat"
    d = ws20.density
    write_density_table(path, d.r_grid, d.rho, "position", "angstrom", N=20)
    write_density_table(path, d.k_grid, d.nk, "momentum", "inverse_angstrom", mode="a")
    res = entropy_report(ingest_external_density(path))
    assert res.S_r == pytest.approx(ws20.entropy.S_r, abs=1e-6)
    assert res.S_k == pytest.approx(ws20.entropy.S_k, abs=1e-6)
    assert res.N == 20


def test_report_csv(ws20):
    text = report_to_csv([("ws20", ws20.entropy)])
    header, row = text.splitlines()
    assert header == "system_id,N,S_r,S_k,S_sum,eur_margin"
    fields = row.split(",")
    assert fields[0] == "ws20" and fields[1] == "20"
    assert float(fields[4]) == pytest.approx(ws20.entropy.S_sum, rel=1e-5)
