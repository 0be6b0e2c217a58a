"""Exit criteria.  Each test records one PASS/FAIL line, printed in the
terminal summary under "acceptance criteria"."""

import math

import numpy as np
import pytest

from oracles import fd_levels
from shellentropy.constants import EUR_UNIT_BOUND
from shellentropy.density import Direction, convert_normalization, entropy_report, ingest_external_density
from shellentropy.pipeline import RunConfig, compute_system, run_pipeline, solve_levels, system_spec
from shellentropy.scaling import ScalingFit, boltzmann_analogy
from test_density import GAUSS_S, gaussian_table

CLUSTER_N = [8, 18, 20, 34, 40, 58, 68, 70]
NUCLEUS_A = [4, 16, 40, 80, 140, 224]


@pytest.fixture(scope="module")
def gaussian_fixtures(tmp_path_factory):
    root = tmp_path_factory.mktemp("gauss")
    paths = []
    for N, b in ((2, 1.0), (20, 2.0)):
        p = root / f"gauss{N}.dat"
        p.write_text(
            gaussian_table(b, N=N, x_max=6 * b)
            + gaussian_table(1 / b, x_max=6 / b, space="momentum", unit="inverse_angstrom")
        )
        paths.append(p)
    return paths


@pytest.fixture(scope="module")
def external_report(gaussian_fixtures):
    return run_pipeline(RunConfig(mode="external", external_files=[[str(p)] for p in gaussian_fixtures]))


def test_c1_cluster_sum_fit(cluster_report, record):
    fit = cluster_report.fits["S_sum"]
    assert [s.N for s in cluster_report.systems] == CLUSTER_N
    ok = abs(fit.a - 5.695) <= 0.15 and abs(fit.b - 0.907) <= 0.05 and cluster_report.elapsed < 60
    record("C1 cluster S_sum fit", ok,
           f"a={fit.a:.4f} (5.695+-0.15) b={fit.b:.4f} (0.907+-0.05) runtime {cluster_report.elapsed:.1f}s")
    assert ok


def test_c2_cluster_component_fits(cluster_report, record):
    fr, fk = cluster_report.fits["S_r"], cluster_report.fits["S_k"]
    ok = (abs(fr.a - 4.133) <= 0.2 and abs(fr.b - 0.934) <= 0.06
          and abs(fk.a - 1.563) <= 0.2 and abs(fk.b - (-0.027)) <= 0.05)
    record("C2 cluster S_r/S_k fits", ok,
           f"S_r={fr.a:.4f}+{fr.b:.4f}lnN  S_k={fk.a:.4f}{fk.b:+.4f}lnN")
    assert ok


def test_c3_eur_everywhere(cluster_report, nucleus_report, external_report, record):
    systems = cluster_report.systems + nucleus_report.systems + external_report.systems
    assert len(systems) == len(CLUSTER_N) + len(NUCLEUS_A) + 2
    worst = min(s.entropy.S_sum for s in systems)
    ok = all(s.entropy.S_sum >= 6.43419 - 1e-6 for s in systems)
    record("C3 EUR S_r+S_k >= 3(1+ln pi)", ok, f"{len(systems)} systems, min S_sum={worst:.6f}")
    assert ok


def test_c4_gaussian_saturation(nucleus_report, record):
    s4 = nucleus_report.systems[0]
    assert s4.N == 4 and [o.label for o in s4.filling.orbitals] == ["1s"]
    ok = abs(s4.entropy.S_sum - 6.43419) <= 1e-3
    record("C4 single s-shell saturates EUR", ok,
           f"S_sum={s4.entropy.S_sum:.6f} vs {EUR_UNIT_BOUND:.6f}")
    assert ok


def test_c5_scale_invariance(record):
    def system(scale):
        config = RunConfig(mode="nucleus_ho", particle_counts=[16], length_scale=scale)
        return compute_system(system_spec(config, 16), config).entropy

    base, doubled = system(1.0), system(2.0)
    d_sum = abs(doubled.S_sum - base.S_sum)
    d_r = doubled.S_r - base.S_r
    ok = d_sum < 1e-4 and abs(d_r - 3 * math.log(2)) <= 1e-4
    record("C5 scale invariance (b x2)", ok, f"dS_sum={d_sum:.2e}, dS_r={d_r:.6f} (3 ln2={3 * math.log(2):.6f})")
    assert ok


def test_c6_ho_nucleus_fit(nucleus_report, record):
    assert [s.N for s in nucleus_report.systems] == NUCLEUS_A
    fit = nucleus_report.fits["S_sum"]
    ok = 0.78 <= fit.b <= 0.95 and 4.9 <= fit.a <= 5.7
    record("C6 HO nucleus S_sum fit", ok, f"a={fit.a:.4f} in [4.9,5.7], b={fit.b:.4f} in [0.78,0.95]")
    assert ok


def test_c7_boltzmann_cluster(cluster_report, record):
    inv, _ = boltzmann_analogy(cluster_report.fits["S_sum"])
    ok = 500 <= inv <= 566
    record("C7a computed cluster 1/N0 = e^(a/b)", ok, f"1/N0={inv:.1f} (target [500, 566])")
    assert ok


def test_c7_boltzmann_atoms_reference(record):
    inv, _ = boltzmann_analogy(ScalingFit.reference("atoms_HF_sum"))
    ok = abs(inv - 500) <= 1
    record("C7b reference atoms 1/N0", ok, f"1/N0={inv:.2f} (500+-1)")
    assert ok


def test_c8_solver_oracles(record):
    worst_ws = 0.0
    for N in (8, 40):
        config = RunConfig(particle_counts=[N])
        spec = system_spec(config, N)
        levels = solve_levels(spec, config)
        r_max = spec.R + 15 * spec.a + 10
        for l in range(config.l_max + 1):
            mine = sorted(s.energy for s in levels if s.l == l)
            ref = fd_levels(spec, r_max, l)
            assert len(mine) == len(ref), (N, l)
            if mine:
                worst_ws = max(worst_ws, float(np.max(np.abs(np.array(mine) - ref))))
    config = RunConfig(mode="nucleus_ho", particle_counts=[40])
    spec = system_spec(config, 40)
    worst_ho = 0.0
    for s in solve_levels(spec, config):
        if s.n_radial + s.l <= 6:
            exact = (2 * s.n_radial + s.l + 1.5) * spec.hbar_omega
            worst_ho = max(worst_ho, abs(s.energy / exact - 1))
    ok = worst_ws <= 1e-5 and worst_ho <= 1e-7
    record("C8 eigenvalue oracles", ok, f"WS max|dE|={worst_ws:.1e} eV, HO max rel={worst_ho:.1e}")
    assert ok


def test_c9_parseval_and_grid_doubling(cluster_report, nucleus_report, record):
    norms = [m.norm() for rep in (cluster_report, nucleus_report) for s in rep.systems for m in s.momentum]
    parseval = max(abs(n - 1) for n in norms)
    worst = 0.0
    for rep, mode in ((cluster_report, "cluster_ws"), (nucleus_report, "nucleus_ho")):
        fine = run_pipeline(RunConfig(mode=mode, n_points=2 * 4001 - 1, n_k=2 * 3000))
        for a, b in zip(rep.systems, fine.systems):
            assert a.N == b.N
            worst = max(worst, abs(a.entropy.S_r - b.entropy.S_r), abs(a.entropy.S_k - b.entropy.S_k))
    ok = parseval <= 1e-6 and worst < 1e-5
    record("C9 Parseval and grid doubling", ok,
           f"{len(norms)} orbitals, max|norm-1|={parseval:.1e}; max entropy shift={worst:.1e}")
    assert ok


def test_c10_ingestion_and_conversion(gaussian_fixtures, record):
    worst = 0.0
    for path, b in zip(gaussian_fixtures, (1.0, 2.0)):
        res = entropy_report(ingest_external_density(path))
        worst = max(worst, abs(res.S_r - (GAUSS_S + 3 * math.log(b))),
                    abs(res.S_k - (GAUSS_S - 3 * math.log(b))))
    rng = np.random.default_rng(0)
    roundtrip = 0.0
    for S, N in zip(rng.uniform(-5, 15, 200), rng.integers(1, 300, 200)):
        for spaces in (1, 2):
            there = convert_normalization(S, N, Direction.TO_PARTICLE_NUMBER, spaces)
            back = convert_normalization(there, N, Direction.TO_UNIT, spaces)
            roundtrip = max(roundtrip, abs(back - S))
    ok = worst <= 1e-4 and roundtrip <= 1e-12
    record("C10 ingestion + normalisation round-trip", ok,
           f"max entropy error={worst:.1e}, max round-trip error={roundtrip:.1e}")
    assert ok
