import numpy as np
import pytest

from torusfs.grid import GridFunction, make_grid
from torusfs.littlewood_paley import build_partition
from torusfs.experiments import (
    LacunaryConfig,
    RandomAtomConfig,
    atom_train_image,
    bspace_growth_experiment,
    fspace_growth_experiment,
    image_shell_leakage,
    khintchine_audit,
    khintchine_constants,
    lacunary_coeffs,
    lacunary_test_function,
    multiplier_on_lattice,
    oscillatory_multiplier,
    rademacher_multiplier,
    rademacher_signs,
    random_atom_train,
    reproducing_profile,
    reproducing_window,
)
from torusfs.pseudo import seminorm


def test_config_validation():
    with pytest.raises(ValueError):
        LacunaryConfig(L=2, k0=3)
    with pytest.raises(ValueError):
        LacunaryConfig(L=5, spacing=0)
    cfg = LacunaryConfig(L=5, spacing=2)
    assert list(cfg.scales()) == [3, 4, 5]
    assert cfg.shell_bounds(3) == (2**8, 2**9)
    # shells pairwise disjoint even at spacing 1
    cfg1 = LacunaryConfig(L=6, spacing=1)
    bounds = [cfg1.shell_bounds(k) for k in cfg1.scales()]
    for (lo1, hi1), (lo2, hi2) in zip(bounds, bounds[1:]):
        assert hi1 <= lo2


def test_oscillatory_multiplier_values():
    sym = oscillatory_multiplier(-0.5, 0.5)
    assert abs(sym.fn(None, (np.array([0.0]),))[0] - 1.0) < 1e-15
    xi = np.linspace(-40, 40, 401)
    vals = sym.fn(None, (xi,))
    assert np.max(np.abs(np.abs(vals) - (1 + xi**2) ** -0.25)) < 1e-13
    with pytest.raises(ValueError):
        oscillatory_multiplier(0.0, 1.0)


def test_oscillatory_symbol_class_estimate():
    # the rho-weighted first differences stay bounded out to |xi| = 2^8;
    # the kink of |xi|^(1/2) at zero is excluded by the even symmetry
    sym = oscillatory_multiplier(0.0, 0.5)
    val = seminorm(sym, 1, 0, m=0.0, rho=0.5, xi_max=256.0, check=False)
    assert val < 2 * np.pi
    val2 = seminorm(sym, 2, 0, m=0.0, rho=0.5, xi_max=256.0, check=False)
    assert np.isfinite(val2)


def test_rademacher_multiplier_support_and_values():
    cfg = LacunaryConfig(L=4, spacing=2, m=-0.25, seed=5)
    sym = rademacher_multiplier(cfg, draw=1)
    # far from every shell
    far = np.array([3.0, 100.0, 2.0**15])
    assert np.max(np.abs(sym.fn(None, (far,)))) == 0.0
    # at a shell point: neighbors n -/+ 1 contribute with the profile at 1
    lp = build_partition(3)
    signs = rademacher_signs(cfg, 1)
    lo, hi = cfg.shell_bounds(3)
    pos, _ = signs[3]
    n0 = lo + 5
    expected = 2.0 ** (cfg.zeta(3) * cfg.m) * (pos[4] * lp.mother(1.0) + pos[5] * lp.mother(0.0) + pos[6] * lp.mother(1.0))
    got = sym.fn(None, (np.array([float(n0)]),))[0]
    assert abs(got - expected) < 1e-12


def test_multiplier_lattice_fast_path_matches_closure():
    cfg = LacunaryConfig(L=3, spacing=2, m=-0.25, seed=5)
    grid = make_grid(1, 2**11)
    fast = multiplier_on_lattice(cfg, grid, draw=2)
    slow = rademacher_multiplier(cfg, draw=2).fn(None, (grid.axis_freqs(),))
    assert np.max(np.abs(fast - slow)) == 0.0


def test_rademacher_seminorm_uniform_over_draws():
    cfg = LacunaryConfig(L=5, spacing=1, m=0.0, seed=0)
    vals = [seminorm(rademacher_multiplier(cfg, draw=d), 0, 0, m=0.0, xi_max=300.0, check=False) for d in range(10)]
    assert max(vals) <= 2.0 * min(vals)
    vals1 = [seminorm(rademacher_multiplier(cfg, draw=d), 1, 0, m=0.0, xi_max=300.0, check=False) for d in range(10)]
    assert max(vals1) <= 2.0 * min(vals1)


def test_reproducing_window_profile():
    assert reproducing_profile(3.0) == 1.0
    assert reproducing_profile(0.5) == 0.0
    assert reproducing_profile(16.0) == 1.0
    assert reproducing_profile(33.0) == 0.0
    g = make_grid(1, 128)
    w = reproducing_window(g)
    assert abs(w.spectrum[4] - 1.0) < 1e-14


def test_reproducing_identity_on_shells():
    lp = build_partition(3)
    for spacing in (1, 2, 3):
        cfg = LacunaryConfig(L=3, spacing=spacing)
        lo, hi = cfg.shell_bounds(3)
        z = cfg.zeta(3)
        worst = 0.0
        for n0 in range(lo, hi):
            for dx in (-2, -1, 0, 1, 2):
                xi = n0 + dx
                w = lp.mother(abs(xi - n0))
                worst = max(worst, abs(reproducing_profile(xi / 2.0**z) * w - w))
        assert worst < 1e-12


def test_atom_train_zero_draw():
    cfg = RandomAtomConfig(L=3, spacing=2, p=2.0, seed=9)
    grid = make_grid(1, 2 ** (cfg.zeta(3) + 6))
    f = random_atom_train(cfg, grid, draw=0)  # this seed/draw activates nothing
    assert np.max(np.abs(f.samples)) == 0.0


def test_atom_train_single_cube_norm():
    from torusfs.experiments import atom_train_spectrum

    def single_cube_train(L):
        cfg = RandomAtomConfig(L=L, spacing=1, p=2.0, seed=1, k0=L)
        grid = make_grid(1, 2 ** (cfg.zeta(L) + 6))
        for draw in range(80):
            spec, act = atom_train_spectrum(cfg, grid, draw)
            if len(act[L]) == 1:
                return cfg, grid, GridFunction.from_spectrum(grid, spec)
        pytest.fail("no single-cube draw found")

    cfg5, grid5, f5 = single_cube_train(5)
    cfg6, grid6, f6 = single_cube_train(6)
    # change of variables on the lattice: both trains sample the dilated
    # window at the same relative rate, so the norms obey the scaling law
    # ||B G(2^z .)||_p = B 2^(-z/p) ||G||_p up to periodization tails
    for p in (1.0, 2.0, np.inf):
        ratio = f6.lp_norm(p) / f5.lp_norm(p)
        z5, z6 = cfg5.zeta(5), cfg6.zeta(6)
        expected = (cfg6.amplitude(6) / cfg5.amplitude(5)) * 2.0 ** (-(z6 - z5) / p)
        assert abs(ratio - expected) < 1e-6 * expected
    # p = 2 value against an FFT-free spectral quadrature
    z = cfg5.zeta(5)
    xi = np.fft.fftfreq(grid5.n, 1.0 / grid5.n)
    direct = cfg5.amplitude(5) * 2.0**-z * float(np.sqrt(np.sum(reproducing_profile(np.abs(xi) / 2.0**z) ** 2)))
    assert abs(f5.lp_norm(2.0) - direct) < 1e-10 * direct


def test_lacunary_function_examples():
    cfg = RandomAtomConfig(L=3, spacing=2, p=2.0)
    grid = make_grid(1, 2 ** (cfg.zeta(3) + 6))
    # C identically zero
    z = lacunary_test_function(cfg, grid, coeffs={3: 0.0})
    assert np.max(np.abs(z.samples)) == 0.0
    # single term: B norm proportional to the window norm
    from torusfs.spaces import SpaceParams, besov_norm

    g = lacunary_test_function(cfg, grid, coeffs={3: 1.0})
    part = build_partition(int(np.log2(grid.n)) - 2)
    got = besov_norm(g, part, SpaceParams(0.0, 2.0, 2.0, "besov"))
    # single dilated window: the band norm sits inside the partition
    # overlap bracket of its L2 norm, which scales like 2^(zeta d (1 - 1/p))
    direct = g.lp_norm(2.0)
    assert 0.7 * direct <= got <= 1.0001 * direct
    z3 = cfg.zeta(3)
    xi = np.fft.fftfreq(grid.n, 1.0 / grid.n)
    window_l2 = float(np.sqrt(np.sum(reproducing_profile(np.abs(xi) / 2.0**z3) ** 2) * 2.0**-z3))
    assert abs(direct - 2.0 ** (z3 * (1.0 - 1.0 / 2.0)) * window_l2) < 1e-10 * direct


def test_lacunary_two_disjoint_scales_combine_exactly():
    # spacing 7 separates the window supports by more than one full band,
    # so no dyadic band sees both scales and the l^q combination is exact
    cfg = RandomAtomConfig(L=2, spacing=7, p=2.0, k0=1)
    grid = make_grid(1, 2 ** (cfg.zeta(2) + 6))
    part = build_partition(int(np.log2(grid.n)) - 2)
    from torusfs.spaces import SpaceParams, besov_norm

    q = 1.5
    n1 = besov_norm(lacunary_test_function(cfg, grid, coeffs={1: 0.7, 2: 0.0}), part, SpaceParams(0, 2, q, "besov"))
    n2 = besov_norm(lacunary_test_function(cfg, grid, coeffs={1: 0.0, 2: 0.4}), part, SpaceParams(0, 2, q, "besov"))
    both = besov_norm(lacunary_test_function(cfg, grid, coeffs={1: 0.7, 2: 0.4}), part, SpaceParams(0, 2, q, "besov"))
    assert abs(both - (n1**q + n2**q) ** (1 / q)) < 1e-10 * both


def test_khintchine_constants():
    lo, hi = khintchine_constants(2.0)
    assert lo == hi == 1.0
    lo, hi = khintchine_constants(1.0)
    assert abs(lo - 2**-0.5) < 1e-12 and hi == 1.0
    lo, hi = khintchine_constants(4.0)
    assert lo == 1.0 and abs(hi - 3**0.25) < 1e-12


def test_khintchine_exhaustive_cases():
    rep = khintchine_audit([1.0, 1.0], 1.0)
    assert rep.passed and abs(rep.constant - 2**-0.5) < 1e-12
    rng = np.random.default_rng(0)
    for _ in range(5):
        coeffs = rng.standard_normal(rng.integers(2, 12))
        rep = khintchine_audit(coeffs, 2.0)
        assert abs(rep.constant - 1.0) < 1e-12
    rep = khintchine_audit([1, 1, 1, 1], 4.0)
    moment4 = np.mean([abs(a + b + c + d) ** 4 for a in (1, -1) for b in (1, -1) for c in (1, -1) for d in (1, -1)])
    assert abs(rep.constant - moment4**0.25 / 2.0) < 1e-12


def test_khintchine_monte_carlo():
    rng = np.random.default_rng(1)
    coeffs = rng.standard_normal(40)
    for p in (1.0, 4.0):
        rep = khintchine_audit(coeffs, p, draws=40000, seed=2)
        assert rep.passed
        assert not rep.params["exhaustive"]


def test_image_formula_and_hygiene():
    lac = LacunaryConfig(L=2, spacing=3, m=0.0, seed=4, k0=1)
    atoms = RandomAtomConfig(L=2, spacing=3, p=2.0, seed=4, k0=1)
    grid = make_grid(1, 2 ** (atoms.zeta(2) + 6))
    for draw in range(3):
        train = random_atom_train(atoms, grid, draw)
        img_spec = multiplier_on_lattice(lac, grid, draw) * train.spectrum
        img = GridFunction.from_spectrum(grid, img_spec)
        formula = atom_train_image(lac, atoms, grid, draw)
        scale = max(np.max(np.abs(img.samples)), 1e-300)
        assert np.max(np.abs(formula.samples - img.samples)) / scale < 1e-8
        assert image_shell_leakage(img, lac) < 1e-10


def test_image_formula_requires_separated_shells():
    lac = LacunaryConfig(L=3, spacing=2, seed=0)
    atoms = RandomAtomConfig(L=3, spacing=2, seed=0)
    with pytest.raises(ValueError):
        atom_train_image(lac, atoms, make_grid(1, 2**12), 0)


def test_fspace_growth_small():
    lac = LacunaryConfig(L=6, spacing=1, m=0.0, seed=7)
    atoms = RandomAtomConfig(L=6, spacing=1, p=2.0, seed=7)
    rep = fspace_growth_experiment(lac, atoms, p=2.0, q=2.0, t=1.0, draws=100)
    assert rep.passed
    assert rep.details["input_slope"] <= 0.5 + 0.15
    assert rep.details["output_slope"] >= 1.0 - 0.15
    assert rep.details["single_cube_probability_floor"] > 0.15
    # growth curves non-decreasing in L
    outs = [row["output_norm"] for row in rep.table]
    assert all(b >= a * 0.98 for a, b in zip(outs, outs[1:]))


def test_fspace_growth_no_divergence_at_t_eq_p():
    # shells fed by exactly one scale each (spacing >= 3), so the t = p
    # output growth tracks the input growth with no divergence
    lac = LacunaryConfig(L=4, spacing=3, m=0.0, seed=7, k0=1)
    atoms = RandomAtomConfig(L=4, spacing=3, p=2.0, seed=7, k0=1)
    rep = fspace_growth_experiment(lac, atoms, p=2.0, q=2.0, t=2.0, draws=80)
    slopes = rep.details
    assert abs(slopes["input_slope"] - slopes["output_slope"]) < 0.15


def test_fspace_determinism_and_workers():
    lac = LacunaryConfig(L=5, spacing=1, m=0.0, seed=13)
    atoms = RandomAtomConfig(L=5, spacing=1, p=2.0, seed=13)
    rep1 = fspace_growth_experiment(lac, atoms, 2.0, 2.0, 1.0, draws=20)
    rep2 = fspace_growth_experiment(lac, atoms, 2.0, 2.0, 1.0, draws=20)
    rep3 = fspace_growth_experiment(lac, atoms, 2.0, 2.0, 1.0, draws=20, workers=2)
    assert rep1.to_json() == rep2.to_json() == rep3.to_json()


def test_bspace_growth_small():
    lac = LacunaryConfig(L=6, spacing=1, m=0.0, seed=3)
    atoms = RandomAtomConfig(L=6, spacing=1, p=2.0, seed=3)
    rep = bspace_growth_experiment(lac, atoms, p=2.0, q=2.0, t=1.0, draws=40)
    assert rep.passed
    assert rep.details["input_drift"] <= 0.10
    assert rep.details["output_slope"] >= 0.5 - 0.05
    # no divergence designed at t = q: clean shells need spacing >= 3
    lac3 = LacunaryConfig(L=4, spacing=3, m=0.0, seed=3, k0=1)
    atoms3 = RandomAtomConfig(L=4, spacing=3, p=2.0, seed=3, k0=1)
    rep_flat = bspace_growth_experiment(lac3, atoms3, p=2.0, q=2.0, t=2.0, draws=40)
    assert abs(rep_flat.details["output_slope"]) < 0.25


def test_bspace_rejects_non_spectral_p():
    lac = LacunaryConfig(L=5, spacing=1, seed=0)
    atoms = RandomAtomConfig(L=5, spacing=1, seed=0)
    with pytest.raises(ValueError):
        bspace_growth_experiment(lac, atoms, p=1.5, q=2.0, t=1.0, draws=5)


def test_lacunary_coeff_modes():
    cfg = RandomAtomConfig(L=6, spacing=1, p=2.0)
    flat = lacunary_coeffs(cfg, 2.0, "flat")
    assert len(flat) == 4
    power = lacunary_coeffs(cfg, 2.0, "power")
    assert all(power[k] > 0 for k in power)
    with pytest.raises(ValueError):
        lacunary_coeffs(cfg, 2.0, "mystery")


def test_shell_sign_sum_lp_comparability():
    # the L^1-in-x norm of (window x shell sign sum) stays within a factor 2
    # band around 2^(zeta d / 2) across draws, and the construction is
    # bit-identical for identical seeds
    cfg = LacunaryConfig(L=3, spacing=2, m=0.0, seed=21)
    z = cfg.zeta(3)
    grid = make_grid(1, 2 ** (z + 5))
    lo, hi = cfg.shell_bounds(3)
    lp = build_partition(3)
    phi = GridFunction.from_spectrum(grid, lp.mother(grid.freq_radii()).astype(complex)).samples
    vals = []
    for draw in range(50):
        pos, neg = rademacher_signs(cfg, draw)[3]
        spec = np.zeros(grid.n, dtype=complex)
        spec[np.arange(lo, hi)] = pos
        spec[-np.arange(lo, hi)] = neg
        d_samples = GridFunction.from_spectrum(grid, spec).samples
        vals.append(float(np.mean(np.abs(phi * d_samples))) / 2.0 ** (z / 2))
    assert max(vals) / min(vals) < 2.0
    again = rademacher_signs(cfg, 7)[3]
    first = rademacher_signs(cfg, 7)[3]
    assert np.array_equal(again[0], first[0]) and np.array_equal(again[1], first[1])
    from torusfs.experiments import atom_train_spectrum

    atoms = RandomAtomConfig(L=3, spacing=2, seed=21)
    g2 = make_grid(1, 2 ** (atoms.zeta(3) + 6))
    s1, _ = atom_train_spectrum(atoms, g2, 5)
    s2, _ = atom_train_spectrum(atoms, g2, 5)
    assert np.array_equal(s1, s2)
