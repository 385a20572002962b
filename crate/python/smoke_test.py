"""Smoke test for the `collapse_radiance` extension module.

Build and run from the repository root:

    PYO3_BUILD_EXTENSION_MODULE=1 cargo build --release -p collapse-radiance-py
    cp target/release/libcollapse_radiance_py.so python/collapse_radiance.so
    python3 python/smoke_test.py
"""

import json
import math

import collapse_radiance as cr


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(abs(a), abs(b))


def main():
    ge = cr.Atom.builtin("Ge")
    assert ge.n_protons == 32 and ge.n_electrons == 32
    assert sum(occ for _, occ, _ in ge.shells) == 32
    # Ordered pairs over 32 protons and 32 electrons.
    assert sum(m for _, _, m in ge.pairs()) == 64 * 64
    assert cr.Atom.from_json(ge.to_json()).shells == ge.shells

    csl = cr.CslParams(1e-16, 1e-7)
    geom = cr.PairGeometry()
    assert geom.alpha == 1.25 and geom.beta == 1.04

    # Far above the atomic scale the general rate tends to the 1/E form.
    high = 1e5
    assert close(cr.csl_rate_general(ge, high, csl), cr.csl_rate_simple(ge, high, csl), 1e-3)
    assert close(cr.dp_rate_general(ge, high, cr.DpParams(1e-10)), cr.dp_rate_simple(ge, high, cr.DpParams(1e-10)), 1e-3)

    energies = [1.0 * 10 ** (k / 10) for k in range(31)]
    spectrum = cr.compute_spectrum("csl-general", ge, csl, energies)
    assert len(spectrum) == 31 and spectrum.model_tag == "csl_general:markovian"
    for e, v in zip(spectrum.energies, spectrum.values):
        assert close(v, cr.csl_rate_general(ge, e, csl))
    assert json.loads(spectrum.to_json())["kind"] == "spectrum"
    simple = cr.compute_spectrum("csl-simple", ge, csl, energies)
    e_star = cr.convergence_energy(spectrum.normalize(), simple.normalize(), 0.05)
    assert e_star is not None and 100 < e_star < 1000

    assert close(cr.colored_filter(10.0, 10.0), 0.5)
    assert 0 < cr.cancellation_factor("csl-general", ge, 10.0, csl) < 1

    truth = cr.CslParams(1.0, 1.15e-8)
    centers = [5.0 + 5.0 * k for k in range(10)]
    data = cr.synth_counts("csl-general", ge, truth, centers, 1e34, bin_width_kev=5.0, seed=7)
    again = cr.synth_counts("csl-general", ge, truth, centers, 1e34, bin_width_kev=5.0, seed=7)
    assert data.counts == again.counts
    data = cr.SyntheticSpectrum.from_json(data.to_json())
    fit = cr.fit(data, "csl-general", prior=2e-8)
    assert fit.converged, fit
    assert abs(fit.amplitude - 1.0) < 3 * fit.amplitude_sigma + 1e-3, fit
    assert abs(fit.corr_length / 1.15e-8 - 1) < 0.05, fit

    try:
        cr.CslParams(-1.0, 1e-7)
    except ValueError:
        pass
    else:
        raise AssertionError("negative λ accepted")

    print(f"collapse_radiance {cr.__version__}: smoke test passed ({fit!r})")


if __name__ == "__main__":
    main()
