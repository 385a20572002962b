//! Explicit double sum over every ordered pair of charged particles,
//! written from scratch with its own constants.

#![allow(dead_code)]

use collapse_radiance::{Atom, PairGeometry, Shell};

const HBAR: f64 = 1.054_571_817e-34;
const C: f64 = 299_792_458.0;
const EPS0: f64 = 8.854_187_812_8e-12;
const QE: f64 = 1.602_176_634e-19;
const M0: f64 = 1.660_539_066_60e-27;
const G: f64 = 6.674_30e-11;
const KEV: f64 = 1.602_176_634e-16;

#[derive(Clone, Copy)]
enum Particle {
    Proton,
    Electron { shell: usize, index: u32 },
}

struct Expanded {
    particles: Vec<Particle>,
    radii: Vec<f64>,
    alphas: Vec<f64>,
    beta: f64,
}

impl Expanded {
    fn new(atom: &Atom, geom: &PairGeometry) -> Self {
        let mut particles = vec![Particle::Proton; atom.n_protons() as usize];
        for (s, shell) in atom.shells().iter().enumerate() {
            for index in 0..shell.occupancy {
                particles.push(Particle::Electron { shell: s, index });
            }
        }
        Expanded {
            particles,
            radii: atom.shells().iter().map(|s| s.mean_radius).collect(),
            alphas: atom.shells().iter().map(|s| s.alpha_override.unwrap_or(geom.alpha)).collect(),
            beta: geom.beta,
        }
    }

    fn charge(p: Particle) -> f64 {
        match p {
            Particle::Proton => QE,
            Particle::Electron { .. } => -QE,
        }
    }

    /// Point-nucleus shell model distances.
    fn distance(&self, a: Particle, b: Particle) -> f64 {
        use Particle::*;
        match (a, b) {
            (Proton, Proton) => 0.0,
            (Proton, Electron { shell, .. }) | (Electron { shell, .. }, Proton) => self.radii[shell],
            (Electron { shell: s, index: i }, Electron { shell: t, index: j }) => {
                if s == t && i == j {
                    0.0
                } else if s == t {
                    self.alphas[s] * self.radii[s]
                } else {
                    self.beta * (self.radii[s] - self.radii[t]).abs()
                }
            }
        }
    }

    fn pair_sum(&self, e_joule: f64, kernel: impl Fn(f64) -> f64) -> f64 {
        let mut total = 0.0;
        for &a in &self.particles {
            for &b in &self.particles {
                let d = self.distance(a, b);
                let arg = d * e_joule / (HBAR * C);
                let sinc = if arg == 0.0 { 1.0 } else { arg.sin() / arg };
                total += Self::charge(a) * Self::charge(b) * kernel(d) * sinc;
            }
        }
        total
    }
}

fn filter(e_kev: f64, ec: Option<f64>) -> f64 {
    ec.map_or(1.0, |ec| ec * ec / (ec * ec + e_kev * e_kev))
}

/// Per-keV CSL rate: ħλ/(6π²ε₀c³m₀²E) Σ q_i q_j f_ij/(m_i m_j) sinc(b_ij).
pub fn csl_oracle(atom: &Atom, geom: &PairGeometry, e_kev: f64, lambda: f64, rc: f64, ec: Option<f64>) -> f64 {
    let ex = Expanded::new(atom, geom);
    let e = e_kev * KEV;
    let m = M0;
    let f = |d: f64| m * m / (2.0 * rc * rc) * (-d * d / (4.0 * rc * rc)).exp() * (3.0 - d * d / (2.0 * rc * rc));
    let sum = ex.pair_sum(e, |d| f(d) / (m * m));
    let per_joule = HBAR * lambda / (6.0 * std::f64::consts::PI.powi(2) * EPS0 * C.powi(3) * m * m * e) * sum;
    per_joule * KEV * filter(e_kev, ec)
}

/// Per-keV DP rate: G/(6π²ε₀c³E) Σ q_i q_j f_ij sinc(b_ij), Gaussian-overlap f_ij.
pub fn dp_oracle(atom: &Atom, geom: &PairGeometry, e_kev: f64, r0: f64, ec: Option<f64>) -> f64 {
    let ex = Expanded::new(atom, geom);
    let e = e_kev * KEV;
    let f = |d: f64| (-d * d / (4.0 * r0 * r0)).exp() / (2.0 * std::f64::consts::PI.sqrt() * r0.powi(3));
    let sum = ex.pair_sum(e, f);
    G / (6.0 * std::f64::consts::PI.powi(2) * EPS0 * C.powi(3) * e) * sum * KEV * filter(e_kev, ec)
}

pub fn hydrogen() -> Atom {
    Atom::neutral("H", 1, vec![Shell::new("1s", 1, 5.29e-11)], "sample").unwrap()
}

/// Boron-like toy with a per-shell α on 1s.
pub fn toy() -> Atom {
    Atom::neutral(
        "Toy",
        5,
        vec![Shell::new("1s", 2, 1.2e-11).with_alpha(1.47), Shell::new("2s", 2, 6.1e-11), Shell::new("2p", 1, 5.4e-11)],
        "sample",
    )
    .unwrap()
}

pub fn energies() -> Vec<f64> {
    (0..10).map(|i| 10f64.powf(3.0 * i as f64 / 9.0)).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
