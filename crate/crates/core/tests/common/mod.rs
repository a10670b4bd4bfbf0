//! Oracles shared by the integration and acceptance tests. None of them
//! call into the library's algebra or lattice code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub type M3 = Matrix3<Complex64>;

/// Mean and standard error over blocks of `bin` consecutive samples.
pub fn binned_mean(xs: &[f64], bin: usize) -> (f64, f64) {
    let blocks: Vec<f64> = xs
        .chunks_exact(bin)
        .map(|c| c.iter().sum::<f64>() / bin as f64)
        .collect();
    let n = blocks.len() as f64;
    let mean = blocks.iter().sum::<f64>() / n;
    let var = blocks.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Chi-square p-value of `a0` samples against the density
/// `∝ sqrt(1 - a0²) exp(alpha a0)` on `[-1, 1]`, with `bins` equal bins.
/// Bin probabilities are integrated in `θ = acos(a0)`, where the integrand
/// `sin²θ exp(alpha cos θ)` is smooth. Sparse bins are pooled until each
/// expects at least 5 counts.
pub fn heatbath_chi_square(alpha: f64, samples: &[f64], bins: usize) -> (f64, usize) {
    let density = |t: f64| t.sin().powi(2) * (alpha * t.cos()).exp();
    let edge = |i: usize| -1.0 + 2.0 * i as f64 / bins as f64;
    let mut prob: Vec<f64> = (0..bins)
        .map(|i| {
            let lo = edge(i).clamp(-1.0, 1.0).acos();
            let hi = edge(i + 1).clamp(-1.0, 1.0).acos();
            simpson(density, hi, lo, 400)
        })
        .collect();
    let total: f64 = prob.iter().sum();
    prob.iter_mut().for_each(|p| *p /= total);

    let mut counts = vec![0u64; bins];
    for &a in samples {
        let i = (((a + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = samples.len() as f64;
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut e_acc, mut o_acc) = (0.0, 0.0);
    for (p, &c) in prob.iter().zip(&counts) {
        e_acc += p * n;
        o_acc += c as f64;
        if e_acc >= 5.0 {
            pooled.push((o_acc, e_acc));
            e_acc = 0.0;
            o_acc = 0.0;
        }
    }
    if e_acc > 0.0 {
        let last = pooled.last_mut().expect("at least one pooled bin");
        last.0 += o_acc;
        last.1 += e_acc;
    }
    let chi2: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = pooled.len() - 1;
    let p = ChiSquared::new(dof as f64).unwrap().sf(chi2);
    (p, dof)
}

/// Periodic 4D lattice with x fastest, independent of the library's.
#[derive(Clone, Copy, Debug)]
pub struct Lat {
    pub dims: [usize; 4],
}

impl Lat {
    pub fn volume(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn coord(&self, mut i: usize) -> [usize; 4] {
        let mut c = [0; 4];
        for d in 0..4 {
            c[d] = i % self.dims[d];
            i /= self.dims[d];
        }
        c
    }

    pub fn index(&self, c: [usize; 4]) -> usize {
        c[3] * self.dims[2] * self.dims[1] * self.dims[0]
            + c[2] * self.dims[1] * self.dims[0]
            + c[1] * self.dims[0]
            + c[0]
    }

    pub fn step(&self, i: usize, d: usize, k: isize) -> usize {
        let mut c = self.coord(i);
        c[d] = (c[d] as isize + k).rem_euclid(self.dims[d] as isize) as usize;
        self.index(c)
    }

    /// Every plaquette and 2×1 rectangle as its list of (site, direction) links.
    pub fn all_loops(&self, rectangles: bool) -> Vec<Vec<(usize, usize)>> {
        let mut loops = Vec::new();
        for x in 0..self.volume() {
            for mu in 0..4 {
                for nu in 0..4 {
                    if mu == nu {
                        continue;
                    }
                    let xm = self.step(x, mu, 1);
                    let xn = self.step(x, nu, 1);
                    if mu < nu {
                        loops.push(vec![(x, mu), (xm, nu), (xn, mu), (x, nu)]);
                    }
                    if rectangles {
                        let x2m = self.step(xm, mu, 1);
                        let xmn = self.step(xm, nu, 1);
                        loops.push(vec![(x, mu), (xm, mu), (x2m, nu), (xn, mu), (xmn, mu), (x, nu)]);
                    }
                }
            }
        }
        loops
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn re_tr(m: &M3) -> f64 {
    m.trace().re
}

/// `exp(iεH)` for a random traceless Hermitian `H`.
pub fn random_near_identity(rng: &mut StdRng, eps: f64) -> M3 {
    let a = M3::from_fn(|_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let mut h = (a + a.adjoint()) * c(0.5, 0.0);
    let tr = h.trace() / c(3.0, 0.0);
    for i in 0..3 {
        h[(i, i)] -= tr;
    }
    (h * c(0.0, eps)).exp()
}

/// Wilson-action Metropolis sampler on a single periodic lattice, written
/// against nalgebra and a plain link array.
pub struct Metropolis {
    pub lat: Lat,
    pub beta: f64,
    pub links: Vec<M3>,
    proposals: Vec<M3>,
    pub hits: usize,
    rng: StdRng,
    pub accepted: u64,
    pub proposed: u64,
}

impl Metropolis {
    pub fn new(dims: [usize; 4], beta: f64, eps: f64, hits: usize, seed: u64) -> Self {
        let lat = Lat { dims };
        let mut rng = StdRng::seed_from_u64(seed);
        let mut proposals = Vec::new();
        for _ in 0..100 {
            let r = random_near_identity(&mut rng, eps);
            proposals.push(r.adjoint());
            proposals.push(r);
        }
        Metropolis {
            lat,
            beta,
            links: vec![M3::identity(); lat.volume() * 4],
            proposals,
            hits,
            rng,
            accepted: 0,
            proposed: 0,
        }
    }

    fn u(&self, x: usize, mu: usize) -> &M3 {
        &self.links[x * 4 + mu]
    }

    fn staple(&self, x: usize, mu: usize) -> M3 {
        let l = self.lat;
        let mut a = M3::zeros();
        let xm = l.step(x, mu, 1);
        for nu in (0..4).filter(|&n| n != mu) {
            let xn = l.step(x, nu, 1);
            let xdn = l.step(x, nu, -1);
            let xm_dn = l.step(xm, nu, -1);
            a += self.u(xm, nu) * self.u(xn, mu).adjoint() * self.u(x, nu).adjoint();
            a += self.u(xm_dn, nu).adjoint() * self.u(xdn, mu).adjoint() * self.u(xdn, nu);
        }
        a
    }

    pub fn sweep(&mut self) {
        for x in 0..self.lat.volume() {
            for mu in 0..4 {
                let a = self.staple(x, mu);
                for _ in 0..self.hits {
                    let r = self.proposals[self.rng.random_range(0..self.proposals.len())];
                    let old = self.links[x * 4 + mu];
                    let new = r * old;
                    let ds = -self.beta / 3.0 * (re_tr(&(new * a)) - re_tr(&(old * a)));
                    self.proposed += 1;
                    if ds <= 0.0 || self.rng.random::<f64>() < (-ds).exp() {
                        self.links[x * 4 + mu] = new;
                        self.accepted += 1;
                    }
                }
            }
        }
    }

    pub fn avg_plaquette(&self) -> f64 {
        let l = self.lat;
        let mut s = 0.0;
        for x in 0..l.volume() {
            for mu in 0..4 {
                for nu in mu + 1..4 {
                    let p = self.u(x, mu)
                        * self.u(l.step(x, mu, 1), nu)
                        * self.u(l.step(x, nu, 1), mu).adjoint()
                        * self.u(x, nu).adjoint();
                    s += re_tr(&p) / 3.0;
                }
            }
        }
        s / (6.0 * l.volume() as f64)
    }
}

/// Converts a library link into an nalgebra matrix via its public entries.
pub fn to_m3(u: &latticefarm::su3::Complex3x3) -> M3 {
    M3::from_fn(|i, j| u.m[i][j])
}

/// Largest `|(U†U - I)_ij|` over a set of nalgebra matrices.
pub fn max_unitarity_violation(ms: &[M3]) -> f64 {
    ms.iter()
        .map(|m| {
            (m.adjoint() * m - M3::identity())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Map from each link to the loops through it.
pub fn loops_by_link(loops: &[Vec<(usize, usize)>]) -> HashMap<(usize, usize), Vec<usize>> {
    let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, l) in loops.iter().enumerate() {
        for &link in l {
            map.entry(link).or_default().push(i);
        }
    }
    map
}
