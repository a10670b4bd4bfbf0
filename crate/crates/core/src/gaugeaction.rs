//! Plaquette and 1×2 rectangle observables, staples and the total action.
//!
//! The action is
//! `S = β Σ_x [ c0 Σ_{µ<ν} (1 - P_µν(x)) + c1 Σ_{µ≠ν} (1 - R_µν(x)) ]`
//! with `P` and `R` one third of the real trace of the plaquette and of the
//! rectangle that extends two steps along `µ`.

use serde::{Deserialize, Serialize};

use crate::comm::{CommError, Communicator};
use crate::field::{FieldError, GaugeField};
use crate::lattice::{HALO_DEPTH, NDIM};
use crate::par::{ordered_sum, Execution};
use crate::su3::Complex3x3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Wilson,
    Symanzik,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionCoeffs {
    pub beta: f64,
    pub c0: f64,
    pub c1: f64,
    pub preset: Preset,
}

impl ActionCoeffs {
    pub fn wilson(beta: f64) -> Self {
        ActionCoeffs {
            beta,
            c0: 1.0,
            c1: 0.0,
            preset: Preset::Wilson,
        }
    }

    /// Tree-level improved: c0 = 5/3, c1 = -1/12.
    pub fn symanzik(beta: f64) -> Self {
        ActionCoeffs {
            beta,
            c0: 5.0 / 3.0,
            c1: -1.0 / 12.0,
            preset: Preset::Symanzik,
        }
    }

    pub fn custom(beta: f64, c0: f64, c1: f64) -> Self {
        ActionCoeffs {
            beta,
            c0,
            c1,
            preset: Preset::Custom,
        }
    }

    pub fn has_rectangles(&self) -> bool {
        self.c1 != 0.0
    }
}

/// `Re tr[a · b†]`.
#[inline]
fn re_tr_mul_adj(a: &Complex3x3, b: &Complex3x3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a.m[i][j].re * b.m[i][j].re + a.m[i][j].im * b.m[i][j].im;
        }
    }
    s
}

fn check_reach(field: &GaugeField, x: [isize; NDIM], offsets: &[(usize, isize)]) -> Result<usize, FieldError> {
    let idx = field.index_or_miss(x)?;
    for &(d, k) in offsets {
        let mut y = x;
        y[d] += k;
        field.index_or_miss(y)?;
    }
    Ok(idx)
}

#[inline]
fn plaq_at(f: &GaugeField, x: usize, mu: usize, nu: usize) -> f64 {
    let a = *f.link(x, mu).matrix() * *f.link(f.shift(x, mu, 1), nu).matrix();
    let b = *f.link(x, nu).matrix() * *f.link(f.shift(x, nu, 1), mu).matrix();
    re_tr_mul_adj(&a, &b) / 3.0
}

#[inline]
fn rect_at(f: &GaugeField, x: usize, mu: usize, nu: usize) -> f64 {
    let xm = f.shift(x, mu, 1);
    let xn = f.shift(x, nu, 1);
    let a = *f.link(x, mu).matrix() * *f.link(xm, mu).matrix() * *f.link(f.shift(xm, mu, 1), nu).matrix();
    let b = *f.link(x, nu).matrix() * *f.link(xn, mu).matrix() * *f.link(f.shift(xn, mu, 1), mu).matrix();
    re_tr_mul_adj(&a, &b) / 3.0
}

/// `(1/3) Re tr[U_µ(x) U_ν(x+µ) U_µ†(x+ν) U_ν†(x)]` at a local coordinate.
pub fn plaquette(field: &GaugeField, x: [isize; NDIM], mu: usize, nu: usize) -> Result<f64, FieldError> {
    let idx = check_reach(field, x, &[(mu, 1), (nu, 1)])?;
    Ok(plaq_at(field, idx, mu, nu))
}

/// The 2×1 loop extending two steps along `mu` and one along `nu`.
pub fn rectangle(field: &GaugeField, x: [isize; NDIM], mu: usize, nu: usize) -> Result<f64, FieldError> {
    let idx = check_reach(field, x, &[(mu, 2), (nu, 1)])?;
    Ok(rect_at(field, idx, mu, nu))
}

fn site_plaquettes(f: &GaugeField, x: usize) -> f64 {
    let mut s = 0.0;
    for mu in 0..NDIM {
        for nu in mu + 1..NDIM {
            s += plaq_at(f, x, mu, nu);
        }
    }
    s
}

fn site_rectangles(f: &GaugeField, x: usize) -> f64 {
    let mut s = 0.0;
    for mu in 0..NDIM {
        for nu in 0..NDIM {
            if mu != nu {
                s += rect_at(f, x, mu, nu);
            }
        }
    }
    s
}

fn global_site_sum(
    field: &GaugeField,
    comm: &Communicator,
    exec: Execution,
    per_site: impl Fn(&GaugeField, usize) -> f64 + Sync + Send,
) -> Result<f64, CommError> {
    let sites: Vec<usize> = field.owned_sites().map(|s| s.ext).collect();
    let local = ordered_sum(&exec.map(&sites, |&x| per_site(field, x)));
    comm.allreduce_sum(local)
}

/// Mean plaquette over all sites and the six planes. Collective; halos must
/// be current.
pub fn avg_plaquette(field: &GaugeField, comm: &Communicator, exec: Execution) -> Result<f64, CommError> {
    let sum = global_site_sum(field, comm, exec, site_plaquettes)?;
    Ok(sum / (6.0 * field.geometry().volume() as f64))
}

/// Mean rectangle over all sites and the twelve orientations. Collective.
pub fn avg_rectangle(field: &GaugeField, comm: &Communicator, exec: Execution) -> Result<f64, CommError> {
    let sum = global_site_sum(field, comm, exec, site_rectangles)?;
    Ok(sum / (12.0 * field.geometry().volume() as f64))
}

/// Total action. Collective; halos must be current.
pub fn total_action(
    field: &GaugeField,
    comm: &Communicator,
    coeffs: &ActionCoeffs,
    exec: Execution,
) -> Result<f64, CommError> {
    let c = *coeffs;
    let sum = global_site_sum(field, comm, exec, move |f, x| {
        let mut s = c.c0 * (6.0 - site_plaquettes(f, x));
        if c.has_rectangles() {
            s += c.c1 * (12.0 - site_rectangles(f, x));
        }
        s
    })?;
    Ok(c.beta * sum)
}

/// One step of an open path: storage index, direction, daggered.
type Step = (usize, usize, bool);

#[inline]
fn path(f: &GaugeField, steps: &[Step]) -> Complex3x3 {
    let (s0, d0, a0) = steps[0];
    let mut m = if a0 {
        f.link(s0, d0).adjoint().into_matrix()
    } else {
        *f.link(s0, d0).matrix()
    };
    for &(s, d, adj) in &steps[1..] {
        let u = f.link(s, d).matrix();
        m = if adj { m.mul_adj(u) } else { m * *u };
    }
    m
}

/// Weighted sum `A` of the open paths closing each loop through the link,
/// so that the loops' traces are `Re tr[U_µ(x) A]`.
pub(crate) fn open_staples(f: &GaugeField, x: usize, mu: usize, coeffs: &ActionCoeffs) -> Complex3x3 {
    let sh = |i: usize, d: usize, k: isize| f.shift(i, d, k);
    let xp = sh(x, mu, 1);
    let mut plaq = Complex3x3::ZERO;
    for nu in (0..NDIM).filter(|&n| n != mu) {
        let xn = sh(x, nu, 1);
        let xmn = sh(x, nu, -1);
        let xp_mn = sh(xp, nu, -1);
        plaq += path(f, &[(xp, nu, false), (xn, mu, true), (x, nu, true)]);
        plaq += path(f, &[(xp_mn, nu, true), (xmn, mu, true), (xmn, nu, false)]);
    }
    let mut staple = plaq.scale(coeffs.c0);
    if !coeffs.has_rectangles() {
        return staple;
    }

    let mut rect = Complex3x3::ZERO;
    for nu in (0..NDIM).filter(|&n| n != mu) {
        let xm = sh(x, mu, -1);
        let x2p = sh(xp, mu, 1);
        let xn = sh(x, nu, 1);
        let xmn = sh(x, nu, -1);
        let xp_n = sh(xp, nu, 1);
        let xp_mn = sh(xp, nu, -1);
        let xm_n = sh(xm, nu, 1);
        let xm_mn = sh(xm, nu, -1);
        // Long along mu, link first or second on the near side; then the
        // loop long along nu; for each of the two nu orientations.
        rect += path(
            f,
            &[
                (xp, mu, false),
                (x2p, nu, false),
                (xp_n, mu, true),
                (xn, mu, true),
                (x, nu, true),
            ],
        );
        rect += path(
            f,
            &[
                (xp, nu, false),
                (xn, mu, true),
                (xm_n, mu, true),
                (xm, nu, true),
                (xm, mu, false),
            ],
        );
        rect += path(
            f,
            &[
                (xp, nu, false),
                (xp_n, nu, false),
                (sh(xn, nu, 1), mu, true),
                (xn, nu, true),
                (x, nu, true),
            ],
        );
        rect += path(
            f,
            &[
                (xp, mu, false),
                (sh(x2p, nu, -1), nu, true),
                (xp_mn, mu, true),
                (xmn, mu, true),
                (xmn, nu, false),
            ],
        );
        rect += path(
            f,
            &[
                (xp_mn, nu, true),
                (xmn, mu, true),
                (xm_mn, mu, true),
                (xm_mn, nu, false),
                (xm, mu, false),
            ],
        );
        let x2mn = sh(xmn, nu, -1);
        rect += path(
            f,
            &[
                (xp_mn, nu, true),
                (sh(xp_mn, nu, -1), nu, true),
                (x2mn, mu, true),
                (x2mn, nu, false),
                (xmn, nu, false),
            ],
        );
    }
    staple += rect.scale(coeffs.c1);
    staple
}

/// Weighted staple sum `Σ` for link `(x, mu)`: the part of the action that
/// depends on `U = U_µ(x)` is `-(β/3) Re tr[U Σ†]`.
pub fn staple_sum(
    field: &GaugeField,
    x: [isize; NDIM],
    mu: usize,
    coeffs: &ActionCoeffs,
) -> Result<Complex3x3, FieldError> {
    let reach = if coeffs.has_rectangles() { 2 } else { 1 };
    debug_assert!(reach <= HALO_DEPTH as isize);
    let offsets: Vec<(usize, isize)> = (0..NDIM).flat_map(|d| [(d, -reach), (d, reach)]).collect();
    let idx = check_reach(field, x, &offsets)?;
    Ok(open_staples(field, idx, mu, coeffs).adjoint())
}

/// Action terms involving one link, given its staple sum.
pub fn local_action(u: &Complex3x3, staple: &Complex3x3, beta: f64) -> f64 {
    -(beta / 3.0) * re_tr_mul_adj(u, staple)
}
