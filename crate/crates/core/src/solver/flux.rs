//! AUSM flux splitting on moving faces and the boundary fluxes.
//!
//! All fluxes are per unit face area; `vg` is the normal speed of the face.

use super::state::{euler_flux, sound_speed, Primitive};
use crate::geom::Vec3;

#[inline]
fn mach_plus(m: f64) -> f64 {
    if m >= 1.0 {
        m
    } else if m <= -1.0 {
        0.0
    } else {
        0.25 * (m + 1.0) * (m + 1.0)
    }
}

#[inline]
fn mach_minus(m: f64) -> f64 {
    if m >= 1.0 {
        0.0
    } else if m <= -1.0 {
        m
    } else {
        -0.25 * (m - 1.0) * (m - 1.0)
    }
}

#[inline]
fn pressure_plus(m: f64) -> f64 {
    if m >= 1.0 {
        1.0
    } else if m <= -1.0 {
        0.0
    } else {
        0.25 * (m + 1.0) * (m + 1.0) * (2.0 - m)
    }
}

#[inline]
fn pressure_minus(m: f64) -> f64 {
    if m >= 1.0 {
        0.0
    } else if m <= -1.0 {
        1.0
    } else {
        0.25 * (m - 1.0) * (m - 1.0) * (2.0 + m)
    }
}

/// Liou-Steffen AUSM flux with the convective speed taken relative to the
/// moving face.
#[inline]
pub fn ausm_flux(wl: &Primitive, wr: &Primitive, n: Vec3, vg: f64, gamma: f64) -> [f64; 5] {
    let cl = sound_speed(wl, gamma);
    let cr = sound_speed(wr, gamma);
    let unl = wl[1] * n[0] + wl[2] * n[1] + wl[3] * n[2];
    let unr = wr[1] * n[0] + wr[2] * n[1] + wr[3] * n[2];
    let ml = (unl - vg) / cl;
    let mr = (unr - vg) / cr;
    let m = mach_plus(ml) + mach_minus(mr);
    let p = pressure_plus(ml) * wl[4] + pressure_minus(mr) * wr[4];
    let g = gamma / (gamma - 1.0);
    let phi = |w: &Primitive, c: f64| {
        let h = g * w[4] / w[0] + 0.5 * (w[1] * w[1] + w[2] * w[2] + w[3] * w[3]);
        let rc = w[0] * c;
        [rc, rc * w[1], rc * w[2], rc * w[3], rc * h]
    };
    let fl = phi(wl, cl);
    let fr = phi(wr, cr);
    let (a, b) = (0.5 * m, 0.5 * m.abs());
    let mut f = [0.0; 5];
    for c in 0..5 {
        f[c] = a * (fl[c] + fr[c]) - b * (fr[c] - fl[c]);
    }
    f[1] += p * n[0];
    f[2] += p * n[1];
    f[3] += p * n[2];
    f[4] += p * vg;
    f
}

/// Pressure on a slip wall, from the interior state mirrored about the
/// moving wall and split with the AUSM pressure polynomial.
#[inline]
pub fn wall_pressure(w: &Primitive, n: Vec3, vg: f64, gamma: f64) -> f64 {
    let un = w[1] * n[0] + w[2] * n[1] + w[3] * n[2];
    let m = (un - vg) / sound_speed(w, gamma);
    2.0 * pressure_plus(m) * w[4]
}

/// Slip-wall flux: no mass crosses the wall; momentum and energy carry only
/// the wall pressure.
#[inline]
pub fn wall_flux(w: &Primitive, n: Vec3, vg: f64, gamma: f64) -> [f64; 5] {
    let p = wall_pressure(w, n, vg, gamma);
    [0.0, p * n[0], p * n[1], p * n[2], p * vg]
}

/// Boundary state from locally one-dimensional Riemann invariants against
/// the freestream `winf`; `n` points out of the domain.
pub fn farfield_state(w: &Primitive, winf: &Primitive, n: Vec3, vg: f64, gamma: f64) -> Primitive {
    let ci = sound_speed(w, gamma);
    let ce = sound_speed(winf, gamma);
    let uni = w[1] * n[0] + w[2] * n[1] + w[3] * n[2];
    let une = winf[1] * n[0] + winf[2] * n[1] + winf[3] * n[2];
    let gm1 = gamma - 1.0;
    if (uni - vg).abs() >= ci {
        return if uni - vg > 0.0 { *w } else { *winf };
    }
    let rp = uni + 2.0 * ci / gm1;
    let rm = une - 2.0 * ce / gm1;
    let un = 0.5 * (rp + rm);
    let c = 0.25 * gm1 * (rp - rm);
    let (src, usrc) = if un - vg > 0.0 { (w, uni) } else { (winf, une) };
    let s = src[4] / src[0].powf(gamma);
    let rho = (c * c / (gamma * s)).powf(1.0 / gm1);
    let p = rho * c * c / gamma;
    let du = un - usrc;
    [rho, src[1] + du * n[0], src[2] + du * n[1], src[3] + du * n[2], p]
}

pub fn farfield_flux(w: &Primitive, winf: &Primitive, n: Vec3, vg: f64, gamma: f64) -> [f64; 5] {
    euler_flux(&farfield_state(w, winf, n, vg, gamma), n, vg, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::state::{conservative_from_primitive, try_primitive};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng) -> Primitive {
        [
            rng.gen_range(0.2..2.0),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(0.2..2.0),
        ]
    }

    fn random_normal(rng: &mut ChaCha8Rng) -> Vec3 {
        let v: Vec3 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let l = crate::geom::norm(v);
        [v[0] / l, v[1] / l, v[2] / l]
    }

    #[test]
    fn consistent_with_analytic_flux() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let w = random_state(&mut rng);
            let n = random_normal(&mut rng);
            let vg = rng.gen_range(-0.5..0.5);
            let f = ausm_flux(&w, &w, n, vg, 1.4);
            let e = euler_flux(&w, n, vg, 1.4);
            for c in 0..5 {
                assert!((f[c] - e[c]).abs() < 1e-13 * (1.0 + e[c].abs()), "{f:?} {e:?}");
            }
        }
    }

    #[test]
    fn supersonic_is_full_upwind() {
        let wl = [1.0, 3.0, 0.0, 0.0, 1.0];
        let wr = [0.5, 2.0, 0.3, 0.0, 0.4];
        let n = [1.0, 0.0, 0.0];
        let f = ausm_flux(&wl, &wr, n, 0.0, 1.4);
        let e = euler_flux(&wl, n, 0.0, 1.4);
        for c in 0..5 {
            assert!((f[c] - e[c]).abs() < 1e-14 * (1.0 + e[c].abs()));
        }
    }

    #[test]
    fn antisymmetric_under_reversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (wl, wr) = (random_state(&mut rng), random_state(&mut rng));
            let n = random_normal(&mut rng);
            let vg = rng.gen_range(-0.5..0.5);
            let f = ausm_flux(&wl, &wr, n, vg, 1.4);
            let g = ausm_flux(&wr, &wl, [-n[0], -n[1], -n[2]], -vg, 1.4);
            for c in 0..5 {
                assert!((f[c] + g[c]).abs() < 1e-13 * (1.0 + f[c].abs()));
            }
        }
    }

    #[test]
    fn static_wall_carries_pressure_only() {
        let w = [1.2, 0.0, 0.0, 0.0, 0.9];
        let n = [0.0, 0.6, 0.8];
        let f = wall_flux(&w, n, 0.0, 1.4);
        assert_eq!(f[0], 0.0);
        assert!((f[1]).abs() < 1e-16 && (f[2] - 0.54).abs() < 1e-15 && (f[3] - 0.72).abs() < 1e-15);
        assert_eq!(f[4], 0.0);
    }

    #[test]
    fn farfield_reproduces_freestream() {
        let winf = [1.225, 51.0, 0.0, 3.0, 101325.0];
        for n in [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.6, -0.8]] {
            let f = farfield_flux(&winf, &winf, n, 0.0, 1.4);
            let e = euler_flux(&winf, n, 0.0, 1.4);
            for c in 0..5 {
                assert!((f[c] - e[c]).abs() < 1e-12 * (1.0 + e[c].abs()), "{f:?} {e:?}");
            }
        }
        let q = conservative_from_primitive(&winf, 1.4);
        assert!(try_primitive(&q, 1.4).is_some());
    }
}
