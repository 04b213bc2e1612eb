//! Exact solution of the one-dimensional Riemann problem for an ideal gas.

use crate::error::{Error, Result};

/// One-dimensional primitive state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State1d {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl State1d {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        State1d { rho, u, p }
    }

    fn c(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }
}

/// Pressure function of one side and its derivative.
fn side(p: f64, s: &State1d, gamma: f64) -> (f64, f64) {
    let c = s.c(gamma);
    if p > s.p {
        let a = 2.0 / ((gamma + 1.0) * s.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + b)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let f = 2.0 * c / (gamma - 1.0) * ((p / s.p).powf(e) - 1.0);
        (f, (p / s.p).powf(-(gamma + 1.0) / (2.0 * gamma)) / (s.rho * c))
    }
}

/// Star-region pressure and velocity, converged to 1e-12 relative.
pub fn star_state(l: &State1d, r: &State1d, gamma: f64) -> Result<(f64, f64)> {
    if !(l.rho > 0.0 && r.rho > 0.0 && l.p > 0.0 && r.p > 0.0) {
        return Err(Error::InvalidInput("Riemann states need positive density and pressure".into()));
    }
    let (cl, cr) = (l.c(gamma), r.c(gamma));
    if 2.0 * (cl + cr) / (gamma - 1.0) <= r.u - l.u {
        return Err(Error::InvalidInput("Riemann data generate vacuum".into()));
    }
    let du = r.u - l.u;
    let mut p = (0.5 * (l.p + r.p) - 0.125 * du * (l.rho + r.rho) * (cl + cr)).max(1e-8 * (l.p + r.p));
    for _ in 0..100 {
        let (fl, dl) = side(p, l, gamma);
        let (fr, dr) = side(p, r, gamma);
        let next = (p - (fl + fr + du) / (dl + dr)).max(1e-14 * p);
        let change = 2.0 * (next - p).abs() / (next + p);
        p = next;
        if change < 1e-12 {
            let u = 0.5 * (l.u + r.u) + 0.5 * (side(p, r, gamma).0 - side(p, l, gamma).0);
            return Ok((p, u));
        }
    }
    Err(Error::NoBracket("star pressure iteration did not converge".into()))
}

/// Self-similar solution at `xi = x / t`.
pub fn exact_riemann(l: &State1d, r: &State1d, gamma: f64, xi: f64) -> Result<State1d> {
    let (ps, us) = star_state(l, r, gamma)?;
    let g1 = (gamma - 1.0) / (gamma + 1.0);
    if xi <= us {
        let cl = l.c(gamma);
        if ps > l.p {
            let sl = l.u - cl * ((gamma + 1.0) / (2.0 * gamma) * ps / l.p + (gamma - 1.0) / (2.0 * gamma)).sqrt();
            if xi <= sl {
                return Ok(*l);
            }
            let rho = l.rho * (ps / l.p + g1) / (g1 * ps / l.p + 1.0);
            return Ok(State1d::new(rho, us, ps));
        }
        let head = l.u - cl;
        let cs = cl * (ps / l.p).powf((gamma - 1.0) / (2.0 * gamma));
        let tail = us - cs;
        if xi <= head {
            return Ok(*l);
        }
        if xi >= tail {
            return Ok(State1d::new(l.rho * (ps / l.p).powf(1.0 / gamma), us, ps));
        }
        let c = 2.0 / (gamma + 1.0) * (cl + 0.5 * (gamma - 1.0) * (l.u - xi));
        let u = 2.0 / (gamma + 1.0) * (cl + 0.5 * (gamma - 1.0) * l.u + xi);
        let rho = l.rho * (c / cl).powf(2.0 / (gamma - 1.0));
        return Ok(State1d::new(rho, u, l.p * (c / cl).powf(2.0 * gamma / (gamma - 1.0))));
    }
    let m = exact_riemann(
        &State1d::new(r.rho, -r.u, r.p),
        &State1d::new(l.rho, -l.u, l.p),
        gamma,
        -xi,
    )?;
    Ok(State1d::new(m.rho, -m.u, m.p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sod_star_pressure() {
        let (p, u) = star_state(&State1d::new(1.0, 0.0, 1.0), &State1d::new(0.125, 0.0, 0.1), 1.4).unwrap();
        assert!((p - 0.30313).abs() < 1e-5, "{p}");
        assert!((u - 0.92745).abs() < 1e-5, "{u}");
    }

    #[test]
    fn equal_states_are_uniform() {
        let s = State1d::new(0.7, 0.3, 2.0);
        for xi in [-3.0, -0.1, 0.0, 0.4, 5.0] {
            let w = exact_riemann(&s, &s, 1.4, xi).unwrap();
            assert!((w.rho - s.rho).abs() < 1e-12 && (w.u - s.u).abs() < 1e-12 && (w.p - s.p).abs() < 1e-12);
        }
    }

    #[test]
    fn mirrored_problem_mirrors_solution() {
        let l = State1d::new(1.0, 0.2, 1.0);
        let r = State1d::new(0.125, -0.1, 0.1);
        for xi in [-1.5, -0.7, 0.1, 0.9, 1.6] {
            let a = exact_riemann(&l, &r, 1.4, xi).unwrap();
            let b = exact_riemann(&State1d::new(r.rho, -r.u, r.p), &State1d::new(l.rho, -l.u, l.p), 1.4, -xi).unwrap();
            assert!((a.rho - b.rho).abs() < 1e-12 && (a.u + b.u).abs() < 1e-12 && (a.p - b.p).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_is_rejected() {
        assert!(star_state(&State1d::new(1.0, -20.0, 1.0), &State1d::new(1.0, 20.0, 1.0), 1.4).is_err());
    }
}
