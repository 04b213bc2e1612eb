//! Limited MUSCL reconstruction of primitive variables.

use serde::{Deserialize, Serialize};

use super::state::Primitive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    #[default]
    VanAlbada,
    Minmod,
    /// First-order reconstruction (cell values).
    None,
}

/// Differences below this fraction of the local level are left unlimited by
/// the van Albada limiter, which keeps it differentiable in smooth regions.
pub const VAN_ALBADA_THRESHOLD: f64 = 0.01;

impl Limiter {
    /// Limited slope from the backward and forward differences; `eps` is
    /// the squared difference scale below which van Albada stops limiting.
    #[inline]
    pub fn slope(self, a: f64, b: f64, eps: f64) -> f64 {
        match self {
            Limiter::VanAlbada => {
                let d = a * a + b * b + 2.0 * eps;
                if d > 0.0 {
                    (a * (b * b + eps) + b * (a * a + eps)) / d
                } else {
                    0.0
                }
            }
            Limiter::Minmod => {
                if a * b <= 0.0 {
                    0.0
                } else if a.abs() < b.abs() {
                    a
                } else {
                    b
                }
            }
            Limiter::None => 0.0,
        }
    }
}

/// Face value extrapolated from cell `c` toward the face, with `behind` the
/// cell on the far side of `c` and `ahead` the cell across the face.
#[inline]
pub fn extrapolate(limiter: Limiter, behind: &Primitive, c: &Primitive, ahead: &Primitive) -> Primitive {
    let k2 = VAN_ALBADA_THRESHOLD * VAN_ALBADA_THRESHOLD;
    let vel2 = k2 * c[4].abs() / c[0].abs();
    let eps = [k2 * c[0] * c[0], vel2, vel2, vel2, k2 * c[4] * c[4]];
    let mut out = *c;
    for v in 0..5 {
        out[v] += 0.5 * limiter.slope(c[v] - behind[v], ahead[v] - c[v], eps[v]);
    }
    out
}

/// Left and right interface states from the stencil `(LL, L, R, RR)`.
/// Missing outer cells give first-order states on that side; a
/// reconstruction that loses positivity falls back to the cell value.
pub fn muscl_reconstruct(
    limiter: Limiter,
    ll: Option<&Primitive>,
    l: &Primitive,
    r: &Primitive,
    rr: Option<&Primitive>,
) -> (Primitive, Primitive) {
    let left = match ll {
        Some(ll) => positive_or(extrapolate(limiter, ll, l, r), l),
        None => *l,
    };
    let right = match rr {
        Some(rr) => positive_or(extrapolate(limiter, rr, r, l), r),
        None => *r,
    };
    (left, right)
}

#[inline]
fn positive_or(w: Primitive, fallback: &Primitive) -> Primitive {
    if w[0] > 0.0 && w[4] > 0.0 {
        w
    } else {
        *fallback
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_field() {
        let w = [1.0, 2.0, 3.0, 4.0, 5.0];
        let (a, b) = muscl_reconstruct(Limiter::VanAlbada, Some(&w), &w, &w, Some(&w));
        assert_eq!((a, b), (w, w));
    }

    #[test]
    fn linear_field_is_exact() {
        let f = |x: f64| [1.0 + 0.1 * x, 0.5 * x, -x, 2.0, 3.0 + 0.2 * x];
        for lim in [Limiter::VanAlbada, Limiter::Minmod] {
            let (a, b) = muscl_reconstruct(lim, Some(&f(-1.5)), &f(-0.5), &f(0.5), Some(&f(1.5)));
            let face = f(0.0);
            for v in 0..5 {
                assert!((a[v] - face[v]).abs() < 1e-15 && (b[v] - face[v]).abs() < 1e-15, "{lim:?}");
            }
        }
    }

    #[test]
    fn van_albada_limits_large_jumps() {
        let l = Limiter::VanAlbada;
        assert!((l.slope(1.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!(l.slope(1.0, 100.0, 1e-8) < 2.1);
        assert!(l.slope(1.0, -1.0, 1e-4).abs() < 1e-15);
        for b in [-3.0, -1.5, -0.2] {
            assert!(l.slope(1.0, b, 0.0).abs() <= f64::min(1.0, -b));
        }
    }

    #[test]
    fn extremum_reverts_to_first_order() {
        let lo = [1.0, 0.0, 0.0, 0.0, 1.0];
        let hi = [2.0, 1.0, 1.0, 1.0, 2.0];
        let (a, b) = muscl_reconstruct(Limiter::VanAlbada, Some(&lo), &hi, &lo, Some(&hi));
        assert_eq!((a, b), (hi, lo));
    }
}
