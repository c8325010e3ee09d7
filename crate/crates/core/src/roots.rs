//! Roots of the characteristic polynomial Σ p_m λ^m with multiplicities.
//!
//! All roots are found at once by Durand-Kerner (Weierstrass) iteration.
//! A k-fold root comes back from any floating-point root finder as k points
//! spread over roughly ε^{1/k}, so a fixed distance threshold cannot tell a
//! numerical double root from two close simple ones. Clustering therefore
//! works in two steps:
//!
//! 1. nearby roots are grouped loosely into candidate clusters;
//! 2. each candidate is accepted as one m-fold root when the Taylor
//!    coefficients of P at the refined cluster centre, q_0..q_{m−1}, are what
//!    m roots within the cluster tolerance of the centre would produce, or
//!    are indistinguishable from rounding noise in the coefficients.
//!
//! Rejected candidates fall back to plain distance merging at the cluster
//! tolerance.

use num_complex::Complex64;
use thiserror::Error;

/// Distance below which two roots count as one, relative to max(1, |root|).
pub const CLUSTER_TOL: f64 = 1e-8;
/// Backward-error target for the iteration.
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 500;

const CANDIDATE_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootsError {
    #[error("polynomial must have degree >= 1")]
    Degree,
    #[error("leading coefficient is zero")]
    LeadingZero,
    #[error("non-finite coefficient {0}")]
    NonFinite(Complex64),
    #[error("root iteration did not converge in {sweeps} sweeps (backward error {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Σ c_k z^k by Horner.
pub fn eval_poly(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Coefficients p_0..p_n of Π (λ − r_i), leading coefficient 1.
pub fn expand_factors(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= r * c;
        }
        p = next;
    }
    p
}

/// Taylor coefficients of the polynomial about z: q_k = P^{(k)}(z)/k!.
fn taylor_shift(coeffs: &[Complex64], z: Complex64) -> Vec<Complex64> {
    let mut a = coeffs.to_vec();
    let n = a.len();
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let carry = a[j + 1] * z;
            a[j] += carry;
        }
    }
    a
}

fn taylor_shift_abs(coeffs: &[Complex64], r: f64) -> Vec<f64> {
    let as_real: Vec<Complex64> = coeffs.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect();
    taylor_shift(&as_real, Complex64::new(r, 0.0)).iter().map(|c| c.re).collect()
}

fn backward_error(monic: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    let scale = monic.iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
    eval_poly(monic, z).norm() / scale
}

fn durand_kerner(monic: &[Complex64]) -> Result<Vec<Complex64>, RootsError> {
    let n = monic.len() - 1;
    // Fujiwara bound on the root moduli.
    let radius = (0..n)
        .map(|k| monic[k].norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3)
        * 2.0;
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1) * radius / seed.norm().powi(k as i32 + 1)).collect();
    let mut worst = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    let mut d = z[i] - z[j];
                    if d == Complex64::new(0.0, 0.0) {
                        d = Complex64::new(f64::EPSILON * radius, 0.0);
                    }
                    denom *= d;
                }
            }
            let step = eval_poly(monic, z[i]) / denom;
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
            }
        }
        worst = z.iter().map(|&zi| backward_error(monic, zi)).fold(0.0, f64::max);
        if worst <= RESIDUAL_TOL {
            return Ok(z);
        }
    }
    Err(RootsError::NoConvergence {
        sweeps: MAX_SWEEPS,
        residual: worst,
    })
}

/// Newton on P^{(m−1)}, whose simple root is the m-fold root of P. For
/// m = 1 this polishes a simple root.
fn refine_centre(monic: &[Complex64], c: Complex64, m: usize) -> Complex64 {
    let mut c = c;
    let mut best = taylor_shift(monic, c)[m - 1].norm();
    for _ in 0..4 {
        let q = taylor_shift(monic, c);
        // q_{m−1} = P^{(m−1)}/(m−1)!, q_m = P^{(m)}/m!, so the Newton step is q_{m−1}/(m q_m).
        if q[m] == Complex64::new(0.0, 0.0) {
            break;
        }
        let next = c - q[m - 1] / (q[m] * m as f64);
        let val = taylor_shift(monic, next)[m - 1].norm();
        if !(val < best) {
            break;
        }
        best = val;
        c = next;
    }
    c
}

/// Whether `c` is an m-fold root up to the cluster tolerance or rounding.
fn is_multiple_root(monic: &[Complex64], c: Complex64, m: usize, cluster_tol: f64) -> bool {
    let n = monic.len() - 1;
    let q = taylor_shift(monic, c);
    let noise = taylor_shift_abs(monic, c.norm());
    let spread = cluster_tol * c.norm().max(1.0);
    let slack = 64.0 * n as f64 * f64::EPSILON;
    (0..m).all(|k| {
        let allowed = q[m].norm() * binomial(m, k) * spread.powi((m - k) as i32) + slack * noise[k];
        q[k].norm() <= allowed
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn group_by_distance(z: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = z.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = z[i].norm().max(z[j].norm()).max(1.0);
            if (z[i] - z[j]).norm() <= radius * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn centroid(z: &[Complex64], idx: &[usize]) -> Complex64 {
    idx.iter().map(|&i| z[i]).sum::<Complex64>() / idx.len() as f64
}

fn cluster(monic: &[Complex64], z: &[Complex64], cluster_tol: f64) -> Vec<Root> {
    let mut out = Vec::new();
    for group in group_by_distance(z, CANDIDATE_RADIUS.max(cluster_tol)) {
        let m = group.len();
        let c = refine_centre(monic, centroid(z, &group), m);
        if m == 1 || is_multiple_root(monic, c, m, cluster_tol) {
            out.push(Root { value: c, multiplicity: m });
            continue;
        }
        let sub: Vec<Complex64> = group.iter().map(|&i| z[i]).collect();
        for g in group_by_distance(&sub, cluster_tol) {
            out.push(Root {
                value: centroid(&sub, &g),
                multiplicity: g.len(),
            });
        }
    }
    out
}

/// For real polynomials: make conjugate pairs exactly conjugate and
/// self-conjugate roots exactly real.
fn symmetrize(roots: Vec<Root>) -> Vec<Root> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::with_capacity(roots.len());
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let zi = roots[i].value;
        let partner = (0..roots.len())
            .filter(|&j| !used[j] && roots[j].multiplicity == roots[i].multiplicity)
            .min_by(|&a, &b| {
                let da = (roots[a].value - zi.conj()).norm();
                let db = (roots[b].value - zi.conj()).norm();
                da.total_cmp(&db)
            });
        let self_gap = (zi - zi.conj()).norm();
        match partner {
            Some(j) if (roots[j].value - zi.conj()).norm() < self_gap => {
                used[j] = true;
                let w = roots[j].value;
                let mid = Complex64::new(0.5 * (zi.re + w.re), 0.5 * (zi.im.abs() + w.im.abs()));
                let m = roots[i].multiplicity;
                out.push(Root { value: mid, multiplicity: m });
                out.push(Root { value: mid.conj(), multiplicity: m });
            }
            _ => out.push(Root {
                value: Complex64::new(zi.re, 0.0),
                multiplicity: roots[i].multiplicity,
            }),
        }
    }
    out
}

/// Zero out a real or imaginary part that is rounding noise relative to |z|,
/// provided the polynomial value stays within its own rounding noise.
fn snap_components(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let limit = 16.0 * f64::EPSILON * z.norm();
    let candidates = [
        Complex64::new(if z.re.abs() <= limit { 0.0 } else { z.re }, z.im),
        Complex64::new(z.re, if z.im.abs() <= limit { 0.0 } else { z.im }),
    ];
    let noise = |w: Complex64| {
        let mut acc = 0.0;
        for c in coeffs.iter().rev() {
            acc = acc * w.norm() + c.norm();
        }
        4.0 * coeffs.len() as f64 * f64::EPSILON * acc
    };
    let mut best = z;
    for w in candidates {
        if w != z && eval_poly(coeffs, w).norm() <= noise(w).max(eval_poly(coeffs, z).norm()) {
            best = Complex64::new(if w.re == 0.0 { 0.0 } else { best.re }, if w.im == 0.0 { 0.0 } else { best.im });
        }
    }
    best
}

/// Roots of Σ p_m λ^m with the default cluster tolerance.
pub fn find_roots(coeffs: &[Complex64]) -> Result<Vec<Root>, RootsError> {
    find_roots_with(coeffs, CLUSTER_TOL)
}

/// Roots with multiplicities, sorted by real then imaginary part.
pub fn find_roots_with(coeffs: &[Complex64], cluster_tol: f64) -> Result<Vec<Root>, RootsError> {
    if let Some(c) = coeffs.iter().find(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(RootsError::NonFinite(*c));
    }
    if coeffs.len() < 2 {
        return Err(RootsError::Degree);
    }
    let lead = coeffs[coeffs.len() - 1];
    if lead == Complex64::new(0.0, 0.0) {
        return Err(RootsError::LeadingZero);
    }
    // Exact zero roots come from vanishing low-order coefficients.
    let zeros = coeffs.iter().take_while(|c| **c == Complex64::new(0.0, 0.0)).count();
    let monic: Vec<Complex64> = coeffs[zeros..].iter().map(|&c| c / lead).collect();
    let mut roots = match monic.len() {
        1 => Vec::new(),
        2 => vec![Root { value: -monic[0], multiplicity: 1 }],
        _ => {
            let z = durand_kerner(&monic)?;
            cluster(&monic, &z, cluster_tol)
        }
    };
    if zeros > 0 {
        roots.push(Root { value: Complex64::new(0.0, 0.0), multiplicity: zeros });
    }
    for r in roots.iter_mut() {
        r.value = snap_components(coeffs, r.value);
    }
    if coeffs.iter().all(|c| c.im == 0.0) {
        roots = symmetrize(roots);
    }
    roots.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(p: &[f64]) -> Vec<Complex64> {
        p.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn distinct_real_roots() {
        let r = find_roots(&real(&[6.0, -5.0, 1.0])).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].value - c(2.0, 0.0)).norm() < 1e-12 && r[0].multiplicity == 1);
        assert!((r[1].value - c(3.0, 0.0)).norm() < 1e-12 && r[1].multiplicity == 1);
    }

    #[test]
    fn purely_imaginary_roots_stay_imaginary() {
        let p = expand_factors(&[c(-1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0)]);
        let r = find_roots(&p).unwrap();
        assert_eq!(r.iter().map(|r| r.value).collect::<Vec<_>>(), vec![c(-1.0, 0.0), c(0.0, -2.0), c(0.0, 2.0)]);
    }

    #[test]
    fn conjugate_pair() {
        let (a, b) = (0.7, 1.3);
        let r = find_roots(&real(&[a * a + b * b, -2.0 * a, 1.0])).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].value, r[1].value.conj());
        assert!((r[1].value - c(a, b)).norm() < 1e-12);
    }

    #[test]
    fn double_root() {
        for &a in &[1.0, -2.5, 1.0 / 3.0, 0.0, 1e3] {
            let r = find_roots(&real(&[a * a, -2.0 * a, 1.0])).unwrap();
            assert_eq!(r.len(), 1, "a = {a}: {r:?}");
            assert_eq!(r[0].multiplicity, 2);
            assert!((r[0].value.re - a).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn triple_and_mixed_multiplicities() {
        let p = expand_factors(&[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(-1.0, 2.0), c(-1.0, 2.0)]);
        let r = find_roots(&p).unwrap();
        assert_eq!(r.len(), 2, "{r:?}");
        assert_eq!(r[0].multiplicity, 2);
        assert!((r[0].value - c(-1.0, 2.0)).norm() < 1e-9);
        assert_eq!(r[1].multiplicity, 3);
        assert!((r[1].value - c(0.5, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn close_but_distinct_roots_stay_apart() {
        let r = find_roots(&expand_factors(&[c(1.0, 0.0), c(1.0 + 1e-6, 0.0)])).unwrap();
        assert_eq!(r.len(), 2, "{r:?}");
        let r = find_roots(&expand_factors(&[c(1.0, 0.0), c(1.0 + 1e-4, 0.0), c(3.0, 0.0)])).unwrap();
        assert_eq!(r.len(), 3, "{r:?}");
    }

    #[test]
    fn linear_and_errors() {
        let r = find_roots(&[c(3.0, 1.0), c(2.0, 0.0)]).unwrap();
        assert_eq!(r[0].value, c(-1.5, -0.5));
        assert_eq!(find_roots(&[c(1.0, 0.0)]), Err(RootsError::Degree));
        assert_eq!(find_roots(&[c(1.0, 0.0), c(0.0, 0.0)]), Err(RootsError::LeadingZero));
        assert!(matches!(find_roots(&[c(f64::NAN, 0.0), c(1.0, 0.0)]), Err(RootsError::NonFinite(_))));
    }

    #[test]
    fn expansion_matches_known_polynomial() {
        let p = expand_factors(&[c(1.0, 0.0), c(-2.0, 0.0)]);
        assert_eq!(p, real(&[-2.0, 1.0, 1.0]));
    }

    proptest! {
        #[test]
        fn recovers_random_simple_roots(
            raw in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..7)
        ) {
            let roots: Vec<Complex64> = raw.iter().map(|&(a, b)| c(a, b)).collect();
            let min_gap = roots.iter().enumerate()
                .flat_map(|(i, a)| roots[i + 1..].iter().map(move |b| (a - b).norm()))
                .fold(f64::INFINITY, f64::min);
            prop_assume!(min_gap > 1e-2);
            let found = find_roots(&expand_factors(&roots)).unwrap();
            prop_assert_eq!(found.len(), roots.len());
            for r in &roots {
                let d = found.iter().map(|f| (f.value - r).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d < 1e-8, "root {} missed by {}", r, d);
            }
        }

        #[test]
        fn scaling_leaves_roots_unchanged(s in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0]) {
            let p = real(&[-2.0, 1.0, 1.0]);
            let q: Vec<Complex64> = p.iter().map(|&x| x * s).collect();
            let a = find_roots(&p).unwrap();
            let b = find_roots(&q).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.value - y.value).norm() <= 1e-13);
                prop_assert_eq!(x.multiplicity, y.multiplicity);
            }
        }
    }
}
