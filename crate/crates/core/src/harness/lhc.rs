use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Latin hypercube sample of `n` points in the box `ranges`.
///
/// Every dimension is cut into `n` equal strata and each stratum receives
/// exactly one point, placed uniformly inside it.
pub fn lhc_sample(ranges: &[(f64, f64)], n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidInput("LHC sample needs n >= 1".into()));
    }
    if let Some((lo, hi)) = ranges.iter().find(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(Error::InvalidInput(format!("degenerate range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![vec![0.0; ranges.len()]; n];
    for (d, &(lo, hi)) in ranges.iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        let width = (hi - lo) / n as f64;
        for (p, &s) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.gen();
            p[d] = (lo + (s as f64 + u) * width).min(hi);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_inside_box() {
        let p = lhc_sample(&[(0.0, 1.0), (5.0, 6.0)], 1, 3).unwrap();
        assert_eq!(p.len(), 1);
        assert!((0.0..=1.0).contains(&p[0][0]) && (5.0..=6.0).contains(&p[0][1]));
    }

    #[test]
    fn one_point_per_unit_stratum() {
        let p = lhc_sample(&[(0.0, 4.0)], 4, 11).unwrap();
        let mut bins: Vec<usize> = p.iter().map(|v| v[0].floor() as usize).collect();
        bins.sort_unstable();
        assert_eq!(bins, vec![0, 1, 2, 3]);
    }

    #[test]
    fn deterministic_and_validated() {
        assert_eq!(lhc_sample(&[(0.0, 1.0)], 5, 9).unwrap(), lhc_sample(&[(0.0, 1.0)], 5, 9).unwrap());
        assert!(lhc_sample(&[(1.0, 1.0)], 3, 0).is_err());
        assert!(lhc_sample(&[(0.0, 1.0)], 0, 0).is_err());
    }
}
