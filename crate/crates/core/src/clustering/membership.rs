use serde::{Deserialize, Serialize};

use crate::model::FuzzyParams;

/// Membership of a relevant neighborhood count: 0 up to `n_min1`, 1 from
/// `n_min2`, linear in between. Equal bounds give a step at `n_min1`.
pub fn j_re(count: usize, fp: &FuzzyParams) -> f64 {
    let (lo, hi) = (fp.n_min1, fp.n_min2);
    if lo == hi {
        return if count >= lo { 1.0 } else { 0.0 };
    }
    if count <= lo {
        0.0
    } else if count >= hi {
        1.0
    } else {
        (count - lo) as f64 / (hi - lo) as f64
    }
}

/// Membership of an irrelevant neighborhood count: 1 up to `n_max1`, 0 from
/// `n_max2`, linear in between. Equal bounds give a step at `n_max1`.
pub fn j_irre(count: usize, fp: &FuzzyParams) -> f64 {
    let (lo, hi) = (fp.n_max1, fp.n_max2);
    if lo == hi {
        return if count <= lo { 1.0 } else { 0.0 };
    }
    if count <= lo {
        1.0
    } else if count >= hi {
        0.0
    } else {
        (hi - count) as f64 / (hi - lo) as f64
    }
}

/// Graded membership `μ ∈ [0, 1]` of a point in its cluster.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FuzzyScore(f64);

impl FuzzyScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `μ = (J_Re + J_Irre) / 2` for the given neighborhood counts.
pub fn fuzzy_score(x_count: usize, y_count: usize, fp: &FuzzyParams) -> FuzzyScore {
    FuzzyScore(0.5 * (j_re(x_count, fp) + j_irre(y_count, fp)))
}

/// The pair of membership ramps for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipFunctions {
    pub params: FuzzyParams,
}

impl MembershipFunctions {
    pub fn new(params: FuzzyParams) -> Self {
        Self { params }
    }

    pub fn j_re(&self, count: usize) -> f64 {
        j_re(count, &self.params)
    }

    pub fn j_irre(&self, count: usize) -> f64 {
        j_irre(count, &self.params)
    }

    pub fn score(&self, x_count: usize, y_count: usize) -> FuzzyScore {
        fuzzy_score(x_count, y_count, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp(n_min1: usize, n_min2: usize, n_max1: usize, n_max2: usize) -> FuzzyParams {
        FuzzyParams::new(1.0, n_min1, n_min2, n_max1, n_max2).unwrap()
    }

    #[test]
    fn relevant_ramp() {
        let p = fp(3, 7, 0, 0);
        assert_eq!(j_re(5, &p), 0.5);
        assert_eq!(j_re(7, &p), 1.0);
        assert_eq!(j_re(3, &p), 0.0);
        assert_eq!(j_re(0, &p), 0.0);
        assert_eq!(j_re(100, &p), 1.0);
    }

    #[test]
    fn irrelevant_ramp() {
        let p = fp(1, 1, 2, 10);
        assert_eq!(j_irre(6, &p), 0.5);
        assert_eq!(j_irre(2, &p), 1.0);
        assert_eq!(j_irre(10, &p), 0.0);
        assert_eq!(j_irre(0, &p), 1.0);
    }

    #[test]
    fn degenerate_ramps_are_steps() {
        let p = fp(4, 4, 2, 2);
        assert_eq!(j_re(3, &p), 0.0);
        assert_eq!(j_re(4, &p), 1.0);
        assert_eq!(j_irre(2, &p), 1.0);
        assert_eq!(j_irre(3, &p), 0.0);
    }

    #[test]
    fn score_is_half_sum() {
        let p = fp(3, 7, 2, 10);
        assert_eq!(fuzzy_score(7, 2, &p).value(), 1.0);
        assert_eq!(fuzzy_score(7, 6, &p).value(), 0.75);
        assert_eq!(fuzzy_score(3, 10, &p).value(), 0.0);
        let mf = MembershipFunctions::new(p);
        assert_eq!(mf.score(5, 6).value(), 0.5);
    }

    proptest! {
        #[test]
        fn score_monotone(a in 1usize..20, da in 0usize..20, b in 0usize..20, db in 0usize..20, x in 0usize..50, y in 0usize..50) {
            let p = fp(a, a + da, b, b + db);
            let s = fuzzy_score(x, y, &p).value();
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!(fuzzy_score(x + 1, y, &p).value() >= s);
            prop_assert!(fuzzy_score(x, y + 1, &p).value() <= s);
        }
    }
}
