use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided;
use super::StatsError;

/// Welch's unequal-variance t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t_statistic: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub dof: f64,
    pub p_two_sided: f64,
    /// Both samples have zero variance; `p` is 1 for equal means and 0
    /// otherwise.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    #[default]
    TwoSided,
    /// One-sided in the direction of the observed mean difference.
    OneSided,
}

impl WelchResult {
    pub fn p_value(&self, sidedness: Sidedness) -> f64 {
        match sidedness {
            Sidedness::TwoSided => self.p_two_sided,
            Sidedness::OneSided if self.t_statistic == 0.0 => 1.0,
            Sidedness::OneSided => 0.5 * self.p_two_sided,
        }
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Tests whether the means of `a` and `b` differ. `t > 0` when `a` has the
/// larger mean.
pub fn welch_test(a: &[f64], b: &[f64]) -> Result<WelchResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples {
            a: a.len(),
            b: b.len(),
        });
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let equal = ma == mb;
        return Ok(WelchResult {
            t_statistic: if equal {
                0.0
            } else if ma > mb {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            dof: na + nb - 2.0,
            p_two_sided: if equal { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let dof = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(WelchResult {
        t_statistic: t,
        dof,
        p_two_sided: student_t_two_sided(t, dof),
        degenerate: false,
    })
}
