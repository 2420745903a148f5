use std::fmt;

use num_complex::Complex64;

use crate::error::{PlaceError, Result};

/// A self-conjugate multiset of complex values.
///
/// Every non-real element has a stored partner whose real part is bitwise
/// equal and whose imaginary part is the exact negation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

fn key(z: &Complex64) -> (u64, u64) {
    (z.re.to_bits(), z.im.abs().to_bits())
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if let Some(z) = values.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(PlaceError::Validation(format!("non-finite value {z} in spectrum")));
        }
        let mut upper: Vec<(u64, u64)> = values.iter().filter(|z| z.im > 0.0).map(key).collect();
        let mut lower: Vec<(u64, u64)> = values.iter().filter(|z| z.im < 0.0).map(key).collect();
        upper.sort_unstable();
        lower.sort_unstable();
        if upper != lower {
            let orphan = values
                .iter()
                .find(|z| z.im != 0.0 && !values.iter().any(|w| w.re.to_bits() == z.re.to_bits() && w.im == -z.im))
                .copied()
                .unwrap_or_default();
            return Err(PlaceError::Validation(format!(
                "spectrum is not self-conjugate: {} has no (or too few) conjugate partners",
                format_complex(orphan)
            )));
        }
        Ok(Spectrum { values })
    }

    /// Wraps values that are self-conjugate by construction.
    pub(crate) fn from_trusted(values: Vec<Complex64>) -> Self {
        debug_assert!(Spectrum::new(values.clone()).is_ok());
        Spectrum { values }
    }

    pub fn real(values: &[f64]) -> Self {
        Spectrum {
            values: values.iter().map(|&re| Complex64::new(re, 0.0)).collect(),
        }
    }

    pub fn empty() -> Self {
        Spectrum::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.values.iter()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Multiset union.
    pub fn union(&self, other: &Spectrum) -> Spectrum {
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Spectrum { values }
    }

    /// Exact multiset difference `self - subset`; fails if `subset` is not contained.
    pub fn without(&self, subset: &Spectrum) -> Result<Spectrum> {
        let mut rest = self.values.clone();
        for z in subset.iter() {
            match rest
                .iter()
                .position(|w| w.re.to_bits() == z.re.to_bits() && w.im == z.im)
            {
                Some(i) => {
                    rest.remove(i);
                }
                None => {
                    return Err(PlaceError::Validation(format!(
                        "{} is not an (unused) element of the full spectrum",
                        format_complex(*z)
                    )))
                }
            }
        }
        Ok(Spectrum { values: rest })
    }

    /// Groups of the multiset that must stay together: each real value alone,
    /// each conjugate pair (upper element first) together.
    pub fn conjugate_groups(&self) -> Vec<Vec<Complex64>> {
        let mut groups: Vec<Vec<Complex64>> = Vec::new();
        let mut lower: Vec<Complex64> = self.values.iter().filter(|z| z.im < 0.0).copied().collect();
        for z in &self.values {
            if z.im == 0.0 {
                groups.push(vec![Complex64::new(z.re, 0.0)]);
            } else if z.im > 0.0 {
                let i = lower
                    .iter()
                    .position(|w| w.re.to_bits() == z.re.to_bits() && w.im == -z.im)
                    .expect("self-conjugate invariant");
                groups.push(vec![*z, lower.swap_remove(i)]);
            }
        }
        groups
    }

    /// Copy sorted by real part, then imaginary part.
    pub fn sorted(&self) -> Spectrum {
        let mut values = self.values.clone();
        values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Spectrum { values }
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im > 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, z) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_complex(*z))?;
        }
        write!(f, "}}")
    }
}
