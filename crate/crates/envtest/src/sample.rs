//! Bivariate samples: continuous, continuous with declared atoms, categorical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution kind of one marginal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MarginalKind {
    Continuous,
    /// Continuous except for the listed atom values (each carrying positive
    /// probability, e.g. zero precipitation).
    ContinuousWithAtoms(Vec<f64>),
    Categorical,
}

#[derive(Clone, Debug)]
enum SampleData {
    Numeric {
        x: Vec<f64>,
        y: Vec<f64>,
        atoms_x: Vec<f64>,
        atoms_y: Vec<f64>,
    },
    Categorical {
        x_codes: Vec<u32>,
        y_codes: Vec<u32>,
        x_labels: Vec<String>,
        y_labels: Vec<String>,
    },
}

/// A paired sample of `n` observations of two random variables.
#[derive(Clone, Debug)]
pub struct BivariateSample {
    data: SampleData,
}

impl BivariateSample {
    /// A sample with two continuous marginals.
    pub fn continuous(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::continuous_with_atoms(x, y, Vec::new(), Vec::new())
    }

    /// A sample with continuous marginals carrying the declared atom values.
    ///
    /// Atom lists may be empty; each declared atom must occur in the data.
    pub fn continuous_with_atoms(
        x: Vec<f64>,
        y: Vec<f64>,
        mut atoms_x: Vec<f64>,
        mut atoms_y: Vec<f64>,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "coordinate lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidInput("need at least 2 observations".into()));
        }
        for v in x
            .iter()
            .chain(y.iter())
            .chain(atoms_x.iter())
            .chain(atoms_y.iter())
        {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite value {v}")));
            }
        }
        atoms_x.sort_by(|a, b| a.partial_cmp(b).unwrap());
        atoms_x.dedup();
        atoms_y.sort_by(|a, b| a.partial_cmp(b).unwrap());
        atoms_y.dedup();
        for a in &atoms_x {
            if !x.contains(a) {
                return Err(Error::InvalidInput(format!(
                    "declared x atom {a} not present in data"
                )));
            }
        }
        for a in &atoms_y {
            if !y.contains(a) {
                return Err(Error::InvalidInput(format!(
                    "declared y atom {a} not present in data"
                )));
            }
        }
        Ok(Self {
            data: SampleData::Numeric {
                x,
                y,
                atoms_x,
                atoms_y,
            },
        })
    }

    /// A sample of paired category labels.
    ///
    /// Labels are interned; category order is numeric when every label parses
    /// as a number, lexicographic otherwise.
    pub fn categorical(x: Vec<String>, y: Vec<String>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "coordinate lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidInput("need at least 2 observations".into()));
        }
        let (x_labels, x_codes) = intern(&x);
        let (y_labels, y_codes) = intern(&y);
        Ok(Self {
            data: SampleData::Categorical {
                x_codes,
                y_codes,
                x_labels,
                y_labels,
            },
        })
    }

    pub fn n(&self) -> usize {
        match &self.data {
            SampleData::Numeric { x, .. } => x.len(),
            SampleData::Categorical { x_codes, .. } => x_codes.len(),
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.data, SampleData::Categorical { .. })
    }

    pub fn marginal_x(&self) -> MarginalKind {
        match &self.data {
            SampleData::Numeric { atoms_x, .. } if atoms_x.is_empty() => MarginalKind::Continuous,
            SampleData::Numeric { atoms_x, .. } => {
                MarginalKind::ContinuousWithAtoms(atoms_x.clone())
            }
            SampleData::Categorical { .. } => MarginalKind::Categorical,
        }
    }

    pub fn marginal_y(&self) -> MarginalKind {
        match &self.data {
            SampleData::Numeric { atoms_y, .. } if atoms_y.is_empty() => MarginalKind::Continuous,
            SampleData::Numeric { atoms_y, .. } => {
                MarginalKind::ContinuousWithAtoms(atoms_y.clone())
            }
            SampleData::Categorical { .. } => MarginalKind::Categorical,
        }
    }

    /// Numeric coordinate slices, or an error for categorical samples.
    pub fn numeric(&self) -> Result<(&[f64], &[f64])> {
        match &self.data {
            SampleData::Numeric { x, y, .. } => Ok((x, y)),
            SampleData::Categorical { .. } => Err(Error::IncompatibleStatistic(
                "numeric statistic requested on a categorical sample".into(),
            )),
        }
    }

    pub fn atoms_x(&self) -> &[f64] {
        match &self.data {
            SampleData::Numeric { atoms_x, .. } => atoms_x,
            SampleData::Categorical { .. } => &[],
        }
    }

    pub fn atoms_y(&self) -> &[f64] {
        match &self.data {
            SampleData::Numeric { atoms_y, .. } => atoms_y,
            SampleData::Categorical { .. } => &[],
        }
    }

    /// Category codes and labels, or an error for numeric samples.
    pub fn categories(&self) -> Result<(&[u32], &[u32], &[String], &[String])> {
        match &self.data {
            SampleData::Categorical {
                x_codes,
                y_codes,
                x_labels,
                y_labels,
            } => Ok((x_codes, y_codes, x_labels, y_labels)),
            SampleData::Numeric { .. } => Err(Error::IncompatibleStatistic(
                "contingency statistic requested on a numeric sample".into(),
            )),
        }
    }

    /// Re-pairs the sample as `(x_i, y_perm[i])`, leaving x order untouched.
    pub fn permute_y(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::InvalidArgument(format!(
                "permutation length {} does not match sample size {n}",
                perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidArgument("not a permutation of 0..n".into()));
            }
            seen[p] = true;
        }
        let data = match &self.data {
            SampleData::Numeric {
                x,
                y,
                atoms_x,
                atoms_y,
            } => SampleData::Numeric {
                x: x.clone(),
                y: perm.iter().map(|&p| y[p]).collect(),
                atoms_x: atoms_x.clone(),
                atoms_y: atoms_y.clone(),
            },
            SampleData::Categorical {
                x_codes,
                y_codes,
                x_labels,
                y_labels,
            } => SampleData::Categorical {
                x_codes: x_codes.clone(),
                y_codes: perm.iter().map(|&p| y_codes[p]).collect(),
                x_labels: x_labels.clone(),
                y_labels: y_labels.clone(),
            },
        };
        Ok(Self { data })
    }
}

/// Values whose relative frequency reaches `min_freq`, sorted ascending.
/// Opt-in helper; declared atoms are normally supplied explicitly.
pub fn detect_atoms(values: &[f64], min_freq: f64) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut atoms = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sorted[end] == sorted[start] {
            end += 1;
        }
        if (end - start) as f64 / n as f64 >= min_freq {
            atoms.push(sorted[start]);
        }
        start = end;
    }
    atoms
}

fn intern(labels: &[String]) -> (Vec<String>, Vec<u32>) {
    let mut unique: Vec<String> = labels.to_vec();
    unique.sort();
    unique.dedup();
    // Numeric ordering when every label is a number (category codes like
    // "0", "1", ..., "10" should sort numerically).
    if unique.iter().all(|l| l.parse::<f64>().is_ok()) {
        unique.sort_by(|a, b| {
            a.parse::<f64>()
                .unwrap()
                .partial_cmp(&b.parse::<f64>().unwrap())
                .unwrap()
        });
    }
    let codes = labels
        .iter()
        .map(|l| unique.iter().position(|u| u == l).unwrap() as u32)
        .collect();
    (unique, codes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_nonfinite() {
        assert!(BivariateSample::continuous(vec![1.0], vec![2.0]).is_err());
        assert!(BivariateSample::continuous(vec![1.0, f64::NAN], vec![2.0, 3.0]).is_err());
        assert!(BivariateSample::continuous(vec![1.0, 2.0], vec![2.0]).is_err());
    }

    #[test]
    fn rejects_absent_atom() {
        let r = BivariateSample::continuous_with_atoms(
            vec![1.0, 2.0],
            vec![3.0, 4.0],
            vec![],
            vec![0.0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn permute_y_validates_bijection() {
        let s = BivariateSample::continuous(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]).unwrap();
        assert!(s.permute_y(&[0, 1]).is_err());
        assert!(s.permute_y(&[0, 0, 1]).is_err());
        assert!(s.permute_y(&[0, 1, 3]).is_err());
        let p = s.permute_y(&[2, 0, 1]).unwrap();
        let (x, y) = p.numeric().unwrap();
        assert_eq!(x, &[1.0, 2.0, 3.0]);
        assert_eq!(y, &[6.0, 4.0, 5.0]);
    }

    #[test]
    fn permutation_preserves_marginal_multisets() {
        let s = BivariateSample::continuous(vec![1.0, 2.0, 3.0, 4.0], vec![9.0, 8.0, 7.0, 6.0])
            .unwrap();
        let p = s.permute_y(&[3, 2, 1, 0]).unwrap();
        let (_, y0) = s.numeric().unwrap();
        let (_, y1) = p.numeric().unwrap();
        let mut a = y0.to_vec();
        let mut b = y1.to_vec();
        a.sort_by(|u, v| u.partial_cmp(v).unwrap());
        b.sort_by(|u, v| u.partial_cmp(v).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn categorical_labels_sort_numerically() {
        let s = BivariateSample::categorical(
            vec!["6".into(), "0".into(), "10".into(), "0".into()],
            vec!["b".into(), "a".into(), "b".into(), "a".into()],
        )
        .unwrap();
        let (xc, _, xl, yl) = s.categories().unwrap();
        assert_eq!(xl, &["0".to_string(), "6".to_string(), "10".to_string()]);
        assert_eq!(yl, &["a".to_string(), "b".to_string()]);
        assert_eq!(xc, &[1, 0, 2, 0]);
    }

    #[test]
    fn atom_detection_threshold() {
        let values = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.2, 3.4, 5.6, 7.8];
        assert_eq!(detect_atoms(&values, 0.3), vec![0.0]);
        assert!(detect_atoms(&values, 0.7).is_empty());
        // every distinct value clears a 5% bar in a sample of ten
        assert_eq!(detect_atoms(&values, 0.05).len(), 5);
    }
}
