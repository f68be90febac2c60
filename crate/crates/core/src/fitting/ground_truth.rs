//! Membership ground truth: per-bin degrees of membership to each term,
//! estimated by counting how often a quantised colour was labelled with each term.

use std::collections::BTreeMap;

use log::warn;

use crate::colourspace::Lab;
use crate::dataset::DatasetEntry;
use crate::ellipsoid::canonical_order;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Integer cube index of a quantised L\*a\*b\* colour.
pub type BinIndex = [i64; 3];

/// Labelled pixels of one example image (already masked).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample<T> {
    pub term: String,
    pub source: String,
    pub pixels: Vec<Lab<T>>,
}

impl<T: Real> TrainingExample<T> {
    pub fn new(term: impl Into<String>, source: impl Into<String>, pixels: Vec<Lab<T>>) -> Self {
        TrainingExample {
            term: term.into(),
            source: source.into(),
            pixels,
        }
    }

    /// Loads the masked pixels of a dataset entry.
    pub fn from_entry(entry: &DatasetEntry) -> Result<Self> {
        let (img, mask) = entry.load::<T>()?;
        let pixels = img
            .pixels
            .into_iter()
            .zip(mask)
            .filter_map(|(p, m)| m.then_some(p))
            .collect();
        Ok(TrainingExample::new(entry.term.clone(), entry.id(), pixels))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipGroundTruth<T> {
    bins: BTreeMap<BinIndex, Vec<T>>,
    bin_size: T,
    term_names: Vec<String>,
}

impl<T: Real> MembershipGroundTruth<T> {
    pub fn new(term_names: Vec<String>, bin_size: T) -> Result<Self> {
        if !(bin_size > T::zero()) || !bin_size.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bin size must be positive, got {bin_size}"
            )));
        }
        if term_names.is_empty() {
            return Err(Error::InvalidParameter(
                "ground truth needs at least one term".into(),
            ));
        }
        for (i, n) in term_names.iter().enumerate() {
            if term_names[..i].contains(n) {
                return Err(Error::InvalidParameter(format!("duplicate term '{n}'")));
            }
        }
        Ok(MembershipGroundTruth {
            bins: BTreeMap::new(),
            bin_size,
            term_names,
        })
    }

    pub fn bin_size(&self) -> T {
        self.bin_size
    }

    pub fn term_names(&self) -> &[String] {
        &self.term_names
    }

    pub fn term_index(&self, name: &str) -> Option<usize> {
        self.term_names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bin_of(&self, p: Lab<T>) -> BinIndex {
        let q = |v: T| (v / self.bin_size).floor().to_i64().unwrap_or(i64::MAX);
        [q(p.l), q(p.a), q(p.b)]
    }

    pub fn bin_centre(&self, index: BinIndex) -> Lab<T> {
        let c = |i: i64| (T::from_i64(i).unwrap() + lit(0.5)) * self.bin_size;
        Lab::new(c(index[0]), c(index[1]), c(index[2]))
    }

    /// Sets the memberships of one bin; values must lie in `[0, 1]`.
    pub fn insert(&mut self, index: BinIndex, memberships: Vec<T>) -> Result<()> {
        if memberships.len() != self.term_names.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} memberships, got {}",
                self.term_names.len(),
                memberships.len()
            )));
        }
        if let Some(v) = memberships
            .iter()
            .find(|&&v| !(v >= T::zero() && v <= T::one()))
        {
            return Err(Error::InvalidParameter(format!(
                "membership {v} outside [0, 1]"
            )));
        }
        self.bins.insert(index, memberships);
        Ok(())
    }

    pub fn get(&self, index: &BinIndex) -> Option<&[T]> {
        self.bins.get(index).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BinIndex, &[T])> {
        self.bins.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Bin centres and the target membership of term `t`, in bin order.
    pub fn targets(&self, t: usize) -> (Vec<[T; 3]>, Vec<T>) {
        self.bins
            .iter()
            .map(|(k, v)| (self.bin_centre(*k).to_array(), v[t]))
            .unzip()
    }

    /// Centres of bins with nonzero membership for term `t`.
    pub fn support(&self, t: usize) -> Vec<Lab<T>> {
        self.bins
            .iter()
            .filter(|(_, v)| v[t] > T::zero())
            .map(|(k, _)| self.bin_centre(*k))
            .collect()
    }
}

/// Counts labelled occurrences per bin and normalises by the bin's total.
pub fn build_ground_truth<T: Real>(
    examples: &[TrainingExample<T>],
    bin_size: T,
) -> Result<MembershipGroundTruth<T>> {
    let names: Vec<&str> = examples.iter().map(|e| e.term.as_str()).collect();
    build_ground_truth_with_terms(examples, bin_size, canonical_order(&names))
}

/// As [`build_ground_truth`] with an explicit term list (examples naming other terms are an error).
pub fn build_ground_truth_with_terms<T: Real>(
    examples: &[TrainingExample<T>],
    bin_size: T,
    term_names: Vec<String>,
) -> Result<MembershipGroundTruth<T>> {
    let mut gt = MembershipGroundTruth::new(term_names, bin_size)?;
    let n = gt.term_names.len();
    let mut counts: BTreeMap<BinIndex, Vec<u64>> = BTreeMap::new();
    let mut total = 0usize;
    for ex in examples {
        let t = gt
            .term_index(&ex.term)
            .ok_or_else(|| Error::UnknownTerm(ex.term.clone()))?;
        if ex.pixels.is_empty() {
            warn!("{}: empty mask, example skipped", ex.source);
            continue;
        }
        for p in &ex.pixels {
            counts.entry(gt.bin_of(*p)).or_insert_with(|| vec![0; n])[t] += 1;
        }
        total += ex.pixels.len();
    }
    if total == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    for (k, c) in counts {
        let sum: u64 = c.iter().sum();
        let m = c
            .iter()
            .map(|&x| T::from_u64(x).unwrap() / T::from_u64(sum).unwrap())
            .collect();
        gt.bins.insert(k, m);
    }
    Ok(gt)
}

/// Per-bin convex combination `w·gt1 + (1−w)·gt2`; a bin absent from one input counts as zero there.
pub fn average_ground_truths<T: Real>(
    gt1: &MembershipGroundTruth<T>,
    gt2: &MembershipGroundTruth<T>,
    weight: T,
) -> Result<MembershipGroundTruth<T>> {
    if !(weight >= T::zero() && weight <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "weight must lie in [0, 1], got {weight}"
        )));
    }
    if gt1.bin_size != gt2.bin_size {
        return Err(Error::BinSizeMismatch(
            to_f64(gt1.bin_size),
            to_f64(gt2.bin_size),
        ));
    }
    let mut a = gt1.term_names.clone();
    let mut b = gt2.term_names.clone();
    a.sort();
    b.sort();
    if a != b {
        let only = |x: &[String], y: &[String]| {
            x.iter()
                .filter(|n| !y.contains(n))
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        };
        return Err(Error::TermSetMismatch {
            only_first: only(&a, &b),
            only_second: only(&b, &a),
        });
    }
    // align gt2's columns to gt1's order
    let perm: Vec<usize> = gt1
        .term_names
        .iter()
        .map(|n| gt2.term_index(n).expect("same term set"))
        .collect();
    let n = gt1.term_names.len();
    let zero = vec![T::zero(); n];
    let mut out = MembershipGroundTruth::new(gt1.term_names.clone(), gt1.bin_size)?;
    let keys: std::collections::BTreeSet<&BinIndex> =
        gt1.bins.keys().chain(gt2.bins.keys()).collect();
    for k in keys {
        let v1 = gt1.bins.get(k).unwrap_or(&zero);
        let v2 = gt2.bins.get(k).unwrap_or(&zero);
        let m = (0..n)
            .map(|t| {
                let v = weight * v1[t] + (T::one() - weight) * v2[perm[t]];
                v.max(T::zero()).min(T::one())
            })
            .collect();
        out.bins.insert(*k, m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(term: &str, px: &[[f64; 3]]) -> TrainingExample<f64> {
        TrainingExample::new(term, term, px.iter().map(|&p| Lab::from_array(p)).collect())
    }

    #[test]
    fn count_ratio_per_bin() {
        let p = [50.2, 10.4, -3.3];
        let gt = build_ground_truth(&[ex("blue", &[p, p]), ex("purple", &[p])], 1.0).unwrap();
        assert_eq!(gt.term_names(), ["blue", "purple"]);
        assert_eq!(gt.len(), 1);
        let m = gt.get(&gt.bin_of(Lab::from_array(p))).unwrap();
        assert!((m[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((m[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn solid_image_gives_full_membership() {
        let gt = build_ground_truth(&[ex("red", &[[53.0, 80.0, 67.0]; 20])], 1.0).unwrap();
        assert!(gt.iter().all(|(_, m)| m == [1.0]));
    }

    #[test]
    fn disjoint_images_have_disjoint_support() {
        let gt = build_ground_truth(
            &[
                ex("red", &[[53.0, 80.0, 67.0], [54.0, 79.0, 66.0]]),
                ex("blue", &[[32.0, 79.0, -107.0]]),
            ],
            1.0,
        )
        .unwrap();
        for (_, m) in gt.iter() {
            assert_eq!(m.iter().filter(|&&v| v > 0.0).count(), 1);
        }
    }

    #[test]
    fn empty_examples_skipped_but_all_empty_fails() {
        let gt =
            build_ground_truth(&[ex("red", &[]), ex("blue", &[[1.0, 1.0, 1.0]])], 1.0).unwrap();
        assert_eq!(gt.len(), 1);
        assert!(matches!(
            build_ground_truth(&[ex("red", &[])], 1.0),
            Err(Error::EmptyGroundTruth)
        ));
    }

    #[test]
    fn quantisation_uses_floor() {
        let gt = MembershipGroundTruth::<f64>::new(vec!["x".into()], 2.0).unwrap();
        assert_eq!(gt.bin_of(Lab::from_f64(3.9, -0.1, 0.0)), [1, -1, 0]);
        assert_eq!(gt.bin_centre([1, -1, 0]), Lab::from_f64(3.0, -1.0, 1.0));
    }

    fn single(term: &[&str], bins: &[(BinIndex, Vec<f64>)]) -> MembershipGroundTruth<f64> {
        let mut gt =
            MembershipGroundTruth::new(term.iter().map(|s| s.to_string()).collect(), 1.0).unwrap();
        for (k, v) in bins {
            gt.insert(*k, v.clone()).unwrap();
        }
        gt
    }

    #[test]
    fn averaging_rules() {
        let g1 = single(
            &["blue", "red"],
            &[([0, 0, 0], vec![1.0, 0.0]), ([1, 0, 0], vec![0.4, 0.6])],
        );
        let g2 = single(&["red", "blue"], &[([0, 0, 0], vec![0.5, 0.5])]);
        assert_eq!(
            average_ground_truths(&g1, &g2, 1.0)
                .unwrap()
                .get(&[0, 0, 0]),
            g1.get(&[0, 0, 0])
        );
        let avg = average_ground_truths(&g1, &g2, 0.5).unwrap();
        assert_eq!(avg.get(&[0, 0, 0]).unwrap(), [0.75, 0.25]);
        // absent from g2: half of g1
        assert_eq!(avg.get(&[1, 0, 0]).unwrap(), [0.2, 0.3]);
    }

    #[test]
    fn averaging_rejects_different_terms() {
        let g1 = single(&["blue", "red"], &[]);
        let g2 = single(&["blue", "green"], &[]);
        let err = average_ground_truths(&g1, &g2, 0.5)
            .unwrap_err()
            .to_string();
        assert!(err.contains("red") && err.contains("green"), "{err}");
    }

    #[test]
    fn out_of_range_membership_rejected() {
        let mut gt = MembershipGroundTruth::<f64>::new(vec!["x".into()], 1.0).unwrap();
        assert!(gt.insert([0, 0, 0], vec![1.5]).is_err());
        assert!(gt.insert([0, 0, 0], vec![0.5, 0.5]).is_err());
    }
}
