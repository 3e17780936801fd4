use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::pvalue::Class;

/// Confusion counts with class 1 as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    pub fn record(&mut self, decision: Class, label: Class) {
        match (decision, label) {
            (Class::Positive, Class::Positive) => self.tp += 1,
            (Class::Positive, Class::Negative) => self.fp += 1,
            (Class::Negative, Class::Negative) => self.tn += 1,
            (Class::Negative, Class::Positive) => self.fn_ += 1,
        }
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionCounts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn confusion(decisions: &[Class], labels: &[Class]) -> Result<ConfusionCounts> {
    if decisions.len() != labels.len() {
        return Err(Error::LengthMismatch(decisions.len(), labels.len()));
    }
    let mut c = ConfusionCounts::default();
    for (&d, &y) in decisions.iter().zip(labels) {
        c.record(d, y);
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateReport {
    pub fpr: f64,
    pub fnr: f64,
    pub tpr: f64,
    pub tnr: f64,
    pub accuracy: f64,
    pub w0: f64,
    pub w1: f64,
    pub counts: ConfusionCounts,
}

type Q = Ratio<u128>;

impl RateReport {
    /// Checks `w1·FNR + w0·FPR + accuracy = 1` in exact rational arithmetic.
    pub fn identity_holds(&self) -> bool {
        let c = self.counts;
        let total = c.total() as u128;
        let (pos, neg) = (c.positives() as u128, c.negatives() as u128);
        if total == 0 || pos == 0 || neg == 0 {
            return false;
        }
        let w1 = Q::new(pos, total);
        let w0 = Q::new(neg, total);
        let fnr = Q::new(c.fn_ as u128, pos);
        let fpr = Q::new(c.fp as u128, neg);
        let acc = Q::new((c.tp + c.tn) as u128, total);
        w1 * fnr + w0 * fpr + acc == Q::from_integer(1)
    }

    /// The error rate a derived test with this target class controls.
    pub fn target_rate(&self, target: Class) -> f64 {
        match target {
            Class::Negative => self.fpr,
            Class::Positive => self.fnr,
        }
    }
}

pub fn rates(c: ConfusionCounts) -> Result<RateReport> {
    if c.positives() == 0 {
        return Err(Error::UndefinedRate(Class::Positive));
    }
    if c.negatives() == 0 {
        return Err(Error::UndefinedRate(Class::Negative));
    }
    let (pos, neg, total) = (c.positives() as f64, c.negatives() as f64, c.total() as f64);
    let fnr = c.fn_ as f64 / pos;
    let fpr = c.fp as f64 / neg;
    Ok(RateReport {
        fpr,
        fnr,
        tpr: c.tp as f64 / pos,
        tnr: c.tn as f64 / neg,
        accuracy: (c.tp + c.tn) as f64 / total,
        w0: neg / total,
        w1: pos / total,
        counts: c,
    })
}

/// Area under the ROC curve via the Mann-Whitney statistic; ties count half.
pub fn auroc(scored: &[(f64, Class)]) -> Result<f64> {
    let mut v: Vec<(f64, Class)> = scored.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pos = v.iter().filter(|(_, c)| *c == Class::Positive).count();
    let neg = v.len() - pos;
    if pos == 0 {
        return Err(Error::UndefinedRate(Class::Positive));
    }
    if neg == 0 {
        return Err(Error::UndefinedRate(Class::Negative));
    }
    // U = Σ over positives of (#negatives below + ½ #negatives tied)
    let mut negatives_below = 0usize;
    let mut u = 0.0;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j].0 == v[i].0 {
            j += 1;
        }
        let tied_neg = v[i..j].iter().filter(|(_, c)| *c == Class::Negative).count();
        let tied_pos = (j - i) - tied_neg;
        u += tied_pos as f64 * (negatives_below as f64 + 0.5 * tied_neg as f64);
        negatives_below += tied_neg;
        i = j;
    }
    Ok(u / (pos as f64 * neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Class::{Negative as N, Positive as P};

    #[test]
    fn hand_counted_confusion() {
        let c = confusion(&[P, N, P, N], &[P, P, N, N]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fn_: 1,
                fp: 1,
                tn: 1
            }
        );
    }

    #[test]
    fn all_correct_and_all_wrong() {
        let c = confusion(&[P, N, N], &[P, N, N]).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        let r = rates(c).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert!(r.identity_holds());

        let c = confusion(&[P, P], &[N, N]).unwrap();
        assert_eq!(c.fp, 2);
        assert!(matches!(rates(c), Err(Error::UndefinedRate(Class::Positive))));
        let c = ConfusionCounts {
            tp: 1,
            fp: 2,
            ..Default::default()
        };
        assert_eq!(rates(c).unwrap().fpr, 1.0);
    }

    #[test]
    fn identity_example() {
        // w0 = w1 = 1/2, FNR = 0.1, FPR = 0.2
        let c = ConfusionCounts {
            tp: 90,
            fn_: 10,
            fp: 20,
            tn: 80,
        };
        let r = rates(c).unwrap();
        assert!((r.accuracy - 0.85).abs() < 1e-15);
        assert!(r.identity_holds());
        assert_eq!(r.tpr, 1.0 - r.fnr);
        assert_eq!(r.tnr, 1.0 - r.fpr);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(confusion(&[P], &[P, N]), Err(Error::LengthMismatch(1, 2))));
    }

    #[test]
    fn auroc_reference_values() {
        assert_eq!(auroc(&[(0.0, N), (1.0, P)]).unwrap(), 1.0);
        assert_eq!(auroc(&[(1.0, N), (0.0, P)]).unwrap(), 0.0);
        assert_eq!(auroc(&[(0.5, N), (0.5, P)]).unwrap(), 0.5);
        // positives {2, 4}, negatives {1, 3}: pairs won 1 + 2 of 4
        assert_eq!(auroc(&[(1.0, N), (2.0, P), (3.0, N), (4.0, P)]).unwrap(), 0.75);
    }

    proptest! {
        #[test]
        fn identity_exact_for_any_counts(tp in 0u64..10_000, fp in 0u64..10_000,
                                         tn in 0u64..10_000, fn_ in 0u64..10_000) {
            let c = ConfusionCounts { tp, fp, tn, fn_ };
            prop_assume!(c.positives() > 0 && c.negatives() > 0);
            prop_assert!(rates(c).unwrap().identity_holds());
        }

        #[test]
        fn auroc_matches_pair_count(xs in prop::collection::vec((0u8..6, any::<bool>()), 2..60)) {
            let scored: Vec<(f64, Class)> = xs.iter().map(|&(s, p)| (s as f64, if p { P } else { N })).collect();
            let pos: Vec<f64> = scored.iter().filter(|x| x.1 == P).map(|x| x.0).collect();
            let neg: Vec<f64> = scored.iter().filter(|x| x.1 == N).map(|x| x.0).collect();
            prop_assume!(!pos.is_empty() && !neg.is_empty());
            let mut wins = 0.0;
            for p in &pos {
                for q in &neg {
                    wins += if p > q { 1.0 } else if p == q { 0.5 } else { 0.0 };
                }
            }
            let expected = wins / (pos.len() * neg.len()) as f64;
            prop_assert!((auroc(&scored).unwrap() - expected).abs() < 1e-12);
        }
    }
}
