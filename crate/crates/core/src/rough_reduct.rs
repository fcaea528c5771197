//! Rough-set attribute reduction.
//!
//! Continuous feature columns are discretized into an information system
//! whose decision attribute is the class label. The dependency degree
//! `γ(P) = |POS_P(D)| / |U|` measures how much of the universe the attribute
//! set `P` classifies without ambiguity; a reduct is a small attribute set
//! with the same dependency as the full set.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::fusion_search::FeatureMatrix;

/// Set of object (row) indices.
pub type ObjectSet = BTreeSet<usize>;

/// Largest attribute count [`exhaustive_reduct`] will enumerate.
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Discrete attribute-value table with a decision attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InformationSystem {
    objects: usize,
    attributes: usize,
    /// Row-major `objects × attributes`.
    values: Vec<u32>,
    decision: Vec<u32>,
}

impl InformationSystem {
    pub fn new(
        objects: usize,
        attributes: usize,
        values: Vec<u32>,
        decision: Vec<u32>,
    ) -> Result<Self> {
        if objects == 0 {
            return Err(Error::InvalidParams("universe must be nonempty".into()));
        }
        if values.len() != objects * attributes {
            return Err(Error::LengthMismatch {
                expected: objects * attributes,
                actual: values.len(),
            });
        }
        if decision.len() != objects {
            return Err(Error::LengthMismatch {
                expected: objects,
                actual: decision.len(),
            });
        }
        Ok(Self {
            objects,
            attributes,
            values,
            decision,
        })
    }

    /// Builds a system from attribute columns.
    pub fn from_columns(columns: &[Vec<u32>], decision: Vec<u32>) -> Result<Self> {
        let objects = decision.len();
        if let Some(bad) = columns.iter().find(|c| c.len() != objects) {
            return Err(Error::LengthMismatch {
                expected: objects,
                actual: bad.len(),
            });
        }
        let values = (0..objects)
            .flat_map(|o| columns.iter().map(move |c| c[o]))
            .collect();
        Self::new(objects, columns.len(), values, decision)
    }

    pub fn object_count(&self) -> usize {
        self.objects
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes
    }

    pub fn value(&self, object: usize, attribute: usize) -> u32 {
        self.values[object * self.attributes + attribute]
    }

    pub fn decision(&self) -> &[u32] {
        &self.decision
    }

    pub fn universe(&self) -> ObjectSet {
        (0..self.objects).collect()
    }

    pub fn all_attributes(&self) -> Vec<usize> {
        (0..self.attributes).collect()
    }

    fn check(&self, attrs: &[usize]) -> Result<()> {
        match attrs.iter().find(|&&a| a >= self.attributes) {
            Some(&attribute) => Err(Error::UnknownAttribute {
                attribute,
                count: self.attributes,
            }),
            None => Ok(()),
        }
    }
}

/// Disjoint blocks covering the universe. Blocks are ordered by their
/// smallest member and each block is sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Groups `0..n` by key, preserving first-occurrence order.
    fn group_by<K: std::hash::Hash + Eq>(n: usize, key: impl Fn(usize) -> K) -> Self {
        let mut index: HashMap<K, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for o in 0..n {
            let next = blocks.len();
            let b = *index.entry(key(o)).or_insert(next);
            if b == next {
                blocks.push(Vec::new());
            }
            blocks[b].push(o);
        }
        Self { blocks }
    }
}

/// Equivalence classes of objects agreeing on every attribute in `attrs`.
pub fn indiscernibility_partition(sys: &InformationSystem, attrs: &[usize]) -> Result<Partition> {
    sys.check(attrs)?;
    Ok(Partition::group_by(sys.objects, |o| {
        attrs.iter().map(|&a| sys.value(o, a)).collect::<Vec<_>>()
    }))
}

pub fn decision_partition(sys: &InformationSystem) -> Partition {
    Partition::group_by(sys.objects, |o| sys.decision[o])
}

/// Union of the blocks wholly contained in `target`.
pub fn lower_approximation(partition: &Partition, target: &ObjectSet) -> ObjectSet {
    partition
        .blocks
        .iter()
        .filter(|b| b.iter().all(|o| target.contains(o)))
        .flatten()
        .copied()
        .collect()
}

pub fn positive_region(condition: &Partition, decision: &Partition) -> ObjectSet {
    decision
        .blocks
        .iter()
        .flat_map(|block| {
            let target: ObjectSet = block.iter().copied().collect();
            lower_approximation(condition, &target)
        })
        .collect()
}

fn positive_count(sys: &InformationSystem, attrs: &[usize], decision: &Partition) -> Result<usize> {
    let cond = indiscernibility_partition(sys, attrs)?;
    Ok(positive_region(&cond, decision).len())
}

/// Dependency degree `γ(attrs) = |POS(D)| / |U|`.
pub fn dependency(sys: &InformationSystem, attrs: &[usize]) -> Result<f64> {
    let dec = decision_partition(sys);
    Ok(positive_count(sys, attrs, &dec)? as f64 / sys.objects as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductResult {
    /// Retained attribute indices, ascending.
    pub retained: Vec<usize>,
    pub gamma_full: f64,
    pub gamma_reduct: f64,
}

/// Forward selection by largest dependency gain, then one reverse-order
/// pruning pass. The result has the full set's dependency and no attribute
/// can be dropped on its own without lowering it.
pub fn greedy_reduct(sys: &InformationSystem) -> ReductResult {
    let dec = decision_partition(sys);
    let count = |attrs: &[usize]| {
        positive_count(sys, attrs, &dec).expect("attribute ids come from the system")
    };
    let full = count(&sys.all_attributes());

    let mut chosen: Vec<usize> = Vec::new();
    let mut current = count(&chosen);
    while current < full {
        let mut best: Option<(usize, usize)> = None;
        for a in 0..sys.attributes {
            if chosen.contains(&a) {
                continue;
            }
            chosen.push(a);
            let c = count(&chosen);
            chosen.pop();
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((a, c));
            }
        }
        let (a, c) = best.expect("an unused attribute remains while below the full dependency");
        chosen.push(a);
        current = c;
    }

    for i in (0..chosen.len()).rev() {
        let attr = chosen.remove(i);
        if count(&chosen) != full {
            chosen.insert(i, attr);
        }
    }

    chosen.sort_unstable();
    let gamma_full = full as f64 / sys.objects as f64;
    ReductResult {
        retained: chosen,
        gamma_full,
        gamma_reduct: gamma_full,
    }
}

/// Smallest attribute subset with the full dependency; ties go to the
/// lexicographically first subset.
pub fn exhaustive_reduct(sys: &InformationSystem) -> Result<Vec<usize>> {
    if sys.attributes > EXHAUSTIVE_LIMIT {
        return Err(Error::TooManyAttributes {
            count: sys.attributes,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let dec = decision_partition(sys);
    let full = positive_count(sys, &sys.all_attributes(), &dec)?;
    for size in 0..=sys.attributes {
        for subset in (0..sys.attributes).combinations(size) {
            if positive_count(sys, &subset, &dec)? == full {
                return Ok(subset);
            }
        }
    }
    unreachable!("the full attribute set always matches its own dependency")
}

/// Equal-frequency discretization of every column into codes `0..bins`.
///
/// A value's code is `⌊rank · bins / n⌋` where `rank` is the position of the
/// first occurrence of that value in sorted order, so ties share a code.
pub fn discretize_column(column: &[f64], bins: usize) -> Vec<u32> {
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
    let mut codes = vec![0u32; n];
    let mut group_start = 0;
    for (rank, &i) in order.iter().enumerate() {
        if rank > 0 && column[i] != column[order[rank - 1]] {
            group_start = rank;
        }
        codes[i] = (group_start * bins / n) as u32;
    }
    codes
}

/// Turns a labeled feature matrix into an information system; the decision
/// codes are the indices of the labels in sorted order.
pub fn discretize(matrix: &FeatureMatrix, bins: usize) -> Result<InformationSystem> {
    if bins < 2 {
        return Err(Error::InvalidParams(format!(
            "bins must be >= 2, got {bins}"
        )));
    }
    let labels = matrix.labels().ok_or(Error::MissingLabels)?;
    let classes: Vec<&String> = labels.iter().sorted().dedup().collect();
    let decision = labels
        .iter()
        .map(|l| {
            classes
                .binary_search(&l)
                .expect("label is in its own class list") as u32
        })
        .collect();
    let columns: Vec<Vec<u32>> = (0..matrix.cols())
        .map(|j| discretize_column(&matrix.column(j), bins))
        .collect();
    InformationSystem::from_columns(&columns, decision)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> ObjectSet {
        v.iter().copied().collect()
    }

    fn blocks(v: &[&[usize]]) -> Partition {
        Partition {
            blocks: v.iter().map(|b| b.to_vec()).collect(),
        }
    }

    /// Objects 0..4 with a = [0,0,1,1], b = [0,1,0,1], decision {0,1,2},{3}.
    fn four() -> InformationSystem {
        InformationSystem::from_columns(&[vec![0, 0, 1, 1], vec![0, 1, 0, 1]], vec![0, 0, 0, 1])
            .unwrap()
    }

    #[test]
    fn discretize_examples() {
        assert_eq!(
            discretize_column(&[1.0, 2.0, 3.0, 4.0], 2),
            vec![0, 0, 1, 1]
        );
        assert_eq!(discretize_column(&[7.0; 5], 4), vec![0; 5]);
        assert_eq!(discretize_column(&[5.0, 1.0, 3.0], 3), vec![2, 0, 1]);
        // ties share the code of their first rank
        assert_eq!(
            discretize_column(&[1.0, 1.0, 1.0, 2.0], 2),
            vec![0, 0, 0, 1]
        );
    }

    #[test]
    fn discretize_needs_labels_and_bins() {
        let m = FeatureMatrix::new(2, 1, vec![1.0, 2.0]).unwrap();
        assert!(matches!(discretize(&m, 2), Err(Error::MissingLabels)));
        let m = m.with_labels(vec!["b".into(), "a".into()]).unwrap();
        assert!(discretize(&m, 1).is_err());
        let sys = discretize(&m, 2).unwrap();
        assert_eq!(sys.decision(), &[1, 0]);
        assert_eq!(sys.value(1, 0), 1);
    }

    #[test]
    fn partition_examples() {
        let sys = four();
        let empty = indiscernibility_partition(&sys, &[]).unwrap();
        assert_eq!(empty, blocks(&[&[0, 1, 2, 3]]));
        let ab = indiscernibility_partition(&sys, &[0, 1]).unwrap();
        assert_eq!(ab, blocks(&[&[0], &[1], &[2], &[3]]));
        let a = indiscernibility_partition(&sys, &[0]).unwrap();
        assert_eq!(a, blocks(&[&[0, 1], &[2, 3]]));
        assert!(matches!(
            indiscernibility_partition(&sys, &[2]),
            Err(Error::UnknownAttribute {
                attribute: 2,
                count: 2
            })
        ));
    }

    #[test]
    fn lower_approximation_examples() {
        let p = blocks(&[&[1, 2], &[3, 4]]);
        let u = set(&[1, 2, 3, 4]);
        assert_eq!(lower_approximation(&p, &u), u);
        assert!(lower_approximation(&p, &ObjectSet::new()).is_empty());
        assert_eq!(lower_approximation(&p, &set(&[1, 2, 3])), set(&[1, 2]));
    }

    #[test]
    fn positive_region_examples() {
        let p = blocks(&[&[1, 2], &[3, 4]]);
        assert_eq!(positive_region(&p, &p), set(&[1, 2, 3, 4]));
        let single = blocks(&[&[1, 2, 3, 4]]);
        assert!(positive_region(&single, &p).is_empty());
        let dec = blocks(&[&[1, 2, 3], &[4]]);
        assert_eq!(positive_region(&p, &dec), set(&[1, 2]));
    }

    #[test]
    fn dependency_examples() {
        let sys = four();
        assert_eq!(dependency(&sys, &[0, 1]).unwrap(), 1.0);
        assert_eq!(dependency(&sys, &[]).unwrap(), 0.0);
        assert_eq!(dependency(&sys, &[0]).unwrap(), 0.5);
        assert!(dependency(&sys, &[9]).is_err());
    }

    #[test]
    fn duplicated_columns_collapse() {
        let col = vec![0, 1, 2, 0, 1, 2];
        let sys = InformationSystem::from_columns(
            &[col.clone(), col.clone(), col.clone()],
            vec![0, 1, 1, 0, 1, 1],
        )
        .unwrap();
        let r = greedy_reduct(&sys);
        assert_eq!(r.retained, vec![0]);
        assert_eq!(r.gamma_full, 1.0);
        assert_eq!(exhaustive_reduct(&sys).unwrap(), vec![0]);

        // γ(A) = 0: the values cannot separate the mixed classes at all.
        let sys = InformationSystem::from_columns(&[vec![0, 0], vec![0, 0]], vec![0, 1]).unwrap();
        let r = greedy_reduct(&sys);
        assert!(r.retained.is_empty());
        assert_eq!((r.gamma_full, r.gamma_reduct), (0.0, 0.0));
    }

    #[test]
    fn decision_copy_is_the_reduct() {
        let decision = vec![0, 1, 2, 0, 1, 2, 2, 0];
        let noise1 = vec![3, 1, 0, 0, 2, 1, 3, 3];
        let noise2 = vec![1, 1, 0, 1, 0, 0, 1, 0];
        let sys =
            InformationSystem::from_columns(&[noise1, decision.clone(), noise2], decision).unwrap();
        let r = greedy_reduct(&sys);
        assert_eq!(r.retained, vec![1]);
        assert_eq!(r.gamma_reduct, 1.0);
        assert_eq!(dependency(&sys, &[1]).unwrap(), 1.0);
    }

    #[test]
    fn single_attribute_exhaustive() {
        let sys = InformationSystem::from_columns(&[vec![0, 1]], vec![0, 1]).unwrap();
        assert_eq!(exhaustive_reduct(&sys).unwrap(), vec![0]);
        let sys = InformationSystem::from_columns(&[vec![0, 1]], vec![0, 0]).unwrap();
        assert!(exhaustive_reduct(&sys).unwrap().is_empty());
    }

    #[test]
    fn exhaustive_guards_size() {
        let cols = vec![vec![0u32; 2]; EXHAUSTIVE_LIMIT + 1];
        let sys = InformationSystem::from_columns(&cols, vec![0, 1]).unwrap();
        assert!(matches!(
            exhaustive_reduct(&sys),
            Err(Error::TooManyAttributes {
                count: 17,
                limit: 16
            })
        ));
    }

    #[test]
    fn empty_universe_rejected() {
        assert!(InformationSystem::new(0, 1, vec![], vec![]).is_err());
    }
}
