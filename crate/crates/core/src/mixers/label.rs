use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub class_id: u32,
    pub weight: f64,
}

/// A sparse soft label: `(class, weight)` pairs sorted by class id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedLabel {
    entries: Vec<LabelEntry>,
}

impl MixedLabel {
    pub fn one_hot(class_id: u32) -> Self {
        Self {
            entries: vec![LabelEntry {
                class_id,
                weight: 1.0,
            }],
        }
    }

    pub fn entries(&self) -> &[LabelEntry] {
        &self.entries
    }

    pub fn weight_of(&self, class_id: u32) -> f64 {
        self.entries
            .iter()
            .find(|e| e.class_id == class_id)
            .map_or(0.0, |e| e.weight)
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }
}

/// `λ · l_s + (1 − λ) · l_t`, merging equal classes and dropping zero weights.
pub fn mix_labels(source: &MixedLabel, target: &MixedLabel, lambda: f64) -> MixedLabel {
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for (label, w) in [(source, lambda), (target, 1.0 - lambda)] {
        for e in &label.entries {
            *acc.entry(e.class_id).or_insert(0.0) += w * e.weight;
        }
    }
    let mut entries: Vec<LabelEntry> = acc
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(class_id, weight)| LabelEntry { class_id, weight })
        .collect();
    if let [only] = entries.as_mut_slice() {
        only.weight = 1.0;
    }
    MixedLabel { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(l: &MixedLabel) -> Vec<(u32, f64)> {
        l.entries().iter().map(|e| (e.class_id, e.weight)).collect()
    }

    #[test]
    fn two_classes() {
        let m = mix_labels(&MixedLabel::one_hot(3), &MixedLabel::one_hot(7), 0.25);
        assert_eq!(pairs(&m), vec![(3, 0.25), (7, 0.75)]);
    }

    #[test]
    fn same_class_merges() {
        let m = mix_labels(&MixedLabel::one_hot(3), &MixedLabel::one_hot(3), 0.4);
        assert_eq!(pairs(&m), vec![(3, 1.0)]);
    }

    #[test]
    fn endpoints_drop_zero_weights() {
        let a = MixedLabel::one_hot(3);
        let b = MixedLabel::one_hot(7);
        assert_eq!(pairs(&mix_labels(&a, &b, 1.0)), vec![(3, 1.0)]);
        assert_eq!(pairs(&mix_labels(&a, &b, 0.0)), vec![(7, 1.0)]);
    }

    #[test]
    fn soft_inputs() {
        let soft = mix_labels(&MixedLabel::one_hot(1), &MixedLabel::one_hot(2), 0.5);
        let m = mix_labels(&soft, &MixedLabel::one_hot(2), 0.5);
        assert_eq!(pairs(&m), vec![(1, 0.25), (2, 0.75)]);
    }

    #[test]
    fn serialises_as_list() {
        let m = mix_labels(&MixedLabel::one_hot(3), &MixedLabel::one_hot(7), 0.25);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"[{"class_id":3,"weight":0.25},{"class_id":7,"weight":0.75}]"#
        );
    }
}
