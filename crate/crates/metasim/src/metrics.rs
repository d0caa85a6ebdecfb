//! Meta-comparison metrics: overlap, edit distance, rank correlation with
//! significance, the naive ban baseline, and tier capture/composition.
//!
//! All functions here are pure; none touch an rng or global state.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::discovery::MetaSnapshot;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("meta sizes differ: {a} vs {b}")]
    SizeMismatch { a: usize, b: usize },
    #[error("rankings share no species")]
    EmptyIntersection,
    #[error("need at least 2 paired observations, got {n}")]
    TooFewPairs { n: usize },
    #[error("correlation undefined: one input is entirely tied")]
    AllTied,
    #[error("species {species:?} not present in the ranking")]
    SpeciesNotRanked { species: String },
    #[error("species {species:?} missing from the tier map")]
    MissingTier { species: String },
    #[error("exact p-value only supported for n <= {max}, got {n}")]
    PermutationTooLarge { n: usize, max: usize },
}

/// Fraction of the two meta sets that coincide: |B ∩ B'| / metaSize.
pub fn overlap(b: &MetaSnapshot, b2: &MetaSnapshot) -> Result<f64, MetricsError> {
    if b.meta_size != b2.meta_size {
        return Err(MetricsError::SizeMismatch {
            a: b.meta_size,
            b: b2.meta_size,
        });
    }
    let set = b.meta_set();
    let shared = b2.meta_set().iter().filter(|s| set.contains(*s)).count();
    Ok(shared as f64 / b.meta_size as f64)
}

/// Mean absolute rank difference over species present in both full
/// rankings, with 1-based ranks taken over each full list.
pub fn edit_distance(a: &MetaSnapshot, x: &MetaSnapshot) -> Result<f64, MetricsError> {
    let ranks_x: HashMap<&str, usize> = x
        .ranking
        .iter()
        .enumerate()
        .map(|(i, e)| (e.species.as_str(), i + 1))
        .collect();
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, e) in a.ranking.iter().enumerate() {
        if let Some(&rx) = ranks_x.get(e.species.as_str()) {
            sum += ((i + 1) as f64 - rx as f64).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricsError::EmptyIntersection);
    }
    Ok(sum / n as f64)
}

/// How much closer (or further) B' lands to the reference A than B does:
/// |editDistance(A,B) - editDistance(A,B')|.
pub fn edit_distance_delta(
    a: &MetaSnapshot,
    b: &MetaSnapshot,
    b2: &MetaSnapshot,
) -> Result<f64, MetricsError> {
    Ok((edit_distance(a, b)? - edit_distance(a, b2)?).abs())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Average-rank transform (ties share the mean of the positions they span).
fn rank_transform(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) hold equal values; average of the
        // 1-based ranks they would occupy.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Spearman's rho over paired observations with a two-sided t-approximation
/// p-value.
pub fn spearman(pairs: &[(f64, f64)]) -> Result<CorrelationResult, MetricsError> {
    let n = pairs.len();
    if n < 2 {
        return Err(MetricsError::TooFewPairs { n });
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let rx = rank_transform(&xs);
    let ry = rank_transform(&ys);
    let rho = pearson(&rx, &ry).ok_or(MetricsError::AllTied)?;
    let p_value = t_approx_p(rho, n);
    Ok(CorrelationResult { rho, p_value, n })
}

fn t_approx_p(rho: f64, n: usize) -> f64 {
    if n <= 2 || rho.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

pub const PERMUTATION_MAX_N: usize = 10;

/// Exact two-sided permutation p-value for small samples: the fraction of
/// the n! pairings whose |rho| is at least the observed |rho|.
pub fn spearman_exact(pairs: &[(f64, f64)]) -> Result<CorrelationResult, MetricsError> {
    let n = pairs.len();
    if n < 2 {
        return Err(MetricsError::TooFewPairs { n });
    }
    if n > PERMUTATION_MAX_N {
        return Err(MetricsError::PermutationTooLarge {
            n,
            max: PERMUTATION_MAX_N,
        });
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let rx = rank_transform(&xs);
    let ry = rank_transform(&ys);
    let rho = pearson(&rx, &ry).ok_or(MetricsError::AllTied)?;

    let mut perm: Vec<usize> = (0..n).collect();
    let mut at_least = 0u64;
    let mut total = 0u64;
    // Heap's algorithm over permutations of the y-ranks.
    let mut c = vec![0usize; n];
    let mut count_perm = |perm: &[usize]| {
        let py: Vec<f64> = perm.iter().map(|&i| ry[i]).collect();
        if let Some(r) = pearson(&rx, &py) {
            if r.abs() >= rho.abs() - 1e-12 {
                at_least += 1;
            }
        }
        total += 1;
    };
    count_perm(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            count_perm(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(CorrelationResult {
        rho,
        p_value: at_least as f64 / total as f64,
        n,
    })
}

/// The paper's naive prediction: delete the banned species from the ranking
/// and shift everything below it up one place.
pub fn naive_baseline(a: &MetaSnapshot, banned: &[String]) -> Result<MetaSnapshot, MetricsError> {
    let mut ranking = a.ranking.clone();
    for species in banned {
        let pos = ranking
            .iter()
            .position(|e| &e.species == species)
            .ok_or_else(|| MetricsError::SpeciesNotRanked {
                species: species.clone(),
            })?;
        ranking.remove(pos);
    }
    Ok(MetaSnapshot {
        ranking,
        meta_size: a.meta_size,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TierReport {
    /// Tier label order as declared, with the residual "below" appended to
    /// composition.
    pub capture: Vec<(String, f64)>,
    pub composition: Vec<(String, f64)>,
}

/// Capture (fraction of each tier found in the meta set) and composition
/// (fraction of the meta set belonging to each tier, with a residual
/// "below" bucket for species outside the declared tiers).
pub fn tier_capture(
    b: &MetaSnapshot,
    tier_map: &HashMap<String, String>,
    tiers: &[String],
) -> Result<TierReport, MetricsError> {
    for e in &b.ranking {
        if !tier_map.contains_key(&e.species) {
            return Err(MetricsError::MissingTier {
                species: e.species.clone(),
            });
        }
    }
    let meta = b.meta_set();
    let mut capture = Vec::new();
    let mut composition = Vec::new();
    let mut counted = 0usize;
    for t in tiers {
        let tier_members: Vec<&str> = tier_map
            .iter()
            .filter(|(_, v)| *v == t)
            .map(|(k, _)| k.as_str())
            .collect();
        let hit = tier_members.iter().filter(|s| meta.contains(**s)).count();
        let cap = if tier_members.is_empty() {
            0.0
        } else {
            hit as f64 / tier_members.len() as f64
        };
        capture.push((t.clone(), cap));
        composition.push((t.clone(), hit as f64 / b.meta_size as f64));
        counted += hit;
    }
    let below = meta.len().saturating_sub(counted);
    composition.push(("below".to_string(), below as f64 / b.meta_size as f64));
    Ok(TierReport {
        capture,
        composition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::MetaEntry;

    fn snap(species: &[&str], meta_size: usize) -> MetaSnapshot {
        MetaSnapshot {
            ranking: species
                .iter()
                .enumerate()
                .map(|(i, s)| MetaEntry {
                    species: s.to_string(),
                    pickrate: 1.0 - i as f64 * 0.01,
                    winrate: 0.5,
                })
                .collect(),
            meta_size,
        }
    }

    #[test]
    fn overlap_identical_disjoint_and_paper_value() {
        let a = snap(&["a", "b", "c", "d"], 3);
        assert_eq!(overlap(&a, &a).unwrap(), 1.0);
        let b = snap(&["x", "y", "z"], 3);
        assert_eq!(overlap(&a, &b).unwrap(), 0.0);
        // 40-entry sets sharing 39 members: 39/40 = 0.975.
        let names_a: Vec<String> = (0..40).map(|i| format!("m{i}")).collect();
        let mut names_b = names_a.clone();
        names_b[39] = "other".into();
        let sa = snap(&names_a.iter().map(|s| s.as_str()).collect::<Vec<_>>(), 40);
        let sb = snap(&names_b.iter().map(|s| s.as_str()).collect::<Vec<_>>(), 40);
        assert!((overlap(&sa, &sb).unwrap() - 0.975).abs() < 1e-12);
        assert!(matches!(
            overlap(&a, &snap(&["a"], 1)),
            Err(MetricsError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn overlap_is_symmetric() {
        let a = snap(&["a", "b", "c", "d", "e"], 4);
        let b = snap(&["c", "d", "e", "f", "a"], 4);
        assert_eq!(overlap(&a, &b).unwrap(), overlap(&b, &a).unwrap());
    }

    #[test]
    fn edit_distance_basics() {
        let a = snap(&["a", "b", "c"], 3);
        assert_eq!(edit_distance(&a, &a).unwrap(), 0.0);
        let swapped = snap(&["b", "a", "c"], 3);
        assert!((edit_distance(&a, &swapped).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let disjoint = snap(&["x", "y"], 2);
        assert!(matches!(
            edit_distance(&a, &disjoint),
            Err(MetricsError::EmptyIntersection)
        ));
    }

    #[test]
    fn edit_distance_partial_overlap_counts_common_only() {
        // a: [p q r s], x: [r q t]. Common: p? no. q: |2-2|=0, r: |3-1|=2.
        let a = snap(&["p", "q", "r", "s"], 2);
        let x = snap(&["r", "q", "t"], 2);
        assert!((edit_distance(&a, &x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edit_distance_delta_composition() {
        let a = snap(&["a", "b", "c", "d"], 4);
        let b = snap(&["d", "c", "b", "a"], 4);
        assert_eq!(edit_distance_delta(&a, &b, &b).unwrap(), 0.0);
        let b2 = snap(&["a", "b", "d", "c"], 4);
        let want = (edit_distance(&a, &b).unwrap() - edit_distance(&a, &b2).unwrap()).abs();
        assert_eq!(edit_distance_delta(&a, &b, &b2).unwrap(), want);
    }

    #[test]
    fn spearman_concordant_and_reversed() {
        let up: Vec<(f64, f64)> = (0..8).map(|i| (i as f64, 10.0 + i as f64)).collect();
        let r = spearman(&up).unwrap();
        assert!((r.rho - 1.0).abs() < 1e-12);
        let down: Vec<(f64, f64)> = (0..8).map(|i| (i as f64, -(i as f64))).collect();
        let r = spearman(&down).unwrap();
        assert!((r.rho + 1.0).abs() < 1e-12);
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn spearman_monotone_transform_invariance() {
        let base: Vec<(f64, f64)> = vec![
            (3.0, 9.0),
            (1.0, 2.0),
            (4.0, 7.0),
            (1.5, 3.0),
            (5.0, 5.0),
            (9.0, 8.0),
        ];
        let transformed: Vec<(f64, f64)> = base
            .iter()
            .map(|&(x, y)| (x.exp(), y * y * y))
            .collect();
        let a = spearman(&base).unwrap();
        let b = spearman(&transformed).unwrap();
        assert!((a.rho - b.rho).abs() < 1e-12);
    }

    #[test]
    fn spearman_ties_match_textbook_formula() {
        // Pairs with ties; oracle: explicit average-rank transform, then
        // textbook Pearson over the ranks.
        let pairs: Vec<(f64, f64)> = vec![
            (1.0, 2.0),
            (2.0, 2.0),
            (2.0, 5.0),
            (3.0, 4.0),
            (5.0, 4.0),
            (5.0, 9.0),
            (5.0, 1.0),
            (7.0, 8.0),
            (8.0, 8.0),
            (9.0, 10.0),
        ];
        // Oracle ranks computed by hand-checked helper logic, written
        // independently of rank_transform.
        fn oracle_ranks(v: &[f64]) -> Vec<f64> {
            v.iter()
                .map(|&a| {
                    let less = v.iter().filter(|&&b| b < a).count() as f64;
                    let equal = v.iter().filter(|&&b| b == a).count() as f64;
                    less + (equal + 1.0) / 2.0
                })
                .collect()
        }
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let rx = oracle_ranks(&xs);
        let ry = oracle_ranks(&ys);
        let n = pairs.len() as f64;
        let mx = rx.iter().sum::<f64>() / n;
        let my = ry.iter().sum::<f64>() / n;
        let num: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        let dx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
        let dy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
        let expected = num / (dx * dy).sqrt();
        let got = spearman(&pairs).unwrap();
        assert!((got.rho - expected).abs() < 1e-12);
    }

    #[test]
    fn spearman_degenerate_inputs() {
        assert!(matches!(
            spearman(&[(1.0, 1.0)]),
            Err(MetricsError::TooFewPairs { n: 1 })
        ));
        let tied: Vec<(f64, f64)> = (0..5).map(|i| (3.0, i as f64)).collect();
        assert!(matches!(spearman(&tied), Err(MetricsError::AllTied)));
    }

    #[test]
    fn spearman_exact_small_sample() {
        // Perfect concordance on n=4: only the identity and full-tie-free
        // equivalent orderings reach |rho| = 1, so p = 2/4! = 1/12.
        let pairs: Vec<(f64, f64)> = (0..4).map(|i| (i as f64, i as f64)).collect();
        let r = spearman_exact(&pairs).unwrap();
        assert!((r.rho - 1.0).abs() < 1e-12);
        assert!((r.p_value - 2.0 / 24.0).abs() < 1e-12);
        let big: Vec<(f64, f64)> = (0..11).map(|i| (i as f64, i as f64)).collect();
        assert!(matches!(
            spearman_exact(&big),
            Err(MetricsError::PermutationTooLarge { .. })
        ));
    }

    #[test]
    fn naive_baseline_surgery() {
        let a = snap(&["a", "b", "c", "d", "e"], 3);
        let out = naive_baseline(&a, &["a".into()]).unwrap();
        assert_eq!(out.ranking[0].species, "b");
        assert_eq!(out.ranking.len(), 4);
        assert!(out.meta_set().contains("d"));

        // Ban below the cut: meta set unchanged.
        let out = naive_baseline(&a, &["e".into()]).unwrap();
        assert_eq!(out.meta_set(), a.meta_set());

        assert!(matches!(
            naive_baseline(&a, &["zz".into()]),
            Err(MetricsError::SpeciesNotRanked { .. })
        ));
    }

    #[test]
    fn naive_baseline_preserves_survivor_order() {
        let a = snap(&["a", "b", "c", "d", "e", "f"], 4);
        let out = naive_baseline(&a, &["c".into(), "a".into()]).unwrap();
        let order: Vec<&str> = out.ranking.iter().map(|e| e.species.as_str()).collect();
        assert_eq!(order, vec!["b", "d", "e", "f"]);
    }

    #[test]
    fn tier_capture_and_composition() {
        let b = snap(&["a", "b", "c", "d", "e", "f"], 4);
        let mut map = HashMap::new();
        for (s, t) in [
            ("a", "AG"),
            ("b", "AG"),
            ("c", "OU"),
            ("d", "UU"),
            ("e", "OU"),
            ("f", "UU"),
        ] {
            map.insert(s.to_string(), t.to_string());
        }
        let tiers = vec!["AG".to_string(), "OU".to_string()];
        let rep = tier_capture(&b, &map, &tiers).unwrap();
        // Meta set = {a,b,c,d}. AG fully captured; OU 1 of 2.
        assert_eq!(rep.capture[0], ("AG".to_string(), 1.0));
        assert_eq!(rep.capture[1], ("OU".to_string(), 0.5));
        // Composition: AG 2/4, OU 1/4, below (d is UU, undeclared) 1/4.
        assert_eq!(rep.composition[0].1, 0.5);
        assert_eq!(rep.composition[1].1, 0.25);
        assert_eq!(rep.composition[2], ("below".to_string(), 0.25));
        let total: f64 = rep.composition.iter().map(|(_, v)| v).sum();
        assert!((total - 1.0).abs() < 1e-12);

        map.remove("f");
        assert!(matches!(
            tier_capture(&b, &map, &tiers),
            Err(MetricsError::MissingTier { .. })
        ));
    }
}
