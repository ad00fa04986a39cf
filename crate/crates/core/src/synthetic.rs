//! Synthetic projects that reproduce given aggregate statistics.
//!
//! Used to stand in for mined defect data at realistic scale. A profile fixes
//! `|S|`, `|S_DEF|`, `|D|`, `mean(|d|)` and the mean artifact size; the
//! generator hits the counts exactly and the two means up to integer rounding
//! of their totals.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Artifact, Defect, Project, Relationship};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectProfile {
    pub name: String,
    pub n_artifacts: usize,
    pub n_defective: usize,
    pub n_defects: usize,
    pub mean_members: f64,
    pub mean_size: f64,
}

impl ProjectProfile {
    fn new(name: &str, s: usize, s_def: usize, d: usize, members: f64, loc: f64) -> Self {
        Self {
            name: name.to_string(),
            n_artifacts: s,
            n_defective: s_def,
            n_defects: d,
            mean_members: members,
            mean_size: loc,
        }
    }
}

/// Aggregates of the fifteen Apache projects used in the original study.
pub fn apache_profiles() -> Vec<ProjectProfile> {
    [
        ("archiva", 508, 6, 4, 2.00, 108.85),
        ("cayenne", 2121, 281, 74, 5.12, 73.46),
        ("commons-math", 789, 2, 2, 1.00, 112.94),
        ("deltaspike", 793, 14, 13, 1.31, 56.17),
        ("falcon", 577, 38, 33, 2.91, 121.82),
        ("kafka", 1119, 201, 212, 2.00, 87.54),
        ("kylin", 1094, 170, 138, 1.95, 105.98),
        ("nutch", 414, 37, 30, 1.73, 106.74),
        ("storm", 1981, 173, 138, 1.88, 114.68),
        ("struts", 1334, 61, 38, 2.26, 79.36),
        ("tez", 803, 94, 71, 1.98, 129.33),
        ("tika", 694, 44, 35, 1.62, 105.06),
        ("wss4j", 501, 10, 7, 2.00, 110.55),
        ("zeppelin", 394, 89, 142, 1.63, 177.53),
        ("zookeeper", 380, 41, 27, 1.85, 113.21),
    ]
    .into_iter()
    .map(|(n, s, sd, d, m, l)| ProjectProfile::new(n, s, sd, d, m, l))
    .collect()
}

/// Generates an n-to-m project matching `profile`.
pub fn synthesize(profile: &ProjectProfile, seed: u64) -> Result<Project> {
    let n = profile.n_artifacts;
    let n_def = profile.n_defective;
    let n_d = profile.n_defects;
    if n_def > n || (n_d == 0) != (n_def == 0) {
        return Err(Error::InvalidParam(format!(
            "profile {} is inconsistent: {n_def} defective of {n} artifacts with {n_d} defects",
            profile.name
        )));
    }
    let total_members = ((n_d as f64 * profile.mean_members).round() as usize)
        .clamp(n_d.max(n_def), n_d * n_def);
    let total_size = ((profile.mean_size * n as f64).round() as u64).max(n as u64);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sizes = split_total(&mut rng, total_size, n);
    let artifacts: Vec<Artifact> = sizes
        .into_iter()
        .enumerate()
        .map(|(i, size)| Artifact::new(format!("{}/F{i:05}.java", profile.name), size))
        .collect();

    // Cardinalities: every defect gets one artifact, the rest is spread at
    // random without exceeding |S_DEF|.
    let mut card = vec![1usize; n_d];
    for _ in 0..total_members.saturating_sub(n_d) {
        loop {
            let d = rng.random_range(0..n_d);
            if card[d] < n_def {
                card[d] += 1;
                break;
            }
        }
    }

    // Walking a shuffled S_DEF cyclically keeps members of one defect
    // distinct and, because Σ|d| ≥ |S_DEF|, touches every defective artifact.
    let mut defective: Vec<usize> = index::sample(&mut rng, n, n_def).into_vec();
    defective.shuffle(&mut rng);
    let mut slot = 0usize;
    let defects = card
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let members = (0..k).map(|j| defective[(slot + j) % n_def]).collect();
            slot += k;
            Defect::new(format!("{}-{}", profile.name.to_uppercase(), i + 1), members)
        })
        .collect();
    Ok(Project::from_defects(artifacts, defects, Relationship::NtoM)?.with_name(&profile.name))
}

/// `n` positive integers summing to `total`, with random proportions.
fn split_total(rng: &mut ChaCha8Rng, total: u64, n: usize) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    let extra = total - n as u64;
    let weights: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let sum: f64 = weights.iter().sum();
    let mut sizes: Vec<u64> = weights
        .iter()
        .map(|w| 1 + (w / sum * extra as f64).floor() as u64)
        .collect();
    let assigned: u64 = sizes.iter().sum();
    let mut rest = total - assigned;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        sizes[i] += 1;
        rest -= 1;
    }
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::summarize;

    #[test]
    fn falcon_aggregates() {
        let falcon = apache_profiles().into_iter().find(|p| p.name == "falcon").unwrap();
        let p = synthesize(&falcon, 1).unwrap();
        let s = summarize(&p);
        assert_eq!((s.n_artifacts, s.n_defective, s.n_defects), (577, 38, 33));
        assert!((s.mean_members - 2.91).abs() <= 0.01, "{}", s.mean_members);
        assert!((s.mean_size - 121.82).abs() <= 0.5, "{}", s.mean_size);
    }

    #[test]
    fn every_profile_is_reproduced() {
        for profile in apache_profiles() {
            let p = synthesize(&profile, 11).unwrap();
            let s = summarize(&p);
            assert_eq!(s.n_artifacts, profile.n_artifacts, "{}", profile.name);
            assert_eq!(s.n_defective, profile.n_defective, "{}", profile.name);
            assert_eq!(s.n_defects, profile.n_defects, "{}", profile.name);
            assert!((s.mean_members - profile.mean_members).abs() <= 0.01, "{}", profile.name);
            assert!((s.mean_size - profile.mean_size).abs() <= 0.5, "{}", profile.name);
        }
    }

    #[test]
    fn generation_is_seeded() {
        let profile = &apache_profiles()[0];
        assert_eq!(synthesize(profile, 5).unwrap(), synthesize(profile, 5).unwrap());
        assert_ne!(synthesize(profile, 5).unwrap(), synthesize(profile, 6).unwrap());
    }
}
