//! Synthetic cross-domain datasets with planted salient groups.
//!
//! Labels come from a random linear map over the planted groups only:
//! `y = argmax(W^T x_planted + noise_sigma * eta)` with column-orthonormal
//! `W`. After the draw the planted block is nudged by a fixed margin along
//! the winning column, which separates the classes without changing the
//! argmax (the nudge only raises the winner's score), so with
//! `noise_sigma = 0` labels remain an exact function of the planted
//! features. Nuisance groups are label-independent noise; on the target
//! domain their means are offset by `shift_magnitude` along a per-group
//! random direction, giving the domain-alignment term something real to
//! correct.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{DomainPair, GroupedFeatureMatrix, LabelMatrix};
use crate::error::{Error, Result};
use crate::layout::{build_grid_layout, GroupLayout};

/// Separation between class clusters in the planted subspace. Chosen so the
/// plain least-squares readout recovers labels near-perfectly at moderate
/// sample counts while noise_sigma/shift_magnitude stay meaningful knobs.
const CLASS_MARGIN: f64 = 3.0;

/// Generator parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticSpec {
    pub k: usize,
    pub d: usize,
    /// Category count.
    pub c: usize,
    pub n_source: usize,
    pub n_target: usize,
    /// Indices of the groups that carry label signal.
    pub planted: Vec<usize>,
    /// Mean offset applied to target-domain nuisance groups.
    pub shift_magnitude: f64,
    /// Std-dev of the score noise injected before the label argmax.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d == 0 || self.c == 0 || self.n_source == 0 || self.n_target == 0 {
            return Err(Error::InvalidInput(
                "synthetic spec: all dimensions must be >= 1".into(),
            ));
        }
        if self.planted.is_empty() {
            return Err(Error::InvalidInput(
                "planted: at least one group required".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for &g in &self.planted {
            if g >= self.k {
                return Err(Error::InvalidInput(format!(
                    "planted: group {g} out of range (K = {})",
                    self.k
                )));
            }
            if !seen.insert(g) {
                return Err(Error::InvalidInput(format!("planted: group {g} repeated")));
            }
        }
        if self.planted.len() * self.d < self.c {
            return Err(Error::InvalidInput(format!(
                "planted dimensions ({} groups x d={}) must be >= C = {} to span the classes",
                self.planted.len(),
                self.d,
                self.c
            )));
        }
        if !(self.shift_magnitude.is_finite() && self.shift_magnitude >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "shift_magnitude: must be >= 0, got {}",
                self.shift_magnitude
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise_sigma: must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// A generated dataset: the pair, the target's ground-truth labels, and the
/// planted group set.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub pair: DomainPair,
    pub target_labels: LabelMatrix,
    pub planted: Vec<usize>,
}

fn default_layout(k: usize) -> GroupLayout {
    if k == 85 {
        build_grid_layout(&[1, 2, 4, 8], (112, 112)).expect("85-region grid")
    } else {
        // geometry is irrelevant for synthetic data; stack whole-frame cells
        build_grid_layout(&vec![1; k], (112, 112)).expect("stacked grid")
    }
}

/// Gram-Schmidt orthonormalization of the columns of a tall matrix.
fn orthonormalize_columns(mut w: Array2<f64>) -> Array2<f64> {
    let cols = w.ncols();
    for j in 0..cols {
        for prev in 0..j {
            let dot = w.column(j).dot(&w.column(prev));
            let prev_col = w.column(prev).to_owned();
            w.column_mut(j)
                .zip_mut_with(&prev_col, |x, &p| *x -= dot * p);
        }
        let norm = w.column(j).dot(&w.column(j)).sqrt();
        w.column_mut(j).mapv_inplace(|x| x / norm);
    }
    w
}

struct DomainDraw {
    features: Array2<f64>,
    labels: Vec<usize>,
}

fn draw_domain(
    rng: &mut ChaCha8Rng,
    spec: &SyntheticSpec,
    w: &Array2<f64>,
    is_target: bool,
) -> DomainDraw {
    let (k, d) = (spec.k, spec.d);
    let n = if is_target {
        spec.n_target
    } else {
        spec.n_source
    };
    let p = spec.planted.len() * d;
    let mut features = Array2::from_shape_fn((k * d, n), |_| rng.sample::<f64, _>(StandardNormal));
    let mut labels = Vec::with_capacity(n);
    for j in 0..n {
        let mut xp = Array1::<f64>::zeros(p);
        for (gi, &g) in spec.planted.iter().enumerate() {
            for r in 0..d {
                xp[gi * d + r] = features[(g * d + r, j)];
            }
        }
        let mut scores = w.t().dot(&xp);
        for s in scores.iter_mut() {
            *s += spec.noise_sigma * rng.sample::<f64, _>(StandardNormal);
        }
        let label = crate::predict::argmax(scores.as_slice().expect("contiguous"));
        labels.push(label);
        // margin nudge along the winning column
        for (gi, &g) in spec.planted.iter().enumerate() {
            for r in 0..d {
                features[(g * d + r, j)] += CLASS_MARGIN * w[(gi * d + r, label)];
            }
        }
    }
    if is_target {
        // per-group shift directions are always drawn so that the random
        // stream is identical across shift magnitudes
        for g in 0..k {
            let mut dir = Array1::from_shape_fn(d, |_| rng.sample::<f64, _>(StandardNormal));
            let norm = dir.dot(&dir).sqrt();
            if norm > 0.0 {
                dir.mapv_inplace(|x| x / norm);
            }
            if spec.shift_magnitude > 0.0 && !spec.planted.contains(&g) {
                for r in 0..d {
                    let offset = spec.shift_magnitude * dir[r];
                    for j in 0..n {
                        features[(g * d + r, j)] += offset;
                    }
                }
            }
        }
    }
    DomainDraw { features, labels }
}

/// Generate a dataset. Fully deterministic: identical parameters and seed
/// reproduce identical matrices.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p = spec.planted.len() * spec.d;
    let w_raw = Array2::from_shape_fn((p, spec.c), |_| rng.sample::<f64, _>(StandardNormal));
    let w = orthonormalize_columns(w_raw);

    let source = draw_domain(&mut rng, spec, &w, false);
    let target = draw_domain(&mut rng, spec, &w, true);

    let categories: Vec<String> = (0..spec.c).map(|i| format!("class{i}")).collect();
    let layout = default_layout(spec.k);
    let pair = DomainPair::new(
        GroupedFeatureMatrix::new(spec.k, spec.d, source.features)?,
        GroupedFeatureMatrix::new(spec.k, spec.d, target.features)?,
        LabelMatrix::from_indices(&source.labels, categories.clone())?,
        layout,
    )?;
    let target_labels = LabelMatrix::from_indices(&target.labels, categories)?;
    let mut planted = spec.planted.clone();
    planted.sort_unstable();
    Ok(SyntheticData {
        pair,
        target_labels,
        planted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{grid_search, GridConfig, GridSpec};
    use crate::metrics::{confusion, macro_f1};
    use crate::predict::classify_batch;
    use crate::problem::build_augmented_problem;
    use crate::solver::{solve, SolverOptions};

    fn spec(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            k: 10,
            d: 4,
            c: 3,
            n_source: 60,
            n_target: 50,
            planted: vec![1, 4, 7],
            shift_magnitude: 0.0,
            noise_sigma: 0.0,
            seed,
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let a = generate(&spec(99)).unwrap();
        let b = generate(&spec(99)).unwrap();
        assert_eq!(a.pair.source().data(), b.pair.source().data());
        assert_eq!(a.pair.target().data(), b.pair.target().data());
        assert_eq!(a.pair.source_labels().data(), b.pair.source_labels().data());
        assert_eq!(a.target_labels.data(), b.target_labels.data());

        let c = generate(&spec(100)).unwrap();
        assert_ne!(a.pair.source().data(), c.pair.source().data());
    }

    #[test]
    fn zero_shift_keeps_group_means_close() {
        let mut s = spec(3);
        s.n_source = 400;
        s.n_target = 400;
        let data = generate(&s).unwrap();
        // nuisance group means should agree up to sampling noise ~ 1/sqrt(N)
        for g in 0..s.k {
            if s.planted.contains(&g) {
                continue;
            }
            let src = data.pair.source().group_slice(g).unwrap();
            let tgt = data.pair.target().group_slice(g).unwrap();
            for r in 0..s.d {
                let ms: f64 = src.row(r).sum() / 400.0;
                let mt: f64 = tgt.row(r).sum() / 400.0;
                assert!((ms - mt).abs() < 0.3, "group {g} dim {r}: {ms} vs {mt}");
            }
        }
    }

    #[test]
    fn shifted_nuisance_groups_move_their_means() {
        let mut s = spec(4);
        s.shift_magnitude = 5.0;
        s.n_target = 300;
        let data = generate(&s).unwrap();
        let mut moved = 0;
        for g in 0..s.k {
            if s.planted.contains(&g) {
                continue;
            }
            let tgt = data.pair.target().group_slice(g).unwrap();
            let mean_norm: f64 = (0..s.d)
                .map(|r| {
                    let m: f64 = tgt.row(r).sum() / 300.0;
                    m * m
                })
                .sum::<f64>()
                .sqrt();
            if mean_norm > 2.5 {
                moved += 1;
            }
        }
        assert_eq!(moved, s.k - s.planted.len());
    }

    #[test]
    fn validation_errors() {
        let mut s = spec(1);
        s.planted = vec![];
        assert!(generate(&s).is_err());
        s.planted = vec![3, 3];
        assert!(generate(&s).is_err());
        s.planted = vec![99];
        assert!(generate(&s).is_err());
        s = spec(1);
        s.noise_sigma = -0.1;
        assert!(generate(&s).is_err());
    }

    /// Invariant: noiseless, unshifted data with kappa = |planted| and
    /// xi = 0 is recovered near-perfectly whenever N >= 20*C.
    #[test]
    fn noiseless_instance_is_recovered() {
        let s = SyntheticSpec {
            k: 12,
            d: 4,
            c: 3,
            n_source: 70,
            n_target: 60,
            planted: vec![2, 7, 9],
            shift_magnitude: 0.0,
            noise_sigma: 0.0,
            seed: 17,
        };
        let data = generate(&s).unwrap();
        let problem = build_augmented_problem(&data.pair, 0.0).unwrap();
        let result = solve(&problem, &SolverOptions::new(3)).unwrap();
        for g in &data.planted {
            assert!(result.selected_groups.contains(g));
        }
        let preds: Vec<usize> = classify_batch(
            &result.c_hat.view(),
            s.d,
            &data.pair.target().data().view(),
            data.pair.source_labels().categories(),
        )
        .unwrap()
        .iter()
        .map(|p| p.class_index)
        .collect();
        let cm = confusion(
            &preds,
            &data.target_labels.class_indices(),
            data.pair.source_labels().categories().to_vec(),
        )
        .unwrap();
        assert!(macro_f1(&cm) >= 0.95, "macro F1 {}", macro_f1(&cm));
    }

    /// Smoke check of the alignment term's purpose: growing the nuisance
    /// shift degrades the unaligned model on average, and searching xi wins
    /// back at least half of the lost score.
    #[test]
    fn shift_degrades_and_xi_recovers() {
        let shifts = [0.0, 3.0, 6.0];
        let seeds: Vec<u64> = (0..10).collect();
        let xi_values = [0.01, 0.1, 1.0, 10.0, 100.0];

        let score_at = |shift: f64, xi: f64, seed: u64| -> f64 {
            let s = SyntheticSpec {
                k: 20,
                d: 10,
                c: 3,
                n_source: 60,
                n_target: 60,
                planted: vec![3, 11, 15],
                shift_magnitude: shift,
                noise_sigma: 1.5,
                seed,
            };
            let data = generate(&s).unwrap();
            let problem = build_augmented_problem(&data.pair, xi).unwrap();
            let result = solve(&problem, &SolverOptions::new(20)).unwrap();
            let preds: Vec<usize> = classify_batch(
                &result.c_hat.view(),
                s.d,
                &data.pair.target().data().view(),
                data.pair.source_labels().categories(),
            )
            .unwrap()
            .iter()
            .map(|p| p.class_index)
            .collect();
            let cm = confusion(
                &preds,
                &data.target_labels.class_indices(),
                data.pair.source_labels().categories().to_vec(),
            )
            .unwrap();
            macro_f1(&cm)
        };

        let mut avg = [0.0; 3];
        for (i, &shift) in shifts.iter().enumerate() {
            for &seed in &seeds {
                avg[i] += score_at(shift, 0.0, seed);
            }
            avg[i] /= seeds.len() as f64;
        }
        assert!(
            avg[0] >= avg[1] && avg[1] >= avg[2],
            "average macro F1 should fall with shift: {avg:?}"
        );
        let lost = avg[0] - avg[2];
        assert!(lost > 0.0);

        // best xi over the sub-grid at the largest shift, same seeds
        let mut recovered_avg = 0.0;
        for &seed in &seeds {
            let best = xi_values
                .iter()
                .map(|&xi| score_at(6.0, xi, seed))
                .fold(f64::MIN, f64::max);
            recovered_avg += best;
        }
        recovered_avg /= seeds.len() as f64;
        let recovered = recovered_avg - avg[2];
        assert!(
            recovered >= 0.5 * lost,
            "xi search recovered {recovered:.4} of {lost:.4} lost"
        );
    }

    #[test]
    fn generated_data_plugs_into_grid_search() {
        let data = generate(&spec(8)).unwrap();
        let grid = GridSpec {
            kappa_values: vec![3],
            xi_values: vec![0.0],
        };
        let cfg = GridConfig::new(SolverOptions::new(1));
        let result = grid_search(&data.pair, &data.target_labels, &grid, &cfg).unwrap();
        assert_eq!(result.points.len(), 1);
    }
}
