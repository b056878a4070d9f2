//! Synthetic cohort generation with a planted, order-sensitive signal.
//!
//! Each patient draws a visit sequence from seeded per-patient streams. A
//! latent risk is the sum of two parts:
//!
//! - recency-weighted risk intensity: per visit, the mean risk-code weight
//!   over the visit's codes, scaled by exp(−decay·age_days). The per-visit
//!   mean (rather than a raw count) keeps the signal representable under
//!   mean-pooled visit encodings, and the decay makes WHERE the codes sit
//!   matter more than how often they appear;
//! - an order interaction: designated code pairs (a, b) add +strength when
//!   a's first visit precedes b's and −strength when the order is reversed.
//!
//! Background codes are noise. Labels are Bernoulli(σ(bias + risk)) with
//! the bias calibrated by bisection so the expected prevalence matches the
//! target. Both parts are invisible to a bag-of-codes model: presence says
//! nothing about recency or order. That is what separates sequence models
//! from the LR baseline on these cohorts.

use alloc::format;
use alloc::vec::Vec;

use crate::data::{PatientRecord, Visit, Vocabulary};
use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;

/// Probability that a drawn code comes from the signal pool (risk and pair
/// codes) rather than the background region.
const SIGNAL_POOL_PROB: f64 = 0.35;
/// Risk-code weights are uniform in this range. Sized so the per-visit
/// mean intensity swings by a few logits between risky and clean visits.
const WEIGHT_RANGE: (f64, f64) = (10.0, 20.0);
/// Bias search interval for prevalence calibration.
const BIAS_RANGE: (f64, f64) = (-50.0, 50.0);

/// Knobs of the synthetic cohort generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n_patients: usize,
    pub vocab_size: usize,
    /// Fraction of the vocabulary acting as weighted risk codes; a third as
    /// many pair slots (at least one) drive the order interaction.
    pub risk_code_fraction: f64,
    pub mean_visits: f64,
    pub mean_codes_per_visit: f64,
    pub mean_gap_days: f64,
    /// Magnitude of the ± order-interaction bonus per active pair.
    pub interaction_strength: f64,
    /// Exponential decay rate per day of code age.
    pub time_decay: f64,
    /// Target label prevalence in (0, 1).
    pub prevalence: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Defaults tuned so sequence models separate cleanly from bag-of-codes
    /// baselines; override fields as needed.
    pub fn defaults(n_patients: usize, vocab_size: usize, prevalence: f64, seed: u64) -> Self {
        GeneratorSpec {
            n_patients,
            vocab_size,
            risk_code_fraction: 0.05,
            mean_visits: 6.0,
            mean_codes_per_visit: 8.0,
            mean_gap_days: 30.0,
            interaction_strength: 2.0,
            time_decay: 0.02,
            prevalence,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("n_patients", self.n_patients as f64),
            ("vocab_size", self.vocab_size as f64),
            ("risk_code_fraction", self.risk_code_fraction),
            ("mean_visits", self.mean_visits),
            ("mean_codes_per_visit", self.mean_codes_per_visit),
            ("mean_gap_days", self.mean_gap_days),
            ("interaction_strength", self.interaction_strength),
            ("time_decay", self.time_decay),
        ];
        for (name, v) in positives {
            if !(v > 0.0) {
                return Err(Error::Invalid(format!("generator spec: {name} must be positive")));
            }
        }
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(Error::Invalid(format!(
                "generator spec: prevalence {} outside (0, 1)",
                self.prevalence
            )));
        }
        Ok(())
    }
}

struct SignalPlan {
    /// Weight per risk code, indexed by id−1 for ids 1..=n_risk.
    risk_weights: Vec<f64>,
    /// Ordered pairs (a, b) of code ids.
    pairs: Vec<(u32, u32)>,
    /// Ids 1..=signal_end are the signal pool; the rest is background.
    signal_end: u32,
    vocab_size: u32,
}

impl SignalPlan {
    fn build(spec: &GeneratorSpec, root: &Rng) -> Self {
        let v = spec.vocab_size as u32;
        let n_risk = (math::floor(spec.vocab_size as f64 * spec.risk_code_fraction + 0.5) as u32)
            .clamp(1, v);
        // A few dense pairs beat many sparse ones: each pair has to show up
        // in enough training patients for its order to be learnable.
        let n_pairs = (n_risk / 3).max(1).min((v - n_risk) / 2);
        let mut weight_rng = root.stream("risk-weights", 0);
        let risk_weights: Vec<f64> =
            (0..n_risk).map(|_| weight_rng.uniform(WEIGHT_RANGE.0, WEIGHT_RANGE.1)).collect();
        let pairs: Vec<(u32, u32)> = (0..n_pairs)
            .map(|j| (n_risk + 2 * j + 1, n_risk + 2 * j + 2))
            .collect();
        SignalPlan {
            risk_weights,
            pairs,
            signal_end: n_risk + 2 * n_pairs,
            vocab_size: v,
        }
    }

    fn weight_of(&self, code: u32) -> Option<f64> {
        if code >= 1 && (code as usize) <= self.risk_weights.len() {
            Some(self.risk_weights[code as usize - 1])
        } else {
            None
        }
    }
}

fn draw_uniform_int(rng: &mut Rng, mean: f64) -> u32 {
    let hi = math::floor(2.0 * mean - 0.5).max(1.0) as u64;
    1 + rng.below(hi) as u32
}

fn draw_patient(plan: &SignalPlan, spec: &GeneratorSpec, rng: &mut Rng) -> (Vec<Visit>, f64) {
    let n_visits = draw_uniform_int(rng, spec.mean_visits) as usize;
    let background = plan.vocab_size - plan.signal_end;

    let mut visits = Vec::with_capacity(n_visits);
    let mut day = 0u64;
    let mut days = Vec::with_capacity(n_visits);
    for t in 0..n_visits {
        let delta = if t == 0 { 0 } else { draw_uniform_int(rng, spec.mean_gap_days) };
        day += u64::from(delta);
        days.push(day);
        let n_codes = draw_uniform_int(rng, spec.mean_codes_per_visit) as usize;
        let mut codes: Vec<u32> = Vec::with_capacity(n_codes);
        for _ in 0..n_codes {
            // A handful of retries keeps visits free of duplicates without
            // making the draw count unbounded.
            for _attempt in 0..16 {
                let from_signal = background == 0 || rng.bernoulli(SIGNAL_POOL_PROB);
                let code = if from_signal {
                    1 + rng.below(u64::from(plan.signal_end)) as u32
                } else {
                    plan.signal_end + 1 + rng.below(u64::from(background)) as u32
                };
                if !codes.contains(&code) {
                    codes.push(code);
                    break;
                }
            }
        }
        codes.sort_unstable();
        visits.push(Visit { delta_days: delta, codes });
    }

    let risk = latent_risk(&visits, &days, plan, spec);
    (visits, risk)
}

/// The generator's own scoring rule; exposed to tests through the risks
/// returned by [`generate_cohort_with_risk`].
fn latent_risk(visits: &[Visit], days: &[u64], plan: &SignalPlan, spec: &GeneratorSpec) -> f64 {
    let last_day = *days.last().expect("at least one visit") as f64;
    let mut risk = 0.0;
    for (visit, &visit_day) in visits.iter().zip(days) {
        let age = last_day - visit_day as f64;
        let recency = math::exp(-spec.time_decay * age);
        let weighted: f64 = visit.codes.iter().filter_map(|&c| plan.weight_of(c)).sum();
        risk += recency * weighted / visit.codes.len() as f64;
    }
    for &(a, b) in &plan.pairs {
        let first_of = |needle: u32| visits.iter().position(|v| v.codes.contains(&needle));
        match (first_of(a), first_of(b)) {
            (Some(fa), Some(fb)) if fa < fb => risk += spec.interaction_strength,
            (Some(fa), Some(fb)) if fb < fa => risk -= spec.interaction_strength,
            _ => {}
        }
    }
    risk
}

fn calibrate_bias(risks: &[f64], target: f64) -> Result<f64> {
    let mean_prob = |bias: f64| {
        risks.iter().map(|&r| math::sigmoid(bias + r)).sum::<f64>() / risks.len() as f64
    };
    let (mut lo, mut hi) = BIAS_RANGE;
    if mean_prob(lo) > target || mean_prob(hi) < target {
        return Err(Error::Numeric(format!(
            "prevalence {target} unreachable within bias range {BIAS_RANGE:?}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_prob(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Generates a cohort; see the module docs for the label model.
pub fn generate_cohort(spec: &GeneratorSpec) -> Result<(Vec<PatientRecord>, Vocabulary)> {
    let (records, vocab, _) = generate_cohort_with_risk(spec)?;
    Ok((records, vocab))
}

/// Like [`generate_cohort`] but also returns each patient's latent risk,
/// the oracle score that upper-bounds what any model can recover.
pub fn generate_cohort_with_risk(
    spec: &GeneratorSpec,
) -> Result<(Vec<PatientRecord>, Vocabulary, Vec<f64>)> {
    spec.validate()?;
    let root = Rng::new(spec.seed);
    let plan = SignalPlan::build(spec, &root);

    let mut vocab = Vocabulary::new();
    for i in 1..=spec.vocab_size {
        vocab.intern(&format!("c{i:05}"));
    }

    let mut all_visits = Vec::with_capacity(spec.n_patients);
    let mut risks = Vec::with_capacity(spec.n_patients);
    for i in 0..spec.n_patients {
        let mut rng = root.stream("patient", i as u64);
        let (visits, risk) = draw_patient(&plan, spec, &mut rng);
        all_visits.push(visits);
        risks.push(risk);
    }

    let bias = calibrate_bias(&risks, spec.prevalence)?;
    let mut records = Vec::with_capacity(spec.n_patients);
    for (i, visits) in all_visits.into_iter().enumerate() {
        let mut label_rng = root.stream("label", i as u64);
        let p = math::sigmoid(bias + risks[i]);
        let label = u8::from(label_rng.bernoulli(p));
        records.push(PatientRecord { patient_id: format!("p{i:06}"), label, visits });
    }
    Ok((records, vocab, risks))
}
